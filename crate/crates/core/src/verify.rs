//! Exhaustive identity sweeps against the brute-force oracle.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boundary::{harmonicity_residual_exact, level_mass_exact, plancherel};
use crate::closed_form::{
    d1_closed, dr_closed, dr_epsilon, dr_suffix_class, f_normalization_holds, fiber_sum_check,
    g_values, s_fiber,
};
use crate::error::{Result, YfError};
use crate::experiments::inequality_scan;
use crate::graph::{degrees, level_size, levels_up_to, LevelTable};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Theorem1,
    DrClosed,
    SuffixClass,
    FiberSum,
    Differential,
    FNormalization,
    GCharacterization,
    Inequalities,
    Plancherel,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Theorem1,
        Suite::DrClosed,
        Suite::SuffixClass,
        Suite::FiberSum,
        Suite::Differential,
        Suite::FNormalization,
        Suite::GCharacterization,
        Suite::Inequalities,
        Suite::Plancherel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::DrClosed => "dr-closed",
            Suite::SuffixClass => "suffix-class",
            Suite::FiberSum => "fiber-sum",
            Suite::Differential => "differential",
            Suite::FNormalization => "f-normalization",
            Suite::GCharacterization => "g-characterization",
            Suite::Inequalities => "inequalities",
            Suite::Plancherel => "plancherel",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub r: u32,
    pub max_weight: usize,
    pub checked: u64,
    pub failures: u64,
    pub first_counterexample: Option<Value>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Running tally that keeps the first failure in sweep order.
#[derive(Default)]
struct Tally {
    checked: u64,
    failures: u64,
    first: Option<Value>,
}

impl Tally {
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> Value) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(detail());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.failures += other.failures;
        if self.first.is_none() {
            self.first = other.first;
        }
        self
    }

    fn report(self, suite: Suite, r: u32, max_weight: usize) -> SuiteReport {
        SuiteReport {
            suite,
            r,
            max_weight,
            checked: self.checked,
            failures: self.failures,
            first_counterexample: self.first,
        }
    }
}

fn merge_ordered(parts: Vec<Tally>) -> Tally {
    parts.into_iter().fold(Tally::default(), Tally::merge)
}

fn show<T: ToString>(x: &std::result::Result<T, YfError>) -> String {
    match x {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

pub fn run_suite(suite: Suite, r: u32, max_weight: usize) -> Result<SuiteReport> {
    if r == 0 {
        return Err(YfError::InvalidR(r));
    }
    let tally = match suite {
        Suite::Theorem1 => closed_vs_dp(1, max_weight, true)?,
        Suite::DrClosed => closed_vs_dp(r, max_weight, false)?,
        Suite::SuffixClass => suffix_classes(r, max_weight)?,
        Suite::FiberSum => fiber_sums(r, max_weight)?,
        Suite::Differential => differential(r, max_weight),
        Suite::FNormalization => f_normalization(max_weight),
        Suite::GCharacterization => g_characterization(r, max_weight),
        Suite::Inequalities => inequalities(r, max_weight)?,
        Suite::Plancherel => plancherel_suite(r, max_weight)?,
    };
    let r = if suite == Suite::Theorem1 || suite == Suite::FNormalization {
        1
    } else {
        r
    };
    Ok(tally.report(suite, r, max_weight))
}

/// Every pair `|w| <= |v| <= max_weight`: closed form against the level-table oracle.
fn closed_vs_dp(r: u32, max_weight: usize, index_free: bool) -> Result<Tally> {
    let table = LevelTable::new(r, max_weight)?;
    let sources: Vec<&Word> = table.levels.iter().flatten().collect();
    let parts: Vec<Tally> = sources
        .par_iter()
        .map(|w| {
            let mut t = Tally::default();
            let counts = table.counts_from(w);
            for n in w.weight()..=max_weight {
                for (k, v) in table.levels[n].iter().enumerate() {
                    let oracle = &counts[n][k];
                    let closed = if index_free {
                        d1_closed(w, v)
                    } else {
                        dr_closed(w, v)
                    };
                    t.check(closed.as_ref() == Ok(oracle), || {
                        json!({"w": w, "v": v, "closed": show(&closed), "dp": oracle.to_string()})
                    });
                    if w.is_empty() {
                        let eps = dr_epsilon(v);
                        t.check(&eps == oracle, || {
                            json!({"w": w, "v": v, "epsilon_formula": eps.to_string(), "dp": oracle.to_string()})
                        });
                    }
                }
            }
            t
        })
        .collect();
    Ok(merge_ordered(parts))
}

/// Every pair and every class `l <= h(w, v)`: closed form against the
/// suffix-restricted oracle, plus the class sum against the full count.
fn suffix_classes(r: u32, max_weight: usize) -> Result<Tally> {
    let table = LevelTable::new(r, max_weight)?;
    let sources: Vec<&Word> = table.levels.iter().flatten().collect();
    let parts: Vec<Tally> = sources
        .par_iter()
        .map(|w| {
            let mut t = Tally::default();
            let keeping: Vec<Vec<Vec<BigUint>>> =
                (0..=w.len()).map(|l| table.counts_keeping(w, l)).collect();
            for n in w.weight()..=max_weight {
                for (k, v) in table.levels[n].iter().enumerate() {
                    let h = w.common_suffix_len(v);
                    let mut sum = BigUint::zero();
                    for l in 0..=h {
                        let at_least = &keeping[l][n][k];
                        let oracle = if l < h {
                            at_least - &keeping[l + 1][n][k]
                        } else {
                            at_least.clone()
                        };
                        let closed = dr_suffix_class(w, v, l);
                        t.check(closed.as_ref() == Ok(&oracle), || {
                            json!({"w": w, "v": v, "l": l, "closed": show(&closed), "oracle": oracle.to_string()})
                        });
                        sum += oracle;
                    }
                    let full = &keeping[0][n][k];
                    t.check(&sum == full, || {
                        json!({"w": w, "v": v, "class_sum": sum.to_string(), "dp": full.to_string()})
                    });
                }
            }
            t
        })
        .collect();
    Ok(merge_ordered(parts))
}

/// Index-free `u` up to weight 4 against every `v` up to `max_weight`.
fn fiber_sums(r: u32, max_weight: usize) -> Result<Tally> {
    let r = r.max(2);
    let table = LevelTable::new(r, max_weight)?;
    let us: Vec<Word> = levels_up_to(1, max_weight.min(4)).into_iter().flatten().collect();
    let parts: Vec<Tally> = us
        .par_iter()
        .map(|u| {
            let mut t = Tally::default();
            let fiber = s_fiber(u, r).expect("r >= 2");
            let fiber_counts: Vec<_> = fiber.iter().map(|w| table.counts_from(w)).collect();
            for n in u.weight()..=max_weight {
                for (k, v) in table.levels[n].iter().enumerate() {
                    let pair = fiber_sum_check(u, v, r);
                    let dp: BigUint = fiber_counts.iter().map(|c| &c[n][k]).sum();
                    let ok = matches!(&pair, Ok((l, rh)) if l == rh && *l == dp);
                    t.check(ok, || {
                        let (lhs, rhs) = match &pair {
                            Ok((a, b)) => (a.to_string(), b.to_string()),
                            Err(e) => (format!("error: {e}"), String::new()),
                        };
                        json!({"u": u, "v": v, "lhs": lhs, "rhs": rhs, "dp": dp.to_string()})
                    });
                }
            }
            t
        })
        .collect();
    Ok(merge_ordered(parts))
}

fn differential(r: u32, max_weight: usize) -> Tally {
    let mut t = Tally::default();
    for (n, lv) in levels_up_to(r, max_weight).iter().enumerate() {
        t.check(BigUint::from(lv.len()) == level_size(r, n), || {
            json!({"n": n, "size": lv.len(), "recurrence": level_size(r, n).to_string()})
        });
        for v in lv {
            let (up, down) = degrees(v);
            t.check(up == down + r as usize, || {
                json!({"v": v, "up": up, "down": down})
            });
        }
    }
    t
}

fn f_normalization(max_weight: usize) -> Tally {
    let mut t = Tally::default();
    for v in levels_up_to(1, max_weight).iter().flatten() {
        t.check(f_normalization_holds(v), || json!({"v": v}));
    }
    t
}

/// g-values against the run-length formula `β_0 + .. + β_{k-1} + 2k - 1`.
fn g_characterization(r: u32, max_weight: usize) -> Tally {
    let mut t = Tally::default();
    for v in levels_up_to(r, max_weight).iter().flatten() {
        let mut runs = vec![0u64];
        for s in v.symbols().iter().rev() {
            if s.is_unit() {
                *runs.last_mut().unwrap() += 1;
            } else {
                runs.push(0);
            }
        }
        let expected: Vec<u64> = (1..runs.len())
            .map(|k| runs[..k].iter().sum::<u64>() + 2 * k as u64 - 1)
            .collect();
        let got = g_values(v);
        let increasing = got.windows(2).all(|p| p[0] < p[1]);
        t.check(got == expected && increasing, || {
            json!({"v": v, "g": got, "expected": expected})
        });
    }
    t
}

fn inequalities(r: u32, max_weight: usize) -> Result<Tally> {
    let scan = inequality_scan(r.max(2), max_weight)?;
    Ok(Tally {
        checked: scan.checked,
        failures: scan.violations,
        first: scan.first_violation,
    })
}

/// Level masses and harmonicity of the Plancherel measure, exactly.
fn plancherel_suite(r: u32, max_weight: usize) -> Result<Tally> {
    let mut t = Tally::default();
    let levels = levels_up_to(r, max_weight);
    for (m, lv) in levels.iter().enumerate() {
        let mass = level_mass_exact(lv, plancherel);
        t.check(mass == num_rational::BigRational::from_integer(1.into()), || {
            json!({"m": m, "mass": mass.to_string()})
        });
    }
    for lv in &levels {
        for w in lv {
            let res = harmonicity_residual_exact(w, plancherel);
            t.check(res.is_zero(), || json!({"w": w, "residual": res.to_string()}));
        }
    }
    Ok(t)
}
