//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::path::PathBuf;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::json;

use yfr::boundary::{BoundaryMeasure, BoundaryVertex, MeasureValue};
use yfr::closed_form::s_fiber;
use yfr::experiments::{
    decreasing_or_converged, gk_ratio_trace, kernel_trace, tail_q_report, tail_r_report,
    tail_trend_holds, TailParams,
};
use yfr::graph::{level_size, levels_up_to};
use yfr::verify::{run_suite, Suite};
use yfr::Word;

/// Radius asked of each boundary-measure evaluation in the fiber identity.
const FIBER_TOL: f64 = 1e-10;
/// Largest combined radius accepted for the fiber identity.
const FIBER_MAX_RADIUS: f64 = 1e-8;
/// Per-level target radius for level masses; masses must sit within 10x of it.
const MASS_TOL: f64 = 1e-9;
const MASS_SLACK: f64 = 10.0;
/// Target radius for kernel and GK traces.
const TRACE_TOL: f64 = 1e-14;
/// Truncation points per trace, and how many of the last ones must trend down.
const TRACE_POINTS: usize = 10;
const TRACE_LAST: usize = 5;
/// Distances below this count as converged in a kernel trace.
const KERNEL_FLOOR: f64 = 1e-6;
/// Tail experiments: last levels in the trend, and the ceiling for the final mass.
const TAIL_LAST: usize = 3;
const TAIL_CEILING: f64 = 0.2;
const TAIL_M_MAX: usize = 6;
const TAIL_TOL: f64 = 1e-9;

const MEASURE_V: &str = "runs=[1,2];idx=cycle(1,2);tail=geometric(4,2);tidx=const(1)";
const TAIL_V: &str = "runs=[1,8];idx=const(1);tail=geometric(16,2);tidx=const(1)";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn suites(runs: &[(Suite, u32, usize)]) -> Outcome {
    let mut failed = Vec::new();
    let mut checked = 0u64;
    for &(suite, r, max) in runs {
        match run_suite(suite, r, max) {
            Ok(rep) => {
                checked += rep.checked;
                if !rep.passed() {
                    failed.push(format!(
                        "{suite} r={r} max={max}: {} failures, first {:?}",
                        rep.failures, rep.first_counterexample
                    ));
                }
            }
            Err(e) => failed.push(format!("{suite} r={r}: {e}")),
        }
    }
    if failed.is_empty() {
        outcome(true, format!("{checked} exact comparisons"))
    } else {
        outcome(false, failed.join("; "))
    }
}

fn oracle_equivalence() -> Outcome {
    suites(&[
        (Suite::Theorem1, 1, 8),
        (Suite::DrClosed, 1, 8),
        (Suite::DrClosed, 2, 7),
        (Suite::DrClosed, 3, 7),
        (Suite::SuffixClass, 2, 7),
        (Suite::SuffixClass, 3, 7),
    ])
}

fn fiber_identities() -> Outcome {
    let counts = suites(&[(Suite::FiberSum, 2, 6), (Suite::FiberSum, 3, 6)]);
    if !counts.pass {
        return counts;
    }
    let us: Vec<Word> = levels_up_to(1, 4).into_iter().flatten().collect();
    let mut worst_radius: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut failures = Vec::new();
    for r in [2u32, 3] {
        let v = BoundaryVertex::parse(MEASURE_V, r).expect("valid vertex");
        for beta in [1.0, 0.7] {
            let full = BoundaryMeasure::new(&v, beta, FIBER_TOL).expect("measure");
            let free = BoundaryMeasure::new(&v.forget(), beta, FIBER_TOL).expect("measure");
            for u in &us {
                let fiber = s_fiber(u, r).expect("fiber");
                let per_word = FIBER_TOL / fiber.len() as f64;
                let mut lhs = MeasureValue::Exact(BigRational::from_integer(0.into()));
                for w in &fiber {
                    lhs = lhs.add(&full.eval_with_tolerance(w, per_word).expect("eval"));
                }
                let rhs = free.eval(u).expect("eval");
                let radius = lhs.radius() + rhs.radius();
                let gap = (lhs.value() - rhs.value()).abs();
                worst_radius = worst_radius.max(radius);
                worst_gap = worst_gap.max(gap);
                if gap > radius || radius > FIBER_MAX_RADIUS {
                    failures.push(format!("r={r} beta={beta} u={u}: gap {gap:e} radius {radius:e}"));
                }
            }
        }
    }
    let detail = format!(
        "{}; measure fibers: max gap {worst_gap:.2e}, max radius {worst_radius:.2e}",
        counts.detail
    );
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; {}", failures.join("; ")))
    }
}

fn plancherel_suite() -> Outcome {
    suites(&[
        (Suite::Plancherel, 1, 10),
        (Suite::Plancherel, 2, 10),
        (Suite::Plancherel, 3, 10),
    ])
}

fn boundary_measures() -> Outcome {
    let v = BoundaryVertex::parse(MEASURE_V, 2).expect("valid vertex");
    let mut failures = Vec::new();
    let mut worst_mass: f64 = 0.0;
    for beta in [1.0, 0.7] {
        let m = BoundaryMeasure::new(&v, beta, MASS_TOL).expect("measure");
        for (lvl, words) in levels_up_to(2, 6).iter().enumerate() {
            let per_word = MASS_TOL / words.len() as f64;
            let values: Vec<MeasureValue> = words
                .par_iter()
                .map(|w| m.eval_with_tolerance(w, per_word).expect("eval"))
                .collect();
            let mass = values
                .iter()
                .fold(MeasureValue::Exact(BigRational::from_integer(0.into())), |acc, x| acc.add(x));
            let off = (mass.value() - 1.0).abs();
            worst_mass = worst_mass.max(off);
            if off > MASS_SLACK * MASS_TOL || mass.radius() > MASS_SLACK * MASS_TOL {
                failures.push(format!("beta={beta} m={lvl}: mass {mass}"));
            }
            if let Some((w, x)) = words.iter().zip(&values).find(|(_, x)| x.upper() < 0.0) {
                failures.push(format!("beta={beta}: negative measure at {w}: {x}"));
            }
        }
    }
    let ws: Vec<Word> = levels_up_to(2, 3).into_iter().flatten().collect();
    let mut traces = 0;
    for beta in [1.0, 0.7] {
        let bad: Vec<String> = ws
            .par_iter()
            .filter_map(|w| {
                let t = kernel_trace(w, &v, beta, TRACE_POINTS, TRACE_TOL).expect("trace");
                (!t.converging(TRACE_LAST, KERNEL_FLOOR)).then(|| {
                    format!("beta={beta} w={w}: {:?}", &t.distances()[t.points.len() - TRACE_LAST..])
                })
            })
            .collect();
        traces += ws.len();
        failures.extend(bad);
    }
    let detail = format!("level masses m<=6 max |mass-1| {worst_mass:.2e}; {traces} kernel traces");
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; {}", failures.join("; ")))
    }
}

fn gk_ratio_law() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for r in [1u32, 2] {
        let v = BoundaryVertex::parse(MEASURE_V.replace("cycle(1,2)", "const(1)").as_str(), r)
            .expect("valid vertex");
        for beta in [1.0, 0.7] {
            for i in [2u64, 3] {
                let t = gk_ratio_trace(&v, beta, i, TRACE_POINTS, TRACE_TOL).expect("trace");
                let d = t.distances();
                let ok = decreasing_or_converged(&d, &t.radii(), TRACE_LAST, 0.0);
                pass &= ok;
                if !ok || r == 2 {
                    lines.push(format!("r={r} beta={beta} i={i} final {:.2e}{}", d[d.len() - 1], if ok { "" } else { " NOT DECREASING" }));
                }
            }
        }
    }
    outcome(pass, lines.join(", "))
}

fn structure() -> Outcome {
    let mut runs = vec![(Suite::FNormalization, 1, 8)];
    for r in [1u32, 2, 3] {
        runs.push((Suite::Differential, r, 10));
        runs.push((Suite::GCharacterization, r, 10));
    }
    let base = suites(&runs);
    let mut bad = Vec::new();
    for r in [1u32, 2, 3] {
        for n in 2..=12usize {
            let rec = BigUint::from(r) * level_size(r, n - 1) + level_size(r, n - 2);
            if level_size(r, n) != rec {
                bad.push(format!("r={r} n={n}"));
            }
        }
        let enumerated: Vec<usize> = levels_up_to(r, 12).iter().map(Vec::len).collect();
        for (n, len) in enumerated.iter().enumerate() {
            if BigUint::from(*len) != level_size(r, n) {
                bad.push(format!("r={r} n={n}: enumerated {len}"));
            }
        }
    }
    let fib: Vec<usize> = levels_up_to(1, 12).iter().map(Vec::len).collect();
    let pell: Vec<usize> = levels_up_to(2, 12).iter().map(Vec::len).collect();
    if fib != [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233] {
        bad.push(format!("r=1 sizes {fib:?}"));
    }
    if pell != [1, 2, 5, 12, 29, 70, 169, 408, 985, 2378, 5741, 13860, 33461] {
        bad.push(format!("r=2 sizes {pell:?}"));
    }
    if bad.is_empty() {
        outcome(base.pass, format!("{}; level sizes to n=12 match", base.detail))
    } else {
        outcome(false, format!("{}; {}", base.detail, bad.join("; ")))
    }
}

fn inequalities() -> Outcome {
    suites(&[(Suite::Inequalities, 2, 6)])
}

fn artifact_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("artifact dir");
    dir
}

fn tail_experiments() -> Outcome {
    let v = BoundaryVertex::parse(TAIL_V, 2).expect("valid vertex");
    let params = TailParams::new(v, 1.0, TAIL_TOL, TAIL_M_MAX);
    let dir = artifact_dir();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut reports = Vec::new();
    for k in [1usize, 2] {
        reports.push((format!("tails_q_k{k}"), tail_q_report(&params, k).expect("report")));
    }
    for eps in [0.2, 0.3] {
        reports.push((format!("tails_r_eps{eps}"), tail_r_report(&params, eps).expect("report")));
    }
    for (name, rep) in &reports {
        let masses = rep.masses();
        let ok = tail_trend_holds(&masses, TAIL_LAST, TAIL_CEILING)
            && rep.rows.iter().all(|row| {
                row.mass.upper() >= 0.0
                    && row.mass.lower() <= 1.0
                    && row.decomposition_holds != Some(false)
            });
        pass &= ok;
        let tail: Vec<String> = masses[masses.len() - TAIL_LAST..]
            .iter()
            .map(|m| format!("{m:.3}"))
            .collect();
        lines.push(format!("{name} [{}]{}", tail.join(", "), if ok { "" } else { " FAIL" }));
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, rep.to_json()).expect("write artifact");
    }
    let summary = json!({
        "vertex": TAIL_V,
        "trend_levels": TAIL_LAST,
        "ceiling": TAIL_CEILING,
        "reports": reports.iter().map(|(n, r)| json!({"name": n, "masses": r.masses()})).collect::<Vec<_>>(),
    });
    std::fs::write(dir.join("tails_summary.json"), serde_json::to_string_pretty(&summary).unwrap())
        .expect("write artifact");
    outcome(pass, format!("{}; artifacts in {}", lines.join(", "), dir.display()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence of closed forms", oracle_equivalence),
        ("fiber-sum lemma and fiber measure identity", fiber_identities),
        ("Plancherel normalization and harmonicity", plancherel_suite),
        ("boundary measure masses and kernel traces", boundary_measures),
        ("ratio law along truncations", gk_ratio_law),
        ("structural invariants", structure),
        ("inequality sweeps", inequalities),
        ("tail experiments", tail_experiments),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let res = run();
        let status = if res.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {id} ({name}) [{:.1}s]: {}",
            start.elapsed().as_secs_f64(),
            res.detail
        );
        if !res.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
