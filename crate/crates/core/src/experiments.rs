//! Tail-decay sweeps, the two standalone inequalities, and convergence traces.

use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boundary::{
    martin_kernel, pi, pi_boundary, pi_k, pi_k_boundary, BoundaryMeasure, BoundaryVertex,
    MeasureValue, Truncator,
};
use crate::error::{Result, YfError};
use crate::graph::{level, LevelTable};
use crate::numeric::{Real, DEFAULT_PRECISION};
use crate::word::{Symbol, Word};

/// Largest level a tail sweep will evaluate.
pub const DEFAULT_LEVEL_BUDGET: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    /// `e(w, v) < k`.
    Q { k: usize },
    /// `π(w)` outside `(π(v)(β - ε), π(v)(β + ε))`.
    R { eps: f64 },
}

impl fmt::Display for TailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailKind::Q { k } => write!(f, "tails-q(k={k})"),
            TailKind::R { eps } => write!(f, "tails-r(eps={eps})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub m: usize,
    pub set_size: usize,
    pub level_size: usize,
    pub mass: MeasureValue,
    /// Mass of `e(s(w), s(v)) < k`, for Q sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_tilde: Option<MeasureValue>,
    /// Masses of `{ind(w, v) = 1, e(w, v) = i - 1}` for `i = 1..=k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_hat: Option<Vec<MeasureValue>>,
    /// `mass <= q_tilde + Σ q_hat` up to radii.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub kind: TailKind,
    pub manifest: Value,
    pub rows: Vec<TailRow>,
}

#[derive(Clone, Debug)]
pub struct TailParams {
    pub v: BoundaryVertex,
    pub beta: f64,
    pub tol: f64,
    pub m_max: usize,
    pub level_budget: usize,
}

impl TailParams {
    pub fn new(v: BoundaryVertex, beta: f64, tol: f64, m_max: usize) -> TailParams {
        TailParams {
            v,
            beta,
            tol,
            m_max,
            level_budget: DEFAULT_LEVEL_BUDGET,
        }
    }

    fn manifest(&self, kind: TailKind) -> Value {
        json!({
            "experiment": kind.to_string(),
            "r": self.v.r(),
            "v": self.v.to_string(),
            "beta": self.beta,
            "tol": self.tol,
            "m_max": self.m_max,
        })
    }
}

impl TailReport {
    pub fn masses(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mass.value()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| YfError::Output(e.to_string());
        let mut header = vec!["m", "set_size", "level_size", "mass", "radius"];
        let is_q = matches!(self.kind, TailKind::Q { .. });
        if is_q {
            header.extend(["q_tilde", "q_tilde_radius", "q_hat_sum", "decomposition_holds"]);
        }
        wtr.write_record(&header).map_err(io)?;
        for row in &self.rows {
            let mut rec = vec![
                row.m.to_string(),
                row.set_size.to_string(),
                row.level_size.to_string(),
                format!("{:e}", row.mass.value()),
                format!("{:e}", row.mass.radius()),
            ];
            if is_q {
                let qt = row.q_tilde.as_ref().expect("q rows carry q_tilde");
                let hat: f64 = row.q_hat.iter().flatten().map(|x| x.value()).sum();
                rec.push(format!("{:e}", qt.value()));
                rec.push(format!("{:e}", qt.radius()));
                rec.push(format!("{hat:e}"));
                rec.push(row.decomposition_holds.unwrap_or(false).to_string());
            }
            wtr.write_record(&rec).map_err(io)?;
        }
        wtr.flush()
            .map_err(|e| YfError::Output(e.to_string()))?;
        Ok(())
    }
}

fn sum_where(values: &[MeasureValue], keep: impl Fn(usize) -> bool) -> (usize, MeasureValue) {
    let mut total = MeasureValue::Exact(BigRational::zero());
    let mut n = 0;
    for (idx, x) in values.iter().enumerate() {
        if keep(idx) {
            total = total.add(x);
            n += 1;
        }
    }
    (n, total)
}

/// `μ(w)` for each vertex of level `m`, in level order.
fn level_values(
    measure: &BoundaryMeasure,
    params: &TailParams,
    m: usize,
) -> Result<Vec<(Word, MeasureValue)>> {
    let lv = level(params.v.r(), m)?.vertices;
    if lv.len() > params.level_budget {
        return Err(YfError::Budget(format!(
            "level {m} has {} vertices, budget {}",
            lv.len(),
            params.level_budget
        )));
    }
    let tol = params.tol / lv.len() as f64;
    lv.into_par_iter()
        .map(|w| {
            let mu = measure.eval_with_tolerance(&w, tol)?;
            Ok((w, mu))
        })
        .collect()
}

pub fn tail_q_report(params: &TailParams, k: usize) -> Result<TailReport> {
    let kind = TailKind::Q { k };
    let measure = BoundaryMeasure::new(&params.v, params.beta, params.tol)?;
    let vf = params.v.forget();
    let mut rows = Vec::new();
    for m in 0..=params.m_max {
        let vals = level_values(&measure, params, m)?;
        let vm = params.v.materialize(m + 1);
        let vmf = vf.materialize(m + 1);
        let rels: Vec<_> = vals.iter().map(|(w, _)| w.common_suffix(&vm)).collect();
        let free: Vec<_> = vals
            .iter()
            .map(|(w, _)| w.forget().common_suffix(&vmf).e_common)
            .collect();
        let mus: Vec<MeasureValue> = vals.iter().map(|(_, mu)| mu.clone()).collect();
        let (set_size, mass) = sum_where(&mus, |j| rels[j].e_common < k);
        let (_, q_tilde) = sum_where(&mus, |j| free[j] < k);
        let q_hat: Vec<MeasureValue> = (1..=k)
            .map(|i| sum_where(&mus, |j| rels[j].indicator == 1 && rels[j].e_common == i - 1).1)
            .collect();
        let bound = q_hat.iter().fold(q_tilde.clone(), |acc, x| acc.add(x));
        let holds = mass.lower() <= bound.upper() + mass.radius().max(1e-300);
        rows.push(TailRow {
            m,
            set_size,
            level_size: mus.len(),
            mass,
            q_tilde: Some(q_tilde),
            q_hat: Some(q_hat),
            decomposition_holds: Some(holds),
        });
    }
    Ok(TailReport {
        kind,
        manifest: {
            let mut man = params.manifest(kind);
            man["k"] = json!(k);
            man
        },
        rows,
    })
}

pub fn tail_r_report(params: &TailParams, eps: f64) -> Result<TailReport> {
    if !(eps > 0.0) {
        return Err(YfError::OutOfRange {
            what: "eps",
            value: 0,
            max: 1,
        });
    }
    let kind = TailKind::R { eps };
    let measure = BoundaryMeasure::new(&params.v, params.beta, params.tol)?;
    let pi_v = pi_boundary(&params.v, 1e-15)?.value();
    let (lo, hi) = (pi_v * (params.beta - eps), pi_v * (params.beta + eps));
    let mut rows = Vec::new();
    for m in 0..=params.m_max {
        let vals = level_values(&measure, params, m)?;
        let outside: Vec<bool> = vals
            .iter()
            .map(|(w, _)| {
                let p = pi(w).to_f64().unwrap_or(0.0);
                !(lo < p && p < hi)
            })
            .collect();
        let mus: Vec<MeasureValue> = vals.into_iter().map(|(_, mu)| mu).collect();
        let (set_size, mass) = sum_where(&mus, |j| outside[j]);
        rows.push(TailRow {
            m,
            set_size,
            level_size: mus.len(),
            mass,
            q_tilde: None,
            q_hat: None,
            decomposition_holds: None,
        });
    }
    Ok(TailReport {
        kind,
        manifest: {
            let mut man = params.manifest(kind);
            man["eps"] = json!(eps);
            man["pi_v"] = json!(pi_v);
            man
        },
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityScan {
    pub r: u32,
    pub max_weight: usize,
    pub checked: u64,
    pub violations: u64,
    pub first_violation: Option<Value>,
}

/// Checks `d(w1_iu, v1_ju) <= d(w1_iu, v2u)` for `i != j` and
/// `π(v2u)/π(v1_ju) >= 1/2` over every word up to `max_weight`.
pub fn inequality_scan(r: u32, max_weight: usize) -> Result<InequalityScan> {
    if r < 2 {
        return Err(YfError::InvalidR(r));
    }
    let table = LevelTable::new(r, max_weight)?;
    let sources: Vec<&Word> = table.levels.iter().flatten().collect();
    let parts: Vec<(u64, u64, Option<Value>)> = sources
        .par_iter()
        .map(|x| {
            let (mut checked, mut bad, mut first) = (0u64, 0u64, None);
            let counts = table.counts_from(x);
            let syms = x.symbols();
            for p in 0..syms.len() {
                let Symbol::Unit(i) = syms[p] else { continue };
                let w = Word::new(syms[..p].to_vec(), r).expect("valid prefix");
                let u = Word::new(syms[p + 1..].to_vec(), r).expect("valid suffix");
                let Some(room) = max_weight.checked_sub(u.weight() + 2) else {
                    continue;
                };
                for vw in w.weight()..=room {
                    for v in &table.levels[vw] {
                        let two_u = v.concat(&Word::new(
                            std::iter::once(Symbol::Two).chain(u.symbols().iter().copied()).collect(),
                            r,
                        ).expect("valid"));
                        let n2 = two_u.weight();
                        let big = &counts[n2][table.position(&two_u).expect("in table")];
                        for j in (1..=r).filter(|&j| j != i) {
                            let one_u = v.concat(
                                &Word::new(
                                    std::iter::once(Symbol::Unit(j))
                                        .chain(u.symbols().iter().copied())
                                        .collect(),
                                    r,
                                )
                                .expect("valid"),
                            );
                            let small = &counts[n2 - 1][table.position(&one_u).expect("in table")];
                            checked += 1;
                            if small > big {
                                bad += 1;
                                first.get_or_insert_with(|| {
                                    json!({"source": x, "lower": one_u, "upper": two_u,
                                           "d_lower": small.to_string(), "d_upper": big.to_string()})
                                });
                            }
                        }
                    }
                }
            }
            (checked, bad, first)
        })
        .collect();
    let mut scan = InequalityScan {
        r,
        max_weight,
        checked: 0,
        violations: 0,
        first_violation: None,
    };
    for (c, b, f) in parts {
        scan.checked += c;
        scan.violations += b;
        if scan.first_violation.is_none() {
            scan.first_violation = f;
        }
    }
    // π depends only on the index-free word, so r = 1 covers every r.
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let free = LevelTable::new(1, max_weight)?;
    for uw in 0..max_weight.saturating_sub(1) {
        for u in &free.levels[uw] {
            for vw in 0..=max_weight - 2 - uw {
                for v in &free.levels[vw] {
                    let two_u = v.concat(&Word::new(vec![Symbol::Two], 1)?).concat(u);
                    let one_u = v.concat(&Word::new(vec![Symbol::Unit(1)], 1)?).concat(u);
                    let ratio = pi(&two_u) / pi(&one_u);
                    scan.checked += 1;
                    if ratio < half {
                        scan.violations += 1;
                        scan.first_violation.get_or_insert_with(|| {
                            json!({"upper": two_u, "lower": one_u, "ratio": ratio.to_string()})
                        });
                    }
                }
            }
        }
    }
    Ok(scan)
}

#[derive(Clone, Debug, Serialize)]
pub struct TracePoint {
    pub n: usize,
    pub length: usize,
    pub achieved_ratio: f64,
    pub value: MeasureValue,
    pub target: f64,
    pub distance: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub manifest: Value,
    pub points: Vec<TracePoint>,
}

impl Trace {
    pub fn distances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.distance).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.radius).collect()
    }

    /// See [`decreasing_or_converged`].
    pub fn converging(&self, last: usize, floor: f64) -> bool {
        decreasing_or_converged(&self.distances(), &self.radii(), last, floor)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| YfError::Output(e.to_string());
        wtr.write_record(["n", "length", "achieved_ratio", "value", "target", "distance", "radius"])
            .map_err(io)?;
        for p in &self.points {
            wtr.write_record([
                p.n.to_string(),
                p.length.to_string(),
                format!("{:e}", p.achieved_ratio),
                format!("{:e}", p.value.value()),
                format!("{:e}", p.target),
                format!("{:e}", p.distance),
                format!("{:e}", p.radius),
            ])
            .map_err(io)?;
        }
        wtr.flush()
            .map_err(|e| YfError::Output(e.to_string()))?;
        Ok(())
    }
}

/// Truncation lengths ending right after the first `points` Twos.
pub fn sample_lengths(v: &BoundaryVertex, points: usize) -> Vec<usize> {
    v.two_boundaries(points)
}

/// Martin kernels `K(w, v_n)` along the truncation sequence against `μ_{r,v,β}(w)`.
pub fn kernel_trace(
    w: &Word,
    v: &BoundaryVertex,
    beta: f64,
    points: usize,
    tol: f64,
) -> Result<Trace> {
    let measure = BoundaryMeasure::new(v, beta, tol)?;
    let target = measure.eval(w)?;
    let trunc = Truncator::new(v)?;
    let lengths: Vec<usize> = sample_lengths(v, points)
        .into_iter()
        .filter(|&n| n >= w.len())
        .collect();
    let pts: Vec<TracePoint> = lengths
        .par_iter()
        .map(|&n| {
            let t = trunc.truncate(beta, n)?;
            let kernel = martin_kernel(w, &t.word)?;
            let value = MeasureValue::Exact(kernel);
            let distance = (value.value() - target.value()).abs();
            Ok(TracePoint {
                n,
                length: t.word.len(),
                achieved_ratio: t.achieved_ratio,
                value,
                target: target.value(),
                distance,
                radius: target.radius(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Trace {
        manifest: json!({
            "experiment": "kernel-trace",
            "r": v.r(),
            "w": w,
            "v": v.to_string(),
            "beta": beta,
            "tol": tol,
            "target": target,
        }),
        points: pts,
    })
}

/// `π_i(v_n)/π_i(v)` along the truncation sequence against `β^i`.
pub fn gk_ratio_trace(v: &BoundaryVertex, beta: f64, i: u64, points: usize, tol: f64) -> Result<Trace> {
    if i == 0 {
        return Err(YfError::OutOfRange {
            what: "i",
            value: 0,
            max: i64::MAX,
        });
    }
    let denom = pi_k_boundary(v, i, tol)?.to_real(DEFAULT_PRECISION);
    if denom.contains(0.0) {
        return Err(YfError::ZeroPi);
    }
    let target = beta.powi(i as i32);
    let trunc = Truncator::new(v)?;
    let pts: Vec<TracePoint> = sample_lengths(v, points)
        .par_iter()
        .map(|&n| {
            let t = trunc.truncate(beta, n)?;
            let ratio = Real::from_rational(&pi_k(&t.word, i), DEFAULT_PRECISION).div(&denom);
            let distance = (ratio.value() - target).abs();
            Ok(TracePoint {
                n,
                length: t.word.len(),
                achieved_ratio: t.achieved_ratio,
                radius: ratio.radius(),
                value: MeasureValue::Approx(ratio),
                target,
                distance,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Trace {
        manifest: json!({
            "experiment": "gk-ratio",
            "r": v.r(),
            "v": v.to_string(),
            "beta": beta,
            "i": i,
            "tol": tol,
        }),
        points: pts,
    })
}

/// Each of the last `last` steps either decreases strictly or lands below
/// `max(floor, 2 radius)`.
pub fn decreasing_or_converged(values: &[f64], radii: &[f64], last: usize, floor: f64) -> bool {
    if values.len() < last || last < 2 {
        return false;
    }
    let start = values.len() - last;
    (start + 1..values.len()).all(|k| {
        let noise = (2.0 * radii.get(k).copied().unwrap_or(0.0)).max(floor);
        values[k] < values[k - 1] || values[k] <= noise
    })
}

/// Least-squares slope of `values` against their index.
pub fn least_squares_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in values.iter().enumerate() {
        let dx = k as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Masses over the last `last` levels trend down and the final one is below `ceiling`.
pub fn tail_trend_holds(masses: &[f64], last: usize, ceiling: f64) -> bool {
    if masses.len() < last {
        return false;
    }
    let tail = &masses[masses.len() - last..];
    least_squares_slope(tail) < 0.0 && *tail.last().expect("nonempty") < ceiling
}

/// Permutes the unit indices of `w` left of its common suffix with `v` and
/// reports the largest change in `μ(w)` among words with the same suffix data.
pub fn index_dependence_probe(w: &Word, v: &BoundaryVertex, beta: f64, tol: f64) -> Result<Value> {
    let measure = BoundaryMeasure::new(v, beta, tol)?;
    let base = measure.eval(w)?;
    let r = v.r();
    let vm = v.materialize(w.len() + 1);
    let rel = w.common_suffix(&vm);
    let key = |x: &Word| {
        let s = x.common_suffix(&vm);
        (s.h, s.e_common, s.indicator)
    };
    let mut spread: f64 = 0.0;
    let mut compared = 0usize;
    for shift in 1..r {
        let syms: Vec<Symbol> = w
            .symbols()
            .iter()
            .enumerate()
            .map(|(p, s)| match *s {
                Symbol::Unit(i) if p + rel.h < w.len() => Symbol::Unit((i - 1 + shift) % r + 1),
                other => other,
            })
            .collect();
        let moved = Word::new(syms, r)?;
        if key(&moved) == key(w) {
            let other = measure.eval(&moved)?;
            spread = spread.max((other.value() - base.value()).abs());
            compared += 1;
        }
    }
    Ok(json!({"w": w, "compared": compared, "max_spread": spread, "radius": base.radius()}))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(text: &str, r: u32) -> BoundaryVertex {
        BoundaryVertex::parse(text, r).unwrap()
    }

    #[test]
    fn inequality_examples() {
        let scan = inequality_scan(2, 5).unwrap();
        assert_eq!(scan.violations, 0, "{:?}", scan.first_violation);
        assert!(scan.checked > 0);
        assert!(inequality_scan(1, 4).is_err());
    }

    #[test]
    fn empty_q_set() {
        let v = bv("runs=[1,2];tail=geometric(4,2)", 2);
        let params = TailParams::new(v, 1.0, 1e-9, 3);
        let rep = tail_q_report(&params, 0).unwrap();
        assert!(rep.rows.iter().all(|r| r.set_size == 0 && r.mass.value() == 0.0));
    }

    #[test]
    fn q_level_one() {
        let v = bv("runs=[1];idx=const(1);tail=geometric(4,2)", 2);
        let params = TailParams::new(v.clone(), 1.0, 1e-10, 1);
        let rep = tail_q_report(&params, 1).unwrap();
        let row = &rep.rows[1];
        assert_eq!(row.set_size, 1);
        let m = BoundaryMeasure::new(&v, 1.0, 1e-10).unwrap();
        let mu = m.eval(&Word::parse("1_2", 2).unwrap()).unwrap();
        assert!((row.mass.value() - mu.value()).abs() < 1e-9);
        assert!(rep.rows.iter().all(|r| r.decomposition_holds == Some(true)));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("m,set_size"));
    }

    #[test]
    fn wide_window_is_empty() {
        let v = bv("runs=[1];tail=geometric(4,2)", 2);
        let params = TailParams::new(v, 0.5, 1e-9, 3);
        let rep = tail_r_report(&params, 10.0).unwrap();
        assert!(rep.rows.iter().all(|r| r.set_size == 0 && r.set_size <= r.level_size));
    }

    #[test]
    fn kernel_trace_r1() {
        let v = bv("runs=[1];tail=geometric(2,2)", 1);
        let w = Word::parse("1", 1).unwrap();
        let t = kernel_trace(&w, &v, 1.0, 8, 1e-12).unwrap();
        assert!(t.points.iter().all(|p| p.distance < 1e-9));
        let e = kernel_trace(&Word::empty(1), &v, 1.0, 6, 1e-12).unwrap();
        assert!(e.points.iter().all(|p| p.distance < 1e-12));
    }

    #[test]
    fn index_probe_reports_spread() {
        let v = bv("runs=[1,2];tail=geometric(4,2)", 3);
        let w = Word::parse("1_2,2,1_1", 3).unwrap();
        let probe = index_dependence_probe(&w, &v, 0.7, 1e-12).unwrap();
        assert_eq!(probe["compared"], 1);
        assert!(probe["max_spread"].as_f64().unwrap() < 1e-10);
    }

    #[test]
    fn trends() {
        assert!(decreasing_or_converged(&[5.0, 4.0, 3.0, 2.0, 1.0], &[0.0; 5], 5, 0.0));
        assert!(!decreasing_or_converged(&[5.0, 4.0, 4.5, 2.0, 1.0], &[0.0; 5], 5, 0.0));
        assert!(decreasing_or_converged(&[5.0, 4.0, 4.5, 2.0, 1.0], &[0.0; 5], 5, 4.5));
        assert!(decreasing_or_converged(&[1e-3, 1e-20, 2e-20], &[0.0, 1e-19, 1e-19], 3, 0.0));
        assert!((least_squares_slope(&[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!(tail_trend_holds(&[0.5, 0.3, 0.2, 0.1], 3, 0.2));
        assert!(!tail_trend_holds(&[0.5, 0.3, 0.25], 3, 0.2));
    }
}
