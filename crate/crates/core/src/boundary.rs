//! Infinite vertices, the products `π`, the Plancherel measure and the
//! measures attached to boundary vertices.

use std::fmt;

use dashmap::DashMap;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::closed_form::{d1_epsilon, dr_closed, dr_epsilon, f_eval, factorial, g_values};
use crate::error::{Result, YfError};
use crate::graph::{level, up_neighbors};
use crate::numeric::{Real, DEFAULT_PRECISION};
use crate::word::{Symbol, Word};

/// Factors multiplied before an infinite product gives up.
pub const DEFAULT_FACTOR_BUDGET: usize = 2_000_000;

/// Longest materialization tried while searching for units.
const MAX_MATERIALIZE: usize = 1 << 22;

/// Run lengths beyond the explicit list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailRule {
    Constant(u64),
    Linear { a: u64, b: u64 },
    Geometric { b0: u64, q: u64 },
}

/// Unit indices, counted from the right within a region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexRule {
    Const(u32),
    Cycle(Vec<u32>),
}

impl IndexRule {
    fn index(&self, k: usize) -> u32 {
        match self {
            IndexRule::Const(i) => *i,
            IndexRule::Cycle(c) => c[k % c.len()],
        }
    }

    fn max_index(&self) -> u32 {
        match self {
            IndexRule::Const(i) => *i,
            IndexRule::Cycle(c) => c.iter().copied().max().unwrap_or(0),
        }
    }

    fn min_index(&self) -> u32 {
        match self {
            IndexRule::Const(i) => *i,
            IndexRule::Cycle(c) => c.iter().copied().min().unwrap_or(0),
        }
    }
}

impl fmt::Display for IndexRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexRule::Const(i) => write!(f, "const({i})"),
            IndexRule::Cycle(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "cycle({})", parts.join(","))
            }
        }
    }
}

impl fmt::Display for TailRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailRule::Constant(c) => write!(f, "constant({c})"),
            TailRule::Linear { a, b } => write!(f, "linear({a},{b})"),
            TailRule::Geometric { b0, q } => write!(f, "geometric({b0},{q})"),
        }
    }
}

/// A left-infinite word `.. 2 1^{β_2} 2 1^{β_1} 2 1^{β_0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryVertex {
    r: u32,
    runs: Vec<u64>,
    index: IndexRule,
    tail: TailRule,
    tail_index: IndexRule,
}

fn spec_err(msg: impl Into<String>) -> YfError {
    YfError::BoundarySpec(msg.into())
}

fn parse_args(text: &str, name: &str) -> Result<Vec<u64>> {
    let inner = text
        .strip_prefix(name)
        .and_then(|s| s.strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| spec_err(format!("expected {name}(..), got `{text}`")))?;
    inner
        .split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|_| spec_err(format!("bad number `{t}`"))))
        .collect()
}

fn parse_index(text: &str) -> Result<IndexRule> {
    if text.starts_with("const") {
        match parse_args(text, "const")?.as_slice() {
            [i] => Ok(IndexRule::Const(*i as u32)),
            _ => Err(spec_err("const takes one index")),
        }
    } else if text.starts_with("cycle") {
        let c = parse_args(text, "cycle")?;
        if c.is_empty() {
            return Err(spec_err("cycle needs at least one index"));
        }
        Ok(IndexRule::Cycle(c.into_iter().map(|x| x as u32).collect()))
    } else {
        Err(spec_err(format!("unknown index rule `{text}`")))
    }
}

fn parse_tail(text: &str) -> Result<TailRule> {
    let (name, want) = if text.starts_with("constant") {
        ("constant", 1)
    } else if text.starts_with("linear") {
        ("linear", 2)
    } else if text.starts_with("geometric") {
        ("geometric", 2)
    } else {
        return Err(spec_err(format!("unknown tail rule `{text}`")));
    };
    let args = parse_args(text, name)?;
    if args.len() != want {
        return Err(spec_err(format!("{name} takes {want} arguments")));
    }
    Ok(match name {
        "constant" => TailRule::Constant(args[0]),
        "linear" => TailRule::Linear {
            a: args[0],
            b: args[1],
        },
        _ => {
            if args[1] < 2 {
                return Err(spec_err("geometric ratio must be at least 2"));
            }
            TailRule::Geometric {
                b0: args[0],
                q: args[1],
            }
        }
    })
}

impl BoundaryVertex {
    pub fn new(
        r: u32,
        runs: Vec<u64>,
        index: IndexRule,
        tail: TailRule,
        tail_index: IndexRule,
    ) -> Result<BoundaryVertex> {
        if r == 0 {
            return Err(YfError::InvalidR(r));
        }
        for rule in [&index, &tail_index] {
            if rule.min_index() == 0 || rule.max_index() > r {
                return Err(YfError::IndexOutOfRange {
                    index: if rule.min_index() == 0 { 0 } else { rule.max_index() },
                    r,
                });
            }
        }
        if let TailRule::Geometric { q, .. } = tail {
            if q < 2 {
                return Err(spec_err("geometric ratio must be at least 2"));
            }
        }
        Ok(BoundaryVertex {
            r,
            runs,
            index,
            tail,
            tail_index,
        })
    }

    /// Parses `runs=[..];idx=..;tail=..;tidx=..`; `idx` and `tidx` default to `const(1)`.
    pub fn parse(text: &str, r: u32) -> Result<BoundaryVertex> {
        let mut runs = None;
        let mut index = IndexRule::Const(1);
        let mut tail = None;
        let mut tail_index = IndexRule::Const(1);
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| spec_err(format!("expected key=value, got `{part}`")))?;
            let value: String = value.chars().filter(|c| !c.is_whitespace()).collect();
            match key.trim() {
                "runs" => {
                    let inner = value
                        .strip_prefix('[')
                        .and_then(|s| s.strip_suffix(']'))
                        .ok_or_else(|| spec_err("runs must look like [1,2]"))?;
                    runs = Some(
                        inner
                            .split(',')
                            .filter(|t| !t.is_empty())
                            .map(|t| {
                                t.parse::<u64>()
                                    .map_err(|_| spec_err(format!("bad run `{t}`")))
                            })
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                "idx" => index = parse_index(&value)?,
                "tail" => tail = Some(parse_tail(&value)?),
                "tidx" => tail_index = parse_index(&value)?,
                other => return Err(spec_err(format!("unknown key `{other}`"))),
            }
        }
        let tail = tail.ok_or_else(|| spec_err("missing tail rule"))?;
        BoundaryVertex::new(r, runs.unwrap_or_default(), index, tail, tail_index)
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn explicit_runs(&self) -> &[u64] {
        &self.runs
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// Same runs with every index set to 1, as a vertex of the `r = 1` graph.
    pub fn forget(&self) -> BoundaryVertex {
        BoundaryVertex {
            r: 1,
            runs: self.runs.clone(),
            index: IndexRule::Const(1),
            tail: self.tail.clone(),
            tail_index: IndexRule::Const(1),
        }
    }

    /// `β_j`, or `None` when it does not fit in 128 bits.
    pub fn run(&self, j: usize) -> Option<u128> {
        if let Some(&b) = self.runs.get(j) {
            return Some(b as u128);
        }
        let t = (j - self.runs.len()) as u128;
        match self.tail {
            TailRule::Constant(c) => Some(c as u128),
            TailRule::Linear { a, b } => (b as u128).checked_mul(t)?.checked_add(a as u128),
            TailRule::Geometric { b0, q } => {
                let p = (q as u128).checked_pow(u32::try_from(t).ok()?)?;
                p.checked_mul(b0 as u128)
            }
        }
    }

    /// Whether `Σ 1/g` converges, i.e. `π > 0`.
    pub fn has_positive_pi(&self) -> bool {
        match self.tail {
            TailRule::Constant(_) => false,
            TailRule::Linear { b, .. } => b > 0,
            TailRule::Geometric { b0, .. } => b0 > 0,
        }
    }

    /// g-values `g(v, 1), g(v, 2), ..`.
    pub fn g_iter(&self) -> GIter<'_> {
        GIter {
            v: self,
            k: 0,
            run_sum: 0,
        }
    }

    /// `g(v, k)` for `k >= 1`.
    pub fn g(&self, k: usize) -> Option<u128> {
        self.g_iter().nth(k.checked_sub(1)?)?
    }

    /// The last `n` symbols.
    pub fn materialize(&self, n: usize) -> Word {
        let mut rev: Vec<Symbol> = Vec::with_capacity(n);
        let explicit = self.runs.len();
        let (mut explicit_units, mut tail_units) = (0usize, 0usize);
        let mut j = 0usize;
        while rev.len() < n {
            let beta = self.run(j).unwrap_or(u128::MAX);
            let mut placed = 0u128;
            while placed < beta && rev.len() < n {
                let idx = if j < explicit {
                    explicit_units += 1;
                    self.index.index(explicit_units - 1)
                } else {
                    tail_units += 1;
                    self.tail_index.index(tail_units - 1)
                };
                rev.push(Symbol::Unit(idx));
                placed += 1;
            }
            if rev.len() < n {
                rev.push(Symbol::Two);
            }
            j += 1;
        }
        rev.reverse();
        Word::from_raw(rev, self.r)
    }

    /// Lengths `n` at which `materialize(n)` begins with a Two, one per Two.
    pub fn two_boundaries(&self, count: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        let mut len = 0u128;
        for j in 0..count {
            len += self.run(j).unwrap_or(u128::MAX / 4) + 1;
            if len > usize::MAX as u128 {
                break;
            }
            out.push(len as usize);
        }
        out
    }

    /// The finite suffix starting at the `l`-th unit from the right, `v<l>`.
    pub fn suffix_from_unit(&self, l: usize) -> Result<Word> {
        if l == 0 {
            return Ok(Word::empty(self.r));
        }
        let mut n = 16;
        loop {
            let w = self.materialize(n);
            if w.units() >= l {
                return w.suffix_from_unit(l);
            }
            n *= 2;
            if n > MAX_MATERIALIZE {
                return Err(YfError::Budget(format!("vertex has fewer than {l} units")));
            }
        }
    }

    /// Bounds on `Σ_{j > J} 1/g(v, j)` given `g(v, J + 1)`.
    fn tail_sum_bounds(&self, big_j: usize, g_next: u128) -> Option<(f64, f64)> {
        let k = self.runs.len();
        let (lo, hi) = match self.tail {
            TailRule::Geometric { b0, q } => {
                if big_j < k || b0 == 0 {
                    return None;
                }
                let beta_j = b0 as f64 * (q as f64).powi((big_j - k) as i32);
                let qf = q as f64;
                (1.0 / g_next as f64, qf / ((qf - 1.0) * beta_j))
            }
            TailRule::Linear { a, b } => {
                if big_j < k + 1 || b == 0 {
                    return None;
                }
                let a0 = self.runs.iter().map(|&x| x as f64).sum::<f64>() + 2.0 * k as f64 - 1.0;
                let quad = Quadratic {
                    a: a0,
                    b: a as f64 + 2.0 - b as f64 / 2.0,
                    c: b as f64 / 2.0,
                };
                quad.reciprocal_tail((big_j - k) as f64)?
            }
            TailRule::Constant(_) => return None,
        };
        Some((lo * (1.0 - 1e-12), hi * (1.0 + 1e-12)))
    }

    /// `Π_{j >= a} (g(v, j) - c)/g(v, j)`, certified to `tol`.
    ///
    /// With `skip_small`, factors with `g <= c` are left out (the convention of `π_c`).
    pub fn g_product(
        &self,
        a: usize,
        c: u64,
        skip_small: bool,
        tol: f64,
        prec: usize,
        budget: usize,
    ) -> Result<MeasureValue> {
        if !(tol > 0.0) {
            return Err(YfError::InvalidTolerance(tol));
        }
        if c == 0 {
            return Ok(MeasureValue::Exact(BigRational::one()));
        }
        let c128 = c as u128;
        let mut gs = self.g_iter().enumerate().skip(a.max(1) - 1);
        let mut head = BigRational::one();
        let mut last_j = a.max(1) - 1;
        let mut pending: Option<u128> = None;
        for (j0, g) in gs.by_ref() {
            let g = g.ok_or_else(|| YfError::Budget("g-value overflow".into()))?;
            if g > 2 * c128 {
                pending = Some(g);
                break;
            }
            last_j = j0 + 1;
            if skip_small && g <= c128 {
                continue;
            }
            if g == c128 {
                return Ok(MeasureValue::Exact(BigRational::zero()));
            }
            head *= BigRational::new(
                BigInt::from(g as i128 - c as i128),
                BigInt::from(g),
            );
        }
        if !self.has_positive_pi() {
            return Ok(MeasureValue::Exact(BigRational::zero()));
        }
        let head_abs = head.abs().to_f64().unwrap_or(f64::INFINITY);
        let cf = c as f64;
        let mut partial = Real::one(prec);
        let mut steps = 0usize;
        let mut g_next = pending.expect("g-values grow without bound");
        loop {
            if let Some((lo, hi)) = self.tail_sum_bounds(last_j, g_next) {
                let x_lo = -cf * hi - cf * cf * hi / g_next as f64;
                let x_hi = -cf * lo;
                if partial.abs_upper() * head_abs * (x_hi - x_lo) <= tol / 2.0 {
                    let tail = Real::from_bounds(x_lo, x_hi, prec).exp();
                    let value = Real::from_rational(&head, prec).mul(&partial).mul(&tail);
                    return Ok(MeasureValue::Approx(value));
                }
            }
            let factor = Real::from_int(&BigInt::from(g_next - c128), prec)
                .div(&Real::from_int(&BigInt::from(g_next), prec));
            partial = partial.mul(&factor);
            last_j += 1;
            steps += 1;
            if steps > budget {
                return Err(YfError::Budget(format!(
                    "infinite product needs more than {budget} factors"
                )));
            }
            g_next = gs
                .next()
                .and_then(|(_, g)| g)
                .ok_or_else(|| YfError::Budget("g-value overflow".into()))?;
        }
    }

    pub fn text_spec(&self) -> String {
        let runs: Vec<String> = self.runs.iter().map(|x| x.to_string()).collect();
        format!(
            "runs=[{}];idx={};tail={};tidx={}",
            runs.join(","),
            self.index,
            self.tail,
            self.tail_index
        )
    }
}

impl fmt::Display for BoundaryVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text_spec())
    }
}

impl Serialize for BoundaryVertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text_spec())
    }
}

/// Streams `g(v, 1), g(v, 2), ..`; `None` items mark overflow.
pub struct GIter<'a> {
    v: &'a BoundaryVertex,
    k: usize,
    run_sum: u128,
}

impl Iterator for GIter<'_> {
    type Item = Option<u128>;

    fn next(&mut self) -> Option<Option<u128>> {
        let beta = match self.v.run(self.k) {
            Some(b) => b,
            None => return Some(None),
        };
        self.run_sum = match self.run_sum.checked_add(beta) {
            Some(s) => s,
            None => return Some(None),
        };
        self.k += 1;
        Some(self.run_sum.checked_add(2 * self.k as u128 - 1))
    }
}

/// `t ↦ a + b t + c t²` with `c > 0`.
struct Quadratic {
    a: f64,
    b: f64,
    c: f64,
}

impl Quadratic {
    fn at(&self, t: f64) -> f64 {
        self.a + t * (self.b + t * self.c)
    }

    /// `∫_x^∞ dt / q(t)`, for `x` right of every root.
    fn integral_from(&self, x: f64) -> Option<f64> {
        let disc = self.b * self.b - 4.0 * self.a * self.c;
        let y = 2.0 * self.c * x + self.b;
        if y <= 0.0 {
            return None;
        }
        if disc < 0.0 {
            let s = (-disc).sqrt();
            Some(2.0 / s * (s / y).atan())
        } else if disc == 0.0 {
            Some(2.0 / y)
        } else {
            let s = disc.sqrt();
            if y <= s {
                return None;
            }
            Some((2.0 * s / (y - s)).ln_1p() / s)
        }
    }

    /// Sign of `(1/q)''` is that of this polynomial.
    fn convexity(&self, t: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        3.0 * c * c * t * t + 3.0 * b * c * t + b * b - a * c
    }

    /// Bounds on `Σ_{t > s} 1/q(t)` for integer `s >= 1`.
    fn reciprocal_tail(&self, s: f64) -> Option<(f64, f64)> {
        if self.at(s) <= 0.0 {
            return None;
        }
        let s0 = s + 0.5;
        let vertex = -self.b / (2.0 * self.c);
        let convex = self.convexity(s0) > 0.0 && (s0 >= vertex || self.convexity(vertex) > 0.0);
        if convex {
            // midpoint rule bounds from above, trapezoid rule from below
            let hi = self.integral_from(s0)?;
            let lo = self.integral_from(s + 1.0)? + 0.5 / self.at(s + 1.0);
            Some((lo, hi))
        } else {
            Some((self.integral_from(s + 1.0)?, self.integral_from(s)?))
        }
    }
}

/// An exact rational, or a ball from a truncated infinite product.
#[derive(Clone, Debug)]
pub enum MeasureValue {
    Exact(BigRational),
    Approx(Real),
}

impl MeasureValue {
    pub fn is_exact(&self) -> bool {
        matches!(self, MeasureValue::Exact(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            MeasureValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            MeasureValue::Approx(x) => x.value(),
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            MeasureValue::Exact(_) => 0.0,
            MeasureValue::Approx(x) => x.radius(),
        }
    }

    pub fn to_real(&self, prec: usize) -> Real {
        match self {
            MeasureValue::Exact(q) => Real::from_rational(q, prec),
            MeasureValue::Approx(x) => x.clone(),
        }
    }

    fn precision(&self) -> usize {
        match self {
            MeasureValue::Exact(_) => DEFAULT_PRECISION,
            MeasureValue::Approx(x) => x.precision(),
        }
    }

    pub fn add(&self, other: &MeasureValue) -> MeasureValue {
        match (self, other) {
            (MeasureValue::Exact(a), MeasureValue::Exact(b)) => MeasureValue::Exact(a + b),
            _ => {
                let p = self.precision().max(other.precision());
                MeasureValue::Approx(self.to_real(p).add(&other.to_real(p)))
            }
        }
    }

    pub fn sub(&self, other: &MeasureValue) -> MeasureValue {
        self.add(&other.scale(&BigRational::from_integer((-1).into())))
    }

    pub fn mul(&self, other: &MeasureValue) -> MeasureValue {
        match (self, other) {
            (MeasureValue::Exact(a), MeasureValue::Exact(b)) => MeasureValue::Exact(a * b),
            _ => {
                let p = self.precision().max(other.precision());
                MeasureValue::Approx(self.to_real(p).mul(&other.to_real(p)))
            }
        }
    }

    pub fn scale(&self, q: &BigRational) -> MeasureValue {
        match self {
            MeasureValue::Exact(a) => MeasureValue::Exact(a * q),
            MeasureValue::Approx(x) => MeasureValue::Approx(x.mul_rational(q)),
        }
    }

    pub fn lower(&self) -> f64 {
        match self {
            MeasureValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            MeasureValue::Approx(x) => x.lower(),
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            MeasureValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            MeasureValue::Approx(x) => x.upper(),
        }
    }

    /// Exact zero, or a ball containing zero.
    pub fn contains_zero(&self) -> bool {
        match self {
            MeasureValue::Exact(q) => q.is_zero(),
            MeasureValue::Approx(x) => x.contains(0.0),
        }
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Exact(q) => write!(f, "{q}"),
            MeasureValue::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for MeasureValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MeasureValue::Exact(q) => s.serialize_str(&q.to_string()),
            MeasureValue::Approx(x) => {
                use serde::ser::SerializeMap;
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("value", &x.value())?;
                m.serialize_entry("radius", &x.radius())?;
                m.end()
            }
        }
    }
}

/// `π_k(v) = Π_{g > k} (g - k)/g` over the g-values of a finite word.
pub fn pi_k(v: &Word, k: u64) -> BigRational {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for g in g_values(v) {
        if g > k {
            num *= g - k;
            den *= g;
        }
    }
    BigRational::new(num.into(), den.into())
}

pub fn pi(v: &Word) -> BigRational {
    pi_k(v, 1)
}

/// `π(v)` for an infinite vertex; exact zero when `Σ 1/g` diverges.
pub fn pi_boundary(v: &BoundaryVertex, tol: f64) -> Result<MeasureValue> {
    pi_k_boundary(v, 1, tol)
}

pub fn pi_k_boundary(v: &BoundaryVertex, k: u64, tol: f64) -> Result<MeasureValue> {
    v.g_product(1, k, true, tol, DEFAULT_PRECISION, DEFAULT_FACTOR_BUDGET)
}

/// `Π_{j >= a} (g(v, j) - c)/g(v, j)`.
pub fn shifted_g_product(v: &BoundaryVertex, a: usize, c: u64, tol: f64) -> Result<MeasureValue> {
    if a == 0 {
        return Err(YfError::OutOfRange {
            what: "product start",
            value: 0,
            max: i64::MAX,
        });
    }
    v.g_product(a, c, false, tol, DEFAULT_PRECISION, DEFAULT_FACTOR_BUDGET)
}

/// `d_1(ε, s(w))² / (|w|! r^{e(w)})`.
pub fn plancherel(w: &Word) -> BigRational {
    let d = d1_epsilon(&w.forget());
    let den = factorial(w.weight()) * BigUint::from(w.r()).pow(w.units() as u32);
    BigRational::new((&d * &d).into(), den.into())
}

/// `d_r(ε, w) d_r(w, v) / d_r(ε, v)`.
pub fn martin_kernel(w: &Word, v: &Word) -> Result<BigRational> {
    let num = BigInt::from(dr_epsilon(w)) * BigInt::from(dr_closed(w, v)?);
    Ok(BigRational::new(num, BigInt::from(dr_epsilon(v))))
}

/// Parses a decimal such as `0.7` into the exact rational it denotes.
pub fn rational_from_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, text),
    };
    let (mantissa, exp) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(num * ten.pow(scale as u32))
    } else {
        BigRational::new(num, ten.pow((-scale) as u32))
    })
}

/// `β` from its shortest decimal form, so `0.7` means `7/10`.
pub fn beta_rational(beta: f64) -> Result<BigRational> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(YfError::InvalidBeta(beta.to_string()));
    }
    rational_from_decimal(&format!("{beta}")).ok_or_else(|| YfError::InvalidBeta(beta.to_string()))
}

/// `μ_{r,v,β}` with a product cache shared across evaluations.
#[derive(Debug)]
pub struct BoundaryMeasure {
    v: BoundaryVertex,
    v_free: BoundaryVertex,
    beta: BigRational,
    tol: f64,
    prec: usize,
    budget: usize,
    products: DashMap<(usize, u64), MeasureValue>,
}

/// One summand `coeff · Π_{j >= a} (g_j - c)/g_j`.
struct Term {
    coeff: BigRational,
    a: usize,
    c: u64,
}

impl BoundaryMeasure {
    pub fn new(v: &BoundaryVertex, beta: f64, tol: f64) -> Result<BoundaryMeasure> {
        BoundaryMeasure::with_beta(v, beta_rational(beta)?, tol)
    }

    pub fn with_beta(v: &BoundaryVertex, beta: BigRational, tol: f64) -> Result<BoundaryMeasure> {
        if !(beta.is_positive() && beta <= BigRational::one()) {
            return Err(YfError::InvalidBeta(beta.to_string()));
        }
        if !(tol > 0.0) {
            return Err(YfError::InvalidTolerance(tol));
        }
        if !v.has_positive_pi() {
            return Err(YfError::ZeroPi);
        }
        Ok(BoundaryMeasure {
            v: v.clone(),
            v_free: v.forget(),
            beta,
            tol,
            prec: DEFAULT_PRECISION,
            budget: DEFAULT_FACTOR_BUDGET,
            products: DashMap::new(),
        })
    }

    pub fn with_precision(mut self, prec: usize) -> BoundaryMeasure {
        self.prec = prec.max(64);
        self.products.clear();
        self
    }

    pub fn with_budget(mut self, budget: usize) -> BoundaryMeasure {
        self.budget = budget;
        self
    }

    pub fn vertex(&self) -> &BoundaryVertex {
        &self.v
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// The same measure with a different target radius, sharing nothing.
    pub fn retolerance(&self, tol: f64) -> Result<BoundaryMeasure> {
        Ok(BoundaryMeasure::with_beta(&self.v, self.beta.clone(), tol)?
            .with_precision(self.prec)
            .with_budget(self.budget))
    }

    fn product(&self, a: usize, c: u64, tol: f64) -> Result<MeasureValue> {
        if let Some(p) = self.products.get(&(a, c)) {
            if p.radius() <= tol {
                return Ok(p.clone());
            }
        }
        let p = self
            .v
            .g_product(a, c, false, tol, self.prec, self.budget)?;
        self.products.insert((a, c), p.clone());
        Ok(p)
    }

    fn terms(&self, w: &Word) -> Result<Vec<Term>> {
        let wf = w.forget();
        let rel = w.common_suffix(&self.v.materialize(w.len() + 1));
        let r = BigInt::from(self.v.r());
        let global = BigRational::new(
            BigInt::from(d1_epsilon(&wf)),
            r.pow(w.units() as u32),
        );
        let mut weights: Vec<(usize, BigRational)> = vec![(0, BigRational::one())];
        for l in 1..=rel.e_common {
            let m = r.pow(l as u32) - r.pow(l as u32 - 1);
            weights.push((l, BigRational::from_integer(m)));
        }
        if rel.indicator == 1 {
            let m = -r.pow(rel.e_common as u32);
            weights.push((rel.e_common + 1, BigRational::from_integer(m)));
        }
        let mut terms = Vec::new();
        for (l, mult) in weights {
            if mult.is_zero() {
                continue;
            }
            let wl = wf.strip_from_unit(l)?;
            let vl = self.v_free.suffix_from_unit(l)?;
            let prefix = self
                .v_free
                .materialize(vl.len() + wl.len() + 1)
                .strip_suffix(vl.len())?;
            let hl = wl.common_suffix_len(&prefix);
            let d_vl = vl.twos();
            let mut pre = BigRational::one();
            for g in self.v.g_iter().take(d_vl) {
                let g = g.ok_or_else(|| YfError::Budget("g-value overflow".into()))?;
                pre /= BigRational::from_integer(BigInt::from(g));
            }
            let base = &global * &mult * pre;
            let shift = vl.weight() as u64;
            for i in 0..=wl.weight() {
                let f = f_eval(&wl, i as i64, hl)?;
                if f.is_zero() {
                    continue;
                }
                let beta_pow = num_traits::pow(self.beta.clone(), vl.weight() + i);
                terms.push(Term {
                    coeff: &base * f * beta_pow,
                    a: d_vl + 1,
                    c: shift + i as u64,
                });
            }
        }
        Ok(terms)
    }

    /// `μ_{r,v,β}(w)` with radius at most the configured tolerance.
    pub fn eval(&self, w: &Word) -> Result<MeasureValue> {
        self.eval_with_tolerance(w, self.tol)
    }

    pub fn eval_with_tolerance(&self, w: &Word, tol: f64) -> Result<MeasureValue> {
        if w.r() != self.v.r() {
            return Err(YfError::MismatchedR(w.r(), self.v.r()));
        }
        if !(tol > 0.0) {
            return Err(YfError::InvalidTolerance(tol));
        }
        let terms = self.terms(w)?;
        let n = terms.len().max(1) as f64;
        let mut total = MeasureValue::Exact(BigRational::zero());
        for t in &terms {
            let size = t.coeff.abs().to_f64().unwrap_or(f64::INFINITY).max(f64::MIN_POSITIVE);
            let p = self.product(t.a, t.c, tol / (2.0 * n * size))?;
            total = total.add(&p.scale(&t.coeff));
        }
        Ok(total)
    }
}

/// One-shot `μ_{r,v,β}(w)`.
pub fn boundary_measure(w: &Word, v: &BoundaryVertex, beta: f64, tol: f64) -> Result<MeasureValue> {
    BoundaryMeasure::new(v, beta, tol)?.eval(w)
}

/// `Σ_{|w| = m} μ(w)`.
pub fn level_mass<F>(measure: F, r: u32, m: usize) -> Result<MeasureValue>
where
    F: Fn(&Word) -> Result<MeasureValue>,
{
    let mut total = MeasureValue::Exact(BigRational::zero());
    for w in level(r, m)?.vertices {
        total = total.add(&measure(&w)?);
    }
    Ok(total)
}

pub fn level_mass_exact<F: Fn(&Word) -> BigRational>(level: &[Word], measure: F) -> BigRational {
    level.iter().map(measure).sum()
}

/// `μ(w)/d_r(ε, w) - Σ_{w' ↗ w} μ(w')/d_r(ε, w')`.
pub fn harmonicity_residual<F>(measure: F, w: &Word) -> Result<MeasureValue>
where
    F: Fn(&Word) -> Result<MeasureValue>,
{
    let per_path = |x: &Word| -> Result<MeasureValue> {
        let d = BigRational::from_integer(BigInt::from(dr_epsilon(x)));
        Ok(measure(x)?.scale(&d.recip()))
    };
    let mut res = per_path(w)?;
    for y in up_neighbors(w) {
        res = res.sub(&per_path(&y)?);
    }
    Ok(res)
}

pub fn harmonicity_residual_exact<F: Fn(&Word) -> BigRational>(w: &Word, measure: F) -> BigRational {
    let per_path =
        |x: &Word| measure(x) / BigRational::from_integer(BigInt::from(dr_epsilon(x)));
    let mut res = per_path(w);
    for y in up_neighbors(w) {
        res -= per_path(&y);
    }
    res
}

/// A finite approximant `v_n` with its achieved ratio `π(v_n)/π(v)`.
#[derive(Clone, Debug, Serialize)]
pub struct Truncation {
    pub n: usize,
    pub word: Word,
    pub prefix_twos: usize,
    pub extra_units: usize,
    pub target_ratio: f64,
    pub achieved_ratio: f64,
}

/// Builds `v_n` with `π(v_n)/π(v) → β` for a fixed boundary vertex.
#[derive(Debug, Clone)]
pub struct Truncator {
    v: BoundaryVertex,
    pi_v: f64,
}

fn pi_f64(v: &Word) -> f64 {
    g_values(v)
        .into_iter()
        .filter(|&g| g > 1)
        .map(|g| (g - 1) as f64 / g as f64)
        .product()
}

impl Truncator {
    pub fn new(v: &BoundaryVertex) -> Result<Truncator> {
        if !v.has_positive_pi() {
            return Err(YfError::ZeroPi);
        }
        let pi_v = pi_boundary(v, 1e-15)?.value();
        Ok(Truncator { v: v.clone(), pi_v })
    }

    pub fn pi_v(&self) -> f64 {
        self.pi_v
    }

    /// `β = 1`: the last `n` symbols. `β < 1`: Twos are prepended while the
    /// ratio stays above `β`, then one more Two after a block of units
    /// trims the remaining gap to `O(1/|v_n|²)`.
    pub fn truncate(&self, beta: f64, n: usize) -> Result<Truncation> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(YfError::InvalidBeta(beta.to_string()));
        }
        let base = self.v.materialize(n);
        let pi_base = pi_f64(&base);
        if beta == 1.0 {
            return Ok(Truncation {
                n,
                achieved_ratio: pi_base / self.pi_v,
                word: base,
                prefix_twos: 0,
                extra_units: 0,
                target_ratio: 1.0,
            });
        }
        let tau = beta * self.pi_v / pi_base;
        let w0 = base.weight().max(1) as f64;
        let mut p = 1.0f64;
        let mut wc = base.weight() as u64;
        let mut twos = 0usize;
        while p * wc as f64 / (wc + 1) as f64 >= tau {
            p *= wc as f64 / (wc + 1) as f64;
            wc += 2;
            twos += 1;
        }
        let rho = tau / p;
        let mut extra_units = 0usize;
        let mut lead_two = false;
        if 1.0 - rho >= 1.0 / (w0 * w0) {
            let g = (1.0 / (1.0 - rho)).round() as u64;
            let candidates = [g.saturating_sub(1), g, g + 1];
            let best = candidates
                .into_iter()
                .filter(|&c| c > wc)
                .min_by(|&x, &y| {
                    let ex = (p * (1.0 - 1.0 / x as f64) - tau).abs();
                    let ey = (p * (1.0 - 1.0 / y as f64) - tau).abs();
                    ex.total_cmp(&ey)
                });
            if let Some(gbest) = best {
                extra_units = (gbest - wc - 1) as usize;
                lead_two = true;
            }
        }
        let mut syms = Vec::with_capacity(base.len() + twos + extra_units + 1);
        if lead_two {
            syms.push(Symbol::Two);
            syms.extend(std::iter::repeat_n(Symbol::Unit(1), extra_units));
        }
        syms.extend(std::iter::repeat_n(Symbol::Two, twos));
        syms.extend_from_slice(base.symbols());
        let word = Word::from_raw(syms, self.v.r());
        let achieved_ratio = pi_f64(&word) / self.pi_v;
        Ok(Truncation {
            n,
            word,
            prefix_twos: twos + lead_two as usize,
            extra_units,
            target_ratio: beta,
            achieved_ratio,
        })
    }
}

pub fn truncation_sequence(v: &BoundaryVertex, beta: f64, n: usize) -> Result<Truncation> {
    Truncator::new(v)?.truncate(beta, n)
}
