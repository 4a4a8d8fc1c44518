use std::sync::LazyLock;

use dashmap::DashMap;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, YfError};
use crate::graph::PathCount;
use crate::word::{Symbol, Word};

/// Longest words whose `d_1` values are kept in the shared memo.
const D1_MEMO_MAX_LEN: usize = 40;

static F_MEMO: LazyLock<DashMap<(Word, i64, usize), BigRational>> = LazyLock::new(DashMap::new);
static D1_MEMO: LazyLock<DashMap<(Word, Word), BigRational>> = LazyLock::new(DashMap::new);

/// Drops the shared memo tables.
pub fn clear_caches() {
    F_MEMO.clear();
    D1_MEMO.clear();
}

/// One value per Two, rightmost first: the weight of the suffix closed by
/// that Two, minus one.
pub fn g_values(v: &Word) -> Vec<u64> {
    let mut out = Vec::with_capacity(v.twos());
    let mut weight = 0u64;
    for s in v.symbols().iter().rev() {
        weight += s.weight() as u64;
        if s.is_two() {
            out.push(weight - 1);
        }
    }
    out
}

/// The kernel `f(x, y, z)` on the index-free word `x`.
///
/// Zero when `y` lies outside `0..=|x|`.
pub fn f_eval(x: &Word, y: i64, z: usize) -> Result<BigRational> {
    if z > x.len() {
        return Err(YfError::OutOfRange {
            what: "z",
            value: z as i64,
            max: x.len() as i64,
        });
    }
    Ok(f_inner(&x.forget(), y, z))
}

fn f_inner(x: &Word, y: i64, z: usize) -> BigRational {
    if y < 0 || y > x.weight() as i64 {
        return BigRational::zero();
    }
    if z == 0 {
        return f_base(x, y as usize);
    }
    let key = (x.clone(), y, z);
    if let Some(v) = F_MEMO.get(&key) {
        return v.clone();
    }
    let syms = x.symbols();
    let value = match syms.last() {
        Some(Symbol::Unit(_)) => {
            if y == 0 {
                f_base(x, 0)
            } else {
                let head = Word::from_raw(syms[..syms.len() - 1].to_vec(), 1);
                f_base(x, y as usize) + f_inner(&head, y - 1, z - 1)
            }
        }
        Some(Symbol::Two) => {
            if y == 1 {
                BigRational::zero()
            } else {
                let mut split = syms[..syms.len() - 1].to_vec();
                split.extend([Symbol::Unit(1), Symbol::Unit(1)]);
                let split = Word::from_raw(split, 1);
                f_inner(&split, y, z + 1) / BigRational::from_integer(BigInt::from(1 - y))
            }
        }
        None => unreachable!("z <= #x forces a nonempty word"),
    };
    F_MEMO.insert(key, value.clone());
    value
}

/// `f(x, y, 0)`: split off the suffix of weight `y`, then one reciprocal
/// product per side.
fn f_base(x: &Word, y: usize) -> BigRational {
    let syms = x.symbols();
    let mut acc = 0;
    let mut m = syms.len();
    while acc < y {
        m -= 1;
        acc += syms[m].weight();
    }
    if acc != y {
        return BigRational::zero();
    }
    let mut den = BigInt::one();
    let mut partial = 0i64;
    for s in &syms[m..] {
        partial += s.weight() as i64;
        den *= -partial;
    }
    partial = 0;
    for s in syms[..m].iter().rev() {
        partial += s.weight() as i64;
        den *= partial;
    }
    BigRational::new(BigInt::one(), den)
}

fn product_shifted(gs: &[u64], i: i64) -> BigInt {
    let mut p = BigInt::one();
    for &g in gs {
        let factor = g as i64 - i;
        if factor == 0 {
            return BigInt::zero();
        }
        p *= factor;
    }
    p
}

/// `d_1(w, v)` as an exact rational straight from the closed form.
pub(crate) fn d1_rational(w: &Word, v: &Word) -> BigRational {
    debug_assert!(w.r() == 1 && v.r() == 1);
    if w.weight() > v.weight() {
        return BigRational::zero();
    }
    let memo = v.len() <= D1_MEMO_MAX_LEN;
    if memo {
        if let Some(x) = D1_MEMO.get(&(w.clone(), v.clone())) {
            return x.clone();
        }
    }
    let h = w.common_suffix_len(v);
    let gs = g_values(v);
    let mut total = BigRational::zero();
    for i in 0..=w.weight() as i64 {
        let f = f_inner(w, i, h);
        if f.is_zero() {
            continue;
        }
        total += f * product_shifted(&gs, i);
    }
    if memo {
        D1_MEMO.insert((w.clone(), v.clone()), total.clone());
    }
    total
}

fn to_count(x: &BigRational) -> Result<PathCount> {
    if !x.is_integer() || x.is_negative() {
        return Err(YfError::NotAnInteger(x.to_string()));
    }
    Ok(x.to_integer().magnitude().clone())
}

fn int_to_count(x: BigInt) -> Result<PathCount> {
    match x.sign() {
        Sign::Minus => Err(YfError::NotAnInteger(x.to_string())),
        _ => Ok(x.magnitude().clone()),
    }
}

/// `d_1` of the index-forgotten pair via the closed form.
pub fn d1_closed(w: &Word, v: &Word) -> Result<PathCount> {
    to_count(&d1_rational(&w.forget(), &v.forget()))
}

/// `d_1(ε, v)`: the product of the g-values.
pub fn d1_epsilon(v: &Word) -> PathCount {
    g_values(v).into_iter().map(BigUint::from).product()
}

/// `d_r(ε, v) = r^{d(v)} d_1(ε, s(v))`.
pub fn dr_epsilon(v: &Word) -> PathCount {
    d1_epsilon(v) * BigUint::from(v.r()).pow(v.twos() as u32)
}

/// `r^exp · x` for a possibly negative exponent; the result must be integral.
fn scale_by_power(x: BigInt, r: u32, exp: i64) -> Result<BigInt> {
    let base = BigInt::from(r);
    if exp >= 0 {
        return Ok(x * base.pow(exp as u32));
    }
    let den = base.pow((-exp) as u32);
    let (q, rem) = x.div_rem(&den);
    if !rem.is_zero() {
        return Err(YfError::NotAnInteger(format!("{x}/{den}")));
    }
    Ok(q)
}

fn rational_to_int(x: BigRational) -> Result<BigInt> {
    if !x.is_integer() {
        return Err(YfError::NotAnInteger(x.to_string()));
    }
    Ok(x.to_integer())
}

/// `d_r(w, v)` via the reduction to index-free counts.
pub fn dr_closed(w: &Word, v: &Word) -> Result<PathCount> {
    if w.r() != v.r() {
        return Err(YfError::MismatchedR(w.r(), v.r()));
    }
    if w.weight() > v.weight() {
        return Ok(BigUint::zero());
    }
    let r = v.r();
    let rel = w.common_suffix(v);
    let (wf, vf) = (w.forget(), v.forget());
    let mut bracket = rational_to_int(d1_rational(&wf, &vf))?;
    let rb = BigInt::from(r);
    for l in 1..=rel.e_common {
        let term = d1_rational(&wf.strip_from_unit(l)?, &vf.strip_from_unit(l)?);
        if term.is_zero() {
            continue;
        }
        let weight = rb.pow(l as u32) - rb.pow(l as u32 - 1);
        bracket += rational_to_int(term)? * weight;
    }
    if rel.indicator == 1 {
        let l = rel.e_common + 1;
        let term = d1_rational(&wf.strip_from_unit(l)?, &vf.strip_from_unit(l)?);
        bracket -= rational_to_int(term)? * rb.pow(rel.e_common as u32);
    }
    let exp = v.twos() as i64 - w.len() as i64;
    int_to_count(scale_by_power(bracket, r, exp)?)
}

/// Index-free suffix-class count `d_1(w, v, l)`.
pub(crate) fn d1_class_rational(w: &Word, v: &Word, l: usize) -> BigRational {
    let a = Word::from_raw(w.symbols()[..w.len() - l].to_vec(), 1);
    let b = Word::from_raw(v.symbols()[..v.len() - l].to_vec(), 1);
    let mut base = d1_rational(&a, &b);
    if let (Some(x), Some(y)) = (a.last(), b.last()) {
        if x == y {
            let a1 = Word::from_raw(a.symbols()[..a.len() - 1].to_vec(), 1);
            let b1 = Word::from_raw(b.symbols()[..b.len() - 1].to_vec(), 1);
            base -= d1_rational(&a1, &b1);
        }
    }
    base
}

/// `d_r(w, v, l) = d_1(s(w), s(v), l) · r^{#v - #w - e(v[l])}`, zero for a
/// negative exponent.
pub fn dr_suffix_class(w: &Word, v: &Word, l: usize) -> Result<PathCount> {
    if w.r() != v.r() {
        return Err(YfError::MismatchedR(w.r(), v.r()));
    }
    let h = w.common_suffix_len(v);
    if l > h {
        return Err(YfError::OutOfRange {
            what: "suffix class",
            value: l as i64,
            max: h as i64,
        });
    }
    let exp = v.len() as i64 - w.len() as i64 - v.strip_suffix(l)?.units() as i64;
    if exp < 0 {
        return Ok(BigUint::zero());
    }
    let class = d1_class_rational(&w.forget(), &v.forget(), l);
    let n = rational_to_int(class)? * BigInt::from(v.r()).pow(exp as u32);
    int_to_count(n)
}

/// All words with the unit pattern of `u` and indices in `1..=r`, in
/// lexicographic order.
pub fn s_fiber(u: &Word, r: u32) -> Result<Vec<Word>> {
    if r == 0 {
        return Err(YfError::InvalidR(r));
    }
    let mut out = vec![Vec::with_capacity(u.len())];
    for s in u.symbols() {
        out = match s {
            Symbol::Two => out
                .into_iter()
                .map(|mut p| {
                    p.push(Symbol::Two);
                    p
                })
                .collect(),
            Symbol::Unit(_) => out
                .into_iter()
                .flat_map(|p| {
                    (1..=r).map(move |i| {
                        let mut q = p.clone();
                        q.push(Symbol::Unit(i));
                        q
                    })
                })
                .collect(),
        };
    }
    Ok(out.into_iter().map(|s| Word::from_raw(s, r)).collect())
}

/// Both sides of `Σ_{w ∈ S_r(u)} d_r(w, v) = r^{d(v) - d(u)} d_1(u, s(v))`.
pub fn fiber_sum_check(u: &Word, v: &Word, r: u32) -> Result<(PathCount, PathCount)> {
    if v.r() != r {
        return Err(YfError::MismatchedR(v.r(), r));
    }
    let mut lhs = BigUint::zero();
    for w in s_fiber(u, r)? {
        lhs += dr_closed(&w, v)?;
    }
    let d1 = rational_to_int(d1_rational(&u.forget(), &v.forget()))?;
    let rhs = int_to_count(scale_by_power(d1, r, v.twos() as i64 - u.twos() as i64)?)?;
    Ok((lhs, rhs))
}

/// `|v|!` as a big integer.
pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

/// Exact `f(v, 0, z) = d_1(ε, v)/|v|!`, the normalization identity.
pub fn f_normalization_holds(v: &Word) -> bool {
    let vf = v.forget();
    let target = BigRational::new(
        BigInt::from(d1_epsilon(&vf)),
        BigInt::from(factorial(vf.weight())),
    );
    (0..=vf.len()).all(|z| f_inner(&vf, 0, z) == target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::count_paths_dp;

    fn w(text: &str, r: u32) -> Word {
        Word::parse(text, r).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn n(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_values(&w("2,1", 1)), vec![2]);
        assert_eq!(g_values(&w("2,2", 1)), vec![1, 3]);
        assert_eq!(g_values(&w("2,1_2,1_1", 2)), vec![3]);
        assert!(g_values(&w("1,1", 1)).is_empty());
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_eval(&w("", 1), 0, 0).unwrap(), q(1, 1));
        assert_eq!(f_eval(&w("2,1", 1), 0, 0).unwrap(), q(1, 3));
        assert_eq!(f_eval(&w("2,1", 1), 1, 0).unwrap(), q(-1, 2));
        assert_eq!(f_eval(&w("2", 1), 0, 1).unwrap(), q(1, 2));
        assert_eq!(f_eval(&w("1", 1), 1, 1).unwrap(), q(0, 1));
        assert_eq!(f_eval(&w("2", 1), 5, 0).unwrap(), q(0, 1));
        assert_eq!(f_eval(&w("2", 1), -1, 0).unwrap(), q(0, 1));
        assert!(f_eval(&w("2", 1), 0, 2).is_err());
    }

    #[test]
    fn f_vanishes_without_matching_suffix() {
        // "2,2" has no suffix of weight 1 or 3
        for z in 0..=2 {
            assert!(f_eval(&w("2,2", 1), 1, z).unwrap().is_zero());
            assert!(f_eval(&w("2,2", 1), 3, z).unwrap().is_zero());
        }
    }

    #[test]
    fn d1_examples() {
        let e = Word::empty(1);
        assert_eq!(d1_closed(&e, &w("2,2", 1)).unwrap(), n(3));
        assert_eq!(d1_closed(&w("1", 1), &w("2,1", 1)).unwrap(), n(2));
        assert_eq!(d1_closed(&w("2", 1), &w("2,2", 1)).unwrap(), n(2));
        assert_eq!(d1_closed(&w("2,2", 1), &w("2", 1)).unwrap(), n(0));
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(d1_epsilon(&w("2,1", 1)), n(2));
        assert_eq!(d1_epsilon(&w("1,1,1", 1)), n(1));
        assert_eq!(d1_epsilon(&w("2,2", 1)), n(3));
        assert_eq!(dr_epsilon(&w("2", 2)), n(2));
        assert_eq!(dr_epsilon(&w("1_2", 2)), n(1));
        assert_eq!(dr_epsilon(&w("2,1_1", 2)), n(4));
    }

    #[test]
    fn suffix_class_examples() {
        assert_eq!(dr_suffix_class(&w("2", 1), &w("2,2", 1), 1).unwrap(), n(1));
        assert_eq!(dr_suffix_class(&w("2", 2), &w("2,2", 2), 0).unwrap(), n(2));
        assert!(dr_suffix_class(&w("2", 1), &w("2,2", 1), 2).is_err());
        // #v - #w - e(v[0]) = 1 - 1 - 1 < 0
        assert_eq!(dr_suffix_class(&w("1_2", 2), &w("1_1", 2), 0).unwrap(), n(0));
    }

    #[test]
    fn dr_examples() {
        let v = w("2,1_1", 2);
        assert_eq!(dr_closed(&Word::empty(2), &v).unwrap(), dr_epsilon(&v));
        let w1 = w("1_1", 2);
        assert_eq!(dr_closed(&w1, &v).unwrap(), count_paths_dp(&w1, &v).unwrap());
        // negative outer exponent
        let (a, b) = (w("1_1,1_1", 2), w("2,1_1", 2));
        assert_eq!(dr_closed(&a, &b).unwrap(), count_paths_dp(&a, &b).unwrap());
        assert!(dr_closed(&w("1", 1), &w("1_1", 2)).is_err());
    }

    #[test]
    fn fiber_examples() {
        assert_eq!(s_fiber(&w("2", 1), 2).unwrap(), vec![w("2", 2)]);
        assert_eq!(s_fiber(&w("1", 1), 2).unwrap(), vec![w("1_1", 2), w("1_2", 2)]);
        assert_eq!(s_fiber(&w("1,1", 1), 3).unwrap().len(), 9);
        for (u, v) in [("", "2,1_1"), ("1", "2,1_1"), ("1,1", "2,2")] {
            let (lhs, rhs) = fiber_sum_check(&w(u, 1), &w(v, 2), 2).unwrap();
            assert_eq!(lhs, rhs, "u={u} v={v}");
        }
    }

    #[test]
    fn normalization_small() {
        for t in ["", "1", "2", "2,1", "1,2,2", "2,2,1,1"] {
            assert!(f_normalization_holds(&w(t, 1)), "{t}");
        }
    }
}
