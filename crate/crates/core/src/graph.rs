use std::collections::HashMap;

use dashmap::DashMap;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Result, YfError};
use crate::word::{Symbol, Word};

/// Number of saturated descending chains between two vertices.
pub type PathCount = BigUint;

/// All vertices of one weight, in lexicographic order with `2 < 1_1 < .. < 1_r`.
#[derive(Clone, Debug, Serialize)]
pub struct LevelSet {
    pub r: u32,
    pub n: usize,
    pub vertices: Vec<Word>,
}

/// Lower covers: delete the leftmost unit, or turn any Two left of it into any unit.
pub fn down_neighbors(v: &Word) -> Vec<Word> {
    let syms = v.symbols();
    let r = v.r();
    let p = v.leftmost_unit().unwrap_or(syms.len());
    let mut out = Vec::with_capacity(1 + p * r as usize);
    if p < syms.len() {
        let mut s = syms.to_vec();
        s.remove(p);
        out.push(Word::from_raw(s, r));
    }
    for q in 0..p {
        for i in 1..=r {
            let mut s = syms.to_vec();
            s[q] = Symbol::Unit(i);
            out.push(Word::from_raw(s, r));
        }
    }
    out
}

/// Upper covers: the inverse of [`down_neighbors`].
pub fn up_neighbors(v: &Word) -> Vec<Word> {
    let syms = v.symbols();
    let r = v.r();
    let p = v.leftmost_unit().unwrap_or(syms.len());
    let mut out = Vec::with_capacity(1 + (p + 1) * r as usize);
    if p < syms.len() {
        let mut s = syms.to_vec();
        s[p] = Symbol::Two;
        out.push(Word::from_raw(s, r));
    }
    for a in 0..=p {
        for i in 1..=r {
            let mut s = syms.to_vec();
            s.insert(a, Symbol::Unit(i));
            out.push(Word::from_raw(s, r));
        }
    }
    out
}

/// `(up degree, down degree)`; their difference is always `r`.
pub fn degrees(v: &Word) -> (usize, usize) {
    (up_neighbors(v).len(), down_neighbors(v).len())
}

pub fn level(r: u32, n: usize) -> Result<LevelSet> {
    if r == 0 {
        return Err(YfError::InvalidR(r));
    }
    Ok(LevelSet {
        r,
        n,
        vertices: levels_up_to(r, n).pop().unwrap(),
    })
}

/// Levels `0..=n`, each generated from the two below it.
pub fn levels_up_to(r: u32, n: usize) -> Vec<Vec<Word>> {
    let mut levels: Vec<Vec<Word>> = vec![vec![Word::empty(r)]];
    for m in 1..=n {
        let mut cur = Vec::new();
        if m >= 2 {
            for w in &levels[m - 2] {
                cur.push(prepend(Symbol::Two, w));
            }
        }
        for i in 1..=r {
            for w in &levels[m - 1] {
                cur.push(prepend(Symbol::Unit(i), w));
            }
        }
        levels.push(cur);
    }
    levels
}

/// `a_n = r a_{n-1} + a_{n-2}` with `a_0 = 1`, `a_1 = r`.
pub fn level_size(r: u32, n: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::one(), BigUint::from(r));
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        let c = &b * r + &a;
        a = b;
        b = c;
    }
    b
}

fn prepend(s: Symbol, w: &Word) -> Word {
    let mut syms = Vec::with_capacity(w.len() + 1);
    syms.push(s);
    syms.extend_from_slice(w.symbols());
    Word::from_raw(syms, w.r())
}

/// Cheap necessary condition for `w` to lie below `x`: going down never
/// lengthens a word and never creates a Two.
pub fn may_precede(w: &Word, x: &Word) -> bool {
    w.weight() <= x.weight() && w.len() <= x.len() && w.twos() <= x.twos()
}

/// Memoized top-down chain counter; the cache is shared between queries.
#[derive(Debug, Default)]
pub struct PathCounter {
    memo: DashMap<(Word, Word), PathCount>,
    cap: Option<usize>,
}

impl PathCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stops inserting once the cache holds `cap` entries.
    pub fn with_cap(cap: usize) -> Self {
        PathCounter {
            memo: DashMap::new(),
            cap: Some(cap),
        }
    }

    pub fn cache_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear(&self) {
        self.memo.clear();
    }

    /// `d_r(w, v)` by recursion over lower covers of `v`.
    pub fn count(&self, w: &Word, v: &Word) -> Result<PathCount> {
        if w.r() != v.r() {
            return Err(YfError::MismatchedR(w.r(), v.r()));
        }
        Ok(self.count_inner(w, v))
    }

    fn count_inner(&self, w: &Word, x: &Word) -> PathCount {
        if x == w {
            return BigUint::one();
        }
        if x.weight() <= w.weight() || !may_precede(w, x) {
            return BigUint::zero();
        }
        let key = (w.clone(), x.clone());
        if let Some(c) = self.memo.get(&key) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        for y in down_neighbors(x) {
            total += self.count_inner(w, &y);
        }
        if self.cap.is_none_or(|c| self.memo.len() < c) {
            self.memo.insert(key, total.clone());
        }
        total
    }
}

/// One-shot `d_r(w, v)`.
pub fn count_paths_dp(w: &Word, v: &Word) -> Result<PathCount> {
    PathCounter::new().count(w, v)
}

/// Chains from `v` down to `w` whose every vertex ends with `tail`.
fn count_keeping(w: &Word, v: &Word, tail: &[Symbol]) -> PathCount {
    fn go(
        w: &Word,
        x: &Word,
        tail: &[Symbol],
        memo: &mut HashMap<Word, PathCount>,
    ) -> PathCount {
        if x == w {
            return BigUint::one();
        }
        if x.weight() <= w.weight() || !may_precede(w, x) {
            return BigUint::zero();
        }
        if let Some(c) = memo.get(x) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        for y in down_neighbors(x) {
            if y.ends_with(tail) {
                total += go(w, &y, tail, memo);
            }
        }
        memo.insert(x.clone(), total.clone());
        total
    }
    if !w.ends_with(tail) || !v.ends_with(tail) {
        return BigUint::zero();
    }
    go(w, v, tail, &mut HashMap::new())
}

/// Chains whose longest suffix shared by all their vertices has length exactly `l`.
pub fn count_paths_suffix_class(w: &Word, v: &Word, l: usize) -> Result<PathCount> {
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
    let syms = v.symbols();
    let at_least_l = count_keeping(w, v, &syms[syms.len() - l..]);
    if l < h {
        let longer = count_keeping(w, v, &syms[syms.len() - l - 1..]);
        Ok(at_least_l - longer)
    } else {
        Ok(at_least_l)
    }
}

/// Levels `0..=max_weight` with precomputed lower-cover indices, for bulk sweeps.
#[derive(Debug, Clone)]
pub struct LevelTable {
    pub r: u32,
    pub levels: Vec<Vec<Word>>,
    index: Vec<HashMap<Word, usize>>,
    /// `down[n][k]` lists positions in level `n - 1`.
    down: Vec<Vec<Vec<usize>>>,
}

impl LevelTable {
    pub fn new(r: u32, max_weight: usize) -> Result<LevelTable> {
        if r == 0 {
            return Err(YfError::InvalidR(r));
        }
        let levels = levels_up_to(r, max_weight);
        let index: Vec<HashMap<Word, usize>> = levels
            .iter()
            .map(|lv| lv.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect())
            .collect();
        let down = levels
            .iter()
            .enumerate()
            .map(|(n, lv)| {
                lv.iter()
                    .map(|v| {
                        if n == 0 {
                            return Vec::new();
                        }
                        down_neighbors(v)
                            .iter()
                            .map(|y| index[n - 1][y])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(LevelTable {
            r,
            levels,
            index,
            down,
        })
    }

    pub fn max_weight(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w.weight())?.get(w).copied()
    }

    /// `out[n][k] = d_r(w, levels[n][k])`; levels below `|w|` are empty.
    pub fn counts_from(&self, w: &Word) -> Vec<Vec<PathCount>> {
        self.counts_keeping(w, 0)
    }

    /// As [`Self::counts_from`] but only along chains whose every vertex
    /// ends with the last `l` symbols of `w`.
    pub fn counts_keeping(&self, w: &Word, l: usize) -> Vec<Vec<PathCount>> {
        let base = w.weight();
        let tail = &w.symbols()[w.len() - l.min(w.len())..];
        let mut out: Vec<Vec<PathCount>> = vec![Vec::new(); self.levels.len()];
        if base > self.max_weight() || l > w.len() {
            return out;
        }
        let mut first = vec![BigUint::zero(); self.levels[base].len()];
        if let Some(k) = self.position(w) {
            first[k] = BigUint::one();
        }
        out[base] = first;
        for n in base + 1..self.levels.len() {
            let prev = &out[n - 1];
            let cur: Vec<PathCount> = self.levels[n]
                .iter()
                .zip(&self.down[n])
                .map(|(v, downs)| {
                    let mut s = BigUint::zero();
                    if l > 0 && !v.ends_with(tail) {
                        return s;
                    }
                    for &j in downs {
                        if !prev[j].is_zero() {
                            s += &prev[j];
                        }
                    }
                    s
                })
                .collect();
            out[n] = cur;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str, r: u32) -> Word {
        Word::parse(text, r).unwrap()
    }

    fn set(words: Vec<Word>) -> Vec<String> {
        let mut s: Vec<String> = words.iter().map(|x| x.to_string()).collect();
        s.sort();
        s
    }

    #[test]
    fn down_examples() {
        assert_eq!(set(down_neighbors(&w("2,1", 1))), vec!["1,1", "2"]);
        assert_eq!(set(down_neighbors(&w("2", 2))), vec!["1_1", "1_2"]);
        assert_eq!(set(down_neighbors(&w("1,2", 1))), vec!["2"]);
        assert!(down_neighbors(&w("", 3)).is_empty());
    }

    #[test]
    fn up_examples() {
        assert_eq!(set(up_neighbors(&w("", 2))), vec!["1_1", "1_2"]);
        assert_eq!(set(up_neighbors(&w("1", 1))), vec!["1,1", "2"]);
        assert_eq!(set(up_neighbors(&w("2", 1))), vec!["1,2", "2,1"]);
    }

    #[test]
    fn up_inverts_down_on_level_three() {
        let upper = level(1, 3).unwrap().vertices;
        let brute: Vec<Word> = upper
            .into_iter()
            .filter(|y| down_neighbors(y).contains(&w("2", 1)))
            .collect();
        assert_eq!(set(brute), set(up_neighbors(&w("2", 1))));
    }

    #[test]
    fn level_examples() {
        let l = level(1, 3).unwrap();
        assert_eq!(
            l.vertices.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            vec!["2,1", "1,2", "1,1,1"]
        );
        assert_eq!(level(2, 2).unwrap().vertices.len(), 5);
        assert_eq!(level(3, 0).unwrap().vertices, vec![Word::empty(3)]);
        assert!(level(0, 1).is_err());
    }

    #[test]
    fn level_sizes() {
        let pell = [1u32, 2, 5, 12, 29, 70, 169, 408, 985, 2378, 5741];
        for (n, &p) in pell.iter().enumerate() {
            assert_eq!(level_size(2, n), BigUint::from(p));
        }
        assert_eq!(level_size(1, 10), BigUint::from(89u32));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degrees(&w("", 1)), (1, 0));
        assert_eq!(degrees(&w("1", 1)), (2, 1));
        let (u, d) = degrees(&w("2", 3));
        assert_eq!(u - d, 3);
    }

    #[test]
    fn dp_examples() {
        let e = Word::empty(1);
        assert_eq!(count_paths_dp(&e, &w("2,1", 1)).unwrap(), BigUint::from(2u32));
        assert_eq!(count_paths_dp(&e, &w("2,2", 1)).unwrap(), BigUint::from(3u32));
        let v = w("2,1_2,1_1", 2);
        assert_eq!(count_paths_dp(&v, &v).unwrap(), BigUint::one());
        assert!(count_paths_dp(&w("2,2", 1), &w("2", 1)).unwrap().is_zero());
        assert!(count_paths_dp(&w("2", 1), &w("2", 2)).is_err());
    }

    #[test]
    fn suffix_class_examples() {
        let (a, b) = (w("2", 1), w("2,2", 1));
        assert_eq!(count_paths_suffix_class(&a, &b, 1).unwrap(), BigUint::one());
        assert_eq!(count_paths_suffix_class(&a, &b, 0).unwrap(), BigUint::one());
        assert!(count_paths_suffix_class(&a, &b, 2).is_err());
    }

    #[test]
    fn pruning_matches_unpruned_recursion() {
        fn plain(w: &Word, x: &Word) -> BigUint {
            if x == w {
                return BigUint::one();
            }
            if x.weight() <= w.weight() {
                return BigUint::zero();
            }
            down_neighbors(x).iter().map(|y| plain(w, y)).sum()
        }
        let levels = levels_up_to(2, 5);
        let counter = PathCounter::new();
        for v in levels.iter().flatten() {
            for x in levels.iter().flatten() {
                assert_eq!(counter.count(x, v).unwrap(), plain(x, v), "{x} -> {v}");
            }
        }
    }

    #[test]
    fn table_matches_recursion() {
        let t = LevelTable::new(2, 6).unwrap();
        let counter = PathCounter::new();
        for w0 in t.levels.iter().take(4).flatten() {
            let counts = t.counts_from(w0);
            for n in w0.weight()..=6 {
                for (k, v) in t.levels[n].iter().enumerate() {
                    assert_eq!(counts[n][k], counter.count(w0, v).unwrap());
                }
            }
        }
    }

    #[test]
    fn capped_counter_still_counts() {
        let c = PathCounter::with_cap(3);
        let e = Word::empty(2);
        let v = w("2,2,1_1", 2);
        assert_eq!(c.count(&e, &v).unwrap(), count_paths_dp(&e, &v).unwrap());
        assert!(c.cache_len() <= 3);
    }
}
