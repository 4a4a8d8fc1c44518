use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, YfError};

/// A letter of the alphabet `{2, 1_1, .., 1_r}`.
///
/// The derived order puts `Two` first and units by index, which is the
/// order used for level listings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Two,
    Unit(u32),
}

impl Symbol {
    pub fn weight(self) -> usize {
        match self {
            Symbol::Two => 2,
            Symbol::Unit(_) => 1,
        }
    }

    pub fn is_unit(self) -> bool {
        matches!(self, Symbol::Unit(_))
    }

    pub fn is_two(self) -> bool {
        matches!(self, Symbol::Two)
    }

    /// Token text; `r = 1` units print as the bare `1`.
    pub fn token(self, r: u32) -> String {
        match self {
            Symbol::Two => "2".to_string(),
            Symbol::Unit(_) if r == 1 => "1".to_string(),
            Symbol::Unit(i) => format!("1_{i}"),
        }
    }

    fn parse(token: &str, r: u32) -> Result<Symbol> {
        let sym = match token {
            "2" => Symbol::Two,
            "1" => Symbol::Unit(1),
            _ => {
                let idx = token
                    .strip_prefix("1_")
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| YfError::MalformedToken(token.to_string()))?;
                Symbol::Unit(idx)
            }
        };
        if let Symbol::Unit(i) = sym {
            if i == 0 || i > r {
                return Err(YfError::IndexOutOfRange { index: i, r });
            }
        }
        Ok(sym)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Stats {
    pub weight: usize,
    pub length: usize,
    pub units: usize,
    pub twos: usize,
}

/// A finite vertex of the r-differential graph, leftmost symbol first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    symbols: Vec<Symbol>,
    r: u32,
}

/// Longest-common-suffix data for a pair `(w, v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixRelation {
    /// Number of symbols in the longest common suffix.
    pub h: usize,
    /// Units inside that suffix.
    pub e_common: usize,
    /// `w` with the common suffix removed.
    pub w_stripped: Word,
    /// `v` with the common suffix removed.
    pub v_stripped: Word,
    /// 1 iff both stripped words end in units with different indices.
    pub indicator: u8,
}

impl Word {
    pub fn new(symbols: Vec<Symbol>, r: u32) -> Result<Word> {
        if r == 0 {
            return Err(YfError::InvalidR(r));
        }
        for s in &symbols {
            if let Symbol::Unit(i) = *s {
                if i == 0 || i > r {
                    return Err(YfError::IndexOutOfRange { index: i, r });
                }
            }
        }
        Ok(Word { symbols, r })
    }

    /// Caller guarantees every index lies in `1..=r`.
    pub(crate) fn from_raw(symbols: Vec<Symbol>, r: u32) -> Word {
        debug_assert!(symbols
            .iter()
            .all(|s| !matches!(s, Symbol::Unit(i) if *i == 0 || *i > r)));
        Word { symbols, r }
    }

    pub fn empty(r: u32) -> Word {
        Word { symbols: Vec::new(), r }
    }

    /// Parses tokens `2`, `1` or `1_i` separated by commas or whitespace.
    pub fn parse(text: &str, r: u32) -> Result<Word> {
        if r == 0 {
            return Err(YfError::InvalidR(r));
        }
        let symbols = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| Symbol::parse(t, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word { symbols, r })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of symbols, `#v`.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Sum of digits, `|v|`.
    pub fn weight(&self) -> usize {
        self.symbols.iter().map(|s| s.weight()).sum()
    }

    pub fn units(&self) -> usize {
        self.symbols.iter().filter(|s| s.is_unit()).count()
    }

    pub fn twos(&self) -> usize {
        self.symbols.iter().filter(|s| s.is_two()).count()
    }

    pub fn stats(&self) -> Stats {
        let units = self.units();
        let twos = self.len() - units;
        Stats {
            weight: units + 2 * twos,
            length: units + twos,
            units,
            twos,
        }
    }

    pub fn last(&self) -> Option<Symbol> {
        self.symbols.last().copied()
    }

    pub fn leftmost_unit(&self) -> Option<usize> {
        self.symbols.iter().position(|s| s.is_unit())
    }

    /// Same symbols viewed in a larger alphabet.
    pub fn with_r(&self, r: u32) -> Result<Word> {
        Word::new(self.symbols.clone(), r)
    }

    /// Every unit index replaced by 1; the result lives in `r = 1`.
    pub fn forget(&self) -> Word {
        let symbols = self
            .symbols
            .iter()
            .map(|s| match s {
                Symbol::Two => Symbol::Two,
                Symbol::Unit(_) => Symbol::Unit(1),
            })
            .collect();
        Word { symbols, r: 1 }
    }

    /// The last `l` symbols.
    pub fn suffix(&self, l: usize) -> Result<Word> {
        self.check_len(l)?;
        Ok(Word::from_raw(self.symbols[self.len() - l..].to_vec(), self.r))
    }

    /// Drops the last `l` symbols, `v[l]`.
    pub fn strip_suffix(&self, l: usize) -> Result<Word> {
        self.check_len(l)?;
        Ok(Word::from_raw(self.symbols[..self.len() - l].to_vec(), self.r))
    }

    /// Position of the `l`-th unit counted from the right (`l >= 1`).
    fn unit_from_right(&self, l: usize) -> Result<usize> {
        let e = self.units();
        if l == 0 || l > e {
            return Err(YfError::OutOfRange {
                what: "unit rank",
                value: l as i64,
                max: e as i64,
            });
        }
        let mut seen = 0;
        for (k, s) in self.symbols.iter().enumerate().rev() {
            if s.is_unit() {
                seen += 1;
                if seen == l {
                    return Ok(k);
                }
            }
        }
        unreachable!()
    }

    /// Drops everything from the `l`-th unit from the right onwards, `v{l}`.
    pub fn strip_from_unit(&self, l: usize) -> Result<Word> {
        if l == 0 {
            return Ok(self.clone());
        }
        let k = self.unit_from_right(l)?;
        Ok(Word::from_raw(self.symbols[..k].to_vec(), self.r))
    }

    /// The suffix starting at the `l`-th unit from the right, `v<l>`.
    pub fn suffix_from_unit(&self, l: usize) -> Result<Word> {
        if l == 0 {
            return Ok(Word::empty(self.r));
        }
        let k = self.unit_from_right(l)?;
        Ok(Word::from_raw(self.symbols[k..].to_vec(), self.r))
    }

    /// Replaces the `l`-th unit from the right by a Two.
    pub fn bump_unit(&self, l: usize) -> Result<Word> {
        let k = self.unit_from_right(l)?;
        let mut symbols = self.symbols.clone();
        symbols[k] = Symbol::Two;
        Ok(Word::from_raw(symbols, self.r))
    }

    pub fn ends_with(&self, tail: &[Symbol]) -> bool {
        self.symbols.ends_with(tail)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Word::from_raw(symbols, self.r.max(other.r))
    }

    /// Length of the longest common suffix.
    pub fn common_suffix_len(&self, other: &Word) -> usize {
        self.symbols
            .iter()
            .rev()
            .zip(other.symbols.iter().rev())
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn common_suffix(&self, v: &Word) -> SuffixRelation {
        let h = self.common_suffix_len(v);
        let e_common = self.symbols[self.len() - h..]
            .iter()
            .filter(|s| s.is_unit())
            .count();
        let w_stripped = Word::from_raw(self.symbols[..self.len() - h].to_vec(), self.r);
        let v_stripped = Word::from_raw(v.symbols[..v.len() - h].to_vec(), v.r);
        let indicator = match (w_stripped.last(), v_stripped.last()) {
            (Some(Symbol::Unit(a)), Some(Symbol::Unit(b))) if a != b => 1,
            _ => 0,
        };
        SuffixRelation {
            h,
            e_common,
            w_stripped,
            v_stripped,
            indicator,
        }
    }

    fn check_len(&self, l: usize) -> Result<()> {
        if l > self.len() {
            return Err(YfError::OutOfRange {
                what: "suffix length",
                value: l as i64,
                max: self.len() as i64,
            });
        }
        Ok(())
    }

    pub fn tokens(&self) -> Vec<String> {
        self.symbols.iter().map(|s| s.token(self.r)).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens().join(","))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.tokens().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    /// `r` is taken as the largest index present (at least 1).
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Word, D::Error> {
        let tokens = Vec::<String>::deserialize(deserializer)?;
        let symbols = tokens
            .iter()
            .map(|t| Symbol::parse(t, u32::MAX))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let r = symbols
            .iter()
            .map(|s| match s {
                Symbol::Two => 1,
                Symbol::Unit(i) => *i,
            })
            .max()
            .unwrap_or(1);
        Ok(Word { symbols, r })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str, r: u32) -> Word {
        Word::parse(text, r).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert!(w("", 1).is_empty());
        assert_eq!(w("2,1", 1).symbols(), &[Symbol::Two, Symbol::Unit(1)]);
        assert_eq!(
            w("2,1_2,1_1", 2).symbols(),
            &[Symbol::Two, Symbol::Unit(2), Symbol::Unit(1)]
        );
        assert_eq!(w("2 1_2\t1", 2), w("2,1_2,1_1", 2));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Word::parse("3", 1), Err(YfError::MalformedToken(_))));
        assert!(matches!(Word::parse("1_x", 2), Err(YfError::MalformedToken(_))));
        assert!(matches!(
            Word::parse("1_3", 2),
            Err(YfError::IndexOutOfRange { index: 3, r: 2 })
        ));
        assert!(matches!(
            Word::parse("1_0", 2),
            Err(YfError::IndexOutOfRange { .. })
        ));
        assert!(matches!(Word::parse("", 0), Err(YfError::InvalidR(0))));
    }

    #[test]
    fn multi_digit_index() {
        let v = w("1_12,2", 12);
        assert_eq!(v.to_string(), "1_12,2");
    }

    #[test]
    fn stats_examples() {
        let s = |t: &str, r| {
            let st = w(t, r).stats();
            (st.weight, st.length, st.units, st.twos)
        };
        assert_eq!(s("", 1), (0, 0, 0, 0));
        assert_eq!(s("2,1", 1), (3, 2, 1, 1));
        assert_eq!(s("2,1_2,1_1", 2), (4, 3, 2, 1));
    }

    #[test]
    fn forget_examples() {
        assert_eq!(w("", 2).forget(), w("", 1));
        assert_eq!(w("1_2", 2).forget(), w("1", 1));
        assert_eq!(w("2,1_2,1_1", 2).forget(), w("2,1,1", 1));
    }

    #[test]
    fn strip_suffix_examples() {
        assert_eq!(w("2,1", 1).strip_suffix(0).unwrap(), w("2,1", 1));
        assert_eq!(w("2,1", 1).strip_suffix(1).unwrap(), w("2", 1));
        assert_eq!(w("2,1_2,1_1", 2).strip_suffix(2).unwrap(), w("2", 2));
        assert!(w("2,1", 1).strip_suffix(3).is_err());
    }

    #[test]
    fn unit_suffix_examples() {
        let v = w("2,1,2,1,1", 1);
        assert_eq!(v.strip_from_unit(1).unwrap(), w("2,1,2,1", 1));
        assert_eq!(v.suffix_from_unit(1).unwrap(), w("1", 1));
        assert_eq!(v.strip_from_unit(2).unwrap(), w("2,1,2", 1));
        assert_eq!(v.suffix_from_unit(2).unwrap(), w("1,1", 1));
        assert_eq!(v.strip_from_unit(0).unwrap(), v);
        assert!(v.suffix_from_unit(0).unwrap().is_empty());
        assert!(v.strip_from_unit(4).is_err());
        assert_eq!(w("1,1", 1).bump_unit(2).unwrap(), w("2,1", 1));
        assert!(w("2", 1).bump_unit(1).is_err());
    }

    #[test]
    fn common_suffix_examples() {
        let rel = w("2,1", 1).common_suffix(&w("1,1", 1));
        assert_eq!((rel.h, rel.e_common, rel.indicator), (1, 1, 0));
        assert_eq!(rel.w_stripped, w("2", 1));
        assert_eq!(rel.v_stripped, w("1", 1));

        let rel = w("2,2,1_5,1_3,2,1_2", 8).common_suffix(&w("1_8,1_1,1_3,2,1_2", 8));
        assert_eq!(rel.e_common, 2);
        assert_eq!(rel.h, 3);
        assert_eq!(rel.indicator, 1);

        let rel = w("1_1", 2).common_suffix(&w("1_2", 2));
        assert_eq!((rel.h, rel.indicator), (0, 1));

        let rel = w("", 2).common_suffix(&w("1_2", 2));
        assert_eq!((rel.h, rel.indicator), (0, 0));
    }

    #[test]
    fn json_round_trip() {
        let v = w("2,1_2,1_1", 2);
        let js = serde_json::to_string(&v).unwrap();
        assert_eq!(js, r#"["2","1_2","1_1"]"#);
        let back: Word = serde_json::from_str(&js).unwrap();
        assert_eq!(back, v);
    }
}
