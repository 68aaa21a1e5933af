//! Finite words over `{0, .., m-1}`, prefixes, suffixes and the shift metric.
//!
//! Positions reported to callers are 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ALPHABET: u16 = 256;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    m: u16,
    symbols: Vec<u8>,
}

/// The first `len` coordinates of a one-sided sequence.
pub type SymbolicPrefix = Word;

impl Word {
    pub fn new(m: u16, symbols: Vec<u8>) -> Result<Self> {
        check_alphabet(m)?;
        if let Some(&s) = symbols.iter().find(|&&s| u16::from(s) >= m) {
            return Err(Error::BadSymbol { symbol: s.into(), m });
        }
        Ok(Word { m, symbols })
    }

    pub fn empty(m: u16) -> Self {
        Word { m, symbols: Vec::new() }
    }

    pub fn alphabet_size(&self) -> u16 {
        self.m
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// 1-based access.
    pub fn at(&self, i: usize) -> Result<u8> {
        if i == 0 || i > self.len() {
            return Err(Error::OutOfRange { index: i, len: self.len() });
        }
        Ok(self.symbols[i - 1])
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        same_alphabet(self, other)?;
        let mut symbols = Vec::with_capacity(self.len() + other.len());
        symbols.extend_from_slice(&self.symbols);
        symbols.extend_from_slice(&other.symbols);
        Ok(Word { m: self.m, symbols })
    }

    /// `w_1 .. w_n`, for `1 <= n <= |w|`.
    pub fn prefix(&self, n: usize) -> Result<Word> {
        if n == 0 || n > self.len() {
            return Err(Error::OutOfRange { index: n, len: self.len() });
        }
        Ok(Word { m: self.m, symbols: self.symbols[..n].to_vec() })
    }

    /// `w_{|w|-n+1} .. w_{|w|}`, for `1 <= n <= |w|`.
    pub fn suffix(&self, n: usize) -> Result<Word> {
        if n == 0 || n > self.len() {
            return Err(Error::OutOfRange { index: n, len: self.len() });
        }
        Ok(Word { m: self.m, symbols: self.symbols[self.len() - n..].to_vec() })
    }

    /// Like `prefix` but accepts `n = 0` and returns the empty word.
    pub fn take(&self, n: usize) -> Word {
        Word { m: self.m, symbols: self.symbols[..n.min(self.len())].to_vec() }
    }

    /// Like `suffix` but accepts `n = 0` and returns the empty word.
    pub fn take_last(&self, n: usize) -> Word {
        let n = n.min(self.len());
        Word { m: self.m, symbols: self.symbols[self.len() - n..].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.m == other.m && other.symbols.starts_with(&self.symbols)
    }

    /// Parse the text format: digits when `m <= 10`, comma separated otherwise.
    /// `""` and `"eps"` denote the empty word.
    pub fn parse(m: u16, text: &str) -> Result<Word> {
        check_alphabet(m)?;
        let text = text.trim();
        if text.is_empty() || text == "eps" {
            return Ok(Word::empty(m));
        }
        let symbols: Vec<u32> = if m <= 10 && !text.contains(',') {
            text.chars()
                .map(|c| c.to_digit(10).ok_or_else(|| Error::Parse(format!("bad symbol {c:?} in {text:?}"))))
                .collect::<Result<_>>()?
        } else {
            text.split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad symbol {t:?} in {text:?}"))))
                .collect::<Result<_>>()?
        };
        let mut out = Vec::with_capacity(symbols.len());
        for s in symbols {
            if s >= u32::from(m) {
                return Err(Error::BadSymbol { symbol: s, m });
            }
            out.push(s as u8);
        }
        Ok(Word { m, symbols: out })
    }

    /// Text form used in CLI contexts, where the empty word is `eps`.
    pub fn to_cli_string(&self) -> String {
        if self.is_empty() {
            "eps".into()
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m <= 10 {
            for &s in &self.symbols {
                write!(f, "{s}")?;
            }
        } else {
            for (i, s) in self.symbols.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word[m={}]({})", self.m, self.to_cli_string())
    }
}

fn check_alphabet(m: u16) -> Result<()> {
    if !(2..=MAX_ALPHABET).contains(&m) {
        return Err(Error::domain(format!("alphabet size {m} outside 2..={MAX_ALPHABET}")));
    }
    Ok(())
}

pub(crate) fn same_alphabet(a: &Word, b: &Word) -> Result<()> {
    if a.m != b.m {
        return Err(Error::AlphabetMismatch { left: a.m, right: b.m });
    }
    Ok(())
}

/// Failure function: `border[i]` is the length of the longest proper border of `p[..=i]`.
pub(crate) fn border_array(p: &[u8]) -> Vec<usize> {
    let mut border = vec![0usize; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = border[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        border[i] = k;
    }
    border
}

/// Z-array: `z[i]` is the length of the longest common prefix of `s` and `s[i..]`; `z[0] = |s|`.
pub(crate) fn z_array(s: &[u8]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0usize; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0usize, 0usize);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

/// Ascending 1-based start positions of `v` in `w`.
pub fn subword_occurrences(v: &Word, w: &Word) -> Result<Vec<usize>> {
    same_alphabet(v, w)?;
    if v.is_empty() {
        return Err(Error::domain("pattern must be non-empty"));
    }
    Ok(find_all(v.symbols(), w.symbols()))
}

pub(crate) fn find_all(p: &[u8], t: &[u8]) -> Vec<usize> {
    let mut out = Vec::new();
    if p.is_empty() || p.len() > t.len() {
        return out;
    }
    let border = border_array(p);
    let mut k = 0;
    for (i, &c) in t.iter().enumerate() {
        while k > 0 && c != p[k] {
            k = border[k - 1];
        }
        if c == p[k] {
            k += 1;
        }
        if k == p.len() {
            out.push(i + 2 - p.len());
            k = border[k - 1];
        }
    }
    out
}

/// True when `w` has no proper border (no non-trivial self-overlap).
pub fn is_unbordered(w: &[u8]) -> bool {
    w.is_empty() || border_array(w).last().copied() == Some(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    /// `e^{-index}`, with `index` the first 1-based disagreement.
    Exact { index: usize, value: f64 },
    Indistinguishable,
}

impl Distance {
    pub fn value(&self) -> Option<f64> {
        match self {
            Distance::Exact { value, .. } => Some(*value),
            Distance::Indistinguishable => None,
        }
    }
}

pub fn metric_distance(x: &SymbolicPrefix, y: &SymbolicPrefix) -> Result<Distance> {
    same_alphabet(x, y)?;
    let first = x.symbols().iter().zip(y.symbols()).position(|(a, b)| a != b);
    Ok(match first {
        Some(i) => Distance::Exact { index: i + 1, value: (-((i + 1) as f64)).exp() },
        None => Distance::Indistinguishable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    #[test]
    fn concat_with_empty() {
        assert_eq!(Word::empty(2).concat(&w("01")).unwrap(), w("01"));
        assert_eq!(w("01").concat(&w("10")).unwrap(), w("0110"));
        assert_eq!(Word::empty(2).concat(&Word::empty(2)).unwrap(), Word::empty(2));
        assert!(matches!(w("0").concat(&Word::parse(3, "2").unwrap()), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn prefix_suffix() {
        assert_eq!(w("0110").prefix(2).unwrap(), w("01"));
        assert_eq!(w("0110").suffix(3).unwrap(), w("110"));
        assert_eq!(w("0110").prefix(4).unwrap(), w("0110"));
        assert!(w("0110").prefix(0).is_err());
        assert!(w("0110").suffix(5).is_err());
    }

    #[test]
    fn occurrences() {
        assert_eq!(subword_occurrences(&w("01"), &w("0101")).unwrap(), vec![1, 3]);
        assert!(subword_occurrences(&w("11"), &w("0101")).unwrap().is_empty());
        assert_eq!(subword_occurrences(&w("010"), &w("01010")).unwrap(), vec![1, 3]);
    }

    #[test]
    fn metric_examples() {
        let d = metric_distance(&w("0"), &w("1")).unwrap();
        assert_eq!(d, Distance::Exact { index: 1, value: (-1f64).exp() });
        let d = metric_distance(&w("011"), &w("010")).unwrap();
        assert_eq!(d.value(), Some((-3f64).exp()));
        assert_eq!(metric_distance(&w("01"), &w("01")).unwrap(), Distance::Indistinguishable);
    }

    #[test]
    fn text_format() {
        let big = Word::parse(12, "0,11,3").unwrap();
        assert_eq!(big.to_string(), "0,11,3");
        assert_eq!(Word::parse(2, "eps").unwrap(), Word::empty(2));
        assert_eq!(Word::empty(2).to_cli_string(), "eps");
        assert!(Word::parse(2, "012").is_err());
    }

    #[test]
    fn unbordered() {
        assert!(is_unbordered(&[0, 0, 1]));
        assert!(!is_unbordered(&[0, 1, 0]));
        assert!(!is_unbordered(&[0, 0]));
    }
}
