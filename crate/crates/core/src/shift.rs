//! Subshift models as deterministic follower automata: full shifts, shifts of
//! finite type, S-gap shifts, coded shifts and interval codings.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::budget::{self, Meter};
use crate::error::{Error, Result};
use crate::interval::{AlphaBeta, ExactInterval};
use crate::word::Word;

/// Gap set `S`: a finite set, optionally together with `{s : s >= min}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GapSet {
    pub finite: BTreeSet<u32>,
    pub min: Option<u32>,
}

impl GapSet {
    pub fn finite(items: impl IntoIterator<Item = u32>) -> Self {
        GapSet { finite: items.into_iter().collect(), min: None }
    }

    pub fn at_least(min: u32) -> Self {
        GapSet { finite: BTreeSet::new(), min: Some(min) }
    }

    pub fn contains(&self, s: u32) -> bool {
        self.min.is_some_and(|m| s >= m) || self.finite.contains(&s)
    }

    /// Some `s` in `S` with `s >= r`.
    pub fn has_at_least(&self, r: u32) -> bool {
        self.min.is_some() || self.finite.range(r..).next().is_some()
    }

    fn is_empty(&self) -> bool {
        self.min.is_none() && self.finite.is_empty()
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    Full,
    Sft { forbidden: Vec<Word> },
    SGap(GapSet),
    Coded { generators: Vec<Word> },
    Interval(AlphaBeta),
}

/// Follower state after reading a word; two words with equal state have
/// equal follower sets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Unit,
    /// Aho-Corasick node.
    Node(u32),
    /// Leading run of zeros, no 1 seen yet.
    Lead(u32),
    /// Zeros read since the last 1.
    After(u32),
    /// Positions `(generator, next index)` consistent with the word.
    Set(Vec<(u16, u16)>),
    /// Image of the cylinder under the iterate.
    Image(ExactInterval),
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Unit => write!(f, "*"),
            State::Node(n) => write!(f, "q{n}"),
            State::Lead(r) => write!(f, "lead{r}"),
            State::After(r) => write!(f, "gap{r}"),
            State::Set(s) => {
                let parts: Vec<String> = s.iter().map(|(g, p)| format!("g{g}@{p}")).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
            State::Image(iv) => {
                let (a, b) = iv.to_f64();
                write!(f, "{iv} ~ [{a:.6}, {b:.6})")
            }
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone)]
struct Automaton {
    // goto[node * m + sym]
    goto: Vec<u32>,
    dead: Vec<bool>,
    m: usize,
}

impl Automaton {
    fn build(m: u16, forbidden: &[Word]) -> Self {
        let m = m as usize;
        let mut children: Vec<Vec<Option<u32>>> = vec![vec![None; m]];
        let mut dead = vec![false];
        for w in forbidden {
            let mut cur = 0usize;
            for &s in w.symbols() {
                cur = match children[cur][s as usize] {
                    Some(c) => c as usize,
                    None => {
                        children.push(vec![None; m]);
                        dead.push(false);
                        let id = children.len() - 1;
                        children[cur][s as usize] = Some(id as u32);
                        id
                    }
                };
            }
            dead[cur] = true;
        }
        let n = children.len();
        let mut goto = vec![0u32; n * m];
        let mut fail = vec![0usize; n];
        let mut queue = VecDeque::new();
        for s in 0..m {
            match children[0][s] {
                Some(c) => {
                    goto[s] = c;
                    queue.push_back(c as usize);
                }
                None => goto[s] = 0,
            }
        }
        while let Some(u) = queue.pop_front() {
            dead[u] = dead[u] || dead[fail[u]];
            for s in 0..m {
                match children[u][s] {
                    Some(c) => {
                        let c = c as usize;
                        fail[c] = goto[fail[u] * m + s] as usize;
                        goto[u * m + s] = c as u32;
                        queue.push_back(c);
                    }
                    None => goto[u * m + s] = goto[fail[u] * m + s],
                }
            }
        }
        Automaton { goto, dead, m }
    }

    fn step(&self, node: u32, s: u8) -> Option<u32> {
        let next = self.goto[node as usize * self.m + s as usize];
        (!self.dead[next as usize]).then_some(next)
    }
}

#[derive(Debug, Clone)]
pub struct SubshiftModel {
    m: u16,
    kind: ModelKind,
    automaton: Option<Automaton>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LanguageSlice {
    pub n: usize,
    pub words: Vec<Word>,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    /// `(n, log(#L_n)/n)`
    pub points: Vec<(usize, f64)>,
    pub estimate: f64,
}

impl SubshiftModel {
    pub fn full(m: u16) -> Result<Self> {
        Word::new(m, vec![])?;
        Ok(SubshiftModel { m, kind: ModelKind::Full, automaton: None })
    }

    pub fn sft(m: u16, forbidden: Vec<Word>) -> Result<Self> {
        Word::new(m, vec![])?;
        for w in &forbidden {
            if w.is_empty() {
                return Err(Error::domain("forbidden words must be non-empty"));
            }
            if w.alphabet_size() != m {
                return Err(Error::AlphabetMismatch { left: w.alphabet_size(), right: m });
            }
        }
        let automaton = Some(Automaton::build(m, &forbidden));
        Ok(SubshiftModel { m, kind: ModelKind::Sft { forbidden }, automaton })
    }

    pub fn sgap(s: GapSet) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::domain("gap set S must be non-empty"));
        }
        Ok(SubshiftModel { m: 2, kind: ModelKind::SGap(s), automaton: None })
    }

    pub fn coded(m: u16, generators: Vec<Word>) -> Result<Self> {
        Word::new(m, vec![])?;
        if generators.is_empty() {
            return Err(Error::domain("need at least one generator"));
        }
        for g in &generators {
            if g.is_empty() {
                return Err(Error::domain("generators must be non-empty"));
            }
            if g.alphabet_size() != m {
                return Err(Error::AlphabetMismatch { left: g.alphabet_size(), right: m });
            }
            if g.len() > u16::MAX as usize {
                return Err(Error::domain("generator too long"));
            }
        }
        let mut generators = generators;
        generators.sort();
        generators.dedup();
        Ok(SubshiftModel { m, kind: ModelKind::Coded { generators }, automaton: None })
    }

    pub fn interval(map: AlphaBeta) -> Self {
        SubshiftModel { m: map.branches(), kind: ModelKind::Interval(map), automaton: None }
    }

    pub fn alphabet_size(&self) -> u16 {
        self.m
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn start_state(&self) -> State {
        match &self.kind {
            ModelKind::Full => State::Unit,
            ModelKind::Sft { .. } => State::Node(0),
            ModelKind::SGap(_) => State::Lead(0),
            ModelKind::Coded { generators } => {
                let mut all = Vec::new();
                for (g, w) in generators.iter().enumerate() {
                    for p in 0..w.len() {
                        all.push((g as u16, p as u16));
                    }
                }
                State::Set(all)
            }
            ModelKind::Interval(_) => State::Image(ExactInterval::unit()),
        }
    }

    /// Follower transition; `None` when appending `s` leaves the language.
    pub fn step(&self, state: &State, s: u8) -> Option<State> {
        if u16::from(s) >= self.m {
            return None;
        }
        match (&self.kind, state) {
            (ModelKind::Full, State::Unit) => Some(State::Unit),
            (ModelKind::Sft { .. }, State::Node(n)) => self.automaton.as_ref()?.step(*n, s).map(State::Node),
            (ModelKind::SGap(set), State::Lead(r)) => {
                if s == 1 {
                    return Some(State::After(0));
                }
                if !set.has_at_least(r + 1) {
                    return None;
                }
                // with infinite S every leading run is extendable
                Some(State::Lead(if set.min.is_some() { 1 } else { r + 1 }))
            }
            (ModelKind::SGap(set), State::After(r)) => {
                if s == 1 {
                    return set.contains(*r).then_some(State::After(0));
                }
                if !set.has_at_least(r + 1) {
                    return None;
                }
                let next = match set.min {
                    Some(min) => (r + 1).min(min),
                    None => r + 1,
                };
                Some(State::After(next))
            }
            (ModelKind::Coded { generators }, State::Set(pos)) => {
                let mut next = Vec::new();
                let mut wrapped = false;
                for &(g, p) in pos {
                    let w = generators[g as usize].symbols();
                    if w[p as usize] != s {
                        continue;
                    }
                    if p as usize + 1 == w.len() {
                        wrapped = true;
                    } else {
                        next.push((g, p + 1));
                    }
                }
                if wrapped {
                    next.extend((0..generators.len()).map(|g| (g as u16, 0)));
                }
                next.sort_unstable();
                next.dedup();
                (!next.is_empty()).then_some(State::Set(next))
            }
            (ModelKind::Interval(map), State::Image(iv)) => map.follow(iv, s).map(State::Image),
            _ => None,
        }
    }

    pub fn read(&self, state: &State, w: &[u8]) -> Option<State> {
        let mut cur = state.clone();
        for &s in w {
            cur = self.step(&cur, s)?;
        }
        Some(cur)
    }

    pub fn state_of(&self, w: &Word) -> Option<State> {
        self.read(&self.start_state(), w.symbols())
    }

    pub fn admits(&self, w: &Word) -> bool {
        w.alphabet_size() == self.m && self.state_of(w).is_some()
    }

    pub fn enumerate_language(&self, n: usize) -> Result<LanguageSlice> {
        self.enumerate_with_budget(n, budget::enumeration_budget())
    }

    pub fn enumerate_with_budget(&self, n: usize, budget: u64) -> Result<LanguageSlice> {
        let needed = (self.m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        budget::check(needed, budget)?;
        let mut words = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.dfs(&self.start_state(), n, &mut buf, &mut |w| words.push(w.to_vec()));
        let words: Vec<Word> = words.into_iter().map(|s| Word::new(self.m, s)).collect::<Result<_>>()?;
        let count = words.len();
        Ok(LanguageSlice { n, words, count })
    }

    /// Visit admissible extensions of `buf` by `left` symbols in lexicographic order.
    pub(crate) fn dfs(&self, state: &State, left: usize, buf: &mut Vec<u8>, visit: &mut dyn FnMut(&[u8])) {
        if left == 0 {
            visit(buf);
            return;
        }
        for s in 0..self.m {
            if let Some(next) = self.step(state, s as u8) {
                buf.push(s as u8);
                self.dfs(&next, left - 1, buf, visit);
                buf.pop();
            }
        }
    }

    /// Admissible word of length `len` chosen symbol by symbol, uniformly among
    /// the symbols that keep the word extendable.
    pub fn random_word(&self, rng: &mut impl rand::Rng, len: usize) -> Result<Word> {
        let mut state = self.start_state();
        let mut out = Vec::with_capacity(len);
        let mut options = Vec::with_capacity(self.m as usize);
        for _ in 0..len {
            options.clear();
            options.extend((0..self.m).filter_map(|s| self.step(&state, s as u8).map(|next| (s as u8, next))));
            if options.is_empty() {
                return Err(Error::domain(format!("no admissible continuation after {} symbols", out.len())));
            }
            let (s, next) = options.swap_remove(rng.random_range(0..options.len()));
            out.push(s);
            state = next;
        }
        Word::new(self.m, out)
    }

    /// `#L_k` for `k = 0..=n`, merging words with equal follower state.
    pub fn count_language(&self, n: usize) -> Result<Vec<u128>> {
        let mut meter = Meter::from_env();
        let mut layer: HashMap<State, u128> = HashMap::from([(self.start_state(), 1)]);
        let mut counts = vec![1u128];
        for _ in 0..n {
            let mut next: HashMap<State, u128> = HashMap::new();
            for (st, c) in &layer {
                meter.spend(u64::from(self.m))?;
                for s in 0..self.m {
                    if let Some(t) = self.step(st, s as u8) {
                        *next.entry(t).or_default() += c;
                    }
                }
            }
            counts.push(next.values().sum());
            layer = next;
        }
        Ok(counts)
    }

    pub fn entropy_estimate(&self, n_max: usize) -> Result<EntropyEstimate> {
        if n_max == 0 {
            return Err(Error::domain("n_max must be at least 1"));
        }
        let counts = self.count_language(n_max)?;
        let points: Vec<(usize, f64)> =
            (1..=n_max).map(|n| (n, (counts[n] as f64).ln() / n as f64)).collect();
        let estimate = points.last().unwrap().1;
        Ok(EntropyEstimate { points, estimate })
    }

    /// True when `w` is a concatenation of generators (coded models only).
    pub fn is_generator_concatenation(&self, w: &Word) -> bool {
        let ModelKind::Coded { generators } = &self.kind else {
            return false;
        };
        let s = w.symbols();
        let mut ok = vec![false; s.len() + 1];
        ok[0] = true;
        for i in 0..s.len() {
            if !ok[i] {
                continue;
            }
            for g in generators {
                if s[i..].starts_with(g.symbols()) {
                    ok[i + g.len()] = true;
                }
            }
        }
        ok[s.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    #[test]
    fn sft_examples() {
        let g = SubshiftModel::sft(2, vec![w("11")]).unwrap();
        assert!(g.admits(&w("0101")));
        assert!(!g.admits(&w("0110")));
        assert_eq!(g.enumerate_language(4).unwrap().count, 8);
        assert_eq!(g.enumerate_language(0).unwrap().words, vec![Word::empty(2)]);
    }

    #[test]
    fn sgap_examples() {
        let s = SubshiftModel::sgap(GapSet::finite([1, 2])).unwrap();
        assert!(s.admits(&w("10101001")));
        assert!(!s.admits(&w("100010")));
        assert!(s.admits(&w("0010")));
        assert!(!s.admits(&w("000")));
    }

    #[test]
    fn sgap_infinite_collapses_states() {
        let s = SubshiftModel::sgap(GapSet { finite: [1].into(), min: Some(3) }).unwrap();
        assert!(s.admits(&w("1010001000000001")));
        assert!(!s.admits(&w("1001")));
        let counts = s.count_language(30).unwrap();
        assert!(counts.windows(2).all(|c| c[1] >= c[0]));
    }

    #[test]
    fn coded_matches_concatenations() {
        let c = SubshiftModel::coded(2, vec![w("10"), w("100")]).unwrap();
        let s = SubshiftModel::sgap(GapSet::finite([1, 2])).unwrap();
        for n in 0..=10 {
            assert_eq!(c.enumerate_language(n).unwrap().words, s.enumerate_language(n).unwrap().words);
        }
        assert!(c.is_generator_concatenation(&w("10010")));
        assert!(!c.is_generator_concatenation(&w("1001")));
    }

    #[test]
    fn budget_error() {
        let f = SubshiftModel::full(2).unwrap();
        assert!(f.enumerate_with_budget(40, 1000).unwrap_err().is_budget());
    }

    #[test]
    fn entropy_full() {
        let f = SubshiftModel::full(2).unwrap();
        assert_eq!(f.entropy_estimate(10).unwrap().estimate, 2f64.ln());
    }

    #[test]
    fn interval_coding_golden() {
        let g = SubshiftModel::interval(AlphaBeta::parse("0", "phi").unwrap());
        assert!(!g.admits(&w("11")));
        assert!(g.admits(&w("1010")));
        assert_eq!(g.count_language(10).unwrap()[10], 144);
    }
}
