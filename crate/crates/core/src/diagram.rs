//! Markov diagram of a coding space. A vertex is a symbol together with the
//! follower state reached after it; for interval codings that state is the
//! exact image interval, so distinct vertices never merge by rounding.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::budget::{self, Meter};
use crate::error::{Error, Result};
use crate::shift::{ModelKind, State, SubshiftModel};
use crate::word::Word;

pub const DIAGRAM_SCHEMA: &str = "recur-diagram/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: usize,
    pub level: usize,
    pub symbol: u8,
    pub state: State,
}

/// Successor of a vertex; `id` is `None` when it lies beyond the built depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Succ {
    pub symbol: u8,
    pub state: State,
    pub id: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MarkovDiagram {
    model: SubshiftModel,
    vertices: Vec<Vertex>,
    index: HashMap<(u8, State), usize>,
    edges: Vec<Vec<(u8, usize)>>,
    built_to: usize,
}

impl MarkovDiagram {
    pub fn build(model: &SubshiftModel, n: usize) -> Result<Self> {
        let mut meter = Meter::from_env();
        let m = model.alphabet_size();
        let start = model.start_state();
        let mut vertices: Vec<Vertex> = Vec::new();
        let mut index = HashMap::new();
        let mut frontier: BTreeSet<(u8, State)> = (0..m)
            .filter_map(|j| model.step(&start, j as u8).map(|s| (j as u8, s)))
            .collect();
        for level in 0..=n {
            let first = vertices.len();
            for (symbol, state) in std::mem::take(&mut frontier) {
                let id = vertices.len();
                index.insert((symbol, state.clone()), id);
                vertices.push(Vertex { id, level, symbol, state });
            }
            meter.spend((vertices.len() - first) as u64 * u64::from(m))?;
            if level == n {
                break;
            }
            for v in &vertices[first..] {
                for s in 0..m {
                    if let Some(next) = model.step(&v.state, s as u8) {
                        let key = (s as u8, next);
                        if !index.contains_key(&key) {
                            frontier.insert(key);
                        }
                    }
                }
            }
            if frontier.is_empty() {
                break;
            }
        }
        let edges = vertices
            .iter()
            .map(|v| {
                (0..m)
                    .filter_map(|s| {
                        let next = model.step(&v.state, s as u8)?;
                        index.get(&(s as u8, next)).map(|&id| (s as u8, id))
                    })
                    .collect()
            })
            .collect();
        Ok(MarkovDiagram { model: model.clone(), vertices, index, edges, built_to: n })
    }

    pub fn model(&self) -> &SubshiftModel {
        &self.model
    }

    pub fn built_to(&self) -> usize {
        self.built_to
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `#D_n` for `n <= built_to`.
    pub fn level_size(&self, n: usize) -> usize {
        self.vertices.iter().filter(|v| v.level <= n).count()
    }

    pub fn lookup(&self, symbol: u8, state: &State) -> Option<usize> {
        self.index.get(&(symbol, state.clone())).copied()
    }

    /// Edges whose target lies inside the built depth.
    pub fn edges(&self, id: usize) -> &[(u8, usize)] {
        &self.edges[id]
    }

    pub fn successors(&self, id: usize) -> Result<Vec<Succ>> {
        let v = self.vertices.get(id).ok_or(Error::OutOfRange { index: id, len: self.len() })?;
        Ok(self.successors_of(&v.state))
    }

    fn successors_of(&self, state: &State) -> Vec<Succ> {
        (0..self.model.alphabet_size())
            .filter_map(|s| {
                let next = self.model.step(state, s as u8)?;
                let id = self.lookup(s as u8, &next);
                Some(Succ { symbol: s as u8, state: next, id })
            })
            .collect()
    }

    pub fn to_dump(&self) -> String {
        let mut out = format!("{DIAGRAM_SCHEMA}\n");
        let _ = writeln!(out, "# built_to {} vertices {}", self.built_to, self.len());
        for v in &self.vertices {
            let _ = writeln!(out, "vertex {} {} {} {}", v.id, v.level, v.symbol, v.state);
        }
        for (src, es) in self.edges.iter().enumerate() {
            for (s, dst) in es {
                let _ = writeln!(out, "edge {src} {s} {dst}");
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub n: usize,
    /// Chosen strongly connected component of the truncated graph (the finite core F).
    pub core: Vec<usize>,
    /// `C ∩ D_N`: the core closed under successors inside the truncation.
    pub component: Vec<usize>,
    pub spectral_radius: f64,
    /// Coded models glue at generator boundaries with gap 0.
    pub coded: bool,
    #[serde(skip)]
    in_c: Vec<bool>,
}

impl Decomposition {
    pub fn contains(&self, id: usize) -> bool {
        self.in_c.get(id).copied().unwrap_or(false)
    }
}

fn sccs(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    // iterative Tarjan
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on[w] = true;
                    call.push((w, 0));
                } else if on[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Perron root of the adjacency restricted to `comp`, via power iteration on `A + I`.
fn spectral_radius(comp: &[usize], adj: &[Vec<usize>]) -> f64 {
    let pos: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut x = vec![1.0 / comp.len() as f64; comp.len()];
    let mut rho = 0.0;
    for _ in 0..2000 {
        let mut y = x.clone();
        for (i, &v) in comp.iter().enumerate() {
            for w in &adj[v] {
                if let Some(&j) = pos.get(w) {
                    y[j] += x[i];
                }
            }
        }
        let norm: f64 = y.iter().sum();
        let next = norm - 1.0;
        for v in &mut y {
            *v /= norm;
        }
        x = y;
        if (next - rho).abs() < 1e-13 {
            rho = next;
            break;
        }
        rho = next;
    }
    rho
}

/// The SCC of largest spectral radius (ties: earliest level, then lowest id),
/// closed under successors inside `D_N`.
pub fn irreducible_component(d: &MarkovDiagram) -> Result<Decomposition> {
    let n = d.len();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| d.edges(v).iter().map(|&(_, w)| w).collect()).collect();
    let mut best: Option<(f64, usize, usize, Vec<usize>)> = None;
    for comp in sccs(n, &adj) {
        let nontrivial = comp.len() > 1 || adj[comp[0]].contains(&comp[0]);
        if !nontrivial {
            continue;
        }
        let rho = spectral_radius(&comp, &adj);
        let level = comp.iter().map(|&v| d.vertices[v].level).min().unwrap();
        let first = comp[0];
        let better = match &best {
            None => true,
            Some((r, l, f, _)) => {
                if (rho - r).abs() > 1e-9 {
                    rho > *r
                } else {
                    (level, first) < (*l, *f)
                }
            }
        };
        if better {
            best = Some((rho, level, first, comp));
        }
    }
    let (rho, _, _, core) =
        best.ok_or_else(|| Error::NotFound(format!("no non-trivial SCC at depth {}", d.built_to)))?;
    let mut in_c = vec![false; n];
    let mut queue: VecDeque<usize> = core.iter().copied().collect();
    for &v in &core {
        in_c[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !in_c[w] {
                in_c[w] = true;
                queue.push_back(w);
            }
        }
    }
    let component = (0..n).filter(|&v| in_c[v]).collect();
    let coded = matches!(d.model.kind(), ModelKind::Coded { .. });
    Ok(Decomposition { n: d.built_to, core, component, spectral_radius: rho, coded, in_c })
}

/// Minimal `t` such that every ordered pair in `C ∩ D_N` is joined by a path
/// of at least one and at most `t` edges. Coded models return 0.
pub fn gap_size(d: &MarkovDiagram, dec: &Decomposition) -> Result<usize> {
    if dec.coded {
        return Ok(0);
    }
    let mut worst = 0;
    for &src in &dec.component {
        let mut dist: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for &(_, w) in d.edges(src) {
            if dec.contains(w) && !dist.contains_key(&w) {
                dist.insert(w, 1);
                queue.push_back(w);
            }
        }
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            for &(_, w) in d.edges(v) {
                if dec.contains(w) && !dist.contains_key(&w) {
                    dist.insert(w, dv + 1);
                    queue.push_back(w);
                }
            }
        }
        for &dst in &dec.component {
            match dist.get(&dst) {
                Some(&k) => worst = worst.max(k),
                None => {
                    return Err(Error::NotFound(format!(
                        "no path from vertex {src} to vertex {dst} inside D_{}",
                        dec.n
                    )))
                }
            }
        }
    }
    Ok(worst)
}

/// Some path spelling `w` starts and ends in `C ∩ D_N`; the empty word is good.
pub fn in_good_set(d: &MarkovDiagram, dec: &Decomposition, w: &Word) -> bool {
    let syms = w.symbols();
    let Some((&first, rest)) = syms.split_first() else {
        return true;
    };
    if w.alphabet_size() != d.model.alphabet_size() {
        return false;
    }
    if dec.coded {
        return d.model.is_generator_concatenation(w);
    }
    let last = *syms.last().unwrap();
    dec.component.iter().any(|&v| {
        let vx = &d.vertices[v];
        if vx.symbol != first {
            return false;
        }
        match d.model.read(&vx.state, rest) {
            Some(end) => d.lookup(last, &end).is_some_and(|id| dec.contains(id)),
            None => false,
        }
    })
}

/// Shortest, then lexicographically least `w` with `|w| <= t` and `uwv` admissible.
pub fn connect(model: &SubshiftModel, u: &Word, v: &Word, t: usize) -> Result<Word> {
    let m = model.alphabet_size();
    if u.alphabet_size() != m || v.alphabet_size() != m {
        return Err(Error::AlphabetMismatch { left: u.alphabet_size(), right: m });
    }
    let su = model
        .state_of(u)
        .ok_or_else(|| Error::domain(format!("u = {} is not admissible", u.to_cli_string())))?;
    match connect_from(model, &su, v.symbols(), t) {
        Some(w) => Word::new(m, w),
        None => Err(Error::NotFound(format!(
            "no connector of length <= {t} between {} and {}",
            u.to_cli_string(),
            v.to_cli_string()
        ))),
    }
}

/// Same search as [`connect`], starting from the follower state of `u`.
pub(crate) fn connect_from(model: &SubshiftModel, su: &State, v: &[u8], t: usize) -> Option<Vec<u8>> {
    for len in 0..=t {
        let mut found = None;
        let mut buf = Vec::with_capacity(len);
        find_connector(model, su, len, v, &mut buf, &mut found);
        if found.is_some() {
            return found;
        }
    }
    None
}

fn find_connector(
    model: &SubshiftModel,
    state: &State,
    left: usize,
    v: &[u8],
    buf: &mut Vec<u8>,
    found: &mut Option<Vec<u8>>,
) {
    if found.is_some() {
        return;
    }
    if left == 0 {
        if model.read(state, v).is_some() {
            *found = Some(buf.clone());
        }
        return;
    }
    for s in 0..model.alphabet_size() {
        if let Some(next) = model.step(state, s as u8) {
            buf.push(s as u8);
            find_connector(model, &next, left - 1, v, buf, found);
            buf.pop();
            if found.is_some() {
                return;
            }
        }
    }
}

/// Number of distinct words spelled by length-`n` paths from the core `F`.
pub fn count_paths(d: &MarkovDiagram, dec: &Decomposition, n: usize) -> Result<u128> {
    if n == 0 {
        return Ok(1);
    }
    let mut meter = Meter::from_env();
    let m = d.model.alphabet_size();
    let mut total = 0u128;
    for j in 0..m {
        let start: Vec<State> = dec
            .core
            .iter()
            .map(|&v| &d.vertices[v])
            .filter(|v| v.symbol == j as u8)
            .map(|v| v.state.clone())
            .collect();
        if start.is_empty() {
            continue;
        }
        let mut layer: HashMap<Vec<State>, u128> = HashMap::from([(canonical(start), 1)]);
        for _ in 1..n {
            let mut next: HashMap<Vec<State>, u128> = HashMap::new();
            for (set, c) in &layer {
                meter.spend(set.len() as u64 * u64::from(m))?;
                for s in 0..m {
                    let image: Vec<State> = set.iter().filter_map(|st| d.model.step(st, s as u8)).collect();
                    if !image.is_empty() {
                        *next.entry(canonical(image)).or_default() += c;
                    }
                }
            }
            layer = next;
        }
        total += layer.values().sum::<u128>();
    }
    Ok(total)
}

fn canonical(mut v: Vec<State>) -> Vec<State> {
    v.sort();
    v.dedup();
    v
}

/// `#L_n` by direct count alongside `count_paths`; `agree` is false when the
/// truncation misses words.
#[derive(Debug, Clone, Serialize)]
pub struct PathCheck {
    pub n: usize,
    pub paths: u128,
    pub direct: u128,
    pub agree: bool,
}

pub fn count_paths_checked(d: &MarkovDiagram, dec: &Decomposition, n: usize) -> Result<PathCheck> {
    let paths = count_paths(d, dec, n)?;
    let direct = d.model.count_language(n)?[n];
    Ok(PathCheck { n, paths, direct, agree: paths == direct })
}

/// Words of length `n` spelled by paths that enter `C` at level `N+1` and
/// never return to `D_N`.
pub fn suffix_part_count(d: &MarkovDiagram, dec: &Decomposition, n: usize) -> Result<u128> {
    if n == 0 {
        return Ok(1);
    }
    let mut meter = Meter::from_env();
    let m = d.model.alphabet_size();
    let inside = |s: u8, st: &State| d.lookup(s, st).is_some_and(|id| d.vertices[id].level <= dec.n);
    let mut starts: BTreeSet<(u8, State)> = BTreeSet::new();
    for &v in &dec.component {
        for succ in d.successors_of(&d.vertices[v].state) {
            if !inside(succ.symbol, &succ.state) {
                starts.insert((succ.symbol, succ.state));
            }
        }
    }
    let mut by_symbol: HashMap<u8, Vec<State>> = HashMap::new();
    for (s, st) in starts {
        by_symbol.entry(s).or_default().push(st);
    }
    let mut total = 0u128;
    for (_, states) in by_symbol {
        let mut layer: HashMap<Vec<State>, u128> = HashMap::from([(canonical(states), 1)]);
        for _ in 1..n {
            let mut next: HashMap<Vec<State>, u128> = HashMap::new();
            for (set, c) in &layer {
                meter.spend(set.len() as u64 * u64::from(m))?;
                for s in 0..m {
                    let image: Vec<State> = set
                        .iter()
                        .filter_map(|st| d.model.step(st, s as u8))
                        .filter(|st| !inside(s as u8, st))
                        .collect();
                    if !image.is_empty() {
                        *next.entry(canonical(image)).or_default() += c;
                    }
                }
            }
            layer = next;
        }
        total += layer.values().sum::<u128>();
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct WPrimeReport {
    pub l: usize,
    /// Smallest gap size that passed, if any.
    pub t: Option<usize>,
    /// `(t, passed)` for every gap size tried.
    pub tried: Vec<(usize, bool)>,
    pub counterexample: Option<(Word, Word)>,
    pub good_blocks: usize,
}

impl WPrimeReport {
    pub fn passed(&self) -> bool {
        self.t.is_some()
    }
}

fn words_up_to(m: u16, t: usize) -> Result<Vec<Vec<u8>>> {
    let needed: u128 = (0..=t as u32).map(|k| (m as u128).saturating_pow(k)).sum();
    budget::check(needed, budget::enumeration_budget())?;
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..t {
        let mut next = Vec::new();
        for w in &layer {
            for s in 0..m {
                let mut x: Vec<u8> = w.clone();
                x.push(s as u8);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

/// Exhaustive finite check of the gluing property over assemblies of at most
/// three good blocks of length `<= l` per side, for `t = 0..=t_cap`.
pub fn verify_w_prime(d: &MarkovDiagram, dec: &Decomposition, l: usize, t_cap: usize) -> Result<WPrimeReport> {
    let model = &d.model;
    let m = model.alphabet_size();
    let mut blocks: Vec<Vec<u8>> = vec![vec![]];
    for len in 1..=l {
        for w in model.enumerate_language(len)?.words {
            if in_good_set(d, dec, &w) {
                blocks.push(w.into_symbols());
            }
        }
    }
    let mut tried = Vec::new();
    let mut counterexample = None;
    for t in 0..=t_cap {
        let gaps = words_up_to(m, t)?;
        match check_gap(model, &blocks, &gaps)? {
            None => {
                tried.push((t, true));
                return Ok(WPrimeReport { l, t: Some(t), tried, counterexample: None, good_blocks: blocks.len() });
            }
            Some((u, v)) => {
                tried.push((t, false));
                counterexample = Some((Word::new(m, u)?, Word::new(m, v)?));
            }
        }
    }
    Ok(WPrimeReport { l, t: None, tried, counterexample, good_blocks: blocks.len() })
}

fn check_gap(model: &SubshiftModel, blocks: &[Vec<u8>], gaps: &[Vec<u8>]) -> Result<Option<(Vec<u8>, Vec<u8>)>> {
    let mut meter = Meter::from_env();
    let start = model.start_state();
    // u-side: final state of every assembly, with one witness each
    let mut u_states: HashMap<State, Vec<u8>> = HashMap::new();
    let mut stage: HashMap<State, Vec<u8>> = HashMap::new();
    for b in blocks {
        if let Some(st) = model.read(&start, b) {
            stage.entry(st).or_insert_with(|| b.clone());
        }
    }
    for round in 0..3 {
        for (st, w) in &stage {
            u_states.entry(st.clone()).or_insert_with(|| w.clone());
        }
        if round == 2 {
            break;
        }
        let mut next: HashMap<State, Vec<u8>> = HashMap::new();
        for (st, w) in &stage {
            meter.spend((gaps.len() * blocks.len()) as u64)?;
            for g in gaps {
                let Some(sg) = model.read(st, g) else { continue };
                for b in blocks {
                    if let Some(sb) = model.read(&sg, b) {
                        next.entry(sb).or_insert_with(|| [w.as_slice(), g, b].concat());
                    }
                }
            }
        }
        stage = next;
    }
    let mut su: Vec<(State, Vec<u8>)> = u_states.into_iter().collect();
    su.sort();
    // v-side key: state reached from every (u-state, connector) pair, plus v's own state
    type Key = (Vec<Option<State>>, State);
    let initial: Vec<Option<State>> =
        su.iter().flat_map(|(s, _)| gaps.iter().map(move |w| model.read(s, w))).collect();
    let extend = |key: &Key, w: &[u8]| -> Option<Key> {
        let own = model.read(&key.1, w)?;
        let vec = key.0.iter().map(|s| s.as_ref().and_then(|s| model.read(s, w))).collect();
        Some((vec, own))
    };
    let glued = |key: &Key| -> Option<usize> {
        (0..su.len()).find(|&i| key.0[i * gaps.len()..(i + 1) * gaps.len()].iter().all(Option::is_none))
    };
    let base: Key = (initial, start.clone());
    let mut stage: HashMap<Key, Vec<u8>> = HashMap::new();
    for b in blocks {
        if let Some(k) = extend(&base, b) {
            stage.entry(k).or_insert_with(|| b.clone());
        }
    }
    let mut seen: HashSet<Key> = HashSet::new();
    for round in 0..3 {
        let mut keys: Vec<(&Key, &Vec<u8>)> = stage.iter().collect();
        keys.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.1.cmp(b.1)));
        for (key, v) in keys {
            if let Some(i) = glued(key) {
                return Ok(Some((su[i].1.clone(), v.clone())));
            }
        }
        if round == 2 {
            break;
        }
        let mut next: HashMap<Key, Vec<u8>> = HashMap::new();
        for (key, v) in &stage {
            if !seen.insert(key.clone()) {
                continue;
            }
            meter.spend((gaps.len() * blocks.len()) as u64)?;
            for g in gaps {
                let Some(kg) = extend(key, g) else { continue };
                for b in blocks {
                    if let Some(kb) = extend(&kg, b) {
                        next.entry(kb).or_insert_with(|| [v.as_slice(), g, b].concat());
                    }
                }
            }
        }
        stage = next;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::AlphaBeta;

    fn w(m: u16, s: &str) -> Word {
        Word::parse(m, s).unwrap()
    }

    fn golden() -> SubshiftModel {
        SubshiftModel::sft(2, vec![w(2, "11")]).unwrap()
    }

    #[test]
    fn full_shift_diagram() {
        let f = SubshiftModel::full(2).unwrap();
        let d = MarkovDiagram::build(&f, 5).unwrap();
        assert_eq!(d.len(), 2);
        let dec = irreducible_component(&d).unwrap();
        assert_eq!(dec.core, vec![0, 1]);
        assert_eq!(gap_size(&d, &dec).unwrap(), 1);
        assert_eq!(count_paths(&d, &dec, 10).unwrap(), 1024);
        assert_eq!(connect(&f, &w(2, "01"), &w(2, "10"), 0).unwrap(), Word::empty(2));
    }

    #[test]
    fn golden_mean_diagram() {
        let g = golden();
        let d = MarkovDiagram::build(&g, 4).unwrap();
        assert_eq!(d.len(), 2);
        let one = d.vertices().iter().find(|v| v.symbol == 1).unwrap().id;
        let succ = d.successors(one).unwrap();
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].symbol, 0);
        let dec = irreducible_component(&d).unwrap();
        assert_eq!(dec.component.len(), 2);
        assert_eq!(gap_size(&d, &dec).unwrap(), 2);
        assert_eq!(count_paths(&d, &dec, 10).unwrap(), 144);
        assert!(in_good_set(&d, &dec, &w(2, "10")));
        assert_eq!(connect(&g, &w(2, "01"), &w(2, "10"), 2).unwrap(), w(2, "0"));
        assert_eq!(connect(&g, &w(2, "10"), &w(2, "01"), 2).unwrap(), Word::empty(2));
    }

    #[test]
    fn w_prime_small() {
        let f = SubshiftModel::full(2).unwrap();
        let d = MarkovDiagram::build(&f, 2).unwrap();
        let dec = irreducible_component(&d).unwrap();
        assert_eq!(verify_w_prime(&d, &dec, 4, 2).unwrap().t, Some(0));
        let g = golden();
        let d = MarkovDiagram::build(&g, 2).unwrap();
        let dec = irreducible_component(&d).unwrap();
        assert_eq!(verify_w_prime(&d, &dec, 4, 2).unwrap().t, Some(1));
    }

    #[test]
    fn golden_beta_shift_is_finite() {
        let g = SubshiftModel::interval(AlphaBeta::parse("0", "phi").unwrap());
        let d = MarkovDiagram::build(&g, 6).unwrap();
        assert_eq!(d.len(), 2);
        let dec = irreducible_component(&d).unwrap();
        for n in 1..=12 {
            let c = count_paths_checked(&d, &dec, n).unwrap();
            assert!(c.agree, "{c:?}");
        }
    }

    #[test]
    fn dump_has_schema() {
        let d = MarkovDiagram::build(&golden(), 2).unwrap();
        let text = d.to_dump();
        assert!(text.starts_with("recur-diagram/1\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("edge")).count(), 3);
    }
}
