//! Seed sets, the recurrence-point constructor and its ledger, the
//! continuation tree and dimension lower bounds.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::budget;
use crate::diagram::{self, Decomposition, MarkovDiagram};
use crate::error::{Error, Result};
use crate::exact::Quad;
use crate::recurrence::{self, ReturnTime};
use crate::schedule::{Ext, Schedule};
use crate::shift::{ModelKind, State, SubshiftModel};
use crate::word::{find_all, is_unbordered, Word};

pub const LEDGER_SCHEMA: &str = "recur-ledger/1";
pub const PREFIX_SCHEMA: &str = "recur-prefix/1";
/// Slack in the symbolic bound `log #Q_k / ((1 + 2 eps)(k + t))`.
pub const EPSILON: f64 = 0.01;
/// Larger trees are sampled instead of materialized.
pub const MATERIALIZE_CAP: u128 = 200_000;
/// How far `build_qk` scans upward when the requested `k` fails.
const K_SCAN: usize = 24;

#[derive(Debug, Clone, Serialize)]
pub struct SeedConfig {
    #[serde(skip)]
    pub model: SubshiftModel,
    pub k: usize,
    pub t: usize,
    /// Always empty: every good word of length `k` is a candidate.
    pub u_star: Word,
    /// Lexicographically ordered.
    pub q_k: Vec<Word>,
    pub v_star: Word,
    pub good_count: usize,
    pub pruned: usize,
    /// `(u, w, v)` triples inspected for the marker condition.
    pub marker_checks: u64,
    pub marker_exhaustive: bool,
    pub epsilon: f64,
    #[serde(skip)]
    index: HashMap<Vec<u8>, usize>,
}

/// Connector length for gluing words: one less than the diagram gap.
pub fn connector_length(d: &MarkovDiagram, dec: &Decomposition) -> Result<usize> {
    Ok(diagram::gap_size(d, dec)?.saturating_sub(1))
}

pub fn build_qk(d: &MarkovDiagram, dec: &Decomposition, k: usize, selection_budget: u64) -> Result<SeedConfig> {
    let t = connector_length(d, dec)?;
    if k <= 3 * t {
        return Err(Error::domain(format!("k = {k} must exceed 3t = {}", 3 * t)));
    }
    match try_build(d, dec, k, t, selection_budget)? {
        Ok(cfg) => Ok(cfg),
        Err(reason) => {
            let mut passing = None;
            for k2 in k + 1..=k + K_SCAN {
                match try_build(d, dec, k2, t, selection_budget) {
                    Ok(Ok(_)) => {
                        passing = Some(k2);
                        break;
                    }
                    Ok(Err(_)) => continue,
                    Err(_) => break,
                }
            }
            let hint = match passing {
                Some(k2) => format!("smallest passing k found: {k2}"),
                None => format!("no passing k up to {}", k + K_SCAN),
            };
            Err(Error::domain(format!("{reason} at k = {k}; {hint}")))
        }
    }
}

/// Convenience wrapper that builds the diagram and decomposition first.
pub fn build_for_model(model: &SubshiftModel, k: usize, depth: usize, selection_budget: u64) -> Result<SeedConfig> {
    let d = MarkovDiagram::build(model, depth)?;
    let dec = diagram::irreducible_component(&d)?;
    build_qk(&d, &dec, k, selection_budget)
}

type Attempt = std::result::Result<SeedConfig, String>;

fn try_build(d: &MarkovDiagram, dec: &Decomposition, k: usize, t: usize, selection_budget: u64) -> Result<Attempt> {
    let model = d.model();
    let m = model.alphabet_size();
    let lang = model.enumerate_with_budget(k, selection_budget)?;
    let good: Vec<Word> = lang.words.into_iter().filter(|w| diagram::in_good_set(d, dec, w)).collect();
    let Some(v_star) = good.iter().find(|w| is_unbordered(w.symbols())).cloned() else {
        return Ok(Err("no unbordered good word".into()));
    };
    let vs = v_star.symbols();
    let imax = (2 * k / 3 + 1).min(k);
    let keep = |v: &[u8]| {
        (1..=imax).all(|i| {
            let j = k - i + 1;
            v[k - j..] != vs[..j] && v[..j] != vs[k - j..]
        })
    };
    let q_k: Vec<Word> = good.iter().filter(|w| keep(w.symbols())).cloned().collect();
    if q_k.is_empty() {
        return Ok(Err("Q_k is empty after pruning".into()));
    }
    let index = q_k.iter().enumerate().map(|(i, w)| (w.symbols().to_vec(), i)).collect();
    let mut cfg = SeedConfig {
        model: model.clone(),
        k,
        t,
        u_star: Word::empty(m),
        pruned: good.len() - q_k.len(),
        good_count: good.len(),
        q_k,
        v_star,
        marker_checks: 0,
        marker_exhaustive: true,
        epsilon: EPSILON,
        index,
    };
    let (checks, exhaustive, bad) = marker_check(&cfg, selection_budget);
    cfg.marker_checks = checks;
    cfg.marker_exhaustive = exhaustive;
    if let Some((u, w, v)) = bad {
        return Ok(Err(format!(
            "v* = {} occurs in u w v with u = {}, w = {}, v = {}",
            cfg.v_star,
            u,
            w.to_cli_string(),
            v
        )));
    }
    Ok(Ok(cfg))
}

/// Search `u w v` (u, v in `Q_k`, `|w| <= t`, admissible) for `v*`. Falls back to
/// a fixed-seed sample of pairs when the full search exceeds `budget` triples.
fn marker_check(cfg: &SeedConfig, budget: u64) -> (u64, bool, Option<(Word, Word, Word)>) {
    let q = cfg.q_k.len() as u128;
    let m = cfg.model.alphabet_size() as u128;
    let per_pair: u128 = (0..=cfg.t as u32).map(|i| m.pow(i)).sum();
    let exhaustive = q * q * per_pair <= budget as u128;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..cfg.q_k.len()).flat_map(|i| (0..cfg.q_k.len()).map(move |j| (i, j))).collect()
    } else {
        let n = (budget as u128 / per_pair).max(1) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..n).map(|_| (rng.random_range(0..cfg.q_k.len()), rng.random_range(0..cfg.q_k.len()))).collect()
    };
    let model = &cfg.model;
    let vs = cfg.v_star.symbols();
    let mut checks = 0u64;
    for (i, j) in pairs {
        let u = &cfg.q_k[i];
        let v = &cfg.q_k[j];
        let Some(su) = model.state_of(u) else { continue };
        let mut bad = None;
        let mut buf = Vec::new();
        for len in 0..=cfg.t {
            model.dfs(&su, len, &mut buf, &mut |w| {
                if bad.is_some() {
                    return;
                }
                let Some(sw) = model.read(&su, w) else { return };
                if model.read(&sw, v.symbols()).is_none() {
                    return;
                }
                checks += 1;
                let mut s = u.symbols().to_vec();
                s.extend_from_slice(w);
                s.extend_from_slice(v.symbols());
                if !find_all(vs, &s).is_empty() {
                    bad = Some(w.to_vec());
                }
            });
        }
        if let Some(w) = bad {
            let w = Word::new(u.alphabet_size(), w).expect("connector symbols come from the model");
            return (checks, exhaustive, Some((u.clone(), w, v.clone())));
        }
    }
    (checks, exhaustive, None)
}

impl SeedConfig {
    pub fn alphabet_size(&self) -> u16 {
        self.model.alphabet_size()
    }

    pub fn q_index(&self, w: &[u8]) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// `log #Q_k / ((1 + 2 eps)(k + t))`
    pub fn symbolic_bound(&self) -> f64 {
        (self.q_k.len() as f64).ln() / ((1.0 + 2.0 * self.epsilon) * (self.k + self.t) as f64)
    }
}

/// Indices into `Q_k` for `v^1, v^2, ...`, drawn from one seeded stream.
pub struct BlockStream {
    rng: ChaCha8Rng,
    n: usize,
}

impl BlockStream {
    pub fn new(seed: u64, n: usize) -> Self {
        BlockStream { rng: ChaCha8Rng::seed_from_u64(seed), n }
    }

    pub fn next_index(&mut self) -> usize {
        self.rng.random_range(0..self.n)
    }
}

/// First `len` symbols of the seed point `v* w^1 v^1 w^2 v^2 ...`.
pub fn seed_prefix(cfg: &SeedConfig, seed: u64, len: usize) -> Result<Word> {
    let model = &cfg.model;
    let mut stream = BlockStream::new(seed, cfg.q_k.len());
    let mut x = cfg.v_star.symbols().to_vec();
    let mut state = start_after(model, &x)?;
    while x.len() < len {
        let v = cfg.q_k[stream.next_index()].symbols();
        let w = glue(model, &state, &x, v, cfg.t)?;
        state = model.read(&state, &w).and_then(|s| model.read(&s, v)).expect("connector was checked");
        x.extend_from_slice(&w);
        x.extend_from_slice(v);
    }
    x.truncate(len);
    Word::new(cfg.alphabet_size(), x)
}

fn start_after(model: &SubshiftModel, w: &[u8]) -> Result<State> {
    model
        .read(&model.start_state(), w)
        .ok_or_else(|| Error::domain("marker word is not admissible"))
}

fn glue(model: &SubshiftModel, state: &State, left: &[u8], v: &[u8], t: usize) -> Result<Vec<u8>> {
    diagram::connect_from(model, state, v, t).ok_or_else(|| {
        let tail = &left[left.len().saturating_sub(v.len())..];
        Error::NotFound(format!(
            "no connector of length <= {t} after ...{} before {}",
            show(model.alphabet_size(), tail),
            show(model.alphabet_size(), v)
        ))
    })
}

fn show(m: u16, s: &[u8]) -> String {
    Word::new(m, s.to_vec()).map(|w| w.to_cli_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PieceKind {
    Marker,
    /// `v^q`, stored as an index into `Q_k`.
    Block { q: usize, index: usize },
    Connector,
    /// Copy of the prefix of length `len`.
    Theta { p: usize },
    Lambda { p: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Piece {
    /// 1-based start position in the prefix.
    pub start: usize,
    pub len: usize,
    pub kind: PieceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Insertion {
    pub p: usize,
    pub original_p: usize,
    pub m_p: usize,
    pub ell: f64,
    /// `gamma_p ell_p`, the predicted `log tau`.
    pub gamma_ell: f64,
    pub theta_len: usize,
    /// `|y_{M_p}|` before the insertion.
    pub y_len: usize,
    pub w1: Word,
    pub w2: Word,
    pub w3: Word,
    pub lambda: Word,
    /// Longest `i >= |theta|` with `(theta w2 lambda)[..i]` a prefix of `y_{M_p}`.
    pub s_p: usize,
}

impl Insertion {
    /// Return time predicted by the construction: `|y_{M_p} w^{p,1}|`.
    pub fn tau(&self) -> usize {
        self.y_len + self.w1.len()
    }

    pub fn odd(&self) -> bool {
        self.original_p % 2 == 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Checkpoint {
    pub p: usize,
    pub original_p: usize,
    pub n: usize,
    pub gamma_ell: f64,
    pub tau: usize,
    pub odd: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoranPoint {
    pub m: u16,
    pub k: usize,
    pub t: usize,
    pub seed: u64,
    pub target: usize,
    pub a: Ext,
    pub b: Ext,
    pub index_shift: usize,
    pub q_count: usize,
    pub epsilon: f64,
    pub v_star: Word,
    #[serde(skip)]
    pub prefix: Word,
    /// Number of seed blocks consumed.
    pub q: usize,
    pub pieces: Vec<Piece>,
    pub events: Vec<Insertion>,
    #[serde(skip)]
    q_k: Vec<Word>,
}

/// Incremental state of `y_q` and of the seed prefix it is built from.
#[derive(Clone)]
struct Builder<'a> {
    cfg: &'a SeedConfig,
    sched: &'a Schedule,
    y: Vec<u8>,
    y_state: State,
    x_len: usize,
    x_state: State,
    q: usize,
    next_p: usize,
    /// Set when `q = M_p`; the insertion happens on the next step.
    pending: Option<usize>,
    record: bool,
    pieces: Vec<Piece>,
    events: Vec<Insertion>,
    last_case2: bool,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a SeedConfig, sched: &'a Schedule, record: bool) -> Result<Self> {
        let y = cfg.v_star.symbols().to_vec();
        let state = start_after(&cfg.model, &y)?;
        let pieces = if record { vec![Piece { start: 1, len: y.len(), kind: PieceKind::Marker }] } else { Vec::new() };
        let mut b = Builder {
            cfg,
            sched,
            x_len: y.len(),
            y,
            x_state: state.clone(),
            y_state: state,
            q: 0,
            next_p: 1,
            pending: None,
            record,
            pieces,
            events: Vec::new(),
            last_case2: false,
        };
        b.mark()?;
        Ok(b)
    }

    /// `M_p` is the least `q` with `|v* w^1 v^1 ... w^q v^q| >= e^{gamma_p ell_p}`.
    fn mark(&mut self) -> Result<()> {
        if self.next_p > self.sched.len() {
            return Ok(());
        }
        let lx = (self.x_len as f64).ln();
        if lx >= self.sched.gamma_ell(self.next_p) {
            if self.q == 0 {
                return Err(Error::domain("e^(gamma_1 ell_1) does not exceed |v*|"));
            }
            self.pending = Some(self.next_p);
            self.next_p += 1;
            if self.next_p <= self.sched.len() && lx >= self.sched.gamma_ell(self.next_p) {
                return Err(Error::domain(format!("M_{} = M_{} = {}: schedule gaps too small", self.next_p - 1, self.next_p, self.q)));
            }
        }
        Ok(())
    }

    fn schedule_exhausted(&self) -> bool {
        self.next_p > self.sched.len() && self.pending.is_none()
    }

    fn push(&mut self, kind: PieceKind, s: &[u8]) -> Result<()> {
        let model = &self.cfg.model;
        self.y_state = model
            .read(&self.y_state, s)
            .ok_or_else(|| Error::domain(format!("piece {:?} is not admissible here", kind)))?;
        if self.record && !(s.is_empty() && kind == PieceKind::Connector) {
            self.pieces.push(Piece { start: self.y.len() + 1, len: s.len(), kind });
        }
        self.y.extend_from_slice(s);
        Ok(())
    }

    fn connector(&self, v: &[u8]) -> Result<Vec<u8>> {
        glue(&self.cfg.model, &self.y_state, &self.y, v, self.cfg.t)
    }

    fn step(&mut self, index: usize) -> Result<()> {
        let cfg = self.cfg;
        let k = cfg.k;
        let t = cfg.t;
        let v = cfg.q_k[index].symbols();
        self.last_case2 = self.pending.is_some();
        if let Some(p) = self.pending.take() {
            let ell = self.sched.ell(p);
            // ell comes back from log space, so absorb the last-ulp error before ceil
            let first = (ell * (1.0 - 1e-12)).ceil() as usize;
            let lo = first.max(k);
            let theta_len = (lo..(first + k + t).min(self.y.len() + 1))
                .find(|&l| cfg.q_index(&self.y[l - k..l]).is_some())
                .ok_or_else(|| {
                    Error::domain(format!("no Q_k block ends in [ell_{p}, ell_{p} + k + t) = [{ell:.3}, {:.3})", ell + (k + t) as f64))
                })?;
            // lambda must not continue theta w as y does, for any |w| <= t
            let bad: HashSet<&[u8]> = (0..=t)
                .filter(|len| theta_len + len + k <= self.y.len())
                .map(|len| &self.y[theta_len + len..theta_len + len + k])
                .collect();
            let li = (0..cfg.q_k.len())
                .find(|&i| !bad.contains(cfg.q_k[i].symbols()))
                .ok_or_else(|| Error::domain(format!("no admissible lambda for p = {p}")))?;
            let lambda = cfg.q_k[li].symbols();
            let theta = self.y[..theta_len].to_vec();
            let y_len = self.y.len();
            let w1 = self.connector(&theta)?;
            self.push(PieceKind::Connector, &w1)?;
            self.push(PieceKind::Theta { p }, &theta)?;
            let w2 = self.connector(lambda)?;
            self.push(PieceKind::Connector, &w2)?;
            self.push(PieceKind::Lambda { p, index: li }, lambda)?;
            let w3 = self.connector(v)?;
            self.push(PieceKind::Connector, &w3)?;
            let mut tail = w2.clone();
            tail.extend_from_slice(lambda);
            let common = tail.iter().zip(&self.y[theta_len..y_len]).take_while(|(a, b)| a == b).count();
            if self.record {
                let m = cfg.alphabet_size();
                self.events.push(Insertion {
                    p,
                    original_p: self.sched.original_index(p),
                    m_p: self.q,
                    ell,
                    gamma_ell: self.sched.gamma_ell(p),
                    theta_len,
                    y_len,
                    w1: Word::new(m, w1)?,
                    w2: Word::new(m, w2)?,
                    w3: Word::new(m, w3)?,
                    lambda: cfg.q_k[li].clone(),
                    s_p: theta_len + common,
                });
            }
        } else {
            let w = self.connector(v)?;
            self.push(PieceKind::Connector, &w)?;
        }
        self.push(PieceKind::Block { q: self.q + 1, index }, v)?;
        self.q += 1;
        let wx = glue(&cfg.model, &self.x_state, &[], v, t)?;
        self.x_state = cfg
            .model
            .read(&self.x_state, &wx)
            .and_then(|s| cfg.model.read(&s, v))
            .expect("connector was checked");
        self.x_len += wx.len() + k;
        self.mark()
    }
}

/// Guards needed for `M_p` and `theta^p` to be well defined, checked for
/// every `p` whose checkpoint could fall below `limit` symbols.
pub fn check_guards(cfg: &SeedConfig, sched: &Schedule, limit: usize) -> Result<()> {
    let kt = (cfg.k + cfg.t) as f64;
    let cap = (limit.max(2) as f64).ln() + 1.0;
    if sched.is_empty() {
        return Err(Error::domain("empty schedule"));
    }
    if sched.gamma_ell(1) < ((2 * cfg.k + cfg.t) as f64).ln() {
        return Err(Error::domain(format!("e^(gamma_1 ell_1) < 2k + t = {}", 2 * cfg.k + cfg.t)));
    }
    for p in 1..sched.len() {
        if sched.gamma_ell(p) > cap {
            break;
        }
        if sched.log_gap(p) < kt.ln() - 1e-12 {
            return Err(Error::domain(format!("ell_{} - ell_{p} < k + t = {kt}", p + 1)));
        }
        // e^{ge_{p+1}} - e^{ge_p} > k + t, in logs
        let ge = sched.gamma_ell(p);
        let diff = sched.gamma_ell(p + 1) - ge;
        if !(diff > 0.0) || ge + (-(-diff).exp_m1()).ln() <= kt.ln() {
            return Err(Error::domain(format!("e^(gamma ell) gap at p = {} does not exceed k + t = {kt}", p + 1)));
        }
    }
    Ok(())
}

/// Build `y_q` until its length reaches `target`, drawing `v^q` from the seeded stream.
pub fn construct_point(cfg: &SeedConfig, sched: &Schedule, target: usize, seed: u64) -> Result<MoranPoint> {
    check_guards(cfg, sched, target)?;
    let mut b = Builder::new(cfg, sched, true)?;
    let mut stream = BlockStream::new(seed, cfg.q_k.len());
    while b.y.len() < target {
        if b.schedule_exhausted() {
            return Err(Error::domain(format!("schedule exhausted at length {} before target {target}", b.y.len())));
        }
        b.step(stream.next_index())?;
    }
    let m = cfg.alphabet_size();
    Ok(MoranPoint {
        m,
        k: cfg.k,
        t: cfg.t,
        seed,
        target,
        a: sched.a,
        b: sched.b,
        index_shift: sched.index_shift,
        q_count: cfg.q_k.len(),
        epsilon: cfg.epsilon,
        v_star: cfg.v_star.clone(),
        prefix: Word::new(m, b.y)?,
        q: b.q,
        pieces: b.pieces,
        events: b.events,
        q_k: cfg.q_k.clone(),
    })
}

impl MoranPoint {
    pub fn checkpoints(&self) -> Vec<Checkpoint> {
        self.events
            .iter()
            .map(|e| Checkpoint { p: e.p, original_p: e.original_p, n: e.theta_len, gamma_ell: e.gamma_ell, tau: e.tau(), odd: e.odd() })
            .collect()
    }

    pub fn ledger_text(&self) -> String {
        let mut s = String::new();
        let mut line = |l: String| {
            s.push_str(&l);
            s.push('\n');
        };
        line(LEDGER_SCHEMA.into());
        line(format!("param m {}", self.m));
        line(format!("param k {}", self.k));
        line(format!("param t {}", self.t));
        line(format!("param a {}", self.a));
        line(format!("param b {}", self.b));
        line(format!("param seed {}", self.seed));
        line(format!("param target {}", self.target));
        line(format!("param index_shift {}", self.index_shift));
        line(format!("param epsilon {:?}", self.epsilon));
        line(format!("param q {}", self.q));
        line(format!("vstar {}", self.v_star.to_cli_string()));
        for w in &self.q_k {
            line(format!("qk {}", w.to_cli_string()));
        }
        for pc in &self.pieces {
            let body = match &pc.kind {
                PieceKind::Marker => "marker".to_string(),
                PieceKind::Block { q, index } => format!("block {q} {index}"),
                PieceKind::Connector => {
                    let a = pc.start - 1;
                    format!("conn {}", show(self.m, &self.prefix.symbols()[a..a + pc.len]))
                }
                PieceKind::Theta { p } => format!("theta {p}"),
                PieceKind::Lambda { p, index } => format!("lambda {p} {index}"),
            };
            line(format!("piece {} {} {body}", pc.start, pc.len));
        }
        for e in &self.events {
            line(format!(
                "event {} {} {} {:?} {:?} {} {} {} {} {} {} {}",
                e.p,
                e.original_p,
                e.m_p,
                e.ell,
                e.gamma_ell,
                e.theta_len,
                e.y_len,
                e.w1.to_cli_string(),
                e.w2.to_cli_string(),
                e.w3.to_cli_string(),
                e.lambda.to_cli_string(),
                e.s_p
            ));
        }
        s
    }

    /// Rebuild a point from its ledger and prefix, checking that the pieces
    /// spell the prefix exactly.
    pub fn from_ledger(text: &str, prefix: Word) -> Result<MoranPoint> {
        let bad = |n: usize, msg: &str| Error::Parse(format!("ledger line {n}: {msg}"));
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == LEDGER_SCHEMA => {}
            _ => return Err(Error::Parse(format!("ledger must start with {LEDGER_SCHEMA}"))),
        }
        let mut params: HashMap<String, String> = HashMap::new();
        let mut v_star = None;
        let mut q_k = Vec::new();
        let mut pieces = Vec::new();
        let mut events = Vec::new();
        let m = prefix.alphabet_size();
        for (i, l) in lines {
            let n = i + 1;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad(n, &format!("bad integer {s}")));
            let float = |s: &str| s.parse::<f64>().map_err(|_| bad(n, &format!("bad number {s}")));
            match (f[0], f.len()) {
                ("param", 3) => {
                    params.insert(f[1].to_string(), f[2].to_string());
                }
                ("vstar", 2) => v_star = Some(Word::parse(m, f[1])?),
                ("qk", 2) => q_k.push(Word::parse(m, f[1])?),
                ("piece", _) if f.len() >= 4 => {
                    let start = int(f[1])?;
                    let len = int(f[2])?;
                    let kind = match (f[3], f.len()) {
                        ("marker", 4) => PieceKind::Marker,
                        ("block", 6) => PieceKind::Block { q: int(f[4])?, index: int(f[5])? },
                        ("conn", 5) => PieceKind::Connector,
                        ("theta", 5) => PieceKind::Theta { p: int(f[4])? },
                        ("lambda", 6) => PieceKind::Lambda { p: int(f[4])?, index: int(f[5])? },
                        _ => return Err(bad(n, "unknown piece")),
                    };
                    if kind == PieceKind::Connector && Word::parse(m, f[4])?.len() != len {
                        return Err(bad(n, "connector length mismatch"));
                    }
                    let conn = (kind == PieceKind::Connector).then(|| f[4].to_string());
                    pieces.push((n, Piece { start, len, kind }, conn));
                }
                ("event", 13) => events.push(Insertion {
                    p: int(f[1])?,
                    original_p: int(f[2])?,
                    m_p: int(f[3])?,
                    ell: float(f[4])?,
                    gamma_ell: float(f[5])?,
                    theta_len: int(f[6])?,
                    y_len: int(f[7])?,
                    w1: Word::parse(m, f[8])?,
                    w2: Word::parse(m, f[9])?,
                    w3: Word::parse(m, f[10])?,
                    lambda: Word::parse(m, f[11])?,
                    s_p: int(f[12])?,
                }),
                _ => return Err(bad(n, &format!("unrecognised record {}", f[0]))),
            }
        }
        let get = |key: &str| params.get(key).ok_or_else(|| Error::Parse(format!("ledger is missing param {key}")));
        let num = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|_| Error::Parse(format!("bad value for param {key}")))
        };
        if num("m")? != m as usize {
            return Err(Error::AlphabetMismatch { left: num("m")? as u16, right: m });
        }
        let ext = |key: &str| -> Result<Ext> {
            get(key)?.parse().map_err(|_| Error::Parse(format!("bad value for param {key}")))
        };
        let v_star = v_star.ok_or_else(|| Error::Parse("ledger is missing vstar".into()))?;
        let y = prefix.symbols();
        let mut pos = 1;
        for (n, pc, conn) in &pieces {
            if pc.start != pos {
                return Err(bad(*n, &format!("piece starts at {} but previous piece ends at {}", pc.start, pos - 1)));
            }
            let expect: Vec<u8> = match &pc.kind {
                PieceKind::Marker => v_star.symbols().to_vec(),
                PieceKind::Block { index, .. } | PieceKind::Lambda { index, .. } => q_k
                    .get(*index)
                    .ok_or_else(|| bad(*n, "Q_k index out of range"))?
                    .symbols()
                    .to_vec(),
                PieceKind::Connector => Word::parse(m, conn.as_deref().unwrap_or(""))?.into_symbols(),
                PieceKind::Theta { .. } => y.get(..pc.len).ok_or_else(|| bad(*n, "theta longer than prefix"))?.to_vec(),
            };
            let got = y.get(pc.start - 1..pc.start - 1 + pc.len).ok_or_else(|| bad(*n, "piece runs past the prefix"))?;
            if expect.len() != pc.len || got != expect.as_slice() {
                return Err(bad(*n, &format!("piece at {} does not match the prefix", pc.start)));
            }
            pos += pc.len;
        }
        if pos - 1 != y.len() {
            return Err(Error::Parse(format!("pieces cover {} symbols, prefix has {}", pos - 1, y.len())));
        }
        Ok(MoranPoint {
            m,
            k: num("k")?,
            t: num("t")?,
            seed: get("seed")?.parse().map_err(|_| Error::Parse("bad seed".into()))?,
            target: num("target")?,
            a: ext("a")?,
            b: ext("b")?,
            index_shift: num("index_shift")?,
            q_count: q_k.len(),
            epsilon: get("epsilon")?.parse().map_err(|_| Error::Parse("bad epsilon".into()))?,
            v_star,
            prefix,
            q: num("q")?,
            pieces: pieces.into_iter().map(|(_, p, _)| p).collect(),
            events,
            q_k,
        })
    }
}

pub fn prefix_text(w: &Word) -> String {
    format!("{PREFIX_SCHEMA}\nm {}\nlen {}\n{}\n", w.alphabet_size(), w.len(), w.to_cli_string())
}

pub fn parse_prefix(text: &str) -> Result<Word> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(PREFIX_SCHEMA) {
        return Err(Error::Parse(format!("prefix file must start with {PREFIX_SCHEMA}")));
    }
    let field = |l: Option<&str>, key: &str| -> Result<usize> {
        l.and_then(|l| l.strip_prefix(key))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("prefix file is missing `{key}`")))
    };
    let m = field(lines.next(), "m ")?;
    let len = field(lines.next(), "len ")?;
    let m = u16::try_from(m).map_err(|_| Error::Parse("alphabet size too large".into()))?;
    let w = Word::parse(m, lines.next().unwrap_or("").trim())?;
    if w.len() != len {
        return Err(Error::Parse(format!("prefix declares {len} symbols but holds {}", w.len())));
    }
    Ok(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckpointReport {
    pub p: usize,
    pub original_p: usize,
    pub n: usize,
    pub odd: bool,
    pub tau: usize,
    pub gamma_ell: f64,
    /// Upper end of the sandwich `e^{gamma ell} <= tau <= e^{gamma ell} + k + t + sum`.
    pub upper: f64,
    /// `(tau - k - t) / e^{gamma ell} - 1`
    pub eta: f64,
    /// `log(tau) / n`
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checkpoints: Vec<CheckpointReport>,
    /// Values of `n` at which piecewise constancy was checked.
    pub piecewise_checked: usize,
    pub last_odd_ratio: Option<f64>,
    pub last_even_ratio: Option<f64>,
}

/// Recompute every checkpoint return time by scanning the prefix. Any
/// disagreement with the ledger is an error naming the offending `n`.
pub fn verify_point(point: &MoranPoint) -> Result<VerifyReport> {
    let x = &point.prefix;
    let kt = (point.k + point.t) as f64;
    let mut out = Vec::new();
    let mut ell_sum = 0.0;
    for (j, e) in point.events.iter().enumerate() {
        let n = e.theta_len;
        let tau = match recurrence::first_return(x, n)? {
            ReturnTime::Determined(tau) => tau,
            ReturnTime::Undetermined { .. } => {
                return Err(Error::domain(format!("checkpoint n = {n}: no return inside the prefix")))
            }
        };
        if tau != e.tau() {
            return Err(Error::domain(format!("checkpoint n = {n}: scanned tau = {tau}, ledger |y_M w1| = {}", e.tau())));
        }
        let lower = e.gamma_ell.exp();
        let upper = lower + kt + ell_sum + j as f64 * (2.0 * point.k as f64 + 4.0 * point.t as f64);
        let tf = tau as f64;
        if tf < lower * (1.0 - 1e-12) || tf > upper * (1.0 + 1e-12) {
            return Err(Error::domain(format!("checkpoint n = {n}: tau = {tau} outside [{lower:.3}, {upper:.3}]")));
        }
        ell_sum += e.ell;
        out.push(CheckpointReport {
            p: e.p,
            original_p: e.original_p,
            n,
            odd: e.odd(),
            tau,
            gamma_ell: e.gamma_ell,
            upper,
            eta: (tf - kt) / lower - 1.0,
            ratio: tf.ln() / n as f64,
        });
    }
    let mut checked = 0;
    if let Some(last) = point.events.last() {
        let tr = recurrence::trace(x, last.s_p)?;
        let tau_at = |n: usize| tr.entries[n - 1].tau;
        // tau_n is flat on [k, |theta^1|) and on each [|theta^p|, s_p] and (s_p, |theta^{p+1}|)
        let mut ranges = vec![(point.k, point.events[0].theta_len, point.events[0].theta_len)];
        for (i, e) in point.events.iter().enumerate() {
            ranges.push((e.theta_len, e.s_p + 1, e.theta_len));
            if let Some(next) = point.events.get(i + 1) {
                ranges.push((e.s_p + 1, next.theta_len, next.theta_len));
            }
        }
        for (lo, hi, anchor) in ranges {
            let want = tau_at(anchor);
            for n in lo..hi {
                if tau_at(n) != want {
                    return Err(Error::domain(format!(
                        "tau_n is not constant at n = {n}: {:?} vs {:?} at n = {anchor}",
                        tau_at(n),
                        want
                    )));
                }
                checked += 1;
            }
        }
    }
    let last_odd_ratio = out.iter().rev().find(|c| c.odd).map(|c| c.ratio);
    let last_even_ratio = out.iter().rev().find(|c| !c.odd).map(|c| c.ratio);
    Ok(VerifyReport { checkpoints: out, piecewise_checked: checked, last_odd_ratio, last_even_ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaStats {
    pub q_max: usize,
    /// `#Q_k`
    pub branching: usize,
    pub materialized: bool,
    pub nodes_checked: usize,
    pub branching_ok: bool,
    pub branching_min: usize,
    pub branching_max: usize,
    /// Nodes per level; the sampled mode reports visited nodes.
    pub level_sizes: Vec<usize>,
    /// `(min, max)` word length per level.
    pub lengths: Vec<(usize, usize)>,
    /// Levels `q` reached by an insertion (`q = M_p` for some branch).
    pub insertion_levels: Vec<usize>,
    pub ambiguity_plain: Option<usize>,
    pub ambiguity_insert: Option<usize>,
    /// `m^{k+t+1}` and `m^{2k+3t+3}`.
    pub ceiling_plain: f64,
    pub ceiling_insert: f64,
}

impl DeltaStats {
    pub fn within_ceilings(&self) -> bool {
        self.ambiguity_plain.map_or(true, |a| (a as f64) <= self.ceiling_plain)
            && self.ambiguity_insert.map_or(true, |a| (a as f64) <= self.ceiling_insert)
    }
}

struct Node<'a> {
    b: Builder<'a>,
}

fn children<'a>(b: &Builder<'a>) -> Result<Vec<Builder<'a>>> {
    (0..b.cfg.q_k.len())
        .map(|i| {
            let mut c = b.clone();
            c.step(i)?;
            Ok(c)
        })
        .collect()
}

fn distinct(cs: &[Builder<'_>]) -> usize {
    cs.iter().map(|c| c.y.as_slice()).collect::<HashSet<_>>().len()
}

/// Continuation tree `y_0 -> y_1 -> ... -> y_{q_max}` over all block choices.
/// Small trees are materialized and the ambiguity counts computed exactly;
/// larger ones are explored along `sample_width` seeded paths.
pub fn delta_stats(cfg: &SeedConfig, sched: &Schedule, q_max: usize, sample_width: usize) -> Result<DeltaStats> {
    let qn = cfg.q_k.len() as u128;
    let total: u128 = (0..=q_max as u32).map(|q| qn.saturating_pow(q)).fold(0u128, |a, b| a.saturating_add(b));
    let m = cfg.alphabet_size() as f64;
    let mut stats = DeltaStats {
        q_max,
        branching: cfg.q_k.len(),
        materialized: total <= MATERIALIZE_CAP,
        nodes_checked: 0,
        branching_ok: true,
        branching_min: usize::MAX,
        branching_max: 0,
        level_sizes: Vec::new(),
        lengths: Vec::new(),
        insertion_levels: Vec::new(),
        ambiguity_plain: None,
        ambiguity_insert: None,
        ceiling_plain: m.powi((cfg.k + cfg.t + 1) as i32),
        ceiling_insert: m.powi((2 * cfg.k + 3 * cfg.t + 3) as i32),
    };
    let root = Builder::new(cfg, sched, false)?;
    let note = |stats: &mut DeltaStats, cs: &[Builder<'_>]| {
        let d = distinct(cs);
        stats.nodes_checked += 1;
        stats.branching_min = stats.branching_min.min(d);
        stats.branching_max = stats.branching_max.max(d);
        stats.branching_ok &= d == cfg.q_k.len();
    };
    let mut levels: Vec<Vec<Node>> = vec![vec![Node { b: root }]];
    if stats.materialized {
        for _ in 0..q_max {
            let mut next = Vec::new();
            for node in levels.last().unwrap() {
                let cs = children(&node.b)?;
                note(&mut stats, &cs);
                next.extend(cs.into_iter().map(|b| Node { b }));
            }
            levels.push(next);
        }
    } else {
        let cost = (sample_width as u128).saturating_mul(q_max as u128).saturating_mul(qn);
        budget::check(cost, budget::enumeration_budget())?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        levels.extend((0..q_max).map(|_| Vec::new()));
        for _ in 0..sample_width {
            let mut b = levels[0][0].b.clone();
            for q in 1..=q_max {
                let mut cs = children(&b)?;
                note(&mut stats, &cs);
                b = cs.swap_remove(rng.random_range(0..cs.len()));
                levels[q].push(Node { b: b.clone() });
            }
        }
    }
    for (q, level) in levels.iter().enumerate() {
        stats.level_sizes.push(level.len());
        let lo = level.iter().map(|n| n.b.y.len()).min().unwrap_or(0);
        let hi = level.iter().map(|n| n.b.y.len()).max().unwrap_or(0);
        stats.lengths.push((lo, hi));
        if q > 0 && level.iter().any(|n| n.b.last_case2) {
            stats.insertion_levels.push(q - 1);
        }
    }
    if stats.materialized && q_max > 0 {
        let (plain, insert) = ambiguity(&levels);
        stats.ambiguity_plain = Some(plain);
        stats.ambiguity_insert = Some(insert);
    }
    if stats.nodes_checked == 0 {
        stats.branching_min = cfg.q_k.len();
        stats.branching_max = cfg.q_k.len();
    }
    Ok(stats)
}

/// For every leaf `y` and cut `n`, find the least `q` with `y[..n]` a prefix
/// of a level-`q+1` word and count those words, split by how they were built.
fn ambiguity(levels: &[Vec<Node>]) -> (usize, usize) {
    let sorted: Vec<Vec<(&[u8], bool)>> = levels
        .iter()
        .map(|l| {
            let mut v: Vec<(&[u8], bool)> = l.iter().map(|n| (n.b.y.as_slice(), n.b.last_case2)).collect();
            v.sort();
            v
        })
        .collect();
    let range = |lvl: &[(&[u8], bool)], pre: &[u8]| {
        let a = lvl.partition_point(|(w, _)| *w < pre);
        let b = a + lvl[a..].partition_point(|(w, _)| w.starts_with(pre));
        a..b
    };
    let mut seen = HashSet::new();
    let (mut plain, mut insert) = (0, 0);
    for leaf in levels.last().unwrap() {
        let y = &leaf.b.y;
        for n in 1..=y.len() {
            if !seen.insert(&y[..n]) {
                continue;
            }
            let Some(q1) = (1..sorted.len()).find(|&q| !range(&sorted[q], &y[..n]).is_empty()) else { continue };
            let hits = &sorted[q1][range(&sorted[q1], &y[..n])];
            plain = plain.max(hits.iter().filter(|h| !h.1).count());
            insert = insert.max(hits.iter().filter(|h| h.1).count());
        }
    }
    (plain, insert)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimMode {
    Symbolic,
    /// Box counts of cylinder intervals for tree levels `1..=q_max`.
    Interval { q_max: usize, samples: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalDimension {
    pub entropy: f64,
    pub lyapunov: f64,
    /// `(h - eps) / (chi + 2 eps)`
    pub closed_form: f64,
    /// `(q, log N_q, -log r_q)`
    pub points: Vec<(usize, f64, f64)>,
    pub slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    pub q_count: usize,
    pub k: usize,
    pub t: usize,
    pub epsilon: f64,
    pub bound: f64,
    pub interval: Option<IntervalDimension>,
}

pub fn dimension_lower_bound(cfg: &SeedConfig, sched: &Schedule, mode: DimMode) -> Result<DimensionEstimate> {
    let mut est = DimensionEstimate {
        q_count: cfg.q_k.len(),
        k: cfg.k,
        t: cfg.t,
        epsilon: cfg.epsilon,
        bound: cfg.symbolic_bound(),
        interval: None,
    };
    let DimMode::Interval { q_max, samples } = mode else {
        return Ok(est);
    };
    let ModelKind::Interval(map) = cfg.model.kind() else {
        return Err(Error::domain("interval mode needs an alpha-beta model"));
    };
    if q_max == 0 || samples == 0 {
        return Err(Error::domain("interval mode needs q_max >= 1 and samples >= 1"));
    }
    let chi = map.beta_f64().ln();
    let h = chi;
    let eps = cfg.epsilon;
    let root = Builder::new(cfg, sched, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut widest = vec![0.0f64; q_max];
    for _ in 0..samples {
        let mut b = root.clone();
        for r in widest.iter_mut() {
            b.step(rng.random_range(0..cfg.q_k.len()))?;
            let w = Word::new(cfg.alphabet_size(), b.y.clone())?;
            let iv = map
                .cylinder_interval(&w)?
                .ok_or_else(|| Error::domain(format!("tree word {} has an empty cylinder", w.to_cli_string())))?;
            *r = r.max(quad_len(&iv.len()));
        }
    }
    let ln_q = (cfg.q_k.len() as f64).ln();
    let points: Vec<(usize, f64, f64)> = widest.iter().enumerate().map(|(i, r)| (i + 1, (i + 1) as f64 * ln_q, -r.ln())).collect();
    let slope = fit_slope(&points);
    est.interval = Some(IntervalDimension { entropy: h, lyapunov: chi, closed_form: (h - eps) / (chi + 2.0 * eps), points, slope });
    Ok(est)
}

fn quad_len(q: &Quad) -> f64 {
    q.to_f64()
}

/// Least-squares slope of `log N` against `-log r`; a single point gives the ratio.
fn fit_slope(points: &[(usize, f64, f64)]) -> f64 {
    if points.len() == 1 {
        return points[0].1 / points[0].2;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.2).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.2 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.2 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::make_schedule;
    use crate::word::subword_occurrences;

    fn full(k: usize) -> SeedConfig {
        build_for_model(&SubshiftModel::full(2).unwrap(), k, 6, 10_000_000).unwrap()
    }

    fn toy_schedule() -> Schedule {
        toy_with(&[40.0, 90.0, 200.0, 400.0, 800.0])
    }

    fn toy_with(returns: &[f64]) -> Schedule {
        let ell = [6.0, 12.0, 18.0, 24.0, 30.0];
        let ge: Vec<f64> = returns.iter().map(|x| x.ln()).collect();
        let gamma: Vec<f64> = ge.iter().zip(&ell).map(|(g, l)| g / l).collect();
        Schedule::custom(Ext::Finite(0.5), Ext::Finite(1.0), &ell, &gamma).unwrap()
    }

    #[test]
    fn full_shift_k5_counts() {
        let c = full(5);
        assert_eq!(c.v_star.to_string(), "00001");
        // pruned: ends in 00, or starts with 01, 001, 0001, 00001
        assert_eq!(c.q_k.len(), 12);
        assert!(!c.q_k.contains(&c.v_star));
        assert_eq!(c.t, 0);
    }

    #[test]
    fn seed_prefix_has_single_marker() {
        let c = full(9);
        for seed in 0..5 {
            let x = seed_prefix(&c, seed, 2000).unwrap();
            assert_eq!(subword_occurrences(&c.v_star, &x).unwrap(), vec![1]);
        }
    }

    #[test]
    fn toy_point_verifies_and_ledger_round_trips() {
        let c = full(5);
        let s = toy_schedule();
        let pt = construct_point(&c, &s, 900, 3).unwrap();
        assert!(pt.events.len() >= 3);
        let rep = verify_point(&pt).unwrap();
        assert_eq!(rep.checkpoints.len(), pt.events.len());
        let back = MoranPoint::from_ledger(&pt.ledger_text(), pt.prefix.clone()).unwrap();
        assert_eq!(back.events, pt.events);
        assert_eq!(back.pieces, pt.pieces);
        let again = construct_point(&c, &s, 900, 3).unwrap();
        assert_eq!(again.ledger_text(), pt.ledger_text());
    }

    #[test]
    fn tampered_ledger_is_rejected() {
        let c = full(5);
        let pt = construct_point(&c, &toy_schedule(), 200, 1).unwrap();
        let mut y = pt.prefix.clone().into_symbols();
        y[30] ^= 1;
        let y = Word::new(2, y).unwrap();
        assert!(MoranPoint::from_ledger(&pt.ledger_text(), y).is_err());
    }

    #[test]
    fn toy_tree_branching() {
        let c = full(5);
        let st = delta_stats(&c, &toy_with(&[12.0, 400.0, 800.0, 1600.0, 3200.0]), 3, 0).unwrap();
        assert!(st.materialized);
        assert!(st.branching_ok);
        assert_eq!(st.level_sizes, vec![1, 12, 144, 1728]);
        assert!(st.within_ceilings());
        assert_eq!(st.insertion_levels, vec![2]);
    }

    #[test]
    fn symbolic_bound_k9() {
        let c = full(9);
        assert!(c.q_k.len() > 300, "{}", c.q_k.len());
        let s = make_schedule(Ext::Finite(0.6), Ext::Finite(1.0), 60).unwrap();
        let d = dimension_lower_bound(&c, &s, DimMode::Symbolic).unwrap();
        assert!(d.bound >= 0.9 * 2f64.ln());
    }

    #[test]
    fn bound_shape_in_t() {
        let c = full(9);
        let mut prev = f64::INFINITY;
        for t in 0..20 {
            let mut c2 = c.clone();
            c2.t = t;
            let b = c2.symbolic_bound();
            assert!(b < prev);
            prev = b;
        }
    }
}
