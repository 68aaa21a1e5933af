//! Alpha-beta transformations `T(x) = beta*x + alpha mod 1`, digit expansions,
//! cylinder intervals and the transitivity certificate search.

use std::fmt;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Quad;
use crate::recurrence::{first_return, ReturnTime as Tau};
use crate::word::Word;

pub const ENDPOINT_TOL: f64 = 1e-12;
pub const TRANSITIVITY_CAP: usize = 10_000;
pub const TRANSITIVITY_GRID: usize = 32;

#[derive(Clone, PartialEq)]
pub struct AlphaBeta {
    alpha: Quad,
    beta: Quad,
    m: u16,
    // exact branch endpoints 0 = e_0 < e_1 < .. < e_m = 1
    ends: Vec<Quad>,
    alpha_f: f64,
    beta_f: f64,
}

impl fmt::Debug for AlphaBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlphaBeta(alpha={}, beta={}, m={})", self.alpha, self.beta, self.m)
    }
}

/// Half-open interval `[lo, hi)` with exact endpoints.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ExactInterval {
    pub lo: Quad,
    pub hi: Quad,
}

impl ExactInterval {
    pub fn new(lo: Quad, hi: Quad) -> Option<Self> {
        (lo < hi).then_some(ExactInterval { lo, hi })
    }

    pub fn unit() -> Self {
        ExactInterval { lo: Quad::zero(), hi: Quad::one() }
    }

    pub fn intersect(&self, other: &ExactInterval) -> Option<ExactInterval> {
        let lo = if self.lo >= other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi <= other.hi { self.hi.clone() } else { other.hi.clone() };
        ExactInterval::new(lo, hi)
    }

    pub fn len(&self) -> Quad {
        &self.hi - &self.lo
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }
}

impl fmt::Display for ExactInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DigitTrace {
    pub x0: f64,
    pub digits: Word,
    /// `orbit[i] = T^i(x0)`
    pub orbit: Vec<f64>,
    /// `flags[i]` is set when `orbit[i]` lies within tolerance of a branch endpoint.
    pub flags: Vec<bool>,
    /// First 1-based index from which the coding is unreliable.
    pub unreliable_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReturnTime {
    Found(usize),
    NotFoundWithin(usize),
}

impl AlphaBeta {
    pub fn new(alpha: Quad, beta: Quad) -> Result<Self> {
        if alpha < Quad::zero() || alpha >= Quad::one() {
            return Err(Error::domain(format!("alpha must lie in [0,1), got {}", alpha.to_f64())));
        }
        if beta <= Quad::one() {
            return Err(Error::domain(format!("beta must exceed 1, got {}", beta.to_f64())));
        }
        // m - 1 - alpha < beta <= m - alpha  <=>  m = ceil(alpha + beta)
        let s = &alpha + &beta;
        let fl = s.floor();
        let m_big = if Quad::rational(fl.clone().into()) == s { fl } else { fl + 1 };
        let m = m_big
            .to_u16()
            .filter(|&m| m <= crate::word::MAX_ALPHABET)
            .ok_or_else(|| Error::domain("too many branches"))?;
        let mut ends = vec![Quad::zero()];
        for j in 1..m {
            ends.push(&(&Quad::int(j.into()) - &alpha) / &beta);
        }
        ends.push(Quad::one());
        let alpha_f = alpha.to_f64();
        let beta_f = beta.to_f64();
        Ok(AlphaBeta { alpha, beta, m, ends, alpha_f, beta_f })
    }

    pub fn parse(alpha: &str, beta: &str) -> Result<Self> {
        AlphaBeta::new(Quad::parse(alpha)?, Quad::parse(beta)?)
    }

    pub fn alpha(&self) -> &Quad {
        &self.alpha
    }

    pub fn beta(&self) -> &Quad {
        &self.beta
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha_f
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta_f
    }

    pub fn branches(&self) -> u16 {
        self.m
    }

    pub fn branch_intervals_exact(&self) -> Vec<ExactInterval> {
        self.ends
            .windows(2)
            .map(|w| ExactInterval { lo: w[0].clone(), hi: w[1].clone() })
            .collect()
    }

    pub fn branch_intervals(&self) -> Vec<(f64, f64)> {
        self.branch_intervals_exact().iter().map(ExactInterval::to_f64).collect()
    }

    /// Interior discontinuities `e_1 .. e_{m-1}`.
    pub fn discontinuities(&self) -> &[Quad] {
        &self.ends[1..self.ends.len() - 1]
    }

    fn beta_plus_alpha_is_integer(&self) -> bool {
        let s = &self.alpha + &self.beta;
        Quad::rational(s.floor().into()) == s
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) || x.is_nan() {
            return Err(Error::domain(format!("x = {x} outside [0,1]")));
        }
        if x == 1.0 {
            // left limit
            if self.beta_plus_alpha_is_integer() {
                return Ok(1.0);
            }
            let y = self.beta_f + self.alpha_f;
            return Ok(y - y.floor());
        }
        let y = self.beta_f * x + self.alpha_f;
        Ok(y - y.floor())
    }

    fn digit_of(&self, x: f64) -> u8 {
        if x >= 1.0 {
            return (self.m - 1) as u8;
        }
        let d = (self.beta_f * x + self.alpha_f).floor();
        d.clamp(0.0, f64::from(self.m - 1)) as u8
    }

    fn near_endpoint(&self, x: f64) -> bool {
        x >= 1.0 || self.discontinuities().iter().any(|e| (x - e.to_f64()).abs() < ENDPOINT_TOL)
    }

    pub fn digits(&self, x: f64, n: usize) -> Result<DigitTrace> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::domain(format!("x = {x} outside [0,1)")));
        }
        let mut orbit = Vec::with_capacity(n);
        let mut digits = Vec::with_capacity(n);
        let mut flags = Vec::with_capacity(n);
        let mut unreliable_from = None;
        let mut cur = x;
        for i in 0..n {
            let flag = self.near_endpoint(cur);
            if flag && unreliable_from.is_none() {
                unreliable_from = Some(i + 1);
            }
            orbit.push(cur);
            digits.push(self.digit_of(cur));
            flags.push(flag);
            cur = self.apply(cur.min(1.0))?;
        }
        Ok(DigitTrace { x0: x, digits: Word::new(self.m, digits)?, orbit, flags, unreliable_from })
    }

    /// Partial sum of `(e_k - alpha) / beta^k`.
    pub fn reconstruct(&self, digits: &Word) -> Result<f64> {
        if digits.is_empty() {
            return Err(Error::domain("digits must be non-empty"));
        }
        if digits.alphabet_size() != self.m {
            return Err(Error::AlphabetMismatch { left: digits.alphabet_size(), right: self.m });
        }
        let mut sum = 0.0;
        let mut scale = 1.0;
        for &e in digits.symbols() {
            scale /= self.beta_f;
            sum += (f64::from(e) - self.alpha_f) * scale;
        }
        Ok(sum)
    }

    pub fn branch_interval(&self, j: u8) -> ExactInterval {
        ExactInterval { lo: self.ends[j as usize].clone(), hi: self.ends[j as usize + 1].clone() }
    }

    /// `T` restricted to branch `j` applied to an interval inside `I_j`.
    pub fn forward(&self, j: u8, iv: &ExactInterval) -> ExactInterval {
        let shift = &self.alpha - &Quad::int(j.into());
        ExactInterval { lo: &(&self.beta * &iv.lo) + &shift, hi: &(&self.beta * &iv.hi) + &shift }
    }

    /// Image of `J ∩ I_j`, or `None` when the intersection is empty.
    pub fn follow(&self, iv: &ExactInterval, j: u8) -> Option<ExactInterval> {
        iv.intersect(&self.branch_interval(j)).map(|piece| self.forward(j, &piece))
    }

    fn inverse(&self, j: u8, y: &Quad) -> Quad {
        &(&(y + &Quad::int(j.into())) - &self.alpha) / &self.beta
    }

    /// Points whose first `|w|` digits spell `w`, by inverse-branch pullback.
    pub fn cylinder_interval(&self, w: &Word) -> Result<Option<ExactInterval>> {
        if w.alphabet_size() != self.m {
            return Err(Error::AlphabetMismatch { left: w.alphabet_size(), right: self.m });
        }
        let syms = w.symbols();
        let Some((&last, rest)) = syms.split_last() else {
            return Ok(Some(ExactInterval::unit()));
        };
        let mut cur = self.branch_interval(last);
        for &j in rest.iter().rev() {
            let pulled = ExactInterval { lo: self.inverse(j, &cur.lo), hi: self.inverse(j, &cur.hi) };
            match pulled.intersect(&self.branch_interval(j)) {
                Some(iv) => cur = iv,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    pub fn return_time_digits(&self, x: f64, n: usize, horizon: usize) -> Result<ReturnTime> {
        if n == 0 || horizon == 0 {
            return Err(Error::domain("n and horizon must be positive"));
        }
        let trace = self.digits(x, horizon + n)?;
        Ok(match first_return(&trace.digits, n)? {
            Tau::Determined(t) if t <= horizon => ReturnTime::Found(t),
            _ => ReturnTime::NotFoundWithin(horizon),
        })
    }

    pub fn check_transitive(&self) -> Transitivity {
        check_transitive_with(self, TRANSITIVITY_GRID, TRANSITIVITY_CAP)
    }
}

/// Piecewise monotonic map given by branch evaluators.
pub trait PiecewiseMap {
    /// Branch containing `x`, with a flag when `x` is within tolerance of an endpoint.
    fn locate(&self, x: f64) -> (usize, bool);
    fn eval(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn constant_slope(&self) -> Option<f64> {
        None
    }
}

impl PiecewiseMap for AlphaBeta {
    fn locate(&self, x: f64) -> (usize, bool) {
        (self.digit_of(x) as usize, self.near_endpoint(x))
    }
    fn eval(&self, x: f64) -> f64 {
        self.apply(x.clamp(0.0, 1.0)).unwrap_or(f64::NAN)
    }
    fn derivative(&self, _x: f64) -> f64 {
        self.beta_f
    }
    fn constant_slope(&self) -> Option<f64> {
        Some(self.beta_f)
    }
}

pub type BranchFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A general map assembled from breakpoints and per-branch callbacks.
pub struct BranchMap {
    breaks: Vec<f64>,
    maps: Vec<BranchFn>,
    derivs: Vec<BranchFn>,
}

impl BranchMap {
    /// `breaks` are the interior breakpoints in increasing order; there is one
    /// map and one derivative per branch.
    pub fn new(breaks: Vec<f64>, maps: Vec<BranchFn>, derivs: Vec<BranchFn>) -> Result<Self> {
        if maps.len() != breaks.len() + 1 || derivs.len() != maps.len() {
            return Err(Error::domain("need one map and one derivative per branch"));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks.iter().any(|b| !(0.0..1.0).contains(b) || *b <= 0.0) {
            return Err(Error::domain("breakpoints must be increasing inside (0,1)"));
        }
        Ok(BranchMap { breaks, maps, derivs })
    }
}

impl PiecewiseMap for BranchMap {
    fn locate(&self, x: f64) -> (usize, bool) {
        let j = self.breaks.partition_point(|&b| b <= x);
        let flag = self.breaks.iter().any(|b| (x - b).abs() < ENDPOINT_TOL);
        (j, flag)
    }
    fn eval(&self, x: f64) -> f64 {
        (self.maps[self.locate(x).0])(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        (self.derivs[self.locate(x).0])(x)
    }
}

/// `(1/n) * sum_{k<n} log|T'(T^k x)|`; fails if the orbit meets an endpoint.
pub fn lyapunov_sum(map: &dyn PiecewiseMap, x: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    if let Some(slope) = map.constant_slope() {
        return Ok(slope.abs().ln());
    }
    let mut cur = x;
    let mut sum = 0.0;
    for k in 0..n {
        let (_, flag) = map.locate(cur);
        if flag {
            return Err(Error::domain(format!("orbit hits a branch endpoint at step {k}")));
        }
        sum += map.derivative(cur).abs().ln();
        cur = map.eval(cur);
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub start: (f64, f64),
    pub iterations: usize,
    pub rule: String,
    pub final_interval: (f64, f64),
    /// Branch fully contained in the final interval, when the rule supplies one.
    pub full_branch: Option<u16>,
}

#[derive(Debug, Clone, Serialize)]
pub enum Transitivity {
    Transitive { certificates: Vec<Certificate> },
    Inconclusive { reason: String, succeeded: usize, tried: usize },
}

impl Transitivity {
    pub fn is_transitive(&self) -> bool {
        matches!(self, Transitivity::Transitive { .. })
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Open {
    lo: Quad,
    hi: Quad,
}

enum Run {
    Done(Certificate),
    Stuck(String),
}

/// Runs the splitting argument from every cell `(i/grid, (i+1)/grid)` that
/// does not contain two discontinuities and requires all runs to finish.
pub fn check_transitive_with(p: &AlphaBeta, grid: usize, cap: usize) -> Transitivity {
    let two = Quad::int(2);
    if p.beta < two {
        return Transitivity::Inconclusive {
            reason: "beta < 2 is outside the hypothesis of the argument".into(),
            succeeded: 0,
            tried: 0,
        };
    }
    let s = p.discontinuities().to_vec();
    let mut certificates = Vec::new();
    let mut tried = 0;
    for i in 0..grid {
        let a0 = Open { lo: Quad::ratio(i as i64, grid as i64), hi: Quad::ratio(i as i64 + 1, grid as i64) };
        if s.iter().filter(|e| a0.lo < **e && **e < a0.hi).count() >= 2 {
            continue;
        }
        tried += 1;
        match run_from(p, &s, a0, cap) {
            Run::Done(c) => certificates.push(c),
            Run::Stuck(why) => {
                return Transitivity::Inconclusive {
                    reason: format!("start cell {i}/{grid}: {why}"),
                    succeeded: certificates.len(),
                    tried,
                }
            }
        }
    }
    Transitivity::Transitive { certificates }
}

fn run_from(p: &AlphaBeta, s: &[Quad], a0: Open, cap: usize) -> Run {
    let beta_two = p.beta == Quad::int(2);
    let start = (a0.lo.to_f64(), a0.hi.to_f64());
    let fixed = &Quad::one() - &p.alpha;
    let t_i0 = Open { lo: p.alpha.clone(), hi: Quad::one() };
    let t_i2 = Open { lo: Quad::zero(), hi: p.alpha.clone() };
    let mut prev: Option<Open> = None;
    let mut a = a0;
    for n in 0..=cap {
        let inside: Vec<&Quad> = s.iter().filter(|e| a.lo < **e && **e < a.hi).collect();
        let done = |rule: &str, full_branch: Option<u16>, a: &Open| {
            Run::Done(Certificate {
                start,
                iterations: n,
                rule: rule.into(),
                final_interval: (a.lo.to_f64(), a.hi.to_f64()),
                full_branch,
            })
        };
        if n >= 1 && inside.len() >= 2 {
            // two consecutive discontinuities bracket a full branch
            let j = s.iter().position(|e| e == inside[0]).unwrap() + 1;
            let rule = if beta_two { "contains S" } else { "two discontinuities" };
            return done(rule, Some(j as u16), &a);
        }
        if beta_two {
            if a.lo < fixed && fixed < a.hi {
                return done("fixed point 1-alpha inside", None, &a);
            }
            if let Some(pr) = &prev {
                if *pr == t_i0 && a == t_i2 {
                    return done("T(I_0) then T(I_2)", None, &a);
                }
                if *pr == t_i2 && a == t_i0 {
                    return done("T(I_2) then T(I_0)", None, &a);
                }
            }
        }
        if inside.len() >= 2 {
            return Run::Stuck("initial interval contains two discontinuities".into());
        }
        let piece = match inside.first() {
            None => a.clone(),
            Some(&cut) => {
                let dj = cut - &a.lo;
                let dk = &a.hi - cut;
                if dj > dk {
                    Open { lo: a.lo.clone(), hi: cut.clone() }
                } else {
                    Open { lo: cut.clone(), hi: a.hi.clone() }
                }
            }
        };
        let j = branch_containing(p, &piece);
        let img = p.forward(j, &ExactInterval { lo: piece.lo, hi: piece.hi });
        let next = Open { lo: img.lo, hi: img.hi };
        if beta_two && next == a && prev.as_ref() == Some(&a) {
            return Run::Stuck(format!(
                "stationary at ({:.6}, {:.6}) after {n} steps",
                a.lo.to_f64(),
                a.hi.to_f64()
            ));
        }
        prev = Some(a);
        a = next;
    }
    Run::Stuck(format!("iteration cap {cap} reached"))
}

fn branch_containing(p: &AlphaBeta, piece: &Open) -> u8 {
    // piece has no discontinuity in its interior, so its left end fixes the branch
    let j = p.ends.partition_point(|e| *e <= piece.lo);
    (j.max(1) - 1) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(a: &str, b: &str) -> AlphaBeta {
        AlphaBeta::parse(a, b).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(ab("0", "2").apply(0.625).unwrap(), 0.25);
        assert!((ab("0.5", "2.5").apply(0.9).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(ab("0", "2").apply(1.0).unwrap(), 1.0);
        assert!(ab("0", "2").apply(1.5).is_err());
    }

    #[test]
    fn branch_count_and_intervals() {
        let p = ab("0.5", "2.5");
        assert_eq!(p.branches(), 3);
        let iv = p.branch_intervals();
        let want = [(0.0, 0.2), (0.2, 0.6), (0.6, 1.0)];
        for (got, w) in iv.iter().zip(want) {
            assert!((got.0 - w.0).abs() < 1e-15 && (got.1 - w.1).abs() < 1e-15);
        }
        assert_eq!(ab("0", "2").branch_intervals(), vec![(0.0, 0.5), (0.5, 1.0)]);
        // beta exactly m - alpha keeps m branches
        assert_eq!(ab("0", "3").branches(), 3);
        assert_eq!(ab("0.5", "1.5").branches(), 2);
    }

    #[test]
    fn digits_examples() {
        let d = ab("0", "2").digits(0.625, 4).unwrap();
        assert_eq!(d.digits.to_string(), "1010");
        assert_eq!(ab("0", "2").digits(0.0, 3).unwrap().digits.to_string(), "000");
        assert_eq!(ab("0.5", "2.5").digits(0.0, 1).unwrap().digits.to_string(), "0");
    }

    #[test]
    fn reconstruct_examples() {
        let p = ab("0", "2");
        assert_eq!(p.reconstruct(&Word::parse(2, "1000").unwrap()).unwrap(), 0.5);
        let q = ab("0.5", "2.5");
        let d = q.digits(0.3, 20).unwrap();
        assert!((q.reconstruct(&d.digits).unwrap() - 0.3).abs() < 2.5f64.powi(-20));
    }

    #[test]
    fn cylinder_examples() {
        let p = ab("0", "2");
        let c = p.cylinder_interval(&Word::parse(2, "01").unwrap()).unwrap().unwrap();
        assert_eq!(c, ExactInterval { lo: Quad::ratio(1, 4), hi: Quad::ratio(1, 2) });
        let g = ab("0", "phi");
        assert!(g.cylinder_interval(&Word::parse(2, "11").unwrap()).unwrap().is_none());
        assert!(g.cylinder_interval(&Word::parse(2, "10").unwrap()).unwrap().is_some());
    }

    #[test]
    fn transitivity_examples() {
        assert!(ab("0.5", "2.5").check_transitive().is_transitive());
        assert!(ab("0.3", "2").check_transitive().is_transitive());
        assert!(!ab("0", "1.2").check_transitive().is_transitive());
    }

    #[test]
    fn return_time_examples() {
        let p = ab("0", "2");
        assert_eq!(p.return_time_digits(1.0 / 3.0, 2, 10).unwrap(), ReturnTime::Found(2));
        assert_eq!(p.return_time_digits(0.0, 5, 10).unwrap(), ReturnTime::Found(1));
    }

    #[test]
    fn lyapunov_examples() {
        let p = ab("0.5", "2.5");
        assert_eq!(lyapunov_sum(&p, 0.3, 100).unwrap(), 2.5f64.ln());
        let tent = BranchMap::new(
            vec![1.0 / 3.0, 5.0 / 6.0],
            vec![Box::new(|x| 3.0 * x), Box::new(|x| 2.0 * (x - 1.0 / 3.0)), Box::new(|x| 2.0 * (x - 5.0 / 6.0))],
            vec![Box::new(|_| 3.0), Box::new(|_| 2.0), Box::new(|_| 2.0)],
        )
        .unwrap();
        let v = lyapunov_sum(&tent, 0.1234567, 200).unwrap();
        assert!(v >= 2f64.ln() - 1e-12 && v <= 3f64.ln() + 1e-12);
    }
}
