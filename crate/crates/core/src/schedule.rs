//! Paired sequences `(ell_p, gamma_p)` steering the checkpoint return times
//! toward a target pair `(a, b)`. Everything is stored as natural logs: the
//! faster cases grow doubly exponentially and `e^{gamma*ell}` is never formed.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Non-negative extended real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub enum Ext {
    Finite(f64),
    Inf,
}

impl Ext {
    pub fn is_inf(self) -> bool {
        matches!(self, Ext::Inf)
    }

    pub fn is_zero(self) -> bool {
        self == Ext::Finite(0.0)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Inf => None,
        }
    }
}

impl FromStr for Ext {
    type Err = Error;
    fn from_str(s: &str) -> Result<Ext> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "+inf" | "∞") {
            return Ok(Ext::Inf);
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse(format!("bad extended real {s:?}")))?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(format!("{s} is not a non-negative real")));
        }
        Ok(Ext::Finite(v))
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => write!(f, "{v}"),
            Ext::Inf => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl Case {
    pub fn of(a: Ext, b: Ext) -> Result<Case> {
        if a > b {
            return Err(Error::domain("a must not exceed b"));
        }
        Ok(match (a, b) {
            (Ext::Inf, _) => Case::V,
            (_, Ext::Inf) if a.is_zero() => Case::VI,
            (_, Ext::Inf) => Case::III,
            _ if b.is_zero() => Case::IV,
            _ if a.is_zero() => Case::II,
            _ => Case::I,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Schedule {
    pub case: Case,
    pub a: Ext,
    pub b: Ext,
    /// `log ell_p`, index 0 holding `p = 1`.
    pub log_ell: Vec<f64>,
    pub log_gamma: Vec<f64>,
    /// Auxiliary seed `log ell_0` for the cases that define one.
    pub log_ell0: Option<f64>,
    pub index_shift: usize,
    /// Per-step increments of `log ell`, `log(gamma ell)` and `log(gamma' ell' / ell)`.
    pub d_ell: Vec<Inc>,
    pub d_ge: Vec<Inc>,
    pub next_ratio: Vec<Inc>,
}

/// `c + k * log(1 + e^{-y})`. Step increments are kept in this form so the
/// small correction term survives next to huge logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inc {
    pub c: f64,
    pub k: f64,
    pub y: f64,
}

impl Inc {
    fn new(c: f64, k: f64, y: f64) -> Self {
        Inc { c, k, y }
    }

    pub fn value(&self) -> f64 {
        self.c + self.k * (-self.y).exp().ln_1p()
    }

    /// `log(value)`, `-inf` when the value is not positive.
    pub fn ln(&self) -> f64 {
        if self.c == 0.0 && self.k > 0.0 {
            return self.k.ln() + ln_ln1p_exp_neg(self.y);
        }
        let v = self.value();
        if v > 0.0 {
            v.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// `log(log(1 + e^{-y}))` without underflow.
fn ln_ln1p_exp_neg(y: f64) -> f64 {
    if y > 30.0 {
        -y - 0.5 * (-y).exp()
    } else if y < -30.0 {
        (-y).ln()
    } else {
        (-y).exp().ln_1p().ln()
    }
}

/// `log(e^d - 1)` for `d > 0`.
fn ln_expm1(d: f64) -> f64 {
    if d > 30.0 {
        d + (-(-d).exp()).ln_1p()
    } else {
        d.exp_m1().ln()
    }
}

/// `log(e^x + e^y)`
fn log_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub fn make_schedule(a: Ext, b: Ext, terms: usize) -> Result<Schedule> {
    if terms < 2 {
        return Err(Error::domain("need at least 2 terms"));
    }
    let case = Case::of(a, b)?;
    let (af, bf) = (a.finite().unwrap_or(f64::INFINITY), b.finite().unwrap_or(f64::INFINITY));
    let le1 = match case {
        Case::I | Case::II => (bf.powi(-2) + 1.0).ln(),
        Case::III => (af + 1.0).ln(),
        Case::IV | Case::V | Case::VI => 0.0,
    };
    let log_ell0 = matches!(case, Case::II | Case::VI).then_some(le1);
    let mut le = vec![le1];
    let mut d_ell = Vec::new();
    let mut d_ge = Vec::new();
    let mut next_ratio = Vec::new();
    for p in 1..terms {
        let cur = le[p - 1];
        let prev = if p >= 2 { le[p - 2] } else { log_ell0.unwrap_or(cur) };
        let even = p % 2 == 0;
        let y = cur / 2.0;
        // log ell_{p+1} - log ell_p
        let de = match case {
            Case::I if even => Inc::new((bf / af).ln(), 1.0, y),
            Case::II if even => Inc::new(bf.ln() + cur / 2.0, 1.0, y),
            Case::III if even => Inc::new(cur - af.ln(), 1.0, y),
            Case::VI if even => Inc::new(1.5 * cur, 1.0, y),
            _ => Inc::new(0.0, 1.0, y),
        };
        // log(gamma_{p+1} ell_{p+1}) - log(gamma_p ell_p)
        let dg = match case {
            Case::I if !even => Inc::new((bf / af).ln(), 1.0, y),
            Case::II if !even => Inc::new(bf.ln() + prev / 2.0, 1.0, y),
            Case::III if !even => Inc::new(cur - af.ln(), 2.0, y),
            Case::IV => Inc::new(0.0, 0.5, y),
            Case::V => Inc::new(0.0, 2.0, y),
            Case::VI if !even => Inc::new(cur + prev / 2.0, 2.0, y),
            _ => Inc::new(0.0, 1.0, y),
        };
        // log(gamma_{p+1} ell_{p+1} / ell_p)
        let r = match case {
            Case::I | Case::II => Inc::new(bf.ln(), 1.0, y),
            Case::III | Case::VI if even => Inc::new(cur, 1.0, y),
            Case::III | Case::V | Case::VI => Inc::new(cur, 2.0, y),
            Case::IV => Inc::new(-cur / 2.0, 0.5, y),
        };
        le.push(cur + de.value());
        d_ell.push(de);
        d_ge.push(dg);
        next_ratio.push(r);
    }
    let lg = (1..=terms)
        .map(|p| {
            let even = p % 2 == 0;
            let here = le[p - 1];
            let prev = if p >= 2 { le[p - 2] } else { log_ell0.unwrap_or(here) };
            match case {
                Case::I if even => bf.ln(),
                Case::I => af.ln(),
                Case::II if even => bf.ln(),
                Case::VI if even => here,
                Case::II | Case::VI => -prev / 2.0,
                Case::III if even => here,
                Case::III => af.ln(),
                Case::IV => -here / 2.0,
                Case::V => here,
            }
        })
        .collect();
    Ok(Schedule { case, a, b, log_ell: le, log_gamma: lg, log_ell0, index_shift: 0, d_ell, d_ge, next_ratio })
}

impl Schedule {
    /// Schedule with explicit `ell_p` and `gamma_p`, used for toy runs where the
    /// generated sequences are too large to reach.
    pub fn custom(a: Ext, b: Ext, ell: &[f64], gamma: &[f64]) -> Result<Schedule> {
        let case = Case::of(a, b)?;
        if ell.is_empty() || ell.len() != gamma.len() {
            return Err(Error::domain("ell and gamma must be non-empty and of equal length"));
        }
        if ell.iter().chain(gamma).any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::domain("ell and gamma must be positive and finite"));
        }
        let log_ell: Vec<f64> = ell.iter().map(|x| x.ln()).collect();
        let log_gamma: Vec<f64> = gamma.iter().map(|x| x.ln()).collect();
        let plain = |c: f64| Inc { c, k: 0.0, y: 0.0 };
        let steps = 1..ell.len();
        let d_ell = steps.clone().map(|p| plain(log_ell[p] - log_ell[p - 1])).collect();
        let d_ge = steps
            .clone()
            .map(|p| plain(log_gamma[p] + log_ell[p] - log_gamma[p - 1] - log_ell[p - 1]))
            .collect();
        let next_ratio = steps.map(|p| plain(log_gamma[p] + log_ell[p] - log_ell[p - 1])).collect();
        Ok(Schedule { case, a, b, log_ell, log_gamma, log_ell0: None, index_shift: 0, d_ell, d_ge, next_ratio })
    }

    pub fn len(&self) -> usize {
        self.log_ell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_ell.is_empty()
    }

    /// 1-based accessors.
    pub fn ell(&self, p: usize) -> f64 {
        self.log_ell[p - 1].exp()
    }

    pub fn gamma(&self, p: usize) -> f64 {
        self.log_gamma[p - 1].exp()
    }

    pub fn log_gamma_ell(&self, p: usize) -> f64 {
        self.log_gamma[p - 1] + self.log_ell[p - 1]
    }

    /// `gamma_p * ell_p`, which is `log e^{gamma_p ell_p}`; may be `inf`.
    pub fn gamma_ell(&self, p: usize) -> f64 {
        self.log_gamma_ell(p).exp()
    }

    /// Index of `p` before any shift; parities are taken from it.
    pub fn original_index(&self, p: usize) -> usize {
        p + self.index_shift
    }

    /// Multiply `gamma_p` by `factor`, keeping the stored increments consistent.
    pub fn scale_gamma(&mut self, p: usize, factor: f64) {
        let lf = factor.ln();
        self.log_gamma[p - 1] += lf;
        if p >= 2 {
            self.d_ge[p - 2].c += lf;
            self.next_ratio[p - 2].c += lf;
        }
        if p <= self.d_ge.len() {
            self.d_ge[p - 1].c -= lf;
        }
    }

    /// Indices `p` with `gamma_p ell_p + 1 > gamma_{p+1} ell_{p+1}`, compared as
    /// `log(1 + 1/(gamma_p ell_p)) <= log(gamma_{p+1} ell_{p+1}) - log(gamma_p ell_p)`.
    pub fn e_violations(&self) -> Vec<usize> {
        (1..self.len())
            .filter(|&p| !(ln_ln1p_exp_neg(self.log_gamma_ell(p)) <= self.d_ge[p - 1].ln()))
            .collect()
    }

    /// `log(ell_{p+1} - ell_p)`
    pub fn log_gap(&self, p: usize) -> f64 {
        let d = self.d_ell[p - 1];
        if d.c == 0.0 && d.k == 1.0 {
            // ell + sqrt(ell) - ell
            return self.log_ell[p - 1] / 2.0;
        }
        self.log_ell[p - 1] + ln_expm1(d.value())
    }

    /// `log(gamma_{p+1} ell_{p+1} / ell_p)`
    pub fn log_next_ratio(&self, p: usize) -> f64 {
        self.next_ratio[p - 1].value()
    }

    /// Drop a prefix so that `ell_{p+1} - ell_p >= k + t` for all kept `p` and
    /// `e^{gamma_1 ell_1} >= 2k + t`. The drop is even so parities survive.
    pub fn shift_indices(&self, k: usize, t: usize) -> Result<Schedule> {
        let need_gap = ((k + t) as f64).ln();
        let need_gam = ((2 * k + t) as f64).ln();
        let n = self.len();
        // first p after which every generated gap is large enough
        let mut start = 1;
        for p in (1..n).rev() {
            if !(self.log_gap(p) >= need_gap) {
                start = p + 1;
                break;
            }
        }
        if start % 2 == 0 {
            start += 1;
        }
        while start <= n && !(self.gamma_ell(start) >= need_gam) {
            start += 2;
        }
        if start + 1 > n {
            return Err(Error::domain(format!(
                "schedule of {n} terms too short to satisfy gap {} and e^(gamma ell) >= {}",
                k + t,
                2 * k + t
            )));
        }
        let drop = start - 1;
        Ok(Schedule {
            case: self.case,
            a: self.a,
            b: self.b,
            log_ell: self.log_ell[drop..].to_vec(),
            log_gamma: self.log_gamma[drop..].to_vec(),
            log_ell0: if drop == 0 { self.log_ell0 } else { Some(self.log_ell[drop - 1]) },
            index_shift: self.index_shift + drop,
            d_ell: self.d_ell[drop..].to_vec(),
            d_ge: self.d_ge[drop..].to_vec(),
            next_ratio: self.next_ratio[drop..].to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub rel: f64,
    pub small: f64,
    pub large: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 0.05, small: 1e-3, large: 1e3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub e_violations: Vec<usize>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn non_increasing_by_parity(xs: &[(usize, f64)]) -> bool {
    [0, 1].iter().all(|&par| {
        let sub: Vec<f64> = xs.iter().filter(|(p, _)| p % 2 == par).map(|x| x.1).collect();
        sub.windows(2).all(|w| w[1] <= w[0])
    })
}

pub fn validate(s: &Schedule) -> Result<ValidationReport> {
    validate_with(s, Tolerances::default())
}

pub fn validate_with(s: &Schedule, tol: Tolerances) -> Result<ValidationReport> {
    let n = s.len();
    if n < 10 {
        return Err(Error::domain("validation needs at least 10 terms"));
    }
    let par = |p: usize| s.original_index(p) % 2;
    let mut checks = Vec::new();
    let tail: Vec<usize> = ((2 * n) / 3 + 1..=n).collect();

    // (a) terminal even/odd gamma against b/a
    let last_even = (1..=n).rev().find(|&p| par(p) == 0).unwrap();
    let last_odd = (1..=n).rev().find(|&p| par(p) == 1).unwrap();
    let target_ok = |p: usize, target: Ext| -> (bool, String) {
        let g = s.gamma(p);
        match target {
            Ext::Inf => {
                let prev = s.log_gamma[p - 3];
                let ok = g > tol.large && s.log_gamma[p - 1] > prev;
                (ok, format!("gamma_{p} = {g:.4e}"))
            }
            Ext::Finite(0.0) => (g < 0.05, format!("gamma_{p} = {g:.4e}")),
            Ext::Finite(v) => ((g - v).abs() <= tol.rel * v, format!("gamma_{p} = {g:.6} vs {v}")),
        }
    };
    let (ea, da) = target_ok(last_even, s.b);
    let (oa, doa) = target_ok(last_odd, s.a);
    checks.push(Check { name: "a", pass: ea && oa, detail: format!("{da}; {doa}") });

    // (b) gaps increase along each parity, eventually
    let gaps: Vec<(usize, f64)> = (1..n).map(|p| (par(p), s.log_gap(p))).collect();
    let mut p0 = None;
    for start in 0..=n / 2 {
        let ok = [0, 1].iter().all(|&q| {
            let sub: Vec<f64> = gaps[start..].iter().filter(|g| g.0 == q).map(|g| g.1).collect();
            sub.windows(2).all(|w| w[1] > w[0])
        });
        if ok {
            p0 = Some(start + 1);
            break;
        }
    }
    let grows = gaps.last().unwrap().1 > gaps[0].1;
    checks.push(Check {
        name: "b",
        pass: p0.is_some() && grows,
        detail: format!("increasing from p = {p0:?}; log gap {:.4} -> {:.4}", gaps[0].1, gaps.last().unwrap().1),
    });

    // (c) ell_p / e^{gamma_p ell_p} -> 0
    let c_log = |p: usize| s.log_ell[p - 1] - s.gamma_ell(p);
    let c_tail: Vec<(usize, f64)> = tail.iter().map(|&p| (par(p), c_log(p))).collect();
    let c_end = c_log(n).max(c_log(n - 1));
    checks.push(Check {
        name: "c",
        pass: c_end < tol.small.ln() && non_increasing_by_parity(&c_tail),
        detail: format!("log ratio at end {c_end:.4e}"),
    });

    // (d) limsup gamma_{p+1} ell_{p+1} / ell_p <= b
    let d = match s.b {
        Ext::Inf => Check { name: "d", pass: true, detail: "b = inf, vacuous".into() },
        Ext::Finite(b) => {
            let worst = tail
                .iter()
                .filter(|&&p| p < n)
                .map(|&p| s.log_next_ratio(p).exp())
                .fold(f64::NEG_INFINITY, f64::max);
            let bound = if b == 0.0 { 0.05 } else { b * (1.0 + tol.rel) };
            Check { name: "d", pass: worst <= bound, detail: format!("tail max {worst:.6} vs {bound:.6}") }
        }
    };
    checks.push(d);

    // (e) exact, every index
    let e_violations = s.e_violations();
    checks.push(Check {
        name: "e",
        pass: e_violations.is_empty(),
        detail: match e_violations.first() {
            None => format!("holds for p = 1..{}", n - 1),
            Some(p) => format!("{} violations, first at p = {p}", e_violations.len()),
        },
    });

    // (f) (cp + sum ell_j) / e^{gamma_p ell_p} -> 0
    for c in [0.0f64, 10.0] {
        let mut acc = f64::NEG_INFINITY;
        let mut f_log = Vec::with_capacity(n);
        for p in 1..=n {
            acc = log_add(acc, s.log_ell[p - 1]);
            let num = if c > 0.0 { log_add(acc, (c * s.original_index(p) as f64).ln()) } else { acc };
            f_log.push(num - s.gamma_ell(p));
        }
        let f_tail: Vec<(usize, f64)> = tail.iter().map(|&p| (par(p), f_log[p - 1])).collect();
        let end = f_log[n - 1].max(f_log[n - 2]);
        checks.push(Check {
            name: if c == 0.0 { "f0" } else { "f10" },
            pass: end < tol.small.ln() && non_increasing_by_parity(&f_tail),
            detail: format!("log ratio at end {end:.4e}"),
        });
    }
    Ok(ValidationReport { checks, e_violations })
}
