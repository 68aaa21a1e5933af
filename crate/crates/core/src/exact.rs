//! Exact arithmetic in a real quadratic field `Q(sqrt d)`.
//!
//! Branch endpoints, cylinder intervals and diagram vertices are compared with
//! these numbers so that coinciding endpoints (for example `beta - 1 = 1/beta`
//! at the golden mean) are identified exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quad {
    a: BigRational,
    b: BigRational,
    // 1 whenever b == 0, so equal values hash equally
    d: u32,
}

impl Quad {
    pub fn rational(a: BigRational) -> Self {
        Quad { a, b: BigRational::zero(), d: 1 }
    }

    pub fn int(n: i64) -> Self {
        Quad::rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Quad::rational(BigRational::new(p.into(), q.into()))
    }

    /// `a + b sqrt(d)`; `d` must be square-free when `b != 0`.
    pub fn new(a: BigRational, b: BigRational, d: u32) -> Self {
        if b.is_zero() || d == 1 {
            let a = if d == 1 { a + b } else { a };
            return Quad::rational(a);
        }
        Quad { a, b, d }
    }

    pub fn zero() -> Self {
        Quad::int(0)
    }

    pub fn one() -> Self {
        Quad::int(1)
    }

    pub fn golden() -> Self {
        let h = BigRational::new(1.into(), 2.into());
        Quad::new(h.clone(), h, 5)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn field(&self) -> u32 {
        self.d
    }

    fn join(&self, other: &Quad) -> u32 {
        match (self.d, other.d) {
            (1, d) | (d, 1) => d,
            (x, y) if x == y => x,
            (x, y) => panic!("mixed quadratic fields sqrt({x}) and sqrt({y})"),
        }
    }

    pub fn signum(&self) -> Ordering {
        let sa = sign(&self.a);
        let sb = sign(&self.b);
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(self.d.into());
        if a2 > b2d {
            sa
        } else {
            sb
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        a + self.b.to_f64().unwrap_or(f64::NAN) * f64::from(self.d).sqrt()
    }

    pub fn recip(&self) -> Quad {
        assert!(!self.is_zero(), "division by zero");
        if self.b.is_zero() {
            return Quad::rational(self.a.recip());
        }
        let norm = &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into());
        Quad::new(&self.a / &norm, -(&self.b / &norm), self.d)
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        let approx = self.to_f64().floor();
        let mut n = BigInt::from(approx as i64);
        // the float guess can be off by one near integers
        while Quad::rational(BigRational::from_integer(n.clone())) > *self {
            n -= 1;
        }
        while Quad::rational(BigRational::from_integer(&n + 1)) <= *self {
            n += 1;
        }
        n
    }

    pub fn min(self, other: Quad) -> Quad {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Quad) -> Quad {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Accepts decimals (`2.5`, `-0.125`), fractions (`5/2`), `phi`, `sqrt(N)`,
    /// and `a+b*sqrt(N)` with rational `a`, `b`.
    pub fn parse(text: &str) -> Result<Quad> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = t.to_ascii_lowercase();
        if lower == "phi" || lower == "golden" {
            return Ok(Quad::golden());
        }
        if let Some(pos) = lower.find("sqrt(") {
            let close = lower[pos..].find(')').ok_or_else(|| Error::Parse(format!("bad number {text:?}")))? + pos;
            let n: u32 = lower[pos + 5..close].parse().map_err(|_| Error::Parse(format!("bad number {text:?}")))?;
            let head = &lower[..pos];
            let (a, b) = if head.is_empty() {
                (BigRational::zero(), BigRational::one())
            } else if let Some(split) = head.rfind(['+', '-']).filter(|&i| i > 0) {
                let a = parse_rational(&head[..split])?;
                let coef = head[split..].trim_end_matches('*');
                let b = match coef {
                    "+" => BigRational::one(),
                    "-" => -BigRational::one(),
                    c => parse_rational(c)?,
                };
                (a, b)
            } else {
                let coef = head.trim_end_matches('*');
                let b = match coef {
                    "-" => -BigRational::one(),
                    c => parse_rational(c)?,
                };
                (BigRational::zero(), b)
            };
            if close + 1 != lower.len() {
                return Err(Error::Parse(format!("trailing input in {text:?}")));
            }
            let (square, free) = split_square(n);
            let b = b * BigRational::from_integer(square.into());
            return Ok(Quad::new(a, b, free));
        }
        parse_rational(&lower).map(Quad::rational)
    }
}

fn sign(x: &BigRational) -> Ordering {
    if x.is_positive() {
        Ordering::Greater
    } else if x.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

fn split_square(n: u32) -> (u32, u32) {
    let mut square = 1;
    let mut free = n;
    let mut f = 2;
    while f * f <= free {
        while free % (f * f) == 0 {
            free /= f * f;
            square *= f;
        }
        f += 1;
    }
    (square, free)
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad number {text:?}"));
    let t = text.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int}{frac}");
    let num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quad {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            let sign = if self.b.is_negative() { "-" } else { "+" };
            write!(f, "{}{sign}{}*sqrt({})", self.a, self.b.abs(), self.d)
        }
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (~{})", self.to_f64())
    }
}

impl Add for &Quad {
    type Output = Quad;
    fn add(self, o: &Quad) -> Quad {
        let d = self.join(o);
        Quad::new(&self.a + &o.a, &self.b + &o.b, d)
    }
}

impl Sub for &Quad {
    type Output = Quad;
    fn sub(self, o: &Quad) -> Quad {
        let d = self.join(o);
        Quad::new(&self.a - &o.a, &self.b - &o.b, d)
    }
}

impl Mul for &Quad {
    type Output = Quad;
    fn mul(self, o: &Quad) -> Quad {
        let d = self.join(o);
        if self.b.is_zero() && o.b.is_zero() {
            return Quad::rational(&self.a * &o.a);
        }
        let dd = BigRational::from_integer(d.into());
        Quad::new(&self.a * &o.a + &self.b * &o.b * dd, &self.a * &o.b + &self.b * &o.a, d)
    }
}

impl Div for &Quad {
    type Output = Quad;
    fn div(self, o: &Quad) -> Quad {
        if o.b.is_zero() {
            assert!(!o.a.is_zero(), "division by zero");
            return Quad::new(&self.a / &o.a, &self.b / &o.a, self.d);
        }
        self * &o.recip()
    }
}

impl Neg for &Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad::new(-&self.a, -&self.b, self.d)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Quad {
            type Output = Quad;
            fn $m(self, o: Quad) -> Quad { (&self).$m(&o) }
        }
        impl $tr<&Quad> for Quad {
            type Output = Quad;
            fn $m(self, o: &Quad) -> Quad { (&self).$m(o) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        -(&self)
    }
}
