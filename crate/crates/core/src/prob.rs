//! Exact probabilities, extended with an infinitesimal `0+`.
//!
//! An [`EpsProb`] is a term `c·ε^d`: an ordinary rational when `d = 0`,
//! otherwise positive but smaller than every positive rational.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::Error;

pub type Rat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.375` (exactly).
pub fn parse_rat(text: &str) -> Result<Rat, Error> {
    let bad = || Error::BadProbability(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let all_digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
        if !all_digits(int_digits) || !all_digits(frac) || (int_digits.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let digits = format!("{int_digits}{frac}");
        let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rat::new(numer, denom);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EpsProb {
    mag: Rat,
    deg: u32,
}

impl EpsProb {
    pub fn zero() -> Self {
        EpsProb { mag: Rat::zero(), deg: 0 }
    }

    pub fn one() -> Self {
        EpsProb { mag: Rat::one(), deg: 0 }
    }

    /// The infinitesimal `0+` raised to `deg`.
    pub fn eps(deg: u32) -> Self {
        EpsProb { mag: Rat::one(), deg }
    }

    pub fn new(mag: Rat, deg: u32) -> Result<Self, Error> {
        if mag.is_negative() {
            return Err(Error::BadProbability(format!("{mag}")));
        }
        if mag.is_zero() {
            return Ok(Self::zero());
        }
        Ok(EpsProb { mag, deg })
    }

    pub fn ordinary(r: Rat) -> Result<Self, Error> {
        Self::new(r, 0)
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::new(rat(n, d), 0).expect("non-negative ratio")
    }

    pub fn magnitude(&self) -> &Rat {
        &self.mag
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    pub fn is_ordinary(&self) -> bool {
        self.deg == 0
    }

    pub fn is_infinitesimal(&self) -> bool {
        !self.is_zero() && self.deg > 0
    }

    /// The rational value, if this is not infinitesimal.
    pub fn as_rat(&self) -> Option<&Rat> {
        self.is_ordinary().then_some(&self.mag)
    }

    /// Dominant-term sum: the lower ε-degree wins, equal degrees add.
    pub fn sum_lower(&self, other: &EpsProb) -> EpsProb {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        match self.deg.cmp(&other.deg) {
            Ordering::Less => self.clone(),
            Ordering::Greater => other.clone(),
            Ordering::Equal => EpsProb { mag: &self.mag + &other.mag, deg: self.deg },
        }
    }

    /// Division by a positive ordinary rational.
    pub fn div_rat(&self, r: &Rat) -> Option<EpsProb> {
        if !r.is_positive() {
            return None;
        }
        Some(EpsProb { mag: &self.mag / r, deg: if self.is_zero() { 0 } else { self.deg } })
    }

    pub fn mul_rat(&self, r: &Rat) -> EpsProb {
        EpsProb::new(&self.mag * r, self.deg).unwrap_or_else(|_| EpsProb::zero())
    }

    pub fn to_f64(&self) -> f64 {
        if self.deg > 0 {
            0.0
        } else {
            rat_to_f64(&self.mag)
        }
    }
}

pub fn eps_mul(a: &EpsProb, b: &EpsProb) -> EpsProb {
    if a.is_zero() || b.is_zero() {
        return EpsProb::zero();
    }
    EpsProb { mag: &a.mag * &b.mag, deg: a.deg + b.deg }
}

pub fn eps_cmp(a: &EpsProb, b: &EpsProb) -> Ordering {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => b.deg.cmp(&a.deg).then_with(|| a.mag.cmp(&b.mag)),
    }
}

pub fn eps_sum_lower(a: &EpsProb, b: &EpsProb) -> EpsProb {
    a.sum_lower(b)
}

impl Ord for EpsProb {
    fn cmp(&self, other: &Self) -> Ordering {
        eps_cmp(self, other)
    }
}

impl PartialOrd for EpsProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &EpsProb {
    type Output = EpsProb;
    fn mul(self, rhs: &EpsProb) -> EpsProb {
        eps_mul(self, rhs)
    }
}

impl Mul for EpsProb {
    type Output = EpsProb;
    fn mul(self, rhs: EpsProb) -> EpsProb {
        eps_mul(&self, &rhs)
    }
}

impl From<Rat> for EpsProb {
    fn from(r: Rat) -> Self {
        EpsProb::ordinary(r).expect("non-negative rational")
    }
}

impl fmt::Display for EpsProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.deg == 0 {
            return write!(f, "{}", self.mag);
        }
        write!(f, "0+")?;
        if self.deg > 1 {
            write!(f, "^{}", self.deg)?;
        }
        if !self.mag.is_one() {
            write!(f, "·{}", self.mag)?;
        }
        Ok(())
    }
}

impl FromStr for EpsProb {
    type Err = Error;

    /// Accepts `p/q`, decimals, `0`, `0+`, `0+^d`, and `0+^d·p/q` (or `*`).
    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        let Some(rest) = t.strip_prefix("0+") else {
            return EpsProb::ordinary(parse_rat(t)?);
        };
        let (deg_part, mag_part) = match rest.find(['·', '*']) {
            Some(i) => {
                let sep = rest[i..].chars().next().unwrap().len_utf8();
                (&rest[..i], Some(&rest[i + sep..]))
            }
            None => (rest, None),
        };
        let deg = match deg_part.strip_prefix('^') {
            Some(d) => d.parse::<u32>().map_err(|_| Error::BadProbability(s.to_string()))?,
            None if deg_part.is_empty() => 1,
            None => return Err(Error::BadProbability(s.to_string())),
        };
        if deg == 0 {
            return Err(Error::BadProbability(s.to_string()));
        }
        let mag = match mag_part {
            Some(m) => parse_rat(m)?,
            None => Rat::one(),
        };
        if !mag.is_positive() {
            return Err(Error::BadProbability(s.to_string()));
        }
        EpsProb::new(mag, deg)
    }
}
