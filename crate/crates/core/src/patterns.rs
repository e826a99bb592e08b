//! Control patterns and the two equivalent supervisor encodings: distributions
//! over patterns and per-event scaling factors.
//!
//! Pattern `j` enables controllable event σ_i iff bit `i-1` of `j` is set, so
//! with `m = 2` the patterns are `00` (none), `01` (σ1), `10` (σ2), `11` (both).
//! Uncontrollable events are always enabled.

use num_traits::{One, Zero};

use crate::prob::Rat;
use crate::{Error, Result};

const MAX_CONTROLLABLE: usize = 24;

fn check_m(m: usize) -> Result<()> {
    if m > MAX_CONTROLLABLE {
        return Err(Error::InvalidControl(format!("{m} controllable events is too many to enumerate patterns")));
    }
    Ok(())
}

pub fn enables(pattern: usize, i: usize) -> bool {
    pattern >> i & 1 == 1
}

/// `IN`: row `i` is controllable event σ_{i+1}, column `j` is pattern `j`.
pub fn containment_matrix(m: usize) -> Vec<Vec<u8>> {
    (0..m).map(|i| (0..1usize << m).map(|j| enables(j, i) as u8).collect()).collect()
}

/// `IN` extended with `n - m` all-ones rows for the uncontrollable events.
pub fn complete_containment_matrix(m: usize, n: usize) -> Result<Vec<Vec<u8>>> {
    if n < m {
        return Err(Error::InvalidControl(format!("n = {n} < m = {m}")));
    }
    let mut rows = containment_matrix(m);
    rows.extend((m..n).map(|_| vec![1u8; 1 << m]));
    Ok(rows)
}

/// Pattern index as `m` bits, most significant (σ_m) first; `-` when `m = 0`.
pub fn pattern_bits(pattern: usize, m: usize) -> String {
    if m == 0 {
        return "-".to_string();
    }
    format!("{pattern:0m$b}")
}

pub fn parse_pattern_bits(text: &str, m: usize) -> Result<usize> {
    let bad = || Error::InvalidControl(format!("bad pattern `{text}` for {m} controllable events"));
    if m == 0 {
        return if text == "-" { Ok(0) } else { Err(bad()) };
    }
    if text.len() != m || !text.chars().all(|c| c == '0' || c == '1') {
        return Err(bad());
    }
    usize::from_str_radix(text, 2).map_err(|_| bad())
}

/// A probability vector over the `2^m` control patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternDistribution {
    m: usize,
    probs: Vec<Rat>,
}

impl PatternDistribution {
    pub fn new(m: usize, probs: Vec<Rat>) -> Result<Self> {
        check_m(m)?;
        if probs.len() != 1 << m {
            return Err(Error::InvalidControl(format!("expected {} pattern probabilities, got {}", 1 << m, probs.len())));
        }
        if probs.iter().any(|p| *p < Rat::zero()) {
            return Err(Error::InvalidControl("negative pattern probability".into()));
        }
        let total: Rat = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidControl(format!("pattern probabilities sum to {total}, not 1")));
        }
        Ok(PatternDistribution { m, probs })
    }

    pub fn point_mass(m: usize, pattern: usize) -> Result<Self> {
        check_m(m)?;
        let mut probs = vec![Rat::zero(); 1 << m];
        *probs.get_mut(pattern).ok_or_else(|| Error::InvalidControl(format!("no pattern {pattern}")))? = Rat::one();
        Ok(PatternDistribution { m, probs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    pub fn prob(&self, pattern: usize) -> &Rat {
        &self.probs[pattern]
    }

    /// Patterns with positive probability, in index order.
    pub fn support(&self) -> impl Iterator<Item = (usize, &Rat)> + '_ {
        self.probs.iter().enumerate().filter(|(_, p)| !p.is_zero())
    }
}

/// Per-event multipliers: `k_i ∈ [0,1]` for controllable events, exactly 1 otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingVector {
    m: usize,
    factors: Vec<Rat>,
}

impl ScalingVector {
    pub fn new(m: usize, factors: Vec<Rat>) -> Result<Self> {
        if factors.len() < m {
            return Err(Error::InvalidControl(format!("{} factors for {m} controllable events", factors.len())));
        }
        for (i, k) in factors.iter().enumerate() {
            if i < m && (*k < Rat::zero() || *k > Rat::one()) {
                return Err(Error::InvalidControl(format!("scaling factor {k} of event {} outside [0,1]", i + 1)));
            }
            if i >= m && !k.is_one() {
                return Err(Error::InvalidControl(format!(
                    "scaling factor {k} of uncontrollable event {} must be 1",
                    i + 1
                )));
            }
        }
        Ok(ScalingVector { m, factors })
    }

    pub fn ones(m: usize, n: usize) -> Self {
        ScalingVector { m, factors: vec![Rat::one(); n] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, i: usize) -> &Rat {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[Rat] {
        &self.factors
    }
}

/// `k_i = Σ_j p_j · ĪN(i,j)`.
pub fn marginals_of(dist: &PatternDistribution, n: usize) -> Result<ScalingVector> {
    let matrix = complete_containment_matrix(dist.m, n)?;
    let factors = matrix
        .iter()
        .map(|row| row.iter().zip(&dist.probs).filter(|(&b, _)| b == 1).map(|(_, p)| p).sum())
        .collect();
    Ok(ScalingVector { m: dist.m, factors })
}

/// A distribution with the given marginals, built from nested patterns: order
/// the controllable events by factor (largest first, ties by index) and give
/// the pattern enabling the top `j` of them `k_(j) - k_(j+1)`.
pub fn distribution_from_marginals(k: &ScalingVector) -> Result<PatternDistribution> {
    let m = k.m;
    check_m(m)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| k.factors[b].cmp(&k.factors[a]).then(a.cmp(&b)));
    let mut probs = vec![Rat::zero(); 1 << m];
    let mut pattern = 0usize;
    let mut above = Rat::one();
    for &i in &order {
        probs[pattern] += &above - &k.factors[i];
        above = k.factors[i].clone();
        pattern |= 1 << i;
    }
    probs[pattern] += above;
    PatternDistribution::new(m, probs)
}
