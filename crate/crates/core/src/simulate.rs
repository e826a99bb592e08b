//! Monte Carlo execution of a plant under a probabilistic supervisor.
//!
//! Every step rolls a fresh control pattern from the distribution of the current
//! observation class, then draws an event among those the pattern enables (or
//! termination, with the leftover mass). Trial `i` uses ChaCha8 stream `i` of
//! the configured seed, so reports do not depend on scheduling.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{Alphabet, EventId, Pdes};
use crate::patterns::enables;
use crate::prob::{rat_to_f64, Rat};
use crate::supervisor::{controlled_xi, SupervisorMap};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialConfig {
    pub trials: u64,
    pub max_depth: usize,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(trials: u64, max_depth: usize, seed: u64) -> Result<Self> {
        let cfg = TrialConfig { trials, max_depth, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Precondition("at least one trial is required".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Precondition("depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    pub count: u64,
    pub empirical: f64,
    /// Exact value of the controlled language on this string.
    pub target: Rat,
    /// Binomial standard error at the target probability.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyReport {
    pub trials: u64,
    /// Every prefix of every sampled run, including the empty string.
    pub entries: BTreeMap<Vec<EventId>, Frequency>,
}

impl FrequencyReport {
    pub fn get(&self, s: &[EventId]) -> Option<&Frequency> {
        self.entries.get(s)
    }

    /// Strings ordered by length, then lexicographically by event index.
    pub fn sorted(&self) -> Vec<(&Vec<EventId>, &Frequency)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn to_tsv(&self, alphabet: &Alphabet) -> String {
        let mut out = String::from("string\tcount\tempirical\ttarget\tstderr\n");
        for (s, f) in self.sorted() {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{}\t{:.6}\n",
                alphabet.format_string(s),
                f.count,
                f.empirical,
                f.target,
                f.stderr
            ));
        }
        out
    }
}

/// Plant and supervisor flattened to floats for sampling.
struct Sampler {
    m: usize,
    /// Per state: `(event, probability, target)` for each defined transition.
    moves: Vec<Vec<(EventId, f64, usize)>>,
    /// Per class (default class last): cumulative pattern distribution.
    patterns: Vec<Vec<(usize, f64)>>,
}

fn cumulative(items: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut acc = 0.0;
    items
        .map(|(x, p)| {
            acc += p;
            (x, acc)
        })
        .collect()
}

impl Sampler {
    fn new(plant: &Pdes, sup: &SupervisorMap) -> Result<Self> {
        let mut moves = Vec::with_capacity(plant.num_states());
        for x in plant.states() {
            let mut row = Vec::new();
            for e in plant.alphabet().events() {
                if let Some(t) = plant.transition(x, e) {
                    let p = t.prob.as_rat().ok_or_else(|| {
                        Error::Precondition(format!("simulation needs ordinary probabilities, found {}", t.prob))
                    })?;
                    row.push((e, rat_to_f64(p), t.target));
                }
            }
            moves.push(row);
        }
        let dist = |c| cumulative(sup.get(c).support().map(|(j, p)| (j, rat_to_f64(p))));
        let mut patterns: Vec<_> = (0..sup.classes().count).map(|c| dist(Some(c))).collect();
        patterns.push(dist(None));
        Ok(Sampler { m: plant.alphabet().n_controllable(), moves, patterns })
    }

    fn pick<T: Copy>(cum: &[(T, f64)], u: f64) -> Option<T> {
        cum.iter().find(|&&(_, c)| u < c).map(|&(x, _)| x)
    }

    fn trial(&self, plant: &Pdes, sup: &SupervisorMap, depth: usize, rng: &mut ChaCha8Rng) -> Vec<EventId> {
        let alphabet = plant.alphabet();
        let (mut x, mut class, mut s) = (plant.initial(), Some(sup.classes().initial), Vec::new());
        while s.len() < depth {
            let cum = &self.patterns[class.unwrap_or(self.patterns.len() - 1)];
            let u: f64 = rng.random::<f64>() * cum.last().map_or(1.0, |l| l.1);
            let theta = Self::pick(cum, u).unwrap_or((1 << self.m) - 1);
            let enabled = cumulative(
                self.moves[x]
                    .iter()
                    .enumerate()
                    .filter(|(_, &(e, _, _))| e >= self.m || enables(theta, e))
                    .map(|(i, &(_, p, _))| (i, p)),
            );
            let Some(i) = Self::pick(&enabled, rng.random::<f64>()) else { break };
            let (e, _, y) = self.moves[x][i];
            s.push(e);
            x = y;
            if alphabet.is_observable(e) {
                class = sup.classes().advance(class, e);
            }
        }
        s
    }
}

fn count_runs(sampler: &Sampler, plant: &Pdes, sup: &SupervisorMap, cfg: &TrialConfig) -> HashMap<Vec<EventId>, u64> {
    let run = |i: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i);
        sampler.trial(plant, sup, cfg.max_depth, &mut rng)
    };
    let add = |mut acc: HashMap<Vec<EventId>, u64>, s: Vec<EventId>| {
        *acc.entry(s).or_insert(0) += 1;
        acc
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..cfg.trials).into_par_iter().map(run).fold(HashMap::new, add).reduce(HashMap::new, |mut a, b| {
            for (s, n) in b {
                *a.entry(s).or_insert(0) += n;
            }
            a
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..cfg.trials).map(run).fold(HashMap::new(), add)
    }
}

pub fn run_trials(plant: &Pdes, sup: &SupervisorMap, cfg: &TrialConfig) -> Result<FrequencyReport> {
    cfg.validate()?;
    plant.alphabet().ensure_same(sup.alphabet())?;
    let sampler = Sampler::new(plant, sup)?;

    let mut counts: BTreeMap<Vec<EventId>, u64> = BTreeMap::new();
    for (s, n) in count_runs(&sampler, plant, sup, cfg) {
        for k in 0..=s.len() {
            *counts.entry(s[..k].to_vec()).or_insert(0) += n;
        }
    }

    let n = cfg.trials as f64;
    let mut targets: HashMap<Vec<EventId>, Rat> = HashMap::from([(Vec::new(), Rat::from_integer(1.into()))]);
    let mut entries = BTreeMap::new();
    for (s, count) in counts {
        // Keys arrive in lexicographic order, so every proper prefix is already known.
        let target = match s.split_last() {
            None => targets[&s].clone(),
            Some((&e, prefix)) => {
                let xi = controlled_xi(plant, sup, prefix, e)?;
                let xi = xi.as_rat().cloned().unwrap_or_default();
                let t = &targets[prefix] * xi;
                targets.insert(s.clone(), t.clone());
                t
            }
        };
        let p = rat_to_f64(&target);
        entries.insert(
            s,
            Frequency { count, empirical: count as f64 / n, target, stderr: (p * (1.0 - p) / n).sqrt() },
        );
    }
    Ok(FrequencyReport { trials: cfg.trials, entries })
}
