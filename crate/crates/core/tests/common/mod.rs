#![allow(dead_code)]

//! Random small automata and string-level reference semantics shared by the
//! integration tests.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use pdes_core::prob::rat;
use pdes_core::{
    accessible, controlled_automaton, eval_language, patterns::enables, project, Alphabet, EpsProb, EventId,
    ObservationClasses, Pdes, PdesBuilder, Rat, ScalingMap, ScalingVector, SupervisorMap,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONTROLLABLE: [&str; 4] = ["a", "b", "c", "d"];
const UNCONTROLLABLE: [&str; 4] = ["u", "v", "w", "z"];

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// One to `max_events` events, each side of the controllable split possibly empty.
    pub fn alphabet(&mut self, max_events: usize) -> Alphabet {
        let n = self.rng.random_range(1..=max_events);
        let m = self.rng.random_range(0..=n);
        let c = &CONTROLLABLE[..m];
        let u = &UNCONTROLLABLE[..n - m];
        let obs: Vec<&str> = c.iter().chain(u).copied().filter(|_| self.rng.random_bool(0.6)).collect();
        Alphabet::new(c, u, &obs).unwrap()
    }

    /// `k` positive rationals with sum at most one.
    pub fn prob_row(&mut self, k: usize) -> Vec<Rat> {
        let w: Vec<i64> = (0..k).map(|_| self.rng.random_range(1..=4)).collect();
        let total = w.iter().sum::<i64>() + self.rng.random_range(0..=2);
        w.into_iter().map(|x| rat(x, total)).collect()
    }

    pub fn plant(&mut self, alphabet: &Alphabet, max_states: usize) -> Pdes {
        let n = self.rng.random_range(1..=max_states);
        let mut b = PdesBuilder::new(alphabet.clone());
        let ids: Vec<_> = (0..n).map(|i| b.state(&format!("x{i}"))).collect();
        b.initial(ids[0]);
        for &x in &ids {
            let events: Vec<EventId> = alphabet.events().filter(|_| self.rng.random_bool(0.65)).collect();
            let row = self.prob_row(events.len());
            for (e, p) in events.into_iter().zip(row) {
                let y = ids[self.rng.random_range(0..n)];
                b.transition(x, e, y, EpsProb::from(p)).unwrap();
            }
        }
        accessible(&b.build().unwrap())
    }

    pub fn factor(&mut self) -> Rat {
        match self.rng.random_range(0..6) {
            0 => Rat::zero(),
            1 | 2 => Rat::one(),
            3 => rat(1, 2),
            4 => rat(1, 3),
            _ => rat(self.rng.random_range(1..=4), 5),
        }
    }

    pub fn scaling_vector(&mut self, alphabet: &Alphabet) -> ScalingVector {
        let m = alphabet.n_controllable();
        let factors = alphabet.events().map(|e| if e < m { self.factor() } else { Rat::one() }).collect();
        ScalingVector::new(m, factors).unwrap()
    }

    pub fn scaling_map(&mut self, plant: &Pdes) -> ScalingMap {
        let classes = ObservationClasses::of_plant(plant);
        let vectors = (0..classes.count).map(|_| self.scaling_vector(plant.alphabet())).collect();
        ScalingMap::new(plant.alphabet().clone(), classes, vectors).unwrap()
    }

    /// A spec reached by some probabilistic supervisor: controllable and observable.
    pub fn achievable_spec(&mut self, plant: &Pdes) -> Pdes {
        let k = self.scaling_map(plant);
        controlled_automaton(plant, &k).unwrap()
    }

    /// Scaled as if every event were observed: controllable, often not observable.
    pub fn controllable_spec(&mut self, plant: &Pdes) -> Pdes {
        let names: Vec<&str> = plant.alphabet().events().map(|e| plant.alphabet().name(e)).collect();
        let full = plant.with_observable(&names).unwrap();
        let k = self.scaling_map(&full);
        controlled_automaton(&full, &k).unwrap().with_alphabet(plant.alphabet().clone()).unwrap()
    }

    /// Sublanguage of the plant with per-transition drops and cuts, over up to two
    /// copies of each plant state.
    pub fn arbitrary_spec(&mut self, plant: &Pdes) -> Pdes {
        let mut b = PdesBuilder::new(plant.alphabet().clone());
        let names = |x: usize, c: usize| format!("{}#{c}", plant.state_name(x));
        let start = b.state(&names(plant.initial(), 0));
        b.initial(start);
        let mut seen = BTreeSet::from([(plant.initial(), 0)]);
        let mut stack = vec![(plant.initial(), 0)];
        while let Some((x, c)) = stack.pop() {
            let q = b.state(&names(x, c));
            for e in plant.alphabet().events() {
                let Some(t) = plant.transition(x, e) else { continue };
                if self.rng.random_bool(0.2) {
                    continue;
                }
                let f = if self.rng.random_bool(0.7) { Rat::one() } else { rat(1, 2) };
                let c2 = self.rng.random_range(0..2);
                let r = b.state(&names(t.target, c2));
                b.transition(q, e, r, t.prob.mul_rat(&f)).unwrap();
                if seen.insert((t.target, c2)) {
                    stack.push((t.target, c2));
                }
            }
        }
        accessible(&b.build().unwrap())
    }

    /// Mixes achievable, controllable-only and arbitrary specs.
    pub fn spec(&mut self, plant: &Pdes) -> Pdes {
        match self.rng.random_range(0..3) {
            0 => self.achievable_spec(plant),
            1 => self.controllable_spec(plant),
            _ => self.arbitrary_spec(plant),
        }
    }

    pub fn pattern_distribution(&mut self, m: usize) -> pdes_core::PatternDistribution {
        let mut patterns: Vec<usize> = (0..1usize << m).collect();
        patterns.shuffle(&mut self.rng);
        let k = self.rng.random_range(1..=patterns.len().min(4));
        let mut probs = vec![Rat::zero(); 1 << m];
        let row = self.prob_row(k);
        let rest = Rat::one() - row.iter().sum::<Rat>();
        for (i, p) in row.into_iter().enumerate() {
            probs[patterns[i]] = p;
        }
        probs[patterns[0]] += rest;
        pdes_core::PatternDistribution::new(m, probs).unwrap()
    }

    pub fn supervisor(&mut self, plant: &Pdes) -> SupervisorMap {
        let classes = ObservationClasses::of_plant(plant);
        let m = plant.alphabet().n_controllable();
        let dists = (0..classes.count).map(|_| self.pattern_distribution(m)).collect();
        SupervisorMap::new(plant.alphabet().clone(), classes, dists).unwrap()
    }
}

/// All strings over the alphabet of length at most `depth`, shortest first.
pub fn strings(alphabet: &Alphabet, depth: usize) -> Vec<Vec<EventId>> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in &level {
            for e in alphabet.events() {
                let mut t: Vec<EventId> = s.clone();
                t.push(e);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

pub fn value(a: &Pdes, s: &[EventId]) -> EpsProb {
    eval_language(a, s)
}

pub fn ordinary(p: &EpsProb) -> Rat {
    p.as_rat().cloned().expect("ordinary probability")
}

/// The intersection semantics on one string, from the two languages' values alone.
pub fn intersection(a: &Pdes, b: &Pdes, s: &[EventId]) -> Rat {
    let mut v = Rat::one();
    for k in 0..s.len() {
        let (pre, ext) = (&s[..k], &s[..=k]);
        let (a0, b0) = (ordinary(&value(a, pre)), ordinary(&value(b, pre)));
        if a0.is_zero() || b0.is_zero() {
            return Rat::zero();
        }
        let ra = ordinary(&value(a, ext)) / a0;
        let rb = ordinary(&value(b, ext)) / b0;
        v *= ra.min(rb);
    }
    v
}

/// The controlled language on one string: each step weighs the plant transition
/// by the total mass of the patterns enabling it at the current observation.
pub fn controlled_value(plant: &Pdes, sup: &SupervisorMap, s: &[EventId]) -> Rat {
    let alphabet = plant.alphabet();
    let m = alphabet.n_controllable();
    let mut v = Rat::one();
    for k in 0..s.len() {
        let e = s[k];
        let Some(x) = plant.run(&s[..k]) else { return Rat::zero() };
        let rho = ordinary(&plant.prob(x, e));
        let obs = project(alphabet, &s[..k]);
        let class = sup.classes().class_of(alphabet, &obs);
        let mass = if e < m {
            sup.get(class).support().filter(|&(j, _)| enables(j, e)).map(|(_, p)| p.clone()).sum::<Rat>()
        } else {
            Rat::one()
        };
        v *= rho * mass;
    }
    v
}

/// Membership of a string in the support of an automaton.
pub fn in_support(a: &Pdes, s: &[EventId]) -> bool {
    a.run(s).is_some()
}

/// Least set of strings up to `depth` that contains the spec's support and is
/// closed under uncontrollable extension and observation-consistent controllable
/// extension, inside the plant's support.
pub fn co_closure(plant: &Pdes, spec: &Pdes, depth: usize) -> BTreeSet<Vec<EventId>> {
    let alphabet = plant.alphabet();
    let all: Vec<Vec<EventId>> = strings(alphabet, depth).into_iter().filter(|s| in_support(plant, s)).collect();
    let mut k: BTreeSet<Vec<EventId>> = all.iter().filter(|s| in_support(spec, s)).cloned().collect();
    let mut by_obs: BTreeMap<Vec<EventId>, Vec<Vec<EventId>>> = BTreeMap::new();
    for s in &all {
        by_obs.entry(project(alphabet, s)).or_default().push(s.clone());
    }
    loop {
        let mut added = Vec::new();
        for s in &all {
            if s.is_empty() || k.contains(s) {
                continue;
            }
            let (&e, pre) = s.split_last().unwrap();
            if !k.contains(pre) {
                continue;
            }
            let forced = !alphabet.is_controllable(e)
                || by_obs[&project(alphabet, pre)].iter().any(|t| {
                    let mut te = t.clone();
                    te.push(e);
                    k.contains(t) && k.contains(&te)
                });
            if forced {
                added.push(s.clone());
            }
        }
        if added.is_empty() {
            return k;
        }
        k.extend(added);
    }
}
