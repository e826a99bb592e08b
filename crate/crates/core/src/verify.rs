//! Deciding probabilistic controllability and observability.
//!
//! Both checks build a testing automaton whose dump state is reachable exactly
//! when the property fails, exploring breadth-first so the reported witness is
//! a shortest one. The `brute_*` functions check the definitions directly on
//! enumerated strings and serve as oracles.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::automaton::{path_to, project, EventId, Pdes, StateId, Verdict, Witness};
use crate::prob::EpsProb;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    State(usize),
    Dump,
}

/// `G_tc`: reachable plant/spec state pairs plus a dump state.
#[derive(Clone, Debug)]
pub struct ControllabilityTester {
    pub states: Vec<(StateId, StateId)>,
    pub edges: Vec<Vec<(EventId, Target)>>,
    pub witness: Option<Witness>,
}

impl ControllabilityTester {
    pub fn new(plant: &Pdes, spec: &Pdes) -> Result<Self> {
        plant.alphabet().ensure_same(spec.alphabet())?;
        let alphabet = plant.alphabet();
        let start = (plant.initial(), spec.initial());
        let mut states = vec![start];
        let mut index = HashMap::from([(start, 0usize)]);
        let mut parent: Vec<Option<(usize, EventId)>> = vec![None];
        let mut edges = Vec::new();
        let mut witness = None;
        let mut i = 0;
        while i < states.len() {
            let (x, q) = states[i];
            let mut out = Vec::new();
            for e in alphabet.events() {
                let (rho, rho_h) = (plant.prob(x, e), spec.prob(q, e));
                if !alphabet.is_controllable(e) && rho != rho_h {
                    out.push((e, Target::Dump));
                    if witness.is_none() {
                        witness = Some(Witness { strings: vec![path_to(&parent, i)], event: e, lhs: rho, rhs: rho_h });
                    }
                    continue;
                }
                let (Some(y), Some(r)) = (plant.target(x, e), spec.target(q, e)) else { continue };
                let j = *index.entry((y, r)).or_insert_with(|| {
                    states.push((y, r));
                    parent.push(Some((i, e)));
                    states.len() - 1
                });
                out.push((e, Target::State(j)));
            }
            edges.push(out);
            i += 1;
        }
        Ok(ControllabilityTester { states, edges, witness })
    }

    /// Pair states plus the dump state.
    pub fn state_count(&self) -> usize {
        self.states.len() + 1
    }

    pub fn verdict(&self) -> Verdict {
        self.witness.clone().map_or(Verdict::Holds, Verdict::Fails)
    }
}

/// Label of a `G_to` move: both strings advance, or only one of them on an
/// unobservable event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Both(EventId),
    First(EventId),
    Second(EventId),
}

type Quad = (StateId, StateId, StateId, StateId);

/// `G_to`: reachable quadruples `(x1, q1, x2, q2)` tracking two spec strings with
/// equal observations, plus a dump state.
#[derive(Clone, Debug)]
pub struct ObservabilityTester {
    pub states: Vec<Quad>,
    pub edges: Vec<Vec<(Move, Target)>>,
    pub witness: Option<Witness>,
}

impl ObservabilityTester {
    pub fn new(plant: &Pdes, spec: &Pdes) -> Result<Self> {
        plant.alphabet().ensure_same(spec.alphabet())?;
        let alphabet = plant.alphabet();
        let start = (plant.initial(), spec.initial(), plant.initial(), spec.initial());
        let mut states = vec![start];
        let mut index = HashMap::from([(start, 0usize)]);
        let mut parent: Vec<Option<(usize, Move)>> = vec![None];
        let mut edges = Vec::new();
        let mut witness = None;
        let both = |x: StateId, q: StateId, e: EventId| Some((plant.target(x, e)?, spec.target(q, e)?));
        let mut i = 0;
        while i < states.len() {
            let (x1, q1, x2, q2) = states[i];
            let mut out = Vec::new();
            let mut moves = Vec::new();
            for e in alphabet.events() {
                let lhs = &plant.prob(x1, e) * &spec.prob(q2, e);
                let rhs = &plant.prob(x2, e) * &spec.prob(q1, e);
                if alphabet.is_controllable(e) && lhs != rhs {
                    out.push((Move::Both(e), Target::Dump));
                    if witness.is_none() {
                        let (s1, s2) = split_path(&parent, i);
                        witness = Some(Witness { strings: vec![s1, s2], event: e, lhs, rhs });
                    }
                } else if let (Some((y1, r1)), Some((y2, r2))) = (both(x1, q1, e), both(x2, q2, e)) {
                    moves.push((Move::Both(e), (y1, r1, y2, r2)));
                }
                if !alphabet.is_observable(e) {
                    if let Some((y1, r1)) = both(x1, q1, e) {
                        moves.push((Move::First(e), (y1, r1, x2, q2)));
                    }
                    if let Some((y2, r2)) = both(x2, q2, e) {
                        moves.push((Move::Second(e), (x1, q1, y2, r2)));
                    }
                }
            }
            for (mv, next) in moves {
                let j = *index.entry(next).or_insert_with(|| {
                    states.push(next);
                    parent.push(Some((i, mv)));
                    states.len() - 1
                });
                out.push((mv, Target::State(j)));
            }
            edges.push(out);
            i += 1;
        }
        Ok(ObservabilityTester { states, edges, witness })
    }

    pub fn state_count(&self) -> usize {
        self.states.len() + 1
    }

    pub fn verdict(&self) -> Verdict {
        self.witness.clone().map_or(Verdict::Holds, Verdict::Fails)
    }
}

fn split_path(parent: &[Option<(usize, Move)>], mut i: usize) -> (Vec<EventId>, Vec<EventId>) {
    let (mut s1, mut s2) = (Vec::new(), Vec::new());
    while let Some((p, mv)) = parent[i] {
        match mv {
            Move::Both(e) => {
                s1.push(e);
                s2.push(e);
            }
            Move::First(e) => s1.push(e),
            Move::Second(e) => s2.push(e),
        }
        i = p;
    }
    s1.reverse();
    s2.reverse();
    (s1, s2)
}

pub fn check_controllable(plant: &Pdes, spec: &Pdes) -> Result<Verdict> {
    Ok(ControllabilityTester::new(plant, spec)?.verdict())
}

pub fn check_observable(plant: &Pdes, spec: &Pdes) -> Result<Verdict> {
    Ok(ObservabilityTester::new(plant, spec)?.verdict())
}

/// Checks `L(sσ)/L(s) = L_G(sσ)/L_G(s)` for every uncontrollable σ and every
/// spec string `s` with `|s| ≤ depth`, shortest strings first. Strings reaching
/// the same state pair at the same length are interchangeable, so each level
/// keeps one representative per pair.
pub fn brute_controllable(plant: &Pdes, spec: &Pdes, depth: usize) -> Result<Verdict> {
    plant.alphabet().ensure_same(spec.alphabet())?;
    let alphabet = plant.alphabet();
    let mut level: BTreeMap<(StateId, StateId), Vec<EventId>> =
        BTreeMap::from([((plant.initial(), spec.initial()), Vec::new())]);
    for len in 0..=depth {
        let mut ordered: Vec<(&(StateId, StateId), &Vec<EventId>)> = level.iter().collect();
        ordered.sort_by(|a, b| a.1.cmp(b.1));
        for (&(x, q), s) in &ordered {
            let (lg, lh) = (string_prob(plant, s), string_prob(spec, s));
            for e in alphabet.events().filter(|&e| !alphabet.is_controllable(e)) {
                let mut se = s.to_vec();
                se.push(e);
                // L_H(sσ)·L_G(s) = L_G(sσ)·L_H(s), the ratio condition without division.
                if &string_prob(spec, &se) * &lg != &string_prob(plant, &se) * &lh {
                    return Ok(Verdict::Fails(Witness {
                        strings: vec![s.to_vec()],
                        event: e,
                        lhs: plant.prob(x, e),
                        rhs: spec.prob(q, e),
                    }));
                }
            }
        }
        if len == depth {
            break;
        }
        let mut next = BTreeMap::new();
        for (&(x, q), s) in ordered {
            for e in alphabet.events() {
                if let (Some(y), Some(r)) = (plant.target(x, e), spec.target(q, e)) {
                    let mut se = s.clone();
                    se.push(e);
                    next.entry((y, r)).or_insert(se);
                }
            }
        }
        level = next;
    }
    Ok(Verdict::Holds)
}

fn string_prob(a: &Pdes, s: &[EventId]) -> EpsProb {
    crate::automaton::eval_language(a, s)
}

/// Checks the cross-product equation for every controllable σ and every pair of
/// spec strings with the same observation, for observations of length at most
/// `depth`. All strings with one observation `t` are gathered first (with their
/// unobservable continuations), then compared pairwise; an observation whose
/// set of reached state pairs was already examined is not extended again.
pub fn brute_observable(plant: &Pdes, spec: &Pdes, depth: usize) -> Result<Verdict> {
    plant.alphabet().ensure_same(spec.alphabet())?;
    let alphabet = plant.alphabet();
    // Every spec string with observation `t`, one representative per reached state pair.
    let gather = |seeds: Vec<((StateId, StateId), Vec<EventId>)>| {
        let mut found: BTreeMap<(StateId, StateId), Vec<EventId>> = BTreeMap::new();
        let mut stack = Vec::new();
        for (z, s) in seeds {
            if let Entry::Vacant(slot) = found.entry(z) {
                slot.insert(s.clone());
                stack.push((z, s));
            }
        }
        let mut i = 0;
        while i < stack.len() {
            let ((x, q), s) = stack[i].clone();
            for e in alphabet.unobservable_events() {
                if let (Some(y), Some(r)) = (plant.target(x, e), spec.target(q, e)) {
                    if let Entry::Vacant(slot) = found.entry((y, r)) {
                        let mut se = s.clone();
                        se.push(e);
                        slot.insert(se.clone());
                        stack.push(((y, r), se));
                    }
                }
            }
            i += 1;
        }
        found
    };
    let mut seen: BTreeSet<Vec<(StateId, StateId)>> = BTreeSet::new();
    let mut frontier = vec![gather(vec![((plant.initial(), spec.initial()), Vec::new())])];
    for len in 0..=depth {
        let mut next = Vec::new();
        for group in frontier {
            if !seen.insert(group.keys().copied().collect()) {
                continue;
            }
            let mut members: Vec<(&(StateId, StateId), &Vec<EventId>)> = group.iter().collect();
            members.sort_by(|a, b| (a.1.len(), a.1).cmp(&(b.1.len(), b.1)));
            for (a, &(&(x1, q1), s1)) in members.iter().enumerate() {
                for &(&(x2, q2), s2) in &members[a..] {
                    debug_assert_eq!(project(alphabet, s1), project(alphabet, s2));
                    for e in alphabet.events().filter(|&e| alphabet.is_controllable(e)) {
                        let lhs = &plant.prob(x1, e) * &spec.prob(q2, e);
                        let rhs = &plant.prob(x2, e) * &spec.prob(q1, e);
                        if lhs != rhs {
                            return Ok(Verdict::Fails(Witness {
                                strings: vec![s1.clone(), s2.clone()],
                                event: e,
                                lhs,
                                rhs,
                            }));
                        }
                    }
                }
            }
            if len < depth {
                for e in alphabet.observable_events() {
                    let seeds: Vec<_> = members
                        .iter()
                        .filter_map(|&(&(x, q), s)| {
                            let z = (plant.target(x, e)?, spec.target(q, e)?);
                            let mut se = s.clone();
                            se.push(e);
                            Some((z, se))
                        })
                        .collect();
                    if !seeds.is_empty() {
                        next.push(gather(seeds));
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(Verdict::Holds)
}
