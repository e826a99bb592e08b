//! Deterministic probabilistic automata and the language-level operations on them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::prob::EpsProb;
use crate::{Error, Result};

pub type StateId = usize;
pub type EventId = usize;

/// Ordered events: the controllable ones come first, so event `i < m` is σ_{i+1}
/// of the control-pattern numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    controllable: usize,
    observable: Vec<bool>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(controllable: &[S], uncontrollable: &[S], observable: &[S]) -> Result<Self> {
        let names: Vec<String> =
            controllable.iter().chain(uncontrollable).map(|s| s.as_ref().to_string()).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if n.is_empty() || n.chars().any(char::is_whitespace) {
                return Err(Error::InvalidAutomaton(format!("bad event name `{n}`")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidAutomaton(format!("event `{n}` declared twice")));
            }
        }
        let mut alphabet = Alphabet { observable: vec![false; names.len()], names, controllable: controllable.len() };
        for o in observable {
            let e = alphabet.index(o.as_ref()).ok_or_else(|| Error::UnknownEvent(o.as_ref().to_string()))?;
            alphabet.observable[e] = true;
        }
        Ok(alphabet)
    }

    /// Same events, different observable subset.
    pub fn with_observable<S: AsRef<str>>(&self, observable: &[S]) -> Result<Self> {
        let names: Vec<&str> = self.names.iter().map(String::as_str).collect();
        let observable: Vec<&str> = observable.iter().map(AsRef::as_ref).collect();
        Alphabet::new(&names[..self.controllable], &names[self.controllable..], &observable)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n_controllable(&self) -> usize {
        self.controllable
    }

    pub fn events(&self) -> std::ops::Range<EventId> {
        0..self.names.len()
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.names[e]
    }

    pub fn index(&self, name: &str) -> Option<EventId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_controllable(&self, e: EventId) -> bool {
        e < self.controllable
    }

    pub fn is_observable(&self, e: EventId) -> bool {
        self.observable[e]
    }

    pub fn observable_events(&self) -> impl Iterator<Item = EventId> + '_ {
        self.events().filter(|&e| self.observable[e])
    }

    pub fn unobservable_events(&self) -> impl Iterator<Item = EventId> + '_ {
        self.events().filter(|&e| !self.observable[e])
    }

    pub fn parse_string(&self, words: &[&str]) -> Result<Vec<EventId>> {
        words.iter().map(|w| self.index(w).ok_or_else(|| Error::UnknownEvent(w.to_string()))).collect()
    }

    /// Event names joined by `.`, or `ε` for the empty string.
    pub fn format_string(&self, s: &[EventId]) -> String {
        if s.is_empty() {
            return "ε".to_string();
        }
        s.iter().map(|&e| self.name(e)).collect::<Vec<_>>().join(".")
    }

    pub(crate) fn ensure_same(&self, other: &Alphabet) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(format!(
                "[{}] vs [{}]",
                self.describe(),
                other.describe()
            )))
        }
    }

    fn describe(&self) -> String {
        self.events()
            .map(|e| {
                let c = if self.is_controllable(e) { "c" } else { "uc" };
                let o = if self.is_observable(e) { "o" } else { "uo" };
                format!("{}:{c}/{o}", self.name(e))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub target: StateId,
    pub prob: EpsProb,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pdes {
    alphabet: Alphabet,
    names: Vec<String>,
    initial: StateId,
    delta: Vec<Vec<Option<Transition>>>,
}

impl Pdes {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_name(&self, x: StateId) -> &str {
        &self.names[x]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn transition(&self, x: StateId, e: EventId) -> Option<&Transition> {
        self.delta[x][e].as_ref()
    }

    pub fn target(&self, x: StateId, e: EventId) -> Option<StateId> {
        self.delta[x][e].as_ref().map(|t| t.target)
    }

    /// ρ(x, σ), zero where undefined.
    pub fn prob(&self, x: StateId, e: EventId) -> EpsProb {
        self.delta[x][e].as_ref().map_or_else(EpsProb::zero, |t| t.prob.clone())
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, &Transition)> + '_ {
        self.delta
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().enumerate().filter_map(move |(e, t)| t.as_ref().map(|t| (x, e, t))))
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions().count()
    }

    pub fn run(&self, s: &[EventId]) -> Option<StateId> {
        s.iter().try_fold(self.initial, |x, &e| self.target(x, e))
    }

    /// Σ_σ ρ(x, σ) under dominant-term addition.
    pub fn liveness(&self, x: StateId) -> EpsProb {
        self.delta[x].iter().flatten().fold(EpsProb::zero(), |acc, t| acc.sum_lower(&t.prob))
    }

    pub fn check_liveness(&self) -> Result<()> {
        for x in self.states() {
            let l = self.liveness(x);
            if l > EpsProb::one() {
                return Err(Error::InvalidAutomaton(format!(
                    "outgoing probability at state `{}` sums to {l} > 1",
                    self.state_name(x)
                )));
            }
        }
        Ok(())
    }

    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<Pdes> {
        if alphabet.names != self.alphabet.names || alphabet.controllable != self.alphabet.controllable {
            return Err(Error::AlphabetMismatch("event lists differ".into()));
        }
        Ok(Pdes { alphabet, ..self.clone() })
    }

    pub fn with_observable<S: AsRef<str>>(&self, observable: &[S]) -> Result<Pdes> {
        self.with_alphabet(self.alphabet.with_observable(observable)?)
    }

    /// Drops every transition whose probability is infinitesimal, then trims.
    pub fn without_infinitesimal(&self) -> Pdes {
        let mut out = self.clone();
        for row in &mut out.delta {
            for t in row.iter_mut() {
                if t.as_ref().is_some_and(|t| t.prob.is_infinitesimal()) {
                    *t = None;
                }
            }
        }
        accessible(&out)
    }

    /// Renames states; names must be unique.
    pub fn renamed(&self, names: Vec<String>) -> Result<Pdes> {
        if names.len() != self.names.len() {
            return Err(Error::InvalidAutomaton("wrong number of state names".into()));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidAutomaton("duplicate state names".into()));
        }
        Ok(Pdes { names, ..self.clone() })
    }
}

pub struct PdesBuilder {
    alphabet: Alphabet,
    names: Vec<String>,
    index: HashMap<String, StateId>,
    initial: Option<StateId>,
    delta: Vec<Vec<Option<Transition>>>,
}

impl PdesBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        PdesBuilder { alphabet, names: Vec::new(), index: HashMap::new(), initial: None, delta: Vec::new() }
    }

    /// Returns the id of `name`, creating the state if needed.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&x) = self.index.get(name) {
            return x;
        }
        let x = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), x);
        self.delta.push(vec![None; self.alphabet.len()]);
        x
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn initial(&mut self, x: StateId) -> &mut Self {
        self.initial = Some(x);
        self
    }

    pub fn transition(&mut self, x: StateId, e: EventId, y: StateId, prob: EpsProb) -> Result<&mut Self> {
        if prob.is_zero() {
            return Err(Error::InvalidAutomaton(format!(
                "zero-probability transition {} --{}--> {}",
                self.names[x],
                self.alphabet.name(e),
                self.names[y]
            )));
        }
        if self.delta[x][e].is_some() {
            return Err(Error::InvalidAutomaton(format!(
                "nondeterministic: state `{}` has two `{}` transitions",
                self.names[x],
                self.alphabet.name(e)
            )));
        }
        self.delta[x][e] = Some(Transition { target: y, prob });
        Ok(self)
    }

    pub fn build(self) -> Result<Pdes> {
        let initial = self.initial.ok_or_else(|| Error::InvalidAutomaton("no initial state".into()))?;
        Ok(Pdes { alphabet: self.alphabet, names: self.names, initial, delta: self.delta })
    }
}

/// Explores `start` breadth-first through `next`, returning the discovered keys
/// in order and a transition list indexed by discovery position.
pub(crate) type Edges = Vec<Vec<(EventId, usize, EpsProb)>>;

pub(crate) fn explore<K, F>(start: K, mut next: F) -> (Vec<K>, Edges)
where
    K: Clone + Eq + std::hash::Hash,
    F: FnMut(&K) -> Vec<(EventId, K, EpsProb)>,
{
    let mut keys = vec![start.clone()];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut edges = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut out = Vec::new();
        for (e, k, p) in next(&keys[i].clone()) {
            let j = *index.entry(k.clone()).or_insert_with(|| {
                keys.push(k);
                keys.len() - 1
            });
            out.push((e, j, p));
        }
        edges.push(out);
        i += 1;
    }
    (keys, edges)
}

pub(crate) fn assemble(
    alphabet: &Alphabet,
    names: Vec<String>,
    edges: Edges,
) -> Pdes {
    let mut delta = vec![vec![None; alphabet.len()]; names.len()];
    for (x, out) in edges.into_iter().enumerate() {
        for (e, y, p) in out {
            delta[x][e] = Some(Transition { target: y, prob: p });
        }
    }
    Pdes { alphabet: alphabet.clone(), names, initial: 0, delta }
}

/// The reachable part, with states renumbered in breadth-first order.
pub fn accessible(a: &Pdes) -> Pdes {
    let (keys, edges) = explore(a.initial, |&x| {
        a.alphabet.events().filter_map(|e| a.transition(x, e).map(|t| (e, t.target, t.prob.clone()))).collect()
    });
    let names = keys.iter().map(|&x| a.names[x].clone()).collect();
    assemble(&a.alphabet, names, edges)
}

/// L(s): the product of transition probabilities along `s`, zero if undefined.
pub fn eval_language(a: &Pdes, s: &[EventId]) -> EpsProb {
    let mut x = a.initial;
    let mut p = EpsProb::one();
    for &e in s {
        match a.transition(x, e) {
            Some(t) => {
                p = &p * &t.prob;
                x = t.target;
            }
            None => return EpsProb::zero(),
        }
    }
    p
}

/// Synchronous product; a transition exists where both operands define one and
/// carries the smaller probability.
pub fn product(a: &Pdes, b: &Pdes) -> Result<Pdes> {
    a.alphabet.ensure_same(&b.alphabet)?;
    let (keys, edges) = explore((a.initial, b.initial), |&(x, y)| {
        a.alphabet
            .events()
            .filter_map(|e| {
                let (ta, tb) = (a.transition(x, e)?, b.transition(y, e)?);
                Some((e, (ta.target, tb.target), ta.prob.clone().min(tb.prob.clone())))
            })
            .collect()
    });
    let names = keys.iter().map(|&(x, y)| format!("({},{})", a.names[x], b.names[y])).collect();
    Ok(assemble(&a.alphabet, names, edges))
}

/// A counterexample: the string(s) reaching the violation, the event, and the
/// two sides of the inequality or equation that failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub strings: Vec<Vec<EventId>>,
    pub event: EventId,
    pub lhs: EpsProb,
    pub rhs: EpsProb,
}

impl Witness {
    pub fn line(&self, alphabet: &Alphabet) -> String {
        let mut out = String::from("WITNESS");
        if self.strings.len() == 1 {
            out.push_str(&format!(" s={}", alphabet.format_string(&self.strings[0])));
        } else {
            for (i, s) in self.strings.iter().enumerate() {
                out.push_str(&format!(" s{}={}", i + 1, alphabet.format_string(s)));
            }
        }
        out.push_str(&format!(" event={} lhs={} rhs={}", alphabet.name(self.event), self.lhs, self.rhs));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// Shortest path labels back to the root of a breadth-first exploration.
pub(crate) fn path_to(parent: &[Option<(usize, EventId)>], mut i: usize) -> Vec<EventId> {
    let mut s = Vec::new();
    while let Some((p, e)) = parent[i] {
        s.push(e);
        i = p;
    }
    s.reverse();
    s
}

/// Checks L_a(sσ)/L_a(s) ≤ L_b(sσ)/L_b(s) on the support of `a`. Because both
/// automata are deterministic each ratio is a single stored ρ, so the check walks
/// the synchronized pair graph; the witness is a shortest violating `(s, σ)`.
pub fn is_sublanguage(a: &Pdes, b: &Pdes) -> Result<Verdict> {
    a.alphabet.ensure_same(&b.alphabet)?;
    let mut pairs = vec![(a.initial, b.initial)];
    let mut parent: Vec<Option<(usize, EventId)>> = vec![None];
    let mut seen = HashMap::from([((a.initial, b.initial), 0usize)]);
    let mut i = 0;
    while i < pairs.len() {
        let (x, y) = pairs[i];
        for e in a.alphabet.events() {
            let Some(ta) = a.transition(x, e) else { continue };
            let Some(tb) = b.transition(y, e).filter(|tb| ta.prob <= tb.prob) else {
                return Ok(Verdict::Fails(Witness {
                    strings: vec![path_to(&parent, i)],
                    event: e,
                    lhs: ta.prob.clone(),
                    rhs: b.prob(y, e),
                }));
            };
            let key = (ta.target, tb.target);
            if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(key) {
                slot.insert(pairs.len());
                pairs.push(key);
                parent.push(Some((i, e)));
            }
        }
        i += 1;
    }
    Ok(Verdict::Holds)
}

/// State-wise containment, matching states by name.
pub fn is_subautomaton(a: &Pdes, b: &Pdes) -> bool {
    if a.alphabet != b.alphabet || a.names[a.initial] != b.names[b.initial] {
        return false;
    }
    a.states().all(|x| {
        let Some(y) = b.state_by_name(&a.names[x]) else { return false };
        a.alphabet.events().all(|e| match a.transition(x, e) {
            None => true,
            Some(ta) => b
                .transition(y, e)
                .is_some_and(|tb| b.names[tb.target] == a.names[ta.target] && ta.prob <= tb.prob),
        })
    })
}

/// L_a = L_b on every string.
pub fn language_equivalent(a: &Pdes, b: &Pdes) -> Result<bool> {
    a.alphabet.ensure_same(&b.alphabet)?;
    let mut seen = BTreeSet::from([(a.initial, b.initial)]);
    let mut stack = vec![(a.initial, b.initial)];
    while let Some((x, y)) = stack.pop() {
        for e in a.alphabet.events() {
            match (a.transition(x, e), b.transition(y, e)) {
                (None, None) => {}
                (Some(ta), Some(tb)) if ta.prob == tb.prob => {
                    if seen.insert((ta.target, tb.target)) {
                        stack.push((ta.target, tb.target));
                    }
                }
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

pub fn project(alphabet: &Alphabet, s: &[EventId]) -> Vec<EventId> {
    s.iter().copied().filter(|&e| alphabet.is_observable(e)).collect()
}

/// Subset construction over observable events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observer {
    pub cells: Vec<BTreeSet<StateId>>,
    pub initial: usize,
    pub delta: BTreeMap<(usize, EventId), usize>,
}

impl Observer {
    pub fn step(&self, cell: usize, e: EventId) -> Option<usize> {
        self.delta.get(&(cell, e)).copied()
    }

    /// The cell reached by the observable projection of `s`.
    pub fn cell_of(&self, alphabet: &Alphabet, s: &[EventId]) -> Option<usize> {
        project(alphabet, s).iter().try_fold(self.initial, |c, &e| self.step(c, e))
    }

    pub fn is_partition(&self, num_states: usize) -> bool {
        let mut count = vec![0usize; num_states];
        for cell in &self.cells {
            for &x in cell {
                count[x] += 1;
            }
        }
        count.iter().all(|&c| c <= 1)
    }
}

pub(crate) fn unobservable_closure(a: &Pdes, seed: impl IntoIterator<Item = StateId>) -> BTreeSet<StateId> {
    let mut set: BTreeSet<StateId> = seed.into_iter().collect();
    let mut stack: Vec<StateId> = set.iter().copied().collect();
    while let Some(x) = stack.pop() {
        for e in a.alphabet.unobservable_events() {
            if let Some(y) = a.target(x, e) {
                if set.insert(y) {
                    stack.push(y);
                }
            }
        }
    }
    set
}

pub fn observer(a: &Pdes) -> Observer {
    let start = unobservable_closure(a, [a.initial]);
    let (cells, edges) = explore(start, |cell: &BTreeSet<StateId>| {
        a.alphabet
            .observable_events()
            .filter_map(|e| {
                let next: Vec<StateId> = cell.iter().filter_map(|&x| a.target(x, e)).collect();
                (!next.is_empty()).then(|| (e, unobservable_closure(a, next), EpsProb::one()))
            })
            .collect()
    });
    let mut delta = BTreeMap::new();
    for (c, out) in edges.into_iter().enumerate() {
        for (e, d, _) in out {
            delta.insert((c, e), d);
        }
    }
    Observer { cells, initial: 0, delta }
}

/// Adds a probability-1 self-loop for each listed event wherever it is undefined.
/// The result is a structural device; its liveness may exceed one.
pub fn add_self_loops(a: &Pdes, events: &[EventId]) -> Pdes {
    let mut out = a.clone();
    for x in a.states() {
        for &e in events {
            if out.delta[x][e].is_none() {
                out.delta[x][e] = Some(Transition { target: x, prob: EpsProb::one() });
            }
        }
    }
    out
}

/// Every transition probability replaced by one.
pub fn logic(a: &Pdes) -> Pdes {
    let mut out = a.clone();
    for t in out.delta.iter_mut().flatten().flatten() {
        t.prob = EpsProb::one();
    }
    out
}

/// Completes `a` with a fresh sink state so every event is defined everywhere;
/// returns the automaton and the sink id.
pub(crate) fn sink_completion(a: &Pdes) -> (Pdes, StateId) {
    let mut out = a.clone();
    let mut name = "sink".to_string();
    while out.names.contains(&name) {
        name.push('\'');
    }
    let sink = out.names.len();
    out.names.push(name);
    out.delta.push(vec![None; a.alphabet.len()]);
    for row in &mut out.delta {
        for t in row.iter_mut() {
            if t.is_none() {
                *t = Some(Transition { target: sink, prob: EpsProb::one() });
            }
        }
    }
    (out, sink)
}

impl fmt::Display for Pdes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::write_automaton(self))
    }
}
