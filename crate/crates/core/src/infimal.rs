//! The infimal probabilistic controllable and observable superlanguage.
//!
//! Three stages:
//! 1. [`inf_co_support`]: the least prefix-closed language between the spec's
//!    support and the plant's that is controllable and observable in the
//!    ordinary, non-probabilistic sense.
//! 2. [`refine_normal`]: re-express plant and spec over one state space whose
//!    observer cells partition the states, with `0+` on strings the spec gives
//!    no probability but the closure had to admit.
//! 3. [`algorithm3`]: restore the plant's uncontrollable probabilities and, per
//!    observer cell, scale every controllable event by the largest ratio any
//!    state of the cell asks for.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::automaton::{
    add_self_loops, assemble, explore, is_sublanguage, language_equivalent, logic, observer, sink_completion,
    Alphabet, EventId, Pdes, PdesBuilder, StateId, Verdict,
};
use crate::prob::EpsProb;
use crate::{Error, Result};

fn require_sublanguage(small: &Pdes, big: &Pdes, what: &str) -> Result<()> {
    match is_sublanguage(small, big)? {
        Verdict::Holds => Ok(()),
        Verdict::Fails(w) => Err(Error::Precondition(format!("{what}: {}", w.line(small.alphabet())))),
    }
}

/// Plant state paired with the spec state, `None` once the string leaves the spec.
type Z = (StateId, Option<StateId>);

struct Closure<'a> {
    plant: &'a Pdes,
    spec: &'a Pdes,
    keys: Vec<Z>,
    index: HashMap<Z, usize>,
}

impl<'a> Closure<'a> {
    fn id(&mut self, z: Z) -> usize {
        if let Some(&i) = self.index.get(&z) {
            return i;
        }
        self.keys.push(z);
        self.index.insert(z, self.keys.len() - 1);
        self.keys.len() - 1
    }

    fn step(&mut self, z: usize, e: EventId) -> Option<usize> {
        let (x, q) = self.keys[z];
        let y = self.plant.target(x, e)?;
        Some(self.id((y, q.and_then(|q| self.spec.target(q, e)))))
    }

    /// Controllable events the spec itself enables somewhere in `class`.
    fn demanded(&self, class: &BTreeSet<usize>) -> BTreeSet<EventId> {
        let mut out = BTreeSet::new();
        for &z in class {
            if let (_, Some(q)) = self.keys[z] {
                out.extend(self.spec.alphabet().events().filter(|&e| self.spec.target(q, e).is_some()));
            }
        }
        out
    }

    fn allowed(&self, z: usize, demanded: &BTreeSet<EventId>, e: EventId) -> bool {
        self.plant.target(self.keys[z].0, e).is_some()
            && (!self.plant.alphabet().is_controllable(e) || demanded.contains(&e))
    }

    /// Least set containing `seed` and closed under allowed unobservable moves,
    /// where "allowed" is judged against the set itself.
    fn saturate(&mut self, seed: BTreeSet<usize>) -> BTreeSet<usize> {
        let mut class = seed;
        loop {
            let demanded = self.demanded(&class);
            let mut grown = class.clone();
            for &z in &class {
                for e in self.plant.alphabet().unobservable_events() {
                    if self.allowed(z, &demanded, e) {
                        grown.insert(self.step(z, e).expect("allowed move"));
                    }
                }
            }
            if grown.len() == class.len() {
                return class;
            }
            class = grown;
        }
    }
}

/// The least controllable and observable (in the logical sense) prefix-closed
/// language containing `supp(spec)` inside `supp(plant)`. Only supports matter;
/// the result has probability one on every transition.
pub fn inf_co_support(plant_logic: &Pdes, spec_logic: &Pdes) -> Result<Pdes> {
    let (plant, spec) = (logic(plant_logic), logic(spec_logic));
    require_sublanguage(&spec, &plant, "spec support is not inside the plant support")?;
    let alphabet = plant.alphabet().clone();
    let mut cl = Closure { plant: &plant, spec: &spec, keys: Vec::new(), index: HashMap::new() };
    let z0 = cl.id((plant.initial(), Some(spec.initial())));

    // Observation classes of the closed language, each the set of Z-states its strings reach.
    let first = cl.saturate(BTreeSet::from([z0]));
    let mut classes = vec![first.clone()];
    let mut class_index = HashMap::from([(first, 0usize)]);
    let mut class_step: BTreeMap<(usize, EventId), usize> = BTreeMap::new();
    let mut demanded = Vec::new();
    let mut c = 0;
    while c < classes.len() {
        let class = classes[c].clone();
        let dem = cl.demanded(&class);
        for e in alphabet.observable_events() {
            let movers: Vec<usize> = class.iter().copied().filter(|&z| cl.allowed(z, &dem, e)).collect();
            let seed: BTreeSet<usize> = movers.into_iter().map(|z| cl.step(z, e).unwrap()).collect();
            if seed.is_empty() {
                continue;
            }
            let next = cl.saturate(seed);
            let d = *class_index.entry(next.clone()).or_insert_with(|| {
                classes.push(next);
                classes.len() - 1
            });
            class_step.insert((c, e), d);
        }
        demanded.push(dem);
        c += 1;
    }

    let (keys, edges) = explore((z0, 0usize), |&(z, c)| {
        let events: Vec<EventId> = alphabet.events().filter(|&e| cl.allowed(z, &demanded[c], e)).collect();
        events
            .into_iter()
            .map(|e| {
                let y = cl.step(z, e).unwrap();
                let d = if alphabet.is_observable(e) { class_step[&(c, e)] } else { c };
                (e, (y, d), EpsProb::one())
            })
            .collect()
    });
    let names = keys
        .iter()
        .map(|&(z, c)| {
            let (x, q) = cl.keys[z];
            let q = q.map_or("-", |q| spec.state_name(q));
            format!("({},{},c{c})", plant.state_name(x), q)
        })
        .collect();
    Ok(assemble(&alphabet, names, edges))
}

/// Plant and spec over a shared normal state space.
#[derive(Clone, Debug)]
pub struct NormalPair {
    pub g_n: Pdes,
    pub h_n: Pdes,
    /// Plant state underlying each `g_n` state.
    pub origin: Vec<StateId>,
}

type Triple = (StateId, StateId, StateId);

fn triple_product(
    a: &Pdes,
    b: &Pdes,
    c: &Pdes,
    prob: impl Fn(Triple, EventId) -> EpsProb,
) -> (Pdes, Vec<Triple>) {
    let (keys, edges) = explore((a.initial(), b.initial(), c.initial()), |&(x, y, z)| {
        a.alphabet()
            .events()
            .filter_map(|e| {
                let next = (a.target(x, e)?, b.target(y, e)?, c.target(z, e)?);
                Some((e, next, prob((x, y, z), e)))
            })
            .collect()
    });
    let names = keys
        .iter()
        .map(|&(x, y, z)| format!("({},{},{})", a.state_name(x), b.state_name(y), c.state_name(z)))
        .collect();
    (assemble(a.alphabet(), names, edges), keys)
}

/// A deterministic automaton over observable events with named states.
struct Dfa {
    names: Vec<String>,
    step: BTreeMap<(usize, EventId), usize>,
}

fn observer_dfa(a: &Pdes, tag: &str) -> Dfa {
    let obs = observer(a);
    Dfa { names: (0..obs.cells.len()).map(|i| format!("{tag}{i}")).collect(), step: obs.delta }
}

/// Synchronous product of two observers; with `loop_second` the second one
/// stays put where it has no move, as if completed with self-loops.
fn observer_product(alphabet: &Alphabet, a: &Dfa, b: &Dfa, loop_second: bool) -> Dfa {
    let (keys, edges) = explore((0usize, 0usize), |&(i, j)| {
        alphabet
            .observable_events()
            .filter_map(|e| {
                let i2 = *a.step.get(&(i, e))?;
                let j2 = match b.step.get(&(j, e)) {
                    Some(&j2) => j2,
                    None if loop_second => j,
                    None => return None,
                };
                Some((e, (i2, j2), EpsProb::one()))
            })
            .collect()
    });
    let mut step = BTreeMap::new();
    for (i, out) in edges.into_iter().enumerate() {
        for (e, j, _) in out {
            step.insert((i, e), j);
        }
    }
    Dfa { names: keys.iter().map(|&(i, j)| format!("{}.{}", a.names[i], b.names[j])).collect(), step }
}

/// Pairs each state with the observer state of its string: unobservable events
/// keep the observer coordinate, observable ones advance it.
fn normalize(a: &Pdes, dfa: &Dfa) -> Result<(Pdes, Vec<StateId>)> {
    let alphabet = a.alphabet();
    let mut missing = None;
    let (keys, edges) = explore((a.initial(), 0usize), |&(x, o)| {
        alphabet
            .events()
            .filter_map(|e| {
                let t = a.transition(x, e)?;
                let o2 = if alphabet.is_observable(e) {
                    match dfa.step.get(&(o, e)) {
                        Some(&o2) => o2,
                        None => {
                            missing.get_or_insert((x, e));
                            return None;
                        }
                    }
                } else {
                    o
                };
                Some((e, (t.target, o2), t.prob.clone()))
            })
            .collect()
    });
    if let Some((x, e)) = missing {
        return Err(Error::Precondition(format!(
            "observer has no `{}` move from the class of `{}`",
            alphabet.name(e),
            a.state_name(x)
        )));
    }
    let names = keys.iter().map(|&(x, o)| format!("{}|{}", a.state_name(x), dfa.names[o])).collect();
    Ok((assemble(alphabet, names, edges), keys.into_iter().map(|(x, _)| x).collect()))
}

/// Builds `(G_n, H_n)` from the plant, the spec and the closed support `h_s`.
pub fn refine_normal(plant: &Pdes, spec: &Pdes, h_s: &Pdes) -> Result<NormalPair> {
    plant.alphabet().ensure_same(spec.alphabet())?;
    plant.alphabet().ensure_same(h_s.alphabet())?;
    require_sublanguage(spec, plant, "spec is not a sublanguage of the plant")?;
    let h_s = logic(h_s);
    require_sublanguage(&logic(spec), &h_s, "closed support does not contain the spec support")?;
    require_sublanguage(&h_s, &logic(plant), "closed support is not inside the plant support")?;

    let all: Vec<EventId> = plant.alphabet().events().collect();
    let lg = logic(plant);
    let (lh_sink, sink) = sink_completion(&logic(spec));
    let hs_sl = add_self_loops(&h_s, &all);

    // Spec probabilities inside the spec, 0+ on everything the closure added.
    let (h_prime_s, _) = triple_product(&lg, &h_s, &lh_sink, |(_, _, q), e| {
        if q != sink && spec.transition(q, e).is_some() {
            spec.prob(q, e)
        } else {
            EpsProb::eps(1)
        }
    });
    let (g_prime, g_keys) = triple_product(&lg, &hs_sl, &lh_sink, |(x, _, _), e| plant.prob(x, e));

    let obs_g = observer_dfa(&g_prime, "g");
    let obs_h = observer_dfa(&h_prime_s, "h");
    let obs_of_h = observer_product(plant.alphabet(), &obs_g, &obs_h, false);
    let obs_of_g = observer_product(plant.alphabet(), &obs_g, &obs_h, true);

    let (h_n, _) = normalize(&h_prime_s, &obs_of_h)?;
    let (g_n, g_states) = normalize(&g_prime, &obs_of_g)?;
    let origin = g_states.into_iter().map(|i| g_keys[i].0).collect();
    Ok(NormalPair { g_n, h_n, origin })
}

/// Transition table keyed by state name, so states can be added freely.
struct Table {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    trans: BTreeMap<(StateId, EventId), (StateId, EpsProb)>,
}

impl Table {
    fn from(a: &Pdes) -> Self {
        let names: Vec<String> = a.states().map(|x| a.state_name(x).to_string()).collect();
        let index = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let trans = a.transitions().map(|(x, e, t)| ((x, e), (t.target, t.prob.clone()))).collect();
        Table { names, index, trans }
    }

    fn state(&mut self, name: &str) -> StateId {
        if let Some(&x) = self.index.get(name) {
            return x;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    /// Sets ρ(x, e), taking the target from `g` if the transition is new; returns
    /// whether a transition was added.
    fn set(&mut self, x: StateId, e: EventId, p: EpsProb, g: &Pdes, gx: StateId) -> bool {
        if let Some(t) = self.trans.get_mut(&(x, e)) {
            t.1 = p;
            return false;
        }
        let target = g.target(gx, e).expect("plant defines the event");
        let y = self.state(g.state_name(target));
        self.trans.insert((x, e), (y, p));
        true
    }

    fn build(self, alphabet: &Alphabet, initial: &str) -> Result<Pdes> {
        let mut b = PdesBuilder::new(alphabet.clone());
        for n in &self.names {
            b.state(n);
        }
        let x0 = b.state(initial);
        b.initial(x0);
        for ((x, e), (y, p)) in self.trans {
            b.transition(x, e, y, p)?;
        }
        b.build()
    }
}

fn algorithm3_counted(pair: &NormalPair) -> Result<(Pdes, usize)> {
    let (g, h) = (&pair.g_n, &pair.h_n);
    g.alphabet().ensure_same(h.alphabet())?;
    let alphabet = g.alphabet();
    let g_of = |x: StateId| {
        g.state_by_name(h.state_name(x))
            .ok_or_else(|| Error::Precondition(format!("`{}` is not a state of G_n", h.state_name(x))))
    };
    let mut table = Table::from(h);
    let mut added = 0;

    for x in h.states() {
        let gx = g_of(x)?;
        for e in alphabet.events().filter(|&e| !alphabet.is_controllable(e)) {
            let p = g.prob(gx, e);
            if !p.is_zero() && table.set(x, e, p, g, gx) {
                added += 1;
            }
        }
    }

    let obs = observer(&logic(h));
    if !obs.is_partition(h.num_states()) {
        return Err(Error::Precondition("H_n is not normal: observer cells overlap".into()));
    }
    for cell in &obs.cells {
        for e in alphabet.events().filter(|&e| alphabet.is_controllable(e)) {
            let mut k = EpsProb::zero();
            for &x in cell {
                let rho_g = g.prob(g_of(x)?, e);
                let rho_h = h.prob(x, e);
                if rho_h.is_zero() {
                    continue;
                }
                let ratio = rho_g
                    .as_rat()
                    .and_then(|r| rho_h.div_rat(r))
                    .ok_or_else(|| Error::Precondition(format!("G_n probability {rho_g} is not a positive rational")))?;
                k = k.max(ratio);
            }
            for &x in cell {
                let gx = g_of(x)?;
                let Some(rho_g) = g.prob(gx, e).as_rat().cloned() else { continue };
                let p = k.mul_rat(&rho_g);
                if p.is_zero() {
                    if table.trans.remove(&(x, e)).is_some() {
                        return Err(Error::Precondition("H_n is not a subautomaton of G_n".into()));
                    }
                } else if table.set(x, e, p, g, gx) {
                    added += 1;
                }
            }
        }
    }
    Ok((table.build(alphabet, h.state_name(h.initial()))?, added))
}

/// `H̃` from a normal pair.
pub fn algorithm3(pair: &NormalPair) -> Result<Pdes> {
    Ok(algorithm3_counted(pair)?.0)
}

#[derive(Clone, Debug)]
pub struct InfPco {
    pub h_s: Pdes,
    pub pair: NormalPair,
    pub h_tilde: Pdes,
    /// Plant state underlying each `h_tilde` state.
    pub origin: Vec<StateId>,
}

impl InfPco {
    /// `h_tilde` with states renamed after their plant states (`x0`, `x0.1`, ...).
    pub fn readable(&self) -> Pdes {
        let mut used: HashMap<StateId, usize> = HashMap::new();
        let names = self
            .origin
            .iter()
            .map(|&x| {
                let n = used.entry(x).or_insert(0);
                *n += 1;
                let base = self.pair.g_n_plant_name(x);
                if *n == 1 {
                    base
                } else {
                    format!("{base}.{}", *n - 1)
                }
            })
            .collect();
        self.h_tilde.renamed(names).expect("names are unique")
    }
}

impl NormalPair {
    fn g_n_plant_name(&self, x: StateId) -> String {
        let i = self.origin.iter().position(|&o| o == x).expect("plant state occurs in G_n");
        let name = self.g_n.state_name(i);
        // G_n names start with the plant state: "((x,h,q)|obs)".
        name.trim_start_matches('(').split(',').next().unwrap_or(name).to_string()
    }
}

pub fn inf_pco_detailed(plant: &Pdes, spec: &Pdes) -> Result<InfPco> {
    plant.alphabet().ensure_same(spec.alphabet())?;
    require_sublanguage(spec, plant, "spec is not a sublanguage of the plant")?;
    let h_s = inf_co_support(plant, spec)?;
    let pair = refine_normal(plant, spec, &h_s)?;
    let (h_tilde, added) = algorithm3_counted(&pair)?;
    if added > 0 || !language_equivalent(&logic(&h_tilde), &logic(&pair.h_n))? {
        return Err(Error::Precondition(format!(
            "closing step changed the support ({added} transitions added); the closed support is not controllable and observable"
        )));
    }
    let origin = h_tilde
        .states()
        .map(|x| pair.origin[pair.g_n.state_by_name(h_tilde.state_name(x)).expect("H̃ state in G_n")])
        .collect();
    Ok(InfPco { h_s, pair, h_tilde, origin })
}

pub fn inf_pco(plant: &Pdes, spec: &Pdes) -> Result<Pdes> {
    Ok(inf_pco_detailed(plant, spec)?.h_tilde)
}
