//! Probabilistic P-supervisors, scaling-factor maps, and the controlled language.
//!
//! A supervisor only sees the observable projection of the plant's string, so
//! both encodings are keyed by observation class: the states of a deterministic
//! automaton over observable events. Observations the class automaton does not
//! cover fall into a default class that enables everything.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::automaton::{assemble, explore, is_sublanguage, observer, Alphabet, EventId, Observer, Pdes, Verdict};
use crate::patterns::{
    complete_containment_matrix, distribution_from_marginals, marginals_of, PatternDistribution, ScalingVector,
};
use crate::prob::{EpsProb, Rat};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationClasses {
    pub count: usize,
    pub initial: usize,
    pub step: BTreeMap<(usize, EventId), usize>,
}

impl ObservationClasses {
    pub fn from_observer(obs: &Observer) -> Self {
        ObservationClasses { count: obs.cells.len(), initial: obs.initial, step: obs.delta.clone() }
    }

    /// Classes given by the observer of the plant alone.
    pub fn of_plant(plant: &Pdes) -> Self {
        Self::from_observer(&observer(plant))
    }

    /// The class after observing `e`; `None` is the default class, which absorbs.
    pub fn advance(&self, class: Option<usize>, e: EventId) -> Option<usize> {
        class.and_then(|c| self.step.get(&(c, e)).copied())
    }

    pub fn class_of(&self, alphabet: &Alphabet, s: &[EventId]) -> Option<usize> {
        s.iter()
            .filter(|&&e| alphabet.is_observable(e))
            .try_fold(self.initial, |c, &e| self.step.get(&(c, e)).copied())
    }
}

fn format_class(class: Option<usize>) -> String {
    class.map_or_else(|| "-".to_string(), |c| format!("t{c}"))
}

/// The function `K`: one scaling vector per observation class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingMap {
    alphabet: Alphabet,
    classes: ObservationClasses,
    vectors: Vec<ScalingVector>,
    default: ScalingVector,
}

impl ScalingMap {
    pub fn new(alphabet: Alphabet, classes: ObservationClasses, vectors: Vec<ScalingVector>) -> Result<Self> {
        if vectors.len() != classes.count {
            return Err(Error::InvalidControl(format!("{} vectors for {} classes", vectors.len(), classes.count)));
        }
        let (m, n) = (alphabet.n_controllable(), alphabet.len());
        if vectors.iter().any(|v| v.m() != m || v.n() != n) {
            return Err(Error::InvalidControl(format!("scaling vectors must have {n} entries, {m} controllable")));
        }
        Ok(ScalingMap { default: ScalingVector::ones(m, n), alphabet, classes, vectors })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn classes(&self) -> &ObservationClasses {
        &self.classes
    }

    pub fn vectors(&self) -> &[ScalingVector] {
        &self.vectors
    }

    pub fn get(&self, class: Option<usize>) -> &ScalingVector {
        class.map_or(&self.default, |c| &self.vectors[c])
    }
}

/// `S_p`: one control-pattern distribution per observation class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupervisorMap {
    alphabet: Alphabet,
    classes: ObservationClasses,
    dists: Vec<PatternDistribution>,
    default: PatternDistribution,
}

impl SupervisorMap {
    pub fn new(alphabet: Alphabet, classes: ObservationClasses, dists: Vec<PatternDistribution>) -> Result<Self> {
        if dists.len() != classes.count {
            return Err(Error::InvalidControl(format!("{} distributions for {} classes", dists.len(), classes.count)));
        }
        let m = alphabet.n_controllable();
        if dists.iter().any(|d| d.m() != m) {
            return Err(Error::InvalidControl(format!("distributions must range over {m} controllable events")));
        }
        let default = PatternDistribution::point_mass(m, (1 << m) - 1)?;
        Ok(SupervisorMap { alphabet, classes, dists, default })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn classes(&self) -> &ObservationClasses {
        &self.classes
    }

    pub fn distributions(&self) -> &[PatternDistribution] {
        &self.dists
    }

    pub fn get(&self, class: Option<usize>) -> &PatternDistribution {
        class.map_or(&self.default, |c| &self.dists[c])
    }

    /// The equivalent scaling map.
    pub fn marginals(&self) -> Result<ScalingMap> {
        let n = self.alphabet.len();
        let vectors = self.dists.iter().map(|d| marginals_of(d, n)).collect::<Result<_>>()?;
        ScalingMap::new(self.alphabet.clone(), self.classes.clone(), vectors)
    }
}

fn ordinary(p: &EpsProb, what: &str) -> Result<Rat> {
    p.as_rat().cloned().ok_or_else(|| Error::Precondition(format!("{what} has infinitesimal probability {p}")))
}

/// Reads the scaling factors off a specification that is probabilistic
/// controllable and observable: per class, `ρ_H/ρ` for each controllable event
/// the plant allows (zero when the spec forbids it), one for the rest.
pub fn scaling_from_spec(plant: &Pdes, spec: &Pdes) -> Result<ScalingMap> {
    plant.alphabet().ensure_same(spec.alphabet())?;
    if let Verdict::Fails(w) = is_sublanguage(spec, plant)? {
        return Err(Error::Precondition(format!(
            "specification is not a sublanguage of the plant: {}",
            w.line(plant.alphabet())
        )));
    }
    let alphabet = plant.alphabet();
    // Plant states paired with the spec state, or None once the string leaves supp(L_spec).
    let (keys, edges) = explore((plant.initial(), Some(spec.initial())), |&(x, q)| {
        alphabet
            .events()
            .filter_map(|e| {
                let y = plant.target(x, e)?;
                Some((e, (y, q.and_then(|q| spec.target(q, e))), EpsProb::one()))
            })
            .collect()
    });
    let names = (0..keys.len()).map(|i| format!("z{i}")).collect();
    let z = assemble(alphabet, names, edges);
    let obs = observer(&z);
    let describe = |i: usize| {
        let (x, q) = keys[i];
        format!("({},{})", plant.state_name(x), q.map_or("-", |q| spec.state_name(q)))
    };
    for (i, &(x, q)) in keys.iter().enumerate() {
        let Some(q) = q else { continue };
        for e in alphabet.events().filter(|&e| !alphabet.is_controllable(e)) {
            let (rho, rho_h) = (plant.prob(x, e), spec.prob(q, e));
            if rho != rho_h {
                return Err(Error::NotControllable(format!(
                    "uncontrollable `{}` at {} has plant probability {rho} but spec probability {rho_h}",
                    alphabet.name(e),
                    describe(i)
                )));
            }
        }
    }
    let mut vectors = Vec::with_capacity(obs.cells.len());
    for cell in &obs.cells {
        let mut factors = Vec::with_capacity(alphabet.len());
        for e in alphabet.events() {
            let mut agreed: Option<(Rat, usize)> = None;
            for &i in cell {
                let (x, Some(q)) = keys[i] else { continue };
                let (rho, rho_h) = (plant.prob(x, e), spec.prob(q, e));
                if !alphabet.is_controllable(e) || rho.is_zero() {
                    continue;
                }
                let ratio = ordinary(&rho_h, "specification")? / ordinary(&rho, "plant")?;
                match &agreed {
                    None => agreed = Some((ratio, i)),
                    Some((r, j)) if *r != ratio => {
                        return Err(Error::NotObservable(format!(
                            "`{}` is scaled by {r} at {} but by {ratio} at {} under the same observation",
                            alphabet.name(e),
                            describe(*j),
                            describe(i)
                        )));
                    }
                    Some(_) => {}
                }
            }
            factors.push(if alphabet.is_controllable(e) {
                agreed.map_or_else(Rat::zero, |(r, _)| r)
            } else {
                Rat::from_integer(1.into())
            });
        }
        vectors.push(ScalingVector::new(alphabet.n_controllable(), factors)?);
    }
    ScalingMap::new(alphabet.clone(), ObservationClasses::from_observer(&obs), vectors)
}

pub fn supervisor_from_scaling(k: &ScalingMap) -> Result<SupervisorMap> {
    let dists = k.vectors.iter().map(distribution_from_marginals).collect::<Result<_>>()?;
    SupervisorMap::new(k.alphabet.clone(), k.classes.clone(), dists)
}

/// `ξ(s, σ) = ρ(δ(x0,s), σ) · Σ_j p_j^{P(s)} · ĪN(σ, j)`.
pub fn controlled_xi(plant: &Pdes, sup: &SupervisorMap, s: &[EventId], e: EventId) -> Result<EpsProb> {
    plant.alphabet().ensure_same(&sup.alphabet)?;
    let alphabet = plant.alphabet();
    let x = plant
        .run(s)
        .ok_or_else(|| Error::Precondition(format!("`{}` is not generated by the plant", alphabet.format_string(s))))?;
    let dist = sup.get(sup.classes.class_of(alphabet, s));
    let row = &complete_containment_matrix(alphabet.n_controllable(), alphabet.len())?[e];
    let enabled: Rat = row.iter().zip(dist.probs()).filter(|(&b, _)| b == 1).map(|(_, p)| p).sum();
    Ok(plant.prob(x, e).mul_rat(&enabled))
}

/// The automaton generating `L_{K/G}`: plant states paired with observation
/// classes, each transition scaled by the current class's factor.
pub fn controlled_automaton(plant: &Pdes, k: &ScalingMap) -> Result<Pdes> {
    plant.alphabet().ensure_same(&k.alphabet)?;
    let alphabet = plant.alphabet();
    let (keys, edges) = explore((plant.initial(), Some(k.classes.initial)), |&(x, c)| {
        alphabet
            .events()
            .filter_map(|e| {
                let t = plant.transition(x, e)?;
                let p = t.prob.mul_rat(k.get(c).factor(e));
                if p.is_zero() {
                    return None;
                }
                let next = if alphabet.is_observable(e) { k.classes.advance(c, e) } else { c };
                Some((e, (t.target, next), p))
            })
            .collect()
    });
    let names = keys.iter().map(|&(x, c)| format!("({},{})", plant.state_name(x), format_class(c))).collect();
    Ok(assemble(alphabet, names, edges))
}
