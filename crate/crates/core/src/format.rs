//! Line-oriented text formats for automata, scaling maps and supervisors.
//!
//! Automata:
//!
//! ```text
//! states: x0 x1
//! initial: x0
//! controllable: s1
//! uncontrollable: s2
//! observable: s2
//! unobservable: s1
//! trans: x0 s1 x1 0.5
//! ```
//!
//! Scaling maps and supervisors share the observation-class lines
//! `initial <id>` and `step <id> <event> <id>`; then either
//! `class <id> <k_1> ... <k_n>` or `class <id>` followed by
//! `pattern <bits> <prob>` lines. `#` starts a comment everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use num_traits::Zero;

use crate::automaton::{accessible, Alphabet, EventId, Pdes, PdesBuilder};
use crate::patterns::{parse_pattern_bits, pattern_bits, PatternDistribution, ScalingVector};
use crate::prob::{parse_rat, EpsProb, Rat};
use crate::supervisor::{ObservationClasses, ScalingMap, SupervisorMap};
use crate::{Error, Result};

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, msg: msg.into() }
}

/// Non-empty lines with comments removed, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

#[derive(Default)]
struct Directives<'a> {
    states: Vec<(usize, &'a str)>,
    initial: Option<(usize, &'a str)>,
    controllable: Option<Vec<&'a str>>,
    uncontrollable: Option<Vec<&'a str>>,
    observable: Option<(usize, Vec<&'a str>)>,
    unobservable: Option<(usize, Vec<&'a str>)>,
    trans: Vec<(usize, Vec<&'a str>)>,
}

/// Parses an automaton. Unreachable states are trimmed and reported in the
/// returned warnings.
pub fn parse_automaton(text: &str) -> Result<(Pdes, Vec<String>)> {
    let mut d = Directives::default();
    for (n, line) in lines(text) {
        let (key, rest) = line.split_once(':').ok_or_else(|| syntax(n, "expected `directive: ...`"))?;
        let words: Vec<&str> = rest.split_whitespace().collect();
        let once = |slot_used: bool| if slot_used { Err(syntax(n, format!("`{key}` given twice"))) } else { Ok(()) };
        match key.trim() {
            "states" => d.states.extend(words.into_iter().map(|w| (n, w))),
            "initial" => {
                once(d.initial.is_some())?;
                let [x] = words[..] else { return Err(syntax(n, "`initial` takes one state")) };
                d.initial = Some((n, x));
            }
            "controllable" => {
                once(d.controllable.is_some())?;
                d.controllable = Some(words);
            }
            "uncontrollable" => {
                once(d.uncontrollable.is_some())?;
                d.uncontrollable = Some(words);
            }
            "observable" => {
                once(d.observable.is_some())?;
                d.observable = Some((n, words));
            }
            "unobservable" => {
                once(d.unobservable.is_some())?;
                d.unobservable = Some((n, words));
            }
            "trans" => {
                if words.len() != 4 {
                    return Err(syntax(n, "`trans` takes: source event target probability"));
                }
                d.trans.push((n, words));
            }
            other => return Err(syntax(n, format!("unknown directive `{other}`"))),
        }
    }

    let controllable = d.controllable.unwrap_or_default();
    let uncontrollable = d.uncontrollable.unwrap_or_default();
    let events: Vec<&str> = controllable.iter().chain(&uncontrollable).copied().collect();
    let observable: Vec<&str> = match (&d.observable, &d.unobservable) {
        (Some((n, obs)), unobs) => {
            if let Some((m, unobs)) = unobs {
                let a: BTreeSet<&str> = obs.iter().chain(unobs).copied().collect();
                let all: BTreeSet<&str> = events.iter().copied().collect();
                if a != all || obs.len() + unobs.len() != events.len() {
                    return Err(syntax(*m.max(n), "observable and unobservable events must partition the alphabet"));
                }
            }
            obs.clone()
        }
        (None, Some((n, unobs))) => {
            if let Some(u) = unobs.iter().find(|u| !events.contains(u)) {
                return Err(syntax(*n, format!("unknown event `{u}`")));
            }
            events.iter().copied().filter(|e| !unobs.contains(e)).collect()
        }
        (None, None) => events.clone(),
    };
    let alphabet = Alphabet::new(&controllable, &uncontrollable, &observable).map_err(|e| match e {
        Error::UnknownEvent(ev) => syntax(d.observable.as_ref().map_or(0, |o| o.0), format!("unknown event `{ev}`")),
        other => other,
    })?;

    let mut b = PdesBuilder::new(alphabet.clone());
    for &(n, name) in &d.states {
        if b.has_state(name) {
            return Err(syntax(n, format!("state `{name}` declared twice")));
        }
        b.state(name);
    }
    let (n, init) = d.initial.ok_or_else(|| syntax(0, "missing `initial:`"))?;
    if !b.has_state(init) {
        return Err(syntax(n, format!("initial state `{init}` is not declared")));
    }
    let x0 = b.state(init);
    b.initial(x0);
    for (n, w) in &d.trans {
        let state = |b: &mut PdesBuilder, name: &str| {
            if b.has_state(name) {
                Ok(b.state(name))
            } else {
                Err(syntax(*n, format!("undeclared state `{name}`")))
            }
        };
        let x = state(&mut b, w[0])?;
        let e = alphabet.index(w[1]).ok_or_else(|| syntax(*n, format!("unknown event `{}`", w[1])))?;
        let y = state(&mut b, w[2])?;
        let p: EpsProb = w[3].parse().map_err(|e: Error| syntax(*n, e.to_string()))?;
        if p > EpsProb::one() {
            return Err(syntax(*n, format!("probability {p} exceeds 1")));
        }
        b.transition(x, e, y, p).map_err(|e| syntax(*n, e.to_string()))?;
    }
    let full = b.build()?;
    full.check_liveness()?;
    let trimmed = accessible(&full);
    let warnings = full
        .states()
        .filter(|&x| trimmed.state_by_name(full.state_name(x)).is_none())
        .map(|x| format!("unreachable state `{}` removed", full.state_name(x)))
        .collect();
    Ok((trimmed, warnings))
}

pub fn write_automaton(a: &Pdes) -> String {
    let al = a.alphabet();
    let names = |it: &mut dyn Iterator<Item = EventId>| it.map(|e| format!(" {}", al.name(e))).collect::<String>();
    let mut out = String::new();
    let states: String = a.states().map(|x| format!(" {}", a.state_name(x))).collect();
    writeln!(out, "states:{states}").unwrap();
    writeln!(out, "initial: {}", a.state_name(a.initial())).unwrap();
    writeln!(out, "controllable:{}", names(&mut al.events().filter(|&e| al.is_controllable(e)))).unwrap();
    writeln!(out, "uncontrollable:{}", names(&mut al.events().filter(|&e| !al.is_controllable(e)))).unwrap();
    writeln!(out, "observable:{}", names(&mut al.observable_events())).unwrap();
    writeln!(out, "unobservable:{}", names(&mut al.unobservable_events())).unwrap();
    for (x, e, t) in a.transitions() {
        writeln!(out, "trans: {} {} {} {}", a.state_name(x), al.name(e), a.state_name(t.target), t.prob).unwrap();
    }
    out
}

fn write_classes(out: &mut String, alphabet: &Alphabet, classes: &ObservationClasses) {
    writeln!(out, "initial {}", classes.initial).unwrap();
    for (&(c, e), &d) in &classes.step {
        writeln!(out, "step {c} {} {d}", alphabet.name(e)).unwrap();
    }
}

pub fn write_scaling_map(k: &ScalingMap) -> String {
    let mut out = String::new();
    write_classes(&mut out, k.alphabet(), k.classes());
    for (c, v) in k.vectors().iter().enumerate() {
        let factors: String = v.factors().iter().map(|f| format!(" {f}")).collect();
        writeln!(out, "class {c}{factors}").unwrap();
    }
    out
}

pub fn write_supervisor_map(s: &SupervisorMap) -> String {
    let mut out = String::new();
    write_classes(&mut out, s.alphabet(), s.classes());
    for (c, d) in s.distributions().iter().enumerate() {
        writeln!(out, "class {c}").unwrap();
        out.push_str(&write_distribution(d));
    }
    out
}

pub fn write_distribution(d: &PatternDistribution) -> String {
    d.support().map(|(j, p)| format!("pattern {} {p}\n", pattern_bits(j, d.m()))).collect()
}

struct ClassLines<'a> {
    classes: ObservationClasses,
    bodies: BTreeMap<usize, (usize, Vec<&'a str>)>,
    patterns: BTreeMap<usize, Vec<(usize, Vec<&'a str>)>>,
}

fn parse_class_lines<'a>(text: &'a str, alphabet: &Alphabet) -> Result<ClassLines<'a>> {
    let id = |n: usize, w: &str| w.parse::<usize>().map_err(|_| syntax(n, format!("bad class id `{w}`")));
    let mut initial = None;
    let mut step = BTreeMap::new();
    let mut bodies = BTreeMap::new();
    let mut patterns: BTreeMap<usize, Vec<(usize, Vec<&str>)>> = BTreeMap::new();
    let mut current = None;
    let mut max_id = 0usize;
    for (n, line) in lines(text) {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "initial" if words.len() == 2 => {
                let c = id(n, words[1])?;
                max_id = max_id.max(c);
                initial = Some(c);
            }
            "step" if words.len() == 4 => {
                let (c, d) = (id(n, words[1])?, id(n, words[3])?);
                let e = alphabet.index(words[2]).ok_or_else(|| syntax(n, format!("unknown event `{}`", words[2])))?;
                if !alphabet.is_observable(e) {
                    return Err(syntax(n, format!("`{}` is unobservable", words[2])));
                }
                if step.insert((c, e), d).is_some() {
                    return Err(syntax(n, "duplicate step"));
                }
                max_id = max_id.max(c).max(d);
            }
            "class" if words.len() >= 2 => {
                let c = id(n, words[1])?;
                if bodies.insert(c, (n, words[2..].to_vec())).is_some() {
                    return Err(syntax(n, format!("class {c} given twice")));
                }
                max_id = max_id.max(c);
                current = Some(c);
            }
            "pattern" if words.len() == 3 => {
                let c = current.ok_or_else(|| syntax(n, "`pattern` before any `class`"))?;
                patterns.entry(c).or_default().push((n, words[1..].to_vec()));
            }
            other => return Err(syntax(n, format!("unexpected `{other}` line"))),
        }
    }
    let initial = initial.ok_or_else(|| syntax(0, "missing `initial <id>`"))?;
    let count = max_id + 1;
    if let Some(c) = (0..count).find(|c| !bodies.contains_key(c)) {
        return Err(syntax(0, format!("class {c} has no `class` line")));
    }
    Ok(ClassLines { classes: ObservationClasses { count, initial, step }, bodies, patterns })
}

pub fn parse_scaling_map(text: &str, alphabet: &Alphabet) -> Result<ScalingMap> {
    let parsed = parse_class_lines(text, alphabet)?;
    if let Some((&c, v)) = parsed.patterns.iter().next() {
        return Err(syntax(v[0].0, format!("`pattern` line under class {c} in a scaling map")));
    }
    let mut vectors = Vec::new();
    for (_, (n, words)) in parsed.bodies {
        let factors: Vec<Rat> = words.iter().map(|w| parse_rat(w)).collect::<Result<_>>().map_err(|e| syntax(n, e.to_string()))?;
        if factors.len() != alphabet.len() {
            return Err(syntax(n, format!("expected {} factors, got {}", alphabet.len(), factors.len())));
        }
        vectors.push(ScalingVector::new(alphabet.n_controllable(), factors).map_err(|e| syntax(n, e.to_string()))?);
    }
    ScalingMap::new(alphabet.clone(), parsed.classes, vectors)
}

pub fn parse_supervisor_map(text: &str, alphabet: &Alphabet) -> Result<SupervisorMap> {
    let parsed = parse_class_lines(text, alphabet)?;
    let m = alphabet.n_controllable();
    let mut dists = Vec::new();
    for (c, (n, words)) in &parsed.bodies {
        if !words.is_empty() {
            return Err(syntax(*n, "supervisor `class` lines take only an id"));
        }
        let mut probs = vec![Rat::zero(); 1 << m];
        for (pn, w) in parsed.patterns.get(c).map(Vec::as_slice).unwrap_or_default() {
            let j = parse_pattern_bits(w[0], m).map_err(|e| syntax(*pn, e.to_string()))?;
            probs[j] += parse_rat(w[1]).map_err(|e| syntax(*pn, e.to_string()))?;
        }
        dists.push(PatternDistribution::new(m, probs).map_err(|e| syntax(*n, format!("class {c}: {e}")))?);
    }
    SupervisorMap::new(alphabet.clone(), parsed.classes, dists)
}
