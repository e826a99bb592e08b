//! Small worked systems, shipped as text so the CLI and the browser demo can load them.

use crate::automaton::Pdes;
use crate::format::parse_automaton;

pub const ROBOT_PLANT: &str = include_str!("../data/robot_plant.pda");
pub const ROBOT_SPEC: &str = include_str!("../data/robot_spec.pda");
pub const BRANCH_PLANT: &str = include_str!("../data/branch_plant.pda");
pub const BRANCH_SPEC: &str = include_str!("../data/branch_spec.pda");
pub const LOOP_PLANT: &str = include_str!("../data/loop_plant.pda");
pub const LOOP_SPEC: &str = include_str!("../data/loop_spec.pda");

fn load(text: &str) -> Pdes {
    parse_automaton(text).expect("bundled automaton parses").0
}

/// Robot plant and spec with the given observable events.
pub fn robot(observable: &[&str]) -> (Pdes, Pdes) {
    let g = load(ROBOT_PLANT).with_observable(observable).expect("robot events");
    let h = load(ROBOT_SPEC).with_observable(observable).expect("robot events");
    (g, h)
}

pub fn branch() -> (Pdes, Pdes) {
    (load(BRANCH_PLANT), load(BRANCH_SPEC))
}

pub fn loops() -> (Pdes, Pdes) {
    (load(LOOP_PLANT), load(LOOP_SPEC))
}
