//! Supervisory control of probabilistic discrete event systems (PDES)
//! under partial observation.
//!
//! A plant is a deterministic probabilistic automaton; a specification is a
//! probabilistic language given by a second automaton. The crate decides
//! whether a specification can be achieved exactly by a probabilistic
//! supervisor that only sees observable events, synthesizes that supervisor
//! when it can, and otherwise computes the infimal achievable superlanguage.

pub mod automaton;
pub mod format;
pub mod infimal;
pub mod patterns;
pub mod presets;
pub mod prob;
pub mod simulate;
pub mod supervisor;
pub mod verify;

pub use automaton::{
    accessible, add_self_loops, eval_language, is_subautomaton, is_sublanguage, language_equivalent, logic,
    observer, product, project, Alphabet, EventId, Observer, Pdes, PdesBuilder, StateId, Transition, Verdict,
    Witness,
};

pub use infimal::{algorithm3, inf_co_support, inf_pco, inf_pco_detailed, refine_normal, InfPco, NormalPair};
pub use patterns::{
    complete_containment_matrix, containment_matrix, distribution_from_marginals, marginals_of, PatternDistribution,
    ScalingVector,
};
pub use simulate::{run_trials, Frequency, FrequencyReport, TrialConfig};
pub use prob::{eps_cmp, eps_mul, eps_sum_lower, EpsProb, Rat};

pub use supervisor::{
    controlled_automaton, controlled_xi, scaling_from_spec, supervisor_from_scaling, ObservationClasses, ScalingMap,
    SupervisorMap,
};
pub use verify::{brute_controllable, brute_observable, check_controllable, check_observable};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid probability `{0}`")]
    BadProbability(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("invalid control data: {0}")]
    InvalidControl(String),
    #[error("specification is not probabilistic controllable: {0}")]
    NotControllable(String),
    #[error("specification is not probabilistic observable: {0}")]
    NotObservable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
