//! Component-wise differential evolution for mixed-integer black-box
//! optimization.
//!
//! A DE variant here is the product of four independent choices: a
//! [`StrategyKind`] (differential mutation), binomial crossover, a
//! [`PcmKind`] (how the scale factor and crossover rate are controlled) and a
//! [`RepairPolicy`] (how rounded integer coordinates feed back into the
//! population). [`run`] executes one such variant on a [`ProblemSpec`] and the
//! [`bench`] module turns the resulting logs into ECDF curves and tables.
//!
//! ```
//! use mixde::{make_problem, run, FunctionKind, PcmKind, RepairPolicy, RunConfig, StrategyKind};
//!
//! let problem = make_problem(FunctionKind::Sphere, 5, 1).unwrap();
//! let mut config = RunConfig::defaults(5, StrategyKind::Rand1, PcmKind::PJa, RepairPolicy::Lamarckian, 42);
//! config.budget = 2_000;
//! let log = run(&config, &problem, &mut ()).unwrap();
//! assert!(log.final_delta().unwrap() < 10.0);
//! ```

pub mod bench;
mod de;
mod error;
mod mutation;
mod pcm;
mod problem;
pub mod rng;
mod variation;

pub use de::{
    init_population, run, select_and_archive, Archive, Evaluator, Individual, IterationRecord, Observer, RunConfig,
    RunLog, RunMeta,
};
pub use error::{Error, Result};
pub use mutation::{distinct_indices, mutate, select_pbest, GreedinessConfig, StrategyKind};
pub use pcm::{lehmer_mean, ParamPair, Pcm, PcmKind};
pub use problem::{evaluate, make_domain_layout, make_problem, DomainKind, FunctionKind, ProblemSpec, VariableDomain};
pub use variation::{
    apply_repair, binomial_crossover, binomial_crossover_scripted, clamp_to_bounds, repair_round, RepairPolicy,
};
