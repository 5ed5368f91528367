//! The DE main loop: initialization, variation, pair-wise selection with an
//! external archive, and parameter-control feedback.

use rand::Rng;

use crate::bench::diagnostics::{diagnostics, mean_successful_params};
use crate::error::{Error, Result};
use crate::mutation::{mutate, GreedinessConfig, MutationPool, StrategyKind};
use crate::pcm::{ParamPair, Pcm, PcmKind};
use crate::problem::{evaluate, FunctionKind, ProblemSpec, VariableDomain};
use crate::rng::{derive_stream, Stream};
use crate::variation::{apply_repair, binomial_crossover, clamp_to_bounds, RepairPolicy};

/// A genome and the objective value of its repaired form.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub objective: f64,
}

/// Replaced parents, bounded by `capacity` after every iteration.
#[derive(Clone, Debug, Default)]
pub struct Archive {
    entries: Vec<Individual>,
    capacity: usize,
}

impl Archive {
    pub fn new(capacity: usize) -> Self {
        Self { entries: Vec::with_capacity(capacity + 1), capacity }
    }

    pub fn entries(&self) -> &[Individual] {
        &self.entries
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, individual: Individual) {
        self.entries.push(individual);
    }

    /// Delete uniformly chosen entries until the capacity holds.
    pub fn truncate<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        while self.entries.len() > self.capacity {
            let k = rng.random_range(0..self.entries.len());
            self.entries.swap_remove(k);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mu: usize,
    pub strategy: StrategyKind,
    pub pcm: PcmKind,
    pub repair: RepairPolicy,
    pub p: f64,
    pub archive: usize,
    pub budget: u64,
    pub seed: u64,
}

impl RunConfig {
    pub const DEFAULT_MU: usize = 100;
    pub const DEFAULT_P: f64 = 0.05;
    pub const DEFAULT_BUDGET_MULTIPLIER: u64 = 10_000;

    /// `mu = 100`, `p = 0.05`, archive capacity `mu`, budget `10^4 * n`.
    pub fn defaults(n: usize, strategy: StrategyKind, pcm: PcmKind, repair: RepairPolicy, seed: u64) -> Self {
        Self {
            mu: Self::DEFAULT_MU,
            strategy,
            pcm,
            repair,
            p: Self::DEFAULT_P,
            archive: Self::DEFAULT_MU,
            budget: Self::DEFAULT_BUDGET_MULTIPLIER * n as u64,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = self.strategy.min_population().max(4);
        if self.mu < need {
            return Err(Error::Config(format!(
                "population size {} is below {} required by {}",
                self.mu, need, self.strategy
            )));
        }
        if self.budget < self.mu as u64 {
            return Err(Error::Config(format!(
                "budget {} cannot cover the initial population of {}",
                self.budget, self.mu
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Config(format!("greediness p = {} is outside [0, 1]", self.p)));
        }
        Ok(())
    }

    /// Iteration horizon of the sinusoidal schedule: every iteration the
    /// budget allows, plus one.
    pub fn max_iterations(&self) -> u64 {
        let rest = self.budget.saturating_sub(self.mu as u64);
        rest.div_ceil(self.mu as u64) + 1
    }

    /// Canonical text of every setting that affects the search.
    pub fn digest(&self) -> String {
        format!(
            "{}/{}/{}/mu={}/p={}/a={}/budget={}",
            self.strategy, self.pcm, self.repair, self.mu, self.p, self.archive, self.budget
        )
    }

    /// The per-run random stream.
    pub fn stream(&self, problem: &ProblemSpec) -> Stream {
        derive_stream("run", &[&self.seed, &problem.function, &problem.n, &problem.instance_seed, &self.digest()])
    }
}

/// Identification of one run, as written into log headers.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMeta {
    pub function: FunctionKind,
    pub n: usize,
    pub instance: u64,
    pub strategy: StrategyKind,
    pub pcm: PcmKind,
    pub repair: RepairPolicy,
    pub mu: usize,
    pub seed: u64,
    pub budget: u64,
}

impl RunMeta {
    pub fn new(config: &RunConfig, problem: &ProblemSpec) -> Self {
        Self {
            function: problem.function,
            n: problem.n,
            instance: problem.instance_seed,
            strategy: config.strategy,
            pcm: config.pcm,
            repair: config.repair,
            mu: config.mu,
            seed: config.seed,
            budget: config.budget,
        }
    }
}

/// Best-so-far trajectory of one run; one entry per improvement.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub meta: RunMeta,
    /// `(evaluation index, f_best_so_far - f_opt)`, 1-based evaluation index.
    pub trace: Vec<(u64, f64)>,
    pub evaluations: u64,
}

impl RunLog {
    pub fn final_delta(&self) -> Option<f64> {
        self.trace.last().map(|&(_, d)| d)
    }

    /// Best-so-far error after `evals` evaluations.
    pub fn delta_at(&self, evals: u64) -> Option<f64> {
        let k = self.trace.partition_point(|&(e, _)| e <= evals);
        k.checked_sub(1).map(|k| self.trace[k].1)
    }
}

/// Per-iteration state handed to observers after selection and the PCM update.
pub struct IterationRecord<'a> {
    pub t: u64,
    pub evals: u64,
    pub div: f64,
    pub nsame: usize,
    pub mean_success: Option<(f64, f64)>,
    pub pcm: &'a Pcm,
    pub pairs: &'a [ParamPair],
    pub success: &'a [bool],
    pub population: &'a [Individual],
    pub archive: &'a Archive,
}

pub trait Observer {
    fn on_evaluation(&mut self, _eval_index: u64, _f_delta_best: f64) {}
    fn on_iteration(&mut self, _record: &IterationRecord<'_>) {}
}

impl Observer for () {}

/// Counts objective calls against the budget and tracks the best-so-far error.
pub struct Evaluator<'p> {
    problem: &'p ProblemSpec,
    budget: u64,
    used: u64,
    best: f64,
    trace: Vec<(u64, f64)>,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p ProblemSpec, budget: u64) -> Self {
        Self { problem, budget, used: 0, best: f64::INFINITY, trace: Vec::new() }
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn best_delta(&self) -> f64 {
        self.best
    }

    pub fn evaluate(&mut self, genome: &[f64]) -> Result<f64> {
        if self.used >= self.budget {
            return Err(Error::BudgetExhausted);
        }
        let f = evaluate(self.problem, genome)?;
        self.used += 1;
        let delta = f - self.problem.f_opt;
        if delta < self.best {
            self.best = delta;
            self.trace.push((self.used, delta));
        }
        Ok(f)
    }

    pub fn into_trace(self) -> Vec<(u64, f64)> {
        self.trace
    }
}

/// Uniform genomes over the box, each repaired and evaluated once.
///
/// Stops early, returning fewer than `mu` individuals, when `eval` reports
/// an exhausted budget.
pub fn init_population<R, F>(
    mu: usize,
    domains: &[VariableDomain],
    rng: &mut R,
    repair: RepairPolicy,
    mut eval: F,
) -> Result<Vec<Individual>>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut population = Vec::with_capacity(mu);
    for _ in 0..mu {
        let genome: Vec<f64> = domains.iter().map(|d| rng.random_range(d.lo..=d.hi)).collect();
        match apply_repair(repair, genome, domains, &mut eval) {
            Ok((objective, genome)) => population.push(Individual { genome, objective }),
            Err(Error::BudgetExhausted) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(population)
}

/// Pair-wise selection of `children[i]` against `population[i]`.
///
/// Children replace parents on ties. Replaced parents enter the archive in
/// index order, then the archive is cut back to its capacity. All
/// comparisons are against the parents as they were before the call.
pub fn select_and_archive<R: Rng + ?Sized>(
    population: &mut [Individual],
    children: Vec<Individual>,
    archive: &mut Archive,
    rng: &mut R,
) -> Result<Vec<bool>> {
    if population.len() != children.len() {
        return Err(Error::Shape { expected: population.len(), got: children.len() });
    }
    let mut success = Vec::with_capacity(children.len());
    for (parent, child) in population.iter_mut().zip(children) {
        let ok = child.objective <= parent.objective;
        if ok {
            archive.push(std::mem::replace(parent, child));
        }
        success.push(ok);
    }
    archive.truncate(rng);
    Ok(success)
}

/// Run one DE variant on `problem` until the evaluation budget is spent.
///
/// Random draws come from one stream in a fixed order per iteration: PCM
/// generation, then for each target its mutation indices and crossover
/// draws, then archive truncation, then the PCM update. A final iteration
/// cut short by the budget selects only among the children it evaluated and
/// skips the PCM update.
pub fn run<O: Observer + ?Sized>(config: &RunConfig, problem: &ProblemSpec, observer: &mut O) -> Result<RunLog> {
    config.validate()?;
    let mut rng = config.stream(problem);
    let domains = &problem.domains;
    let mut evaluator = Evaluator::new(problem, config.budget);

    let mut population = {
        let evaluator = &mut evaluator;
        let observer = &mut *observer;
        init_population(config.mu, domains, &mut rng, config.repair, |g| {
            let f = evaluator.evaluate(g)?;
            observer.on_evaluation(evaluator.used(), evaluator.best_delta());
            Ok(f)
        })?
    };
    let meta = RunMeta::new(config, problem);
    if population.len() < config.mu {
        let evaluations = evaluator.used();
        return Ok(RunLog { meta, trace: evaluator.into_trace(), evaluations });
    }

    let mut archive = Archive::new(config.archive);
    let mut pcm = Pcm::new(config.pcm, config.mu, config.max_iterations(), &mut rng)?;
    let greed = GreedinessConfig { p: config.p, archive_size: config.archive };

    let mut t = 1u64;
    while evaluator.remaining() > 0 {
        let pairs = pcm.generate(t, &mut rng);
        let mut children = Vec::with_capacity(config.mu);
        {
            let pool = MutationPool::new(&population, archive.entries());
            for (i, pair) in pairs.iter().enumerate() {
                if evaluator.remaining() == 0 {
                    break;
                }
                let parent = &population[i].genome;
                let mutant = mutate(config.strategy, i, &pool, pair.s, &greed, &mut rng)?;
                let mutant = clamp_to_bounds(&mutant, parent, domains);
                let trial = binomial_crossover(parent, &mutant, pair.c, &mut rng)?;
                let (objective, genome) = apply_repair(config.repair, trial, domains, |g| {
                    let f = evaluator.evaluate(g)?;
                    observer.on_evaluation(evaluator.used(), evaluator.best_delta());
                    Ok(f)
                })?;
                children.push(Individual { genome, objective });
            }
        }

        let evaluated = children.len();
        let success = select_and_archive(&mut population[..evaluated], children, &mut archive, &mut rng)?;
        if evaluated == config.mu {
            pcm.update(&pairs, &success, &mut rng)?;
        }

        let (div, nsame) = diagnostics(&population);
        observer.on_iteration(&IterationRecord {
            t,
            evals: evaluator.used(),
            div,
            nsame,
            mean_success: mean_successful_params(&pairs[..evaluated], &success),
            pcm: &pcm,
            pairs: &pairs[..evaluated],
            success: &success,
            population: &population,
            archive: &archive,
        });
        t += 1;
    }

    let evaluations = evaluator.used();
    Ok(RunLog { meta, trace: evaluator.into_trace(), evaluations })
}
