//! The experiment sweep: one run per (function, dimension, strategy, PCM,
//! repair, instance), each written to its own pair of files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bench::diagnostics::DiagnosticsRecorder;
use crate::bench::logio::{format_diagnostics, format_run_log, read_run_log, write_atomic};
use crate::de::{run, RunConfig, RunLog, RunMeta};
use crate::error::{Error, Result};
use crate::mutation::StrategyKind;
use crate::pcm::PcmKind;
use crate::problem::{make_domain_layout, make_problem, FunctionKind};
use crate::variation::RepairPolicy;

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub functions: Vec<FunctionKind>,
    pub dims: Vec<usize>,
    pub strategies: Vec<StrategyKind>,
    pub pcms: Vec<PcmKind>,
    pub repairs: Vec<RepairPolicy>,
    /// Instances `1..=runs` are used for every function.
    pub runs: u64,
    pub mu: usize,
    pub p: f64,
    /// Archive capacity; `None` means equal to `mu`.
    pub archive: Option<usize>,
    pub budget_multiplier: u64,
    pub seed: u64,
}

impl SweepPlan {
    /// The experimental defaults for the given cross-product.
    pub fn new(
        functions: Vec<FunctionKind>,
        dims: Vec<usize>,
        strategies: Vec<StrategyKind>,
        pcms: Vec<PcmKind>,
        repairs: Vec<RepairPolicy>,
    ) -> Self {
        Self {
            functions,
            dims,
            strategies,
            pcms,
            repairs,
            runs: 15,
            mu: RunConfig::DEFAULT_MU,
            p: RunConfig::DEFAULT_P,
            archive: None,
            budget_multiplier: RunConfig::DEFAULT_BUDGET_MULTIPLIER,
            seed: 0,
        }
    }

    /// Expand the cross-product, validating every configuration up front.
    pub fn jobs(&self) -> Result<Vec<SweepJob>> {
        let mut jobs = Vec::new();
        for &function in &self.functions {
            for &n in &self.dims {
                make_domain_layout(n)?;
                for &strategy in &self.strategies {
                    for &pcm in &self.pcms {
                        for &repair in &self.repairs {
                            let config = RunConfig {
                                mu: self.mu,
                                strategy,
                                pcm,
                                repair,
                                p: self.p,
                                archive: self.archive.unwrap_or(self.mu),
                                budget: self.budget_multiplier * n as u64,
                                seed: self.seed,
                            };
                            config.validate()?;
                            for instance in 1..=self.runs {
                                jobs.push(SweepJob { function, n, instance, config: config.clone() });
                            }
                        }
                    }
                }
            }
        }
        if jobs.is_empty() {
            return Err(Error::Config("the sweep plan is empty".into()));
        }
        Ok(jobs)
    }
}

#[derive(Clone, Debug)]
pub struct SweepJob {
    pub function: FunctionKind,
    pub n: usize,
    pub instance: u64,
    pub config: RunConfig,
}

impl SweepJob {
    pub fn file_stem(&self) -> String {
        format!(
            "{}_n{}_{}_{}_{}_i{}",
            self.function, self.n, self.config.strategy, self.config.pcm, self.config.repair, self.instance
        )
    }

    pub fn log_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.file_stem()))
    }

    pub fn diag_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.diag.csv", self.file_stem()))
    }

    /// Complete when both files exist and the log parses with matching metadata.
    fn is_complete(&self, dir: &Path) -> bool {
        if !self.diag_path(dir).exists() {
            return false;
        }
        match read_run_log(&self.log_path(dir)) {
            Ok(log) => log.meta.budget == self.config.budget && log.meta.seed == self.config.seed,
            Err(_) => false,
        }
    }

    /// Run the job and write its log and diagnostics into `dir`.
    pub fn execute(&self, dir: &Path) -> Result<RunLog> {
        let problem = make_problem(self.function, self.n, self.instance)?;
        let mut recorder = DiagnosticsRecorder::default();
        let log = run(&self.config, &problem, &mut recorder)?;
        write_atomic(&self.diag_path(dir), &format_diagnostics(&RunMeta::new(&self.config, &problem), &recorder.rows))?;
        write_atomic(&self.log_path(dir), &format_run_log(&log))?;
        Ok(log)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub completed: usize,
    pub skipped: usize,
    pub evaluations: u64,
}

/// Run every job of `plan` into `dir` on `threads` worker threads, skipping
/// jobs whose files are already complete. Output does not depend on
/// `threads`.
pub fn sweep(plan: &SweepPlan, dir: &Path, threads: usize) -> Result<SweepSummary> {
    let jobs = plan.jobs()?;
    std::fs::create_dir_all(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let outcomes: Vec<Result<Option<u64>>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| if job.is_complete(dir) { Ok(None) } else { job.execute(dir).map(|log| Some(log.evaluations)) })
            .collect()
    });
    let mut summary = SweepSummary::default();
    for outcome in outcomes {
        match outcome? {
            Some(evals) => {
                summary.completed += 1;
                summary.evaluations += evals;
            }
            None => summary.skipped += 1,
        }
    }
    Ok(summary)
}
