//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::cell::OnceCell;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mixde::bench::{ecdf, log_grid, make_targets, GRID_POINTS};
use mixde::{
    evaluate, lehmer_mean, make_problem, repair_round, run, select_and_archive, Archive, FunctionKind, Individual,
    IterationRecord, Observer, ParamPair, Pcm, PcmKind, ProblemSpec, RepairPolicy, RunConfig, RunLog, RunMeta,
    StrategyKind,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

// 1 -------------------------------------------------------------------------

fn mixde_run(out: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_mixde"))
        .args(["run", "--function", "rastrigin-rot", "--dim", "10", "--instance", "3"])
        .args(["--strategy", "ctp1", "--pcm", "p-sha", "--repair", "baldwin", "--seed", "17"])
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(String::from_utf8_lossy(&output.stderr).into_owned());
    }
    Ok(start.elapsed())
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ta = mixde_run(a.path())?;
    let tb = mixde_run(b.path())?;
    let stem = "rastrigin-rot_n10_ctp1_p-sha_baldwin_i3";
    let mut identical = true;
    for name in [format!("{stem}.csv"), format!("{stem}.diag.csv")] {
        let x = std::fs::read(a.path().join(&name)).map_err(|e| format!("{name}: {e}"))?;
        let y = std::fs::read(b.path().join(&name)).map_err(|e| format!("{name}: {e}"))?;
        identical &= x == y;
    }
    let slowest = ta.max(tb);
    check(
        identical && slowest < Duration::from_secs(60),
        format!("run log and diagnostics byte-identical, slowest run {:.2}s", slowest.as_secs_f64()),
        format!("identical={identical}, slowest run {:.2}s", slowest.as_secs_f64()),
    )
}

// 2 and 6 -------------------------------------------------------------------

/// Audits every iteration by re-evaluating outside the run's evaluation counter.
struct Audit<'p> {
    problem: &'p ProblemSpec,
    repair: RepairPolicy,
    violations: usize,
    best: Vec<f64>,
}

impl Observer for Audit<'_> {
    fn on_evaluation(&mut self, _: u64, f_delta_best: f64) {
        self.best.push(f_delta_best);
    }

    fn on_iteration(&mut self, r: &IterationRecord<'_>) {
        for x in r.population {
            let ok = match self.repair {
                RepairPolicy::Lamarckian => {
                    self.problem.domains.iter().zip(&x.genome).all(|(d, v)| !d.is_integer() || v.fract() == 0.0)
                }
                RepairPolicy::Baldwinian => {
                    let repaired = repair_round(&x.genome, &self.problem.domains);
                    evaluate(self.problem, &repaired).map(|f| f == x.objective).unwrap_or(false)
                }
            };
            self.violations += !ok as usize;
        }
    }
}

struct FeasibilitySweep {
    violations: usize,
    runs: usize,
    non_monotone_runs: usize,
}

fn feasibility_sweep() -> FeasibilitySweep {
    let problem = make_problem(FunctionKind::Sphere, 10, 1).unwrap();
    let mut out = FeasibilitySweep { violations: 0, runs: 0, non_monotone_runs: 0 };
    for strategy in StrategyKind::ALL {
        for repair in RepairPolicy::ALL {
            let mut config = RunConfig::defaults(10, strategy, PcmKind::PJa, repair, 0);
            config.budget = 1_000 * 10;
            let mut audit = Audit { problem: &problem, repair, violations: 0, best: Vec::new() };
            run(&config, &problem, &mut audit).unwrap();
            out.runs += 1;
            out.violations += audit.violations;
            out.non_monotone_runs += audit.best.windows(2).any(|w| w[1] > w[0]) as usize;
        }
    }
    out
}

fn feasibility(sweep: &FeasibilitySweep) -> Outcome {
    check(
        sweep.violations == 0 && sweep.runs == 16,
        format!("{} runs, 0 violations", sweep.runs),
        format!("{} violations over {} runs", sweep.violations, sweep.runs),
    )
}

fn selection(sweep: &FeasibilitySweep) -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 500, failure_persistence: None, ..Config::default() });
    let objectives = prop::collection::vec((0u8..4, 0u8..4), 1..40);
    let property = runner.run(&(objectives, any::<u64>()), |(pairs, seed)| {
        let parent = |k: usize, f: u8| Individual { genome: vec![k as f64, 0.0], objective: f as f64 };
        let child = |k: usize, f: u8| Individual { genome: vec![k as f64, 1.0], objective: f as f64 };
        let mut population: Vec<Individual> = pairs.iter().enumerate().map(|(k, &(f, _))| parent(k, f)).collect();
        let children: Vec<Individual> = pairs.iter().enumerate().map(|(k, &(_, g))| child(k, g)).collect();
        let mut archive = Archive::new(pairs.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let success = select_and_archive(&mut population, children.clone(), &mut archive, &mut rng).unwrap();
        for (k, &(f, g)) in pairs.iter().enumerate() {
            let replaced = g <= f;
            prop_assert_eq!(success[k], replaced);
            prop_assert_eq!(&population[k], if replaced { &children[k] } else { &parent(k, f) });
        }
        Ok(())
    });
    check(
        property.is_ok() && sweep.non_monotone_runs == 0,
        format!("ties replace over 500 cases, best-so-far monotone in all {} runs", sweep.runs),
        format!("property: {property:?}, non-monotone runs: {}", sweep.non_monotone_runs),
    )
}

// 3 -------------------------------------------------------------------------

fn sin_trajectory(problem: &ProblemSpec) -> Vec<ParamPair> {
    struct Pairs(Vec<ParamPair>);
    impl Observer for Pairs {
        fn on_iteration(&mut self, r: &IterationRecord<'_>) {
            assert!(r.pairs.iter().all(|q| *q == r.pairs[0]));
            self.0.push(r.pairs[0]);
        }
    }
    let mut config = RunConfig::defaults(10, StrategyKind::Rand1, PcmKind::PSin, RepairPolicy::Baldwinian, 0);
    config.budget = 20_000;
    let mut pairs = Pairs(Vec::new());
    run(&config, problem, &mut pairs).unwrap();
    pairs.0
}

fn pcm_oracles() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let lm = lehmer_mean(&[0.2, 0.8]).unwrap();
    if !close(lm, 0.68) {
        failures.push(format!("lehmer mean {lm}"));
    }

    let mut ja = Pcm::new(PcmKind::PJa, 2, 1, &mut rng).unwrap();
    ja.update(&[ParamPair::new(0.2, 0.5), ParamPair::new(0.8, 0.5)], &[true, true], &mut rng).unwrap();
    let m_s = ja.memories().unwrap().0[0];
    if !close(m_s, 0.518) {
        failures.push(format!("P-JA m_s {m_s}"));
    }

    let pc = Pcm::new(PcmKind::PC, 10, 1, &mut rng).unwrap();
    let tau = pc.selection_probabilities().unwrap();
    if !tau.iter().all(|&t| close(t, 1.0 / 9.0)) || !close(tau.iter().sum(), 1.0) {
        failures.push(format!("P-c initial tau {tau:?}"));
    }

    let mu = 20;
    let mut sha = Pcm::new(PcmKind::PSha, mu, 1, &mut rng).unwrap();
    let mut seen = vec![sha.memory_index().unwrap()];
    for t in 1..=25 {
        let pairs = sha.generate(t, &mut rng);
        sha.update(&pairs, &vec![true; mu], &mut rng).unwrap();
        seen.push(sha.memory_index().unwrap());
    }
    let cycle: Vec<usize> = (0..26).map(|k| k % 10 + 1).collect();
    if seen != cycle {
        failures.push(format!("P-SHA index under success {seen:?}"));
    }
    let before = (sha.memory_index(), sha.memories());
    for t in 26..=40 {
        let pairs = sha.generate(t, &mut rng);
        sha.update(&pairs, &vec![false; mu], &mut rng).unwrap();
    }
    if (sha.memory_index(), sha.memories()) != before {
        failures.push("P-SHA state moved under all-fail masks".into());
    }

    let a = sin_trajectory(&make_problem(FunctionKind::Sphere, 10, 1).unwrap());
    let b = sin_trajectory(&make_problem(FunctionKind::StepEllipsoid, 10, 8).unwrap());
    // 100 initial evaluations, then 199 iterations of 100 children
    let t_max = 199.0 + 1.0;
    let mut worst = 0.0f64;
    for (k, q) in a.iter().enumerate() {
        let t = (k + 1) as f64;
        let s = 0.5 * (t / t_max * (2.0 * PI * 0.25 * t).sin() + 1.0);
        let c = 0.5 * (t / t_max * (2.0 * PI * 0.25 * t + PI).sin() + 1.0);
        worst = worst.max((q.s - s).abs()).max((q.c - c).abs());
    }
    if worst > 1e-12 || a.len() != 199 {
        failures.push(format!("P-Sin deviates by {worst} over {} iterations", a.len()));
    }
    if a != b {
        failures.push("P-Sin differs between objectives".into());
    }

    check(
        failures.is_empty(),
        format!("lehmer 0.68, P-JA 0.518, P-c 1/9, P-SHA cycle and freeze, P-Sin max error {worst:.1e}"),
        failures.join("; "),
    )
}

// 4 -------------------------------------------------------------------------

fn ranges() -> Outcome {
    let (mu, iterations) = (100usize, 10_000u64);
    let mut failures = Vec::new();
    for kind in PcmKind::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(kind as u64);
        let mut feedback = ChaCha8Rng::seed_from_u64(1_000 + kind as u64);
        let mut pcm = Pcm::new(kind, mu, iterations + 1, &mut rng).unwrap();
        let bounded = matches!(kind, PcmKind::PJa | PcmKind::PSha);
        let (mut count, mut bad) = (0u64, 0u64);
        for t in 1..=iterations {
            let pairs = pcm.generate(t, &mut rng);
            for q in &pairs {
                count += 1;
                let ok = q.s > 0.0 && (0.0..=1.0).contains(&q.c) && (!bounded || q.s <= 1.0);
                bad += !ok as u64;
            }
            // success rate drifts between 0 and 0.6 so adaptive state keeps moving
            let rate = 0.3 * (1.0 + (t as f64 / 500.0).sin());
            let mask: Vec<bool> = (0..mu).map(|_| feedback.random::<f64>() < rate).collect();
            pcm.update(&pairs, &mask, &mut rng).unwrap();
        }
        if bad > 0 || count != 1_000_000 {
            failures.push(format!("{kind}: {bad} violations in {count} pairs"));
        }
    }
    check(failures.is_empty(), "10 PCMs x 10^6 pairs, 0 violations".into(), failures.join("; "))
}

// 5 -------------------------------------------------------------------------

fn ecdf_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let targets = make_targets(0.0);
    let meta = RunMeta {
        function: FunctionKind::Sphere,
        n: 5,
        instance: 1,
        strategy: StrategyKind::Rand1,
        pcm: PcmKind::NoPcm,
        repair: RepairPolicy::Lamarckian,
        mu: 100,
        seed: 0,
        budget: 0,
    };
    let mut mismatches = 0;
    for _ in 0..200 {
        let budget = rng.random_range(10..=50_000u64);
        let grid = log_grid(budget, GRID_POINTS);
        let logs: Vec<RunLog> = (0..rng.random_range(1..=5))
            .map(|_| {
                let (mut e, mut d, mut trace) = (0u64, f64::INFINITY, Vec::new());
                while e < budget && trace.len() < 40 {
                    e += rng.random_range(1..=budget / 8 + 1);
                    // mix exact target values, values between them and exact grid points
                    let candidate = match rng.random_range(0..3) {
                        0 => targets.deltas[rng.random_range(0..targets.deltas.len())],
                        _ => 10f64.powf(rng.random_range(-9.0..3.0)),
                    };
                    if rng.random_bool(0.2) {
                        e = e.max(grid[rng.random_range(0..grid.len())].ceil() as u64);
                    }
                    if candidate < d && e <= budget {
                        d = candidate;
                        trace.push((e, d));
                    }
                }
                RunLog { meta: RunMeta { budget, ..meta.clone() }, evaluations: e.min(budget), trace }
            })
            .collect();
        let curve = ecdf(&logs, &targets, &grid).unwrap();
        for (k, &g) in grid.iter().enumerate() {
            let mut hits = 0usize;
            for log in &logs {
                for &delta in &targets.deltas {
                    if log.trace.iter().any(|&(e, d)| (e as f64) <= g && d <= delta) {
                        hits += 1;
                    }
                }
            }
            let expected = hits as f64 / (logs.len() * targets.deltas.len()) as f64;
            mismatches += (curve.proportion[k] != expected) as usize;
        }
    }
    check(mismatches == 0, "200 log sets, exact at every grid point".into(), format!("{mismatches} grid points differ"))
}

// 7 -------------------------------------------------------------------------

struct Stagnation {
    mu: usize,
    stagnated: bool,
}

impl Observer for Stagnation {
    fn on_iteration(&mut self, r: &IterationRecord<'_>) {
        let best = r.population.iter().map(|x| x.objective).fold(f64::INFINITY, f64::min);
        if r.nsame == self.mu && best > 1e-8 {
            self.stagnated = true;
        }
    }
}

fn directional() -> Outcome {
    let n = 80;
    let mut solved = [0usize; 2];
    let mut stagnated = 0usize;
    for (slot, pcm) in [PcmKind::PJa, PcmKind::PSha].into_iter().enumerate() {
        for instance in 1..=15 {
            let problem = make_problem(FunctionKind::RastriginSep, n, instance).unwrap();
            let config = RunConfig::defaults(n, StrategyKind::Rand1, pcm, RepairPolicy::Baldwinian, 0);
            let mut watch = Stagnation { mu: config.mu, stagnated: false };
            let log = run(&config, &problem, &mut watch).unwrap();
            solved[slot] += (log.final_delta().unwrap() <= 1e-8) as usize;
            if pcm == PcmKind::PSha {
                stagnated += watch.stagnated as usize;
            }
        }
    }
    let summary = format!("P-JA {}/15 vs P-SHA {}/15 solved, {stagnated} P-SHA runs stagnated", solved[0], solved[1]);
    check(solved[0] > solved[1] && stagnated > 0, summary.clone(), summary)
}

// 8 -------------------------------------------------------------------------

fn sanity_floor() -> Outcome {
    let mut worst = (15usize, PcmKind::NoPcm);
    for pcm in PcmKind::ALL {
        let mut reached = 0;
        for instance in 1..=15 {
            let problem = make_problem(FunctionKind::Sphere, 5, instance).unwrap();
            let config = RunConfig::defaults(5, StrategyKind::Rand1, pcm, RepairPolicy::Lamarckian, 0);
            let log = run(&config, &problem, &mut ()).unwrap();
            reached += (log.final_delta().unwrap() <= 1e-2) as usize;
        }
        if reached < worst.0 {
            worst = (reached, pcm);
        }
    }
    check(
        worst.0 >= 14,
        format!("every PCM reaches 1e-2 in at least {}/15 runs", worst.0),
        format!("{} reaches 1e-2 in only {}/15 runs", worst.1, worst.0),
    )
}

fn main() {
    let sweep = OnceCell::new();
    let sweep = || sweep.get_or_init(feasibility_sweep);
    let criteria: Vec<Criterion> = vec![
        ("determinism", Box::new(determinism)),
        ("feasibility invariants", Box::new(|| feasibility(sweep()))),
        ("pcm oracles", Box::new(pcm_oracles)),
        ("parameter ranges", Box::new(ranges)),
        ("ecdf oracle", Box::new(ecdf_oracle)),
        ("selection semantics", Box::new(|| selection(sweep()))),
        ("rastrigin stagnation", Box::new(directional)),
        ("sphere sanity floor", Box::new(sanity_floor)),
    ];
    let mut failed = 0;
    for (k, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = criterion();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {} ({name}): {msg} [{secs:.1}s]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {msg} [{secs:.1}s]", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
