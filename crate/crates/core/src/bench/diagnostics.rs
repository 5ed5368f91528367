use crate::de::{Individual, IterationRecord, Observer};
use crate::pcm::ParamPair;

/// `(div, nsame)` of a population: the mean distance of non-best members to
/// the best one (divided by the full population size), and how many members
/// share the best objective value.
pub fn diagnostics(population: &[Individual]) -> (f64, usize) {
    let Some(best) =
        population.iter().enumerate().min_by(|a, b| a.1.objective.total_cmp(&b.1.objective)).map(|(k, _)| k)
    else {
        return (0.0, 0);
    };
    let x_best = &population[best];
    let total: f64 = population
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != best)
        .map(|(_, x)| x.genome.iter().zip(&x_best.genome).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .sum();
    let nsame = population.iter().filter(|x| x.objective == x_best.objective).count();
    (total / population.len() as f64, nsame)
}

/// Mean `s` and `c` over successful pairs; `None` if nothing succeeded.
pub fn mean_successful_params(pairs: &[ParamPair], success: &[bool]) -> Option<(f64, f64)> {
    let (mut s, mut c, mut count) = (0.0, 0.0, 0usize);
    for (p, _) in pairs.iter().zip(success).filter(|(_, &ok)| ok) {
        s += p.s;
        c += p.c;
        count += 1;
    }
    (count > 0).then(|| (s / count as f64, c / count as f64))
}

/// One line of the diagnostics log.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: u64,
    pub evals: u64,
    pub div: f64,
    pub nsame: usize,
    pub mean_success: Option<(f64, f64)>,
    pub snapshot: Vec<f64>,
}

/// Observer that keeps one [`DiagnosticsRow`] per iteration.
#[derive(Debug, Default)]
pub struct DiagnosticsRecorder {
    pub rows: Vec<DiagnosticsRow>,
}

impl Observer for DiagnosticsRecorder {
    fn on_iteration(&mut self, r: &IterationRecord<'_>) {
        self.rows.push(DiagnosticsRow {
            t: r.t,
            evals: r.evals,
            div: r.div,
            nsame: r.nsame,
            mean_success: r.mean_success,
            snapshot: r.pcm.snapshot(),
        });
    }
}
