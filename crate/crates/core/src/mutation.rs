//! Differential mutation strategies.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::de::Individual;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Rand1,
    Rand2,
    Best1,
    Best2,
    CurrentToRand1,
    CurrentToBest1,
    CurrentToPBest1,
    RandToPBest1,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Rand1,
        StrategyKind::Rand2,
        StrategyKind::Best1,
        StrategyKind::Best2,
        StrategyKind::CurrentToRand1,
        StrategyKind::CurrentToBest1,
        StrategyKind::CurrentToPBest1,
        StrategyKind::RandToPBest1,
    ];

    pub fn id(self) -> &'static str {
        match self {
            StrategyKind::Rand1 => "rand1",
            StrategyKind::Rand2 => "rand2",
            StrategyKind::Best1 => "best1",
            StrategyKind::Best2 => "best2",
            StrategyKind::CurrentToRand1 => "ctr1",
            StrategyKind::CurrentToBest1 => "ctb1",
            StrategyKind::CurrentToPBest1 => "ctp1",
            StrategyKind::RandToPBest1 => "rtp1",
        }
    }

    /// Smallest population this strategy can draw its operands from.
    pub fn min_population(self) -> usize {
        match self {
            StrategyKind::Rand2 => 6,
            StrategyKind::Best2 => 5,
            StrategyKind::Rand1 | StrategyKind::CurrentToRand1 | StrategyKind::RandToPBest1 => 4,
            StrategyKind::Best1 | StrategyKind::CurrentToBest1 | StrategyKind::CurrentToPBest1 => 3,
        }
    }

    pub fn uses_archive(self) -> bool {
        matches!(self, StrategyKind::CurrentToPBest1 | StrategyKind::RandToPBest1)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| Error::UnknownId {
            what: "strategy",
            got: s.to_string(),
            valid: Self::ALL.map(|k| k.id()).join(", "),
        })
    }
}

/// Greediness of the p-best strategies and the archive capacity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedinessConfig {
    pub p: f64,
    pub archive_size: usize,
}

/// Draw `count` pairwise-distinct indices from `0..pool_size`, none in
/// `exclude`, by sequential rejection sampling.
pub fn distinct_indices<R: Rng + ?Sized>(
    exclude: &[usize],
    count: usize,
    pool_size: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut blocked: Vec<usize> = exclude.iter().copied().filter(|&e| e < pool_size).collect();
    blocked.sort_unstable();
    blocked.dedup();
    let available = pool_size - blocked.len();
    if available < count {
        return Err(Error::Sampling { count, available });
    }
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let r = rng.random_range(0..pool_size);
        if !blocked.contains(&r) && !picked.contains(&r) {
            picked.push(r);
        }
    }
    Ok(picked)
}

/// Indices `0..len` ordered by objective, ties kept in index order.
fn ranking(population: &[Individual]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[a].objective.total_cmp(&population[b].objective));
    order
}

fn pbest_count(p: f64, mu: usize) -> usize {
    ((p * mu as f64).floor() as usize).max(2).min(mu)
}

/// Uniform choice among the best `max(floor(p * mu), 2)` individuals.
pub fn select_pbest<R: Rng + ?Sized>(population: &[Individual], p: f64, rng: &mut R) -> Result<usize> {
    if population.len() < 2 {
        return Err(Error::PopulationTooSmall { size: population.len(), need: 2 });
    }
    let order = ranking(population);
    Ok(order[rng.random_range(0..pbest_count(p, population.len()))])
}

/// The population and archive as seen by every mutation of one iteration.
///
/// The ranking (and hence `x_best`) is computed once, before any
/// replacement happens.
pub struct MutationPool<'a> {
    population: &'a [Individual],
    archive: &'a [Individual],
    order: Vec<usize>,
}

impl<'a> MutationPool<'a> {
    pub fn new(population: &'a [Individual], archive: &'a [Individual]) -> Self {
        Self { population, archive, order: ranking(population) }
    }

    /// Index of the best individual, lowest index on ties.
    pub fn best(&self) -> usize {
        self.order[0]
    }

    fn pbest<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> usize {
        self.order[rng.random_range(0..pbest_count(p, self.population.len()))]
    }

    fn member(&self, index: usize) -> &[f64] {
        &self.population[index].genome
    }

    /// Index into population followed by archive.
    fn union_member(&self, index: usize) -> &[f64] {
        match index.checked_sub(self.population.len()) {
            None => &self.population[index].genome,
            Some(a) => &self.archive[a].genome,
        }
    }
}

/// `base + s * sum_k (plus_k - minus_k)`.
fn combine(base: &[f64], s: f64, diffs: &[(&[f64], &[f64])]) -> Vec<f64> {
    let mut v = base.to_vec();
    for (plus, minus) in diffs {
        for ((vj, a), b) in v.iter_mut().zip(*plus).zip(*minus) {
            *vj += s * (a - b);
        }
    }
    v
}

/// Build the mutant vector of target `i`. Bound handling is left to the caller.
pub fn mutate<R: Rng + ?Sized>(
    strategy: StrategyKind,
    i: usize,
    pool: &MutationPool<'_>,
    s: f64,
    cfg: &GreedinessConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mu = pool.population.len();
    if mu < strategy.min_population() {
        return Err(Error::PopulationTooSmall { size: mu, need: strategy.min_population() });
    }
    let x = |k: usize| pool.member(k);
    let xi = x(i);
    let v = match strategy {
        StrategyKind::Rand1 => {
            let r = distinct_indices(&[i], 3, mu, rng)?;
            combine(x(r[0]), s, &[(x(r[1]), x(r[2]))])
        }
        StrategyKind::Rand2 => {
            let r = distinct_indices(&[i], 5, mu, rng)?;
            combine(x(r[0]), s, &[(x(r[1]), x(r[2])), (x(r[3]), x(r[4]))])
        }
        StrategyKind::Best1 => {
            let r = distinct_indices(&[i], 2, mu, rng)?;
            combine(x(pool.best()), s, &[(x(r[0]), x(r[1]))])
        }
        StrategyKind::Best2 => {
            let r = distinct_indices(&[i], 4, mu, rng)?;
            combine(x(pool.best()), s, &[(x(r[0]), x(r[1])), (x(r[2]), x(r[3]))])
        }
        StrategyKind::CurrentToRand1 => {
            let r = distinct_indices(&[i], 3, mu, rng)?;
            combine(xi, s, &[(x(r[0]), xi), (x(r[1]), x(r[2]))])
        }
        StrategyKind::CurrentToBest1 => {
            let r = distinct_indices(&[i], 2, mu, rng)?;
            combine(xi, s, &[(x(pool.best()), xi), (x(r[0]), x(r[1]))])
        }
        StrategyKind::CurrentToPBest1 => {
            let pbest = pool.pbest(cfg.p, rng);
            let r1 = distinct_indices(&[i, pbest], 1, mu, rng)?[0];
            let r2 = distinct_indices(&[i, pbest, r1], 1, mu + pool.archive.len(), rng)?[0];
            combine(xi, s, &[(x(pbest), xi), (x(r1), pool.union_member(r2))])
        }
        StrategyKind::RandToPBest1 => {
            let pbest = pool.pbest(cfg.p, rng);
            let r = distinct_indices(&[i, pbest], 2, mu, rng)?;
            let r3 = distinct_indices(&[i, pbest, r[0], r[1]], 1, mu + pool.archive.len(), rng)?[0];
            let xr1 = x(r[0]);
            combine(xr1, s, &[(x(pbest), xr1), (x(r[1]), pool.union_member(r3))])
        }
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    fn ind(genome: Vec<f64>, objective: f64) -> Individual {
        Individual { genome, objective }
    }

    fn population(mu: usize, n: usize) -> Vec<Individual> {
        (0..mu).map(|k| ind(vec![k as f64; n], (mu - k) as f64)).collect()
    }

    #[test]
    fn parse_ids() {
        for k in StrategyKind::ALL {
            assert_eq!(k.id().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("ctp/1".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn distinct_indices_exclude_target() {
        let mut rng = derive_stream("t", &[]);
        for i in 0..100 {
            let r = distinct_indices(&[i], 3, 100, &mut rng).unwrap();
            assert!(!r.contains(&i));
            assert!(r[0] != r[1] && r[1] != r[2] && r[0] != r[2]);
        }
    }

    #[test]
    fn distinct_indices_forced_and_exhausted() {
        let mut rng = derive_stream("t", &[]);
        for _ in 0..20 {
            assert_eq!(distinct_indices(&[0], 1, 2, &mut rng).unwrap(), vec![1]);
        }
        assert!(matches!(distinct_indices(&[0, 1], 2, 3, &mut rng), Err(Error::Sampling { count: 2, available: 1 })));
    }

    #[test]
    fn pbest_pool_sizes() {
        assert_eq!(pbest_count(0.05, 100), 5);
        assert_eq!(pbest_count(0.05, 20), 2);
        assert_eq!(pbest_count(1.0, 37), 37);
    }

    #[test]
    fn pbest_draws_only_top() {
        let mut rng = derive_stream("t", &[]);
        // objective decreases with index, so the best 5 are 95..=99
        let pop = population(100, 2);
        let mut seen = [false; 100];
        for _ in 0..2000 {
            seen[select_pbest(&pop, 0.05, &mut rng).unwrap()] = true;
        }
        let hit: Vec<usize> = (0..100).filter(|&k| seen[k]).collect();
        assert_eq!(hit, vec![95, 96, 97, 98, 99]);
        assert!(select_pbest(&pop[..1], 0.05, &mut rng).is_err());
    }

    #[test]
    fn pbest_ties_follow_index_order() {
        let pop: Vec<Individual> = (0..20).map(|k| ind(vec![k as f64], 1.0)).collect();
        let mut rng = derive_stream("t", &[]);
        for _ in 0..200 {
            assert!(select_pbest(&pop, 0.05, &mut rng).unwrap() < 2);
        }
    }

    #[test]
    fn rand1_formula() {
        let (a, b, c) = (vec![0.0, 0.0], vec![2.0, 4.0], vec![0.0, 2.0]);
        assert_eq!(combine(&a, 0.5, &[(&b, &c)]), vec![1.0, 1.0]);
    }

    #[test]
    fn zero_differences_collapse_to_base() {
        // every member identical except target 0
        let mut pop: Vec<Individual> = (0..8).map(|_| ind(vec![3.0, -1.0], 1.0)).collect();
        pop[0] = ind(vec![0.5, 0.5], 0.0);
        let archive = vec![ind(vec![3.0, -1.0], 2.0)];
        let pool = MutationPool::new(&pop, &archive);
        let cfg = GreedinessConfig { p: 0.05, archive_size: 8 };
        let mut rng = derive_stream("t", &[]);
        let target = 0;
        assert_eq!(mutate(StrategyKind::Rand1, target, &pool, 0.7, &cfg, &mut rng).unwrap(), vec![3.0, -1.0]);
        assert_eq!(mutate(StrategyKind::Rand2, target, &pool, 0.7, &cfg, &mut rng).unwrap(), vec![3.0, -1.0]);
        assert_eq!(mutate(StrategyKind::Best1, target, &pool, 0.7, &cfg, &mut rng).unwrap(), vec![0.5, 0.5]);
        assert_eq!(mutate(StrategyKind::Best2, target, &pool, 0.7, &cfg, &mut rng).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn current_to_rand_with_unit_scale() {
        // with s = 1, x_i + (x_r1 - x_i) + (x_r2 - x_r3) = x_r1 + x_r2 - x_r3
        let pop = population(4, 1);
        let pool = MutationPool::new(&pop, &[]);
        let cfg = GreedinessConfig { p: 0.05, archive_size: 0 };
        let mut rng = derive_stream("ctr", &[]);
        let mut probe = rng.clone();
        let r = distinct_indices(&[0], 3, 4, &mut probe).unwrap();
        let v = mutate(StrategyKind::CurrentToRand1, 0, &pool, 1.0, &cfg, &mut rng).unwrap();
        assert_eq!(v, vec![(r[0] + r[1]) as f64 - r[2] as f64]);
    }

    #[test]
    fn scale_linearity() {
        let pop: Vec<Individual> = (0..10).map(|k| ind(vec![k as f64, (k * k) as f64 * 0.1], k as f64)).collect();
        let pool = MutationPool::new(&pop, &[]);
        let cfg = GreedinessConfig { p: 0.2, archive_size: 0 };
        for strategy in StrategyKind::ALL {
            let rng = derive_stream("lin", &[&strategy]);
            let v0 = mutate(strategy, 4, &pool, 0.0, &cfg, &mut rng.clone()).unwrap();
            let v1 = mutate(strategy, 4, &pool, 0.5, &cfg, &mut rng.clone()).unwrap();
            let v2 = mutate(strategy, 4, &pool, 1.0, &cfg, &mut rng.clone()).unwrap();
            for j in 0..2 {
                let d1 = v1[j] - v0[j];
                let d2 = v2[j] - v0[j];
                assert!((d2 - 2.0 * d1).abs() < 1e-12, "{strategy}");
            }
        }
    }

    #[test]
    fn too_small_population() {
        let pop = population(5, 1);
        let pool = MutationPool::new(&pop, &[]);
        let cfg = GreedinessConfig { p: 0.05, archive_size: 0 };
        let mut rng = derive_stream("t", &[]);
        assert!(matches!(
            mutate(StrategyKind::Rand2, 0, &pool, 0.5, &cfg, &mut rng),
            Err(Error::PopulationTooSmall { size: 5, need: 6 })
        ));
    }

    #[test]
    fn archive_members_are_reachable() {
        let pop = population(6, 1);
        let archive: Vec<Individual> = (0..6).map(|k| ind(vec![100.0 + k as f64], 0.0)).collect();
        let pool = MutationPool::new(&pop, &archive);
        let cfg = GreedinessConfig { p: 0.05, archive_size: 6 };
        let mut rng = derive_stream("t", &[]);
        // ctp1 with x_pbest = x_i contributes s*(x_r1 - x~_r2); archive entries make it large
        let hits = (0..500)
            .filter(|_| {
                let v = mutate(StrategyKind::CurrentToPBest1, 2, &pool, 1.0, &cfg, &mut rng).unwrap();
                v[0] < -50.0
            })
            .count();
        assert!(hits > 0);
    }
}
