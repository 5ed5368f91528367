//! Binomial crossover, bound handling and rounding repair.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::problem::VariableDomain;

/// How the rounded genome feeds back into the population.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RepairPolicy {
    /// Evaluate the rounded genome, keep the raw one.
    Baldwinian,
    /// Evaluate the rounded genome and store it in place of the raw one.
    Lamarckian,
}

impl RepairPolicy {
    pub const ALL: [RepairPolicy; 2] = [RepairPolicy::Baldwinian, RepairPolicy::Lamarckian];

    pub fn id(self) -> &'static str {
        match self {
            RepairPolicy::Baldwinian => "baldwin",
            RepairPolicy::Lamarckian => "lamarck",
        }
    }
}

impl fmt::Display for RepairPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for RepairPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| Error::UnknownId {
            what: "repair",
            got: s.to_string(),
            valid: Self::ALL.map(|k| k.id()).join(", "),
        })
    }
}

/// Binomial crossover: coordinate `j` comes from the mutant when its uniform
/// draw is `<= c` or `j == j_rand`.
///
/// `j_rand` is drawn first, then one uniform per coordinate in index order.
pub fn binomial_crossover<R: Rng + ?Sized>(parent: &[f64], mutant: &[f64], c: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_len(parent.len(), mutant.len())?;
    if parent.is_empty() {
        return Err(Error::Shape { expected: 1, got: 0 });
    }
    let j_rand = rng.random_range(0..parent.len());
    let mut child = Vec::with_capacity(parent.len());
    for j in 0..parent.len() {
        let u: f64 = rng.random();
        child.push(if u <= c || j == j_rand { mutant[j] } else { parent[j] });
    }
    Ok(child)
}

/// Crossover with explicit `j_rand` (0-based) and uniform draws; the rule
/// behind [`binomial_crossover`], exposed for tracing by hand.
pub fn binomial_crossover_scripted(
    parent: &[f64],
    mutant: &[f64],
    c: f64,
    j_rand: usize,
    draws: &[f64],
) -> Result<Vec<f64>> {
    check_len(parent.len(), mutant.len())?;
    check_len(parent.len(), draws.len())?;
    Ok((0..parent.len()).map(|j| if draws[j] <= c || j == j_rand { mutant[j] } else { parent[j] }).collect())
}

/// Move each out-of-bounds mutant coordinate to the midpoint between the
/// violated bound and the corresponding coordinate of `base`.
pub fn clamp_to_bounds(mutant: &[f64], base: &[f64], domains: &[VariableDomain]) -> Vec<f64> {
    mutant
        .iter()
        .zip(base)
        .zip(domains)
        .map(|((&v, &b), d)| {
            if v < d.lo {
                (d.lo + b) / 2.0
            } else if v > d.hi {
                (d.hi + b) / 2.0
            } else {
                v
            }
        })
        .collect()
}

/// Round integer coordinates to the nearest integer (ties away from zero)
/// and clamp them into their domain. Continuous coordinates pass through.
pub fn repair_round(genome: &[f64], domains: &[VariableDomain]) -> Vec<f64> {
    genome.iter().zip(domains).map(|(&v, d)| if d.is_integer() { v.round().clamp(d.lo, d.hi) } else { v }).collect()
}

/// Evaluate `genome` through the rounding repair under `policy`.
///
/// Returns the objective at the repaired genome and the genome the
/// population should store. Calls `evaluator` exactly once.
pub fn apply_repair<F>(
    policy: RepairPolicy,
    genome: Vec<f64>,
    domains: &[VariableDomain],
    evaluator: F,
) -> Result<(f64, Vec<f64>)>
where
    F: FnOnce(&[f64]) -> Result<f64>,
{
    let repaired = repair_round(&genome, domains);
    let objective = evaluator(&repaired)?;
    let stored = match policy {
        RepairPolicy::Lamarckian => repaired,
        RepairPolicy::Baldwinian => genome,
    };
    Ok((objective, stored))
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape { expected, got })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::make_domain_layout;
    use crate::rng::derive_stream;
    use proptest::prelude::*;

    #[test]
    fn full_rate_copies_mutant() {
        let mut rng = derive_stream("t", &[]);
        let child = binomial_crossover(&[0.0; 6], &[1.0; 6], 1.0, &mut rng).unwrap();
        assert_eq!(child, vec![1.0; 6]);
    }

    #[test]
    fn zero_rate_takes_exactly_one() {
        let mut rng = derive_stream("t", &[]);
        for _ in 0..100 {
            let child = binomial_crossover(&[0.0; 6], &[1.0; 6], 0.0, &mut rng).unwrap();
            assert_eq!(child.iter().filter(|&&v| v == 1.0).count(), 1);
        }
    }

    #[test]
    fn scripted_trace() {
        // j_rand = 3 in 1-based terms
        let child = binomial_crossover_scripted(&[0.0; 3], &[1.0; 3], 0.5, 2, &[0.4, 0.9, 0.6]).unwrap();
        assert_eq!(child, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn crossover_shape_error() {
        let mut rng = derive_stream("t", &[]);
        assert!(matches!(
            binomial_crossover(&[0.0; 3], &[0.0; 2], 0.5, &mut rng),
            Err(Error::Shape { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn clamp_midpoints() {
        let d = [VariableDomain::integer(0.0, 5.0)];
        assert_eq!(clamp_to_bounds(&[-2.0], &[4.0], &d), vec![2.0]);
        assert_eq!(clamp_to_bounds(&[9.0], &[5.0], &d), vec![5.0]);
        assert_eq!(clamp_to_bounds(&[3.3], &[1.0], &d), vec![3.3]);
    }

    #[test]
    fn rounding_examples() {
        let d = [
            VariableDomain::integer(0.0, 3.0),
            VariableDomain::integer(0.0, 3.0),
            VariableDomain::continuous(-5.0, 5.0),
        ];
        assert_eq!(repair_round(&[2.024, 2.5, 3.7], &d), vec![2.0, 3.0, 3.7]);
    }

    #[test]
    fn repair_policies() {
        let d = [VariableDomain::integer(0.0, 3.0), VariableDomain::continuous(-5.0, 5.0)];
        let mut seen = Vec::new();
        let (f, stored) = apply_repair(RepairPolicy::Lamarckian, vec![1.4, 0.2], &d, |x| {
            seen.push(x.to_vec());
            Ok(x[0] + x[1])
        })
        .unwrap();
        assert_eq!(stored, vec![1.0, 0.2]);
        assert_eq!(f, 1.2);

        let (f, stored) = apply_repair(RepairPolicy::Baldwinian, vec![1.4, 0.2], &d, |x| {
            seen.push(x.to_vec());
            Ok(x[0] + x[1])
        })
        .unwrap();
        assert_eq!(stored, vec![1.4, 0.2]);
        assert_eq!(f, 1.2);
        assert_eq!(seen, vec![vec![1.0, 0.2], vec![1.0, 0.2]]);

        for policy in RepairPolicy::ALL {
            let (_, stored) = apply_repair(policy, vec![2.0, 0.2], &d, |_| Ok(0.0)).unwrap();
            assert_eq!(stored, vec![2.0, 0.2]);
        }
    }

    #[test]
    fn repair_propagates_evaluator_error() {
        let d = [VariableDomain::integer(0.0, 3.0)];
        let r = apply_repair(RepairPolicy::Baldwinian, vec![1.0], &d, |_| Err(Error::BudgetExhausted));
        assert!(matches!(r, Err(Error::BudgetExhausted)));
    }

    fn genome_in_box() -> impl Strategy<Value = Vec<f64>> {
        let d = make_domain_layout(10).unwrap();
        d.into_iter().map(|d| d.lo..=d.hi).collect::<Vec<_>>()
    }

    proptest! {
        #[test]
        fn rounding_is_idempotent_and_feasible(g in genome_in_box()) {
            let d = make_domain_layout(10).unwrap();
            let once = repair_round(&g, &d);
            prop_assert_eq!(repair_round(&once, &d), once.clone());
            prop_assert!(once.iter().zip(&d).all(|(&v, d)| d.admits(v)));
        }

        #[test]
        fn clamp_stays_in_box(base in genome_in_box(), raw in prop::collection::vec(-40.0f64..40.0, 10)) {
            let d = make_domain_layout(10).unwrap();
            let out = clamp_to_bounds(&raw, &base, &d);
            prop_assert!(out.iter().zip(&d).all(|(&v, d)| v >= d.lo && v <= d.hi));
        }
    }
}
