//! Mixed-integer box domains and the test-function suite.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::derive_stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Integer,
    Continuous,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariableDomain {
    pub kind: DomainKind,
    pub lo: f64,
    pub hi: f64,
}

impl VariableDomain {
    pub const fn integer(lo: f64, hi: f64) -> Self {
        Self { kind: DomainKind::Integer, lo, hi }
    }

    pub const fn continuous(lo: f64, hi: f64) -> Self {
        Self { kind: DomainKind::Continuous, lo, hi }
    }

    pub fn is_integer(&self) -> bool {
        self.kind == DomainKind::Integer
    }

    /// Whether `value` is a feasible setting of this variable.
    pub fn admits(&self, value: f64) -> bool {
        let in_box = value >= self.lo && value <= self.hi;
        match self.kind {
            DomainKind::Integer => in_box && value == value.round(),
            DomainKind::Continuous => in_box,
        }
    }
}

impl fmt::Display for VariableDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Integer => write!(f, "Int[{},{}]", self.lo, self.hi),
            DomainKind::Continuous => write!(f, "Cont[{},{}]", self.lo, self.hi),
        }
    }
}

/// Upper bounds of the four integer blocks; the fifth block is continuous.
const INTEGER_BLOCK_HI: [f64; 4] = [1.0, 3.0, 7.0, 15.0];
const CONTINUOUS_BOUND: f64 = 5.0;

/// The five-block mixed-integer layout: `{0,1}`, `{0..3}`, `{0..7}`,
/// `{0..15}` and `[-5,5]`, each covering `n/5` consecutive variables.
pub fn make_domain_layout(n: usize) -> Result<Vec<VariableDomain>> {
    if n == 0 || !n.is_multiple_of(5) {
        return Err(Error::Dimension(n));
    }
    let block = n / 5;
    let mut domains = Vec::with_capacity(n);
    for hi in INTEGER_BLOCK_HI {
        domains.extend(std::iter::repeat_n(VariableDomain::integer(0.0, hi), block));
    }
    domains.extend(std::iter::repeat_n(VariableDomain::continuous(-CONTINUOUS_BOUND, CONTINUOUS_BOUND), block));
    Ok(domains)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    Sphere,
    EllipsoidSep,
    RastriginSep,
    Rosenbrock,
    RastriginRot,
    StepEllipsoid,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 6] = [
        FunctionKind::Sphere,
        FunctionKind::EllipsoidSep,
        FunctionKind::RastriginSep,
        FunctionKind::Rosenbrock,
        FunctionKind::RastriginRot,
        FunctionKind::StepEllipsoid,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FunctionKind::Sphere => "sphere",
            FunctionKind::EllipsoidSep => "ellipsoid-sep",
            FunctionKind::RastriginSep => "rastrigin-sep",
            FunctionKind::Rosenbrock => "rosenbrock",
            FunctionKind::RastriginRot => "rastrigin-rot",
            FunctionKind::StepEllipsoid => "step-ellipsoid",
        }
    }

    fn is_rotated(self) -> bool {
        matches!(self, FunctionKind::RastriginRot | FunctionKind::StepEllipsoid)
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| Error::UnknownId {
            what: "function",
            got: s.to_string(),
            valid: Self::ALL.map(|k| k.id()).join(", "),
        })
    }
}

/// One instance of a test function on the mixed-integer domain.
///
/// Every kernel is written as `g(x - x_opt)` with `g >= 0` and `g(0) = 0`,
/// so the optimum value is exactly `f_opt = 0`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub function: FunctionKind,
    pub n: usize,
    pub domains: Vec<VariableDomain>,
    pub instance_seed: u64,
    pub x_opt: Vec<f64>,
    pub f_opt: f64,
    /// Row-major `n x n` orthogonal matrix for the non-separable kernels.
    rotation: Option<Vec<f64>>,
    /// Per-coordinate conditioning of the Rastrigin kernels.
    scales: Vec<f64>,
}

impl ProblemSpec {
    pub fn is_feasible(&self, genome: &[f64]) -> bool {
        genome.len() == self.n && genome.iter().zip(&self.domains).all(|(&v, d)| d.admits(v))
    }

    /// Evaluate the kernel without any feasibility check.
    fn kernel(&self, genome: &[f64]) -> f64 {
        let z: Vec<f64> = genome.iter().zip(&self.x_opt).map(|(x, o)| x - o).collect();
        let z = match &self.rotation {
            Some(r) => rotate(r, &z),
            None => z,
        };
        match self.function {
            FunctionKind::Sphere => z.iter().map(|v| v * v).sum(),
            FunctionKind::EllipsoidSep => ellipsoid(&z, 6.0),
            FunctionKind::RastriginSep | FunctionKind::RastriginRot => {
                let scaled: Vec<f64> = z.iter().zip(&self.scales).map(|(v, l)| v * l).collect();
                rastrigin(&scaled)
            }
            FunctionKind::Rosenbrock => rosenbrock(&z),
            FunctionKind::StepEllipsoid => step_ellipsoid(&z),
        }
    }
}

fn rotate(matrix: &[f64], z: &[f64]) -> Vec<f64> {
    matrix.chunks_exact(z.len()).map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum()).collect()
}

fn ellipsoid(z: &[f64], log_condition: f64) -> f64 {
    let denom = (z.len() - 1).max(1) as f64;
    z.iter().enumerate().map(|(j, v)| 10f64.powf(log_condition * j as f64 / denom) * v * v).sum()
}

/// Diagonal conditioning `10^(j / (2 (n - 1)))`. Integer steps of the
/// shifted coordinates then fall off the cosine period, which keeps the
/// integer block multimodal.
fn rastrigin_scales(n: usize) -> Vec<f64> {
    let denom = (n - 1).max(1) as f64;
    (0..n).map(|j| 10f64.powf(0.5 * j as f64 / denom)).collect()
}

// Each term is z^2 + 10 (1 - cos 2 pi z), non-negative in floating point.
fn rastrigin(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v + 10.0 * (1.0 - (2.0 * std::f64::consts::PI * v).cos())).sum()
}

fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| {
            let (a, b) = (w[0] + 1.0, w[1] + 1.0);
            100.0 * (a * a - b).powi(2) + (a - 1.0).powi(2)
        })
        .sum()
}

fn step_ellipsoid(z: &[f64]) -> f64 {
    let denom = (z.len() - 1).max(1) as f64;
    let steps: f64 = z
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let q = if v.abs() > 0.5 { v.round() } else { v };
            10f64.powf(2.0 * j as f64 / denom) * q * q
        })
        .sum();
    steps + 0.01 * z.iter().map(|v| v * v).sum::<f64>()
}

/// Random orthogonal matrix by Gram-Schmidt on Gaussian rows.
fn random_rotation<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for r in &rows {
            let dot: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(r).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            rows.push(v);
        }
    }
    rows.concat()
}

/// Build the instance `instance_seed` of `kind` in dimension `n`.
pub fn make_problem(kind: FunctionKind, n: usize, instance_seed: u64) -> Result<ProblemSpec> {
    let domains = make_domain_layout(n)?;
    let mut rng = derive_stream("instance", &[&kind, &n, &instance_seed]);
    let x_opt = domains
        .iter()
        .map(|d| match d.kind {
            DomainKind::Integer => rng.random_range(d.lo as i64..=d.hi as i64) as f64,
            DomainKind::Continuous => rng.random_range(d.lo..=d.hi),
        })
        .collect();
    let rotation = kind.is_rotated().then(|| random_rotation(n, &mut rng));
    let scales = match kind {
        FunctionKind::RastriginSep | FunctionKind::RastriginRot => rastrigin_scales(n),
        _ => Vec::new(),
    };
    Ok(ProblemSpec { function: kind, n, domains, instance_seed, x_opt, f_opt: 0.0, rotation, scales })
}

/// The black-box oracle. Rejects genomes that violate integrality or bounds.
pub fn evaluate(spec: &ProblemSpec, genome: &[f64]) -> Result<f64> {
    if genome.len() != spec.n {
        return Err(Error::Shape { expected: spec.n, got: genome.len() });
    }
    if let Some((index, (&value, d))) = genome.iter().zip(&spec.domains).enumerate().find(|(_, (&v, d))| !d.admits(v)) {
        return Err(Error::Infeasible { index, value, domain: d.to_string() });
    }
    Ok(spec.kernel(genome))
}
