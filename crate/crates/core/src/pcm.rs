//! Parameter control methods: how each individual gets its scale factor `s`
//! and crossover rate `c` every iteration.
//!
//! All methods share one cycle: [`Pcm::generate`] at the start of an
//! iteration, then [`Pcm::update`] with the success mask once selection has
//! run. A pair is successful when its child was at least as good as the
//! parent.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use crate::error::{Error, Result};

/// Scale factor and crossover rate for one individual in one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamPair {
    pub s: f64,
    pub c: f64,
}

impl ParamPair {
    pub const fn new(s: f64, c: f64) -> Self {
        Self { s, c }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PcmKind {
    NoPcm,
    PCo,
    PSin,
    PCars,
    PJ,
    PJa,
    PSha,
    PEps,
    PCoBi,
    PC,
}

impl PcmKind {
    pub const ALL: [PcmKind; 10] = [
        PcmKind::NoPcm,
        PcmKind::PCo,
        PcmKind::PSin,
        PcmKind::PCars,
        PcmKind::PJ,
        PcmKind::PJa,
        PcmKind::PSha,
        PcmKind::PEps,
        PcmKind::PCoBi,
        PcmKind::PC,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PcmKind::NoPcm => "nopcm",
            PcmKind::PCo => "p-co",
            PcmKind::PSin => "p-sin",
            PcmKind::PCars => "p-cars",
            PcmKind::PJ => "p-j",
            PcmKind::PJa => "p-ja",
            PcmKind::PSha => "p-sha",
            PcmKind::PEps => "p-eps",
            PcmKind::PCoBi => "p-cobi",
            PcmKind::PC => "p-c",
        }
    }

    /// Deterministic methods ignore the success feedback.
    pub fn is_feedback_free(self) -> bool {
        matches!(self, PcmKind::NoPcm | PcmKind::PCo | PcmKind::PSin | PcmKind::PCars)
    }
}

impl fmt::Display for PcmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PcmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| Error::UnknownId {
            what: "pcm",
            got: s.to_string(),
            valid: Self::ALL.map(|k| k.id()).join(", "),
        })
    }
}

const NOPCM_PAIR: ParamPair = ParamPair::new(0.5, 0.9);

const CO_PAIRS: [ParamPair; 3] = [ParamPair::new(1.0, 0.1), ParamPair::new(1.0, 0.9), ParamPair::new(0.8, 0.2)];

const SIN_OMEGA: f64 = 0.25;

const CARS_S_RANGE: (f64, f64) = (0.5, 0.55);
const CARS_C_VALUES: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

const J_TAU_S: f64 = 0.1;
const J_TAU_C: f64 = 0.1;
const J_S_LOW: f64 = 0.1;

const JA_ALPHA: f64 = 0.1;
const CAUCHY_SCALE: f64 = 0.1;
const NORMAL_SD: f64 = 0.1;

pub const SHA_MEMORY_SIZE: usize = 10;

const EPS_S: [f64; 6] = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const EPS_C: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

const C_PAIRS: [ParamPair; 9] = [
    ParamPair::new(0.5, 0.0),
    ParamPair::new(0.5, 0.5),
    ParamPair::new(0.5, 1.0),
    ParamPair::new(0.8, 0.0),
    ParamPair::new(0.8, 0.5),
    ParamPair::new(0.8, 1.0),
    ParamPair::new(1.0, 0.0),
    ParamPair::new(1.0, 0.5),
    ParamPair::new(1.0, 1.0),
];
const C_EPSILON: f64 = 2.0;
const C_DELTA: f64 = 1.0 / 45.0;

/// `sum(v^2) / sum(v)` over a non-empty set of positive values.
pub fn lehmer_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("Lehmer mean of an empty set".into()));
    }
    let sum: f64 = values.iter().sum();
    if sum <= 0.0 || values.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("Lehmer mean needs positive values".into()));
    }
    Ok(values.iter().map(|v| v * v).sum::<f64>() / sum)
}

/// Crossover rates may legitimately all be zero; the memory then tracks 0.
fn lehmer_mean_or_zero(values: &[f64]) -> f64 {
    lehmer_mean(values).unwrap_or(0.0)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn pick<T: Copy, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> T {
    items[rng.random_range(0..items.len())]
}

/// Cauchy sample redrawn while non-positive, then capped at 1.
fn truncated_cauchy_s<R: Rng + ?Sized>(location: f64, rng: &mut R) -> f64 {
    let dist = Cauchy::new(location, CAUCHY_SCALE).expect("finite location");
    loop {
        let s = dist.sample(rng);
        if s > 0.0 {
            return s.min(1.0);
        }
    }
}

fn clipped_normal_c<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let dist = Normal::new(mean, NORMAL_SD).expect("finite mean");
    dist.sample(rng).clamp(0.0, 1.0)
}

fn eps_pair<R: Rng + ?Sized>(rng: &mut R) -> ParamPair {
    let s = pick(&EPS_S, rng);
    ParamPair::new(s, pick(&EPS_C, rng))
}

/// Bimodal Cauchy generator of P-CoBi, truncated like the P-JA samples.
fn cobi_pair<R: Rng + ?Sized>(rng: &mut R) -> ParamPair {
    let s_loc = if rng.random::<f64>() < 0.5 { 0.65 } else { 1.0 };
    let s = truncated_cauchy_s(s_loc, rng);
    let c_loc = if rng.random::<f64>() < 0.5 { 0.1 } else { 0.95 };
    let c = Cauchy::new(c_loc, CAUCHY_SCALE).expect("finite location").sample(rng);
    ParamPair::new(s, c.clamp(0.0, 1.0))
}

#[derive(Clone, Debug)]
enum State {
    Stateless,
    Sin { t_max: u64 },
    J { current: Vec<ParamPair>, trial: Vec<ParamPair> },
    Ja { m_s: f64, m_c: f64 },
    Sha { m_s: Vec<f64>, m_c: Vec<f64>, k: usize },
    Retain { current: Vec<ParamPair> },
    C { successes: [u64; 9], last_choice: Vec<usize> },
}

/// A parameter control method together with its adaptation state.
#[derive(Clone, Debug)]
pub struct Pcm {
    kind: PcmKind,
    mu: usize,
    state: State,
}

impl Pcm {
    /// Initialize `kind` for a population of `mu`. `t_max` is only read by
    /// P-Sin; P-EPS and P-CoBi draw their initial pairs from `rng`.
    pub fn new<R: Rng + ?Sized>(kind: PcmKind, mu: usize, t_max: u64, rng: &mut R) -> Result<Self> {
        if mu == 0 {
            return Err(Error::Config("population size must be positive".into()));
        }
        let state = match kind {
            PcmKind::NoPcm | PcmKind::PCo | PcmKind::PCars => State::Stateless,
            PcmKind::PSin => {
                if t_max == 0 {
                    return Err(Error::Config("P-Sin needs t_max >= 1".into()));
                }
                State::Sin { t_max }
            }
            PcmKind::PJ => State::J { current: vec![NOPCM_PAIR; mu], trial: Vec::new() },
            PcmKind::PJa => State::Ja { m_s: 0.5, m_c: 0.5 },
            PcmKind::PSha => State::Sha { m_s: vec![0.5; SHA_MEMORY_SIZE], m_c: vec![0.5; SHA_MEMORY_SIZE], k: 0 },
            PcmKind::PEps => State::Retain { current: (0..mu).map(|_| eps_pair(rng)).collect() },
            PcmKind::PCoBi => State::Retain { current: (0..mu).map(|_| cobi_pair(rng)).collect() },
            PcmKind::PC => State::C { successes: [0; 9], last_choice: Vec::new() },
        };
        Ok(Self { kind, mu, state })
    }

    pub fn kind(&self) -> PcmKind {
        self.kind
    }

    /// Pairs for iteration `t` (1-based), one per individual.
    pub fn generate<R: Rng + ?Sized>(&mut self, t: u64, rng: &mut R) -> Vec<ParamPair> {
        let mu = self.mu;
        match (&mut self.state, self.kind) {
            (State::Stateless, PcmKind::NoPcm) => vec![NOPCM_PAIR; mu],
            (State::Stateless, PcmKind::PCo) => (0..mu).map(|_| pick(&CO_PAIRS, rng)).collect(),
            (State::Stateless, _) => {
                let s: Vec<f64> = (0..mu).map(|_| rng.random_range(CARS_S_RANGE.0..=CARS_S_RANGE.1)).collect();
                let c = pick(&CARS_C_VALUES, rng);
                s.into_iter().map(|s| ParamPair::new(s, c)).collect()
            }
            (State::Sin { t_max }, _) => vec![sinusoidal_pair(t, *t_max); mu],
            (State::J { current, trial }, _) => {
                *trial = current
                    .iter()
                    .map(|cur| {
                        let s = if rng.random::<f64>() < J_TAU_S { rng.random_range(J_S_LOW..=1.0) } else { cur.s };
                        let c = if rng.random::<f64>() < J_TAU_C { rng.random::<f64>() } else { cur.c };
                        ParamPair::new(s, c)
                    })
                    .collect();
                trial.clone()
            }
            (State::Ja { m_s, m_c }, _) => (0..mu)
                .map(|_| {
                    let s = truncated_cauchy_s(*m_s, rng);
                    ParamPair::new(s, clipped_normal_c(*m_c, rng))
                })
                .collect(),
            (State::Sha { m_s, m_c, .. }, _) => (0..mu)
                .map(|_| {
                    let r = rng.random_range(0..m_s.len());
                    let s = truncated_cauchy_s(m_s[r], rng);
                    ParamPair::new(s, clipped_normal_c(m_c[r], rng))
                })
                .collect(),
            (State::Retain { current }, _) => current.clone(),
            (State::C { successes, last_choice }, _) => {
                last_choice.clear();
                (0..mu)
                    .map(|_| {
                        if c_probabilities(successes).iter().any(|&tau| tau <= C_DELTA) {
                            *successes = [0; 9];
                        }
                        let weights = successes.map(|o| o as f64 + C_EPSILON);
                        let mut u = rng.random::<f64>() * weights.iter().sum::<f64>();
                        let mut k = 0;
                        while k < 8 && u >= weights[k] {
                            u -= weights[k];
                            k += 1;
                        }
                        last_choice.push(k);
                        C_PAIRS[k]
                    })
                    .collect()
            }
        }
    }

    /// Feed back which of the pairs from the last [`Pcm::generate`] call
    /// produced a successful child.
    pub fn update<R: Rng + ?Sized>(&mut self, pairs: &[ParamPair], success: &[bool], rng: &mut R) -> Result<()> {
        if pairs.len() != success.len() {
            return Err(Error::Shape { expected: pairs.len(), got: success.len() });
        }
        if pairs.len() != self.mu {
            return Err(Error::Shape { expected: self.mu, got: pairs.len() });
        }
        let (theta_s, theta_c): (Vec<f64>, Vec<f64>) =
            pairs.iter().zip(success).filter(|(_, &ok)| ok).map(|(p, _)| (p.s, p.c)).unzip();
        match &mut self.state {
            State::Stateless | State::Sin { .. } => {}
            State::J { current, trial } => {
                for (i, &ok) in success.iter().enumerate() {
                    if ok {
                        current[i] = trial.get(i).copied().unwrap_or(pairs[i]);
                    }
                }
            }
            State::Ja { m_s, m_c } => {
                if !theta_s.is_empty() {
                    *m_s = (1.0 - JA_ALPHA) * *m_s + JA_ALPHA * lehmer_mean(&theta_s)?;
                    *m_c = (1.0 - JA_ALPHA) * *m_c + JA_ALPHA * mean(&theta_c);
                }
            }
            State::Sha { m_s, m_c, k } => {
                if !theta_s.is_empty() {
                    m_s[*k] = lehmer_mean(&theta_s)?;
                    m_c[*k] = lehmer_mean_or_zero(&theta_c);
                    *k = (*k + 1) % m_s.len();
                }
            }
            State::Retain { current } => {
                let cobi = self.kind == PcmKind::PCoBi;
                for (slot, &ok) in current.iter_mut().zip(success) {
                    if !ok {
                        *slot = if cobi { cobi_pair(rng) } else { eps_pair(rng) };
                    }
                }
            }
            State::C { successes, last_choice } => {
                for (i, &ok) in success.iter().enumerate() {
                    if ok {
                        let k = match last_choice.get(i) {
                            Some(&k) => k,
                            None => C_PAIRS
                                .iter()
                                .position(|q| *q == pairs[i])
                                .ok_or_else(|| Error::Domain(format!("pair {:?} is not a P-c candidate", pairs[i])))?,
                        };
                        successes[k] += 1;
                    }
                }
            }
        }
        Ok(())
    }

    /// P-SHA memory index, 1-based.
    pub fn memory_index(&self) -> Option<usize> {
        match &self.state {
            State::Sha { k, .. } => Some(k + 1),
            _ => None,
        }
    }

    /// `(m_s, m_c)` memories for P-SHA, or the single meta-parameters of P-JA.
    pub fn memories(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.state {
            State::Sha { m_s, m_c, .. } => Some((m_s.clone(), m_c.clone())),
            State::Ja { m_s, m_c } => Some((vec![*m_s], vec![*m_c])),
            _ => None,
        }
    }

    /// P-c success counters.
    pub fn success_counts(&self) -> Option<[u64; 9]> {
        match &self.state {
            State::C { successes, .. } => Some(*successes),
            _ => None,
        }
    }

    /// P-c selection probabilities for the current counters.
    pub fn selection_probabilities(&self) -> Option<[f64; 9]> {
        self.success_counts().map(|o| c_probabilities(&o))
    }

    /// Per-individual pairs retained between iterations (P-j, P-EPS, P-CoBi).
    pub fn retained_pairs(&self) -> Option<&[ParamPair]> {
        match &self.state {
            State::J { current, .. } | State::Retain { current } => Some(current),
            _ => None,
        }
    }

    /// Flattened adaptive memories for the diagnostics log: `m_s, m_c` for
    /// P-JA, `m_s[1..h], m_c[1..h]` for P-SHA, nothing otherwise.
    pub fn snapshot(&self) -> Vec<f64> {
        self.memories().map(|(s, c)| [s, c].concat()).unwrap_or_default()
    }
}

/// Shared pair of the sinusoidal schedule at iteration `t`.
pub fn sinusoidal_pair(t: u64, t_max: u64) -> ParamPair {
    let ratio = t as f64 / t_max as f64;
    let phase = 2.0 * PI * SIN_OMEGA * t as f64;
    ParamPair::new(0.5 * (ratio * phase.sin() + 1.0), 0.5 * (ratio * (phase + PI).sin() + 1.0))
}

fn c_probabilities(successes: &[u64; 9]) -> [f64; 9] {
    let total: f64 = successes.iter().map(|&o| o as f64 + C_EPSILON).sum();
    successes.map(|o| (o as f64 + C_EPSILON) / total)
}
