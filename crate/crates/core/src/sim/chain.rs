use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::Serialize;

use super::{delta_hamiltonian, GraphState, ModelSpec};
use crate::error::{Error, Result};
use crate::free_energy::Validity;
use crate::scalar::sigmoid;

/// Name of the generator behind every chain (128-bit state, period 2^128).
pub const GENERATOR: &str = "Pcg64";

const BATCHES: usize = 50;

/// Outcome of one heat-bath update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub i: usize,
    pub j: usize,
    /// Conditional probability that `{i, j}` is present given the rest.
    pub prob_present: f64,
    pub present: bool,
}

/// One heat-bath step: choose an unordered pair uniformly and resample its
/// edge from the conditional Gibbs law
/// `P(present) = e^{H+} / (e^{H+} + e^{H−})`.
pub fn glauber_step<R: Rng + ?Sized>(
    g: &mut GraphState,
    spec: &ModelSpec,
    rng: &mut R,
) -> StepOutcome {
    let n = g.n();
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let prob_present = sigmoid(delta_hamiltonian(g, spec, i, j));
    let present = rng.random::<f64>() < prob_present;
    g.set_edge(i, j, present);
    StepOutcome {
        i,
        j,
        prob_present,
        present,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
}

impl Schedule {
    pub fn new(steps: u64, burn_in: u64, thin: u64) -> Result<Self> {
        if steps <= burn_in {
            return Err(Error::Parameter(format!(
                "steps ({steps}) must exceed burn_in ({burn_in})"
            )));
        }
        if thin == 0 {
            return Err(Error::Parameter("thin must be >= 1".into()));
        }
        Ok(Self {
            steps,
            burn_in,
            thin,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Init {
    Empty,
    Complete,
    /// Independent edges with this probability.
    Density(f64),
}

impl Init {
    fn build<R: Rng + ?Sized>(&self, n: usize, triangles: bool, rng: &mut R) -> Result<GraphState> {
        match *self {
            Init::Empty => Ok(GraphState::empty(n, triangles)),
            Init::Complete => Ok(GraphState::complete(n, triangles)),
            Init::Density(d) if (0.0..=1.0).contains(&d) => {
                Ok(GraphState::random(n, d, triangles, rng))
            }
            Init::Density(d) => Err(Error::Parameter(format!(
                "initial density must lie in [0, 1], got {d}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub step: u64,
    pub t_edge: f64,
    pub t_h2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStats {
    pub samples: Vec<Sample>,
    pub mean_edge: f64,
    pub sd_edge: f64,
    /// Batch-means standard error of `mean_edge`.
    pub se_edge: f64,
    pub mean_h2: f64,
    pub sd_h2: f64,
    pub se_h2: f64,
    pub seed: u64,
    pub generator: &'static str,
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub validity: Validity,
}

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Standard error of the mean of a correlated series from the spread of
/// contiguous batch means.
pub(crate) fn batch_means_se(xs: &[f64]) -> f64 {
    let batches = BATCHES.min(xs.len());
    if batches < 2 {
        return f64::NAN;
    }
    let size = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    mean_sd(&means).1 / (batches as f64).sqrt()
}

/// Runs a heat-bath chain and records `(t_edge, t_h2)` after every `thin`-th
/// step past `burn_in`. Output is a pure function of the arguments.
pub fn run_chain(
    spec: &ModelSpec,
    n: usize,
    schedule: Schedule,
    seed: u64,
    init: Init,
) -> Result<ChainStats> {
    if n < 2 {
        return Err(Error::Parameter(format!("chains need n >= 2, got {n}")));
    }
    let schedule = Schedule::new(schedule.steps, schedule.burn_in, schedule.thin)?;
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut g = init.build(n, spec.tracks_triangles(), &mut rng)?;

    let kept = ((schedule.steps - schedule.burn_in) / schedule.thin) as usize;
    let mut samples = Vec::with_capacity(kept);
    for step in 1..=schedule.steps {
        glauber_step(&mut g, spec, &mut rng);
        if step > schedule.burn_in && (step - schedule.burn_in) % schedule.thin == 0 {
            samples.push(Sample {
                step,
                t_edge: g.t_edge(),
                t_h2: spec.t_h2(&g),
            });
        }
    }

    let edge: Vec<f64> = samples.iter().map(|s| s.t_edge).collect();
    let h2: Vec<f64> = samples.iter().map(|s| s.t_h2).collect();
    let (mean_edge, sd_edge) = mean_sd(&edge);
    let (mean_h2, sd_h2) = mean_sd(&h2);
    Ok(ChainStats {
        mean_edge,
        sd_edge,
        se_edge: batch_means_se(&edge),
        mean_h2,
        sd_h2,
        se_h2: batch_means_se(&h2),
        samples,
        seed,
        generator: GENERATOR,
        steps: schedule.steps,
        burn_in: schedule.burn_in,
        thin: schedule.thin,
        validity: spec.validity(),
    })
}
