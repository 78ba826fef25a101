//! Finite-`n` models: graphs, homomorphism densities, the exact Gibbs
//! measure at tiny `n` and single-edge heat-bath sampling at moderate `n`.
//!
//! A graph `G` on `n` vertices has weight
//! `exp(n²·(β1·t(edge, G) + β2·t(H2, G)))`, where `t` is the homomorphism
//! density and `H2` is a `p`-star or the triangle.

mod chain;
mod enumerate;
mod graph;
mod jump;

pub use chain::{
    glauber_step, run_chain, ChainStats, Init, Sample, Schedule, StepOutcome, GENERATOR,
};
pub use enumerate::{exact_enumeration, EnumerationResult, MAX_ENUMERATION_N};
pub use graph::GraphState;
pub use jump::{jump_experiment, JumpRow, JUMP_EXCLUSION};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_energy::{validity, Validity};
use crate::scalar::{ipow, ModelParams};

/// The second subgraph of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subgraph {
    /// `p` edges meeting at one vertex.
    PStar(u32),
    Triangle,
}

impl Subgraph {
    /// Number of edges.
    pub fn edges(&self) -> u32 {
        match *self {
            Subgraph::PStar(p) => p,
            Subgraph::Triangle => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub params: ModelParams,
    pub h2: Subgraph,
}

impl ModelSpec {
    pub fn new(h2: Subgraph, beta1: f64, beta2: f64) -> Result<Self> {
        let params = ModelParams::new(h2.edges(), beta1, beta2)?;
        Ok(Self { params, h2 })
    }

    pub fn from_params(params: ModelParams, h2: Subgraph) -> Result<Self> {
        if h2.edges() != params.p() {
            return Err(Error::Parameter(format!(
                "{h2:?} has {} edges but p = {}",
                h2.edges(),
                params.p()
            )));
        }
        Ok(Self { params, h2 })
    }

    pub fn validity(&self) -> Validity {
        validity(&self.params, self.h2)
    }

    pub(crate) fn tracks_triangles(&self) -> bool {
        self.h2 == Subgraph::Triangle
    }

    /// Homomorphism density of the second subgraph in `g`.
    pub fn t_h2(&self, g: &GraphState) -> f64 {
        match self.h2 {
            Subgraph::PStar(p) => g.t_pstar(p),
            Subgraph::Triangle => g.t_triangle(),
        }
    }
}

/// Exponent of the Gibbs weight: `n²·(β1·t_edge + β2·t_h2)`.
pub fn hamiltonian(g: &GraphState, spec: &ModelSpec) -> f64 {
    let n = g.n() as f64;
    n * n * (spec.params.beta1() * g.t_edge() + spec.params.beta2() * spec.t_h2(g))
}

/// `H(g + ij) − H(g − ij)` from cached degrees (stars, O(1)) or the
/// common-neighbour count (triangle, O(n)).
pub fn delta_hamiltonian(g: &GraphState, spec: &ModelSpec, i: usize, j: usize) -> f64 {
    let n = g.n() as f64;
    let beta2 = spec.params.beta2();
    let h2_term = match spec.h2 {
        Subgraph::PStar(p) => {
            let present = g.has_edge(i, j) as u32;
            let di = (g.degree(i) - present) as f64;
            let dj = (g.degree(j) - present) as f64;
            let gain = ipow(di + 1.0, p) - ipow(di, p) + ipow(dj + 1.0, p) - ipow(dj, p);
            beta2 * gain / ipow(n, p - 1)
        }
        Subgraph::Triangle => beta2 * 6.0 * g.common_neighbors(i, j) as f64 / n,
    };
    2.0 * spec.params.beta1() + h2_term
}
