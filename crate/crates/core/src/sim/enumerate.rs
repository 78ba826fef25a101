use super::{hamiltonian, GraphState, ModelSpec};
use crate::error::{Error, Result};

/// Largest `n` for exact enumeration (2^15 labelled graphs).
pub const MAX_ENUMERATION_N: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult {
    pub n: usize,
    /// `log Z_n / n²`.
    pub psi_n: f64,
    pub e_t_edge: f64,
    pub e_t_h2: f64,
    /// `P(|E| = k)` for `k = 0..=n(n−1)/2`.
    pub edge_count_pmf: Vec<f64>,
}

/// Exact Gibbs expectations by summing over every labelled graph on `n`
/// vertices.
pub fn exact_enumeration(spec: &ModelSpec, n: usize) -> Result<EnumerationResult> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::Size {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    if n == 0 {
        return Err(Error::Parameter("n must be >= 1".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let graphs = 1usize << pairs.len();

    let mut energies = Vec::with_capacity(graphs);
    let mut observables = Vec::with_capacity(graphs);
    let mut edges_buf = Vec::with_capacity(pairs.len());
    for mask in 0..graphs {
        edges_buf.clear();
        edges_buf.extend(
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e),
        );
        let g = GraphState::from_edges(n, &edges_buf, spec.tracks_triangles());
        energies.push(hamiltonian(&g, spec));
        observables.push((g.t_edge(), spec.t_h2(&g), edges_buf.len()));
    }

    let h_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut sum_edge = 0.0;
    let mut sum_h2 = 0.0;
    let mut pmf = vec![0.0; pairs.len() + 1];
    for (h, &(te, th, k)) in energies.iter().zip(&observables) {
        let w = (h - h_max).exp();
        z += w;
        sum_edge += w * te;
        sum_h2 += w * th;
        pmf[k] += w;
    }
    pmf.iter_mut().for_each(|x| *x /= z);
    let nf = n as f64;
    Ok(EnumerationResult {
        n,
        psi_n: (h_max + z.ln()) / (nf * nf),
        e_t_edge: sum_edge / z,
        e_t_h2: sum_h2 / z,
        edge_count_pmf: pmf,
    })
}
