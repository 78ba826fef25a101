use rayon::prelude::*;
use serde::Serialize;

use super::{run_chain, Init, ModelSpec, Schedule, Subgraph};
use crate::error::{Error, Result};
use crate::maximizer::inflection_points;
use crate::phase::transition_q_inverse;
use crate::scalar::critical_point;

/// Offsets closer than this to the transition are rejected.
pub const JUMP_EXCLUSION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpRow {
    pub offset: f64,
    pub beta1: f64,
    pub init: &'static str,
    pub seed: u64,
    pub mean_edge: f64,
    pub se_edge: f64,
    pub u1: f64,
    pub u2: f64,
    /// Mean edge density below `u1` (negative offsets) or above `u2`
    /// (positive offsets).
    pub on_predicted_side: bool,
}

/// Runs one chain at `β1 = q⁻¹(β2) + δ` for each offset `δ`, started on the
/// side the limit theory predicts, and checks that the edge density lands
/// below `u1` or above `u2`, where `m(u1) = m(u2) = β2`.
///
/// Chain `k` uses seed `seed + k`.
pub fn jump_experiment(
    h2: Subgraph,
    n: usize,
    beta2: f64,
    offsets: &[f64],
    schedule: Schedule,
    seed: u64,
) -> Result<Vec<JumpRow>> {
    let p = h2.edges();
    let beta2_c = critical_point(p)?.beta2_c;
    if !(beta2 > beta2_c) {
        return Err(Error::OutOfRegion(format!(
            "beta2 = {beta2} must exceed beta2_c = {beta2_c}"
        )));
    }
    if let Some(bad) = offsets.iter().find(|d| !(d.abs() >= JUMP_EXCLUSION)) {
        return Err(Error::Parameter(format!(
            "offset {bad} lies inside the excluded band |offset| < {JUMP_EXCLUSION}"
        )));
    }
    let beta1_star = transition_q_inverse(beta2, p)?;
    let pair = inflection_points(p, beta2)?
        .ok_or_else(|| Error::Numeric(format!("no inflection points at beta2 = {beta2}")))?;

    offsets
        .par_iter()
        .enumerate()
        .map(|(k, &offset)| {
            let beta1 = beta1_star + offset;
            let spec = ModelSpec::new(h2, beta1, beta2)?;
            let (init, label) = if offset < 0.0 {
                (Init::Empty, "Empty")
            } else {
                (Init::Complete, "Complete")
            };
            let chain_seed = seed.wrapping_add(k as u64);
            let stats = run_chain(&spec, n, schedule, chain_seed, init)?;
            let on_predicted_side = if offset < 0.0 {
                stats.mean_edge < pair.u1
            } else {
                stats.mean_edge > pair.u2
            };
            Ok(JumpRow {
                offset,
                beta1,
                init: label,
                seed: chain_seed,
                mean_edge: stats.mean_edge,
                se_edge: stats.se_edge,
                u1: pair.u1,
                u2: pair.u2,
                on_predicted_side,
            })
        })
        .collect()
}
