//! Stationarity, subspace-distance and nondegeneracy measurements.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::matrix::Matrix;
use crate::solver::{compute_gn, FactorSet};
use crate::tensor::DenseTensor;

/// First-order optimality residuals of `max F(A)` subject to `A_n^T A_n = I`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KktReport {
    /// `||G_n G_n^T A_n - A_n A_n^T G_n G_n^T A_n||_F`.
    pub gradient: Vec<f64>,
    /// `gradient[n] / (1 + ||G_n G_n^T A_n||_F)`.
    pub gradient_normalized: Vec<f64>,
    /// `||A_n^T A_n - I||_F`.
    pub feasibility: Vec<f64>,
    pub aggregate: f64,
    pub aggregate_normalized: f64,
}

pub fn kkt_residual(x: &DenseTensor, a: &FactorSet) -> Result<KktReport> {
    a.check_against(x)?;
    let n_modes = a.len();
    let mut gradient = Vec::with_capacity(n_modes);
    let mut gradient_normalized = Vec::with_capacity(n_modes);
    let mut feasibility = Vec::with_capacity(n_modes);
    for n in 0..n_modes {
        let g = compute_gn(x, a, n)?;
        let an = a.get(n).as_matrix();
        let m = g.matmul(&g.t_matmul(an)?)?;
        let resid = m.sub(&an.matmul(&an.t_matmul(&m)?)?)?.fro_norm();
        gradient.push(resid);
        gradient_normalized.push(resid / (1.0 + m.fro_norm()));
        feasibility.push(an.orthonormality_defect());
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let feas = max(&feasibility);
    Ok(KktReport {
        aggregate: max(&gradient).max(feas),
        aggregate_normalized: max(&gradient_normalized).max(feas),
        gradient,
        gradient_normalized,
        feasibility,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorDistance {
    pub per_mode: Vec<f64>,
    /// Sum over modes.
    pub total: f64,
}

/// `||A A^T - B B^T||_F` for orthonormal `A`, `B` of equal rank, evaluated as
/// `sqrt(2) * ||B - A (A^T B)||_F`, which equals
/// `sqrt(2 r - 2 ||A^T B||_F^2)` without its cancellation near zero.
pub fn factor_projector_distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let resid = b.sub(&a.matmul(&a.t_matmul(b)?)?)?;
    Ok(std::f64::consts::SQRT_2 * resid.fro_norm())
}

/// The same distance with explicitly formed `I x I` projectors.
pub fn factor_projector_distance_dense(a: &Matrix, b: &Matrix) -> Result<f64> {
    let pa = a.matmul_t(a)?;
    let pb = b.matmul_t(b)?;
    Ok(pa.sub(&pb)?.fro_norm())
}

fn check_pair(a: &FactorSet, b: &FactorSet) -> Result<()> {
    if a.shapes() != b.shapes() {
        return Err(Error::ShapeMismatch(format!(
            "factor shapes {:?} vs {:?}",
            a.shapes(),
            b.shapes()
        )));
    }
    Ok(())
}

pub fn projector_distance(a: &FactorSet, b: &FactorSet) -> Result<ProjectorDistance> {
    check_pair(a, b)?;
    let per_mode = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| factor_projector_distance(x.as_matrix(), y.as_matrix()))
        .collect::<Result<Vec<_>>>()?;
    let total = per_mode.iter().sum();
    Ok(ProjectorDistance { per_mode, total })
}

/// `sum_n ||P_n^prev - P_n^curr||_F / sum_n ||P_n^prev||_F` with
/// `P_n = A_n A_n^T`.
pub fn subspace_rel_change(prev: &FactorSet, curr: &FactorSet) -> Result<f64> {
    let num = projector_distance(prev, curr)?.total;
    // ||A A^T||_F = ||A^T A||_F
    let den: f64 = prev
        .iter()
        .map(|f| f.as_matrix().t_matmul(f.as_matrix()).map(|g| g.fro_norm()))
        .sum::<Result<f64>>()?;
    Ok(num / den)
}

/// `sigma_{r_n}(G_n) - sigma_{r_n + 1}(G_n)` per mode, with every factor
/// current.
pub fn nondegeneracy_gaps(x: &DenseTensor, a: &FactorSet) -> Result<Vec<f64>> {
    a.check_against(x)?;
    (0..a.len())
        .map(|n| {
            let g = compute_gn(x, a, n)?;
            let r = a.get(n).cols();
            if r > g.rows().min(g.cols()) {
                return Err(Error::RankOutOfRange {
                    rank: r,
                    reason: format!("G_{n} is {}x{}", g.rows(), g.cols()),
                });
            }
            let s = singular_values(&g)?;
            Ok(s[r - 1] - s.get(r).copied().unwrap_or(0.0))
        })
        .collect()
}
