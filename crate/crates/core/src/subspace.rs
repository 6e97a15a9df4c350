//! The HOOI subproblem and its greedy resolution.
//!
//! Given `Y` (`m x p`) and a current orthonormal `X` (`m x r`), the solution
//! set of `max ||Z^T Y||_F^2` over orthonormal `Z` is the set of bases of the
//! dominant `r`-dimensional left singular subspaces of `Y`. The greedy choice
//! picks the member of that set closest to `X` in Frobenius norm, which on
//! the nondegenerate path is the polar alignment of any leading basis
//! towards `X`.

use crate::error::{Error, Result};
use crate::linalg::{leading_left_subspace, polar_align, singular_values, OrthonormalFactor};
use crate::matrix::Matrix;

/// Relative tolerance for accepting `Z` as a maximizer of `||Z^T Y||_F^2`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GreedyResult {
    pub z: OrthonormalFactor,
    pub gap: f64,
    pub sigma_r: f64,
    pub sigma_r_plus_1: f64,
    /// Both uniqueness conditions hold: the dominant subspace is unique and
    /// the overlap `U^T X` is nonsingular.
    pub unique: bool,
    pub overlap_singular: bool,
    pub degenerate: bool,
}

/// Outcome of the second uniqueness condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Holds,
    /// Tied singular values: the candidate subspaces form a continuum and
    /// the condition cannot be decided numerically.
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniquenessReport {
    pub cond1: bool,
    pub cond2: Condition,
    pub gap: f64,
}

fn check_inputs(y: &Matrix, r: usize, x: &OrthonormalFactor) -> Result<()> {
    let k = y.rows().min(y.cols());
    if r == 0 || r > k {
        return Err(Error::RankOutOfRange {
            rank: r,
            reason: format!("need 1 <= r <= min({}, {})", y.rows(), y.cols()),
        });
    }
    if x.rows() != y.rows() || x.cols() != r {
        return Err(Error::ShapeMismatch(format!(
            "current factor is {}x{}, expected {}x{r}",
            x.rows(),
            x.cols(),
            y.rows()
        )));
    }
    Ok(())
}

/// Among all maximizers of `||Z^T Y||_F^2`, the one closest to `x`.
///
/// When the gap `sigma_r - sigma_{r+1}` is at most `gap_tol` the same
/// construction is applied to the computed leading basis and the result is
/// flagged as non-unique.
pub fn greedy_project(
    y: &Matrix,
    r: usize,
    x: &OrthonormalFactor,
    gap_tol: f64,
) -> Result<GreedyResult> {
    check_inputs(y, r, x)?;
    let lead = leading_left_subspace(y, r, gap_tol)?;
    let (sigma_r, sigma_r_plus_1) = (lead.sigma_r(), lead.sigma_r_plus_1());
    let aligned = polar_align(&lead.basis, x.as_matrix())?;
    Ok(GreedyResult {
        z: OrthonormalFactor::new_unchecked(aligned.aligned),
        gap: lead.gap,
        sigma_r,
        sigma_r_plus_1,
        unique: !lead.degenerate && !aligned.overlap_singular,
        overlap_singular: aligned.overlap_singular,
        degenerate: lead.degenerate,
    })
}

pub fn uniqueness_report(
    y: &Matrix,
    r: usize,
    x: &OrthonormalFactor,
    gap_tol: f64,
) -> Result<UniquenessReport> {
    check_inputs(y, r, x)?;
    let lead = leading_left_subspace(y, r, gap_tol)?;
    let aligned = polar_align(&lead.basis, x.as_matrix())?;
    Ok(UniquenessReport {
        cond1: !aligned.overlap_singular,
        cond2: if lead.degenerate { Condition::Indeterminate } else { Condition::Holds },
        gap: lead.gap,
    })
}

/// `(||Z^T Y||^2 - ||X^T Y||^2) - (sigma_r^2 - sigma_{r+1}^2) / 2 * ||Z - X||^2`
/// from precomputed singular values. Nonnegative whenever `z` is the greedy
/// solution for `x`.
pub(crate) fn bound_residual(
    x: &Matrix,
    y: &Matrix,
    z: &Matrix,
    sigma_r: f64,
    sigma_r_plus_1: f64,
) -> Result<f64> {
    let gain = z.t_matmul(y)?.fro_norm_sq() - x.t_matmul(y)?.fro_norm_sq();
    let step = z.sub(x)?.fro_norm_sq();
    let curvature = 0.5 * (sigma_r * sigma_r - sigma_r_plus_1 * sigma_r_plus_1);
    Ok(gain - curvature * step)
}

/// Slack in the inequality bounding the squared step `||Z - X||_F^2` by the
/// objective gain. Errors if `z` does not maximize `||Z^T Y||_F^2`.
pub fn key_inequality_residual(
    x: &OrthonormalFactor,
    y: &Matrix,
    z: &OrthonormalFactor,
) -> Result<f64> {
    let r = z.cols();
    check_inputs(y, r, x)?;
    if z.rows() != y.rows() {
        return Err(Error::ShapeMismatch("z and y row counts differ".into()));
    }
    let sigma = singular_values(y)?;
    let expected: f64 = sigma[..r].iter().map(|s| s * s).sum();
    let got = z.as_matrix().t_matmul(y)?.fro_norm_sq();
    if (got - expected).abs() > MEMBERSHIP_TOL * expected {
        return Err(Error::NotInSolutionSet { got, expected });
    }
    let next = sigma.get(r).copied().unwrap_or(0.0);
    bound_residual(x.as_matrix(), y, z.as_matrix(), sigma[r - 1], next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_matrix, random_orthonormal, rng};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn diag31() -> Matrix {
        Matrix::from_diag(&[3.0, 1.0])
    }

    fn diagonal_x() -> OrthonormalFactor {
        OrthonormalFactor::new(Matrix::from_rows(&[&[FRAC_1_SQRT_2], &[FRAC_1_SQRT_2]])).unwrap()
    }

    #[test]
    fn greedy_aligns_to_leading_vector() {
        let res = greedy_project(&diag31(), 1, &diagonal_x(), 1e-8).unwrap();
        assert_eq!(res.z.as_matrix().as_slice(), &[1.0, 0.0]);
        assert_eq!(res.gap, 2.0);
        assert!(res.unique);
        assert!(!res.overlap_singular);
    }

    #[test]
    fn greedy_flags_orthogonal_start() {
        let e2 = OrthonormalFactor::new(Matrix::from_rows(&[&[0.0], &[1.0]])).unwrap();
        let res = greedy_project(&diag31(), 1, &e2, 1e-8).unwrap();
        assert_eq!(res.z.as_matrix().as_slice(), &[1.0, 0.0]);
        assert!(res.overlap_singular);
        assert!(!res.unique);
    }

    #[test]
    fn greedy_fixes_leading_basis() {
        let mut g = rng(21);
        let y = random_matrix(&mut g, 9, 6);
        let lead = leading_left_subspace(&y, 3, 1e-8).unwrap();
        let q = random_orthonormal(&mut g, 3, 3);
        let x = lead.basis.rotate(&q).unwrap();
        let res = greedy_project(&y, 3, &x, 1e-8).unwrap();
        let d = res.z.as_matrix().sub(x.as_matrix()).unwrap().fro_norm();
        assert!(d <= 1e-10, "{d}");
    }

    #[test]
    fn greedy_degenerate_path_does_not_error() {
        let x = diagonal_x();
        let res = greedy_project(&Matrix::identity(2), 1, &x, 1e-8).unwrap();
        assert!(res.degenerate);
        assert!(!res.unique);
        assert_eq!(res.gap, 0.0);
    }

    #[test]
    fn greedy_rejects_bad_rank() {
        let x = diagonal_x();
        assert!(greedy_project(&diag31(), 2, &x, 1e-8).is_err());
        assert!(greedy_project(&Matrix::zeros(2, 1), 2, &x, 1e-8).is_err());
    }

    #[test]
    fn uniqueness_examples() {
        let rep = uniqueness_report(&diag31(), 1, &diagonal_x(), 1e-8).unwrap();
        assert!(rep.cond1);
        assert_eq!(rep.cond2, Condition::Holds);

        let rep = uniqueness_report(&Matrix::identity(2), 1, &diagonal_x(), 1e-8).unwrap();
        assert_eq!(rep.cond2, Condition::Indeterminate);
        assert_eq!(rep.gap, 0.0);

        let e2 = OrthonormalFactor::new(Matrix::from_rows(&[&[0.0], &[1.0]])).unwrap();
        assert!(!uniqueness_report(&diag31(), 1, &e2, 1e-8).unwrap().cond1);
    }

    #[test]
    fn key_inequality_closed_form() {
        let e1 = OrthonormalFactor::canonical(2, 1).unwrap();
        let res = key_inequality_residual(&diagonal_x(), &diag31(), &e1).unwrap();
        // (9 - 5) - (9 - 1) / 2 * (2 - sqrt 2)
        let expected = 4.0 - 4.0 * (2.0 - 2f64.sqrt());
        assert!((res - expected).abs() < 1e-12, "{res} vs {expected}");
        assert!((res - 1.657).abs() < 1e-3);
    }

    #[test]
    fn key_inequality_vanishes_at_fixed_point() {
        let e1 = OrthonormalFactor::canonical(2, 1).unwrap();
        assert!(key_inequality_residual(&e1, &diag31(), &e1).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn key_inequality_rejects_non_maximizer() {
        let e2 = OrthonormalFactor::new(Matrix::from_rows(&[&[0.0], &[1.0]])).unwrap();
        assert!(matches!(
            key_inequality_residual(&diagonal_x(), &diag31(), &e2),
            Err(Error::NotInSolutionSet { .. })
        ));
    }
}
