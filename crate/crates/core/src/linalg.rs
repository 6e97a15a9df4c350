//! Deterministic dense factorizations: one-sided Jacobi SVD, leading left
//! singular subspaces, thin QR, polar alignment, Kronecker products.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Sweep cap for the Jacobi SVD.
pub const SVD_MAX_SWEEPS: usize = 80;

/// Columns whose norm falls to this fraction of `||A||_F` are treated as
/// exactly zero singular directions.
pub const SVD_ZERO_TOL: f64 = 1e-14;

/// Relative rank tolerance for [`qr_orthonormalize`].
pub const QR_RANK_TOL: f64 = 1e-12;

/// Smallest singular value of `U^T X` at or below which the overlap is
/// considered singular.
pub const OVERLAP_SINGULAR_TOL: f64 = 1e-12;

/// Tolerance on `||Q^T Q - I||_F` for accepting external input as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Full singular value decomposition `A = U diag(sigma) V^T`.
///
/// `u` is `m x m`, `v` is `p x p`, `sigma` has `min(m, p)` entries in
/// descending order. The entry of largest magnitude in each column of `u`
/// (first index on ties) is nonnegative, and `v` is flipped to match.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// `U diag(sigma) V^T` using the leading `min(m, p)` columns.
    pub fn reconstruct(&self) -> Matrix {
        let k = self.sigma.len();
        let mut us = self.u.leading_cols(k);
        for (j, &s) in self.sigma.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        us.matmul_t(&self.v.leading_cols(k)).expect("consistent svd shapes")
    }
}

/// Left factor (`m x k`, `k = min(m, p)`) and singular values of a thin SVD.
#[derive(Clone, Debug)]
pub(crate) struct ThinSvd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
}

/// A matrix with orthonormal columns: a point on the Stiefel manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalFactor(Matrix);

impl OrthonormalFactor {
    /// Validates `||m^T m - I||_F <= ORTHONORMAL_TOL` and `cols <= rows`.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.cols() > m.rows() {
            return Err(Error::ShapeMismatch(format!(
                "orthonormal factor cannot have more columns ({}) than rows ({})",
                m.cols(),
                m.rows()
            )));
        }
        let defect = m.orthonormality_defect();
        if defect.is_nan() || defect > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: Matrix) -> Self {
        debug_assert!(m.orthonormality_defect() < 1e-8, "{}", m.orthonormality_defect());
        Self(m)
    }

    /// First `cols` columns of the identity.
    pub fn canonical(rows: usize, cols: usize) -> Result<Self> {
        Self::new(Matrix::eye(rows, cols))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    /// Right-multiplies by an orthogonal `r x r` matrix; the span is unchanged.
    pub fn rotate(&self, q: &OrthonormalFactor) -> Result<Self> {
        if q.rows() != q.cols() || q.rows() != self.cols() {
            return Err(Error::ShapeMismatch("rotation must be square r x r".into()));
        }
        Ok(Self(self.0.matmul(&q.0)?))
    }
}

/// Leading left singular subspace together with its spectral gap.
#[derive(Clone, Debug)]
pub struct SubspaceResult {
    pub basis: OrthonormalFactor,
    /// `sigma_r - sigma_{r+1}` with `sigma_{r+1} = 0` when `r = min(m, p)`.
    pub gap: f64,
    pub degenerate: bool,
    /// All `min(m, p)` singular values, descending.
    pub sigma: Vec<f64>,
}

impl SubspaceResult {
    pub fn sigma_r(&self) -> f64 {
        self.sigma[self.basis.cols() - 1]
    }

    pub fn sigma_r_plus_1(&self) -> f64 {
        self.sigma.get(self.basis.cols()).copied().unwrap_or(0.0)
    }
}

/// Result of [`polar_align`].
#[derive(Clone, Debug)]
pub struct PolarAlignment {
    pub aligned: Matrix,
    /// Smallest singular value of `u^T x`.
    pub overlap_sigma_min: f64,
    /// Set when `u^T x` is singular; the aligned basis is then not unique.
    pub overlap_singular: bool,
}

/// Hestenes one-sided Jacobi on the columns of `w` (`len x k`, column-major).
/// Returns the rotated columns and the accumulated `k x k` rotation.
fn hestenes(w: &mut [f64], len: usize, k: usize, zero_norm: f64) -> Result<Vec<f64>> {
    let mut q = vec![0.0; k * k];
    for i in 0..k {
        q[i + i * k] = 1.0;
    }
    let tol = f64::EPSILON * (len as f64).sqrt().max(1.0);
    let zero_sq = zero_norm * zero_norm;
    for _sweep in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let (head, tail) = w.split_at_mut(j * len);
                let wi = &mut head[i * len..(i + 1) * len];
                let wj = &mut tail[..len];
                let alpha = dot(wi, wi);
                let beta = dot(wj, wj);
                if alpha <= zero_sq || beta <= zero_sq {
                    continue;
                }
                let gamma = dot(wi, wj);
                if gamma.abs() <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for (a, b) in wi.iter_mut().zip(wj.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
                let (qh, qt) = q.split_at_mut(j * k);
                let qi = &mut qh[i * k..(i + 1) * k];
                let qj = &mut qt[..k];
                for (a, b) in qi.iter_mut().zip(qj.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
            }
        }
        if !rotated {
            return Ok(q);
        }
    }
    Err(Error::NoConvergence(SVD_MAX_SWEEPS))
}

/// Extends the orthonormal columns of `basis` (`len x have`) to `want`
/// columns. Each new column is the unit vector with the largest component
/// outside the current span, orthogonalized twice.
fn complete_basis(basis: &mut Vec<f64>, len: usize, want: usize) {
    let mut have = basis.len() / len;
    let mut outside: Vec<f64> = (0..len)
        .map(|i| 1.0 - (0..have).map(|j| basis[i + j * len].powi(2)).sum::<f64>())
        .collect();
    while have < want {
        let pick = outside
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0;
        let mut v = vec![0.0; len];
        v[pick] = 1.0;
        for _ in 0..2 {
            for j in 0..have {
                let b = &basis[j * len..(j + 1) * len];
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        for (o, x) in outside.iter_mut().zip(&v) {
            *o -= x * x;
        }
        outside[pick] = f64::NEG_INFINITY;
        basis.extend_from_slice(&v);
        have += 1;
    }
}

/// Flips column pairs so the largest-magnitude entry of each `u` column is
/// nonnegative.
fn apply_sign_convention(u: &mut Matrix, v: &mut Matrix, cols: usize) {
    for j in 0..cols {
        let col = u.col(j);
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            if j < v.cols() {
                v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
}

/// Core decomposition. Returns the thin factors; when `full` is set the
/// Jacobi-normalized side is completed to a square orthogonal matrix.
fn decompose(a: &Matrix, full: bool) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (m, p) = a.shape();
    if let Some(i) = a.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let tall = m >= p;
    let (len, k) = if tall { (m, p) } else { (p, m) };
    let mut w = if tall { a.as_slice().to_vec() } else { a.transpose().into_vec() };
    let zero_norm = SVD_ZERO_TOL * a.fro_norm();
    let q = hestenes(&mut w, len, k, zero_norm)?;

    let norms: Vec<f64> = (0..k)
        .map(|j| {
            let c = &w[j * len..(j + 1) * len];
            let n = dot(c, c).sqrt();
            if n <= zero_norm {
                0.0
            } else {
                n
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let nonzero = sigma.iter().take_while(|&&s| s > 0.0).count();

    // Normalized side: columns of w scaled by 1/sigma.
    let mut normalized = Vec::with_capacity(len * k);
    for &j in &order[..nonzero] {
        let s = norms[j];
        normalized.extend(w[j * len..(j + 1) * len].iter().map(|x| x / s));
    }
    complete_basis(&mut normalized, len, if full { len } else { k });
    let normalized_cols = normalized.len() / len;
    let normalized = Matrix::from_raw(len, normalized_cols, normalized);

    // Rotation side: permuted columns of q.
    let mut rot = Vec::with_capacity(k * k);
    for &j in &order {
        rot.extend_from_slice(&q[j * k..(j + 1) * k]);
    }
    let rot = Matrix::from_raw(k, k, rot);

    let (mut u, mut v) = if tall { (normalized, rot) } else { (rot, normalized) };
    let cols = u.cols();
    apply_sign_convention(&mut u, &mut v, cols);
    Ok((u, sigma, v))
}

/// Full SVD by one-sided Jacobi.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    let (u, sigma, v) = decompose(a, true)?;
    Ok(SvdResult { u, sigma, v })
}

pub(crate) fn thin_svd(a: &Matrix) -> Result<ThinSvd> {
    let (u, sigma, _) = decompose(a, false)?;
    Ok(ThinSvd { u, sigma })
}

/// Singular values only, descending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    Ok(thin_svd(a)?.sigma)
}

/// Orthonormal basis of the dominant `r`-dimensional left singular subspace
/// of `y`, with the gap `sigma_r - sigma_{r+1}`.
pub fn leading_left_subspace(y: &Matrix, r: usize, gap_tol: f64) -> Result<SubspaceResult> {
    let k = y.rows().min(y.cols());
    if r == 0 || r > k {
        return Err(Error::RankOutOfRange {
            rank: r,
            reason: format!("need 1 <= r <= min({}, {})", y.rows(), y.cols()),
        });
    }
    if gap_tol.is_nan() || gap_tol < 0.0 {
        return Err(Error::InvalidConfig(format!("gap_tol must be >= 0, got {gap_tol}")));
    }
    let thin = thin_svd(y)?;
    let next = thin.sigma.get(r).copied().unwrap_or(0.0);
    let gap = thin.sigma[r - 1] - next;
    Ok(SubspaceResult {
        basis: OrthonormalFactor::new_unchecked(thin.u.leading_cols(r)),
        gap,
        degenerate: gap <= gap_tol,
        sigma: thin.sigma,
    })
}

/// Q factor of the thin QR of `b` with positive R diagonal, by classical
/// Gram-Schmidt with reorthogonalization.
pub fn qr_orthonormalize(b: &Matrix) -> Result<OrthonormalFactor> {
    let (m, r) = b.shape();
    if r > m {
        return Err(Error::ShapeMismatch(format!("{m}x{r} cannot have full column rank")));
    }
    let threshold = QR_RANK_TOL * b.fro_norm();
    let mut q: Vec<f64> = Vec::with_capacity(m * r);
    for j in 0..r {
        let mut v = b.col(j).to_vec();
        for _ in 0..2 {
            let coeffs: Vec<f64> = (0..j).map(|i| dot(&q[i * m..(i + 1) * m], &v)).collect();
            for (i, c) in coeffs.into_iter().enumerate() {
                v.iter_mut().zip(&q[i * m..(i + 1) * m]).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let diag = dot(&v, &v).sqrt();
        if diag.is_nan() || diag <= threshold {
            return Err(Error::RankDeficient { diag, threshold });
        }
        q.extend(v.iter().map(|x| x / diag));
    }
    Ok(OrthonormalFactor::new_unchecked(Matrix::from_raw(m, r, q)))
}

/// Rotates the basis `u` within its span to be as close as possible to `x`:
/// with the full SVD `u^T x = P S W^T`, returns `u P W^T`.
pub fn polar_align(u: &OrthonormalFactor, x: &Matrix) -> Result<PolarAlignment> {
    if u.as_matrix().shape() != x.shape() {
        return Err(Error::ShapeMismatch(format!(
            "basis is {}x{}, target is {}x{}",
            u.rows(),
            u.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let overlap = u.as_matrix().t_matmul(x)?;
    let dec = svd(&overlap)?;
    let rotation = dec.u.matmul_t(&dec.v)?;
    let sigma_min = dec.sigma.last().copied().unwrap_or(0.0);
    Ok(PolarAlignment {
        aligned: u.as_matrix().matmul(&rotation)?,
        overlap_sigma_min: sigma_min,
        overlap_singular: sigma_min <= OVERLAP_SINGULAR_TOL,
    })
}

/// Kronecker product; block `(i, j)` is `a[i, j] * b`.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (ma, na) = a.shape();
    let (mb, nb) = b.shape();
    let rows = ma * mb;
    let mut out = Matrix::zeros(rows, na * nb);
    for ja in 0..na {
        for jb in 0..nb {
            let col = out.col_mut(ja * nb + jb);
            for ia in 0..ma {
                let s = a.get(ia, ja);
                for ib in 0..mb {
                    col[ia * mb + ib] = s * b.get(ib, jb);
                }
            }
        }
    }
    out
}

/// Sum of singular values.
pub fn nuclear_norm(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}
