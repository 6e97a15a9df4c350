//! Dense N-way tensors in generalized column-major order (mode 0 fastest),
//! their unfoldings, and mode-n products.
//!
//! Modes are zero-based throughout the library API. The mode-`n` unfolding
//! places the mode-`n` fibers as columns, ordered so that smaller mode
//! indices vary fastest; with this layout the mode-0 unfolding is a plain
//! reshape of the data buffer.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::solver::FactorSet;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Builds a tensor from data in layout order. Rejects empty shapes,
    /// zero-length modes, length mismatches and non-finite entries.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = checked_volume(&shape)?;
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = checked_volume(&shape)?;
        Ok(Self { shape, data: vec![0.0; len] })
    }

    pub(crate) fn from_raw(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Entry at a zero-based multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.shape.len());
        let mut flat = 0;
        let mut stride = 1;
        for (&i, &dim) in index.iter().zip(&self.shape) {
            assert!(i < dim, "index out of bounds");
            flat += i * stride;
            stride *= dim;
        }
        self.data[flat]
    }

    pub fn fro_norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        check_same_shape(self, other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseTensor::from_raw(self.shape.clone(), data))
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        check_same_shape(self, other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(DenseTensor::from_raw(self.shape.clone(), data))
    }

    pub fn scale(&self, s: f64) -> DenseTensor {
        DenseTensor::from_raw(self.shape.clone(), self.data.iter().map(|v| v * s).collect())
    }

    /// Splits the shape around mode `n` into (volume before, I_n, volume after).
    fn split(&self, n: usize) -> (usize, usize, usize) {
        let left = self.shape[..n].iter().product();
        let right = self.shape[n + 1..].iter().product();
        (left, self.shape[n], right)
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.order() {
            return Err(Error::ModeOutOfRange { mode: n, order: self.order() });
        }
        Ok(())
    }
}

fn checked_volume(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::ShapeMismatch("tensor needs at least one mode".into()));
    }
    if shape.contains(&0) {
        return Err(Error::ShapeMismatch(format!("zero-length mode in {shape:?}")));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(Error::ShapeOverflow)
}

fn check_same_shape(a: &DenseTensor, b: &DenseTensor) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape, b.shape)));
    }
    Ok(())
}

/// Mode-`n` matricization: an `I_n x prod_{k != n} I_k` matrix of fibers.
pub fn unfold(t: &DenseTensor, n: usize) -> Result<Matrix> {
    t.check_mode(n)?;
    let (left, dim, right) = t.split(n);
    if n == 0 {
        return Ok(Matrix::from_raw(dim, right, t.data.clone()));
    }
    let cols = left * right;
    let mut out = vec![0.0; dim * cols];
    for r in 0..right {
        for i in 0..dim {
            let src = &t.data[left * (i + dim * r)..left * (i + dim * r + 1)];
            for (l, &v) in src.iter().enumerate() {
                out[i + dim * (l + left * r)] = v;
            }
        }
    }
    Ok(Matrix::from_raw(dim, cols, out))
}

/// Inverse of [`unfold`].
pub fn fold(m: &Matrix, n: usize, shape: &[usize]) -> Result<DenseTensor> {
    let volume = checked_volume(shape)?;
    if n >= shape.len() {
        return Err(Error::ModeOutOfRange { mode: n, order: shape.len() });
    }
    let dim = shape[n];
    if m.rows() != dim || m.rows() * m.cols() != volume {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix cannot fold into {shape:?} along mode {n}",
            m.rows(),
            m.cols()
        )));
    }
    if n == 0 {
        return Ok(DenseTensor::from_raw(shape.to_vec(), m.as_slice().to_vec()));
    }
    let left: usize = shape[..n].iter().product();
    let right: usize = shape[n + 1..].iter().product();
    let src = m.as_slice();
    let mut data = vec![0.0; volume];
    for r in 0..right {
        for i in 0..dim {
            let dst = &mut data[left * (i + dim * r)..left * (i + dim * r + 1)];
            for (l, d) in dst.iter_mut().enumerate() {
                *d = src[i + dim * (l + left * r)];
            }
        }
    }
    Ok(DenseTensor::from_raw(shape.to_vec(), data))
}

/// `t x_n y`: replaces mode `n` (size `I_n`) by `y.rows()`, contracting
/// against the columns of `y`.
pub fn mode_multiply(t: &DenseTensor, y: &Matrix, n: usize) -> Result<DenseTensor> {
    t.check_mode(n)?;
    let (left, dim, right) = t.split(n);
    if y.cols() != dim {
        return Err(Error::ShapeMismatch(format!(
            "mode {n} has size {dim} but the matrix is {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    let out_dim = y.rows();
    let mut out = vec![0.0; left * out_dim * right];
    for r in 0..right {
        for i in 0..dim {
            let src = &t.data[left * (i + dim * r)..left * (i + dim * r + 1)];
            for j in 0..out_dim {
                let w = y.get(j, i);
                if w == 0.0 {
                    continue;
                }
                let dst = &mut out[left * (j + out_dim * r)..left * (j + out_dim * r + 1)];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    let mut shape = t.shape.clone();
    shape[n] = out_dim;
    Ok(DenseTensor::from_raw(shape, out))
}

/// Applies several mode products, at most one per mode.
///
/// Products are applied in ascending order of `rows / I_n`, so the modes that
/// shrink the tensor most go first (ties by mode index).
pub fn multi_mode_multiply(t: &DenseTensor, ops: &[(&Matrix, usize)]) -> Result<DenseTensor> {
    let mut seen = vec![false; t.order()];
    for &(y, n) in ops {
        t.check_mode(n)?;
        if seen[n] {
            return Err(Error::DuplicateMode(n));
        }
        seen[n] = true;
        if y.cols() != t.shape[n] {
            return Err(Error::ShapeMismatch(format!(
                "mode {n} has size {} but the matrix is {}x{}",
                t.shape[n],
                y.rows(),
                y.cols()
            )));
        }
    }
    let mut order: Vec<usize> = (0..ops.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = ops[a].0.rows() as f64 / ops[a].0.cols() as f64;
        let rb = ops[b].0.rows() as f64 / ops[b].0.cols() as f64;
        ra.total_cmp(&rb).then(ops[a].1.cmp(&ops[b].1))
    });
    let mut current = t.clone();
    for k in order {
        let (y, n) = ops[k];
        current = mode_multiply(&current, y, n)?;
    }
    Ok(current)
}

/// Frobenius inner product of two equally shaped tensors.
pub fn inner(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    check_same_shape(a, b)?;
    Ok(dot(&a.data, &b.data))
}

pub fn fro_norm(t: &DenseTensor) -> f64 {
    t.fro_norm()
}

/// `core x_0 A_0 x_1 A_1 ... x_{N-1} A_{N-1}`.
pub fn tucker_reconstruct(core: &DenseTensor, factors: &FactorSet) -> Result<DenseTensor> {
    if core.order() != factors.len() {
        return Err(Error::ShapeMismatch(format!(
            "core has {} modes, factor set has {}",
            core.order(),
            factors.len()
        )));
    }
    for (n, f) in factors.iter().enumerate() {
        if f.cols() != core.shape[n] {
            return Err(Error::ShapeMismatch(format!(
                "core mode {n} has size {} but factor {n} has {} columns",
                core.shape[n],
                f.cols()
            )));
        }
    }
    let ops: Vec<(&Matrix, usize)> = factors.iter().map(|f| f.as_matrix()).zip(0..).collect();
    multi_mode_multiply(core, &ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_to_eight() -> DenseTensor {
        DenseTensor::new(vec![2, 2, 2], (1..=8).map(f64::from).collect()).unwrap()
    }

    #[test]
    fn unfold_mode0_and_mode1_match_hand_enumeration() {
        let t = one_to_eight();
        assert_eq!(
            unfold(&t, 0).unwrap(),
            Matrix::from_rows(&[&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]])
        );
        assert_eq!(
            unfold(&t, 1).unwrap(),
            Matrix::from_rows(&[&[1.0, 2.0, 5.0, 6.0], &[3.0, 4.0, 7.0, 8.0]])
        );
    }

    #[test]
    fn unfold_of_vector_is_column() {
        let v = DenseTensor::new(vec![3], vec![1.0, 2.0, 3.0]).unwrap();
        let m = unfold(&v, 0).unwrap();
        assert_eq!(m.shape(), (3, 1));
        assert_eq!(m.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn fold_inverts_unfold() {
        let t = one_to_eight();
        let m = Matrix::from_rows(&[&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]]);
        assert_eq!(fold(&m, 0, &[2, 2, 2]).unwrap(), t);
        assert_eq!(fold(&unfold(&t, 1).unwrap(), 1, t.shape()).unwrap(), t);
        let col = Matrix::from_rows(&[&[4.0], &[5.0]]);
        assert_eq!(fold(&col, 0, &[2]).unwrap().as_slice(), &[4.0, 5.0]);
    }

    #[test]
    fn fold_rejects_mismatch() {
        let m = Matrix::zeros(2, 3);
        assert!(fold(&m, 0, &[2, 2, 2]).is_err());
        assert!(fold(&m, 3, &[2, 3]).is_err());
    }

    #[test]
    fn mode_multiply_sums_paired_entries() {
        let t = one_to_eight();
        let y = Matrix::from_rows(&[&[1.0, 1.0]]);
        let out = mode_multiply(&t, &y, 0).unwrap();
        assert_eq!(out.shape(), &[1, 2, 2]);
        assert_eq!(out.as_slice(), &[3.0, 7.0, 11.0, 15.0]);
    }

    #[test]
    fn mode_multiply_by_identity_is_noop() {
        let t = one_to_eight();
        for n in 0..3 {
            assert_eq!(mode_multiply(&t, &Matrix::identity(2), n).unwrap(), t);
        }
        assert!(mode_multiply(&t, &Matrix::identity(3), 1).is_err());
        assert!(matches!(
            mode_multiply(&t, &Matrix::identity(2), 3),
            Err(Error::ModeOutOfRange { mode: 3, order: 3 })
        ));
    }

    #[test]
    fn multi_mode_multiply_edge_cases() {
        let t = one_to_eight();
        assert_eq!(multi_mode_multiply(&t, &[]).unwrap(), t);
        let i2 = Matrix::identity(2);
        assert!(matches!(
            multi_mode_multiply(&t, &[(&i2, 1), (&i2, 1)]),
            Err(Error::DuplicateMode(1))
        ));
    }

    #[test]
    fn norms_and_inner() {
        let t = one_to_eight();
        assert_eq!(t.fro_norm(), 204f64.sqrt());
        let z = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        assert_eq!(inner(&t, &z).unwrap(), 0.0);
        assert!(inner(&t, &DenseTensor::zeros(vec![2, 4]).unwrap()).is_err());
    }

    #[test]
    fn construction_validates() {
        assert!(DenseTensor::new(vec![], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![1.0; 3]).is_err());
        assert!(matches!(
            DenseTensor::new(vec![2], vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite(1))
        ));
        assert!(matches!(
            DenseTensor::zeros(vec![usize::MAX, 2]),
            Err(Error::ShapeOverflow)
        ));
    }

    #[test]
    fn get_uses_layout_order() {
        let t = one_to_eight();
        assert_eq!(t.get(&[0, 0, 0]), 1.0);
        assert_eq!(t.get(&[1, 0, 0]), 2.0);
        assert_eq!(t.get(&[0, 1, 0]), 3.0);
        assert_eq!(t.get(&[1, 1, 1]), 8.0);
    }
}
