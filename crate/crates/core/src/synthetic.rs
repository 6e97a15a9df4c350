//! Seeded random data: Gaussian matrices, random orthonormal factors and
//! planted low-multilinear-rank tensors.
//!
//! All generators use ChaCha8 seeded from a `u64`, so outputs are identical
//! across platforms for a given seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{qr_orthonormalize, OrthonormalFactor};
use crate::matrix::Matrix;
use crate::tensor::{multi_mode_multiply, DenseTensor};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_raw(rows, cols, gaussian_vec(rng, rows * cols))
}

pub fn gaussian_tensor(rng: &mut Rng, shape: &[usize]) -> DenseTensor {
    let len = shape.iter().product();
    DenseTensor::from_raw(shape.to_vec(), gaussian_vec(rng, len))
}

/// Q factor of a Gaussian `rows x cols` matrix. Redraws in the (probability
/// zero) event of a rank-deficient draw.
pub fn random_orthonormal(rng: &mut Rng, rows: usize, cols: usize) -> OrthonormalFactor {
    assert!(cols <= rows, "need cols <= rows");
    loop {
        if let Ok(q) = qr_orthonormalize(&gaussian_matrix(rng, rows, cols)) {
            return q;
        }
    }
}

/// A planted Tucker tensor and its noisy observation.
#[derive(Clone, Debug)]
pub struct Planted {
    pub signal: DenseTensor,
    pub observed: DenseTensor,
    pub core: DenseTensor,
    pub factors: Vec<OrthonormalFactor>,
}

/// Draws a Gaussian core of shape `ranks` and Gaussian-QR factors, forms
/// `C x_1 A_1 ... x_N A_N`, then adds i.i.d. Gaussian noise rescaled so that
/// `||noise||_F = noise_level * ||signal||_F`.
pub fn planted(shape: &[usize], ranks: &[usize], noise_level: f64, seed: u64) -> Result<Planted> {
    if shape.is_empty() || shape.len() != ranks.len() {
        return Err(Error::ShapeMismatch(format!(
            "shape {shape:?} and ranks {ranks:?} must be nonempty and of equal length"
        )));
    }
    if !noise_level.is_finite() || noise_level < 0.0 {
        return Err(Error::InvalidConfig(format!("noise level must be >= 0, got {noise_level}")));
    }
    for (n, (&r, &d)) in ranks.iter().zip(shape).enumerate() {
        if r == 0 || r > d {
            return Err(Error::RankOutOfRange {
                rank: r,
                reason: format!("mode {n} has dimension {d}"),
            });
        }
    }
    // Validates zero dims and overflow.
    DenseTensor::zeros(shape.to_vec())?;

    let mut rng = seeded(seed);
    let core = gaussian_tensor(&mut rng, ranks);
    let factors: Vec<OrthonormalFactor> = shape
        .iter()
        .zip(ranks)
        .map(|(&d, &r)| random_orthonormal(&mut rng, d, r))
        .collect();
    let ops: Vec<(&Matrix, usize)> = factors.iter().map(|f| f.as_matrix()).zip(0..).collect();
    let signal = multi_mode_multiply(&core, &ops)?;
    let observed = if noise_level == 0.0 {
        signal.clone()
    } else {
        let noise = gaussian_tensor(&mut rng, shape);
        let scale = noise_level * signal.fro_norm() / noise.fro_norm();
        signal.add(&noise.scale(scale))?
    };
    Ok(Planted { signal, observed, core, factors })
}

/// The observed tensor of [`planted`].
pub fn gen_synthetic(
    shape: &[usize],
    ranks: &[usize],
    noise_level: f64,
    seed: u64,
) -> Result<DenseTensor> {
    Ok(planted(shape, ranks, noise_level, seed)?.observed)
}
