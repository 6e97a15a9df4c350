use crate::linalg::OrthonormalFactor;
use crate::matrix::Matrix;
use crate::solver::FactorSet;
use crate::synthetic::{self, Rng};
use crate::tensor::DenseTensor;

pub fn rng(seed: u64) -> Rng {
    synthetic::seeded(seed)
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    synthetic::gaussian_matrix(rng, rows, cols)
}

pub fn random_orthonormal(rng: &mut Rng, rows: usize, cols: usize) -> OrthonormalFactor {
    synthetic::random_orthonormal(rng, rows, cols)
}

pub fn random_tensor(rng: &mut Rng, shape: &[usize]) -> DenseTensor {
    synthetic::gaussian_tensor(rng, shape)
}

pub fn random_factor_set(rng: &mut Rng, shape: &[usize], ranks: &[usize]) -> FactorSet {
    FactorSet::new(
        shape.iter().zip(ranks).map(|(&d, &r)| random_orthonormal(rng, d, r)).collect(),
    )
    .unwrap()
}
