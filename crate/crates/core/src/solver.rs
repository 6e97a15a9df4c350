//! Truncated-HOSVD initialization and the HOOI, Greedy-HOOI and TUCKALS3
//! sweeps, with trace emission.
//!
//! All three methods update the factors in ascending mode order. Within a
//! sweep the update of mode `n` sees the already updated factors of modes
//! `< n` and the previous factors of modes `> n`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{factor_projector_distance, kkt_residual, subspace_rel_change, KktReport};
use crate::error::{Error, Result};
use crate::linalg::{
    leading_left_subspace, qr_orthonormalize, singular_values, OrthonormalFactor,
};
use crate::matrix::Matrix;
use crate::subspace::{bound_residual, greedy_project};
use crate::synthetic;
use crate::tensor::{multi_mode_multiply, unfold, DenseTensor};

/// Ordered orthonormal factors `(A_1, ..., A_N)`, `A_n` of shape `I_n x r_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSet(Vec<OrthonormalFactor>);

impl FactorSet {
    /// Requires at least one factor and `r_n <= prod_{i != n} r_i`.
    pub fn new(factors: Vec<OrthonormalFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ShapeMismatch("factor set needs at least one factor".into()));
        }
        let ranks: Vec<usize> = factors.iter().map(|f| f.cols()).collect();
        check_rank_products(&ranks)?;
        Ok(Self(factors))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, n: usize) -> &OrthonormalFactor {
        &self.0[n]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, OrthonormalFactor> {
        self.0.iter()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.0.iter().map(|f| f.cols()).collect()
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.0.iter().map(|f| f.as_matrix().shape()).collect()
    }

    pub fn into_vec(self) -> Vec<OrthonormalFactor> {
        self.0
    }

    fn set(&mut self, n: usize, f: OrthonormalFactor) {
        debug_assert_eq!(f.as_matrix().shape(), self.0[n].as_matrix().shape());
        self.0[n] = f;
    }

    pub(crate) fn check_against(&self, x: &DenseTensor) -> Result<()> {
        if x.order() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor has {} modes, factor set has {}",
                x.order(),
                self.len()
            )));
        }
        for (n, (f, &d)) in self.0.iter().zip(x.shape()).enumerate() {
            if f.rows() != d {
                return Err(Error::ShapeMismatch(format!(
                    "factor {n} has {} rows but mode {n} has size {d}",
                    f.rows()
                )));
            }
        }
        Ok(())
    }
}

fn check_rank_products(ranks: &[usize]) -> Result<()> {
    for (n, &r) in ranks.iter().enumerate() {
        let others: usize = ranks.iter().enumerate().filter(|&(i, _)| i != n).map(|(_, &r)| r).product();
        if r == 0 || r > others {
            return Err(Error::RankOutOfRange {
                rank: r,
                reason: format!("mode {n} rank must be in 1..={others} (product of the other ranks)"),
            });
        }
    }
    Ok(())
}

/// Validates `ranks` for a tensor of the given shape.
pub fn check_ranks(shape: &[usize], ranks: &[usize]) -> Result<()> {
    if shape.len() != ranks.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} ranks for a tensor with {} modes",
            ranks.len(),
            shape.len()
        )));
    }
    for (n, (&r, &d)) in ranks.iter().zip(shape).enumerate() {
        if r == 0 || r > d {
            return Err(Error::RankOutOfRange {
                rank: r,
                reason: format!("mode {n} has dimension {d}"),
            });
        }
    }
    check_rank_products(ranks)
}

/// Core tensor with its factors, fitted to a particular tensor.
#[derive(Clone, Debug)]
pub struct TuckerModel {
    /// `X x_1 A_1^T ... x_N A_N^T`.
    pub core: DenseTensor,
    pub factors: FactorSet,
    /// `||X - core x_1 A_1 ... x_N A_N||_F`.
    pub fit_residual: f64,
    pub relative_residual: f64,
}

impl TuckerModel {
    pub fn fit(x: &DenseTensor, factors: FactorSet) -> Result<Self> {
        let core = project_core(x, &factors)?;
        let recon = crate::tensor::tucker_reconstruct(&core, &factors)?;
        let fit_residual = x.sub(&recon)?.fro_norm();
        let norm = x.fro_norm();
        Ok(Self {
            core,
            factors,
            fit_residual,
            relative_residual: if norm > 0.0 { fit_residual / norm } else { 0.0 },
        })
    }

    pub fn objective(&self) -> f64 {
        self.core.fro_norm_sq()
    }

    pub fn reconstruct(&self) -> Result<DenseTensor> {
        crate::tensor::tucker_reconstruct(&self.core, &self.factors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Hooi,
    Greedy,
    Tuckals3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Hooi, Algorithm::Greedy, Algorithm::Tuckals3];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hooi => "hooi",
            Algorithm::Greedy => "greedy",
            Algorithm::Tuckals3 => "tuckals3",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hooi" => Ok(Algorithm::Hooi),
            "greedy" => Ok(Algorithm::Greedy),
            "tuckals3" => Ok(Algorithm::Tuckals3),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    /// Objective, gaps and relative change per sweep; KKT only at the end.
    Basic,
    /// Adds the KKT report of every sweep.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initializer {
    Hosvd,
    /// QR of a seeded Gaussian matrix per mode.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub max_sweeps: usize,
    /// Stop once the subspace relative change is at or below this value.
    pub change_tol: f64,
    pub gap_tol: f64,
    pub init: Initializer,
    pub seed: u64,
    pub trace_level: TraceLevel,
    /// Record wall time per sweep. Off by default so traces are reproducible
    /// byte for byte.
    pub timing: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Hooi,
            max_sweeps: 500,
            change_tol: 1e-10,
            gap_tol: 1e-8,
            init: Initializer::Hosvd,
            seed: 0,
            trace_level: TraceLevel::Full,
            timing: false,
        }
    }
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self { algorithm, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        for (name, v) in [("change_tol", self.change_tol), ("gap_tol", self.gap_tol)] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Diagnostics of a single factor update.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeRecord {
    pub mode: usize,
    /// `sigma_{r_n}(G_n) - sigma_{r_n+1}(G_n)`.
    pub gap: f64,
    pub sigma_r: f64,
    pub sigma_r_plus_1: f64,
    /// `||A_n^new - A_n^old||_F`.
    pub step_norm: f64,
    /// `||A_n^new^T G_n||_F^2 - ||A_n^old^T G_n||_F^2`.
    pub objective_gain: f64,
    /// Slack in `(sigma_r^2 - sigma_{r+1}^2)/2 ||step||^2 <= gain`; greedy only.
    pub bound_residual: Option<f64>,
    pub degenerate: bool,
    /// Greedy only: `U^T A_n^old` was singular.
    pub overlap_singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    /// One-based sweep counter.
    pub sweep: usize,
    pub objective: f64,
    pub modes: Vec<ModeRecord>,
    pub rel_change: f64,
    pub kkt: Option<KktReport>,
    pub wall_ms: Option<f64>,
}

impl SweepRecord {
    pub fn gap_min(&self) -> f64 {
        self.modes.iter().map(|m| m.gap).fold(f64::INFINITY, f64::min)
    }

    /// Mode with the smallest gap (first on ties).
    pub fn min_gap_mode(&self) -> usize {
        let mut best = 0;
        for (i, m) in self.modes.iter().enumerate() {
            if m.gap < self.modes[best].gap {
                best = i;
            }
        }
        best
    }

    pub fn degenerate_any(&self) -> bool {
        self.modes.iter().any(|m| m.degenerate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxSweeps,
    Aborted { sweep: usize, message: String },
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxSweeps => "max_sweeps",
            StopReason::Aborted { .. } => "aborted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveTrace {
    pub config: SolverConfig,
    pub ranks: Vec<usize>,
    pub tensor_norm_sq: f64,
    pub initial_objective: f64,
    pub records: Vec<SweepRecord>,
    pub stop_reason: StopReason,
    pub final_kkt: KktReport,
}

/// Output of [`solve`].
#[derive(Clone, Debug)]
pub struct Solution {
    pub model: TuckerModel,
    pub trace: SolveTrace,
    /// The starting point actually used.
    pub initial: FactorSet,
}

/// `X x_1 A_1^T ... x_N A_N^T`.
pub fn project_core(x: &DenseTensor, a: &FactorSet) -> Result<DenseTensor> {
    a.check_against(x)?;
    let transposed: Vec<Matrix> = a.iter().map(|f| f.as_matrix().transpose()).collect();
    let ops: Vec<(&Matrix, usize)> = transposed.iter().zip(0..).collect();
    multi_mode_multiply(x, &ops)
}

/// `F(A) = ||X x_1 A_1^T ... x_N A_N^T||_F^2`.
pub fn objective(x: &DenseTensor, a: &FactorSet) -> Result<f64> {
    Ok(project_core(x, a)?.fro_norm_sq())
}

/// `G_n = unfold_n(X x_{i != n} A_i^T)`, an `I_n x prod_{i != n} r_i` matrix.
/// Within a sweep, pass the factor set holding the updated factors for
/// modes below `n` and the previous ones above.
pub fn compute_gn(x: &DenseTensor, a: &FactorSet, n: usize) -> Result<Matrix> {
    a.check_against(x)?;
    if n >= a.len() {
        return Err(Error::ModeOutOfRange { mode: n, order: a.len() });
    }
    let transposed: Vec<(Matrix, usize)> = a
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != n)
        .map(|(i, f)| (f.as_matrix().transpose(), i))
        .collect();
    let ops: Vec<(&Matrix, usize)> = transposed.iter().map(|(m, i)| (m, *i)).collect();
    unfold(&multi_mode_multiply(x, &ops)?, n)
}

/// `A_n^0` = leading left singular vectors of `unfold_n(X)` for every mode.
pub fn hosvd_init(x: &DenseTensor, ranks: &[usize], gap_tol: f64) -> Result<FactorSet> {
    check_ranks(x.shape(), ranks)?;
    let factors = ranks
        .iter()
        .enumerate()
        .map(|(n, &r)| Ok(leading_left_subspace(&unfold(x, n)?, r, gap_tol)?.basis))
        .collect::<Result<Vec<_>>>()?;
    FactorSet::new(factors)
}

/// Seeded random orthonormal factors.
pub fn random_init(shape: &[usize], ranks: &[usize], seed: u64) -> Result<FactorSet> {
    check_ranks(shape, ranks)?;
    let mut rng = synthetic::seeded(seed);
    FactorSet::new(
        shape
            .iter()
            .zip(ranks)
            .map(|(&d, &r)| synthetic::random_orthonormal(&mut rng, d, r))
            .collect(),
    )
}

/// Computes the quantities shared by all sweeps for one mode update.
fn mode_record(
    n: usize,
    g: &Matrix,
    old: &Matrix,
    new: &Matrix,
    sigma_r: f64,
    sigma_r_plus_1: f64,
    gap_tol: f64,
) -> Result<ModeRecord> {
    let gap = sigma_r - sigma_r_plus_1;
    Ok(ModeRecord {
        mode: n,
        gap,
        sigma_r,
        sigma_r_plus_1,
        step_norm: new.sub(old)?.fro_norm(),
        objective_gain: new.t_matmul(g)?.fro_norm_sq() - old.t_matmul(g)?.fro_norm_sq(),
        bound_residual: None,
        degenerate: gap <= gap_tol,
        overlap_singular: false,
    })
}

fn check_rank_fits(g: &Matrix, r: usize, n: usize) -> Result<()> {
    if r > g.rows().min(g.cols()) {
        return Err(Error::RankOutOfRange {
            rank: r,
            reason: format!("G_{n} is {}x{}", g.rows(), g.cols()),
        });
    }
    Ok(())
}

/// One HOOI sweep: `A_n` <- leading left singular vectors of `G_n`.
pub fn sweep_hooi(
    x: &DenseTensor,
    a: &FactorSet,
    gap_tol: f64,
) -> Result<(FactorSet, Vec<ModeRecord>)> {
    let mut current = a.clone();
    let mut records = Vec::with_capacity(a.len());
    for n in 0..a.len() {
        let g = compute_gn(x, &current, n)?;
        let r = current.get(n).cols();
        check_rank_fits(&g, r, n)?;
        let lead = leading_left_subspace(&g, r, gap_tol)?;
        let rec = mode_record(
            n,
            &g,
            current.get(n).as_matrix(),
            lead.basis.as_matrix(),
            lead.sigma_r(),
            lead.sigma_r_plus_1(),
            gap_tol,
        )?;
        current.set(n, lead.basis);
        records.push(rec);
    }
    Ok((current, records))
}

/// One Greedy-HOOI sweep: `A_n` <- the maximizer closest to the current `A_n`.
pub fn sweep_greedy(
    x: &DenseTensor,
    a: &FactorSet,
    gap_tol: f64,
) -> Result<(FactorSet, Vec<ModeRecord>)> {
    let mut current = a.clone();
    let mut records = Vec::with_capacity(a.len());
    for n in 0..a.len() {
        let g = compute_gn(x, &current, n)?;
        let r = current.get(n).cols();
        check_rank_fits(&g, r, n)?;
        let res = greedy_project(&g, r, current.get(n), gap_tol)?;
        let old = current.get(n).as_matrix();
        let new = res.z.as_matrix();
        let mut rec = mode_record(n, &g, old, new, res.sigma_r, res.sigma_r_plus_1, gap_tol)?;
        rec.bound_residual = Some(bound_residual(old, &g, new, res.sigma_r, res.sigma_r_plus_1)?);
        rec.overlap_singular = res.overlap_singular;
        current.set(n, res.z);
        records.push(rec);
    }
    Ok((current, records))
}

/// One TUCKALS3 sweep: `A_n` <- Q factor of `G_n G_n^T A_n`, a single
/// orthogonal-iteration step from the current factor.
pub fn sweep_tuckals3(
    x: &DenseTensor,
    a: &FactorSet,
    gap_tol: f64,
) -> Result<(FactorSet, Vec<ModeRecord>)> {
    let mut current = a.clone();
    let mut records = Vec::with_capacity(a.len());
    for n in 0..a.len() {
        let g = compute_gn(x, &current, n)?;
        let r = current.get(n).cols();
        check_rank_fits(&g, r, n)?;
        let old = current.get(n).as_matrix();
        let b = g.matmul(&g.t_matmul(old)?)?;
        let q = qr_orthonormalize(&b)?;
        let sigma = singular_values(&g)?;
        let rec = mode_record(
            n,
            &g,
            old,
            q.as_matrix(),
            sigma[r - 1],
            sigma.get(r).copied().unwrap_or(0.0),
            gap_tol,
        )?;
        current.set(n, q);
        records.push(rec);
    }
    Ok((current, records))
}

/// Runs one sweep of the given algorithm.
pub fn sweep(
    algorithm: Algorithm,
    x: &DenseTensor,
    a: &FactorSet,
    gap_tol: f64,
) -> Result<(FactorSet, Vec<ModeRecord>)> {
    match algorithm {
        Algorithm::Hooi => sweep_hooi(x, a, gap_tol),
        Algorithm::Greedy => sweep_greedy(x, a, gap_tol),
        Algorithm::Tuckals3 => sweep_tuckals3(x, a, gap_tol),
    }
}

/// Initializes per `config.init` and iterates until the subspace relative
/// change drops to `change_tol` or `max_sweeps` is reached.
pub fn solve(x: &DenseTensor, ranks: &[usize], config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    check_ranks(x.shape(), ranks)?;
    let start = match config.init {
        Initializer::Hosvd => hosvd_init(x, ranks, config.gap_tol)?,
        Initializer::Random => random_init(x.shape(), ranks, config.seed)?,
    };
    solve_from(x, start, config)
}

/// As [`solve`], from a caller-supplied starting point.
pub fn solve_from(x: &DenseTensor, start: FactorSet, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    start.check_against(x)?;
    let ranks = start.ranks();
    check_ranks(x.shape(), &ranks)?;

    let initial_objective = objective(x, &start)?;
    let mut current = start.clone();
    let mut records = Vec::new();
    let mut stop_reason = StopReason::MaxSweeps;

    for k in 1..=config.max_sweeps {
        let clock = config.timing.then(Instant::now);
        let (next, modes) = match sweep(config.algorithm, x, &current, config.gap_tol) {
            Ok(out) => out,
            Err(e) => {
                stop_reason = StopReason::Aborted { sweep: k, message: e.to_string() };
                break;
            }
        };
        let rel_change = subspace_rel_change(&current, &next)?;
        let obj = objective(x, &next)?;
        let kkt = match config.trace_level {
            TraceLevel::Full => Some(kkt_residual(x, &next)?),
            TraceLevel::Basic => None,
        };
        let wall_ms = clock.map(|c| c.elapsed().as_secs_f64() * 1e3);
        records.push(SweepRecord { sweep: k, objective: obj, modes, rel_change, kkt, wall_ms });
        current = next;
        if rel_change <= config.change_tol {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let final_kkt = kkt_residual(x, &current)?;
    let model = TuckerModel::fit(x, current)?;
    Ok(Solution {
        model,
        trace: SolveTrace {
            config: config.clone(),
            ranks,
            tensor_norm_sq: x.fro_norm_sq(),
            initial_objective,
            records,
            stop_reason,
            final_kkt,
        },
        initial: start,
    })
}

/// Per-mode projector distances between two factor sets (convenience for
/// comparing iterates of different algorithms).
pub fn mode_projector_distances(a: &FactorSet, b: &FactorSet) -> Result<Vec<f64>> {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| factor_projector_distance(x.as_matrix(), y.as_matrix()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::projector_distance;
    use crate::tensor::tucker_reconstruct;
    use crate::testutil::{random_factor_set, random_orthonormal, random_tensor, rng};

    fn rank_one(seed: u64) -> (DenseTensor, FactorSet, f64) {
        let mut g = rng(seed);
        let fs = FactorSet::new(vec![
            random_orthonormal(&mut g, 4, 1),
            random_orthonormal(&mut g, 5, 1),
            random_orthonormal(&mut g, 6, 1),
        ])
        .unwrap();
        let sigma = 3.0;
        let core = DenseTensor::new(vec![1, 1, 1], vec![sigma]).unwrap();
        (tucker_reconstruct(&core, &fs).unwrap(), fs, sigma)
    }

    /// A random start whose every factor has positive overlap with `target`.
    fn overlapping_start(target: &FactorSet, seed: u64) -> FactorSet {
        let mut g = rng(seed);
        FactorSet::new(
            target
                .iter()
                .map(|t| {
                    let noise = crate::synthetic::gaussian_matrix(&mut g, t.rows(), t.cols());
                    let b = t.as_matrix().add(&noise.scale(0.3)).unwrap();
                    qr_orthonormalize(&b).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn objective_examples() {
        let mut g = rng(1);
        let x = random_tensor(&mut g, &[3, 4, 2]);
        let full = FactorSet::new(
            [3, 4, 2].iter().map(|&d| random_orthonormal(&mut g, d, d)).collect(),
        )
        .unwrap();
        let f = objective(&x, &full).unwrap();
        assert!((f - x.fro_norm_sq()).abs() <= 1e-12 * f);

        let (x, fs, sigma) = rank_one(5);
        assert!((objective(&x, &fs).unwrap() - sigma * sigma).abs() <= 1e-12);
    }

    #[test]
    fn gn_examples() {
        let v = DenseTensor::new(vec![3], vec![1.0, 2.0, 3.0]).unwrap();
        let fs = FactorSet::new(vec![OrthonormalFactor::canonical(3, 1).unwrap()]).unwrap();
        assert_eq!(compute_gn(&v, &fs, 0).unwrap(), unfold(&v, 0).unwrap());

        let mut g = rng(2);
        let x = random_tensor(&mut g, &[4, 5, 6]);
        let fs = random_factor_set(&mut g, &[4, 5, 6], &[2, 2, 2]);
        let f = objective(&x, &fs).unwrap();
        for n in 0..3 {
            let gn = compute_gn(&x, &fs, n).unwrap();
            assert_eq!(gn.shape(), (x.shape()[n], 4));
            let v = fs.get(n).as_matrix().t_matmul(&gn).unwrap().fro_norm_sq();
            assert!((v - f).abs() <= 1e-10 * f);
        }
    }

    #[test]
    fn gn_with_square_factors_keeps_singular_values() {
        let mut g = rng(3);
        let x = random_tensor(&mut g, &[3, 4, 5]);
        let fs = FactorSet::new(vec![
            random_orthonormal(&mut g, 3, 2),
            random_orthonormal(&mut g, 4, 4),
            random_orthonormal(&mut g, 5, 5),
        ])
        .unwrap();
        let s1 = singular_values(&compute_gn(&x, &fs, 0).unwrap()).unwrap();
        let s2 = singular_values(&unfold(&x, 0).unwrap()).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn hosvd_examples() {
        let mut g = rng(4);
        let x = random_tensor(&mut g, &[3, 4, 5]);
        let full = hosvd_init(&x, &[3, 4, 5], 1e-8).unwrap();
        let f = objective(&x, &full).unwrap();
        assert!((f - x.fro_norm_sq()).abs() <= 1e-12 * f);
        assert_eq!(hosvd_init(&x, &[3, 4, 5], 1e-8).unwrap(), full);

        let (x, fs, sigma) = rank_one(6);
        let init = hosvd_init(&x, &[1, 1, 1], 1e-8).unwrap();
        assert!(projector_distance(&init, &fs).unwrap().total <= 1e-12);
        assert!((objective(&x, &init).unwrap() - sigma * sigma).abs() <= 1e-12);

        assert!(hosvd_init(&x, &[5, 1, 1], 1e-8).is_err());
        assert!(hosvd_init(&x, &[2, 1, 1], 1e-8).is_err());
        assert!(hosvd_init(&x, &[1, 1], 1e-8).is_err());
    }

    #[test]
    fn hooi_one_sweep_solves_rank_one() {
        let (x, fs, sigma) = rank_one(7);
        let start = overlapping_start(&fs, 70);
        let (next, recs) = sweep_hooi(&x, &start, 1e-8).unwrap();
        let f = objective(&x, &next).unwrap();
        assert!((f - sigma * sigma).abs() <= 1e-10 * sigma * sigma);
        assert!(recs.iter().all(|r| r.objective_gain >= -1e-9));
    }

    #[test]
    fn sweeps_fix_converged_point() {
        let mut g = rng(8);
        let x = random_tensor(&mut g, &[5, 6, 7]);
        let mut cfg = SolverConfig::new(Algorithm::Hooi);
        cfg.change_tol = 1e-13;
        cfg.max_sweeps = 2000;
        let sol = solve(&x, &[2, 3, 2], &cfg).unwrap();
        assert_eq!(sol.trace.stop_reason, StopReason::Converged);
        let at = sol.model.factors;
        assert!(sol.trace.records.last().unwrap().modes.iter().all(|m| m.gap > 1e-3));

        let (h, _) = sweep_hooi(&x, &at, 1e-8).unwrap();
        assert!(projector_distance(&h, &at).unwrap().per_mode.iter().all(|&d| d <= 1e-8));

        let (t, _) = sweep_tuckals3(&x, &at, 1e-8).unwrap();
        assert!(projector_distance(&t, &at).unwrap().per_mode.iter().all(|&d| d <= 1e-8));

        let (gr, _) = sweep_greedy(&x, &at, 1e-8).unwrap();
        for (a, b) in gr.iter().zip(at.iter()) {
            assert!(a.as_matrix().sub(b.as_matrix()).unwrap().fro_norm() <= 1e-10);
        }
    }

    #[test]
    fn greedy_matches_hooi_projectors_for_one_sweep() {
        let mut g = rng(9);
        let x = random_tensor(&mut g, &[6, 5, 7]);
        let start = hosvd_init(&x, &[2, 2, 3], 1e-8).unwrap();
        let (h, _) = sweep_hooi(&x, &start, 1e-8).unwrap();
        let (gr, recs) = sweep_greedy(&x, &start, 1e-8).unwrap();
        assert!(recs.iter().all(|r| r.gap > 1e-6));
        for d in mode_projector_distances(&h, &gr).unwrap() {
            assert!(d <= 1e-8, "{d}");
        }
        for r in recs {
            assert!(r.bound_residual.unwrap() >= -1e-9);
        }
    }

    #[test]
    fn tuckals3_converges_on_rank_one() {
        let (x, fs, _) = rank_one(10);
        let mut a = overlapping_start(&fs, 100);
        let mut prev_f = objective(&x, &a).unwrap();
        for _ in 0..50 {
            a = sweep_tuckals3(&x, &a, 1e-8).unwrap().0;
            let f = objective(&x, &a).unwrap();
            assert!(f >= prev_f - 1e-9 * prev_f);
            prev_f = f;
        }
        assert!(projector_distance(&a, &fs).unwrap().per_mode.iter().all(|&d| d <= 1e-8));
    }

    #[test]
    fn tuckals3_aborts_on_rank_deficiency() {
        // Factor orthogonal to the range of G_0: G G^T A = 0.
        let x = DenseTensor::new(vec![2, 1, 1], vec![1.0, 0.0]).unwrap();
        let bad = FactorSet::new(vec![
            OrthonormalFactor::new(Matrix::from_rows(&[&[0.0], &[1.0]])).unwrap(),
            OrthonormalFactor::canonical(1, 1).unwrap(),
            OrthonormalFactor::canonical(1, 1).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            sweep_tuckals3(&x, &bad, 1e-8),
            Err(Error::RankDeficient { .. })
        ));
        let cfg = SolverConfig::new(Algorithm::Tuckals3);
        let sol = solve_from(&x, bad, &cfg).unwrap();
        assert!(matches!(sol.trace.stop_reason, StopReason::Aborted { sweep: 1, .. }));
        assert!(sol.trace.records.is_empty());
    }

    #[test]
    fn solve_respects_max_sweeps() {
        let mut g = rng(11);
        let x = random_tensor(&mut g, &[5, 5, 5]);
        let mut cfg = SolverConfig::new(Algorithm::Greedy);
        cfg.max_sweeps = 0;
        assert!(solve(&x, &[2, 2, 2], &cfg).is_err());
        cfg.max_sweeps = 1;
        cfg.change_tol = 0.0;
        let sol = solve(&x, &[2, 2, 2], &cfg).unwrap();
        assert_eq!(sol.trace.records.len(), 1);
        assert_eq!(sol.trace.stop_reason, StopReason::MaxSweeps);
    }

    #[test]
    fn solve_is_deterministic() {
        let mut g = rng(12);
        let x = random_tensor(&mut g, &[6, 5, 4]);
        for alg in Algorithm::ALL {
            let mut cfg = SolverConfig::new(alg);
            cfg.max_sweeps = 15;
            let a = solve(&x, &[2, 2, 2], &cfg).unwrap();
            let b = solve(&x, &[2, 2, 2], &cfg).unwrap();
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.model.core, b.model.core);
        }
    }

    #[test]
    fn solve_matrix_case_is_truncated_svd() {
        let mut g = rng(13);
        let x = random_tensor(&mut g, &[6, 4]);
        let sol = solve(&x, &[2, 2], &SolverConfig::new(Algorithm::Greedy)).unwrap();
        let s = singular_values(&unfold(&x, 0).unwrap()).unwrap();
        let best: f64 = s[..2].iter().map(|v| v * v).sum();
        assert!((sol.model.objective() - best).abs() <= 1e-10 * best);
    }

    #[test]
    fn random_init_is_seeded() {
        let a = random_init(&[5, 4, 3], &[2, 2, 2], 1).unwrap();
        assert_eq!(a, random_init(&[5, 4, 3], &[2, 2, 2], 1).unwrap());
        assert_ne!(a, random_init(&[5, 4, 3], &[2, 2, 2], 2).unwrap());
    }

    #[test]
    fn factor_set_enforces_rank_products() {
        let mut g = rng(14);
        let f = |g: &mut crate::synthetic::Rng, d, r| random_orthonormal(g, d, r);
        assert!(FactorSet::new(vec![f(&mut g, 5, 3), f(&mut g, 5, 1), f(&mut g, 5, 2)]).is_err());
        assert!(FactorSet::new(vec![f(&mut g, 5, 2), f(&mut g, 5, 1), f(&mut g, 5, 2)]).is_ok());
        assert!(FactorSet::new(vec![]).is_err());
    }
}
