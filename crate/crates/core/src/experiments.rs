//! Reproducible experiments behind the `compare` and `verify` subcommands.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::subspace_rel_change;
use crate::error::Result;
use crate::linalg::{leading_left_subspace, singular_values};
use crate::matrix::Matrix;
use crate::solver::{
    hosvd_init, mode_projector_distances, objective, sweep, Algorithm, FactorSet, ModeRecord,
};
use crate::subspace::{greedy_project, key_inequality_residual};
use crate::synthetic::{self, gaussian_matrix, random_orthonormal, Rng};
use crate::tensor::DenseTensor;
use rand::Rng as _;

/// Per-sweep record of one algorithm inside a comparison run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareStep {
    pub objective: f64,
    pub rel_change: f64,
    pub gap_min: f64,
    pub modes: Vec<ModeRecord>,
}

/// Iterate histories of HOOI, Greedy-HOOI and TUCKALS3 from one shared
/// truncated-HOSVD start.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub start: FactorSet,
    pub initial_objective: f64,
    /// Indexed like [`Algorithm::ALL`]; entry `k` is sweep `k + 1`.
    pub steps: [Vec<CompareStep>; 3],
    /// Per sweep, per mode projector distance between HOOI and Greedy-HOOI.
    pub hooi_greedy_distance: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub sweep: usize,
    pub objective_hooi: Option<f64>,
    pub objective_greedy: Option<f64>,
    pub objective_tuckals3: Option<f64>,
    pub rel_change_hooi: Option<f64>,
    pub rel_change_greedy: Option<f64>,
    pub rel_change_tuckals3: Option<f64>,
    pub gap_min_hooi: Option<f64>,
    pub gap_min_greedy: Option<f64>,
    pub proj_dist_hooi_greedy: Option<f64>,
}

/// Runs all three methods for exactly `sweeps` sweeps from the shared start.
/// A method that fails mid-run (TUCKALS3 rank deficiency) stops early; its
/// later columns stay empty.
pub fn compare(x: &DenseTensor, ranks: &[usize], sweeps: usize, gap_tol: f64) -> Result<Comparison> {
    let start = hosvd_init(x, ranks, gap_tol)?;
    let initial_objective = objective(x, &start)?;
    let mut steps: [Vec<CompareStep>; 3] = Default::default();
    let mut current = [start.clone(), start.clone(), start.clone()];
    let mut alive = [true; 3];
    let mut hooi_greedy_distance = Vec::new();
    for _ in 0..sweeps {
        for (i, alg) in Algorithm::ALL.into_iter().enumerate() {
            if !alive[i] {
                continue;
            }
            match sweep(alg, x, &current[i], gap_tol) {
                Ok((next, modes)) => {
                    let step = CompareStep {
                        objective: objective(x, &next)?,
                        rel_change: subspace_rel_change(&current[i], &next)?,
                        gap_min: modes.iter().map(|m| m.gap).fold(f64::INFINITY, f64::min),
                        modes,
                    };
                    steps[i].push(step);
                    current[i] = next;
                }
                Err(_) => alive[i] = false,
            }
        }
        if alive[0] && alive[1] {
            hooi_greedy_distance.push(mode_projector_distances(&current[0], &current[1])?);
        }
    }
    Ok(Comparison { start, initial_objective, steps, hooi_greedy_distance })
}

impl Comparison {
    pub fn rows(&self) -> Vec<CompareRow> {
        let len = self.steps.iter().map(Vec::len).max().unwrap_or(0);
        (0..len)
            .map(|k| {
                let get = |i: usize| self.steps[i].get(k);
                CompareRow {
                    sweep: k + 1,
                    objective_hooi: get(0).map(|s| s.objective),
                    objective_greedy: get(1).map(|s| s.objective),
                    objective_tuckals3: get(2).map(|s| s.objective),
                    rel_change_hooi: get(0).map(|s| s.rel_change),
                    rel_change_greedy: get(1).map(|s| s.rel_change),
                    rel_change_tuckals3: get(2).map(|s| s.rel_change),
                    gap_min_hooi: get(0).map(|s| s.gap_min),
                    gap_min_greedy: get(1).map(|s| s.gap_min),
                    proj_dist_hooi_greedy: self
                        .hooi_greedy_distance
                        .get(k)
                        .map(|d| d.iter().copied().fold(0.0, f64::max)),
                }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Outcome of one randomized property campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub name: &'static str,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// Trials whose precondition did not hold (e.g. a degenerate gap).
    pub skipped: usize,
    /// Smallest observed slack; negative means a violation.
    pub worst_margin: f64,
    pub failing_trials: Vec<usize>,
}

impl CampaignReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// One trial outcome: `None` = skipped, `Some(margin)`, pass iff margin >= 0.
pub type Trial = Option<f64>;

/// Runs `f` on `trials` generators seeded `seed + i`, in parallel.
pub fn run_campaign<F>(name: &'static str, trials: usize, seed: u64, f: F) -> CampaignReport
where
    F: Fn(&mut Rng) -> Trial + Sync,
{
    let outcomes: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| f(&mut synthetic::seeded(seed.wrapping_add(i as u64))))
        .collect();
    let mut report = CampaignReport {
        name,
        trials,
        passed: 0,
        failed: 0,
        skipped: 0,
        worst_margin: f64::INFINITY,
        failing_trials: Vec::new(),
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            None => report.skipped += 1,
            Some(m) => {
                report.worst_margin = report.worst_margin.min(m);
                if m >= 0.0 {
                    report.passed += 1;
                } else {
                    report.failed += 1;
                    report.failing_trials.push(i);
                }
            }
        }
    }
    report
}

fn frob_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.inner(b).expect("same shape")
}

/// Tolerances used by [`verify_all`].
pub mod tol {
    pub const VON_NEUMANN: f64 = 1e-10;
    pub const KEY_INEQUALITY: f64 = 1e-10;
    pub const FIXED_POINT: f64 = 1e-10;
    pub const SWEEP_EQUIVALENCE: f64 = 1e-8;
    /// Minimum gap for a trial to be eligible for sweep equivalence.
    pub const ELIGIBLE_GAP: f64 = 1e-6;
}

/// `|<X, Y>| <= sum_i sigma_i(X) sigma_i(Y)` on random pairs.
pub fn von_neumann_trial(rng: &mut Rng) -> Trial {
    let m = rng.random_range(1..=8);
    let p = rng.random_range(1..=8);
    let x = gaussian_matrix(rng, m, p);
    let y = gaussian_matrix(rng, m, p);
    let sx = singular_values(&x).ok()?;
    let sy = singular_values(&y).ok()?;
    let bound: f64 = sx.iter().zip(&sy).map(|(a, b)| a * b).sum();
    Some(bound + tol::VON_NEUMANN - frob_inner(&x, &y).abs())
}

/// Pairs sharing singular vectors attain the bound.
pub fn von_neumann_equality_trial(rng: &mut Rng) -> Trial {
    let m = rng.random_range(1..=8);
    let p = rng.random_range(1..=8);
    let k = m.min(p);
    let u = random_orthonormal(rng, m, k);
    let v = random_orthonormal(rng, p, k);
    let draw = |rng: &mut Rng| {
        let mut s: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..3.0)).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let a = draw(rng);
    let b = draw(rng);
    let build = |s: &[f64]| {
        u.as_matrix()
            .matmul(&Matrix::from_diag(s))
            .and_then(|us| us.matmul_t(v.as_matrix()))
            .expect("shapes")
    };
    let x = build(&a);
    let y = build(&b);
    let sx = singular_values(&x).ok()?;
    let sy = singular_values(&y).ok()?;
    let bound: f64 = sx.iter().zip(&sy).map(|(a, b)| a * b).sum();
    Some(tol::VON_NEUMANN - (frob_inner(&x, &y) - bound).abs())
}

/// Key inequality on `X in O(8x3)`, `Y in R^{8x10}` with `Z` the greedy step.
pub fn key_inequality_trial(rng: &mut Rng) -> Trial {
    let x = random_orthonormal(rng, 8, 3);
    let y = gaussian_matrix(rng, 8, 10);
    let res = greedy_project(&y, 3, &x, 0.0).ok()?;
    if res.gap <= tol::ELIGIBLE_GAP {
        return None;
    }
    let r = key_inequality_residual(&x, &y, &res.z).ok()?;
    Some(r + tol::KEY_INEQUALITY)
}

/// A rotated leading basis of `Y` is returned unchanged by the greedy step.
pub fn fixed_point_trial(rng: &mut Rng) -> Trial {
    let m = rng.random_range(2..=10);
    let p = rng.random_range(2..=10);
    let r = rng.random_range(1..=m.min(p));
    let y = gaussian_matrix(rng, m, p);
    let lead = leading_left_subspace(&y, r, 0.0).ok()?;
    if lead.gap <= tol::ELIGIBLE_GAP {
        return None;
    }
    let q = random_orthonormal(rng, r, r);
    let x = lead.basis.rotate(&q).ok()?;
    let z = greedy_project(&y, r, &x, 0.0).ok()?.z;
    let d = z.as_matrix().sub(x.as_matrix()).ok()?.fro_norm();
    Some(tol::FIXED_POINT - d)
}

/// HOOI and Greedy-HOOI iterates span the same subspaces at every sweep.
pub fn sweep_equivalence_trial(rng: &mut Rng) -> Trial {
    let shape: Vec<usize> = (0..3).map(|_| rng.random_range(3..=7)).collect();
    let ranks: Vec<usize> = loop {
        let r: Vec<usize> = shape.iter().map(|&d| rng.random_range(1..=d.min(3))).collect();
        if crate::solver::check_ranks(&shape, &r).is_ok() {
            break r;
        }
    };
    let noise = [0.0, 0.1, 0.5][rng.random_range(0..3)];
    let x = synthetic::gen_synthetic(&shape, &ranks, noise, rng.random()).ok()?;
    let start = hosvd_init(&x, &ranks, 0.0).ok()?;
    let (mut h, mut g) = (start.clone(), start);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (hn, hr) = sweep(Algorithm::Hooi, &x, &h, 0.0).ok()?;
        let (gn, gr) = sweep(Algorithm::Greedy, &x, &g, 0.0).ok()?;
        if hr.iter().chain(&gr).any(|m| m.gap <= tol::ELIGIBLE_GAP) {
            return None;
        }
        let d = mode_projector_distances(&hn, &gn).ok()?;
        worst = d.into_iter().fold(worst, f64::max);
        h = hn;
        g = gn;
    }
    Some(tol::SWEEP_EQUIVALENCE - worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub campaigns: Vec<CampaignReport>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.campaigns.iter().all(CampaignReport::ok)
    }
}

/// Runs every campaign with `trials` trials; trial `i` is seeded with
/// `seed + i`. The shared-singular-vector check uses a tenth of the trials.
pub fn verify_all(trials: usize, seed: u64) -> VerifyReport {
    let campaigns = vec![
        run_campaign("von_neumann", trials, seed, von_neumann_trial),
        run_campaign("von_neumann_equality", trials.div_ceil(10), seed, von_neumann_equality_trial),
        run_campaign("key_inequality", trials, seed, key_inequality_trial),
        run_campaign("fixed_point", trials, seed, fixed_point_trial),
        run_campaign("sweep_equivalence", trials, seed, sweep_equivalence_trial),
    ];
    VerifyReport { seed, trials, campaigns }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_verify_run_passes() {
        let rep = verify_all(40, 5);
        for c in &rep.campaigns {
            assert!(c.ok(), "{c:?}");
            assert!(c.passed > 0, "{c:?}");
        }
        assert!(rep.all_pass());
    }

    #[test]
    fn campaigns_are_deterministic() {
        let a = verify_all(12, 77);
        let b = verify_all(12, 77);
        assert_eq!(a.campaigns, b.campaigns);
    }

    #[test]
    fn compare_shares_start_and_tracks_distance() {
        let x = synthetic::gen_synthetic(&[8, 8, 8], &[2, 2, 2], 0.1, 4).unwrap();
        let cmp = compare(&x, &[2, 2, 2], 5, 1e-8).unwrap();
        assert_eq!(cmp.steps.iter().map(Vec::len).collect::<Vec<_>>(), vec![5, 5, 5]);
        assert_eq!(cmp.hooi_greedy_distance.len(), 5);
        let rows = cmp.rows();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.proj_dist_hooi_greedy.unwrap() <= 1e-8));
        let mut buf = Vec::new();
        cmp.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sweep,objective_hooi,"));
        assert_eq!(text.lines().count(), 6);
    }
}
