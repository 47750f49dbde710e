use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DeloneArrangement;
use crate::operator::{
    count_in_interval, eigs_lowest, symmetric_eigenvalues, DiscreteHamiltonian, EigOptions, GridFunction,
};
use crate::ucp::mass_ratio;

/// Step of the central difference for `dλ/dt`.
pub const HF_STEP: f64 = 1e-4;
/// Gap below which the ground state counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftPoint {
    pub t: f64,
    pub lambda: f64,
    /// Central difference of `λ` at `t`.
    pub hf_lhs: f64,
    /// `⟨ψ(t), W ψ(t)⟩`.
    pub hf_rhs: f64,
    pub gap: f64,
    pub hf_skipped: bool,
    /// Ground-state mass fraction on the balls.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftReport {
    pub points: Vec<LiftPoint>,
    /// `C₋ · min_t ratio(t)`.
    pub kappa_emp: f64,
    /// `min_t (λ(t) − λ(0) − (1 − tol) κ_emp t)`.
    pub lift_margin: f64,
    /// Largest second difference of `λ` along the grid.
    pub max_second_difference: f64,
    /// Largest `|hf_lhs − hf_rhs| / (1 + |λ|)` over non-degenerate points.
    pub max_hf_residual: f64,
}

impl LiftReport {
    pub const CSV_HEADER: &'static str = "t,lambda,hf_lhs,hf_rhs,gap,hf_skipped,ratio";

    pub fn csv_rows(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.16e}");
        self.points
            .iter()
            .map(|p| {
                [f(p.t), f(p.lambda), f(p.hf_lhs), f(p.hf_rhs), f(p.gap), p.hf_skipped.to_string(), f(p.ratio)]
                    .join(",")
            })
            .collect()
    }
}

fn ground(h: &DiscreteHamiltonian, k: usize, opts: &EigOptions) -> Result<Vec<crate::operator::EigenPair>> {
    eigs_lowest(h, k.min(h.dim()), opts)
}

/// Ground-state energy of `H₀ + t W` across `t_grid`, with the
/// Hellmann–Feynman derivative and the ball mass of each ground state.
/// `balls` carries the centers and radius `δ₋` of the lower profile bound.
pub fn eigenvalue_lift(
    h0: &DiscreteHamiltonian,
    w: &GridFunction,
    t_grid: &[f64],
    c_minus: f64,
    balls: &DeloneArrangement,
    tol: f64,
    opts: &EigOptions,
) -> Result<LiftReport> {
    if t_grid.len() < 2 || t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidInput("t grid must be increasing with at least two points".into()));
    }
    let lambda_at = |t: f64| -> Result<f64> { Ok(ground(&h0.with_added_potential(w, t)?, 1, opts)?[0].lambda) };
    let points: Vec<LiftPoint> = t_grid
        .iter()
        .map(|&t| {
            let pairs = ground(&h0.with_added_potential(w, t)?, 2, opts)?;
            let psi = &pairs[0].psi;
            let gap = pairs.get(1).map_or(f64::INFINITY, |p| p.lambda - pairs[0].lambda);
            let hf_rhs = w.values.iter().zip(&psi.values).map(|(a, b)| a * b * b).sum::<f64>() * psi.grid.cell_volume();
            let hf_skipped = gap < DEGENERACY_GAP;
            let hf_lhs = if hf_skipped {
                f64::NAN
            } else {
                (lambda_at(t + HF_STEP)? - lambda_at(t - HF_STEP)?) / (2.0 * HF_STEP)
            };
            Ok(LiftPoint {
                t,
                lambda: pairs[0].lambda,
                hf_lhs,
                hf_rhs,
                gap,
                hf_skipped,
                ratio: mass_ratio(psi, balls)?,
            })
        })
        .collect::<Result<_>>()?;

    let kappa_emp = c_minus * points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let (t0, l0) = (points[0].t, points[0].lambda);
    let lift_margin = points
        .iter()
        .map(|p| p.lambda - l0 - (1.0 - tol) * kappa_emp * (p.t - t0))
        .fold(f64::INFINITY, f64::min);
    let mean_step = (t_grid[t_grid.len() - 1] - t0) / (t_grid.len() - 1) as f64;
    let max_second_difference = points
        .windows(3)
        .map(|p| {
            let (a, b, c) = (&p[0], &p[1], &p[2]);
            (c.lambda * (b.t - a.t) - b.lambda * (c.t - a.t) + a.lambda * (c.t - b.t)) / mean_step
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let max_hf_residual = points
        .iter()
        .filter(|p| !p.hf_skipped)
        .map(|p| (p.hf_lhs - p.hf_rhs).abs() / (1.0 + p.lambda.abs()))
        .fold(0.0, f64::max);
    Ok(LiftReport {
        points,
        kappa_emp,
        lift_margin,
        max_second_difference,
        max_hf_residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UncertaintyReport {
    /// Upper end of `I = (−∞, λ₀ + qκ]`.
    pub top: f64,
    pub dim_p: usize,
    /// Smallest eigenvalue of `P W P` on `ran P`.
    pub min_compression: f64,
    /// `(1 − q) κ`.
    pub bound: f64,
    pub ok: bool,
}

/// Compresses `W` to the spectral subspace of `H₀` below `λ₀ + qκ` and
/// compares its bottom with `(1 − q)κ`.
pub fn uncertainty_check(
    h0: &DiscreteHamiltonian,
    w: &GridFunction,
    q: f64,
    kappa: f64,
    tol: f64,
    opts: &EigOptions,
) -> Result<UncertaintyReport> {
    if !(q > 0.0 && q < 1.0 && kappa > 0.0) {
        return Err(Error::InvalidInput("need q in (0, 1) and kappa > 0".into()));
    }
    let lambda0 = ground(h0, 1, opts)?[0].lambda;
    let top = lambda0 + q * kappa;
    let dim_p = count_in_interval(h0, f64::NEG_INFINITY, top)?;
    if dim_p == 0 {
        return Err(Error::EmptyProjector);
    }
    let pairs = ground(h0, dim_p, opts)?;
    let vol = w.grid.cell_volume();
    let mut m = vec![0.0; dim_p * dim_p];
    for i in 0..dim_p {
        let wi: Vec<f64> = w.values.iter().zip(&pairs[i].psi.values).map(|(a, b)| a * b).collect();
        for j in i..dim_p {
            let v = vol * wi.iter().zip(&pairs[j].psi.values).map(|(a, b)| a * b).sum::<f64>();
            m[i * dim_p + j] = v;
            m[j * dim_p + i] = v;
        }
    }
    let min_compression = symmetric_eigenvalues(dim_p, &m)?[0];
    let bound = (1.0 - q) * kappa;
    Ok(UncertaintyReport {
        top,
        dim_p,
        min_compression,
        bound,
        ok: min_compression >= bound * (1.0 - tol),
    })
}
