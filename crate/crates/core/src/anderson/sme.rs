use serde::{Deserialize, Serialize};

use super::distribution::CouplingDistribution;
use crate::error::{Error, Result};
use crate::operator::rho_switch;
use crate::quadrature::integrate;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmeRow {
    pub label: String,
    pub epsilon: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl SmeRow {
    pub const CSV_HEADER: &'static str = "label,epsilon,lhs,rhs,ok";

    pub fn csv_row(&self) -> String {
        format!("{},{:.16e},{:.16e},{:.16e},{}", self.label, self.epsilon, self.lhs, self.rhs, self.ok)
    }
}

const MONOTONE_SAMPLES: usize = 2000;

/// `∫ [φ(λ+ε) − φ(λ)] dμ(λ) ≤ s(ε) [φ(b+ε) − φ(a)]` for each `ε`, with
/// `[a, b]` the support of `μ`.
pub fn sme_check<F: Fn(f64) -> f64>(
    dist: &CouplingDistribution,
    label: &str,
    phi: F,
    epsilons: &[f64],
) -> Result<Vec<SmeRow>> {
    let (a, b) = dist.support();
    let emax = epsilons.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = (a - 1.0, b + emax + 1.0);
    let mut prev = phi(lo);
    for i in 1..=MONOTONE_SAMPLES {
        let y = phi(lo + (hi - lo) * i as f64 / MONOTONE_SAMPLES as f64);
        if y < prev - 1e-12 {
            return Err(Error::InvalidInput(format!("{label} is not non-decreasing")));
        }
        prev = y;
    }
    epsilons
        .iter()
        .map(|&eps| {
            if eps <= 0.0 {
                return Err(Error::InvalidInput("epsilon must be positive".into()));
            }
            let jump = |x: f64| phi(x + eps) - phi(x);
            let lhs = match dist.atoms() {
                Some(atoms) => atoms.iter().map(|&(v, w)| w * jump(v)).sum(),
                None => integrate(|x| jump(x) * dist.density(x).unwrap_or(0.0), a, b, 1e-14),
            };
            let rhs = dist.modulus_of_continuity(eps) * (phi(b + eps) - phi(a));
            Ok(SmeRow {
                label: label.to_string(),
                epsilon: eps,
                lhs,
                rhs,
                ok: lhs <= rhs + 1e-10,
            })
        })
        .collect()
}

/// Runs [`sme_check`] against `ρ_ε(· − c)` for every `ε` in the grid and
/// every center `c`, using the switch width as `ε`.
pub fn sme_rho_family(dist: &CouplingDistribution, epsilons: &[f64], centers: &[f64]) -> Result<Vec<SmeRow>> {
    let mut rows = Vec::new();
    for &eps in epsilons {
        let rho = rho_switch(eps)?;
        for &c in centers {
            let label = format!("rho_{eps}@{c}");
            rows.extend(sme_check(dist, &label, |x| rho.eval(x - c), &[eps])?);
        }
    }
    Ok(rows)
}
