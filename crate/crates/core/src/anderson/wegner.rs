use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::ModelSpec;
use crate::constants::{self, CarlemanConfig};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, BoxSpec};
use crate::operator::{build_hamiltonian, count_in_interval_with, eigs_lowest, EigOptions, Grid};
use crate::ucp::{ls_slope, mass_ratio};

/// Reference energy of a Wegner run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Energy {
    Absolute(f64),
    /// Offset above the ground state of the disorder-free box operator.
    AboveGround(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WegnerSpec {
    pub d: usize,
    pub l: usize,
    pub bc: BoundaryCondition,
    pub nodes_per_unit: usize,
    pub energy: Energy,
    pub epsilons: Vec<f64>,
    pub n_real: usize,
    pub seed: u64,
    /// Fraction of the lift used for the low-energy window.
    #[serde(default = "half")]
    pub q: f64,
    #[serde(default = "one")]
    pub k1: f64,
    #[serde(default = "one")]
    pub k2: f64,
    #[serde(default)]
    pub eig: EigOptions,
    #[serde(default)]
    pub config: CarlemanConfig,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WegnerRow {
    pub l: usize,
    pub e: f64,
    pub epsilon: f64,
    pub n_real: usize,
    pub mean_count: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub s_eps: f64,
    pub ln_bound_all_e: f64,
    pub ln_bound_low_e: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WegnerTable {
    pub rows: Vec<WegnerRow>,
    /// Log-log slope of mean count against `ε`.
    pub slope: f64,
    pub monotone: bool,
    pub dropped: usize,
    /// Ground state of the disorder-free box operator, standing in for the
    /// bottom of the infinite-volume spectrum.
    pub lambda0: f64,
    pub kappa_emp: f64,
    /// `[λ₀, λ₀ + q κ_emp]`.
    pub low_window: [f64; 2],
    pub k_v: f64,
    pub ln_c_w: f64,
    /// Per-realization counts, `counts[r][i]` for `epsilons[i]`.
    #[serde(skip)]
    pub counts: Vec<Vec<usize>>,
}

impl WegnerTable {
    pub const CSV_HEADER: &'static str =
        "L,E,epsilon,n_real,mean_count,ci_lo,ci_hi,bound_all_E,bound_low_E,slope_fit,s_eps,ln_bound_all_E,ln_bound_low_E";

    pub fn csv_rows(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.16e}");
        self.rows
            .iter()
            .map(|r| {
                [
                    r.l.to_string(),
                    f(r.e),
                    f(r.epsilon),
                    r.n_real.to_string(),
                    f(r.mean_count),
                    f(r.ci_lo),
                    f(r.ci_hi),
                    f(r.ln_bound_all_e.exp()),
                    r.ln_bound_low_e.map(|b| f(b.exp())).unwrap_or_default(),
                    f(self.slope),
                    f(r.s_eps),
                    f(r.ln_bound_all_e),
                    r.ln_bound_low_e.map(f).unwrap_or_default(),
                ]
                .join(",")
            })
            .collect()
    }
}

/// Monte-Carlo mean of `#σ(H_ω) ∩ [E − ε, E + ε]` over `n_real`
/// realizations, the same realizations for every `ε`.
pub fn wegner_mc(model: &ModelSpec, spec: &WegnerSpec) -> Result<WegnerTable> {
    if spec.n_real < 2 {
        return Err(Error::InvalidInput("need at least 2 realizations".into()));
    }
    if let Some(e) = spec.epsilons.iter().find(|&&e| !(e > 0.0 && e <= 1.0 / 3.0)) {
        return Err(Error::InvalidInput(format!("epsilon {e} outside (0, 1/3]")));
    }
    if spec.l % 2 == 0 {
        return Err(Error::InvalidInput("box side must be odd".into()));
    }
    let bx = BoxSpec::centered(spec.d, spec.l as f64, spec.bc)?;
    let grid = Grid::new(bx.clone(), spec.nodes_per_unit * spec.l)?;
    let model = model.build(&bx)?;

    let v0 = model.v0.sample(&grid);
    let ground = eigs_lowest(&build_hamiltonian(&grid, &v0)?, 1, &spec.eig)?.remove(0);
    let lambda0 = ground.lambda;
    let kappa_emp = model.c_minus * mass_ratio(&ground.psi, &model.arrangement)?;
    let low_window = [lambda0, lambda0 + spec.q * kappa_emp];
    let e = match spec.energy {
        Energy::Absolute(e) => e,
        Energy::AboveGround(off) => lambda0 + off,
    };

    let overlap = model.overlap_count(&grid)? as f64;
    let v0_dev = v0.values.iter().map(|v| (v - e).abs()).fold(0.0, f64::max);
    let k_v = v0_dev + model.dist.support_bound() * model.c_plus * overlap;
    let sf = constants::c_sfuc(spec.d, k_v, model.delta_minus, spec.bc, spec.config.c_dim, None)?;
    let kc = constants::kappa_and_cw(model.c_minus, sf.ln_composed, e, spec.d, spec.k1, spec.k2)?;

    let perm = build_hamiltonian(&grid, &v0)?.band_ordering();
    let outcomes: Vec<Result<Vec<usize>>> = (0..spec.n_real as u64)
        .into_par_iter()
        .map(|r| {
            let (mut v, _) = model.sample_potential(&grid, spec.seed, r)?;
            // shift so that the working operator is at least 1
            let vmin = v.values.iter().copied().fold(f64::INFINITY, f64::min);
            let shift = (1.0 - vmin).max(0.0);
            v.values.iter_mut().for_each(|x| *x += shift);
            let h = build_hamiltonian(&grid, &v)?;
            Ok(spec
                .epsilons
                .iter()
                .map(|eps| count_in_interval_with(&h.matrix, &perm, e - eps + shift, e + eps + shift))
                .collect())
        })
        .collect();
    let counts: Vec<Vec<usize>> = outcomes.iter().filter_map(|o| o.as_ref().ok().cloned()).collect();
    let dropped = spec.n_real - counts.len();
    if dropped * 20 > spec.n_real {
        let first = outcomes.into_iter().find_map(|o| o.err());
        return Err(first.unwrap_or_else(|| Error::InvalidInput("too many dropped realizations".into())));
    }

    let n = counts.len() as f64;
    let rows: Vec<WegnerRow> = spec
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mean = counts.iter().map(|c| c[i] as f64).sum::<f64>() / n;
            let var = counts.iter().map(|c| (c[i] as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let half = 1.96 * (var / n).sqrt();
            let s = model.dist.modulus_of_continuity(eps);
            let ln_vol = spec.d as f64 * (spec.l as f64).ln();
            let inside = e - eps >= low_window[0] && e + eps <= low_window[1];
            WegnerRow {
                l: spec.l,
                e,
                epsilon: eps,
                n_real: counts.len(),
                mean_count: mean,
                ci_lo: mean - half,
                ci_hi: mean + half,
                s_eps: s,
                ln_bound_all_e: kc.ln_c_w + s.ln() + spec.d as f64 * eps.ln().abs().ln() + ln_vol,
                ln_bound_low_e: inside.then(|| kc.ln_c_w + s.ln() + ln_vol),
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.mean_count > 0.0)
        .map(|r| (r.epsilon.ln(), r.mean_count.ln()))
        .unzip();
    let monotone = rows.windows(2).all(|w| {
        let (a, b) = (&w[0], &w[1]);
        (b.epsilon - a.epsilon) * (b.mean_count - a.mean_count) >= 0.0
    });
    Ok(WegnerTable {
        slope: ls_slope(&xs, &ys),
        rows,
        monotone,
        dropped,
        lambda0,
        kappa_emp,
        low_window,
        k_v,
        ln_c_w: kc.ln_c_w,
        counts,
    })
}
