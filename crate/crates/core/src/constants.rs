//! Explicit constants of the unique continuation estimates.
//!
//! The constants are astronomically small for realistic inputs, so every
//! constant is computed as its natural logarithm first. The plain values are
//! `exp` of those and may underflow to zero; reports always carry both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ceil_sqrt, BoundaryCondition};
use crate::quadrature;

/// Side of the dominating-site boxes, in units of `⌈√d⌉`.
pub const T_DOMINATING: usize = 62;
/// Side of the boxes in the local-fluctuation argument, in units of `⌈√d⌉`.
pub const T_LOCAL: usize = 30;
/// Sub-boxes per axis of a unit cell in the local-fluctuation argument, in units of `⌈√d⌉`.
pub const SUBDIVISION: usize = 10;
/// Largest ball radius admitted by the local-fluctuation constant.
pub const DELTA_LOCAL_MAX: f64 = 1.0 / 20.0;

const SERIES_CUTOFF: f64 = 8.0;

/// Unknown absolute constants of the Carleman machinery.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanConfig {
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "K_Delta")]
    pub k_delta: f64,
    /// Dimension constant `C(d) > 1` of the closed-form bounds.
    #[serde(rename = "C_dim")]
    pub c_dim: f64,
}

impl Default for CarlemanConfig {
    fn default() -> Self {
        CarlemanConfig {
            c2: 1.0,
            c3: 1.0,
            k_delta: 1.0,
            c_dim: std::f64::consts::E,
        }
    }
}

impl CarlemanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c2 >= 1.0 && self.c3 >= 1.0) {
            return Err(Error::Domain("C2 and C3 must be at least 1".into()));
        }
        if !(self.k_delta > 0.0) {
            return Err(Error::Domain("K_Delta must be positive".into()));
        }
        if !(self.c_dim > 1.0) {
            return Err(Error::Domain("C_dim must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcpParams {
    pub d: usize,
    pub k_v: f64,
    pub d0: f64,
    pub r: f64,
    pub delta: f64,
    pub beta: f64,
}

impl UcpParams {
    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !(self.k_v >= 0.0) || !(self.d0 > 0.0) || !(self.r > 0.0) {
            return Err(Error::Domain("need K_V >= 0, D0 > 0, R > 0".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Domain("delta must be positive".into()));
        }
        if !(self.beta >= 1.0) {
            return Err(Error::Domain("beta must be at least 1".into()));
        }
        Ok(())
    }
}

/// `∫₀ˢ (1 − e^{−t})/t dt`.
fn ein(s: f64) -> f64 {
    if s <= SERIES_CUTOFF {
        ein_series(s)
    } else {
        // t = e^u turns the tail into the bounded integrand 1 − exp(−e^u)
        ein_series(SERIES_CUTOFF)
            + quadrature::integrate(|u: f64| -(-u.exp()).exp_m1(), SERIES_CUTOFF.ln(), s.ln(), 1e-14)
    }
}

fn ein_series(s: f64) -> f64 {
    let mut sum = 0.0;
    // term_k = (−1)^{k+1} s^k / k!
    let mut term = s;
    let mut k = 1.0;
    loop {
        let contrib = term / k;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-300) || k > 200.0 {
            break;
        }
        k += 1.0;
        term *= -s / k;
    }
    sum
}

/// Carleman profile `φ(s) = s · exp(−∫₀ˢ (1 − e^{−t})/t dt)`.
pub fn phi(s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("phi needs s >= 0, got {s}")));
    }
    Ok(s * (-ein(s)).exp())
}

/// Radial Carleman weight `w_ρ(x) = φ(|x|/ρ)`.
pub fn weight(x: &[f64], rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    phi(r / rho)
}

/// The three lower bounds on the Carleman exponent α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    pub carleman: f64,
    pub potential: f64,
    /// Half the logarithmic bound, clamped at zero.
    pub logarithmic: f64,
}

impl AlphaBounds {
    pub fn max(&self) -> f64 {
        self.carleman.max(self.potential).max(self.logarithmic)
    }
}

pub fn alpha_bounds(p: &UcpParams, c: &CarlemanConfig) -> AlphaBounds {
    let potential = (24f64.powi(5) * c.c3 * p.k_v * p.k_v * p.r.powi(4)).cbrt();
    let d1 = p.d0.min(1.0);
    let ln_arg = 4.0 * (24.0 * p.r * c.k_delta / p.d0).ln() + c.c3.ln() + (1.0 + p.k_v * p.k_v).ln()
        - 2.0 * d1.ln()
        + p.beta.ln();
    AlphaBounds {
        carleman: c.c2,
        potential,
        logarithmic: (0.5 * ln_arg).max(0.0),
    }
}

/// Smallest α admitted by all three lower bounds.
pub fn choose_alpha(p: &UcpParams, c: &CarlemanConfig) -> f64 {
    alpha_bounds(p, c).max()
}

/// `ln C_qUC` from the explicit Carleman bound.
pub fn ln_c_quc_full(p: &UcpParams, c: &CarlemanConfig) -> Result<f64> {
    p.validate()?;
    c.validate()?;
    if p.delta >= 4.0 * p.r {
        return Err(Error::GeometryViolation(format!(
            "delta = {} must be below 4R = {}",
            p.delta,
            4.0 * p.r
        )));
    }
    let alpha = choose_alpha(p, c);
    Ok((5.0f64 / 16.0 / 41.0).ln() + 3.0 * c.c2.ln()
        - c.c3.ln()
        - 4.0 * c.k_delta.ln()
        + 4.0 * p.delta.ln()
        - 2.0 * p.r.ln()
        + 2.0 * alpha * (p.delta / (48.0 * p.r)).ln()
        - (1.0 + p.k_v * p.k_v).ln())
}

pub fn c_quc_full(p: &UcpParams, c: &CarlemanConfig) -> Result<f64> {
    ln_c_quc_full(p, c).map(f64::exp)
}

/// Closed-form `C_qUC`, as logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryValue {
    /// `ln (δ/(CR))^{C + C R^{4/3} K_V^{2/3} + ln β}`.
    pub ln_value: f64,
    /// `ln (δ/C)^{C + C K_V^{2/3} + ln β}`, exposed when `R ≤ 2⌈√d⌉`.
    pub ln_simplified: Option<f64>,
}

pub fn c_quc_corollary(d: usize, k_v: f64, r: f64, delta: f64, beta: f64, c_dim: f64) -> Result<CorollaryValue> {
    check_delta(delta)?;
    if !(k_v >= 0.0) || !(beta >= 1.0) || !(c_dim > 1.0) {
        return Err(Error::Domain("need K_V >= 0, beta >= 1, C > 1".into()));
    }
    if r < (d as f64).sqrt() {
        return Err(Error::GeometryViolation(format!("R = {r} is below sqrt(d)")));
    }
    let exponent = c_dim + c_dim * r.powf(4.0 / 3.0) * k_v.powf(2.0 / 3.0) + beta.ln();
    let ln_value = exponent * (delta / (c_dim * r)).ln();
    let ln_simplified = (r <= 2.0 * ceil_sqrt(d) as f64).then(|| ln_corollary_simplified(k_v, delta, beta, c_dim));
    Ok(CorollaryValue { ln_value, ln_simplified })
}

/// `ln (δ/C)^{C + C K_V^{2/3} + ln β}`.
fn ln_corollary_simplified(k_v: f64, delta: f64, beta: f64, c_dim: f64) -> f64 {
    (c_dim + c_dim * k_v.powf(2.0 / 3.0) + beta.ln()) * (delta / c_dim).ln()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

/// Mass-ratio bound `β` fed into the scale-free constant.
pub fn sfuc_beta(d: usize, bc: BoundaryCondition) -> f64 {
    let t = (T_DOMINATING * ceil_sqrt(d)) as f64;
    match bc {
        BoundaryCondition::Periodic => 2.0 * t.powi(d as i32),
        BoundaryCondition::Dirichlet => 2.0 * (2.0 * t).powi(d as i32),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfucValue {
    /// Prefactor times the closed-form `C_qUC` at `R = 2⌈√d⌉`.
    pub ln_composed: f64,
    /// `ln (δ/C)^{C + C K_V^{2/3}}`.
    pub ln_lower_bound: f64,
    /// `ln (δ/(CM))^{C + C M^{4/3} K_V^{2/3}}` for a dilute lattice.
    pub ln_dilute: Option<f64>,
    pub beta: f64,
}

impl SfucValue {
    pub fn composed(&self) -> f64 {
        self.ln_composed.exp()
    }
}

/// Scale-free constant for unit-cell arrangements, optionally also the
/// dilute variant for period `m`.
pub fn c_sfuc(d: usize, k_v: f64, delta: f64, bc: BoundaryCondition, c_dim: f64, m: Option<usize>) -> Result<SfucValue> {
    check_delta(delta)?;
    let beta = sfuc_beta(d, bc);
    let r = 2.0 * ceil_sqrt(d) as f64;
    let prefactor: f64 = match bc {
        BoundaryCondition::Periodic => 0.5,
        BoundaryCondition::Dirichlet => 0.25,
    };
    let cor = c_quc_corollary(d, k_v, r, delta, beta, c_dim)?;
    let kv23 = k_v.powf(2.0 / 3.0);
    let ln_dilute = match m {
        Some(0) => return Err(Error::Domain("lattice period must be positive".into())),
        Some(m) => {
            let m = m as f64;
            Some((c_dim + c_dim * m.powf(4.0 / 3.0) * kv23) * (delta / (c_dim * m)).ln())
        }
        None => None,
    };
    Ok(SfucValue {
        ln_composed: prefactor.ln() + cor.ln_value,
        ln_lower_bound: (c_dim + c_dim * kv23) * (delta / c_dim).ln(),
        ln_dilute,
        beta,
    })
}

/// Two-step constant of the local-fluctuation estimate, as logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFluctuation {
    pub ln_c_lf: f64,
    /// `ln c₁(δ, β)`, an upper bound for `ln C_lf`.
    pub ln_c1: f64,
    pub ln_beta: f64,
    pub ln_beta_tilde: f64,
    pub t: usize,
}

pub fn c_lf(d: usize, k_v: f64, delta: f64, bc: BoundaryCondition, config: &CarlemanConfig) -> Result<LocalFluctuation> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if delta > DELTA_LOCAL_MAX {
        return Err(Error::DeltaTooLarge(delta));
    }
    config.validate()?;
    let s = ceil_sqrt(d);
    let t = T_LOCAL * s;
    let df = d as f64;
    let ln_sub = df * ((SUBDIVISION * s) as f64).ln();
    let ln_mirror = match bc {
        BoundaryCondition::Periodic => 0.0,
        BoundaryCondition::Dirichlet => df * 2f64.ln(),
    };
    let ln_beta = 2f64.ln() + ln_sub + df * (t as f64).ln() + ln_mirror;
    let quc = |delta: f64, ln_beta: f64| {
        (config.c_dim + config.c_dim * k_v.powf(2.0 / 3.0) + ln_beta) * (delta / config.c_dim).ln()
    };
    let ln_c1 = |delta: f64| quc(delta, ln_beta) - ln_sub;
    let ln_beta_tilde = 2f64.ln() + df * (t as f64).ln() - ln_c1(DELTA_LOCAL_MAX) + ln_mirror;
    let ln_c_lf = quc(DELTA_LOCAL_MAX, ln_beta) + quc(delta, ln_beta_tilde) - ln_sub;
    let out = LocalFluctuation {
        ln_c_lf,
        ln_c1: ln_c1(delta),
        ln_beta,
        ln_beta_tilde,
        t,
    };
    debug_assert!(out.ln_c_lf <= out.ln_c1 + 1e-9);
    if out.ln_c_lf > out.ln_c1 + 1e-9 {
        return Err(Error::Domain("local fluctuation constant exceeds c1".into()));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaCw {
    pub ln_kappa: f64,
    pub c_e: f64,
    pub ln_c_w: f64,
}

impl KappaCw {
    pub fn kappa(&self) -> f64 {
        self.ln_kappa.exp()
    }

    pub fn c_w(&self) -> f64 {
        self.ln_c_w.exp()
    }
}

/// `κ = C₋ · C_sfUC`, `C_E = K₁ e^{E₀+1} + 2^d K₂`, `C_W = C_E ⌈4/κ⌉`.
///
/// `ln_c_sfuc` is passed as a logarithm since the constant underflows.
pub fn kappa_and_cw(c_minus: f64, ln_c_sfuc: f64, e0: f64, d: usize, k1: f64, k2: f64) -> Result<KappaCw> {
    if !(c_minus > 0.0 && k1 > 0.0 && k2 > 0.0) || !ln_c_sfuc.is_finite() {
        return Err(Error::Domain("kappa needs positive C-, K1, K2 and finite C_sfUC".into()));
    }
    let ln_kappa = c_minus.ln() + ln_c_sfuc;
    let c_e = k1 * (e0 + 1.0).exp() + 2f64.powi(d as i32) * k2;
    let ln_ratio = 4f64.ln() - ln_kappa;
    // beyond 2^53 the ceiling is the identity in floating point
    let ln_ceil = if ln_ratio < 36.0 {
        ln_ratio.exp().ceil().ln()
    } else {
        ln_ratio
    };
    Ok(KappaCw {
        ln_kappa,
        c_e,
        ln_c_w: c_e.ln() + ln_ceil,
    })
}

/// Inputs of [`constants_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsInput {
    pub d: usize,
    pub k_v: f64,
    pub delta: f64,
    pub bc: BoundaryCondition,
    pub d0: f64,
    pub m: Option<usize>,
    pub c_minus: f64,
    pub e0: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for ConstantsInput {
    fn default() -> Self {
        ConstantsInput {
            d: 1,
            k_v: 0.0,
            delta: 0.3,
            bc: BoundaryCondition::Periodic,
            d0: 1.0,
            m: None,
            c_minus: 1.0,
            e0: 0.0,
            k1: 1.0,
            k2: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub alpha: f64,
    pub c_quc: f64,
    pub ln_c_quc: f64,
    pub c_sfuc: f64,
    pub ln_c_sfuc: f64,
    pub ln_c_sfuc_lower_bound: f64,
    pub ln_c_sfuc_dilute: Option<f64>,
    pub c_lf: Option<f64>,
    pub ln_c_lf: Option<f64>,
    pub kappa: f64,
    pub ln_kappa: f64,
    pub c_e: f64,
    pub c_w: f64,
    pub ln_c_w: f64,
    pub bc: BoundaryCondition,
    pub config: CarlemanConfig,
    pub params: UcpParams,
}

impl ConstantsReport {
    pub const CSV_HEADER: &'static str = "d,bc,K_V,delta,D0,R,beta,alpha,ln_c_quc,ln_c_sfuc,ln_c_sfuc_lower,ln_c_lf,ln_kappa,c_E,ln_c_W,C2,C3,K_Delta,C_dim";

    pub fn csv_row(&self) -> String {
        let f = |v: f64| format!("{v:.16e}");
        let opt = |v: Option<f64>| v.map(f).unwrap_or_default();
        let p = &self.params;
        let c = &self.config;
        [
            p.d.to_string(),
            self.bc.to_string(),
            f(p.k_v),
            f(p.delta),
            f(p.d0),
            f(p.r),
            f(p.beta),
            f(self.alpha),
            f(self.ln_c_quc),
            f(self.ln_c_sfuc),
            f(self.ln_c_sfuc_lower_bound),
            opt(self.ln_c_lf),
            f(self.ln_kappa),
            f(self.c_e),
            f(self.ln_c_w),
            f(c.c2),
            f(c.c3),
            f(c.k_delta),
            f(c.c_dim),
        ]
        .join(",")
    }
}

/// Evaluates every constant for one parameter set. `C_qUC` is taken at the
/// scale-free geometry `R = 2⌈√d⌉` with the matching `β`; `C_lf` is present
/// only for `δ ≤ 1/20`.
pub fn constants_report(input: &ConstantsInput, config: &CarlemanConfig) -> Result<ConstantsReport> {
    config.validate()?;
    let d = input.d;
    let params = UcpParams {
        d,
        k_v: input.k_v,
        d0: input.d0,
        r: 2.0 * ceil_sqrt(d) as f64,
        delta: input.delta,
        beta: sfuc_beta(d, input.bc),
    };
    let ln_c_quc = ln_c_quc_full(&params, config)?;
    let sf = c_sfuc(d, input.k_v, input.delta, input.bc, config.c_dim, input.m)?;
    let lf = if input.delta <= DELTA_LOCAL_MAX {
        Some(c_lf(d, input.k_v, input.delta, input.bc, config)?)
    } else {
        None
    };
    let kc = kappa_and_cw(input.c_minus, sf.ln_composed, input.e0, d, input.k1, input.k2)?;
    Ok(ConstantsReport {
        alpha: choose_alpha(&params, config),
        c_quc: ln_c_quc.exp(),
        ln_c_quc,
        c_sfuc: sf.composed(),
        ln_c_sfuc: sf.ln_composed,
        ln_c_sfuc_lower_bound: sf.ln_lower_bound,
        ln_c_sfuc_dilute: sf.ln_dilute,
        c_lf: lf.map(|l| l.ln_c_lf.exp()),
        ln_c_lf: lf.map(|l| l.ln_c_lf),
        kappa: kc.kappa(),
        ln_kappa: kc.ln_kappa,
        c_e: kc.c_e,
        c_w: kc.c_w(),
        ln_c_w: kc.ln_c_w,
        bc: input.bc,
        config: *config,
        params,
    })
}
