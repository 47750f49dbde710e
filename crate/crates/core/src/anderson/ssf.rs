use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{symmetric_eigenvalues, RhoSwitch};

/// Spectral shift of a pair `H₂ = H₁ + u` with `u ≥ 0`.
///
/// `xi[i]` is the value on `[breakpoints[i], breakpoints[i+1])`; the
/// function vanishes left of the first and right of the last breakpoint.
/// Sign: `ξ = N₁ − N₂`, which is non-negative when `u ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsfRecord {
    pub breakpoints: Vec<f64>,
    pub xi: Vec<i64>,
}

impl SsfRecord {
    pub fn from_spectra(e1: &[f64], e2: &[f64]) -> Result<Self> {
        if e1.len() != e2.len() {
            return Err(Error::InvalidInput("spectra of different sizes".into()));
        }
        let sorted = |e: &[f64]| {
            let mut v = e.to_vec();
            v.sort_by(f64::total_cmp);
            v
        };
        let (e1, e2) = (sorted(e1), sorted(e2));
        let mut breakpoints: Vec<f64> = e1.iter().chain(&e2).copied().collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let (mut i1, mut i2) = (0, 0);
        let xi = breakpoints
            .iter()
            .map(|&b| {
                while i1 < e1.len() && e1[i1] <= b {
                    i1 += 1;
                }
                while i2 < e2.len() && e2[i2] <= b {
                    i2 += 1;
                }
                i1 as i64 - i2 as i64
            })
            .collect();
        Ok(SsfRecord { breakpoints, xi })
    }

    pub fn value(&self, lambda: f64) -> i64 {
        match self.breakpoints.partition_point(|&b| b <= lambda) {
            0 => 0,
            i => self.xi[i - 1],
        }
    }

    /// `∫ F'(λ) ξ(λ) dλ` for an antiderivative `F`, exact on the step function.
    pub fn integrate_derivative<F: Fn(f64) -> f64>(&self, big_f: F) -> f64 {
        let n = self.breakpoints.len();
        (0..n.saturating_sub(1))
            .map(|i| self.xi[i] as f64 * (big_f(self.breakpoints[i + 1]) - big_f(self.breakpoints[i])))
            .sum()
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.breakpoints.iter().zip(&self.xi).map(|(b, x)| format!("{b:.16e},{x}")).collect()
    }

    pub const CSV_HEADER: &'static str = "lambda,xi";
}

/// `|Tr[ρ(H₂) − ρ(H₁)] − ∫ ρ' ξ|` with `ρ` evaluated through `f`.
pub fn trace_residual<F: Fn(f64) -> f64>(rec: &SsfRecord, e1: &[f64], e2: &[f64], f: F) -> f64 {
    let tr = e2.iter().map(|&x| f(x)).sum::<f64>() - e1.iter().map(|&x| f(x)).sum::<f64>();
    (tr - rec.integrate_derivative(&f)).abs()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SsfResult {
    pub record: SsfRecord,
    pub centers: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Spectral shift of the dense pair `(H₁, H₁ + u)` (row-major `n × n`)
/// and the trace identity tested with `ρ(· − c)` for each center.
pub fn ssf_dense(n: usize, h1: &[f64], u: &[f64], rho: &RhoSwitch, centers: &[f64]) -> Result<SsfResult> {
    if h1.len() != n * n || u.len() != n * n {
        return Err(Error::InvalidInput("matrix sizes do not match".into()));
    }
    let h2: Vec<f64> = h1.iter().zip(u).map(|(a, b)| a + b).collect();
    let e1 = symmetric_eigenvalues(n, h1)?;
    let e2 = symmetric_eigenvalues(n, &h2)?;
    let record = SsfRecord::from_spectra(&e1, &e2)?;
    let residuals: Vec<f64> = centers
        .iter()
        .map(|&c| trace_residual(&record, &e1, &e2, |x| rho.eval(x - c)))
        .collect();
    Ok(SsfResult {
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        record,
        centers: centers.to_vec(),
        residuals,
    })
}

/// `K₁ e^b + K₂ (ln(1 + ‖f‖∞))^d ‖f‖₁`, the shape that bounds `∫ f ξ`.
pub fn ssf_shape_bound(k1: f64, k2: f64, b: f64, d: usize, f_sup: f64, f_l1: f64) -> f64 {
    k1 * b.exp() + k2 * (1.0 + f_sup).ln().powi(d as i32) * f_l1
}
