use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng;

/// Single-site coupling law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingDistribution {
    Uniform { a: f64, b: f64 },
    /// `v1` with probability `p`, otherwise `v0`.
    Bernoulli { p: f64, v0: f64, v1: f64 },
    /// Normal `(mu, sigma)` conditioned on `[a, b]`.
    TruncatedGaussian { mu: f64, sigma: f64, a: f64, b: f64 },
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

impl CouplingDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { a, b } => a.is_finite() && b.is_finite() && a <= b,
            Self::Bernoulli { p, v0, v1 } => (0.0..=1.0).contains(&p) && v0.is_finite() && v1.is_finite(),
            Self::TruncatedGaussian { mu, sigma, a, b } => {
                mu.is_finite() && sigma > 0.0 && a.is_finite() && b.is_finite() && a < b
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid coupling distribution {self:?}")))
        }
    }

    /// Smallest `[lo, hi]` containing the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { a, b } | Self::TruncatedGaussian { a, b, .. } => (a, b),
            Self::Bernoulli { p, v0, v1 } => {
                if p == 0.0 {
                    (v0, v0)
                } else if p == 1.0 {
                    (v1, v1)
                } else {
                    (v0.min(v1), v0.max(v1))
                }
            }
        }
    }

    /// `m` with `supp μ ⊂ [−m, m]`.
    pub fn support_bound(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    /// Truncation data `(Φ(α), Φ(β) − Φ(α))` of the truncated Gaussian.
    fn gauss_window(mu: f64, sigma: f64, a: f64, b: f64) -> (f64, f64) {
        let n = std_normal();
        let lo = n.cdf((a - mu) / sigma);
        (lo, n.cdf((b - mu) / sigma) - lo)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => {
                if x < a {
                    0.0
                } else if x >= b {
                    1.0
                } else {
                    (x - a) / (b - a)
                }
            }
            Self::Bernoulli { p, v0, v1 } => {
                let mut c = 0.0;
                if x >= v0 {
                    c += 1.0 - p;
                }
                if x >= v1 {
                    c += p;
                }
                c
            }
            Self::TruncatedGaussian { mu, sigma, a, b } => {
                if x < a {
                    0.0
                } else if x >= b {
                    1.0
                } else {
                    let (lo, z) = Self::gauss_window(mu, sigma, a, b);
                    ((std_normal().cdf((x - mu) / sigma) - lo) / z).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Lebesgue density, `None` for atomic laws.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            Self::Uniform { a, b } => {
                if a == b {
                    None
                } else {
                    Some(if (a..=b).contains(&x) { 1.0 / (b - a) } else { 0.0 })
                }
            }
            Self::Bernoulli { .. } => None,
            Self::TruncatedGaussian { mu, sigma, a, b } => {
                let (_, z) = Self::gauss_window(mu, sigma, a, b);
                Some(if (a..=b).contains(&x) { std_normal().pdf((x - mu) / sigma) / (sigma * z) } else { 0.0 })
            }
        }
    }

    /// Atoms `(value, weight)` of an atomic law.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            Self::Uniform { a, b } if a == b => Some(vec![(a, 1.0)]),
            Self::Bernoulli { p, v0, v1 } => Some(vec![(v0, 1.0 - p), (v1, p)]),
            _ => None,
        }
    }

    /// `μ([lo, hi])`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        match self.atoms() {
            Some(atoms) => atoms.iter().filter(|(v, _)| (lo..=hi).contains(v)).map(|(_, w)| w).sum(),
            None => self.cdf(hi) - self.cdf(lo),
        }
    }

    /// `s(ε) = sup_E μ([E − ε/2, E + ε/2])`.
    pub fn modulus_of_continuity(&self, eps: f64) -> f64 {
        let (lo, hi) = self.support();
        if eps >= hi - lo {
            return 1.0;
        }
        match *self {
            Self::Uniform { a, b } => eps / (b - a),
            Self::Bernoulli { p, .. } => p.max(1.0 - p),
            Self::TruncatedGaussian { mu, a, b, .. } => {
                // the density is unimodal, so the best window sits at the mode
                // unless that pushes it past the support
                let c = mu.clamp(a + 0.5 * eps, b - 0.5 * eps);
                self.interval_mass(c - 0.5 * eps, c + 0.5 * eps)
            }
        }
    }

    /// Inverse-CDF transform of a uniform `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => a + u * (b - a),
            Self::Bernoulli { p, v0, v1 } => {
                if u < p {
                    v1
                } else {
                    v0
                }
            }
            Self::TruncatedGaussian { mu, sigma, a, b } => {
                let (lo, z) = Self::gauss_window(mu, sigma, a, b);
                let q = (lo + u * z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                (mu + sigma * std_normal().inverse_cdf(q)).clamp(a, b)
            }
        }
    }

    /// Coupling of `site` in `realization`, a pure function of its arguments.
    pub fn sample(&self, seed: u64, realization: u64, site: u64) -> f64 {
        self.quantile(rng::uniform(seed, realization, site))
    }
}
