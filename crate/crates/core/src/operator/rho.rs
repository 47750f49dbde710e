use crate::error::{Error, Result};

/// Smooth switch `ρ_ε`: `−1` on `(−∞, −ε]`, `0` on `[ε, ∞)`, and
/// `ρ_ε(x) = −1 + S((x + ε)/(2ε))` in between with the cubic smoothstep
/// `S(t) = 3t² − 2t³`. It is C¹ and non-decreasing with
/// `max ρ_ε' = 3/(4ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoSwitch {
    pub epsilon: f64,
}

pub fn rho_switch(epsilon: f64) -> Result<RhoSwitch> {
    if !(epsilon > 0.0 && epsilon <= 1.0 / 3.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1/3], got {epsilon}")));
    }
    Ok(RhoSwitch { epsilon })
}

impl RhoSwitch {
    fn t(&self, x: f64) -> f64 {
        ((x + self.epsilon) / (2.0 * self.epsilon)).clamp(0.0, 1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = self.t(x);
        -1.0 + t * t * (3.0 - 2.0 * t)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = self.t(x);
        6.0 * t * (1.0 - t) / (2.0 * self.epsilon)
    }

    pub fn max_derivative(&self) -> f64 {
        0.75 / self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_slope() {
        let r = rho_switch(0.1).unwrap();
        assert_eq!(r.eval(-0.2), -1.0);
        assert_eq!(r.eval(0.2), 0.0);
        assert!((r.eval(0.0) + 0.5).abs() < 1e-15);
        assert!((r.derivative(0.0) - r.max_derivative()).abs() < 1e-12);
        assert!(r.max_derivative() <= 1.0 / r.epsilon);
        assert!(rho_switch(0.5).is_err());
        assert!(rho_switch(0.0).is_err());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let r = rho_switch(0.2).unwrap();
        for i in 0..100 {
            let x = -0.3 + 0.006 * i as f64;
            let fd = (r.eval(x + 1e-7) - r.eval(x - 1e-7)) / 2e-7;
            assert!((fd - r.derivative(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn dominates_indicator() {
        let eps = 0.05;
        let r = rho_switch(eps).unwrap();
        let e = 0.3;
        for i in 0..=2000 {
            let x = -0.5 + i as f64 * 1e-3;
            let chi = if (x - e).abs() <= eps { 1.0 } else { 0.0 };
            assert!(chi <= r.eval(x - e + 2.0 * eps) - r.eval(x - e - 2.0 * eps) + 1e-15);
        }
    }
}
