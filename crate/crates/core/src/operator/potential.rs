use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridFunction};

/// Closed-form background potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant { value: f64 },
    /// `a Σ_i cos(2π x_i)`.
    Cosine { amplitude: f64 },
}

impl PotentialSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::Cosine { amplitude } => amplitude * x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>(),
        }
    }

    pub fn sample(&self, grid: &Grid) -> GridFunction {
        grid.sample(|x| self.eval(x))
    }
}
