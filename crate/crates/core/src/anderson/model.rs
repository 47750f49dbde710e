use serde::{Deserialize, Serialize};

use super::distribution::CouplingDistribution;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, BoxSpec, DeloneArrangement};
use crate::operator::{Grid, GridFunction, PotentialSpec};
use crate::rng::AUX_SITE_OFFSET;
use crate::ucp::ArrangementSpec;

/// Single-site bump shape.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `C₋ χ_{B(z, δ₋)}`.
    #[default]
    IndicatorBall,
    /// `C₊` on `B(z, δ₋)`, smoothstep decay to zero at `δ₊`.
    BumpBall,
}

/// Window-independent description of a Delone–Anderson model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub v0: PotentialSpec,
    #[serde(default = "lattice")]
    pub arrangement: ArrangementSpec,
    pub c_minus: f64,
    pub c_plus: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub dist: CouplingDistribution,
    #[serde(default)]
    pub profile: Profile,
}

fn lattice() -> ArrangementSpec {
    ArrangementSpec::Lattice
}

impl ModelSpec {
    pub fn build(&self, window: &BoxSpec) -> Result<DeloneAndersonModel> {
        let arrangement = self.arrangement.build(window, self.delta_minus)?;
        DeloneAndersonModel::new(
            self.v0.clone(),
            arrangement,
            [self.c_minus, self.c_plus],
            [self.delta_minus, self.delta_plus],
            self.dist.clone(),
            self.profile,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeloneAndersonModel {
    pub v0: PotentialSpec,
    pub arrangement: DeloneArrangement,
    pub c_minus: f64,
    pub c_plus: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub dist: CouplingDistribution,
    pub profile: Profile,
}

/// Couplings of one realization, in arrangement order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
}

impl DeloneAndersonModel {
    pub fn new(
        v0: PotentialSpec,
        arrangement: DeloneArrangement,
        [c_minus, c_plus]: [f64; 2],
        [delta_minus, delta_plus]: [f64; 2],
        dist: CouplingDistribution,
        profile: Profile,
    ) -> Result<Self> {
        if !(c_minus > 0.0 && c_minus <= c_plus) {
            return Err(Error::InvalidInput(format!("need 0 < C- <= C+, got {c_minus}, {c_plus}")));
        }
        if !(delta_minus > 0.0 && delta_minus < delta_plus) {
            return Err(Error::InvalidInput(format!(
                "need 0 < delta- < delta+, got {delta_minus}, {delta_plus}"
            )));
        }
        dist.validate()?;
        if !arrangement.balls_inside_cells(delta_minus) {
            return Err(Error::GeometryViolation(format!(
                "balls of radius {delta_minus} do not fit inside their cells"
            )));
        }
        Ok(DeloneAndersonModel {
            v0,
            arrangement,
            c_minus,
            c_plus,
            delta_minus,
            delta_plus,
            dist,
            profile,
        })
    }

    fn reach(&self) -> f64 {
        match self.profile {
            Profile::IndicatorBall => self.delta_minus,
            Profile::BumpBall => self.delta_plus,
        }
    }

    /// `u(r)` for a bump centered at distance `r`.
    pub fn profile_at(&self, r: f64) -> f64 {
        match self.profile {
            Profile::IndicatorBall => {
                if r < self.delta_minus {
                    self.c_minus
                } else {
                    0.0
                }
            }
            Profile::BumpBall => {
                if r <= self.delta_minus {
                    self.c_plus
                } else if r >= self.delta_plus {
                    0.0
                } else {
                    let t = (self.delta_plus - r) / (self.delta_plus - self.delta_minus);
                    self.c_plus * t * t * (3.0 - 2.0 * t)
                }
            }
        }
    }

    pub fn couplings(&self, seed: u64, realization: u64) -> Couplings {
        Couplings {
            gamma1: (0..self.arrangement.gamma1.len() as u64)
                .map(|j| self.dist.sample(seed, realization, j))
                .collect(),
            gamma2: (0..self.arrangement.gamma2.len() as u64)
                .map(|j| self.dist.sample(seed, realization, AUX_SITE_OFFSET + j))
                .collect(),
        }
    }

    /// `Σ_j ω_j u_j` on the grid. Periodic grids wrap bumps around the torus.
    pub fn random_part(&self, grid: &Grid, omega: &Couplings) -> Result<GridFunction> {
        let centers = self
            .arrangement
            .gamma1
            .iter()
            .map(|p| &p.point)
            .zip(&omega.gamma1)
            .chain(self.arrangement.gamma2.iter().zip(&omega.gamma2));
        self.superpose(grid, centers)
    }

    /// `W = Σ_{j ∈ Γ₁} u_j`.
    pub fn single_site_sum(&self, grid: &Grid) -> Result<GridFunction> {
        self.superpose(grid, self.arrangement.gamma1.iter().map(|p| (&p.point, &1.0)))
    }

    /// Largest number of supports `B(z_j, reach)` covering one node.
    pub fn overlap_count(&self, grid: &Grid) -> Result<usize> {
        let ones = vec![1.0; self.arrangement.gamma1.len() + self.arrangement.gamma2.len()];
        let all = self.arrangement.points();
        let indicator = DeloneAndersonModel {
            profile: Profile::IndicatorBall,
            c_minus: 1.0,
            delta_minus: self.reach() + 1e-12,
            ..self.clone()
        };
        let w = indicator.superpose(grid, all.iter().zip(&ones))?;
        Ok(w.sup_norm().round() as usize)
    }

    fn superpose<'a>(&self, grid: &Grid, terms: impl Iterator<Item = (&'a Vec<f64>, &'a f64)>) -> Result<GridFunction> {
        let reach = self.reach();
        if grid.bc() == BoundaryCondition::Periodic && 2.0 * reach >= grid.bx.side {
            return Err(Error::GeometryViolation("bump support wraps onto itself".into()));
        }
        let d = grid.dim();
        let mut out = grid.zeros();
        let tol = 1e-9 * grid.h;
        for (z, &w) in terms {
            if w == 0.0 {
                continue;
            }
            let ranges: Vec<(isize, isize)> = (0..d)
                .map(|a| {
                    let base = grid.bx.lower(a);
                    let lo = ((z[a] - reach - base) / grid.h).ceil() as isize;
                    let hi = ((z[a] + reach - base) / grid.h).floor() as isize;
                    (lo, hi)
                })
                .collect();
            if ranges.iter().any(|(lo, hi)| lo > hi) {
                continue;
            }
            let mut node: Vec<isize> = ranges.iter().map(|r| r.0).collect();
            'walk: loop {
                if let Some(flat) = grid.flat_of(&node) {
                    let r = node
                        .iter()
                        .enumerate()
                        .map(|(a, &i)| {
                            let x = grid.bx.lower(a) + i as f64 * grid.h - z[a];
                            x * x
                        })
                        .sum::<f64>()
                        .sqrt();
                    let u = self.profile_at(r + tol);
                    if u != 0.0 {
                        out.values[flat] += w * u;
                    }
                }
                for a in (0..d).rev() {
                    if node[a] < ranges[a].1 {
                        node[a] += 1;
                        continue 'walk;
                    }
                    node[a] = ranges[a].0;
                }
                break;
            }
        }
        Ok(out)
    }

    /// `V₀ + V_ω` for `realization`, and the couplings used.
    pub fn sample_potential(&self, grid: &Grid, seed: u64, realization: u64) -> Result<(GridFunction, Couplings)> {
        let omega = self.couplings(seed, realization);
        let mut v = self.random_part(grid, &omega)?;
        let v0 = self.v0.sample(grid);
        v.values.iter_mut().zip(&v0.values).for_each(|(a, b)| *a += b);
        Ok((v, omega))
    }
}
