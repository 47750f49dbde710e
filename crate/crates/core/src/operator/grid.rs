use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, BoxSpec};

pub const DEFAULT_POINT_CAP: usize = 200_000;

/// Uniform grid on a box.
///
/// Nodes sit at `lo + i h`, `i = 0..=n`. Periodic grids keep `i = 0..n`
/// (node `n` is node `0`); Dirichlet grids keep the interior `i = 1..n-1`
/// and the boundary nodes carry the value zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub bx: BoxSpec,
    pub n_per_side: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(bx: BoxSpec, n_per_side: usize) -> Result<Self> {
        Self::with_cap(bx, n_per_side, DEFAULT_POINT_CAP)
    }

    pub fn with_cap(bx: BoxSpec, n_per_side: usize, cap: usize) -> Result<Self> {
        if n_per_side < 2 {
            return Err(Error::InvalidInput("need at least 2 grid intervals per side".into()));
        }
        let per = match bx.bc {
            BoundaryCondition::Periodic => n_per_side,
            BoundaryCondition::Dirichlet => n_per_side - 1,
        };
        let points = (per as u128).pow(bx.dim as u32);
        if points > cap as u128 {
            return Err(Error::GridTooLarge {
                points: points.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        Ok(Grid {
            h: bx.side / n_per_side as f64,
            bx,
            n_per_side,
        })
    }

    pub fn dim(&self) -> usize {
        self.bx.dim
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bx.bc
    }

    /// Unknowns per axis.
    pub fn per_side(&self) -> usize {
        match self.bc() {
            BoundaryCondition::Periodic => self.n_per_side,
            BoundaryCondition::Dirichlet => self.n_per_side - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.per_side().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// Offset of the first unknown in node units (0 periodic, 1 Dirichlet).
    pub fn first_node(&self) -> usize {
        match self.bc() {
            BoundaryCondition::Periodic => 0,
            BoundaryCondition::Dirichlet => 1,
        }
    }

    /// Node index `i ∈ [0, n]^d` of an unknown.
    pub fn node_of(&self, flat: usize) -> Vec<usize> {
        let m = self.per_side();
        let mut out = vec![0; self.dim()];
        let mut rest = flat;
        for a in (0..self.dim()).rev() {
            out[a] = rest % m + self.first_node();
            rest /= m;
        }
        out
    }

    /// Unknown holding node `i`, or `None` for Dirichlet boundary nodes.
    /// Periodic node indices are reduced modulo `n`.
    pub fn flat_of(&self, node: &[isize]) -> Option<usize> {
        let n = self.n_per_side as isize;
        let m = self.per_side();
        let mut flat = 0;
        for &i in node {
            let j = match self.bc() {
                BoundaryCondition::Periodic => i.rem_euclid(n) as usize,
                BoundaryCondition::Dirichlet => {
                    if i <= 0 || i >= n {
                        return None;
                    }
                    (i - 1) as usize
                }
            };
            flat = flat * m + j;
        }
        Some(flat)
    }

    pub fn node_coord(&self, node: &[usize]) -> Vec<f64> {
        node.iter()
            .enumerate()
            .map(|(a, &i)| self.bx.lower(a) + i as f64 * self.h)
            .collect()
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.node_coord(&self.node_of(flat))
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> GridFunction {
        GridFunction {
            values: (0..self.len()).map(|i| f(&self.coords(i))).collect(),
            grid: self.clone(),
        }
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction {
            grid: self.clone(),
            values: vec![0.0; self.len()],
        }
    }

    /// Grid nodes per unit length, if the box side is an integer multiple.
    pub fn nodes_per_unit(&self) -> Option<usize> {
        let p = self.n_per_side as f64 / self.bx.side;
        let r = p.round();
        ((p - r).abs() < 1e-9 && r >= 1.0).then_some(r as usize)
    }
}

/// Real function sampled at the unknowns of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Value at node `i ∈ [0, n]^d`, zero on Dirichlet boundary nodes.
    pub fn at_node(&self, node: &[isize]) -> f64 {
        self.grid.flat_of(node).map_or(0.0, |f| self.values[f])
    }

    /// `h^d Σ u v`.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        self.grid.cell_volume() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryCondition::*;

    #[test]
    fn index_round_trip() {
        for bc in [Periodic, Dirichlet] {
            let g = Grid::new(BoxSpec::centered(2, 3.0, bc).unwrap(), 6).unwrap();
            for f in 0..g.len() {
                let node: Vec<isize> = g.node_of(f).iter().map(|&i| i as isize).collect();
                assert_eq!(g.flat_of(&node), Some(f));
            }
        }
    }

    #[test]
    fn node_layout() {
        let g = Grid::new(BoxSpec::centered(1, 1.0, Dirichlet).unwrap(), 4).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.coords(0), vec![-0.25]);
        assert_eq!(g.flat_of(&[0]), None);
        assert_eq!(g.flat_of(&[4]), None);
        let g = Grid::new(BoxSpec::centered(1, 1.0, Periodic).unwrap(), 4).unwrap();
        assert_eq!(g.coords(0), vec![-0.5]);
        assert_eq!(g.flat_of(&[4]), Some(0));
        assert_eq!(g.flat_of(&[-1]), Some(3));
    }

    #[test]
    fn cap_is_enforced() {
        let bx = BoxSpec::centered(3, 1.0, Periodic).unwrap();
        assert!(matches!(Grid::new(bx, 100), Err(Error::GridTooLarge { .. })));
    }
}
