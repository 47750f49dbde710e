use rayon::prelude::*;

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(col, value)` lists, merging duplicates.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if col.len() > *row_ptr.last().unwrap() && *col.last().unwrap() == c {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(c);
                    val.push(v);
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`; rows are independent so the result does not depend on
    /// the thread count.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(4096).enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        });
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        (0..self.n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let (mut diag, mut off) = (0.0, 0.0);
            for (j, v) in self.row(i) {
                if j == i {
                    diag += v;
                } else {
                    off += v.abs();
                }
            }
            (lo.min(diag - off), hi.max(diag + off))
        })
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i * self.n + j] += v;
            }
        }
        out
    }

    /// Copy with `diag` added to the diagonal.
    pub fn add_diagonal(&self, diag: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for (i, &d) in diag.iter().enumerate() {
            let pos = (out.row_ptr[i]..out.row_ptr[i + 1])
                .find(|&p| out.col[p] == i)
                .expect("stencil has a diagonal entry");
            out.val[pos] += d;
        }
        out
    }
}

/// Finite-difference Schrödinger operator `−Δ_h + V` on a grid.
#[derive(Clone, Debug)]
pub struct DiscreteHamiltonian {
    pub grid: Grid,
    pub potential: GridFunction,
    pub matrix: CsrMatrix,
}

/// Assembles the `2d+1`-point stencil with the grid's boundary condition.
pub fn build_hamiltonian(grid: &Grid, v: &GridFunction) -> Result<DiscreteHamiltonian> {
    if v.grid != *grid {
        return Err(Error::InvalidInput("potential lives on a different grid".into()));
    }
    if let Some(i) = v.values.iter().position(|x| !x.is_finite()) {
        return Err(Error::BadPotential(i));
    }
    let d = grid.dim();
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let rows: Vec<Vec<(usize, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let node: Vec<isize> = grid.node_of(i).iter().map(|&k| k as isize).collect();
            let mut row = Vec::with_capacity(2 * d + 1);
            row.push((i, 2.0 * d as f64 * inv_h2 + v.values[i]));
            let mut nb = node.clone();
            for a in 0..d {
                for step in [-1isize, 1] {
                    nb[a] = node[a] + step;
                    if let Some(j) = grid.flat_of(&nb) {
                        row.push((j, -inv_h2));
                    }
                }
                nb[a] = node[a];
            }
            row
        })
        .collect();
    Ok(DiscreteHamiltonian {
        grid: grid.clone(),
        potential: v.clone(),
        matrix: CsrMatrix::from_rows(rows),
    })
}

impl DiscreteHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.n
    }

    /// `H + t W` for a potential `W` on the same grid.
    pub fn with_added_potential(&self, w: &GridFunction, t: f64) -> Result<DiscreteHamiltonian> {
        if w.grid != self.grid {
            return Err(Error::InvalidInput("potential lives on a different grid".into()));
        }
        let scaled: Vec<f64> = w.values.iter().map(|x| t * x).collect();
        if let Some(i) = scaled.iter().position(|x| !x.is_finite()) {
            return Err(Error::BadPotential(i));
        }
        let mut potential = self.potential.clone();
        potential.values.iter_mut().zip(&scaled).for_each(|(p, s)| *p += s);
        Ok(DiscreteHamiltonian {
            grid: self.grid.clone(),
            matrix: self.matrix.add_diagonal(&scaled),
            potential,
        })
    }

    /// Bandwidth-reducing ordering: along each axis, periodic indices are
    /// interleaved from both ends (`0, n-1, 1, n-2, …`) so wraparound
    /// neighbors stay close. Returns `perm[new] = old`.
    pub fn band_ordering(&self) -> Vec<usize> {
        let m = self.grid.per_side();
        let d = self.grid.dim();
        let axis: Vec<usize> = match self.grid.bc() {
            crate::geometry::BoundaryCondition::Dirichlet => (0..m).collect(),
            crate::geometry::BoundaryCondition::Periodic => {
                (0..m).map(|p| if p % 2 == 0 { p / 2 } else { m - 1 - p / 2 }).collect()
            }
        };
        (0..self.dim())
            .map(|new| {
                let mut rest = new;
                let mut pos = vec![0; d];
                for a in (0..d).rev() {
                    pos[a] = axis[rest % m];
                    rest /= m;
                }
                pos.iter().fold(0, |acc, &p| acc * m + p)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryCondition, BoxSpec};

    #[test]
    fn stencil_rows() {
        let g = Grid::new(BoxSpec::centered(1, 1.0, BoundaryCondition::Periodic).unwrap(), 4).unwrap();
        let h = build_hamiltonian(&g, &g.zeros()).unwrap();
        assert_eq!(h.matrix.get(0, 3), -16.0);
        assert_eq!(h.matrix.get(0, 0), 32.0);
        let g = Grid::new(BoxSpec::centered(1, 1.0, BoundaryCondition::Dirichlet).unwrap(), 4).unwrap();
        let h = build_hamiltonian(&g, &g.zeros()).unwrap();
        assert_eq!(h.matrix.get(0, 2), 0.0);
        assert_eq!(h.matrix.row(0).count(), 2);
    }

    #[test]
    fn bad_potential() {
        let g = Grid::new(BoxSpec::centered(1, 1.0, BoundaryCondition::Periodic).unwrap(), 4).unwrap();
        let mut v = g.zeros();
        v.values[2] = f64::NAN;
        assert!(matches!(build_hamiltonian(&g, &v), Err(Error::BadPotential(2))));
    }

    #[test]
    fn ordering_is_a_permutation() {
        let g = Grid::new(BoxSpec::centered(2, 5.0, BoundaryCondition::Periodic).unwrap(), 10).unwrap();
        let h = build_hamiltonian(&g, &g.zeros()).unwrap();
        let mut p = h.band_ordering();
        p.sort_unstable();
        assert_eq!(p, (0..g.len()).collect::<Vec<_>>());
    }
}
