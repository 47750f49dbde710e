//! Envelope (skyline) `LDLᵀ` factorization without pivoting.
//!
//! Used both as the shift-invert solver of the Lanczos iteration (shift below
//! the spectrum, so the matrix is positive definite) and for Sylvester
//! inertia counts at arbitrary shifts. For tridiagonal matrices the pivots are
//! the Sturm sequence.

use super::hamiltonian::CsrMatrix;

#[derive(Debug)]
pub struct ZeroPivot;

pub struct SkylineLdl {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineLdl {
    /// Factors `P (A − σI) Pᵀ`.
    pub fn factor(a: &CsrMatrix, perm: &[usize], shift: f64) -> Result<Self, ZeroPivot> {
        let n = a.n;
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first = vec![0; n];
        let mut start = vec![0; n + 1];
        for i in 0..n {
            let f = a.row(perm[i]).map(|(j, _)| iperm[j]).filter(|&j| j < i).min().unwrap_or(i);
            first[i] = f;
            start[i + 1] = start[i] + (i - f);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let j = iperm[j];
                if j < i {
                    lower[start[i] + j - first[i]] += v;
                } else if j == i {
                    diag[i] += v - shift;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = lower.split_at_mut(start[i]);
            let row = &mut rest[..i - fi];
            // row holds g_ij = L_ij D_j while j sweeps the envelope
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                if k0 < j {
                    let lj = &done[start[j] + k0 - fj..start[j] + j - fj];
                    let gi = &row[k0 - fi..j - fi];
                    let s: f64 = gi.iter().zip(lj).map(|(g, l)| g * l).sum();
                    row[j - fi] -= s;
                }
            }
            let mut di = diag[i];
            for j in fi..i {
                let g = row[j - fi];
                let l = g / diag[j];
                row[j - fi] = l;
                di -= g * l;
            }
            if di == 0.0 || !di.is_finite() {
                return Err(ZeroPivot);
            }
            diag[i] = di;
        }
        Ok(SkylineLdl {
            n,
            perm: perm.to_vec(),
            first,
            start,
            lower,
            diag,
        })
    }

    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    /// Solves `(A − σI) x = b` in the original ordering.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let l = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = l.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = y[i];
            let l = &self.lower[self.start[i]..self.start[i + 1]];
            for (yj, lij) in y[fi..i].iter_mut().zip(l) {
                *yj -= lij * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

const NUDGE: f64 = 1e-12;

/// Number of eigenvalues strictly below `x` (`upward = false`) or at most `x`
/// (`upward = true`). A zero pivot moves the shift by a relative `1e-12` in
/// the direction that keeps the requested inequality.
pub fn count_below(a: &CsrMatrix, perm: &[usize], x: f64, upward: bool) -> usize {
    let mut shift = x;
    for _ in 0..8 {
        match SkylineLdl::factor(a, perm, shift) {
            Ok(f) => return f.negative_pivots(),
            Err(ZeroPivot) => {
                let step = NUDGE * shift.abs().max(1.0);
                shift += if upward { step } else { -step };
            }
        }
    }
    unreachable!("eight consecutive zero pivots")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        CsrMatrix::from_rows(
            (0..n)
                .map(|i| {
                    let mut r = vec![(i, 2.0)];
                    if i > 0 {
                        r.push((i - 1, -1.0));
                    }
                    if i + 1 < n {
                        r.push((i + 1, -1.0));
                    }
                    r
                })
                .collect(),
        )
    }

    #[test]
    fn solve_recovers_vector() {
        let a = tridiag(20);
        let perm: Vec<usize> = (0..20).rev().collect();
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let b = a.apply(&x);
        let f = SkylineLdl::factor(&a, &perm, 0.0).unwrap();
        let y = f.solve(&b);
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-10));
    }

    #[test]
    fn sturm_counts() {
        let n = 30;
        let a = tridiag(n);
        let perm: Vec<usize> = (0..n).collect();
        let eig: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
            .collect();
        for x in [-1.0, 0.5, 1.0, 2.0, 3.9, 5.0] {
            let want = eig.iter().filter(|&&e| e < x).count();
            assert_eq!(count_below(&a, &perm, x, false), want);
        }
        // exact eigenvalue 2 (middle of an odd-sized spectrum)
        let a = tridiag(3);
        let perm = vec![0, 1, 2];
        assert_eq!(count_below(&a, &perm, 2.0, true), 2);
        assert_eq!(count_below(&a, &perm, 2.0, false), 1);
    }
}
