use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::hamiltonian::{CsrMatrix, DiscreteHamiltonian};
use super::skyline::{count_below, SkylineLdl};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    /// Normalized so that `h^d Σ ψ² = 1`.
    pub psi: GridFunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigMethod {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigOptions {
    /// Relative residual tolerance.
    pub tol: f64,
    pub dense_threshold: usize,
    pub method: EigMethod,
    pub max_krylov: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            tol: 1e-9,
            dense_threshold: 4000,
            method: EigMethod::Auto,
            max_krylov: 1200,
        }
    }
}

/// All eigenpairs of a dense symmetric row-major matrix, ascending, with
/// Euclidean-normalized eigenvectors (one per entry of the returned list).
pub fn symmetric_eigen(n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidInput(format!("dense eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();
    Ok((values, vectors))
}

/// Eigenvalues of a dense symmetric row-major matrix, ascending.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let mut v = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::InvalidInput(format!("dense eigensolver failed: {e:?}")))?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// The `k` lowest eigenpairs in non-decreasing order.
pub fn eigs_lowest(h: &DiscreteHamiltonian, k: usize, opts: &EigOptions) -> Result<Vec<EigenPair>> {
    let n = h.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("cannot compute {k} eigenpairs of a {n}-dimensional operator")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let dense = match opts.method {
        EigMethod::Dense => true,
        EigMethod::Lanczos => false,
        EigMethod::Auto => n <= opts.dense_threshold,
    };
    let pairs = if dense {
        let (vals, vecs) = symmetric_eigen(n, &h.matrix.to_dense())?;
        vals.into_iter().zip(vecs).take(k).collect()
    } else {
        lanczos_lowest(h, k, opts)?
    };
    let scale = h.grid.cell_volume().sqrt();
    Ok(pairs
        .into_iter()
        .map(|(lambda, mut v)| {
            fix_sign(&mut v);
            v.iter_mut().for_each(|x| *x /= scale);
            EigenPair {
                lambda,
                psi: GridFunction {
                    grid: h.grid.clone(),
                    values: v,
                },
            }
        })
        .collect())
}

/// Makes the first entry of largest modulus positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `‖Hψ − λψ‖ / (‖H‖_est + |λ|)` in the Euclidean norm of the unknowns.
pub fn relative_residual(h: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let (lo, hi) = h.gershgorin();
    let norm = lo.abs().max(hi.abs());
    let hv = h.apply(v);
    let r = hv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
    let vn = dot(v, v).sqrt();
    r / (vn * (norm + lambda.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Orthogonalizes `v` against `basis` twice and returns its remaining norm.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
    dot(v, v).sqrt()
}

const MAX_DEFLATION_ROUNDS: usize = 16;

/// Shift-invert Lanczos with full reorthogonalization.
///
/// A single Krylov space sees one vector per eigenspace, so converged pairs
/// are locked and the iteration is repeated in their orthogonal complement
/// until nothing below the current `k`-th eigenvalue appears. A final
/// Rayleigh–Ritz step on the locked vectors makes degenerate bases
/// orthonormal.
fn lanczos_lowest(h: &DiscreteHamiltonian, k: usize, opts: &EigOptions) -> Result<Vec<(f64, Vec<f64>)>> {
    let a = &h.matrix;
    let n = a.n;
    let (glo, ghi) = a.gershgorin();
    let sigma = glo - 1.0;
    let perm = h.band_ordering();
    let ldl = SkylineLdl::factor(a, &perm, sigma)
        .map_err(|_| Error::InvalidInput("shift-invert factorization broke down below the spectrum".into()))?;
    let norm = glo.abs().max(ghi.abs());
    let gap_tol = opts.tol * (norm + 1.0) * 10.0;

    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    for round in 0..MAX_DEFLATION_ROUNDS {
        let room = n - locked.len();
        if room == 0 {
            break;
        }
        let want = (k + 2).min(room);
        let basis: Vec<Vec<f64>> = locked.iter().map(|p| p.1.clone()).collect();
        let found = lanczos_run(a, &ldl, norm, &basis, want, round as u64, opts)?;
        let kth = if locked.len() >= k {
            let mut vals: Vec<f64> = locked.iter().map(|p| p.0).collect();
            vals.sort_by(f64::total_cmp);
            Some(vals[k - 1])
        } else {
            None
        };
        let lowest_new = found.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let done = matches!(kth, Some(t) if lowest_new > t + gap_tol) || found.is_empty();
        if done {
            break;
        }
        locked.extend(found);
        if round + 1 == MAX_DEFLATION_ROUNDS {
            return Err(Error::EigNotConverged {
                iterations: MAX_DEFLATION_ROUNDS,
                worst_residual: f64::NAN,
                residuals: Vec::new(),
            });
        }
    }
    if locked.len() < k {
        return Err(Error::EigNotConverged {
            iterations: MAX_DEFLATION_ROUNDS,
            worst_residual: f64::NAN,
            residuals: Vec::new(),
        });
    }
    rayleigh_ritz(a, locked, k, opts.tol)
}

/// One Lanczos run on `(A − σ)^{-1}` restricted to the complement of
/// `locked`; returns the `want` lowest converged pairs of `A` there.
fn lanczos_run(
    a: &CsrMatrix,
    ldl: &SkylineLdl,
    norm: f64,
    locked: &[Vec<f64>],
    want: usize,
    round: u64,
    opts: &EigOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = a.n;
    let room = n - locked.len();
    let mut m = (2 * want + 40).min(room);
    let cap = opts.max_krylov.min(room).max(m);
    loop {
        let mut q0: Vec<f64> = (0..n).map(|i| rng::uniform(0x5eed, round, i as u64) - 0.5).collect();
        let nrm = orthogonalize(&mut q0, locked);
        q0.iter_mut().for_each(|x| *x /= nrm);
        let mut basis: Vec<Vec<f64>> = vec![q0];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            let mut w = ldl.solve(&basis[j]);
            let aj = dot(&w, &basis[j]);
            alpha.push(aj);
            // locked directions last, so leaks carried by the Krylov basis
            // are not amplified by the division below
            orthogonalize(&mut w, &basis);
            let b = orthogonalize(&mut w, locked);
            if j + 1 == m || b < 1e-12 * aj.abs().max(1e-300) {
                break;
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        let mk = alpha.len();
        let mut t = vec![0.0; mk * mk];
        for i in 0..mk {
            t[i * mk + i] = alpha[i];
            if i + 1 < mk {
                t[i * mk + i + 1] = beta[i];
                t[(i + 1) * mk + i] = beta[i];
            }
        }
        let (theta, s) = symmetric_eigen(mk, &t)?;
        // largest θ ↔ lowest λ = σ + 1/θ
        let take = want.min(mk);
        let mut out = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        for idx in (0..mk).rev().take(take) {
            if theta[idx] <= 0.0 {
                break;
            }
            let mut y = vec![0.0; n];
            for (c, q) in s[idx].iter().zip(&basis) {
                axpy(*c, q, &mut y);
            }
            let yn = dot(&y, &y).sqrt();
            y.iter_mut().for_each(|x| *x /= yn);
            let hy = a.apply(&y);
            let lambda = dot(&y, &hy);
            let r = hy.iter().zip(&y).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt();
            let rel = r / (norm + lambda.abs());
            residuals.push(rel);
            out.push((lambda, y, rel));
        }
        let converged = out.len() == take && out.iter().all(|p| p.2 <= opts.tol);
        if converged {
            return Ok(out.into_iter().map(|(l, y, _)| (l, y)).collect());
        }
        if m >= cap {
            let worst = residuals.iter().copied().fold(0.0, f64::max);
            return Err(Error::EigNotConverged {
                iterations: m,
                worst_residual: worst,
                residuals,
            });
        }
        m = (2 * m).min(cap);
    }
}

fn rayleigh_ritz(a: &CsrMatrix, pairs: Vec<(f64, Vec<f64>)>, k: usize, tol: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let vs: Vec<Vec<f64>> = pairs.into_iter().map(|p| p.1).collect();
    let p = vs.len();
    let avs: Vec<Vec<f64>> = vs.iter().map(|v| a.apply(v)).collect();
    let mut g = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            g[i * p + j] = 0.5 * (dot(&vs[i], &avs[j]) + dot(&vs[j], &avs[i]));
        }
    }
    let (vals, coef) = symmetric_eigen(p, &g)?;
    let n = a.n;
    let mut out = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (lambda, c) in vals.into_iter().zip(coef).take(k) {
        let mut y = vec![0.0; n];
        for (ci, v) in c.iter().zip(&vs) {
            axpy(*ci, v, &mut y);
        }
        let yn = dot(&y, &y).sqrt();
        y.iter_mut().for_each(|x| *x /= yn);
        residuals.push(relative_residual(a, lambda, &y));
        out.push((lambda, y));
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > 10.0 * tol {
        return Err(Error::EigNotConverged {
            iterations: 0,
            worst_residual: worst,
            residuals,
        });
    }
    Ok(out)
}

/// Number of eigenvalues in `[a, b]` by Sylvester inertia.
pub fn count_in_interval(h: &DiscreteHamiltonian, a: f64, b: f64) -> Result<usize> {
    if !(a <= b) {
        return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
    }
    let perm = h.band_ordering();
    Ok(count_in_interval_with(&h.matrix, &perm, a, b))
}

/// Inertia count with a precomputed ordering (hot loop of the Monte Carlo).
pub fn count_in_interval_with(m: &CsrMatrix, perm: &[usize], a: f64, b: f64) -> usize {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        return m.n;
    }
    let upper = if b == f64::INFINITY { m.n } else { count_below(m, perm, b, true) };
    let lower = if a == f64::NEG_INFINITY { 0 } else { count_below(m, perm, a, false) };
    upper.saturating_sub(lower)
}

/// Eigenvalue count in `[a, b]` from a dense spectrum.
pub fn count_in_interval_dense(h: &DiscreteHamiltonian, a: f64, b: f64) -> Result<usize> {
    let vals = symmetric_eigenvalues(h.dim(), &h.matrix.to_dense())?;
    Ok(vals.iter().filter(|&&x| x >= a && x <= b).count())
}
