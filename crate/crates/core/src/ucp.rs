//! Unique continuation measurements on eigenfunctions.
//!
//! Coordinates inside the extension machinery are node indices relative to
//! the lower corner of the box; user-facing coordinates stay centered.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{self, CarlemanConfig, SUBDIVISION, T_DOMINATING, T_LOCAL};
use crate::error::{Error, Result};
use crate::geometry::{
    ceil_sqrt, generate_delone, lattice_sites, BoundaryCondition, BoxSpec, DeloneArrangement, DeloneParams,
    SiteIndex,
};
use crate::operator::{
    build_hamiltonian, eigs_lowest, gradient_mass, mass, EigOptions, Grid, GridFunction, PotentialSpec, Region,
};

/// Periodic or antisymmetric extension of a grid function, stored on the
/// torus of `period` nodes per axis with node 0 at the lower box corner.
#[derive(Clone, Debug)]
pub struct Extension {
    pub bc: BoundaryCondition,
    pub dim: usize,
    pub period: usize,
    pub h: f64,
    pub origin: Vec<f64>,
    pub values: Vec<f64>,
}

impl Extension {
    fn flat(&self, node: &[i64]) -> usize {
        let p = self.period as i64;
        node.iter().fold(0usize, |acc, &i| acc * self.period + i.rem_euclid(p) as usize)
    }

    pub fn value(&self, node: &[i64]) -> f64 {
        self.values[self.flat(node)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.h.powi(self.dim as i32) * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Mass over the node cube `lo + [0, width)^d`, counted with multiplicity
    /// when the cube wraps around the torus more than once.
    pub fn box_mass(&self, lo: &[i64], width: usize) -> f64 {
        let p = self.period as i64;
        let w = width as i64;
        let counts: Vec<Vec<f64>> = lo
            .iter()
            .map(|&l| {
                (0..p)
                    .map(|j| {
                        let hi = (l + w - 1 - j).div_euclid(p);
                        let lo_t = -((j - l).div_euclid(p));
                        (hi - lo_t + 1).max(0) as f64
                    })
                    .collect()
            })
            .collect();
        let mut acc = 0.0;
        let mut weights = vec![1.0; self.dim + 1];
        let mut node = vec![0usize; self.dim];
        for (flat, v) in self.values.iter().enumerate() {
            let mut rest = flat;
            for a in (0..self.dim).rev() {
                node[a] = rest % self.period;
                rest /= self.period;
            }
            for a in 0..self.dim {
                weights[a + 1] = weights[a] * counts[a][node[a]];
            }
            let wgt = weights[self.dim];
            if wgt != 0.0 {
                acc += wgt * v * v;
            }
        }
        acc * self.h.powi(self.dim as i32)
    }
}

/// Periodic extension (same data, torus indexing) or, for Dirichlet grids,
/// the odd reflection across every face onto the `2L` torus.
pub fn extend_function(psi: &GridFunction) -> Result<Extension> {
    let g = &psi.grid;
    let d = g.dim();
    let n = g.n_per_side;
    let origin: Vec<f64> = (0..d).map(|a| g.bx.lower(a)).collect();
    match g.bc() {
        BoundaryCondition::Periodic => Ok(Extension {
            bc: g.bc(),
            dim: d,
            period: n,
            h: g.h,
            origin,
            values: psi.values.clone(),
        }),
        BoundaryCondition::Dirichlet => {
            let period = 2 * n;
            let total = period.pow(d as u32);
            let mut values = vec![0.0; total];
            let mut node = vec![0usize; d];
            let mut src = vec![0isize; d];
            for (flat, out) in values.iter_mut().enumerate() {
                let mut rest = flat;
                for a in (0..d).rev() {
                    node[a] = rest % period;
                    rest /= period;
                }
                let mut sign = 1.0;
                let mut zero = false;
                for a in 0..d {
                    let j = node[a];
                    if j == 0 || j == n {
                        zero = true;
                        break;
                    }
                    if j < n {
                        src[a] = j as isize;
                    } else {
                        src[a] = (period - j) as isize;
                        sign = -sign;
                    }
                }
                if !zero {
                    *out = sign * psi.at_node(&src);
                }
            }
            Ok(Extension {
                bc: g.bc(),
                dim: d,
                period,
                h: g.h,
                origin,
                values,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteLabel {
    Dominating,
    Weak,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classification {
    pub t: usize,
    pub bc: BoundaryCondition,
    pub sites: Vec<SiteIndex>,
    pub labels: Vec<SiteLabel>,
    /// `∫_{Λ₁(k)} |ψ|²`.
    pub cell_mass: Vec<f64>,
    /// `∫_{Λ_T(k)}` of the extension.
    pub box_mass: Vec<f64>,
    pub total_mass: f64,
    pub weak_fraction: f64,
    pub dominating_fraction: f64,
    /// Relative defect of `Σ_k ∫_{Λ_T(k)} |ψ̃|² = T^d ∫_{Λ_L} |ψ|²` (periodic only).
    pub cover_residual: Option<f64>,
}

impl Classification {
    pub fn dominating_sites(&self) -> impl Iterator<Item = &SiteIndex> {
        self.sites.iter().zip(&self.labels).filter(|(_, l)| **l == SiteLabel::Dominating).map(|(s, _)| s)
    }

    pub fn weak_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == SiteLabel::Weak).count()
    }
}

/// Node offset of the lower corner of the cube of side `side` centered at
/// site `k`, in units of grid nodes from the box corner.
fn cube_corner(grid: &Grid, k: &SiteIndex, side: usize, p: usize) -> Result<Vec<i64>> {
    let l = grid.bx.side;
    k.0.iter()
        .enumerate()
        .map(|(a, &ka)| {
            // (2(k − c) + L − side) p / 2 nodes
            let twice = (2.0 * (ka as f64 - grid.bx.center[a]) + l - side as f64) * p as f64;
            let r = twice.round();
            if (twice - r).abs() > 1e-9 || (r as i64) % 2 != 0 {
                return Err(Error::GridAlignment(format!(
                    "cube of side {side} around {:?} does not start on a grid node ({p} nodes per unit)",
                    k.0
                )));
            }
            Ok(r as i64 / 2)
        })
        .collect()
}

fn nodes_per_unit(grid: &Grid) -> Result<usize> {
    grid.nodes_per_unit().ok_or_else(|| {
        Error::GridAlignment(format!(
            "{} intervals per side is not a multiple of the box side {}",
            grid.n_per_side, grid.bx.side
        ))
    })
}

/// Fraction of the `T`-box mass a unit cell must carry to be dominating.
pub fn dominating_threshold(bc: BoundaryCondition, t: usize, d: usize) -> f64 {
    match bc {
        BoundaryCondition::Periodic => 0.5 / (t as f64).powi(d as i32),
        BoundaryCondition::Dirichlet => 0.5 / (2.0 * t as f64).powi(d as i32),
    }
}

/// Labels every unit cell of `Λ_L` as dominating or weak.
///
/// Periodic: `∫_{Λ₁(k)} |ψ|² ≥ ∫_{Λ_T(k)} |ψ̃|² / (2T^d)`. Dirichlet: the
/// antisymmetric extension is used and the threshold is `1/(2(2T)^d)`.
pub fn classify_sites(psi: &GridFunction, t: usize) -> Result<Classification> {
    let g = &psi.grid;
    let p = nodes_per_unit(g)?;
    let sites = lattice_sites(&g.bx, 1)?;
    let ext = extend_function(psi)?;
    let d = g.dim() as i32;
    let threshold = dominating_threshold(g.bc(), t, g.dim());
    let masses: Vec<(f64, f64)> = sites
        .iter()
        .map(|k| {
            let cell = ext.box_mass(&cube_corner(g, k, 1, p)?, p);
            let tbox = ext.box_mass(&cube_corner(g, k, t, p)?, t * p);
            Ok((cell, tbox))
        })
        .collect::<Result<_>>()?;
    let total = psi.norm_sq();
    let labels: Vec<SiteLabel> = masses
        .iter()
        .map(|&(c, b)| if c >= threshold * b { SiteLabel::Dominating } else { SiteLabel::Weak })
        .collect();
    let weak: f64 = masses.iter().zip(&labels).filter(|(_, l)| **l == SiteLabel::Weak).map(|(m, _)| m.0).sum();
    let dominating: f64 =
        masses.iter().zip(&labels).filter(|(_, l)| **l == SiteLabel::Dominating).map(|(m, _)| m.0).sum();
    let cover_residual = (g.bc() == BoundaryCondition::Periodic).then(|| {
        let lhs: f64 = masses.iter().map(|m| m.1).sum();
        let rhs = (t as f64).powi(d) * total;
        (lhs - rhs).abs() / rhs
    });
    Ok(Classification {
        t,
        bc: g.bc(),
        sites,
        labels,
        cell_mass: masses.iter().map(|m| m.0).collect(),
        box_mass: masses.iter().map(|m| m.1).collect(),
        total_mass: total,
        weak_fraction: weak / total,
        dominating_fraction: dominating / total,
        cover_residual,
    })
}

/// `T = 62⌈√d⌉`.
pub fn default_t(d: usize) -> usize {
    T_DOMINATING * ceil_sqrt(d)
}

/// `Σ_{k ∈ Γ₁} ∫_{B(z_k, δ)} |ψ|² / ∫_{Λ_L} |ψ|²` over the lattice points of
/// the arrangement lying in the box.
pub fn mass_ratio(psi: &GridFunction, arrangement: &DeloneArrangement) -> Result<f64> {
    let g = &psi.grid;
    let delta = arrangement.delta;
    if delta < 2.0 * g.h - 1e-12 {
        return Err(Error::UnderResolvedBall { delta, h: g.h });
    }
    let total = psi.norm_sq();
    let inside: f64 = arrangement
        .gamma1
        .iter()
        .filter(|lp| g.bx.contains(&lp.point))
        .map(|lp| {
            mass(
                psi,
                &Region::Ball {
                    center: lp.point.clone(),
                    radius: delta,
                },
            )
        })
        .sum();
    Ok(inside / total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrangementSpec {
    /// Ball centers at the lattice sites.
    Lattice,
    /// One perturbed point per unit cell, drawn by the Delone generator.
    Random {
        m_tilde: f64,
        perturbation: f64,
        seed: u64,
        /// Extra points beyond one per cell.
        #[serde(default)]
        n_extra: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UcpRunSpec {
    pub d: usize,
    pub l_list: Vec<usize>,
    pub bc: BoundaryCondition,
    /// Grid intervals per unit length; `n_per_side = nodes_per_unit · L`.
    pub nodes_per_unit: usize,
    pub n_eigs: usize,
    pub delta: f64,
    pub v0: PotentialSpec,
    pub arrangement: ArrangementSpec,
    /// Box side for the dominating test, defaults to `62⌈√d⌉`.
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub eig: EigOptions,
    #[serde(default)]
    pub config: CarlemanConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UcpReport {
    pub l: usize,
    pub bc: BoundaryCondition,
    pub eig_idx: usize,
    pub lambda: f64,
    pub k_v: f64,
    pub ratio: f64,
    pub weak_frac: f64,
    pub dominating_frac: f64,
    pub cover_residual: Option<f64>,
    pub weak_count: usize,
    pub ln_c_sfuc: f64,
    pub t: usize,
    pub delta: f64,
    pub seed: u64,
}

impl UcpReport {
    pub const CSV_HEADER: &'static str =
        "L,bc,eig_idx,lambda,K_V,ratio,weak_frac,c_sfuc_analytic,T,delta,seed,ln_c_sfuc_analytic,dominating_frac,weak_count,cover_residual";

    pub fn csv_row(&self) -> String {
        let f = |v: f64| format!("{v:.16e}");
        [
            self.l.to_string(),
            self.bc.to_string(),
            self.eig_idx.to_string(),
            f(self.lambda),
            f(self.k_v),
            f(self.ratio),
            f(self.weak_frac),
            f(self.ln_c_sfuc.exp()),
            self.t.to_string(),
            f(self.delta),
            self.seed.to_string(),
            f(self.ln_c_sfuc),
            f(self.dominating_frac),
            self.weak_count.to_string(),
            self.cover_residual.map(f).unwrap_or_default(),
        ]
        .join(",")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UcpSizeSummary {
    pub l: usize,
    pub min_ratio: f64,
    pub max_weak_frac: f64,
    pub max_cover_residual: Option<f64>,
    pub weak_cells_total: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UcpSummary {
    pub per_l: Vec<UcpSizeSummary>,
    /// Least-squares slope of `ln min_ratio` against `L`.
    pub slope: f64,
    pub reports: Vec<UcpReport>,
    /// Eigenfunctions kept per size, for downstream experiments.
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<GridFunction>>,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

impl ArrangementSpec {
    /// Arrangement on the unit lattice of `window` with ball radius `delta`.
    pub fn build(&self, window: &BoxSpec, delta: f64) -> Result<DeloneArrangement> {
        match self {
            ArrangementSpec::Lattice => DeloneArrangement::lattice(window, 1, 0.5, delta),
            ArrangementSpec::Random {
                m_tilde,
                perturbation,
                seed,
                n_extra,
            } => generate_delone(
                &DeloneParams {
                    d: window.dim,
                    m_tilde: *m_tilde,
                    m: 1,
                    delta,
                    perturbation: *perturbation,
                    n_extra: *n_extra,
                },
                window,
                *seed,
            ),
        }
    }
}

/// Ratio, classification and analytic floor for the lowest eigenfunctions
/// on each box size. Sizes run in parallel; results keep the input order.
pub fn verify_ucp(spec: &UcpRunSpec) -> Result<UcpSummary> {
    if spec.l_list.iter().any(|l| l % 2 == 0) {
        return Err(Error::InvalidInput("box sides must be odd".into()));
    }
    let t = spec.t.unwrap_or_else(|| default_t(spec.d));
    let per_size: Vec<(Vec<UcpReport>, Vec<GridFunction>)> = spec
        .l_list
        .par_iter()
        .map(|&l| verify_one(spec, l, t))
        .collect::<Result<_>>()?;
    let mut per_l = Vec::new();
    let mut reports = Vec::new();
    let mut eigenfunctions = Vec::new();
    for ((rows, efs), &l) in per_size.into_iter().zip(&spec.l_list) {
        per_l.push(UcpSizeSummary {
            l,
            min_ratio: rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
            max_weak_frac: rows.iter().map(|r| r.weak_frac).fold(0.0, f64::max),
            max_cover_residual: rows.iter().filter_map(|r| r.cover_residual).reduce(f64::max),
            weak_cells_total: rows.iter().map(|r| r.weak_count).sum(),
        });
        reports.extend(rows);
        eigenfunctions.push(efs);
    }
    let xs: Vec<f64> = per_l.iter().map(|s| s.l as f64).collect();
    let ys: Vec<f64> = per_l.iter().map(|s| s.min_ratio.ln()).collect();
    Ok(UcpSummary {
        slope: ls_slope(&xs, &ys),
        per_l,
        reports,
        eigenfunctions,
    })
}

fn verify_one(spec: &UcpRunSpec, l: usize, t: usize) -> Result<(Vec<UcpReport>, Vec<GridFunction>)> {
    let bx = BoxSpec::centered(spec.d, l as f64, spec.bc)?;
    let grid = Grid::new(bx.clone(), spec.nodes_per_unit * l)?;
    let v0 = spec.v0.sample(&grid);
    let h = build_hamiltonian(&grid, &v0)?;
    let pairs = eigs_lowest(&h, spec.n_eigs, &spec.eig)?;
    let arrangement = spec.arrangement.build(&bx, spec.delta)?;
    let rows: Vec<UcpReport> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, pair)| {
            let cls = classify_sites(&pair.psi, t)?;
            let ratio = mass_ratio(&pair.psi, &arrangement)?;
            let k_v = v0.values.iter().map(|v| (v - pair.lambda).abs()).fold(0.0, f64::max);
            let sf = constants::c_sfuc(spec.d, k_v, spec.delta, spec.bc, spec.config.c_dim, None)?;
            Ok(UcpReport {
                l,
                bc: spec.bc,
                eig_idx: idx,
                lambda: pair.lambda,
                k_v,
                ratio,
                weak_frac: cls.weak_fraction,
                dominating_frac: cls.dominating_fraction,
                cover_residual: cls.cover_residual,
                weak_count: cls.weak_count(),
                ln_c_sfuc: sf.ln_composed,
                t,
                delta: spec.delta,
                seed: spec.seed,
            })
        })
        .collect::<Result<_>>()?;
    Ok((rows, pairs.into_iter().map(|p| p.psi).collect()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacciopoliReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    /// Fraction of region nodes with `|Δ_h ψ| ≤ 1.05 |Vψ| + 10 h² ‖ψ‖∞`.
    pub pde_fraction: f64,
}

/// Gradient mass on `B(c) \ B(a)` against `(1 + 9/b² + ‖V‖∞²)` times the
/// mass on `B(c+b) \ B(a−b)` (when `0 < b < a`) or on `B(c+b)`.
///
/// `v` is the effective potential, `V − λ` for an eigenfunction, so that
/// `Δψ = Vψ` holds up to discretization.
pub fn cacciopoli_check(
    psi: &GridFunction,
    v: &GridFunction,
    center: &[f64],
    a: f64,
    b: f64,
    c: f64,
    slack: f64,
) -> Result<CacciopoliReport> {
    let g = &psi.grid;
    if !(a >= 0.0 && a < c && b > 0.0) {
        return Err(Error::InvalidInput("need 0 <= a < c and b > 0".into()));
    }
    let outer = c + b;
    for (ax, &x) in center.iter().enumerate() {
        if x - outer < g.bx.lower(ax) || x + outer > g.bx.upper(ax) {
            return Err(Error::GeometryViolation(format!(
                "ball of radius {outer} around {center:?} leaves the box"
            )));
        }
    }
    let annulus = |inner: f64, outer: f64| Region::Annulus {
        center: center.to_vec(),
        inner,
        outer,
    };
    let lhs = gradient_mass(psi, &annulus(a, c));
    let enlarged = if a > 0.0 && b < a { annulus(a - b, outer) } else { annulus(0.0, outer) };
    let nodes = crate::operator::nodes_in_box(
        g,
        &center.iter().map(|x| x - outer).collect::<Vec<_>>(),
        &center.iter().map(|x| x + outer).collect::<Vec<_>>(),
    );
    let nodes: Vec<usize> = nodes.into_iter().filter(|&i| enlarged.contains(&g.coords(i), g.h)).collect();
    let v_sup = nodes.iter().map(|&i| v.values[i].abs()).fold(0.0, f64::max);
    let rhs = (1.0 + 9.0 / (b * b) + v_sup * v_sup) * mass(psi, &enlarged);

    let sup = psi.sup_norm();
    let inv_h2 = 1.0 / (g.h * g.h);
    let satisfied = nodes
        .iter()
        .filter(|&&i| {
            let node: Vec<isize> = g.node_of(i).iter().map(|&k| k as isize).collect();
            let mut lap = -2.0 * g.dim() as f64 * psi.values[i];
            let mut nb = node.clone();
            for ax in 0..g.dim() {
                for s in [-1, 1] {
                    nb[ax] = node[ax] + s;
                    lap += psi.at_node(&nb);
                }
                nb[ax] = node[ax];
            }
            (lap * inv_h2).abs() <= 1.05 * (v.values[i] * psi.values[i]).abs() + 10.0 * g.h * g.h * sup
        })
        .count();
    Ok(CacciopoliReport {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + slack),
        pde_fraction: if nodes.is_empty() { 1.0 } else { satisfied as f64 / nodes.len() as f64 },
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalFluctuationReport {
    pub site: SiteIndex,
    pub t: usize,
    pub cell_mass: f64,
    /// Lexicographic index of the heaviest sub-box.
    pub max_subbox: Vec<usize>,
    pub max_subbox_mass: f64,
    /// `cell_mass / (10⌈√d⌉)^d`.
    pub pigeonhole_bound: f64,
    pub pigeonhole_ok: bool,
    pub min_ratio: f64,
    pub argmin_center: Vec<f64>,
    pub ln_c_lf: f64,
}

/// Heaviest `1/(10⌈√d⌉)` sub-box of a dominating cell and the smallest
/// relative mass of a `δ`-ball inside the cell, with the analytic constant.
/// The site must be dominating for `T = 30⌈√d⌉`.
pub fn local_fluctuation_experiment(
    psi: &GridFunction,
    site: &SiteIndex,
    delta: f64,
    config: &CarlemanConfig,
) -> Result<LocalFluctuationReport> {
    if delta > constants::DELTA_LOCAL_MAX {
        return Err(Error::DeltaTooLarge(delta));
    }
    let g = &psi.grid;
    if delta < 2.0 * g.h - 1e-12 {
        return Err(Error::UnderResolvedBall { delta, h: g.h });
    }
    let d = g.dim();
    let s = ceil_sqrt(d);
    let t = T_LOCAL * s;
    let p = nodes_per_unit(g)?;
    let parts = SUBDIVISION * s;
    if p % parts != 0 {
        return Err(Error::GridAlignment(format!(
            "{p} nodes per unit cannot be split into {parts} sub-boxes"
        )));
    }
    let ext = extend_function(psi)?;
    let corner = cube_corner(g, site, 1, p)?;
    let tbox = ext.box_mass(&cube_corner(g, site, t, p)?, t * p);
    let cell_mass = ext.box_mass(&corner, p);
    if cell_mass < dominating_threshold(g.bc(), t, d) * tbox {
        return Err(Error::InvalidInput(format!("site {:?} is not dominating", site.0)));
    }

    let sub = p / parts;
    let mut best = (vec![0usize; d], f64::NEG_INFINITY);
    let mut idx = vec![0usize; d];
    for lin in 0..parts.pow(d as u32) {
        let mut rest = lin;
        for a in (0..d).rev() {
            idx[a] = rest % parts;
            rest /= parts;
        }
        let lo: Vec<i64> = corner.iter().zip(&idx).map(|(c, i)| c + (i * sub) as i64).collect();
        let m = ext.box_mass(&lo, sub);
        if m > best.1 {
            best = (idx.clone(), m);
        }
    }
    let pigeonhole_bound = cell_mass / (parts as f64).powi(d as i32);

    // ball centers on grid nodes with B(x, δ) ⊂ Λ₁(k)
    let lo: Vec<f64> = site.0.iter().map(|&k| k as f64 - 0.5 + delta).collect();
    let hi: Vec<f64> = site.0.iter().map(|&k| k as f64 + 0.5 - delta).collect();
    let centers = crate::operator::nodes_in_box(g, &lo, &hi);
    let mut min = (f64::INFINITY, Vec::new());
    for i in centers {
        let x = g.coords(i);
        let m = mass(psi, &Region::Ball { center: x.clone(), radius: delta });
        let r = m / cell_mass;
        if r < min.0 {
            min = (r, x);
        }
    }
    let lf = constants::c_lf(d, 0.0, delta.min(constants::DELTA_LOCAL_MAX), g.bc(), config)?;
    Ok(LocalFluctuationReport {
        site: site.clone(),
        t,
        cell_mass,
        max_subbox: best.0,
        max_subbox_mass: best.1,
        pigeonhole_bound,
        pigeonhole_ok: best.1 >= pigeonhole_bound * (1.0 - 1e-12),
        min_ratio: min.0,
        argmin_center: min.1,
        ln_c_lf: lf.ln_c_lf,
    })
}
