//! Boxes, lattices, Delone arrangements and their reflections.
//!
//! Coordinates are absolute. A box `Λ_L(x)` is the closed cube of side `L`
//! centered at `x`. Lattice cells are half-open, `[k - M/2, k + M/2)^d`, so
//! every point belongs to exactly one cell.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

const EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Periodic,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Periodic => "periodic",
        }
    }
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => Err(Error::InvalidInput(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Closed cube `Λ_L(x)` tagged with a boundary condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub dim: usize,
    pub center: Vec<f64>,
    pub side: f64,
    pub bc: BoundaryCondition,
}

impl BoxSpec {
    /// Box centered at the origin.
    pub fn centered(dim: usize, side: f64, bc: BoundaryCondition) -> Result<Self> {
        Self::new(vec![0.0; dim], side, bc)
    }

    pub fn new(center: Vec<f64>, side: f64, bc: BoundaryCondition) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidInput("box dimension must be positive".into()));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidInput(format!("box side must be positive, got {side}")));
        }
        Ok(BoxSpec {
            dim: center.len(),
            center,
            side,
            bc,
        })
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - 0.5 * self.side
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + 0.5 * self.side
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|a| x[a] >= self.lower(a) - EPS && x[a] <= self.upper(a) + EPS)
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    /// The side as an odd integer, if it is one.
    pub fn odd_side(&self) -> Option<usize> {
        let r = self.side.round();
        if (self.side - r).abs() < 1e-9 && r >= 1.0 && (r as usize) % 2 == 1 {
            Some(r as usize)
        } else {
            None
        }
    }
}

/// A point of the lattice `(MZ)^d`, used to label cells.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteIndex(pub Vec<i64>);

impl SiteIndex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&k| k as f64).collect()
    }
}

impl From<Vec<i64>> for SiteIndex {
    fn from(v: Vec<i64>) -> Self {
        SiteIndex(v)
    }
}

/// Lattice cell (half-open) that contains `x`.
pub fn cell_of(x: &[f64], m: usize) -> SiteIndex {
    let m = m as f64;
    SiteIndex(x.iter().map(|&c| ((c / m + 0.5).floor() * m) as i64).collect())
}

/// All sites of `(MZ)^d` whose cells tile the box, in lexicographic order.
pub fn lattice_sites(bx: &BoxSpec, m: usize) -> Result<Vec<SiteIndex>> {
    if m == 0 {
        return Err(Error::InvalidInput("lattice period must be positive".into()));
    }
    let ratio = bx.side / m as f64;
    let per_axis = ratio.round();
    if (ratio - per_axis).abs() > 1e-9 || per_axis < 1.0 || (per_axis as usize) % 2 == 0 {
        return Err(Error::IncommensurateBox {
            side: bx.side,
            period: m,
        });
    }
    let mut centers = Vec::with_capacity(bx.dim);
    for &c in &bx.center {
        let q = c / m as f64;
        if (q - q.round()).abs() > 1e-9 {
            return Err(Error::IncommensurateBox {
                side: bx.side,
                period: m,
            });
        }
        centers.push(q.round() as i64 * m as i64);
    }
    let n = per_axis as i64;
    let half = (n - 1) / 2;
    let offsets: Vec<i64> = (-half..=half).map(|j| j * m as i64).collect();
    Ok(product(&vec![offsets; bx.dim])
        .into_iter()
        .map(|off| SiteIndex(off.iter().zip(&centers).map(|(o, c)| o + c).collect()))
        .collect())
}

/// Cartesian product of integer ranges, lexicographic (first axis slowest).
fn product(axes: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Lattice point together with the cell it labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(SiteIndex, Vec<f64>)", into = "(SiteIndex, Vec<f64>)")]
pub struct LatticePoint {
    pub index: SiteIndex,
    pub point: Vec<f64>,
}

impl From<(SiteIndex, Vec<f64>)> for LatticePoint {
    fn from((index, point): (SiteIndex, Vec<f64>)) -> Self {
        LatticePoint { index, point }
    }
}

impl From<LatticePoint> for (SiteIndex, Vec<f64>) {
    fn from(p: LatticePoint) -> Self {
        (p.index, p.point)
    }
}

/// Delone point set split into one point per `M`-cell (`gamma1`) and the
/// remaining points (`gamma2`), with the ball radius used around them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeloneArrangement {
    pub d: usize,
    #[serde(rename = "M_tilde")]
    pub m_tilde: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub delta: f64,
    pub gamma1: Vec<LatticePoint>,
    pub gamma2: Vec<Vec<f64>>,
}

impl DeloneArrangement {
    /// Unperturbed lattice `z_k = k` on every cell of the window.
    pub fn lattice(window: &BoxSpec, m: usize, m_tilde: f64, delta: f64) -> Result<Self> {
        let sites = lattice_sites(window, m)?;
        Ok(DeloneArrangement {
            d: window.dim,
            m_tilde,
            m,
            delta,
            gamma1: sites
                .into_iter()
                .map(|k| LatticePoint {
                    point: k.as_f64(),
                    index: k,
                })
                .collect(),
            gamma2: Vec::new(),
        })
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.gamma1
            .iter()
            .map(|p| p.point.clone())
            .chain(self.gamma2.iter().cloned())
            .collect()
    }

    /// `Ñ = ⌈M/M̃⌉^d`, the maximal number of points per cell.
    pub fn max_per_cell(&self) -> usize {
        ((self.m as f64 / self.m_tilde).ceil() as usize).pow(self.d as u32)
    }

    /// Whether `B(z_j, radius) ⊂ Λ_M(j)` for every lattice point.
    pub fn balls_inside_cells(&self, radius: f64) -> bool {
        self.gamma1
            .iter()
            .all(|p| ball_inside_cell(&p.point, radius, &p.index, self.m))
    }

    pub fn validate(&self, window: &BoxSpec) -> DeloneCheck {
        validate_delone(&self.points(), self.m_tilde, self.m, window)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let arr: DeloneArrangement = serde_json::from_str(s)?;
        if arr.gamma1.iter().any(|p| p.index.dim() != arr.d || p.point.len() != arr.d)
            || arr.gamma2.iter().any(|p| p.len() != arr.d)
        {
            return Err(Error::InvalidInput("arrangement coordinates do not match `d`".into()));
        }
        Ok(arr)
    }
}

fn ball_inside_cell(z: &[f64], radius: f64, cell: &SiteIndex, m: usize) -> bool {
    let half = 0.5 * m as f64;
    z.iter()
        .zip(&cell.0)
        .all(|(&x, &k)| (x - k as f64).abs() + radius <= half + EPS)
}

/// Parameters for [`generate_delone`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeloneParams {
    pub d: usize,
    pub m_tilde: f64,
    pub m: usize,
    /// Ball radius that must fit inside each lattice cell around its point.
    pub delta: f64,
    /// Fraction of the admissible displacement actually used; 0 gives the lattice.
    pub perturbation: f64,
    /// Number of additional (auxiliary) points.
    pub n_extra: usize,
}

const MAX_ATTEMPTS: usize = 2000;

/// Perturbed-lattice Delone generator.
///
/// Each cell receives one point drawn uniformly from the positions that keep
/// `B(z, δ)` inside the cell, rejected until it is more than `M̃` away (sup
/// norm) from every accepted point. Extra points are then drawn in random
/// cells under the same separation rule and are never lexicographically
/// smaller than their cell's lattice point, so [`split_delone`] recovers the
/// same split.
pub fn generate_delone(params: &DeloneParams, window: &BoxSpec, seed: u64) -> Result<DeloneArrangement> {
    let DeloneParams {
        d,
        m_tilde,
        m,
        delta,
        perturbation,
        n_extra,
    } = *params;
    if window.dim != d {
        return Err(Error::InvalidInput("window dimension differs from d".into()));
    }
    if !(m_tilde > 0.0) || m == 0 || m_tilde >= m as f64 {
        return Err(Error::DeloneInfeasible(format!(
            "need 0 < M̃ < M, got M̃ = {m_tilde}, M = {m}"
        )));
    }
    let half = 0.5 * m as f64;
    if delta < 0.0 || delta > half {
        return Err(Error::DeloneInfeasible(format!(
            "ball radius {delta} does not fit in a cell of side {m}"
        )));
    }
    if !(0.0..=1.0).contains(&perturbation) {
        return Err(Error::InvalidInput("perturbation must lie in [0, 1]".into()));
    }
    let sites = lattice_sites(window, m)?;
    let reach = (half - delta) * perturbation;
    let mut rng = rng::sequential(seed, 0);
    let mut grid = SeparationGrid::new(m_tilde);
    let mut gamma1 = Vec::with_capacity(sites.len());

    for k in &sites {
        let base = k.as_f64();
        let mut placed = None;
        for _ in 0..MAX_ATTEMPTS {
            let z: Vec<f64> = base
                .iter()
                .map(|&c| c + reach * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            if grid.is_separated(&z) {
                placed = Some(z);
                break;
            }
        }
        let z = placed.ok_or_else(|| {
            Error::DeloneInfeasible(format!("no admissible position in cell {:?}", k.0))
        })?;
        grid.insert(&z);
        gamma1.push(LatticePoint {
            index: k.clone(),
            point: z,
        });
    }

    let mut gamma2 = Vec::with_capacity(n_extra);
    for _ in 0..n_extra {
        let mut placed = None;
        for _ in 0..MAX_ATTEMPTS {
            let cell = rng.random_range(0..gamma1.len());
            let lp = &gamma1[cell];
            let z: Vec<f64> = lp
                .index
                .as_f64()
                .iter()
                .map(|&c| c + half * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            if cell_of(&z, m) != lp.index || lex_cmp(&z, &lp.point) != Ordering::Greater {
                continue;
            }
            if grid.is_separated(&z) {
                placed = Some(z);
                break;
            }
        }
        let z = placed.ok_or_else(|| {
            Error::DeloneInfeasible("no room left for auxiliary points".into())
        })?;
        grid.insert(&z);
        gamma2.push(z);
    }

    Ok(DeloneArrangement {
        d,
        m_tilde,
        m,
        delta,
        gamma1,
        gamma2,
    })
}

/// Bucket grid of side `M̃` for sup-norm separation queries.
struct SeparationGrid {
    side: f64,
    buckets: HashMap<Vec<i64>, Vec<Vec<f64>>>,
}

impl SeparationGrid {
    fn new(side: f64) -> Self {
        SeparationGrid {
            side,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|&c| (c / self.side).floor() as i64).collect()
    }

    fn neighbors(&self, x: &[f64]) -> Vec<&Vec<f64>> {
        let key = self.key(x);
        let offsets = product(&vec![vec![-1, 0, 1]; key.len()]);
        offsets
            .iter()
            .filter_map(|o| {
                let k: Vec<i64> = key.iter().zip(o).map(|(a, b)| a + b).collect();
                self.buckets.get(&k)
            })
            .flatten()
            .collect()
    }

    fn is_separated(&self, x: &[f64]) -> bool {
        self.neighbors(x).iter().all(|y| sup_dist(x, y) > self.side)
    }

    fn insert(&mut self, x: &[f64]) {
        let key = self.key(x);
        self.buckets.entry(key).or_default().push(x.to_vec());
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Two or more points in a box of side `M̃`.
    TooClose,
    /// A lattice-centered box of side `M` without points.
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeloneWitness {
    pub kind: ViolationKind,
    pub center: Vec<f64>,
    pub side: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeloneCheck {
    Ok,
    Violation(DeloneWitness),
}

impl DeloneCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, DeloneCheck::Ok)
    }
}

/// Exact Delone check on a finite window.
///
/// Uniform discreteness: some closed box of side `M̃` holds two points iff
/// their sup-norm distance is at most `M̃`, so all close pairs are examined.
/// Relative denseness is checked on the lattice-centered boxes `Λ_M(k)`,
/// `k ∈ (MZ)^d`, lying entirely inside the window.
pub fn validate_delone(points: &[Vec<f64>], m_tilde: f64, m: usize, window: &BoxSpec) -> DeloneCheck {
    let mut grid = SeparationGrid::new(m_tilde);
    let mut index: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut first: Option<(usize, usize)> = None;
    for (j, p) in points.iter().enumerate() {
        for i in grid
            .neighbors(p)
            .iter()
            .flat_map(|q| index.get(&grid.key(q)).into_iter().flatten())
        {
            if sup_dist(&points[*i], p) <= m_tilde + EPS {
                let pair = (*i.min(&j), *i.max(&j));
                if first.map_or(true, |f| pair < f) {
                    first = Some(pair);
                }
            }
        }
        index.entry(grid.key(p)).or_default().push(j);
        grid.insert(p);
    }
    if let Some((i, j)) = first {
        let center: Vec<f64> = points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let count = points
            .iter()
            .filter(|q| sup_dist(q, &center) <= 0.5 * m_tilde + EPS)
            .count();
        return DeloneCheck::Violation(DeloneWitness {
            kind: ViolationKind::TooClose,
            center,
            side: m_tilde,
            count,
        });
    }

    let half = 0.5 * m as f64;
    for k in interior_cells(window, m) {
        let c = k.as_f64();
        let count = points.iter().filter(|q| sup_dist(q, &c) <= half + EPS).count();
        if count == 0 {
            return DeloneCheck::Violation(DeloneWitness {
                kind: ViolationKind::Empty,
                center: c,
                side: m as f64,
                count: 0,
            });
        }
    }
    DeloneCheck::Ok
}

/// Lattice cells `Λ_M(k)` contained in the closed window.
fn interior_cells(window: &BoxSpec, m: usize) -> Vec<SiteIndex> {
    let mf = m as f64;
    let axes: Vec<Vec<i64>> = (0..window.dim)
        .map(|a| {
            let lo = ((window.lower(a) + 0.5 * mf - EPS) / mf).ceil() as i64;
            let hi = ((window.upper(a) - 0.5 * mf + EPS) / mf).floor() as i64;
            (lo..=hi).map(|q| q * m as i64).collect()
        })
        .collect();
    product(&axes).into_iter().map(SiteIndex).collect()
}

/// Result of [`split_delone`].
#[derive(Clone, Debug)]
pub struct DeloneSplit {
    pub gamma1: Vec<LatticePoint>,
    pub gamma2: Vec<Vec<f64>>,
    /// Whether `B(z_j, δ₋) ⊂ Λ_M(j)` for each entry of `gamma1`.
    pub ball_inside: Vec<bool>,
}

/// Assigns the lexicographically smallest point of each `M`-cell of the
/// window to `gamma1` and every other point to `gamma2`.
pub fn split_delone(points: &[Vec<f64>], m: usize, window: &BoxSpec, delta_minus: f64) -> Result<DeloneSplit> {
    let mut by_cell: BTreeMap<SiteIndex, Vec<&Vec<f64>>> = BTreeMap::new();
    for p in points {
        by_cell.entry(cell_of(p, m)).or_default().push(p);
    }
    for list in by_cell.values_mut() {
        list.sort_by(|a, b| lex_cmp(a, b));
    }
    let mut gamma1 = Vec::new();
    let mut ball_inside = Vec::new();
    for k in interior_cells(window, m) {
        let first = by_cell
            .get(&k)
            .and_then(|l| l.first())
            .ok_or_else(|| Error::NotDelone { cell: k.0.clone() })?;
        ball_inside.push(ball_inside_cell(first, delta_minus, &k, m));
        gamma1.push(LatticePoint {
            index: k,
            point: (*first).clone(),
        });
    }
    let chosen: std::collections::HashSet<&SiteIndex> = gamma1.iter().map(|p| &p.index).collect();
    let mut gamma2 = Vec::new();
    for (k, list) in &by_cell {
        let skip = usize::from(chosen.contains(k));
        gamma2.extend(list.iter().skip(skip).map(|p| (*p).clone()));
    }
    Ok(DeloneSplit {
        gamma1,
        gamma2,
        ball_inside,
    })
}

/// Right near-neighbor of a site, with its mirror image for Dirichlet boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearNeighbor {
    /// `k⁺ = k + (⌈√d⌉+1) e₁`, reduced modulo the torus for periodic boxes.
    pub plus: SiteIndex,
    /// `k⁺⁻`: equals `plus` unless `plus` left a Dirichlet box.
    pub mirrored: SiteIndex,
    pub reflected: bool,
    /// Set when `L < ⌈√d⌉ + 1` and more than one reflection was needed.
    pub iterated: bool,
}

pub fn ceil_sqrt(d: usize) -> usize {
    let mut r = (d as f64).sqrt().floor() as usize;
    while r * r < d {
        r += 1;
    }
    r
}

/// Right near-neighbor of `k` in the box `Λ_L(0)` with unit cells.
///
/// Dirichlet images outside the box are folded back by reflections across
/// the faces `x₁ = ±L/2`; one reflection is the mirror `k⁺⁻₁ = L - k⁺₁`.
/// When `L < ⌈√d⌉+1` the fold is iterated until the image lands in the box.
/// Either way each image has at most two preimages.
pub fn right_near_neighbor(k: &SiteIndex, l: usize, bc: BoundaryCondition) -> Result<NearNeighbor> {
    if l % 2 == 0 {
        return Err(Error::InvalidInput(format!("box side {l} must be odd")));
    }
    let half = ((l - 1) / 2) as i64;
    if k.0.iter().any(|&c| c < -half || c > half) {
        return Err(Error::InvalidInput(format!("site {:?} is outside Λ_{l}", k.0)));
    }
    let d = k.dim();
    let shift = (ceil_sqrt(d) + 1) as i64;
    let l = l as i64;
    let mut plus = k.clone();
    plus.0[0] += shift;
    match bc {
        BoundaryCondition::Periodic => {
            plus.0[0] = (plus.0[0] + half).rem_euclid(l) - half;
            Ok(NearNeighbor {
                mirrored: plus.clone(),
                plus,
                reflected: false,
                iterated: false,
            })
        }
        BoundaryCondition::Dirichlet => {
            let x = plus.0[0];
            if x <= half {
                return Ok(NearNeighbor {
                    mirrored: plus.clone(),
                    plus,
                    reflected: false,
                    iterated: false,
                });
            }
            // doubled coordinates: y2 = 2(x + L/2) is odd, fold period is 4L
            let y2 = 2 * x + l;
            let mut r = y2.rem_euclid(4 * l);
            if r > 2 * l {
                r = 4 * l - r;
            }
            let mut mirrored = plus.clone();
            mirrored.0[0] = (r - l) / 2;
            Ok(NearNeighbor {
                iterated: mirrored.0[0] != l - x,
                plus,
                mirrored,
                reflected: true,
            })
        }
    }
}

/// Reflects a point set of `Λ_L` successively across the lower face of each
/// axis, producing its image on the doubled cube `[lo - L, lo + L]^d`.
/// Points lying on a face are not duplicated.
pub fn reflect_extend_points(points: &[Vec<f64>], bx: &BoxSpec) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = points.to_vec();
    for axis in 0..bx.dim {
        let lo = bx.lower(axis);
        let mut mirrored = Vec::with_capacity(out.len());
        for p in &out {
            if (p[axis] - lo).abs() > EPS {
                let mut q = p.clone();
                q[axis] = 2.0 * lo - p[axis];
                mirrored.push(q);
            }
        }
        out.extend(mirrored);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryCondition::*;

    fn centered(d: usize, l: f64) -> BoxSpec {
        BoxSpec::centered(d, l, Periodic).unwrap()
    }

    #[test]
    fn lattice_site_counts() {
        let s = lattice_sites(&centered(1, 3.0), 1).unwrap();
        assert_eq!(s, vec![SiteIndex(vec![-1]), SiteIndex(vec![0]), SiteIndex(vec![1])]);
        assert_eq!(lattice_sites(&centered(2, 5.0), 1).unwrap().len(), 25);
        let s = lattice_sites(&centered(2, 9.0), 3).unwrap();
        assert_eq!(s.len(), 9);
        assert!(s.iter().all(|k| k.0.iter().all(|c| c % 3 == 0)));
    }

    #[test]
    fn lattice_sites_rejects_even_ratio() {
        assert!(matches!(
            lattice_sites(&centered(1, 4.0), 1),
            Err(Error::IncommensurateBox { .. })
        ));
        assert!(matches!(
            lattice_sites(&centered(2, 6.0), 3),
            Err(Error::IncommensurateBox { .. })
        ));
    }

    #[test]
    fn unperturbed_lattice_is_delone() {
        let w = centered(2, 7.0);
        let params = DeloneParams {
            d: 2,
            m_tilde: 0.5,
            m: 1,
            delta: 0.3,
            perturbation: 0.0,
            n_extra: 0,
        };
        let arr = generate_delone(&params, &w, 1).unwrap();
        assert!(arr.gamma2.is_empty());
        assert!(arr.gamma1.iter().all(|p| p.point == p.index.as_f64()));
        assert!(arr.validate(&w).is_ok());
    }

    #[test]
    fn tight_separation_still_valid() {
        let w = centered(2, 9.0);
        let params = DeloneParams {
            d: 2,
            m_tilde: 0.9,
            m: 1,
            delta: 0.1,
            perturbation: 1.0,
            n_extra: 0,
        };
        let arr = generate_delone(&params, &w, 7).unwrap();
        assert_eq!(arr.validate(&w), DeloneCheck::Ok);
        assert!(arr.balls_inside_cells(0.1));
    }

    #[test]
    fn infeasible_separation() {
        let params = DeloneParams {
            d: 1,
            m_tilde: 1.5,
            m: 1,
            delta: 0.1,
            perturbation: 1.0,
            n_extra: 0,
        };
        assert!(matches!(
            generate_delone(&params, &centered(1, 5.0), 0),
            Err(Error::DeloneInfeasible(_))
        ));
    }

    fn z2(r: i64) -> Vec<Vec<f64>> {
        let mut v = Vec::new();
        for i in -r..=r {
            for j in -r..=r {
                v.push(vec![i as f64, j as f64]);
            }
        }
        v
    }

    #[test]
    fn validator_examples() {
        let w = centered(2, 7.0);
        assert!(validate_delone(&z2(4), 0.5, 1, &w).is_ok());

        let mut pts = z2(4);
        pts.push(vec![0.1, 0.0]);
        match validate_delone(&pts, 0.5, 1, &w) {
            DeloneCheck::Violation(wit) => {
                assert_eq!(wit.kind, ViolationKind::TooClose);
                assert_eq!(wit.count, 2);
                assert!(wit.center[0].abs() < 0.1 && wit.center[1].abs() < 1e-12);
            }
            DeloneCheck::Ok => panic!("expected a violation"),
        }

        let sparse: Vec<Vec<f64>> = z2(4)
            .into_iter()
            .map(|p| vec![2.0 * p[0], 2.0 * p[1]])
            .collect();
        match validate_delone(&sparse, 0.5, 1, &w) {
            DeloneCheck::Violation(wit) => {
                assert_eq!(wit.kind, ViolationKind::Empty);
                assert_eq!(wit.count, 0);
            }
            DeloneCheck::Ok => panic!("expected an empty box"),
        }
    }

    #[test]
    fn split_examples() {
        let w = centered(2, 5.0);
        let s = split_delone(&z2(2), 1, &w, 0.3).unwrap();
        assert_eq!(s.gamma1.len(), 25);
        assert!(s.gamma2.is_empty());
        assert!(s.ball_inside.iter().all(|&b| b));

        let mut pts = z2(2);
        pts.push(vec![0.4, 0.3]);
        let s = split_delone(&pts, 1, &w, 0.3).unwrap();
        assert_eq!(s.gamma2, vec![vec![0.4, 0.3]]);
        // lexicographic choice: (0,0) precedes (0.4,0.3)
        let origin = s.gamma1.iter().find(|p| p.index.0 == vec![0, 0]).unwrap();
        assert_eq!(origin.point, vec![0.0, 0.0]);

        let mut pts = z2(2);
        pts.retain(|p| p != &vec![1.0, 1.0]);
        assert!(matches!(
            split_delone(&pts, 1, &w, 0.3),
            Err(Error::NotDelone { .. })
        ));
    }

    #[test]
    fn near_neighbor_examples() {
        let nn = right_near_neighbor(&SiteIndex(vec![0, 0]), 7, Periodic).unwrap();
        assert_eq!(nn.plus.0, vec![3, 0]);
        let nn = right_near_neighbor(&SiteIndex(vec![3, 0]), 7, Dirichlet).unwrap();
        assert_eq!(nn.plus.0, vec![6, 0]);
        assert_eq!(nn.mirrored.0, vec![1, 0]);
        assert!(nn.reflected && !nn.iterated);
        let nn = right_near_neighbor(&SiteIndex(vec![-3]), 7, Periodic).unwrap();
        assert_eq!(nn.plus.0, vec![-1]);
        // periodic wrap
        let nn = right_near_neighbor(&SiteIndex(vec![3]), 7, Periodic).unwrap();
        assert_eq!(nn.plus.0, vec![-2]);
    }

    #[test]
    fn near_neighbor_small_box_fallback() {
        // d = 4 needs a shift of 3, larger than L = 1 and L = 3 allow
        for l in [1usize, 3] {
            let sites = lattice_sites(&centered(4, l as f64), 1).unwrap();
            let mut counts: HashMap<SiteIndex, usize> = HashMap::new();
            for k in &sites {
                let nn = right_near_neighbor(k, l, Dirichlet).unwrap();
                assert!(nn.mirrored.0.iter().all(|&c| c.unsigned_abs() as usize <= (l - 1) / 2));
                *counts.entry(nn.mirrored).or_default() += 1;
            }
            assert!(counts.values().all(|&c| c <= 2));
        }
        let nn = right_near_neighbor(&SiteIndex(vec![0, 0, 0, 0]), 1, Dirichlet).unwrap();
        assert!(nn.iterated);
    }

    #[test]
    fn reflection_examples() {
        let bx = BoxSpec::new(vec![0.5], 1.0, Dirichlet).unwrap();
        let ext = reflect_extend_points(&[vec![0.2]], &bx);
        assert_eq!(ext, vec![vec![0.2], vec![-0.2]]);

        let bx = BoxSpec::new(vec![2.5, 2.5], 5.0, Dirichlet).unwrap();
        let pts = vec![vec![0.5, 0.5], vec![2.0, 3.0], vec![0.0, 1.0]];
        let ext = reflect_extend_points(&pts, &bx);
        assert!(ext.len() <= 4 * pts.len());
        assert_eq!(ext.len(), 4 + 4 + 2);
    }

    #[test]
    fn arrangement_json_layout() {
        let arr = DeloneArrangement::lattice(&centered(1, 3.0), 1, 0.5, 0.3).unwrap();
        let v: serde_json::Value = serde_json::from_str(&arr.to_json().unwrap()).unwrap();
        assert_eq!(v["M"], 1);
        assert_eq!(v["gamma1"][0], serde_json::json!([[-1], [-1.0]]));
        let back = DeloneArrangement::from_json(&arr.to_json().unwrap()).unwrap();
        assert_eq!(back, arr);
    }
}
