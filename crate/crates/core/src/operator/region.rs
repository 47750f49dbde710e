use super::grid::{Grid, GridFunction};

/// Relative tolerance (in units of `h`) for deciding node membership on
/// region boundaries.
const FACE_TOL: f64 = 1e-9;

/// Subsets of a box on which masses are integrated.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Whole,
    /// Open ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Half-open cube `[c - s/2, c + s/2)^d`.
    Cube { center: Vec<f64>, side: f64 },
    /// `B(c, outer) \ B(c, inner)` with open balls.
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    Union(Vec<Region>),
}

impl Region {
    pub fn contains(&self, x: &[f64], h: f64) -> bool {
        let tol = FACE_TOL * h;
        match self {
            Region::Whole => true,
            Region::Ball { center, radius } => dist(x, center) < radius - tol,
            Region::Cube { center, side } => x.iter().zip(center).all(|(&xi, &ci)| {
                xi >= ci - 0.5 * side - tol && xi < ci + 0.5 * side - tol
            }),
            Region::Annulus { center, inner, outer } => {
                let r = dist(x, center);
                r >= inner - tol && r < outer - tol
            }
            Region::Union(parts) => parts.iter().any(|p| p.contains(x, h)),
        }
    }

    /// Closed coordinate box containing the region, if bounded.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let around = |c: &[f64], r: f64| (c.iter().map(|v| v - r).collect(), c.iter().map(|v| v + r).collect());
        match self {
            Region::Whole => None,
            Region::Ball { center, radius } => Some(around(center, *radius)),
            Region::Cube { center, side } => Some(around(center, 0.5 * side)),
            Region::Annulus { center, outer, .. } => Some(around(center, *outer)),
            Region::Union(parts) => {
                let boxes: Option<Vec<_>> = parts.iter().map(Region::bounding_box).collect();
                let boxes = boxes?;
                let (first, rest) = boxes.split_first()?;
                let mut lo = first.0.clone();
                let mut hi = first.1.clone();
                for (l, u) in rest {
                    lo.iter_mut().zip(l).for_each(|(a, b)| *a = a.min(*b));
                    hi.iter_mut().zip(u).for_each(|(a, b)| *a = a.max(*b));
                }
                Some((lo, hi))
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `h^d Σ_{x ∈ region} ψ(x)²` over the unknowns.
pub fn mass(psi: &GridFunction, region: &Region) -> f64 {
    let g = &psi.grid;
    let acc: f64 = match region.bounding_box() {
        None => psi.values.iter().map(|v| v * v).sum(),
        Some((lo, hi)) => nodes_in_box(g, &lo, &hi)
            .into_iter()
            .filter(|&i| region.contains(&g.coords(i), g.h))
            .map(|i| psi.values[i] * psi.values[i])
            .sum(),
    };
    acc * g.cell_volume()
}

/// Unknowns whose nodes lie in the closed coordinate box `[lo, hi]`,
/// in increasing flat order.
pub fn nodes_in_box(g: &Grid, lo: &[f64], hi: &[f64]) -> Vec<usize> {
    let first = g.first_node() as i64;
    let last = first + g.per_side() as i64 - 1;
    let ranges: Vec<(i64, i64)> = (0..g.dim())
        .map(|a| {
            let base = g.bx.lower(a);
            let i0 = ((lo[a] - base) / g.h - 1e-9).ceil() as i64;
            let i1 = ((hi[a] - base) / g.h + 1e-9).floor() as i64;
            (i0.max(first), i1.min(last))
        })
        .collect();
    if ranges.iter().any(|(a, b)| a > b) {
        return Vec::new();
    }
    let m = g.per_side();
    let mut out = vec![0usize];
    for &(a, b) in &ranges {
        let mut next = Vec::with_capacity(out.len() * (b - a + 1) as usize);
        for &prefix in &out {
            for i in a..=b {
                next.push(prefix * m + (i - first) as usize);
            }
        }
        out = next;
    }
    out
}

/// `h^d Σ |∇_h ψ|²` with forward differences, each edge attributed to its
/// base node. Dirichlet grids include the edges leaving boundary nodes, so
/// over the whole box this equals `⟨ψ, −Δ_h ψ⟩`.
pub fn gradient_mass(psi: &GridFunction, region: &Region) -> f64 {
    let g = &psi.grid;
    let d = g.dim();
    let n = g.n_per_side;
    let mut node = vec![0usize; d];
    let mut acc = 0.0;
    let total = n.pow(d as u32);
    for lin in 0..total {
        let mut rest = lin;
        for a in (0..d).rev() {
            node[a] = rest % n;
            rest /= n;
        }
        if !matches!(region, Region::Whole) && !region.contains(&g.node_coord(&node), g.h) {
            continue;
        }
        let base: Vec<isize> = node.iter().map(|&i| i as isize).collect();
        let u0 = psi.at_node(&base);
        let mut next = base.clone();
        for a in 0..d {
            next[a] += 1;
            let diff = psi.at_node(&next) - u0;
            next[a] -= 1;
            acc += diff * diff;
        }
    }
    acc * g.cell_volume() / (g.h * g.h)
}
