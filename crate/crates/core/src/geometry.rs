//! Convex planar domains, their clipped lattices, and the Shortley–Weller
//! discretization of `−Δ` with homogeneous Dirichlet data.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConvexDomain {
    Disk { center: [f64; 2], radius: f64 },
    /// Axis-aligned ellipse centred at the origin.
    Ellipse { semi_x: f64, semi_y: f64 },
    /// `(−half_x, half_x) × (−half_y, half_y)`.
    Rectangle { half_x: f64, half_y: f64 },
    /// `{|x| < α + λ√(1 − y²), |y| < 1}`: a rectangle of half-length `α`
    /// capped by two half-ellipses.
    Stadium {
        alpha: f64,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
}

impl ConvexDomain {
    pub fn unit_disk() -> Self {
        ConvexDomain::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn stadium(alpha: f64) -> Self {
        ConvexDomain::Stadium { alpha, lambda: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ConvexDomain::Disk { radius, center } => {
                radius > 0.0 && center.iter().all(|c| c.is_finite())
            }
            ConvexDomain::Ellipse { semi_x, semi_y } => semi_x > 0.0 && semi_y > 0.0,
            ConvexDomain::Rectangle { half_x, half_y } => half_x > 0.0 && half_y > 0.0,
            ConvexDomain::Stadium { alpha, lambda } => alpha >= 0.0 && lambda > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("degenerate domain {self:?}")))
        }
    }

    /// Centre of symmetry.
    pub fn center(&self) -> (f64, f64) {
        match *self {
            ConvexDomain::Disk { center, .. } => (center[0], center[1]),
            _ => (0.0, 0.0),
        }
    }

    /// Half-widths of the bounding box about the centre.
    pub fn half_extent(&self) -> (f64, f64) {
        match *self {
            ConvexDomain::Disk { radius, .. } => (radius, radius),
            ConvexDomain::Ellipse { semi_x, semi_y } => (semi_x, semi_y),
            ConvexDomain::Rectangle { half_x, half_y } => (half_x, half_y),
            ConvexDomain::Stadium { alpha, lambda } => (alpha + lambda, 1.0),
        }
    }

    /// Open horizontal chord `(x_left, x_right)` at height `y`, if any.
    pub fn chord_x(&self, y: f64) -> Option<(f64, f64)> {
        let (cx, cy) = self.center();
        let dy = y - cy;
        let half = match *self {
            ConvexDomain::Disk { radius, .. } => {
                let s = radius * radius - dy * dy;
                (s > 0.0).then(|| s.sqrt())
            }
            ConvexDomain::Ellipse { semi_x, semi_y } => {
                let s = 1.0 - (dy / semi_y).powi(2);
                (s > 0.0).then(|| semi_x * s.sqrt())
            }
            ConvexDomain::Rectangle { half_x, half_y } => (dy.abs() < half_y).then_some(half_x),
            ConvexDomain::Stadium { alpha, lambda } => {
                (dy.abs() < 1.0).then(|| alpha + lambda * (1.0 - dy * dy).sqrt())
            }
        }?;
        Some((cx - half, cx + half))
    }

    /// Open vertical chord `(y_bottom, y_top)` at abscissa `x`, if any.
    pub fn chord_y(&self, x: f64) -> Option<(f64, f64)> {
        let (cx, cy) = self.center();
        let dx = x - cx;
        let half = match *self {
            ConvexDomain::Disk { radius, .. } => {
                let s = radius * radius - dx * dx;
                (s > 0.0).then(|| s.sqrt())
            }
            ConvexDomain::Ellipse { semi_x, semi_y } => {
                let s = 1.0 - (dx / semi_x).powi(2);
                (s > 0.0).then(|| semi_y * s.sqrt())
            }
            ConvexDomain::Rectangle { half_x, half_y } => (dx.abs() < half_x).then_some(half_y),
            ConvexDomain::Stadium { alpha, lambda } => {
                let e = dx.abs() - alpha;
                if e <= 0.0 {
                    Some(1.0)
                } else {
                    let s = 1.0 - (e / lambda).powi(2);
                    (s > 0.0).then(|| s.sqrt())
                }
            }
        }?;
        Some((cy - half, cy + half))
    }

    /// Strict interior test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.chord_x(y).is_some_and(|(l, r)| x > l && x < r)
    }

    /// Counter-clockwise boundary polygon with about `n` vertices.
    pub fn boundary_polygon(&self, n: usize) -> Vec<(f64, f64)> {
        let (cx, cy) = self.center();
        let n = n.max(8);
        match *self {
            ConvexDomain::Disk { radius, .. } => (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    (cx + radius * t.cos(), cy + radius * t.sin())
                })
                .collect(),
            ConvexDomain::Ellipse { semi_x, semi_y } => (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    (semi_x * t.cos(), semi_y * t.sin())
                })
                .collect(),
            ConvexDomain::Rectangle { half_x, half_y } => vec![
                (-half_x, -half_y),
                (half_x, -half_y),
                (half_x, half_y),
                (-half_x, half_y),
            ],
            ConvexDomain::Stadium { alpha, lambda } => {
                let m = n / 2;
                let mut pts = Vec::with_capacity(2 * m + 2);
                // right cap, bottom to top
                for k in 0..=m {
                    let t = -PI / 2.0 + PI * k as f64 / m as f64;
                    pts.push((alpha + lambda * t.cos(), t.sin()));
                }
                for k in 0..=m {
                    let t = PI / 2.0 + PI * k as f64 / m as f64;
                    pts.push((-alpha + lambda * t.cos(), t.sin()));
                }
                pts
            }
        }
    }
}

/// Arms in the order east, west, north, south.
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    pub i: i64,
    pub j: i64,
    pub x: f64,
    pub y: f64,
    /// Interior neighbour index per arm, `None` when the arm ends on `∂Ω`.
    pub neighbor: [Option<usize>; 4],
    /// Arm length over `h`; `1` toward an interior neighbour.
    pub theta: [f64; 4],
}

/// An axis-aligned lattice `center + h·(i, j)` restricted to the open domain.
///
/// Nodes are numbered with the shorter lattice axis running fastest, which
/// keeps the matrix bandwidth at one lattice line of the short side.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGrid {
    domain: ConvexDomain,
    h: f64,
    center: (f64, f64),
    /// lattice index ranges `−ni..=ni`, `−nj..=nj`
    ni: i64,
    nj: i64,
    index: Vec<Option<usize>>,
    nodes: Vec<GridNode>,
    /// Nodes with an arm shorter than `THETA_FLOOR·h`, snapped up to it.
    snapped: Vec<usize>,
    bandwidth: usize,
}

pub const THETA_FLOOR: f64 = 1e-6;

/// Clips the lattice of spacing `h` to `domain` and computes boundary arm
/// lengths exactly from the chord formulas.
pub fn make_grid(domain: &ConvexDomain, h: f64) -> Result<MaskedGrid> {
    domain.validate()?;
    if !(h > 0.0) {
        return Err(Error::Geometry(format!("grid spacing must be positive, got {h}")));
    }
    let (cx, cy) = domain.center();
    let (ex, ey) = domain.half_extent();
    let ni = (ex / h).ceil() as i64 + 1;
    let nj = (ey / h).ceil() as i64 + 1;
    let (wi, wj) = (2 * ni + 1, 2 * nj + 1);
    if wi.saturating_mul(wj) > 200_000_000 {
        return Err(Error::Geometry(format!("grid spacing {h} is too fine for this domain")));
    }
    let x_fast = ex < ey;
    let lattice = |i: i64, j: i64| -> usize {
        if x_fast {
            ((j + nj) * wi + (i + ni)) as usize
        } else {
            ((i + ni) * wj + (j + nj)) as usize
        }
    };
    let mut index = vec![None; (wi * wj) as usize];
    let mut nodes = Vec::new();
    let (outer, inner) = if x_fast { (nj, ni) } else { (ni, nj) };
    for a in -outer..=outer {
        for b in -inner..=inner {
            let (i, j) = if x_fast { (b, a) } else { (a, b) };
            let (x, y) = (cx + i as f64 * h, cy + j as f64 * h);
            if domain.contains(x, y) {
                index[lattice(i, j)] = Some(nodes.len());
                nodes.push(GridNode {
                    i,
                    j,
                    x,
                    y,
                    neighbor: [None; 4],
                    theta: [1.0; 4],
                });
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::Geometry(format!("no lattice node of spacing {h} lies inside {domain:?}")));
    }
    let lookup = |i: i64, j: i64| -> Option<usize> {
        if i.abs() > ni || j.abs() > nj {
            None
        } else {
            index[lattice(i, j)]
        }
    };
    let mut snapped = Vec::new();
    let mut bandwidth = 0;
    for k in 0..nodes.len() {
        let GridNode { i, j, x, y, .. } = nodes[k];
        let (xl, xr) = domain.chord_x(y).expect("node is inside");
        let (yb, yt) = domain.chord_y(x).expect("node is inside");
        let steps = [(1, 0, xr - x), (-1, 0, x - xl), (0, 1, yt - y), (0, -1, y - yb)];
        let mut snap = false;
        for (arm, &(di, dj, dist)) in steps.iter().enumerate() {
            match lookup(i + di, j + dj) {
                Some(nb) => {
                    nodes[k].neighbor[arm] = Some(nb);
                    bandwidth = bandwidth.max(nb.abs_diff(k));
                }
                None => {
                    let mut theta = (dist / h).min(1.0);
                    if theta < THETA_FLOOR {
                        theta = THETA_FLOOR;
                        snap = true;
                    }
                    nodes[k].theta[arm] = theta;
                }
            }
        }
        if snap {
            snapped.push(k);
        }
    }
    Ok(MaskedGrid {
        domain: *domain,
        h,
        center: (cx, cy),
        ni,
        nj,
        index,
        nodes,
        snapped,
        bandwidth,
    })
}

impl MaskedGrid {
    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &GridNode {
        &self.nodes[k]
    }

    pub fn snapped(&self) -> &[usize] {
        &self.snapped
    }

    /// Largest index distance between linked nodes.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Lattice ranges `(ni, nj)`: indices run over `−ni..=ni`, `−nj..=nj`.
    pub fn lattice_extent(&self) -> (i64, i64) {
        (self.ni, self.nj)
    }

    /// Node index at lattice position `(i, j)`, if interior.
    pub fn at(&self, i: i64, j: i64) -> Option<usize> {
        if i.abs() > self.ni || j.abs() > self.nj {
            return None;
        }
        let (wi, wj) = (2 * self.ni + 1, 2 * self.nj + 1);
        let (ex, ey) = self.domain.half_extent();
        let k = if ex < ey {
            (j + self.nj) * wi + (i + self.ni)
        } else {
            (i + self.ni) * wj + (j + self.nj)
        };
        self.index[k as usize]
    }

    pub fn position(&self, i: i64, j: i64) -> (f64, f64) {
        (self.center.0 + i as f64 * self.h, self.center.1 + j as f64 * self.h)
    }

    /// Lattice cell `(i, j)` whose lower-left corner is at or below `(x, y)`,
    /// and the fractional offsets inside it.
    pub fn cell(&self, x: f64, y: f64) -> (i64, i64, f64, f64) {
        let sx = (x - self.center.0) / self.h;
        let sy = (y - self.center.1) / self.h;
        let (fi, fj) = (sx.floor(), sy.floor());
        (fi as i64, fj as i64, sx - fi, sy - fj)
    }

    /// Whether every lattice point of the `(2r+1)²` block around node `k` is
    /// an interior node.
    pub fn has_interior_block(&self, k: usize, r: i64) -> bool {
        let n = &self.nodes[k];
        (-r..=r).all(|di| (-r..=r).all(|dj| self.at(n.i + di, n.j + dj).is_some()))
    }

    /// The grid is coarser than ten nodes across its shorter axis.
    pub fn is_coarse(&self) -> bool {
        let (ex, ey) = self.domain.half_extent();
        2.0 * ex.min(ey) / self.h < 10.0
    }
}

/// Nodal values on a grid; zero on and outside `∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<MaskedGrid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<MaskedGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `func` at the nodes.
    pub fn from_fn(grid: Arc<MaskedGrid>, func: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|n| func(n.x, n.y)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<MaskedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, func: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.grid.clone(), self.values.iter().map(|&v| func(v)).collect())
    }

    /// Value at lattice point `(i, j)`, zero when it is not an interior node.
    pub fn lattice_value(&self, i: i64, j: i64) -> f64 {
        self.grid.at(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    /// Bilinear interpolation inside a lattice cell whose four corners are
    /// all interior nodes; `None` otherwise.
    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        let (i, j, s, t) = self.grid.cell(x, y);
        let g = &self.grid;
        let v00 = self.values[g.at(i, j)?];
        let v10 = self.values[g.at(i + 1, j)?];
        let v01 = self.values[g.at(i, j + 1)?];
        let v11 = self.values[g.at(i + 1, j + 1)?];
        Some((1.0 - s) * (1.0 - t) * v00 + s * (1.0 - t) * v10 + (1.0 - s) * t * v01 + s * t * v11)
    }

    /// Bilinear interpolation with the zero extension outside the interior
    /// node set.
    pub fn interpolate_extended(&self, x: f64, y: f64) -> f64 {
        let (i, j, s, t) = self.grid.cell(x, y);
        let v = |a, b| self.lattice_value(a, b);
        (1.0 - s) * (1.0 - t) * v(i, j)
            + s * (1.0 - t) * v(i + 1, j)
            + (1.0 - s) * t * v(i, j + 1)
            + s * t * v(i + 1, j + 1)
    }

    /// CSV with header `x,y,value`, one row per interior node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value\n");
        for (n, v) in self.grid.nodes().iter().zip(&self.values) {
            out.push_str(&format!("{:.10},{:.10},{:.12e}\n", n.x, n.y, v));
        }
        out
    }
}

/// Shortley–Weller matrix of `−Δ` with zero Dirichlet data.
///
/// In each direction with arm lengths `θ₁h`, `θ₂h` the row gets
/// `2/(θ₁θ₂h²)` on the diagonal and `−2/(θ₁(θ₁+θ₂)h²)` toward the `θ₁` side.
pub fn assemble_laplacian(grid: &MaskedGrid) -> CsrMatrix {
    let h2 = grid.h() * grid.h();
    let rows = grid.nodes().iter().enumerate().map(|(k, n)| {
        let mut row = Vec::with_capacity(5);
        let mut diag = 0.0;
        for (a, b) in [(EAST, WEST), (NORTH, SOUTH)] {
            let (ta, tb) = (n.theta[a], n.theta[b]);
            diag += 2.0 / (ta * tb * h2);
            if let Some(nb) = n.neighbor[a] {
                row.push((nb, -2.0 / (ta * (ta + tb) * h2)));
            }
            if let Some(nb) = n.neighbor[b] {
                row.push((nb, -2.0 / (tb * (ta + tb) * h2)));
            }
        }
        row.push((k, diag));
        row.sort_by_key(|e| e.0);
        row
    });
    CsrMatrix::from_rows(grid.len(), rows)
}

/// `−Δ_h u` at every node, where `u` takes the nodal values inside and the
/// values of `boundary` at the arm end points on `∂Ω`.
pub fn apply_with_boundary(
    grid: &MaskedGrid,
    values: &[f64],
    boundary: impl Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let h = grid.h();
    let h2 = h * h;
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let arm_value = |arm: usize| -> f64 {
                match n.neighbor[arm] {
                    Some(nb) => values[nb],
                    None => {
                        let d = n.theta[arm] * h;
                        let (x, y) = match arm {
                            EAST => (n.x + d, n.y),
                            WEST => (n.x - d, n.y),
                            NORTH => (n.x, n.y + d),
                            _ => (n.x, n.y - d),
                        };
                        boundary(x, y)
                    }
                }
            };
            let mut out = 0.0;
            for (a, b) in [(EAST, WEST), (NORTH, SOUTH)] {
                let (ta, tb) = (n.theta[a], n.theta[b]);
                out += 2.0 / (ta * tb * h2) * values[k]
                    - 2.0 / (ta * (ta + tb) * h2) * arm_value(a)
                    - 2.0 / (tb * (ta + tb) * h2) * arm_value(b);
            }
            out
        })
        .collect()
}

/// Structural M-matrix check: positive diagonal, non-positive off-diagonal
/// entries, weak row diagonal dominance.
pub fn check_m_matrix(matrix: &CsrMatrix) -> Result<()> {
    for i in 0..matrix.n() {
        let mut diag = 0.0;
        let mut off = 0.0;
        for (j, v) in matrix.row(i) {
            if j == i {
                diag = v;
            } else if v > 0.0 {
                return Err(Error::Linear(format!("positive off-diagonal entry in row {i}")));
            } else {
                off -= v;
            }
        }
        if !(diag > 0.0) {
            return Err(Error::Linear(format!("non-positive diagonal in row {i}")));
        }
        if off > diag * (1.0 + 1e-12) {
            return Err(Error::Linear(format!("row {i} is not diagonally dominant")));
        }
    }
    Ok(())
}
