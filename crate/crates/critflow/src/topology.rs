//! Cubical sublevel-set complexes and relative homology of nested pairs
//! over GF(2).
//!
//! Cells are encoded as (base vertex, axes bitmask): the mask lists the axes
//! along which the cell extends, so vertices, edges, squares (and cubes in
//! 3D) share one representation. A cell enters the sublevel complex at
//! threshold `c` iff all of its corner vertices have value `<= c`; this
//! vertex-max rule is monotone in `c` and face-closed by construction, so
//! the pair at thresholds `a < b` is automatically nested.

use crate::deform;
use crate::functional::{DomainBox, FunctionalFamily};
use crate::linalg::{dist, norm};
use crate::solver::{self, SolveConfig};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("grid holds {cells} cells, above the configured budget {budget}")]
    CellBudgetExceeded { cells: usize, budget: usize },
    #[error("sampled a non-finite value at {at:?}")]
    NonFiniteSample { at: Vec<f64> },
    #[error("threshold {threshold} still grazes a sampled value after a grid shift")]
    KnifeEdge { threshold: f64 },
    #[error("another critical point found at {other:?} inside the ball")]
    NotIsolated { other: Vec<f64> },
    #[error("critical value {value:.6} falls inside the threshold band")]
    EpsilonTooLarge { value: f64 },
    #[error("only 2D and 3D grids are supported, got dimension {dim}")]
    UnsupportedDimension { dim: usize },
    #[error("level regularity check failed: {0}")]
    Regularity(#[from] deform::DeformError),
}

pub const DEFAULT_CELL_BUDGET: usize = 64_000_000;

/// Grid resolution and memory policy for homology computations.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub h: f64,
    pub cell_budget: usize,
    /// Sample over this box instead of the family's domain box.
    pub box_override: Option<DomainBox>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            h: 0.05,
            cell_budget: DEFAULT_CELL_BUDGET,
            box_override: None,
        }
    }
}

/// Vertex-sampled scalar field on a regular grid over a box.
#[derive(Clone, Debug)]
pub struct CubicalGrid {
    /// Vertex counts per axis.
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub h: f64,
    pub values: Vec<f64>,
}

/// A cell: base vertex (linear index) and the bitmask of extruded axes.
pub type Cell = (usize, u8);

impl CubicalGrid {
    /// Samples `f` at the vertices of a grid with mesh `h` over the box.
    pub fn sample(
        f: impl Fn(&[f64]) -> f64 + Sync,
        domain: &DomainBox,
        h: f64,
        cell_budget: usize,
    ) -> Result<Self, TopologyError> {
        let d = domain.dim();
        if !(2..=3).contains(&d) {
            return Err(TopologyError::UnsupportedDimension { dim: d });
        }
        assert!(h > 0.0);
        let dims: Vec<usize> = (0..d)
            .map(|a| (((domain.hi[a] - domain.lo[a]) / h).round() as usize).max(1) + 1)
            .collect();
        let grid = CubicalGrid {
            dims: dims.clone(),
            origin: domain.lo.clone(),
            h,
            values: Vec::new(),
        };
        let cells = grid.total_cells();
        if cells > cell_budget {
            return Err(TopologyError::CellBudgetExceeded {
                cells,
                budget: cell_budget,
            });
        }
        let nvert: usize = dims.iter().product();
        let values: Vec<f64> = (0..nvert)
            .into_par_iter()
            .map(|i| f(&grid.vertex_coords(i)))
            .collect();
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(TopologyError::NonFiniteSample {
                at: grid.vertex_coords(bad),
            });
        }
        Ok(CubicalGrid { values, ..grid })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.dims.iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for a in 1..self.dims.len() {
            s[a] = s[a - 1] * self.dims[a - 1];
        }
        s
    }

    pub fn vertex_coords(&self, linear: usize) -> Vec<f64> {
        let mut rest = linear;
        self.dims
            .iter()
            .enumerate()
            .map(|(a, &n)| {
                let i = rest % n;
                rest /= n;
                self.origin[a] + self.h * i as f64
            })
            .collect()
    }

    fn vertex_multi(&self, linear: usize) -> Vec<usize> {
        let mut rest = linear;
        self.dims
            .iter()
            .map(|&n| {
                let i = rest % n;
                rest /= n;
                i
            })
            .collect()
    }

    /// Total number of cells of all dimensions.
    pub fn total_cells(&self) -> usize {
        let d = self.dims.len();
        (0u8..(1 << d))
            .map(|mask| {
                (0..d)
                    .map(|a| self.dims[a] - usize::from(mask & (1 << a) != 0))
                    .product::<usize>()
            })
            .sum()
    }

    pub fn value_range(&self) -> (f64, f64) {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Largest vertex value over the cell's corners.
    fn cell_vmax(&self, cell: Cell) -> f64 {
        let (v, mask) = cell;
        let strides = self.strides();
        let mut vmax = self.values[v];
        let mut sub = mask;
        // iterate the nonempty subsets of the mask
        while sub != 0 {
            let mut corner = v;
            for a in 0..self.dims.len() {
                if sub & (1 << a) != 0 {
                    corner += strides[a];
                }
            }
            vmax = vmax.max(self.values[corner]);
            sub = (sub - 1) & mask;
        }
        vmax
    }

    /// Enumerates cells of every dimension, calling `visit(cell, vmax)`.
    fn for_each_cell(&self, mut visit: impl FnMut(Cell, f64)) {
        let d = self.dims.len();
        let nvert = self.vertex_count();
        for mask in 0u8..(1 << d) {
            for v in 0..nvert {
                if self.cell_in_grid((v, mask)) {
                    visit((v, mask), self.cell_vmax((v, mask)));
                }
            }
        }
    }

    fn cell_in_grid(&self, cell: Cell) -> bool {
        let (v, mask) = cell;
        let multi = self.vertex_multi(v);
        (0..self.dims.len())
            .all(|a| mask & (1 << a) == 0 || multi[a] + 1 < self.dims[a])
    }

    fn cell_faces(&self, cell: Cell) -> Vec<Cell> {
        let (v, mask) = cell;
        let strides = self.strides();
        let mut out = Vec::new();
        for a in 0..self.dims.len() {
            if mask & (1 << a) != 0 {
                let sub = mask & !(1 << a);
                out.push((v, sub));
                out.push((v + strides[a], sub));
            }
        }
        out
    }
}

/// All cells whose vertex values are `<= c`, grouped by dimension.
pub fn sublevel_cells(grid: &CubicalGrid, c: f64) -> Vec<Vec<Cell>> {
    assert!(c.is_finite());
    let mut by_dim: Vec<Vec<Cell>> = vec![Vec::new(); grid.dim() + 1];
    grid.for_each_cell(|cell, vmax| {
        if vmax <= c {
            by_dim[cell.1.count_ones() as usize].push(cell);
        }
    });
    by_dim
}

/// Relative Betti numbers, reported up to dimension 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BettiVector {
    pub b0: usize,
    pub b1: usize,
    pub b2: usize,
}

impl BettiVector {
    pub fn new(b0: usize, b1: usize, b2: usize) -> Self {
        BettiVector { b0, b1, b2 }
    }
}

/// A sublevel pair `(f^b, f^a)` over one grid, `a < b`.
#[derive(Clone, Debug)]
pub struct CubicalPair {
    pub grid: CubicalGrid,
    pub a: f64,
    pub b: f64,
}

impl CubicalPair {
    pub fn new(grid: CubicalGrid, a: f64, b: f64) -> Self {
        assert!(a < b, "pair thresholds must satisfy a < b");
        CubicalPair { grid, a, b }
    }

    /// Relative cells (in the larger complex but not the smaller), i.e.
    /// cells with `vmax` in `(a, b]`, optionally restricted to a ball.
    fn relative_cells(&self, ball: Option<(&[f64], f64)>) -> Vec<Vec<Cell>> {
        let mut by_dim: Vec<Vec<Cell>> = vec![Vec::new(); self.grid.dim() + 1];
        let strides = self.grid.strides();
        self.grid.for_each_cell(|cell, vmax| {
            if vmax <= self.a || vmax > self.b {
                return;
            }
            if let Some((center, radius)) = ball {
                let (v, mask) = cell;
                let mut sub: u8 = mask;
                let mut ok = dist(&self.grid.vertex_coords(v), center) <= radius;
                while ok && sub != 0 {
                    let mut corner = v;
                    for a in 0..self.grid.dim() {
                        if sub & (1 << a) != 0 {
                            corner += strides[a];
                        }
                    }
                    ok &= dist(&self.grid.vertex_coords(corner), center) <= radius;
                    sub = (sub - 1) & mask;
                }
                if !ok {
                    return;
                }
            }
            by_dim[cell.1.count_ones() as usize].push(cell);
        });
        by_dim
    }

    /// Cell counts of the relative complex per dimension.
    pub fn relative_cell_counts(&self) -> Vec<usize> {
        self.relative_cells(None).iter().map(Vec::len).collect()
    }
}

fn cell_key(cell: Cell) -> u64 {
    ((cell.1 as u64) << 56) | cell.0 as u64
}

/// GF(2) rank of a sparse matrix given as rows of sorted column indices.
fn gf2_rank(rows: Vec<Vec<u32>>, ncols: usize) -> usize {
    let mut pivot: Vec<Option<Vec<u32>>> = vec![None; ncols];
    let mut rank = 0usize;
    for mut row in rows {
        loop {
            let Some(&p) = row.last() else { break };
            match &pivot[p as usize] {
                Some(pr) => {
                    row = xor_sorted(&row, pr);
                }
                None => {
                    pivot[p as usize] = Some(row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn betti_of_cells(pair: &CubicalPair, by_dim: &[Vec<Cell>]) -> Vec<usize> {
    let d = pair.grid.dim();
    // index maps per dimension
    let index: Vec<std::collections::HashMap<u64, u32>> = by_dim
        .iter()
        .map(|cells| {
            cells
                .iter()
                .enumerate()
                .map(|(i, &c)| (cell_key(c), i as u32))
                .collect()
        })
        .collect();
    // boundary ranks: rank[k] = rank of d_k : C_k -> C_{k-1}
    let mut rank = vec![0usize; d + 2];
    for k in 1..=d {
        let rows: Vec<Vec<u32>> = by_dim[k]
            .iter()
            .map(|&cell| {
                let mut row: Vec<u32> = pair
                    .grid
                    .cell_faces(cell)
                    .into_iter()
                    .filter_map(|face| index[k - 1].get(&cell_key(face)).copied())
                    .collect();
                row.sort_unstable();
                // faces outside the relative basis are quotiented away; a
                // doubled face never occurs for distinct cubical faces
                row
            })
            .collect();
        rank[k] = gf2_rank(rows, by_dim[k - 1].len());
    }
    (0..=d)
        .map(|k| by_dim[k].len() - rank[k] - rank[k + 1])
        .collect()
}

/// Relative homology ranks of the pair over GF(2), computed by Gaussian
/// elimination on the relative boundary maps.
pub fn relative_betti(pair: &CubicalPair) -> BettiVector {
    let by_dim = pair.relative_cells(None);
    let betti = betti_of_cells(pair, &by_dim);
    BettiVector {
        b0: betti.first().copied().unwrap_or(0),
        b1: betti.get(1).copied().unwrap_or(0),
        b2: betti.get(2).copied().unwrap_or(0),
    }
}

/// Euler characteristic of the relative complex from the alternating cell
/// count; must match `b0 - b1 + b2` (+ higher terms in 3D).
pub fn relative_euler(pair: &CubicalPair) -> i64 {
    pair.relative_cell_counts()
        .iter()
        .enumerate()
        .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
        .sum()
}

const KNIFE_TOL_SCALE: f64 = 1e-9;

/// Samples a slice over the box at mesh `h`, shifting the box by `h/3` once
/// when a threshold grazes a sampled value (knife-edge cells), then erring.
pub fn sampled_slice_grid(
    family: &FunctionalFamily,
    lambda: f64,
    thresholds: &[f64],
    spec: &GridSpec,
) -> Result<CubicalGrid, TopologyError> {
    let base = spec
        .box_override
        .clone()
        .unwrap_or_else(|| family.domain().clone());
    for attempt in 0..2 {
        let domain = if attempt == 0 {
            base.clone()
        } else {
            base.shifted(spec.h / 3.0)
        };
        let grid = CubicalGrid::sample(
            |x| family.eval(lambda, x),
            &domain,
            spec.h,
            spec.cell_budget,
        )?;
        let knife = thresholds.iter().any(|&t| {
            let tol = KNIFE_TOL_SCALE * (1.0 + t.abs());
            grid.values.iter().any(|v| (v - t).abs() <= tol)
        });
        if !knife {
            return Ok(grid);
        }
        if attempt == 1 {
            return Err(TopologyError::KnifeEdge {
                threshold: thresholds[0],
            });
        }
    }
    unreachable!()
}

/// Local critical groups: relative Betti vector of the sublevel pair at
/// `f(lambda, x0) +- eps`, restricted to the ball of the given radius.
///
/// Verifies numerically that `x0` is the only gradient zero in the ball
/// (multistart) and that no supplied critical value falls in the band.
pub fn critical_groups_local(
    family: &FunctionalFamily,
    lambda: f64,
    x0: &[f64],
    radius: f64,
    eps: f64,
    h: f64,
    other_critical_values: &[f64],
) -> Result<BettiVector, TopologyError> {
    assert!(radius > 0.0 && eps > 0.0 && h > 0.0);
    let c = family.eval(lambda, x0);

    // isolation: multistart over a seed lattice in the ball
    let d = family.dim();
    if !(2..=3).contains(&d) {
        return Err(TopologyError::UnsupportedDimension { dim: d });
    }
    let mut seeds = vec![x0.to_vec()];
    let steps = 5;
    let mut idx = vec![0usize; d];
    loop {
        let offset: Vec<f64> = idx
            .iter()
            .map(|&i| radius * (2.0 * i as f64 / (steps - 1) as f64 - 1.0))
            .collect();
        if norm(&offset) <= radius {
            seeds.push(x0.iter().zip(&offset).map(|(a, b)| a + b).collect());
        }
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] < steps {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry == d {
                break;
            }
        }
        if carry == d {
            break;
        }
    }
    let cfg = SolveConfig::default();
    for pt in solver::multistart(family, lambda, &seeds, &cfg) {
        if dist(&pt.x, x0) > 10.0 * cfg.dedup_radius && dist(&pt.x, x0) <= radius {
            return Err(TopologyError::NotIsolated { other: pt.x });
        }
    }
    for &v in other_critical_values {
        if (v - c).abs() > 1e-10 && (v - c).abs() <= eps {
            return Err(TopologyError::EpsilonTooLarge { value: v });
        }
    }

    let ball_box = DomainBox {
        lo: x0.iter().map(|v| v - radius).collect(),
        hi: x0.iter().map(|v| v + radius).collect(),
    };
    let spec = GridSpec {
        h,
        box_override: Some(ball_box),
        ..GridSpec::default()
    };
    let grid = sampled_slice_grid(family, lambda, &[c - eps, c + eps], &spec)?;
    let pair = CubicalPair::new(grid, c - eps, c + eps);
    let by_dim = pair.relative_cells(Some((x0, radius)));
    let betti = betti_of_cells(&pair, &by_dim);
    Ok(BettiVector {
        b0: betti.first().copied().unwrap_or(0),
        b1: betti.get(1).copied().unwrap_or(0),
        b2: betti.get(2).copied().unwrap_or(0),
    })
}

/// Verdict of the two-slice pair comparison. Differing Betti vectors certify
/// homotopy inequivalence of the pairs; equal vectors are only
/// indistinguishable at this resolution, not a proof of equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairComparison {
    Inequivalent {
        left: BettiVector,
        right: BettiVector,
    },
    Indistinguishable {
        betti: BettiVector,
    },
}

/// Betti vector of the sublevel pair `(f^{+eps}, f^{-eps})` of one slice.
pub fn slice_pair_betti(
    family: &FunctionalFamily,
    lambda: f64,
    eps: f64,
    spec: &GridSpec,
) -> Result<BettiVector, TopologyError> {
    // both thresholds must be regular values of the slice
    for level in [-eps, eps] {
        deform::gradient_floor(
            family,
            (lambda, lambda),
            level,
            eps / 5.0,
            &deform::FloorConfig::default(),
        )?;
    }
    let grid = sampled_slice_grid(family, lambda, &[-eps, eps], spec)?;
    let pair = CubicalPair::new(grid, -eps, eps);
    Ok(relative_betti(&pair))
}

/// Compares the sublevel pairs of two slices at thresholds `+-eps`.
pub fn pair_inequivalence_certificate(
    family: &FunctionalFamily,
    lambda_1: f64,
    lambda_2: f64,
    eps: f64,
    spec: &GridSpec,
) -> Result<PairComparison, TopologyError> {
    let left = slice_pair_betti(family, lambda_1, eps, spec)?;
    let right = slice_pair_betti(family, lambda_2, eps, spec)?;
    Ok(if left != right {
        PairComparison::Inequivalent { left, right }
    } else {
        PairComparison::Indistinguishable { betti: left }
    })
}

/// SVG rendering of a 2D pair: cells of the smaller complex dark, the
/// relative band light.
pub fn pair_svg(pair: &CubicalPair) -> String {
    assert_eq!(pair.grid.dim(), 2, "plot supports planar grids");
    let (nx, ny) = (pair.grid.dims[0], pair.grid.dims[1]);
    let scale = (700.0 / (nx.max(ny) as f64)).min(12.0);
    let (w, h) = (nx as f64 * scale, ny as f64 * scale);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n"
    );
    let strides = pair.grid.strides();
    pair.grid.for_each_cell(|(v, mask), vmax| {
        if mask != 0b11 || vmax > pair.b {
            return;
        }
        let fill = if vmax <= pair.a { "#37474f" } else { "#c5cae9" };
        let i = v % pair.grid.dims[0];
        let j = (v / strides[1]) % pair.grid.dims[1];
        let y = h - (j + 1) as f64 * scale;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{scale:.2}\" height=\"{scale:.2}\" fill=\"{fill}\"/>\n",
            i as f64 * scale
        ));
    });
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{quadratic_family, radial_demo_family, two_minima_family};

    fn grid_of(f: impl Fn(&[f64]) -> f64 + Sync, half: f64, h: f64) -> CubicalGrid {
        CubicalGrid::sample(f, &DomainBox::symmetric(2, half), h, DEFAULT_CELL_BUDGET).unwrap()
    }

    #[test]
    fn sublevel_extremes() {
        let grid = grid_of(|x| x[0] + x[1], 1.0, 0.5);
        let (lo, hi) = grid.value_range();
        let empty = sublevel_cells(&grid, lo - 1.0);
        assert!(empty.iter().all(Vec::is_empty));
        let full = sublevel_cells(&grid, hi);
        let total: usize = full.iter().map(Vec::len).sum();
        assert_eq!(total, grid.total_cells());
    }

    #[test]
    fn sublevel_face_closed() {
        let grid = grid_of(|x| x[0] * x[0] - x[1], 1.5, 0.25);
        let cells = sublevel_cells(&grid, 0.3);
        let present: std::collections::HashSet<u64> = cells
            .iter()
            .flatten()
            .map(|&c| cell_key(c))
            .collect();
        for dim_cells in &cells {
            for &cell in dim_cells {
                for face in grid.cell_faces(cell) {
                    assert!(present.contains(&cell_key(face)), "missing face of {cell:?}");
                }
            }
        }
    }

    #[test]
    fn disk_betti() {
        // ||x||^2 <= 1 over [-2,2]^2: a disk
        let grid = grid_of(|x| x[0] * x[0] + x[1] * x[1], 2.0, 0.05);
        let (lo, _) = grid.value_range();
        let pair = CubicalPair::new(grid, lo - 1.0, 1.0);
        assert_eq!(relative_betti(&pair), BettiVector::new(1, 0, 0));
    }

    #[test]
    fn pair_full_full_vanishes() {
        let grid = grid_of(|x| x[0], 1.0, 0.25);
        let (_, hi) = grid.value_range();
        let pair = CubicalPair::new(grid, hi + 1.0, hi + 2.0);
        assert_eq!(relative_betti(&pair), BettiVector::new(0, 0, 0));
        assert_eq!(relative_euler(&pair), 0);
    }

    #[test]
    fn demo_pairs_at_both_endpoints() {
        let fam = radial_demo_family();
        let spec = GridSpec {
            h: 0.05,
            ..GridSpec::default()
        };
        let left = slice_pair_betti(&fam, -1.0, 0.05, &spec).unwrap();
        assert_eq!(left, BettiVector::new(1, 0, 0));
        let right = slice_pair_betti(&fam, 1.0, 0.05, &spec).unwrap();
        assert_eq!(right, BettiVector::new(0, 0, 1));
    }

    #[test]
    fn euler_consistency() {
        let fam = radial_demo_family();
        for lambda in [-1.0, 0.2, 1.0] {
            let grid = grid_of(|x| fam.eval(lambda, x), 3.0, 0.1);
            let pair = CubicalPair::new(grid, -0.05, 0.05);
            let b = relative_betti(&pair);
            assert_eq!(
                b.b0 as i64 - b.b1 as i64 + b.b2 as i64,
                relative_euler(&pair),
                "euler mismatch at lambda {lambda}"
            );
        }
    }

    #[test]
    fn critical_groups_morse_fixtures() {
        let min = quadratic_family(2);
        let b = critical_groups_local(&min, 0.0, &[0.0, 0.0], 0.5, 0.05, 0.02, &[]).unwrap();
        assert_eq!(b, BettiVector::new(1, 0, 0));

        let saddle = crate::functional::FunctionalFamily::from_eval(
            "saddle",
            2,
            DomainBox::symmetric(2, 2.0),
            |_, x: &[f64]| x[0] * x[0] - x[1] * x[1],
        );
        let b = critical_groups_local(&saddle, 0.0, &[0.0, 0.0], 0.5, 0.05, 0.02, &[]).unwrap();
        assert_eq!(b, BettiVector::new(0, 1, 0));

        let max = crate::functional::FunctionalFamily::from_eval(
            "peak",
            2,
            DomainBox::symmetric(2, 2.0),
            |_, x: &[f64]| -x[0] * x[0] - x[1] * x[1],
        );
        let b = critical_groups_local(&max, 0.0, &[0.0, 0.0], 0.5, 0.05, 0.02, &[]).unwrap();
        assert_eq!(b, BettiVector::new(0, 0, 1));
    }

    #[test]
    fn critical_groups_detect_neighbors() {
        let fam = two_minima_family();
        // ball around (1, 0) small enough: isolated minimum
        let b = critical_groups_local(&fam, 0.0, &[1.0, 0.0], 0.4, 0.05, 0.02, &[]).unwrap();
        assert_eq!(b, BettiVector::new(1, 0, 0));
        // ball big enough to reach the saddle at the origin
        let err = critical_groups_local(&fam, 0.0, &[1.0, 0.0], 1.2, 0.05, 0.02, &[]);
        assert!(matches!(err, Err(TopologyError::NotIsolated { .. })));
        // a known critical value inside the band
        let err = critical_groups_local(&fam, 0.0, &[1.0, 0.0], 0.4, 0.05, 0.02, &[0.03]);
        assert!(matches!(err, Err(TopologyError::EpsilonTooLarge { .. })));
    }

    #[test]
    fn two_minima_direct_sum() {
        let fam = two_minima_family();
        let grid = grid_of(|x| fam.eval(0.0, x), 3.0, 0.02);
        let pair = CubicalPair::new(grid, -0.1, 0.1);
        assert_eq!(relative_betti(&pair), BettiVector::new(2, 0, 0));
    }

    #[test]
    fn certificate_demo_vs_self() {
        let fam = radial_demo_family();
        let spec = GridSpec {
            h: 0.05,
            ..GridSpec::default()
        };
        match pair_inequivalence_certificate(&fam, -1.0, 1.0, 0.05, &spec).unwrap() {
            PairComparison::Inequivalent { left, right } => {
                assert_eq!(left, BettiVector::new(1, 0, 0));
                assert_eq!(right, BettiVector::new(0, 0, 1));
            }
            other => panic!("expected inequivalent, got {other:?}"),
        }
        match pair_inequivalence_certificate(&fam, -1.0, -1.0, 0.05, &spec).unwrap() {
            PairComparison::Indistinguishable { betti } => {
                assert_eq!(betti, BettiVector::new(1, 0, 0));
            }
            other => panic!("expected indistinguishable, got {other:?}"),
        }
    }

    #[test]
    fn certificate_lambda_independent_family() {
        let fam = quadratic_family(2);
        let spec = GridSpec {
            h: 0.05,
            ..GridSpec::default()
        };
        match pair_inequivalence_certificate(&fam, -0.7, 0.9, 0.05, &spec).unwrap() {
            PairComparison::Indistinguishable { betti } => {
                assert_eq!(betti, BettiVector::new(1, 0, 0));
            }
            other => panic!("expected indistinguishable, got {other:?}"),
        }
    }

    #[test]
    fn mesh_halving_stability() {
        let fam = radial_demo_family();
        for lambda in [-1.0, 1.0] {
            let coarse = slice_pair_betti(
                &fam,
                lambda,
                0.05,
                &GridSpec {
                    h: 0.04,
                    ..GridSpec::default()
                },
            )
            .unwrap();
            let fine = slice_pair_betti(
                &fam,
                lambda,
                0.05,
                &GridSpec {
                    h: 0.02,
                    ..GridSpec::default()
                },
            )
            .unwrap();
            assert_eq!(coarse, fine);
        }
    }

    #[test]
    fn perturbation_stability_of_critical_groups() {
        // a smooth delta-bump leaves the Morse fixture groups unchanged
        let delta = 1e-3;
        let bumped = crate::functional::FunctionalFamily::from_eval(
            "bumped-saddle",
            2,
            DomainBox::symmetric(2, 2.0),
            move |_, x: &[f64]| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                x[0] * x[0] - x[1] * x[1] + delta * (-r2).exp() * r2
            },
        );
        let b = critical_groups_local(&bumped, 0.0, &[0.0, 0.0], 0.5, 0.05, 0.02, &[]).unwrap();
        assert_eq!(b, BettiVector::new(0, 1, 0));
    }

    #[test]
    fn budget_guard() {
        let err = CubicalGrid::sample(
            |x| x[0],
            &DomainBox::symmetric(2, 3.0),
            0.0005,
            1_000_000,
        );
        assert!(matches!(err, Err(TopologyError::CellBudgetExceeded { .. })));
    }
}
