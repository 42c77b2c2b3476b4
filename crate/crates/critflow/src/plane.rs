//! Grid-exact plane topology: the rectangle component-or-curve duality and
//! the common-value reparametrization of two endpoint-pinned curves.
//!
//! Connectivity convention: occupied cells use 8-connectivity, free cells
//! 4-connectivity. With this pairing exactly one of the two alternatives
//! holds on every mask: either an occupied component joins the two
//! horizontal sides, or a free path joins the two vertical sides.

use crate::functional::ScalarProfile;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlaneError {
    #[error("mask rows must be equal-length strings of 0/1, got {0}")]
    BadMask(String),
    #[error("curve endpoints must satisfy a(-1)=b(-1)=-1 and a(1)=b(1)=1")]
    BadEndpoints,
    #[error("zero-curve tracking stalled after {retries} dither retries")]
    TrackingStalled { retries: usize },
}

/// Occupancy mask over a rectangle. Cell `(i, j)` spans
/// `[x0 + i w, x0 + (i+1) w] x [y0 + j h]`... with `j = 0` the bottom row.
/// Sides: `A0`/`A1` are the vertical (left/right) sides, `B0`/`B1` the
/// horizontal (bottom/top) ones.
#[derive(Clone, Debug)]
pub struct RectGrid {
    pub rect: (f64, f64, f64, f64), // x0, x1, y0, y1
    pub nx: usize,
    pub ny: usize,
    pub occupied: Vec<bool>,
}

impl RectGrid {
    pub fn new(rect: (f64, f64, f64, f64), nx: usize, ny: usize, occupied: Vec<bool>) -> Self {
        assert!(nx >= 1 && ny >= 1 && occupied.len() == nx * ny);
        assert!(rect.0 < rect.1 && rect.2 < rect.3);
        RectGrid {
            rect,
            nx,
            ny,
            occupied,
        }
    }

    /// Parses rows of `0`/`1`; the first line is the top row.
    pub fn from_text(rect: (f64, f64, f64, f64), text: &str) -> Result<Self, PlaneError> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(PlaneError::BadMask("empty mask".into()));
        }
        let nx = rows[0].len();
        let ny = rows.len();
        let mut occupied = vec![false; nx * ny];
        for (row_idx, line) in rows.iter().enumerate() {
            if line.len() != nx {
                return Err(PlaneError::BadMask(format!(
                    "row {row_idx} has length {}, expected {nx}",
                    line.len()
                )));
            }
            let j = ny - 1 - row_idx; // text top row is the top of the rectangle
            for (i, ch) in line.chars().enumerate() {
                occupied[j * nx + i] = match ch {
                    '0' => false,
                    '1' => true,
                    other => {
                        return Err(PlaneError::BadMask(format!("unexpected character {other:?}")))
                    }
                };
            }
        }
        Ok(RectGrid::new(rect, nx, ny, occupied))
    }

    pub fn from_cells_json(text: &str) -> Result<Self, PlaneError> {
        #[derive(Deserialize)]
        struct CellsManifest {
            rect: (f64, f64, f64, f64),
            nx: usize,
            ny: usize,
            cells: Vec<(usize, usize)>,
        }
        let m: CellsManifest =
            serde_json::from_str(text).map_err(|e| PlaneError::BadMask(e.to_string()))?;
        let mut occupied = vec![false; m.nx * m.ny];
        for (i, j) in m.cells {
            if i >= m.nx || j >= m.ny {
                return Err(PlaneError::BadMask(format!("cell ({i}, {j}) out of range")));
            }
            occupied[j * m.nx + i] = true;
        }
        Ok(RectGrid::new(m.rect, m.nx, m.ny, occupied))
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.occupied[j * self.nx + i]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let (x0, x1, y0, y1) = self.rect;
        let w = (x1 - x0) / self.nx as f64;
        let h = (y1 - y0) / self.ny as f64;
        (x0 + (i as f64 + 0.5) * w, y0 + (j as f64 + 0.5) * h)
    }
}

/// An ordered polyline in the rectangle.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    pub points: Vec<(f64, f64)>,
}

/// The two alternatives of the rectangle lemma.
#[derive(Clone, Debug)]
pub enum Separation {
    /// An 8-connected occupied component joining the bottom and top sides.
    Component(Vec<(usize, usize)>),
    /// A curve from the left side to the right side through free cells,
    /// avoiding the occupied set and the horizontal sides.
    Curve(PlanarCurve),
}

const NBR8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const NBR4: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Exactly one of: an occupied 8-connected component joining the horizontal
/// sides, or a free 4-connected curve joining the vertical sides. Total on
/// every mask.
pub fn component_or_curve(grid: &RectGrid) -> Separation {
    if let Some(curve) = free_crossing(grid) {
        return Separation::Curve(curve);
    }
    let component = occupied_crossing(grid)
        .expect("grid duality: free crossing absent, occupied crossing must exist");
    Separation::Component(component)
}

fn free_crossing(grid: &RectGrid) -> Option<PlanarCurve> {
    let (nx, ny) = (grid.nx, grid.ny);
    let idx = |i: usize, j: usize| j * nx + i;
    let mut parent: Vec<Option<usize>> = vec![None; nx * ny];
    let mut seen = vec![false; nx * ny];
    let mut queue = std::collections::VecDeque::new();
    for j in 0..ny {
        if !grid.at(0, j) {
            seen[idx(0, j)] = true;
            queue.push_back(idx(0, j));
        }
    }
    let mut hit: Option<usize> = None;
    'bfs: while let Some(cur) = queue.pop_front() {
        let (ci, cj) = (cur % nx, cur / nx);
        if ci == nx - 1 {
            hit = Some(cur);
            break 'bfs;
        }
        for (di, dj) in NBR4 {
            let (ni, nj) = (ci as i64 + di, cj as i64 + dj);
            if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                continue;
            }
            let n = idx(ni as usize, nj as usize);
            if !seen[n] && !grid.occupied[n] {
                seen[n] = true;
                parent[n] = Some(cur);
                queue.push_back(n);
            }
        }
    }
    let end = hit?;
    let mut cells = vec![end];
    let mut cur = end;
    while let Some(p) = parent[cur] {
        cells.push(p);
        cur = p;
    }
    cells.reverse();
    let mut points = Vec::with_capacity(cells.len() + 2);
    let first = (cells[0] % nx, cells[0] / nx);
    let last = (cells[cells.len() - 1] % nx, cells[cells.len() - 1] / nx);
    points.push((grid.rect.0, grid.cell_center(first.0, first.1).1));
    for &c in &cells {
        points.push(grid.cell_center(c % nx, c / nx));
    }
    points.push((grid.rect.1, grid.cell_center(last.0, last.1).1));
    Some(PlanarCurve { points })
}

fn occupied_crossing(grid: &RectGrid) -> Option<Vec<(usize, usize)>> {
    let (nx, ny) = (grid.nx, grid.ny);
    let idx = |i: usize, j: usize| j * nx + i;
    let mut label = vec![usize::MAX; nx * ny];
    let mut components: Vec<Vec<(usize, usize)>> = Vec::new();
    for start in 0..nx * ny {
        if !grid.occupied[start] || label[start] != usize::MAX {
            continue;
        }
        let comp_id = components.len();
        let mut cells = Vec::new();
        let mut queue = std::collections::VecDeque::from([start]);
        label[start] = comp_id;
        while let Some(cur) = queue.pop_front() {
            let (ci, cj) = (cur % nx, cur / nx);
            cells.push((ci, cj));
            for (di, dj) in NBR8 {
                let (ni, nj) = (ci as i64 + di, cj as i64 + dj);
                if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                    continue;
                }
                let n = idx(ni as usize, nj as usize);
                if grid.occupied[n] && label[n] == usize::MAX {
                    label[n] = comp_id;
                    queue.push_back(n);
                }
            }
        }
        components.push(cells);
    }
    components.into_iter().find(|cells| {
        cells.iter().any(|&(_, j)| j == 0) && cells.iter().any(|&(_, j)| j == ny - 1)
    })
}

#[derive(Clone, Debug)]
pub struct ReparamConfig {
    pub samples: usize,
    pub seed: u64,
    pub max_retries: usize,
}

impl Default for ReparamConfig {
    fn default() -> Self {
        ReparamConfig {
            samples: 512,
            seed: 11,
            max_retries: 5,
        }
    }
}

/// Output of the common-value reparametrization: smooth perturbations of the
/// inputs and parameter curves `c, d` with `a~(c(t)) = b~(d(t))`.
pub struct Reparametrization {
    pub a_tilde: ScalarProfile,
    pub b_tilde: ScalarProfile,
    pub c: ScalarProfile,
    pub d: ScalarProfile,
    pub c_samples: Vec<f64>,
    pub d_samples: Vec<f64>,
    pub residual: f64,
    pub retries: usize,
}

fn build_perturbation(
    profile: &ScalarProfile,
    eps: f64,
    n: usize,
    dither_amp: f64,
    rng: &mut impl rand::Rng,
) -> Vec<f64> {
    let ts: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let raw: Vec<f64> = ts.iter().map(|&t| profile.eval(t)).collect();

    // mollify: moving average, window shrunk until the sup budget holds
    let mut window = (n / 64).max(1);
    let mollified = loop {
        let m: Vec<f64> = (0..=n)
            .map(|i| {
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(n);
                raw[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
            })
            .collect();
        let sup = m
            .iter()
            .zip(&raw)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if sup <= eps / 4.0 || window == 0 {
            break m;
        }
        window /= 2;
    };

    // endpoint blend toward the identity: pins values and makes the end
    // slopes positive
    let mut blend_width = 0.1f64;
    let blended = loop {
        let m: Vec<f64> = ts
            .iter()
            .zip(&mollified)
            .map(|(&t, &m)| {
                let w = crate::functional::smoothstep5((t.abs() - (1.0 - blend_width)) / blend_width);
                (1.0 - w) * m + w * t
            })
            .collect();
        let sup = m
            .iter()
            .zip(&mollified)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if sup <= eps / 4.0 || blend_width < 1e-4 {
            break m;
        }
        blend_width /= 2.0;
    };

    // interior squeeze keeps values strictly inside (-1, 1)
    let sigma = (eps / 8.0).min(1e-3);
    let mut out: Vec<f64> = ts
        .iter()
        .zip(&blended)
        .map(|(&t, &v)| v * (1.0 - sigma * (1.0 - t * t)))
        .collect();

    if dither_amp > 0.0 {
        let coefs: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        for (i, &t) in ts.iter().enumerate() {
            let mut d = 0.0;
            for (k, &(c, phase)) in coefs.iter().enumerate() {
                d += c * ((k as f64 + 2.0) * std::f64::consts::PI * (t + phase)).sin();
            }
            out[i] += dither_amp * (1.0 - t * t) * d / 3.0;
        }
    }
    // endpoints exact
    out[0] = -1.0;
    out[n] = 1.0;
    out
}

/// Perturbs `a, b` within `eps` (endpoints fixed, end slopes positive,
/// interior strict) and tracks the zero set of `a~(x) - b~(y)` from
/// `(-1,-1)` to `(1,1)` by predictor-corrector continuation. Stalls trigger
/// a fresh dither, up to `max_retries`.
pub fn common_value_reparametrization(
    a: &ScalarProfile,
    b: &ScalarProfile,
    eps: f64,
    cfg: &ReparamConfig,
) -> Result<Reparametrization, PlaneError> {
    use rand::SeedableRng;
    assert!(eps > 0.0);
    for (p, ends) in [(a, (-1.0, 1.0)), (b, (-1.0, 1.0))] {
        if (p.eval(-1.0) - ends.0).abs() > 1e-9 || (p.eval(1.0) - ends.1).abs() > 1e-9 {
            return Err(PlaneError::BadEndpoints);
        }
    }
    let n = cfg.samples;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    for attempt in 0..=cfg.max_retries {
        let amp = if attempt == 0 {
            0.0
        } else {
            eps * attempt as f64 / (8.0 * cfg.max_retries as f64)
        };
        let a_samples = build_perturbation(a, eps, n, amp, &mut rng);
        let b_samples = build_perturbation(b, eps, n, amp, &mut rng);
        let a_tilde = ScalarProfile::from_samples(-1.0, 1.0, a_samples);
        let b_tilde = ScalarProfile::from_samples(-1.0, 1.0, b_samples);
        if let Some((c_samples, d_samples, residual)) = track_zero_curve(&a_tilde, &b_tilde, n) {
            let c = ScalarProfile::from_samples(-1.0, 1.0, c_samples.clone());
            let d = ScalarProfile::from_samples(-1.0, 1.0, d_samples.clone());
            return Ok(Reparametrization {
                a_tilde,
                b_tilde,
                c,
                d,
                c_samples,
                d_samples,
                residual,
                retries: attempt,
            });
        }
    }
    Err(PlaneError::TrackingStalled {
        retries: cfg.max_retries,
    })
}

/// Tracks `phi(x, y) = a~(x) - b~(y) = 0` through the square; returns the
/// curve resampled to a uniform parameter grid plus the worst residual.
fn track_zero_curve(
    a_tilde: &ScalarProfile,
    b_tilde: &ScalarProfile,
    n: usize,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let phi = |x: f64, y: f64| a_tilde.eval(x) - b_tilde.eval(y);
    let grad_phi = |x: f64, y: f64| (a_tilde.derivative(x), -b_tilde.derivative(y));
    let ds = 1.0 / (4.0 * n as f64);
    let max_steps = 64 * n;

    let mut pts: Vec<(f64, f64)> = vec![(-1.0, -1.0)];
    let (mut x, mut y) = (-1.0f64, -1.0f64);
    let mut prev_tangent = (1.0f64, 1.0f64);
    let mut stall = 0usize;
    for _ in 0..max_steps {
        let (px, py) = grad_phi(x, y);
        // tangent to the level set
        let (mut tx, mut ty) = (-py, px);
        let tn = (tx * tx + ty * ty).sqrt();
        if tn < 1e-12 {
            return None;
        }
        tx /= tn;
        ty /= tn;
        if tx * prev_tangent.0 + ty * prev_tangent.1 < 0.0 {
            tx = -tx;
            ty = -ty;
        }
        prev_tangent = (tx, ty);
        let (mut nx_, mut ny_) = (x + ds * tx, y + ds * ty);
        // one Newton corrector step, then polish while the residual matters
        for _ in 0..3 {
            let f = phi(nx_, ny_);
            if f.abs() <= 1e-10 {
                break;
            }
            let (gx, gy) = grad_phi(nx_, ny_);
            let g2 = gx * gx + gy * gy;
            if g2 < 1e-18 {
                return None;
            }
            nx_ -= f * gx / g2;
            ny_ -= f * gy / g2;
        }
        nx_ = nx_.clamp(-1.0, 1.0);
        ny_ = ny_.clamp(-1.0, 1.0);
        let moved = ((nx_ - x).powi(2) + (ny_ - y).powi(2)).sqrt();
        if moved < ds / 10.0 {
            stall += 1;
            if stall > 20 {
                return None;
            }
        } else {
            stall = 0;
        }
        x = nx_;
        y = ny_;
        pts.push((x, y));
        if (1.0 - x) + (1.0 - y) < 2.0 * ds {
            pts.push((1.0, 1.0));
            // resample to a uniform parameter grid by arc index
            let m = pts.len();
            let count = n + 1;
            let mut c = Vec::with_capacity(count);
            let mut d = Vec::with_capacity(count);
            for k in 0..count {
                let u = k as f64 / (count - 1) as f64 * (m - 1) as f64;
                let i = (u.floor() as usize).min(m - 2);
                let frac = u - i as f64;
                c.push(pts[i].0 * (1.0 - frac) + pts[i + 1].0 * frac);
                d.push(pts[i].1 * (1.0 - frac) + pts[i + 1].1 * frac);
            }
            c[0] = -1.0;
            d[0] = -1.0;
            *c.last_mut().unwrap() = 1.0;
            *d.last_mut().unwrap() = 1.0;
            // polish the resampled points back onto the zero set
            let mut residual = 0.0f64;
            for k in 1..count - 1 {
                for _ in 0..4 {
                    let f = phi(c[k], d[k]);
                    if f.abs() <= 1e-10 {
                        break;
                    }
                    let (gx, gy) = grad_phi(c[k], d[k]);
                    let g2 = gx * gx + gy * gy;
                    if g2 < 1e-18 {
                        break;
                    }
                    c[k] -= f * gx / g2;
                    d[k] -= f * gy / g2;
                }
                residual = residual.max(phi(c[k], d[k]).abs());
            }
            return Some((c, d, residual));
        }
    }
    None
}

/// JSON point list for a curve.
pub fn curve_json(curve: &PlanarCurve) -> String {
    let pts: Vec<Vec<f64>> = curve.points.iter().map(|&(x, y)| vec![x, y]).collect();
    serde_json::to_string(&pts).expect("serializable")
}

/// SVG overlay of a mask and an optional curve.
pub fn mask_svg(grid: &RectGrid, curve: Option<&PlanarCurve>) -> String {
    let scale = (640.0 / grid.nx.max(grid.ny) as f64).min(24.0);
    let (w, h) = (grid.nx as f64 * scale, grid.ny as f64 * scale);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n"
    );
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.at(i, j) {
                svg.push_str(&format!(
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{scale:.1}\" height=\"{scale:.1}\" fill=\"#546e7a\"/>\n",
                    i as f64 * scale,
                    h - (j + 1) as f64 * scale
                ));
            }
        }
    }
    if let Some(c) = curve {
        let (x0, x1, y0, y1) = grid.rect;
        let path: Vec<String> = c
            .points
            .iter()
            .map(|&(x, y)| {
                format!(
                    "{:.1},{:.1}",
                    (x - x0) / (x1 - x0) * w,
                    h - (y - y0) / (y1 - y0) * h
                )
            })
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c62828\" stroke-width=\"2\"/>\n",
            path.join(" ")
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn unit_rect() -> (f64, f64, f64, f64) {
        (0.0, 1.0, 0.0, 1.0)
    }

    fn verify_separation(grid: &RectGrid, sep: &Separation) {
        match sep {
            Separation::Curve(curve) => {
                // endpoints on the vertical sides
                let first = curve.points.first().unwrap();
                let last = curve.points.last().unwrap();
                assert_eq!(first.0, grid.rect.0);
                assert_eq!(last.0, grid.rect.1);
                // interior points are free cell centers
                for &(x, y) in &curve.points[1..curve.points.len() - 1] {
                    let (x0, x1, y0, y1) = grid.rect;
                    let i = ((x - x0) / (x1 - x0) * grid.nx as f64 - 0.5).round() as usize;
                    let j = ((y - y0) / (y1 - y0) * grid.ny as f64 - 0.5).round() as usize;
                    assert!(!grid.at(i, j), "curve enters occupied cell ({i}, {j})");
                }
                // exclusivity: no occupied component joins bottom to top
                assert!(occupied_crossing(grid).is_none());
            }
            Separation::Component(cells) => {
                assert!(cells.iter().any(|&(_, j)| j == 0));
                assert!(cells.iter().any(|&(_, j)| j == grid.ny - 1));
                for &(i, j) in cells {
                    assert!(grid.at(i, j));
                }
                // exclusivity: no free crossing
                assert!(free_crossing(grid).is_none());
            }
        }
    }

    #[test]
    fn empty_mask_yields_curve() {
        let grid = RectGrid::new(unit_rect(), 8, 6, vec![false; 48]);
        let sep = component_or_curve(&grid);
        assert!(matches!(sep, Separation::Curve(_)));
        verify_separation(&grid, &sep);
    }

    #[test]
    fn vertical_strip_yields_component() {
        let mut occupied = vec![false; 9 * 7];
        for j in 0..7 {
            occupied[j * 9 + 4] = true;
        }
        let grid = RectGrid::new(unit_rect(), 9, 7, occupied);
        let sep = component_or_curve(&grid);
        assert!(matches!(sep, Separation::Component(_)));
        verify_separation(&grid, &sep);
    }

    #[test]
    fn two_blobs_admit_threading_curve() {
        // one blob touches only the bottom, one only the top
        let text = "
            0011000000
            0011000000
            0000000000
            0000001100
            0000001100
        ";
        let grid = RectGrid::from_text(unit_rect(), text).unwrap();
        let sep = component_or_curve(&grid);
        assert!(matches!(sep, Separation::Curve(_)));
        verify_separation(&grid, &sep);
    }

    #[test]
    fn duality_on_random_masks() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for trial in 0..1000 {
            let nx = rng.gen_range(3..24);
            let ny = rng.gen_range(3..24);
            let density = rng.gen_range(0.15..0.7);
            let occupied: Vec<bool> = (0..nx * ny).map(|_| rng.gen_bool(density)).collect();
            let grid = RectGrid::new(unit_rect(), nx, ny, occupied);
            let sep = component_or_curve(&grid);
            verify_separation(&grid, &sep);
            let _ = trial;
        }
    }

    #[test]
    fn mask_text_roundtrip_orientation() {
        let text = "10\n00";
        let grid = RectGrid::from_text(unit_rect(), text).unwrap();
        // the '1' is in the TOP row, left column
        assert!(grid.at(0, 1));
        assert!(!grid.at(0, 0));
    }

    #[test]
    fn reparam_identity() {
        let a = ScalarProfile::identity();
        let b = ScalarProfile::identity();
        let rep =
            common_value_reparametrization(&a, &b, 0.01, &ReparamConfig::default()).unwrap();
        assert!(rep.residual < 1e-8, "residual {}", rep.residual);
        // c and d agree up to the tiny construction asymmetry
        for (c, d) in rep.c_samples.iter().zip(&rep.d_samples) {
            assert!((c - d).abs() < 0.05);
        }
        assert_eq!(rep.c_samples[0], -1.0);
        assert_eq!(*rep.c_samples.last().unwrap(), 1.0);
    }

    #[test]
    fn reparam_cubic_matches_exact_branch() {
        let a = ScalarProfile::identity();
        let b = ScalarProfile::new(|t| t * t * t, |t| 3.0 * t * t);
        let eps = 0.01;
        let rep = common_value_reparametrization(&a, &b, eps, &ReparamConfig::default()).unwrap();
        assert!(rep.residual < 1e-8, "residual {}", rep.residual);
        // exact relation for the unperturbed curves is c = d^3
        for (c, d) in rep.c_samples.iter().zip(&rep.d_samples) {
            assert!((c - d * d * d).abs() < 10.0 * eps, "c {c} vs d^3 {}", d * d * d);
        }
    }

    #[test]
    fn reparam_monotone_inverse_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            // random strictly increasing profile through (-1,-1) and (1,1)
            let n = 40;
            let mut increments: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = increments.iter().sum();
            for inc in increments.iter_mut() {
                *inc *= 2.0 / total;
            }
            let mut vals = vec![-1.0];
            for inc in &increments {
                vals.push(vals.last().unwrap() + inc);
            }
            *vals.last_mut().unwrap() = 1.0;
            let b = ScalarProfile::from_samples(-1.0, 1.0, vals);
            let a = ScalarProfile::identity();
            let rep =
                common_value_reparametrization(&a, &b, 0.02, &ReparamConfig::default()).unwrap();
            assert!(rep.residual <= 1e-6, "residual {}", rep.residual);
            // d(t) must equal the monotone inverse of b~ at a~(c(t))
            for k in (0..rep.c_samples.len()).step_by(16) {
                let target = rep.a_tilde.eval(rep.c_samples[k]);
                let mut lo = -1.0;
                let mut hi = 1.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if rep.b_tilde.eval(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let inverse = 0.5 * (lo + hi);
                assert!(
                    (rep.d_samples[k] - inverse).abs() < 1e-6,
                    "tracked {} vs inverse {}",
                    rep.d_samples[k],
                    inverse
                );
            }
        }
    }

    #[test]
    fn reparam_rejects_bad_endpoints() {
        let a = ScalarProfile::constant(0.0);
        let b = ScalarProfile::identity();
        assert!(matches!(
            common_value_reparametrization(&a, &b, 0.01, &ReparamConfig::default()),
            Err(PlaneError::BadEndpoints)
        ));
    }

    #[test]
    fn perturbation_stays_within_eps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let a = ScalarProfile::new(|t| t + 0.3 * (std::f64::consts::PI * t).sin() * (1.0 - t * t), |_| 0.0);
        for eps in [0.05, 0.01] {
            let samples = build_perturbation(&a, eps, 512, eps / 16.0, &mut rng);
            let tilde = ScalarProfile::from_samples(-1.0, 1.0, samples);
            let mut sup = 0.0f64;
            for i in 0..=1000 {
                let t = -1.0 + 2.0 * i as f64 / 1000.0;
                sup = sup.max((tilde.eval(t) - a.eval(t)).abs());
                assert!(tilde.eval(t).abs() <= 1.0);
            }
            assert!(sup < eps, "sup deviation {sup} vs eps {eps}");
            assert_eq!(tilde.eval(-1.0), -1.0);
            assert_eq!(tilde.eval(1.0), 1.0);
            assert!(tilde.derivative(-1.0) > 0.0);
            assert!(tilde.derivative(1.0) > 0.0);
        }
    }
}
