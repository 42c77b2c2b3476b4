//! Scans the critical-pair set in the `(lambda, y)`-plane, links connected
//! components of nontrivial pairs, classifies them against the two global
//! alternatives, verifies the bifurcation-theorem hypotheses numerically,
//! and assembles the quantitative demo report.

use crate::functional::{FunctionalFamily, ScalarProfile};
use crate::linalg::norm;
use crate::solver::{self, SolveConfig};
use crate::spectral::{self, default_tol, SymOperatorPath};
use crate::topology::{self, BettiVector, GridSpec};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use crate::solver::CriticalPoint as SlicePoint;

#[derive(Debug, Error)]
pub enum BifurcateError {
    #[error(
        "critical value {max_abs_value:.6} exceeds the window height {window_r}; increase the window"
    )]
    WindowTooSmall { max_abs_value: f64, window_r: f64 },
    #[error("topology error: {0}")]
    Topology(#[from] topology::TopologyError),
    #[error("spectral error: {0}")]
    Spectral(#[from] spectral::SpectralError),
}

/// How seeds are laid out per slice.
#[derive(Clone, Debug)]
pub enum SeedPlan {
    /// Concentric rings (2D families only).
    Rings { radii: Vec<f64>, angles: usize },
    /// Amplitudes along given directions, plus all pairwise sums.
    Directions {
        directions: Vec<Vec<f64>>,
        amplitudes: Vec<f64>,
    },
    Explicit(Vec<Vec<f64>>),
}

impl SeedPlan {
    /// The default ring plan: radii `0.25, 0.5, ..., 2.5`, 16 angles.
    pub fn default_rings() -> Self {
        SeedPlan::Rings {
            radii: (1..=10).map(|k| 0.25 * k as f64).collect(),
            angles: 16,
        }
    }

    /// Materializes the seed list (the origin is always included).
    pub fn seeds(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; dim]];
        match self {
            SeedPlan::Rings { radii, angles } => {
                assert_eq!(dim, 2, "ring seeds require a planar family");
                for &r in radii {
                    for k in 0..*angles {
                        let th = std::f64::consts::TAU * k as f64 / *angles as f64;
                        out.push(vec![r * th.cos(), r * th.sin()]);
                    }
                }
            }
            SeedPlan::Directions {
                directions,
                amplitudes,
            } => {
                for d in directions {
                    assert_eq!(d.len(), dim);
                    for &a in amplitudes {
                        out.push(d.iter().map(|v| a * v).collect());
                    }
                }
            }
            SeedPlan::Explicit(seeds) => {
                for s in seeds {
                    assert_eq!(s.len(), dim);
                    out.push(s.clone());
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub lambda_interval: (f64, f64),
    pub slices: usize,
    pub window_r: f64,
    pub seeds: SeedPlan,
    pub newton_tol: f64,
    pub dedup_radius: f64,
    pub trivial_radius: f64,
    pub value_tol: f64,
    pub max_window_doublings: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            lambda_interval: (-1.0, 1.0),
            slices: 400,
            window_r: 5.0,
            seeds: SeedPlan::default_rings(),
            newton_tol: 1e-9,
            dedup_radius: 1e-4,
            trivial_radius: 1e-5,
            value_tol: 1e-8,
            max_window_doublings: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairKind {
    Trivial,
    NonTrivial,
}

/// A point of the critical-pair set with its witness.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalPair {
    pub lambda: f64,
    pub y: f64,
    pub witness: Vec<f64>,
    pub grad_norm: f64,
    pub kind: PairKind,
    /// `df/dlambda` at the witness: the slope of the value branch.
    pub drive: f64,
    /// Index of the lambda slice this pair was found on.
    pub slice: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Window {
    pub lambda: (f64, f64),
    pub r: f64,
}

/// Scan result: all pairs, plus connected components of the nontrivial ones.
#[derive(Clone, Debug)]
pub struct BranchSet {
    pub pairs: Vec<CriticalPair>,
    /// Indices into `pairs`, nontrivial pairs only, one vector per component,
    /// ordered by (min lambda, min y).
    pub components: Vec<Vec<usize>>,
    pub window: Window,
    pub slice_spacing: f64,
    /// Components that reach the top or bottom of the window.
    pub boundary_flags: Vec<bool>,
    pub dropped_out_of_window: usize,
    pub nonconverged_seeds: usize,
}

impl BranchSet {
    pub fn nontrivial_count(&self) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.kind == PairKind::NonTrivial)
            .count()
    }

    pub fn largest_component(&self) -> Option<usize> {
        (0..self.components.len()).max_by_key(|&i| self.components[i].len())
    }

    pub fn component_pairs(&self, component: usize) -> impl Iterator<Item = &CriticalPair> {
        self.components[component].iter().map(|&i| &self.pairs[i])
    }

    /// Components whose closure meets the trivial line (some pair's witness
    /// collapses toward the origin, or its value toward zero, at the
    /// resolution of one slice).
    pub fn components_meeting_trivial_line(&self) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&c| {
                self.component_pairs(c).any(|p| {
                    norm(&p.witness) < 0.1
                        || p.y.abs() <= 2.0 * self.slice_spacing * (1.0 + p.drive.abs())
                })
            })
            .collect()
    }
}

/// Gradient zeros of one slice from a fixed seed list, deduplicated.
pub fn critical_points_slice(
    family: &FunctionalFamily,
    lambda: f64,
    seeds: &[Vec<f64>],
    newton_tol: f64,
) -> Vec<SlicePoint> {
    let cfg = SolveConfig {
        tol: newton_tol,
        ..SolveConfig::default()
    };
    solver::multistart(family, lambda, seeds, &cfg)
}

struct SliceScan {
    pairs: Vec<CriticalPair>,
    dropped: usize,
    nonconverged: usize,
}

fn scan_slice(
    family: &FunctionalFamily,
    lambda: f64,
    slice: usize,
    seeds: &[Vec<f64>],
    cfg: &ScanConfig,
) -> SliceScan {
    let solve_cfg = SolveConfig {
        tol: cfg.newton_tol,
        dedup_radius: cfg.dedup_radius,
        ..SolveConfig::default()
    };
    let points = solver::multistart(family, lambda, seeds, &solve_cfg);
    let nonconverged = seeds.len().saturating_sub(points.len());

    // dedupe witnesses into (lambda, y) pairs
    let mut pairs: Vec<CriticalPair> = Vec::new();
    let mut dropped = 0usize;
    for pt in points {
        let y = family.eval(lambda, &pt.x);
        if y.abs() > cfg.window_r {
            dropped += 1;
            continue;
        }
        let kind = if norm(&pt.x) <= cfg.trivial_radius && y.abs() <= cfg.value_tol {
            PairKind::Trivial
        } else {
            PairKind::NonTrivial
        };
        let value_dedup = 1e-7 * (1.0 + y.abs());
        match pairs.iter_mut().find(|q| (q.y - y).abs() <= value_dedup && q.kind == kind) {
            Some(existing) => {
                if pt.grad_norm < existing.grad_norm {
                    existing.witness = pt.x.clone();
                    existing.grad_norm = pt.grad_norm;
                    existing.y = y;
                }
            }
            None => pairs.push(CriticalPair {
                lambda,
                y,
                witness: pt.x.clone(),
                grad_norm: pt.grad_norm,
                kind,
                drive: 0.0,
                slice,
            }),
        }
    }
    // trivial-line completeness: the origin pair is present whenever the
    // origin is critical for this slice
    let origin = vec![0.0; family.dim()];
    if norm(&family.grad(lambda, &origin)) <= cfg.newton_tol
        && !pairs.iter().any(|p| p.kind == PairKind::Trivial)
    {
        let y = family.eval(lambda, &origin);
        pairs.push(CriticalPair {
            lambda,
            y,
            witness: origin,
            grad_norm: 0.0,
            kind: PairKind::Trivial,
            drive: 0.0,
            slice,
        });
    }
    for p in pairs.iter_mut() {
        p.drive = family.lambda_grad(lambda, &p.witness);
    }
    pairs.sort_by(|a, b| a.y.partial_cmp(&b.y).unwrap());
    SliceScan {
        pairs,
        dropped,
        nonconverged,
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn link_radius(spacing: f64, p: &CriticalPair, q: &CriticalPair) -> f64 {
    2.0 * spacing * (1.0 + p.drive.abs().max(q.drive.abs()))
}

/// Slice-wise scan of the critical-pair set over the lambda window.
///
/// Nontrivial pairs in the same or adjacent slices are linked when their
/// values sit within the slope-aware linking radius; the resulting
/// components realize the sampled closure of the nontrivial pair set.
/// Errors with `WindowTooSmall` when a critical value falls outside the
/// window height.
pub fn scan_critical_pairs(
    family: &FunctionalFamily,
    cfg: &ScanConfig,
) -> Result<BranchSet, BifurcateError> {
    let branch = scan_clipped(family, cfg);
    if branch.dropped_out_of_window > 0 {
        let max_abs = branch
            .pairs
            .iter()
            .map(|p| p.y.abs())
            .fold(cfg.window_r, f64::max);
        return Err(BifurcateError::WindowTooSmall {
            max_abs_value: max_abs,
            window_r: cfg.window_r,
        });
    }
    Ok(branch)
}

/// Like [`scan_critical_pairs`] but doubles the window height (up to
/// `max_window_doublings`) when values escape; a final clipped scan is
/// returned with its boundary components flagged.
pub fn scan_with_expansion(
    family: &FunctionalFamily,
    cfg: &ScanConfig,
) -> Result<BranchSet, BifurcateError> {
    let mut attempt = cfg.clone();
    for _ in 0..=cfg.max_window_doublings {
        match scan_critical_pairs(family, &attempt) {
            Ok(b) => return Ok(b),
            Err(BifurcateError::WindowTooSmall { .. }) => {
                attempt.window_r *= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(scan_clipped(family, &attempt))
}

fn scan_clipped(family: &FunctionalFamily, cfg: &ScanConfig) -> BranchSet {
    assert!(cfg.slices >= 2, "need at least two slices");
    let (lo, hi) = cfg.lambda_interval;
    let spacing = (hi - lo) / (cfg.slices - 1) as f64;
    let seeds = cfg.seeds.seeds(family.dim());
    let grid: Vec<f64> = (0..cfg.slices)
        .map(|i| lo + spacing * i as f64)
        .collect();

    let slices: Vec<SliceScan> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| scan_slice(family, lambda, i, &seeds, cfg))
        .collect();

    let dropped: usize = slices.iter().map(|s| s.dropped).sum();
    let nonconverged: usize = slices.iter().map(|s| s.nonconverged).sum();
    let mut pairs: Vec<CriticalPair> = Vec::new();
    let mut slice_ranges: Vec<(usize, usize)> = Vec::new();
    for s in slices {
        let start = pairs.len();
        pairs.extend(s.pairs);
        slice_ranges.push((start, pairs.len()));
    }

    // union-find over nontrivial pairs, same-slice and adjacent-slice links
    let nontrivial: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.kind == PairKind::NonTrivial)
        .map(|(i, _)| i)
        .collect();
    let rank: std::collections::HashMap<usize, usize> = nontrivial
        .iter()
        .enumerate()
        .map(|(r, &i)| (i, r))
        .collect();
    let mut uf = UnionFind::new(nontrivial.len());
    for s in 0..slice_ranges.len() {
        let (a0, a1) = slice_ranges[s];
        for i in a0..a1 {
            if pairs[i].kind != PairKind::NonTrivial {
                continue;
            }
            for j in (i + 1)..a1 {
                if pairs[j].kind != PairKind::NonTrivial {
                    continue;
                }
                if (pairs[i].y - pairs[j].y).abs() <= link_radius(spacing, &pairs[i], &pairs[j]) {
                    uf.union(rank[&i], rank[&j]);
                }
            }
            if s + 1 < slice_ranges.len() {
                let (b0, b1) = slice_ranges[s + 1];
                for j in b0..b1 {
                    if pairs[j].kind != PairKind::NonTrivial {
                        continue;
                    }
                    if (pairs[i].y - pairs[j].y).abs()
                        <= link_radius(spacing, &pairs[i], &pairs[j])
                    {
                        uf.union(rank[&i], rank[&j]);
                    }
                }
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (r, &i) in nontrivial.iter().enumerate() {
        groups.entry(uf.find(r)).or_default().push(i);
    }
    let mut components: Vec<Vec<usize>> = groups.into_values().collect();
    components.sort_by(|a, b| {
        let key = |c: &Vec<usize>| {
            let min_l = c
                .iter()
                .map(|&i| pairs[i].lambda)
                .fold(f64::INFINITY, f64::min);
            let min_y = c.iter().map(|&i| pairs[i].y).fold(f64::INFINITY, f64::min);
            (min_l, min_y)
        };
        key(a).partial_cmp(&key(b)).unwrap()
    });

    let boundary_flags: Vec<bool> = components
        .iter()
        .map(|c| {
            c.iter().any(|&i| {
                pairs[i].y.abs()
                    >= cfg.window_r - link_radius(spacing, &pairs[i], &pairs[i])
            }) || (dropped > 0
                && c.iter().any(|&i| pairs[i].y.abs() >= 0.9 * cfg.window_r))
        })
        .collect();

    BranchSet {
        pairs,
        components,
        window: Window {
            lambda: cfg.lambda_interval,
            r: cfg.window_r,
        },
        slice_spacing: spacing,
        boundary_flags,
        dropped_out_of_window: dropped,
        nonconverged_seeds: nonconverged,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Alternative {
    IntersectsLambdaBoundary,
    UnboundedInWindow,
    Neither,
}

/// Classifies a component against the two global alternatives. `Neither` for
/// a family whose hypotheses all verified is a theorem-contradiction red
/// flag; the CLI turns it into a dedicated exit code.
pub fn classify_alternatives(branch: &BranchSet, component: usize) -> Alternative {
    let (lo, hi) = branch.window.lambda;
    let spacing = branch.slice_spacing;
    let reaches_lambda = branch.component_pairs(component).any(|p| {
        p.lambda >= hi - spacing - 1e-12 || p.lambda <= lo + spacing + 1e-12
    });
    if reaches_lambda {
        return Alternative::IntersectsLambdaBoundary;
    }
    if branch.boundary_flags[component] {
        return Alternative::UnboundedInWindow;
    }
    Alternative::Neither
}

/// Landmarks of a branch component, extracted from the sampled pairs.
#[derive(Clone, Debug, Serialize)]
pub struct Landmarks {
    /// Lambda where the branch attaches to the trivial line (witness radius
    /// extrapolated to zero).
    pub bifurcation_lambda: Option<f64>,
    /// Leftmost turning point `(lambda, y)` of a two-sheet component.
    pub fold: Option<(f64, f64)>,
    /// `(lambda, witness radius)` where the lower value sheet crosses zero.
    pub zero_crossing: Option<(f64, f64)>,
    /// `(lambda, y)` at the far lambda edge of the component (lowest value).
    pub terminal: Option<(f64, f64)>,
}

pub fn branch_landmarks(branch: &BranchSet, component: usize) -> Landmarks {
    let mut pairs: Vec<&CriticalPair> = branch.component_pairs(component).collect();
    pairs.sort_by(|a, b| {
        (a.lambda, a.y)
            .partial_cmp(&(b.lambda, b.y))
            .unwrap()
    });

    // bifurcation: fit lambda as a polynomial in the witness radius over the
    // smallest radii and read off the intercept
    let mut small: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| {
            let r = norm(&p.witness);
            r > 1e-5 && r < 0.5
        })
        .map(|p| (norm(&p.witness), p.lambda))
        .collect();
    small.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    small.truncate(4);
    let bifurcation_lambda = match small.len() {
        0 => None,
        1 => Some(small[0].1),
        2 => {
            let (r0, l0) = small[0];
            let (r1, l1) = small[1];
            Some(l0 - r0 * (l1 - l0) / (r1 - r0))
        }
        _ => Some(poly_fit_intercept(&small)),
    };

    // group component pairs per slice
    let mut per_slice: std::collections::BTreeMap<usize, Vec<&CriticalPair>> = Default::default();
    for p in &pairs {
        per_slice.entry(p.slice).or_default().push(p);
    }

    // fold: the gap between the two sheets closes like (lambda - lambda_f)^{3/2},
    // so (gap)^{2/3} is linear in lambda near the fold
    let two_sheet: Vec<(f64, f64, f64)> = per_slice
        .values()
        .filter(|v| v.len() >= 2)
        .map(|v| {
            let ys: Vec<f64> = v.iter().map(|p| p.y).collect();
            let top = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let bot = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            (v[0].lambda, top - bot, 0.5 * (top + bot))
        })
        .collect();
    let fold = if two_sheet.len() >= 2 {
        let (l1, g1, m1) = two_sheet[0];
        let (l2, g2, m2) = two_sheet[1];
        let (t1, t2) = (g1.powf(2.0 / 3.0), g2.powf(2.0 / 3.0));
        if (t2 - t1).abs() > 1e-14 && l2 > l1 {
            let lf = l1 - t1 * (l2 - l1) / (t2 - t1);
            let slope = (m2 - m1) / (l2 - l1);
            let yf = m1 - slope * (l1 - lf);
            Some((lf, yf))
        } else {
            Some((l1, m1))
        }
    } else {
        None
    };

    // zero crossing of the lower sheet
    let lower: Vec<(f64, f64, f64)> = per_slice
        .values()
        .map(|v| {
            let p = v
                .iter()
                .min_by(|a, b| a.y.partial_cmp(&b.y).unwrap())
                .unwrap();
            (p.lambda, p.y, norm(&p.witness))
        })
        .collect();
    let mut zero_crossing = None;
    for w in lower.windows(2) {
        let (la, ya, ra) = w[0];
        let (lb, yb, rb) = w[1];
        if (ya > 0.0 && yb <= 0.0) || (ya >= 0.0 && yb < 0.0) || (ya < 0.0 && yb >= 0.0) {
            let t = ya / (ya - yb);
            zero_crossing = Some((la + t * (lb - la), ra + t * (rb - ra)));
            break;
        }
    }

    let terminal = per_slice.values().last().map(|v| {
        let p = v
            .iter()
            .min_by(|a, b| a.y.partial_cmp(&b.y).unwrap())
            .unwrap();
        (p.lambda, p.y)
    });

    Landmarks {
        bifurcation_lambda,
        fold,
        zero_crossing,
        terminal,
    }
}

/// Least-squares quadratic fit of `lambda(r)` returning `lambda(0)`.
fn poly_fit_intercept(points: &[(f64, f64)]) -> f64 {
    // normal equations for a + b r + c r^2
    let n = points.len() as f64;
    let (mut sr, mut sr2, mut sr3, mut sr4) = (0.0, 0.0, 0.0, 0.0);
    let (mut sl, mut srl, mut sr2l) = (0.0, 0.0, 0.0);
    for &(r, l) in points {
        sr += r;
        sr2 += r * r;
        sr3 += r * r * r;
        sr4 += r * r * r * r;
        sl += l;
        srl += r * l;
        sr2l += r * r * l;
    }
    let m = crate::linalg::SymMatrix::from_rows(
        &[
            vec![n, sr, sr2],
            vec![sr, sr2, sr3],
            vec![sr2, sr3, sr4],
        ],
        1e-9 * (1.0 + sr4),
    )
    .expect("normal equations are symmetric");
    match crate::linalg::solve_dense(&m, &[sl, srl, sr2l]) {
        Some(coef) => coef[0],
        None => {
            // degenerate spread: fall back to the linear fit
            let (r0, l0) = points[0];
            let (r1, l1) = points[points.len() - 1];
            l0 - r0 * (l1 - l0) / (r1 - r0)
        }
    }
}

#[derive(Clone, Debug)]
pub struct HypothesisConfig {
    pub seed: u64,
    pub ps_starts: usize,
    pub ps_steps: usize,
    /// `N` bounding the value window and the lambda range of the drive check.
    pub value_bound: f64,
    /// Sampled sup of the drive above this is reported as unbounded.
    pub drive_cap: f64,
    pub endpoint_eps: f64,
    pub seeds: SeedPlan,
    pub newton_tol: f64,
    pub grid: GridSpec,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        HypothesisConfig {
            seed: 42,
            ps_starts: 48,
            ps_steps: 400,
            value_bound: 8.0,
            drive_cap: 1e6,
            endpoint_eps: 0.05,
            seeds: SeedPlan::default_rings(),
            newton_tol: 1e-9,
            grid: GridSpec {
                h: 0.05,
                ..GridSpec::default()
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PsEvidence {
    pub starts: usize,
    pub escaped: usize,
    pub worst_cluster_diameter: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriveEvidence {
    pub sampled_sup: f64,
    pub cap: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonbifEvidence {
    pub eps: f64,
    pub min_distance_found: f64,
    pub nontrivial_pairs_in_disks: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEvidence {
    pub left: BettiVector,
    pub right: BettiVector,
    pub verdict: String,
}

/// Numeric evidence for the four hypotheses of the global alternative.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub ps_ok: bool,
    pub ps_evidence: PsEvidence,
    pub drive_bounded_ok: bool,
    pub drive_evidence: DriveEvidence,
    pub nonbif_endpoints_ok: bool,
    pub nonbif_evidence: NonbifEvidence,
    pub pair_inequivalent_ok: bool,
    pub pair_evidence: Option<PairEvidence>,
    pub all_ok: bool,
}

/// Samples the four hypotheses: compactness of gradient-small sequences,
/// boundedness of the drive on value-bounded sets, clean neighborhoods of
/// the endpoint trivial pairs, and inequivalence of the endpoint sublevel
/// pairs. Failures are reported, never thrown.
pub fn verify_hypotheses(family: &FunctionalFamily, cfg: &HypothesisConfig) -> HypothesisReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);

    // (i) drive random starts toward small gradients; witnesses must stay
    // interior and the iterate tails must cluster
    let mut escaped = 0usize;
    let mut worst_diameter = 0.0f64;
    for _ in 0..cfg.ps_starts {
        let lambda = rng.gen_range(-1.0..=1.0);
        let mut x = family.domain().sample(&mut rng);
        let mut tail: Vec<Vec<f64>> = Vec::new();
        for step in 0..cfg.ps_steps {
            let g = family.grad(lambda, &x);
            let ng = norm(&g);
            if ng < 1e-12 {
                break;
            }
            let t = 0.05 * (1.0f64).min(1.0 / ng);
            for (xi, gi) in x.iter_mut().zip(&g) {
                *xi -= t * gi;
            }
            if step + 8 >= cfg.ps_steps {
                tail.push(x.clone());
            }
        }
        let inset_ok = family
            .domain()
            .lo
            .iter()
            .zip(&family.domain().hi)
            .zip(&x)
            .all(|((lo, hi), xi)| {
                let margin = 0.03 * (hi - lo);
                *xi >= lo + margin && *xi <= hi - margin
            });
        if !inset_ok {
            escaped += 1;
        }
        for a in 0..tail.len() {
            for b in (a + 1)..tail.len() {
                worst_diameter = worst_diameter.max(crate::linalg::dist(&tail[a], &tail[b]));
            }
        }
    }
    let ps_ok = escaped == 0 && worst_diameter < 0.05;

    // (ii) sampled sup of |drive| over the value-bounded set
    let mut sup_drive = 0.0f64;
    let mut drive_samples = 0usize;
    let n_bound = cfg.value_bound;
    let lambda_steps = 33;
    let x_steps = 25;
    for li in 0..lambda_steps {
        let lambda = -n_bound + 2.0 * n_bound * li as f64 / (lambda_steps - 1) as f64;
        for xi in 0..x_steps {
            for xj in 0..x_steps {
                let u = [
                    xi as f64 / (x_steps - 1) as f64,
                    xj as f64 / (x_steps - 1) as f64,
                ];
                let x = if family.dim() == 2 {
                    family.domain().lerp(&u)
                } else {
                    let mut full = vec![0.5; family.dim()];
                    full[0] = u[0];
                    full[1 % family.dim()] = u[1];
                    family.domain().lerp(&full)
                };
                let v = family.eval(lambda, &x);
                if v.abs() <= n_bound {
                    drive_samples += 1;
                    sup_drive = sup_drive.max(family.lambda_grad(lambda, &x).abs());
                }
            }
        }
    }
    let drive_bounded_ok = sup_drive.is_finite() && sup_drive <= cfg.drive_cap;

    // (iii) no nontrivial pair inside the endpoint disks
    let seeds = cfg.seeds.seeds(family.dim());
    let mut min_distance = f64::INFINITY;
    let mut in_disk = 0usize;
    for center in [-1.0f64, 1.0] {
        for k in 0..7 {
            let lambda = center + cfg.endpoint_eps * (k as f64 / 3.0 - 1.0);
            let pts = critical_points_slice(family, lambda, &seeds, cfg.newton_tol);
            for p in pts {
                let y = family.eval(lambda, &p.x);
                let trivial = norm(&p.x) <= 1e-5 && y.abs() <= 1e-8;
                if trivial {
                    continue;
                }
                let d = ((lambda - center).powi(2) + y * y).sqrt();
                min_distance = min_distance.min(d);
                if d < cfg.endpoint_eps {
                    in_disk += 1;
                }
            }
        }
    }
    let nonbif_endpoints_ok = in_disk == 0;

    // (iv) homology certificate for the endpoint sublevel pairs
    let (pair_inequivalent_ok, pair_evidence) = match topology::pair_inequivalence_certificate(
        family,
        -1.0,
        1.0,
        cfg.endpoint_eps,
        &cfg.grid,
    ) {
        Ok(topology::PairComparison::Inequivalent { left, right }) => (
            true,
            Some(PairEvidence {
                left,
                right,
                verdict: "inequivalent".into(),
            }),
        ),
        Ok(topology::PairComparison::Indistinguishable { betti }) => (
            false,
            Some(PairEvidence {
                left: betti,
                right: betti,
                verdict: "indistinguishable".into(),
            }),
        ),
        Err(e) => (
            false,
            Some(PairEvidence {
                left: BettiVector::default(),
                right: BettiVector::default(),
                verdict: format!("error: {e}"),
            }),
        ),
    };

    let all_ok = ps_ok && drive_bounded_ok && nonbif_endpoints_ok && pair_inequivalent_ok;
    HypothesisReport {
        ps_ok,
        ps_evidence: PsEvidence {
            starts: cfg.ps_starts,
            escaped,
            worst_cluster_diameter: worst_diameter,
        },
        drive_bounded_ok,
        drive_evidence: DriveEvidence {
            sampled_sup: sup_drive,
            cap: cfg.drive_cap,
            samples: drive_samples,
        },
        nonbif_endpoints_ok,
        nonbif_evidence: NonbifEvidence {
            eps: cfg.endpoint_eps,
            min_distance_found: min_distance,
            nontrivial_pairs_in_disks: in_disk,
        },
        pair_inequivalent_ok,
        pair_evidence,
        all_ok,
    }
}

/// Value curves separating the scanned branch from above and below, built
/// from per-slice envelopes with clearance, dilation, and smoothing. The
/// curves weave around the nontrivial components and keep clear of the
/// trivial value zero by `eps`.
#[derive(Clone)]
pub struct SeparatingCurves {
    pub a: ScalarProfile,
    pub b: ScalarProfile,
    /// True when both curves equal the endpoint baseline `+-eps` at
    /// `lambda = +-1` (the configuration the contradiction pipeline needs).
    pub endpoint_pinned: bool,
}

pub fn separating_value_curves(branch: &BranchSet, eps: f64, clearance: f64) -> SeparatingCurves {
    let (lo, hi) = branch.window.lambda;
    let slices = ((hi - lo) / branch.slice_spacing).round() as usize + 1;
    let mut upper = vec![f64::NEG_INFINITY; slices];
    let mut lower = vec![f64::INFINITY; slices];
    for p in &branch.pairs {
        if p.kind != PairKind::NonTrivial {
            continue;
        }
        upper[p.slice] = upper[p.slice].max(p.y);
        lower[p.slice] = lower[p.slice].min(p.y);
    }
    // dilate by a few slices so smoothing cannot re-enter the branch
    let w = 3usize;
    let dilated_max: Vec<f64> = (0..slices)
        .map(|i| {
            (i.saturating_sub(w)..=(i + w).min(slices - 1))
                .map(|j| upper[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let dilated_min: Vec<f64> = (0..slices)
        .map(|i| {
            (i.saturating_sub(w)..=(i + w).min(slices - 1))
                .map(|j| lower[j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let b_raw: Vec<f64> = dilated_max
        .iter()
        .map(|&u| {
            if u.is_finite() {
                (u + clearance).max(eps)
            } else {
                eps
            }
        })
        .collect();
    let a_raw: Vec<f64> = dilated_min
        .iter()
        .map(|&l| {
            if l.is_finite() {
                (l - clearance).min(-eps)
            } else {
                -eps
            }
        })
        .collect();
    let smooth = |raw: &[f64]| -> Vec<f64> {
        let k = 2i64;
        (0..raw.len() as i64)
            .map(|i| {
                let mut acc = 0.0;
                let mut count = 0.0;
                for j in (i - k).max(0)..=(i + k).min(raw.len() as i64 - 1) {
                    acc += raw[j as usize];
                    count += 1.0;
                }
                acc / count
            })
            .collect()
    };
    let b_samples = smooth(&b_raw);
    let a_samples = smooth(&a_raw);
    let endpoint_pinned = [0, slices - 1].iter().all(|&i| {
        (b_samples[i] - eps).abs() < 0.5 * clearance && (a_samples[i] + eps).abs() < 0.5 * clearance
    });
    SeparatingCurves {
        a: ScalarProfile::from_samples(lo, hi, a_samples),
        b: ScalarProfile::from_samples(lo, hi, b_samples),
        endpoint_pinned,
    }
}

/// One-shot quantitative pipeline for the radial demo family.
#[derive(Clone, Debug, Serialize)]
pub struct EversionReport {
    pub schema_version: u32,
    pub spf_endpoints: i64,
    pub spf_crossings: i64,
    pub spf_signature: i64,
    pub morse_low: usize,
    pub morse_high: usize,
    pub degree: spectral::DegreeRelationReport,
    pub circle_radius: f64,
    pub circle_value: f64,
    pub circle_samples: usize,
    pub landmarks: Landmarks,
    pub betti_low: BettiVector,
    pub betti_high: BettiVector,
    pub classification: Alternative,
    pub hypotheses_all_ok: bool,
}

pub fn demo_eversion_report() -> Result<EversionReport, BifurcateError> {
    demo_eversion_report_with(400, 0.02)
}

pub fn demo_eversion_report_with(
    slices: usize,
    grid_h: f64,
) -> Result<EversionReport, BifurcateError> {
    let family = crate::functional::radial_demo_family();

    let path = SymOperatorPath::hessian_at_origin(&family, 81);
    let (la, lb) = path.endpoints();
    let tol = default_tol(&la).max(default_tol(&lb));
    let spf_endpoints = spectral::spectral_flow_endpoints(&la, &lb, tol)?;
    let (spf_crossings, _) = spectral::spectral_flow_crossings(&path, tol)?;
    let spf_signature = spectral::spectral_flow_signature_formula(&la, &lb, tol)?;
    let morse_low = spectral::morse_index(&la, tol)?;
    let morse_high = spectral::morse_index(&lb, tol)?;
    let degree = spectral::degree_relation_check(&path, tol)?;

    // the nontrivial critical circle of the right endpoint slice
    let seeds = SeedPlan::default_rings().seeds(2);
    let pts = critical_points_slice(&family, 1.0, &seeds, 1e-9);
    let circle: Vec<&SlicePoint> = pts.iter().filter(|p| norm(&p.x) > 1e-5).collect();
    let circle_samples = circle.len();
    let circle_radius =
        circle.iter().map(|p| norm(&p.x)).sum::<f64>() / circle_samples.max(1) as f64;
    let circle_value = family.eval(1.0, circle.first().map(|p| p.x.as_slice()).unwrap_or(&[0.0, 0.0]));

    let cfg = ScanConfig {
        slices,
        ..ScanConfig::default()
    };
    let branch = scan_with_expansion(&family, &cfg)?;
    let main = branch.largest_component().expect("demo branch present");
    let landmarks = branch_landmarks(&branch, main);
    let classification = classify_alternatives(&branch, main);

    let grid = GridSpec {
        h: grid_h,
        ..GridSpec::default()
    };
    let (betti_low, betti_high) =
        match topology::pair_inequivalence_certificate(&family, -1.0, 1.0, 0.05, &grid)? {
            topology::PairComparison::Inequivalent { left, right } => (left, right),
            topology::PairComparison::Indistinguishable { betti } => (betti, betti),
        };

    let hypotheses = verify_hypotheses(&family, &HypothesisConfig::default());

    Ok(EversionReport {
        schema_version: 1,
        spf_endpoints,
        spf_crossings,
        spf_signature,
        morse_low,
        morse_high,
        degree,
        circle_radius,
        circle_value,
        circle_samples,
        landmarks,
        betti_low,
        betti_high,
        classification,
        hypotheses_all_ok: hypotheses.all_ok,
    })
}

/// CSV of all pairs: lambda, y, witness coordinates, gradient residual,
/// kind, component id (-1 for trivial pairs).
pub fn pairs_csv(branch: &BranchSet, dim: usize) -> String {
    let mut comp_of = vec![-1i64; branch.pairs.len()];
    for (c, members) in branch.components.iter().enumerate() {
        for &i in members {
            comp_of[i] = c as i64;
        }
    }
    let mut out = String::from("lambda,y");
    for i in 1..=dim {
        out.push_str(&format!(",witness_{i}"));
    }
    out.push_str(",grad_norm,kind,component_id\n");
    for (i, p) in branch.pairs.iter().enumerate() {
        out.push_str(&format!("{:.12},{:.12}", p.lambda, p.y));
        for w in &p.witness {
            out.push_str(&format!(",{w:.12}"));
        }
        let kind = match p.kind {
            PairKind::Trivial => "trivial",
            PairKind::NonTrivial => "nontrivial",
        };
        out.push_str(&format!(",{:.3e},{kind},{}\n", p.grad_norm, comp_of[i]));
    }
    out
}

/// SVG portrait of the `(lambda, y)` window: trivial line, components in
/// distinct colors, endpoint disks.
pub fn portrait_svg(branch: &BranchSet) -> String {
    let (lo, hi) = branch.window.lambda;
    let r = branch.window.r;
    let (w, h) = (720.0, 480.0);
    let sx = |lambda: f64| (lambda - lo) / (hi - lo) * (w - 60.0) + 30.0;
    let sy = |y: f64| h - ((y + r) / (2.0 * r) * (h - 60.0) + 30.0);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-width=\"1\"/>\n",
        sx(lo),
        sy(0.0),
        sx(hi),
        sy(0.0)
    ));
    let palette = ["#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085"];
    for (c, members) in branch.components.iter().enumerate() {
        let color = palette[c % palette.len()];
        for &i in members {
            let p = &branch.pairs[i];
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.6\" fill=\"{color}\"/>\n",
                sx(p.lambda),
                sy(p.y)
            ));
        }
    }
    for center in [lo, hi] {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"8\" fill=\"none\" stroke=\"#555\" stroke-dasharray=\"3 2\"/>\n",
            sx(center),
            sy(0.0)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
