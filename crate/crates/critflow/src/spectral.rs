//! Morse index, signature, and spectral flow of paths of symmetric matrices.
//!
//! Three independent routes to the spectral flow are kept side by side:
//! the endpoint eigenspace formula, a crossing counter along the sampled
//! path, and the truncation-signature difference. Agreement of all three is
//! asserted by the test suites; a disagreement is a bug certificate.

use crate::galerkin::SymmetryOperator;
use crate::linalg::{column_rank, eigen_sym, SymMatrix};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("operator has an eigenvalue within {tol:.3e} of zero (min |eig| = {min_abs:.3e})")]
    DegenerateOperator { tol: f64, min_abs: f64 },
    #[error("crossing near lambda = {lambda} could not be resolved above width {width:.3e}")]
    MaxRefinement { lambda: f64, width: f64 },
    #[error("signature did not stabilize over a window of {window} by n = {n_max}")]
    NotStabilized { n_max: usize, window: usize },
    #[error("spectral flow requires matrices of equal dimension")]
    DimensionMismatch,
}

/// Kernel tolerance: an eigenvalue counts as zero iff `|mu| <= tol`,
/// with the default `1e-8 * (1 + ||M||)`.
pub fn default_tol(m: &SymMatrix) -> f64 {
    1e-8 * (1.0 + m.frob_norm())
}

type PathFn = dyn Fn(f64) -> SymMatrix + Send + Sync;

/// A continuous path `lambda -> symmetric matrix` with a sampling plan.
#[derive(Clone)]
pub struct SymOperatorPath {
    dim: usize,
    at: Arc<PathFn>,
    pub interval: (f64, f64),
    pub samples: usize,
}

impl SymOperatorPath {
    pub fn new(
        dim: usize,
        interval: (f64, f64),
        samples: usize,
        at: impl Fn(f64) -> SymMatrix + Send + Sync + 'static,
    ) -> Self {
        assert!(interval.0 < interval.1, "interval must be nondegenerate");
        assert!(samples >= 2);
        SymOperatorPath {
            dim,
            at: Arc::new(at),
            interval,
            samples,
        }
    }

    pub fn constant(m: SymMatrix, interval: (f64, f64), samples: usize) -> Self {
        let dim = m.dim();
        Self::new(dim, interval, samples, move |_| m.clone())
    }

    /// Piecewise-linear path through equally spaced sample matrices.
    pub fn from_samples(mats: Vec<SymMatrix>, interval: (f64, f64)) -> Self {
        assert!(mats.len() >= 2);
        let dim = mats[0].dim();
        let n = mats.len();
        let samples = n;
        let (a, b) = interval;
        Self::new(dim, interval, samples, move |lambda| {
            let u = ((lambda - a) / (b - a) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
            let i = (u.floor() as usize).min(n - 2);
            let t = u - i as f64;
            SymMatrix::from_fn(dim, |r, c| {
                (1.0 - t) * mats[i].get(r, c) + t * mats[i + 1].get(r, c)
            })
        })
    }

    /// The Hessian-at-origin path of a functional family over `[-1, 1]`.
    pub fn hessian_at_origin(
        family: &crate::functional::FunctionalFamily,
        samples: usize,
    ) -> Self {
        let fam = family.clone();
        let dim = family.dim();
        let origin = vec![0.0; dim];
        Self::new(dim, (-1.0, 1.0), samples, move |lambda| {
            fam.hess(lambda, &origin)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, lambda: f64) -> SymMatrix {
        let m = (self.at)(lambda);
        debug_assert_eq!(m.dim(), self.dim);
        m
    }

    pub fn endpoints(&self) -> (SymMatrix, SymMatrix) {
        (self.at(self.interval.0), self.at(self.interval.1))
    }

    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = self.interval;
        let n = self.samples;
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Sorted eigenvalues at every grid point, for traces and diagnostics.
    pub fn eigen_trace(&self) -> Vec<(f64, Vec<f64>)> {
        self.grid()
            .into_iter()
            .map(|l| (l, eigen_sym(&self.at(l)).eigenvalues))
            .collect()
    }
}

/// Counts of (negative, near-zero, positive) eigenvalues relative to `tol`.
pub fn inertia(m: &SymMatrix, tol: f64) -> (usize, usize, usize) {
    let eigs = eigen_sym(m).eigenvalues;
    let neg = eigs.iter().filter(|&&e| e < -tol).count();
    let pos = eigs.iter().filter(|&&e| e > tol).count();
    (neg, eigs.len() - neg - pos, pos)
}

fn min_abs_eig(m: &SymMatrix) -> f64 {
    eigen_sym(m)
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Morse index: number of eigenvalues below `-tol`. Errors when an
/// eigenvalue lies within `tol` of zero.
pub fn morse_index(m: &SymMatrix, tol: f64) -> Result<usize, SpectralError> {
    let (neg, zero, _) = inertia(m, tol);
    if zero > 0 {
        return Err(SpectralError::DegenerateOperator {
            tol,
            min_abs: min_abs_eig(m),
        });
    }
    Ok(neg)
}

/// Morse index with kernel directions tolerated (and excluded from the count).
pub fn morse_index_kernel_ok(m: &SymMatrix, tol: f64) -> usize {
    inertia(m, tol).0
}

/// Signature: `(#positive) - (#negative)` eigenvalues, i.e.
/// `morse_index(-M) - morse_index(M)`.
pub fn signature(m: &SymMatrix, tol: f64) -> Result<i64, SpectralError> {
    let (neg, zero, pos) = inertia(m, tol);
    if zero > 0 {
        return Err(SpectralError::DegenerateOperator {
            tol,
            min_abs: min_abs_eig(m),
        });
    }
    Ok(pos as i64 - neg as i64)
}

fn signature_kernel_ok(m: &SymMatrix, tol: f64) -> (i64, usize) {
    let (neg, zero, pos) = inertia(m, tol);
    (pos as i64 - neg as i64, zero)
}

/// Spectral flow from endpoint eigenspaces:
/// `dim(V^-(L_a) cap V^+(L_b)) - dim(V^-(L_b) cap V^+(L_a))`,
/// computed through ranks of concatenated eigenvector bases. In finite
/// dimension this equals `morse(L_a) - morse(L_b)`; callers assert the
/// context in which endpoints determine the flow.
pub fn spectral_flow_endpoints(
    la: &SymMatrix,
    lb: &SymMatrix,
    tol: f64,
) -> Result<i64, SpectralError> {
    if la.dim() != lb.dim() {
        return Err(SpectralError::DimensionMismatch);
    }
    let da = eigen_sym(la);
    let db = eigen_sym(lb);
    for d in [&da, &db] {
        if d.eigenvalues.iter().any(|e| e.abs() <= tol) {
            return Err(SpectralError::DegenerateOperator {
                tol,
                min_abs: d.eigenvalues.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min),
            });
        }
    }
    let basis = |d: &crate::linalg::SpectralDecomposition, negative: bool| -> Vec<Vec<f64>> {
        d.eigenvalues
            .iter()
            .zip(&d.eigenvectors)
            .filter(|(e, _)| if negative { **e < -tol } else { **e > tol })
            .map(|(_, v)| v.clone())
            .collect()
    };
    let inter_dim = |u: &[Vec<f64>], w: &[Vec<f64>]| -> i64 {
        // dim(U cap W) = dim U + dim W - dim(U + W)
        let mut joined = u.to_vec();
        joined.extend_from_slice(w);
        let joint = column_rank(&joined, 1e-8);
        u.len() as i64 + w.len() as i64 - joint as i64
    };
    let term1 = inter_dim(&basis(&da, true), &basis(&db, false));
    let term2 = inter_dim(&basis(&db, true), &basis(&da, false));
    Ok(term1 - term2)
}

/// One signed eigenvalue zero-crossing along a path.
#[derive(Clone, Debug, Serialize)]
pub struct Crossing {
    pub lambda: f64,
    /// `+1` for an upward crossing (negative to positive), `-1` downward.
    pub direction: i8,
}

const LOC_WIDTH: f64 = 1e-9;
const PLATEAU_WIDTH: f64 = 1e-6;

fn eigs_resolved(e: &[f64], tol: f64) -> bool {
    e.iter().all(|v| v.abs() > tol)
}

/// Probes the open interval for a sample where no eigenvalue sits within
/// `tol` of zero, nudging away from unlucky spots.
fn resolved_probe(
    path: &SymOperatorPath,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Option<(f64, Vec<f64>)> {
    const FRACTIONS: [f64; 7] = [0.5, 0.55, 0.45, 0.6, 0.4, 0.52, 0.48];
    for c in FRACTIONS {
        let l = lo + c * (hi - lo);
        let e = eigen_sym(&path.at(l)).eigenvalues;
        if eigs_resolved(&e, tol) {
            return Some((l, e));
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn count_interval(
    path: &SymOperatorPath,
    lo: f64,
    e_lo: &[f64],
    hi: f64,
    e_hi: &[f64],
    tol: f64,
    total: &mut i64,
    out: &mut Vec<Crossing>,
) -> Result<(), SpectralError> {
    let changed: Vec<usize> = (0..e_lo.len())
        .filter(|&k| (e_lo[k] < 0.0) != (e_hi[k] < 0.0))
        .collect();
    if changed.is_empty() {
        return Ok(());
    }
    let width = hi - lo;
    let record = |total: &mut i64, out: &mut Vec<Crossing>| {
        for &k in &changed {
            let direction: i8 = if e_lo[k] < 0.0 { 1 } else { -1 };
            *total += direction as i64;
            out.push(Crossing {
                lambda: 0.5 * (lo + hi),
                direction,
            });
        }
    };
    if width <= LOC_WIDTH {
        record(total, out);
        return Ok(());
    }
    match resolved_probe(path, lo, hi, tol) {
        Some((lm, em)) => {
            count_interval(path, lo, e_lo, lm, &em, tol, total, out)?;
            count_interval(path, lm, &em, hi, e_hi, tol, total, out)
        }
        None if width <= PLATEAU_WIDTH => {
            // crossing confined to a sub-microscopic window; location is the
            // midpoint, the sign change is certain from the resolved ends
            record(total, out);
            Ok(())
        }
        None => Err(SpectralError::MaxRefinement {
            lambda: 0.5 * (lo + hi),
            width,
        }),
    }
}

/// Spectral flow by counting signed eigenvalue zero-crossings along the
/// sampled path: upward crossings `+1`, downward `-1`. Sampling refines
/// adaptively near crossings; crossings that cannot be isolated above the
/// minimum width raise `MaxRefinement`.
pub fn spectral_flow_crossings(
    path: &SymOperatorPath,
    tol: f64,
) -> Result<(i64, Vec<Crossing>), SpectralError> {
    let grid = path.grid();
    let eigs: Vec<Vec<f64>> = grid
        .iter()
        .map(|&l| eigen_sym(&path.at(l)).eigenvalues)
        .collect();
    for idx in [0, grid.len() - 1] {
        if !eigs_resolved(&eigs[idx], tol) {
            return Err(SpectralError::DegenerateOperator {
                tol,
                min_abs: eigs[idx].iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min),
            });
        }
    }

    let mut total = 0i64;
    let mut crossings = Vec::new();
    // walk resolved samples; ambiguous interior samples are skipped so each
    // processed interval has decisively signed ends
    let mut anchor = 0usize;
    for i in 1..grid.len() {
        if !eigs_resolved(&eigs[i], tol) {
            continue;
        }
        count_interval(
            path,
            grid[anchor],
            &eigs[anchor],
            grid[i],
            &eigs[i],
            tol,
            &mut total,
            &mut crossings,
        )?;
        anchor = i;
    }
    crossings.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    Ok((total, crossings))
}

/// Spectral flow from the truncation-signature formula
/// `(sign(L_b) - sign(L_a)) / 2`, taken at full dimension.
pub fn spectral_flow_signature_formula(
    la: &SymMatrix,
    lb: &SymMatrix,
    tol: f64,
) -> Result<i64, SpectralError> {
    if la.dim() != lb.dim() {
        return Err(SpectralError::DimensionMismatch);
    }
    let sa = signature(la, tol)?;
    let sb = signature(lb, tol)?;
    debug_assert_eq!((sb - sa) % 2, 0);
    Ok((sb - sa) / 2)
}

/// Result of the truncation-signature stabilization scan.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedSignature {
    pub value: i64,
    /// Smallest truncation index at which the signature becomes constant
    /// over the requested window.
    pub stabilized_at: usize,
    /// Signature of each truncation (`None` when a truncation was too close
    /// to singular to count).
    pub per_truncation: Vec<Option<i64>>,
}

/// Signature of `P_n (J + K) |_{H_n}` for `n = 1..n_max`, returning the value
/// once it is constant over `stability_window` consecutive truncations,
/// together with the stabilization index.
pub fn generalized_signature(
    j: &SymmetryOperator,
    k: &SymMatrix,
    n_max: usize,
    stability_window: usize,
) -> Result<GeneralizedSignature, SpectralError> {
    assert!(n_max >= 1 && stability_window >= 1);
    assert!(
        k.dim() >= 2 * n_max,
        "perturbation matrix must cover the largest truncation"
    );
    let full = j.matrix(k.dim() / 2).add(&k.leading_principal(2 * (k.dim() / 2)));
    let per_truncation: Vec<Option<i64>> = (1..=n_max)
        .map(|n| {
            let ln = full.leading_principal(2 * n);
            let tol = default_tol(&ln);
            let (sig, zeros) = signature_kernel_ok(&ln, tol);
            if zeros > 0 {
                None
            } else {
                Some(sig)
            }
        })
        .collect();
    for start in 0..per_truncation.len() {
        if start + stability_window > per_truncation.len() {
            break;
        }
        let window = &per_truncation[start..start + stability_window];
        if let Some(v) = window[0] {
            if window.iter().all(|w| *w == Some(v)) {
                return Ok(GeneralizedSignature {
                    value: v,
                    stabilized_at: start + 1,
                    per_truncation,
                });
            }
        }
    }
    Err(SpectralError::NotStabilized {
        n_max,
        window: stability_window,
    })
}

/// Spectral flow through generalized signatures of the two endpoints:
/// `(sign_J(J + K_b) - sign_J(J + K_a)) / 2`.
pub fn spectral_flow_generalized(
    j: &SymmetryOperator,
    k_a: &SymMatrix,
    k_b: &SymMatrix,
    n_max: usize,
    stability_window: usize,
) -> Result<i64, SpectralError> {
    let sa = generalized_signature(j, k_a, n_max, stability_window)?;
    let sb = generalized_signature(j, k_b, n_max, stability_window)?;
    Ok((sb.value - sa.value) / 2)
}

/// Both sides of the degree relation `(-1)^spf = sign det(L_a) sign det(L_b)`.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeRelationReport {
    pub spf: i64,
    pub det_sign_a: i64,
    pub det_sign_b: i64,
    pub parity_side: i64,
    pub det_side: i64,
    pub holds: bool,
}

pub fn degree_relation_check(
    path: &SymOperatorPath,
    tol: f64,
) -> Result<DegreeRelationReport, SpectralError> {
    let (la, lb) = path.endpoints();
    let (spf, _) = spectral_flow_crossings(path, tol)?;
    let det_sign = |m: &SymMatrix| -> Result<i64, SpectralError> {
        let mu = morse_index(m, tol)?;
        Ok(if mu % 2 == 0 { 1 } else { -1 })
    };
    let det_sign_a = det_sign(&la)?;
    let det_sign_b = det_sign(&lb)?;
    let parity_side = if spf.rem_euclid(2) == 0 { 1 } else { -1 };
    let det_side = det_sign_a * det_sign_b;
    Ok(DegreeRelationReport {
        spf,
        det_sign_a,
        det_sign_b,
        parity_side,
        det_side,
        holds: parity_side == det_side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::radial_demo_family;

    fn tol_for(m: &SymMatrix) -> f64 {
        default_tol(m)
    }

    #[test]
    fn morse_index_examples() {
        let id5 = SymMatrix::identity(5);
        assert_eq!(morse_index(&id5, tol_for(&id5)).unwrap(), 0);

        let neg = SymMatrix::identity(2).scaled(-4.0);
        assert_eq!(morse_index(&neg, tol_for(&neg)).unwrap(), 2);

        let d = SymMatrix::diagonal(&[-1.0, -1.0, 2.0, 3.0]);
        assert_eq!(morse_index(&d, tol_for(&d)).unwrap(), 2);
    }

    #[test]
    fn morse_index_degenerate() {
        let d = SymMatrix::diagonal(&[0.0, 1.0]);
        assert!(matches!(
            morse_index(&d, 1e-8),
            Err(SpectralError::DegenerateOperator { .. })
        ));
        assert_eq!(morse_index_kernel_ok(&d, 1e-8), 0);
    }

    #[test]
    fn signature_examples() {
        let id4 = SymMatrix::identity(4);
        assert_eq!(signature(&id4, tol_for(&id4)).unwrap(), 4);
        let d = SymMatrix::diagonal(&[1.0, -1.0]);
        assert_eq!(signature(&d, tol_for(&d)).unwrap(), 0);
        let d = SymMatrix::diagonal(&[-1.0, -1.0, 2.0]);
        assert_eq!(signature(&d, tol_for(&d)).unwrap(), -1);
    }

    #[test]
    fn endpoints_flow_examples() {
        let a = SymMatrix::diagonal(&[-1.0, 1.0]);
        assert_eq!(spectral_flow_endpoints(&a, &a, 1e-8).unwrap(), 0);

        let b = SymMatrix::identity(2);
        assert_eq!(spectral_flow_endpoints(&a, &b, 1e-8).unwrap(), 1);

        // demo Hessians at lambda = -1 and 1
        let la = SymMatrix::identity(2).scaled(8.0);
        let lb = SymMatrix::identity(2).scaled(-4.0);
        assert_eq!(spectral_flow_endpoints(&la, &lb, 1e-8).unwrap(), -2);
    }

    #[test]
    fn endpoints_flow_rotated_basis() {
        // V^-(Lb) spanned by (1,1)/sqrt(2): generic subspace positions
        let lb = SymMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { -1.0 });
        let la = SymMatrix::diagonal(&[-1.0, 1.0]);
        let mu_a = morse_index(&la, 1e-8).unwrap() as i64;
        let mu_b = morse_index(&lb, 1e-8).unwrap() as i64;
        assert_eq!(
            spectral_flow_endpoints(&la, &lb, 1e-8).unwrap(),
            mu_a - mu_b
        );
    }

    #[test]
    fn crossings_constant_path() {
        let path = SymOperatorPath::constant(SymMatrix::diagonal(&[2.0, -1.0]), (-1.0, 1.0), 17);
        let (spf, list) = spectral_flow_crossings(&path, 1e-8).unwrap();
        assert_eq!(spf, 0);
        assert!(list.is_empty());
    }

    #[test]
    fn crossings_single_upward() {
        let path = SymOperatorPath::new(2, (-1.0, 1.0), 21, |l| SymMatrix::diagonal(&[l, 1.0]));
        let (spf, list) = spectral_flow_crossings(&path, 1e-8).unwrap();
        assert_eq!(spf, 1);
        assert_eq!(list.len(), 1);
        assert_eq!(list[0].direction, 1);
        assert!(list[0].lambda.abs() < 1e-6);
    }

    #[test]
    fn crossings_demo_hessian_path() {
        let fam = radial_demo_family();
        let path = SymOperatorPath::hessian_at_origin(&fam, 41);
        let (spf, list) = spectral_flow_crossings(&path, 1e-8).unwrap();
        assert_eq!(spf, -2);
        assert_eq!(list.len(), 2);
        // both eigenvalues cross where 6 s(lambda) + 2 = 0
        let expected = (2.0 / std::f64::consts::PI) * (1.0f64 / 3.0).asin();
        for c in &list {
            assert_eq!(c.direction, -1);
            assert!((c.lambda - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn crossings_plateau_errors() {
        // eigenvalue pinned at zero over the middle third, with a sign change
        let path = SymOperatorPath::new(2, (-1.0, 1.0), 31, |l| {
            let ramp = if l < -0.3 {
                l + 0.3
            } else if l > 0.3 {
                l - 0.3
            } else {
                0.0
            };
            SymMatrix::diagonal(&[ramp, 1.0])
        });
        assert!(matches!(
            spectral_flow_crossings(&path, 1e-8),
            Err(SpectralError::MaxRefinement { .. })
        ));
    }

    #[test]
    fn crossings_tangency_without_sign_change_is_zero() {
        let path = SymOperatorPath::new(2, (-1.0, 1.0), 20, |l| {
            SymMatrix::diagonal(&[l * l + 1e-4, 1.0])
        });
        let (spf, list) = spectral_flow_crossings(&path, 1e-8).unwrap();
        assert_eq!(spf, 0);
        assert!(list.is_empty());
    }

    #[test]
    fn signature_formula_matches() {
        let la = SymMatrix::identity(2).scaled(8.0);
        let lb = SymMatrix::identity(2).scaled(-4.0);
        assert_eq!(
            spectral_flow_signature_formula(&la, &lb, 1e-8).unwrap(),
            -2
        );
    }

    #[test]
    fn generalized_signature_zero_perturbation() {
        let j = SymmetryOperator::new(6);
        let k = SymMatrix::zeros(12);
        let gs = generalized_signature(&j, &k, 6, 3).unwrap();
        assert_eq!(gs.value, 0);
        assert_eq!(gs.stabilized_at, 1);
        assert!(gs.per_truncation.iter().all(|s| *s == Some(0)));
    }

    #[test]
    fn generalized_signature_rank_one() {
        // c * e1- (x) e1- with c = 2 flips the first negative direction
        let j = SymmetryOperator::new(6);
        let mut k = SymMatrix::zeros(12);
        k.set(1, 1, 2.0);
        let gs = generalized_signature(&j, &k, 6, 3).unwrap();
        assert_eq!(gs.value, 2);
        assert_eq!(gs.stabilized_at, 1);
    }

    #[test]
    fn generalized_flow_matches_endpoints() {
        let j = SymmetryOperator::new(5);
        let dim = 10;
        let mut ka = SymMatrix::zeros(dim);
        ka.set(1, 1, 0.5); // keeps e1- negative
        let mut kb = SymMatrix::zeros(dim);
        kb.set(1, 1, 2.0); // flips e1-
        let spf_gen = spectral_flow_generalized(&j, &ka, &kb, 5, 2).unwrap();
        let la = j.matrix(5).add(&ka);
        let lb = j.matrix(5).add(&kb);
        let spf_end = spectral_flow_endpoints(&la, &lb, 1e-8).unwrap();
        assert_eq!(spf_gen, spf_end);
        assert_eq!(spf_gen, 1);
    }

    #[test]
    fn degree_relation_examples() {
        let fam = radial_demo_family();
        let path = SymOperatorPath::hessian_at_origin(&fam, 41);
        let rep = degree_relation_check(&path, 1e-8).unwrap();
        assert_eq!(rep.spf, -2);
        assert_eq!(rep.parity_side, 1);
        assert_eq!(rep.det_side, 1);
        assert!(rep.holds);

        let path = SymOperatorPath::new(2, (-1.0, 1.0), 21, |l| SymMatrix::diagonal(&[l, 1.0]));
        let rep = degree_relation_check(&path, 1e-8).unwrap();
        assert_eq!(rep.spf, 1);
        assert_eq!(rep.parity_side, -1);
        assert_eq!(rep.det_side, -1);
        assert!(rep.holds);

        let path = SymOperatorPath::constant(SymMatrix::diagonal(&[3.0, -2.0]), (0.0, 1.0), 9);
        let rep = degree_relation_check(&path, 1e-8).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.parity_side, 1);
    }

    #[test]
    fn inertia_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.gen_range(2..8);
            let m = SymMatrix::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
            let tol = default_tol(&m);
            let (neg, zero, pos) = inertia(&m, tol);
            assert_eq!(neg + zero + pos, n);
            // morse(M) + morse(-M) + dim ker = dim
            let m_neg = m.scaled(-1.0);
            let (neg2, zero2, _) = inertia(&m_neg, tol);
            assert_eq!(zero, zero2);
            assert_eq!(neg + neg2 + zero, n);
        }
    }

    #[test]
    fn morse_scaling_invariance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(2..7);
            let m = SymMatrix::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let tol = default_tol(&m);
            if inertia(&m, tol).1 > 0 {
                continue;
            }
            let c: f64 = rng.gen_range(0.1..10.0);
            let scaled = m.scaled(c);
            assert_eq!(
                morse_index_kernel_ok(&m, tol),
                morse_index_kernel_ok(&scaled, default_tol(&scaled))
            );
        }
    }
}
