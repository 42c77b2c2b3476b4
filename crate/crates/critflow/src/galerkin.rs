//! Strongly-indefinite machinery: the symmetry operator on an interleaved
//! plus/minus basis, compact-range perturbation families, finite truncations,
//! stabilization diagnostics, and the spectral-flow-driven demo.
//!
//! The basis is interleaved as `e1+, e1-, e2+, e2-, ...` so every truncation
//! `H_n` (the span of the first `2n` vectors) is invariant under the symmetry
//! and carries equally many plus and minus directions.

use crate::bifurcate::{self, ScanConfig, SeedPlan};
use crate::functional::{DomainBox, FunctionalFamily, ScalarProfile};
use crate::linalg::{dot, norm, SymMatrix};
use crate::spectral::{
    self, default_tol, generalized_signature, SpectralError, SymOperatorPath,
};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GalerkinError {
    #[error("truncation index {n} exceeds the configured maximum {max}")]
    TruncationTooLarge { n: usize, max: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("scan failed: {0}")]
    Scan(#[from] bifurcate::BifurcateError),
}

/// Diagonal involution `diag(+1, -1, +1, -1, ...)` in the interleaved basis.
#[derive(Clone, Debug)]
pub struct SymmetryOperator {
    pairs: usize,
}

impl SymmetryOperator {
    pub fn new(pairs: usize) -> Self {
        assert!(pairs >= 1);
        SymmetryOperator { pairs }
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn dim(&self) -> usize {
        2 * self.pairs
    }

    #[inline]
    pub fn sign(index: usize) -> f64 {
        if index % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Diagonal signs on `H_n`.
    pub fn signs(&self, n: usize) -> Vec<f64> {
        (0..2 * n).map(Self::sign).collect()
    }

    /// Matrix of the symmetry restricted to `H_n`.
    pub fn matrix(&self, n: usize) -> SymMatrix {
        SymMatrix::diagonal(&self.signs(n))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| Self::sign(i) * v)
            .collect()
    }

    /// Interleaved index of the basis vector `e_k^-` (1-based mode `k`).
    pub fn minus_index(k: usize) -> usize {
        2 * (k - 1) + 1
    }
}

type Scalar1 = dyn Fn(f64) -> f64 + Send + Sync;

/// A scalar nonlinearity with two derivatives; the per-direction profile of
/// a compact perturbation.
#[derive(Clone)]
pub struct RhoProfile {
    f: Arc<Scalar1>,
    d1: Arc<Scalar1>,
    d2: Arc<Scalar1>,
}

impl RhoProfile {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RhoProfile {
            f: Arc::new(f),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    /// `1 - cos u`: bounded derivative, vanishing at zero to first order,
    /// unit curvature.
    pub fn one_minus_cos() -> Self {
        RhoProfile::new(|u| 1.0 - u.cos(), |u| u.sin(), |u| u.cos())
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn deriv(&self, u: f64) -> f64 {
        (self.d1)(u)
    }

    pub fn second_deriv(&self, u: f64) -> f64 {
        (self.d2)(u)
    }
}

/// Gradient perturbation with finite-dimensional (or enveloped) range:
/// the potential is `sum_k kappa_k(lambda) rho_k(<x, d_k>)` over the carrier
/// directions `d_k`, so the full functional is
/// `f(lambda, x) = 1/2 <Jx, x> + sum_k kappa_k(lambda) rho_k(<x, d_k>)`.
#[derive(Clone)]
pub struct CompactPerturbationFamily {
    directions: Vec<Vec<f64>>,
    rho: Vec<RhoProfile>,
    kappa: Vec<ScalarProfile>,
}

impl CompactPerturbationFamily {
    pub fn new(
        directions: Vec<Vec<f64>>,
        rho: Vec<RhoProfile>,
        kappa: Vec<ScalarProfile>,
    ) -> Self {
        assert_eq!(directions.len(), rho.len());
        assert_eq!(directions.len(), kappa.len());
        CompactPerturbationFamily {
            directions,
            rho,
            kappa,
        }
    }

    pub fn carrier_count(&self) -> usize {
        self.directions.len()
    }

    /// Representation length in mode pairs.
    pub fn representation_pairs(&self) -> usize {
        self.directions
            .iter()
            .map(|d| d.len().div_ceil(2))
            .max()
            .unwrap_or(0)
    }

    fn truncated_direction(&self, k: usize, dim: usize) -> Vec<f64> {
        let mut d = vec![0.0; dim];
        for (i, &v) in self.directions[k].iter().take(dim).enumerate() {
            d[i] = v;
        }
        d
    }

    /// Hessian contribution at the origin on `H_n`.
    pub fn hessian_bump(&self, lambda: f64, n: usize) -> SymMatrix {
        let dim = 2 * n;
        let mut m = SymMatrix::zeros(dim);
        for k in 0..self.carrier_count() {
            let d = self.truncated_direction(k, dim);
            let c = self.kappa[k].eval(lambda) * self.rho[k].second_deriv(0.0);
            m.add_outer(&d, c);
        }
        m
    }

    /// Uniform bound on the gradient perturbation, assuming `|rho'| <= 1`
    /// (true for the cosine profile): `sum_k sup|kappa_k| ||d_k||` sampled
    /// over `lambda in [-1, 1]`.
    pub fn gradient_bound(&self) -> f64 {
        (0..self.carrier_count())
            .map(|k| {
                let sup_kappa = (0..=40)
                    .map(|i| self.kappa[k].eval(-1.0 + i as f64 / 20.0).abs())
                    .fold(0.0, f64::max);
                sup_kappa * norm(&self.directions[k])
            })
            .sum()
    }
}

/// Which carrier directions have mass beyond the truncation.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationInfo {
    pub n: usize,
    pub truncated_directions: Vec<usize>,
    /// Norm kept inside the truncation, per flagged direction.
    pub retained_mass: Vec<f64>,
}

/// The `2n`-dimensional restriction of the strongly-indefinite functional.
/// Directions reaching beyond `H_n` are genuinely projected and flagged.
pub fn truncate(
    j: &SymmetryOperator,
    k: &CompactPerturbationFamily,
    n: usize,
) -> Result<(FunctionalFamily, TruncationInfo), GalerkinError> {
    if n > j.pairs() {
        return Err(GalerkinError::TruncationTooLarge { n, max: j.pairs() });
    }
    let dim = 2 * n;
    let directions: Vec<Vec<f64>> = (0..k.carrier_count())
        .map(|i| k.truncated_direction(i, dim))
        .collect();
    let mut truncated_directions = Vec::new();
    let mut retained_mass = Vec::new();
    for (i, full) in k.directions.iter().enumerate() {
        let outside: f64 = full.iter().skip(dim).map(|v| v * v).sum();
        if outside > 0.0 {
            truncated_directions.push(i);
            retained_mass.push(norm(&directions[i]));
        }
    }
    let info = TruncationInfo {
        n,
        truncated_directions,
        retained_mass,
    };

    let rho = k.rho.clone();
    let kappa = k.kappa.clone();
    let d_eval = directions.clone();
    let eval = move |lambda: f64, x: &[f64]| {
        let mut v = 0.0;
        for (i, xi) in x.iter().enumerate() {
            v += 0.5 * SymmetryOperator::sign(i) * xi * xi;
        }
        for (k_idx, d) in d_eval.iter().enumerate() {
            v += kappa[k_idx].eval(lambda) * rho[k_idx].eval(dot(x, d));
        }
        v
    };
    let rho_g = k.rho.clone();
    let kappa_g = k.kappa.clone();
    let d_grad = directions.clone();
    let grad = move |lambda: f64, x: &[f64]| {
        let mut g: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, xi)| SymmetryOperator::sign(i) * xi)
            .collect();
        for (k_idx, d) in d_grad.iter().enumerate() {
            let c = kappa_g[k_idx].eval(lambda) * rho_g[k_idx].deriv(dot(x, d));
            for (gi, di) in g.iter_mut().zip(d) {
                *gi += c * di;
            }
        }
        g
    };
    let rho_h = k.rho.clone();
    let kappa_h = k.kappa.clone();
    let d_hess = directions.clone();
    let hess = move |lambda: f64, x: &[f64]| {
        let mut m = SymMatrix::diagonal(
            &(0..x.len())
                .map(SymmetryOperator::sign)
                .collect::<Vec<_>>(),
        );
        for (k_idx, d) in d_hess.iter().enumerate() {
            let c = kappa_h[k_idx].eval(lambda) * rho_h[k_idx].second_deriv(dot(x, d));
            m.add_outer(d, c);
        }
        m
    };
    let rho_l = k.rho.clone();
    let kappa_l = k.kappa.clone();
    let d_l = directions;
    let lambda_grad = move |lambda: f64, x: &[f64]| {
        d_l.iter()
            .enumerate()
            .map(|(k_idx, d)| kappa_l[k_idx].derivative(lambda) * rho_l[k_idx].eval(dot(x, d)))
            .sum()
    };

    let family = FunctionalFamily::from_eval(
        format!("indefinite-truncation-{n}"),
        dim,
        DomainBox::symmetric(dim, 3.0),
        eval,
    )
    .with_grad(grad)
    .with_hess(hess)
    .with_lambda_grad(lambda_grad);
    Ok((family, info))
}

/// The cosine demo: excited minus-modes `e_k^-` for `k <= modes`, profile
/// `1 - cos`, modulation `1 + lambda`. The Hessian path at the origin has
/// exactly `modes` eigenvalues crossing zero upward at `lambda = 0`.
pub fn demo_cosine_family(modes: usize, representation_pairs: usize) -> CompactPerturbationFamily {
    assert!(modes >= 1 && representation_pairs >= modes);
    let dim = 2 * representation_pairs;
    let directions: Vec<Vec<f64>> = (1..=modes)
        .map(|k| {
            let mut d = vec![0.0; dim];
            d[SymmetryOperator::minus_index(k)] = 1.0;
            d
        })
        .collect();
    let rho = vec![RhoProfile::one_minus_cos(); modes];
    let kappa = vec![ScalarProfile::new(|l| 1.0 + l, |_| 1.0); modes];
    CompactPerturbationFamily::new(directions, rho, kappa)
}

/// A single carrier spread over infinitely many minus-modes with coefficient
/// envelope `2^{-k}` (normalized), represented up to `representation_pairs`.
pub fn decaying_carrier_family(representation_pairs: usize) -> CompactPerturbationFamily {
    let dim = 2 * representation_pairs;
    let mut d = vec![0.0; dim];
    let scale = 3.0f64.sqrt();
    for k in 1..=representation_pairs {
        d[SymmetryOperator::minus_index(k)] = scale * 0.5f64.powi(k as i32);
    }
    CompactPerturbationFamily::new(
        vec![d],
        vec![RhoProfile::one_minus_cos()],
        vec![ScalarProfile::new(|l| 1.0 + l, |_| 1.0)],
    )
}

fn truncation_seed_plan(k: &CompactPerturbationFamily, dim: usize) -> SeedPlan {
    let mut directions: Vec<Vec<f64>> = Vec::new();
    let units: Vec<Vec<f64>> = (0..k.carrier_count())
        .map(|i| {
            let d = k.truncated_direction(i, dim);
            let n = norm(&d).max(1e-12);
            d.iter().map(|v| v / n).collect()
        })
        .collect();
    for u in &units {
        directions.push(u.clone());
    }
    for a in 0..units.len() {
        for b in (a + 1)..units.len() {
            let combo: Vec<f64> = units[a]
                .iter()
                .zip(&units[b])
                .map(|(x, y)| (x + y) / 2.0f64.sqrt())
                .collect();
            directions.push(combo);
        }
    }
    SeedPlan::Directions {
        directions,
        amplitudes: vec![0.5, 1.0, 1.5, 1.9, 2.3],
    }
}

fn scan_config_for_truncation(k: &CompactPerturbationFamily, dim: usize, slices: usize) -> ScanConfig {
    ScanConfig {
        slices,
        seeds: truncation_seed_plan(k, dim),
        ..ScanConfig::default()
    }
}

/// Per-truncation stabilization evidence: endpoint signatures, clean
/// neighborhoods of `(+-1, 0)`, and the drift of the terminal branch value.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizationReport {
    pub n_range: Vec<usize>,
    pub sign_low: Vec<Option<i64>>,
    pub sign_high: Vec<Option<i64>>,
    pub stabilized_at_low: usize,
    pub stabilized_at_high: usize,
    pub generalized_sign_low: i64,
    pub generalized_sign_high: i64,
    pub spectral_flow: i64,
    /// Nontrivial pairs found within the endpoint disks, per truncation.
    pub endpoint_pair_counts: Vec<usize>,
    /// Terminal branch value `y_n(1)` per truncation (None when the scan
    /// found no nontrivial pair at the right edge).
    pub terminal_values: Vec<Option<f64>>,
}

/// Runs the truncation diagnostics over `n_range` (ascending).
pub fn stabilization_diagnostics(
    j: &SymmetryOperator,
    k: &CompactPerturbationFamily,
    n_range: &[usize],
    endpoint_eps: f64,
) -> Result<StabilizationReport, GalerkinError> {
    assert!(!n_range.is_empty());
    let n_max = *n_range.last().unwrap();
    assert!(n_range.windows(2).all(|w| w[0] < w[1]));

    let k_low = k.hessian_bump(-1.0, j.pairs().max(n_max));
    let k_high = k.hessian_bump(1.0, j.pairs().max(n_max));
    let gs_low = generalized_signature(j, &k_low, n_max, 2)?;
    let gs_high = generalized_signature(j, &k_high, n_max, 2)?;
    let spectral_flow = (gs_high.value - gs_low.value) / 2;

    let mut endpoint_pair_counts = Vec::new();
    let mut terminal_values = Vec::new();
    for &n in n_range {
        let (family, _) = truncate(j, k, n)?;
        let cfg = scan_config_for_truncation(k, 2 * n, 41);
        let seeds = cfg.seeds.seeds(2 * n);

        // endpoint disks: slices within eps of +-1, nontrivial values within eps
        let mut near_count = 0usize;
        for center in [-1.0f64, 1.0] {
            for step in 0..5 {
                let lambda = center + (step as f64 / 4.0 - 0.5) * endpoint_eps;
                let pts = bifurcate::critical_points_slice(&family, lambda, &seeds, cfg.newton_tol);
                for p in &pts {
                    let y = family.eval(lambda, &p.x);
                    let nontrivial =
                        norm(&p.x) > cfg.trivial_radius || y.abs() > cfg.value_tol;
                    if nontrivial && y.abs() < endpoint_eps {
                        near_count += 1;
                    }
                }
            }
        }
        endpoint_pair_counts.push(near_count);

        // terminal value at lambda = 1: smallest nontrivial critical value
        let pts = bifurcate::critical_points_slice(&family, 1.0, &seeds, cfg.newton_tol);
        let mut best: Option<f64> = None;
        for p in &pts {
            let y = family.eval(1.0, &p.x);
            if norm(&p.x) > cfg.trivial_radius && y.abs() > cfg.value_tol {
                best = Some(match best {
                    Some(b) if b.abs() <= y.abs() => b,
                    _ => y,
                });
            }
        }
        terminal_values.push(best);
    }

    Ok(StabilizationReport {
        n_range: n_range.to_vec(),
        sign_low: gs_low.per_truncation.clone(),
        sign_high: gs_high.per_truncation.clone(),
        stabilized_at_low: gs_low.stabilized_at,
        stabilized_at_high: gs_high.stabilized_at,
        generalized_sign_low: gs_low.value,
        generalized_sign_high: gs_high.value,
        spectral_flow,
        endpoint_pair_counts,
        terminal_values,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IndefiniteHypotheses {
    pub endpoints_nondegenerate: bool,
    pub gradient_identity_max_residual: f64,
    pub witness_bound: f64,
    pub witnesses_within_bound: bool,
    pub drive_sup: f64,
    pub drive_bounded: bool,
    pub spectral_flow_nonzero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndefiniteReport {
    pub modes: usize,
    pub truncation_pairs: usize,
    pub spf_crossings: i64,
    pub spf_endpoints: i64,
    pub spf_generalized: i64,
    pub stabilization_n: usize,
    pub degree: spectral::DegreeRelationReport,
    pub hypotheses: IndefiniteHypotheses,
    pub bifurcation_lambda: Option<f64>,
    pub per_mode_value: Option<f64>,
    pub witness_amplitude: Option<f64>,
    pub branch_reaches_boundary: bool,
}

/// Full strongly-indefinite pipeline on the cosine demo.
pub fn strongly_indefinite_demo(modes: usize) -> Result<IndefiniteReport, GalerkinError> {
    assert!(modes >= 1);
    let pairs = modes + 2;
    let j = SymmetryOperator::new(pairs);
    let k = demo_cosine_family(modes, pairs);
    let (family, _) = truncate(&j, &k, pairs)?;
    let dim = 2 * pairs;

    // spectral flow of the Hessian path, three routes
    let path = SymOperatorPath::hessian_at_origin(&family, 81);
    let (la, lb) = path.endpoints();
    let tol = default_tol(&la).max(default_tol(&lb));
    let (spf_crossings, _) = spectral_flow_crossings_wrap(&path, tol)?;
    let spf_endpoints = spectral::spectral_flow_endpoints(&la, &lb, tol)?;
    let gs_low = generalized_signature(&j, &k.hessian_bump(-1.0, pairs), pairs, 2)?;
    let gs_high = generalized_signature(&j, &k.hessian_bump(1.0, pairs), pairs, 2)?;
    let spf_generalized = (gs_high.value - gs_low.value) / 2;
    let degree = spectral::degree_relation_check(&path, tol)?;

    // hypotheses
    let endpoints_nondegenerate = spectral::morse_index(&la, tol).is_ok()
        && spectral::morse_index(&lb, tol).is_ok();
    let bound = k.gradient_bound() + 1.0;
    let mut max_residual = 0.0f64;
    let mut witnesses_ok = true;
    let mut drive_sup = 0.0f64;
    {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let lambda = rng.gen_range(-1.0..=1.0);
            let x = family.domain().sample(&mut rng);
            // gradient identity x = J grad + J K(lambda, x), with
            // K = Jx - grad by definition
            let g = family.grad(lambda, &x);
            let jx = j.apply(&x);
            let kvec: Vec<f64> = jx.iter().zip(&g).map(|(a, b)| a - b).collect();
            let reconstructed: Vec<f64> = j
                .apply(&g)
                .iter()
                .zip(j.apply(&kvec))
                .map(|(a, b)| a + b)
                .collect();
            let residual = x
                .iter()
                .zip(&reconstructed)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            max_residual = max_residual.max(residual);
            if norm(&g) <= 1.0 && norm(&x) > bound {
                witnesses_ok = false;
            }
            drive_sup = drive_sup.max(family.lambda_grad(lambda, &x).abs());
        }
    }
    let hypotheses = IndefiniteHypotheses {
        endpoints_nondegenerate,
        gradient_identity_max_residual: max_residual,
        witness_bound: bound,
        witnesses_within_bound: witnesses_ok,
        drive_sup,
        drive_bounded: drive_sup.is_finite() && drive_sup <= 4.0 * modes as f64 + 1.0,
        spectral_flow_nonzero: spf_crossings != 0,
    };

    // scan the truncation and extract branch data
    let cfg = scan_config_for_truncation(&k, dim, 201);
    let branch = bifurcate::scan_with_expansion(&family, &cfg)?;
    let mut bifurcation_lambda = None;
    let mut per_mode_value = None;
    let mut witness_amplitude = None;
    let mut branch_reaches_boundary = false;
    if let Some(main) = branch.largest_component() {
        let lm = bifurcate::branch_landmarks(&branch, main);
        bifurcation_lambda = lm.bifurcation_lambda;
        branch_reaches_boundary = matches!(
            bifurcate::classify_alternatives(&branch, main),
            bifurcate::Alternative::IntersectsLambdaBoundary
        );
        // per-mode value: smallest nontrivial value at the right edge
        let (_, hi) = cfg.lambda_interval;
        let edge = branch
            .component_pairs(main)
            .filter(|p| (p.lambda - hi).abs() < 1e-9)
            .map(|p| p.y)
            .fold(None, |acc: Option<f64>, y| match acc {
                Some(a) if a.abs() <= y.abs() => Some(a),
                _ => Some(y),
            });
        per_mode_value = edge;
        if edge.is_some() {
            witness_amplitude = branch
                .component_pairs(main)
                .filter(|p| (p.lambda - hi).abs() < 1e-9 && (Some(p.y) == edge))
                .map(|p| norm(&p.witness))
                .next();
        }
    }

    Ok(IndefiniteReport {
        modes,
        truncation_pairs: pairs,
        spf_crossings,
        spf_endpoints,
        spf_generalized,
        stabilization_n: gs_high.stabilized_at,
        degree,
        hypotheses,
        bifurcation_lambda,
        per_mode_value,
        witness_amplitude,
        branch_reaches_boundary,
    })
}

fn spectral_flow_crossings_wrap(
    path: &SymOperatorPath,
    tol: f64,
) -> Result<(i64, Vec<spectral::Crossing>), SpectralError> {
    spectral::spectral_flow_crossings(path, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_is_involution_and_balanced() {
        let j = SymmetryOperator::new(4);
        for n in 1..=4 {
            let m = j.matrix(n);
            // J^2 = I
            for i in 0..2 * n {
                for l in 0..2 * n {
                    let mut v = 0.0;
                    for t in 0..2 * n {
                        v += m.get(i, t) * m.get(t, l);
                    }
                    let want = if i == l { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-14);
                }
            }
            let signs = j.signs(n);
            let plus = signs.iter().filter(|s| **s > 0.0).count();
            assert_eq!(plus, n);
        }
    }

    #[test]
    fn truncate_pure_quadratic() {
        let j = SymmetryOperator::new(3);
        let k = CompactPerturbationFamily::new(vec![], vec![], vec![]);
        let (fam, info) = truncate(&j, &k, 3).unwrap();
        assert!(info.truncated_directions.is_empty());
        let x = [0.5, -0.25, 0.0, 1.0, 0.0, 0.0];
        // 1/2 (x1^2 - x2^2 + x3^2 - ...) for any lambda
        let want = 0.5 * (0.25 - 0.0625 + 0.0 - 1.0);
        assert!((fam.eval(0.3, &x) - want).abs() < 1e-14);
        assert_eq!(fam.eval(-0.7, &[0.0; 6]), 0.0);
    }

    #[test]
    fn rank_two_hessian_formula() {
        let j = SymmetryOperator::new(3);
        let k = demo_cosine_family(2, 3);
        let (fam, _) = truncate(&j, &k, 3).unwrap();
        for lambda in [-1.0, -0.5, 0.0, 0.8, 1.0] {
            let h = fam.hess(lambda, &[0.0; 6]);
            let mut want = j.matrix(3);
            for mode in 1..=2 {
                let idx = SymmetryOperator::minus_index(mode);
                want.set(idx, idx, -1.0 + (1.0 + lambda));
            }
            for r in 0..6 {
                for c in 0..6 {
                    assert!((h.get(r, c) - want.get(r, c)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn truncation_standing_assumption() {
        let j = SymmetryOperator::new(3);
        let k = demo_cosine_family(2, 3);
        let (fam, _) = truncate(&j, &k, 2).unwrap();
        for lambda in [-1.0, 0.0, 0.4, 1.0] {
            assert_eq!(fam.eval(lambda, &[0.0; 4]), 0.0);
            assert_eq!(norm(&fam.grad(lambda, &[0.0; 4])), 0.0);
        }
    }

    #[test]
    fn decaying_carrier_is_flagged_when_truncated() {
        let j = SymmetryOperator::new(8);
        let k = decaying_carrier_family(8);
        let (_, info) = truncate(&j, &k, 3).unwrap();
        assert_eq!(info.truncated_directions, vec![0]);
        assert!(info.retained_mass[0] < 1.0);
        let (_, info_full) = truncate(&j, &k, 8).unwrap();
        assert!(info_full.truncated_directions.is_empty());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let j = SymmetryOperator::new(3);
        let k = demo_cosine_family(2, 3);
        let (fam, _) = truncate(&j, &k, 3).unwrap();
        let report =
            crate::functional::finite_difference_check(&fam, 60, 1e-5, 5).unwrap();
        assert!(report.max_grad_dev < 1e-6, "{report:?}");
        assert!(report.max_hess_dev < 1e-5, "{report:?}");
        assert!(report.max_lambda_grad_dev < 1e-7, "{report:?}");
    }
}
