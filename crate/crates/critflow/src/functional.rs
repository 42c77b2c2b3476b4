//! Parameterized functionals `f(lambda, x)` on box domains, with gradient,
//! Hessian and lambda-derivative access, plus the built-in reference families
//! used throughout the toolkit.
//!
//! Built-in families carry closed-form derivatives; families built from a
//! bare evaluator (including manifest-loaded ones) get central finite
//! differences installed automatically with step `1e-5 * (1 + ||x||)`.

use crate::linalg::{norm, SymMatrix};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

pub mod expr;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("evaluation returned a non-finite value at lambda={lambda}, x={x:?}")]
    NonFiniteValue { lambda: f64, x: Vec<f64> },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
}

/// Axis-aligned box in R^d.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn symmetric(dim: usize, half_width: f64) -> Self {
        DomainBox {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Point at box-relative coordinates `u in [0,1]^d`.
    pub fn lerp(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(t, (lo, hi))| lo + t * (hi - lo))
            .collect()
    }

    pub fn sample(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| rng.gen_range(*lo..=*hi))
            .collect()
    }

    pub fn shifted(&self, delta: f64) -> Self {
        DomainBox {
            lo: self.lo.iter().map(|v| v + delta).collect(),
            hi: self.hi.iter().map(|v| v + delta).collect(),
        }
    }
}

type EvalFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;
type HessFn = dyn Fn(f64, &[f64]) -> SymMatrix + Send + Sync;

/// A parameterized functional with derivative access.
///
/// All handles are pure and safe to call concurrently; the scanner and the
/// homology grids parallelize over them.
#[derive(Clone)]
pub struct FunctionalFamily {
    name: String,
    dim: usize,
    domain: DomainBox,
    eval: Arc<EvalFn>,
    grad: Arc<GradFn>,
    hess: Arc<HessFn>,
    lambda_grad: Arc<EvalFn>,
}

impl std::fmt::Debug for FunctionalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionalFamily")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

fn fd_step(x: &[f64]) -> f64 {
    1e-5 * (1.0 + norm(x))
}

impl FunctionalFamily {
    /// Builds a family from a bare evaluator; gradient, Hessian and the
    /// lambda-derivative fall back to central finite differences.
    pub fn from_eval(
        name: impl Into<String>,
        dim: usize,
        domain: DomainBox,
        eval: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let eval: Arc<EvalFn> = Arc::new(eval);
        let e1 = eval.clone();
        let grad: Arc<GradFn> = Arc::new(move |lambda, x| {
            let h = fd_step(x);
            let mut xp = x.to_vec();
            (0..x.len())
                .map(|i| {
                    xp[i] = x[i] + h;
                    let fp = e1(lambda, &xp);
                    xp[i] = x[i] - h;
                    let fm = e1(lambda, &xp);
                    xp[i] = x[i];
                    (fp - fm) / (2.0 * h)
                })
                .collect()
        });
        let e2 = eval.clone();
        let hess: Arc<HessFn> = Arc::new(move |lambda, x| {
            let h = fd_step(x);
            let n = x.len();
            let f0 = e2(lambda, x);
            let mut xp = x.to_vec();
            SymMatrix::from_fn(n, |i, j| {
                if i == j {
                    xp[i] = x[i] + h;
                    let fp = e2(lambda, &xp);
                    xp[i] = x[i] - h;
                    let fm = e2(lambda, &xp);
                    xp[i] = x[i];
                    (fp - 2.0 * f0 + fm) / (h * h)
                } else {
                    xp[i] = x[i] + h;
                    xp[j] = x[j] + h;
                    let fpp = e2(lambda, &xp);
                    xp[j] = x[j] - h;
                    let fpm = e2(lambda, &xp);
                    xp[i] = x[i] - h;
                    xp[j] = x[j] + h;
                    let fmp = e2(lambda, &xp);
                    xp[j] = x[j] - h;
                    let fmm = e2(lambda, &xp);
                    xp[i] = x[i];
                    xp[j] = x[j];
                    (fpp - fpm - fmp + fmm) / (4.0 * h * h)
                }
            })
        });
        let e3 = eval.clone();
        let lambda_grad: Arc<EvalFn> = Arc::new(move |lambda, x| {
            let h = 1e-5 * (1.0 + lambda.abs());
            (e3(lambda + h, x) - e3(lambda - h, x)) / (2.0 * h)
        });
        FunctionalFamily {
            name: name.into(),
            dim,
            domain,
            eval,
            grad,
            hess,
            lambda_grad,
        }
    }

    pub fn with_grad(
        mut self,
        grad: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.grad = Arc::new(grad);
        self
    }

    pub fn with_hess(
        mut self,
        hess: impl Fn(f64, &[f64]) -> SymMatrix + Send + Sync + 'static,
    ) -> Self {
        self.hess = Arc::new(hess);
        self
    }

    pub fn with_lambda_grad(
        mut self,
        lg: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.lambda_grad = Arc::new(lg);
        self
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn eval(&self, lambda: f64, x: &[f64]) -> f64 {
        (self.eval)(lambda, x)
    }

    pub fn grad(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        (self.grad)(lambda, x)
    }

    pub fn hess(&self, lambda: f64, x: &[f64]) -> SymMatrix {
        (self.hess)(lambda, x)
    }

    /// The value `df/dlambda` at `(lambda, x)`.
    pub fn lambda_grad(&self, lambda: f64, x: &[f64]) -> f64 {
        (self.lambda_grad)(lambda, x)
    }

    /// The family `(lambda, x) -> f(-lambda, x)`, used by the backward flows.
    pub fn reversed(&self) -> FunctionalFamily {
        let f = self.clone();
        let g = self.clone();
        let h = self.clone();
        let l = self.clone();
        FunctionalFamily {
            name: format!("{}-reversed", self.name),
            dim: self.dim,
            domain: self.domain.clone(),
            eval: Arc::new(move |lambda, x| f.eval(-lambda, x)),
            grad: Arc::new(move |lambda, x| g.grad(-lambda, x)),
            hess: Arc::new(move |lambda, x| h.hess(-lambda, x)),
            lambda_grad: Arc::new(move |lambda, x| -l.lambda_grad(-lambda, x)),
        }
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A scalar curve with a derivative handle; houses level curves and
/// modulation profiles.
#[derive(Clone)]
pub struct ScalarProfile {
    eval: Arc<ScalarFn>,
    derivative: Arc<ScalarFn>,
}

impl std::fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ScalarProfile")
    }
}

impl ScalarProfile {
    pub fn new(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarProfile {
            eval: Arc::new(eval),
            derivative: Arc::new(derivative),
        }
    }

    /// Finite-difference derivative fallback.
    pub fn from_fn(eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let e = Arc::new(eval);
        let e2 = e.clone();
        ScalarProfile {
            eval: e,
            derivative: Arc::new(move |t| {
                let h = 1e-6 * (1.0 + t.abs());
                (e2(t + h) - e2(t - h)) / (2.0 * h)
            }),
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarProfile::new(move |_| c, |_| 0.0)
    }

    pub fn identity() -> Self {
        ScalarProfile::new(|t| t, |_| 1.0)
    }

    /// Catmull-Rom interpolant through uniform samples of `[t0, t1]`.
    /// C^1, with exact derivatives of the interpolant itself.
    pub fn from_samples(t0: f64, t1: f64, samples: Vec<f64>) -> Self {
        assert!(samples.len() >= 2 && t1 > t0);
        let n = samples.len();
        let dt = (t1 - t0) / (n - 1) as f64;
        let s = Arc::new(samples);
        let tangents: Arc<Vec<f64>> = Arc::new(
            (0..n)
                .map(|i| {
                    if i == 0 {
                        (s[1] - s[0]) / dt
                    } else if i == n - 1 {
                        (s[n - 1] - s[n - 2]) / dt
                    } else {
                        (s[i + 1] - s[i - 1]) / (2.0 * dt)
                    }
                })
                .collect(),
        );
        let locate = move |t: f64| -> (usize, f64) {
            let u = ((t - t0) / dt).clamp(0.0, (n - 1) as f64 - 1e-12);
            let i = u.floor() as usize;
            (i, u - i as f64)
        };
        let s1 = s.clone();
        let tg1 = tangents.clone();
        let eval = move |t: f64| {
            let (i, u) = locate(t);
            let (p0, p1) = (s1[i], s1[i + 1]);
            let (m0, m1) = (tg1[i] * dt, tg1[i + 1] * dt);
            let u2 = u * u;
            let u3 = u2 * u;
            (2.0 * u3 - 3.0 * u2 + 1.0) * p0
                + (u3 - 2.0 * u2 + u) * m0
                + (-2.0 * u3 + 3.0 * u2) * p1
                + (u3 - u2) * m1
        };
        let deriv = move |t: f64| {
            let (i, u) = locate(t);
            let (p0, p1) = (s[i], s[i + 1]);
            let (m0, m1) = (tangents[i] * dt, tangents[i + 1] * dt);
            let u2 = u * u;
            ((6.0 * u2 - 6.0 * u) * p0
                + (3.0 * u2 - 4.0 * u + 1.0) * m0
                + (-6.0 * u2 + 6.0 * u) * p1
                + (3.0 * u2 - 2.0 * u) * m1)
                / dt
        };
        ScalarProfile::new(eval, deriv)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.derivative)(t)
    }
}

/// The quartic bridge `p_{a,b}(r) = (3a - b + 1) r^2 + (-2a + b - 2) r^3 + r^4`,
/// the unique such polynomial with `p(0) = p'(0) = 0`, `p(1) = a`, `p'(1) = b`.
pub fn bridge_polynomial(a: f64, b: f64, r: f64) -> f64 {
    let r2 = r * r;
    (3.0 * a - b + 1.0) * r2 + (-2.0 * a + b - 2.0) * r2 * r + r2 * r2
}

/// Derivative of [`bridge_polynomial`] in `r`.
pub fn bridge_polynomial_deriv(a: f64, b: f64, r: f64) -> f64 {
    2.0 * (3.0 * a - b + 1.0) * r + 3.0 * (-2.0 * a + b - 2.0) * r * r + 4.0 * r * r * r
}

/// Endpoint modulation for the radial demo: `s(lambda) = -sin(pi lambda / 2)`,
/// so `s(-1) = 1` and `s(1) = -1`.
pub fn demo_modulation(lambda: f64) -> f64 {
    -(std::f64::consts::FRAC_PI_2 * lambda).sin()
}

fn demo_modulation_deriv(lambda: f64) -> f64 {
    -std::f64::consts::FRAC_PI_2 * (std::f64::consts::FRAC_PI_2 * lambda).cos()
}

fn radial_family_from_modulation(
    name: &str,
    s: impl Fn(f64) -> f64 + Send + Sync + Copy + 'static,
    s_deriv: impl Fn(f64) -> f64 + Send + Sync + Copy + 'static,
) -> FunctionalFamily {
    // f(lambda, x) = p_{2s, 3s}(||x||) = (3s+1) r^2 - (s+2) r^3 + r^4
    let eval = move |lambda: f64, x: &[f64]| {
        let sv = s(lambda);
        bridge_polynomial(2.0 * sv, 3.0 * sv, norm(x))
    };
    let grad = move |lambda: f64, x: &[f64]| {
        let sv = s(lambda);
        let r = norm(x);
        // p'(r)/r extends smoothly through r = 0
        let g = 2.0 * (3.0 * sv + 1.0) - 3.0 * (sv + 2.0) * r + 4.0 * r * r;
        x.iter().map(|xi| g * xi).collect()
    };
    let hess = move |lambda: f64, x: &[f64]| {
        let sv = s(lambda);
        let r = norm(x);
        let g = 2.0 * (3.0 * sv + 1.0) - 3.0 * (sv + 2.0) * r + 4.0 * r * r;
        let mut h = SymMatrix::identity(x.len()).scaled(g);
        if r > 1e-14 {
            h.add_outer(x, (-3.0 * (sv + 2.0) + 8.0 * r) / r);
        }
        h
    };
    let lambda_grad = move |lambda: f64, x: &[f64]| {
        let r = norm(x);
        s_deriv(lambda) * (3.0 * r * r - r * r * r)
    };
    FunctionalFamily::from_eval(name, 2, DomainBox::symmetric(2, 3.0), eval)
        .with_grad(grad)
        .with_hess(hess)
        .with_lambda_grad(lambda_grad)
}

/// The planar demo family `f(lambda, x) = p_{2s, 3s}(||x||)` with
/// `s(lambda) = -sin(pi lambda / 2)` on the box `[-3, 3]^2`.
///
/// Endpoint slices are `4r^2 - 3r^3 + r^4` at `lambda = -1` and
/// `-2r^2 - r^3 + r^4` at `lambda = 1`; the Hessian at the origin is
/// `(6 s(lambda) + 2) I`.
pub fn radial_demo_family() -> FunctionalFamily {
    radial_family_from_modulation("radial-demo", demo_modulation, demo_modulation_deriv)
}

/// Radial family whose modulation is pinned to `1` near `lambda = +-1`,
/// making the endpoint slices identical. Its nontrivial critical values form
/// a compact loop in the interior of the window; used as the
/// hypothesis-violation fixture.
pub fn bump_demo_family() -> FunctionalFamily {
    fn weight(lambda: f64) -> f64 {
        // 1 on [-0.7, 0.7], 0 outside [-0.95, 0.95], quintic in between
        let a = (lambda.abs() - 0.7) / 0.25;
        1.0 - smoothstep5(a)
    }
    fn weight_deriv(lambda: f64) -> f64 {
        let a = (lambda.abs() - 0.7) / 0.25;
        -smoothstep5_deriv(a) / 0.25 * lambda.signum()
    }
    let s = |lambda: f64| {
        let w = weight(lambda);
        (1.0 - w) + w * demo_modulation(lambda)
    };
    let s_deriv = |lambda: f64| {
        let w = weight(lambda);
        let dw = weight_deriv(lambda);
        dw * (demo_modulation(lambda) - 1.0) + w * demo_modulation_deriv(lambda)
    };
    radial_family_from_modulation("bump-demo", s, s_deriv)
}

/// Quintic smoothstep: 0 for `t <= 0`, 1 for `t >= 1`, C^2 at both ends.
pub fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub fn smoothstep5_deriv(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

/// `f(lambda, x) = ||x||^2`, independent of lambda.
pub fn quadratic_family(dim: usize) -> FunctionalFamily {
    FunctionalFamily::from_eval(
        "quadratic",
        dim,
        DomainBox::symmetric(dim, 3.0),
        |_, x: &[f64]| x.iter().map(|v| v * v).sum(),
    )
    .with_grad(|_, x: &[f64]| x.iter().map(|v| 2.0 * v).collect())
    .with_hess(move |_, x: &[f64]| SymMatrix::identity(x.len()).scaled(2.0))
    .with_lambda_grad(|_, _| 0.0)
}

/// `f(x, y) = (x^2 - 1)^2 + y^2`: two nondegenerate minima at value zero.
pub fn two_minima_family() -> FunctionalFamily {
    FunctionalFamily::from_eval(
        "two-minima",
        2,
        DomainBox::symmetric(2, 3.0),
        |_, x: &[f64]| {
            let q = x[0] * x[0] - 1.0;
            q * q + x[1] * x[1]
        },
    )
    .with_grad(|_, x: &[f64]| {
        let q = x[0] * x[0] - 1.0;
        vec![4.0 * q * x[0], 2.0 * x[1]]
    })
    .with_hess(|_, x: &[f64]| {
        SymMatrix::diagonal(&[12.0 * x[0] * x[0] - 4.0, 2.0])
    })
    .with_lambda_grad(|_, _| 0.0)
}

/// Bounded values but wildly growing lambda-derivative:
/// `f = sin(exp(lambda ||x||^2)) - sin(1)`. Breaks the drive-boundedness
/// hypothesis while keeping `f(lambda, 0) = 0`.
pub fn unbounded_drive_family() -> FunctionalFamily {
    FunctionalFamily::from_eval(
        "unbounded-drive",
        2,
        DomainBox::symmetric(2, 3.0),
        |lambda, x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            ((lambda * r2).exp()).sin() - 1.0f64.sin()
        },
    )
    .with_lambda_grad(|lambda, x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let e = (lambda * r2).exp();
        e.cos() * e * r2
    })
}

/// Looks up a built-in family by registry name.
pub fn builtin_family(name: &str) -> Result<FunctionalFamily, FamilyError> {
    match name {
        "radial-demo" => Ok(radial_demo_family()),
        "bump-demo" => Ok(bump_demo_family()),
        "quadratic" => Ok(quadratic_family(2)),
        "two-minima" => Ok(two_minima_family()),
        "unbounded-drive" => Ok(unbounded_drive_family()),
        other => Err(FamilyError::UnknownFamily(other.to_string())),
    }
}

pub fn builtin_family_names() -> &'static [&'static str] {
    &[
        "radial-demo",
        "bump-demo",
        "quadratic",
        "two-minima",
        "unbounded-drive",
    ]
}

/// Worst deviations between analytic and finite-difference derivatives over
/// random samples of the domain box.
#[derive(Clone, Debug, Serialize)]
pub struct FdReport {
    pub samples: usize,
    pub step: f64,
    pub max_grad_dev: f64,
    pub max_hess_dev: f64,
    pub max_lambda_grad_dev: f64,
    pub max_hess_asymmetry: f64,
}

/// Checks analytic derivatives against central finite differences of the
/// evaluator (gradient, lambda-derivative) and of the gradient (Hessian).
pub fn finite_difference_check(
    family: &FunctionalFamily,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<FdReport, FamilyError> {
    use rand::SeedableRng;
    assert!(step > 0.0, "step must be positive");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = FdReport {
        samples,
        step,
        max_grad_dev: 0.0,
        max_hess_dev: 0.0,
        max_lambda_grad_dev: 0.0,
        max_hess_asymmetry: 0.0,
    };
    let n = family.dim();
    for _ in 0..samples {
        let lambda = rand::Rng::gen_range(&mut rng, -1.0..=1.0);
        let x = family.domain().sample(&mut rng);
        let f0 = family.eval(lambda, &x);
        if !f0.is_finite() {
            return Err(FamilyError::NonFiniteValue { lambda, x });
        }
        let g = family.grad(lambda, &x);
        let h = family.hess(lambda, &x);
        report.max_hess_asymmetry = report.max_hess_asymmetry.max(h.asymmetry());

        let mut xp = x.clone();
        for i in 0..n {
            xp[i] = x[i] + step;
            let fp = family.eval(lambda, &xp);
            let gp = family.grad(lambda, &xp);
            xp[i] = x[i] - step;
            let fm = family.eval(lambda, &xp);
            let gm = family.grad(lambda, &xp);
            xp[i] = x[i];
            if !fp.is_finite() || !fm.is_finite() {
                return Err(FamilyError::NonFiniteValue { lambda, x });
            }
            let fd_g = (fp - fm) / (2.0 * step);
            report.max_grad_dev = report.max_grad_dev.max((fd_g - g[i]).abs());
            for j in 0..n {
                let fd_h = (gp[j] - gm[j]) / (2.0 * step);
                report.max_hess_dev = report.max_hess_dev.max((fd_h - h.get(j, i)).abs());
            }
        }
        let lp = family.eval(lambda + step, &x);
        let lm = family.eval(lambda - step, &x);
        let fd_l = (lp - lm) / (2.0 * step);
        report.max_lambda_grad_dev = report
            .max_lambda_grad_dev
            .max((fd_l - family.lambda_grad(lambda, &x)).abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bridge_endpoint_identity_spot() {
        // coefficients of p_{2,3}: 3*2 - 3 + 1 = 4, -4 + 3 - 2 = -3
        for r in [0.0, 0.3, 1.0, 1.7] {
            let want = 4.0 * r * r - 3.0 * r * r * r + r * r * r * r;
            assert!((bridge_polynomial(2.0, 3.0, r) - want).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn bridge_identities(a in -50.0..50.0f64, b in -50.0..50.0f64) {
            prop_assert!(bridge_polynomial(a, b, 0.0).abs() < 1e-12);
            prop_assert!(bridge_polynomial_deriv(a, b, 0.0).abs() < 1e-12);
            prop_assert!((bridge_polynomial(a, b, 1.0) - a).abs() < 1e-12);
            prop_assert!((bridge_polynomial_deriv(a, b, 1.0) - b).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_demo_endpoints_match_coefficients() {
        let fam = radial_demo_family();
        for x in [[0.5, 0.0], [0.3, -1.2], [2.0, 1.0]] {
            let r = norm(&x);
            let at_m1 = 4.0 * r.powi(2) - 3.0 * r.powi(3) + r.powi(4);
            let at_p1 = -2.0 * r.powi(2) - r.powi(3) + r.powi(4);
            assert!((fam.eval(-1.0, &x) - at_m1).abs() < 1e-12);
            assert!((fam.eval(1.0, &x) - at_p1).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_demo_standing_assumption() {
        let fam = radial_demo_family();
        for k in 0..21 {
            let lambda = -1.0 + 0.1 * k as f64;
            assert_eq!(fam.eval(lambda, &[0.0, 0.0]), 0.0);
            assert!(norm(&fam.grad(lambda, &[0.0, 0.0])) == 0.0);
        }
    }

    #[test]
    fn radial_demo_origin_hessian() {
        let fam = radial_demo_family();
        for lambda in [-1.0, -0.3, 0.0, 0.21, 1.0] {
            let s = demo_modulation(lambda);
            let h = fam.hess(lambda, &[0.0, 0.0]);
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { 6.0 * s + 2.0 } else { 0.0 };
                    assert!((h.get(i, j) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fd_check_radial_demo() {
        let fam = radial_demo_family();
        let report = finite_difference_check(&fam, 100, 1e-4, 7).unwrap();
        assert!(report.max_grad_dev < 1e-6, "{report:?}");
        assert!(report.max_hess_asymmetry < 1e-10);
    }

    #[test]
    fn fd_check_constant_zero() {
        let fam = FunctionalFamily::from_eval(
            "zero",
            2,
            DomainBox::symmetric(2, 3.0),
            |_, _| 0.0,
        )
        .with_grad(|_, _| vec![0.0, 0.0])
        .with_hess(|_, _| SymMatrix::zeros(2))
        .with_lambda_grad(|_, _| 0.0);
        let report = finite_difference_check(&fam, 50, 1e-4, 3).unwrap();
        assert_eq!(report.max_grad_dev, 0.0);
        assert_eq!(report.max_hess_dev, 0.0);
        assert_eq!(report.max_lambda_grad_dev, 0.0);
    }

    #[test]
    fn fd_check_quadratic_hessian_nearly_exact() {
        let fam = quadratic_family(2);
        let report = finite_difference_check(&fam, 100, 1e-4, 11).unwrap();
        // second differences of a quadratic are exact up to roundoff
        assert!(report.max_hess_dev < 1e-8, "{report:?}");
    }

    #[test]
    fn fd_check_rejects_non_finite() {
        let fam = FunctionalFamily::from_eval(
            "bad",
            2,
            DomainBox::symmetric(2, 3.0),
            |_, x: &[f64]| 1.0 / (x[0] - x[0]),
        );
        assert!(matches!(
            finite_difference_check(&fam, 10, 1e-4, 1),
            Err(FamilyError::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn bump_demo_endpoints_identical() {
        let fam = bump_demo_family();
        for x in [[0.7, 0.1], [1.4, -0.4]] {
            assert!((fam.eval(-1.0, &x) - fam.eval(1.0, &x)).abs() < 1e-12);
        }
        // pinned to the s = 1 slice, which has no nontrivial critical points
        assert!((fam.eval(1.0, &[1.0, 0.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_profile_from_samples_interpolates() {
        let n = 101;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                t * t * t
            })
            .collect();
        let p = ScalarProfile::from_samples(-1.0, 1.0, samples);
        for k in 0..50 {
            let t = -1.0 + 2.0 * k as f64 / 49.0;
            assert!((p.eval(t) - t * t * t).abs() < 1e-3);
            assert!((p.derivative(t) - 3.0 * t * t).abs() < 2e-2);
        }
    }

    #[test]
    fn reversed_family_flips_drive() {
        let fam = radial_demo_family();
        let rev = fam.reversed();
        let x = [0.8, 0.2];
        assert!((rev.eval(0.3, &x) - fam.eval(-0.3, &x)).abs() < 1e-14);
        assert!((rev.lambda_grad(0.3, &x) + fam.lambda_grad(-0.3, &x)).abs() < 1e-12);
    }
}
