//! Gradient-floor estimation near level bands, the normalized-gradient
//! transport field, and the sublevel-preserving flows that realize the
//! homotopy equivalences between slice pairs.
//!
//! The field is the closed form
//! `v = -chi(f) (|df/dlambda| + 1) grad f / ||grad f||^2`
//! with a quintic cutoff `chi` equal to 1 on the inner half-band and 0
//! outside the band, so the descent inequality holds wherever the gradient
//! floor does, with no covering construction.

use crate::functional::{smoothstep5, FunctionalFamily, ScalarProfile};
use crate::linalg::norm;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeformError {
    #[error("level {level} is numerically critical: min gradient norm {min_grad:.3e} on the band")]
    SingularLevel { level: f64, min_grad: f64 },
    #[error("gradient norm {seen:.3e} inside the band fell below half the floor {floor:.3e}")]
    FloorViolated { seen: f64, floor: f64 },
    #[error("trajectory exceeded a protected level by {overshoot:.3e} even at the minimum step")]
    StepUnstable { overshoot: f64 },
    #[error("curves must satisfy a(lambda) < b(lambda); violated at lambda = {lambda}")]
    CurvesCross { lambda: f64 },
}

/// Bands `(a - delta, a + delta)` and optionally `(b - delta, b + delta)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LevelBand {
    pub a: f64,
    pub b: Option<f64>,
    pub delta: f64,
}

impl LevelBand {
    pub fn single(a: f64, delta: f64) -> Self {
        assert!(delta > 0.0);
        LevelBand { a, b: None, delta }
    }

    pub fn pair(a: f64, b: f64, delta: f64) -> Self {
        assert!(delta > 0.0 && a < b);
        LevelBand {
            a,
            b: Some(b),
            delta,
        }
    }

    pub fn levels(&self) -> Vec<f64> {
        match self.b {
            Some(b) => vec![self.a, b],
            None => vec![self.a],
        }
    }

    /// Signed distance outside the union of bands (positive when clear).
    pub fn clearance(&self, y: f64) -> f64 {
        self.levels()
            .iter()
            .map(|l| (y - l).abs() - self.delta)
            .fold(f64::INFINITY, f64::min)
    }

    fn chi_level(&self, y: f64, level: f64) -> f64 {
        let d = (y - level).abs();
        1.0 - smoothstep5((d - 0.5 * self.delta) / (0.5 * self.delta))
    }

    /// Cutoff: 1 on the inner half-bands, 0 outside the bands, C^2.
    pub fn chi(&self, y: f64) -> f64 {
        let mut off = 1.0;
        for l in self.levels() {
            off *= 1.0 - self.chi_level(y, l);
        }
        1.0 - off
    }
}

/// Sampling plan for floor and drive estimates.
#[derive(Clone, Debug)]
pub struct FloorConfig {
    pub lambda_samples: usize,
    /// Per-axis grid resolution for dimensions up to 3.
    pub x_steps: usize,
    /// Random samples for higher dimensions.
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for FloorConfig {
    fn default() -> Self {
        FloorConfig {
            lambda_samples: 33,
            x_steps: 41,
            random_samples: 4000,
            seed: 1,
        }
    }
}

fn sample_points(
    family: &FunctionalFamily,
    cfg: &FloorConfig,
) -> Vec<Vec<f64>> {
    let d = family.dim();
    let domain = family.domain();
    if d <= 3 {
        let steps = if d <= 2 { cfg.x_steps } else { cfg.x_steps.min(17) };
        let mut out = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let u: Vec<f64> = idx
                .iter()
                .map(|&i| i as f64 / (steps - 1) as f64)
                .collect();
            out.push(domain.lerp(&u));
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] < steps {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
                if carry == d {
                    return out;
                }
            }
        }
    } else {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..cfg.random_samples)
            .map(|_| domain.sample(&mut rng))
            .collect()
    }
}

/// Observed minimum of the gradient norm over sampled points of the band
/// `f in (a - delta, a + delta)`, across the lambda interval. Errors with
/// `SingularLevel` when the minimum drops below `1e-6` (the level is
/// numerically critical). An empty sampled band returns infinity.
pub fn gradient_floor(
    family: &FunctionalFamily,
    interval: (f64, f64),
    level: f64,
    delta: f64,
    cfg: &FloorConfig,
) -> Result<f64, DeformError> {
    assert!(delta > 0.0);
    let (lo, hi) = interval;
    assert!(lo <= hi);
    let points = sample_points(family, cfg);
    let lambdas: Vec<f64> = if lo == hi {
        vec![lo]
    } else {
        (0..cfg.lambda_samples)
            .map(|i| lo + (hi - lo) * i as f64 / (cfg.lambda_samples - 1) as f64)
            .collect()
    };
    let mut floor = f64::INFINITY;
    for &lambda in &lambdas {
        for x in &points {
            let y = family.eval(lambda, x);
            if (y - level).abs() < delta {
                floor = floor.min(norm(&family.grad(lambda, x)));
            }
        }
    }
    if floor < 1e-6 {
        return Err(DeformError::SingularLevel {
            level,
            min_grad: floor,
        });
    }
    Ok(floor)
}

/// Sampled sup of `|df/dlambda|`, restricted to the band when `band` is
/// given, over the whole box otherwise.
pub fn drive_sup(
    family: &FunctionalFamily,
    interval: (f64, f64),
    band: Option<&LevelBand>,
    cfg: &FloorConfig,
) -> f64 {
    let (lo, hi) = interval;
    let points = sample_points(family, cfg);
    let mut sup = 0.0f64;
    for i in 0..cfg.lambda_samples {
        let lambda = if lo == hi {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (cfg.lambda_samples - 1) as f64
        };
        for x in &points {
            if let Some(b) = band {
                if b.chi(family.eval(lambda, x)) == 0.0 {
                    continue;
                }
            }
            sup = sup.max(family.lambda_grad(lambda, x).abs());
        }
        if lo == hi {
            break;
        }
    }
    sup
}

/// The transport field with its certified bounds.
#[derive(Clone)]
pub struct TransportField {
    family: FunctionalFamily,
    pub band: LevelBand,
    pub floor: f64,
    /// `(sup_band |drive| + 1) / floor`: uniform bound on the field norm.
    pub bound: f64,
    /// Box-wide drive bound, used to step safely outside the band.
    pub drive_cap: f64,
}

impl TransportField {
    pub fn family(&self) -> &FunctionalFamily {
        &self.family
    }

    /// Field value; zero outside the band support. Errors when a point
    /// inside the band sees a gradient below half the floor.
    pub fn eval(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>, DeformError> {
        let y = self.family.eval(lambda, x);
        let chi = self.band.chi(y);
        if chi == 0.0 {
            return Ok(vec![0.0; x.len()]);
        }
        let g = self.family.grad(lambda, x);
        let n = norm(&g);
        if n < 0.5 * self.floor {
            return Err(DeformError::FloorViolated {
                seen: n,
                floor: self.floor,
            });
        }
        let drive = self.family.lambda_grad(lambda, x).abs() + 1.0;
        let coef = -chi * drive / (n * n);
        Ok(g.into_iter().map(|gi| coef * gi).collect())
    }

    /// `drive + <grad f, v>` at a point: the certified descent value.
    pub fn descent_value(&self, lambda: f64, x: &[f64]) -> Result<f64, DeformError> {
        let v = self.eval(lambda, x)?;
        let g = self.family.grad(lambda, x);
        Ok(self.family.lambda_grad(lambda, x) + crate::linalg::dot(&g, &v))
    }

    /// Default integration step `delta / (10 bound)`: one in-band step
    /// cannot jump across the band.
    pub fn default_step(&self) -> f64 {
        self.band.delta / (10.0 * self.bound.max(1e-9))
    }
}

/// Builds the transport field once the floor has been validated on the band.
pub fn transport_field(
    family: &FunctionalFamily,
    band: LevelBand,
    floor: f64,
    interval: (f64, f64),
) -> TransportField {
    assert!(floor > 0.0);
    let cfg = FloorConfig::default();
    let band_drive = drive_sup(family, interval, Some(&band), &cfg);
    let cap = drive_sup(family, interval, None, &cfg);
    let finite_floor = if floor.is_finite() { floor } else { 1e9 };
    TransportField {
        family: family.clone(),
        band,
        floor: finite_floor,
        bound: (band_drive + 1.0) / finite_floor,
        drive_cap: cap,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajPoint {
    pub t: f64,
    pub lambda: f64,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajPoint>,
    pub halvings: usize,
}

impl Trajectory {
    pub fn end(&self) -> &TrajPoint {
        self.points.last().expect("trajectory has points")
    }

    pub fn csv(&self) -> String {
        let dim = self.points.first().map(|p| p.x.len()).unwrap_or(0);
        let mut out = String::from("t,lambda");
        for i in 1..=dim {
            out.push_str(&format!(",x_{i}"));
        }
        out.push_str(",f_value\n");
        for p in &self.points {
            out.push_str(&format!("{:.9},{:.9}", p.t, p.lambda));
            for xi in &p.x {
                out.push_str(&format!(",{xi:.9}"));
            }
            out.push_str(&format!(",{:.9}\n", p.value));
        }
        out
    }
}

pub const TOL_FLOW: f64 = 1e-6;

/// Integrates `x'(t) = v(lambda0 + t, x(t))` by classical RK4.
///
/// Levels of the band that the start value sits below are protected: if the
/// trajectory exceeds one by more than `TOL_FLOW` the step is halved and the
/// run restarted, up to 10 times, before `StepUnstable` is raised. Outside
/// the band support the field vanishes, so inert stretches are crossed with
/// long exact steps bounded by the drive cap.
pub fn flow_integrate(
    field: &TransportField,
    lambda0: f64,
    x0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory, DeformError> {
    assert!(step > 0.0 && t_end > 0.0);
    let fam = field.family();
    let y0 = fam.eval(lambda0, x0);
    let protected: Vec<f64> = field
        .band
        .levels()
        .into_iter()
        .filter(|l| y0 <= l + 1e-12)
        .collect();

    let mut h = step;
    let mut worst_overshoot = 0.0f64;
    for halving in 0..=10 {
        match integrate_once(field, lambda0, x0, t_end, h, &protected) {
            Ok(mut traj) => {
                traj.halvings = halving;
                return Ok(traj);
            }
            Err(overshoot) => {
                worst_overshoot = worst_overshoot.max(overshoot);
                h *= 0.5;
            }
        }
    }
    Err(DeformError::StepUnstable {
        overshoot: worst_overshoot,
    })
}

/// One integration attempt; `Err(overshoot)` reports a protected-level
/// violation (caller halves the step). Field errors surface via panic-free
/// early exit into the violation path with infinite overshoot? No: field
/// errors are genuine and propagate.
fn integrate_once(
    field: &TransportField,
    lambda0: f64,
    x0: &[f64],
    t_end: f64,
    step: f64,
    protected: &[f64],
) -> Result<Trajectory, f64> {
    let fam = field.family();
    let mut t = 0.0;
    let mut x = x0.to_vec();
    let mut points = vec![TrajPoint {
        t,
        lambda: lambda0,
        x: x.clone(),
        value: fam.eval(lambda0, x0),
    }];
    let check = |y: f64| -> Result<(), f64> {
        for &l in protected {
            if y > l + TOL_FLOW {
                return Err(y - l);
            }
        }
        Ok(())
    };
    let eval_field = |lambda: f64, x: &[f64]| -> Result<Vec<f64>, f64> {
        // a floor violation inside the band means the step machinery walked
        // into territory the floor estimate excluded; treat as instability
        field.eval(lambda, x).map_err(|_| f64::INFINITY)
    };
    while t < t_end - 1e-15 {
        let lambda = lambda0 + t;
        let y = fam.eval(lambda, &x);
        check(y)?;
        let clear = field.band.clearance(y);
        if clear > 0.0 {
            // field is zero here; x is constant until the band can be reached
            let local_rate = fam.lambda_grad(lambda, &x).abs().max(field.drive_cap * 0.01) + 1e-9;
            let dt = (0.5 * clear / local_rate).max(step).min(t_end - t);
            t += dt;
            points.push(TrajPoint {
                t,
                lambda: lambda0 + t,
                x: x.clone(),
                value: fam.eval(lambda0 + t, &x),
            });
            continue;
        }
        let hstep = step.min(t_end - t);
        let k1 = eval_field(lambda, &x)?;
        let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, k)| a + 0.5 * hstep * k).collect();
        let k2 = eval_field(lambda + 0.5 * hstep, &x2)?;
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, k)| a + 0.5 * hstep * k).collect();
        let k3 = eval_field(lambda + 0.5 * hstep, &x3)?;
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, k)| a + hstep * k).collect();
        let k4 = eval_field(lambda + hstep, &x4)?;
        for i in 0..x.len() {
            x[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += hstep;
        let value = fam.eval(lambda0 + t, &x);
        check(value)?;
        points.push(TrajPoint {
            t,
            lambda: lambda0 + t,
            x: x.clone(),
            value,
        });
    }
    Ok(Trajectory {
        points,
        halvings: 0,
    })
}

#[derive(Clone, Debug)]
pub struct TransportConfig {
    pub delta: f64,
    pub starts: usize,
    pub homotopy_starts: usize,
    pub homotopy_times: Vec<f64>,
    pub seed: u64,
    pub step_override: Option<f64>,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            delta: 0.02,
            starts: 200,
            homotopy_starts: 16,
            homotopy_times: vec![0.5, 1.0, 1.5, 2.0],
            seed: 7,
            step_override: None,
        }
    }
}

/// Membership-preservation statistics for the four flows of the rescaled
/// pair `(g^1, g^0)`.
#[derive(Clone, Debug, Serialize)]
pub struct TransportReport {
    pub schema_version: u32,
    pub violations: usize,
    pub max_overshoot: f64,
    pub flow_count: usize,
    pub starts_lower: usize,
    pub starts_upper: usize,
    pub floor: f64,
    pub field_bound: f64,
    pub step: f64,
}

/// Builds the rescaled family `g = (f - a(lambda)) / (b(lambda) - a(lambda))`
/// with its exact derivatives.
pub fn rescaled_family(
    family: &FunctionalFamily,
    a: &ScalarProfile,
    b: &ScalarProfile,
) -> FunctionalFamily {
    let fam_e = family.clone();
    let (ae, be) = (a.clone(), b.clone());
    let eval = move |lambda: f64, x: &[f64]| {
        (fam_e.eval(lambda, x) - ae.eval(lambda)) / (be.eval(lambda) - ae.eval(lambda))
    };
    let fam_g = family.clone();
    let (ag, bg) = (a.clone(), b.clone());
    let grad = move |lambda: f64, x: &[f64]| {
        let scale = 1.0 / (bg.eval(lambda) - ag.eval(lambda));
        fam_g.grad(lambda, x).into_iter().map(|v| v * scale).collect()
    };
    let fam_h = family.clone();
    let (ah, bh) = (a.clone(), b.clone());
    let hess = move |lambda: f64, x: &[f64]| {
        let scale = 1.0 / (bh.eval(lambda) - ah.eval(lambda));
        fam_h.hess(lambda, x).scaled(scale)
    };
    let fam_l = family.clone();
    let (al, bl) = (a.clone(), b.clone());
    let lambda_grad = move |lambda: f64, x: &[f64]| {
        let width = bl.eval(lambda) - al.eval(lambda);
        let g = (fam_l.eval(lambda, x) - al.eval(lambda)) / width;
        (fam_l.lambda_grad(lambda, x) - al.derivative(lambda)
            - g * (bl.derivative(lambda) - al.derivative(lambda)))
            / width
    };
    FunctionalFamily::from_eval(
        format!("{}-rescaled", family.name()),
        family.dim(),
        family.domain().clone(),
        eval,
    )
    .with_grad(grad)
    .with_hess(hess)
    .with_lambda_grad(lambda_grad)
}

/// Rescales to `g`, validates the floors of the levels 0 and 1, integrates
/// the forward, backward and composite flows, and reports membership
/// preservation. `SingularLevel` propagates when a curve grazes a critical
/// value.
pub fn pair_transport(
    family: &FunctionalFamily,
    a: &ScalarProfile,
    b: &ScalarProfile,
    cfg: &TransportConfig,
) -> Result<TransportReport, DeformError> {
    use rand::SeedableRng;
    let interval = (-1.0, 1.0);
    for i in 0..=64 {
        let lambda = -1.0 + 2.0 * i as f64 / 64.0;
        if a.eval(lambda) >= b.eval(lambda) {
            return Err(DeformError::CurvesCross { lambda });
        }
    }
    let g = rescaled_family(family, a, b);
    let floor_cfg = FloorConfig::default();
    let floor0 = gradient_floor(&g, interval, 0.0, cfg.delta, &floor_cfg)?;
    let floor1 = gradient_floor(&g, interval, 1.0, cfg.delta, &floor_cfg)?;
    let floor = floor0.min(floor1);
    let band = LevelBand::pair(0.0, 1.0, cfg.delta);
    let field = transport_field(&g, band, floor, interval);
    let field_rev = transport_field(&g.reversed(), band, floor, interval);
    let step = cfg.step_override.unwrap_or_else(|| {
        field.default_step().min(field_rev.default_step())
    });

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut violations = 0usize;
    let mut max_overshoot = 0.0f64;
    let mut flow_count = 0usize;
    let mut starts_lower = 0usize;
    let mut starts_upper = 0usize;

    let run = |fld: &TransportField,
                   lambda0: f64,
                   x0: &[f64],
                   t_end: f64,
                   flow_count: &mut usize|
     -> Option<Trajectory> {
        *flow_count += 1;
        match flow_integrate(fld, lambda0, x0, t_end, step) {
            Ok(traj) => Some(traj),
            Err(_) => None,
        }
    };

    // forward flows from lambda = -1 and backward flows from lambda = 1
    for direction in 0..2 {
        let (fld, source_lambda) = if direction == 0 {
            (&field, -1.0)
        } else {
            (&field_rev, -1.0) // reversed family parameter -1 is lambda = 1
        };
        for _ in 0..cfg.starts / 2 {
            let x0 = family.domain().sample(&mut rng);
            let y0 = fld.family().eval(source_lambda, &x0);
            if y0 > 1.0 {
                continue;
            }
            if y0 <= 0.0 {
                starts_lower += 1;
            } else {
                starts_upper += 1;
            }
            match run(fld, source_lambda, &x0, 2.0, &mut flow_count) {
                Some(traj) => {
                    let end = traj.end();
                    let levels = if y0 <= 0.0 { [0.0, 1.0] } else { [1.0, 1.0] };
                    for l in levels {
                        let excess = end.value - l;
                        if excess > TOL_FLOW {
                            violations += 1;
                            max_overshoot = max_overshoot.max(excess);
                        }
                    }
                }
                None => violations += 1,
            }
        }
    }

    // composite homotopies H_t and their mirror
    for _ in 0..cfg.homotopy_starts {
        let x0 = family.domain().sample(&mut rng);
        for (first, second) in [(&field, &field_rev), (&field_rev, &field)] {
            let y0 = first.family().eval(-1.0, &x0);
            if y0 > 1.0 {
                continue;
            }
            for &tc in &cfg.homotopy_times {
                let Some(tr1) = run(first, -1.0, &x0, tc, &mut flow_count) else {
                    violations += 1;
                    continue;
                };
                let Some(tr2) = run(second, 1.0 - tc, &tr1.end().x, tc, &mut flow_count) else {
                    violations += 1;
                    continue;
                };
                let end_value = first.family().eval(-1.0, &tr2.end().x);
                let level = if y0 <= 0.0 { 0.0 } else { 1.0 };
                let excess = end_value - level;
                if excess > TOL_FLOW {
                    violations += 1;
                    max_overshoot = max_overshoot.max(excess);
                }
            }
        }
    }

    Ok(TransportReport {
        schema_version: 1,
        violations,
        max_overshoot,
        flow_count,
        starts_lower,
        starts_upper,
        floor,
        field_bound: field.bound.max(field_rev.bound),
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{quadratic_family, DomainBox, FunctionalFamily};

    fn shifted_bowl() -> FunctionalFamily {
        FunctionalFamily::from_eval(
            "bowl-drift",
            2,
            DomainBox::symmetric(2, 3.0),
            |lambda, x: &[f64]| x[0] * x[0] + x[1] * x[1] + lambda,
        )
        .with_grad(|_, x: &[f64]| x.iter().map(|v| 2.0 * v).collect())
        .with_hess(|_, x: &[f64]| crate::linalg::SymMatrix::identity(x.len()).scaled(2.0))
        .with_lambda_grad(|_, _| 1.0)
    }

    #[test]
    fn floor_of_quadratic_band() {
        let fam = quadratic_family(2);
        let floor = gradient_floor(&fam, (-1.0, 1.0), 1.0, 0.1, &FloorConfig::default()).unwrap();
        let oracle = 2.0 * 0.9f64.sqrt();
        assert!((floor - oracle).abs() < 0.05, "floor {floor} vs {oracle}");
    }

    #[test]
    fn floor_rejects_critical_level() {
        let fam = quadratic_family(2);
        let err = gradient_floor(&fam, (-1.0, 1.0), 0.0, 0.1, &FloorConfig::default());
        assert!(matches!(err, Err(DeformError::SingularLevel { .. })));
    }

    #[test]
    fn floor_of_demo_band() {
        let fam = crate::functional::radial_demo_family();
        let floor =
            gradient_floor(&fam, (-1.0, 1.0), -0.05, 0.01, &FloorConfig::default()).unwrap();
        assert!(floor > 1e-3, "demo floor {floor}");
    }

    #[test]
    fn field_descent_lambda_independent() {
        let fam = quadratic_family(2);
        let band = LevelBand::single(1.0, 0.2);
        let floor = gradient_floor(&fam, (-1.0, 1.0), 1.0, 0.2, &FloorConfig::default()).unwrap();
        let field = transport_field(&fam, band, floor, (-1.0, 1.0));
        // on the exact level the descent value is exactly -chi = -1
        let x = [1.0, 0.0];
        let d = field.descent_value(0.0, &x).unwrap();
        assert!((d + 1.0).abs() < 1e-12, "descent {d}");
        // outside the band support the field vanishes
        let v = field.eval(0.0, &[2.5, 0.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn field_descent_with_drive() {
        let fam = shifted_bowl();
        let band = LevelBand::single(1.0, 0.2);
        let floor = gradient_floor(&fam, (-1.0, 1.0), 1.0, 0.2, &FloorConfig::default()).unwrap();
        let field = transport_field(&fam, band, floor, (-1.0, 1.0));
        // drive is 1; on the level: 1 - (1+1) = -1
        let x = [0.9486832980505138, 0.0]; // f(0, x) = 0.9, band around 1
        let d = field.descent_value(0.0, &x).unwrap();
        assert!(d <= -0.99, "descent {d}");
    }

    #[test]
    fn field_bound_holds_sampled() {
        let fam = shifted_bowl();
        let band = LevelBand::pair(0.0, 1.0, 0.2);
        let floor =
            gradient_floor(&fam, (-1.0, 1.0), 1.0, 0.2, &FloorConfig::default()).unwrap();
        let field = transport_field(&fam, band, floor, (-1.0, 1.0));
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let lambda = rng.gen_range(-1.0..=1.0);
            let x = fam.domain().sample(&mut rng);
            if let Ok(v) = field.eval(lambda, &x) {
                assert!(norm(&v) <= field.bound + 1e-9);
            }
        }
    }

    #[test]
    fn flow_below_band_stays_below() {
        let fam = shifted_bowl();
        let band = LevelBand::single(1.5, 0.2);
        let floor =
            gradient_floor(&fam, (-1.0, 1.0), 1.5, 0.2, &FloorConfig::default()).unwrap();
        let field = transport_field(&fam, band, floor, (-1.0, 1.0));
        // start well below the band: value drifts up with lambda, the field
        // must push it back down before 1.5
        let traj = flow_integrate(&field, -1.0, &[0.5, 0.2], 2.0, field.default_step()).unwrap();
        for p in &traj.points {
            assert!(p.value <= 1.5 + TOL_FLOW, "value {} at t {}", p.value, p.t);
        }
        assert!((traj.end().lambda - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flow_composition_order() {
        let fam = shifted_bowl();
        let band = LevelBand::single(1.0, 0.5);
        let floor =
            gradient_floor(&fam, (-1.0, 1.0), 1.0, 0.5, &FloorConfig::default()).unwrap();
        let field = transport_field(&fam, band, floor, (-1.0, 1.0));
        let step = 0.02;
        let x0 = [0.85, 0.3];
        let joint = flow_integrate(&field, -1.0, &x0, 2.0, step).unwrap();
        let first = flow_integrate(&field, -1.0, &x0, 0.9, step).unwrap();
        let second = flow_integrate(&field, -0.1, &first.end().x, 1.1, step).unwrap();
        let d = crate::linalg::dist(&joint.end().x, &second.end().x);
        let budget = 10.0 * step.powi(4) * 2.0;
        assert!(d <= budget, "composition deviation {d:.3e} > {budget:.3e}");
    }

    #[test]
    fn flow_auto_halving_recovers_from_huge_step() {
        let fam = shifted_bowl();
        let band = LevelBand::single(1.0, 0.3);
        let floor =
            gradient_floor(&fam, (-1.0, 1.0), 1.0, 0.3, &FloorConfig::default()).unwrap();
        let field = transport_field(&fam, band, floor, (-1.0, 1.0));
        let traj = flow_integrate(&field, -1.0, &[0.8, 0.0], 2.0, 0.4);
        match traj {
            Ok(t) => {
                assert!(t.points.iter().all(|p| p.value <= 1.0 + TOL_FLOW));
            }
            Err(DeformError::StepUnstable { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn pair_transport_constant_curves() {
        let fam = quadratic_family(2);
        let a = ScalarProfile::constant(-0.05);
        let b = ScalarProfile::constant(0.05);
        // 0 is a critical value of f, and it sits between the curves; but the
        // curves themselves are regular levels, which is all that is required
        let report = pair_transport(
            &fam,
            &a,
            &b,
            &TransportConfig {
                starts: 60,
                homotopy_starts: 6,
                ..TransportConfig::default()
            },
        )
        .unwrap();
        assert_eq!(report.violations, 0, "{report:?}");
    }

    #[test]
    fn pair_transport_rejects_singular_curve() {
        let fam = quadratic_family(2);
        // a crosses the critical value 0 of the slices
        let a = ScalarProfile::new(|l| -0.2 + 0.2 * (l + 1.0), |_| 0.2);
        let b = ScalarProfile::constant(2.0);
        let err = pair_transport(&fam, &a, &b, &TransportConfig::default());
        assert!(
            matches!(err, Err(DeformError::SingularLevel { .. })),
            "{err:?}"
        );
    }

    #[test]
    fn trajectory_csv_header() {
        let fam = quadratic_family(2);
        let band = LevelBand::single(1.0, 0.2);
        let field = transport_field(&fam, band, 1.0, (-1.0, 1.0));
        let traj = flow_integrate(&field, -1.0, &[0.1, 0.1], 0.5, 0.05).unwrap();
        let csv = traj.csv();
        assert!(csv.starts_with("t,lambda,x_1,x_2,f_value\n"));
    }
}
