//! Damped Newton multistart for gradient zeros of a functional slice.
//! Shared by the branch scanner and the local critical-group machinery.

use crate::functional::FunctionalFamily;
use crate::linalg::{dist, norm, solve_dense};

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub dedup_radius: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-9,
            max_iter: 80,
            dedup_radius: 1e-4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub grad_norm: f64,
}

/// Newton iteration on `grad f_lambda = 0` from one seed. Falls back to a
/// descent step on `||grad||^2` when the Hessian solve fails or Newton
/// stalls. Returns `None` for seeds that do not converge or leave the box.
pub fn refine_critical_point(
    family: &FunctionalFamily,
    lambda: f64,
    seed: &[f64],
    cfg: &SolveConfig,
) -> Option<CriticalPoint> {
    let escape = 2.0
        * family
            .domain()
            .lo
            .iter()
            .zip(&family.domain().hi)
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .fold(0.0f64, f64::max);
    let mut x = seed.to_vec();
    let mut g = family.grad(lambda, &x);
    let mut ng = norm(&g);
    for _ in 0..cfg.max_iter {
        if ng <= cfg.tol {
            break;
        }
        let h = family.hess(lambda, &x);
        let newton_dir = solve_dense(&h, &g.iter().map(|v| -v).collect::<Vec<_>>());
        let mut advanced = false;
        if let Some(d) = newton_dir {
            let mut t = 1.0;
            while t >= 1.0 / 4096.0 {
                let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
                let gn = family.grad(lambda, &xn);
                let ngn = norm(&gn);
                if ngn <= (1.0 - 1e-4 * t) * ng {
                    x = xn;
                    g = gn;
                    ng = ngn;
                    advanced = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if !advanced {
            // descent on ||grad||^2: direction -H g
            let h = family.hess(lambda, &x);
            let hg = h.mat_vec(&g);
            let nhg = norm(&hg);
            if nhg < 1e-300 {
                return None;
            }
            let mut t = 1.0 / (1.0 + nhg);
            let mut improved = false;
            while t >= 1e-12 {
                let xn: Vec<f64> = x.iter().zip(&hg).map(|(xi, di)| xi - t * di).collect();
                let gn = family.grad(lambda, &xn);
                let ngn = norm(&gn);
                if ngn < ng {
                    x = xn;
                    g = gn;
                    ng = ngn;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                return None;
            }
        }
        if norm(&x) > escape {
            return None;
        }
    }
    if ng <= cfg.tol && family.domain().contains(&x) {
        Some(CriticalPoint { x, grad_norm: ng })
    } else {
        None
    }
}

/// Runs the refinement from every seed and deduplicates hits within
/// `dedup_radius`, keeping the smaller gradient residual. Output order is
/// canonical (lexicographic in the coordinates) for determinism.
pub fn multistart(
    family: &FunctionalFamily,
    lambda: f64,
    seeds: &[Vec<f64>],
    cfg: &SolveConfig,
) -> Vec<CriticalPoint> {
    let mut found: Vec<CriticalPoint> = Vec::new();
    for seed in seeds {
        let Some(pt) = refine_critical_point(family, lambda, seed, cfg) else {
            continue;
        };
        match found
            .iter_mut()
            .find(|q| dist(&q.x, &pt.x) < cfg.dedup_radius)
        {
            Some(existing) => {
                if pt.grad_norm < existing.grad_norm {
                    *existing = pt;
                }
            }
            None => found.push(pt),
        }
    }
    found.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{quadratic_family, radial_demo_family, two_minima_family};

    #[test]
    fn quadratic_finds_origin_only() {
        let fam = quadratic_family(2);
        let seeds: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![-2.0, 0.5]];
        let pts = multistart(&fam, 0.3, &seeds, &SolveConfig::default());
        assert_eq!(pts.len(), 1);
        assert!(norm(&pts[0].x) < 1e-9);
    }

    #[test]
    fn two_minima_found_with_saddle() {
        let fam = two_minima_family();
        let mut seeds = vec![vec![0.1, 0.1]];
        for k in 0..8 {
            let th = std::f64::consts::TAU * k as f64 / 8.0;
            seeds.push(vec![1.5 * th.cos(), 1.5 * th.sin()]);
        }
        let pts = multistart(&fam, 0.0, &seeds, &SolveConfig::default());
        // minima at (+-1, 0), saddle at origin
        assert_eq!(pts.len(), 3);
    }

    #[test]
    fn demo_circle_at_right_endpoint() {
        let fam = radial_demo_family();
        let mut seeds = vec![vec![0.0, 0.0]];
        for k in 0..16 {
            let th = std::f64::consts::TAU * k as f64 / 16.0;
            seeds.push(vec![1.5 * th.cos(), 1.5 * th.sin()]);
        }
        let pts = multistart(&fam, 1.0, &seeds, &SolveConfig::default());
        let radius_oracle = (3.0 + 73.0f64.sqrt()) / 8.0;
        let mut circle = 0;
        for p in &pts {
            let r = norm(&p.x);
            if r > 1e-6 {
                assert!((r - radius_oracle).abs() < 1e-8, "off-circle point r={r}");
                circle += 1;
            }
        }
        assert!(circle >= 8, "expected at least 8 circle samples, got {circle}");
    }
}
