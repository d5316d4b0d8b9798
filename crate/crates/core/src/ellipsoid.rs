//! Minimal-volume ellipsoid `r1 |v1|^2 + r2 |vhat|^2 <= 1` containing the
//! Kobayashi indicatrix at an axis point.
//!
//! The indicatrix is invariant under rotations of `vhat` and of `v1`, so the
//! fit takes place in square coordinates `x = |vhat|^2`, `y = |v1|^2`, where
//! the ellipsoid becomes the half-plane `r1 y + r2 x <= 1` and its volume is
//! proportional to `1 / (r1 r2^{n-1})`.

use serde::Serialize;

use crate::egg_domain::EggParams;
use crate::error::{Error, Result};
use crate::kobayashi::{self, KCurveSample};

pub const MIN_FIT_SAMPLES: usize = 256;
/// Allowed positive containment residual.
pub const CONTAINMENT_TOL: f64 = 1e-9;
/// A sample within this distance of the boundary counts as touching.
pub const ACTIVITY_TOL: f64 = 1e-6;

const GOLDEN_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipsoidFit {
    pub r1: f64,
    pub r2: f64,
    /// `-log(r1 r2^{n-1})`, the log-volume up to an additive constant.
    pub objective: f64,
    /// `max (r1 y + r2 x - 1)` over the samples.
    pub max_violation: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Golden-section search over `r1` with `r2` set by the active constraint.
    Reduced,
    /// Zooming grid search over `(r1, r2)`.
    Grid,
}

/// Fits the ellipsoid against `count` boundary samples at `(p, 0)`.
pub fn fit_min_volume_ellipsoid(params: &EggParams, p: f64, count: usize) -> Result<EllipsoidFit> {
    fit_with(params, p, count, FitMethod::Reduced)
}

pub fn fit_with(params: &EggParams, p: f64, count: usize, method: FitMethod) -> Result<EllipsoidFit> {
    if count < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            got: count,
        });
    }
    let samples = kobayashi::indicatrix_boundary(params, p, count)?;
    fit_samples(params, &samples, method)
}

/// Fit against an explicit sample set in square coordinates.
pub fn fit_samples(params: &EggParams, samples: &[KCurveSample], method: FitMethod) -> Result<EllipsoidFit> {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.x, s.y)).collect();
    if pts
        .iter()
        .any(|&(x, y)| !(x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0))
    {
        return Err(Error::Infeasible(
            "indicatrix samples must be finite and nonnegative".into(),
        ));
    }
    let y_max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let x_max = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    if y_max <= 0.0 || x_max <= 0.0 {
        return Err(Error::Infeasible("samples do not span both axes".into()));
    }
    let k = (params.n() - 1) as i32;
    let (r1, r2) = match method {
        FitMethod::Reduced => reduced_search(&pts, y_max, k)?,
        FitMethod::Grid => grid_search(&pts, y_max, x_max, k)?,
    };
    let max_violation = pts
        .iter()
        .map(|&(x, y)| r1 * y + r2 * x - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_violation > CONTAINMENT_TOL {
        return Err(Error::Infeasible(format!(
            "containment violated by {max_violation:e}"
        )));
    }
    Ok(EllipsoidFit {
        r1,
        r2,
        objective: -(r1.ln() + k as f64 * r2.ln()),
        max_violation,
        samples_used: pts.len(),
    })
}

/// Largest `r2` keeping every sample inside for the given `r1`.
fn r2_for(pts: &[(f64, f64)], r1: f64) -> f64 {
    pts.iter()
        .filter(|p| p.0 > 0.0)
        .map(|&(x, y)| (1.0 - r1 * y) / x)
        .fold(f64::INFINITY, f64::min)
}

fn reduced_search(pts: &[(f64, f64)], y_max: f64, k: i32) -> Result<(f64, f64)> {
    let score = |r1: f64| {
        let r2 = r2_for(pts, r1);
        if r2 <= 0.0 {
            f64::NEG_INFINITY
        } else {
            r1.ln() + k as f64 * r2.ln()
        }
    };
    let hi = 1.0 / y_max;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    for _ in 0..GOLDEN_ITERS {
        if b - a <= 1e-15 * hi {
            break;
        }
        if fc < fd {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(c);
        }
    }
    // The maximizer may sit on the end of the interval.
    let interior = 0.5 * (a + b);
    let r1 = if score(hi) >= score(interior) {
        hi
    } else {
        interior
    };
    let r2 = r2_for(pts, r1);
    if !(r2 > 0.0 && r2.is_finite()) {
        return Err(Error::Infeasible(
            "no ellipsoid with positive axes contains the samples".into(),
        ));
    }
    Ok((r1, r2))
}

fn grid_search(pts: &[(f64, f64)], y_max: f64, x_max: f64, k: i32) -> Result<(f64, f64)> {
    const N: usize = 32;
    const ZOOMS: usize = 40;
    let feasible = |r1: f64, r2: f64| pts.iter().all(|&(x, y)| r1 * y + r2 * x <= 1.0);
    let (mut lo1, mut hi1) = (0.0, 1.0 / y_max);
    let (mut lo2, mut hi2) = (0.0, 1.0 / x_max);
    let mut best: Option<(f64, f64, f64)> = None;
    for _ in 0..ZOOMS {
        for i in 0..=N {
            let r1 = lo1 + (hi1 - lo1) * i as f64 / N as f64;
            for j in 0..=N {
                let r2 = lo2 + (hi2 - lo2) * j as f64 / N as f64;
                if r1 <= 0.0 || r2 <= 0.0 || !feasible(r1, r2) {
                    continue;
                }
                let s = r1.ln() + k as f64 * r2.ln();
                if best.is_none_or(|b| s > b.2) {
                    best = Some((r1, r2, s));
                }
            }
        }
        let Some((b1, b2, _)) = best else {
            return Err(Error::Infeasible(
                "grid search found no feasible ellipsoid".into(),
            ));
        };
        let w1 = (hi1 - lo1) / N as f64 * 2.0;
        let w2 = (hi2 - lo2) / N as f64 * 2.0;
        lo1 = (b1 - w1).max(0.0);
        hi1 = (b1 + w1).min(1.0 / y_max);
        lo2 = (b2 - w2).max(0.0);
        hi2 = (b2 + w2).min(1.0 / x_max);
    }
    let (r1, r2, _) = best.expect("set in the loop");
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_closed_form_at_mid_point() {
        let params = EggParams::new(2, 0.25).unwrap();
        let p = 0.5f64;
        let fit = fit_min_volume_ellipsoid(&params, p, 1024).unwrap();
        let r1 = 1.0 / (1.0 - p * p).powi(2);
        let r2 = 1.0 / (1.0 - p.sqrt());
        assert!((fit.r1 - r1).abs() <= 1e-3 * r1);
        assert!((fit.r2 - r2).abs() <= 1e-3 * r2);
        assert!(fit.max_violation <= CONTAINMENT_TOL);
        assert!(fit.max_violation >= -ACTIVITY_TOL);
        assert_eq!(fit.samples_used, 1024);
    }

    #[test]
    fn near_origin_is_the_ball() {
        let params = EggParams::new(3, 0.25).unwrap();
        let fit = fit_min_volume_ellipsoid(&params, 1e-6, 512).unwrap();
        // 1 - p^{2m} = 1 - 1e-3 for m = 1/4
        assert!((fit.r1 - 1.0).abs() < 1e-9);
        assert!((fit.r2 - 1.0 / (1.0 - 1e-3)).abs() < 1e-9);
    }

    #[test]
    fn grid_search_agrees() {
        let params = EggParams::new(3, 0.1).unwrap();
        let a = fit_with(&params, 0.7, 512, FitMethod::Reduced).unwrap();
        let b = fit_with(&params, 0.7, 512, FitMethod::Grid).unwrap();
        assert!((a.r1 - b.r1).abs() <= 1e-6 * a.r1, "{a:?} {b:?}");
        assert!((a.r2 - b.r2).abs() <= 1e-6 * a.r2, "{a:?} {b:?}");
    }

    #[test]
    fn self_convergence() {
        let params = EggParams::new(2, 0.4).unwrap();
        let a = fit_min_volume_ellipsoid(&params, 0.3, 1024).unwrap();
        let b = fit_min_volume_ellipsoid(&params, 0.3, 2048).unwrap();
        assert!((a.r1 - b.r1).abs() <= 1e-6 * a.r1);
        assert!((a.r2 - b.r2).abs() <= 1e-6 * a.r2);
    }

    #[test]
    fn perturbed_optimum_is_worse_or_infeasible() {
        let params = EggParams::new(2, 0.25).unwrap();
        let samples = kobayashi::indicatrix_boundary(&params, 0.6, 512).unwrap();
        let fit = fit_samples(&params, &samples, FitMethod::Reduced).unwrap();
        for (d1, d2) in [(1e-4, 0.0), (0.0, 1e-4), (1e-4, -1e-5), (-1e-5, 1e-4)] {
            let r1 = fit.r1 * (1.0 + d1);
            let r2 = fit.r2 * (1.0 + d2);
            let inside = samples
                .iter()
                .all(|s| r1 * s.y + r2 * s.x <= 1.0 + CONTAINMENT_TOL);
            let better = r1 * r2 > fit.r1 * fit.r2;
            assert!(!(inside && better));
        }
    }

    #[test]
    fn rejects_small_counts() {
        let params = EggParams::new(2, 0.25).unwrap();
        assert!(matches!(
            fit_min_volume_ellipsoid(&params, 0.5, 8),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
