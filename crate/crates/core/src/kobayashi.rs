//! Kobayashi metric of the pseudo-egg.
//!
//! At an axis point `(p, 0)` with `0 < p < 1` the metric is piecewise: with
//!
//! ```text
//! w = p^2 |vhat|^2 / (m^2 |v1|^2)
//! t = 2 m^2 w / (1 + 2m(m-1) w + sqrt(1 + 4m(m-1) w))
//! alpha in (0, 1) solving alpha^{2m} - t alpha^{2m-2} - (1-t) p^{2m} = 0
//! K1 = m alpha (1-t) |v1| / (p (1-alpha^2) (m(1-t) + t))
//! K2 = sqrt( m^2 p^{2m-2} |v1|^2 / (1-p^{2m})^2 + |vhat|^2 / (1-p^{2m}) )
//! ```
//!
//! the metric is `K1` for `w <= 1`, `K2` for `w >= 1/(4m(1-m))` and
//! `min(K1, K2)` in between. The switch happens at a single `w0` obtained
//! from the root `x0` of a mixed-power equation (see [`solve_crossover`]).
//! General points are reduced to axis points with the automorphisms of
//! [`crate::egg_domain`].

use serde::{Serialize, Serializer};

use crate::egg_domain::{
    self, check_axis, zhat_norm_sqr, CMatrix, CVector, DomainPoint, EggParams, TangentVector,
};
use crate::error::{Error, Result};
use crate::roots;

/// Smallest count accepted by [`indicatrix_boundary`].
pub const MIN_BOUNDARY_SAMPLES: usize = 16;
/// Smallest count accepted by [`square_convexity_check`].
pub const MIN_CONVEXITY_SAMPLES: usize = 64;

const RADICAND_TOL: f64 = 1e-14;
const T_CLAMP_TOL: f64 = 1e-14;
const CROSSOVER_SCAN_INTERVALS: usize = 1000;
const CROSSOVER_T_TOL: f64 = 1e-8;
const CROSSOVER_K_TOL: f64 = 1e-7;

/// The ratio `w`, infinite exactly when `v1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WValue {
    Finite(f64),
    Infinite,
}

impl WValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            WValue::Finite(w) => Some(w),
            WValue::Infinite => None,
        }
    }
}

impl Serialize for WValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WValue::Finite(w) => s.serialize_f64(*w),
            WValue::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    /// `p = 0`: the metric is the gauge of the domain.
    Gauge,
    K1,
    K2,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Branch {
    K1,
    K2,
}

/// The crossover data `(x0, t0, w0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossover {
    pub x0: f64,
    pub t0: f64,
    pub w0: f64,
    /// Residual of the defining equation at `x0`.
    pub residual: f64,
    /// `|K1 - K2| / K2` at a direction realizing `w = w0`.
    pub mismatch: f64,
}

/// Every intermediate of an axis evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KobayashiBreakdown {
    pub p: f64,
    pub w: Option<WValue>,
    pub t: Option<f64>,
    pub alpha: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub x0: Option<f64>,
    pub t0: Option<f64>,
    pub w0: Option<f64>,
    pub regime: Regime,
    /// Which of `K1`, `K2` the `w0` split predicts.
    pub sharp_branch: Option<Branch>,
    /// Relative gap between `value` and the branch predicted by `w0`.
    pub branch_disagreement: Option<f64>,
    pub value: f64,
}

fn p2m(params: &EggParams, p: f64) -> f64 {
    p.powf(2.0 * params.m())
}

fn check_open_axis(p: f64) -> Result<()> {
    check_axis(p)?;
    if p == 0.0 {
        return Err(Error::InvalidArgument("this operation requires 0 < p < 1".into()));
    }
    Ok(())
}

pub fn compute_w(params: &EggParams, p: f64, v: &TangentVector) -> Result<WValue> {
    let v1 = v[0].norm_sqr();
    let vh = zhat_norm_sqr(v);
    if v1 == 0.0 && vh == 0.0 {
        return Err(Error::InvalidArgument(
            "w is undefined for the zero vector".into(),
        ));
    }
    if v1 == 0.0 {
        return Ok(WValue::Infinite);
    }
    let m = params.m();
    Ok(WValue::Finite(p * p * vh / (m * m * v1)))
}

pub fn compute_t(params: &EggParams, w: f64) -> Result<f64> {
    let m = params.m();
    if !(w >= 0.0) {
        return Err(Error::InvalidArgument(format!("w = {w} must be nonnegative")));
    }
    let mut radicand = 1.0 + 4.0 * m * (m - 1.0) * w;
    if radicand < -RADICAND_TOL {
        return Err(Error::InvalidArgument(format!(
            "w = {w} exceeds 1/(4m(1-m)) = {}",
            params.w_max()
        )));
    }
    // t has a square-root singularity at w_max: a radicand at rounding level
    // is the endpoint itself.
    if radicand < RADICAND_TOL {
        radicand = 0.0;
    }
    let t = 2.0 * m * m * w / (1.0 + 2.0 * m * (m - 1.0) * w + radicand.sqrt());
    let t_top = m / (1.0 - m);
    Ok(if t < 0.0 && t > -T_CLAMP_TOL {
        0.0
    } else if t > t_top && t < t_top + T_CLAMP_TOL {
        t_top
    } else {
        t
    })
}

/// Unique root in `(0, 1)` of `alpha^{2m} - t alpha^{2m-2} - (1-t) p^{2m}`.
///
/// The root lies in `[p, 1)`: the left side is `t p^{2m-2} (p^2 - 1) <= 0`
/// at `alpha = p` and `(1-t)(1-p^{2m}) > 0` at `alpha = 1`.
pub fn solve_alpha(params: &EggParams, p: f64, t: f64) -> Result<f64> {
    check_open_axis(p)?;
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} must lie in [0, 1)")));
    }
    if t == 0.0 {
        return Ok(p);
    }
    let two_m = 2.0 * params.m();
    let rhs = (1.0 - t) * p2m(params, p);
    let f = |a: f64| a.powf(two_m) - t * a.powf(two_m - 2.0) - rhs;
    let df = |a: f64| two_m * a.powf(two_m - 1.0) - t * (two_m - 2.0) * a.powf(two_m - 3.0);
    roots::bisect_newton(f, df, p, 1.0)
}

/// Residual of the alpha equation, exposed for diagnostics.
pub fn alpha_residual(params: &EggParams, p: f64, t: f64, alpha: f64) -> f64 {
    let two_m = 2.0 * params.m();
    alpha.powf(two_m) - t * alpha.powf(two_m - 2.0) - (1.0 - t) * p2m(params, p)
}

pub fn k1(params: &EggParams, p: f64, v: &TangentVector, t: f64, alpha: f64) -> f64 {
    let m = params.m();
    m * alpha * (1.0 - t) * v[0].norm() / (p * (1.0 - alpha * alpha) * (m * (1.0 - t) + t))
}

pub fn k2(params: &EggParams, p: f64, v: &TangentVector) -> f64 {
    let m = params.m();
    let big_p = p2m(params, p);
    let first = m * m * p.powf(2.0 * m - 2.0) * v[0].norm_sqr() / ((1.0 - big_p) * (1.0 - big_p));
    (first + zhat_norm_sqr(v) / (1.0 - big_p)).sqrt()
}

/// `K1` through the full chain `w -> t -> alpha`, for `v1 != 0` and `w` in
/// the domain of `t`.
fn k1_chain(params: &EggParams, p: f64, v: &TangentVector, w: f64) -> Result<(f64, f64, f64)> {
    let t = compute_t(params, w)?;
    let alpha = solve_alpha(params, p, t)?;
    Ok((t, alpha, k1(params, p, v, t, alpha)))
}

/// The crossover equation
/// `-(1-m)^2 x^{4m} + (-1-2m+2m^2+P) x^{4m-2} - m^2 x^{4m-4}
///  + (1-(2m-1)P) x^{2m} + (1+(2m-1)P) x^{2m-2} - P`, `P = p^{2m}`.
pub fn crossover_equation(params: &EggParams, p: f64, x: f64) -> f64 {
    let m = params.m();
    let big_p = p2m(params, p);
    -(1.0 - m).powi(2) * x.powf(4.0 * m) + (-1.0 - 2.0 * m + 2.0 * m * m + big_p) * x.powf(4.0 * m - 2.0)
        - m * m * x.powf(4.0 * m - 4.0)
        + (1.0 - (2.0 * m - 1.0) * big_p) * x.powf(2.0 * m)
        + (1.0 + (2.0 * m - 1.0) * big_p) * x.powf(2.0 * m - 2.0)
        - big_p
}

fn crossover_derivative(params: &EggParams, p: f64, x: f64) -> f64 {
    let m = params.m();
    let big_p = p2m(params, p);
    -(1.0 - m).powi(2) * 4.0 * m * x.powf(4.0 * m - 1.0)
        + (-1.0 - 2.0 * m + 2.0 * m * m + big_p) * (4.0 * m - 2.0) * x.powf(4.0 * m - 3.0)
        - m * m * (4.0 * m - 4.0) * x.powf(4.0 * m - 5.0)
        + (1.0 - (2.0 * m - 1.0) * big_p) * 2.0 * m * x.powf(2.0 * m - 1.0)
        + (1.0 + (2.0 * m - 1.0) * big_p) * (2.0 * m - 2.0) * x.powf(2.0 * m - 3.0)
}

/// `t` as a function of the alpha-root: inverse of [`solve_alpha`].
pub fn t_from_alpha(params: &EggParams, p: f64, alpha: f64) -> f64 {
    let two_m = 2.0 * params.m();
    let big_p = p2m(params, p);
    (alpha.powf(two_m) - big_p) / (alpha.powf(two_m - 2.0) - big_p)
}

/// `w = t / (m + (1-m) t)^2`, the inverse of [`compute_t`] on its domain.
pub fn w_from_t(params: &EggParams, t: f64) -> f64 {
    let m = params.m();
    t / (m + (1.0 - m) * t).powi(2)
}

/// Locates `x0`, `t0 = (x0^{2m} - p^{2m}) / (x0^{2m-2} - p^{2m})` and
/// `w0 = t0 / (m + (1-m) t0)^2`.
///
/// The defining equation also vanishes at `x = 1`, so every root found on
/// a fine scan of `(p, 1)` is screened: `w0` must lie in `(1, 1/(4m(1-m)))`,
/// `t(w0)` must reproduce `t0` and `K1 = K2` must hold at `w = w0`.
pub fn solve_crossover(params: &EggParams, p: f64) -> Result<Crossover> {
    check_open_axis(p)?;
    let m = params.m();
    let eps = 1e-10 * (1.0 - p);
    let f = |x: f64| crossover_equation(params, p, x);
    let df = |x: f64| crossover_derivative(params, p, x);
    let brackets = roots::sign_change_brackets(f, p + eps, 1.0 - eps, CROSSOVER_SCAN_INTERVALS);

    let mut best: Option<Crossover> = None;
    for (lo, hi) in brackets {
        let Ok(x0) = roots::bisect_newton(f, df, lo, hi) else {
            continue;
        };
        let t0 = t_from_alpha(params, p, x0);
        let w0 = w_from_t(params, t0);
        if !(w0 > 1.0 && w0 < params.w_max()) {
            continue;
        }
        let Ok(t_check) = compute_t(params, w0) else {
            continue;
        };
        if (t_check - t0).abs() > CROSSOVER_T_TOL {
            continue;
        }
        // v = (1, m sqrt(w0) / p, 0, ...) realizes w = w0.
        let mut v = CVector::zeros(params.n());
        v[0] = 1.0.into();
        v[1] = (m * w0.sqrt() / p).into();
        let Ok((_, _, k1v)) = k1_chain(params, p, &v, w0) else {
            continue;
        };
        let k2v = k2(params, p, &v);
        let mismatch = (k1v - k2v).abs() / k2v;
        if mismatch > CROSSOVER_K_TOL {
            continue;
        }
        let candidate = Crossover {
            x0,
            t0,
            w0,
            residual: f(x0).abs(),
            mismatch,
        };
        if best.is_none_or(|b| candidate.mismatch < b.mismatch) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| {
        Error::NoCrossover(format!(
            "no admissible root of the crossover equation for m = {m}, p = {p}"
        ))
    })
}

/// Kobayashi metric at `(p, 0, ..., 0)` together with all intermediates.
pub fn kobayashi_axis(params: &EggParams, p: f64, v: &TangentVector) -> Result<(f64, KobayashiBreakdown)> {
    check_axis(p)?;
    if v.len() != params.n() {
        return Err(Error::InvalidArgument(format!(
            "tangent vector has {} entries, expected {}",
            v.len(),
            params.n()
        )));
    }
    let mut bd = KobayashiBreakdown {
        p,
        w: None,
        t: None,
        alpha: None,
        k1: None,
        k2: None,
        x0: None,
        t0: None,
        w0: None,
        regime: Regime::K2,
        sharp_branch: None,
        branch_disagreement: None,
        value: 0.0,
    };
    if v.iter().all(|c| c.norm_sqr() == 0.0) {
        if p > 0.0 {
            bd.k2 = Some(0.0);
        } else {
            bd.regime = Regime::Gauge;
        }
        return Ok((0.0, bd));
    }
    if p == 0.0 {
        bd.regime = Regime::Gauge;
        bd.value = egg_domain::minkowski_functional(params, v);
        return Ok((bd.value, bd));
    }

    let w = compute_w(params, p, v)?;
    bd.w = Some(w);
    let k2v = k2(params, p, v);
    bd.k2 = Some(k2v);

    match w {
        WValue::Infinite => {
            bd.regime = Regime::K2;
            bd.value = k2v;
        }
        WValue::Finite(wf) if wf >= params.w_max() => {
            bd.regime = Regime::K2;
            bd.value = k2v;
        }
        WValue::Finite(wf) => {
            let (t, alpha, k1v) = k1_chain(params, p, v, wf)?;
            bd.t = Some(t);
            bd.alpha = Some(alpha);
            bd.k1 = Some(k1v);
            if wf <= 1.0 {
                bd.regime = Regime::K1;
                bd.value = k1v;
            } else {
                bd.regime = Regime::Min;
                // ties resolve to K2
                bd.value = if k1v < k2v { k1v } else { k2v };
            }
        }
    }

    if let Ok(c) = solve_crossover(params, p) {
        bd.x0 = Some(c.x0);
        bd.t0 = Some(c.t0);
        bd.w0 = Some(c.w0);
        let branch = match w {
            WValue::Finite(wf) if wf < c.w0 => Branch::K1,
            _ => Branch::K2,
        };
        let predicted = match branch {
            Branch::K1 => bd.k1,
            Branch::K2 => bd.k2,
        };
        bd.sharp_branch = Some(branch);
        bd.branch_disagreement = predicted.map(|k| (k - bd.value).abs() / bd.value);
    }
    Ok((bd.value, bd))
}

/// Kobayashi metric at an arbitrary point, transported to the axis by the
/// normalizing automorphism: `K(z, v) = K((q, 0), dPhi_z v)`.
pub fn kobayashi_general(params: &EggParams, z: &DomainPoint, v: &TangentVector) -> Result<f64> {
    kobayashi_general_with(params, z, v, None)
}

/// As [`kobayashi_general`], with an explicit unitary factor in the ball
/// part of the normalizing automorphism.
pub fn kobayashi_general_with(
    params: &EggParams,
    z: &DomainPoint,
    v: &TangentVector,
    unitary: Option<CMatrix>,
) -> Result<f64> {
    let nz = egg_domain::normalize_with(params, z, unitary)?;
    let jv = nz.automorphism.jacobian(z.coords()) * v;
    Ok(kobayashi_axis(params, nz.axis, &jv)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CurveBranch {
    Upper,
    Lower,
}

/// A point of the indicatrix boundary in square coordinates
/// `x = |vhat|^2`, `y = |v1|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KCurveSample {
    /// Curve parameter, present on the upper curve only.
    pub alpha: Option<f64>,
    pub x: f64,
    pub y: f64,
    pub branch: CurveBranch,
}

impl KCurveSample {
    /// A real tangent vector `(sqrt(y), sqrt(x), 0, ...)` on the indicatrix.
    pub fn tangent(&self, n: usize) -> TangentVector {
        let mut v = CVector::zeros(n);
        v[0] = self.y.sqrt().into();
        v[1] = self.x.sqrt().into();
        v
    }
}

/// `x(alpha)` on the upper K-curve.
pub fn upper_x(params: &EggParams, p: f64, alpha: f64) -> f64 {
    let m = params.m();
    let big_p = p2m(params, p);
    let a4m2 = alpha.powf(4.0 * m - 2.0);
    (a4m2 + big_p * big_p - big_p * alpha.powf(2.0 * m - 2.0) - big_p * alpha.powf(2.0 * m)) / a4m2
}

/// `y(alpha)` on the upper K-curve.
pub fn upper_y(params: &EggParams, p: f64, alpha: f64) -> f64 {
    let m = params.m();
    let big_p = p2m(params, p);
    let inner = p * (m * alpha.powf(2.0 * m - 2.0) - (m - 1.0) * alpha.powf(2.0 * m) - big_p)
        / (m * alpha.powf(2.0 * m - 1.0));
    inner * inner
}

/// `y` on the lower K-curve
/// `m^2 p^{2m-2} y / (1-p^{2m})^2 + x / (1-p^{2m}) = 1`.
pub fn lower_y(params: &EggParams, p: f64, x: f64) -> f64 {
    let m = params.m();
    let big_p = p2m(params, p);
    (1.0 - big_p) * (1.0 - big_p - x) / (m * m * p.powf(2.0 * m - 2.0))
}

/// Inverts `x(alpha) = target` on `[p, x0]`, where `x` is increasing.
fn upper_alpha_for_x(params: &EggParams, p: f64, x0: f64, target: f64) -> Result<f64> {
    roots::bisect(|a| upper_x(params, p, a) - target, p, x0, 1e-15)
}

/// Samples of the indicatrix boundary at `(p, 0)`.
///
/// Samples are equally spaced in `x` over `[0, 1 - p^{2m}]`: those left of
/// the crossover come from the upper curve (the parameter `alpha` is found by
/// inverting `x(alpha)`), the rest from the lower line. Both intercepts
/// `(0, (1-p^2)^2)` and `(1-p^{2m}, 0)` and the crossover point are included.
pub fn indicatrix_boundary(params: &EggParams, p: f64, count: usize) -> Result<Vec<KCurveSample>> {
    check_open_axis(p)?;
    if count < MIN_BOUNDARY_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_BOUNDARY_SAMPLES,
            got: count,
        });
    }
    let cross = solve_crossover(params, p)?;
    let x_cross = upper_x(params, p, cross.x0);
    let x_end = 1.0 - p2m(params, p);
    let n_up = ((count as f64 * x_cross / x_end).round() as usize).clamp(2, count - 1);
    let n_low = count - n_up;

    let mut out = Vec::with_capacity(count);
    for k in 0..n_up {
        let alpha = if k == 0 {
            p
        } else if k == n_up - 1 {
            cross.x0
        } else {
            let target = x_cross * k as f64 / (n_up - 1) as f64;
            upper_alpha_for_x(params, p, cross.x0, target)?
        };
        let x = if k == 0 { 0.0 } else { upper_x(params, p, alpha) };
        out.push(KCurveSample {
            alpha: Some(alpha),
            x,
            y: upper_y(params, p, alpha),
            branch: CurveBranch::Upper,
        });
    }
    for k in 1..=n_low {
        let x = if k == n_low {
            x_end
        } else {
            x_cross + (x_end - x_cross) * k as f64 / n_low as f64
        };
        out.push(KCurveSample {
            alpha: None,
            x,
            y: lower_y(params, p, x).max(0.0),
            branch: CurveBranch::Lower,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub is_convex: bool,
    /// Smallest second divided difference of `y(x)`, in units of
    /// `y(0) / x_cross^2`.
    pub min_second_difference: f64,
}

/// Discrete strict convexity of `y` as a function of `x` along the upper curve.
pub fn square_convexity_check(params: &EggParams, p: f64, count: usize) -> Result<ConvexityReport> {
    check_open_axis(p)?;
    if count < MIN_CONVEXITY_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_CONVEXITY_SAMPLES,
            got: count,
        });
    }
    let cross = solve_crossover(params, p)?;
    let x_cross = upper_x(params, p, cross.x0);
    let mut pts = Vec::with_capacity(count);
    for k in 0..count {
        let alpha = match k {
            0 => p,
            k if k == count - 1 => cross.x0,
            _ => upper_alpha_for_x(params, p, cross.x0, x_cross * k as f64 / (count - 1) as f64)?,
        };
        pts.push((upper_x(params, p, alpha), upper_y(params, p, alpha)));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = pts[0].1 / (x_cross * x_cross);
    let mut min_dd = f64::INFINITY;
    for w in pts.windows(3) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let (x2, y2) = w[2];
        let s01 = (y1 - y0) / (x1 - x0);
        let s12 = (y2 - y1) / (x2 - x1);
        let dd = 2.0 * (s12 - s01) / (x2 - x0);
        min_dd = min_dd.min(dd / scale);
    }
    Ok(ConvexityReport {
        is_convex: min_dd > -1e-10,
        min_second_difference: min_dd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egg_domain::Complex;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn v(xs: &[Complex]) -> CVector {
        CVector::from_column_slice(xs)
    }

    fn params(n: usize, m: f64) -> EggParams {
        EggParams::new(n, m).unwrap()
    }

    #[test]
    fn w_examples() {
        let pr = params(3, 0.25);
        assert_eq!(
            compute_w(&pr, 0.5, &v(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])).unwrap(),
            WValue::Finite(0.0)
        );
        assert_eq!(
            compute_w(&pr, 0.5, &v(&[c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.1)])).unwrap(),
            WValue::Infinite
        );
        assert_eq!(
            compute_w(&pr, 0.5, &v(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])).unwrap(),
            WValue::Finite(4.0)
        );
        assert!(compute_w(&pr, 0.5, &CVector::zeros(3)).is_err());
    }

    #[test]
    fn t_examples() {
        for m in [0.1, 0.25, 0.4] {
            let pr = params(2, m);
            assert_eq!(compute_t(&pr, 0.0).unwrap(), 0.0);
            let t1 = compute_t(&pr, 1.0).unwrap();
            assert!((t1 - (m / (1.0 - m)).powi(2)).abs() < 1e-15);
            let tmax = compute_t(&pr, pr.w_max()).unwrap();
            assert!((tmax - m / (1.0 - m)).abs() < 1e-14);
            assert!(compute_t(&pr, pr.w_max() * 1.01).is_err());
            // increasing on its domain
            let mut prev = -1.0;
            for k in 0..=200 {
                let t = compute_t(&pr, pr.w_max() * k as f64 / 200.0).unwrap();
                assert!(t > prev);
                prev = t;
            }
        }
    }

    #[test]
    fn alpha_examples() {
        let pr = params(2, 0.25);
        assert_eq!(solve_alpha(&pr, 0.5, 0.0).unwrap(), 0.5);
        let a = solve_alpha(&pr, 0.5, 0.1).unwrap();
        let f = |x: f64| x.powf(0.5) - 0.1 * x.powf(-1.5) - 0.9 * 0.5f64.powf(0.5);
        assert!(f(a).abs() <= 1e-12);
        // independent uniqueness scan: exactly one sign change on a 1000-point grid
        let grid: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();
        let changes = grid
            .windows(2)
            .filter(|w| (f(w[0]) < 0.0) != (f(w[1]) < 0.0))
            .count();
        assert_eq!(changes, 1);
        let k = grid
            .windows(2)
            .position(|w| (f(w[0]) < 0.0) != (f(w[1]) < 0.0))
            .unwrap();
        assert!(grid[k] <= a && a <= grid[k + 1]);
        // increasing in t
        let mut prev = 0.0;
        for k in 0..100 {
            let t = 0.33 * k as f64 / 100.0;
            let a = solve_alpha(&pr, 0.5, t).unwrap();
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn k1_disc_slice() {
        let pr = params(3, 0.25);
        for p in [0.1, 0.5, 0.9] {
            let vv = v(&[c(0.3, -0.4), c(0.0, 0.0), c(0.0, 0.0)]);
            let k = k1(&pr, p, &vv, 0.0, p);
            assert!((k - 0.5 / (1.0 - p * p)).abs() < 1e-14);
        }
    }

    #[test]
    fn k2_collapses() {
        let pr = params(3, 0.25);
        let p = 0.5f64;
        let big_p = p.powf(0.5);
        let vv = v(&[c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.8)]);
        assert!((k2(&pr, p, &vv) - 1.0 / (1.0 - big_p).sqrt()).abs() < 1e-14);
        let vv = v(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((k2(&pr, p, &vv) - 0.25 * p.powf(-0.75) * 2.0 / (1.0 - big_p)).abs() < 1e-14);
        let pr2 = params(2, 0.25);
        let vv = v(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let expected = (0.0625 * p.powf(-1.5) / (1.0 - big_p).powi(2) + 1.0 / (1.0 - big_p)).sqrt();
        assert!((k2(&pr2, p, &vv) - expected).abs() < 1e-14);
    }

    #[test]
    fn k1_chain_is_homogeneous_and_respects_disc_bound() {
        let pr = params(3, 0.25);
        let p = 0.5;
        let vv = v(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let w = compute_w(&pr, p, &vv).unwrap().finite().unwrap();
        // w = 4 lies beyond w_max = 4/3: K1 is not defined there.
        assert!(compute_t(&pr, w).is_err());
        let vv = v(&[c(1.0, 0.0), c(0.2, 0.1), c(0.0, 0.0)]);
        let w = compute_w(&pr, p, &vv).unwrap().finite().unwrap();
        let (_, _, k) = k1_chain(&pr, p, &vv, w).unwrap();
        let lambda = c(-1.5, 2.0);
        let scaled = &vv * lambda;
        let (_, _, ks) = k1_chain(&pr, p, &scaled, w).unwrap();
        assert!((ks - 2.5 * k).abs() < 1e-13 * ks);
        // Upper bounds from analytic discs through (p, 0): the disc in the z1
        // direction gives K <= |v1| / (1 - p^2) only for vhat = 0; for a general
        // v the straight disc zeta -> (p, 0) + zeta v / r stays inside for
        // r = 1 / (largest admissible radius), giving K <= 1 / radius.
        let radius = {
            let (mut lo, mut hi) = (0.0, 10.0);
            for _ in 0..200 {
                let mid = 0.5f64 * (lo + hi);
                // the whole circle of radius mid must be inside
                let inside = (0..256).all(|k| {
                    let th = std::f64::consts::TAU * k as f64 / 256.0;
                    let e = Complex::from_polar(mid, th);
                    let z = v(&[c(p, 0.0) + e * vv[0], e * vv[1], c(0.0, 0.0)]);
                    crate::egg_domain::contains(&pr, &z)
                });
                if inside {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            lo
        };
        let (val, _) = kobayashi_axis(&pr, p, &vv).unwrap();
        assert!(val <= 1.0 / radius * (1.0 + 1e-6), "{val} > {}", 1.0 / radius);
    }

    #[test]
    fn crossover_brackets_and_consistency() {
        for m in [0.1, 0.25, 0.4] {
            let pr = params(2, m);
            for k in 1..=9 {
                let p = k as f64 / 10.0;
                let c = solve_crossover(&pr, p).unwrap();
                assert!(c.w0 > 1.0 && c.w0 < pr.w_max(), "m={m} p={p} w0={}", c.w0);
                assert!(c.x0 > p && c.x0 < 1.0);
                assert!(c.residual <= 1e-10, "residual {}", c.residual);
                assert!((compute_t(&pr, c.w0).unwrap() - c.t0).abs() <= 1e-8);
                assert!(c.mismatch <= 1e-7);
            }
        }
    }

    #[test]
    fn regime_agreement_around_crossover() {
        let pr = params(2, 0.25);
        let p = 0.5;
        let c = solve_crossover(&pr, p).unwrap();
        for (w, expect) in [
            (c.w0 * (1.0 - 1e-3), Branch::K1),
            (c.w0 * (1.0 + 1e-3), Branch::K2),
        ] {
            let vv = v(&[c_(1.0), c_(0.25 * w.sqrt() / p)]);
            let (_, bd) = kobayashi_axis(&pr, p, &vv).unwrap();
            assert_eq!(bd.regime, Regime::Min);
            let k1v = bd.k1.unwrap();
            let k2v = bd.k2.unwrap();
            match expect {
                Branch::K1 => assert!(k1v < k2v),
                Branch::K2 => assert!(k2v < k1v),
            }
            assert_eq!(bd.sharp_branch, Some(expect));
            assert!(bd.branch_disagreement.unwrap() < 1e-12);
        }
    }

    fn c_(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    #[test]
    fn single_switch_on_dense_grid() {
        for m in [0.1, 0.25, 0.4] {
            let pr = params(2, m);
            for p in [0.2, 0.6, 0.9] {
                let c = solve_crossover(&pr, p).unwrap();
                let mut switches = 0;
                let mut last: Option<bool> = None;
                let steps = 2000;
                for k in 1..steps {
                    let w = 1.0 + (pr.w_max() - 1.0) * k as f64 / steps as f64;
                    let vv = v(&[c_(1.0), c_(m * w.sqrt() / p)]);
                    let (_, bd) = kobayashi_axis(&pr, p, &vv).unwrap();
                    let k1_wins = bd.k1.unwrap() < bd.k2.unwrap();
                    if let Some(prev) = last {
                        if prev != k1_wins {
                            switches += 1;
                            let dw = (pr.w_max() - 1.0) / steps as f64;
                            assert!((w - c.w0).abs() <= 1.5 * dw, "switch at {w}, w0 = {}", c.w0);
                        }
                    }
                    last = Some(k1_wins);
                }
                assert_eq!(switches, 1, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn axis_examples() {
        let pr = params(3, 0.25);
        for p in [0.1, 0.5, 0.9] {
            let (val, bd) = kobayashi_axis(&pr, p, &v(&[c_(1.0), c_(0.0), c_(0.0)])).unwrap();
            assert!((val - 1.0 / (1.0 - p * p)).abs() <= 1e-12 * val);
            assert_eq!(bd.regime, Regime::K1);
            let vh = v(&[c_(0.0), c(0.3, 0.4), c(0.0, -1.2)]);
            let (val, bd) = kobayashi_axis(&pr, p, &vh).unwrap();
            let norm = (0.25f64 + 1.44).sqrt();
            assert!((val - norm / (1.0 - p.sqrt()).sqrt()).abs() <= 1e-12 * val);
            assert_eq!(bd.w, Some(WValue::Infinite));
        }
        let any = v(&[c(0.3, 0.1), c(-0.2, 0.5), c(0.1, 0.0)]);
        let (val, bd) = kobayashi_axis(&pr, 0.0, &any).unwrap();
        assert_eq!(bd.regime, Regime::Gauge);
        assert_eq!(val, egg_domain::minkowski_functional(&pr, &any));
        assert_eq!(kobayashi_axis(&pr, 0.5, &CVector::zeros(3)).unwrap().0, 0.0);
        assert!(kobayashi_axis(&pr, 1.0, &any).is_err());
    }

    #[test]
    fn general_point_on_axis_matches_axis_formula() {
        let pr = params(3, 0.3);
        let z = DomainPoint::axis(&pr, 0.4).unwrap();
        let vv = v(&[c(0.2, 0.1), c(0.5, -0.3), c(0.0, 0.2)]);
        let a = kobayashi_axis(&pr, 0.4, &vv).unwrap().0;
        let g = kobayashi_general(&pr, &z, &vv).unwrap();
        assert!((a - g).abs() <= 1e-15 * a);
    }

    #[test]
    fn points_of_z_use_the_gauge_after_transport() {
        let pr = params(3, 0.3);
        let z = DomainPoint::from_slice(&pr, &[c_(0.0), c(0.3, 0.2), c(-0.1, 0.0)]).unwrap();
        let vv = v(&[c(0.2, 0.1), c(0.5, -0.3), c(0.0, 0.2)]);
        let psi = crate::egg_domain::BallAutomorphism::moving(z.zhat()).unwrap();
        let mut jv = vv.clone();
        jv[0] *= (1.0 - z.zhat().norm_squared()).powf(-1.0 / 0.6);
        let inner = psi.jacobian(&z.zhat()) * z_hat_of(&vv);
        jv.rows_mut(1, 2).copy_from(&inner);
        let expected = egg_domain::minkowski_functional(&pr, &jv);
        let got = kobayashi_general(&pr, &z, &vv).unwrap();
        assert!((got - expected).abs() <= 1e-14 * expected);
    }

    fn z_hat_of(x: &CVector) -> CVector {
        crate::egg_domain::zhat(x)
    }

    #[test]
    fn boundary_endpoints_and_join() {
        for m in [0.1, 0.25, 0.4] {
            let pr = params(2, m);
            for p in [0.1, 0.5, 0.9] {
                let s = indicatrix_boundary(&pr, p, 256).unwrap();
                assert_eq!(s.len(), 256);
                assert_eq!(s[0].x, 0.0);
                assert!((s[0].y - (1.0 - p * p).powi(2)).abs() < 1e-14);
                let last = s.last().unwrap();
                assert!((last.x - (1.0 - p.powf(2.0 * m))).abs() < 1e-15);
                assert_eq!(last.y, 0.0);
                let c = solve_crossover(&pr, p).unwrap();
                let xc = upper_x(&pr, p, c.x0);
                assert!((upper_y(&pr, p, c.x0) - lower_y(&pr, p, xc)).abs() <= 1e-8);
                // x is increasing along the samples
                assert!(s.windows(2).all(|w| w[1].x > w[0].x));
            }
        }
        assert!(indicatrix_boundary(&params(2, 0.25), 0.5, 8).is_err());
    }

    #[test]
    fn boundary_samples_have_unit_metric() {
        for m in [0.1, 0.25, 0.4] {
            for n in [2, 3] {
                let pr = params(n, m);
                for p in [0.1, 0.5, 0.9] {
                    for s in indicatrix_boundary(&pr, p, 128).unwrap() {
                        let (k, _) = kobayashi_axis(&pr, p, &s.tangent(n)).unwrap();
                        assert!((k - 1.0).abs() <= 1e-8, "m={m} p={p} {s:?}: K = {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn square_convexity() {
        let r = square_convexity_check(&params(2, 0.25), 0.5, 512).unwrap();
        assert!(r.is_convex && r.min_second_difference > 0.0);
        let r = square_convexity_check(&params(2, 0.1), 0.9, 512).unwrap();
        assert!(r.is_convex && r.min_second_difference > 0.0);
        assert!(matches!(
            square_convexity_check(&params(2, 0.25), 0.5, 2),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
