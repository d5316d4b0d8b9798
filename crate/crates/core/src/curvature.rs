//! Curvature of Hermitian metrics, specialized to the Wu metric of the egg.
//!
//! For a metric `g_{i jbar}` the tensor is
//!
//! ```text
//! R_{i jbar k lbar} = -d_k dbar_l g_{i jbar} + sum_{a,b} g^{a bbar} (d_k g_{i bbar}) (dbar_l g_{a jbar})
//! ```
//!
//! and the holomorphic sectional curvature along `xi` is
//! `sum R xi_i conj(xi_j) xi_k conj(xi_l) / (sum g_{i jbar} xi_i conj(xi_j))^2`.
//! With this normalization the Poincaré disc `1/(1-|z|^2)^2` has curvature `-2`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::egg_domain::{self, check_axis, CMatrix, CVector, Complex, DomainPoint, EggParams, TangentVector};
use crate::error::{Error, Result};
use crate::sampling;
use crate::wirtinger;
use crate::wu_metric::{self, HermitianForm};

/// Upper bound on the holomorphic sectional curvature at smooth points.
pub const HSC_BOUND: f64 = -0.5;
pub const HSC_BOUND_TOL: f64 = 1e-6;
/// Smallest eigenvalue of `sqrt(n) h - g` still accepted as semidefinite.
pub const COMPARISON_TOL: f64 = -1e-9;
pub const MIN_COMPARISON_SAMPLES: usize = 100;

/// Rank-4 tensor `R_{i jbar k lbar}`, stored row-major in `(i, j, k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    components: Vec<Complex>,
    pub base: CVector,
}

impl CurvatureTensor {
    pub fn zeros(n: usize, base: CVector) -> Self {
        Self {
            n,
            components: vec![Complex::new(0.0, 0.0); n * n * n * n],
            base,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex {
        self.components[self.index(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: Complex) {
        let idx = self.index(i, j, k, l);
        self.components[idx] = value;
    }

    /// Iterator over `((i, j, k, l), R_{i jbar k lbar})`.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), Complex)> + '_ {
        let n = self.n;
        self.components.iter().enumerate().map(move |(idx, c)| {
            let l = idx % n;
            let k = (idx / n) % n;
            let j = (idx / (n * n)) % n;
            let i = idx / (n * n * n);
            ((i, j, k, l), *c)
        })
    }

    /// Largest `|R_{i jbar k lbar} - conj(R_{j ibar l kbar})|`.
    pub fn hermitian_residual(&self) -> f64 {
        self.entries()
            .map(|((i, j, k, l), c)| (c - self.get(j, i, l, k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `sum R_{i jbar k lbar} xi_i conj(xi_j) xi_k conj(xi_l)`.
    pub fn contract(&self, xi: &TangentVector) -> Complex {
        let xb: Vec<Complex> = xi.iter().map(|c| c.conj()).collect();
        self.entries()
            .map(|((i, j, k, l), c)| c * xi[i] * xb[j] * xi[k] * xb[l])
            .sum()
    }
}

/// Curvature tensor of an arbitrary metric `z -> g(z)` by finite differences.
pub fn curvature_tensor_from<F>(metric: F, z: &CVector) -> Result<CurvatureTensor>
where
    F: Fn(&CVector) -> CMatrix,
{
    let n = z.len();
    let g = metric(z);
    // g^{a bbar} satisfies sum_b g^{a bbar} g_{c bbar} = delta_ac, i.e. M = (g^T)^{-1}.
    let inv = g
        .transpose()
        .try_inverse()
        .filter(|m| m.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
        .ok_or_else(|| Error::SingularMetric(format!("{z:?}")))?;
    let firsts: Vec<(CMatrix, CMatrix)> = (0..n).map(|k| wirtinger::first(&metric, z, k)).collect();
    let mut r = CurvatureTensor::zeros(n, z.clone());
    for k in 0..n {
        for l in 0..n {
            let second = wirtinger::mixed(&metric, z, k, l);
            let dk = &firsts[k].0;
            let dl = &firsts[l].1;
            // (dk M dl)[i, j] = sum_{a,b} dk[i, b] M[a, b] dl[a, j]
            let quad = dk * inv.transpose() * dl;
            for i in 0..n {
                for j in 0..n {
                    r.set(i, j, k, l, quad[(i, j)] - second[(i, j)]);
                }
            }
        }
    }
    Ok(r)
}

/// Finite-difference tensor of the Wu metric at a point off `Z`.
pub fn curvature_tensor_fd(params: &EggParams, z: &DomainPoint) -> Result<CurvatureTensor> {
    if z.on_z() {
        return Err(Error::InvalidArgument(
            "the Wu metric is not smooth on z1 = 0".into(),
        ));
    }
    curvature_tensor_from(|w| wu_metric::wu_entries(params, w), z.coords())
}

/// Index families carrying the nonzero components at an axis point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentFamily {
    /// `R_{1 1bar 1 1bar}`
    R1111,
    /// `R_{1 1bar j jbar}`
    R11jj,
    /// `R_{1 jbar j 1bar}` and `R_{j 1bar 1 jbar}`
    R1jj1,
    /// `R_{j jbar 1 1bar}`
    Rjj11,
    /// `R_{j jbar j jbar}`
    Rjjjj,
    /// `R_{i ibar j jbar}`, `i != j`
    Riijj,
    /// `R_{i jbar j ibar}`, `i != j`
    Rijji,
}

/// The family an index pattern `(i, j, k, l)` belongs to, if any.
pub fn component_family(i: usize, j: usize, k: usize, l: usize) -> Option<ComponentFamily> {
    use ComponentFamily::*;
    match (i, j, k, l) {
        (0, 0, 0, 0) => Some(R1111),
        (0, 0, k, l) if k == l => Some(R11jj),
        (0, j, k, 0) if j == k && j > 0 => Some(R1jj1),
        (i, 0, 0, l) if i == l && i > 0 => Some(R1jj1),
        (i, j, 0, 0) if i == j && i > 0 => Some(Rjj11),
        (i, j, k, l) if i > 0 && i == j && j == k && k == l => Some(Rjjjj),
        (i, j, k, l) if i > 0 && k > 0 && i == j && k == l && i != k => Some(Riijj),
        (i, j, k, l) if i > 0 && j > 0 && i == l && j == k && i != j => Some(Rijji),
        _ => None,
    }
}

/// Closed-form tensor at `(p, 0, ..., 0)`, `0 < p < 1`.
pub fn curvature_axis_closed_form(params: &EggParams, p: f64) -> Result<CurvatureTensor> {
    check_axis(p)?;
    if p == 0.0 {
        return Err(Error::InvalidArgument("closed form requires 0 < p < 1".into()));
    }
    let n = params.n();
    let m = params.m();
    let big_p = p.powf(2.0 * m);
    let q = 1.0 - p * p;
    let mut base = CVector::zeros(n);
    base[0] = Complex::new(p, 0.0);
    let mut r = CurvatureTensor::zeros(n, base);
    let value = |fam: ComponentFamily| match fam {
        ComponentFamily::R1111 => -2.0 / q.powi(4),
        ComponentFamily::R11jj => {
            -(1.0 + p * p) / (m * q.powi(3)) + p * p * (1.0 - big_p) / (m * m * q.powi(4))
        }
        ComponentFamily::R1jj1 => -(1.0 + p * p) / (m * q.powi(3)) + big_p / (q * q * (1.0 - big_p)),
        ComponentFamily::Rjj11 => -m * m * p.powf(2.0 * m - 2.0) / (1.0 - big_p).powi(3),
        ComponentFamily::Rjjjj => {
            -p * p / (m * m * q * q) - 1.0 / (1.0 - big_p) - 1.0 / (1.0 - big_p).powi(2)
        }
        ComponentFamily::Riijj => -1.0 / (1.0 - big_p).powi(2),
        ComponentFamily::Rijji => -p * p / (m * m * q * q) - 1.0 / (1.0 - big_p),
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if let Some(fam) = component_family(i, j, k, l) {
                        r.set(i, j, k, l, Complex::new(value(fam), 0.0));
                    }
                }
            }
        }
    }
    Ok(r)
}

/// Holomorphic sectional curvature from a tensor and the metric at the same point.
pub fn hsc_from(tensor: &CurvatureTensor, metric: &CMatrix, xi: &TangentVector) -> f64 {
    let form = HermitianForm::new(metric.clone(), tensor.base.clone());
    let g = form.quadratic(xi);
    tensor.contract(xi).re / (g * g)
}

/// Holomorphic sectional curvature of the Wu metric at a point off `Z`.
pub fn hsc(params: &EggParams, z: &DomainPoint, xi: &TangentVector) -> Result<f64> {
    check_direction(xi)?;
    let r = curvature_tensor_fd(params, z)?;
    Ok(hsc_from(&r, &wu_metric::wu_entries(params, z.coords()), xi))
}

/// Holomorphic sectional curvature at `(p, 0)` from the closed-form tensor.
pub fn hsc_axis(params: &EggParams, p: f64, xi: &TangentVector) -> Result<f64> {
    check_direction(xi)?;
    let r = curvature_axis_closed_form(params, p)?;
    Ok(hsc_from(&r, &wu_metric::wu_axis(params, p)?.entries, xi))
}

fn check_direction(xi: &TangentVector) -> Result<()> {
    if xi.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HscScanReport {
    pub max_hsc: f64,
    pub argmax_p: f64,
    pub argmax_direction: usize,
    pub min_hsc: f64,
    pub samples: usize,
    /// `max_hsc <= -1/2 + 1e-6`.
    pub bounded: bool,
    /// `max_hsc - min_hsc >= 0.1`.
    pub non_constant: bool,
}

/// Scan of the closed-form curvature over axis points and deterministic
/// directions. Every smooth point is an automorphic image of an axis point,
/// so this covers the smooth locus.
pub fn hsc_bound_scan(params: &EggParams, p_grid: &[f64], direction_count: usize) -> Result<HscScanReport> {
    if p_grid.is_empty() || direction_count == 0 {
        return Err(Error::InvalidArgument("scan grids must be nonempty".into()));
    }
    let dirs = sampling::sphere_directions(params.n(), direction_count);
    let per_p: Vec<Vec<f64>> = p_grid
        .par_iter()
        .map(|&p| {
            let r = curvature_axis_closed_form(params, p)?;
            let g = wu_metric::wu_axis(params, p)?.entries;
            Ok(dirs.iter().map(|xi| hsc_from(&r, &g, xi)).collect())
        })
        .collect::<Result<_>>()?;
    let mut max_hsc = f64::NEG_INFINITY;
    let mut min_hsc = f64::INFINITY;
    let mut argmax = (0, 0);
    for (ip, row) in per_p.iter().enumerate() {
        for (id, &v) in row.iter().enumerate() {
            if v > max_hsc {
                max_hsc = v;
                argmax = (ip, id);
            }
            min_hsc = min_hsc.min(v);
        }
    }
    Ok(HscScanReport {
        max_hsc,
        argmax_p: p_grid[argmax.0],
        argmax_direction: argmax.1,
        min_hsc,
        samples: p_grid.len() * direction_count,
        bounded: max_hsc <= HSC_BOUND + HSC_BOUND_TOL,
        non_constant: max_hsc - min_hsc >= 0.1,
    })
}

/// Entries `((1-|z|^2) delta_ij + zbar_i z_j) / (1-|z|^2)^2` of the
/// Poincaré-Bergman metric of the unit ball, equal to the identity at 0.
pub fn ball_metric_entries(z: &CVector) -> CMatrix {
    let n = z.len();
    let s = 1.0 - z.norm_squared();
    CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { s } else { 0.0 };
        (z[i].conj() * z[j] + delta) / (s * s)
    })
}

/// The ball metric restricted to the egg, which lies inside the unit ball.
pub fn comparison_metric_ball(z: &DomainPoint) -> HermitianForm {
    HermitianForm::new(ball_metric_entries(z.coords()), z.coords().clone())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub samples: usize,
    /// How many samples lie on `Z`.
    pub samples_on_z: usize,
    /// Smallest eigenvalue of `sqrt(n) h - g` over the samples.
    pub min_eigenvalue: f64,
    /// Same, divided by the largest eigenvalue of `sqrt(n) h` at that point.
    pub min_relative_eigenvalue: f64,
    /// `max |h - g|` at the origin.
    pub origin_gap: f64,
    pub passes: bool,
}

/// Checks `g <= sqrt(n) h` on random points (one in ten on `Z`) and
/// equality at the origin.
pub fn comparison_check(params: &EggParams, sample_count: usize, seed: u64) -> Result<ComparisonReport> {
    if sample_count < MIN_COMPARISON_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_COMPARISON_SAMPLES,
            got: sample_count,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<DomainPoint> = (0..sample_count)
        .map(|i| {
            if i % 10 == 0 {
                sampling::random_point_on_z(params, &mut rng)
            } else {
                sampling::random_point(params, &mut rng)
            }
        })
        .collect();
    let root_n = Complex::new((params.n() as f64).sqrt(), 0.0);
    let per_point: Vec<(f64, f64)> = points
        .par_iter()
        .map(|z| {
            let h = wu_metric::wu_general(params, z);
            let g = comparison_metric_ball(z);
            let scaled = HermitianForm::new(&h.entries * root_n, z.coords().clone());
            let diff = HermitianForm::new(&scaled.entries - &g.entries, z.coords().clone());
            let lo = diff.min_eigenvalue();
            let top = *scaled.eigenvalues().last().expect("nonempty");
            (lo, lo / top)
        })
        .collect();
    let min_eigenvalue = per_point.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let min_relative_eigenvalue = per_point.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let origin = DomainPoint::origin(params);
    let origin_gap = wu_metric::wu_general(params, &origin).distance(&comparison_metric_ball(&origin));
    Ok(ComparisonReport {
        samples: sample_count,
        samples_on_z: points.iter().filter(|p| p.on_z()).count(),
        min_eigenvalue,
        min_relative_eigenvalue,
        origin_gap,
        passes: min_eigenvalue >= COMPARISON_TOL && origin_gap <= 1e-12,
    })
}

/// Radius of the largest disc `{ zeta u : |zeta| < rho }` inside the egg.
pub fn slice_radius(params: &EggParams, u: &TangentVector) -> Result<f64> {
    check_direction(u)?;
    Ok(1.0 / egg_domain::minkowski_functional(params, u))
}

/// `h0(zeta) = sum h_{i jbar}(zeta u) u_i conj(u_j)`.
pub fn slice_coefficient(params: &EggParams, u: &TangentVector, zeta: Complex) -> f64 {
    let z = u * zeta;
    HermitianForm::new(wu_metric::wu_entries(params, &z), z).quadratic(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicePoint {
    pub re: f64,
    pub im: f64,
    pub h0: f64,
    /// `-(d dbar log h0) / h0`, absent at the origin.
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceMetric {
    pub direction: Vec<(f64, f64)>,
    pub radius: f64,
    pub spacing: f64,
    pub points: Vec<SlicePoint>,
    pub max_kappa: f64,
}

/// Samples the slice on the square grid `spacing * (a + i b)`,
/// `|a|, |b| <= half_count`, and evaluates the curvature by the five-point
/// Laplacian of `log h0` with the grid spacing as step.
pub fn slice_curvature(
    params: &EggParams,
    u: &TangentVector,
    spacing: f64,
    half_count: usize,
) -> Result<SliceMetric> {
    let rho = slice_radius(params, u)?;
    let unit = u / Complex::new(u.norm(), 0.0);
    let rho = rho * u.norm();
    let reach = spacing * ((half_count + 1) as f64) * 2f64.sqrt();
    if !(spacing > 0.0) || reach >= rho {
        return Err(Error::OutsideDomain(format!(
            "grid reaches |zeta| = {reach}, beyond the slice radius {rho}"
        )));
    }
    let log_h = |a: f64, b: f64| slice_coefficient(params, &unit, Complex::new(a, b)).ln();
    let hc = half_count as i64;
    let mut points = Vec::with_capacity(((2 * hc + 1) * (2 * hc + 1)) as usize);
    let mut max_kappa = f64::NEG_INFINITY;
    for ib in -hc..=hc {
        for ia in -hc..=hc {
            let (a, b) = (ia as f64 * spacing, ib as f64 * spacing);
            let h0 = slice_coefficient(params, &unit, Complex::new(a, b));
            let kappa = if ia == 0 && ib == 0 {
                None
            } else {
                let lap = (log_h(a + spacing, b)
                    + log_h(a - spacing, b)
                    + log_h(a, b + spacing)
                    + log_h(a, b - spacing)
                    - 4.0 * h0.ln())
                    / (spacing * spacing);
                Some(-0.25 * lap / h0)
            };
            if let Some(k) = kappa {
                max_kappa = max_kappa.max(k);
            }
            points.push(SlicePoint {
                re: a,
                im: b,
                h0,
                kappa,
            });
        }
    }
    Ok(SliceMetric {
        direction: unit.iter().map(|c| (c.re, c.im)).collect(),
        radius: rho,
        spacing,
        points,
        max_kappa,
    })
}

/// Radial test function `exp(-1 / (1 - (r/sigma)^2))` on `r < sigma`.
pub fn bump(sigma: f64, r: f64) -> f64 {
    let t = (r / sigma).powi(2);
    if t >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t)).exp()
    }
}

/// `d dbar` of [`bump`], which is `(phi'' + phi'/r) / 4` for radial `phi`.
pub fn bump_ddbar(sigma: f64, r: f64) -> f64 {
    let s2 = sigma * sigma;
    let t = r * r / s2;
    if t >= 1.0 {
        return 0.0;
    }
    let g = 1.0 / (1.0 - t);
    let phi = (-g).exp();
    let r2 = r * r / s2;
    -(2.0 / s2) * phi * (-2.0 * g.powi(4) * r2 + 4.0 * g.powi(3) * r2 + 2.0 * g * g) / 4.0
}

pub const DEFAULT_RADIAL_NODES: usize = 256;
pub const DEFAULT_ANGULAR_NODES: usize = 128;
pub const DEFAULT_BUMP_WIDTHS: [f64; 3] = [0.1, 0.2, 0.3];
/// Largest relative change of an integral under grid doubling.
pub const QUADRATURE_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpResult {
    pub sigma: f64,
    /// `int log h0 * d dbar phi`.
    pub lhs: f64,
    /// `int h0 * phi`.
    pub mass: f64,
    /// `lhs / mass`, the largest `c` this bump accepts.
    pub effective_c: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentsReport {
    pub direction: Vec<(f64, f64)>,
    pub c: f64,
    pub bumps: Vec<BumpResult>,
    /// Smallest effective constant minus `c`.
    pub margin: f64,
    pub passes: bool,
}

fn polar_integrals(params: &EggParams, u: &TangentVector, sigma: f64, nr: usize, nt: usize) -> (f64, f64) {
    let dr = sigma / nr as f64;
    let dt = std::f64::consts::TAU / nt as f64;
    let mut lhs = 0.0;
    let mut mass = 0.0;
    for i in 0..nr {
        let r = (i as f64 + 0.5) * dr;
        let phi = bump(sigma, r);
        let lap = bump_ddbar(sigma, r);
        for j in 0..nt {
            let theta = (j as f64 + 0.5) * dt;
            let h0 = slice_coefficient(params, u, Complex::from_polar(r, theta));
            let w = r * dr * dt;
            lhs += h0.ln() * lap * w;
            mass += h0 * phi * w;
        }
    }
    (lhs, mass)
}

/// Tests `int log h0 * d dbar phi >= c int h0 phi` on the disc through the
/// origin in direction `u`, for each bump width. The integrals are
/// accepted only if doubling both grid resolutions moves them by < 1%.
pub fn currents_negativity_test(
    params: &EggParams,
    u: &TangentVector,
    c: f64,
    widths: &[f64],
) -> Result<CurrentsReport> {
    currents_negativity_test_with(params, u, c, widths, DEFAULT_RADIAL_NODES, DEFAULT_ANGULAR_NODES)
}

pub fn currents_negativity_test_with(
    params: &EggParams,
    u: &TangentVector,
    c: f64,
    widths: &[f64],
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<CurrentsReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c = {c} must be positive")));
    }
    check_direction(u)?;
    let unit = u / Complex::new(u.norm(), 0.0);
    let rho = slice_radius(params, &unit)?;
    let mut bumps = Vec::with_capacity(widths.len());
    for &sigma in widths {
        if !(sigma > 0.0 && sigma < rho) {
            return Err(Error::QuadratureResolution(format!(
                "bump width {sigma} does not fit in the slice of radius {rho}"
            )));
        }
        let (lhs, mass) = polar_integrals(params, &unit, sigma, radial_nodes, angular_nodes);
        let (lhs2, mass2) = polar_integrals(params, &unit, sigma, 2 * radial_nodes, 2 * angular_nodes);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        if rel(lhs, lhs2) >= QUADRATURE_TOL || rel(mass, mass2) >= QUADRATURE_TOL {
            return Err(Error::QuadratureResolution(format!(
                "doubling the grid moved the integrals for sigma = {sigma} by more than 1%"
            )));
        }
        let effective_c = lhs2 / mass2;
        bumps.push(BumpResult {
            sigma,
            lhs: lhs2,
            mass: mass2,
            effective_c,
            passes: lhs2 >= c * mass2,
        });
    }
    let margin = bumps
        .iter()
        .map(|b| b.effective_c - c)
        .fold(f64::INFINITY, f64::min);
    Ok(CurrentsReport {
        direction: unit.iter().map(|z| (z.re, z.im)).collect(),
        c,
        passes: !bumps.is_empty() && bumps.iter().all(|b| b.passes),
        bumps,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn e(n: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[k] = c(1.0, 0.0);
        v
    }

    #[test]
    fn closed_form_examples() {
        let pr = EggParams::new(3, 0.25).unwrap();
        let r = curvature_axis_closed_form(&pr, 0.5).unwrap();
        assert!((r.get(0, 0, 0, 0).re + 2.0 / 0.75f64.powi(4)).abs() < 1e-12);
        let big_p = 0.5f64.sqrt();
        assert!((r.get(1, 1, 2, 2).re + 1.0 / (1.0 - big_p).powi(2)).abs() < 1e-12);
        assert_eq!(r.get(0, 1, 0, 0), c(0.0, 0.0));
        let r = curvature_axis_closed_form(&pr, 1e-9).unwrap();
        assert!((r.get(0, 0, 0, 0).re + 2.0).abs() < 1e-8);
        assert!((r.get(1, 1, 1, 1).re + 2.0).abs() < 1e-3);
        assert!(curvature_axis_closed_form(&pr, 0.0).is_err());
    }

    #[test]
    fn hsc_axis_examples() {
        let pr = EggParams::new(3, 0.25).unwrap();
        for p in [0.1, 0.5, 0.9] {
            assert!((hsc_axis(&pr, p, &e(3, 0)).unwrap() + 2.0).abs() < 1e-12);
        }
        assert!((hsc_axis(&pr, 1e-12, &e(3, 1)).unwrap() + 2.0).abs() < 1e-5);
        let xi = CVector::from_column_slice(&[c(0.3, 0.1), c(-0.5, 0.2), c(0.1, 0.4)]);
        let a = hsc_axis(&pr, 0.4, &xi).unwrap();
        let b = hsc_axis(&pr, 0.4, &(&xi * c(-2.0, 1.5))).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn family_classification() {
        let n = 3;
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if component_family(i, j, k, l).is_some() {
                            count += 1;
                        }
                    }
                }
            }
        }
        // 1 + 2 + 4 + 2 + 2 + 2 + 2
        assert_eq!(count, 15);
    }

    #[test]
    fn fd_matches_closed_form_on_axis() {
        let pr = EggParams::new(3, 0.25).unwrap();
        for p in [0.2, 0.7] {
            let z = DomainPoint::axis(&pr, p).unwrap();
            let fd = curvature_tensor_fd(&pr, &z).unwrap();
            let cf = curvature_axis_closed_form(&pr, p).unwrap();
            let scale = cf.max_abs();
            for ((i, j, k, l), v) in cf.entries() {
                let got = fd.get(i, j, k, l);
                if v.norm() > 0.0 {
                    assert!(
                        (got - v).norm() <= 1e-5 * v.norm(),
                        "p={p} {i}{j}{k}{l}: {got} vs {v}"
                    );
                } else {
                    assert!(got.norm() <= 1e-7 * scale, "p={p} {i}{j}{k}{l}: {got}");
                }
            }
            assert!(fd.hermitian_residual() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn ball_metric_has_constant_curvature() {
        let z = CVector::from_column_slice(&[c(0.2, -0.1), c(0.3, 0.3), c(-0.1, 0.2)]);
        let r = curvature_tensor_from(ball_metric_entries, &z).unwrap();
        let g = ball_metric_entries(&z);
        for xi in sampling::sphere_directions(3, 10) {
            assert!((hsc_from(&r, &g, &xi) + 2.0).abs() < 1e-6);
        }
        let pr = EggParams::new(2, 0.25).unwrap();
        assert_eq!(
            comparison_metric_ball(&DomainPoint::origin(&pr)).entries,
            CMatrix::identity(2, 2)
        );
    }

    #[test]
    fn scan_reports() {
        let pr = EggParams::new(2, 0.25).unwrap();
        let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let rep = hsc_bound_scan(&pr, &grid, 200).unwrap();
        assert!(rep.bounded && rep.non_constant);
        assert_eq!(rep, hsc_bound_scan(&pr, &grid, 200).unwrap());
    }

    #[test]
    fn comparison_small_run() {
        let pr = EggParams::new(2, 0.25).unwrap();
        let rep = comparison_check(&pr, 200, 7).unwrap();
        assert!(rep.passes, "{rep:?}");
        assert_eq!(rep.samples_on_z, 20);
        assert!(comparison_check(&pr, 10, 7).is_err());
    }

    #[test]
    fn bump_laplacian_matches_finite_differences() {
        let sigma = 0.3;
        for r in [0.05, 0.1, 0.2, 0.27] {
            let h = 1e-4;
            let d2 = (bump(sigma, r + h) - 2.0 * bump(sigma, r) + bump(sigma, r - h)) / (h * h);
            let d1 = (bump(sigma, r + h) - bump(sigma, r - h)) / (2.0 * h);
            let fd = 0.25 * (d2 + d1 / r);
            assert!((fd - bump_ddbar(sigma, r)).abs() < 1e-5 * bump_ddbar(sigma, r).abs().max(1.0));
        }
    }

    #[test]
    fn disc_slice_is_poincare() {
        let pr = EggParams::new(2, 0.3).unwrap();
        let s = slice_curvature(&pr, &e(2, 0), 0.02, 10).unwrap();
        for pt in &s.points {
            let r2 = pt.re * pt.re + pt.im * pt.im;
            assert!((pt.h0 - 1.0 / (1.0 - r2).powi(2)).abs() < 1e-12);
            if let Some(k) = pt.kappa {
                assert!((k + 2.0).abs() < 1e-3, "{k}");
            }
        }
        let rep = currents_negativity_test(&pr, &e(2, 0), 0.5, &DEFAULT_BUMP_WIDTHS).unwrap();
        assert!(rep.passes);
        for b in &rep.bumps {
            assert!((b.effective_c - 2.0).abs() < 1e-3, "{b:?}");
        }
        assert!(
            !currents_negativity_test(&pr, &e(2, 0), 10.0, &DEFAULT_BUMP_WIDTHS)
                .unwrap()
                .passes
        );
    }
}
