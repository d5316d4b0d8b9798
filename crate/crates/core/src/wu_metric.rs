//! The Wu metric of the pseudo-egg.
//!
//! With `s = 1 - |zhat|^2`, `A = s^{1/m} - |z1|^2` and
//! `D = s (s - |z1|^{2m})`, the metric `sum h_{i jbar} dz_i (x) dzbar_j` has
//!
//! ```text
//! h_{1 1bar} = s^{1/m} / A^2
//! h_{1 jbar} = s^{1/m - 1} zbar_1 z_j / (m A^2)
//! h_{i jbar} = s^{1/m - 2} |z1|^2 zbar_i z_j / (m^2 A^2) + (s delta_ij + zbar_i z_j) / D
//! ```
//!
//! for `i, j >= 2`. At an axis point `(p, 0)` it is
//! `diag(1/(1-p^2)^2, 1/(1-p^{2m}), ...)`, the minimal-volume ellipsoid
//! around the Kobayashi indicatrix (see [`crate::ellipsoid`]).

use serde::Serialize;

use crate::egg_domain::{check_axis, CMatrix, CVector, Complex, DomainPoint, EggParams, TangentVector};
use crate::error::{Error, Result};
use crate::wirtinger;

/// Step used by the finite-difference check of [`kahler_defect`].
pub const DEFECT_STEP: f64 = 1e-5;
/// Upper bound on the probe distance at the smallest radius.
pub const CONTINUITY_THRESHOLD: f64 = 1e-4;

const PROBE_PHASES: usize = 64;

/// A Hermitian form `H[(i, j)] = h_{i jbar}` at a base point, acting on
/// tangent vectors by `v -> sum h_{i jbar} v_i conj(v_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    pub entries: CMatrix,
    pub base: CVector,
}

impl HermitianForm {
    pub fn new(entries: CMatrix, base: CVector) -> Self {
        Self { entries, base }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn quadratic(&self, v: &TangentVector) -> f64 {
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.entries[(i, j)] * v[i] * v[j].conj();
            }
        }
        acc.re
    }

    /// Largest `|h_{i jbar} - conj(h_{j ibar})|`.
    pub fn hermitian_residual(&self) -> f64 {
        let h = &self.entries;
        (h - h.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Pullback of this form (based at `Phi(z)`) by a holomorphic map with
    /// Jacobian `jac` at `z`: `jac^T H conj(jac)`.
    pub fn pullback(&self, jac: &CMatrix, base: CVector) -> HermitianForm {
        HermitianForm::new(jac.transpose() * &self.entries * jac.conjugate(), base)
    }

    /// Largest entrywise distance to another form.
    pub fn distance(&self, other: &HermitianForm) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl Serialize for HermitianForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct C {
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct Out {
            base: Vec<C>,
            entries: Vec<Vec<C>>,
            eigenvalues: Vec<f64>,
        }
        let c = |z: &Complex| C { re: z.re, im: z.im };
        Out {
            base: self.base.iter().map(c).collect(),
            entries: (0..self.dim())
                .map(|i| (0..self.dim()).map(|j| c(&self.entries[(i, j)])).collect())
                .collect(),
            eigenvalues: self.eigenvalues(),
        }
        .serialize(s)
    }
}

/// The form at `(p, 0, ..., 0)`.
pub fn wu_axis(params: &EggParams, p: f64) -> Result<HermitianForm> {
    check_axis(p)?;
    let n = params.n();
    let mut h = CMatrix::zeros(n, n);
    h[(0, 0)] = Complex::new(1.0 / (1.0 - p * p).powi(2), 0.0);
    let tangential = 1.0 / (1.0 - p.powf(2.0 * params.m()));
    for j in 1..n {
        h[(j, j)] = Complex::new(tangential, 0.0);
    }
    let mut base = CVector::zeros(n);
    base[0] = Complex::new(p, 0.0);
    Ok(HermitianForm::new(h, base))
}

/// Raw entries at an arbitrary coordinate vector, without membership checks.
pub fn wu_entries(params: &EggParams, z: &CVector) -> CMatrix {
    let n = z.len();
    let m = params.m();
    let z1 = z[0];
    let r1 = z1.norm_sqr();
    let s = 1.0 - crate::egg_domain::zhat_norm_sqr(z);
    let b = s.powf(1.0 / m);
    let a = b - r1;
    let d = s * (s - r1.powf(m));
    let mut h = CMatrix::zeros(n, n);
    h[(0, 0)] = Complex::new(b / (a * a), 0.0);
    let c1 = s.powf(1.0 / m - 1.0) / (m * a * a);
    for j in 1..n {
        h[(0, j)] = z1.conj() * z[j] * c1;
        h[(j, 0)] = h[(0, j)].conj();
    }
    let c2 = s.powf(1.0 / m - 2.0) * r1 / (m * m * a * a);
    for i in 1..n {
        for j in 1..n {
            let zz = z[i].conj() * z[j];
            let delta = if i == j { s } else { 0.0 };
            h[(i, j)] = zz * c2 + (zz + delta) / d;
        }
    }
    h
}

pub fn wu_general(params: &EggParams, z: &DomainPoint) -> HermitianForm {
    HermitianForm::new(wu_entries(params, z.coords()), z.coords().clone())
}

fn check_defect_arg(z1: Complex) -> Result<()> {
    let r = z1.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "kahler defect needs 0 < |z1| < 1, got {z1}"
        )));
    }
    Ok(())
}

/// `dh_{1 2bar}/dz_2 - dh_{2 2bar}/dz_1` at `(z1, 0)`, in closed form:
/// `zbar_1 / (m (1-|z1|^2)^2) - m |z1|^{2m} / (z1 (1-|z1|^{2m})^2)`.
pub fn kahler_defect(params: &EggParams, z1: Complex) -> Result<Complex> {
    check_defect_arg(z1)?;
    let m = params.m();
    let r2 = z1.norm_sqr();
    let r2m = r2.powf(m);
    Ok(z1.conj() / (m * (1.0 - r2).powi(2)) - Complex::new(m * r2m / (1.0 - r2m).powi(2), 0.0) / z1)
}

/// The same quantity from central differences of [`wu_entries`].
pub fn kahler_defect_fd(params: &EggParams, z1: Complex) -> Result<Complex> {
    check_defect_arg(z1)?;
    let mut z = CVector::zeros(params.n());
    z[0] = z1;
    let f = |w: &CVector| wu_entries(params, w);
    let (d2, _) = wirtinger::first_with_step(&f, &z, 1, DEFECT_STEP);
    let (d1, _) = wirtinger::first_with_step(&f, &z, 0, DEFECT_STEP);
    Ok(d2[(0, 1)] - d1[(1, 1)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub radii: Vec<f64>,
    /// `max_theta max_ij |h(r e^{i theta}, zhat) - h(0, zhat)|` per radius.
    pub distances: Vec<f64>,
    pub monotone: bool,
    pub final_distance: f64,
    pub passes: bool,
    /// Slope of `log distance` against `log r` over the two smallest
    /// positive radii.
    pub holder_exponent: Option<f64>,
}

/// Distance between the form at `(r e^{i theta}, zhat)` and at `(0, zhat)`
/// for each radius, maximized over equally spaced phases.
pub fn continuity_probe_z(params: &EggParams, zhat: &CVector, radii: &[f64]) -> Result<ContinuityReport> {
    let n = params.n();
    if zhat.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "zhat must have {} entries",
            n - 1
        )));
    }
    let mut base = CVector::zeros(n);
    base.rows_mut(1, n - 1).copy_from(zhat);
    let center = DomainPoint::new(params, base.clone())?;
    let h0 = wu_general(params, &center);
    let mut distances = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius {r} must be nonnegative")));
        }
        if r == 0.0 {
            distances.push(0.0);
            continue;
        }
        let mut worst = 0.0f64;
        for k in 0..PROBE_PHASES {
            let theta = std::f64::consts::TAU * k as f64 / PROBE_PHASES as f64;
            let mut z = base.clone();
            z[0] = Complex::from_polar(r, theta);
            let pt = DomainPoint::new(params, z)?;
            worst = worst.max(wu_general(params, &pt).distance(&h0));
        }
        distances.push(worst);
    }
    let monotone = radii.windows(2).zip(distances.windows(2)).all(|(r, d)| {
        if r[1] < r[0] {
            d[1] < d[0] || d[0] == 0.0
        } else {
            true
        }
    });
    let final_distance = distances.last().copied().unwrap_or(0.0);
    let positive: Vec<(f64, f64)> = radii
        .iter()
        .zip(&distances)
        .filter(|(r, d)| **r > 0.0 && **d > 0.0)
        .map(|(r, d)| (*r, *d))
        .collect();
    let holder_exponent = match positive.as_slice() {
        [.., (ra, da), (rb, db)] if ra != rb => Some((da / db).ln() / (ra / rb).ln()),
        _ => None,
    };
    Ok(ContinuityReport {
        radii: radii.to_vec(),
        distances,
        monotone,
        final_distance,
        passes: monotone && final_distance < CONTINUITY_THRESHOLD,
        holder_exponent,
    })
}
