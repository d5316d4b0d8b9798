//! The pseudo-egg `E = { |z1|^{2m} + |z2|^2 + ... + |zn|^2 < 1 }`, its gauge
//! and the automorphisms that carry any point to an axis point `(q, 0, ..., 0)`.
//!
//! Fractional powers of complex numbers use the principal branch of the
//! logarithm. The only such base is `1 - <zhat, a>` with `zhat`, `a` in the
//! unit ball, whose real part is strictly positive, so the branch cut is
//! never approached.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

pub type Complex = nalgebra::Complex<f64>;
pub type CVector = DVector<Complex>;
pub type CMatrix = DMatrix<Complex>;
/// Tangent vectors are plain coordinate vectors attached to a point.
pub type TangentVector = CVector;

/// Largest admissible `|zhat|^2` before cancellation in `1 - |zhat|^2` dominates.
pub const ZHAT_GUARD: f64 = 1.0 - 1e-14;
/// Largest admissible axis coordinate.
pub const AXIS_GUARD: f64 = 1.0 - 1e-10;

const UNITARY_TOL: f64 = 1e-10;

/// Dimension and exponent of the pseudo-egg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EggParams {
    n: usize,
    m: f64,
}

impl EggParams {
    pub fn new(n: usize, m: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "dimension n = {n} must be at least 2"
            )));
        }
        if !(m > 0.0 && m < 0.5) {
            return Err(Error::InvalidParams(format!(
                "exponent m = {m} must lie in (0, 1/2)"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `1 / (4 m (1 - m))`, the upper end of the domain of `t(w)`.
    pub fn w_max(&self) -> f64 {
        1.0 / (4.0 * self.m * (1.0 - self.m))
    }

    /// `|z1|^{2m} + |zhat|^2` for a raw coordinate vector.
    pub fn defining_function(&self, z: &CVector) -> f64 {
        z[0].norm().powf(2.0 * self.m) + zhat_norm_sqr(z)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} complex coordinates, got {len}",
                self.n
            )));
        }
        Ok(())
    }
}

/// `|z2|^2 + ... + |zn|^2`.
pub fn zhat_norm_sqr(z: &CVector) -> f64 {
    z.iter().skip(1).map(|c| c.norm_sqr()).sum()
}

/// The tangential part `(z2, ..., zn)`.
pub fn zhat(z: &CVector) -> CVector {
    z.rows(1, z.len() - 1).into_owned()
}

/// A point known to lie in the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPoint {
    z: CVector,
}

impl DomainPoint {
    /// Validates membership and the numerical guard on `|zhat|`.
    pub fn new(params: &EggParams, z: CVector) -> Result<Self> {
        params.check_len(z.len())?;
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        if !contains(params, &z) {
            return Err(Error::OutsideDomain(format!(
                "|z1|^2m + |zhat|^2 = {} >= 1",
                params.defining_function(&z)
            )));
        }
        if zhat_norm_sqr(&z) > ZHAT_GUARD {
            return Err(Error::OutsideDomain("|zhat|^2 too close to 1".into()));
        }
        Ok(Self { z })
    }

    pub fn from_slice(params: &EggParams, z: &[Complex]) -> Result<Self> {
        Self::new(params, CVector::from_column_slice(z))
    }

    /// The axis point `(p, 0, ..., 0)` with `0 <= p < 1`.
    pub fn axis(params: &EggParams, p: f64) -> Result<Self> {
        check_axis(p)?;
        let mut z = CVector::zeros(params.n);
        z[0] = Complex::new(p, 0.0);
        Ok(Self { z })
    }

    pub fn origin(params: &EggParams) -> Self {
        Self {
            z: CVector::zeros(params.n),
        }
    }

    pub fn coords(&self) -> &CVector {
        &self.z
    }

    pub fn into_coords(self) -> CVector {
        self.z
    }

    pub fn z1(&self) -> Complex {
        self.z[0]
    }

    pub fn zhat(&self) -> CVector {
        zhat(&self.z)
    }

    /// True on the singular hypersurface `Z = { z1 = 0 }`.
    pub fn on_z(&self) -> bool {
        self.z[0] == Complex::new(0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }
}

pub(crate) fn check_axis(p: f64) -> Result<()> {
    if !(0.0..AXIS_GUARD).contains(&p) {
        return Err(Error::OutsideDomain(format!(
            "axis coordinate p = {p} must lie in [0, 1 - 1e-10)"
        )));
    }
    Ok(())
}

/// Membership test `|z1|^{2m} + |zhat|^2 < 1`.
pub fn contains(params: &EggParams, z: &CVector) -> bool {
    z.len() == params.n && params.defining_function(z) < 1.0
}

/// The gauge `q(v) = inf { s > 0 : v / s in E }`, which is also the
/// Kobayashi metric at the origin since the domain is balanced.
pub fn minkowski_functional(params: &EggParams, v: &CVector) -> f64 {
    let a = v[0].norm();
    let b = zhat_norm_sqr(v).sqrt();
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return b;
    }
    if b == 0.0 {
        return a;
    }
    let two_m = 2.0 * params.m;
    // g is strictly decreasing, positive at s = max(a, b) and negative once
    // both terms drop below 1/2.
    let g = |s: f64| (a / s).powf(two_m) + (b / s).powi(2) - 1.0;
    let lo = a.max(b);
    let hi = (a * 2f64.powf(1.0 / two_m)).max(b * 2f64.sqrt());
    roots::bisect(g, lo, hi, 1e-15).expect("gauge equation is bracketed by construction")
}

/// Automorphism `zhat -> U psi_a(zhat)` of the unit ball in `C^{n-1}`, where
/// `psi_a(z) = (P_a z + sqrt(1-|a|^2) Q_a z - a) / (1 - <z, a>)` is the Möbius
/// map sending `a` to the origin, normalized so that `psi_0` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BallAutomorphism {
    center: CVector,
    unitary: CMatrix,
}

impl BallAutomorphism {
    pub fn new(center: CVector, unitary: CMatrix) -> Result<Self> {
        let k = center.len();
        if unitary.nrows() != k || unitary.ncols() != k {
            return Err(Error::InvalidArgument(
                "unitary factor has the wrong shape".into(),
            ));
        }
        if center.norm_squared() > ZHAT_GUARD {
            return Err(Error::OutsideDomain(
                "ball automorphism center not in the ball".into(),
            ));
        }
        let defect = (unitary.adjoint() * &unitary - CMatrix::identity(k, k)).camax();
        if defect > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!(
                "phase matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self { center, unitary })
    }

    /// The Möbius map moving `center` to the origin, with trivial unitary part.
    pub fn moving(center: CVector) -> Result<Self> {
        let k = center.len();
        Self::new(center, CMatrix::identity(k, k))
    }

    pub fn center(&self) -> &CVector {
        &self.center
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    /// `L = s I + (1 - s) a a^* / |a|^2` with `s = sqrt(1 - |a|^2)`.
    fn linear_part(&self) -> CMatrix {
        let k = self.center.len();
        let a2 = self.center.norm_squared();
        let mut l = CMatrix::identity(k, k);
        if a2 > 0.0 {
            let s = (1.0 - a2).sqrt();
            l *= Complex::new(s, 0.0);
            l += &self.center * self.center.adjoint() * Complex::new((1.0 - s) / a2, 0.0);
        }
        l
    }

    fn mobius(&self, z: &CVector) -> (CVector, Complex, CMatrix) {
        let l = self.linear_part();
        let denom = Complex::new(1.0, 0.0) - self.center.dotc(z);
        let numer = &l * z - &self.center;
        (numer, denom, l)
    }

    pub fn apply(&self, z: &CVector) -> CVector {
        let (numer, denom, _) = self.mobius(z);
        &self.unitary * (numer / denom)
    }

    pub fn jacobian(&self, z: &CVector) -> CMatrix {
        let (numer, denom, l) = self.mobius(z);
        let d = l / denom + numer * self.center.adjoint() / (denom * denom);
        &self.unitary * d
    }

    /// `(U psi_a)^{-1} = U^* psi_{-U a}`.
    pub fn inverse(&self) -> Self {
        // psi_a^{-1} = psi_{-a}, and psi_{Uc}(U x) = U psi_c(x) for unitary U.
        let center = -(&self.unitary * &self.center);
        Self {
            center,
            unitary: self.unitary.adjoint(),
        }
    }
}

/// Automorphism of the egg:
/// `(z1, zhat) -> ( phase (1-|a|^2)^{1/2m} (1 - <zhat, a>)^{-1/m} z1 , Psi(zhat) )`.
#[derive(Debug, Clone, PartialEq)]
pub struct EggAutomorphism {
    m: f64,
    phase: Complex,
    psi: BallAutomorphism,
    scale: f64,
}

impl EggAutomorphism {
    pub fn from_parts(params: &EggParams, phase: Complex, psi: BallAutomorphism) -> Result<Self> {
        if psi.center().len() != params.n - 1 {
            return Err(Error::InvalidArgument(
                "ball automorphism has the wrong dimension".into(),
            ));
        }
        if (phase.norm() - 1.0).abs() > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!("phase {phase} is not unimodular")));
        }
        let scale = (1.0 - psi.center().norm_squared()).powf(1.0 / (2.0 * params.m));
        Ok(Self {
            m: params.m,
            phase,
            psi,
            scale,
        })
    }

    pub fn identity(params: &EggParams) -> Self {
        let k = params.n - 1;
        let psi = BallAutomorphism::moving(CVector::zeros(k)).expect("origin is in the ball");
        Self::from_parts(params, Complex::new(1.0, 0.0), psi).expect("identity parts are valid")
    }

    pub fn phase(&self) -> Complex {
        self.phase
    }

    pub fn psi(&self) -> &BallAutomorphism {
        &self.psi
    }

    /// `(1 - <zhat, a>)^{-1/m}` on the principal branch.
    fn z1_factor(&self, zh: &CVector) -> (Complex, Complex) {
        let base = Complex::new(1.0, 0.0) - self.psi.center().dotc(zh);
        let factor = (-base.ln() / self.m).exp();
        (base, factor)
    }

    pub fn apply(&self, z: &CVector) -> CVector {
        let zh = zhat(z);
        let (_, factor) = self.z1_factor(&zh);
        let w1 = self.phase * self.scale * factor * z[0];
        let wh = self.psi.apply(&zh);
        let mut out = CVector::zeros(z.len());
        out[0] = w1;
        out.rows_mut(1, z.len() - 1).copy_from(&wh);
        out
    }

    /// Holomorphic Jacobian `dPhi_z` (rows: image coordinates).
    pub fn jacobian(&self, z: &CVector) -> CMatrix {
        let n = z.len();
        let zh = zhat(z);
        let (base, factor) = self.z1_factor(&zh);
        let c = self.phase * self.scale;
        let mut j = CMatrix::zeros(n, n);
        j[(0, 0)] = c * factor;
        let dfac = c * z[0] * factor / (base * self.m);
        for col in 1..n {
            j[(0, col)] = dfac * self.psi.center()[col - 1].conj();
        }
        j.view_mut((1, 1), (n - 1, n - 1))
            .copy_from(&self.psi.jacobian(&zh));
        j
    }

    pub fn inverse(&self, params: &EggParams) -> Self {
        Self::from_parts(params, self.phase.conj(), self.psi.inverse())
            .expect("inverse of a valid automorphism is valid")
    }
}

/// An automorphism together with the axis coordinate it sends its base point to.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub automorphism: EggAutomorphism,
    /// `Phi(z) = (axis, 0, ..., 0)`.
    pub axis: f64,
}

/// The automorphism of the family above with `a = phat` and phase `|p1| / p1`,
/// composed with an optional unitary factor on the ball part.
pub fn normalizing_automorphism(params: &EggParams, p: &DomainPoint) -> Result<Normalization> {
    normalizing_automorphism_with(params, p, None)
}

pub fn normalizing_automorphism_with(
    params: &EggParams,
    p: &DomainPoint,
    unitary: Option<CMatrix>,
) -> Result<Normalization> {
    params.check_len(p.dim())?;
    if p.on_z() {
        return Err(Error::InvalidArgument(
            "normalizing automorphism requires p1 != 0; use `normalize` for points of Z".into(),
        ));
    }
    normalize_with(params, p, unitary)
}

/// Like [`normalizing_automorphism`] but also accepts points of `Z`, which are
/// carried to the origin by a ball automorphism in `zhat` alone.
pub fn normalize(params: &EggParams, p: &DomainPoint) -> Result<Normalization> {
    normalize_with(params, p, None)
}

pub fn normalize_with(
    params: &EggParams,
    p: &DomainPoint,
    unitary: Option<CMatrix>,
) -> Result<Normalization> {
    params.check_len(p.dim())?;
    let k = params.n - 1;
    let unitary = unitary.unwrap_or_else(|| CMatrix::identity(k, k));
    let psi = BallAutomorphism::new(p.zhat(), unitary)?;
    let phase = if p.on_z() {
        Complex::new(1.0, 0.0)
    } else {
        let z1 = p.z1();
        Complex::new(z1.norm(), 0.0) / z1
    };
    let automorphism = EggAutomorphism::from_parts(params, phase, psi)?;
    let axis = automorphism.apply(p.coords())[0].norm();
    check_axis(axis)?;
    Ok(Normalization { automorphism, axis })
}

pub fn apply_automorphism(phi: &EggAutomorphism, z: &CVector) -> CVector {
    phi.apply(z)
}

pub fn automorphism_jacobian(phi: &EggAutomorphism, z: &CVector) -> CMatrix {
    phi.jacobian(z)
}
