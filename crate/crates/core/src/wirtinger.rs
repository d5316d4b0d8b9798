//! Finite-difference Wirtinger derivatives of matrix-valued functions of
//! `z in C^n`, with one level of Richardson extrapolation.
//!
//! `d/dz_k = (d/dx_k - i d/dy_k) / 2` and `d/dzbar_k = (d/dx_k + i d/dy_k) / 2`.
//! The mixed second derivative `d^2 / dz_k dzbar_l` is assembled from real
//! directional second differences:
//! `[D(e_k, e_l) + D(i e_k, i e_l) + i (D(e_k, i e_l) - D(i e_k, e_l))] / 4`.

use crate::egg_domain::{CMatrix, CVector, Complex};

/// Base step for first derivatives.
pub const FIRST_STEP: f64 = 1e-4;
/// Base step for mixed second derivatives.
pub const SECOND_STEP: f64 = 1e-3;

fn shifted(z: &CVector, k: usize, delta: Complex) -> CVector {
    let mut w = z.clone();
    w[k] += delta;
    w
}

fn step_for(z: &CVector, k: usize, base: f64) -> f64 {
    base * z[k].norm().max(1.0)
}

/// `(d/dz_k f, d/dzbar_k f)` by plain central differences with step `h`.
pub fn first_central<F>(f: &F, z: &CVector, k: usize, h: f64) -> (CMatrix, CMatrix)
where
    F: Fn(&CVector) -> CMatrix,
{
    let hr = Complex::new(h, 0.0);
    let hi = Complex::new(0.0, h);
    let fx = (f(&shifted(z, k, hr)) - f(&shifted(z, k, -hr))) / Complex::new(2.0 * h, 0.0);
    let fy = (f(&shifted(z, k, hi)) - f(&shifted(z, k, -hi))) / Complex::new(2.0 * h, 0.0);
    let i = Complex::new(0.0, 1.0);
    let half = Complex::new(0.5, 0.0);
    ((&fx - &fy * i) * half, (fx + fy * i) * half)
}

/// First Wirtinger derivatives with Richardson extrapolation over `h`, `h/2`.
pub fn first<F>(f: &F, z: &CVector, k: usize) -> (CMatrix, CMatrix)
where
    F: Fn(&CVector) -> CMatrix,
{
    first_with_step(f, z, k, step_for(z, k, FIRST_STEP))
}

pub fn first_with_step<F>(f: &F, z: &CVector, k: usize, h: f64) -> (CMatrix, CMatrix)
where
    F: Fn(&CVector) -> CMatrix,
{
    let (a1, b1) = first_central(f, z, k, h);
    let (a2, b2) = first_central(f, z, k, 0.5 * h);
    (richardson(a2, a1), richardson(b2, b1))
}

fn richardson(fine: CMatrix, coarse: CMatrix) -> CMatrix {
    (fine * Complex::new(4.0, 0.0) - coarse) / Complex::new(3.0, 0.0)
}

/// Real mixed second difference along complex directions `u = e_k * cu`,
/// `w = e_l * cw`.
fn directional_second<F>(f: &F, z: &CVector, k: usize, cu: Complex, l: usize, cw: Complex, h: f64) -> CMatrix
where
    F: Fn(&CVector) -> CMatrix,
{
    let at = |su: f64, sw: f64| {
        let mut w = z.clone();
        w[k] += cu * su * h;
        w[l] += cw * sw * h;
        f(&w)
    };
    (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / Complex::new(4.0 * h * h, 0.0)
}

/// `d^2 f / dz_k dzbar_l` by central differences with step `h`.
pub fn mixed_central<F>(f: &F, z: &CVector, k: usize, l: usize, h: f64) -> CMatrix
where
    F: Fn(&CVector) -> CMatrix,
{
    let one = Complex::new(1.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    let xx = directional_second(f, z, k, one, l, one, h);
    let yy = directional_second(f, z, k, i, l, i, h);
    let xy = directional_second(f, z, k, one, l, i, h);
    let yx = directional_second(f, z, k, i, l, one, h);
    (xx + yy + (xy - yx) * i) * Complex::new(0.25, 0.0)
}

/// Mixed derivative with Richardson extrapolation over `h`, `h/2`.
pub fn mixed<F>(f: &F, z: &CVector, k: usize, l: usize) -> CMatrix
where
    F: Fn(&CVector) -> CMatrix,
{
    let h = step_for(z, k, SECOND_STEP).max(step_for(z, l, SECOND_STEP));
    let coarse = mixed_central(f, z, k, l, h);
    let fine = mixed_central(f, z, k, l, 0.5 * h);
    richardson(fine, coarse)
}

/// Scalar convenience wrapper: lifts `f: C^n -> C` to a 1x1 matrix function.
pub fn scalar<G>(g: G) -> impl Fn(&CVector) -> CMatrix
where
    G: Fn(&CVector) -> Complex,
{
    move |z| CMatrix::from_element(1, 1, g(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2(a: Complex, b: Complex) -> CVector {
        CVector::from_column_slice(&[a, b])
    }

    #[test]
    fn holomorphic_and_antiholomorphic_parts() {
        // f = z1^2 zbar2 + |z1|^2
        let f = scalar(|z: &CVector| z[0] * z[0] * z[1].conj() + z[0] * z[0].conj());
        let z = z2(Complex::new(0.3, -0.2), Complex::new(0.1, 0.4));
        let (d, db) = first(&f, &z, 0);
        let exact_d = Complex::new(2.0, 0.0) * z[0] * z[1].conj() + z[0].conj();
        assert!((d[(0, 0)] - exact_d).norm() < 1e-10);
        assert!((db[(0, 0)] - z[0]).norm() < 1e-10);
        let (_, db2) = first(&f, &z, 1);
        assert!((db2[(0, 0)] - z[0] * z[0]).norm() < 1e-10);
    }

    #[test]
    fn mixed_derivatives_of_polynomials() {
        // d/dz1 dzbar2 of z1^2 zbar2^3 = 2 z1 * 3 zbar2^2
        let f = scalar(|z: &CVector| z[0] * z[0] * z[1].conj().powi(3));
        let z = z2(Complex::new(0.3, -0.2), Complex::new(0.1, 0.4));
        let got = mixed(&f, &z, 0, 1)[(0, 0)];
        let exact = Complex::new(6.0, 0.0) * z[0] * z[1].conj() * z[1].conj();
        assert!((got - exact).norm() < 1e-10, "{got} vs {exact}");
        // the Laplacian identity d dbar |z|^2 = 1, and d1 dbar2 |z|^2 = 0
        let g = scalar(|z: &CVector| Complex::new(z.norm_squared(), 0.0));
        assert!((mixed(&g, &z, 0, 0)[(0, 0)] - Complex::new(1.0, 0.0)).norm() < 1e-9);
        assert!(mixed(&g, &z, 0, 1)[(0, 0)].norm() < 1e-9);
    }
}
