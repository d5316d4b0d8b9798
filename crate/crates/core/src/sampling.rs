//! Deterministic sampling helpers: domain points, unitaries, automorphisms
//! and low-discrepancy directions on the unit sphere of `C^n`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::egg_domain::{
    BallAutomorphism, CMatrix, CVector, Complex, DomainPoint, EggAutomorphism, EggParams,
};

/// Random point of the unit ball in `C^k` scaled by `radius`, uniform in volume.
pub fn random_ball_point<R: Rng + ?Sized>(k: usize, radius: f64, rng: &mut R) -> CVector {
    let g: Vec<Complex> = (0..k)
        .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let g = CVector::from_vec(g);
    let norm = g.norm();
    if norm == 0.0 {
        return g;
    }
    let r = radius * rng.random::<f64>().powf(1.0 / (2 * k) as f64);
    g * Complex::new(r / norm, 0.0)
}

/// Interior point: `zhat` uniform in the ball, then `z1` uniform in the
/// admissible disc `|z1| < (1 - |zhat|^2)^{1/2m}`.
pub fn random_point<R: Rng + ?Sized>(params: &EggParams, rng: &mut R) -> DomainPoint {
    random_point_scaled(params, 1.0, rng)
}

/// Same as [`random_point`] but restricted to the sublevel set of the gauge
/// at `shrink` (`0 < shrink <= 1`), keeping samples away from the boundary.
pub fn random_point_scaled<R: Rng + ?Sized>(params: &EggParams, shrink: f64, rng: &mut R) -> DomainPoint {
    loop {
        let zh = random_ball_point(params.n() - 1, 1.0, rng);
        let room = (1.0 - zh.norm_squared()).max(0.0);
        let r1 = room.powf(1.0 / (2.0 * params.m())) * rng.random::<f64>().sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let mut z = CVector::zeros(params.n());
        z[0] = Complex::from_polar(r1, theta);
        z.rows_mut(1, params.n() - 1).copy_from(&zh);
        // The domain is balanced, so scaling keeps the gauge below `shrink`.
        let z = z * Complex::new(shrink.min(1.0), 0.0);
        if let Ok(p) = DomainPoint::new(params, z) {
            return p;
        }
    }
}

/// Random point of `Z = { z1 = 0 }`.
pub fn random_point_on_z<R: Rng + ?Sized>(params: &EggParams, rng: &mut R) -> DomainPoint {
    loop {
        let zh = random_ball_point(params.n() - 1, 1.0, rng);
        let mut z = CVector::zeros(params.n());
        z.rows_mut(1, params.n() - 1).copy_from(&zh);
        if let Ok(p) = DomainPoint::new(params, z) {
            return p;
        }
    }
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(k, k, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
}

/// Random member of the automorphism family: random phase, random ball
/// center with `|a| <= 0.9`, random unitary.
pub fn random_automorphism<R: Rng + ?Sized>(params: &EggParams, rng: &mut R) -> EggAutomorphism {
    let k = params.n() - 1;
    let center = random_ball_point(k, 0.9, rng);
    let unitary = random_unitary(k, rng);
    let psi = BallAutomorphism::new(center, unitary).expect("sampled center lies in the ball");
    EggAutomorphism::from_parts(params, random_phase(rng), psi).expect("valid parts")
}

/// Standard normal complex vector, not normalized.
pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `count` deterministic unit vectors in `C^n`, from the Kronecker sequence
/// with generalized golden-ratio increments in `[0,1)^{2n}` pushed through
/// the inverse normal CDF and normalized.
pub fn sphere_directions(n: usize, count: usize) -> Vec<CVector> {
    let d = 2 * n;
    // phi_d: unique positive root of x^{d+1} = x + 1.
    let mut g = 2.0f64;
    for _ in 0..100 {
        g = (1.0 + g).powf(1.0 / (d as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=d).map(|j| (1.0 / g.powi(j as i32)).fract()).collect();
    (0..count)
        .map(|i| {
            let coords: Vec<f64> = alphas
                .iter()
                .map(|a| {
                    let u = (0.5 + a * (i as f64 + 1.0)).fract();
                    inverse_normal_cdf(u.clamp(1e-12, 1.0 - 1e-12))
                })
                .collect();
            let v = CVector::from_fn(n, |r, _| Complex::new(coords[2 * r], coords[2 * r + 1]));
            let norm = v.norm();
            v / Complex::new(norm, 0.0)
        })
        .collect()
}

/// Acklam's rational approximation of the standard normal quantile.
/// Relative error below 1.2e-9, ample for generating directions.
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let plow = 0.02425;
    if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}
