//! Invariant suites over the standard grid `m in {0.1, 0.25, 0.4}`,
//! `n in {2, 3}`, `p in {0.1, 0.3, 0.5, 0.7, 0.9}`.
//!
//! Every check records the measured quantity next to its threshold. Cells
//! run in parallel but results are collected in grid order, so a report
//! depends only on the suite and the seed.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature;
use crate::egg_domain::{self, CVector, Complex, DomainPoint, EggParams};
use crate::ellipsoid;
use crate::error::{Error, Result};
use crate::kobayashi;
use crate::sampling;
use crate::wu_metric;

pub const STANDARD_M: [f64; 3] = [0.1, 0.25, 0.4];
pub const STANDARD_N: [usize; 2] = [2, 3];
pub const STANDARD_P: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const DEFAULT_SEED: u64 = 20_240_229;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Domain,
    Kobayashi,
    Wu,
    Curvature,
    All,
}

impl Suite {
    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Domain, Suite::Kobayashi, Suite::Wu, Suite::Curvature],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "domain" => Ok(Suite::Domain),
            "kobayashi" => Ok(Suite::Kobayashi),
            "wu" => Ok(Suite::Wu),
            "curvature" => Ok(Suite::Curvature),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!("unknown suite {other:?}"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Domain => "domain",
            Suite::Kobayashi => "kobayashi",
            Suite::Wu => "wu",
            Suite::Curvature => "curvature",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

/// Whether `measured` must stay below or above `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: &'static str,
    pub m: f64,
    pub n: usize,
    pub measured: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl CheckResult {
    /// Distance to the threshold, positive when the check passes.
    pub fn margin(&self) -> f64 {
        match self.bound {
            Bound::Upper => self.threshold - self.measured,
            Bound::Lower => self.measured - self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

struct Cell {
    params: EggParams,
    seed: u64,
}

struct Recorder {
    suite: Suite,
    m: f64,
    n: usize,
    out: Vec<CheckResult>,
}

impl Recorder {
    fn record(&mut self, name: &'static str, bound: Bound, threshold: f64, measured: Result<f64>) {
        let (measured, error) = match measured {
            Ok(v) => (v, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        let passed = error.is_none()
            && match bound {
                Bound::Upper => measured <= threshold,
                Bound::Lower => measured >= threshold,
            };
        self.out.push(CheckResult {
            suite: self.suite,
            name,
            m: self.m,
            n: self.n,
            measured,
            threshold,
            bound,
            passed,
            error,
        });
    }

    fn upper(&mut self, name: &'static str, threshold: f64, measured: Result<f64>) {
        self.record(name, Bound::Upper, threshold, measured);
    }

    fn lower(&mut self, name: &'static str, threshold: f64, measured: Result<f64>) {
        self.record(name, Bound::Lower, threshold, measured);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn fold_max(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut acc = 0.0f64;
    for v in values {
        acc = acc.max(v?);
    }
    Ok(acc)
}

fn fold_min(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut acc = f64::INFINITY;
    for v in values {
        acc = acc.min(v?);
    }
    Ok(acc)
}

fn e(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = Complex::new(1.0, 0.0);
    v
}

/// Runs a suite on the standard grid.
pub fn run_suite(suite: Suite, seed: u64) -> VerifyReport {
    let mut cells = Vec::new();
    for (im, &m) in STANDARD_M.iter().enumerate() {
        for (inn, &n) in STANDARD_N.iter().enumerate() {
            let params = EggParams::new(n, m).expect("standard grid is valid");
            let cell_seed = seed ^ ((im as u64) << 8 | inn as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            cells.push(Cell {
                params,
                seed: cell_seed,
            });
        }
    }
    let mut checks = Vec::new();
    for part in suite.parts() {
        let per_cell: Vec<Vec<CheckResult>> = cells.par_iter().map(|c| run_cell(part, c)).collect();
        checks.extend(per_cell.into_iter().flatten());
    }
    VerifyReport {
        suite,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn run_cell(suite: Suite, cell: &Cell) -> Vec<CheckResult> {
    let mut rec = Recorder {
        suite,
        m: cell.params.m(),
        n: cell.params.n(),
        out: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cell.seed);
    match suite {
        Suite::Domain => domain_checks(&mut rec, &cell.params, &mut rng),
        Suite::Kobayashi => kobayashi_checks(&mut rec, &cell.params, &mut rng),
        Suite::Wu => wu_checks(&mut rec, &cell.params, &mut rng),
        Suite::Curvature => curvature_checks(&mut rec, &cell.params, &mut rng, cell.seed),
        Suite::All => unreachable!("expanded by run_suite"),
    }
    rec.out
}

fn domain_checks(rec: &mut Recorder, pr: &EggParams, rng: &mut ChaCha8Rng) {
    let n = pr.n();
    let points: Vec<DomainPoint> = (0..200).map(|_| sampling::random_point(pr, rng)).collect();

    rec.upper(
        "normalization_lands_on_axis",
        1e-10,
        fold_max(points.iter().map(|z| {
            let nz = egg_domain::normalize(pr, z)?;
            let img = nz.automorphism.apply(z.coords());
            let tangential = egg_domain::zhat_norm_sqr(&img).sqrt();
            Ok(tangential.max((img[0] - Complex::new(nz.axis, 0.0)).norm()))
        })),
    );

    let phis: Vec<_> = (0..20).map(|_| sampling::random_automorphism(pr, rng)).collect();
    let outside = phis
        .iter()
        .flat_map(|phi| points.iter().map(move |z| (phi, z)))
        .filter(|(phi, z)| !egg_domain::contains(pr, &phi.apply(z.coords())))
        .count();
    rec.upper("automorphisms_preserve_domain", 0.0, Ok(outside as f64));

    rec.upper(
        "inverse_automorphism",
        1e-10,
        Ok(phis
            .iter()
            .zip(&points)
            .map(|(phi, z)| {
                let back = phi.inverse(pr).apply(&phi.apply(z.coords()));
                (back - z.coords()).iter().map(|c| c.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)),
    );

    let h = 1e-6;
    rec.upper(
        "jacobian_vs_finite_differences",
        1e-6,
        Ok(phis
            .iter()
            .zip(points.iter().map(|z| z.coords() * Complex::new(0.8, 0.0)))
            .map(|(phi, z)| {
                let j = phi.jacobian(&z);
                let mut worst = 0.0f64;
                for col in 0..n {
                    let mut d = CVector::zeros(n);
                    d[col] = Complex::new(h, 0.0);
                    let fd = (phi.apply(&(&z + &d)) - phi.apply(&(&z - &d))) / Complex::new(2.0 * h, 0.0);
                    for row in 0..n {
                        worst = worst.max((fd[row] - j[(row, col)]).norm() / j[(row, col)].norm().max(1.0));
                    }
                }
                worst
            })
            .fold(0.0, f64::max)),
    );

    rec.upper(
        "gauge_homogeneity",
        1e-12,
        Ok((0..50)
            .map(|_| {
                let v = sampling::random_vector(n, rng);
                let lambda = sampling::random_phase(rng) * (0.1 + 3.0 * rand::Rng::random::<f64>(rng));
                rel(
                    egg_domain::minkowski_functional(pr, &(&v * lambda)),
                    lambda.norm() * egg_domain::minkowski_functional(pr, &v),
                )
            })
            .fold(0.0, f64::max)),
    );
}

fn kobayashi_checks(rec: &mut Recorder, pr: &EggParams, rng: &mut ChaCha8Rng) {
    let n = pr.n();
    let m = pr.m();
    rec.upper(
        "slice_exactness",
        1e-10,
        fold_max(STANDARD_P.iter().map(|&p| {
            let (k1, _) = kobayashi::kobayashi_axis(pr, p, &(e(n, 0) * Complex::new(0.7, -0.2)))?;
            let (k2, _) = kobayashi::kobayashi_axis(pr, p, &(e(n, 1) * Complex::new(0.3, 0.6)))?;
            let a = rel(k1, Complex::new(0.7, -0.2).norm() / (1.0 - p * p));
            let b = rel(k2, Complex::new(0.3, 0.6).norm() / (1.0 - p.powf(2.0 * m)).sqrt());
            Ok(a.max(b))
        })),
    );

    let crossings: Vec<Result<kobayashi::Crossover>> = STANDARD_P
        .iter()
        .map(|&p| kobayashi::solve_crossover(pr, p))
        .collect();
    rec.lower(
        "crossover_inside_window",
        0.0,
        fold_min(crossings.iter().map(|c| {
            let c = c.clone()?;
            Ok((c.w0 - 1.0).min(pr.w_max() - c.w0))
        })),
    );
    rec.upper(
        "crossover_t_consistency",
        1e-8,
        fold_max(crossings.iter().map(|c| {
            let c = c.clone()?;
            Ok((kobayashi::compute_t(pr, c.w0)? - c.t0).abs())
        })),
    );
    rec.upper(
        "crossover_k1_equals_k2",
        1e-7,
        fold_max(crossings.iter().map(|c| Ok(c.clone()?.mismatch))),
    );

    rec.upper(
        "indicatrix_has_unit_length",
        1e-8,
        fold_max(STANDARD_P.iter().map(|&p| {
            let samples = kobayashi::indicatrix_boundary(pr, p, 256)?;
            fold_max(
                samples
                    .iter()
                    .map(|s| Ok((kobayashi::kobayashi_axis(pr, p, &s.tangent(n))?.0 - 1.0).abs())),
            )
        })),
    );

    rec.lower(
        "square_convexity",
        -1e-10,
        fold_min(
            STANDARD_P
                .iter()
                .map(|&p| Ok(kobayashi::square_convexity_check(pr, p, 512)?.min_second_difference)),
        ),
    );

    rec.upper(
        "automorphism_invariance",
        1e-8,
        fold_max((0..25).map(|_| {
            let z = sampling::random_point(pr, rng);
            let v = sampling::random_vector(n, rng);
            let phi = sampling::random_automorphism(pr, rng);
            let img = DomainPoint::new(pr, phi.apply(z.coords()))?;
            let before = kobayashi::kobayashi_general(pr, &z, &v)?;
            let after = kobayashi::kobayashi_general(pr, &img, &(phi.jacobian(z.coords()) * &v))?;
            Ok(rel(after, before))
        })),
    );
}

fn wu_checks(rec: &mut Recorder, pr: &EggParams, rng: &mut ChaCha8Rng) {
    let n = pr.n();
    let m = pr.m();
    rec.upper(
        "ellipsoid_reproduces_axis_form",
        1e-3,
        fold_max(STANDARD_P.iter().map(|&p| {
            let fit = ellipsoid::fit_min_volume_ellipsoid(pr, p, 4096)?;
            Ok(rel(fit.r1, (1.0 - p * p).powi(-2)).max(rel(fit.r2, 1.0 / (1.0 - p.powf(2.0 * m)))))
        })),
    );

    let quad: Vec<Result<(f64, f64)>> = STANDARD_P
        .iter()
        .map(|&p| {
            let h = wu_metric::wu_axis(pr, p)?;
            let vals: Vec<f64> = kobayashi::indicatrix_boundary(pr, p, 1024)?
                .iter()
                .map(|s| h.quadratic(&s.tangent(n)))
                .collect();
            Ok((vals.iter().copied().fold(f64::NEG_INFINITY, f64::max), 0.0))
        })
        .collect();
    rec.upper(
        "indicatrix_inside_wu_ball",
        1e-8,
        fold_max(quad.iter().map(|q| Ok(q.clone()?.0 - 1.0))),
    );
    rec.lower(
        "wu_ball_touches_indicatrix",
        1.0 - 1e-5,
        fold_min(quad.iter().map(|q| Ok(q.clone()?.0))),
    );

    rec.upper(
        "general_reduces_to_axis",
        1e-14,
        fold_max(STANDARD_P.iter().map(|&p| {
            let g = wu_metric::wu_general(pr, &DomainPoint::axis(pr, p)?);
            let a = wu_metric::wu_axis(pr, p)?;
            Ok(g.distance(&a) / a.entries.iter().map(|c| c.norm()).fold(0.0, f64::max))
        })),
    );

    rec.upper(
        "pullback_invariance",
        1e-8,
        Ok((0..25)
            .map(|_| {
                let z = sampling::random_point(pr, rng);
                let phi = sampling::random_automorphism(pr, rng);
                let img = phi.apply(z.coords());
                let h_img = wu_metric::HermitianForm::new(wu_metric::wu_entries(pr, &img), img);
                let pulled = h_img.pullback(&phi.jacobian(z.coords()), z.coords().clone());
                let h = wu_metric::wu_general(pr, &z);
                pulled.distance(&h) / h.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)),
    );

    rec.lower(
        "positive_definite",
        f64::MIN_POSITIVE,
        Ok((0..200)
            .map(|_| wu_metric::wu_general(pr, &sampling::random_point(pr, rng)).min_eigenvalue())
            .fold(f64::INFINITY, f64::min)),
    );

    let zs = [0.2, 0.5, 0.8].map(|x| Complex::new(x, 0.0));
    rec.lower(
        "non_kahler_defect",
        1e-3,
        fold_min(zs.iter().map(|&z| Ok(wu_metric::kahler_defect(pr, z)?.norm()))),
    );
    rec.upper(
        "defect_matches_finite_differences",
        1e-6,
        fold_max(zs.iter().map(|&z| {
            let a = wu_metric::kahler_defect(pr, z)?;
            let b = wu_metric::kahler_defect_fd(pr, z)?;
            Ok((a - b).norm() / a.norm())
        })),
    );

    let probes = [CVector::zeros(n - 1), {
        let mut v = CVector::zeros(n - 1);
        v[0] = Complex::new(0.5, 0.0);
        v
    }];
    let reports: Vec<Result<wu_metric::ContinuityReport>> = probes
        .iter()
        .map(|zh| wu_metric::continuity_probe_z(pr, zh, &[1e-1, 1e-2, 1e-3]))
        .collect();
    rec.lower(
        "continuity_monotone",
        1.0,
        fold_min(
            reports
                .iter()
                .map(|r| Ok(if r.clone()?.monotone { 1.0 } else { 0.0 })),
        ),
    );
    rec.upper(
        "continuity_distance_at_1e-3",
        wu_metric::CONTINUITY_THRESHOLD,
        fold_max(reports.iter().map(|r| Ok(r.clone()?.final_distance))),
    );
}

/// Deterministic directions for slices through the origin: the coordinate
/// axes followed by mixed directions with both `u1` and `uhat` nonzero.
pub fn slice_directions(n: usize) -> Vec<CVector> {
    let mut dirs: Vec<CVector> = (0..n).map(|k| e(n, k)).collect();
    let mixed: [(f64, f64, f64, f64); 6] = [
        (1.0, 0.0, 1.0, 0.0),
        (1.0, 0.0, 0.0, 1.0),
        (1.0, 0.0, -0.5, 0.0),
        (0.5, 0.0, 1.0, 0.0),
        (1.0, 0.0, 0.2, 0.3),
        (0.3, -0.4, 1.0, 0.0),
    ];
    for (idx, (a, b, c, d)) in mixed.iter().enumerate() {
        let mut v = CVector::zeros(n);
        v[0] = Complex::new(*a, *b);
        // spread the tangential part over the remaining coordinates
        let slot = 1 + idx % (n - 1);
        v[slot] = Complex::new(*c, *d);
        if n > 2 && idx % 2 == 1 {
            v[1 + (slot % (n - 1))] = Complex::new(0.5 * c, -0.5 * d);
        }
        dirs.push(&v / Complex::new(v.norm(), 0.0));
    }
    dirs
}

/// Constant used for the currents test on `Z`.
pub const CURRENTS_C: f64 = 0.1;

fn curvature_checks(rec: &mut Recorder, pr: &EggParams, rng: &mut ChaCha8Rng, seed: u64) {
    let n = pr.n();
    let tensors: Vec<Result<(curvature::CurvatureTensor, curvature::CurvatureTensor)>> = STANDARD_P
        .iter()
        .map(|&p| {
            Ok((
                curvature::curvature_tensor_fd(pr, &DomainPoint::axis(pr, p)?)?,
                curvature::curvature_axis_closed_form(pr, p)?,
            ))
        })
        .collect();
    rec.upper(
        "closed_form_matches_fd",
        1e-5,
        fold_max(tensors.iter().map(|t| {
            let (fd, cf) = t.clone()?;
            Ok(cf
                .entries()
                .filter(|(_, v)| v.norm() > 0.0)
                .map(|((i, j, k, l), v)| (fd.get(i, j, k, l) - v).norm() / v.norm())
                .fold(0.0, f64::max))
        })),
    );
    rec.upper(
        "other_components_vanish",
        1e-7,
        fold_max(tensors.iter().map(|t| {
            let (fd, cf) = t.clone()?;
            let scale = cf.max_abs();
            Ok(cf
                .entries()
                .filter(|(_, v)| v.norm() == 0.0)
                .map(|((i, j, k, l), _)| fd.get(i, j, k, l).norm() / scale)
                .fold(0.0, f64::max))
        })),
    );

    let scan = curvature::hsc_bound_scan(pr, &STANDARD_P, 1000);
    rec.upper(
        "hsc_upper_bound",
        curvature::HSC_BOUND + curvature::HSC_BOUND_TOL,
        scan.as_ref().map(|s| s.max_hsc).map_err(Clone::clone),
    );
    rec.lower(
        "hsc_non_constant",
        0.1,
        scan.as_ref().map(|s| s.max_hsc - s.min_hsc).map_err(Clone::clone),
    );

    let cmp = curvature::comparison_check(pr, 1000, seed);
    rec.lower(
        "comparison_semidefinite",
        curvature::COMPARISON_TOL,
        cmp.as_ref().map(|c| c.min_eigenvalue).map_err(Clone::clone),
    );
    rec.upper(
        "comparison_equal_at_origin",
        1e-12,
        cmp.as_ref().map(|c| c.origin_gap).map_err(Clone::clone),
    );

    rec.lower(
        "currents_margin_on_z",
        0.0,
        fold_min(slice_directions(n).iter().map(|u| {
            Ok(
                curvature::currents_negativity_test(pr, u, CURRENTS_C, &curvature::DEFAULT_BUMP_WIDTHS)?
                    .margin,
            )
        })),
    );

    rec.upper(
        "ball_metric_calibration",
        1e-6,
        fold_max((0..20).map(|_| {
            let z = sampling::random_point_scaled(pr, 0.9, rng);
            let xi = sampling::random_vector(n, rng);
            let r = curvature::curvature_tensor_from(curvature::ball_metric_entries, z.coords())?;
            Ok((curvature::hsc_from(&r, &curvature::ball_metric_entries(z.coords()), &xi) + 2.0).abs())
        })),
    );

    rec.upper(
        "hsc_automorphism_invariance",
        1e-5,
        fold_max((0..10).map(|_| {
            let (z, phi) = smooth_pair(pr, rng);
            let xi = sampling::random_vector(n, rng);
            let img = DomainPoint::new(pr, phi.apply(z.coords()))?;
            let before = curvature::hsc(pr, &z, &xi)?;
            let after = curvature::hsc(pr, &img, &(phi.jacobian(z.coords()) * &xi))?;
            Ok((after - before).abs() / before.abs())
        })),
    );
}

/// A random point and automorphism with both the point and its image at
/// distance at least `0.05` from `Z` in `|z1|` and away from the boundary,
/// where the finite-difference tensor is resolved.
pub fn smooth_pair(pr: &EggParams, rng: &mut ChaCha8Rng) -> (DomainPoint, egg_domain::EggAutomorphism) {
    loop {
        let z = sampling::random_point_scaled(pr, 0.9, rng);
        let phi = sampling::random_automorphism(pr, rng);
        let img = phi.apply(z.coords());
        let inner = |w: &CVector| w[0].norm() >= 0.05 && pr.defining_function(w) <= 0.9;
        if inner(z.coords()) && inner(&img) {
            return (z, phi);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [
            Suite::Domain,
            Suite::Kobayashi,
            Suite::Wu,
            Suite::Curvature,
            Suite::All,
        ] {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn slice_directions_cover_mixed_cases() {
        for n in [2, 3] {
            let dirs = slice_directions(n);
            assert!(dirs.len() >= 8);
            let mixed = dirs
                .iter()
                .filter(|u| u[0].norm() > 0.0 && egg_domain::zhat_norm_sqr(u) > 0.0)
                .count();
            assert!(mixed >= 6);
            assert!(dirs.iter().all(|u| (u.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn domain_suite_is_deterministic_and_green() {
        let a = run_suite(Suite::Domain, 3);
        let b = run_suite(Suite::Domain, 3);
        assert_eq!(a, b);
        assert!(
            a.passed,
            "{:#?}",
            a.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()
        );
    }
}
