//! Invariant metrics and curvature of the pseudo-egg
//! `E = { |z1|^{2m} + |z2|^2 + ... + |zn|^2 < 1 }`, `0 < m < 1/2`.
//!
//! * [`egg_domain`]: parameters, membership, gauge and automorphisms.
//! * [`kobayashi`]: the Kobayashi metric, its crossover and indicatrix.
//! * [`ellipsoid`]: the minimal ellipsoid containing the indicatrix.
//! * [`wu_metric`]: the Wu metric, its Kähler defect and behavior near `z1 = 0`.
//! * [`curvature`]: holomorphic sectional curvature and its bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod egg_domain;
pub mod ellipsoid;
pub mod error;
pub mod kobayashi;
pub mod roots;
pub mod sampling;
pub mod verify;
pub mod wirtinger;
pub mod wu_metric;

pub use egg_domain::{CMatrix, CVector, Complex, DomainPoint, EggAutomorphism, EggParams, TangentVector};
pub use error::{Error, Result};
