#![allow(non_snake_case)]
//! Central values of Rankin-Selberg L-functions L(1/2, pi x W) for a GL(2)
//! newform pi twisted by Hecke characters W = rho * (chi o N) of p-power
//! conductor over an imaginary quadratic field, together with the exact
//! finite identities their averages satisfy (orthogonality rearrangements,
//! hyper-Kloosterman/Salie closed forms) and the p-adic Weierstrass /
//! Iwasawa-algebra machinery that turns average nonvanishing into member
//! nonvanishing.
//!
//! Everything is desk scale: base field Q, imaginary quadratic K, odd p
//! inert in K and coprime to the level and discriminant.

pub mod arith;
pub mod characters;
pub mod expsums;
pub mod newform;
pub mod cutoff;
pub mod lfunction;
pub mod averages;
pub mod padic;
pub mod accept;

pub use arith::{build_field, dedekind_h, ideal_counts, picard_group, r_rho};
pub use arith::{IdealCountTable, OrderClassData, QuadraticFieldData};
pub use characters::{
    dirichlet_family, galois_orbits, ring_class_family, DirichletCharacter, HeckeCharacterW,
    RingClassCharacter,
};
pub use averages::{
    asymptotic_report, direct_average, exact_formula_average, galois_average, main_term_two_ways,
    primitive_average, rn_identity_check, AverageMode, AverageReport, PrimitiveAverageReport,
};
pub use accept::{render_report, run_all, CriterionResult};
pub use cutoff::{cutoff_v, CutoffSpec, Profile, VGrid};
pub use expsums::{
    crt_gauss_factorization, gauss_sum, kloosterman4_all, kloosterman4_bruteforce, salie_evaluate,
    tau_fourth_power_sum, ExpSumContext, SalieOutcome,
};
pub use lfunction::{
    central_value_afe, dirichlet_L_at_1, gl2_twisted_value, root_number, rs_coefficients,
    CentralValue, RSCoefficients,
};
pub use newform::{builtin_11a, load_newform, load_newform_str, NewformData};
pub use padic::{
    specialize, synthetic_measure_from_values, twist_norm, twist_norm_interpolation_check,
    weierstrass_prep, zero_count_bound, CycElt, CyclotomicModel, DVRSeries, IwasawaElement,
    WeierstrassFactorization, ZeroCount,
};

use thiserror::Error;

/// Error type shared across the library. Validation errors are bad inputs,
/// unsupported configurations are standing hypotheses we enforce (inert p,
/// p odd, desk-scale bounds), numerical errors mean a quadrature or
/// extraction did not certify.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Best bound toward Ramanujan-Selberg used in reports.
pub const THETA: f64 = 7.0 / 64.0;
