//! Decision procedures for stochastic dominance orders between distributions
//! with finitely many breakpoints.
//!
//! The crate covers first and second order dominance, fractional dominance
//! with a constant or non-decreasing `gamma`, its functional variant with
//! `1/gamma` weights, and almost dominance with a function `epsilon`. It also
//! computes minimal dominating parameters, expected-utility gaps of piecewise
//! linear utilities, partial-greediness profiles and a sampling oracle that
//! cross-checks each decider against expected utilities.

pub mod distributions;
pub mod dominance;
pub mod error;
pub mod gamma;
pub mod generators;
pub mod piecewise;
pub mod oracle;
pub mod poly;
pub mod utility;

/// Default comparison tolerance for signs and verdict margins.
pub const DEFAULT_TOL: f64 = 1e-9;

pub use distributions::{dirac, from_samples, mixture, shift, DiscretePMF, Distribution};
pub use dominance::{
    check_easd, check_easd_with, check_ffsd, check_ffsd_with, check_fractional, check_fractional_with, check_fsd,
    check_fsd_with, check_mfsd, check_mfsd_with, check_ssd, check_ssd_with, CheckOptions, Diagnostic, Order, Verdict,
};
pub use error::{Error, Result};
pub use gamma::{validate_epsilon, validate_gamma, ConstantBound, EpsilonFn, GammaFn};
pub use piecewise::{CumArea, PairAreas, PiecewiseFn, SignedParts};
pub use poly::Poly;
pub use utility::{
    ara_bound_report, certify, certify_combination, check_dpm_gamma, check_dpm_gamma_with, check_membership_asd,
    check_membership_fractional, combine, expected_utility_gap, global_greediness, greediness_profile, make_base_asd,
    make_base_ff, make_base_mf, mfsd_exclusion, partial_greediness, translate, DpmOptions, ExclusionVerdict,
    GreedinessProfile, MembershipVerdict, MemberReason, UtilityPWL,
};
pub use oracle::{
    agreement_easd, agreement_ffsd, agreement_mfsd, greediness_oracle, sample_asd_utilities, sample_ff_utilities,
    sample_mf_utilities, AgreementReport, SamplerConfig,
};
