//! The regularizer symbol `b` of a symbol `a` that does not degenerate on the boundary.

mod construct;
mod radius;
mod transition;

pub use construct::{
    build_regularizer, regularize, seam_defects, verify_regularizer, CertificateCheck, RegularizerCertificate,
    RegularizerResult, SeamDefect, VerifyConfig,
};
pub use radius::{a_of_r, estimate_a_pm, estimate_c, find_r, APm, BoundaryConstant, RadiusSearch, RegularizerConfig};
pub use transition::{
    build_transition, p_minus, p_minus_symbol, p_plus, p_plus_symbol, transition_dp, transition_p, PSign,
    TransitionPack,
};
