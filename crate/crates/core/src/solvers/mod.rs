//! Self-contained numerical kernels.

mod linalg;
mod lp;
mod sdp;

pub use linalg::{
    cholesky, fix_phase, gen_eig_max, gen_eig_max_loaded_rank_one, hermitian_defect, hermitian_eig_max,
    hermitian_eigen, hermitian_part, orthonormal_span, outer, HermitianEigen, HERMITIAN_TOL,
};
pub use lp::{lp_objective_at, tiny_lp, LpResult};
pub use sdp::{
    maxmin_sdp, maxmin_sdp_factors, min_snr, rank_one_extract, rank_one_factor, unit_snr_beam, ActiveSet,
    MaxMinSdpResult, UnitSnrBeam, RANK_TOL,
};
