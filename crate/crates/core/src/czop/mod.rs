//! Perfect dyadic Calderón–Zygmund operators, adapted Haar systems and
//! `T1`/`Tb` certificates.

mod kernel;

pub use kernel::{
    apply, apply_adjoint, dense_matrix, diagonal, kernel_admissibility, operator_norm, power_norm, splitting_residual,
    t_one, t_star_one, PerfectDyadicKernel, DENSE_NORM_MAX_M,
};
mod certificate;
#[cfg(test)]
pub(crate) mod testutil;

pub use certificate::{local_t1_constant, t1_certificate, weak_boundedness, CertificateReport, T1Mode};
mod adapted;

pub use adapted::{
    accrete_eps, accrete_select, accretivity, adapted_dual, adapted_norm, adapted_transform, adapted_wavelet,
    ortho_check, AccreteSelection, AccretivityFlavor, AccretivityReport, OrthoReport,
};
mod system;

pub use system::{split_lemma_check, trunc_check, AccretiveSystem, Side, SplitReport, TruncReport};
mod subtree;

pub use subtree::{subtree_prune, subtree_reconstruct, BufferTerm, SubtreeDecomposition};
mod tb;

pub use tb::{
    commutator_residual, global_tb_certificate, local_tb_certificate, modified_wbp, semmes_t1, GlobalTb, SemmesReport,
    TbMode, TB_FULL_SAMPLE_MAX_M, TB_SECOND_TOP_DEPTH, TB_TOPS_PER_LEVEL,
};
