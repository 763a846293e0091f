//! Structured game families and the bound checks specific to them.

pub mod congestion;
pub mod decomposition;
pub mod identical;
pub mod polymatrix;
pub mod potential;

pub use congestion::{
    parallel_links, random_subadditive, verify_merge_lemma, verify_pota_bound, CongestionFile,
    CongestionGame, MergeReport, PotaBoundReport,
};
pub use decomposition::{
    verify_decomposition_bounds, AlphaMode, DecompositionCertificate, DecompositionReport,
};
pub use identical::{is_identical_utility, verify_identical_utility, IdenticalReport};
pub use polymatrix::{
    check_symmetry_regularity, generate_passing, verify_posta_bound, GeneratorParams,
    PolymatrixFile, PolymatrixGame, PostaBoundReport, SymmetryReport,
};
pub use potential::{exact_potential, four_cycle_violation, is_exact_potential, FourCycle};
