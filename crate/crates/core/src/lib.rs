//! Toric geometry and Chern-Simons data for lens spaces `L(p,q)`.
//!
//! The closed-string side lives in [`lattice`] and [`mirror`]: the fan of the
//! resolved orbifolded conifold, its triangulation, Betti numbers and the
//! Hori-Vafa Newton polynomial. The open-string side lives in [`cs_exact`]
//! (permutation sums), [`cs_matrix`] (eigenvalue integrals) and [`large_n`]
//! (saddle points, spectral curves and the `q`-independence check).

pub mod cs_exact;
pub mod cs_matrix;
mod dd;
pub mod error;
pub mod large_n;
pub mod lattice;
pub mod mirror;
pub mod poly;
pub mod quad;
pub mod serde_complex;
mod sum;

pub use num_complex::Complex64;

pub use cs_exact::{
    flat_connections, root_data, weyl_product, weyl_sum, z_exact, z_exact_with, z_full, Coupling, ExactCSInput,
    ExactOptions, FlatConnection, FullSumOptions, GaugeGroup, Lift, PartitionValue, RootData,
    Weighting,
};
pub use cs_matrix::{
    integrand, iz_integral, z_monte_carlo, z_quadrature, z_quadrature_with, z_unitary_chain,
    AppendixConstants, IZInput, MatrixModelSpec, QuadOptions, QuadratureResult, Representation,
};
pub use error::{Error, Result};
pub use large_n::{
    build_curve_q1, build_curve_q1_fillings, claim1_report, density_from_curve, empirical_density, q_independence_test,
    q_independence_explore, saddle_solve, sokhotski_check, sokhotski_check_fn, Claim1Report, Cut, CurveSheet, Density, EquilibriumConfig, QIndependenceReport,
    QPair, SaddleProblem, SokhotskiReport, SpectralCurveQ1, TooftData, Verdict,
};
pub use lattice::{
    build_fan, fan_automorphism, interior_points, lattice_width, pq_web, topology, triangulate,
    AffineMap, LatticeFan, LatticePoint2, LensSpace, PQWeb, ToricTopology, Triangulation,
};
pub use mirror::{
    curve_invariants, newton_polynomial, q1_specialization, Coefficient, CurveInvariants,
    NewtonPolynomial, Term,
};
