//! Numerical laboratory for a canonical pair (q, p) on a periodic lattice.
//!
//! The crate builds commensurate families of bounded operators in q and p —
//! cosines, spectral sign projections, translations — and verifies their
//! algebraic relations, the measurement-disturbance operator and its strong
//! convergence, and the arithmetic of the resulting value-assignment
//! obstruction, at double precision with explicit residual tolerances.
//! Finite-dimensional comparison cases (a two-qubit operator square and a
//! single-spin hidden-variable model) are included as controls.

pub mod audit;
pub mod disturb;
pub mod error;
pub mod kscons;
pub mod lattice;
pub mod mermin;
pub mod opalg;
pub mod report;

pub use error::{Error, Result};
pub use lattice::{
    gaussian_state, inner, l2_dist, l2_norm, make_lattice, transform, Basis, Direction, Ensemble,
    GaussianSpec, LatticeConfig, PureState, StateSpec, C64,
};
pub use opalg::{
    applied_norm, commutator, dense_materialize, expectation, identity_residual, residual_suite,
    sign_projections, sym_product, DenseMatrix, LinOp, SignProjectionPair, DENSE_MAX_N,
    SIGN_ZERO_GUARD,
};
pub use report::{fmt_f64, ResidualRow, ResidualTable};

pub use audit::{
    contradiction_certificate, epsilon_threshold, identity_cc_check, joint_b_distribution,
    premise_residuals, run_audit, AuditParams, AuditReport, ContradictionCertificate,
    JointHistogram,
};
pub use disturb::{
    convergence_sweep, disturbance, expectation_shift, involution_projections,
    outcome_distribution, post_measurement_ensemble, DisturbanceReport, Histogram, SweepRow,
};
pub use kscons::{
    fantasy_unsat, make_family, relation_suite, two_dof_check, weyl_check, FantasyCertificate,
    ObstructionFamily,
};
pub use mermin::{
    angle_between, assignment_search, bell_eps_product_check, bell_sample,
    mermin_relations_check, p_plus_quantum, random_unit_vector, Assignment, AssignmentSearch,
    BellModel, EpsProductRow, SpinOpSet,
};
