//! Lifts of simplicial maps: lift functions, double points, the triangulation
//! pipeline, PL-ification, homotopies and stability.

pub mod double;
pub mod examples;
pub mod function;
pub mod homotopy;
pub mod pipeline;
pub mod plify;
pub mod stability;

pub use double::{sample_double_points, sign_map, DoublePair, DoublePointSample, SignMap};
pub use function::{ClosedForm, LiftFunction, PlTable, TrigTerm};
pub use homotopy::{homotopy_certificate, linear_lift_homotopy_check, CubeHomotopy, HomotopyReport, LinearHomotopyReport};
pub use pipeline::{certify, triangulate_lift, verify_certificate, LiftConfig, LiftTriangulation};
pub use plify::{plify, verify_embedding_exact, EmbeddingVerdict};
pub use stability::{perturbation_stability, stability_radius, RadiusReport, StabilityReport};
