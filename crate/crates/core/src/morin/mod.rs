//! Chebyshev polynomials, the family `M_r`, Morin normal forms and their lifts.

pub mod classify;
pub mod forms;
pub mod paths;
pub mod poly;
pub mod roots;

pub use classify::{
    chebyshev_double_points, classify_lift_sign, critical_points, lift_isotopy_check, ChebyshevPair, ClassifyReport,
    CriticalPoints, IsotopyReport, IsotopyWitness,
};
pub use forms::{
    delta_product_forward, delta_product_inverse, delta_sample_fr, delta_solve_fr, morin_eval, morin_eval_f64,
    morin_lift_eval, morin_lift_eval_f64, DoublePoint, MapContext, MorinSpec, ProductPayload, Sign,
};
pub use paths::{connect_to_tau, MrPath, PathCheck, PathSample, PathStage, StageKind};
pub use poly::{chebyshev, mr_membership, tau, MrPolynomial, Poly, PolyF};
pub use roots::roots;
