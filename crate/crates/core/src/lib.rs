//! Continuous frames, continuous K-frames and continuous weak A-frames,
//! realized on finite quadrature samples of a measure space.
//!
//! Every integral over the measure space `X` becomes a weighted sum with
//! strictly positive weights. Hilbert spaces are `C^d` with the standard inner
//! product `<f, g> = sum_i f_i conj(g_i)`, linear in the first slot.
//!
//! The analysis operator of a family stores `sqrt(w_i)` inside its rows, so
//! plain `l2` norms of its output equal weighted `L^2(X, mu)` norms. The same
//! embedding is used for coefficient maps `M: J -> L^2(X, mu)`.
//!
//! Module map:
//!
//! - [`spaces`]: measure spaces, vectors, graph inner products.
//! - [`linalg`]: eigendecomposition, pseudo-inverse, PSD square root and the
//!   range-inclusion factorization.
//! - [`frame`]: families, analysis/synthesis/frame operators, Bessel and frame
//!   certificates, and the partial-sum divergence probe.
//! - [`kframe`]: K-frames and atomic systems for `K: J -> H`.
//! - [`weak`]: weak A-frames over truncation ladders and the graph-norm view.
//! - [`gallery`]: generators for the standard example families.
//! - [`io`], [`report`]: fixture text formats and JSON-lines records.

pub mod error;
pub mod frame;
pub mod gallery;
pub mod instances;
pub mod io;
pub mod kframe;
pub mod linalg;
pub mod report;
pub mod spaces;
pub mod weak;

pub use error::{Error, Result};
pub use frame::{
    analysis_operator, certify_bessel, certify_frame, frame_operator, sesquilinear_form,
    synthesis_apply, AnalysisOperator, CertKind, FrameCertificate, VectorFamily,
};
pub use linalg::{douglas_factor, hermitian_eig, pinv, sqrt_psd, LinearMap, SpectralFactor};
pub use spaces::{graph_inner, standard_onb, weighted_l2_inner, GraphMetric, HVector, MeasureSpace};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Default relative rank cutoff for pseudo-inverses and range bases.
pub const DEFAULT_RANK_RTOL: f64 = 1e-12;
/// Default relative floor for certified lower frame bounds.
pub const DEFAULT_FRAME_RTOL: f64 = 1e-10;
/// Relative residual below which a factorization counts as exact.
pub const FACTORIZATION_THRESHOLD: f64 = 1e-9;
