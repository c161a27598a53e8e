//! Numerical laboratory for geometry preservation, forgetfulness and quantum
//! identification over finite-dimensional quantum channels.
//!
//! The linear-algebra layer ([`tensor`], [`channels`]) is generic over the
//! real scalar ([`Real`]); the optimizers, decoders and reports run in `f64`.

pub mod capacity;
pub mod channels;
pub mod duality;
pub mod error;
pub mod lemmas;
pub mod metrics;
pub mod qid;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod tensor;
pub mod typicality;

pub use channels::{Channel, LinearMap};
pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real};
pub use tensor::{ComplexOperator, PureState, Subspace};

pub type Operator32 = ComplexOperator<f32>;
pub type Operator64 = ComplexOperator<f64>;
pub type PureState32 = PureState<f32>;
pub type PureState64 = PureState<f64>;
pub type Subspace32 = Subspace<f32>;
pub type Subspace64 = Subspace<f64>;
pub type Channel32 = Channel<f32>;
pub type Channel64 = Channel<f64>;
/// A density matrix; positivity and unit trace are checked where consumed.
pub type DensityMatrix = ComplexOperator<f64>;
