//! Error exponents for two-user multiple-access channels built from a single
//! linear code split between the users.
//!
//! Numeric modules are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar type. The Monte Carlo harness in [`sim`] is `f64`
//! only.

pub mod channels;
pub mod curve;
pub mod error;
pub mod gaussian;
pub mod linear_codes;
pub mod optimize;
pub mod scalar;
pub mod sim;
pub mod su_exponents;
pub mod transform;

pub use error::{Error, Result};
pub use linear_codes::{GeneratorMatrix, SplitCode, TieRule};
pub use scalar::Real;
pub use sim::{PamTriplet, SimConfig};
pub use transform::TransformSpec;

pub type Pmf = channels::Pmf<f64>;
pub type Dmc = channels::Dmc<f64>;
pub type Mac2 = channels::Mac2<f64>;
pub type AdditiveNoiseChannel = channels::AdditiveNoiseChannel<f64>;
pub type ChannelModel = channels::ChannelModel<f64>;
pub type ExponentCurve = curve::ExponentCurve<f64>;
pub type SuExponentReport = su_exponents::SuExponentReport<f64>;
pub type SlepianWolfReport = su_exponents::SlepianWolfReport<f64>;
pub type GaussianMacParams = gaussian::GaussianMacParams<f64>;
pub type VirtualChannel = transform::VirtualChannel<f64>;
pub type SearchResult = transform::SearchResult<f64>;
pub type SplitErrors = linear_codes::SplitErrors<f64>;

pub type Pmf32 = channels::Pmf<f32>;
pub type Dmc32 = channels::Dmc<f32>;
pub type Mac2F32 = channels::Mac2<f32>;
pub type AdditiveNoiseChannel32 = channels::AdditiveNoiseChannel<f32>;
pub type ExponentCurve32 = curve::ExponentCurve<f32>;
pub type GaussianMacParams32 = gaussian::GaussianMacParams<f32>;
