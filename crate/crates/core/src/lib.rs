//! Physical-layer abstraction toolkit for distributed-MIMO indoor networks.
//!
//! The crate models a room whose walls carry many antenna elements that
//! jointly serve a set of single-antenna users. It produces per-coherence-block
//! SINR traces from deployment geometry and precoding, compresses those traces
//! to an effective SINR with exponential (EESM), capacity, or average mappings,
//! calibrates the mapping parameter against link-level Monte Carlo packet
//! simulations, and predicts packet error rates from an AWGN reference curve.
//!
//! Modules are generic over the real scalar type through the [`Real`] trait;
//! `f64` aliases for the main types live at the crate root.

pub mod abstraction;
pub mod antenna;
pub mod channel;
pub mod io;
pub mod linalg;
pub mod linkproc;
pub mod linksim;
pub mod quad;
pub mod sinr;
pub mod rng;
pub mod scenario;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the numerics are generic over. Implemented by `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + std::iter::Sum<Self>
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + std::iter::Sum<Self>
        + std::fmt::Debug
        + std::fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Shorthand conversion from an `f64` literal into the working scalar type.
#[inline]
pub fn fl<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must be representable")
}

/// Lossy conversion back to `f64`, used at I/O boundaries.
#[inline]
pub fn dbl<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar must convert to f64")
}

/// Converts a linear power ratio to decibels.
#[inline]
pub fn linear_to_db<T: Real>(x: T) -> T {
    fl::<T>(10.0) * x.log10()
}

/// Converts decibels to a linear power ratio.
#[inline]
pub fn db_to_linear<T: Real>(db: T) -> T {
    fl::<T>(10.0).powf(db / fl(10.0))
}

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K (SI exact value). Scenarios may override it.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("quadrature did not converge within {evals} evaluations (estimate {estimate:.6e})")]
    QuadratureNonConvergence { evals: usize, estimate: f64 },
    #[error("SVD did not converge after {0} sweeps")]
    SvdNonConvergence(usize),
    #[error(
        "channel matrix is rank deficient: sigma_min/sigma_max = {ratio:.3e} \
         is at or below threshold {threshold:.1e}"
    )]
    RankDeficient { ratio: f64, threshold: f64 },
    #[error("user placement failed after {attempts} attempts; d_min may be infeasible")]
    PlacementRejection { attempts: usize },
    #[error("channel drop at block {block} rejected {attempts} times; geometry may be degenerate")]
    DropRejection { block: usize, attempts: usize },
    #[error(
        "calibration window is empty: none of the {n_total} PER points fall inside \
         [{lo:.1e}, {hi:.1e}]"
    )]
    EmptyCalibrationWindow { n_total: usize, lo: f64, hi: f64 },
    #[error("reference curve must be nonempty (got {0} points)")]
    CurveTooShort(usize),
    #[error("invalid reference curve: {0}")]
    InvalidCurve(String),
    #[error("calibration objective is not finite at beta = {beta}")]
    NonFiniteObjective { beta: f64 },
    #[error("unknown MCS '{0}'")]
    UnknownMcs(String),
    #[error("LLR vector length {0} is not 2*(info_bits + 6) for a terminated rate-1/2 code")]
    LlrLength(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no beta entry for MCS '{mcs}' with method '{method}'")]
    BetaNotFound { mcs: String, method: String },
    #[error("CSV schema mismatch in {path}: {detail}")]
    CsvSchema { path: String, detail: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result type.
pub type Result<A> = std::result::Result<A, Error>;

/// Complex scalar over `f64`.
pub type Cplx = Complex<f64>;
/// Complex matrix over `f64`.
pub type Mat = linalg::CMat<f64>;
/// Deployment scenario over `f64`.
pub type Scenario64 = scenario::Scenario<f64>;
/// SINR trace over `f64`.
pub type SinrTrace64 = sinr::SinrTrace<f64>;
/// AWGN reference curve over `f64`.
pub type RefCurve64 = abstraction::RefCurve<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversions_round_trip() {
        for &x in &[1e-9, 0.5, 1.0, 3.0, 1e6] {
            let db = linear_to_db::<f64>(x);
            assert!((db_to_linear::<f64>(db) - x).abs() <= 1e-12 * x);
        }
        assert_eq!(linear_to_db::<f64>(10.0), 10.0);
        assert_eq!(db_to_linear::<f64>(0.0), 1.0);
    }

    #[test]
    fn generic_over_f32_and_f64() {
        fn three_db<T: Real>() -> T {
            db_to_linear(fl::<T>(3.0))
        }
        assert!((three_db::<f64>() - 1.9952623149688795).abs() < 1e-15);
        assert!((three_db::<f32>() - 1.995_262_3_f32).abs() < 1e-6);
    }
}
