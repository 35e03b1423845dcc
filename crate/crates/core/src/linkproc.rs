//! Pilot-based channel estimation and linear precoding.
//!
//! Pilots are the first `K` columns of the unitary `tau_p`-point DFT, so
//! distinct users are exactly orthogonal. A pilot observation over one
//! coherence block is
//!
//! ```text
//! Y_p = sqrt(rho_p * tau_p) * G * Phi^H + W_p,   W_p entries ~ CN(0, N0)
//! ```
//!
//! and the least-squares estimate `Ghat = Y_p * Phi / sqrt(rho_p * tau_p)`
//! recovers `G` exactly in the noiseless case with per-entry error variance
//! `N0 / (rho_p * tau_p)` otherwise.
//!
//! Precoders normalize per user: maximum ratio uses the estimated column
//! direction, zero forcing uses the right inverse `Ghat (Ghat^H Ghat)^-1`
//! with unit-normalized columns. Combiners are the matched uplink forms with
//! unit-normalized rows. Zero forcing refuses matrices whose singular value
//! ratio falls at or below [`ZF_RANK_THRESHOLD`] instead of regularizing.

use num_complex::Complex;

use crate::linalg::CMat;
use crate::rng::{complex_normal, SubstreamRng};
use crate::scenario::PrecoderKind;
use crate::{dbl, fl, Error, Real, Result};

/// Relative singular value ratio at or below which zero forcing errors out.
pub const ZF_RANK_THRESHOLD: f64 = 1e-10;

/// Pilot matrix: first `k` columns of the unitary `tau_p`-point DFT
/// (`tau_p` x `k`, orthonormal columns).
pub fn make_pilots<T: Real>(tau_p: usize, k: usize) -> CMat<T> {
    assert!(k <= tau_p, "need tau_p >= k for orthogonal pilots");
    let scale = T::one() / fl::<T>(tau_p as f64).sqrt();
    CMat::from_fn(tau_p, k, |t, j| {
        let angle = -fl::<T>(2.0) * T::PI() * fl::<T>((t * j) as f64) / fl::<T>(tau_p as f64);
        Complex::from_polar(scale, angle)
    })
}

/// Simulates one pilot observation `Y_p` for a true channel `g`, pilot power
/// `rho_p`, and receiver noise power `n0` per sample.
pub fn pilot_observation<T: Real>(
    g: &CMat<T>,
    pilots: &CMat<T>,
    rho_p: T,
    n0: T,
    rng: &mut SubstreamRng,
) -> CMat<T> {
    let tau_p = pilots.rows();
    let amp = (rho_p * fl::<T>(tau_p as f64)).sqrt();
    let mut y = g.matmul(&pilots.hermitian());
    y.scale(amp);
    let sigma = n0.sqrt();
    let mut noise = CMat::from_fn(y.rows(), y.cols(), |_, _| {
        let z: Complex<T> = complex_normal(rng);
        z.scale(sigma)
    });
    for j in 0..y.cols() {
        let n_col = noise.col_mut(j);
        let y_col = y.col_mut(j);
        for i in 0..y_col.len() {
            y_col[i] = y_col[i] + n_col[i];
        }
    }
    y
}

/// Least-squares channel estimate from a pilot observation.
pub fn ls_estimate<T: Real>(y_p: &CMat<T>, pilots: &CMat<T>, rho_p: T) -> CMat<T> {
    let tau_p = pilots.rows();
    let mut ghat = y_p.matmul(pilots);
    ghat.scale(T::one() / (rho_p * fl::<T>(tau_p as f64)).sqrt());
    ghat
}

/// Downlink precoder (antennas x users) with unit-norm columns.
pub fn make_precoder<T: Real>(ghat: &CMat<T>, kind: PrecoderKind) -> Result<CMat<T>> {
    let mut a = match kind {
        PrecoderKind::Mrt => ghat.clone(),
        PrecoderKind::Zf => {
            let svd = ghat.jacobi_svd()?;
            let ratio = svd.condition_ratio();
            if dbl(ratio) <= ZF_RANK_THRESHOLD {
                return Err(Error::RankDeficient {
                    ratio: dbl(ratio),
                    threshold: ZF_RANK_THRESHOLD,
                });
            }
            svd.right_inverse_columns()
        }
    };
    for j in 0..a.cols() {
        a.normalize_col(j);
    }
    Ok(a)
}

/// Uplink combiner (users x antennas) with unit-norm rows: the conjugate
/// transpose of the matching precoder, i.e. maximum-ratio combining or the
/// zero-forcing pseudoinverse.
pub fn make_combiner<T: Real>(ghat: &CMat<T>, kind: PrecoderKind) -> Result<CMat<T>> {
    Ok(make_precoder(ghat, kind)?.hermitian())
}
