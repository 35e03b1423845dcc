//! Antenna element patterns.
//!
//! Two element types: an isotropic radiator with unit gain, and a rectangular
//! microstrip patch mounted on a wall. The patch power gain in its local frame
//! (boresight along local x, patch length along local z) is
//!
//! ```text
//! G(theta, phi) = (alpha * sin(theta) * sinc(X) * sinc(Z))^2
//! X = (pi h / lambda) * sin(theta) * cos(phi)
//! Z = (pi W / lambda) * cos(theta)
//! ```
//!
//! with zero gain in the back half-space (|phi| > pi/2). `alpha` normalizes
//! the gain to integrate to 4*pi over the sphere, so it plays the role of a
//! directivity-consistent amplitude. For vanishing patch dimensions the
//! normalization integral tends to pi * 4/3, giving the closed-form limit
//! `alpha^2 = 3`.

use serde::{Deserialize, Serialize};

use crate::quad::integrate_2d;
use crate::{fl, Real, Result, SPEED_OF_LIGHT};

/// Relative tolerance for the normalization quadrature.
pub const ALPHA_QUAD_REL_TOL: f64 = 1e-8;

/// Element pattern parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PatternSpec<T> {
    /// Unit gain in every direction.
    Omni,
    /// Rectangular microstrip patch with substrate height `h` and width `w`,
    /// both in meters.
    Patch { h: T, w: T },
}

/// A pattern bound to a wavelength, with its normalization precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern<T> {
    spec: PatternSpec<T>,
    lambda: T,
    alpha: T,
}

impl<T: Real> Pattern<T> {
    /// Binds a pattern spec to a wavelength. For a patch this evaluates the
    /// normalization integral; for an isotropic element it is free.
    pub fn new(spec: PatternSpec<T>, lambda: T) -> Result<Self> {
        assert!(lambda > T::zero(), "wavelength must be positive");
        let alpha = match spec {
            PatternSpec::Omni => T::one(),
            PatternSpec::Patch { h, w } => {
                assert!(h > T::zero() && w > T::zero(), "patch dimensions must be positive");
                patch_alpha(h, w, lambda)?
            }
        };
        Ok(Self { spec, lambda, alpha })
    }

    pub fn spec(&self) -> PatternSpec<T> {
        self.spec
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Normalization amplitude; 1 for an isotropic element.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Field amplitude in the local frame. Its square is the power gain.
    /// `theta` is measured from local z, `phi` from local x in the x-y plane.
    pub fn field_amplitude(&self, theta: T, phi: T) -> T {
        match self.spec {
            PatternSpec::Omni => T::one(),
            PatternSpec::Patch { h, w } => {
                if phi.cos() < T::zero() {
                    return T::zero();
                }
                let (s, c) = (theta.sin(), theta.cos());
                let x = T::PI() * h / self.lambda * s * phi.cos();
                let z = T::PI() * w / self.lambda * c;
                self.alpha * s * sinc(x) * sinc(z)
            }
        }
    }

    /// Power gain in the local frame.
    pub fn gain(&self, theta: T, phi: T) -> T {
        let a = self.field_amplitude(theta, phi);
        a * a
    }
}

/// Normalization amplitude for a patch: `sqrt(4 pi / I)` where `I` is the
/// pattern integral over the front half-space.
pub fn patch_alpha<T: Real>(h: T, w: T, lambda: T) -> Result<T> {
    let kh = T::PI() * h / lambda;
    let kw = T::PI() * w / lambda;
    let half_pi = T::PI() / fl(2.0);
    // Narrow scalar types cannot honor the full f64 tolerance; clamp to what
    // the accumulation error allows.
    let rel_tol = fl::<T>(ALPHA_QUAD_REL_TOL).max(T::epsilon() * fl(100.0));
    let integral = integrate_2d(
        |theta: T, phi: T| {
            let s = theta.sin();
            let x = kh * s * phi.cos();
            let z = kw * theta.cos();
            let f = sinc(x) * sinc(z);
            f * f * s * s * s
        },
        (T::zero(), T::PI()),
        (-half_pi, half_pi),
        rel_tol,
    )?;
    Ok((fl::<T>(4.0) * T::PI() / integral).sqrt())
}

/// Design-rule patch width for a substrate permittivity at a carrier
/// frequency: `(c / 2f) * sqrt(2 / (eps_r + 1))`.
pub fn patch_design_width<T: Real>(carrier_freq_hz: T, eps_r: T) -> T {
    fl::<T>(SPEED_OF_LIGHT) / (fl::<T>(2.0) * carrier_freq_hz)
        * (fl::<T>(2.0) / (eps_r + T::one())).sqrt()
}

/// `sin(x)/x` with a series branch near zero to avoid cancellation.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < fl(1e-4) {
        let x2 = x * x;
        T::one() - x2 / fl(6.0) + x2 * x2 / fl(120.0)
    } else {
        x.sin() / x
    }
}

/// Spherical angles of a unit direction vector in the element's local frame:
/// `theta` from local z, `phi` from local x toward local y.
pub fn local_angles<T: Real>(d: [T; 3]) -> (T, T) {
    let z = d[2].max(-T::one()).min(T::one());
    (z.acos(), d[1].atan2(d[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    // Reference values for the stock 2 GHz patch (h = 0.1588 cm,
    // eps_r = 10.2), computed with an independent adaptive quadrature at
    // much tighter tolerance.
    const LAMBDA_2GHZ: f64 = 0.149896229;
    const H_REF: f64 = 0.1588e-2;
    const W_REF: f64 = 0.03167135892677751;
    const ALPHA_REF: f64 = 1.757536805207113;
    const BORESIGHT_GAIN_REF: f64 = 3.087795259524513;

    fn ref_pattern() -> Pattern<f64> {
        Pattern::new(PatternSpec::Patch { h: H_REF, w: W_REF }, LAMBDA_2GHZ).unwrap()
    }

    #[test]
    fn design_width_matches_closed_form() {
        let w = patch_design_width(2.0e9_f64, 10.2);
        assert!((w - W_REF).abs() < 1e-15, "got {w}");
    }

    #[test]
    fn alpha_squared_tends_to_three_for_vanishing_patch() {
        let alpha = patch_alpha(1e-9_f64, 1e-9, LAMBDA_2GHZ).unwrap();
        assert!(
            (alpha * alpha - 3.0).abs() < 1e-7,
            "alpha^2 = {}",
            alpha * alpha
        );
    }

    #[test]
    fn alpha_matches_independent_reference() {
        let p = ref_pattern();
        assert!(
            (p.alpha() - ALPHA_REF).abs() < 1e-7 * ALPHA_REF,
            "alpha = {}",
            p.alpha()
        );
    }

    #[test]
    fn boresight_gain_matches_reference() {
        let p = ref_pattern();
        let g = p.gain(PI / 2.0, 0.0);
        assert!(
            (g - BORESIGHT_GAIN_REF).abs() < 1e-6 * BORESIGHT_GAIN_REF,
            "gain = {g}"
        );
    }

    #[test]
    fn back_half_space_has_zero_gain() {
        let p = ref_pattern();
        for &phi in &[PI / 2.0 + 1e-6, 2.0, 3.0, -1.8, -PI + 0.01] {
            for &theta in &[0.3, PI / 2.0, 2.5] {
                assert_eq!(p.gain(theta, phi), 0.0, "theta {theta} phi {phi}");
            }
        }
    }

    #[test]
    fn omni_gain_is_one_everywhere() {
        let p = Pattern::new(PatternSpec::<f64>::Omni, 0.2).unwrap();
        assert_eq!(p.alpha(), 1.0);
        for &(t, f) in &[(0.1, -3.0), (1.2, 0.4), (3.0, 2.9)] {
            assert_eq!(p.gain(t, f), 1.0);
        }
    }

    #[test]
    fn sinc_series_branch_is_continuous() {
        // Compare the series branch against the direct formula just outside
        // the switch point and against libm-quality values inside.
        let eps = 1e-4_f64;
        let direct = (eps.sin()) / eps;
        assert!((sinc(eps) - direct).abs() < 1e-16);
        let x = 0.5e-4_f64;
        let exact = libm::sin(x) / x;
        assert!((sinc(x) - exact).abs() < 4e-16);
        assert_eq!(sinc(0.0_f64), 1.0);
    }

    #[test]
    fn local_angles_recover_axes() {
        let (t, p) = local_angles([0.0_f64, 0.0, 1.0]);
        assert!((t - 0.0).abs() < 1e-15 && p == 0.0);
        let (t, p) = local_angles([1.0_f64, 0.0, 0.0]);
        assert!((t - PI / 2.0).abs() < 1e-15 && p.abs() < 1e-15);
        let (t, p) = local_angles([0.0_f64, -1.0, 0.0]);
        assert!((t - PI / 2.0).abs() < 1e-15 && (p + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn f32_alpha_agrees_with_f64() {
        let a64 = patch_alpha(H_REF, W_REF, LAMBDA_2GHZ).unwrap();
        let a32 = patch_alpha(H_REF as f32, W_REF as f32, LAMBDA_2GHZ as f32).unwrap();
        assert!((a32 as f64 - a64).abs() < 2e-3 * a64, "f32 {a32} f64 {a64}");
    }

    proptest! {
        // Gain is even in phi: X depends on phi only through cos(phi).
        #[test]
        fn gain_is_even_in_phi(theta in 0.0..PI, phi in -PI..PI) {
            let p = ref_pattern();
            let a = p.gain(theta, phi);
            let b = p.gain(theta, -phi);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn gain_is_nonnegative_and_bounded(theta in 0.0..PI, phi in -PI..PI) {
            let p = ref_pattern();
            let g = p.gain(theta, phi);
            let cap = p.alpha() * p.alpha();
            prop_assert!(g >= 0.0);
            prop_assert!(g <= cap * (1.0 + 1e-12));
        }
    }
}
