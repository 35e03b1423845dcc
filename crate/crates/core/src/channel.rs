//! Channel coefficients between antenna elements and users.
//!
//! Two large-scale models:
//!
//! * **Line of sight**: deterministic free-space response through the element
//!   pattern, `g = amp(theta, phi) * lambda / (4 pi r) * exp(-j 2 pi r / lambda)`,
//!   where `amp` is the pattern field amplitude in the element's local frame.
//!   The squared magnitude therefore equals the pattern power gain times the
//!   free-space loss `(lambda / 4 pi r)^2`.
//! * **Rayleigh**: i.i.d. complex normal fading with distance-driven variance
//!   `beta_dB(r) = -30.5 - 36.7 log10(r / 1 m)`.
//!
//! Fading draws are keyed by (block, subcarrier group, antenna, user, retry),
//! so a draw never depends on evaluation order and adjacent subcarriers can
//! share one draw through the coherence group size.

use num_complex::Complex;

use crate::antenna::{local_angles, Pattern, PatternSpec};
use crate::linalg::CMat;
use crate::rng::{complex_normal, Domain, RngFactory};
use crate::scenario::{distance, AntennaElement, ChannelKind, Scenario, Vec3};
use crate::{fl, Real, Result};

/// Line-of-sight channel coefficient from one antenna element to a user.
pub fn los_gain<T: Real>(
    antenna: &AntennaElement<T>,
    pattern: &Pattern<T>,
    user: Vec3<T>,
) -> Complex<T> {
    let lambda = pattern.lambda();
    let d = [
        user[0] - antenna.position[0],
        user[1] - antenna.position[1],
        user[2] - antenna.position[2],
    ];
    let r = distance(antenna.position, user);
    assert!(r > T::zero(), "user coincides with an antenna element");
    let inv_r = T::one() / r;
    let d_local = antenna.to_local([d[0] * inv_r, d[1] * inv_r, d[2] * inv_r]);
    let (theta, phi) = local_angles(d_local);
    let amp = pattern.field_amplitude(theta, phi) * lambda / (fl::<T>(4.0) * T::PI() * r);
    let phase = -fl::<T>(2.0) * T::PI() * r / lambda;
    Complex::from_polar(amp, phase)
}

/// Distance-driven Rayleigh variance (linear scale, unit reference distance).
pub fn rayleigh_beta<T: Real>(r: T) -> T {
    let beta_db = fl::<T>(-30.5) - fl::<T>(36.7) * r.log10();
    fl::<T>(10.0).powf(beta_db / fl(10.0))
}

/// One Rayleigh fading coefficient with variance `beta`.
pub fn rayleigh_gain<T: Real>(beta: T, rng: &mut crate::rng::SubstreamRng) -> Complex<T> {
    let z: Complex<T> = complex_normal(rng);
    z.scale(beta.sqrt())
}

/// Per-trace channel generator: binds a scenario to the patterns of every
/// active subcarrier so normalization integrals run once.
pub struct ChannelModel<T> {
    kind: ChannelKind,
    group_size: usize,
    /// (subcarrier index, pattern at that subcarrier's wavelength)
    patterns: Vec<(usize, Pattern<T>)>,
}

impl<T: Real> ChannelModel<T> {
    pub fn new(scenario: &Scenario<T>) -> Result<Self> {
        let active = scenario.active_subcarriers();
        let mut patterns = Vec::with_capacity(active.len());
        match scenario.link.channel {
            ChannelKind::Los => {
                for &n in &active {
                    let pattern = Pattern::new(scenario.pattern, scenario.los_lambda(n))?;
                    patterns.push((n, pattern));
                }
            }
            ChannelKind::Rayleigh => {
                // Fading needs no pattern; keep the subcarrier list with a
                // carrier-wavelength placeholder.
                let p = Pattern::new(PatternSpec::Omni, scenario.radio.lambda())?;
                for &n in &active {
                    patterns.push((n, p.clone()));
                }
            }
        }
        Ok(Self {
            kind: scenario.link.channel,
            group_size: scenario.link.coherence_group_size,
            patterns,
        })
    }

    /// Subcarrier indices this model evaluates.
    pub fn subcarriers(&self) -> Vec<usize> {
        self.patterns.iter().map(|&(n, _)| n).collect()
    }

    /// Channel matrix (antennas x users) for one active subcarrier.
    ///
    /// `slot` indexes into [`Self::subcarriers`]; `block` and `retry` key the
    /// fading draws together with the subcarrier's coherence group.
    pub fn matrix(
        &self,
        antennas: &[AntennaElement<T>],
        users: &[Vec3<T>],
        slot: usize,
        block: usize,
        retry: usize,
        factory: &RngFactory,
    ) -> CMat<T> {
        let (n, pattern) = &self.patterns[slot];
        let m = antennas.len();
        let k = users.len();
        match self.kind {
            ChannelKind::Los => CMat::from_fn(m, k, |i, j| los_gain(&antennas[i], pattern, users[j])),
            ChannelKind::Rayleigh => {
                let group = (n / self.group_size) as u64;
                CMat::from_fn(m, k, |i, j| {
                    let beta = rayleigh_beta(distance(antennas[i].position, users[j]));
                    let mut rng = factory.stream(
                        Domain::Rayleigh,
                        &[block as u64, retry as u64, group, i as u64, j as u64],
                    );
                    rayleigh_gain(beta, &mut rng)
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Room;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 0.149896229;

    fn wall_antenna() -> AntennaElement<f64> {
        AntennaElement {
            position: [0.0, 0.0, 0.0],
            boresight: [1.0, 0.0, 0.0],
            local_y: [0.0, 1.0, 0.0],
            local_z: [0.0, 0.0, 1.0],
        }
    }

    #[test]
    fn omni_magnitude_matches_free_space() {
        let a = wall_antenna();
        let p = Pattern::new(PatternSpec::Omni, LAMBDA).unwrap();
        let g = los_gain(&a, &p, [10.0, 0.0, 0.0]);
        // lambda / (4 pi r) at r = 10 m, 2 GHz.
        assert!((g.norm() - 1.1928362898092355e-3).abs() < 1e-18);
    }

    #[test]
    fn phase_wraps_at_integer_wavelengths() {
        let a = wall_antenna();
        let p = Pattern::new(PatternSpec::Omni, LAMBDA).unwrap();
        let g = los_gain(&a, &p, [7.0 * LAMBDA, 0.0, 0.0]);
        // exp(-j 2 pi * 7): real positive, imaginary ~ 0.
        assert!(g.re > 0.0);
        assert!((g.im / g.norm()).abs() < 1e-12);
    }

    #[test]
    fn magnitude_squared_equals_gain_times_path_loss() {
        // The identity |g|^2 = G(theta, phi) (lambda / 4 pi r)^2 must hold
        // through the local-frame transform, including the back half-space.
        let room = Room { length_m: 20.0, width_m: 15.0, height_m: 6.0 };
        let antennas = crate::scenario::place_antennas(&room, 7, 3.0);
        let p = Pattern::new(
            PatternSpec::Patch { h: 0.001588, w: 0.0316713589267775 },
            LAMBDA,
        )
        .unwrap();
        let users = [
            [1.0, 1.0, 1.5],
            [19.5, 14.0, 1.5],
            [10.0, 7.5, 5.9],
            [0.2, 14.8, 0.1],
        ];
        for a in &antennas {
            for &u in &users {
                let g = los_gain(a, &p, u);
                let r = distance(a.position, u);
                let d = [
                    (u[0] - a.position[0]) / r,
                    (u[1] - a.position[1]) / r,
                    (u[2] - a.position[2]) / r,
                ];
                let (theta, phi) = local_angles(a.to_local(d));
                let want = p.gain(theta, phi) * (LAMBDA / (4.0 * PI * r)).powi(2);
                assert!(
                    (g.norm_sqr() - want).abs() <= 1e-15 * want.max(1e-30),
                    "got {}, want {want}",
                    g.norm_sqr()
                );
            }
        }
    }

    #[test]
    fn behind_the_wall_is_dark() {
        let a = wall_antenna();
        let p = Pattern::new(
            PatternSpec::Patch { h: 0.001588, w: 0.0316713589267775 },
            LAMBDA,
        )
        .unwrap();
        let g = los_gain(&a, &p, [-3.0, 0.5, 0.5]);
        assert_eq!(g.norm_sqr(), 0.0);
    }

    #[test]
    fn rayleigh_variance_follows_distance_law() {
        assert!((rayleigh_beta(1.0_f64) - 8.912509381337459e-4).abs() < 1e-18);
        let ratio = rayleigh_beta(10.0_f64) / rayleigh_beta(1.0_f64);
        assert!((ratio.log10() + 3.67).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_draws_have_the_requested_variance() {
        let factory = RngFactory::new(11);
        let beta = 2.5e-4_f64;
        let n = 100_000;
        let mut acc = 0.0;
        let mut mean = Complex::new(0.0, 0.0);
        let mut rng = factory.stream(Domain::Test, &[0]);
        for _ in 0..n {
            let g = rayleigh_gain(beta, &mut rng);
            acc += g.norm_sqr();
            mean += g;
        }
        acc /= n as f64;
        assert!((acc / beta - 1.0).abs() < 0.02, "variance ratio {}", acc / beta);
        let mean_mag = (mean / n as f64).norm();
        assert!(mean_mag < 3.0 * (beta / n as f64).sqrt(), "mean {mean_mag}");
    }

    #[test]
    fn fading_is_keyed_not_ordered() {
        let scenario_text = r#"
[room]
length_m = 10.0
width_m = 10.0
height_m = 3.0
[radio]
carrier_freq_hz = 2.0e9
signal_bw_hz = 1.0e6
subcarrier_bw_hz = 200.0e3
base_station_power_w = 1.0e-3
user_power_w = 1.0e-6
pilot_power_w = 2.0e-5
base_station_noise_figure_db = 5.0
user_noise_figure_db = 9.0
temperature_k = 300.0
[antennas]
count = 4
pattern = "omni"
[users]
count = 2
resample_per_block = false
[link]
channel = "rayleigh"
csi = "perfect"
precoder = "mrt"
coherence_group_size = 2
[[user]]
position = [2.0, 2.0, 1.5]
[[user]]
position = [8.0, 7.0, 1.5]
"#;
        let s: Scenario<f64> = crate::scenario::load_scenario(scenario_text).unwrap();
        let model = ChannelModel::new(&s).unwrap();
        let factory = RngFactory::new(77);
        let users = s.users.clone().unwrap();
        // 5 subcarriers, groups of 2: subcarriers 0,1 share draws; 2,3 share.
        let g0 = model.matrix(&s.antennas, &users, 0, 3, 0, &factory);
        let g1 = model.matrix(&s.antennas, &users, 1, 3, 0, &factory);
        let g2 = model.matrix(&s.antennas, &users, 2, 3, 0, &factory);
        assert_eq!(g0, g1, "same coherence group must share fading");
        assert_ne!(g0, g2, "different groups must draw independently");
        // Re-evaluating in any order reproduces the same matrices.
        let g2b = model.matrix(&s.antennas, &users, 2, 3, 0, &factory);
        let g0b = model.matrix(&s.antennas, &users, 0, 3, 0, &factory);
        assert_eq!(g2, g2b);
        assert_eq!(g0, g0b);
        // Different block or retry changes the draw.
        assert_ne!(model.matrix(&s.antennas, &users, 0, 4, 0, &factory), g0);
        assert_ne!(model.matrix(&s.antennas, &users, 0, 3, 1, &factory), g0);
    }

    #[test]
    fn flat_los_reuses_the_carrier_wavelength() {
        let text = r#"
[room]
length_m = 10.0
width_m = 10.0
height_m = 3.0
[radio]
carrier_freq_hz = 2.0e9
signal_bw_hz = 1.0e6
subcarrier_bw_hz = 200.0e3
base_station_power_w = 1.0e-3
user_power_w = 1.0e-6
pilot_power_w = 2.0e-5
base_station_noise_figure_db = 5.0
user_noise_figure_db = 9.0
temperature_k = 300.0
[antennas]
count = 4
pattern = "omni"
[users]
count = 1
resample_per_block = false
[link]
channel = "los"
csi = "perfect"
precoder = "mrt"
los_frequency_flat = true
[[user]]
position = [2.0, 2.0, 1.5]
"#;
        let s: Scenario<f64> = crate::scenario::load_scenario(text).unwrap();
        let model = ChannelModel::new(&s).unwrap();
        let factory = RngFactory::new(1);
        let users = s.users.clone().unwrap();
        let g0 = model.matrix(&s.antennas, &users, 0, 0, 0, &factory);
        let g4 = model.matrix(&s.antennas, &users, 4, 0, 0, &factory);
        assert_eq!(g0, g4);

        let text2 = text.replace("los_frequency_flat = true", "los_frequency_flat = false");
        let s2: Scenario<f64> = crate::scenario::load_scenario(&text2).unwrap();
        let model2 = ChannelModel::new(&s2).unwrap();
        let h0 = model2.matrix(&s2.antennas, &users, 0, 0, 0, &factory);
        let h4 = model2.matrix(&s2.antennas, &users, 4, 0, 0, &factory);
        assert_ne!(h0, h4, "per-subcarrier wavelengths must differ");
    }
}
