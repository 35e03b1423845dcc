//! Per-coherence-block SINR traces.
//!
//! For each block the generator drops users (or reuses explicit positions),
//! draws the channel at every active subcarrier, estimates it according to
//! the CSI model, builds the precoder or combiner, and evaluates each user's
//! SINR. Downlink for user `k` with precoder columns `a_i`:
//!
//! ```text
//! sinr_k = rho * eta_k * |g_k^H a_k|^2
//!          / (sum_{i != k} rho * eta_i * |g_k^H a_i|^2 + N0)
//! ```
//!
//! Uplink mirrors it with combiner rows `v_k` and noise scaled by `||v_k||^2`.
//! Noise power is `kB * T * B * 10^(NF / 10)` over the subcarrier bandwidth:
//! the receiver noise figure degrades the thermal floor, downlink receivers
//! are users, uplink receivers are the antenna array.
//!
//! A block whose channel cannot support the requested precoder (rank
//! deficiency under zero forcing) is redrawn with a retry tag in the random
//! stream key; a cap turns persistent failure into an error.

use crate::channel::ChannelModel;
use crate::linalg::{dot_h, norm_sq, CMat};
use crate::linkproc::{ls_estimate, make_combiner, make_pilots, make_precoder, pilot_observation};
use crate::rng::{Domain, RngFactory};
use crate::scenario::{place_users, CsiKind, Direction, Scenario};
use crate::{fl, linear_to_db, Error, Real, Result};

/// Retries per block before trace generation gives up.
pub const MAX_DROP_RETRIES: usize = 100;

/// Receiver noise power in watts over `bandwidth_hz`.
pub fn noise_power<T: Real>(noise_figure_db: T, temperature_k: T, bandwidth_hz: T, boltzmann: T) -> T {
    boltzmann * temperature_k * bandwidth_hz * fl::<T>(10.0).powf(noise_figure_db / fl(10.0))
}

/// Downlink SINR of user `k` given true channel `g` (antennas x users),
/// precoder `a` (antennas x users, unit columns), transmit power `rho`, and
/// power control `eta`.
pub fn downlink_sinr<T: Real>(g: &CMat<T>, a: &CMat<T>, k: usize, rho: T, eta: &[T], n0: T) -> T {
    let gk = g.col(k);
    let mut num = T::zero();
    let mut interference = T::zero();
    for i in 0..a.cols() {
        let coupling = dot_h(gk, a.col(i)).norm_sqr();
        let p = rho * eta[i] * coupling;
        if i == k {
            num = p;
        } else {
            interference += p;
        }
    }
    num / (interference + n0)
}

/// Uplink SINR of user `k` given true channel `g` (antennas x users) and
/// combiner `v` (users x antennas, unit rows).
pub fn uplink_sinr<T: Real>(g: &CMat<T>, v: &CMat<T>, k: usize, rho: T, eta: &[T], n0: T) -> T {
    let m = g.rows();
    let vk: Vec<_> = (0..m).map(|j| v[(k, j)].conj()).collect();
    let mut num = T::zero();
    let mut interference = T::zero();
    for i in 0..g.cols() {
        // v_k g_i = sum_j v[k,j] g[j,i] = dot_h(conj(v_k), g_i).
        let coupling = dot_h(&vk, g.col(i)).norm_sqr();
        let p = rho * eta[i] * coupling;
        if i == k {
            num = p;
        } else {
            interference += p;
        }
    }
    let vk_norm: T = norm_sq(&vk);
    num / (interference + n0 * vk_norm)
}

/// One trace sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub user: usize,
    pub block: usize,
    pub subcarrier: usize,
    pub sinr_db: T,
}

/// A per-(user, block, subcarrier) SINR trace in dB.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SinrTrace<T> {
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Real> SinrTrace<T> {
    /// All SINR samples in dB.
    pub fn values_db(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.sinr_db).collect()
    }

    /// Groups rows into per-(user, block) subcarrier profiles, preserving
    /// subcarrier order. Values stay in dB.
    pub fn profiles(&self) -> Vec<Profile<T>> {
        let mut out: Vec<Profile<T>> = Vec::new();
        for row in &self.rows {
            match out.last_mut() {
                Some(p) if p.user == row.user && p.block == row.block => {
                    p.sinr_db.push(row.sinr_db)
                }
                _ => out.push(Profile {
                    user: row.user,
                    block: row.block,
                    sinr_db: vec![row.sinr_db],
                }),
            }
        }
        out
    }

    /// Sorts rows into the canonical (user, block, subcarrier) order.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.user, a.block, a.subcarrier).cmp(&(b.user, b.block, b.subcarrier))
        });
    }
}

/// Subcarrier SINR profile of one user in one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    pub user: usize,
    pub block: usize,
    pub sinr_db: Vec<T>,
}

/// Generates a SINR trace over the given number of coherence blocks.
pub fn generate_trace<T: Real>(
    scenario: &Scenario<T>,
    blocks: usize,
    factory: &RngFactory,
) -> Result<SinrTrace<T>> {
    generate_trace_impl(scenario, blocks, factory, None)
}

/// Like [`generate_trace`] but also collects every accepted channel matrix
/// as `(block, subcarrier, G)`. Matrices from rejected drop attempts are
/// discarded. Memory grows with blocks * subcarriers * M * K, so this is
/// meant for small inspection runs.
pub fn generate_trace_dumping<T: Real>(
    scenario: &Scenario<T>,
    blocks: usize,
    factory: &RngFactory,
) -> Result<(SinrTrace<T>, Vec<(usize, usize, CMat<T>)>)> {
    let mut dump = Vec::new();
    let trace = generate_trace_impl(scenario, blocks, factory, Some(&mut dump))?;
    Ok((trace, dump))
}

fn generate_trace_impl<T: Real>(
    scenario: &Scenario<T>,
    blocks: usize,
    factory: &RngFactory,
    mut dump: Option<&mut Vec<(usize, usize, CMat<T>)>>,
) -> Result<SinrTrace<T>> {
    let model = ChannelModel::new(scenario)?;
    let subcarriers = model.subcarriers();
    let k = scenario.user_count;
    let radio = &scenario.radio;
    let (rho, link_nf) = match scenario.link.direction {
        Direction::Dl => (radio.base_station_power_w, radio.user_noise_figure_db),
        Direction::Ul => (radio.user_power_w, radio.base_station_noise_figure_db),
    };
    let n0_link = noise_power(
        link_nf,
        radio.temperature_k,
        radio.subcarrier_bw_hz,
        radio.boltzmann_j_per_k,
    );
    let n0_bs = noise_power(
        radio.base_station_noise_figure_db,
        radio.temperature_k,
        radio.subcarrier_bw_hz,
        radio.boltzmann_j_per_k,
    );
    let eta = scenario.eta();
    let pilots = match scenario.link.csi {
        CsiKind::Ls => Some(make_pilots::<T>(radio.tau_p, k)),
        CsiKind::Perfect => None,
    };

    let mut trace = SinrTrace {
        rows: Vec::with_capacity(blocks * k * subcarriers.len()),
    };
    for block in 0..blocks {
        let user_block = if scenario.resample_per_block { block } else { 0 };
        let mut accepted = false;
        'retry: for retry in 0..MAX_DROP_RETRIES {
            let users = match &scenario.users {
                Some(u) => u.clone(),
                None => {
                    let mut rng =
                        factory.stream(Domain::UserPlacement, &[user_block as u64, retry as u64]);
                    place_users(
                        &scenario.room,
                        &scenario.antennas,
                        k,
                        scenario.user_height_m,
                        scenario.d_min_m,
                        &mut rng,
                    )?
                }
            };
            let mut block_rows = Vec::with_capacity(k * subcarriers.len());
            let mut block_dump = dump.as_ref().map(|_| Vec::with_capacity(subcarriers.len()));
            for (slot, &n) in subcarriers.iter().enumerate() {
                let g = model.matrix(&scenario.antennas, &users, slot, block, retry, factory);
                let ghat = match (&pilots, scenario.link.csi) {
                    (Some(phi), CsiKind::Ls) => {
                        let mut rng = factory.stream(
                            Domain::PilotNoise,
                            &[block as u64, retry as u64, n as u64],
                        );
                        let y = pilot_observation(&g, phi, radio.pilot_power_w, n0_bs, &mut rng);
                        ls_estimate(&y, phi, radio.pilot_power_w)
                    }
                    _ => g.clone(),
                };
                let sinr_of = |user: usize, weights: &SinrWeights<T>| match weights {
                    SinrWeights::Precoder(a) => downlink_sinr(&g, a, user, rho, eta, n0_link),
                    SinrWeights::Combiner(v) => uplink_sinr(&g, v, user, rho, eta, n0_link),
                };
                let weights = match scenario.link.direction {
                    Direction::Dl => match make_precoder(&ghat, scenario.link.precoder) {
                        Ok(a) => SinrWeights::Precoder(a),
                        Err(Error::RankDeficient { .. }) => continue 'retry,
                        Err(e) => return Err(e),
                    },
                    Direction::Ul => match make_combiner(&ghat, scenario.link.precoder) {
                        Ok(v) => SinrWeights::Combiner(v),
                        Err(Error::RankDeficient { .. }) => continue 'retry,
                        Err(e) => return Err(e),
                    },
                };
                for user in 0..k {
                    block_rows.push(TraceRow {
                        user,
                        block,
                        subcarrier: n,
                        sinr_db: linear_to_db(sinr_of(user, &weights)),
                    });
                }
                if let Some(buf) = block_dump.as_mut() {
                    buf.push((block, n, g));
                }
            }
            trace.rows.extend(block_rows);
            if let (Some(out), Some(buf)) = (dump.as_deref_mut(), block_dump) {
                out.extend(buf);
            }
            accepted = true;
            break;
        }
        if !accepted {
            return Err(Error::DropRejection {
                block,
                attempts: MAX_DROP_RETRIES,
            });
        }
    }
    trace.sort();
    Ok(trace)
}

enum SinrWeights<T> {
    Precoder(CMat<T>),
    Combiner(CMat<T>),
}

/// Empirical CDF of a sample: sorted values paired with probabilities
/// `(i + 1) / n`.
pub fn empirical_cdf<T: Real>(values: &[T]) -> Vec<(T, T)> {
    let mut sorted: Vec<T> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, fl::<T>((i + 1) as f64) / fl::<T>(n as f64)))
        .collect()
}

/// Sample median (mean of central pair for even sizes).
pub fn median<T: Real>(values: &[T]) -> T {
    assert!(!values.is_empty(), "median of empty sample");
    let mut sorted: Vec<T> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / fl(2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{db_to_linear, BOLTZMANN};
    use num_complex::Complex;

    type C = Complex<f64>;

    #[test]
    fn noise_power_builds_from_physical_constants() {
        let n0 = noise_power(0.0_f64, 300.0, 200e3, BOLTZMANN);
        assert!((n0 - 8.283894e-16).abs() < 1e-27);
        let n9 = noise_power(9.0_f64, 300.0, 200e3, BOLTZMANN);
        assert!((n9 / n0 - 7.943282347242816).abs() < 1e-12);
        // A noise figure always degrades (raises) the floor.
        assert!(n9 > n0);
    }

    #[test]
    fn single_link_downlink_sinr_is_snr() {
        let g = CMat::from_fn(1, 1, |_, _| C::new(3e-4, 4e-4));
        let a = CMat::from_fn(1, 1, |_, _| C::new(0.6, 0.8));
        let rho = 1e-3;
        let n0 = 6.58e-15;
        let got = downlink_sinr(&g, &a, 0, rho, &[1.0], n0);
        let want = rho * g[(0, 0)].norm_sqr() / n0;
        assert!((got / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn downlink_interference_by_hand() {
        // g1 = (1, 0), g2 = (0.5, 1); MRT columns normalized.
        let g = CMat::from_fn(2, 2, |i, j| {
            let vals = [[1.0, 0.5], [0.0, 1.0]];
            C::new(vals[i][j], 0.0)
        });
        let a = crate::linkproc::make_precoder(&g, crate::scenario::PrecoderKind::Mrt).unwrap();
        let rho = 2.0;
        let eta = [0.5, 0.5];
        let n0 = 0.25;
        // User 0: signal rho*eta*|g1^H a1|^2 = 1 * 1 = 1;
        // interference rho*eta*|g1^H a2|^2 = 1 * (0.5/sqrt(1.25))^2 = 0.2.
        let s0 = downlink_sinr(&g, &a, 0, rho, &eta, n0);
        assert!((s0 - 1.0 / (0.2 + 0.25)).abs() < 1e-12, "got {s0}");
        // User 1: signal 1 * 1.25^2/1.25 = 1.25;
        // interference |g2^H a1|^2 = 0.25.
        let s1 = downlink_sinr(&g, &a, 1, rho, &eta, n0);
        assert!((s1 - 1.25 / (0.25 + 0.25)).abs() < 1e-12, "got {s1}");
    }

    #[test]
    fn uplink_noise_scales_with_combiner_row() {
        let g = CMat::from_fn(2, 1, |i, _| C::new(1.0 + i as f64, 0.0));
        // Unnormalized combiner row (1, 1): noise doubles.
        let v = CMat::from_fn(1, 2, |_, _| C::new(1.0, 0.0));
        let rho = 1.0;
        let n0 = 0.5;
        let got = uplink_sinr(&g, &v, 0, rho, &[1.0], n0);
        // |v g|^2 = 9, noise = n0 * ||v||^2 = 1.
        assert!((got - 9.0).abs() < 1e-12, "got {got}");
    }

    fn small_scenario(csi: &str, precoder: &str, extra: &str) -> Scenario<f64> {
        let text = format!(
            r#"
[room]
length_m = 20.0
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
count = 16
pattern = "patch"
patch_h_m = 0.001588
[users]
count = 4
[link]
channel = "los"
csi = "{csi}"
precoder = "{precoder}"
{extra}
"#
        );
        crate::scenario::load_scenario(&text).unwrap()
    }

    #[test]
    fn trace_shape_and_order() {
        let s = small_scenario("perfect", "zf", "");
        let f = RngFactory::new(5);
        let t = generate_trace(&s, 3, &f).unwrap();
        assert_eq!(t.rows.len(), 3 * 4 * 5);
        let mut prev = (0usize, 0usize, 0usize);
        for (i, r) in t.rows.iter().enumerate() {
            assert!(r.sinr_db.is_finite(), "row {i} not finite");
            let key = (r.user, r.block, r.subcarrier);
            if i > 0 {
                assert!(key > prev, "rows must be strictly ordered");
            }
            prev = key;
        }
        let profiles = t.profiles();
        assert_eq!(profiles.len(), 3 * 4);
        assert!(profiles.iter().all(|p| p.sinr_db.len() == 5));
    }

    #[test]
    fn dumping_variant_matches_plain_trace_and_captures_matrices() {
        let s = small_scenario("perfect", "mrt", "");
        let f = RngFactory::new(7);
        let plain = generate_trace(&s, 2, &f).unwrap();
        let (dumped, dump) = generate_trace_dumping(&s, 2, &f).unwrap();
        assert_eq!(plain.rows, dumped.rows);
        // One matrix per (block, subcarrier), ordered, with M x K entries.
        assert_eq!(dump.len(), 2 * 5);
        for (i, (block, n, g)) in dump.iter().enumerate() {
            assert_eq!(*block, i / 5);
            assert_eq!(*n, i % 5);
            assert_eq!((g.rows(), g.cols()), (16, 4));
        }
    }

    #[test]
    fn traces_reproduce_for_a_seed_and_diverge_across_seeds() {
        let s = small_scenario("ls", "zf", "");
        let t1 = generate_trace(&s, 2, &RngFactory::new(99)).unwrap();
        let t2 = generate_trace(&s, 2, &RngFactory::new(99)).unwrap();
        let t3 = generate_trace(&s, 2, &RngFactory::new(100)).unwrap();
        assert_eq!(t1, t2);
        assert_ne!(t1, t3);
    }

    #[test]
    fn perfect_csi_dominates_ls_in_median() {
        let sp = small_scenario("perfect", "zf", "");
        let sl = small_scenario("ls", "zf", "");
        let f = RngFactory::new(12);
        let tp = generate_trace(&sp, 30, &f).unwrap();
        let tl = generate_trace(&sl, 30, &f).unwrap();
        let mp = median(&tp.values_db());
        let ml = median(&tl.values_db());
        assert!(
            mp >= ml,
            "perfect-CSI median {mp:.2} dB must be >= LS median {ml:.2} dB"
        );
    }

    #[test]
    fn fixed_users_make_los_blocks_identical() {
        let mut s = small_scenario("perfect", "mrt", "");
        s.resample_per_block = false;
        let f = RngFactory::new(4);
        let t = generate_trace(&s, 2, &f).unwrap();
        let profiles = t.profiles();
        // For each user, block 0 and block 1 profiles match exactly.
        for user in 0..4 {
            let p0 = profiles.iter().find(|p| p.user == user && p.block == 0).unwrap();
            let p1 = profiles.iter().find(|p| p.user == user && p.block == 1).unwrap();
            assert_eq!(p0.sinr_db, p1.sinr_db);
        }
    }

    #[test]
    fn subcarrier_step_thins_the_grid() {
        let s = small_scenario("perfect", "zf", "subcarrier_step = 2");
        let f = RngFactory::new(5);
        let t = generate_trace(&s, 1, &f).unwrap();
        let mut subcarriers: Vec<usize> = t.rows.iter().map(|r| r.subcarrier).collect();
        subcarriers.sort();
        subcarriers.dedup();
        assert_eq!(subcarriers, vec![0, 2, 4]);
    }

    #[test]
    fn cdf_is_monotone_and_normalized() {
        let vals = [3.0_f64, -1.0, 2.0, 2.0, 10.0];
        let cdf = empirical_cdf(&vals);
        assert_eq!(cdf.len(), 5);
        assert_eq!(cdf[0], (-1.0, 0.2));
        assert_eq!(cdf[4], (10.0, 1.0));
        for w in cdf.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 > w[0].1);
        }
    }

    #[test]
    fn analytic_single_user_downlink_snr() {
        // One omni antenna, one user at exactly 10 m, one subcarrier at the
        // carrier: sinr = rho |g|^2 / N0 in closed form.
        let text = r#"
[room]
length_m = 20.0
width_m = 10.0
height_m = 3.0
[radio]
carrier_freq_hz = 2.0e9
signal_bw_hz = 200.0e3
subcarrier_bw_hz = 200.0e3
base_station_power_w = 1.0e-3
user_power_w = 1.0e-6
pilot_power_w = 2.0e-5
base_station_noise_figure_db = 5.0
user_noise_figure_db = 9.0
temperature_k = 300.0
[antennas]
count = 1
pattern = "omni"
[users]
count = 1
resample_per_block = false
[link]
channel = "los"
csi = "perfect"
precoder = "mrt"
[[antenna]]
position = [0.0, 5.0, 1.5]
boresight = [1.0, 0.0, 0.0]
local_y = [0.0, 1.0, 0.0]
local_z = [0.0, 0.0, 1.0]
[[user]]
position = [10.0, 5.0, 1.5]
"#;
        let s: Scenario<f64> = crate::scenario::load_scenario(text).unwrap();
        let f = RngFactory::new(0);
        let t = generate_trace(&s, 1, &f).unwrap();
        assert_eq!(t.rows.len(), 1);
        let lambda = 0.149896229_f64;
        let g2 = (lambda / (4.0 * std::f64::consts::PI * 10.0)).powi(2);
        let n0 = noise_power(9.0, 300.0, 200e3, BOLTZMANN);
        let want = 1e-3 * g2 / n0;
        let got = db_to_linear(t.rows[0].sinr_db);
        assert!(
            (got / want - 1.0).abs() < 1e-12,
            "got {got:.6e}, want {want:.6e}"
        );
    }
}
