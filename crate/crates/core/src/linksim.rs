//! Link-level Monte Carlo oracle.
//!
//! Simulates coded packets over a per-subcarrier SINR profile to measure
//! ground-truth packet error rates, and produces the AWGN reference curves
//! that the effective-SINR abstraction is calibrated against. The code is a
//! terminated rate-1/2 convolutional code (constraint length 7, generators
//! 133/171 octal) decoded with a soft-input Viterbi decoder; modulation is
//! Gray-mapped BPSK, QPSK, or 16QAM with unit average symbol energy.
//!
//! Each symbol sees the AWGN channel of one profile entry; symbols are dealt
//! onto the N profile entries cyclically, so every codeword is spread across
//! the whole profile. Packets draw payload bits and noise from per-packet
//! substreams, making results independent of evaluation order.

use num_complex::Complex;

use crate::abstraction::{RefCurve, RefPoint};
use crate::rng::{complex_normal, Domain, RngFactory, SubstreamRng};
use crate::{db_to_linear, fl, Error, Real, Result};

/// Constraint length of the convolutional code.
pub const CONSTRAINT_LENGTH: usize = 7;
/// Tail bits appended to drive the encoder back to the zero state.
pub const TAIL_BITS: usize = 6;
/// Default payload size in information bits.
pub const DEFAULT_INFO_BITS: usize = 256;

const N_STATES: usize = 64;
/// Generator taps over the register word `(state << 1) | input`: bit 0 is
/// the current input, bit i is the i-th most recent past input.
const G133: u8 = 0b110_1101;
const G171: u8 = 0b100_1111;

/// Coded bit pair `(c133 << 1) | c171` for every 7-bit register word.
const OUTPUTS: [u8; 128] = {
    let mut t = [0u8; 128];
    let mut reg = 0usize;
    while reg < 128 {
        let c1 = (reg as u8 & G133).count_ones() & 1;
        let c2 = (reg as u8 & G171).count_ones() & 1;
        t[reg] = ((c1 << 1) | c2) as u8;
        reg += 1;
    }
    t
};

/// Encodes an arbitrary-length bit vector with the terminated rate-1/2
/// convolutional code. Output holds `2 * (bits.len() + 6)` coded bits, the
/// two generator outputs interleaved per input bit, and ends in the zero
/// state.
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * (bits.len() + TAIL_BITS));
    let mut state: u8 = 0;
    for &b in bits.iter().chain(std::iter::repeat(&0u8).take(TAIL_BITS)) {
        let reg = (state << 1) | (b & 1);
        let c = OUTPUTS[reg as usize];
        out.push(c >> 1);
        out.push(c & 1);
        state = reg & 0x3F;
    }
    out
}

/// Maximum-likelihood decoding of a terminated codeword from soft bit LLRs.
///
/// LLR convention: positive means bit 0 is more likely. The trellis starts
/// and ends in state 0; metric ties break toward the lower predecessor state
/// index, so the output is deterministic even for degenerate inputs. Returns
/// the information bits with the tail stripped.
pub fn viterbi_decode<T: Real>(llrs: &[T]) -> Result<Vec<u8>> {
    if llrs.len() % 2 != 0 || llrs.len() < 2 * TAIL_BITS {
        return Err(Error::LlrLength(llrs.len()));
    }
    let n_steps = llrs.len() / 2;
    let neg_inf = T::neg_infinity();
    let mut metric = [neg_inf; N_STATES];
    metric[0] = T::zero();
    let mut pred: Vec<[u8; N_STATES]> = Vec::with_capacity(n_steps);
    for step in 0..n_steps {
        let (l1, l2) = (llrs[2 * step], llrs[2 * step + 1]);
        // Branch metrics indexed by the coded pair (c133 << 1) | c171, with
        // bit 0 contributing +llr and bit 1 contributing -llr.
        let bm = [l1 + l2, l1 - l2, -l1 + l2, -l1 - l2];
        let mut next = [neg_inf; N_STATES];
        let mut p = [0u8; N_STATES];
        for ns in 0..N_STATES {
            // Exactly two predecessors per state; >= keeps the lower index
            // on metric ties.
            let u = (ns & 1) as u8;
            let s0 = (ns >> 1) as u8;
            let s1 = s0 | 0x20;
            let cand0 = metric[s0 as usize] + bm[OUTPUTS[((s0 << 1) | u) as usize] as usize];
            let cand1 = metric[s1 as usize] + bm[OUTPUTS[((s1 << 1) | u) as usize] as usize];
            if cand0 >= cand1 {
                next[ns] = cand0;
                p[ns] = s0;
            } else {
                next[ns] = cand1;
                p[ns] = s1;
            }
        }
        metric = next;
        pred.push(p);
    }
    let mut state = 0u8;
    let mut bits = vec![0u8; n_steps];
    for step in (0..n_steps).rev() {
        // The input bit is the LSB of the post-transition state.
        bits[step] = state & 1;
        state = pred[step][state as usize];
    }
    bits.truncate(n_steps - TAIL_BITS);
    Ok(bits)
}

/// Modulation scheme with Gray mapping and unit average symbol energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
}

/// Per-axis 16QAM amplitude levels indexed by the Gray bit pair
/// (sign bit, magnitude bit): 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3,
/// all scaled by 1/sqrt(10) for unit average energy.
fn qam16_level<T: Real>(b_sign: u8, b_mag: u8) -> T {
    let mag = if b_mag == 0 { 3.0 } else { 1.0 };
    let sign = if b_sign == 0 { 1.0 } else { -1.0 };
    fl::<T>(sign * mag / 10f64.sqrt())
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
        }
    }

    /// Maps bits to symbols. BPSK: 0 -> +1. QPSK: one bit per axis,
    /// 0 -> +1/sqrt(2). 16QAM: bit pairs (sign, magnitude) per axis, in
    /// order (I sign, I magnitude, Q sign, Q magnitude).
    pub fn modulate<T: Real>(self, bits: &[u8]) -> Vec<Complex<T>> {
        let bps = self.bits_per_symbol();
        assert!(
            bits.len() % bps == 0,
            "bit count {} is not a multiple of {bps}",
            bits.len()
        );
        let axis = fl::<T>(std::f64::consts::FRAC_1_SQRT_2);
        bits.chunks_exact(bps)
            .map(|c| match self {
                Modulation::Bpsk => {
                    Complex::new(if c[0] == 0 { T::one() } else { -T::one() }, T::zero())
                }
                Modulation::Qpsk => Complex::new(
                    if c[0] == 0 { axis } else { -axis },
                    if c[1] == 0 { axis } else { -axis },
                ),
                Modulation::Qam16 => {
                    Complex::new(qam16_level(c[0], c[1]), qam16_level(c[2], c[3]))
                }
            })
            .collect()
    }

    /// Appends per-bit LLRs (positive favors bit 0) for a received symbol on
    /// an AWGN channel at linear SNR `gamma`. BPSK and QPSK LLRs are exact;
    /// 16QAM uses the max-log approximation per axis.
    pub fn append_llrs<T: Real>(self, y: Complex<T>, gamma: T, out: &mut Vec<T>) {
        let four = fl::<T>(4.0);
        match self {
            Modulation::Bpsk => out.push(four * gamma * y.re),
            Modulation::Qpsk => {
                let scale = four * gamma * fl::<T>(std::f64::consts::FRAC_1_SQRT_2);
                out.push(scale * y.re);
                out.push(scale * y.im);
            }
            Modulation::Qam16 => {
                for z in [y.re, y.im] {
                    // Max-log per axis: squared distances to the closest
                    // level with the bit at 0 and at 1, divided by the noise
                    // variance 1/gamma.
                    let d = |b_sign: u8, b_mag: u8| {
                        let a = qam16_level::<T>(b_sign, b_mag);
                        (z - a) * (z - a)
                    };
                    let sign_llr =
                        (d(1, 0).min(d(1, 1)) - d(0, 0).min(d(0, 1))) * gamma;
                    let mag_llr =
                        (d(0, 1).min(d(1, 1)) - d(0, 0).min(d(1, 0))) * gamma;
                    out.push(sign_llr);
                    out.push(mag_llr);
                }
            }
        }
    }
}

/// Modulation-and-coding scheme understood by the link simulator: one of the
/// three modulations over the rate-1/2 terminated convolutional code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mcs {
    pub modulation: Modulation,
}

impl Mcs {
    pub fn parse(name: &str) -> Result<Self> {
        let modulation = match name {
            "bpsk_r12_conv" => Modulation::Bpsk,
            "qpsk_r12_conv" => Modulation::Qpsk,
            "qam16_r12_conv" => Modulation::Qam16,
            other => return Err(Error::UnknownMcs(other.to_string())),
        };
        Ok(Mcs { modulation })
    }

    pub fn name(self) -> String {
        format!("{}_r12_conv", self.modulation.name())
    }

    /// Modulation-and-rate index shared with the beta table
    /// (0 = BPSK r1/2, 1 = QPSK r1/2, 2 = 16QAM r1/2).
    pub fn mcs_index(self) -> u32 {
        match self.modulation {
            Modulation::Bpsk => 0,
            Modulation::Qpsk => 1,
            Modulation::Qam16 => 2,
        }
    }
}

/// Outcome of a packet-level Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketResult {
    pub n_packets: u64,
    pub n_errors: u64,
}

impl PacketResult {
    pub fn per(&self) -> f64 {
        self.n_errors as f64 / self.n_packets as f64
    }
}

fn random_bits(rng: &mut SubstreamRng, n: usize) -> Vec<u8> {
    use rand::RngCore;
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let mut w = rng.next_u64();
        for _ in 0..64.min(n - bits.len()) {
            bits.push((w & 1) as u8);
            w >>= 1;
        }
    }
    bits
}

fn validate_profile<T: Real>(gammas: &[T]) -> Result<()> {
    if gammas.is_empty() {
        return Err(Error::InvalidArgument("SINR profile must be nonempty".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g > T::zero())) {
        return Err(Error::InvalidArgument(format!(
            "SINR profile entries must be positive and finite, got {g}"
        )));
    }
    Ok(())
}

/// Measures the packet error rate of `mcs` over a linear-scale SINR profile.
///
/// Each packet draws `info_bits` payload bits, encodes, modulates, deals the
/// symbols onto the profile entries cyclically, adds CN(0, 1/gamma_n) noise
/// per symbol, decodes, and counts a packet error on any payload bit
/// mismatch. Packet `p` uses substreams keyed by `p`, so the result does not
/// depend on evaluation order.
pub fn simulate_per<T: Real>(
    gammas: &[T],
    mcs: Mcs,
    info_bits: usize,
    n_packets: u64,
    factory: &RngFactory,
) -> Result<PacketResult> {
    validate_profile(gammas)?;
    if n_packets == 0 {
        return Err(Error::InvalidArgument("packet count must be positive".into()));
    }
    if info_bits == 0 {
        return Err(Error::InvalidArgument("payload must be nonempty".into()));
    }
    let bps = mcs.modulation.bits_per_symbol();
    let coded_len = 2 * (info_bits + TAIL_BITS);
    if coded_len % bps != 0 {
        return Err(Error::InvalidArgument(format!(
            "coded length {coded_len} is not a multiple of {bps} bits per symbol \
             (choose an even payload for 16QAM)"
        )));
    }
    let mut n_errors = 0u64;
    let mut llrs: Vec<T> = Vec::with_capacity(coded_len);
    for p in 0..n_packets {
        let mut bit_rng = factory.stream(Domain::LinkBits, &[p]);
        let mut noise_rng = factory.stream(Domain::LinkNoise, &[p]);
        let payload = random_bits(&mut bit_rng, info_bits);
        let coded = conv_encode(&payload);
        let symbols = mcs.modulation.modulate::<T>(&coded);
        llrs.clear();
        for (j, &x) in symbols.iter().enumerate() {
            let gamma = gammas[j % gammas.len()];
            let noise = complex_normal::<T>(&mut noise_rng) * (T::one() / gamma).sqrt();
            mcs.modulation.append_llrs(x + noise, gamma, &mut llrs);
        }
        let decoded = viterbi_decode(&llrs)?;
        if decoded != payload {
            n_errors += 1;
        }
    }
    Ok(PacketResult { n_packets, n_errors })
}

/// Simulates an AWGN reference curve: one flat-profile PER measurement per
/// grid SNR. Grid points use independent derived streams; zero-error points
/// are recorded at the resolution floor `0.5 / n_packets` and flagged; the
/// curve constructor applies the isotonic cleanup.
pub fn awgn_reference_curve<T: Real>(
    mcs: Mcs,
    snr_grid_db: &[T],
    info_bits: usize,
    n_packets: u64,
    factory: &RngFactory,
) -> Result<RefCurve<T>> {
    if snr_grid_db.is_empty() {
        return Err(Error::InvalidArgument("SNR grid must be nonempty".into()));
    }
    if snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "SNR grid must be strictly increasing".into(),
        ));
    }
    let mut points = Vec::with_capacity(snr_grid_db.len());
    for (i, &snr_db) in snr_grid_db.iter().enumerate() {
        let sub = factory.child(Domain::Profile, i as u64);
        let result = simulate_per(&[db_to_linear(snr_db)], mcs, info_bits, n_packets, &sub)?;
        let floored = result.n_errors == 0;
        let per = if floored {
            fl::<T>(0.5) / fl(n_packets as f64)
        } else {
            fl::<T>(result.n_errors as f64) / fl(n_packets as f64)
        };
        points.push(RefPoint { snr_db, per, floored });
    }
    RefCurve::from_points(points)
}

/// Synthetic SINR profiles for calibration and validation: profile centers
/// sweep `[center_lo_db, center_hi_db]` evenly and each subcarrier deviates
/// uniformly within `half_spread_db` of its center. Returned SINRs are
/// linear. Profile `i` draws from its own substream, so subsets are stable
/// under changes of `n_profiles`.
pub fn synthetic_profiles<T: Real>(
    n_profiles: usize,
    n_subcarriers: usize,
    center_lo_db: f64,
    center_hi_db: f64,
    half_spread_db: f64,
    factory: &RngFactory,
) -> Vec<Vec<T>> {
    use rand::Rng;
    assert!(n_profiles > 0 && n_subcarriers > 0);
    (0..n_profiles)
        .map(|i| {
            let mut rng = factory.stream(Domain::Calset, &[i as u64]);
            let center = if n_profiles == 1 {
                (center_lo_db + center_hi_db) / 2.0
            } else {
                center_lo_db
                    + (center_hi_db - center_lo_db) * i as f64 / (n_profiles - 1) as f64
            };
            (0..n_subcarriers)
                .map(|_| {
                    let dev = rng.gen_range(-half_spread_db..=half_spread_db);
                    db_to_linear(fl::<T>(center + dev))
                })
                .collect()
        })
        .collect()
}

/// Bit error rate of uncoded BPSK over a flat AWGN channel at linear SNR
/// `gamma`, for validating the noise model against the closed-form
/// Q(sqrt(2 gamma)).
pub fn uncoded_bpsk_ber<T: Real>(gamma: T, n_bits: u64, factory: &RngFactory) -> f64 {
    assert!(n_bits > 0);
    let mut bit_rng = factory.stream(Domain::LinkBits, &[0]);
    let mut noise_rng = factory.stream(Domain::LinkNoise, &[0]);
    // Same noise model as the coded path: the real axis of CN(0, 1/gamma)
    // has variance 1/(2 gamma), giving the textbook Q(sqrt(2 gamma)) error.
    let sigma = (T::one() / gamma).sqrt();
    let mut errors = 0u64;
    for _ in 0..n_bits {
        let bit = random_bits(&mut bit_rng, 1)[0];
        let x = if bit == 0 { T::one() } else { -T::one() };
        let y = x + complex_normal::<T>(&mut noise_rng).re * sigma;
        let decided = if y >= T::zero() { 0u8 } else { 1u8 };
        if decided != bit {
            errors += 1;
        }
    }
    errors as f64 / n_bits as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngFactory;

    #[test]
    fn all_zero_input_encodes_to_all_zeros() {
        let coded = conv_encode(&vec![0u8; 40]);
        assert_eq!(coded.len(), 2 * 46);
        assert!(coded.iter().all(|&b| b == 0));
    }

    #[test]
    fn impulse_response_matches_the_generators() {
        // A single 1 exposes the generator taps directly; the shift-register
        // trace gives pairs 11 01 11 11 00 10 11.
        let coded = conv_encode(&[1]);
        assert_eq!(coded, vec![1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1]);
    }

    #[test]
    fn encoder_is_linear() {
        let a = [1u8, 0, 1, 1, 0, 0, 1, 0];
        let b = [0u8, 1, 1, 0, 1, 0, 1, 1];
        let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ca = conv_encode(&a);
        let cb = conv_encode(&b);
        let cxor = conv_encode(&xor);
        for i in 0..ca.len() {
            assert_eq!(ca[i] ^ cb[i], cxor[i]);
        }
    }

    fn hard_llrs(coded: &[u8]) -> Vec<f64> {
        coded.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect()
    }

    #[test]
    fn noiseless_roundtrip_is_identity() {
        let factory = RngFactory::new(77);
        for p in 0..100u64 {
            let mut rng = factory.stream(Domain::Test, &[p]);
            let payload = random_bits(&mut rng, 64);
            let decoded = viterbi_decode(&hard_llrs(&conv_encode(&payload))).unwrap();
            assert_eq!(decoded, payload, "packet {p}");
        }
    }

    #[test]
    fn llr_length_is_validated() {
        assert!(matches!(
            viterbi_decode(&vec![0.0_f64; 13]),
            Err(Error::LlrLength(13))
        ));
        assert!(matches!(
            viterbi_decode(&vec![0.0_f64; 10]),
            Err(Error::LlrLength(10))
        ));
        // The minimum codeword (empty payload, tail only) decodes to nothing.
        assert_eq!(viterbi_decode(&vec![1.0_f64; 12]).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn all_zero_llrs_decode_deterministically_to_zero() {
        let llrs = vec![0.0_f64; 2 * (16 + TAIL_BITS)];
        let a = viterbi_decode(&llrs).unwrap();
        let b = viterbi_decode(&llrs).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x == 0));
    }

    /// Exhaustive maximum-likelihood decoder over all 2^L codewords.
    fn exhaustive_ml(llrs: &[f64], info_len: usize) -> Vec<u8> {
        let mut best_bits = Vec::new();
        let mut best_metric = f64::NEG_INFINITY;
        for word in 0..(1u32 << info_len) {
            let bits: Vec<u8> = (0..info_len).map(|i| ((word >> i) & 1) as u8).collect();
            let coded = conv_encode(&bits);
            let metric: f64 = coded
                .iter()
                .zip(llrs)
                .map(|(&c, &l)| if c == 0 { l } else { -l })
                .sum();
            // Ties cannot occur with the irrational-ish LLRs used in tests.
            if metric > best_metric {
                best_metric = metric;
                best_bits = bits;
            }
        }
        best_bits
    }

    #[test]
    fn viterbi_matches_exhaustive_ml_under_corruption() {
        let factory = RngFactory::new(3);
        let info_len = 10;
        for trial in 0..20u64 {
            let mut rng = factory.stream(Domain::Test, &[trial]);
            let payload = random_bits(&mut rng, info_len);
            let coded = conv_encode(&payload);
            // Distinct magnitudes guard against exact metric ties.
            let mut llrs: Vec<f64> = coded
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    let mag = 8.0 + 0.01 * i as f64;
                    if b == 0 { mag } else { -mag }
                })
                .collect();
            // One sign flip is far inside the free distance of 10.
            let flip = (trial as usize * 5) % llrs.len();
            llrs[flip] = -llrs[flip];
            let decoded = viterbi_decode(&llrs).unwrap();
            assert_eq!(decoded, exhaustive_ml(&llrs, info_len), "trial {trial}");
            assert_eq!(decoded, payload, "trial {trial}");
        }
    }

    #[test]
    fn constellations_have_unit_average_energy() {
        for modulation in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16] {
            let bps = modulation.bits_per_symbol();
            let n_words = 1usize << bps;
            let mut total = 0.0;
            for w in 0..n_words {
                let bits: Vec<u8> = (0..bps).map(|i| ((w >> i) & 1) as u8).collect();
                let sym = modulation.modulate::<f64>(&bits)[0];
                total += sym.norm_sqr();
            }
            let mean = total / n_words as f64;
            assert!((mean - 1.0).abs() < 1e-12, "{modulation:?} energy {mean}");
        }
    }

    #[test]
    fn qam16_gray_mapping_levels() {
        let s = 10f64.sqrt();
        // (sign, magnitude) pairs: 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3.
        assert_eq!(qam16_level::<f64>(0, 0), 3.0 / s);
        assert_eq!(qam16_level::<f64>(0, 1), 1.0 / s);
        assert_eq!(qam16_level::<f64>(1, 1), -1.0 / s);
        assert_eq!(qam16_level::<f64>(1, 0), -3.0 / s);
    }

    #[test]
    fn bpsk_llr_is_exact() {
        let mut out = Vec::new();
        Modulation::Bpsk.append_llrs(Complex::new(0.7_f64, 0.3), 2.0, &mut out);
        assert_eq!(out, vec![4.0 * 2.0 * 0.7]);
    }

    #[test]
    fn qpsk_llrs_are_exact_per_axis() {
        let mut out = Vec::new();
        Modulation::Qpsk.append_llrs(Complex::new(0.5_f64, -0.25), 3.0, &mut out);
        let scale = 4.0 * 3.0 / 2f64.sqrt();
        assert!((out[0] - scale * 0.5).abs() < 1e-15);
        assert!((out[1] - scale * -0.25).abs() < 1e-15);
    }

    #[test]
    fn qam16_max_log_llrs_at_a_constellation_point() {
        // Received exactly on the +3 level: sign LLR (4/sqrt10)^2 * gamma
        // against the nearest opposite-sign level, magnitude LLR
        // (2/sqrt10)^2 * gamma against the nearest inner level.
        let z = 3.0 / 10f64.sqrt();
        let gamma = 1.7;
        let mut out = Vec::new();
        Modulation::Qam16.append_llrs(Complex::new(z, z), gamma, &mut out);
        let d_sign = (z + 1.0 / 10f64.sqrt()).powi(2) * gamma;
        let d_mag = (z - 1.0 / 10f64.sqrt()).powi(2) * gamma;
        for axis in 0..2 {
            assert!((out[2 * axis] - d_sign).abs() < 1e-14, "sign {out:?}");
            assert!((out[2 * axis + 1] - d_mag).abs() < 1e-14, "mag {out:?}");
        }
    }

    #[test]
    fn mcs_parsing_roundtrips() {
        for name in ["bpsk_r12_conv", "qpsk_r12_conv", "qam16_r12_conv"] {
            let mcs = Mcs::parse(name).unwrap();
            assert_eq!(mcs.name(), name);
        }
        assert_eq!(Mcs::parse("bpsk_r12_conv").unwrap().mcs_index(), 0);
        assert_eq!(Mcs::parse("qpsk_r12_conv").unwrap().mcs_index(), 1);
        assert_eq!(Mcs::parse("qam16_r12_conv").unwrap().mcs_index(), 2);
        assert!(matches!(Mcs::parse("qam64_r56_conv"), Err(Error::UnknownMcs(_))));
    }

    #[test]
    fn high_snr_packets_never_fail() {
        let factory = RngFactory::new(11);
        let gamma = db_to_linear(60.0_f64);
        for mcs in ["bpsk_r12_conv", "qpsk_r12_conv", "qam16_r12_conv"] {
            let mcs = Mcs::parse(mcs).unwrap();
            let r = simulate_per(&[gamma], mcs, DEFAULT_INFO_BITS, 1000, &factory).unwrap();
            assert_eq!(r.n_errors, 0, "{}", mcs.name());
        }
    }

    #[test]
    fn degenerate_arguments_are_rejected() {
        let factory = RngFactory::new(1);
        let mcs = Mcs::parse("qpsk_r12_conv").unwrap();
        assert!(simulate_per::<f64>(&[], mcs, 256, 10, &factory).is_err());
        assert!(simulate_per(&[1.0_f64], mcs, 256, 0, &factory).is_err());
        assert!(simulate_per(&[1.0_f64], mcs, 0, 10, &factory).is_err());
        assert!(simulate_per(&[-1.0_f64], mcs, 256, 10, &factory).is_err());
        assert!(simulate_per(&[f64::INFINITY], mcs, 256, 10, &factory).is_err());
        // Odd payloads cannot fill 16QAM symbols.
        let qam = Mcs::parse("qam16_r12_conv").unwrap();
        assert!(simulate_per(&[1.0_f64], qam, 255, 10, &factory).is_err());
        assert!(simulate_per(&[1.0_f64], qam, 256, 10, &factory).is_ok());
    }

    #[test]
    fn same_seed_reproduces_exactly() {
        let mcs = Mcs::parse("qpsk_r12_conv").unwrap();
        let profile = [1.5_f64, 2.5, 0.8];
        let a = simulate_per(&profile, mcs, 128, 200, &RngFactory::new(5)).unwrap();
        let b = simulate_per(&profile, mcs, 128, 200, &RngFactory::new(5)).unwrap();
        let c = simulate_per(&profile, mcs, 128, 200, &RngFactory::new(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uncoded_bpsk_matches_the_closed_form() {
        let factory = RngFactory::new(21);
        for gamma_db in [0.0_f64, 3.0, 6.0] {
            let gamma = db_to_linear(gamma_db);
            let n_bits = 200_000u64;
            let ber = uncoded_bpsk_ber(gamma, n_bits, &factory);
            // Q(sqrt(2 gamma)) = erfc(sqrt(gamma)) / 2.
            let want = 0.5 * libm::erfc(gamma.sqrt());
            let sigma = (want * (1.0 - want) / n_bits as f64).sqrt();
            assert!(
                (ber - want).abs() < 3.0 * sigma,
                "gamma {gamma_db} dB: ber {ber}, want {want}, 3 sigma {}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn reference_curve_handles_floors_and_grids() {
        let factory = RngFactory::new(31);
        let mcs = Mcs::parse("qpsk_r12_conv").unwrap();
        // Single-point grid is allowed.
        let single =
            awgn_reference_curve(mcs, &[2.0_f64], DEFAULT_INFO_BITS, 50, &factory).unwrap();
        assert_eq!(single.points().len(), 1);
        // A grid spanning the waterfall: low end fails always, high end
        // never (floored), and the curve is monotone by construction.
        let grid: Vec<f64> = (0..7).map(|i| -2.0 + 2.0 * i as f64).collect();
        let curve =
            awgn_reference_curve(mcs, &grid, DEFAULT_INFO_BITS, 200, &factory).unwrap();
        let pts = curve.points();
        assert_eq!(pts.len(), 7);
        assert!((pts[0].per - 1.0).abs() < 1e-12, "low end {}", pts[0].per);
        let last = pts.last().unwrap();
        assert!(last.floored, "high end should see zero errors");
        assert_eq!(last.per, 0.5 / 200.0);
        assert!(curve.floored_count() >= 1);
        for w in pts.windows(2) {
            assert!(w[1].per <= w[0].per + 1e-15);
        }
        // Unsorted grids are rejected.
        assert!(awgn_reference_curve(mcs, &[1.0_f64, 0.5], 64, 10, &factory).is_err());
        assert!(awgn_reference_curve(mcs, &[1.0_f64, 1.0], 64, 10, &factory).is_err());
    }

    #[test]
    fn flat_profile_matches_the_reference_curve_statistically() {
        // Same SNR, disjoint streams: agreement within binomial 3 sigma.
        let mcs = Mcs::parse("qpsk_r12_conv").unwrap();
        let snr_db = 2.5_f64;
        let n = 2000u64;
        let curve =
            awgn_reference_curve(mcs, &[snr_db], DEFAULT_INFO_BITS, n, &RngFactory::new(41))
                .unwrap();
        let direct = simulate_per(
            &[db_to_linear(snr_db)],
            mcs,
            DEFAULT_INFO_BITS,
            n,
            &RngFactory::new(42),
        )
        .unwrap();
        let p = curve.points()[0].per;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (direct.per() - p).abs() < 3.0 * sigma + 1e-9,
            "direct {} vs curve {p}",
            direct.per()
        );
    }

    #[test]
    fn raising_the_profile_lowers_per() {
        // Paired comparison in the waterfall: +1 dB must help.
        let mcs = Mcs::parse("qpsk_r12_conv").unwrap();
        let factory = RngFactory::new(51);
        let lo: Vec<f64> = vec![db_to_linear(1.5), db_to_linear(2.5)];
        let hi: Vec<f64> = lo.iter().map(|g| g * db_to_linear(1.0)).collect();
        let a = simulate_per(&lo, mcs, DEFAULT_INFO_BITS, 500, &factory).unwrap();
        let b = simulate_per(&hi, mcs, DEFAULT_INFO_BITS, 500, &factory).unwrap();
        assert!(
            b.n_errors < a.n_errors,
            "hi {} vs lo {}",
            b.n_errors,
            a.n_errors
        );
    }
}
