//! Effective-SINR link abstraction.
//!
//! A subcarrier SINR profile `(gamma_1 .. gamma_N)` is compressed to a single
//! effective SINR that, looked up on an AWGN reference curve, predicts the
//! packet error rate of the whole profile. Three mappings:
//!
//! * **Exponential (EESM)**:
//!   `gamma_eff = -beta * ln( mean( exp(-gamma_n / beta) ) )`, evaluated in
//!   the shifted form `gamma_min - beta * ln( mean( exp(-(gamma_n -
//!   gamma_min) / beta) ) )` so no exponential overflows.
//! * **Capacity**: `gamma_eff = beta * (2^( mean( log2(1 + gamma_n / beta) ) ) - 1)`.
//! * **Average**: the arithmetic mean, as a baseline; ignores `beta`.
//!
//! The parameter `beta` is fitted per modulation-and-coding scheme by
//! minimizing the squared distance between simulated and predicted packet
//! error rates in log10 over a calibration set.

use crate::{dbl, fl, linear_to_db, Error, Real, Result};

/// Profile-to-scalar compression method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressionMethod {
    Eesm,
    Capacity,
    Average,
}

impl CompressionMethod {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "eesm" => Ok(Self::Eesm),
            "capacity" => Ok(Self::Capacity),
            "average" => Ok(Self::Average),
            other => Err(Error::ConfigParse(format!(
                "unknown compression method '{other}' (expected eesm, capacity, or average)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Eesm => "eesm",
            Self::Capacity => "capacity",
            Self::Average => "average",
        }
    }
}

/// Compresses a linear-scale SINR profile to a linear-scale effective SINR.
///
/// Summation runs over a sorted copy of the profile, so the result is exactly
/// invariant under permutations of the input. Panics on an empty profile and
/// on nonpositive `beta` for the beta-parameterized methods (Average ignores
/// `beta` entirely); callers validate user-supplied values first.
pub fn compress<T: Real>(gammas: &[T], method: CompressionMethod, beta: T) -> T {
    assert!(!gammas.is_empty(), "cannot compress an empty profile");
    if method != CompressionMethod::Average {
        assert!(beta > T::zero(), "beta must be positive");
    }
    let mut sorted: Vec<T> = gammas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("SINR values must be comparable"));
    let n = fl::<T>(sorted.len() as f64);
    match method {
        CompressionMethod::Eesm => {
            let gamma_min = sorted[0];
            let mean: T = sorted
                .iter()
                .map(|&g| (-(g - gamma_min) / beta).exp())
                .sum::<T>()
                / n;
            gamma_min - beta * mean.ln()
        }
        CompressionMethod::Capacity => {
            // log2(1+x) and 2^m - 1 via ln_1p/exp_m1 keep full relative
            // precision for profiles far below beta.
            let ln2 = fl::<T>(std::f64::consts::LN_2);
            let mean_c: T = sorted
                .iter()
                .map(|&g| (g / beta).ln_1p() / ln2)
                .sum::<T>()
                / n;
            beta * (mean_c * ln2).exp_m1()
        }
        CompressionMethod::Average => sorted.iter().cloned().sum::<T>() / n,
    }
}

/// One point of an AWGN reference curve. `floored` marks points where the
/// simulation observed zero packet errors and the rate was replaced by the
/// resolution floor `0.5 / n_packets`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint<T> {
    pub snr_db: T,
    pub per: T,
    pub floored: bool,
}

/// AWGN packet-error-rate reference curve: strictly increasing SNR grid with
/// nonincreasing PER (enforced by isotonic regression at construction).
#[derive(Debug, Clone, PartialEq)]
pub struct RefCurve<T> {
    points: Vec<RefPoint<T>>,
}

impl<T: Real> RefCurve<T> {
    /// Builds a curve from `(snr_db, per)` samples. Sorts by SNR, rejects
    /// duplicate SNRs and out-of-range PERs, and pools adjacent violators so
    /// PER is nonincreasing in SNR. A single-point curve is allowed and
    /// predicts that point's PER everywhere.
    pub fn new(samples: Vec<(T, T)>) -> Result<Self> {
        Self::from_points(
            samples
                .into_iter()
                .map(|(snr_db, per)| RefPoint {
                    snr_db,
                    per,
                    floored: false,
                })
                .collect(),
        )
    }

    /// Like [`RefCurve::new`] but preserving the zero-error flags.
    pub fn from_points(mut points: Vec<RefPoint<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::CurveTooShort(0));
        }
        points.sort_by(|a, b| a.snr_db.partial_cmp(&b.snr_db).expect("SNR must be comparable"));
        for w in points.windows(2) {
            if w[0].snr_db == w[1].snr_db {
                return Err(Error::InvalidCurve(format!(
                    "duplicate SNR grid point {} dB",
                    w[0].snr_db
                )));
            }
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.per > T::zero() && p.per <= T::one()) || !p.per.is_finite())
        {
            return Err(Error::InvalidCurve(format!(
                "PER {} at {} dB outside (0, 1]",
                p.per, p.snr_db
            )));
        }
        // Pool-adjacent-violators for a nonincreasing fit: merge neighbors
        // whose mean PER increases, replacing members by the block mean.
        let mut blocks: Vec<(T, usize)> = Vec::with_capacity(points.len());
        for p in &points {
            blocks.push((p.per, 1));
            while blocks.len() >= 2 {
                let (last, n_last) = blocks[blocks.len() - 1];
                let (prev, n_prev) = blocks[blocks.len() - 2];
                let mean_last = last / fl(n_last as f64);
                let mean_prev = prev / fl(n_prev as f64);
                if mean_last > mean_prev {
                    blocks.pop();
                    let top = blocks.len() - 1;
                    blocks[top] = (prev + last, n_prev + n_last);
                } else {
                    break;
                }
            }
        }
        let mut idx = 0;
        for &(sum, count) in &blocks {
            let mean = sum / fl(count as f64);
            for _ in 0..count {
                points[idx].per = mean;
                idx += 1;
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[RefPoint<T>] {
        &self.points
    }

    /// Number of points that sit on the zero-error resolution floor.
    pub fn floored_count(&self) -> usize {
        self.points.iter().filter(|p| p.floored).count()
    }

    /// SNR in dB at which the curve crosses a target PER, interpolating in
    /// (snr_db, log10 per); None when the target lies outside the curve's
    /// PER range. Flat (pooled) segments resolve to their lowest SNR.
    pub fn snr_at_per(&self, per: T) -> Option<T> {
        let pts = &self.points;
        if per > pts[0].per || per < pts[pts.len() - 1].per {
            return None;
        }
        let i = pts
            .windows(2)
            .position(|w| w[0].per >= per && per >= w[1].per)?;
        let (p0, p1) = (pts[i], pts[i + 1]);
        if p0.per == p1.per {
            return Some(p0.snr_db);
        }
        let t = (per.log10() - p0.per.log10()) / (p1.per.log10() - p0.per.log10());
        Some(p0.snr_db + t * (p1.snr_db - p0.snr_db))
    }

    /// Predicted PER at an effective SNR, interpolating linearly in
    /// (snr_db, log10 per) and clamping beyond the grid ends.
    pub fn predict_per(&self, snr_db: T) -> T {
        let pts = &self.points;
        if snr_db <= pts[0].snr_db {
            return pts[0].per;
        }
        if snr_db >= pts[pts.len() - 1].snr_db {
            return pts[pts.len() - 1].per;
        }
        let hi = pts.partition_point(|p| p.snr_db < snr_db).max(1);
        let lo = hi - 1;
        let (x0, x1) = (pts[lo].snr_db, pts[hi].snr_db);
        let (y0, y1) = (pts[lo].per.log10(), pts[hi].per.log10());
        let t = (snr_db - x0) / (x1 - x0);
        fl::<T>(10.0).powf(y0 + t * (y1 - y0))
    }
}

/// Predicted PER for a linear-scale SINR profile under a compression method.
pub fn predict_per<T: Real>(
    curve: &RefCurve<T>,
    gammas: &[T],
    method: CompressionMethod,
    beta: T,
) -> T {
    let gamma_eff = compress(gammas, method, beta);
    curve.predict_per(linear_to_db(gamma_eff))
}

/// One calibration sample: a linear-scale SINR profile and the packet error
/// rate a link-level simulation measured on it.
#[derive(Debug, Clone, PartialEq)]
pub struct CalSample<T> {
    pub gammas: Vec<T>,
    pub per_sim: T,
}

/// Windowed least-squares fit of `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult<T> {
    pub beta: T,
    /// Root-mean-square residual in log10 PER over the used samples.
    pub residual_rms: T,
    pub n_used: usize,
    pub n_windowed_out: usize,
}

/// Search specification for the beta fit: a log-spaced grid scanned
/// exhaustively, then refined by golden-section around the best point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaGrid {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    /// Simulated PERs outside this window are dropped before fitting.
    pub per_window: (f64, f64),
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid {
            lo: 0.05,
            hi: 20.0,
            n_points: 200,
            per_window: (1e-3, 0.9),
        }
    }
}

/// Fits `beta` by minimizing the squared log10-PER mismatch between
/// simulated rates and reference-curve predictions over the calibration set.
///
/// Exact objective ties resolve to the smallest `beta` (in particular the
/// Average method, which ignores `beta`, always returns the grid bottom).
/// Samples whose simulated PER falls outside the window are dropped and
/// counted in `n_windowed_out`.
pub fn calibrate_beta<T: Real>(
    samples: &[CalSample<T>],
    curve: &RefCurve<T>,
    method: CompressionMethod,
    grid: BetaGrid,
) -> Result<CalibrationResult<T>> {
    assert!(
        grid.lo > 0.0 && grid.hi > grid.lo && grid.n_points >= 2,
        "beta grid must be positive, ordered, and have at least 2 points"
    );
    let lo = fl::<T>(grid.per_window.0);
    let hi = fl::<T>(grid.per_window.1);
    let used: Vec<&CalSample<T>> = samples
        .iter()
        .filter(|s| s.per_sim >= lo && s.per_sim <= hi)
        .collect();
    if used.is_empty() {
        return Err(Error::EmptyCalibrationWindow {
            n_total: samples.len(),
            lo: grid.per_window.0,
            hi: grid.per_window.1,
        });
    }
    let objective = |beta: T| -> T {
        used.iter()
            .map(|s| {
                let predicted = predict_per(curve, &s.gammas, method, beta);
                let d = s.per_sim.log10() - predicted.log10();
                d * d
            })
            .sum()
    };

    let log_lo = fl::<T>(grid.lo).ln();
    let log_hi = fl::<T>(grid.hi).ln();
    let n = grid.n_points;
    let grid_beta = |i: usize| -> T {
        (log_lo + (log_hi - log_lo) * fl::<T>(i as f64) / fl::<T>((n - 1) as f64)).exp()
    };
    let mut best_i = 0;
    let mut best_obj = T::infinity();
    for i in 0..n {
        let obj = objective(grid_beta(i));
        if !obj.is_finite() {
            return Err(Error::NonFiniteObjective {
                beta: dbl(grid_beta(i)),
            });
        }
        // Strict improvement only: ties keep the smaller beta.
        if obj < best_obj {
            best_obj = obj;
            best_i = i;
        }
    }
    // Golden-section refinement on the log-beta bracket around the best grid
    // point.
    let mut a = if best_i == 0 { log_lo } else { grid_beta(best_i - 1).ln() };
    let mut b = if best_i == n - 1 { log_hi } else { grid_beta(best_i + 1).ln() };
    let inv_phi = fl::<T>(0.618_033_988_749_894_9);
    let mut x1 = b - (b - a) * inv_phi;
    let mut x2 = a + (b - a) * inv_phi;
    let mut f1 = objective(x1.exp());
    let mut f2 = objective(x2.exp());
    for _ in 0..60 {
        if (b - a).abs() < fl(1e-9) {
            break;
        }
        // On ties shrink toward the left (smaller beta).
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - (b - a) * inv_phi;
            f1 = objective(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + (b - a) * inv_phi;
            f2 = objective(x2.exp());
        }
    }
    let refined = ((a + b) / fl(2.0)).exp();
    let refined_obj = objective(refined);
    let (beta, obj) = if refined_obj < best_obj
        || (refined_obj == best_obj && refined < grid_beta(best_i))
    {
        (refined, refined_obj)
    } else {
        (grid_beta(best_i), best_obj)
    };
    Ok(CalibrationResult {
        beta,
        residual_rms: (obj / fl(used.len() as f64)).sqrt(),
        n_used: used.len(),
        n_windowed_out: samples.len() - used.len(),
    })
}

/// One row of the modulation-and-coding beta table. `mcs_index` identifies
/// the modulation-and-rate combination (0 = BPSK r1/2, 1 = QPSK r1/2,
/// 2 = 16QAM r1/2) and is shared across code families.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaEntry {
    pub mcs_index: u32,
    pub modulation: String,
    pub code_rate: f64,
    pub code_family: String,
    pub beta: f64,
}

impl BetaEntry {
    /// Canonical MCS name, e.g. `qpsk_r12_conv`.
    pub fn name(&self) -> String {
        let rate = if (self.code_rate - 0.5).abs() < 1e-12 {
            "r12".to_string()
        } else {
            format!("r{}", self.code_rate)
        };
        format!("{}_{}_{}", self.modulation, rate, self.code_family)
    }
}

/// Beta lookup table, either packaged or loaded from CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BetaTable {
    pub entries: Vec<BetaEntry>,
}

impl BetaTable {
    /// The packaged table: exponential-mapping betas for the bundled
    /// convolutional link simulator (calibrated against it) plus
    /// literature reference values for LDPC and polar coded systems.
    pub fn builtin() -> Self {
        let rows = [
            (0, "bpsk", 0.5, "conv", BETA_BPSK_R12_CONV),
            (1, "qpsk", 0.5, "conv", BETA_QPSK_R12_CONV),
            (2, "qam16", 0.5, "conv", BETA_QAM16_R12_CONV),
            (0, "bpsk", 0.5, "ldpc_ref", 0.78),
            (1, "qpsk", 0.5, "ldpc_ref", 1.55),
            (2, "qam16", 0.5, "ldpc_ref", 4.16),
            (1, "qpsk", 0.5, "polar_ref", 0.624),
        ];
        BetaTable {
            entries: rows
                .into_iter()
                .map(|(i, m, r, f, b)| BetaEntry {
                    mcs_index: i,
                    modulation: m.to_string(),
                    code_rate: r,
                    code_family: f.to_string(),
                    beta: b,
                })
                .collect(),
        }
    }

    /// Exponential-mapping beta for an MCS name such as `qpsk_r12_conv`.
    pub fn lookup(&self, mcs: &str) -> Result<f64> {
        self.entries
            .iter()
            .find(|e| e.name() == mcs)
            .map(|e| e.beta)
            .ok_or_else(|| Error::BetaNotFound {
                mcs: mcs.to_string(),
                method: CompressionMethod::Eesm.name().to_string(),
            })
    }

    /// Exponential-mapping beta by (modulation-and-rate index, code family).
    pub fn lookup_by_index(&self, mcs_index: u32, code_family: &str) -> Result<f64> {
        self.entries
            .iter()
            .find(|e| e.mcs_index == mcs_index && e.code_family == code_family)
            .map(|e| e.beta)
            .ok_or_else(|| Error::BetaNotFound {
                mcs: format!("index {mcs_index} family {code_family}"),
                method: CompressionMethod::Eesm.name().to_string(),
            })
    }
}

/// Betas for the packaged convolutional (K=7, rate 1/2) link simulator,
/// frozen from the in-repo calibration harness
/// (`cargo test -p weavesim-core --test calibration_freeze -- --ignored`).
pub const BETA_BPSK_R12_CONV: f64 = 1.226312;
pub const BETA_QPSK_R12_CONV: f64 = 1.837804;
pub const BETA_QAM16_R12_CONV: f64 = 3.629671;
