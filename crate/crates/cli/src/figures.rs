//! Plot-ready CSV bundles for the canned deployment studies.
//!
//! Each bundle lands in its own directory under the output root together
//! with the materialized scenario files (for the CDF studies) or the
//! reference curves (for the PER studies), so the bundle alone carries
//! everything a plotting script needs.
//!
//! Presets (desk/full) are documented in the README preset table. Full
//! scale matches the deployment sizes of the corresponding studies and is
//! flagged as long-running; desk scale shrinks array size, user count, and
//! packet counts to keep a bundle in the seconds-to-minutes range.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use weavesim_core::abstraction::{compress, CompressionMethod, RefCurve};
use weavesim_core::io;
use weavesim_core::linksim::{
    awgn_reference_curve, simulate_per, synthetic_profiles, Mcs, DEFAULT_INFO_BITS,
};
use weavesim_core::rng::{Domain, RngFactory};
use weavesim_core::scenario::{
    serialize_scenario, AntennaSection, ChannelKind, CsiKind, Direction, LinkSection, PatternName,
    PrecoderKind, RadioSection, RoomSection, Scenario, ScenarioFile, UserSection,
};
use weavesim_core::sinr::{empirical_cdf, generate_trace};
use weavesim_core::{db_to_linear, linear_to_db, Error, Result};

use crate::manifest::{write_atomic, ManifestPlan};
use crate::{FigureName, Scale};

pub fn run(
    out_root: &std::path::Path,
    seed: u64,
    name: FigureName,
    scale: Scale,
) -> Result<ManifestPlan> {
    let dir = out_root.join(name.dir_name());
    fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let outputs = match name {
        FigureName::Fig2 => cdf_figure(&dir, seed, scale, CDF_FIG2),
        FigureName::Fig3 => cdf_figure(&dir, seed, scale, CDF_FIG3),
        FigureName::Fig4 => cdf_figure(&dir, seed, scale, CDF_FIG4),
        FigureName::Fig5 => per_scatter_figure(&dir, seed, scale),
        FigureName::Fig6 => extreme_profile_figure(&dir, seed, scale),
    }?;
    Ok(ManifestPlan {
        manifest_path: dir.join("manifest.json"),
        config_sha256: None,
        inputs: Vec::new(),
        outputs,
    })
}

// ---------------------------------------------------------------------------
// SINR CDF bundles
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct CdfDims {
    m: usize,
    k: usize,
    blocks: usize,
    subcarrier_step: usize,
}

#[derive(Clone, Copy)]
struct CdfPreset {
    room: [f64; 3],
    direction: Direction,
    desk: CdfDims,
    full: CdfDims,
}

/// Downlink CDF for the 40 m x 40 m x 10 m room. Full scale keeps the
/// deployment size (M = 512, K = 100); drops and subcarrier thinning are
/// chosen so a bundle finishes in hours, not days, on one core.
const CDF_FIG2: CdfPreset = CdfPreset {
    room: [40.0, 40.0, 10.0],
    direction: Direction::Dl,
    desk: CdfDims { m: 128, k: 20, blocks: 50, subcarrier_step: 20 },
    full: CdfDims { m: 512, k: 100, blocks: 50, subcarrier_step: 5 },
};

/// Downlink CDF for the 140 m x 70 m x 15 m production hall (M = 1024,
/// K = 200 at full scale).
const CDF_FIG3: CdfPreset = CdfPreset {
    room: [140.0, 70.0, 15.0],
    direction: Direction::Dl,
    desk: CdfDims { m: 192, k: 30, blocks: 40, subcarrier_step: 20 },
    full: CdfDims { m: 1024, k: 200, blocks: 10, subcarrier_step: 20 },
};

/// Uplink CDF for the 40 m x 40 m x 10 m room. The mrt token means maximum
/// ratio combining on this direction.
const CDF_FIG4: CdfPreset = CdfPreset {
    room: [40.0, 40.0, 10.0],
    direction: Direction::Ul,
    desk: CdfDims { m: 128, k: 20, blocks: 50, subcarrier_step: 20 },
    full: CdfDims { m: 512, k: 100, blocks: 50, subcarrier_step: 5 },
};

fn indoor_radio() -> RadioSection {
    RadioSection {
        carrier_freq_hz: 2.0e9,
        signal_bw_hz: 20.0e6,
        subcarrier_bw_hz: 200.0e3,
        base_station_power_w: 1.0e-3,
        user_power_w: 1.0e-6,
        pilot_power_w: 2.0e-5,
        base_station_noise_figure_db: 5.0,
        user_noise_figure_db: 9.0,
        temperature_k: 300.0,
        boltzmann_j_per_k: None,
        tau_p: None,
        tau_c: None,
    }
}

fn cdf_scenario_file(
    preset: CdfPreset,
    dims: CdfDims,
    pattern: PatternName,
    csi: CsiKind,
    precoder: PrecoderKind,
) -> ScenarioFile {
    ScenarioFile {
        room: RoomSection {
            length_m: preset.room[0],
            width_m: preset.room[1],
            height_m: preset.room[2],
        },
        radio: indoor_radio(),
        antennas: AntennaSection {
            count: dims.m,
            pattern,
            mount_height_m: None,
            patch_h_m: match pattern {
                PatternName::Patch => Some(0.001588),
                PatternName::Omni => None,
            },
            patch_w_m: None,
            epsilon_r: match pattern {
                PatternName::Patch => Some(10.2),
                PatternName::Omni => None,
            },
        },
        users: UserSection {
            count: dims.k,
            height_m: None,
            d_min_m: None,
            resample_per_block: None,
        },
        link: LinkSection {
            channel: ChannelKind::Los,
            csi,
            precoder,
            direction: Some(preset.direction),
            los_frequency_flat: None,
            coherence_group_size: None,
            subcarrier_step: Some(dims.subcarrier_step),
        },
        power_control: None,
        antenna_list: Vec::new(),
        user_list: Vec::new(),
    }
}

fn cdf_figure(
    dir: &std::path::Path,
    seed: u64,
    scale: Scale,
    preset: CdfPreset,
) -> Result<Vec<PathBuf>> {
    let dims = match scale {
        Scale::Desk => preset.desk,
        Scale::Full => preset.full,
    };
    let mut outputs = Vec::new();
    for pattern in [PatternName::Omni, PatternName::Patch] {
        for csi in [CsiKind::Perfect, CsiKind::Ls] {
            for precoder in [PrecoderKind::Mrt, PrecoderKind::Zf] {
                let file = cdf_scenario_file(preset, dims, pattern, csi, precoder);
                let scenario: Scenario<f64> = Scenario::from_file(&file)?;
                let tag = format!(
                    "{}_{}_{}",
                    pattern_tag(pattern),
                    csi_tag(csi),
                    precoder_tag(precoder)
                );
                // The same seed across legend combinations pairs the user
                // drops, so curves differ only by the legend variables.
                let trace = generate_trace(&scenario, dims.blocks, &RngFactory::new(seed))?;
                let cdf = empirical_cdf(&trace.values_db());

                let scenario_path = dir.join(format!("scenario_{tag}.toml"));
                let text = serialize_scenario(&scenario);
                write_atomic(&scenario_path, |tmp| {
                    fs::write(tmp, &text).map_err(|e| Error::Io {
                        path: tmp.display().to_string(),
                        source: e,
                    })
                })?;
                outputs.push(scenario_path);

                let cdf_path = dir.join(format!("cdf_{tag}.csv"));
                write_atomic(&cdf_path, |tmp| io::write_cdf(tmp, &cdf))?;
                outputs.push(cdf_path);
            }
        }
    }
    Ok(outputs)
}

fn pattern_tag(p: PatternName) -> &'static str {
    match p {
        PatternName::Omni => "omni",
        PatternName::Patch => "patch",
    }
}

fn csi_tag(c: CsiKind) -> &'static str {
    match c {
        CsiKind::Perfect => "perfect",
        CsiKind::Ls => "ls",
    }
}

fn precoder_tag(p: PrecoderKind) -> &'static str {
    match p {
        PrecoderKind::Mrt => "mrt",
        PrecoderKind::Zf => "zf",
    }
}

// ---------------------------------------------------------------------------
// PER validation bundles
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct PerDims {
    packets: u64,
    profiles: usize,
    grid_step: f64,
}

const PER_DESK: PerDims = PerDims { packets: 2000, profiles: 30, grid_step: 0.5 };
const PER_FULL: PerDims = PerDims { packets: 20_000, profiles: 100, grid_step: 0.25 };

/// SNR spans that bracket each scheme's PER waterfall, with margin.
fn grid_span(mcs: Mcs) -> (f64, f64) {
    match mcs.mcs_index() {
        0 => (-4.0, 3.0),
        1 => (-2.0, 6.0),
        _ => (3.0, 10.0),
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Profile centers spanning the informative part of the curve.
fn center_span(curve: &RefCurve<f64>, lo_default: f64, hi_default: f64) -> (f64, f64) {
    let lo = curve.snr_at_per(0.9).unwrap_or(lo_default);
    let hi = curve.snr_at_per(0.005).unwrap_or(hi_default);
    (lo, hi)
}

/// Effective SINR against simulated and reference-predicted PER, one file
/// per modulation-and-coding scheme, plus the reference curves used.
fn per_scatter_figure(
    dir: &std::path::Path,
    seed: u64,
    scale: Scale,
) -> Result<Vec<PathBuf>> {
    let dims = match scale {
        Scale::Desk => PER_DESK,
        Scale::Full => PER_FULL,
    };
    let base = RngFactory::new(seed);
    let table = crate::active_beta_table()?;
    let mut outputs = Vec::new();
    for name in ["bpsk_r12_conv", "qpsk_r12_conv", "qam16_r12_conv"] {
        let mcs = Mcs::parse(name)?;
        let beta = table.lookup(&mcs.name())?;
        let idx = u64::from(mcs.mcs_index());
        let (grid_lo, grid_hi) = grid_span(mcs);
        let snr_grid = grid(grid_lo, grid_hi, dims.grid_step);

        let curve_factory = base.child(Domain::Profile, idx);
        let curve =
            awgn_reference_curve(mcs, &snr_grid, DEFAULT_INFO_BITS, dims.packets, &curve_factory)?;
        let curve_path = dir.join(format!("ref_{name}.csv"));
        write_atomic(&curve_path, |tmp| io::write_ref_curve(tmp, &curve))?;
        outputs.push(curve_path);

        let (center_lo, center_hi) = center_span(&curve, grid_lo, grid_hi);
        let cal_factory = base.child(Domain::Calset, idx);
        let profiles: Vec<Vec<f64>> =
            synthetic_profiles(dims.profiles, 18, center_lo, center_hi, 4.0, &cal_factory);

        let mut text = String::from("gamma_eff_db,per_sim,per_awgn\n");
        for (i, profile) in profiles.iter().enumerate() {
            let gammas: Vec<f64> = profile.iter().map(|&db| db_to_linear(db)).collect();
            let sim_factory = cal_factory.child(Domain::Profile, i as u64);
            let result =
                simulate_per(&gammas, mcs, DEFAULT_INFO_BITS, dims.packets, &sim_factory)?;
            let gamma_eff_db = linear_to_db(compress(&gammas, CompressionMethod::Eesm, beta));
            let per_awgn = curve.predict_per(gamma_eff_db);
            writeln!(text, "{:?},{:?},{:?}", gamma_eff_db, result.per(), per_awgn)
                .expect("string write");
        }
        let scatter_path = dir.join(format!("per_scatter_{name}.csv"));
        write_atomic(&scatter_path, |tmp| {
            fs::write(tmp, &text).map_err(|e| Error::Io {
                path: tmp.display().to_string(),
                source: e,
            })
        })?;
        outputs.push(scatter_path);
    }
    Ok(outputs)
}

/// Deep-notch robustness study: 20 percent of subcarriers sit 10 dB below
/// the rest, a profile shape absent from calibration.
fn extreme_profile_figure(
    dir: &std::path::Path,
    seed: u64,
    scale: Scale,
) -> Result<Vec<PathBuf>> {
    let (packets, n_profiles, n_sub) = match scale {
        Scale::Desk => (2000, 10, 25),
        Scale::Full => (20_000, 25, 50),
    };
    let mcs = Mcs::parse("qpsk_r12_conv")?;
    let beta = crate::active_beta_table()?.lookup(&mcs.name())?;
    let base = RngFactory::new(seed);

    let (grid_lo, grid_hi) = grid_span(mcs);
    let snr_grid = grid(grid_lo, grid_hi, 0.5);
    let curve_factory = base.child(Domain::Profile, u64::from(mcs.mcs_index()));
    let curve = awgn_reference_curve(mcs, &snr_grid, DEFAULT_INFO_BITS, packets, &curve_factory)?;

    // Sweep the flat level so the notched profiles cover the waterfall; the
    // notch drags the effective SINR below the flat level, hence the +2 dB
    // headroom at the top.
    let (lo, hi) = center_span(&curve, grid_lo, grid_hi);
    let hi = hi + 2.0;
    let profiles: Vec<Vec<f64>> = (0..n_profiles)
        .map(|i| {
            let center = if n_profiles == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n_profiles - 1) as f64
            };
            (0..n_sub)
                .map(|n| if n % 5 == 0 { center - 10.0 } else { center })
                .collect()
        })
        .collect();

    let cal_factory = base.child(Domain::Calset, u64::from(mcs.mcs_index()));
    let mut text = String::from("profile,gamma_eff_db,per_pred,per_sim\n");
    for (i, profile) in profiles.iter().enumerate() {
        let gammas: Vec<f64> = profile.iter().map(|&db| db_to_linear(db)).collect();
        let sim_factory = cal_factory.child(Domain::Profile, i as u64);
        let result = simulate_per(&gammas, mcs, DEFAULT_INFO_BITS, packets, &sim_factory)?;
        let gamma_eff_db = linear_to_db(compress(&gammas, CompressionMethod::Eesm, beta));
        let per_pred = curve.predict_per(gamma_eff_db);
        writeln!(text, "{},{:?},{:?},{:?}", i, gamma_eff_db, per_pred, result.per())
            .expect("string write");
    }

    let mut outputs = Vec::new();
    let curve_path = dir.join(format!("ref_{}.csv", mcs.name()));
    write_atomic(&curve_path, |tmp| io::write_ref_curve(tmp, &curve))?;
    outputs.push(curve_path);

    let profiles_path = dir.join("profiles.csv");
    write_atomic(&profiles_path, |tmp| io::write_profile_set(tmp, &profiles))?;
    outputs.push(profiles_path);

    let results_path = dir.join("per_extreme.csv");
    write_atomic(&results_path, |tmp| {
        fs::write(tmp, &text).map_err(|e| Error::Io {
            path: tmp.display().to_string(),
            source: e,
        })
    })?;
    outputs.push(results_path);
    Ok(outputs)
}
