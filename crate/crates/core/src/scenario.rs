//! Deployment scenarios: room geometry, antenna placement, users, radio
//! parameters, and the link configuration, with a TOML file format.
//!
//! A scenario file either lists antenna elements and user positions
//! explicitly or asks for them to be generated: antennas as uniform linear
//! arrays along the four walls (counts proportional to wall length), users
//! uniformly at random on a horizontal plane with a minimum clearance from
//! every antenna. Loading materializes every default, so serializing a loaded
//! scenario and loading it again reproduces the scenario exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::{patch_design_width, PatternSpec};
use crate::rng::SubstreamRng;
use crate::{dbl, fl, Error, Real, Result, BOLTZMANN, SPEED_OF_LIGHT};

/// 3-component position or direction vector.
pub type Vec3<T> = [T; 3];

/// Maximum rejection-sampling attempts per user position.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Tolerance for orientation basis orthonormality checks.
const BASIS_TOL: f64 = 1e-9;

/// Rectangular room, meters. The floor spans `[0, length] x [0, width]` at
/// `z = 0`; the ceiling sits at `z = height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Room<T> {
    pub length_m: T,
    pub width_m: T,
    pub height_m: T,
}

impl<T: Real> Room<T> {
    pub fn contains(&self, p: Vec3<T>) -> bool {
        p[0] >= T::zero()
            && p[0] <= self.length_m
            && p[1] >= T::zero()
            && p[1] <= self.width_m
            && p[2] >= T::zero()
            && p[2] <= self.height_m
    }
}

/// Radio-level parameters shared by every link in the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radio<T> {
    pub carrier_freq_hz: T,
    pub signal_bw_hz: T,
    pub subcarrier_bw_hz: T,
    pub base_station_power_w: T,
    pub user_power_w: T,
    pub pilot_power_w: T,
    pub base_station_noise_figure_db: T,
    pub user_noise_figure_db: T,
    pub temperature_k: T,
    pub boltzmann_j_per_k: T,
    /// Pilot sequence length in symbols.
    pub tau_p: usize,
    /// Coherence block length in symbols.
    pub tau_c: usize,
}

impl<T: Real> Radio<T> {
    /// Carrier wavelength, meters.
    pub fn lambda(&self) -> T {
        fl::<T>(SPEED_OF_LIGHT) / self.carrier_freq_hz
    }

    /// Number of subcarriers spanned by the signal bandwidth.
    pub fn n_subcarriers(&self) -> usize {
        dbl(self.signal_bw_hz / self.subcarrier_bw_hz).round() as usize
    }

    /// Center frequency of subcarrier `n` on the symmetric grid.
    pub fn subcarrier_freq(&self, n: usize) -> T {
        let n_sc = self.n_subcarriers();
        let center = fl::<T>((n_sc as f64 - 1.0) / 2.0);
        self.carrier_freq_hz + (fl::<T>(n as f64) - center) * self.subcarrier_bw_hz
    }
}

/// One antenna element: a wall (or otherwise) mounted radiator with an
/// orthonormal right-handed local frame. The boresight is local x; the
/// element's long axis is local z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaElement<T> {
    pub position: Vec3<T>,
    pub boresight: Vec3<T>,
    pub local_y: Vec3<T>,
    pub local_z: Vec3<T>,
}

impl<T: Real> AntennaElement<T> {
    /// Expresses a global direction vector in the element's local frame.
    pub fn to_local(&self, d: Vec3<T>) -> Vec3<T> {
        [dot(self.boresight, d), dot(self.local_y, d), dot(self.local_z, d)]
    }
}

/// Link direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Dl,
    Ul,
}

/// Large-scale channel model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Los,
    Rayleigh,
}

/// Channel state information available to the precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiKind {
    Perfect,
    Ls,
}

/// Linear precoder (downlink) or combiner (uplink) family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderKind {
    Mrt,
    Zf,
}

/// Link-level configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkConfig {
    pub direction: Direction,
    pub channel: ChannelKind,
    pub csi: CsiKind,
    pub precoder: PrecoderKind,
    /// Reuse the carrier wavelength for every subcarrier's line-of-sight
    /// response instead of the per-subcarrier wavelength.
    pub los_frequency_flat: bool,
    /// Adjacent subcarriers sharing one small-scale fading draw.
    pub coherence_group_size: usize,
    /// Evaluate every `step`-th subcarrier when generating traces.
    pub subcarrier_step: usize,
}

/// A fully materialized deployment scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub room: Room<T>,
    pub radio: Radio<T>,
    pub pattern: PatternSpec<T>,
    pub antennas: Vec<AntennaElement<T>>,
    /// Explicit user positions; `None` means users are drawn per trace.
    pub users: Option<Vec<Vec3<T>>>,
    pub user_count: usize,
    pub user_height_m: T,
    pub d_min_m: T,
    /// Redraw user positions for every coherence block of a trace.
    pub resample_per_block: bool,
    pub link: LinkConfig,
    /// Downlink power-control coefficients, one per user, summing to at most 1.
    pub eta_dl: Vec<T>,
    /// Uplink per-user transmit scaling, one per user, each at most 1.
    pub eta_ul: Vec<T>,
}

impl<T: Real> Scenario<T> {
    pub fn antenna_count(&self) -> usize {
        self.antennas.len()
    }

    /// Power-control coefficients for the configured direction.
    pub fn eta(&self) -> &[T] {
        match self.link.direction {
            Direction::Dl => &self.eta_dl,
            Direction::Ul => &self.eta_ul,
        }
    }

    /// Subcarrier indices evaluated by a trace, honoring `subcarrier_step`.
    pub fn active_subcarriers(&self) -> Vec<usize> {
        (0..self.radio.n_subcarriers())
            .step_by(self.link.subcarrier_step)
            .collect()
    }

    /// Wavelength used for subcarrier `n`'s line-of-sight response.
    pub fn los_lambda(&self, n: usize) -> T {
        if self.link.los_frequency_flat {
            self.radio.lambda()
        } else {
            fl::<T>(SPEED_OF_LIGHT) / self.radio.subcarrier_freq(n)
        }
    }
}

fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub3<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Euclidean distance between two points.
pub fn distance<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    let d = sub3(a, b);
    dot(d, d).sqrt()
}

/// Places `m` antennas as evenly spaced linear arrays along the four walls at
/// the given height, boresights pointing into the room.
///
/// Wall counts follow the largest-remainder rule on wall lengths, so counts
/// are proportional to `[length, width, length, width]` and sum to `m`. A
/// wall holding `n` elements spaces them at `wall_len * (j+1) / (n+1)`.
pub fn place_antennas<T: Real>(room: &Room<T>, m: usize, mount_height_m: T) -> Vec<AntennaElement<T>> {
    let l = dbl(room.length_m);
    let w = dbl(room.width_m);
    let lengths = [l, w, l, w];
    let perimeter: f64 = lengths.iter().sum();
    let mut counts = [0usize; 4];
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(4);
    let mut assigned = 0;
    for (i, &len) in lengths.iter().enumerate() {
        let quota = m as f64 * len / perimeter;
        counts[i] = quota.floor() as usize;
        assigned += counts[i];
        remainders.push((i, quota - quota.floor()));
    }
    // Largest remainder first; ties go to the lower wall index.
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for &(i, _) in remainders.iter().take(m - assigned) {
        counts[i] += 1;
    }

    let z_axis = [T::zero(), T::zero(), T::one()];
    let mut out = Vec::with_capacity(m);
    for wall in 0..4 {
        let n = counts[wall];
        let wall_len = fl::<T>(lengths[wall]);
        for j in 0..n {
            let t = wall_len * fl::<T>((j + 1) as f64) / fl::<T>((n + 1) as f64);
            let (position, boresight): (Vec3<T>, Vec3<T>) = match wall {
                0 => ([t, T::zero(), mount_height_m], [T::zero(), T::one(), T::zero()]),
                1 => ([room.length_m, t, mount_height_m], [-T::one(), T::zero(), T::zero()]),
                2 => ([t, room.width_m, mount_height_m], [T::zero(), -T::one(), T::zero()]),
                _ => ([T::zero(), t, mount_height_m], [T::one(), T::zero(), T::zero()]),
            };
            let local_y = cross(z_axis, boresight);
            out.push(AntennaElement {
                position,
                boresight,
                local_y,
                local_z: z_axis,
            });
        }
    }
    out
}

/// Draws `k` user positions uniformly on the plane `z = height`, rejecting
/// positions closer than `d_min` to any antenna.
pub fn place_users<T: Real>(
    room: &Room<T>,
    antennas: &[AntennaElement<T>],
    k: usize,
    height_m: T,
    d_min_m: T,
    rng: &mut SubstreamRng,
) -> Result<Vec<Vec3<T>>> {
    let mut users = Vec::with_capacity(k);
    for _ in 0..k {
        let mut placed = false;
        for _attempt in 0..MAX_PLACEMENT_ATTEMPTS {
            let x = fl::<T>(rng.gen::<f64>()) * room.length_m;
            let y = fl::<T>(rng.gen::<f64>()) * room.width_m;
            let p = [x, y, height_m];
            if antennas.iter().all(|a| distance(a.position, p) >= d_min_m) {
                users.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::PlacementRejection {
                attempts: MAX_PLACEMENT_ATTEMPTS,
            });
        }
    }
    Ok(users)
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// On-disk scenario schema. All lengths are meters, powers watts,
/// frequencies hertz, temperatures kelvin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub room: RoomSection,
    pub radio: RadioSection,
    pub antennas: AntennaSection,
    pub users: UserSection,
    pub link: LinkSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_control: Option<PowerControlSection>,
    #[serde(default, rename = "antenna", skip_serializing_if = "Vec::is_empty")]
    pub antenna_list: Vec<AntennaEntry>,
    #[serde(default, rename = "user", skip_serializing_if = "Vec::is_empty")]
    pub user_list: Vec<UserEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSection {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub carrier_freq_hz: f64,
    pub signal_bw_hz: f64,
    pub subcarrier_bw_hz: f64,
    pub base_station_power_w: f64,
    pub user_power_w: f64,
    pub pilot_power_w: f64,
    pub base_station_noise_figure_db: f64,
    pub user_noise_figure_db: f64,
    pub temperature_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boltzmann_j_per_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_c: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSection {
    pub count: usize,
    pub pattern: PatternName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mount_height_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_h_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_w_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternName {
    Omni,
    Patch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_per_block: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub channel: ChannelKind,
    pub csi: CsiKind,
    pub precoder: PrecoderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los_frequency_flat: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_group_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcarrier_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerControlSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dl: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ul: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaEntry {
    pub position: [f64; 3],
    pub boresight: [f64; 3],
    pub local_y: [f64; 3],
    pub local_z: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub position: [f64; 3],
}

/// Parses and validates a scenario from TOML text.
pub fn load_scenario<T: Real>(text: &str) -> Result<Scenario<T>> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    Scenario::from_file(&file)
}

/// Serializes a scenario to TOML with every default materialized and all
/// placements explicit, so loading the output reproduces the scenario.
pub fn serialize_scenario<T: Real>(s: &Scenario<T>) -> String {
    toml::to_string_pretty(&s.to_file()).expect("scenario serialization cannot fail")
}

impl<T: Real> Scenario<T> {
    /// Builds and validates a scenario from its file representation.
    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        validate_file(file)?;
        let room = Room {
            length_m: fl::<T>(file.room.length_m),
            width_m: fl::<T>(file.room.width_m),
            height_m: fl::<T>(file.room.height_m),
        };
        let k = file.users.count;
        let radio = Radio {
            carrier_freq_hz: fl::<T>(file.radio.carrier_freq_hz),
            signal_bw_hz: fl::<T>(file.radio.signal_bw_hz),
            subcarrier_bw_hz: fl::<T>(file.radio.subcarrier_bw_hz),
            base_station_power_w: fl::<T>(file.radio.base_station_power_w),
            user_power_w: fl::<T>(file.radio.user_power_w),
            pilot_power_w: fl::<T>(file.radio.pilot_power_w),
            base_station_noise_figure_db: fl::<T>(file.radio.base_station_noise_figure_db),
            user_noise_figure_db: fl::<T>(file.radio.user_noise_figure_db),
            temperature_k: fl::<T>(file.radio.temperature_k),
            boltzmann_j_per_k: fl::<T>(file.radio.boltzmann_j_per_k.unwrap_or(BOLTZMANN)),
            tau_p: file.radio.tau_p.unwrap_or(k),
            tau_c: file.radio.tau_c.unwrap_or(200),
        };
        let pattern = match file.antennas.pattern {
            PatternName::Omni => PatternSpec::Omni,
            PatternName::Patch => {
                let h = file.antennas.patch_h_m.expect("validated");
                let w = match file.antennas.patch_w_m {
                    Some(w) => w,
                    None => dbl(patch_design_width(
                        file.radio.carrier_freq_hz,
                        file.antennas.epsilon_r.unwrap_or(10.2),
                    )),
                };
                PatternSpec::Patch {
                    h: fl::<T>(h),
                    w: fl::<T>(w),
                }
            }
        };
        let mount_height = file
            .antennas
            .mount_height_m
            .unwrap_or(file.room.height_m / 2.0);
        let antennas: Vec<AntennaElement<T>> = if file.antenna_list.is_empty() {
            place_antennas(&room, file.antennas.count, fl::<T>(mount_height))
        } else {
            file.antenna_list
                .iter()
                .map(|e| AntennaElement {
                    position: vec3_from(e.position),
                    boresight: vec3_from(e.boresight),
                    local_y: vec3_from(e.local_y),
                    local_z: vec3_from(e.local_z),
                })
                .collect()
        };
        let users: Option<Vec<Vec3<T>>> = if file.user_list.is_empty() {
            None
        } else {
            Some(file.user_list.iter().map(|e| vec3_from(e.position)).collect())
        };
        let pc = file.power_control.clone().unwrap_or(PowerControlSection {
            dl: None,
            ul: None,
        });
        let eta_dl: Vec<T> = match pc.dl {
            Some(v) => v.into_iter().map(fl::<T>).collect(),
            None => vec![T::one() / fl::<T>(k as f64); k],
        };
        let eta_ul: Vec<T> = match pc.ul {
            Some(v) => v.into_iter().map(fl::<T>).collect(),
            None => vec![T::one(); k],
        };
        let link = LinkConfig {
            direction: file.link.direction.unwrap_or(Direction::Dl),
            channel: file.link.channel,
            csi: file.link.csi,
            precoder: file.link.precoder,
            los_frequency_flat: file.link.los_frequency_flat.unwrap_or(false),
            coherence_group_size: file.link.coherence_group_size.unwrap_or(1),
            subcarrier_step: file.link.subcarrier_step.unwrap_or(1),
        };
        let scenario = Scenario {
            room,
            radio,
            pattern,
            antennas,
            users,
            user_count: k,
            user_height_m: fl::<T>(file.users.height_m.unwrap_or(1.5)),
            d_min_m: fl::<T>(file.users.d_min_m.unwrap_or(0.5)),
            resample_per_block: file.users.resample_per_block.unwrap_or(true),
            link,
            eta_dl,
            eta_ul,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// File representation with every default materialized and placements
    /// explicit.
    pub fn to_file(&self) -> ScenarioFile {
        let (pattern, patch_h_m, patch_w_m) = match self.pattern {
            PatternSpec::Omni => (PatternName::Omni, None, None),
            PatternSpec::Patch { h, w } => (PatternName::Patch, Some(dbl(h)), Some(dbl(w))),
        };
        ScenarioFile {
            room: RoomSection {
                length_m: dbl(self.room.length_m),
                width_m: dbl(self.room.width_m),
                height_m: dbl(self.room.height_m),
            },
            radio: RadioSection {
                carrier_freq_hz: dbl(self.radio.carrier_freq_hz),
                signal_bw_hz: dbl(self.radio.signal_bw_hz),
                subcarrier_bw_hz: dbl(self.radio.subcarrier_bw_hz),
                base_station_power_w: dbl(self.radio.base_station_power_w),
                user_power_w: dbl(self.radio.user_power_w),
                pilot_power_w: dbl(self.radio.pilot_power_w),
                base_station_noise_figure_db: dbl(self.radio.base_station_noise_figure_db),
                user_noise_figure_db: dbl(self.radio.user_noise_figure_db),
                temperature_k: dbl(self.radio.temperature_k),
                boltzmann_j_per_k: Some(dbl(self.radio.boltzmann_j_per_k)),
                tau_p: Some(self.radio.tau_p),
                tau_c: Some(self.radio.tau_c),
            },
            antennas: AntennaSection {
                count: self.antennas.len(),
                pattern,
                mount_height_m: None,
                patch_h_m,
                patch_w_m,
                epsilon_r: None,
            },
            users: UserSection {
                count: self.user_count,
                height_m: Some(dbl(self.user_height_m)),
                d_min_m: Some(dbl(self.d_min_m)),
                resample_per_block: Some(self.resample_per_block),
            },
            link: LinkSection {
                channel: self.link.channel,
                csi: self.link.csi,
                precoder: self.link.precoder,
                direction: Some(self.link.direction),
                los_frequency_flat: Some(self.link.los_frequency_flat),
                coherence_group_size: Some(self.link.coherence_group_size),
                subcarrier_step: Some(self.link.subcarrier_step),
            },
            power_control: Some(PowerControlSection {
                dl: Some(self.eta_dl.iter().map(|&x| dbl(x)).collect()),
                ul: Some(self.eta_ul.iter().map(|&x| dbl(x)).collect()),
            }),
            antenna_list: self
                .antennas
                .iter()
                .map(|a| AntennaEntry {
                    position: vec3_to(a.position),
                    boresight: vec3_to(a.boresight),
                    local_y: vec3_to(a.local_y),
                    local_z: vec3_to(a.local_z),
                })
                .collect(),
            user_list: self
                .users
                .as_ref()
                .map(|us| us.iter().map(|&p| UserEntry { position: vec3_to(p) }).collect())
                .unwrap_or_default(),
        }
    }

    /// Checks every structural invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InvalidScenario(msg));
        if !(self.room.length_m > T::zero()
            && self.room.width_m > T::zero()
            && self.room.height_m > T::zero())
        {
            return err("room dimensions must be positive".into());
        }
        let r = &self.radio;
        for (name, v) in [
            ("carrier_freq_hz", r.carrier_freq_hz),
            ("signal_bw_hz", r.signal_bw_hz),
            ("subcarrier_bw_hz", r.subcarrier_bw_hz),
            ("base_station_power_w", r.base_station_power_w),
            ("user_power_w", r.user_power_w),
            ("pilot_power_w", r.pilot_power_w),
            ("temperature_k", r.temperature_k),
            ("boltzmann_j_per_k", r.boltzmann_j_per_k),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return err(format!("{name} must be positive and finite"));
            }
        }
        if r.base_station_noise_figure_db < T::zero() || r.user_noise_figure_db < T::zero() {
            return err("noise figures must be nonnegative".into());
        }
        if r.subcarrier_bw_hz > r.signal_bw_hz {
            return err("subcarrier bandwidth exceeds signal bandwidth".into());
        }
        let n_sc = r.n_subcarriers();
        let aligned = fl::<T>(n_sc as f64) * r.subcarrier_bw_hz;
        if n_sc == 0 || (aligned - r.signal_bw_hz).abs() > fl::<T>(1e-6) * r.signal_bw_hz {
            return err("signal bandwidth must be an integer number of subcarriers".into());
        }
        let m = self.antennas.len();
        let k = self.user_count;
        if m == 0 || k == 0 {
            return err("need at least one antenna and one user".into());
        }
        if self.link.precoder == PrecoderKind::Zf && m < k {
            return err(format!("zero-forcing needs at least as many antennas as users ({m} < {k})"));
        }
        if self.link.csi == CsiKind::Ls && r.tau_p < k {
            return err(format!("least-squares estimation needs tau_p >= user count ({} < {k})", r.tau_p));
        }
        if r.tau_c < r.tau_p {
            return err("tau_c must be at least tau_p".into());
        }
        if self.link.coherence_group_size == 0 || self.link.subcarrier_step == 0 {
            return err("coherence_group_size and subcarrier_step must be at least 1".into());
        }
        for (i, a) in self.antennas.iter().enumerate() {
            if !self.room.contains(a.position) {
                return err(format!("antenna {i} lies outside the room"));
            }
            let tol = fl::<T>(BASIS_TOL);
            let one = T::one();
            for (axis, v) in [("boresight", a.boresight), ("local_y", a.local_y), ("local_z", a.local_z)] {
                if (dot(v, v).sqrt() - one).abs() > tol {
                    return err(format!("antenna {i} {axis} is not unit length"));
                }
            }
            if dot(a.boresight, a.local_y).abs() > tol
                || dot(a.boresight, a.local_z).abs() > tol
                || dot(a.local_y, a.local_z).abs() > tol
            {
                return err(format!("antenna {i} local frame is not orthogonal"));
            }
            let xy = cross(a.boresight, a.local_y);
            if distance(xy, a.local_z) > tol {
                return err(format!("antenna {i} local frame is not right-handed"));
            }
        }
        if let Some(users) = &self.users {
            if users.len() != k {
                return err(format!("explicit user list has {} entries, expected {k}", users.len()));
            }
            if self.resample_per_block {
                return err("explicit user positions are incompatible with resample_per_block".into());
            }
            for (i, &p) in users.iter().enumerate() {
                if !self.room.contains(p) {
                    return err(format!("user {i} lies outside the room"));
                }
                if let Some(j) = self
                    .antennas
                    .iter()
                    .position(|a| distance(a.position, p) < self.d_min_m)
                {
                    return err(format!("user {i} is closer than d_min to antenna {j}"));
                }
            }
        }
        if self.user_height_m < T::zero() || self.user_height_m > self.room.height_m {
            return err("user height must lie inside the room".into());
        }
        if self.d_min_m < T::zero() {
            return err("d_min_m must be nonnegative".into());
        }
        if self.eta_dl.len() != k || self.eta_ul.len() != k {
            return err("power control lists must have one entry per user".into());
        }
        if self.eta_dl.iter().any(|&e| e < T::zero() || !e.is_finite())
            || self.eta_ul.iter().any(|&e| e < T::zero() || !e.is_finite())
        {
            return err("power control coefficients must be nonnegative and finite".into());
        }
        let dl_sum: T = self.eta_dl.iter().cloned().sum();
        if dl_sum > T::one() + fl(1e-9) {
            return err(format!("downlink power control sums to {dl_sum}, must be <= 1"));
        }
        if self.eta_ul.iter().any(|&e| e > T::one() + fl(1e-9)) {
            return err("uplink power control coefficients must be <= 1".into());
        }
        Ok(())
    }
}

fn validate_file(file: &ScenarioFile) -> Result<()> {
    if file.antennas.pattern == PatternName::Patch && file.antennas.patch_h_m.is_none() {
        return Err(Error::InvalidScenario(
            "patch pattern requires antennas.patch_h_m".into(),
        ));
    }
    if !file.antenna_list.is_empty() && file.antenna_list.len() != file.antennas.count {
        return Err(Error::InvalidScenario(format!(
            "antenna list has {} entries but antennas.count = {}",
            file.antenna_list.len(),
            file.antennas.count
        )));
    }
    if !file.user_list.is_empty() && file.user_list.len() != file.users.count {
        return Err(Error::InvalidScenario(format!(
            "user list has {} entries but users.count = {}",
            file.user_list.len(),
            file.users.count
        )));
    }
    Ok(())
}

fn vec3_from<T: Real>(v: [f64; 3]) -> Vec3<T> {
    [fl(v[0]), fl(v[1]), fl(v[2])]
}

fn vec3_to<T: Real>(v: Vec3<T>) -> [f64; 3] {
    [dbl(v[0]), dbl(v[1]), dbl(v[2])]
}
