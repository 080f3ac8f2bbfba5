//! Scenario files: one TOML document per experiment.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use noma_oqc::alloc::{PowerConstraints, SolverConfig};
use noma_oqc::coherent::{DetectionConfig, ReceiverVariant};
use noma_oqc::sampler::SamplerConfig;

use crate::presets;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn resolve(&self, users: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            Self::One(v) => Ok(vec![*v; users]),
            Self::Many(v) if v.len() >= users => Ok(v[..users].to_vec()),
            Self::Many(v) => bail!("{name} lists {} values but the scenario has {users} users", v.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub system: SystemSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub qam: QamSection,
    #[serde(default)]
    pub limits: LimitsSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub users: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_n_b")]
    pub n_b: f64,
    #[serde(default = "default_receiver")]
    pub receiver: String,
    pub max_bs_power: f64,
    /// Per-user caps; defaults to `max_bs_power` and follows it in sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_user_power: Option<OneOrMany>,
    /// Fixed amplitudes for `rate` and `region`; the equal-photon allocation otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// Explicit `h_k`; when absent gains are drawn from the link model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<f64>>,
    #[serde(default = "default_sigma_x")]
    pub sigma_x: OneOrMany,
    #[serde(default = "default_distance")]
    pub distance: OneOrMany,
    #[serde(default = "default_tx_aperture")]
    pub tx_aperture: f64,
    #[serde(default = "default_rx_aperture")]
    pub rx_aperture: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    #[serde(default = "default_one")]
    pub realizations: usize,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            gains: None,
            sigma_x: default_sigma_x(),
            distance: default_distance(),
            tx_aperture: default_tx_aperture(),
            rx_aperture: default_rx_aperture(),
            wavelength: default_wavelength(),
            realizations: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
    /// `sca` switches to the sampled allocator above this user count.
    #[serde(default = "default_full_max")]
    pub full_enumeration_max: usize,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_eps_sca")]
    pub eps_sca: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_newton")]
    pub max_newton_steps: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            algorithm: default_algorithm(),
            full_enumeration_max: default_full_max(),
            t_max: default_t_max(),
            eps_sca: default_eps_sca(),
            tolerance: default_tolerance(),
            max_newton_steps: default_newton(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    /// Defaults to `min(16K, 2^K)`; a configured value is capped at `2^K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `max_bs_power` or `users`.
    #[serde(default = "default_param")]
    pub param: String,
    /// `start:stop:count`, endpoints included.
    #[serde(default = "default_sweep_grid")]
    pub grid: String,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    /// Empty means the system receiver.
    #[serde(default)]
    pub receivers: Vec<String>,
    /// Empty means the system transmittance.
    #[serde(default)]
    pub etas: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            param: default_param(),
            grid: default_sweep_grid(),
            algorithms: default_algorithms(),
            receivers: Vec::new(),
            etas: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QamSection {
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    #[serde(default = "default_qam_users")]
    pub users: usize,
    /// `uniform` or `nested`.
    #[serde(default = "default_qam_gains")]
    pub gains: String,
    /// Total mean received photons per symbol, split equally over users.
    #[serde(default = "default_qam_grid")]
    pub grid: String,
}

impl Default for QamSection {
    fn default() -> Self {
        Self {
            orders: default_orders(),
            users: default_qam_users(),
            gains: default_qam_gains(),
            grid: default_qam_grid(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    /// Transmitted mean photon numbers.
    #[serde(default = "default_limits_grid")]
    pub grid: String,
    #[serde(default = "default_one_f64")]
    pub awgn_noise_photons: f64,
}

impl Default for LimitsSection {
    fn default() -> Self {
        Self {
            grid: default_limits_grid(),
            awgn_noise_photons: 1.0,
        }
    }
}

fn default_eta() -> f64 {
    0.9
}
fn default_n_b() -> f64 {
    1.7
}
fn default_receiver() -> String {
    "ideal_pnrd".into()
}
fn default_sigma_x() -> OneOrMany {
    OneOrMany::One(0.3)
}
fn default_distance() -> OneOrMany {
    OneOrMany::One(100.0)
}
fn default_tx_aperture() -> f64 {
    0.1
}
fn default_rx_aperture() -> f64 {
    1.0
}
fn default_wavelength() -> f64 {
    1550e-9
}
fn default_one() -> usize {
    1
}
fn default_one_f64() -> f64 {
    1.0
}
fn default_algorithm() -> String {
    "sca".into()
}
fn default_full_max() -> usize {
    8
}
fn default_t_max() -> usize {
    100
}
fn default_eps_sca() -> f64 {
    1e-4
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_newton() -> usize {
    100
}
fn default_param() -> String {
    "max_bs_power".into()
}
fn default_sweep_grid() -> String {
    "10:120:12".into()
}
fn default_algorithms() -> Vec<String> {
    ["sca", "oma", "enp", "ia"].map(String::from).to_vec()
}
fn default_orders() -> Vec<usize> {
    vec![4, 16, 64]
}
fn default_qam_users() -> usize {
    2
}
fn default_qam_gains() -> String {
    "uniform".into()
}
fn default_qam_grid() -> String {
    "0:100:11".into()
}
fn default_limits_grid() -> String {
    "0:100:21".into()
}

/// `start:stop:count` with both endpoints.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [a, b, n] = parts[..] else {
        bail!("grid `{text}` is not of the form start:stop:count");
    };
    let a: f64 = a.parse().with_context(|| format!("grid start in `{text}`"))?;
    let b: f64 = b.parse().with_context(|| format!("grid stop in `{text}`"))?;
    let n: usize = n.parse().with_context(|| format!("grid count in `{text}`"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        bail!("grid `{text}` needs finite endpoints and a positive count");
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// `ideal_pnrd`, `finite_pnrd:N` or `on_off_kennedy`.
pub fn parse_receiver(name: &str) -> Result<ReceiverVariant> {
    match name {
        "ideal_pnrd" => Ok(ReceiverVariant::IdealPnrd),
        "on_off_kennedy" => Ok(ReceiverVariant::OnOffKennedy),
        _ => {
            let n = name
                .strip_prefix("finite_pnrd:")
                .or_else(|| name.strip_prefix("finite_pnrd_"))
                .ok_or_else(|| anyhow!("unknown receiver `{name}`"))?;
            let max_count = n.parse().with_context(|| format!("receiver `{name}`"))?;
            Ok(ReceiverVariant::FinitePnrd { max_count })
        }
    }
}

/// Values from the command line that replace file values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub algorithm: Option<String>,
    pub realizations: Option<usize>,
}

fn merge(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Preset, then file values on top, then command-line overrides.
    pub fn load(preset: Option<&str>, file_text: Option<&str>, overrides: &Overrides) -> Result<Self> {
        let mut value: toml::Value = match preset {
            Some(name) => toml::from_str(presets::get(name)?)?,
            None => toml::Value::Table(Default::default()),
        };
        if let Some(text) = file_text {
            merge(&mut value, toml::from_str(text).context("scenario file")?);
        }
        let mut s: Self = value.try_into().context("scenario")?;
        if let Some(seed) = overrides.seed {
            s.seed = seed;
        }
        if let Some(a) = &overrides.algorithm {
            s.solver.algorithm = a.clone();
        }
        if let Some(r) = overrides.realizations {
            s.channel.realizations = r;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.system.users;
        if k == 0 {
            bail!("system.users must be at least 1");
        }
        self.detection()?;
        parse_receiver(&self.system.receiver)?;
        for r in &self.sweep.receivers {
            parse_receiver(r)?;
        }
        if let Some(c) = &self.system.max_user_power {
            c.resolve(k, "system.max_user_power")?;
        }
        if let Some(a) = &self.system.amplitudes {
            if a.len() != k {
                bail!("system.amplitudes lists {} values for {k} users", a.len());
            }
        }
        if let Some(g) = &self.channel.gains {
            if g.len() < k {
                bail!("channel.gains lists {} values for {k} users", g.len());
            }
        }
        if self.channel.realizations == 0 {
            bail!("channel.realizations must be at least 1");
        }
        self.solver_config().validate()?;
        parse_grid(&self.sweep.grid)?;
        parse_grid(&self.qam.grid)?;
        parse_grid(&self.limits.grid)?;
        if !matches!(self.sweep.param.as_str(), "max_bs_power" | "users") {
            bail!("sweep.param `{}` is not max_bs_power or users", self.sweep.param);
        }
        for a in self.sweep.algorithms.iter().chain([&self.solver.algorithm]) {
            crate::run::Algorithm::parse(a)?;
        }
        if !matches!(self.qam.gains.as_str(), "uniform" | "nested") {
            bail!("qam.gains `{}` is not uniform or nested", self.qam.gains);
        }
        Ok(())
    }

    pub fn detection(&self) -> Result<DetectionConfig<f64>> {
        let rx = parse_receiver(&self.system.receiver)?;
        Ok(DetectionConfig::new(self.system.eta, self.system.n_b, rx)?)
    }

    /// Caps for `users` users at base-station budget `max_bs_power`.
    pub fn constraints(&self, users: usize, max_bs_power: f64) -> Result<PowerConstraints<f64>> {
        let caps = match &self.system.max_user_power {
            Some(c) => c.resolve(users, "system.max_user_power")?,
            None => vec![max_bs_power; users],
        };
        Ok(PowerConstraints::new(max_bs_power, caps)?)
    }

    pub fn solver_config(&self) -> SolverConfig<f64> {
        SolverConfig {
            t_max: self.solver.t_max,
            eps_sca: self.solver.eps_sca,
            tolerance: self.solver.tolerance,
            max_newton_steps: self.solver.max_newton_steps,
            ..SolverConfig::default()
        }
    }

    pub fn sampler_config(&self, users: usize) -> SamplerConfig<f64> {
        let mut c = SamplerConfig::default_for(users);
        if let Some(s) = self.sampler.sample_size {
            c.sample_size = if users >= 63 { s } else { s.min(1 << users) };
        }
        if let Some(t) = self.sampler.theta {
            c.theta = t;
        }
        if let Some(r) = self.sampler.r_threshold {
            c.r_threshold = r;
        }
        if let Some(m) = self.sampler.max_rounds {
            c.max_rounds = m;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("10:120:12").unwrap()[11], 120.0);
        assert_eq!(parse_grid("5:9:1").unwrap(), vec![5.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }

    #[test]
    fn receivers() {
        assert_eq!(
            parse_receiver("finite_pnrd:25").unwrap(),
            ReceiverVariant::FinitePnrd { max_count: 25 }
        );
        assert_eq!(
            parse_receiver("finite_pnrd_40").unwrap(),
            ReceiverVariant::FinitePnrd { max_count: 40 }
        );
        assert!(parse_receiver("homodyne").is_err());
    }

    #[test]
    fn file_values_sit_on_top_of_presets() {
        let file = "seed = 9\n[system]\nn_b = 3.0\n";
        let s = Scenario::load(Some("fig2"), Some(file), &Overrides::default()).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.system.n_b, 3.0);
        assert_eq!(s.system.users, 4);
        let o = Overrides {
            seed: Some(1),
            ..Default::default()
        };
        assert_eq!(Scenario::load(Some("fig2"), Some(file), &o).unwrap().seed, 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Scenario::from_toml("[system]\nusers = 2\nmax_bs_power = 1.0\nbogus = 1\n").is_err());
    }

    #[test]
    fn round_trip() {
        let s = Scenario::load(Some("fig7"), None, &Overrides::default()).unwrap();
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }
}
