//! Scenario configuration (JSON).

use gravstat::counting::{scaled_params, Split};
use gravstat::physical::DetectorConfig;
use gravstat::{Complex64, GwSignalParams64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gw: Option<GwSpec>,
    /// Direct dimensionless interaction strength; excludes `detector`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<Axis>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tomo: Option<TomoSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_strain: Option<f64>,
    /// Test hook for `oracle-check`: flips the sign of the squeezing
    /// correlation fed to the pipeline side of the named check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<String>,
}

fn default_n_max() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GwSpec {
    Direct(DirectGw),
    Scaled(ScaledGw),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectGw {
    #[serde(default)]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub nbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledGw {
    /// `n_grav (γt)²`.
    pub x_total: f64,
    pub fraction_q: f64,
    pub split: SplitSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSpec {
    Thermal,
    Squeezed,
}

impl From<SplitSpec> for Split {
    fn from(s: SplitSpec) -> Self {
        match s {
            SplitSpec::Thermal => Split::Thermal,
            SplitSpec::Squeezed => Split::Squeezed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub mass: f64,
    pub length: f64,
    pub omega_ell: f64,
    pub ell: u32,
    pub gw_volume: f64,
    pub quality_factor: f64,
    pub temperature: f64,
    /// GW angular frequency, rad/s.
    pub nu: f64,
    /// Interaction time, s.
    pub t: f64,
}

impl DetectorSpec {
    pub fn detector(&self) -> DetectorConfig {
        DetectorConfig {
            mass: self.mass,
            length: self.length,
            omega_ell: self.omega_ell,
            ell: self.ell,
            gw_volume: self.gw_volume,
            quality_factor: self.quality_factor,
            temperature: self.temperature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub n_th: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub nbar_env: f64,
    /// Elapsed time for the damped channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoSpec {
    #[serde(default = "default_phases")]
    pub phases: usize,
    /// Reference `|β|` at which `dG1`, `dG2` are read off the polynomial fit.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    /// Relative standard deviation of Gaussian noise added to each simulated reading.
    #[serde(default)]
    pub measurement_noise: f64,
}

fn default_phases() -> usize {
    16
}
fn default_beta() -> f64 {
    1.0
}
fn default_betas() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
}

impl Default for TomoSpec {
    fn default() -> Self {
        Self {
            phases: default_phases(),
            beta: default_beta(),
            betas: default_betas(),
            measurement_noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    AlphaRe,
    AlphaIm,
    R,
    Theta,
    Nbar,
    XTotal,
    FractionQ,
    GammaT,
    NTh,
    Kappa,
    NbarEnv,
    Time,
    Epsilon,
    HStrain,
    Nu,
    Temperature,
    QualityFactor,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::AlphaRe => "alpha_re",
            Param::AlphaIm => "alpha_im",
            Param::R => "r",
            Param::Theta => "theta",
            Param::Nbar => "nbar",
            Param::XTotal => "x_total",
            Param::FractionQ => "fraction_q",
            Param::GammaT => "gamma_t",
            Param::NTh => "n_th",
            Param::Kappa => "kappa",
            Param::NbarEnv => "nbar_env",
            Param::Time => "time",
            Param::Epsilon => "epsilon",
            Param::HStrain => "h_strain",
            Param::Nu => "nu",
            Param::Temperature => "temperature",
            Param::QualityFactor => "quality_factor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Param,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let u = i as f64 / last;
                match self.scale {
                    Scale::Lin => self.min + (self.max - self.min) * u,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * u).exp(),
                }
            })
            .collect()
    }
}

/// A validation failure tied to a path inside the document.
struct Invalid {
    path: Vec<PathPart>,
    message: String,
}

enum PathPart {
    Key(&'static str),
    Index(usize),
}

fn invalid(path: Vec<PathPart>, message: impl Into<String>) -> Invalid {
    Invalid {
        path,
        message: message.into(),
    }
}

/// Best-effort line lookup: walks the keys in order through the raw text.
fn locate(raw: &str, path: &[PathPart]) -> Option<usize> {
    let mut pos = 0;
    for part in path {
        match part {
            PathPart::Key(k) => {
                let needle = format!("\"{k}\"");
                pos += raw[pos..].find(&needle)?;
            }
            PathPart::Index(i) => {
                for _ in 0..=*i {
                    pos += raw[pos..].find('{')? + 1;
                }
            }
        }
    }
    Some(raw[..pos].matches('\n').count() + 1)
}

fn render_path(path: &[PathPart]) -> String {
    let mut out = String::new();
    for part in path {
        match part {
            PathPart::Key(k) => {
                if !out.is_empty() {
                    out.push('.');
                }
                out.push_str(k);
            }
            PathPart::Index(i) => out.push_str(&format!("[{i}]")),
        }
    }
    out
}

impl ScenarioConfig {
    /// Parses and validates; error messages carry the line of the offending entry.
    pub fn from_json(raw: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = serde_json::from_str(raw).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check().map_err(|inv| {
            let line = locate(raw, &inv.path)
                .map(|l| format!("line {l}: "))
                .unwrap_or_default();
            CliError::Config(format!("{line}{}: {}", render_path(&inv.path), inv.message))
        })?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.check()
            .map_err(|inv| CliError::Config(format!("{}: {}", render_path(&inv.path), inv.message)))
    }

    fn check(&self) -> Result<(), Invalid> {
        use PathPart::{Index, Key};
        match (self.gamma_t, &self.detector) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    vec![Key("gamma_t")],
                    "give either gamma_t or detector, not both",
                ))
            }
            (None, None) if self.gw.is_some() || self.h_strain.is_some() => {
                return Err(invalid(vec![], "one of gamma_t or detector is required"))
            }
            _ => {}
        }
        if let Some(gt) = self.gamma_t {
            if !gt.is_finite() {
                return Err(invalid(vec![Key("gamma_t")], "must be finite"));
            }
        }
        if let Some(d) = &self.detector {
            if d.ell % 2 == 0 {
                return Err(invalid(vec![Key("detector"), Key("ell")], "mode index must be odd"));
            }
            for (name, v) in [
                ("mass", d.mass),
                ("length", d.length),
                ("omega_ell", d.omega_ell),
                ("gw_volume", d.gw_volume),
                ("quality_factor", d.quality_factor),
                ("nu", d.nu),
                ("t", d.t),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(vec![Key("detector"), Key(name)], "must be positive"));
                }
            }
            if !(d.temperature >= 0.0) {
                return Err(invalid(
                    vec![Key("detector"), Key("temperature")],
                    "must be non-negative",
                ));
            }
        }
        if self.sweep.len() > 2 {
            return Err(invalid(
                vec![Key("sweep")],
                format!("at most 2 axes, got {}", self.sweep.len()),
            ));
        }
        for (i, ax) in self.sweep.iter().enumerate() {
            let at = |k| vec![Key("sweep"), Index(i), Key(k)];
            if ax.steps == 0 {
                return Err(invalid(at("steps"), "must be at least 1"));
            }
            if !ax.min.is_finite() || !ax.max.is_finite() {
                return Err(invalid(at("min"), "bounds must be finite"));
            }
            if ax.scale == Scale::Log && !(ax.min > 0.0 && ax.max > 0.0) {
                return Err(invalid(at("scale"), "log axes need positive bounds"));
            }
            if self.sweep[..i].iter().any(|o| o.parameter == ax.parameter) {
                return Err(invalid(at("parameter"), "axis repeated"));
            }
            self.clone()
                .apply(ax.parameter, ax.min)
                .map_err(|m| invalid(at("parameter"), m))?;
        }
        if self.n_max > 64 {
            return Err(invalid(vec![Key("n_max")], "at most 64"));
        }
        if let Some(t) = &self.tomo {
            if t.phases < 8 {
                return Err(invalid(vec![Key("tomo"), Key("phases")], "need at least 8 phases"));
            }
            if !(t.beta > 0.0) {
                return Err(invalid(vec![Key("tomo"), Key("beta")], "must be positive"));
            }
            let mut distinct = t.betas.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() < 5 || distinct.iter().any(|b| !(*b > 0.0)) {
                return Err(invalid(
                    vec![Key("tomo"), Key("betas")],
                    "need at least 5 distinct positive values",
                ));
            }
            if !(t.measurement_noise >= 0.0 && t.measurement_noise.is_finite()) {
                return Err(invalid(
                    vec![Key("tomo"), Key("measurement_noise")],
                    "must be non-negative",
                ));
            }
        }
        let n = &self.noise;
        for (name, v) in [
            ("n_th", n.n_th),
            ("kappa", n.kappa),
            ("nbar_env", n.nbar_env),
            ("epsilon", n.epsilon),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(vec![Key("noise"), Key(name)], "must be non-negative"));
            }
        }
        if n.kappa > 0.0 && n.time.is_none() && self.detector.is_none() {
            return Err(invalid(
                vec![Key("noise"), Key("kappa")],
                "damping needs noise.time or a detector",
            ));
        }
        Ok(())
    }

    /// Overrides one swept parameter.
    pub fn apply(mut self, param: Param, v: f64) -> Result<Self, String> {
        fn direct(g: &mut Option<GwSpec>, param: Param) -> Result<&mut DirectGw, String> {
            match g {
                Some(GwSpec::Direct(d)) => Ok(d),
                _ => Err(format!("`{}` needs a `direct` gw block", param.name())),
            }
        }
        fn scaled(g: &mut Option<GwSpec>, param: Param) -> Result<&mut ScaledGw, String> {
            match g {
                Some(GwSpec::Scaled(s)) => Ok(s),
                _ => Err(format!("`{}` needs a `scaled` gw block", param.name())),
            }
        }
        let missing_detector = || format!("`{}` needs a detector section", param.name());
        match param {
            Param::AlphaRe => direct(&mut self.gw, param)?.alpha_re = v,
            Param::AlphaIm => direct(&mut self.gw, param)?.alpha_im = v,
            Param::R => direct(&mut self.gw, param)?.r = v,
            Param::Theta => direct(&mut self.gw, param)?.theta = v,
            Param::Nbar => direct(&mut self.gw, param)?.nbar = v,
            Param::XTotal => scaled(&mut self.gw, param)?.x_total = v,
            Param::FractionQ => scaled(&mut self.gw, param)?.fraction_q = v,
            Param::GammaT => match self.gamma_t {
                Some(_) => self.gamma_t = Some(v),
                None => return Err("`gamma_t` axis needs a direct gamma_t".into()),
            },
            Param::NTh => self.noise.n_th = v,
            Param::Kappa => self.noise.kappa = v,
            Param::NbarEnv => self.noise.nbar_env = v,
            Param::Time => self.noise.time = Some(v),
            Param::Epsilon => self.noise.epsilon = v,
            Param::HStrain => self.h_strain = Some(v),
            Param::Nu => self.detector.as_mut().ok_or_else(missing_detector)?.nu = v,
            Param::Temperature => self.detector.as_mut().ok_or_else(missing_detector)?.temperature = v,
            Param::QualityFactor => self.detector.as_mut().ok_or_else(missing_detector)?.quality_factor = v,
        }
        Ok(self)
    }

    /// Cartesian product of the sweep axes (first axis outermost), with the
    /// configuration at each point.
    pub fn grid(&self) -> Result<Vec<(Vec<f64>, ScenarioConfig)>, CliError> {
        let mut points = vec![(Vec::new(), self.clone())];
        for ax in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * ax.steps);
            for (vals, cfg) in &points {
                for v in ax.values() {
                    let mut vals = vals.clone();
                    vals.push(v);
                    next.push((vals, cfg.clone().apply(ax.parameter, v).map_err(CliError::Config)?));
                }
            }
            points = next;
        }
        Ok(points)
    }

    pub fn axis_names(&self) -> Vec<String> {
        self.sweep.iter().map(|a| a.parameter.name().to_string()).collect()
    }

    pub fn gamma_t(&self) -> Result<f64, CliError> {
        match (self.gamma_t, &self.detector) {
            (Some(gt), _) => Ok(gt),
            (None, Some(d)) => {
                let k = gravstat::physical::PhysicalConstants::si();
                let g = gravstat::physical::coupling_gamma(&k, &d.detector(), d.nu)?;
                Ok(g * d.t)
            }
            (None, None) => Err(CliError::Config("one of gamma_t or detector is required".into())),
        }
    }

    /// Elapsed time for the damped channel.
    pub fn channel_time(&self) -> Option<f64> {
        self.noise.time.or(self.detector.map(|d| d.t))
    }

    pub fn gw_params(&self, gamma_t: f64) -> Result<GwSignalParams64, CliError> {
        match &self.gw {
            Some(GwSpec::Direct(d)) => Ok(GwSignalParams64::new(
                Complex64::new(d.alpha_re, d.alpha_im),
                d.r,
                d.theta,
                d.nbar,
            )?),
            Some(GwSpec::Scaled(s)) => Ok(scaled_params(s.x_total, s.fraction_q, s.split.into(), gamma_t)?),
            None => Err(CliError::Config("a gw section is required".into())),
        }
    }
}
