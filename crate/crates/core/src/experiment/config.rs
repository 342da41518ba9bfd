//! Run configuration files (TOML).
//!
//! Every field that has a default is materialized on load, so serializing a
//! parsed config gives the fully resolved form written into output files.

use serde::{Deserialize, Serialize};

use crate::bath::OmegaRule;
use crate::ergotropy::SubsystemNormalization;
use crate::quench::{TOptRule, DEFAULT_GRID_POINTS, DEFAULT_T_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Spectrum,
    Wpd,
    Quench,
    QuenchSweep,
    Bath,
    BathSweep,
    IsotropicCheck,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Spectrum => "spectrum",
            Protocol::Wpd => "wpd",
            Protocol::Quench => "quench",
            Protocol::QuenchSweep => "quench-sweep",
            Protocol::Bath => "bath",
            Protocol::BathSweep => "bath-sweep",
            Protocol::IsotropicCheck => "isotropic-check",
        }
    }
}

/// A scalar, an explicit list, or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Single(f64),
    List(Vec<f64>),
    Range(Range),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Values {
    pub fn expand(&self) -> Vec<f64> {
        match self {
            Values::Single(x) => vec![*x],
            Values::List(v) => v.clone(),
            Values::Range(r) if r.points == 1 => vec![r.start],
            Values::Range(r) => {
                let step = (r.stop - r.start) / (r.points - 1) as f64;
                (0..r.points)
                    .map(|k| {
                        if k + 1 == r.points {
                            r.stop
                        } else {
                            r.start + k as f64 * step
                        }
                    })
                    .collect()
            }
        }
    }

    fn check(&self, key: &str) -> Result<(), String> {
        if let Values::Range(r) = self {
            if r.points == 0 {
                return Err(format!("`{key}`: a range needs at least one point"));
            }
        }
        let v = self.expand();
        if v.is_empty() {
            return Err(format!("`{key}`: value list is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(format!("`{key}`: values must be finite"));
        }
        Ok(())
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    /// Battery field; swept where the protocol allows.
    pub h_i: Values,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchConfig {
    pub h_c: Values,
    #[serde(default)]
    pub t_opt: TOptRule,
    /// Subsystem sizes `M` for ergotropy columns.
    #[serde(default)]
    pub subsystems: Vec<usize>,
    #[serde(default)]
    pub normalization: SubsystemNormalization,
}

/// Mode frequency: a number or a named rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSetting {
    Value(f64),
    Rule(OmegaRule),
}

impl Default for OmegaSetting {
    fn default() -> Self {
        OmegaSetting::Rule(OmegaRule::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub g: Values,
    #[serde(default)]
    pub omega: OmegaSetting,
    pub n_init: usize,
    pub n_max: usize,
}

fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_max: DEFAULT_T_MAX,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

fn default_levels() -> usize {
    5
}

fn default_threshold() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Number of gaps `eps_l - eps_0` reported per row.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Also write the doublet phase boundary table.
    #[serde(default)]
    pub boundary: bool,
    /// A doublet counts as degenerate below `threshold * bandwidth`.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            levels: default_levels(),
            boundary: false,
            threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WpdConfig {
    /// Bin the discrete distribution for plotting; absent keeps exact points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem; defaults to the protocol name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quench: Option<QuenchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathConfig>,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub wpd: WpdConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub key: Option<String>,
    pub line: Option<usize>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of the first `key =` (or `[key]`) in `text`.
fn find_line(text: &str, key: &str) -> Option<usize> {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(leaf)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.trim_end() == format!("[{leaf}]")
        })
        .map(|i| i + 1)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            ConfigError {
                message: e.message().to_string(),
                key: None,
                line,
            }
        })?;
        config.validate().map_err(|(key, message)| ConfigError {
            line: find_line(text, &key),
            key: Some(key),
            message,
        })?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    pub fn output_name(&self) -> String {
        self.output
            .name
            .clone()
            .unwrap_or_else(|| self.protocol.name().to_string())
    }

    /// Protocol-level checks that the schema alone cannot express.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |k: &str, m: String| Err((k.to_string(), m));
        let m = &self.model;
        if m.n == 0 {
            return err("model.n", "particle count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&m.gamma) {
            return err("model.gamma", format!("must lie in [0, 1], got {}", m.gamma));
        }
        m.h_i.check("model.h_i").or_else(|e| err("model.h_i", e))?;
        if self.time.points < 2 || !(self.time.t_max.is_finite() && self.time.t_max > 0.0) {
            return err("time", "need t_max > 0 and at least 2 points".into());
        }
        if let Some(w) = self.wpd.bin_width {
            if !(w.is_finite() && w > 0.0) {
                return err("wpd.bin_width", "must be positive".into());
            }
        }
        if let Some(name) = &self.output.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return err("output.name", "must be a plain file stem".into());
            }
        }
        match self.protocol {
            Protocol::Spectrum => {
                if self.spectrum.levels == 0 || self.spectrum.levels > m.n {
                    return err("spectrum.levels", format!("must lie in 1..={}", m.n));
                }
            }
            Protocol::Wpd | Protocol::Quench | Protocol::QuenchSweep => {
                let Some(q) = &self.quench else {
                    return err(
                        "quench",
                        format!("protocol `{}` needs a [quench] section", self.protocol.name()),
                    );
                };
                q.h_c.check("quench.h_c").or_else(|e| err("quench.h_c", e))?;
                if let Some(&bad) = q.subsystems.iter().find(|&&s| s == 0 || s > m.n) {
                    return err("quench.subsystems", format!("subsystem size {bad} outside 1..={}", m.n));
                }
            }
            Protocol::Bath | Protocol::BathSweep => {
                let Some(b) = &self.bath else {
                    return err(
                        "bath",
                        format!("protocol `{}` needs a [bath] section", self.protocol.name()),
                    );
                };
                b.g.check("bath.g").or_else(|e| err("bath.g", e))?;
                if b.n_max <= b.n_init + m.n {
                    return err(
                        "bath.n_max",
                        format!("Fock cutoff {} must exceed n_init + N = {}", b.n_max, b.n_init + m.n),
                    );
                }
            }
            Protocol::IsotropicCheck => {
                if m.gamma != 1.0 {
                    return err("model.gamma", "isotropic-check requires gamma = 1".into());
                }
                if m.lambda != 1.0 {
                    return err("model.lambda", "isotropic-check requires lambda = 1".into());
                }
                if m.h_i.expand().iter().any(|&h| h == 1.0 || h < 0.0) {
                    return err("model.h_i", "closed form needs h >= 0 and h != 1".into());
                }
                if let Some(q) = &self.quench {
                    q.h_c.check("quench.h_c").or_else(|e| err("quench.h_c", e))?;
                }
                if self.spectrum.levels > m.n {
                    return err("spectrum.levels", format!("must lie in 1..={}", m.n));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUENCH: &str = r#"
protocol = "quench-sweep"

[model]
n = 20
h_i = [0.5, 1.5]

[quench]
h_c = { start = 0.0, stop = 2.0, points = 5 }
subsystems = [10]
"#;

    #[test]
    fn defaults_are_materialized_and_round_trip() {
        let c = RunConfig::parse(QUENCH).unwrap();
        assert_eq!(c.model.lambda, 1.0);
        assert_eq!(c.time.points, DEFAULT_GRID_POINTS);
        assert_eq!(c.quench.as_ref().unwrap().h_c.expand(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.to_toml(), c.to_toml());
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = QUENCH.replace("subsystems = [10]", "subsystems = [10]\nsubsytems = [3]");
        let e = RunConfig::parse(&text).unwrap_err();
        assert!(e.message.contains("subsytems"), "{e}");
        assert_eq!(e.line, Some(11));
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let text = QUENCH.replace("subsystems = [10]", "subsystems = [30]");
        let e = RunConfig::parse(&text).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("quench.subsystems"));
        assert_eq!(e.line, Some(10));
        let e = RunConfig::parse("protocol = \"bath\"\n[model]\nn = 4\nh_i = 0.5\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("bath"));
    }

    #[test]
    fn omega_accepts_number_or_rule() {
        let base = "protocol = \"bath\"\n[model]\nn = 2\nh_i = 0.5\n[bath]\ng = 0.1\nn_init = 2\nn_max = 6\n";
        let c = RunConfig::parse(base).unwrap();
        assert_eq!(c.bath.unwrap().omega, OmegaSetting::Rule(OmegaRule::Coupling));
        let c = RunConfig::parse(&format!("{base}omega = \"resonant\"\n")).unwrap();
        assert_eq!(c.bath.unwrap().omega, OmegaSetting::Rule(OmegaRule::Resonant));
        let c = RunConfig::parse(&format!("{base}omega = 0.7\n")).unwrap();
        assert_eq!(c.bath.unwrap().omega, OmegaSetting::Value(0.7));
    }

    #[test]
    fn range_endpoints_are_exact() {
        let v = Values::Range(Range {
            start: 0.0,
            stop: 2.0,
            points: 201,
        })
        .expand();
        assert_eq!(v.len(), 201);
        assert_eq!(v[200], 2.0);
        assert!((v[100] - 1.0).abs() < 1e-15);
    }
}
