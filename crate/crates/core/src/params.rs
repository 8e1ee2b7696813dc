//! Morris-Lecar parameter set and its flat key-value text format.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The named constants of the two-variable Morris-Lecar model plus the
/// channel-noise amplitude `sigma_star`.
///
/// Units: potentials in mV, conductances in uS/cm^2, capacitance in uF/cm^2,
/// `phi` in 1/ms, input current in uA/cm^2; `sigma_star` is dimensionless.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MLParameters {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v4: f64,
    pub g_ca: f64,
    pub g_k: f64,
    pub g_l: f64,
    pub v_ca: f64,
    pub v_k: f64,
    pub v_l: f64,
    pub c: f64,
    pub phi: f64,
    pub i_app: f64,
    pub sigma_star: f64,
}

impl Default for MLParameters {
    /// The reference parameter set used throughout: a stable focus inside an
    /// unstable limit cycle at I = 90 uA/cm^2.
    fn default() -> Self {
        Self {
            v1: -1.2,
            v2: 18.0,
            v3: 2.0,
            v4: 30.0,
            g_ca: 4.4,
            g_k: 8.0,
            g_l: 2.0,
            v_ca: 120.0,
            v_k: -84.0,
            v_l: -60.0,
            c: 20.0,
            phi: 0.04,
            i_app: 90.0,
            sigma_star: 0.05,
        }
    }
}

/// Keys of the text format, in serialization order.
const KEYS: [&str; 14] = [
    "V1", "V2", "V3", "V4", "gCa", "gK", "gL", "VCa", "VK", "VL", "C", "phi", "I", "sigma_star",
];

impl MLParameters {
    /// Structural validity: positive capacitance and rate scale, nonzero
    /// slope scales, nonnegative conductances, `sigma_star` in (0, 1].
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.c > 0.0) {
            problems.push("C must be > 0");
        }
        if !(self.phi > 0.0) {
            problems.push("phi must be > 0");
        }
        if self.v2 == 0.0 {
            problems.push("V2 must be nonzero");
        }
        if self.v4 == 0.0 {
            problems.push("V4 must be nonzero");
        }
        if self.g_ca < 0.0 || self.g_k < 0.0 || self.g_l < 0.0 {
            problems.push("conductances must be >= 0");
        }
        if !(self.sigma_star > 0.0 && self.sigma_star <= 1.0) {
            problems.push("sigma_star must be in (0, 1]");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ParameterFile(problems.join("; ")))
        }
    }

    pub fn with_sigma_star(mut self, sigma_star: f64) -> Self {
        self.sigma_star = sigma_star;
        self
    }

    fn field(&self, key: &str) -> f64 {
        match key {
            "V1" => self.v1,
            "V2" => self.v2,
            "V3" => self.v3,
            "V4" => self.v4,
            "gCa" => self.g_ca,
            "gK" => self.g_k,
            "gL" => self.g_l,
            "VCa" => self.v_ca,
            "VK" => self.v_k,
            "VL" => self.v_l,
            "C" => self.c,
            "phi" => self.phi,
            "I" => self.i_app,
            "sigma_star" => self.sigma_star,
            _ => unreachable!("unknown key {key}"),
        }
    }

    fn field_mut(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "V1" => &mut self.v1,
            "V2" => &mut self.v2,
            "V3" => &mut self.v3,
            "V4" => &mut self.v4,
            "gCa" => &mut self.g_ca,
            "gK" => &mut self.g_k,
            "gL" => &mut self.g_l,
            "VCa" => &mut self.v_ca,
            "VK" => &mut self.v_k,
            "VL" => &mut self.v_l,
            "C" => &mut self.c,
            "phi" => &mut self.phi,
            "I" => &mut self.i_app,
            "sigma_star" => &mut self.sigma_star,
            _ => return None,
        })
    }

    /// Serialize as `key = value` lines, one per field.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(&format!("{key} = {}\n", self.field(key)));
        }
        out
    }

    /// Parse the flat key-value format. Missing keys keep their default
    /// value; unknown or repeated keys and malformed numbers are errors.
    /// `#` starts a comment; blank lines are ignored.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut p = Self::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ParameterFile(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.contains(&key.to_string()) {
                return Err(Error::ParameterFile(format!("line {}: repeated key {key}", lineno + 1)));
            }
            let slot = p.field_mut(key).ok_or_else(|| {
                Error::ParameterFile(format!("line {}: unknown key {key}", lineno + 1))
            })?;
            *slot = value.parse::<f64>().map_err(|e| {
                Error::ParameterFile(format!("line {}: bad value for {key}: {e}", lineno + 1))
            })?;
            seen.push(key.to_string());
        }
        p.validate()?;
        Ok(p)
    }
}
