use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::loop_detector::{loop_response_to, LoopDetectorConfig};
use crate::response::{ClickModel, DetectorSource, ResponseMatrix, TruncationPolicy};
use crate::spatial::{spatial_response_to, SpatialArrayConfig};
use crate::temporal::{temporal_response_to, TemporalArrayConfig};

/// Any of the three multiplexed architectures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum DetectorConfig {
    Spatial(SpatialArrayConfig),
    Temporal(TemporalArrayConfig),
    Loop(LoopDetectorConfig),
}

/// A scalar knob of a detector configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Eta,
    DarkProb,
    CouplerEfficiency,
    ExitProb,
    LoopSurvival,
}

impl Parameter {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Eta => "eta",
            Self::DarkProb => "dark_prob",
            Self::CouplerEfficiency => "coupler_efficiency",
            Self::ExitProb => "exit_prob",
            Self::LoopSurvival => "loop_survival",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl DetectorConfig {
    pub fn spatial(elements: usize, click: ClickModel) -> Result<Self> {
        Ok(Self::Spatial(SpatialArrayConfig::new(elements, click)?))
    }

    pub fn temporal(segments: usize, coupler_efficiency: f64, click: ClickModel) -> Result<Self> {
        Ok(Self::Temporal(TemporalArrayConfig::new(segments, coupler_efficiency, click)?))
    }

    pub fn looped(exit_prob: f64, loop_survival: f64, max_loops: usize, click: ClickModel) -> Result<Self> {
        Ok(Self::Loop(LoopDetectorConfig::new(exit_prob, loop_survival, max_loops, click)?))
    }

    pub fn click(&self) -> ClickModel {
        match self {
            Self::Spatial(c) => c.click(),
            Self::Temporal(c) => c.click(),
            Self::Loop(c) => c.click(),
        }
    }

    /// Largest output the detector can produce: elements, segments or passes.
    pub fn max_output(&self) -> usize {
        match self {
            Self::Spatial(c) => c.elements(),
            Self::Temporal(c) => c.effective_segments(),
            Self::Loop(c) => c.max_loops(),
        }
    }

    pub fn source(&self) -> DetectorSource {
        match self {
            Self::Spatial(c) => c.source(),
            Self::Temporal(c) => c.source(),
            Self::Loop(c) => c.source(),
        }
    }

    fn with_click(&self, click: ClickModel) -> Result<Self> {
        match self {
            Self::Spatial(c) => Self::spatial(c.elements(), click),
            Self::Temporal(c) => Self::temporal(c.effective_segments(), c.coupler_efficiency(), click),
            Self::Loop(c) => Self::looped(c.exit_prob(), c.loop_survival(), c.max_loops(), click),
        }
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        self.with_click(self.click().with_eta(eta)?)
    }

    pub fn with_dark_prob(&self, dark_prob: f64) -> Result<Self> {
        self.with_click(self.click().with_dark_prob(dark_prob)?)
    }

    /// Replaces the element (spatial) or segment (temporal) count.
    pub fn with_elements(&self, elements: usize) -> Result<Self> {
        match self {
            Self::Spatial(c) => Self::spatial(elements, c.click()),
            Self::Temporal(c) => Self::temporal(elements, c.coupler_efficiency(), c.click()),
            Self::Loop(_) => invalid("a loop detector has no element count"),
        }
    }

    pub fn with_parameter(&self, parameter: Parameter, value: f64) -> Result<Self> {
        match (parameter, self) {
            (Parameter::Eta, _) => self.with_eta(value),
            (Parameter::DarkProb, _) => self.with_dark_prob(value),
            (Parameter::CouplerEfficiency, Self::Temporal(c)) => {
                Self::temporal(c.effective_segments(), value, c.click())
            }
            (Parameter::ExitProb, Self::Loop(c)) => Self::looped(value, c.loop_survival(), c.max_loops(), c.click()),
            (Parameter::LoopSurvival, Self::Loop(c)) => Self::looped(c.exit_prob(), value, c.max_loops(), c.click()),
            (p, d) => invalid(format!("parameter {p} does not apply to {}", d.source())),
        }
    }

    pub fn parameter(&self, parameter: Parameter) -> Option<f64> {
        match (parameter, self) {
            (Parameter::Eta, _) => Some(self.click().eta()),
            (Parameter::DarkProb, _) => Some(self.click().dark_prob()),
            (Parameter::CouplerEfficiency, Self::Temporal(c)) => Some(c.coupler_efficiency()),
            (Parameter::ExitProb, Self::Loop(c)) => Some(c.exit_prob()),
            (Parameter::LoopSurvival, Self::Loop(c)) => Some(c.loop_survival()),
            _ => None,
        }
    }

    /// Response collapsed to an `n`-detector, tabulated far enough that a Poisson
    /// input of mean up to `mu_max` is covered.
    pub fn response(&self, n: usize, policy: &TruncationPolicy, mu_max: Option<f64>) -> Result<ResponseMatrix> {
        let m_max = policy.resolve_m_max(self.max_output(), n, mu_max);
        match self {
            Self::Spatial(c) => spatial_response_to(c, n, m_max, policy),
            Self::Temporal(c) => temporal_response_to(c, n, m_max, policy),
            Self::Loop(c) => loop_response_to(c, n, m_max, policy),
        }
    }
}

impl fmt::Display for DetectorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.source().fmt(f)
    }
}
