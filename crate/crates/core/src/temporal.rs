//! Fiber-coupler time-multiplexed detector.
//!
//! For accuracy purposes the coupler tree behaves exactly like a uniformly illuminated
//! spatial array of `M` segments whose efficiency is derated by one coupler pass per
//! splitting stage.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, PnrError, Result};
use crate::response::{ClickModel, DetectorSource, ResponseMatrix, TruncationPolicy};
use crate::spatial::{spatial_response_to, SpatialArrayConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTemporalArrayConfig")]
pub struct TemporalArrayConfig {
    effective_segments: usize,
    coupler_efficiency: f64,
    click: ClickModel,
}

/// Deserialized form, checked by the constructor.
#[derive(Deserialize)]
struct RawTemporalArrayConfig {
    effective_segments: usize,
    coupler_efficiency: f64,
    click: ClickModel,
}

impl TryFrom<RawTemporalArrayConfig> for TemporalArrayConfig {
    type Error = PnrError;

    fn try_from(r: RawTemporalArrayConfig) -> Result<Self> {
        Self::new(r.effective_segments, r.coupler_efficiency, r.click)
    }
}

impl TemporalArrayConfig {
    pub fn new(effective_segments: usize, coupler_efficiency: f64, click: ClickModel) -> Result<Self> {
        if effective_segments < 2 || !effective_segments.is_power_of_two() {
            return invalid(format!("effective segments must be a power of two >= 2, got {effective_segments}"));
        }
        if !(0.0..=1.0).contains(&coupler_efficiency) {
            return invalid(format!("coupler efficiency must lie in [0, 1], got {coupler_efficiency}"));
        }
        Ok(Self { effective_segments, coupler_efficiency, click })
    }

    pub fn effective_segments(&self) -> usize {
        self.effective_segments
    }

    pub fn coupler_efficiency(&self) -> f64 {
        self.coupler_efficiency
    }

    pub fn click(&self) -> ClickModel {
        self.click
    }

    pub fn effective_eta(&self) -> f64 {
        self.coupler_efficiency.powi(self.effective_segments.trailing_zeros() as i32) * self.click.eta()
    }

    /// The spatial array with the same accuracy.
    pub fn equivalent_spatial(&self) -> Result<SpatialArrayConfig> {
        let click = ClickModel::new(self.effective_eta(), self.click.dark_prob())?;
        SpatialArrayConfig::new(self.effective_segments, click)
    }

    pub fn source(&self) -> DetectorSource {
        DetectorSource::Temporal {
            segments: self.effective_segments,
            coupler_efficiency: self.coupler_efficiency,
            eta: self.click.eta(),
            effective_eta: self.effective_eta(),
            dark_prob: self.click.dark_prob(),
        }
    }
}

/// `eta_c^(log2 M) * eta`.
pub fn effective_efficiency(coupler_efficiency: f64, segments: usize, eta: f64) -> Result<f64> {
    if segments == 0 || !segments.is_power_of_two() {
        return invalid(format!("number of segments must be a power of two, got {segments}"));
    }
    Ok(coupler_efficiency.powi(segments.trailing_zeros() as i32) * eta)
}

pub fn temporal_response(
    config: &TemporalArrayConfig,
    n: usize,
    policy: &TruncationPolicy,
) -> Result<ResponseMatrix> {
    let m_max = policy.resolve_m_max(config.effective_segments, n, None);
    temporal_response_to(config, n, m_max, policy)
}

pub(crate) fn temporal_response_to(
    config: &TemporalArrayConfig,
    n: usize,
    m_max: usize,
    policy: &TruncationPolicy,
) -> Result<ResponseMatrix> {
    let spatial = config.equivalent_spatial()?;
    Ok(spatial_response_to(&spatial, n, m_max, policy)?.with_source(config.source()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::spatial_response;
    use approx::assert_relative_eq;

    #[test]
    fn effective_efficiency_examples() {
        assert_eq!(effective_efficiency(1.0, 16, 0.9).unwrap(), 0.9);
        assert_relative_eq!(effective_efficiency(0.99, 16, 0.95).unwrap(), 0.99f64.powi(4) * 0.95, epsilon = 1e-15);
        assert_eq!(effective_efficiency(0.5, 2, 1.0).unwrap(), 0.5);
        assert!(effective_efficiency(0.9, 12, 1.0).is_err());
        assert!(effective_efficiency(0.9, 0, 1.0).is_err());
    }

    #[test]
    fn config_requires_power_of_two() {
        let click = ClickModel::new(0.9, 0.0).unwrap();
        assert!(TemporalArrayConfig::new(1, 1.0, click).is_err());
        assert!(TemporalArrayConfig::new(6, 1.0, click).is_err());
        assert!(TemporalArrayConfig::new(8, 1.2, click).is_err());
    }

    #[test]
    fn lossless_couplers_match_spatial() {
        let click = ClickModel::new(0.83, 0.01).unwrap();
        let policy = TruncationPolicy::default();
        let t = temporal_response(&TemporalArrayConfig::new(16, 1.0, click).unwrap(), 6, &policy).unwrap();
        let s = spatial_response(&SpatialArrayConfig::new(16, click).unwrap(), 6, &policy).unwrap();
        for k in 0..=6 {
            assert_eq!(t.row(k), s.row(k));
        }
        assert!(matches!(t.source(), DetectorSource::Temporal { .. }));
    }

    #[test]
    fn single_photon_sees_derated_efficiency() {
        let click = ClickModel::new(1.0, 0.0).unwrap();
        let t = temporal_response(&TemporalArrayConfig::new(16, 0.99, click).unwrap(), 3, &Default::default())
            .unwrap();
        assert_relative_eq!(t.get(1, 1), 0.99f64.powi(4), epsilon = 1e-15);
        assert_eq!(t.column(0), vec![1.0, 0.0, 0.0, 0.0]);
    }
}
