//! Shared data model: the click-detector model, response matrices, photon-number
//! distributions and the collapse of a raw detector into an n-detector.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, PnrError, Result};
use crate::special::{compensated_sum, poisson_cover, poisson_pmf, poisson_tail_beyond};

/// Slack allowed when checking that a row is non-decreasing in `m`.
pub(crate) const MONOTONE_SLACK: f64 = 1e-12;

/// A single click detector: quantum efficiency and per-window dark-count probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClickModel")]
pub struct ClickModel {
    eta: f64,
    dark_prob: f64,
}

/// Deserialized form, checked by the constructor.
#[derive(Deserialize)]
struct RawClickModel {
    eta: f64,
    dark_prob: f64,
}

impl TryFrom<RawClickModel> for ClickModel {
    type Error = PnrError;

    fn try_from(r: RawClickModel) -> Result<Self> {
        Self::new(r.eta, r.dark_prob)
    }
}

impl ClickModel {
    pub fn new(eta: f64, dark_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return invalid(format!("efficiency must lie in [0, 1], got {eta}"));
        }
        if !(0.0..1.0).contains(&dark_prob) {
            return invalid(format!("dark-count probability must lie in [0, 1), got {dark_prob}"));
        }
        Ok(Self { eta, dark_prob })
    }

    /// Dark-count-free detector.
    pub fn ideal_dark(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dark_prob(&self) -> f64 {
        self.dark_prob
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        Self::new(eta, self.dark_prob)
    }

    pub fn with_dark_prob(self, dark_prob: f64) -> Result<Self> {
        Self::new(self.eta, dark_prob)
    }

    /// `Pr(click | photons) = 1 - (1 - p_d)(1 - eta)^photons`.
    pub fn click_probability(&self, photons: usize) -> f64 {
        let miss = (1.0 - self.eta).powi(photons.min(i32::MAX as usize) as i32);
        1.0 - (1.0 - self.dark_prob) * miss
    }
}

pub fn click_probability(model: &ClickModel, photons: usize) -> f64 {
    model.click_probability(photons)
}

/// Which configuration produced a response matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSource {
    Spatial {
        elements: usize,
        eta: f64,
        dark_prob: f64,
    },
    Temporal {
        segments: usize,
        coupler_efficiency: f64,
        eta: f64,
        effective_eta: f64,
        dark_prob: f64,
    },
    Loop {
        exit_prob: f64,
        loop_survival: f64,
        max_loops: usize,
        eta: f64,
        dark_prob: f64,
    },
    Custom {
        label: String,
    },
}

impl fmt::Display for DetectorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Spatial { elements, eta, dark_prob } => {
                write!(f, "spatial(M={elements}, eta={eta}, p_d={dark_prob})")
            }
            Self::Temporal { segments, coupler_efficiency, eta, effective_eta, dark_prob } => write!(
                f,
                "temporal(M={segments}, eta_c={coupler_efficiency}, eta={eta}, eta_eff={effective_eta}, p_d={dark_prob})"
            ),
            Self::Loop { exit_prob, loop_survival, max_loops, eta, dark_prob } => write!(
                f,
                "loop(T={exit_prob}, eta_l={loop_survival}, l={max_loops}, eta={eta}, p_d={dark_prob})"
            ),
            Self::Custom { label } => write!(f, "custom({label})"),
        }
    }
}

/// How far the infinite sums over input photon number are tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub m_max_override: Option<usize>,
    pub tail_tol: f64,
    pub monotone_probe_len: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { m_max_override: None, tail_tol: 1e-12, monotone_probe_len: 16 }
    }
}

impl TruncationPolicy {
    pub fn new(m_max_override: Option<usize>, tail_tol: f64, monotone_probe_len: usize) -> Result<Self> {
        if !(tail_tol > 0.0) {
            return invalid(format!("tail tolerance must be positive, got {tail_tol}"));
        }
        if monotone_probe_len < 2 {
            return invalid("monotone probe length must be at least 2");
        }
        Ok(Self { m_max_override, tail_tol, monotone_probe_len })
    }

    pub fn with_m_max(mut self, m_max: usize) -> Self {
        self.m_max_override = Some(m_max);
        self
    }

    /// Tabulation bound for an n-detector with `effective_elements` click slots.
    ///
    /// Without an override this is `max(4 M, n + 50)`, raised when needed so that a
    /// Poisson input of mean `mu_max` has less than `tail_tol` mass beyond it.
    pub fn resolve_m_max(&self, effective_elements: usize, n: usize, mu_max: Option<f64>) -> usize {
        if let Some(m) = self.m_max_override {
            return m;
        }
        let base = (4 * effective_elements).max(n + 50);
        match mu_max {
            Some(mu) if mu > 0.0 => base.max(poisson_cover(mu, self.tail_tol)),
            _ => base,
        }
    }
}

/// Conditional probabilities `P[k][m]` of output `k` given `m` input photons.
///
/// Rows run over outputs `0..=n_out`; when the matrix describes an n-detector the
/// last row holds `Pr(output >= n_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    n_out: usize,
    m_max: usize,
    entries: Vec<f64>,
    tail_monotone_verified: bool,
    source: DetectorSource,
    policy: TruncationPolicy,
}

impl ResponseMatrix {
    /// Builds a matrix from row-major entries (`(n_out + 1) * (m_max + 1)` values).
    /// Only the shape is checked; use [`validate_response`] for stochasticity.
    pub fn new(
        n_out: usize,
        m_max: usize,
        entries: Vec<f64>,
        source: DetectorSource,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        let expected = (n_out + 1) * (m_max + 1);
        if entries.len() != expected {
            return invalid(format!(
                "response matrix with {} rows and {} columns needs {expected} entries, got {}",
                n_out + 1,
                m_max + 1,
                entries.len()
            ));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite entry at row {}, column {}", i / (m_max + 1), i % (m_max + 1)));
        }
        let tail_monotone_verified = row_is_non_decreasing(&entries[n_out * (m_max + 1)..]);
        Ok(Self { n_out, m_max, entries, tail_monotone_verified, source, policy })
    }

    /// Builds a matrix from columns, each of length `n_out + 1`.
    pub fn from_columns(
        n_out: usize,
        columns: &[Vec<f64>],
        source: DetectorSource,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        if columns.is_empty() {
            return invalid("response matrix needs at least one column");
        }
        let m_max = columns.len() - 1;
        let mut entries = vec![0.0; (n_out + 1) * (m_max + 1)];
        for (m, col) in columns.iter().enumerate() {
            if col.len() != n_out + 1 {
                return invalid(format!("column {m} has {} entries, expected {}", col.len(), n_out + 1));
            }
            for (k, &v) in col.iter().enumerate() {
                entries[k * (m_max + 1) + m] = v;
            }
        }
        Self::new(n_out, m_max, entries, source, policy)
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn source(&self) -> &DetectorSource {
        &self.source
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    /// Whether the last row is non-decreasing over the whole tabulated range.
    pub fn tail_monotone_verified(&self) -> bool {
        self.tail_monotone_verified
    }

    pub fn get(&self, k: usize, m: usize) -> f64 {
        self.entries[k * (self.m_max + 1) + m]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.m_max + 1;
        &self.entries[k * w..(k + 1) * w]
    }

    pub fn column(&self, m: usize) -> Vec<f64> {
        (0..=self.n_out).map(|k| self.get(k, m)).collect()
    }

    /// Probability of the desired output for a Fock input of `m` photons:
    /// `P[m][m]` for `m <= n_out`, `P[n_out][m]` otherwise.
    pub fn desired_entry(&self, m: usize) -> f64 {
        self.get(m.min(self.n_out), m)
    }

    pub fn desired_row(&self) -> Vec<f64> {
        (0..=self.m_max).map(|m| self.desired_entry(m)).collect()
    }

    /// Re-tags the provenance of the matrix.
    pub fn with_source(mut self, source: DetectorSource) -> Self {
        self.source = source;
        self
    }

    /// Maps outputs through `k -> min(k, n)`.
    pub fn collapse_to_n(&self, n: usize) -> Result<Self> {
        collapse_to_n(self, n)
    }
}

fn row_is_non_decreasing(row: &[f64]) -> bool {
    row.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK)
}

pub fn collapse_to_n(raw: &ResponseMatrix, n: usize) -> Result<ResponseMatrix> {
    if n > raw.n_out {
        return invalid(format!("cannot collapse a {}-output matrix to n = {n}", raw.n_out));
    }
    if n == raw.n_out {
        return Ok(raw.clone());
    }
    let w = raw.m_max + 1;
    let mut entries = Vec::with_capacity((n + 1) * w);
    entries.extend_from_slice(&raw.entries[..n * w]);
    for m in 0..w {
        let merged = compensated_sum((n..=raw.n_out).map(|k| raw.get(k, m)));
        entries.push(merged);
    }
    ResponseMatrix::new(n, raw.m_max, entries, raw.source.clone(), raw.policy)
}

/// Location and value of an out-of-range matrix entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryFlag {
    pub k: usize,
    pub m: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDiagnostics {
    pub max_column_deviation: f64,
    pub worst_column: usize,
    pub negative_entries: Vec<EntryFlag>,
    pub entries_above_one: Vec<EntryFlag>,
    pub tail_monotone: bool,
    /// First `m` at which the last row decreases, if any.
    pub first_tail_violation: Option<usize>,
}

impl ResponseDiagnostics {
    pub const DEFAULT_SUM_TOL: f64 = 1e-9;

    /// No column deviates from unit sum by more than `sum_tol` and all entries lie in `[0, 1]`.
    pub fn passes(&self, sum_tol: f64) -> bool {
        self.max_column_deviation <= sum_tol && self.negative_entries.is_empty() && self.entries_above_one.is_empty()
    }
}

pub fn validate_response(matrix: &ResponseMatrix) -> ResponseDiagnostics {
    let mut max_dev = 0.0f64;
    let mut worst = 0;
    for m in 0..=matrix.m_max {
        let s = compensated_sum((0..=matrix.n_out).map(|k| matrix.get(k, m)));
        let dev = (s - 1.0).abs();
        if dev > max_dev {
            max_dev = dev;
            worst = m;
        }
    }
    let mut negative_entries = Vec::new();
    let mut entries_above_one = Vec::new();
    for k in 0..=matrix.n_out {
        for m in 0..=matrix.m_max {
            let value = matrix.get(k, m);
            if value < 0.0 {
                negative_entries.push(EntryFlag { k, m, value });
            } else if value > 1.0 {
                entries_above_one.push(EntryFlag { k, m, value });
            }
        }
    }
    let last = matrix.row(matrix.n_out);
    let first_tail_violation = last.windows(2).position(|w| w[1] < w[0] - MONOTONE_SLACK).map(|i| i + 1);
    ResponseDiagnostics {
        max_column_deviation: max_dev,
        worst_column: worst,
        negative_entries,
        entries_above_one,
        tail_monotone: first_tail_violation.is_none(),
        first_tail_violation,
    }
}

/// Photon-number distribution of an input signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhotonDistribution {
    Fock { m: usize },
    Poisson { mu: f64 },
    Mixture { components: Vec<(f64, PhotonDistribution)> },
}

impl PhotonDistribution {
    pub fn fock(m: usize) -> Self {
        Self::Fock { m }
    }

    pub fn poisson(mu: f64) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return invalid(format!("Poisson mean must be finite and non-negative, got {mu}"));
        }
        Ok(Self::Poisson { mu })
    }

    /// Convex combination; weights must be positive and sum to one within 1e-12.
    pub fn mixture(components: Vec<(f64, PhotonDistribution)>) -> Result<Self> {
        if components.is_empty() {
            return invalid("mixture needs at least one component");
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !(*w > 0.0)) {
            return invalid(format!("mixture weights must be positive, got {w}"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("mixture weights sum to {total}, not 1"));
        }
        Ok(Self::Mixture { components })
    }

    pub fn pmf(&self, m: usize) -> f64 {
        match self {
            Self::Fock { m: j } => f64::from(u8::from(*j == m)),
            Self::Poisson { mu } => poisson_pmf(*mu, m),
            Self::Mixture { components } => components.iter().map(|(w, d)| w * d.pmf(m)).sum(),
        }
    }

    /// Probability mass on photon numbers above `m_max`.
    pub fn tail_beyond(&self, m_max: usize) -> f64 {
        match self {
            Self::Fock { m } => f64::from(u8::from(*m > m_max)),
            Self::Poisson { mu } => poisson_tail_beyond(*mu, m_max),
            Self::Mixture { components } => components.iter().map(|(w, d)| w * d.tail_beyond(m_max)).sum(),
        }
    }
}

pub fn distribution_pmf(d: &PhotonDistribution, m: usize) -> f64 {
    d.pmf(m)
}

impl fmt::Display for PhotonDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fock { m } => write!(f, "fock:{m}"),
            Self::Poisson { mu } => write!(f, "poisson:{mu}"),
            Self::Mixture { components } => write!(f, "mixture:{}", components.len()),
        }
    }
}
