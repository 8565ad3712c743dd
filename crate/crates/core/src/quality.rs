//! Worst-case probability that an n-detector reports the correct class.
//!
//! For an input distribution `p` the desired-output probability is
//! `sum_{m<=n} P[m][m] p(m) + sum_{m>n} P[n][m] p(m)`, the quality `Q_n(F)` its
//! infimum over a family `F`. The objective is linear in `p`, so the infimum over a
//! convex hull is attained on the generating distributions, and over all
//! distributions on the Fock inputs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, PnrError, Result};
use crate::response::{PhotonDistribution, ResponseMatrix, MONOTONE_SLACK};
use crate::search::golden_section_min;
use crate::special::poisson_tail_beyond;
use statrs::function::factorial::ln_factorial;

/// Desired entries this close to the minimum count as ties when naming the witness.
const WITNESS_TIE_TOL: f64 = 1e-14;

/// Number of grid intervals scanned before refining a Poisson mean.
pub const POISSON_GRID_INTERVALS: usize = 400;
/// Width to which the worst-case Poisson mean is refined.
pub const POISSON_MEAN_TOL: f64 = 1e-6;

/// Family of input photon-number distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum DistributionSet {
    /// Every distribution on the non-negative integers.
    All,
    /// Poisson inputs with mean in `[0, mu_max]`; `None` caps the mean at `n`.
    Poisson { mu_max: Option<f64> },
    /// Convex hull of finitely many distributions.
    FiniteHull { bases: Vec<PhotonDistribution> },
}

impl DistributionSet {
    pub fn poisson_up_to_n() -> Self {
        Self::Poisson { mu_max: None }
    }

    pub fn poisson(mu_max: f64) -> Result<Self> {
        if !(mu_max >= 0.0 && mu_max.is_finite()) {
            return invalid(format!("mu_max must be finite and non-negative, got {mu_max}"));
        }
        Ok(Self::Poisson { mu_max: Some(mu_max) })
    }

    pub fn hull(bases: Vec<PhotonDistribution>) -> Result<Self> {
        if bases.is_empty() {
            return invalid("a finite hull needs at least one base distribution");
        }
        Ok(Self::FiniteHull { bases })
    }

    /// Largest Poisson mean the set contains for an `n`-detector.
    pub fn mean_bound(&self, n: usize) -> Option<f64> {
        match self {
            Self::All => None,
            Self::Poisson { mu_max } => Some(mu_max.unwrap_or(n as f64)),
            Self::FiniteHull { bases } => {
                let mut max: Option<f64> = None;
                for b in bases {
                    if let Some(mu) = largest_mean(b) {
                        max = Some(max.map_or(mu, |v: f64| v.max(mu)));
                    }
                }
                max
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::All => "full",
            Self::Poisson { .. } => "poisson",
            Self::FiniteHull { .. } => "hull",
        }
    }
}

fn largest_mean(d: &PhotonDistribution) -> Option<f64> {
    match d {
        PhotonDistribution::Fock { .. } => None,
        PhotonDistribution::Poisson { mu } => Some(*mu),
        PhotonDistribution::Mixture { components } => {
            components.iter().filter_map(|(_, c)| largest_mean(c)).reduce(f64::max)
        }
    }
}

/// The input attaining the worst case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Witness {
    Fock(usize),
    Poisson(f64),
    /// Index into the base list of a finite hull.
    Base(usize),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fock(m) => write!(f, "fock:{m}"),
            Self::Poisson(mu) => write!(f, "poisson:{mu:.6}"),
            Self::Base(i) => write!(f, "base:{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityResult {
    pub n: usize,
    pub value: f64,
    pub witness: Witness,
    /// Upper bound on how much the untabulated photon numbers could change `value`.
    pub truncation_bound: f64,
    /// False when the truncation could not be certified; `warnings` says why.
    pub truncation_verified: bool,
    pub warnings: Vec<String>,
}

/// Desired-output probability of one input, with the neglected tail mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Desired {
    pub value: f64,
    pub truncation_bound: f64,
}

fn collapsed(matrix: &ResponseMatrix, n: usize) -> Result<std::borrow::Cow<'_, ResponseMatrix>> {
    use std::borrow::Cow;
    match matrix.n_out().cmp(&n) {
        std::cmp::Ordering::Equal => Ok(Cow::Borrowed(matrix)),
        std::cmp::Ordering::Greater => Ok(Cow::Owned(matrix.collapse_to_n(n)?)),
        std::cmp::Ordering::Less => {
            invalid(format!("matrix resolves up to {} outputs, cannot evaluate n = {n}", matrix.n_out()))
        }
    }
}

/// Desired-output probability of input `d` for the n-detector `matrix` (`n = n_out`).
pub fn desired_probability(matrix: &ResponseMatrix, d: &PhotonDistribution) -> Result<Desired> {
    let m_max = matrix.m_max();
    let tol = matrix.policy().tail_tol;
    let tail = d.tail_beyond(m_max);
    if tail > tol {
        return Err(PnrError::Truncation { mass: tail, m_max, tol });
    }
    let value = (0..=m_max).map(|m| matrix.desired_entry(m) * d.pmf(m)).sum();
    Ok(Desired { value, truncation_bound: tail })
}

/// Quality over all distributions: the smallest desired entry over Fock inputs.
pub fn quality_full_set(matrix: &ResponseMatrix, n: usize) -> Result<QualityResult> {
    let matrix = collapsed(matrix, n)?;
    let desired = matrix.desired_row();
    let value = desired.iter().copied().fold(f64::INFINITY, f64::min);
    // Report the first input within round-off of the minimum rather than a rounding artefact.
    let witness = desired.iter().position(|&v| v <= value + WITNESS_TIE_TOL).unwrap_or(0);

    let probe = matrix.policy().monotone_probe_len;
    let mut warnings = Vec::new();
    let tabulated_tail = matrix.m_max().saturating_sub(n);
    let verified = if tabulated_tail < probe {
        warnings.push(format!(
            "only {tabulated_tail} photon numbers above n = {n} are tabulated, fewer than the probe length {probe}"
        ));
        false
    } else {
        let last = &desired[desired.len() - probe..];
        match last.windows(2).position(|w| w[1] < w[0] - MONOTONE_SLACK) {
            None => true,
            Some(i) => {
                warnings.push(format!(
                    "P[{n}][m] decreases at m = {} inside the tail probe; the infimum over untabulated m is not certified",
                    desired.len() - probe + i + 1
                ));
                false
            }
        }
    };
    for w in &warnings {
        log::warn!("{}: {w}", matrix.source());
    }
    Ok(QualityResult {
        n,
        value,
        witness: Witness::Fock(witness),
        truncation_bound: if verified { 0.0 } else { value },
        truncation_verified: verified,
        warnings,
    })
}

/// Quality over Poisson inputs with mean in `[0, mu_max]`: dense grid scan followed by
/// golden-section refinement around the best grid point.
pub fn quality_poisson(matrix: &ResponseMatrix, n: usize, mu_max: f64) -> Result<QualityResult> {
    if !(mu_max >= 0.0 && mu_max.is_finite()) {
        return invalid(format!("mu_max must be finite and non-negative, got {mu_max}"));
    }
    let matrix = collapsed(matrix, n)?;
    let m_max = matrix.m_max();
    let tol = matrix.policy().tail_tol;
    let tail = poisson_tail_beyond(mu_max, m_max);
    if tail > tol {
        return Err(PnrError::Truncation { mass: tail, m_max, tol });
    }

    let desired = matrix.desired_row();
    let ln_fact: Vec<f64> = (0..=m_max).map(|m| ln_factorial(m as u64)).collect();
    let objective = |mu: f64| -> f64 {
        if mu <= 0.0 {
            return desired[0];
        }
        let ln_mu = mu.ln();
        desired.iter().zip(&ln_fact).enumerate().map(|(m, (r, lf))| r * (m as f64 * ln_mu - mu - lf).exp()).sum()
    };

    let (mut best_mu, mut best) = (0.0, objective(0.0));
    if mu_max > 0.0 {
        let step = mu_max / POISSON_GRID_INTERVALS as f64;
        let mut best_i = 0;
        for i in 1..=POISSON_GRID_INTERVALS {
            let v = objective(step * i as f64);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        best_mu = step * best_i as f64;
        let lo = step * best_i.saturating_sub(1) as f64;
        let hi = (step * (best_i + 1) as f64).min(mu_max);
        let (mu, v) = golden_section_min(objective, lo, hi, POISSON_MEAN_TOL);
        if v < best {
            best = v;
            best_mu = mu;
        }
    }
    Ok(QualityResult {
        n,
        value: best,
        witness: Witness::Poisson(best_mu),
        truncation_bound: tail,
        truncation_verified: true,
        warnings: Vec::new(),
    })
}

/// Quality over the convex hull of `bases`: the minimum over the bases themselves.
pub fn quality_finite_hull(matrix: &ResponseMatrix, n: usize, bases: &[PhotonDistribution]) -> Result<QualityResult> {
    if bases.is_empty() {
        return invalid("a finite hull needs at least one base distribution");
    }
    let matrix = collapsed(matrix, n)?;
    let mut best: Option<(usize, Desired)> = None;
    let mut bound = 0.0f64;
    for (i, d) in bases.iter().enumerate() {
        let v = desired_probability(&matrix, d)?;
        bound = bound.max(v.truncation_bound);
        if best.is_none_or(|(_, b)| v.value < b.value) {
            best = Some((i, v));
        }
    }
    let (i, v) = best.expect("non-empty bases");
    Ok(QualityResult {
        n,
        value: v.value,
        witness: Witness::Base(i),
        truncation_bound: bound,
        truncation_verified: true,
        warnings: Vec::new(),
    })
}

pub fn quality(matrix: &ResponseMatrix, n: usize, set: &DistributionSet) -> Result<QualityResult> {
    match set {
        DistributionSet::All => quality_full_set(matrix, n),
        DistributionSet::Poisson { mu_max } => quality_poisson(matrix, n, mu_max.unwrap_or(n as f64)),
        DistributionSet::FiniteHull { bases } => quality_finite_hull(matrix, n, bases),
    }
}
