//! Inverse problems and rectangular sweeps over detector parameters.
//!
//! Bisection is only used where quality is expected to be monotone (efficiency,
//! element count), and each solve first checks that expectation on a coarse scan.
//! Dark-count probability is swept, never bisected: quality is not monotone in it.

use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, Parameter};
use crate::error::{invalid, PnrError, Result};
use crate::par::map_ordered;
use crate::quality::{quality, DistributionSet, QualityResult};
use crate::response::{ClickModel, ResponseMatrix, TruncationPolicy, MONOTONE_SLACK};
use crate::search::bisect_threshold;

/// Upper limit of the element-count search.
pub const MAX_ELEMENTS: usize = 4096;
/// Number of equally spaced efficiencies in the monotonicity pre-scan.
pub const ETA_PRESCAN_POINTS: usize = 11;

/// Ordered parameter values of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    parameter: String,
    values: Vec<f64>,
}

impl SweepGrid {
    pub fn new(parameter: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return invalid(format!("sweep values must be finite, got {v}"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("sweep values must be strictly increasing");
        }
        Ok(Self { parameter: parameter.into(), values })
    }

    /// `start, start + step, ...` up to and including `end` (within a tenth of a step).
    pub fn linspace(parameter: impl Into<String>, start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return invalid(format!("sweep step must be positive, got {step}"));
        }
        let count = ((end - start) / step + 0.1).floor();
        if count < 0.0 {
            return invalid(format!("empty range {start}..{end}"));
        }
        let values = (0..=count as usize).map(|i| start + step * i as f64).collect();
        Self::new(parameter, values)
    }

    pub fn parameter(&self) -> &str {
        &self.parameter
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Smallest efficiency found with `Q_n >= target`.
    pub threshold: f64,
    /// `(lo, hi)` with `Q_n(lo) < target <= Q_n(hi)` and `hi == threshold`.
    pub interval: (f64, f64),
    pub evaluations: usize,
    pub target: f64,
    pub quality_at_threshold: f64,
    /// The pre-scan was not monotone and an exhaustive scan was used instead.
    pub fallback_scan: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinElementsResult {
    pub elements: usize,
    pub quality: f64,
    pub evaluations: usize,
    pub fallback_scan: bool,
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub n: usize,
    pub result: QualityResult,
}

/// Quality of `config` as an `n`-detector on `set`.
pub fn evaluate(config: &DetectorConfig, n: usize, set: &DistributionSet, policy: &TruncationPolicy) -> Result<QualityResult> {
    let matrix = config.response(n, policy, set.mean_bound(n))?;
    quality(&matrix, n, set)
}

/// Quality for every `n` in `0..=n_top` from one response matrix.
pub fn quality_profile(
    config: &DetectorConfig,
    set: &DistributionSet,
    n_top: usize,
    policy: &TruncationPolicy,
) -> Result<Vec<QualityResult>> {
    let matrix = config.response(n_top, policy, set.mean_bound(n_top))?;
    profile_from(&matrix, set, 0..=n_top)
}

fn profile_from(
    matrix: &ResponseMatrix,
    set: &DistributionSet,
    ns: impl IntoIterator<Item = usize>,
) -> Result<Vec<QualityResult>> {
    ns.into_iter().map(|n| quality(matrix, n, set)).collect()
}

/// Smallest efficiency at which `template` reaches `Q_n >= target`.
pub fn eta_threshold(
    template: &DetectorConfig,
    n: usize,
    target: f64,
    set: &DistributionSet,
    tol: f64,
    policy: &TruncationPolicy,
) -> Result<ThresholdResult> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let q_at = |eta: f64| -> Result<f64> { Ok(evaluate(&template.with_eta(eta)?, n, set, policy)?.value) };

    let top = q_at(1.0)?;
    if top < target {
        return Err(PnrError::NoSolution(format!(
            "Q_{n} = {top:.6} at unit efficiency is below the target {target}"
        )));
    }

    let grid: Vec<f64> = (0..ETA_PRESCAN_POINTS).map(|i| i as f64 / (ETA_PRESCAN_POINTS - 1) as f64).collect();
    let scan: Vec<f64> = map_ordered(&grid, |&eta| q_at(eta)).into_iter().collect::<Result<_>>()?;
    let mut evaluations = 1 + scan.len();
    let monotone = scan.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK);

    if monotone {
        let first = scan.iter().position(|&v| v >= target).expect("scan ends at unit efficiency");
        if first == 0 {
            return Ok(ThresholdResult {
                threshold: 0.0,
                interval: (0.0, 0.0),
                evaluations,
                target,
                quality_at_threshold: scan[0],
                fallback_scan: false,
            });
        }
        let mut failure = None;
        let ((lo, hi), used) = bisect_threshold(
            |eta| match q_at(eta) {
                Ok(v) => v >= target,
                Err(e) => {
                    failure.get_or_insert(e);
                    true
                }
            },
            grid[first - 1],
            grid[first],
            tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        evaluations += used + 1;
        return Ok(ThresholdResult {
            threshold: hi,
            interval: (lo, hi),
            evaluations,
            target,
            quality_at_threshold: q_at(hi)?,
            fallback_scan: false,
        });
    }

    log::warn!("quality is not monotone in efficiency for {template}; scanning exhaustively");
    let steps = (1.0 / tol).ceil() as usize;
    let fine: Vec<f64> = (0..=steps).map(|i| (i as f64 * tol).min(1.0)).collect();
    let values: Vec<f64> = map_ordered(&fine, |&eta| q_at(eta)).into_iter().collect::<Result<_>>()?;
    evaluations += values.len();
    let i = values.iter().position(|&v| v >= target).expect("unit efficiency reaches the target");
    Ok(ThresholdResult {
        threshold: fine[i],
        interval: (if i == 0 { 0.0 } else { fine[i - 1] }, fine[i]),
        evaluations,
        target,
        quality_at_threshold: values[i],
        fallback_scan: true,
    })
}

/// Leading-order element count `n^2 / (2 (n ln eta - ln q))` for a spatial array.
pub fn approx_min_elements(n: usize, eta: f64, target: f64) -> Result<f64> {
    let denom = n as f64 * eta.ln() - target.ln();
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(PnrError::NoSolution(format!(
            "n ln(eta) - ln(q) = {denom} is not positive for n = {n}, eta = {eta}, q = {target}"
        )));
    }
    Ok(0.5 * (n * n) as f64 / denom)
}

/// Smallest spatial array reaching `Q_n >= target`.
pub fn min_elements(
    n: usize,
    click: ClickModel,
    target: f64,
    set: &DistributionSet,
    policy: &TruncationPolicy,
) -> Result<MinElementsResult> {
    let eta = click.eta();
    if n >= 2 && click.dark_prob() == 0.0 && eta.powi(n as i32) <= target {
        return Err(PnrError::NoSolution(format!(
            "Q_{n} < eta^{n} = {:.6} <= {target} for every array size without dark counts",
            eta.powi(n as i32)
        )));
    }
    let q_at = |elements: usize| -> Result<f64> {
        Ok(evaluate(&DetectorConfig::spatial(elements, click)?, n, set, policy)?.value)
    };

    let start = n.max(1);
    let mut visited: Vec<(usize, f64)> = Vec::new();
    let mut m = start;
    loop {
        let v = q_at(m)?;
        visited.push((m, v));
        if v >= target {
            break;
        }
        if m >= MAX_ELEMENTS {
            return Err(PnrError::NoSolution(format!(
                "no array of up to {MAX_ELEMENTS} elements reaches Q_{n} >= {target}"
            )));
        }
        m = (2 * m).min(MAX_ELEMENTS);
    }
    let mut evaluations = visited.len();
    let monotone = visited.windows(2).all(|w| w[1].1 >= w[0].1 - MONOTONE_SLACK);

    if !monotone {
        log::warn!("Q_{n} is not monotone in the element count; scanning exhaustively");
        for elements in start..=MAX_ELEMENTS {
            let v = q_at(elements)?;
            evaluations += 1;
            if v >= target {
                return Ok(MinElementsResult { elements, quality: v, evaluations, fallback_scan: true });
            }
        }
        unreachable!("the doubling search reached the target within the cap");
    }

    let (mut hi, mut q_hi) = *visited.last().expect("at least one evaluation");
    if visited.len() == 1 {
        return Ok(MinElementsResult { elements: hi, quality: q_hi, evaluations, fallback_scan: false });
    }
    let mut lo = visited[visited.len() - 2].0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let v = q_at(mid)?;
        evaluations += 1;
        if v >= target {
            hi = mid;
            q_hi = v;
        } else {
            lo = mid;
        }
    }
    Ok(MinElementsResult { elements: hi, quality: q_hi, evaluations, fallback_scan: false })
}

/// Qualities on a rectangular grid of `parameter` values and output classes.
/// Rows are ordered by grid value, then by the order of `n_list`.
pub fn quality_sweep(
    template: &DetectorConfig,
    parameter: Parameter,
    grid: &SweepGrid,
    n_list: &[usize],
    set: &DistributionSet,
    policy: &TruncationPolicy,
) -> Result<Vec<SweepPoint>> {
    let Some(&n_top) = n_list.iter().max() else {
        return Ok(Vec::new());
    };
    let per_value = map_ordered(grid.values(), |&value| -> Result<Vec<SweepPoint>> {
        let config = template.with_parameter(parameter, value)?;
        let matrix = config.response(n_top, policy, set.mean_bound(n_top))?;
        n_list
            .iter()
            .map(|&n| Ok(SweepPoint { value, n, result: quality(&matrix, n, set)? }))
            .collect()
    });
    let mut rows = Vec::with_capacity(grid.values().len() * n_list.len());
    for chunk in per_value {
        rows.extend(chunk?);
    }
    Ok(rows)
}

pub fn dark_sweep(
    template: &DetectorConfig,
    n_list: &[usize],
    grid: &SweepGrid,
    set: &DistributionSet,
    policy: &TruncationPolicy,
) -> Result<Vec<SweepPoint>> {
    if let Some(v) = grid.values().iter().find(|v| !(0.0..1.0).contains(*v)) {
        return invalid(format!("dark-count probabilities must lie in [0, 1), got {v}"));
    }
    quality_sweep(template, Parameter::DarkProb, grid, n_list, set, policy)
}

/// Largest `n` with `Q_n >= target`, or 0 if even `n = 0` fails.
pub fn max_resolvable(
    config: &DetectorConfig,
    set: &DistributionSet,
    target: f64,
    policy: &TruncationPolicy,
) -> Result<usize> {
    let limit = config.max_output();
    let mut n_top = limit.min(16);
    loop {
        let profile = quality_profile(config, set, n_top, policy)?;
        match profile.iter().position(|r| r.value < target) {
            Some(0) => return Ok(0),
            Some(i) => return Ok(i - 1),
            None if n_top == limit => return Ok(limit),
            None => n_top = (2 * n_top).min(limit),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::DetectorSource;
    use approx::assert_relative_eq;

    #[test]
    fn grid_validation() {
        assert!(SweepGrid::new("eta", vec![0.1, 0.1]).is_err());
        assert!(SweepGrid::new("eta", vec![0.2, 0.1]).is_err());
        assert!(SweepGrid::new("eta", vec![]).is_ok());
        let g = SweepGrid::linspace("dark_prob", 0.0, 0.1, 0.01).unwrap();
        assert_eq!(g.values().len(), 11);
        assert_relative_eq!(*g.values().last().unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn approx_scaling_examples() {
        assert_relative_eq!(approx_min_elements(10, 1.0, 0.5).unwrap(), 50.0 / 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(approx_min_elements(5, 1.0, 0.5).unwrap(), 12.5 / 2f64.ln(), epsilon = 1e-12);
        assert!(approx_min_elements(5, 1.0, 1.0).is_err());
        assert!(approx_min_elements(10, 0.9, 0.5).is_err());
        assert!(approx_min_elements(3, 0.9, 0.5).is_ok());
    }

    #[test]
    fn threshold_of_single_click_detector() {
        // Q_1 of a lone click detector equals its efficiency.
        let template = DetectorConfig::spatial(1, ClickModel::new(1.0, 0.0).unwrap()).unwrap();
        let r = eta_threshold(&template, 1, 0.5, &DistributionSet::All, 1e-4, &Default::default()).unwrap();
        assert!((r.threshold - 0.5).abs() <= 1e-4);
        assert!(r.interval.1 - r.interval.0 <= 1e-4);
        assert!(!r.fallback_scan);
    }

    #[test]
    fn threshold_without_solution() {
        let template = DetectorConfig::spatial(2, ClickModel::new(1.0, 0.0).unwrap()).unwrap();
        let r = eta_threshold(&template, 2, 0.9, &DistributionSet::All, 1e-3, &Default::default());
        assert!(matches!(r, Err(PnrError::NoSolution(_))));
    }

    #[test]
    fn min_elements_small_cases() {
        let click = ClickModel::new(1.0, 0.0).unwrap();
        let p = TruncationPolicy::default();
        assert_eq!(min_elements(1, click, 0.5, &DistributionSet::All, &p).unwrap().elements, 1);
        assert_eq!(min_elements(3, click, 0.5, &DistributionSet::All, &p).unwrap().elements, 6);
        let lossy = ClickModel::new(0.8, 0.0).unwrap();
        assert!(matches!(
            min_elements(4, lossy, 0.5, &DistributionSet::All, &p),
            Err(PnrError::NoSolution(_))
        ));
    }

    #[test]
    fn dark_sweep_rejects_out_of_range_grid() {
        let t = DetectorConfig::spatial(4, ClickModel::new(0.9, 0.0).unwrap()).unwrap();
        let g = SweepGrid::new("dark_prob", vec![0.5, 1.0]).unwrap();
        assert!(dark_sweep(&t, &[1], &g, &DistributionSet::All, &Default::default()).is_err());
    }

    #[test]
    fn dark_sweep_zero_matches_dark_free_quality() {
        let t = DetectorConfig::spatial(16, ClickModel::new(0.95, 0.0).unwrap()).unwrap();
        let g = SweepGrid::new("dark_prob", vec![0.0, 0.02]).unwrap();
        let rows = dark_sweep(&t, &[2, 3], &g, &DistributionSet::All, &Default::default()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].value, rows[0].n, rows[1].n, rows[2].value), (0.0, 2, 3, 0.02));
        let direct = evaluate(&t, 3, &DistributionSet::All, &Default::default()).unwrap();
        assert_eq!(rows[1].result.value, direct.value);
    }

    #[test]
    fn empty_n_list_gives_empty_sweep() {
        let t = DetectorConfig::spatial(4, ClickModel::new(0.9, 0.0).unwrap()).unwrap();
        let g = SweepGrid::new("eta", vec![0.5]).unwrap();
        assert!(quality_sweep(&t, Parameter::Eta, &g, &[], &DistributionSet::All, &Default::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn max_resolvable_of_ideal_single_detector() {
        let c = DetectorConfig::spatial(1, ClickModel::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(max_resolvable(&c, &DistributionSet::All, 0.5, &Default::default()).unwrap(), 1);
        assert!(matches!(c.source(), DetectorSource::Spatial { elements: 1, .. }));
    }
}
