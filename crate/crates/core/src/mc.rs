//! Monte Carlo simulation of the detectors, used to check the analytic responses.
//!
//! Trials are grouped in fixed chunks; chunk `c` draws from a ChaCha8 stream keyed by
//! `(seed, c)`, so results do not depend on how chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detector::DetectorConfig;
use crate::error::{invalid, Result};
use crate::loop_detector::LoopDetectorConfig;
use crate::par::map_ordered;
use crate::spatial::SpatialArrayConfig;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;
/// Trials per RNG stream.
pub const CHUNK_TRIALS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRun {
    pub trials: u64,
    pub seed: u64,
    pub config: DetectorConfig,
    /// Input photon number.
    pub photons: usize,
    /// Outputs are collapsed at this class.
    pub n: usize,
}

impl McRun {
    pub fn new(trials: u64, seed: u64, config: DetectorConfig, photons: usize, n: usize) -> Result<Self> {
        if trials == 0 {
            return invalid("at least one trial is required");
        }
        if n > config.max_output() {
            return invalid(format!("{config} cannot produce output class {n}"));
        }
        Ok(Self { trials, seed, config, photons, n })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McHistogram {
    counts: Vec<u64>,
    trials: u64,
}

impl McHistogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return invalid("a histogram needs at least one class");
        }
        let trials = counts.iter().sum();
        if trials == 0 {
            return invalid("a histogram needs at least one trial");
        }
        Ok(Self { counts, trials })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn n(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.trials as f64).collect()
    }

    /// Binomial standard error of each empirical frequency.
    pub fn standard_errors(&self) -> Vec<f64> {
        let n = self.trials as f64;
        self.frequencies().iter().map(|f| (f * (1.0 - f) / n).sqrt()).collect()
    }

    /// Adds another histogram of the same shape.
    pub fn merge(&mut self, other: &McHistogram) -> Result<()> {
        if other.counts.len() != self.counts.len() {
            return invalid("cannot merge histograms with different class counts");
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.trials += other.trials;
        Ok(())
    }
}

fn chunked<F>(run: &McRun, trial: F) -> McHistogram
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync + Send,
{
    let chunks = run.trials.div_ceil(CHUNK_TRIALS);
    let ids: Vec<u64> = (0..chunks).collect();
    let partial = map_ordered(&ids, |&c| {
        let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
        rng.set_stream(c);
        let len = CHUNK_TRIALS.min(run.trials - c * CHUNK_TRIALS);
        let mut counts = vec![0u64; run.n + 1];
        for _ in 0..len {
            counts[trial(&mut rng).min(run.n)] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; run.n + 1];
    for p in partial {
        counts.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    McHistogram { counts, trials: run.trials }
}

fn spatial_trial(cfg: &SpatialArrayConfig, photons: usize, rng: &mut ChaCha8Rng, occupancy: &mut [usize]) -> usize {
    occupancy.iter_mut().for_each(|x| *x = 0);
    for _ in 0..photons {
        occupancy[rng.random_range(0..cfg.elements())] += 1;
    }
    let click = cfg.click();
    occupancy.iter().filter(|&&x| rng.random::<f64>() < click.click_probability(x)).count()
}

fn loop_trial(cfg: &LoopDetectorConfig, photons: usize, rng: &mut ChaCha8Rng) -> usize {
    let click = cfg.click();
    let mut alive = photons;
    let mut clicks = 0;
    for _ in 0..cfg.max_loops() {
        if alive == 0 && click.dark_prob() == 0.0 {
            break;
        }
        let mut exited = 0;
        let mut survivors = 0;
        for _ in 0..alive {
            if rng.random::<f64>() < cfg.exit_prob() {
                exited += 1;
            } else if rng.random::<f64>() < cfg.loop_survival() {
                survivors += 1;
            }
        }
        if rng.random::<f64>() < click.click_probability(exited) {
            clicks += 1;
        }
        alive = survivors;
    }
    clicks
}

/// Uniform placement of photons over the elements, then one click draw per element.
/// Temporal arrays are simulated as their equivalent spatial array.
pub fn simulate_spatial(run: &McRun) -> Result<McHistogram> {
    let cfg = match &run.config {
        DetectorConfig::Spatial(c) => *c,
        DetectorConfig::Temporal(c) => c.equivalent_spatial()?,
        DetectorConfig::Loop(_) => return invalid("simulate_spatial needs a spatial or temporal array"),
    };
    Ok(chunked(run, |rng| {
        let mut occupancy = vec![0usize; cfg.elements()];
        spatial_trial(&cfg, run.photons, rng, &mut occupancy)
    }))
}

pub fn simulate_loop(run: &McRun) -> Result<McHistogram> {
    let DetectorConfig::Loop(cfg) = run.config else {
        return invalid("simulate_loop needs a loop detector");
    };
    Ok(chunked(run, |rng| loop_trial(&cfg, run.photons, rng)))
}

pub fn simulate(run: &McRun) -> Result<McHistogram> {
    match run.config {
        DetectorConfig::Loop(_) => simulate_loop(run),
        _ => simulate_spatial(run),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZReport {
    /// Per-class `(empirical - analytic) / sqrt(p (1 - p) / trials)`.
    pub z: Vec<f64>,
    pub flagged: Vec<usize>,
    pub threshold: f64,
    pub max_abs_z: f64,
}

impl ZReport {
    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Compares an analytic response column with an empirical histogram. A class whose
/// analytic probability is exactly 0 or 1 has z = 0 when matched and is infinite otherwise.
pub fn compare(analytic: &[f64], empirical: &McHistogram, threshold: f64) -> Result<ZReport> {
    if analytic.len() != empirical.counts.len() {
        return invalid(format!(
            "analytic column has {} classes, histogram has {}",
            analytic.len(),
            empirical.counts.len()
        ));
    }
    let trials = empirical.trials as f64;
    let z: Vec<f64> = analytic
        .iter()
        .zip(empirical.frequencies())
        .map(|(&p, f)| {
            let var = p * (1.0 - p) / trials;
            if var > 0.0 {
                (f - p) / var.sqrt()
            } else if f == p {
                0.0
            } else {
                (f - p).signum() * f64::INFINITY
            }
        })
        .collect();
    let flagged = z.iter().enumerate().filter(|(_, v)| v.abs() > threshold).map(|(i, _)| i).collect();
    let max_abs_z = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(ZReport { z, flagged, threshold, max_abs_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::ClickModel;

    fn spatial(m: usize, eta: f64, dark: f64) -> DetectorConfig {
        DetectorConfig::spatial(m, ClickModel::new(eta, dark).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_never_clicks() {
        let run = McRun::new(5000, 1, spatial(4, 0.9, 0.0), 0, 4).unwrap();
        assert_eq!(simulate(&run).unwrap().counts()[0], 5000);
        let lp = DetectorConfig::looped(0.3, 0.97, 16, ClickModel::new(0.9, 0.0).unwrap()).unwrap();
        let run = McRun::new(5000, 1, lp, 0, 16).unwrap();
        assert_eq!(simulate(&run).unwrap().counts()[0], 5000);
    }

    #[test]
    fn ideal_clicks_bounded_by_photons() {
        let run = McRun::new(20_000, 9, spatial(8, 1.0, 0.0), 3, 8).unwrap();
        let h = simulate(&run).unwrap();
        assert!(h.counts()[4..].iter().all(|&c| c == 0));
        assert_eq!(h.counts().iter().sum::<u64>(), h.trials());
    }

    #[test]
    fn same_seed_same_histogram() {
        let run = McRun::new(100_000, 42, spatial(8, 0.7, 0.01), 5, 8).unwrap();
        assert_eq!(simulate(&run).unwrap(), simulate(&run).unwrap());
        let other = McRun { seed: 43, ..run };
        assert_ne!(simulate(&run).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn single_pass_certain_exit_matches_efficiency() {
        let lp = DetectorConfig::looped(1.0, 0.5, 1, ClickModel::new(0.8, 0.0).unwrap()).unwrap();
        let h = simulate(&McRun::new(200_000, 3, lp, 1, 1).unwrap()).unwrap();
        let r = compare(&[0.2, 0.8], &h, 5.0).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn compare_exact_expectation_gives_zero() {
        let h = McHistogram::from_counts(vec![2000, 5000, 1000]).unwrap();
        let r = compare(&[0.25, 0.625, 0.125], &h, 5.0).unwrap();
        assert_eq!(r.z, vec![0.0, 0.0, 0.0]);
        assert!(r.passed());
    }

    #[test]
    fn compare_handles_degenerate_classes_and_shapes() {
        let h = McHistogram::from_counts(vec![10, 0]).unwrap();
        assert!(compare(&[1.0, 0.0], &h, 5.0).unwrap().passed());
        let h = McHistogram::from_counts(vec![9, 1]).unwrap();
        let r = compare(&[1.0, 0.0], &h, 5.0).unwrap();
        assert_eq!(r.flagged, vec![0, 1]);
        assert!(compare(&[1.0], &h, 5.0).is_err());
    }

    #[test]
    fn wrong_architecture_is_rejected() {
        let run = McRun::new(10, 0, spatial(2, 0.5, 0.0), 1, 1).unwrap();
        assert!(simulate_loop(&run).is_err());
        assert!(McRun::new(0, 0, spatial(2, 0.5, 0.0), 1, 1).is_err());
        assert!(McRun::new(10, 0, spatial(2, 0.5, 0.0), 1, 3).is_err());
    }
}
