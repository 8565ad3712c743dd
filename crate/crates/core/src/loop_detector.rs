//! Loop-multiplexed detector: one click detector behind a fiber loop.
//!
//! On every pass each circulating photon exits towards the detector with probability
//! `T`; the photons that stay survive the loop with probability `eta_l`. Each pass is
//! one detection window of the click model. With `P0[k][m] = delta(k, 0)` after the
//! last allowed pass,
//!
//! ```text
//! P_l[k][m] = sum_{a,b} Bin(T; a, m) Bin(eta_l; b, m - a)
//!             * ( click(a) P_{l-1}[k-1][b] + (1 - click(a)) P_{l-1}[k][b] )
//! ```
//!
//! The sum factors into a survival convolution over `b` followed by an exit
//! convolution over `a`, so a matrix costs `O(l n m_max^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, PnrError, Result};
use crate::response::{ClickModel, DetectorSource, ResponseMatrix, TruncationPolicy};
use crate::special::binomial_table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLoopDetectorConfig")]
pub struct LoopDetectorConfig {
    exit_prob: f64,
    loop_survival: f64,
    max_loops: usize,
    click: ClickModel,
}

/// Deserialized form, checked by the constructor.
#[derive(Deserialize)]
struct RawLoopDetectorConfig {
    exit_prob: f64,
    loop_survival: f64,
    max_loops: usize,
    click: ClickModel,
}

impl TryFrom<RawLoopDetectorConfig> for LoopDetectorConfig {
    type Error = PnrError;

    fn try_from(r: RawLoopDetectorConfig) -> Result<Self> {
        Self::new(r.exit_prob, r.loop_survival, r.max_loops, r.click)
    }
}

impl LoopDetectorConfig {
    pub fn new(exit_prob: f64, loop_survival: f64, max_loops: usize, click: ClickModel) -> Result<Self> {
        if !(exit_prob > 0.0 && exit_prob <= 1.0) {
            return invalid(format!("exit probability must lie in (0, 1], got {exit_prob}"));
        }
        if !(0.0..=1.0).contains(&loop_survival) {
            return invalid(format!("loop survival must lie in [0, 1], got {loop_survival}"));
        }
        if max_loops == 0 {
            return invalid("at least one pass through the loop is required");
        }
        Ok(Self { exit_prob, loop_survival, max_loops, click })
    }

    pub fn exit_prob(&self) -> f64 {
        self.exit_prob
    }

    pub fn loop_survival(&self) -> f64 {
        self.loop_survival
    }

    pub fn max_loops(&self) -> usize {
        self.max_loops
    }

    pub fn click(&self) -> ClickModel {
        self.click
    }

    pub fn source(&self) -> DetectorSource {
        DetectorSource::Loop {
            exit_prob: self.exit_prob,
            loop_survival: self.loop_survival,
            max_loops: self.max_loops,
            eta: self.click.eta(),
            dark_prob: self.click.dark_prob(),
        }
    }
}

pub fn loop_response(config: &LoopDetectorConfig, n: usize, policy: &TruncationPolicy) -> Result<ResponseMatrix> {
    let m_max = policy.resolve_m_max(config.max_loops, n, None);
    loop_response_to(config, n, m_max, policy)
}

pub(crate) fn loop_response_to(
    config: &LoopDetectorConfig,
    n: usize,
    m_max: usize,
    policy: &TruncationPolicy,
) -> Result<ResponseMatrix> {
    if n > config.max_loops {
        return invalid(format!("{} passes give at most {} clicks, cannot resolve n = {n}", config.max_loops, config.max_loops));
    }
    let w = m_max + 1;
    let exit = binomial_table(config.exit_prob, m_max);
    let survive = binomial_table(config.loop_survival, m_max);
    let click: Vec<f64> = (0..=m_max).map(|a| config.click.click_probability(a)).collect();

    let mut prev = vec![0.0; (n + 1) * w];
    prev[..w].iter_mut().for_each(|v| *v = 1.0);
    let mut kept = vec![0.0; (n + 1) * w];
    let mut cur = vec![0.0; (n + 1) * w];

    for _ in 0..config.max_loops {
        // kept[k][r]: output distribution of the remaining passes when r photons
        // stayed in the loop this pass, after loop losses.
        for k in 0..=n {
            let prev_k = &prev[k * w..(k + 1) * w];
            for r in 0..w {
                let weights = &survive[r];
                kept[k * w + r] = weights.iter().zip(prev_k).map(|(p, q)| p * q).sum();
            }
        }
        for m in 0..w {
            let weights = &exit[m];
            for k in 0..=n {
                let mut acc = 0.0;
                for (a, &pa) in weights.iter().enumerate() {
                    if pa == 0.0 {
                        continue;
                    }
                    let r = m - a;
                    let stay = kept[k * w + r];
                    let advance = match k {
                        0 => 0.0,
                        _ if k == n => kept[(k - 1) * w + r] + kept[k * w + r],
                        _ => kept[(k - 1) * w + r],
                    };
                    if n == 0 {
                        acc += pa * stay;
                    } else {
                        acc += pa * (click[a] * advance + (1.0 - click[a]) * stay);
                    }
                }
                cur[k * w + m] = acc;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    // The absorbing row accumulates round-off just above one on long runs.
    prev.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));

    ResponseMatrix::new(n, m_max, prev, config.source(), *policy)
}
