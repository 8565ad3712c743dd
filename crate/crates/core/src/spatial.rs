//! Uniformly illuminated array of `M` click detectors.
//!
//! The response is computed by following the number of elements hit by at least one
//! *detected* photon: each photon is detected with probability `eta` and lands on a
//! uniformly chosen element, so that count performs a pure-birth Markov chain in the
//! photon number. Elements not hit by a detected photon click only through dark
//! counts, binomially. Every term is a product of probabilities, so no cancellation
//! occurs at any array size. Counts at or above `n` are kept in one absorbing class.
//!
//! The multinomial placement law uses the normalization `m! / (M^m prod x_i!)`, the
//! value for which placements of `m` photons sum to one.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, PnrError, Result};
use crate::response::{ClickModel, DetectorSource, ResponseMatrix, TruncationPolicy};
use crate::special::binomial_row;
use statrs::function::factorial::ln_factorial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpatialArrayConfig")]
pub struct SpatialArrayConfig {
    elements: usize,
    click: ClickModel,
}

/// Deserialized form, checked by the constructor.
#[derive(Deserialize)]
struct RawSpatialArrayConfig {
    elements: usize,
    click: ClickModel,
}

impl TryFrom<RawSpatialArrayConfig> for SpatialArrayConfig {
    type Error = PnrError;

    fn try_from(r: RawSpatialArrayConfig) -> Result<Self> {
        Self::new(r.elements, r.click)
    }
}

impl SpatialArrayConfig {
    pub fn new(elements: usize, click: ClickModel) -> Result<Self> {
        if elements == 0 {
            return invalid("a spatial array needs at least one element");
        }
        Ok(Self { elements, click })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn click(&self) -> ClickModel {
        self.click
    }

    pub fn source(&self) -> DetectorSource {
        DetectorSource::Spatial {
            elements: self.elements,
            eta: self.click.eta(),
            dark_prob: self.click.dark_prob(),
        }
    }
}

/// Probability of the occupancy vector `x` when `sum(x)` photons are split uniformly
/// over `x.len()` elements: `m! / (M^m prod x_i!)`.
pub fn placement_probability(elements: usize, occupancy: &[usize]) -> Result<f64> {
    if occupancy.len() != elements {
        return invalid(format!("occupancy has {} entries for {elements} elements", occupancy.len()));
    }
    let m: usize = occupancy.iter().sum();
    if m == 0 {
        return Ok(1.0);
    }
    let ln_p = ln_factorial(m as u64)
        - m as f64 * (elements as f64).ln()
        - occupancy.iter().map(|&x| ln_factorial(x as u64)).sum::<f64>();
    Ok(ln_p.exp())
}

/// `P[m][m] = M! / (M^m (M - m)!) eta^m`, valid without dark counts.
pub fn diagonal_closed_form(elements: usize, eta: f64, m: usize) -> Result<f64> {
    if m > elements {
        return invalid(format!("closed form needs m <= M, got m = {m}, M = {elements}"));
    }
    let distinct: f64 = (0..m).map(|i| (elements - i) as f64 / elements as f64).product();
    Ok(distinct * eta.powi(m as i32))
}

/// Response of the array collapsed to an `n`-detector.
pub fn spatial_response(config: &SpatialArrayConfig, n: usize, policy: &TruncationPolicy) -> Result<ResponseMatrix> {
    let m_max = policy.resolve_m_max(config.elements, n, None);
    spatial_response_to(config, n, m_max, policy)
}

pub(crate) fn spatial_response_to(
    config: &SpatialArrayConfig,
    n: usize,
    m_max: usize,
    policy: &TruncationPolicy,
) -> Result<ResponseMatrix> {
    let big_m = config.elements;
    if n > big_m {
        return invalid(format!("an array of {big_m} elements cannot resolve n = {n}"));
    }
    let eta = config.click.eta();
    let dark = config.click.dark_prob();

    // dark[j][b]: b dark clicks among the M - j elements without a detected photon,
    // only needed for b < n - j.
    let dark_rows: Vec<Vec<f64>> = (0..n).map(|j| binomial_row(dark, big_m - j)).collect();
    let step_up: Vec<f64> = (0..n).map(|j| eta * (big_m - j) as f64 / big_m as f64).collect();

    let w = m_max + 1;
    let mut entries = vec![0.0; (n + 1) * w];
    let mut occupied = vec![0.0; n + 1];
    occupied[0] = 1.0;
    let mut next = vec![0.0; n + 1];

    for m in 0..=m_max {
        if m > 0 {
            next.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..n {
                let up = step_up[j] * occupied[j];
                next[j] += occupied[j] - up;
                next[j + 1] += up;
            }
            next[n] += occupied[n];
            std::mem::swap(&mut occupied, &mut next);
        }

        let mut at_least_n = occupied[n];
        for j in 0..n {
            let pj = occupied[j];
            if pj == 0.0 {
                continue;
            }
            let row = &dark_rows[j];
            let mut below = 0.0;
            for b in 0..(n - j) {
                let p = row.get(b).copied().unwrap_or(0.0);
                entries[(j + b) * w + m] += pj * p;
                below += p;
            }
            at_least_n += pj * (1.0 - below).max(0.0);
        }
        entries[n * w + m] = at_least_n;
    }

    ResponseMatrix::new(n, m_max, entries, config.source(), *policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::validate_response;
    use approx::assert_relative_eq;

    fn array(elements: usize, eta: f64, dark: f64) -> SpatialArrayConfig {
        SpatialArrayConfig::new(elements, ClickModel::new(eta, dark).unwrap()).unwrap()
    }

    #[test]
    fn placement_examples() {
        assert_relative_eq!(placement_probability(2, &[1, 1]).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(placement_probability(2, &[2, 0]).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(placement_probability(4, &[0, 0, 0, 0]).unwrap(), 1.0);
        assert!(placement_probability(3, &[1, 1]).is_err());
    }

    #[test]
    fn two_element_example() {
        let r = spatial_response(&array(2, 0.5, 0.0), 2, &TruncationPolicy::default()).unwrap();
        assert_relative_eq!(r.get(0, 2), 0.25, epsilon = 1e-15);
        assert_relative_eq!(r.get(1, 2), 0.625, epsilon = 1e-15);
        assert_relative_eq!(r.get(2, 2), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn eight_element_three_photons() {
        let r = spatial_response(&array(8, 1.0, 0.0), 3, &TruncationPolicy::default()).unwrap();
        assert_relative_eq!(r.get(3, 3), 0.65625, epsilon = 1e-15);
        assert_relative_eq!(diagonal_closed_form(8, 1.0, 3).unwrap(), 0.65625, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_edges() {
        assert_relative_eq!(diagonal_closed_form(2, 1.0, 2).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(diagonal_closed_form(5, 0.3, 0).unwrap(), 1.0);
        assert!(diagonal_closed_form(3, 1.0, 4).is_err());
    }

    #[test]
    fn zero_photons_no_dark_counts() {
        let r = spatial_response(&array(6, 0.7, 0.0), 4, &TruncationPolicy::default()).unwrap();
        assert_eq!(r.column(0), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn n_above_elements_is_rejected() {
        assert!(spatial_response(&array(3, 0.9, 0.0), 4, &TruncationPolicy::default()).is_err());
    }

    #[test]
    fn large_arrays_stay_stochastic() {
        let r = spatial_response(&array(1024, 0.93, 0.003), 12, &TruncationPolicy::default()).unwrap();
        assert_eq!(r.m_max(), 4096);
        let d = validate_response(&r);
        assert!(d.passes(1e-9), "{d:?}");
        assert!(r.tail_monotone_verified());
    }

    #[test]
    fn diagonal_decreases_with_photon_number() {
        let r = spatial_response(&array(10, 1.0, 0.0), 10, &TruncationPolicy::default()).unwrap();
        for m in 1..10 {
            assert!(r.get(m + 1, m + 1) <= r.get(m, m));
        }
    }
}
