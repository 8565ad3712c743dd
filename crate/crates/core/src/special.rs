//! Discrete pmf helpers shared by the response producers and the quality engine.

use statrs::function::factorial::ln_factorial;

/// `ln C(n, k)`.
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64)
}

/// Binomial pmf `C(trials, k) p^k (1-p)^(trials-k)` for `k = 0..=trials`.
pub(crate) fn binomial_row(p: f64, trials: usize) -> Vec<f64> {
    let mut row = vec![0.0; trials + 1];
    if p <= 0.0 {
        row[0] = 1.0;
        return row;
    }
    if p >= 1.0 {
        row[trials] = 1.0;
        return row;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    for (k, slot) in row.iter_mut().enumerate() {
        *slot = (ln_binomial(trials, k) + k as f64 * lp + (trials - k) as f64 * lq).exp();
    }
    row
}

/// Lower-triangular table of binomial rows: `table[trials][k]` for `trials <= max_trials`.
pub(crate) fn binomial_table(p: f64, max_trials: usize) -> Vec<Vec<f64>> {
    (0..=max_trials).map(|t| binomial_row(p, t)).collect()
}

pub(crate) fn poisson_pmf(mu: f64, m: usize) -> f64 {
    if mu <= 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    (m as f64 * mu.ln() - mu - ln_factorial(m as u64)).exp()
}

/// Poisson pmf for `m = 0..=m_max`.
pub(crate) fn poisson_row(mu: f64, m_max: usize) -> Vec<f64> {
    (0..=m_max).map(|m| poisson_pmf(mu, m)).collect()
}

/// Upper-tail mass `Pr(X > m_max)` of a Poisson(mu) variable, summed from the tail side.
pub(crate) fn poisson_tail_beyond(mu: f64, m_max: usize) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    if (m_max as f64) < mu {
        let head: f64 = poisson_row(mu, m_max).iter().sum();
        return (1.0 - head).clamp(0.0, 1.0);
    }
    let mut total = 0.0;
    let mut m = m_max + 1;
    loop {
        let term = poisson_pmf(mu, m);
        total += term;
        if term <= total * 1e-18 || term == 0.0 {
            break;
        }
        m += 1;
    }
    total
}

/// Smallest `m` with `Pr(X > m) < tol` for X ~ Poisson(mu).
pub(crate) fn poisson_cover(mu: f64, tol: f64) -> usize {
    let mut m = mu.floor() as usize;
    while poisson_tail_beyond(mu, m) >= tol {
        m += 1;
    }
    m
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
