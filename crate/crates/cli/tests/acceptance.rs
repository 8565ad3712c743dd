//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pnrq_core::mc::DEFAULT_Z_THRESHOLD;
use pnrq_core::{
    approx_min_elements, compare, dark_sweep, diagonal_closed_form, eta_threshold, max_resolvable, min_elements,
    quality, quality_finite_hull, quality_full_set, quality_sweep, simulate, spatial_response, temporal_response,
    validate_response, ClickModel, DetectorConfig, DistributionSet, McRun, Parameter, PhotonDistribution,
    ResponseMatrix, SpatialArrayConfig, SweepGrid, TemporalArrayConfig, TruncationPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn click(eta: f64, dark: f64) -> ClickModel {
    ClickModel::new(eta, dark).unwrap()
}

fn spatial(m: usize, eta: f64, dark: f64) -> DetectorConfig {
    DetectorConfig::spatial(m, click(eta, dark)).unwrap()
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn q_full(config: &DetectorConfig, n: usize) -> f64 {
    let r = config.response(n, &policy(), None).unwrap();
    quality(&r, n, &DistributionSet::All).unwrap().value
}

fn random_configs(count: usize) -> Vec<(DetectorConfig, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count)
        .map(|i| {
            let c = click(rng.random_range(0.05..=1.0), if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..0.1) });
            let config = match i % 3 {
                0 => DetectorConfig::spatial(rng.random_range(1..=64), c),
                1 => DetectorConfig::temporal(1 << rng.random_range(1..=6), rng.random_range(0.8..=1.0), c),
                _ => DetectorConfig::looped(rng.random_range(0.02..=1.0), rng.random_range(0.5..=1.0), rng.random_range(1..=40), c),
            }
            .unwrap();
            let n = rng.random_range(0..=config.max_output().min(12));
            (config, n)
        })
        .collect()
}

fn c1_normalization() -> Outcome {
    let start = Instant::now();
    let configs = random_configs(240);
    let mut worst_sum = 0.0f64;
    let mut worst_range = 0.0f64;
    for (config, n) in &configs {
        let r = config.response(*n, &policy(), None).map_err(|e| format!("{config}: {e}"))?;
        let d = validate_response(&r);
        worst_sum = worst_sum.max(d.max_column_deviation);
        for k in 0..=r.n_out() {
            for &v in r.row(k) {
                worst_range = worst_range.max(-v).max(v - 1.0);
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{} configs, max |colsum-1| = {worst_sum:.2e}, max range excursion = {worst_range:.2e}, {:.1?}",
        configs.len(),
        elapsed
    );
    if worst_sum <= 1e-9 && worst_range <= 1e-12 && elapsed <= Duration::from_secs(120) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c2_single_detector() -> Outcome {
    let mut worst = 0.0f64;
    for eta in [0.1, 0.5, 0.9, 1.0] {
        worst = worst.max((q_full(&spatial(1, eta, 0.0), 1) - eta).abs());
    }
    let detail = format!("max |Q_1 - eta| = {worst:.2e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c3_diagonal() -> Outcome {
    let mut worst = 0.0f64;
    for elements in 1..=32 {
        for eta in [0.3, 0.7, 1.0] {
            let cfg = SpatialArrayConfig::new(elements, click(eta, 0.0)).unwrap();
            let r = spatial_response(&cfg, elements, &policy()).unwrap();
            for m in 0..=elements {
                worst = worst.max((r.get(m, m) - diagonal_closed_form(elements, eta, m).unwrap()).abs());
            }
        }
    }
    let detail = format!("max deviation over M <= 32 = {worst:.2e}");
    if worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn brute_force(elements: usize, c: &ClickModel, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; elements + 1];
    let total = elements.pow(m as u32);
    for code in 0..total {
        let mut occupancy = vec![0usize; elements];
        let mut x = code;
        for _ in 0..m {
            occupancy[x % elements] += 1;
            x /= elements;
        }
        let mut dist = vec![1.0];
        for &o in &occupancy {
            let p = c.click_probability(o);
            let mut next = vec![0.0; dist.len() + 1];
            for (j, d) in dist.iter().enumerate() {
                next[j] += d * (1.0 - p);
                next[j + 1] += d * p;
            }
            dist = next;
        }
        for (k, d) in dist.iter().enumerate() {
            out[k] += d / total as f64;
        }
    }
    out
}

fn c4_brute_force() -> Outcome {
    let mut worst = 0.0f64;
    for elements in 1..=4 {
        for eta in [0.3, 0.7, 1.0] {
            for dark in [0.0, 0.01, 0.1] {
                let c = click(eta, dark);
                let cfg = SpatialArrayConfig::new(elements, c).unwrap();
                let r = spatial_response(&cfg, elements, &policy().with_m_max(6)).unwrap();
                for m in 0..=6 {
                    for (k, b) in brute_force(elements, &c, m).iter().enumerate() {
                        worst = worst.max((r.get(k, m) - b).abs());
                    }
                }
            }
        }
    }
    let detail = format!("max deviation from M^m enumeration = {worst:.2e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c5_monte_carlo() -> Outcome {
    let start = Instant::now();
    let cases = [
        (spatial(8, 0.7, 0.01), 8usize, 0..=12usize),
        (DetectorConfig::looped(0.3, 0.97, 16, click(0.9, 0.0)).unwrap(), 16, 0..=8),
    ];
    let mut worst = 0.0f64;
    let mut flagged = Vec::new();
    for (i, (config, n, photons)) in cases.into_iter().enumerate() {
        let r = config.response(n, &policy(), None).unwrap();
        for m in photons {
            let seed = 1000 * i as u64 + m as u64;
            let hist = simulate(&McRun::new(1_000_000, seed, config, m, n).unwrap()).unwrap();
            let report = compare(&r.column(m), &hist, DEFAULT_Z_THRESHOLD).unwrap();
            worst = worst.max(report.max_abs_z);
            if !report.passed() {
                flagged.push(format!("{config} m={m}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("max |z| = {worst:.2}, flagged = {flagged:?}, {elapsed:.1?}");
    if flagged.is_empty() && elapsed <= Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_thresholds() -> Outcome {
    let ideal = spatial(8, 1.0, 0.0);
    let poisson = DistributionSet::poisson_up_to_n();
    let full_n = max_resolvable(&ideal, &DistributionSet::All, 0.5, &policy()).unwrap();
    let poisson_n = max_resolvable(&ideal, &poisson, 0.5, &policy()).unwrap();
    let t_full = eta_threshold(&ideal, 3, 0.5, &DistributionSet::All, 1e-3, &policy()).unwrap().threshold;
    let t_poisson = eta_threshold(&ideal, 5, 0.5, &poisson, 1e-3, &policy()).unwrap().threshold;
    let detail = format!(
        "max n full = {full_n}, eta*(3, full) = {t_full:.4}, max n poisson = {poisson_n}, eta*(5, poisson) = {t_poisson:.4}"
    );
    if full_n == 3 && poisson_n == 5 && (t_full - 0.92).abs() <= 0.01 && (t_poisson - 0.96).abs() <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c7_scaling() -> Outcome {
    let approx10 = approx_min_elements(10, 1.0, 0.5).unwrap();
    let mut worst = 0.0f64;
    let mut exact = Vec::new();
    for n in 8..=12 {
        let m = min_elements(n, click(1.0, 0.0), 0.5, &DistributionSet::All, &policy()).unwrap().elements;
        let a = approx_min_elements(n, 1.0, 0.5).unwrap();
        worst = worst.max((m as f64 - a).abs() / m as f64);
        exact.push(m);
    }
    let m5 = min_elements(5, click(1.0, 0.0), 0.5, &DistributionSet::All, &policy()).unwrap().elements;
    let detail = format!(
        "approx(10) = {approx10:.3}, exact n=8..12 = {exact:?}, max rel. gap = {:.1}%, exact(5) = {m5}",
        100.0 * worst
    );
    if (approx10 - 72.13).abs() <= 0.05 && worst <= 0.10 && (17..=20).contains(&m5) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c8_dark_counts() -> Outcome {
    let template = spatial(16, 0.95, 0.0);
    let grid = SweepGrid::new("dark", vec![0.005, 0.04]).unwrap();
    let pts = dark_sweep(&template, &[6], &grid, &DistributionSet::All, &policy()).unwrap();
    let (q6_low, q6_high) = (pts[0].result.value, pts[1].result.value);
    let sweep = SweepGrid::linspace("dark", 0.0, 0.1, 0.01).unwrap();
    let pts = dark_sweep(&template, &[1, 2, 3, 4], &sweep, &DistributionSet::All, &policy()).unwrap();
    let mut rising = Vec::new();
    for n in 1..=4 {
        let series: Vec<(f64, f64)> = pts.iter().filter(|p| p.n == n).map(|p| (p.value, p.result.value)).collect();
        if let Some(w) = series.windows(2).find(|w| w[1].1 > w[0].1 + 1e-12) {
            rising.push(format!("Q_{n} {:.4}->{:.4} at p_d {}->{}", w[0].1, w[1].1, w[0].0, w[1].0));
        }
    }
    let detail = format!("Q_6(0.005) = {q6_low:.4}, Q_6(0.04) = {q6_high:.4}; increases among Q_1..Q_4: {rising:?}");
    if q6_high > q6_low && rising.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_loop() -> Outcome {
    let template = DetectorConfig::looped(0.5, 0.97, 32, click(1.0, 0.0)).unwrap();
    let grid = SweepGrid::linspace("exit_prob", 0.05, 0.95, 0.05).unwrap();
    let best = |set: &DistributionSet, n: usize| -> f64 {
        quality_sweep(&template, Parameter::ExitProb, &grid, &[n], set, &policy())
            .unwrap()
            .iter()
            .map(|p| p.result.value)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let poisson = DistributionSet::poisson_up_to_n();
    let (f2, f3) = (best(&DistributionSet::All, 2), best(&DistributionSet::All, 3));
    let (p4, p5) = (best(&poisson, 4), best(&poisson, 5));
    let detail = format!("best over T: full Q_2 = {f2:.3}, Q_3 = {f3:.3}; poisson Q_4 = {p4:.3}, Q_5 = {p5:.3}");
    if f2 >= 0.5 && f3 < 0.5 && p4 >= 0.5 && p5 < 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_quality_bounds() -> Outcome {
    let configs = random_configs(120);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut monotone_gap = f64::NEG_INFINITY;
    let mut hull_gap = 0.0f64;
    let mut fock_mismatch = 0usize;
    for (config, _) in &configs {
        let top = config.max_output().min(8);
        let mu = top as f64;
        let raw: ResponseMatrix = config.response(top, &policy(), Some(mu)).unwrap();
        for set in [DistributionSet::All, DistributionSet::poisson(mu).unwrap()] {
            let q: Vec<f64> = (0..=top).map(|n| quality(&raw, n, &set).unwrap().value).collect();
            for w in q.windows(2) {
                monotone_gap = monotone_gap.max(w[1] - w[0]);
            }
        }
        let n = top;
        let bases: Vec<PhotonDistribution> = (0..rng.random_range(1..=4))
            .map(|_| {
                if rng.random_bool(0.5) {
                    PhotonDistribution::fock(rng.random_range(0..=12))
                } else {
                    PhotonDistribution::poisson(rng.random_range(0.0..mu.max(0.5))).unwrap()
                }
            })
            .collect();
        let base_q = quality_finite_hull(&raw, n, &bases).unwrap().value;
        let mut extended = bases.clone();
        for _ in 0..100 {
            let w: Vec<f64> = bases.iter().map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            let comps = w.iter().zip(&bases).map(|(x, b)| (x / total, b.clone())).collect();
            extended.push(PhotonDistribution::mixture(comps).unwrap());
        }
        hull_gap = hull_gap.max((quality_finite_hull(&raw, n, &extended).unwrap().value - base_q).abs());
        let collapsed = raw.collapse_to_n(n).unwrap();
        let explicit = collapsed.desired_row().into_iter().fold(f64::INFINITY, f64::min);
        if quality_full_set(&raw, n).unwrap().value != explicit {
            fock_mismatch += 1;
        }
    }
    let detail = format!(
        "{} matrices: max (Q_n - Q_(n-1)) = {monotone_gap:.2e}, max hull gap = {hull_gap:.2e}, Fock mismatches = {fock_mismatch}",
        configs.len()
    );
    if monotone_gap <= 1e-12 && hull_gap <= 1e-9 && fock_mismatch == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c11_temporal() -> Outcome {
    let mut identical = true;
    for (eta, dark) in [(1.0, 0.0), (0.9, 0.01), (0.6, 0.05)] {
        let t = TemporalArrayConfig::new(16, 1.0, click(eta, dark)).unwrap();
        let s = SpatialArrayConfig::new(16, click(eta, dark)).unwrap();
        let (a, b) = (temporal_response(&t, 16, &policy()).unwrap(), spatial_response(&s, 16, &policy()).unwrap());
        identical &= (0..=16).all(|k| a.row(k) == b.row(k));
    }
    let n = 2;
    let series: Vec<f64> = (1..=7).map(|p| q_full(&DetectorConfig::temporal(1 << p, 0.97, click(1.0, 0.0)).unwrap(), n)).collect();
    let peak = series.iter().enumerate().fold(0, |b, (i, &v)| if v > series[b] { i } else { b });
    let tail_ok = series[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let text: Vec<String> = series.iter().map(|v| format!("{v:.4}")).collect();
    let detail = format!(
        "eta_c = 1 identical to spatial: {identical}; Q_{n} at eta_c = 0.97, M = 2..128: [{}], peak at M = {}",
        text.join(", "),
        1 << (peak + 1)
    );
    if identical && peak + 1 < series.len() && tail_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pnrq(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pnrq"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("pnrq {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn c12_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: &[(&str, &[&str])] = &[
        ("quality", &["--detector", "spatial", "--elements", "8", "--set", "poisson", "--n", "6"]),
        ("curve", &["--detector", "temporal", "--elements", "16", "--coupler-eff", "0.97", "--n", "1..4", "--etas", "0.8..1:0.05"]),
        ("threshold", &["--detector", "spatial", "--elements", "8", "--n", "3"]),
        ("scaling", &["--n", "1..8", "--with-approx"]),
        ("dark-sweep", &["--detector", "spatial", "--elements", "16", "--eta", "0.95", "--n", "1..6"]),
        ("loop", &["--loops", "32", "--loop-survival", "0.97", "--n", "2,3", "--set", "poisson"]),
        ("validate", &["--detector", "spatial", "--elements", "8", "--eta", "0.7", "--dark", "0.01", "--photons", "0..6", "--trials", "200000", "--seed", "9"]),
    ];
    let mut checked = Vec::new();
    for (cmd, args) in runs {
        let first = format!("{cmd}.csv");
        let mut argv = vec![*cmd];
        argv.extend_from_slice(args);
        argv.extend(["--out", &first]);
        pnrq(dir.path(), &argv)?;
        let manifest = format!("{cmd}.manifest.json");
        let second = format!("{cmd}-rerun.csv");
        pnrq(dir.path(), &["rerun", &manifest, "--out", &second])?;
        let third = format!("{cmd}-config.csv");
        pnrq(dir.path(), &[cmd, "--config", &manifest, "--out", &third, "--manifest", "config.manifest.json"])?;
        let read = |f: &str| std::fs::read(dir.path().join(f)).map_err(|e| e.to_string());
        let a = read(&first)?;
        if a != read(&second)? || a != read(&third)? {
            return Err(format!("{cmd}: rerun output differs"));
        }
        checked.push(*cmd);
    }
    Ok(format!("byte-identical reruns for {}", checked.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("normalization", c1_normalization),
        ("single detector Q_1 = eta", c2_single_detector),
        ("diagonal closed form", c3_diagonal),
        ("placement enumeration", c4_brute_force),
        ("Monte Carlo agreement", c5_monte_carlo),
        ("spatial thresholds", c6_thresholds),
        ("element scaling", c7_scaling),
        ("dark-count trends", c8_dark_counts),
        ("loop detector", c9_loop),
        ("quality bounds", c10_quality_bounds),
        ("temporal equivalence", c11_temporal),
        ("manifest reproducibility", c12_reproducibility),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
