use pnrq_core::mc::{DEFAULT_TRIALS, DEFAULT_Z_THRESHOLD};
use pnrq_core::{
    approx_min_elements, compare, dark_sweep, eta_threshold, min_elements, quality_profile, quality_sweep, simulate,
    ClickModel, DetectorConfig, McRun, Parameter, QualityResult, SweepGrid, SweepPoint,
};

use crate::args::{
    forbid, required, CurveArgs, DarkSweepArgs, DetectorKind, LoopArgs, QualityArgs, ScalingArgs, ThresholdArgs,
    ValidateArgs,
};
use crate::error::{CliError, Result};
use crate::range::{parse_counts, parse_reals};
use crate::table::{Cell, Table};

/// A finished computation, before it is written out.
pub struct Outcome {
    pub table: Table,
    pub seeds: Vec<u64>,
    pub truncation_bounds: Vec<f64>,
    pub truncation_verified: bool,
    /// Monte Carlo disagreement found by `validate`.
    pub flagged: bool,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Self { table, seeds: Vec::new(), truncation_bounds: Vec::new(), truncation_verified: true, flagged: false }
    }

    fn record(&mut self, r: &QualityResult) {
        self.truncation_bounds.push(r.truncation_bound);
        self.truncation_verified &= r.truncation_verified;
    }
}

fn quality_cells(r: &QualityResult) -> [Cell; 4] {
    [r.value.into(), r.witness.to_string().into(), r.truncation_bound.into(), r.truncation_verified.into()]
}

fn sweep_table(column: &'static str, points: &[SweepPoint]) -> Outcome {
    let mut out = Outcome::new(Table::new(vec![column, "n", "q", "witness", "truncation_bound", "truncation_verified"]));
    for p in points {
        let mut row = vec![p.value.into(), p.n.into()];
        row.extend(quality_cells(&p.result));
        out.table.push(row);
        out.record(&p.result);
    }
    out
}

fn default_str<'a>(slot: &'a mut Option<String>, default: &str) -> &'a str {
    slot.get_or_insert_with(|| default.to_owned())
}

fn n_list(slot: &mut Option<String>) -> Result<Vec<usize>> {
    let text = slot.as_deref().ok_or_else(|| CliError::usage("--n is required"))?;
    parse_counts(text)
}

pub fn quality(a: &mut QualityArgs) -> Result<Outcome> {
    let config = a.detector.resolve(None)?;
    let set = a.set.resolve()?;
    let policy = a.truncation.resolve()?;
    let n_top = required(a.n, "n")?;
    let profile = quality_profile(&config, &set, n_top, &policy)?;
    let mut out = Outcome::new(Table::new(vec!["n", "q", "witness", "truncation_bound", "truncation_verified"]));
    for r in &profile {
        let mut row = vec![r.n.into()];
        row.extend(quality_cells(r));
        out.table.push(row);
        out.record(r);
    }
    Ok(out)
}

pub fn curve(a: &mut CurveArgs) -> Result<Outcome> {
    let template = a.detector.resolve(Some(("eta", 1.0)))?;
    let set = a.set.resolve()?;
    let policy = a.truncation.resolve()?;
    let ns = n_list(&mut a.n)?;
    let grid = SweepGrid::new("eta", parse_reals(default_str(&mut a.etas, "0..1:0.05"))?)?;
    let points = quality_sweep(&template, Parameter::Eta, &grid, &ns, &set, &policy)?;
    Ok(sweep_table("eta", &points))
}

pub fn dark(a: &mut DarkSweepArgs) -> Result<Outcome> {
    let template = a.detector.resolve(Some(("dark", 0.0)))?;
    let set = a.set.resolve()?;
    let policy = a.truncation.resolve()?;
    let ns = n_list(&mut a.n)?;
    let grid = SweepGrid::new("dark", parse_reals(default_str(&mut a.darks, "0..0.1:0.01"))?)?;
    let points = dark_sweep(&template, &ns, &grid, &set, &policy)?;
    Ok(sweep_table("dark", &points))
}

pub fn looped(a: &mut LoopArgs) -> Result<Outcome> {
    match a.detector.detector.get_or_insert(DetectorKind::Loop) {
        DetectorKind::Loop => {}
        _ => return Err(CliError::usage("the loop command needs --detector loop")),
    }
    let grid = SweepGrid::new("exit_prob", parse_reals(default_str(&mut a.exit_probs, "0.05..0.95:0.05"))?)?;
    let first = grid.values().first().copied().unwrap_or(1.0);
    let template = a.detector.resolve(Some(("exit-prob", first)))?;
    let set = a.set.resolve()?;
    let policy = a.truncation.resolve()?;
    let ns = n_list(&mut a.n)?;
    let points = quality_sweep(&template, Parameter::ExitProb, &grid, &ns, &set, &policy)?;
    Ok(sweep_table("exit_prob", &points))
}

pub fn threshold(a: &mut ThresholdArgs) -> Result<Outcome> {
    let template = a.detector.resolve(Some(("eta", 1.0)))?;
    let set = a.set.resolve()?;
    let policy = a.truncation.resolve()?;
    let n = required(a.n, "n")?;
    let q = *a.q.get_or_insert(0.5);
    let tol = *a.tol.get_or_insert(1e-3);
    let r = eta_threshold(&template, n, q, &set, tol, &policy)?;
    let mut out = Outcome::new(Table::new(vec![
        "n",
        "q_target",
        "eta_threshold",
        "interval_lo",
        "interval_hi",
        "evaluations",
        "q_at_threshold",
        "fallback_scan",
    ]));
    out.table.push(vec![
        n.into(),
        q.into(),
        r.threshold.into(),
        r.interval.0.into(),
        r.interval.1.into(),
        r.evaluations.into(),
        r.quality_at_threshold.into(),
        r.fallback_scan.into(),
    ]);
    Ok(out)
}

pub fn scaling(a: &mut ScalingArgs) -> Result<Outcome> {
    let d = &mut a.detector;
    match d.detector.get_or_insert(DetectorKind::Spatial) {
        DetectorKind::Spatial => {}
        _ => return Err(CliError::usage("scaling searches spatial arrays; use --detector spatial")),
    }
    forbid(&d.elements, "elements", "scaling solves for the element count")?;
    for (slot, flag) in [(&d.coupler_eff, "coupler-eff"), (&d.exit_prob, "exit-prob"), (&d.loop_survival, "loop-survival")] {
        forbid(slot, flag, "scaling searches spatial arrays")?;
    }
    forbid(&d.loops, "loops", "scaling searches spatial arrays")?;
    let eta = *d.eta.get_or_insert(1.0);
    let dark = *d.dark.get_or_insert(0.0);
    let click = ClickModel::new(eta, dark)?;
    let set = a.set.resolve()?;
    let policy = a.truncation.resolve()?;
    let ns = n_list(&mut a.n)?;
    let q = *a.q.get_or_insert(0.5);
    let with_approx = *a.with_approx.get_or_insert(false);

    let mut columns = vec!["n", "min_elements", "q_at_min", "evaluations"];
    if with_approx {
        columns.push("approx_elements");
    }
    let mut out = Outcome::new(Table::new(columns));
    for n in ns {
        let r = min_elements(n, click, q, &set, &policy)?;
        let mut row: Vec<Cell> = vec![n.into(), r.elements.into(), r.quality.into(), r.evaluations.into()];
        if with_approx {
            row.push(approx_min_elements(n, eta, q)?.into());
        }
        out.table.push(row);
    }
    Ok(out)
}

pub fn validate(a: &mut ValidateArgs) -> Result<Outcome> {
    let config: DetectorConfig = a.detector.resolve(None)?;
    forbid(&a.set.set, "set", "validate compares response columns")?;
    let policy = a.truncation.resolve()?;
    let n = *a.n.get_or_insert(config.max_output());
    let photons = parse_counts(default_str(&mut a.photons, "0..8"))?;
    let trials = *a.trials.get_or_insert(DEFAULT_TRIALS);
    let seed = *a.seed.get_or_insert(0);
    let z_threshold = *a.z_threshold.get_or_insert(DEFAULT_Z_THRESHOLD);

    let top = photons.iter().copied().max().unwrap_or(0);
    let mut matrix = config.response(n, &policy, None)?;
    if matrix.m_max() < top {
        matrix = config.response(n, &policy.with_m_max(top), None)?;
    }
    let mut out = Outcome::new(Table::new(vec!["m", "k", "analytic", "empirical", "z", "flagged"]));
    for m in photons {
        let run_seed = seed.wrapping_add(m as u64);
        let hist = simulate(&McRun::new(trials, run_seed, config, m, n)?)?;
        let report = compare(&matrix.column(m), &hist, z_threshold)?;
        let freq = hist.frequencies();
        for (k, (&f, &z)) in freq.iter().zip(&report.z).enumerate() {
            out.table.push(vec![
                m.into(),
                k.into(),
                matrix.get(k, m).into(),
                f.into(),
                z.into(),
                report.flagged.contains(&k).into(),
            ]);
        }
        out.flagged |= !report.passed();
        out.seeds.push(run_seed);
    }
    Ok(out)
}
