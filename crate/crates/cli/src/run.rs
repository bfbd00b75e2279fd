//! Experiment orchestration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qwalk_core::analysis::{
    amplitude_error, convergence_study, total_variation_renormalized, ConvergenceConfig,
};
use qwalk_core::mc::{
    estimate_continuous, estimate_discrete, EstimateReport, McConfig, ScalarEstimateReport,
};
use qwalk_core::series::step_general_series;
use qwalk_core::{
    evolve_coined, evolve_continuous, CoinedState, LatticeGenerator, ScalarState, SeriesTruncation,
};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format, Mode};
use crate::output::{bar_chart, to_json, Series, Table};
use crate::CliError;

const REFERENCE_COLOR: &str = "#1f77b4";
const ESTIMATE_COLOR: &str = "#ff7f0e";

/// Rows in compare mode may differ by at most this many standard errors.
pub const COMPARE_SIGMAS: f64 = 5.0;
/// Absolute slack for rows whose standard error vanishes.
pub const COMPARE_FLOOR: f64 = 1e-12;

/// The results of one experiment, rendered lazily per format.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub table: Table,
    pub report: Value,
    pub chart: String,
    /// Non-fatal conditions, e.g. a variance advisory.
    pub warnings: Vec<String>,
    /// One-line human summary for stderr.
    pub summary: String,
}

impl RunOutcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => to_json(&self.report),
            Format::Svg => self.chart.clone(),
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    match cfg.mode {
        Mode::DiscreteReference => {
            let n = steps(cfg)?;
            let state = evolve_coined(&cfg.init.to_state(), &cfg.coin.to_matrix(), n);
            Ok(coined_outcome(cfg, &state, None))
        }
        Mode::DiscreteSeries => {
            let n = steps(cfg)?;
            let trunc = SeriesTruncation::default();
            let mut state = cfg.init.to_state();
            for _ in 0..n {
                state = step_general_series(&state, &cfg.coin, &trunc)?;
            }
            Ok(coined_outcome(cfg, &state, None))
        }
        Mode::DiscreteMc => {
            let n = steps(cfg)?;
            let report = estimate_discrete(&cfg.coin, &cfg.init, n, &mc(cfg))?;
            let mut outcome = coined_outcome(cfg, &report.estimate, Some(&report));
            if let Some(a) = report.advisory {
                outcome.warnings.push(a.to_string());
            }
            Ok(outcome)
        }
        Mode::ContinuousReference => {
            let (gen, t) = continuous(cfg)?;
            let state = evolve_continuous(&ScalarState::point_mass(0), &gen, t)?;
            Ok(scalar_outcome(cfg, &state, None))
        }
        Mode::ContinuousMc => {
            let (gen, t) = continuous(cfg)?;
            let report = estimate_continuous(&gen, &ScalarState::point_mass(0), t, &mc(cfg))?;
            let mut outcome = scalar_outcome(cfg, &report.estimate, Some(&scalar_errors(&report)));
            if let Some(a) = report.advisory {
                outcome.warnings.push(a.to_string());
            }
            Ok(outcome)
        }
        Mode::Compare if cfg.time.is_some() => compare_continuous(cfg),
        Mode::Compare => compare_discrete(cfg),
        Mode::Convergence => convergence(cfg),
    }
}

fn steps(cfg: &ExperimentConfig) -> Result<usize, CliError> {
    cfg.steps
        .ok_or_else(|| CliError::Config(format!("mode {} requires steps", cfg.mode)))
}

fn continuous(cfg: &ExperimentConfig) -> Result<(LatticeGenerator, f64), CliError> {
    let t = cfg
        .time
        .ok_or_else(|| CliError::Config(format!("mode {} requires time", cfg.mode)))?;
    Ok((LatticeGenerator::simple_symmetric(cfg.rate)?, t))
}

fn mc(cfg: &ExperimentConfig) -> McConfig {
    McConfig::new(cfg.samples, cfg.seed, cfg.workers)
}

fn params(cfg: &ExperimentConfig) -> Value {
    let mut v = json!({
        "mode": cfg.mode.name(),
        "seed": cfg.seed,
        "workers": cfg.workers,
    });
    let m = v.as_object_mut().unwrap();
    if let Some(t) = cfg.time {
        m.insert("time".into(), json!(t));
        m.insert("rate".into(), json!(cfg.rate));
        m.insert("init".into(), json!("point mass at 0"));
    } else {
        m.insert("coin".into(), json!(cfg.coin));
        m.insert("init".into(), json!(cfg.init));
    }
    if let Some(n) = cfg.steps {
        m.insert("steps".into(), json!(n));
    }
    if cfg.mode != Mode::Convergence {
        m.insert("samples".into(), json!(cfg.samples));
    } else {
        m.insert("grid".into(), json!(cfg.grid));
    }
    v
}

fn title(cfg: &ExperimentConfig) -> String {
    match (cfg.steps, cfg.time) {
        (Some(n), _) => format!("{}, n = {n}", cfg.mode),
        (_, Some(t)) => format!("{}, λt = {}", cfg.mode, cfg.rate * t),
        _ => cfg.mode.to_string(),
    }
}

fn coined_outcome(
    cfg: &ExperimentConfig,
    state: &CoinedState,
    errors: Option<&EstimateReport>,
) -> RunOutcome {
    let mut columns = vec!["probability", "re_plus", "im_plus", "re_minus", "im_minus"];
    if errors.is_some() {
        columns.extend(["se_plus", "se_minus", "se_probability"]);
    }
    let mut table = Table::new("x", columns);
    for (x, p, m) in state.sites() {
        let mut row = vec![p.norm_sqr() + m.norm_sqr(), p.re, p.im, m.re, m.im];
        if let Some(r) = errors {
            row.extend([r.std_err(x, 1), r.std_err(x, -1), r.probability_std_err(x)]);
        }
        table.push(x, row);
    }
    finish_single(
        cfg,
        table,
        state.norm_sqr(),
        errors.and_then(|r| r.advisory).map(|a| json!(a)),
    )
}

fn scalar_outcome(
    cfg: &ExperimentConfig,
    state: &ScalarState,
    errors: Option<&[(f64, f64)]>,
) -> RunOutcome {
    let mut columns = vec!["probability", "re", "im"];
    if errors.is_some() {
        columns.extend(["se", "se_probability"]);
    }
    let mut table = Table::new("x", columns);
    for (i, (x, a)) in state.sites().enumerate() {
        let mut row = vec![a.norm_sqr(), a.re, a.im];
        if let Some(e) = errors {
            row.extend([e[i].0, e[i].1]);
        }
        table.push(x, row);
    }
    finish_single(cfg, table, state.norm_sqr(), None)
}

fn finish_single(
    cfg: &ExperimentConfig,
    table: Table,
    mass: f64,
    advisory: Option<Value>,
) -> RunOutcome {
    let probs = table.column("probability").unwrap();
    let chart = bar_chart(
        &title(cfg),
        "probability",
        &table.keys(),
        &[Series {
            name: cfg.mode.name(),
            values: &probs,
            color: ESTIMATE_COLOR,
        }],
    );
    let mut report = params(cfg);
    report["total_probability"] = json!(mass);
    if let Some(a) = advisory {
        report["advisory"] = a;
    }
    RunOutcome {
        table,
        report,
        chart,
        warnings: Vec::new(),
        summary: format!(
            "{}: {} sites, total probability {mass:.12}",
            cfg.mode,
            probs.len()
        ),
    }
}

/// `(amplitude se, probability se)` per site of the estimate window.
fn scalar_errors(report: &ScalarEstimateReport) -> Vec<(f64, f64)> {
    report
        .estimate
        .sites()
        .map(|(x, _)| (report.std_err_at(x), report.probability_std_err(x)))
        .collect()
}

/// Rows `(x, p_reference, p_mc, se)` plus the worst `|Δp|/se`.
fn compare_rows(rows: impl Iterator<Item = (i64, f64, f64, f64)>) -> (Table, f64, bool) {
    let mut table = Table::new("x", vec!["p_reference", "p_mc", "se"]);
    let mut worst: f64 = 0.0;
    let mut all_within = true;
    for (x, p_ref, p_mc, se) in rows {
        let diff = (p_ref - p_mc).abs();
        if se > 0.0 {
            worst = worst.max(diff / se);
        }
        all_within &= diff <= (COMPARE_SIGMAS * se).max(COMPARE_FLOOR);
        table.push(x, vec![p_ref, p_mc, se]);
    }
    (table, worst, all_within)
}

fn compare_chart(cfg: &ExperimentConfig, table: &Table) -> String {
    let reference = table.column("p_reference").unwrap();
    let estimate = table.column("p_mc").unwrap();
    bar_chart(
        &format!(
            "{}: reference vs Monte Carlo ({} samples)",
            title(cfg),
            cfg.samples
        ),
        "probability",
        &table.keys(),
        &[
            Series {
                name: "reference",
                values: &reference,
                color: REFERENCE_COLOR,
            },
            Series {
                name: "Monte Carlo",
                values: &estimate,
                color: ESTIMATE_COLOR,
            },
        ],
    )
}

fn compare_discrete(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let n = steps(cfg)?;
    let reference = evolve_coined(&cfg.init.to_state(), &cfg.coin.to_matrix(), n);
    let report = estimate_discrete(&cfg.coin, &cfg.init, n, &mc(cfg))?;
    let cmp = amplitude_error(&report.estimate, &reference, true);

    let lo = reference.x_min().min(report.estimate.x_min());
    let hi = reference.x_max().max(report.estimate.x_max());
    let prob =
        |s: &CoinedState, x: i64| s.amplitude(x, 1).norm_sqr() + s.amplitude(x, -1).norm_sqr();
    let (table, worst, within) = compare_rows((lo..=hi).map(|x| {
        (
            x,
            prob(&reference, x),
            prob(&report.estimate, x),
            report.probability_std_err(x),
        )
    }));

    let mut out = params(cfg);
    out["tvd"] = json!(cmp.tvd);
    out["l2_amp_error"] = json!(cmp.l2_amp_error);
    out["aligned_phase"] = json!(cmp.aligned_phase);
    out["mass_mc"] = json!(cmp.mass_a);
    out["mass_reference"] = json!(cmp.mass_b);
    out["max_sigma"] = json!(worst);
    out["within_5_sigma"] = json!(within);
    out["sectors_share_samples"] = json!(report.config.sectors_share_samples);
    out["batches"] = json!(report.config.batches);
    if let Some(a) = report.advisory {
        out["advisory"] = json!(a);
    }
    Ok(RunOutcome {
        chart: compare_chart(cfg, &table),
        table,
        report: out,
        warnings: report.advisory.iter().map(|a| a.to_string()).collect(),
        summary: format!(
            "compare: tvd = {:.3e}, l2 = {:.3e}, max |Δp|/se = {worst:.2}",
            cmp.tvd, cmp.l2_amp_error
        ),
    })
}

fn compare_continuous(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let (gen, t) = continuous(cfg)?;
    let init = ScalarState::point_mass(0);
    let reference = evolve_continuous(&init, &gen, t)?;
    let report = estimate_continuous(&gen, &init, t, &mc(cfg))?;
    let (tvd, mass_mc, mass_ref) =
        total_variation_renormalized(&report.estimate.distribution(), &reference.distribution());
    let max_amp_error = reference.max_abs_diff(&report.estimate);

    let (table, worst, within) = compare_rows(reference.sites().map(|(x, a)| {
        (
            x,
            a.norm_sqr(),
            report.estimate.amplitude(x).norm_sqr(),
            report.probability_std_err(x),
        )
    }));

    let mut out = params(cfg);
    out["tvd"] = json!(tvd);
    out["max_amp_error"] = json!(max_amp_error);
    out["mass_mc"] = json!(mass_mc);
    out["mass_reference"] = json!(mass_ref);
    out["max_sigma"] = json!(worst);
    out["within_5_sigma"] = json!(within);
    if let Some(a) = report.advisory {
        out["advisory"] = json!(a);
    }
    Ok(RunOutcome {
        chart: compare_chart(cfg, &table),
        table,
        report: out,
        warnings: report.advisory.iter().map(|a| a.to_string()).collect(),
        summary: format!("compare: tvd = {tvd:.3e}, max |Δp|/se = {worst:.2}"),
    })
}

fn convergence(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let study = convergence_study(
        &ConvergenceConfig {
            coin: cfg.coin,
            init: cfg.init,
            steps: steps(cfg)?,
            seed: cfg.seed,
            workers: cfg.workers,
        },
        &cfg.grid,
    )?;
    let mut table = Table::new("samples", vec!["tvd", "l2", "mass"]);
    for r in &study.rows {
        table.push(r.samples as i64, vec![r.tvd, r.l2, r.mass]);
    }
    let tvd = table.column("tvd").unwrap();
    let chart = bar_chart(
        &format!(
            "{}: total variation vs samples (slope {:.3})",
            title(cfg),
            study.fit.slope
        ),
        "total variation",
        &table.keys(),
        &[Series {
            name: "tvd",
            values: &tvd,
            color: ESTIMATE_COLOR,
        }],
    );
    let mut out = params(cfg);
    out["rows"] = json!(study.rows);
    out["slope"] = json!(study.fit.slope);
    out["intercept"] = json!(study.fit.intercept);
    out["converging"] = json!(study.fit.converging);
    let mut warnings = Vec::new();
    if !study.fit.converging {
        warnings.push(format!(
            "total variation is not decreasing with samples (slope {:.3})",
            study.fit.slope
        ));
    }
    Ok(RunOutcome {
        table,
        report: out,
        chart,
        warnings,
        summary: format!("convergence: log-log slope {:.3}", study.fit.slope),
    })
}

fn artifact_path(stem: &Path, format: Format) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(format.extension());
    PathBuf::from(s)
}

/// Writes each requested format to `<stem>.<ext>`, or the single requested
/// format to `stdout` when no stem is set. Returns the files written.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    outcome: &RunOutcome,
    stdout: &mut dyn Write,
) -> Result<Vec<PathBuf>, CliError> {
    let Some(stem) = &cfg.out else {
        if cfg.formats.len() > 1 {
            return Err(CliError::Config("several output formats need --out".into()));
        }
        stdout
            .write_all(outcome.render(cfg.formats[0]).as_bytes())
            .map_err(|e| CliError::io("stdout", e))?;
        return Ok(Vec::new());
    };
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }
    cfg.formats
        .iter()
        .map(|&f| {
            let path = artifact_path(stem, f);
            fs::write(&path, outcome.render(f)).map_err(|e| CliError::io(path.display(), e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartialConfig;

    fn config(mode: Mode, steps: Option<usize>, time: Option<f64>) -> ExperimentConfig {
        ExperimentConfig::resolve(PartialConfig {
            mode: Some(mode),
            steps,
            time,
            samples: Some(20_000),
            seed: Some(3),
            workers: Some(1),
            grid: Some(vec![1000, 10_000, 100_000]),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn reference_at_zero_steps_is_one_row() {
        let out = run(&config(Mode::DiscreteReference, Some(0), None)).unwrap();
        let csv = out.render(Format::Csv);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "x,probability,re_plus,im_plus,re_minus,im_minus"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "0");
        assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-15);
        assert!(lines.next().is_none());
    }

    #[test]
    fn series_matches_reference() {
        let a = run(&config(Mode::DiscreteReference, Some(5), None)).unwrap();
        let b = run(&config(Mode::DiscreteSeries, Some(5), None)).unwrap();
        for (ra, rb) in a.table.rows.iter().zip(&b.table.rows) {
            assert_eq!(ra.0, rb.0);
            for (u, v) in ra.1.iter().zip(&rb.1) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn every_mode_runs() {
        for (mode, steps, time) in [
            (Mode::DiscreteMc, Some(3), None),
            (Mode::ContinuousMc, None, Some(1.0)),
            (Mode::ContinuousReference, None, Some(1.0)),
            (Mode::Compare, Some(3), None),
            (Mode::Compare, None, Some(1.0)),
            (Mode::Convergence, Some(2), None),
        ] {
            let out = run(&config(mode, steps, time)).unwrap();
            assert!(!out.table.rows.is_empty(), "{mode}");
            assert!(out.render(Format::Svg).contains("<rect"));
            assert!(out.render(Format::Json).contains("\"seed\": 3"));
        }
    }

    #[test]
    fn compare_report_has_tvd_and_no_timing() {
        let out = run(&config(Mode::Compare, Some(3), None)).unwrap();
        let json = out.render(Format::Json);
        assert!(json.contains("\"tvd\""));
        assert!(!json.contains("wall_time"));
        assert_eq!(
            out.render(Format::Csv).lines().next().unwrap(),
            "x,p_reference,p_mc,se"
        );
        assert_eq!(
            json,
            run(&config(Mode::Compare, Some(3), None))
                .unwrap()
                .render(Format::Json)
        );
    }

    #[test]
    fn advisory_is_a_warning() {
        let mut cfg = config(Mode::DiscreteMc, Some(8), None);
        cfg.samples = 100;
        let out = run(&cfg).unwrap();
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn writes_each_format() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(Mode::DiscreteReference, Some(2), None);
        cfg.out = Some(dir.path().join("nested").join("run.v1"));
        cfg.formats = vec![Format::Csv, Format::Json, Format::Svg];
        let out = run(&cfg).unwrap();
        let written = write_outputs(&cfg, &out, &mut Vec::new()).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["run.v1.csv", "run.v1.json", "run.v1.svg"]);
        assert_eq!(
            fs::read_to_string(&written[0]).unwrap(),
            out.render(Format::Csv)
        );
    }

    #[test]
    fn stdout_takes_one_format() {
        let mut cfg = config(Mode::DiscreteReference, Some(1), None);
        let out = run(&cfg).unwrap();
        let mut buf = Vec::new();
        write_outputs(&cfg, &out, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), out.render(Format::Csv));
        cfg.formats = vec![Format::Csv, Format::Svg];
        assert_eq!(
            write_outputs(&cfg, &out, &mut Vec::new())
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
