//! Acceptance gates. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.
//!
//! The long 5×10⁹-sample run is skipped unless `--ignored` or
//! `--include-ignored` is passed (`cargo test --test acceptance -- --ignored`).

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qwalk_core::analysis::{convergence_study, total_variation_renormalized, ConvergenceConfig};
use qwalk_core::mc::{estimate_continuous, McConfig};
use qwalk_core::series::{nstep_bruteforce, sigma3_closed_form, step_general_series};
use qwalk_core::{
    coin_from_euler, continuous_point_mass_amplitude, euler_decompose, evolve_coined,
    evolve_continuous, step_coined, CoinMatrix, CoinSpec, CoinedState, Complex64, LatticeGenerator,
    PointMassInitialState, ScalarState, SeriesTruncation,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const WORKERS: &str = "4";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_spec(rng: &mut StdRng) -> CoinSpec {
    CoinSpec::new(
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
        rng.random_range(1e-3..TAU),
        rng.random_range(0.0..TAU),
    )
}

fn random_state(rng: &mut StdRng, sites: usize) -> CoinedState {
    let mut draw = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let plus: Vec<Complex64> = (0..sites).map(|_| draw()).collect();
    let minus: Vec<Complex64> = (0..sites).map(|_| draw()).collect();
    let s = CoinedState::from_amplitudes(-(sites as i64 / 2), plus, minus).unwrap();
    let norm = s.norm_sqr().sqrt();
    s.scale(Complex64::new(1.0 / norm, 0.0))
}

fn within_budget(elapsed: Duration, budget: Duration) -> (bool, String) {
    (
        elapsed <= budget,
        format!("{:.2?} (budget {:.0?})", elapsed, budget),
    )
}

fn series_matrix_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let trunc = SeriesTruncation::new(64);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let spec = random_spec(&mut rng);
        let state = random_state(&mut rng, 11);
        let series = match step_general_series(&state, &spec, &trunc) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("series step failed: {e}")),
        };
        worst = worst.max(series.max_abs_diff(&step_coined(&state, &spec.to_matrix())));
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(1));
    outcome(
        worst <= 1e-12 && fast,
        format!("max diff {worst:.2e} (tol 1e-12), {time}"),
    )
}

fn sigma3_closed_form_check() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let lambda = rng.random_range(0.0..TAU);
        let init = random_state(&mut rng, 11);
        let coin = CoinSpec::sigma3(lambda).to_matrix();
        for n in 0..=20 {
            let closed = sigma3_closed_form(&init, lambda, n);
            worst = worst.max(closed.max_abs_diff(&evolve_coined(&init, &coin, n)));
        }
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(1));
    outcome(
        worst <= 1e-12 && fast,
        format!("max diff {worst:.2e} (tol 1e-12), {time}"),
    )
}

fn bruteforce_expectation() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let trunc = SeriesTruncation::new(40);
    // K = 40 meets the 1e-14 tail bound only for λ₂ ≲ 5.5.
    let mut specs = vec![CoinSpec::hadamard()];
    specs.extend((0..5).map(|_| {
        let s = random_spec(&mut rng);
        CoinSpec::new(s.delta, s.lambda1, rng.random_range(1e-3..5.0), s.lambda3)
    }));
    let init = PointMassInitialState::symmetric();
    let mut worst: f64 = 0.0;
    for spec in &specs {
        for n in 0..=3 {
            let brute = match nstep_bruteforce(&init, spec, n, &trunc) {
                Ok(s) => s,
                Err(e) => return outcome(false, format!("brute force failed: {e}")),
            };
            worst = worst.max(brute.max_abs_diff(&evolve_coined(
                &init.to_state(),
                &spec.to_matrix(),
                n,
            )));
        }
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(10));
    outcome(
        worst <= 1e-10 && fast,
        format!("max diff {worst:.2e} (tol 1e-10), {time}"),
    )
}

fn qwalk(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .output()
        .map_err(|e| format!("cannot start qwalk: {e}"))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "qwalk exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

/// Parses a CSV written by `qwalk` into its header and numeric rows.
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or("empty csv")?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("{f}: {e}")))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

fn hadamard_args<'a>(
    samples: &'a str,
    steps: &'a str,
    workers: &'a str,
    out: &'a str,
) -> Vec<&'a str> {
    vec![
        "compare",
        "--coin",
        "hadamard",
        "--steps",
        steps,
        "--samples",
        samples,
        "--seed",
        "7",
        "--workers",
        workers,
        "--format",
        "csv,json,svg",
        "--out",
        out,
    ]
}

fn hadamard_compare(dir: &Path, steps: &str, samples: &str) -> Outcome {
    let start = Instant::now();
    let stem = dir.join(format!("hadamard_n{steps}"));
    let stem_str = stem.to_str().unwrap();
    if let Err(e) = qwalk(&hadamard_args(samples, steps, WORKERS, stem_str)) {
        return outcome(false, e);
    }
    let elapsed = start.elapsed();
    let (header, rows) = match read_csv(&stem.with_extension("csv")) {
        Ok(t) => t,
        Err(e) => return outcome(false, e),
    };
    if header != ["x", "p_reference", "p_mc", "se"] {
        return outcome(false, format!("unexpected header {header:?}"));
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap())
            .unwrap();
    let tvd = report["tvd"].as_f64().unwrap_or(f64::NAN);
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for r in &rows {
        let (p_ref, p_mc, se) = (r[1], r[2], r[3]);
        let diff = (p_ref - p_mc).abs();
        if se > 0.0 {
            worst = worst.max(diff / se);
        }
        if diff > (5.0 * se).max(1e-12) {
            outside += 1;
        }
    }
    outcome(
        tvd <= 0.05 && outside == 0,
        format!(
            "tvd {tvd:.3e} (tol 0.05), max |Δp|/se {worst:.2} (tol 5), {outside} rows outside, {:.1?} on {WORKERS} workers",
            elapsed
        ),
    )
}

fn continuous_molchanov() -> Outcome {
    let start = Instant::now();
    let (lambda, t, samples) = (1.0, 2.0, 10_000_000u64);
    let gen = LatticeGenerator::simple_symmetric(lambda).unwrap();
    let init = ScalarState::point_mass(0);
    let report = match estimate_continuous(&gen, &init, t, &McConfig::new(samples, 5, 4)) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    // One sample moves an amplitude by at most e^{λt}/M; smaller amplitudes are unresolvable.
    let floor = (lambda * t).exp() / samples as f64;
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for x in -20..=20 {
        let exact = continuous_point_mass_amplitude(x, lambda * t);
        let diff = (report.estimate.amplitude(x) - exact).norm();
        let se = report.std_err_at(x);
        if se > 0.0 {
            worst = worst.max(diff / se);
        }
        if diff > 4.0 * se + floor {
            outside += 1;
        }
    }
    let exact = evolve_continuous(&init, &gen, t).unwrap();
    let (tvd, _, _) =
        total_variation_renormalized(&report.estimate.distribution(), &exact.distribution());
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(30));
    outcome(
        outside == 0 && tvd <= 0.02 && fast,
        format!("max |Δψ|/se {worst:.2} (tol 4), {outside} sites outside, tvd {tvd:.3e} (tol 0.02), {time}"),
    )
}

fn continuous_reference_check() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut norm_defect: f64 = 0.0;
    for (lambda, t) in [
        (1.0, 0.5),
        (0.5, 2.0),
        (1.0, 2.0),
        (2.0, 2.0),
        (0.7, 5.0),
        (4.0, 2.0),
        (1.0, 8.0),
    ] {
        let gen = LatticeGenerator::simple_symmetric(lambda).unwrap();
        let out = match evolve_continuous(&ScalarState::point_mass(0), &gen, t) {
            Ok(s) => s,
            Err(e) => return outcome(false, e.to_string()),
        };
        for x in -10..=10 {
            worst = worst
                .max((out.amplitude(x) - continuous_point_mass_amplitude(x, lambda * t)).norm());
        }
        norm_defect = norm_defect.max((out.norm_sqr() - 1.0).abs());
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(1));
    outcome(
        worst <= 1e-10 && norm_defect <= 1e-10 && fast,
        format!("max diff {worst:.2e}, norm defect {norm_defect:.2e} (tol 1e-10), {time}"),
    )
}

fn convergence_rate() -> Outcome {
    let start = Instant::now();
    let config = ConvergenceConfig {
        coin: CoinSpec::hadamard(),
        init: PointMassInitialState::symmetric(),
        steps: 4,
        seed: 11,
        workers: 4,
    };
    let study = match convergence_study(&config, &[10_000, 100_000, 1_000_000, 10_000_000]) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let slope = study.fit.slope;
    let tvds: Vec<String> = study
        .rows
        .iter()
        .map(|r| format!("{:.2e}", r.tvd))
        .collect();
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(60));
    outcome(
        (-0.65..=-0.35).contains(&slope) && fast,
        format!(
            "slope {slope:.3} (want [-0.65, -0.35]), tvd [{}], {time}",
            tvds.join(", ")
        ),
    )
}

fn reproducibility(dir: &Path) -> Outcome {
    let samples = "100000000";
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let stem = dir.join(format!("repro_{run}"));
        if let Err(e) = qwalk(&hadamard_args(
            samples,
            "6",
            WORKERS,
            stem.to_str().unwrap(),
        )) {
            return outcome(false, e);
        }
        csvs.push(std::fs::read(stem.with_extension("csv")).unwrap());
    }
    let identical = csvs[0] == csvs[1];

    let mut amplitudes = Vec::new();
    for workers in ["1", "4"] {
        let stem = dir.join(format!("workers_{workers}"));
        let args = [
            "simulate",
            "--mode",
            "discrete_mc",
            "--coin",
            "hadamard",
            "--steps",
            "6",
            "--samples",
            samples,
            "--seed",
            "7",
            "--workers",
            workers,
            "--out",
            stem.to_str().unwrap(),
        ];
        if let Err(e) = qwalk(&args) {
            return outcome(false, e);
        }
        match read_csv(&stem.with_extension("csv")) {
            Ok((_, rows)) => amplitudes.push(rows),
            Err(e) => return outcome(false, e),
        }
    }
    // columns: x, probability, re_plus, im_plus, re_minus, im_minus, ...
    let worst = amplitudes[0]
        .iter()
        .zip(&amplitudes[1])
        .flat_map(|(a, b)| (2..6).map(move |c| (a[c] - b[c]).abs()))
        .fold(0.0f64, f64::max);
    outcome(
        identical && worst <= 1e-12 && amplitudes[0].len() == amplitudes[1].len(),
        format!("repeat csv identical: {identical}, workers 1 vs 4 max amplitude diff {worst:.2e} (tol 1e-12)"),
    )
}

fn euler_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        // e^{iφ}·[[a, b], [−b̄, ā]] with (a, b) uniform on the 3-sphere
        let q: [f64; 4] = loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let r2: f64 = v.iter().map(|c| c * c).sum();
            if r2 > 1e-6 && r2 <= 1.0 {
                let r = r2.sqrt();
                break v.map(|c| c / r);
            }
        };
        let (a, b) = (Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3]));
        let u = CoinMatrix([[a, b], [-b.conj(), a.conj()]])
            .scale(Complex64::cis(rng.random_range(0.0..TAU)));
        let spec = match euler_decompose(&u) {
            Ok(s) => s,
            Err(e) => return outcome(false, e.to_string()),
        };
        worst = worst.max(coin_from_euler(&spec).max_abs_diff(&u));
    }
    let hadamard = CoinSpec::hadamard();
    let h_err = hadamard.to_matrix().max_abs_diff(&CoinMatrix::hadamard());
    let preset_ok = (hadamard.delta - 1.5 * PI).abs() < 1e-15;
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(1));
    outcome(
        worst <= 1e-10 && h_err <= 1e-14 && preset_ok && fast,
        format!("max reconstruction error {worst:.2e} (tol 1e-10), Hadamard preset error {h_err:.2e} (tol 1e-14), {time}"),
    )
}

fn normalization() -> Outcome {
    let out = evolve_coined(
        &PointMassInitialState::symmetric().to_state(),
        &CoinMatrix::hadamard(),
        50,
    );
    let defect = (out.norm_sqr() - 1.0).abs();
    outcome(
        defect <= 1e-12,
        format!("|‖Ψ₅₀‖² − 1| = {defect:.2e} (tol 1e-12)"),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        // `cargo test -- --list` support
        return;
    }
    let slow = args
        .iter()
        .any(|a| a == "--ignored" || a == "--include-ignored");
    let dir = tempfile::tempdir().expect("temp dir");

    type Gate<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let mut gates: Vec<Gate> = vec![
        (
            "1 series-matrix equivalence",
            Box::new(series_matrix_equivalence),
        ),
        ("2 sigma3 closed form", Box::new(sigma3_closed_form_check)),
        (
            "3 brute-force expectation",
            Box::new(bruteforce_expectation),
        ),
        (
            "4 hadamard n=6, M=1e8",
            Box::new(|| hadamard_compare(dir.path(), "6", "100000000")),
        ),
        (
            "5 continuous-time Monte Carlo",
            Box::new(continuous_molchanov),
        ),
        (
            "6 continuous reference vs Bessel",
            Box::new(continuous_reference_check),
        ),
        ("7 convergence rate", Box::new(convergence_rate)),
        (
            "8 reproducibility",
            Box::new(|| reproducibility(dir.path())),
        ),
        ("9 Euler round trip", Box::new(euler_round_trip)),
        ("10 normalization", Box::new(normalization)),
    ];
    if slow {
        gates.push((
            "4b hadamard n=10, M=5e9 (slow)",
            Box::new(|| hadamard_compare(dir.path(), "10", "5000000000")),
        ));
    }

    let mut failed = 0;
    for (name, gate) in &gates {
        let r = gate();
        if !r.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    if !slow {
        println!("SKIP criterion 4b hadamard n=10, M=5e9 (slow): pass --ignored to run");
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        gates.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
