use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use tenscalc::algebra::LinearOperator;
use tenscalc::fixtures::{compare, load_poly_fixture, PolyReport, PRINT_TOL};
use tenscalc::io;
use tenscalc::ode::{directional_generator, integrate, solve_exact, MultiTimeSystem, Trajectory};
use tenscalc::reduction::{
    planted_system, reduce_and_solve, PlantConfig, ReductionOutcome, SolverConfig,
};
use tenscalc::stability::stability_certificate;
use tenscalc::tucker::{partial_tucker, reduction_cost, ReductionCost};
use tenscalc::verify::{find_suite, Check, Suite, SUITES};
use tenscalc::DenseTensor;

use crate::problem::{load_problem, Problem, Resolved};
use crate::report::{ensure_dir, print_check, verdict, write_json, write_text, Stamp, StampMode};
use crate::{CliError, Output, SolverArgs};

const DEFAULT_OUT: &str = "tenscalc-out";
const TIMING_REPEATS: usize = 5;
/// Lifted-vs-full error bound when the reduction ranks cover the planted ranks.
const EXACT_REDUCTION_TOL: f64 = 1e-6;
const FULL_RANK_TOL: f64 = 1e-12;
const ORTHONORMALITY_TOL: f64 = 1e-10;
const MIN_SPEEDUP: f64 = 1.0;

fn out_dir(output: &Output) -> PathBuf {
    output
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn repeats(output: &Output) -> usize {
    match output.stamp {
        StampMode::On => TIMING_REPEATS,
        StampMode::Off => 1,
    }
}

#[derive(Serialize)]
struct SuiteEntry {
    suite: String,
    aliases: Vec<&'static str>,
    checks: Vec<Check>,
    pass: bool,
    elapsed_ms: Option<f64>,
}

#[derive(Serialize)]
struct CertificateEntry {
    a: PathBuf,
    p: PathBuf,
    stable: bool,
    p_pivots: Vec<f64>,
    decay_pivots: Vec<f64>,
    note: Option<String>,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    suite: String,
    seed: u64,
    suites: Vec<SuiteEntry>,
    certificate: Option<CertificateEntry>,
    pass: bool,
    stamp: Option<Stamp>,
}

fn read_input(path: &Path, what: &str) -> Result<DenseTensor, CliError> {
    io::read_tensor(path).map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

pub fn verify(
    name: &str,
    seed: u64,
    pair: Option<&[PathBuf]>,
    list: bool,
    verbose: bool,
    output: &Output,
) -> Result<bool, CliError> {
    if list {
        for s in SUITES {
            println!("{:<24} {:<32} {}", s.name, s.aliases.join(", "), s.summary);
        }
        return Ok(true);
    }
    let selected: Vec<&Suite> = if name.eq_ignore_ascii_case("all") {
        SUITES.iter().collect()
    } else {
        let mut v = Vec::new();
        for part in name.split(',') {
            v.push(find_suite(part.trim()).ok_or_else(|| {
                let names: Vec<&str> = SUITES.iter().map(|s| s.name).collect();
                CliError::Usage(format!(
                    "unknown suite `{part}`; available: all, {}",
                    names.join(", ")
                ))
            })?);
        }
        v
    };
    let certificate = match pair {
        None => None,
        Some(paths) => {
            if !selected.iter().any(|s| s.name == "lyapunov") {
                return Err(CliError::Usage("--pair requires the lyapunov suite".into()));
            }
            let a = read_input(&paths[0], "A")?;
            let p = read_input(&paths[1], "P")?;
            let cert = stability_certificate(&a, &p)
                .map_err(|e| CliError::Usage(format!("--pair: {e}")))?;
            Some(CertificateEntry {
                a: paths[0].clone(),
                p: paths[1].clone(),
                stable: cert.stable,
                p_pivots: cert.p_pivots,
                decay_pivots: cert.decay_pivots,
                note: cert.note,
            })
        }
    };

    let reports: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|s| scope.spawn(move || s.run(seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread"))
            .collect()
    });
    let mut entries = Vec::new();
    for (suite, r) in selected.iter().zip(reports) {
        let failed = r.checks.iter().filter(|c| !c.pass).count();
        match output.stamp {
            StampMode::On => println!(
                "{} {} ({} checks, {} failed, {:.0} ms)",
                verdict(r.pass),
                r.suite,
                r.checks.len(),
                failed,
                r.elapsed_ms
            ),
            StampMode::Off => println!(
                "{} {} ({} checks, {} failed)",
                verdict(r.pass),
                r.suite,
                r.checks.len(),
                failed
            ),
        }
        for c in &r.checks {
            print_check(c, verbose);
        }
        entries.push(SuiteEntry {
            suite: r.suite,
            aliases: suite.aliases.to_vec(),
            pass: r.pass,
            elapsed_ms: output.stamp.time(r.elapsed_ms),
            checks: r.checks,
        });
    }
    if let Some(c) = &certificate {
        println!(
            "certificate for ({}, {}): {}{}",
            c.a.display(),
            c.p.display(),
            if c.stable { "stable" } else { "not certified" },
            c.note
                .as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        );
    }
    let pass = entries.iter().all(|e| e.pass);
    let passed = entries.iter().filter(|e| e.pass).count();
    println!("verify: {passed} of {} suites pass", entries.len());
    if let Some(dir) = &output.out {
        let report = VerifyReport {
            command: "verify",
            suite: name.to_string(),
            seed,
            suites: entries,
            certificate,
            pass,
            stamp: output.stamp.stamp(),
        };
        let path = write_json(&dir.join("verify.json"), &report)?;
        println!("report: {}", path.display());
    }
    Ok(pass)
}

#[derive(Serialize)]
struct PolyOutput<'a> {
    command: &'static str,
    tolerance: f64,
    report: &'a PolyReport,
    /// Mismatched entries tolerated by the match threshold.
    errata: Vec<[usize; 4]>,
    sanity: &'a Check,
    pass: bool,
    stamp: Option<Stamp>,
}

pub fn example_poly(verbose: bool, output: &Output) -> Result<bool, CliError> {
    let fx = load_poly_fixture().map_err(|e| CliError::Usage(format!("bundled fixture: {e}")))?;
    let report = compare(&fx, PRINT_TOL)?;
    let linear = LinearOperator::new(fx.a.clone())?.polynomial(&[0.0, 1.0]);
    let sanity = Check::within(
        "f(x) = x returns A",
        linear.tensor().max_abs_diff(&fx.a),
        0.0,
    );
    println!(
        "{} f(A) = A^3 + 5A^2 - 6I: {} of {} printed entries within {PRINT_TOL}",
        verdict(report.pass),
        report.matched,
        report.total
    );
    for e in &report.entries {
        if verbose || !e.pass {
            println!(
                "    {} B{:?}: printed {:>7.2}, computed {:>9.4}, deviation {:.4}",
                if e.pass { "ok  " } else { "miss" },
                e.index,
                e.printed,
                e.computed,
                e.deviation
            );
        }
    }
    if !report.identity_shift_suspects.is_empty() {
        println!(
            "    printed values at {:?} differ by the constant coefficient, consistent with the identity term missing there",
            report.identity_shift_suspects
        );
    }
    print_check(&sanity, verbose);
    let pass = report.pass && sanity.pass;
    let errata: Vec<[usize; 4]> = if report.pass {
        report
            .entries
            .iter()
            .filter(|e| !e.pass)
            .map(|e| e.index)
            .collect()
    } else {
        Vec::new()
    };
    if !errata.is_empty() {
        println!("    flagged as printing errata: {errata:?}");
    }
    if let Some(dir) = &output.out {
        let path = write_json(
            &dir.join("example-poly.json"),
            &PolyOutput {
                command: "example-poly",
                tolerance: PRINT_TOL,
                report: &report,
                errata,
                sanity: &sanity,
                pass,
                stamp: output.stamp.stamp(),
            },
        )?;
        println!("report: {}", path.display());
    }
    Ok(pass)
}

fn solver_config(
    args: &SolverArgs,
    file: Option<&crate::problem::ProblemFile>,
    output: &Output,
) -> Result<SolverConfig, CliError> {
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        method: args
            .method
            .or(file.and_then(|f| f.method))
            .unwrap_or(d.method),
        step: args.step.or(file.and_then(|f| f.step)).unwrap_or(d.step),
        steps: args.steps.or(file.and_then(|f| f.steps)).unwrap_or(d.steps),
        timing_repeats: repeats(output),
    };
    if !(cfg.step.is_finite() && cfg.step > 0.0) {
        return Err(CliError::Usage(format!(
            "step must be positive, got {}",
            cfg.step
        )));
    }
    if cfg.steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    Ok(cfg)
}

fn lifted_trajectory(out: &ReductionOutcome) -> Trajectory {
    Trajectory {
        states: out.lifted.clone(),
        ..out.reduced.clone()
    }
}

struct TrajectoryFiles {
    full: PathBuf,
    lifted: PathBuf,
    reduced: PathBuf,
}

fn write_trajectories(dir: &Path, out: &ReductionOutcome) -> Result<TrajectoryFiles, CliError> {
    ensure_dir(dir)?;
    Ok(TrajectoryFiles {
        full: write_text(&dir.join("trajectory_full.csv"), &out.full.to_csv())?,
        lifted: write_text(
            &dir.join("trajectory_lifted.csv"),
            &lifted_trajectory(out).to_csv(),
        )?,
        reduced: write_text(&dir.join("trajectory_reduced.csv"), &out.reduced.to_csv())?,
    })
}

#[derive(Serialize)]
struct ReductionReport {
    command: &'static str,
    config: serde_json::Value,
    ranks: Vec<usize>,
    error_fro: f64,
    error_rel: f64,
    flops_full: usize,
    flops_reduced: usize,
    flops_per_step_full: usize,
    flops_per_step_reduced: usize,
    cost: ReductionCost,
    wall_ms_full: Option<f64>,
    wall_ms_reduced: Option<f64>,
    wall_ms_decomposition: Option<f64>,
    speedup: Option<f64>,
    orthonormality_error: f64,
    trajectory_csv_path: PathBuf,
    lifted_trajectory_csv_path: PathBuf,
    reduced_trajectory_csv_path: PathBuf,
    checks: Vec<Check>,
    pass: bool,
    stamp: Option<Stamp>,
}

fn reduction_report(
    command: &'static str,
    config: serde_json::Value,
    ranks: &[usize],
    out: &ReductionOutcome,
    files: TrajectoryFiles,
    checks: Vec<Check>,
    output: &Output,
) -> ReductionReport {
    ReductionReport {
        command,
        config,
        ranks: ranks.to_vec(),
        error_fro: out.error_fro,
        error_rel: out.error_rel,
        flops_full: out.cost.flops_full,
        flops_reduced: out.cost.flops_reduced,
        flops_per_step_full: out.full.flops_per_step,
        flops_per_step_reduced: out.reduced.flops_per_step,
        cost: out.cost.clone(),
        wall_ms_full: output.stamp.time(out.wall_ms_full),
        wall_ms_reduced: output.stamp.time(out.wall_ms_reduced),
        wall_ms_decomposition: output.stamp.time(out.wall_ms_decomposition),
        speedup: output.stamp.time(out.speedup()),
        orthonormality_error: out.factors.orthonormality_error(),
        trajectory_csv_path: files.full,
        lifted_trajectory_csv_path: files.lifted,
        reduced_trajectory_csv_path: files.reduced,
        pass: checks.iter().all(|c| c.pass),
        checks,
        stamp: output.stamp.stamp(),
    }
}

fn print_reduction(out: &ReductionOutcome, output: &Output) {
    println!(
        "    elements {} -> {}, flops per step {} -> {} (ratio {})",
        out.cost.full_elements,
        out.cost.core_elements,
        out.cost.flops_full,
        out.cost.flops_reduced,
        out.cost.ratio
    );
    println!(
        "    lifted vs full error: {:.3e} (relative {:.3e})",
        out.error_fro, out.error_rel
    );
    if output.stamp == StampMode::On {
        println!(
            "    integration {:.3} ms full, {:.3} ms reduced, speedup {:.2}x; decomposition {:.3} ms",
            out.wall_ms_full,
            out.wall_ms_reduced,
            out.speedup(),
            out.wall_ms_decomposition
        );
    }
}

pub fn example_reduce(
    seed: u64,
    ranks: &[usize],
    args: &SolverArgs,
    output: &Output,
) -> Result<bool, CliError> {
    let plant = PlantConfig {
        seed,
        ..PlantConfig::default()
    };
    if ranks.len() != 2 || ranks.iter().any(|&r| r == 0 || r > plant.n) {
        return Err(CliError::Usage(format!(
            "--ranks needs two values in 1..={}, got {ranks:?}",
            plant.n
        )));
    }
    let solver = solver_config(args, None, output)?;
    let sys = planted_system(&plant)?;
    let out = reduce_and_solve(&sys.generator, &sys.x0, &sys.direction, ranks, &solver)?;

    let n = plant.n;
    let order = plant.t_shape.len() + 2 * 2;
    let full_elements = n.pow(order as u32);
    let core_elements = full_elements / (n * n) * ranks[0] * ranks[1];
    let mut checks = vec![
        Check::holds(
            format!("element counts ({full_elements}, {core_elements})"),
            out.cost.full_elements == full_elements && out.cost.core_elements == core_elements,
        )
        .with_detail(format!(
            "{} -> {}",
            out.cost.full_elements, out.cost.core_elements
        )),
        Check::within(
            format!(
                "flop ratio {}",
                (n * n) as f64 / (ranks[0] * ranks[1]) as f64
            ),
            (out.cost.ratio - (n * n) as f64 / (ranks[0] * ranks[1]) as f64).abs(),
            0.0,
        ),
    ];
    let covers = ranks.iter().zip(&plant.ranks).all(|(r, p)| r >= p);
    if ranks.iter().all(|&r| r == n) {
        checks.push(Check::within(
            "full ranks reproduce the full trajectory",
            out.error_fro,
            FULL_RANK_TOL,
        ));
    } else if covers {
        checks.push(Check::within(
            "lifted reduced trajectory matches the full trajectory",
            out.error_fro,
            EXACT_REDUCTION_TOL,
        ));
    } else {
        let reference = reduce_and_solve(
            &sys.generator,
            &sys.x0,
            &sys.direction,
            &plant.ranks,
            &SolverConfig {
                timing_repeats: 1,
                ..solver
            },
        )?;
        checks.push(
            Check::holds(
                format!(
                    "error exceeds the error at the planted ranks {:?}",
                    plant.ranks
                ),
                out.error_fro > reference.error_fro,
            )
            .with_detail(format!(
                "{:.3e} vs {:.3e}",
                out.error_fro, reference.error_fro
            )),
        );
    }
    if output.stamp == StampMode::On {
        checks.push(
            Check::holds(
                format!("measured speedup >= {MIN_SPEEDUP}"),
                out.speedup() >= MIN_SPEEDUP,
            )
            .with_detail(format!("{:.2}x", out.speedup())),
        );
    }

    let dir = out_dir(output);
    let files = write_trajectories(&dir, &out)?;
    let config = json!({ "plant": plant, "solver": solver, "reduction_ranks": ranks });
    let report = reduction_report("example-reduce", config, ranks, &out, files, checks, output);
    println!(
        "{} planted {}-order system, seed {seed}, ranks {ranks:?}, {} x {} {} steps",
        verdict(report.pass),
        order,
        solver.steps,
        solver.step,
        solver.method
    );
    print_reduction(&out, output);
    for c in &report.checks {
        print_check(c, false);
    }
    let path = write_json(&dir.join("example-reduce.json"), &report)?;
    println!("report: {}", path.display());
    Ok(report.pass)
}

enum System {
    Plain(LinearOperator),
    MultiTime(MultiTimeSystem),
}

fn split_system(p: &Problem) -> Result<System, CliError> {
    let q = p.x0.order();
    let g = &p.generator;
    if g.order() == 2 * q {
        if g.shape()[..q] != *p.x0.shape() || g.shape()[q..] != *p.x0.shape() {
            return Err(CliError::Usage(format!(
                "generator shape {:?} does not act on x0 shape {:?}",
                g.shape(),
                p.x0.shape()
            )));
        }
        if p.direction.is_some() {
            return Err(CliError::Usage(
                "direction given but the generator has no time modes".into(),
            ));
        }
        return Ok(System::Plain(
            LinearOperator::new(g.clone()).map_err(|e| CliError::Usage(e.to_string()))?,
        ));
    }
    if g.order() < 2 * q {
        return Err(CliError::Usage(format!(
            "generator shape {:?} has lower order than two copies of x0 shape {:?}",
            g.shape(),
            p.x0.shape()
        )));
    }
    let sys = MultiTimeSystem::new(g.clone(), g.order() - 2 * q)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if sys.x_shape != p.x0.shape() {
        return Err(CliError::Usage(format!(
            "generator state shape {:?} does not match x0 shape {:?}",
            sys.x_shape,
            p.x0.shape()
        )));
    }
    match &p.direction {
        None => Err(CliError::Usage(format!(
            "generator has time modes {:?}; a direction of that shape is required",
            sys.t_shape
        ))),
        Some(d) if d.shape() != sys.t_shape => Err(CliError::Usage(format!(
            "direction shape {:?} does not match generator time shape {:?}",
            d.shape(),
            sys.t_shape
        ))),
        Some(_) => Ok(System::MultiTime(sys)),
    }
}

fn resolved(p: &Problem, cfg: &SolverConfig, ranks: Option<Vec<usize>>) -> Resolved {
    Resolved {
        problem: p.source.clone(),
        generator_shape: p.generator.shape().to_vec(),
        x0_shape: p.x0.shape().to_vec(),
        direction_shape: p.direction.as_ref().map(|d| d.shape().to_vec()),
        method: cfg.method,
        step: cfg.step,
        steps: cfg.steps,
        ranks,
        seed: p.file.seed,
    }
}

#[derive(Serialize)]
struct SolveReport {
    command: &'static str,
    config: Resolved,
    flops_per_step: usize,
    final_norm: f64,
    /// Distance of the final state from the exponential solution.
    error_vs_exact_final: f64,
    wall_ms_full: Option<f64>,
    trajectory_csv_path: PathBuf,
    pass: bool,
    stamp: Option<Stamp>,
}

pub fn solve(problem: &Path, args: &SolverArgs, output: &Output) -> Result<bool, CliError> {
    let p = load_problem(problem)?;
    let cfg = solver_config(args, Some(&p.file), output)?;
    let op = match split_system(&p)? {
        System::Plain(op) => op,
        System::MultiTime(sys) => {
            directional_generator(&sys, p.direction.as_ref().expect("checked"))?
        }
    };
    let mut best = f64::INFINITY;
    let mut traj = None;
    for _ in 0..cfg.timing_repeats {
        let start = Instant::now();
        traj = Some(integrate(&op, &p.x0, cfg.step, cfg.steps, cfg.method)?);
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
    }
    let traj = traj.expect("at least one run");
    let exact = solve_exact(&op, &p.x0, cfg.step * cfg.steps as f64)?;
    let dir = out_dir(output);
    let csv = write_text(&dir.join("trajectory.csv"), &traj.to_csv())?;
    let report = SolveReport {
        command: "solve",
        config: resolved(&p, &cfg, None),
        flops_per_step: traj.flops_per_step,
        final_norm: traj.last().frobenius_norm(),
        error_vs_exact_final: traj.last().max_abs_diff(&exact),
        wall_ms_full: output.stamp.time(best),
        trajectory_csv_path: csv,
        pass: true,
        stamp: output.stamp.stamp(),
    };
    println!(
        "PASS solve: {} steps of {} with {}, final norm {:.6e}, max deviation from exp solution {:.3e}",
        cfg.steps, cfg.step, cfg.method, report.final_norm, report.error_vs_exact_final
    );
    let path = write_json(&dir.join("solve.json"), &report)?;
    println!("report: {}", path.display());
    Ok(true)
}

#[derive(Serialize)]
struct ReduceReport {
    command: &'static str,
    input: PathBuf,
    input_shape: Vec<usize>,
    /// 1-based.
    modes: Vec<usize>,
    ranks: Vec<usize>,
    core_shape: Vec<usize>,
    core_path: PathBuf,
    factor_paths: Vec<PathBuf>,
    singular_values: Vec<Vec<f64>>,
    cost: ReductionCost,
    orthonormality_error: f64,
    relative_reconstruction_error: f64,
    checks: Vec<Check>,
    pass: bool,
    stamp: Option<Stamp>,
}

pub fn reduce(
    input: &Path,
    modes: &[usize],
    ranks: &[usize],
    binary: bool,
    output: &Output,
) -> Result<bool, CliError> {
    let a = read_input(input, "input")?;
    if modes.len() != ranks.len() {
        return Err(CliError::Usage(format!(
            "{} modes but {} ranks",
            modes.len(),
            ranks.len()
        )));
    }
    let mut pairs: Vec<(usize, usize)> = modes.iter().copied().zip(ranks.iter().copied()).collect();
    pairs.sort_unstable();
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(CliError::Usage(format!("mode {} listed twice", w[0].0)));
        }
    }
    for &(m, r) in &pairs {
        if m == 0 || m > a.order() {
            return Err(CliError::Usage(format!(
                "mode {m} out of range 1..={} for shape {:?}",
                a.order(),
                a.shape()
            )));
        }
        if r == 0 || r > a.shape()[m - 1] {
            return Err(CliError::Usage(format!(
                "rank {r} for mode {m} must be in 1..={}",
                a.shape()[m - 1]
            )));
        }
    }
    let modes0: Vec<usize> = pairs.iter().map(|p| p.0 - 1).collect();
    let ranks: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let f = partial_tucker(&a, &modes0, &ranks)?;
    let recon = f.reconstruct()?;
    let norm = a.frobenius_norm();
    let rel = if norm > 0.0 {
        (&recon - &a).frobenius_norm() / norm
    } else {
        0.0
    };
    let ortho = f.orthonormality_error();
    let cost = reduction_cost(a.shape(), &modes0, &ranks)?;

    let dir = out_dir(output);
    ensure_dir(&dir)?;
    let ext = if binary { "tnsr" } else { "json" };
    let core_path = dir.join(format!("core.{ext}"));
    io::write_tensor(&core_path, &f.core)?;
    let mut factor_paths = Vec::new();
    for (m, u) in modes0.iter().zip(&f.factors) {
        let path = dir.join(format!("factor_mode{}.{ext}", m + 1));
        io::write_tensor(&path, u)?;
        factor_paths.push(path);
    }
    let checks = vec![Check::within(
        "factor orthonormality",
        ortho,
        ORTHONORMALITY_TOL,
    )];
    let report = ReduceReport {
        command: "reduce",
        input: input.to_path_buf(),
        input_shape: a.shape().to_vec(),
        modes: modes0.iter().map(|m| m + 1).collect(),
        ranks: ranks.clone(),
        core_shape: f.core.shape().to_vec(),
        core_path,
        factor_paths,
        singular_values: f.singular_values.clone(),
        cost,
        orthonormality_error: ortho,
        relative_reconstruction_error: rel,
        pass: checks.iter().all(|c| c.pass),
        checks,
        stamp: output.stamp.stamp(),
    };
    println!(
        "{} reduce {:?} on modes {:?} to ranks {:?}: core {:?}, relative reconstruction error {:.3e}, orthonormality {:.1e}",
        verdict(report.pass),
        report.input_shape,
        report.modes,
        report.ranks,
        report.core_shape,
        rel,
        ortho
    );
    let path = write_json(&dir.join("reduce.json"), &report)?;
    println!("report: {}", path.display());
    Ok(report.pass)
}

pub fn reduce_solve(
    problem: &Path,
    ranks: Option<&[usize]>,
    max_error: Option<f64>,
    args: &SolverArgs,
    output: &Output,
) -> Result<bool, CliError> {
    let p = load_problem(problem)?;
    let cfg = solver_config(args, Some(&p.file), output)?;
    let System::MultiTime(sys) = split_system(&p)? else {
        return Err(CliError::Usage(
            "reduce-solve needs a generator with time modes and a direction".into(),
        ));
    };
    let ranks: Vec<usize> = ranks
        .map(|r| r.to_vec())
        .or_else(|| p.file.ranks.clone())
        .ok_or_else(|| {
            CliError::Usage("ranks required (--ranks or \"ranks\" in the problem file)".into())
        })?;
    if ranks.len() != sys.x_shape.len() {
        return Err(CliError::Usage(format!(
            "{} ranks given for a state of order {}",
            ranks.len(),
            sys.x_shape.len()
        )));
    }
    for (k, (&r, &n)) in ranks.iter().zip(&sys.x_shape).enumerate() {
        if r == 0 || r > n {
            return Err(CliError::Usage(format!(
                "rank {r} for state mode {} must be in 1..={n}",
                k + 1
            )));
        }
    }
    let direction = p.direction.as_ref().expect("checked");
    let out = reduce_and_solve(&p.generator, &p.x0, direction, &ranks, &cfg)?;
    let mut checks = Vec::new();
    if let Some(tol) = max_error {
        checks.push(Check::within(
            "lifted vs full Frobenius error",
            out.error_fro,
            tol,
        ));
    }
    let dir = out_dir(output);
    let files = write_trajectories(&dir, &out)?;
    let config = serde_json::to_value(resolved(&p, &cfg, Some(ranks.clone())))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = reduction_report("reduce-solve", config, &ranks, &out, files, checks, output);
    println!(
        "{} reduce-solve ranks {ranks:?}, {} x {} {} steps",
        verdict(report.pass),
        cfg.steps,
        cfg.step,
        cfg.method
    );
    print_reduction(&out, output);
    for c in &report.checks {
        print_check(c, false);
    }
    let path = write_json(&dir.join("reduce-solve.json"), &report)?;
    println!("report: {}", path.display());
    Ok(report.pass)
}
