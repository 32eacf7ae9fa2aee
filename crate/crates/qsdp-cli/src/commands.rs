//! Command implementations: gen, solve, sweep, gamma-probe.
//!
//! All artifacts land under the command's --out-dir (gen writes the single
//! --out file); files are written atomically (temp + rename) and listed in a
//! run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use qsdp_core::{
    eps_sweep, gamma_probe, solve_with_clock, ProblemInstance, Regularizer, RungOutcome,
    SolveReport, SolveStatus, SolverConfig,
};

use crate::exit_codes;
use crate::schema::{
    parse_spec, ConfigEcho, InputDigest, MatrixJson, ParsedSpec, ProblemJson, ReportJson,
    RunManifest, SpecJson,
};

#[derive(Debug, Clone)]
pub struct SolveFlags {
    pub reg: String,
    pub eps: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub memory: usize,
    pub divergence_norm: f64,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

impl SolveFlags {
    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iters: self.max_iters,
            memory: self.memory,
            divergence_norm: self.divergence_norm,
            ..SolverConfig::default()
        }
    }

    fn config_echo(&self, epsilon: f64) -> ConfigEcho {
        let cfg = self.solver_config();
        ConfigEcho {
            reg: self.reg.clone(),
            epsilon,
            tol: cfg.tol,
            max_iters: cfg.max_iters,
            memory: cfg.memory,
            wolfe_c1: cfg.wolfe_c1,
            wolfe_c2: cfg.wolfe_c2,
            divergence_norm: cfg.divergence_norm,
            seed: self.seed,
        }
    }
}

/// Loads a problem either from a raw problem file or from an instance spec.
pub fn load_instance(path: &Path, seed_flag: Option<u64>) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read input file {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("malformed JSON in {}", path.display()))?;
    let obj = value
        .as_object()
        .with_context(|| format!("{}: expected a JSON object", path.display()))?;
    if obj.contains_key("family") {
        let spec: SpecJson = serde_json::from_value(value.clone())
            .with_context(|| format!("invalid instance spec in {}", path.display()))?;
        match parse_spec(&spec, seed_flag)? {
            ParsedSpec::Family(f) => f.build().map_err(|e| anyhow::anyhow!("{e}")),
            ParsedSpec::Inline(inst) => Ok(*inst),
        }
    } else if obj.contains_key("H") {
        let problem: ProblemJson = serde_json::from_value(value.clone())
            .with_context(|| format!("invalid problem file {}", path.display()))?;
        problem.to_instance()
    } else {
        bail!(
            "{}: neither an instance spec (family/params/seed) nor a problem file (epsilon/H/Q/q)",
            path.display()
        );
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("cannot move into {}", path.display()))?;
    Ok(())
}

fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => exit_codes::OK,
        SolveStatus::MaxIters => exit_codes::MAX_ITERS,
        SolveStatus::Diverged => exit_codes::DIVERGED,
        SolveStatus::NumericalFailure => exit_codes::NUMERICAL_FAILURE,
    }
}

fn report_json(
    inst: &ProblemInstance,
    report: &SolveReport,
    echo: ConfigEcho,
) -> Result<ReportJson> {
    let slackness = inst
        .slackness_residual(&report.pi_star, &report.alpha_star)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let margin = inst
        .zero_temp_dual_feasible(&report.alpha_star, 0.0)
        .map_err(|e| anyhow::anyhow!("{e}"))?
        .margin;
    Ok(ReportJson {
        config: echo,
        status: report.status.as_str().to_string(),
        alpha_star: report.alpha_star.clone(),
        dual_value: report.dual_value,
        duality_gap: report.duality_gap,
        slackness_residual: slackness,
        residuals: report.residuals.clone(),
        final_grad_norm: report.final_grad_norm,
        zero_temp_margin: margin,
        omega0: report.pi_star.min_eigenvalue(),
        iterations: report.iterations,
        evaluations: report.evaluations,
    })
}

fn trace_csv(report: &SolveReport) -> String {
    let mut out = String::from("iter,dual_value,grad_norm,seconds\n");
    for row in &report.trace {
        out.push_str(&format!(
            "{},{:e},{:e},{:.6}\n",
            row.iter, row.dual_value, row.grad_norm, row.seconds
        ));
    }
    out
}

pub fn run_gen(
    spec_path: Option<&Path>,
    family: Option<&str>,
    params: Option<&str>,
    seed: Option<u64>,
    out: &Path,
) -> Result<i32> {
    let spec: SpecJson = match (spec_path, family) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read spec {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("malformed JSON in {}", path.display()))?
        }
        (None, Some(fam)) => {
            let raw = params.context("--family requires --params with a JSON object")?;
            let text = if let Some(file) = raw.strip_prefix('@') {
                fs::read_to_string(file).with_context(|| format!("cannot read params {file}"))?
            } else {
                raw.to_string()
            };
            SpecJson {
                family: fam.to_string(),
                params: serde_json::from_str(&text).context("malformed params JSON")?,
                seed: None,
            }
        }
        _ => bail!("pass exactly one of --spec FILE or --family NAME with --params"),
    };

    let inst = match parse_spec(&spec, seed)? {
        ParsedSpec::Family(f) => f.build().map_err(|e| anyhow::anyhow!("{e}"))?,
        ParsedSpec::Inline(inst) => *inst,
    };
    let json = serde_json::to_string_pretty(&ProblemJson::from_instance(&inst))?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_atomic(out, json.as_bytes())?;
    println!(
        "wrote {} (dim {}, {} observables)",
        out.display(),
        inst.dim(),
        inst.observables().len()
    );
    Ok(exit_codes::OK)
}

pub fn run_solve(input: &Path, flags: &SolveFlags, argv: Vec<String>) -> Result<i32> {
    let mut inst = load_instance(input, flags.seed)?;
    if let Some(eps) = flags.eps {
        inst = inst.with_epsilon(eps);
    }
    let reg = Regularizer::from_cli_token(&flags.reg).map_err(|e| anyhow::anyhow!("{e}"))?;
    let cfg = flags.solver_config();

    let started = Instant::now();
    let mut clock = move || started.elapsed().as_secs_f64();
    let report =
        solve_with_clock(&inst, reg, &cfg, &mut clock).map_err(|e| anyhow::anyhow!("{e}"))?;

    fs::create_dir_all(&flags.out_dir)?;
    let report_path = flags.out_dir.join("report.json");
    let trace_path = flags.out_dir.join("trace.csv");
    let manifest_path = flags.out_dir.join("manifest.json");

    let echo = flags.config_echo(inst.epsilon());
    let rj = report_json(&inst, &report, echo.clone())?;
    write_atomic(&report_path, serde_json::to_string_pretty(&rj)?.as_bytes())?;
    write_atomic(&trace_path, trace_csv(&report).as_bytes())?;

    let manifest = RunManifest {
        command: argv,
        config: serde_json::to_value(&echo)?,
        inputs: vec![InputDigest {
            path: input.display().to_string(),
            sha256: sha256_file(input)?,
        }],
        outputs: vec![
            report_path.display().to_string(),
            trace_path.display().to_string(),
            manifest_path.display().to_string(),
        ],
        versions: crate::schema::versions(),
    };
    write_atomic(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;

    println!(
        "status {}  dual {}  grad {:.3e}  iters {}",
        report.status.as_str(),
        report.dual_value,
        report.final_grad_norm,
        report.iterations
    );
    Ok(status_exit_code(report.status))
}

pub fn run_sweep(
    input: &Path,
    ladder: &[f64],
    jobs: usize,
    flags: &SolveFlags,
    argv: Vec<String>,
) -> Result<i32> {
    let inst = load_instance(input, flags.seed)?;
    let reg = Regularizer::from_cli_token(&flags.reg).map_err(|e| anyhow::anyhow!("{e}"))?;
    let cfg = flags.solver_config();
    if ladder.is_empty() {
        bail!("--eps-ladder needs at least one value");
    }

    let jobs = effective_jobs(jobs);
    let rungs: Vec<RungRow> = if jobs <= 1 {
        eps_sweep(&inst, reg, ladder, &cfg)
            .map_err(|e| anyhow::anyhow!("{e}"))?
            .into_iter()
            .map(|rung| match rung.outcome {
                RungOutcome::Solved {
                    report,
                    slackness,
                    zero_temp_margin,
                } => (
                    rung.epsilon,
                    Some((report, slackness, zero_temp_margin)),
                    None,
                ),
                RungOutcome::Failed(e) => (rung.epsilon, None, Some(e.to_string())),
            })
            .collect()
    } else {
        // independent cold-started rungs; warm starting needs the serial path
        parallel_rungs(&inst, reg, ladder, &cfg, jobs)
    };

    fs::create_dir_all(&flags.out_dir)?;
    let mut outputs = Vec::new();
    let mut sweep_csv = String::from("epsilon,dual_value,slackness_residual,zero_temp_margin\n");
    for (idx, (eps, outcome, error)) in rungs.iter().enumerate() {
        let rung_path = flags.out_dir.join(format!("report_rung{idx:02}.json"));
        match outcome {
            Some((report, slackness, margin)) => {
                sweep_csv.push_str(&format!(
                    "{:e},{:e},{:e},{:e}\n",
                    eps, report.dual_value, slackness, margin
                ));
                let echo = flags.config_echo(*eps);
                let rj = report_json(&inst.with_epsilon(*eps), report, echo)?;
                write_atomic(&rung_path, serde_json::to_string_pretty(&rj)?.as_bytes())?;
            }
            None => {
                sweep_csv.push_str(&format!("{:e},NaN,NaN,NaN\n", eps));
                let msg = serde_json::json!({
                    "epsilon": eps,
                    "error": error.clone().unwrap_or_default(),
                });
                write_atomic(&rung_path, serde_json::to_string_pretty(&msg)?.as_bytes())?;
            }
        }
        outputs.push(rung_path.display().to_string());
    }
    let sweep_path = flags.out_dir.join("sweep.csv");
    write_atomic(&sweep_path, sweep_csv.as_bytes())?;
    outputs.push(sweep_path.display().to_string());

    let manifest_path = flags.out_dir.join("manifest.json");
    outputs.push(manifest_path.display().to_string());
    let manifest = RunManifest {
        command: argv,
        config: serde_json::json!({
            "solve": serde_json::to_value(flags.config_echo(inst.epsilon()))?,
            "eps_ladder": ladder,
            "jobs": jobs,
        }),
        inputs: vec![InputDigest {
            path: input.display().to_string(),
            sha256: sha256_file(input)?,
        }],
        outputs,
        versions: crate::schema::versions(),
    };
    write_atomic(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;

    println!(
        "swept {} rungs into {}",
        ladder.len(),
        flags.out_dir.display()
    );
    Ok(exit_codes::OK)
}

fn effective_jobs(requested: usize) -> usize {
    let cap = std::env::var("QSDP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(usize::MAX);
    requested.clamp(1, cap)
}

type RungRow = (f64, Option<(SolveReport, f64, f64)>, Option<String>);

fn parallel_rungs(
    inst: &ProblemInstance,
    reg: Regularizer,
    ladder: &[f64],
    cfg: &SolverConfig,
    jobs: usize,
) -> Vec<RungRow> {
    let mut rows: Vec<Option<RungRow>> = ladder.iter().map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let rows_mutex = std::sync::Mutex::new(&mut rows);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(ladder.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if k >= ladder.len() {
                    break;
                }
                let eps = ladder[k];
                let inst_eps = inst.with_epsilon(eps);
                let row = match qsdp_core::solve(&inst_eps, reg, cfg) {
                    Ok(report) => {
                        let slackness = inst_eps
                            .slackness_residual(&report.pi_star, &report.alpha_star)
                            .unwrap_or(f64::NAN);
                        let margin = inst_eps
                            .zero_temp_dual_feasible(&report.alpha_star, 0.0)
                            .map(|z| z.margin)
                            .unwrap_or(f64::NAN);
                        (eps, Some((report, slackness, margin)), None)
                    }
                    Err(e) => (eps, None, Some(e.to_string())),
                };
                rows_mutex.lock().unwrap()[k] = Some(row);
            });
        }
    });
    rows.into_iter()
        .map(|r| r.expect("all rungs filled"))
        .collect()
}

pub fn run_gamma_probe(
    matrix_path: &Path,
    reg_token: &str,
    ladder: &[f64],
    out_dir: &Path,
    argv: Vec<String>,
) -> Result<i32> {
    let text = fs::read_to_string(matrix_path)
        .with_context(|| format!("cannot read matrix file {}", matrix_path.display()))?;
    let mj: MatrixJson = serde_json::from_str(&text)
        .with_context(|| format!("malformed JSON in {}", matrix_path.display()))?;
    let w = mj.to_op()?;
    let reg = Regularizer::from_cli_token(reg_token).map_err(|e| anyhow::anyhow!("{e}"))?;
    if ladder.is_empty() || ladder.iter().any(|&e| e <= 0.0 || e.is_nan()) {
        bail!("--eps-ladder must list positive epsilons");
    }

    let samples = gamma_probe(reg, &w, ladder);
    let mut csv = String::from("epsilon,value\n");
    for (eps, v) in &samples {
        csv.push_str(&format!("{:e},{:e}\n", eps, v));
    }
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("gamma.csv");
    write_atomic(&csv_path, csv.as_bytes())?;

    let manifest_path = out_dir.join("manifest.json");
    let manifest = RunManifest {
        command: argv,
        config: serde_json::json!({"reg": reg.cli_token(), "eps_ladder": ladder}),
        inputs: vec![InputDigest {
            path: matrix_path.display().to_string(),
            sha256: sha256_file(matrix_path)?,
        }],
        outputs: vec![
            csv_path.display().to_string(),
            manifest_path.display().to_string(),
        ],
        versions: crate::schema::versions(),
    };
    write_atomic(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    println!("wrote {}", csv_path.display());
    Ok(exit_codes::OK)
}
