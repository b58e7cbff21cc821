use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use spin32_core::profile::Endpoint;
use spin32_core::radial::{
    build_a16, build_a8, parity_embed, project_onto_constraints, ConstraintForm, ConstraintSet,
    RadialSystem, REDUCED,
};
use spin32_core::solver::{
    endpoint_launch, frobenius, integrate, IndicialData, SolutionTrace, Tolerances,
};
use spin32_core::{algebra, ansatz, geometry, wigner, CheckReport, Complex64, HalfInt};

use crate::config::{Mode, Range, RunConfig, Task};
use crate::error::CliError;
use crate::output::{trace_csv, Output};

/// Residuals above this multiple of the tolerance raise a warning.
pub const RESIDUAL_WARNING_FACTOR: f64 = 100.0;

/// What a command hands back besides the files it wrote.
#[derive(Debug, Default)]
pub struct Report {
    pub checks: CheckReport,
    pub warnings: Vec<String>,
    pub summary: Value,
    /// Printed on stdout after the manifest is written.
    pub stdout: Option<String>,
}

pub fn execute(cfg: &RunConfig, out: &mut Output) -> Result<Report, CliError> {
    match &cfg.task {
        Task::Verify { suite, js, points } => verify(suite, js, *points, cfg.seed, out),
        Task::Reduce { mode, omega } => reduce(mode, *omega, out),
        Task::Indices { mode, endpoints } => indices(mode, endpoints, out),
        Task::Integrate {
            mode,
            range,
            launch,
            compatible,
            raw,
        } => integrate_one(mode, range, *launch, *compatible, *raw, cfg.seed, out),
        Task::Sweep {
            modes,
            range,
            threads,
        } => sweep(modes, range, *threads, cfg.seed, out),
    }
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s.into_bytes()
}

fn verify(
    suite: &str,
    js: &[HalfInt],
    points: Option<usize>,
    seed: u64,
    out: &mut Output,
) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match suite {
        "algebra" => algebra::verify_suite(),
        "geometry" => geometry::verify_suite(&mut rng, points.unwrap_or(20)),
        "wigner" => wigner::verify_suite(js, points.unwrap_or(100))?,
        "ansatz" => {
            let mut rep = CheckReport::new();
            for &j in js {
                rep.extend(ansatz::verify_suite(&mut rng, j, points.unwrap_or(10), 10)?);
            }
            rep
        }
        other => unreachable!("suite {other} is rejected by the parser"),
    };
    let worst = checks.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let failed = checks.failures().count();
    out.data(
        &format!("verify-{suite}.json"),
        &json_bytes(&json!(checks.checks)),
    )?;
    Ok(Report {
        summary: json!({ "checks": checks.checks.len(), "failed": failed, "max_residual": worst }),
        checks,
        ..Report::default()
    })
}

fn reduce(mode: &Mode, omega: f64, out: &mut Output) -> Result<Report, CliError> {
    let label = mode.label();
    let a8 = build_a8(&label, mode.delta, omega)?;
    let a16 = build_a16(&label, omega)?;
    let p = parity_embed(mode.delta);
    let exactness = (&a16 * &p).max_abs_diff(&(&p * &a8));
    let upper: Vec<usize> = (0..REDUCED).collect();
    // A8 minus the (f,g) block of A16 is what the (h,nu) partners feed back through the mass
    let coupling = a8.max_abs_diff(&a16.select(&upper, &upper));
    let constraints = ConstraintSet::new(&label, mode.delta, ConstraintForm::Assembled);
    let rows = constraints.rows(omega)?;
    let sys = RadialSystem::reduced(&label, mode.delta);

    let mut checks = CheckReport::new();
    checks.push("reduction exactness |A16 P - P A8|", exactness, 1e-13);
    if mode.mass == 0.0 {
        checks.push(
            "mass coupling vanishes at M = 0",
            coupling,
            f64::MIN_POSITIVE,
        );
    }
    let body = json!({
        "mode": mode,
        "omega": omega,
        "active": sys.active(),
        "a8": a8,
        "constraint_rows": rows,
        "reduction_exactness": exactness,
        "mass_coupling": coupling,
        "decoupled": coupling == 0.0,
    });
    let bytes = json_bytes(&body);
    out.data("reduce.json", &bytes)?;
    Ok(Report {
        checks,
        summary: json!({ "reduction_exactness": exactness, "mass_coupling": coupling }),
        stdout: Some(String::from_utf8(bytes).expect("utf8")),
        ..Report::default()
    })
}

fn indicial_checks(data: &IndicialData, checks: &mut CheckReport) {
    let tag = match data.endpoint {
        Endpoint::Origin => "origin",
        Endpoint::Horizon => "horizon",
    };
    checks.push(
        format!("{tag} residue extrapolation"),
        data.extrapolation_error,
        frobenius::EXTRAPOLATION_TOLERANCE,
    );
    checks.push(
        format!("{tag} residue vs analytic"),
        data.analytic_mismatch,
        1e-8,
    );
    let eig = data
        .exponents
        .iter()
        .map(|e| e.residual)
        .fold(0.0, f64::max);
    checks.push(format!("{tag} eigenpair residual"), eig, 1e-8);
}

fn indices(mode: &Mode, endpoints: &[Endpoint], out: &mut Output) -> Result<Report, CliError> {
    let sys = RadialSystem::reduced(&mode.label(), mode.delta);
    let mut checks = CheckReport::new();
    let mut data = Vec::new();
    for &end in endpoints {
        let d = frobenius(&sys, end)?;
        indicial_checks(&d, &mut checks);
        data.push(d);
    }
    let summary: Vec<Value> = data
        .iter()
        .map(|d| {
            json!({
                "endpoint": d.endpoint,
                "exponents": d.exponent_values().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "defective": d.exponents.iter().any(|e| e.is_defective()),
            })
        })
        .collect();
    out.data(
        "indices.json",
        &json_bytes(&json!({ "mode": mode, "endpoints": data })),
    )?;
    Ok(Report {
        checks,
        summary: json!(summary),
        ..Report::default()
    })
}

fn random_active(rng: &mut ChaCha8Rng, active: &[usize]) -> [Complex64; REDUCED] {
    let mut y = [Complex64::new(0.0, 0.0); REDUCED];
    for &k in active {
        y[k] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    y
}

fn run_trace(
    sys: &RadialSystem,
    set: &ConstraintSet,
    range: &Range,
    y0: &[Complex64; REDUCED],
) -> Result<SolutionTrace, CliError> {
    Ok(integrate(
        sys,
        set,
        range.from,
        range.to,
        y0,
        &Tolerances::new(range.tol),
    )?)
}

fn residual_summary(trace: &SolutionTrace) -> Value {
    json!({
        "accepted_steps": trace.accepted_steps(),
        "rejected_steps": trace.rejected,
        "evaluations": trace.evaluations,
        "initial_residuals": trace.samples[0].residuals,
        "max_residual_algebraic": trace.max_residual(0..2),
        "max_residual_divergence": trace.max_residual(2..4),
    })
}

fn residual_warning(trace: &SolutionTrace, tol: f64, what: &str) -> Option<String> {
    let worst = trace.max_residual(0..4);
    (worst > RESIDUAL_WARNING_FACTOR * tol).then(|| {
        format!("{what}: constraint residual {worst:.3e} exceeds {RESIDUAL_WARNING_FACTOR} x tol")
    })
}

fn integrate_one(
    mode: &Mode,
    range: &Range,
    launch: Option<usize>,
    compatible: bool,
    raw: bool,
    seed: u64,
    out: &mut Output,
) -> Result<Report, CliError> {
    let sys = RadialSystem::reduced(&mode.label(), mode.delta);
    let set = sys.constraints(ConstraintForm::Assembled)?;
    let (y0, start) = match launch {
        Some(index) => {
            let data = frobenius(&sys, Endpoint::Origin)?;
            let l = endpoint_launch(&sys, &data, index, range.from, compatible)?;
            let y: [Complex64; REDUCED] = std::array::from_fn(|k| l.state[k]);
            (y, serde_json::to_value(&l).expect("json"))
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let drawn = random_active(&mut rng, sys.active());
            let y = if raw {
                drawn
            } else {
                project_onto_constraints(&set, range.from, &drawn)?
            };
            (y, json!({ "random": true, "projected": !raw }))
        }
    };
    let trace = run_trace(&sys, &set, range, &y0)?;
    out.data("integrate.csv", trace_csv(&trace).as_bytes())?;
    let mut summary = residual_summary(&trace);
    summary["start"] = start;
    Ok(Report {
        warnings: residual_warning(&trace, range.tol, "integrate.csv")
            .into_iter()
            .collect(),
        summary,
        ..Report::default()
    })
}

struct JobResult {
    file: String,
    csv: String,
    summary: Value,
    warning: Option<String>,
}

fn sweep(
    modes: &[Mode],
    range: &Range,
    threads: Option<usize>,
    seed: u64,
    out: &mut Output,
) -> Result<Report, CliError> {
    let job = |(index, mode): (usize, &Mode)| -> Result<JobResult, CliError> {
        let sys = RadialSystem::reduced(&mode.label(), mode.delta);
        let set = sys.constraints(ConstraintForm::Assembled)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
        let y0 =
            project_onto_constraints(&set, range.from, &random_active(&mut rng, sys.active()))?;
        let trace = run_trace(&sys, &set, range, &y0)?;
        let file = format!("sweep-{index:03}.csv");
        let mut summary = residual_summary(&trace);
        summary["index"] = json!(index);
        summary["mode"] = json!(mode);
        summary["file"] = json!(file);
        Ok(JobResult {
            warning: residual_warning(&trace, range.tol, &file),
            csv: trace_csv(&trace),
            file,
            summary,
        })
    };
    let run = || modes.par_iter().enumerate().map(job).collect::<Vec<_>>();
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(run),
        None => run(),
    };
    let mut jobs = Vec::new();
    let mut warnings = Vec::new();
    for r in results {
        let r = r?;
        out.data(&r.file, r.csv.as_bytes())?;
        warnings.extend(r.warning);
        jobs.push(r.summary);
    }
    out.data("sweep.json", &json_bytes(&json!(jobs)))?;
    Ok(Report {
        warnings,
        summary: json!({ "jobs": jobs.len() }),
        ..Report::default()
    })
}
