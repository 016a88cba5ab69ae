//! Command-line front end: construct fields from the known families,
//! validate and classify field documents, integrate the truncated evolution
//! with growth diagnostics, and run the randomized verification campaigns.
//!
//! Exit codes: 0 success (or verified), 1 negative verdict (non-solution
//! classification, failed validation, failed campaign), 2 usage or IO error.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use finmode::classifier::{
    certificate_to_json, classify_euler, classify_nsc, nsc_certificate_to_json, FlowCertificate,
};
use finmode::dynamics::{
    integrate, support_growth_report, write_diagnostics_csv, GalerkinSystem, IntegrationOptions,
};
use finmode::generate;
use finmode::lattice::{default_truncation, FrequencyLattice};
use finmode::rat::{Frequency, Rat};
use finmode::spectral_field::{
    int_mode, parse, remove_mean_drift, serialize, SpectralField, ZeroModeTrajectory,
};
use finmode::verify::{run_campaign, Campaign};

#[derive(Parser)]
#[command(
    name = "finmode",
    version,
    about = "Finite-mode incompressible flows: construction, classification, simulation"
)]
struct Cli {
    /// Worker threads for internal parallelism (0 keeps the default pool).
    /// Results do not depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a field from one of the known families and print its JSON.
    Make {
        /// One of: abc, tetrahedron, line, planar-perp, planar-q,
        /// beltrami-random.
        kind: String,
        /// First eigenfield amplitude (abc).
        #[arg(long = "A", default_value_t = 1.0, allow_negative_numbers = true)]
        a: f64,
        /// Second eigenfield amplitude (abc).
        #[arg(long = "B", default_value_t = 1.0, allow_negative_numbers = true)]
        b: f64,
        /// Third eigenfield amplitude (abc).
        #[arg(long = "C", default_value_t = 1.0, allow_negative_numbers = true)]
        c: f64,
        /// Plane normal or line direction as integers "x,y,z". Tilted
        /// planes need a perfect-square |normal|^2 (e.g. 1,2,2 or 2,3,6).
        #[arg(long, value_name = "X,Y,Z", default_value = "0,0,1", allow_hyphen_values = true)]
        normal: String,
        /// Circle size for the planar families (4, 6, 8 or 12).
        #[arg(long, default_value_t = 4)]
        p: usize,
        /// Vertical polynomial coefficients from degree one, "b1,b2,...".
        #[arg(long, value_name = "B1,B2,...", allow_hyphen_values = true)]
        q: Option<String>,
        /// Support size for the random families (two per conjugate pair).
        #[arg(long, default_value_t = 8)]
        modes: usize,
        /// Random seed for the random families.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Check the structural invariants of a field document.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Classify a field document and print its certificate.
    Classify {
        file: PathBuf,
        /// Viscosity; supplying nu or omega selects the viscous-rotating
        /// classification.
        #[arg(long, allow_negative_numbers = true)]
        nu: Option<f64>,
        /// Rotation rate about the third axis.
        #[arg(long, allow_negative_numbers = true)]
        omega: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Integrate the truncated evolution and report support growth.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        omega: f64,
        /// Truncation ball radius squared on the support lattice; default is
        /// twice the largest support norm.
        #[arg(long)]
        truncation: Option<i64>,
        /// Keep a snapshot every this many steps (0: endpoints only, or
        /// every step when --trajectory is set).
        #[arg(long, default_value_t = 0)]
        snapshot_every: usize,
        /// Write snapshots as JSON lines to this path.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Write per-step diagnostics CSV to this path.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Run a randomized verification campaign.
    Verify {
        /// One of: two-mode, rotation-loop, sip, beltrami-noninteraction,
        /// gauss-bonnet.
        lemma: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Make {
            kind,
            a,
            b,
            c,
            normal,
            p,
            q,
            modes,
            seed,
        } => cmd_make(&kind, a, b, c, &normal, p, q.as_deref(), modes, seed),
        Command::Validate { file, tol } => cmd_validate(&file, tol),
        Command::Classify {
            file,
            nu,
            omega,
            tol,
        } => cmd_classify(&file, nu, omega, tol),
        Command::Simulate {
            file,
            t_end,
            dt,
            nu,
            omega,
            truncation,
            snapshot_every,
            trajectory,
            diagnostics,
        } => cmd_simulate(
            &file,
            t_end,
            dt,
            nu,
            omega,
            truncation,
            snapshot_every,
            trajectory.as_deref(),
            diagnostics.as_deref(),
        ),
        Command::Verify {
            lemma,
            trials,
            seed,
        } => cmd_verify(&lemma, trials, seed),
    }
}

fn parse_triple(text: &str) -> Result<Frequency, String> {
    let parts: Vec<i64> = text
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad integer triple {text:?}: {e}"))?;
    if parts.len() != 3 {
        return Err(format!("expected three components, got {}", parts.len()));
    }
    Ok(int_mode(parts[0], parts[1], parts[2]))
}

fn parse_betas(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad coefficient {s:?}: {e}"))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(format!("coefficient {s:?} is not finite"))
                    }
                })
        })
        .collect()
}

fn even_pairs(modes: usize) -> Result<usize, String> {
    if modes == 0 || modes % 2 != 0 {
        return Err(format!(
            "--modes must be a positive even count (two per conjugate pair), got {modes}"
        ));
    }
    Ok(modes / 2)
}

#[allow(clippy::too_many_arguments)]
fn cmd_make(
    kind: &str,
    a: f64,
    b: f64,
    c: f64,
    normal: &str,
    p: usize,
    q: Option<&str>,
    modes: usize,
    seed: u64,
) -> Result<ExitCode, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = match kind {
        "abc" => generate::abc(a, b, c),
        "tetrahedron" => generate::tetrahedron(),
        "line" => {
            eprintln!("seed: {seed}");
            let direction = parse_triple(normal)?;
            generate::line(&direction, even_pairs(modes)?, &mut rng).map_err(|e| e.to_string())?
        }
        "planar-perp" => {
            eprintln!("seed: {seed}");
            let normal = parse_triple(normal)?;
            generate::planar_perp(&normal, p, &mut rng).map_err(|e| e.to_string())?
        }
        "planar-q" => {
            let normal = parse_triple(normal)?;
            let betas = parse_betas(q.ok_or("planar-q needs --q with the polynomial coefficients")?)?;
            generate::planar_q(&normal, p, &betas).map_err(|e| e.to_string())?
        }
        "beltrami-random" => {
            eprintln!("seed: {seed}");
            generate::beltrami_random(even_pairs(modes)?, &mut rng).map_err(|e| e.to_string())?
        }
        other => {
            return Err(format!(
                "unknown kind {other:?}; expected abc, tetrahedron, line, planar-perp, planar-q \
                 or beltrami-random"
            ))
        }
    };
    let doc = serialize(&field).map_err(|e| e.to_string())?;
    println!("{doc}");
    Ok(ExitCode::SUCCESS)
}

fn load_field(file: &std::path::Path) -> Result<SpectralField, String> {
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", file.display()))
}

fn cmd_validate(file: &std::path::Path, tol: f64) -> Result<ExitCode, String> {
    let field = load_field(file)?;
    let report = field.validate(tol);
    let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    let doc = json!({
        "ok": report.is_ok(),
        "violations": violations,
    });
    println!("{doc}");
    Ok(if report.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_classify(
    file: &std::path::Path,
    nu: Option<f64>,
    omega: Option<f64>,
    tol: f64,
) -> Result<ExitCode, String> {
    let field = load_field(file)?;
    if nu.is_some() || omega.is_some() {
        let certificate = classify_nsc(&field, nu.unwrap_or(0.0), omega.unwrap_or(0.0), tol)
            .map_err(|e| e.to_string())?;
        let doc = nsc_certificate_to_json(&certificate).map_err(|e| e.to_string())?;
        println!("{doc}");
        Ok(exit_for(&certificate.certificate))
    } else {
        let certificate = classify_euler(&field, tol).map_err(|e| e.to_string())?;
        let doc = certificate_to_json(&certificate).map_err(|e| e.to_string())?;
        println!("{doc}");
        Ok(exit_for(&certificate))
    }
}

fn exit_for(certificate: &FlowCertificate) -> ExitCode {
    if certificate.is_solution() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    file: &std::path::Path,
    t_end: f64,
    dt: f64,
    nu: f64,
    omega: f64,
    truncation: Option<i64>,
    snapshot_every: usize,
    trajectory_path: Option<&std::path::Path>,
    diagnostics_path: Option<&std::path::Path>,
) -> Result<ExitCode, String> {
    let loaded = load_field(file)?;
    // The mean decouples with a closed-form trajectory; split it off so the
    // oscillating part integrates cleanly, and report it separately.
    let had_drift = loaded.zero_mode.map_or(false, |z| z != [0.0; 3]);
    let (field, drift) = remove_mean_drift(&loaded, 0.0, omega);
    if had_drift {
        eprintln!("note: nonzero mean split off; it rotates in closed form and is reported in the summary");
    }

    let support = field.support_set();
    let truncation_set: BTreeSet<Frequency> = match truncation {
        Some(radius_sq) => {
            if radius_sq <= 0 {
                return Err("truncation radius squared must be positive".into());
            }
            let lattice = FrequencyLattice::from_generators(support.iter());
            lattice
                .points_in_ball(&Rat::from_integer(BigInt::from(radius_sq)))
                .into_iter()
                .filter(|n| !n.is_zero())
                .collect()
        }
        None => default_truncation(&support),
    };
    let system = GalerkinSystem::new(&truncation_set, nu, omega).map_err(|e| e.to_string())?;
    let snapshot_every = if trajectory_path.is_some() && snapshot_every == 0 {
        1
    } else {
        snapshot_every
    };
    let options = IntegrationOptions {
        t_end,
        dt,
        snapshot_every,
    };
    let result = integrate(&system, &field, &options).map_err(|e| e.to_string())?;

    if let Some(path) = trajectory_path {
        let mut out = Vec::new();
        for (t, snapshot) in &result.snapshots {
            let field_doc: serde_json::Value =
                serde_json::from_str(&serialize(snapshot).map_err(|e| e.to_string())?)
                    .expect("canonical serialization is valid JSON");
            let line = json!({"t": t, "field": field_doc});
            writeln!(out, "{line}").expect("vec write");
        }
        fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(path) = diagnostics_path {
        let mut out = Vec::new();
        write_diagnostics_csv(&mut out, &result).expect("vec write");
        fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))?;
    }

    let growth = support_growth_report(&result, &support);
    let growth_doc: Vec<serde_json::Value> = growth
        .iter()
        .map(|event| {
            json!({
                "frequency": event.frequency.to_string(),
                "first_time": event.first_time,
                "peak": event.peak,
            })
        })
        .collect();
    let first = result.rows.first().expect("at least the initial row");
    let last = result.rows.last().expect("at least the initial row");
    let final_doc: serde_json::Value =
        serde_json::from_str(&serialize(&result.final_field).map_err(|e| e.to_string())?)
            .expect("canonical serialization is valid JSON");
    let summary = json!({
        "t_end": result.final_time,
        "steps": result.rows.len() - 1,
        "truncation_size": system.len(),
        "aborted": result.aborted,
        "initial_energy": first.energy,
        "final_energy": last.energy,
        "max_realness_drift": result.max_realness_drift,
        "mean_velocity": mean_doc(&loaded, &drift, result.final_time),
        "support_growth": growth_doc,
        "final_field": final_doc,
    });
    println!("{summary}");
    Ok(ExitCode::SUCCESS)
}

fn mean_doc(loaded: &SpectralField, drift: &ZeroModeTrajectory, t: f64) -> serde_json::Value {
    if loaded.zero_mode.is_none() {
        return serde_json::Value::Null;
    }
    json!({"initial": drift.u_star, "at_t_end": drift.eval(t)})
}

fn cmd_verify(lemma: &str, trials: usize, seed: u64) -> Result<ExitCode, String> {
    let campaign = Campaign::parse(lemma).ok_or_else(|| {
        format!(
            "unknown lemma {lemma:?}; expected one of {}",
            Campaign::ALL
                .iter()
                .map(|c| c.name())
                .collect::<Vec<_>>()
                .join(", ")
        )
    })?;
    if trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    eprintln!("seed: {seed}");
    let report = run_campaign(campaign, trials, seed);
    if report.passed() {
        println!(
            "{}: pass ({} trials, max deviation {:.3e})",
            report.campaign.name(),
            report.trials,
            report.max_deviation
        );
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "{}: FAIL ({} of {} trials, max deviation {:.3e})",
            report.campaign.name(),
            report.failures,
            report.trials,
            report.max_deviation
        );
        if let Some(counterexample) = &report.first_counterexample {
            println!("counterexample: {counterexample}");
        }
        Ok(ExitCode::from(1))
    }
}
