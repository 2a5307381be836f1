//! `qcorr` — correlation-rank and discord analysis of bipartite states from
//! the command line. Every command is deterministic given its resolved
//! configuration (echoed into each output) and emits JSON or CSV.
//!
//! Exit codes: 0 success, 1 internal failure or failed property sweep,
//! 2 input validation, 3 domain precondition violation.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use output::{emit_csv, emit_json, sig9, sig9_opt, RunConfig};
use qcorr::geometry::ClassifyOptions;
use qcorr::{channels, correlation, discord, geometry, DensityMatrix, ProductEnsemble, Subsystem};

#[derive(Parser)]
#[command(
    name = "qcorr",
    about = "Correlation-matrix rank, quantum discord, and local-creation analysis of bipartite states",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation-matrix rank L, singular values, and discord witness flags.
    Rank(RankArgs),
    /// Numerical quantum discord with respect to one subsystem.
    Discord(DiscordArgs),
    /// Build the classical seed and local channels producing an ensemble's state.
    CreateLocal(CreateLocalArgs),
    /// Classify states into classical / low-L quantum / high-L quantum regions.
    Classify(ClassifyArgs),
    /// Discord and rank across a one-parameter state family, as CSV.
    Sweep(SweepArgs),
    /// Batch check that local channels never increase the correlation rank.
    Monotonicity(MonotonicityArgs),
}

#[derive(Args)]
struct RankArgs {
    /// Builtin literal (werner:Z, rho_l, rho_c, bell, schmidt2:D) or a state
    /// file path.
    #[arg(long)]
    state: String,
    /// Relative singular-value threshold for the rank decision.
    #[arg(long, default_value_t = qcorr::tol::RANK_REL)]
    tol_rank: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiscordArgs {
    #[arg(long)]
    state: String,
    /// Measured subsystem, A or B.
    #[arg(long)]
    subsystem: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CreateLocalArgs {
    /// Product-ensemble JSON file.
    #[arg(long)]
    ensemble: PathBuf,
    /// Directory receiving seed, channels, assembled state, and the
    /// verification record.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Single state to classify.
    #[arg(long, conflicts_with = "random")]
    state: Option<String>,
    /// Number of Hilbert-Schmidt-random samples to classify instead.
    #[arg(long, alias = "samples")]
    random: Option<usize>,
    /// Factor dimensions for random sampling.
    #[arg(long, num_args = 2, value_names = ["DIM_A", "DIM_B"])]
    dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = qcorr::tol::RANK_REL)]
    tol_rank: f64,
    #[arg(long, default_value_t = qcorr::tol::DISCORD_ZERO)]
    tol_discord: f64,
    /// Per-sample CSV destination in batch mode; report destination otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// State family; only `werner` is defined.
    #[arg(long, default_value = "werner")]
    family: String,
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    #[arg(long, default_value_t = 1.0)]
    to: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MonotonicityArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, num_args = 2, value_names = ["DIM_A", "DIM_B"], default_values_t = [2, 2])]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    init_thread_cap();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// QCORR_THREADS caps the rayon worker count for the whole process.
fn init_thread_cap() {
    if let Ok(v) = std::env::var("QCORR_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn exit_code_for(err: &qcorr::Error) -> u8 {
    use qcorr::Error::*;
    match err {
        NotLocallyProducible(_) => 3,
        InvalidState(_) | InvalidInput(_) | InvalidChannel(_) | DimensionMismatch(_) | Json(_)
        | Io(_) => 2,
        NoDependence => 3,
    }
}

fn run(command: Command) -> qcorr::Result<ExitCode> {
    match command {
        Command::Rank(args) => cmd_rank(args),
        Command::Discord(args) => cmd_discord(args),
        Command::CreateLocal(args) => cmd_create_local(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Monotonicity(args) => cmd_monotonicity(args),
    }
}

/// Resolves a builtin literal or loads a state file.
fn parse_state(spec: &str) -> qcorr::Result<DensityMatrix> {
    if let Some(z) = spec.strip_prefix("werner:") {
        let z: f64 = z
            .parse()
            .map_err(|_| qcorr::Error::InvalidInput(format!("bad werner parameter {z:?}")))?;
        return DensityMatrix::werner(z);
    }
    if let Some(d) = spec.strip_prefix("schmidt2:") {
        let d: usize = d
            .parse()
            .map_err(|_| qcorr::Error::InvalidInput(format!("bad schmidt2 dimension {d:?}")))?;
        return DensityMatrix::schmidt_rank2(d);
    }
    match spec {
        "rho_l" => Ok(DensityMatrix::rho_l()),
        "rho_c" => Ok(DensityMatrix::rho_c()),
        "bell" => Ok(DensityMatrix::bell()),
        path => DensityMatrix::load(path),
    }
}

#[derive(Serialize)]
struct RankReport {
    #[serde(flatten)]
    witness: correlation::DiscordWitnessReport,
    singular_values: Vec<f64>,
}

fn cmd_rank(args: RankArgs) -> qcorr::Result<ExitCode> {
    let mut config = RunConfig::new("rank");
    config.state = Some(args.state.clone());
    config.tol_rank = args.tol_rank;
    config.out = args.out.as_ref().map(|p| p.display().to_string());

    let rho = parse_state(&args.state)?;
    let analysis = correlation::analyze_with(&rho, args.tol_rank)?;
    let report = RankReport {
        witness: correlation::witness_from_analysis(&analysis),
        singular_values: analysis.singular_values().to_vec(),
    };
    emit_json(&config, report, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_discord(args: DiscordArgs) -> qcorr::Result<ExitCode> {
    let mut config = RunConfig::new("discord");
    config.state = Some(args.state.clone());
    config.subsystem = Some(args.subsystem.clone());
    config.out = args.out.as_ref().map(|p| p.display().to_string());

    let rho = parse_state(&args.state)?;
    let subsystem: Subsystem = args.subsystem.parse()?;
    let result = discord::discord(&rho, subsystem)?;
    emit_json(&config, result, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CreationVerification {
    terms: usize,
    d_min: usize,
    /// max-entry |assembled - target| of the local-creation round trip.
    reassembly_residual: f64,
    within_tolerance: bool,
    seed_rank_l: usize,
    output_rank_l: usize,
    files: Vec<String>,
}

fn cmd_create_local(args: CreateLocalArgs) -> qcorr::Result<ExitCode> {
    let mut config = RunConfig::new("create-local");
    config.ensemble = Some(args.ensemble.display().to_string());
    config.out_dir = Some(args.out_dir.display().to_string());

    let ensemble = ProductEnsemble::load(&args.ensemble)?;
    let creation = channels::synthesize_local_creation(&ensemble)?;
    let target = ensemble.assemble();
    let assembled = creation.output()?;
    let residual =
        qcorr::linalg::max_entry_norm(&(assembled.matrix() - target.matrix()));

    std::fs::create_dir_all(&args.out_dir)?;
    let files = [
        ("seed_state.json", creation.seed.to_json()?),
        ("channel_a.json", creation.channel_a.to_json()?),
        ("channel_b.json", creation.channel_b.to_json()?),
        ("assembled_state.json", assembled.to_json()?),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = args.out_dir.join(name);
        std::fs::write(&path, text + "\n")?;
        written.push(name.to_string());
    }

    let verification = CreationVerification {
        terms: ensemble.len(),
        d_min: ensemble.d_min(),
        reassembly_residual: residual,
        within_tolerance: residual <= qcorr::tol::RECONSTRUCTION,
        seed_rank_l: correlation::analyze(&creation.seed)?.rank_l(),
        output_rank_l: correlation::analyze(&assembled)?.rank_l(),
        files: written,
    };
    emit_json(
        &config,
        verification,
        Some(&args.out_dir.join("verification.json")),
    )?;
    println!(
        "create-local: wrote seed, channels, assembled state, verification to {} (residual {:.3e})",
        args.out_dir.display(),
        residual
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(args: ClassifyArgs) -> qcorr::Result<ExitCode> {
    let mut config = RunConfig::new("classify");
    config.state = args.state.clone();
    config.samples = args.random;
    config.seed = Some(args.seed);
    config.tol_rank = args.tol_rank;
    config.tol_discord = args.tol_discord;
    config.out = args.out.as_ref().map(|p| p.display().to_string());

    let opts = ClassifyOptions {
        rank_rel_tol: args.tol_rank,
        discord_zero_tol: args.tol_discord,
        ..Default::default()
    };

    if let Some(n) = args.random {
        let dims = args.dims.clone().ok_or_else(|| {
            qcorr::Error::InvalidInput("--random needs --dims DIM_A DIM_B".into())
        })?;
        config.dims = Some([dims[0], dims[1]]);
        let report = geometry::monte_carlo_regions(dims[0], dims[1], n, args.seed)?;
        if let Some(out) = &args.out {
            let rows: Vec<String> = report
                .samples
                .iter()
                .map(|s| {
                    format!(
                        "{},{},{},{},{},{}",
                        s.sample_id,
                        s.rank_l,
                        sig9_opt(s.discord_a),
                        sig9_opt(s.discord_b),
                        s.region,
                        sig9(s.min_sv_gap)
                    )
                })
                .collect();
            emit_csv(
                &config,
                "sample_id,rank_l,discord_a,discord_b,region,min_sv_gap",
                &rows,
                Some(out),
            )?;
        }
        let summary = MonteCarloSummary::from(&report);
        emit_json(&config, summary, None)?;
        return Ok(ExitCode::SUCCESS);
    }

    let spec = args.state.ok_or_else(|| {
        qcorr::Error::InvalidInput("classify needs --state or --random".into())
    })?;
    let rho = parse_state(&spec)?;
    let report = geometry::classify(&rho, spec.as_str(), None, &opts)?;
    emit_json(&config, report, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

/// Region fractions without the per-sample records.
#[derive(Serialize)]
struct MonteCarloSummary {
    dim_a: usize,
    dim_b: usize,
    n_samples: usize,
    seed: u64,
    classical: usize,
    quantum_low_l: usize,
    quantum_high_l: usize,
    fraction_classical: f64,
    fraction_quantum_low_l: f64,
    fraction_quantum_high_l: f64,
    min_sv_gap: f64,
}

impl From<&geometry::MonteCarloReport> for MonteCarloSummary {
    fn from(r: &geometry::MonteCarloReport) -> Self {
        MonteCarloSummary {
            dim_a: r.dim_a,
            dim_b: r.dim_b,
            n_samples: r.n_samples,
            seed: r.seed,
            classical: r.classical,
            quantum_low_l: r.quantum_low_l,
            quantum_high_l: r.quantum_high_l,
            fraction_classical: r.fraction_classical,
            fraction_quantum_low_l: r.fraction_quantum_low_l,
            fraction_quantum_high_l: r.fraction_quantum_high_l,
            min_sv_gap: r.min_sv_gap,
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> qcorr::Result<ExitCode> {
    if args.family != "werner" {
        return Err(qcorr::Error::InvalidInput(format!(
            "unknown family {:?}; available: werner",
            args.family
        )));
    }
    if args.step <= 0.0 || args.to < args.from {
        return Err(qcorr::Error::InvalidInput(
            "sweep needs step > 0 and to >= from".into(),
        ));
    }
    let mut config = RunConfig::new("sweep");
    config.family = Some(args.family.clone());
    config.from = Some(args.from);
    config.to = Some(args.to);
    config.step = Some(args.step);
    config.out = args.out.as_ref().map(|p| p.display().to_string());

    let mut zs = Vec::new();
    let mut k = 0usize;
    loop {
        let z = args.from + k as f64 * args.step;
        if z > args.to + 1e-12 {
            break;
        }
        zs.push(z.min(args.to));
        k += 1;
    }
    let rows = discord::discord_sweep(&zs)?;
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{}",
                sig9(r.z),
                sig9(r.discord),
                r.rank_l,
                r.witness_fired
            )
        })
        .collect();
    emit_csv(
        &config,
        "z,discord,rank_l,witness_fired",
        &lines,
        args.out.as_deref(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_monotonicity(args: MonotonicityArgs) -> qcorr::Result<ExitCode> {
    let mut config = RunConfig::new("monotonicity");
    config.trials = Some(args.trials);
    config.dims = Some([args.dims[0], args.dims[1]]);
    config.seed = Some(args.seed);
    config.out = args.out.as_ref().map(|p| p.display().to_string());

    let summary =
        channels::monotonicity_sweep(args.dims[0], args.dims[1], args.trials, args.seed)?;
    let violations = summary.violations;
    emit_json(&config, summary, args.out.as_deref())?;
    if violations > 0 {
        eprintln!("monotonicity violated in {violations} trials");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
