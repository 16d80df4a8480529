use std::path::PathBuf;
use std::process::ExitCode;

use anyonwalk_cli::{run, validate, CliError, ConfigFile, Experiment, Severity, THREADS_ENV};
use clap::Parser;

/// Run an anyonic quantum walk experiment.
///
/// Experiments: walk, mixing, exit, channel, entropy, oracle-check.
/// The worker thread count is read from ANYONWALK_THREADS.
#[derive(Parser, Debug)]
#[command(name = "anyonwalk", version)]
struct Args {
    experiment: String,
    /// TOML file with configuration keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ising, hadamard, su2k:<k> or abelian:<phi>
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    s0: Option<i64>,
    #[arg(long)]
    c0: Option<u8>,
    #[arg(long)]
    t_max: Option<usize>,
    /// infinite, periodic, reflective or absorbing
    #[arg(long)]
    boundary: Option<String>,
    /// plat or markov
    #[arg(long)]
    closure: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated SU(2)_k levels.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<u32>>,
    #[arg(long)]
    fit_start: Option<usize>,
    #[arg(long)]
    words: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bytes.
    #[arg(long)]
    memory_budget: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Only validate the configuration.
    #[arg(long)]
    check: bool,
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(diags)) => {
            for d in diags {
                eprintln!("{d}");
            }
            ExitCode::from(2)
        }
        Err(e @ CliError::Usage(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(args: Args) -> Result<(), CliError> {
    init_threads()?;
    let experiment: Experiment = args.experiment.parse()?;
    let base = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(e) = base.experiment {
        if e != experiment {
            return Err(CliError::Usage(format!(
                "config file is for experiment {e}, command line asks for {experiment}"
            )));
        }
    }
    let over = ConfigFile {
        experiment: Some(experiment),
        model: args.model,
        sites: args.sites,
        s0: args.s0,
        c0: args.c0,
        t_max: args.t_max,
        boundary: args.boundary,
        closure: args.closure,
        epsilon: args.epsilon,
        ks: args.ks,
        fit_start: args.fit_start,
        words: args.words,
        seed: args.seed,
        memory_budget: args.memory_budget,
        output_dir: args.output_dir,
    };
    let file = base.merged(over);
    if args.check {
        let (_, diags) = validate(&file);
        for d in &diags {
            eprintln!("{d}");
        }
        if diags.iter().any(|d| d.severity == Severity::Error) {
            return Err(CliError::Invalid(Vec::new()));
        }
        return Ok(());
    }
    let manifest = run(&file)?;
    for w in &manifest.warnings {
        eprintln!("{w}");
    }
    let dir = manifest.config.output_dir.display();
    for o in &manifest.outputs {
        println!("{dir}/{}  sha256:{}", o.file, o.sha256);
    }
    println!("{dir}/manifest.json");
    Ok(())
}
