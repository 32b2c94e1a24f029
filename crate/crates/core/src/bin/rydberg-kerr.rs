use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rydberg_kerr::oracle::{verify, VerifyConfig};
use rydberg_kerr::pipeline::run;
use rydberg_kerr::scenario::{builtin_names, Product, Scenario};
use rydberg_kerr::{Error, Result};

/// Rydberg slow-light Kerr medium: phase kernels, output fields,
/// correlators and homodyne Wigner functions.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Worker threads for parallel numerics (default: all cores)
    #[arg(long, global = true, env = "RYDBERG_KERR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Scenario TOML file
    #[arg(short, long, conflicts_with = "scenario")]
    config: Option<PathBuf>,

    /// Built-in scenario (see `list`)
    #[arg(short, long)]
    scenario: Option<String>,

    /// Override one key by dotted path, e.g. `--set medium.length=20`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Directory for data files and report.json
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-body phase kernel tables
    Kernel(ScenarioArgs),
    /// Kerr phase shift and suppression versus peak phase
    KerrScan(ScenarioArgs),
    /// Mean output field next to the classical Kerr prediction
    FieldOut(ScenarioArgs),
    /// Normally ordered correlators listed in the scenario
    Correlators(ScenarioArgs),
    /// Wigner functions of the probe mode
    Wigner(ScenarioArgs),
    /// Mass-term validity scan over (g/Omega, L/xi)
    MassValidity(ScenarioArgs),
    /// Every output listed in the scenario
    Run(ScenarioArgs),
    /// Closed-form correlators against the truncated-Fock oracle
    Verify(VerifyArgs),
    /// Print the resolved scenario as TOML
    Show(ScenarioArgs),
    /// List built-in scenarios
    List,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Mean photon number of the input pulse
    #[arg(long, default_value_t = 0.1)]
    nbar: f64,

    /// Grid sizes, coarsest first
    #[arg(long, value_delimiter = ',', default_values_t = [32, 64, 128])]
    cells: Vec<usize>,

    /// Write verify.json here
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn load(args: &ScenarioArgs) -> Result<Scenario> {
    match (&args.config, &args.scenario) {
        (Some(path), _) => Scenario::load(path, &args.overrides),
        (None, Some(name)) => Scenario::builtin(name, &args.overrides),
        (None, None) => Err(Error::Config("give --config FILE or --scenario NAME".into())),
    }
}

fn produce(args: &ScenarioArgs, products: &[Product]) -> Result<()> {
    let scenario = load(args)?;
    let report = run(&scenario, products, &args.out)?;
    for f in &report.files {
        println!("{}", args.out.join(f).display());
    }
    println!("{}", args.out.join("report.json").display());
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<()> {
    let cfg = VerifyConfig {
        nbar: args.nbar,
        cells: args.cells.clone(),
        ..VerifyConfig::default()
    };
    let studies = verify(&cfg)?;
    let mut ok = true;
    for s in &studies {
        let pass = s.finest_error() < 1e-3 && s.order_consistent(0.2);
        ok &= pass;
        let errors: Vec<String> = s.rows.iter().map(|r| format!("{:.3e}", r.rel_error)).collect();
        println!(
            "G_{},{}{:?}: rel errors [{}], order {:.3} {}",
            s.n,
            s.m,
            s.points,
            errors.join(", "),
            s.fitted_order,
            if pass { "ok" } else { "FAILED" }
        );
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&studies).map_err(|e| Error::Numerical(e.to_string()))?;
        std::fs::write(dir.join("verify.json"), json + "\n")?;
    }
    if ok {
        Ok(())
    } else {
        Err(Error::Numerical("oracle comparison failed".into()))
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Kernel(a) => produce(a, &[Product::Kernel]),
        Command::KerrScan(a) => produce(a, &[Product::KerrScan]),
        Command::FieldOut(a) => produce(a, &[Product::FieldOut]),
        Command::Correlators(a) => produce(a, &[Product::Correlators]),
        Command::Wigner(a) => produce(a, &[Product::Wigner]),
        Command::MassValidity(a) => produce(a, &[Product::MassValidity]),
        Command::Run(a) => produce(a, &[]),
        Command::Verify(a) => run_verify(a),
        Command::Show(a) => {
            let s = load(a)?;
            s.resolve()?;
            print!("{}", s.to_toml());
            Ok(())
        }
        Command::List => {
            for name in builtin_names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> u8 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    ExitCode::from(execute(&cli))
}
