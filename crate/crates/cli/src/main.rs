use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use floquet_tfim_cli::commands::{self, SweepGrid};
use floquet_tfim_cli::error::{CliError, Result};
use floquet_tfim_cli::scenarios::{run_scenario, scenario_info, SCENARIOS};

#[derive(Parser)]
#[command(name = "floquet-tfim", version, about = "Driven transverse-field Ising chain experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; without it the matching built-in scenario runs
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time step (config units with --config, scenario units otherwise)
    #[arg(long)]
    dt: Option<f64>,
    /// Final time (config units with --config, scenario units otherwise)
    #[arg(long = "t-final")]
    t_final: Option<f64>,
    /// Worker threads for sweeps [default: available parallelism]
    #[arg(long)]
    workers: Option<usize>,
    /// key=value override; dotted config paths with --config, scenario
    /// parameters otherwise
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a config file and write its observables
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the mid-bond drive frequency and classify the switch
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        omega_min: f64,
        #[arg(long, default_value_t = 3.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 0.0151)]
        d_omega: f64,
        #[arg(long, default_value_t = floquet_tfim::observables::SWITCH_THRESHOLD)]
        threshold: f64,
    },
    /// Stroboscopic dynamics from the one-period propagator
    Strobe {
        #[command(flatten)]
        common: Common,
        /// Drive period (with --config; inferred from a single drive otherwise)
        #[arg(long)]
        period: Option<f64>,
        /// Number of periods (with --config)
        #[arg(long, default_value_t = 10_000)]
        periods: usize,
    },
    /// Zeroth and first Magnus terms
    Magnus {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        period: Option<f64>,
        #[arg(long, default_value_t = floquet_tfim::floquet::DEFAULT_QUADRATURE_POINTS)]
        nodes: usize,
    },
    /// Locally driven chain and its rotating-wave effective couplings
    Local {
        #[command(flatten)]
        common: Common,
    },
    /// Zero-average Bessel control function traces
    Control {
        #[command(flatten)]
        common: Common,
    },
    /// Run a named scenario from the catalogue
    Scenario {
        /// Scenario name (see --list)
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn out_dir(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out").join(default))
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    fn config_file(&self) -> Result<Option<floquet_tfim::config::ConfigFile>> {
        self.config
            .as_ref()
            .map(|p| commands::load_config(p, &self.overrides, self.dt, self.t_final))
            .transpose()
    }

    /// Scenario overrides including `--dt` and `--t-final`.
    fn scenario_overrides(&self) -> Vec<String> {
        let mut all = self.overrides.clone();
        if let Some(dt) = self.dt {
            all.push(format!("dt={dt}"));
        }
        if let Some(t) = self.t_final {
            all.push(format!("t_final={t}"));
        }
        all
    }

    fn scenario(&self, name: &str) -> Result<serde_json::Value> {
        let report = run_scenario(name, &self.scenario_overrides(), &self.out_dir(name), self.workers())?;
        Ok(report.summary)
    }
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Simulate { common } => {
            let file = common.config_file()?.ok_or_else(|| CliError::Usage("simulate needs --config".into()))?;
            commands::simulate(&file, &common.out_dir("simulate"))
        }
        Command::Sweep { common, omega_min, omega_max, d_omega, threshold } => match common.config_file()? {
            Some(file) => {
                let grid = SweepGrid { omega_min, omega_max, d_omega, threshold, workers: common.workers() };
                commands::sweep(&file, &grid, &common.out_dir("sweep"))
            }
            None => {
                let mut c = common.clone();
                c.overrides.extend([
                    format!("omega_min={omega_min}"),
                    format!("omega_max={omega_max}"),
                    format!("d_omega={d_omega}"),
                    format!("threshold={threshold}"),
                ]);
                c.scenario("switch_sweep")
            }
        },
        Command::Strobe { common, period, periods } => match common.config_file()? {
            Some(file) => commands::strobe(&file, period, periods, &common.out_dir("strobe")),
            None => common.scenario("stroboscopic"),
        },
        Command::Magnus { common, period, nodes } => match common.config_file()? {
            Some(file) => commands::magnus(&file, period, nodes, &common.out_dir("magnus")),
            None => {
                let mut c = common.clone();
                c.overrides.push(format!("nodes={nodes}"));
                c.scenario("magnus")
            }
        },
        Command::Local { common } => match common.config_file()? {
            Some(file) => commands::local(&file, &common.out_dir("local")),
            None => common.scenario("local_drive"),
        },
        Command::Control { common } => {
            if common.config.is_some() {
                return Err(CliError::Usage("control takes no --config".into()));
            }
            common.scenario("control_function")
        }
        Command::Scenario { name, list, common } => {
            if list {
                for s in SCENARIOS {
                    println!("{:<18} {}", s.name, s.description);
                    for (key, default, doc) in s.params {
                        println!("    {key:<14} {default:<10} {doc}");
                    }
                }
                return Ok(serde_json::Value::Null);
            }
            let name = name.ok_or_else(|| CliError::Usage("scenario needs a name (or --list)".into()))?;
            scenario_info(&name)?;
            if common.config.is_some() {
                return Err(CliError::Usage("scenario runs take --override, not --config".into()));
            }
            common.scenario(&name)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(summary) => {
            if !summary.is_null() {
                println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
