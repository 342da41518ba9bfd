use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lmg_battery::experiment::{recipes, run, write_tables, ConfigError, Format, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "sim", version, about = "LMG quantum battery simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file, or a bundled recipe by name.
    Run {
        config: String,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, env = "LMG_OUTPUT_DIR", default_value = "out")]
        output_dir: PathBuf,
        /// Overrides the format set in the config.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// List bundled recipes, or print one.
    Recipes {
        /// Print the config of this recipe instead of the catalog.
        #[arg(long)]
        show: Option<String>,
    },
    /// Parse and check a config without running it.
    Validate { config: String },
}

fn load(source: &str) -> Result<(RunConfig, String), RunError> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(r) = recipes::find(source) {
            return Ok((r.parse(), r.config.to_string()));
        }
    }
    let text = std::fs::read_to_string(path)?;
    let config = RunConfig::parse(&text).map_err(|e| ConfigError {
        message: format!("{}: {}", path.display(), e.message),
        ..e
    })?;
    Ok((config, text))
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run {
            config,
            threads,
            output_dir,
            format,
        } => {
            let (config, _) = load(&config)?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                pool = pool.num_threads(t);
            }
            let pool = pool.build().map_err(std::io::Error::other)?;
            let tables = pool.install(|| run(&config))?;
            let format = format.map(Format::from).unwrap_or(config.output.format);
            for path in write_tables(&config, &tables, &output_dir, format)? {
                println!("{}", path.display());
            }
        }
        Command::Recipes { show: Some(name) } => match recipes::find(&name) {
            Some(r) => print!("{}", r.config),
            None => {
                return Err(RunError::Config(ConfigError {
                    message: format!("no recipe named `{name}`"),
                    key: None,
                    line: None,
                }))
            }
        },
        Command::Recipes { show: None } => {
            for r in recipes::RECIPES {
                println!("{:<7} {:<8} {}", r.name, r.runtime, r.description);
            }
        }
        Command::Validate { config } => {
            let (config, _) = load(&config)?;
            println!("ok: protocol {}", config.protocol.name());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
