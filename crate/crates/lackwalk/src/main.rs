use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lackwalk::cli::{
    cmd_run, cmd_scale, cmd_sweep, parse_anchor, parse_cluster, parse_config_file,
    parse_family, parse_fit_model, parse_weight_rule, parse_weights, run_preset, CliError, Preset,
    RunConfig,
};
use lackwalk::experiments::DEFAULT_PROMINENCE;

#[derive(Parser)]
#[command(name = "lackwalk", version, about = "Lackadaisical quantum-walk search simulator")]
struct Cli {
    /// Worker threads for parallel sections (falls back to LACKWALK_JOBS,
    /// then to the available parallelism)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat key = value config file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice dimension (1 or 2)
    #[arg(long)]
    dim: Option<u8>,
    /// Lattice side (N in 1D, sqrt(N) per axis in 2D)
    #[arg(long)]
    side: Option<usize>,
    /// Coin family: g, akr or skw
    #[arg(long)]
    coin: Option<String>,
    /// Self-loop weight: a literal like 0.01 or a rule like 0.1/N
    #[arg(long)]
    loop_weight: Option<String>,
    /// Marked cluster: run:m, block:kxl, diag or list:v0,v1,...
    #[arg(long)]
    cluster: Option<String>,
    /// Cluster anchor: x or x,y (default 0,0)
    #[arg(long)]
    anchor: Option<String>,
    /// Evolution horizon in steps (default: 20x the asymptotic scaling)
    #[arg(long)]
    horizon: Option<usize>,
    /// Minimum peak rise above p(0)
    #[arg(long)]
    prominence: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolution and report the first success-probability peak
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the full probability trace as CSV (step,probability)
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the JSON run record here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Embed the full trace in the JSON record
        #[arg(long)]
        embed_trace: bool,
    },
    /// Sweep the self-loop weight over a grid
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Weight grid: lo:hi:count (geometric) or a comma list
        #[arg(long)]
        weights: Option<String>,
        /// Output CSV path (directory when --preset is given)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Figure preset: fig2 or fig4
        #[arg(long)]
        preset: Option<String>,
    },
    /// Run a scaling experiment over lattice sizes
    Scale {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma list of sides, ascending
        #[arg(long)]
        sizes: Option<String>,
        /// Fit model(s): power_law, linear_over_m, sqrt_log (repeatable)
        #[arg(long)]
        fit: Vec<String>,
        /// Output CSV path (directory when --preset is given)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Figure preset: fig3 or fig5
        #[arg(long)]
        preset: Option<String>,
    },
}

/// Flag value, then config-file value, then default.
struct Resolver {
    file: HashMap<String, String>,
}

impl Resolver {
    fn new(common: &CommonArgs) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => parse_config_file(path)?.into_iter().collect(),
            None => HashMap::new(),
        };
        Ok(Self { file })
    }

    fn get<'a>(&'a self, flag: Option<&'a str>, key: &str) -> Option<&'a str> {
        flag.or_else(|| self.file.get(key).map(|s| s.as_str()))
    }
}

fn resolve_config(common: &CommonArgs) -> Result<(RunConfig, Resolver), CliError> {
    let r = Resolver::new(common)?;
    let dim_str;
    let dimension = match common.dim {
        Some(d) => d,
        None => {
            dim_str = r.file.get("dim").cloned();
            dim_str
                .as_deref()
                .ok_or_else(|| CliError::Config("dim: missing".into()))?
                .parse()
                .map_err(|_| CliError::Config("dim: must be an integer".into()))?
        }
    };
    if dimension != 1 && dimension != 2 {
        return Err(CliError::Config("dim: dimension must be 1 or 2".into()));
    }
    let side_str;
    let side = match common.side {
        Some(s) => Some(s),
        None => {
            side_str = r.file.get("side").cloned();
            match side_str.as_deref() {
                Some(s) => Some(
                    s.parse()
                        .map_err(|_| CliError::Config("side: must be an integer".into()))?,
                ),
                None => None,
            }
        }
    };
    let family = parse_family(
        r.get(common.coin.as_deref(), "coin")
            .ok_or_else(|| CliError::Config("coin: missing".into()))?,
    )?;
    let weight_rule = match r.get(common.loop_weight.as_deref(), "loop-weight") {
        Some(s) => parse_weight_rule(s)?,
        // placeholder for sweep commands, which supply per-row weights
        None => lackwalk::experiments::LoopWeightRule::Constant(f64::NAN),
    };
    let cluster = parse_cluster(
        r.get(common.cluster.as_deref(), "cluster")
            .ok_or_else(|| CliError::Config("cluster: missing".into()))?,
    )?;
    let anchor = match r.get(common.anchor.as_deref(), "anchor") {
        Some(s) => parse_anchor(s)?,
        None => (0, 0),
    };
    let horizon = match common.horizon {
        Some(h) => Some(h),
        None => match r.file.get("horizon") {
            Some(s) => Some(
                s.parse()
                    .map_err(|_| CliError::Config("horizon: must be an integer".into()))?,
            ),
            None => None,
        },
    };
    let prominence = match common.prominence {
        Some(p) => p,
        None => match r.file.get("prominence") {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Config("prominence: must be a number".into()))?,
            None => DEFAULT_PROMINENCE,
        },
    };
    let config = RunConfig {
        dimension,
        side: side.ok_or_else(|| CliError::Config("side: missing".into()))?,
        family,
        weight_rule,
        cluster,
        anchor,
        horizon,
        prominence,
    };
    Ok((config, r))
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, CliError> {
    let sizes = s
        .split(',')
        .map(|v| v.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Config(format!("sizes: bad size list `{}`", s)))?;
    if sizes.is_empty() {
        return Err(CliError::Config("sizes: empty size list".into()));
    }
    Ok(sizes)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { common, trace, out, embed_trace } => {
            let (config, r) = resolve_config(&common)?;
            let trace = trace.or_else(|| r.file.get("trace").map(PathBuf::from));
            let out = out.or_else(|| r.file.get("out").map(PathBuf::from));
            let record = cmd_run(&config, trace.as_deref(), out.as_deref(), embed_trace)?;
            if out.is_none() {
                let json = serde_json::to_string_pretty(&record)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                println!("{}", json);
            }
            Ok(())
        }
        Command::Sweep { common, weights, out, preset } => {
            if let Some(name) = preset {
                let preset: Preset = name.parse()?;
                if !matches!(preset, Preset::Fig2 | Preset::Fig4) {
                    return Err(CliError::Config(format!(
                        "preset: `{}` is a scaling preset; use the scale command",
                        name
                    )));
                }
                let dir = out.unwrap_or_else(|| PathBuf::from("."));
                for path in run_preset(preset, &dir)? {
                    eprintln!("wrote {}", path.display());
                }
                return Ok(());
            }
            let (config, r) = resolve_config(&common)?;
            let weights = parse_weights(
                r.get(weights.as_deref(), "weights")
                    .ok_or_else(|| CliError::Config("weights: missing".into()))?,
            )?;
            let out = out
                .or_else(|| r.file.get("out").map(PathBuf::from))
                .ok_or_else(|| CliError::Config("out: missing".into()))?;
            cmd_sweep(&config, &weights, &out)?;
            Ok(())
        }
        Command::Scale { common, sizes, fit, out, preset } => {
            if let Some(name) = preset {
                let preset: Preset = name.parse()?;
                if !matches!(preset, Preset::Fig3 | Preset::Fig5) {
                    return Err(CliError::Config(format!(
                        "preset: `{}` is a sweep preset; use the sweep command",
                        name
                    )));
                }
                let dir = out.unwrap_or_else(|| PathBuf::from("."));
                for path in run_preset(preset, &dir)? {
                    eprintln!("wrote {}", path.display());
                }
                return Ok(());
            }
            // side comes from the size list here
            let common_with_side = CommonArgs { side: common.side.or(Some(2)), ..common };
            let (config, r) = resolve_config(&common_with_side)?;
            let sizes = parse_sizes(
                r.get(sizes.as_deref(), "sizes")
                    .ok_or_else(|| CliError::Config("sizes: missing".into()))?,
            )?;
            let fit_strings: Vec<String> = if fit.is_empty() {
                match r.file.get("fit") {
                    Some(s) => s.split(',').map(|v| v.trim().to_string()).collect(),
                    None => Vec::new(),
                }
            } else {
                fit
            };
            let fits = fit_strings
                .iter()
                .map(|s| parse_fit_model(s))
                .collect::<Result<Vec<_>, _>>()?;
            let out = out
                .or_else(|| r.file.get("out").map(PathBuf::from))
                .ok_or_else(|| CliError::Config("out: missing".into()))?;
            cmd_scale(&config, &sizes, &fits, &out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    {
        let jobs = cli.jobs.or_else(|| {
            std::env::var("LACKWALK_JOBS").ok().and_then(|v| v.parse().ok())
        });
        if let Some(jobs) = jobs {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
                eprintln!("warning: could not size thread pool: {}", e);
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.jobs;

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
