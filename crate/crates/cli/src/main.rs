//! `bheight`: runs the height estimation pipeline one stage at a time or end to end.
//!
//! Settings resolve in order: built-in defaults, `--config` file, `BHEIGHT_*`
//! environment variables, then command-line flags.

use anyhow::Context;
use bheight_core::pipeline::{self, PipelineConfig, RunManifest};
use bheight_core::synth::{generate_synthetic_city, SyntheticCitySpec};
use bheight_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "bheight", version, about = "Building heights from footprints, streets and street-view floor counts")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct Global {
    /// Pipeline config (JSON). Relative paths inside it resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the fully resolved config, defaults included, and exit.
    #[arg(long, global = true)]
    print_config: bool,
    /// Log level (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Building, street and block features for every footprint.
    Features {
        #[arg(long)]
        buildings: Option<PathBuf>,
        #[arg(long)]
        streets: Option<PathBuf>,
    },
    /// Assign street-view images to the building each camera faces.
    Align {
        #[arg(long)]
        buildings: Option<PathBuf>,
        #[arg(long)]
        cameras: Option<PathBuf>,
        #[arg(long)]
        max_range_m: Option<f64>,
        /// File with one accepted image id per line.
        #[arg(long)]
        allowlist: Option<PathBuf>,
    },
    /// Count floors in the assigned images and write pseudo-label heights.
    Floors {
        #[arg(long)]
        buildings: Option<PathBuf>,
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        min_confidence: Option<f64>,
    },
    /// Compare regressors over the training sets and fit the final model.
    Train {
        #[arg(long)]
        raw_labels: Option<PathBuf>,
        #[arg(long)]
        validation_labels: Option<PathBuf>,
        /// Final model: linear_gd, random_forest, kernel_rbf or dense_net.
        #[arg(long)]
        model: Option<String>,
    },
    /// Score the saved model against reference heights.
    Evaluate {
        #[arg(long)]
        validation_labels: Option<PathBuf>,
    },
    /// Predict heights and write the LoD1 model.
    BuildLod1 {
        #[arg(long, value_enum)]
        format: Vec<Format>,
        #[arg(long)]
        min_height_m: Option<f64>,
    },
    /// Every stage in order.
    Pipeline,
    /// Write a synthetic city and a config that runs the pipeline on it.
    Synth {
        /// Synthetic city parameters (JSON); flags below override it.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        grid_blocks: Option<usize>,
        #[arg(long)]
        buildings_per_block: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Cityjson,
    Obj,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Cityjson => "cityjson",
            Format::Obj => "obj",
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn resolve(g: &Global, cmd: Option<&Command>) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg = cfg.with_overrides(std::env::vars())?;
    set(&mut cfg.seed, g.seed);
    set(&mut cfg.paths.out_dir, g.out.clone());
    if cfg.paths.out_dir.as_os_str().is_empty() {
        cfg.paths.out_dir = PathBuf::from("out");
    }
    let p = &mut cfg.paths;
    match cmd {
        Some(Command::Features { buildings, streets }) => {
            set(&mut p.buildings, buildings.clone());
            set(&mut p.streets, streets.clone());
        }
        Some(Command::Align { buildings, cameras, max_range_m, allowlist }) => {
            set(&mut p.buildings, buildings.clone());
            set(&mut p.cameras, cameras.clone());
            if allowlist.is_some() {
                p.allowlist = allowlist.clone();
            }
            set(&mut cfg.svi.max_range_m, *max_range_m);
        }
        Some(Command::Floors { buildings, detections, min_confidence }) => {
            set(&mut p.buildings, buildings.clone());
            set(&mut p.detections, detections.clone());
            set(&mut cfg.floors.min_confidence, *min_confidence);
        }
        Some(Command::Train { raw_labels, validation_labels, model }) => {
            set(&mut p.raw_labels, raw_labels.clone());
            if validation_labels.is_some() {
                p.validation_labels = validation_labels.clone();
            }
            if let Some(m) = model {
                cfg.regression.model = bheight_core::regression::ModelKind::from_name(m)?;
            }
        }
        Some(Command::Evaluate { validation_labels }) => {
            if validation_labels.is_some() {
                p.validation_labels = validation_labels.clone();
            }
        }
        Some(Command::BuildLod1 { format, min_height_m }) => {
            if !format.is_empty() {
                cfg.lod1.formats = format.iter().map(|f| f.name().to_string()).collect();
            }
            set(&mut cfg.lod1.min_height_m, *min_height_m);
        }
        Some(Command::Pipeline) | Some(Command::Synth { .. }) | None => {}
    }
    Ok(cfg)
}

fn synth(g: &Global, spec: Option<&Path>, grid_blocks: Option<usize>, buildings_per_block: Option<usize>) -> anyhow::Result<()> {
    let mut s: SyntheticCitySpec = match spec {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .map_err(|e| Error::Input(format!("synthetic city spec: {e}")))?,
        None => SyntheticCitySpec::default(),
    };
    set(&mut s.seed, g.seed);
    set(&mut s.grid_blocks, grid_blocks);
    set(&mut s.buildings_per_block, buildings_per_block);
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("synthetic"));
    let city = generate_synthetic_city(&s)?;
    city.write_inputs(&dir)?;
    // Paths relative to the config file keep the scene relocatable.
    let cfg = pipeline::synthetic_config(&city, Path::new(""), Path::new("output"));
    let p = dir.join("config.json");
    std::fs::write(&p, cfg.to_pretty_json()).with_context(|| format!("writing {}", p.display()))?;
    println!("{} buildings, {} cameras written to {}; run with --config {}", city.footprints.len(), city.cameras.len(), dir.display(), p.display());
    Ok(())
}

fn report(runs: &[RunManifest]) {
    for r in runs {
        let details: Vec<String> = r.details.iter().filter(|(_, v)| !v.is_object()).map(|(k, v)| format!("{k}={v}")).collect();
        println!("{:<10} {:>8.0} ms  {}", r.stage, r.timings_ms.get("total").copied().unwrap_or(0.0), details.join(" "));
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = resolve(&cli.global, cli.command.as_ref())?;
    if cli.global.print_config {
        print!("{}", cfg.to_pretty_json());
        return Ok(());
    }
    let runs = match cli.command {
        None => return Err(Error::Input("no subcommand given; see --help".into()).into()),
        Some(Command::Synth { spec, grid_blocks, buildings_per_block }) => return synth(&cli.global, spec.as_deref(), grid_blocks, buildings_per_block),
        Some(Command::Features { .. }) => vec![pipeline::stage_features(&cfg)?],
        Some(Command::Align { .. }) => vec![pipeline::stage_align(&cfg)?],
        Some(Command::Floors { .. }) => vec![pipeline::stage_floors(&cfg)?],
        Some(Command::Train { .. }) => vec![pipeline::stage_train(&cfg)?],
        Some(Command::Evaluate { .. }) => vec![pipeline::stage_evaluate(&cfg)?],
        Some(Command::BuildLod1 { .. }) => vec![pipeline::stage_build_lod1(&cfg)?],
        Some(Command::Pipeline) => pipeline::run_pipeline(&cfg)?,
    };
    report(&runs);
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(e) => e.exit_code() as u8,
        // Unreadable files surface as io errors through anyhow context.
        None if e.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.global.log).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
