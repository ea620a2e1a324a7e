use std::path::PathBuf;
use std::process::ExitCode;

use cardylab::config::parse_scales;
use cardylab::domain_file::Xy;
use cardylab::{emit, run, DomainFile, ExperimentConfig, ExperimentKind, Format, HarnessError, Parallel, Params};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cardylab", version, about = "Percolation crossing probabilities against Cardy's formula")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit canonical approximations of a domain.
    Audit(Common),
    /// Cardy estimate at mark d across scales, against the conformal oracle.
    Sweep(Common),
    /// Crossing function along a ray of probes into arc C.
    Decay {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        probes: usize,
        /// Ray as `x0,y0,x1,y1`; defaults to c towards the middle of arc C.
        #[arg(long)]
        ray: Option<String>,
    },
    /// Monochromatic circuit frequency in a square annulus.
    Rings {
        #[command(flatten)]
        common: Common,
        /// Annulus center `x,y`; defaults to the middle of arc C.
        #[arg(long)]
        center: Option<String>,
        #[arg(long)]
        side: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        ratio: f64,
    },
    /// Exploration traces checked with the well-organized test.
    Explore {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        traces: usize,
        #[arg(long, default_value_t = 400)]
        max_steps: usize,
        /// Stop radius around c; defaults to a tenth of the diameter.
        #[arg(long)]
        target_radius: Option<f64>,
    },
    /// Sensitivity of the Cardy value to perturbations of the domain's slit.
    Equicont {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        perturbations: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Domain file (JSON).
    #[arg(long)]
    domain: PathBuf,
    /// Comma-separated, strictly decreasing lattice scales, e.g. `1/16,1/32`.
    #[arg(long, default_value = "1/16,1/32,1/64")]
    scales: String,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Tolerance for the conformal map.
    #[arg(long, default_value_t = 1e-6)]
    oracle_tol: f64,
}

fn floats<const N: usize>(s: &str, what: &str) -> Result<[f64; N], HarnessError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| HarnessError::Config(format!("cannot read {what} {s:?}")))?;
    v.try_into().map_err(|_| HarnessError::Config(format!("{what} needs {N} numbers")))
}

fn config(kind: ExperimentKind, c: &Common, params: Params) -> Result<ExperimentConfig, HarnessError> {
    let domain = DomainFile::load(&c.domain)?;
    let mut cfg = ExperimentConfig::new(kind, domain, parse_scales(&c.scales)?, c.samples, c.seed);
    cfg.domain_path = Some(c.domain.clone());
    cfg.out = c.out.clone();
    cfg.format = c.format;
    cfg.record.params = Params { oracle_tol: c.oracle_tol, ..params };
    Ok(cfg)
}

fn build(cmd: &Command) -> Result<ExperimentConfig, HarnessError> {
    let d = Params::default();
    match cmd {
        Command::Audit(c) => config(ExperimentKind::ApproxAudit, c, d),
        Command::Sweep(c) => config(ExperimentKind::CardySweep, c, d),
        Command::Decay { common, probes, ray } => {
            let ray = ray
                .as_deref()
                .map(|r| floats::<4>(r, "ray").map(|v| -> [Xy; 2] { [[v[0], v[1]], [v[2], v[3]]] }))
                .transpose()?;
            config(ExperimentKind::BoundaryDecay, common, Params { probes: *probes, ray, ..d })
        }
        Command::Rings { common, center, side, ratio } => {
            let ring_center = center.as_deref().map(|c| floats::<2>(c, "center")).transpose()?;
            let params = Params { ring_center, ring_side: *side, ring_ratio: *ratio, ..d };
            config(ExperimentKind::HarrisRings, common, params)
        }
        Command::Explore { common, traces, max_steps, target_radius } => {
            let params = Params { traces: *traces, max_steps: *max_steps, target_radius: *target_radius, ..d };
            config(ExperimentKind::Exploration, common, params)
        }
        Command::Equicont { common, perturbations } => {
            config(ExperimentKind::Equicontinuity, common, Params { perturbations: *perturbations, ..d })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(&cli.command).and_then(|cfg| {
        let exec = Parallel::from_env();
        let (report, mut timings) = run(&cfg, &exec)?;
        timings.threads = exec.threads();
        let path = emit(&report, cfg.format, &cfg.out)?;
        timings.write(&cfg.out)?;
        Ok((report, path))
    });
    match result {
        Ok((report, path)) => {
            println!("{}", path.display());
            if !report.passed() {
                eprintln!("verdict: failed");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
