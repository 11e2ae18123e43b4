use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nle::{config, run_preset, summary, ExperimentConfig, PresetReport, PRESETS};
use nle_core::grid::SpectralGrid;
use nle_core::levy::LevyMeasure;
use nle_core::process::AdditiveModel;
use nle_core::solver::{propagate_graded, transition_density, Resolution, TimeGrid};

/// Spectral and Monte-Carlo workbench for nonlocal equations driven by additive processes.
#[derive(Parser, Debug)]
#[command(name = "nle", version)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Preset to run (`all` runs every preset).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory for CSV/NLGF artifacts and the summary.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run presets and write the summary (default).
    Run,
    /// Print the resolved configuration and exit.
    Config,
    /// Propagate a Gaussian bump under an axis-stable model and write u(T).
    Solve {
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 64.0)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
    },
    /// Transition density p(0, t, .) of an isotropic stable model in d=1.
    Density {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 400.0)]
        length: f64,
    },
    /// Shorthand for `--preset density-decay`.
    Decay,
    /// Shorthand for the apriori-sweep and corollary-sweep presets.
    Apriori,
    /// Shorthand for `--preset mc-cross-check`.
    McCompare,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg = cfg.with_env_overrides(config::nle_env())?;
    if let Some(p) = &cli.preset {
        cfg.preset = p.clone();
    }
    if let Some(o) = &cli.out {
        cfg.out = o.display().to_string();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cfg: &ExperimentConfig, names: &[&str]) -> Result<bool> {
    let out = PathBuf::from(&cfg.out);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut reports: Vec<PresetReport> = Vec::new();
    for name in names {
        let r = run_preset(name, cfg, Some(&out)).with_context(|| format!("preset {name}"))?;
        for c in &r.criteria {
            println!("{}", c.line());
        }
        reports.push(r);
    }
    let text = summary(cfg, &reports);
    let path = out.join("summary.txt");
    std::fs::write(&path, &text)?;
    println!("summary written to {}", path.display());
    Ok(reports.iter().all(PresetReport::passed))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let cfg = resolve(&cli)?;
    println!("# resolved configuration\n{}", cfg.to_toml());
    match cli.command.as_ref().unwrap_or(&Command::Run) {
        Command::Run => {
            let names: Vec<&str> = if cfg.preset == "all" { PRESETS.to_vec() } else { vec![cfg.preset.as_str()] };
            run(&cfg, &names)
        }
        Command::Config => Ok(true),
        Command::Decay => run(&cfg, &["density-decay"]),
        Command::Apriori => run(&cfg, &["apriori-sweep", "corollary-sweep"]),
        Command::McCompare => run(&cfg, &["mc-cross-check"]),
        Command::Solve { alpha, horizon, n, length, width } => {
            let grid = SpectralGrid::new(1, *n, *length)?;
            let mu = LevyMeasure::axis_stable_normalized(*alpha, &[1.0])?;
            let model = AdditiveModel::stationary(mu, *horizon)?;
            let w = *width;
            let u0 = nle_core::grid::GridFunction::from_real_fn(grid, move |x| (-(x[0] / w) * (x[0] / w)).exp());
            let tg = TimeGrid::graded(*horizon, nle_core::solver::DEFAULT_STEPS, nle_core::solver::DEFAULT_GRADING)?;
            let sol = propagate_graded(&model, &u0, &tg)?;
            let out = PathBuf::from(&cfg.out);
            std::fs::create_dir_all(&out)?;
            let last = sol.states.last().expect("non-empty time grid");
            nle::io::save_nlgf(last, &out.join("solution.nlgf"))?;
            let rows: Vec<Vec<f64>> = sol
                .times
                .iter()
                .zip(&sol.states)
                .map(|(t, s)| Ok(vec![*t, s.lp_norm(2.0)?]))
                .collect::<nle_core::Result<_>>()?;
            nle::io::write_csv(&out.join("solution_norms.csv"), &["t", "norm"], &rows)?;
            println!("wrote {}/solution.nlgf and solution_norms.csv", out.display());
            Ok(true)
        }
        Command::Density { alpha, t, n, length } => {
            if t.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                bail!("t must be positive");
            }
            let grid = SpectralGrid::new(1, *n, *length)?;
            let mu = LevyMeasure::isotropic_stable_normalized(1, *alpha, 1.0)?;
            let model = AdditiveModel::stationary(mu, *t)?;
            let p = transition_density(&model, 0.0, *t, &grid, Resolution::Checked)?;
            let out = PathBuf::from(&cfg.out);
            std::fs::create_dir_all(&out)?;
            nle::io::save_nlgf(&p, &out.join("density.nlgf"))?;
            let rows: Vec<Vec<f64>> =
                p.real_parts().iter().enumerate().map(|(i, v)| vec![grid.coordinate(i), *v]).collect();
            nle::io::write_csv(&out.join("density.csv"), &["x", "density"], &rows)?;
            println!("wrote {}/density.nlgf and density.csv", out.display());
            Ok(true)
        }
    }
}
