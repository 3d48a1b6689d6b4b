//! Command-line front end: parse a config, dispatch one study or utility
//! command, and write outputs into the chosen directory.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use nplap::dynamics::{solve_projected, solve_random_graph};
use nplap::experiments::{self, ExperimentConfig};
use nplap::graphon::{project_field, project_graphon};
use nplap::metrics::regime_classify;
use nplap::sampling::{deterministic_nodes, sample_nodes, RngStream};

/// Environment variable that overrides the configured output directory
/// (command-line `--out` wins over both).
const OUT_ENV: &str = "NPLAP_OUT";

#[derive(Parser)]
#[command(
    name = "nplap",
    version,
    about = "Nonlocal p-Laplacian dynamics on graphon random graphs: solver and Monte Carlo studies",
    after_help = "Seeds default to the fixed constant 1729 so unseeded runs reproduce exactly.\n\
                  The NPLAP_OUT environment variable overrides the configured output directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StudyArgs {
    /// Experiment config file (TOML sections mirroring the study parameters).
    #[arg(long)]
    config: PathBuf,
    /// Override the base seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides config and NPLAP_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the trial pool (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Config override `section.key=value`, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence sweep: error against the reference solution over the n-grid.
    Converge(StudyArgs),
    /// Gap between the random-graph and projected-weight schemes.
    Gap(StudyArgs),
    /// Deviation scaling of the weight fluctuation process.
    Deviation(StudyArgs),
    /// Spacing tails of sampled nodes against the exact law.
    Spacings(StudyArgs),
    /// Piecewise projection error rates on the smoothness corpus.
    Lipapprox(StudyArgs),
    /// Print the rate-regime table for (p, s, q) triples.
    Regimes {
        /// Nonlinearity exponents (comma-separated).
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Smoothness orders (comma-separated; singletons broadcast).
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        /// Integrability indices (comma-separated; singletons broadcast).
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
    },
    /// Run one trajectory and dump it as CSV.
    Solve {
        #[command(flatten)]
        args: StudyArgs,
        /// Node count (default: first entry of the configured n-grid).
        #[arg(long)]
        n: Option<usize>,
        /// Scheme to run: `random_graph` or `projected`.
        #[arg(long, default_value = "random_graph")]
        scheme: String,
        /// Also dump the sampled graph as an `i j weight` edge list.
        #[arg(long)]
        dump_graph: Option<PathBuf>,
    },
    /// Dump the projected weights K_hat and initial data g_i for inspection.
    Project {
        #[command(flatten)]
        args: StudyArgs,
        /// Node count (default: first entry of the configured n-grid).
        #[arg(long)]
        n: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(args: &StudyArgs) -> anyhow::Result<ExperimentConfig> {
    let mut overrides: Vec<(String, String)> = Vec::new();
    for item in &args.set {
        let (key, value) = item
            .split_once('=')
            .with_context(|| format!("--set `{item}` is not of the form key=value"))?;
        overrides.push((key.to_string(), value.to_string()));
    }
    if let Some(seed) = args.seed {
        overrides.push(("run.seed".into(), seed.to_string()));
    }
    if let Ok(dir) = std::env::var(OUT_ENV) {
        overrides.push(("output.dir".into(), format!("{dir:?}")));
    }
    if let Some(out) = &args.out {
        overrides.push(("output.dir".into(), format!("{:?}", out.display().to_string())));
    }
    let cfg = ExperimentConfig::load(&args.config, &overrides)?;
    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("worker pool already configured")?;
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    if cfg.output.dir.is_empty() {
        PathBuf::from("out")
    } else {
        PathBuf::from(&cfg.output.dir)
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Converge(args) => {
            let cfg = load_config(&args)?;
            let out = experiments::convergence_sweep(&cfg)?;
            if let Some(fit) = &out.fit {
                println!(
                    "converge: slope={:.4} r2={:.4} aborted={}",
                    fit.slope, fit.r2, out.aborted
                );
            }
            report_written(&experiments::emit_sweep(&out_dir(&cfg), &cfg, &out)?);
        }
        Command::Gap(args) => {
            let cfg = load_config(&args)?;
            let out = experiments::scheme_gap_study(&cfg)?;
            if let Some(fit) = &out.fit {
                println!(
                    "gap: median slope={:.4} r2={:.4} aborted={}",
                    fit.slope, fit.r2, out.aborted
                );
            }
            report_written(&experiments::emit_gap(&out_dir(&cfg), &cfg, &out)?);
        }
        Command::Deviation(args) => {
            let cfg = load_config(&args)?;
            let out = experiments::deviation_study(&cfg)?;
            if let Some(fit) = &out.fit {
                println!("deviation: slope={:.4} r2={:.4}", fit.slope, fit.r2);
            }
            report_written(&experiments::emit_deviation(&out_dir(&cfg), &cfg, &out)?);
        }
        Command::Spacings(args) => {
            let cfg = load_config(&args)?;
            let out = experiments::spacing_study(&cfg)?;
            let worst = out
                .tails
                .iter()
                .map(|r| ((r.empirical - r.exact) / r.sigma.max(1e-300)).abs())
                .fold(0.0f64, f64::max);
            println!("spacings: worst |empirical - exact| = {worst:.2} sigma");
            report_written(&experiments::emit_spacings(&out_dir(&cfg), &cfg, &out)?);
        }
        Command::Lipapprox(args) => {
            let cfg = load_config(&args)?;
            let out = experiments::lip_approx_study(&cfg)?;
            for f in &out.fits {
                println!(
                    "lipapprox {}: slope={:.4} predicted=-{:.4} r2={:.4}",
                    f.member, f.slope, f.predicted, f.r2
                );
            }
            report_written(&experiments::emit_lipapprox(&out_dir(&cfg), &cfg, &out)?);
        }
        Command::Regimes { p, s, q } => {
            let len = p.len().max(s.len()).max(q.len());
            let pick = |v: &[f64], i: usize, name: &str| -> anyhow::Result<f64> {
                match v.len() {
                    1 => Ok(v[0]),
                    n if n == len => Ok(v[i]),
                    _ => bail!("--{name} needs 1 or {len} values"),
                }
            };
            println!("p,s,q,theta,exponent,label");
            for i in 0..len {
                let (pi, si, qi) = (pick(&p, i, "p")?, pick(&s, i, "s")?, pick(&q, i, "q")?);
                let v = regime_classify(pi, si, qi)?;
                println!("{pi},{si},{qi},{},{},{}", v.theta, v.exponent, v.label);
            }
        }
        Command::Solve {
            args,
            n,
            scheme,
            dump_graph,
        } => {
            let cfg = load_config(&args)?;
            let n = n.unwrap_or(cfg.run.n_grid[0]);
            let kernel = cfg.build_graphon()?;
            let g = cfg.build_initial()?;
            let rule = cfg.sparsity.rule()?;
            let q_n = rule.q(n);
            let grid = cfg.time.grid()?;
            let nodes = if cfg.random_nodes()? {
                sample_nodes(n, &RngStream::new(cfg.run.seed, 0))?
            } else {
                deterministic_nodes(n)?
            };
            let traj = match scheme.as_str() {
                "random_graph" => {
                    let mut graph = nplap::sampling::sample_graph(
                        &nodes,
                        &kernel,
                        q_n,
                        &RngStream::new(cfg.run.seed, 1),
                        cfg.sample_mode()?,
                    )?;
                    if !cfg.run.loops {
                        graph = graph.with_zeroed_diagonal();
                    }
                    if let Some(path) = &dump_graph {
                        let mut buf = Vec::new();
                        graph.write_edge_list(&mut buf, cfg.run.seed)?;
                        write_bytes(path, &buf)?;
                        println!("wrote {}", path.display());
                    }
                    solve_random_graph(&graph, &g, cfg.run.p, &grid)?
                }
                "projected" => solve_projected(&kernel, &nodes, q_n, &g, cfg.run.p, &grid)?,
                other => bail!("unknown scheme `{other}` (use random_graph or projected)"),
            };
            let dir = out_dir(&cfg);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("trajectory.csv");
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            write_bytes(&path, &buf)?;
            println!("wrote {}", path.display());
        }
        Command::Project { args, n } => {
            let cfg = load_config(&args)?;
            let n = n.unwrap_or(cfg.run.n_grid[0]);
            let kernel = cfg.build_graphon()?;
            let g = cfg.build_initial()?;
            let rule = cfg.sparsity.rule()?;
            let nodes = if cfg.random_nodes()? {
                sample_nodes(n, &RngStream::new(cfg.run.seed, 0))?
            } else {
                deterministic_nodes(n)?
            };
            let part = nodes.solver_partition()?;
            let khat = project_graphon(&kernel, &part, rule.q(n))?;
            let g_vec = project_field(&g, &part);
            let dir = out_dir(&cfg);
            std::fs::create_dir_all(&dir)?;

            let mut text = String::new();
            for i in 0..n {
                let row: Vec<String> = (0..n).map(|j| khat[(i, j)].to_string()).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            let khat_path = dir.join("khat.csv");
            std::fs::write(&khat_path, text)?;
            println!("wrote {}", khat_path.display());

            let mut text = String::from("i,x_left,x_right,g\n");
            for (i, gi) in g_vec.iter().enumerate() {
                let (l, r) = part.cell(i);
                text.push_str(&format!("{},{l},{r},{gi}\n", i + 1));
            }
            let g_path = dir.join("g.csv");
            std::fs::write(&g_path, text)?;
            println!("wrote {}", g_path.display());
        }
    }
    Ok(())
}

fn write_bytes(path: &PathBuf, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
