use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use terrascout_core::harness::{
    accumulate_heatmap, aggregate_curves, episode_curve, metrics_csv, run_batch, throughput_bench, verify_replay,
    EpisodeTrace,
};
use terrascout_core::{DifficultyVector, EnvConfig, GenSpec, Parallelism, PolicyKind, Shape};

#[derive(Parser)]
#[command(name = "terrascout", version, about = "Grid terrain exploration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TerrainKind {
    Structured,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of episodes and write traces, metrics, heatmap and curve.
    Bench {
        #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"], default_values_t = [21, 21])]
        shape: Vec<usize>,
        #[arg(long, value_enum, default_value = "structured")]
        mode: TerrainKind,
        /// Difficulty vector `dt,dm,db` for structured terrain.
        #[arg(long, default_value = "2,2,1")]
        difficulty: DifficultyVector,
        /// cost, utility, random or scripted:<file>.
        #[arg(long, default_value = "cost")]
        policy: String,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        /// Base seed; episode i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step cap per episode (default 4 * rows * cols).
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long, default_value_t = 6)]
        sensor_radius: u32,
        /// Worker threads; 0 uses every core, 1 runs sequentially.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a trace file through a fresh environment and check it.
    PlayTrace {
        #[arg(long = "in")]
        input: PathBuf,
        /// Print the final observation grid.
        #[arg(long)]
        render: bool,
    },
    /// Measure environment steps per second with random valid actions.
    Throughput {
        #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"], default_values_t = [21, 21])]
        shape: Vec<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
    },
    /// Serve interactive sessions over HTTP and WebSocket.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory of static client files to serve at `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
        #[arg(long, default_value_t = 1800)]
        idle_timeout_secs: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench { shape, mode, difficulty, policy, episodes, seed, max_steps, sensor_radius, threads, out } => {
            let shape = Shape::new(shape[0], shape[1]);
            let policy = PolicyKind::parse(&policy)?;
            let template = match mode {
                TerrainKind::Structured => GenSpec::structured(shape, difficulty, seed),
                TerrainKind::Random => GenSpec::random(shape, seed),
            };
            let mut config = template.configure(&EnvConfig { sensor_radius, ..EnvConfig::new(shape) });
            if let Some(m) = max_steps {
                config.max_steps = m;
            }
            bench(&template, &config, &policy, episodes, Parallelism::from_threads(threads), &out)
        }
        Command::PlayTrace { input, render } => play_trace(&input, render),
        Command::Throughput { shape, steps } => {
            let r = throughput_bench(&EnvConfig::new(Shape::new(shape[0], shape[1])), steps)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(())
        }
        Command::Serve { port, host, assets, idle_timeout_secs } => {
            tracing_subscriber::fmt().with_target(false).init();
            let options = terrascout_server::ServeOptions {
                addr: SocketAddr::new(host, port),
                assets,
                idle_timeout: Duration::from_secs(idle_timeout_secs),
            };
            tokio::runtime::Runtime::new()?.block_on(terrascout_server::serve(options))?;
            Ok(())
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn bench(
    template: &GenSpec,
    config: &EnvConfig,
    policy: &PolicyKind,
    episodes: usize,
    parallelism: Parallelism,
    out: &Path,
) -> Result<()> {
    let report = run_batch(template, config, policy, episodes, parallelism)?;
    let traces_dir = out.join("traces");
    fs::create_dir_all(&traces_dir).with_context(|| format!("creating {}", traces_dir.display()))?;
    for (trace, &i) in report.traces.iter().zip(&report.indices) {
        write(&traces_dir.join(format!("episode_{i:04}.json")), &trace.to_json())?;
    }
    write(&out.join("metrics.csv"), &metrics_csv(&report.traces, &report.indices))?;
    if !report.traces.is_empty() {
        write(&out.join("heatmap.json"), &serde_json::to_string_pretty(&accumulate_heatmap(&report.traces)?)?)?;
        let curves = report.traces.iter().map(episode_curve).collect::<Result<Vec<_>, _>>()?;
        write(&out.join("curve.json"), &serde_json::to_string_pretty(&aggregate_curves(&curves))?)?;
    }
    let summary = json!({
        "template": template,
        "config": config,
        "policy": policy,
        "episodes": episodes,
        "aggregate": report.aggregate,
        "failures": report.failures,
    });
    write(&out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;

    let a = &report.aggregate;
    println!(
        "{} episodes ({} complete, {} invalid, {} step limit, {} stopped, {} failed): score {:.4} +/- {:.4}, coverage {:.4}, distance {:.1}",
        a.episodes,
        a.completed,
        a.invalid,
        a.step_limit,
        a.stopped,
        report.failures.len(),
        a.normalized_score.mean,
        a.normalized_score.std,
        a.coverage.mean,
        a.distance.mean
    );
    if report.traces.is_empty() {
        bail!("every episode failed; first error: {}", report.failures[0].error);
    }
    Ok(())
}

fn play_trace(input: &Path, render: bool) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let trace = EpisodeTrace::from_json(&text)?;
    let replay = verify_replay(&trace)?;
    println!(
        "{} steps, distance {}, total reward {}, normalized score {:.4}, coverage {:.4}, termination {}",
        trace.steps,
        trace.distance(),
        trace.total_reward,
        trace.normalized_score,
        trace.coverage_final,
        trace.termination.as_str()
    );
    println!("replay identical");
    if render {
        print!("{}", replay.env.observation().render());
    }
    Ok(())
}
