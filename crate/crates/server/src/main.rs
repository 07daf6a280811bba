use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use lectern::teach::ScriptedUser;
use lectern_server::config::BackendKind;
use lectern_server::{http, LectureService, ServerConfig};

#[derive(Parser)]
#[command(name = "lectern", version, about = "Slides in, tutoring sessions out")]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true, env = "LECTERN_CONFIG")]
    config: Option<PathBuf>,
    /// Data directory (overrides the config file).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Replay model replies from this fixture instead of calling a backend.
    #[arg(long, global = true)]
    gateway: Option<PathBuf>,
    #[arg(long, global = true)]
    planner_scenario: Option<String>,
    #[arg(long, global = true)]
    tutor_scenario: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upload a slide archive; prints the lecture record.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
    /// Build the agenda and action queue for a lecture, resuming any
    /// interrupted run.
    Plan { lecture: String },
    /// Run a session against a scripted student; prints the transcript.
    Simulate {
        lecture: String,
        #[arg(long)]
        script: PathBuf,
        /// Pin utterance timestamps to this many ms since the epoch.
        #[arg(long)]
        clock: Option<u64>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
}

fn config(cli: &Cli) -> Result<ServerConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ServerConfig::load(path)?,
        None => ServerConfig::default(),
    };
    cfg.apply_env(std::env::vars())?;
    if let Some(d) = &cli.data {
        cfg.data_dir = d.clone();
    }
    if let Some(f) = &cli.gateway {
        cfg.gateway.backend = BackendKind::Scripted;
        cfg.gateway.fixture = Some(f.clone());
    }
    if let Some(s) = &cli.planner_scenario {
        cfg.gateway.planner_scenario = s.clone();
    }
    if let Some(s) = &cli.tutor_scenario {
        cfg.gateway.tutor_scenario = s.clone();
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let cli = Cli::parse();
    let mut cfg = config(&cli)?;

    match cli.command {
        Command::Ingest { file, title } => {
            let bytes = std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let title = title.unwrap_or_else(|| file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
            let svc = LectureService::open(&cfg)?;
            print_json(&svc.upload(&title, &bytes)?)
        }
        Command::Plan { lecture } => {
            let svc = LectureService::open(&cfg)?;
            print_json(&svc.plan_blocking(&lecture)?)
        }
        Command::Simulate { lecture, script, clock } => {
            if clock.is_some() {
                cfg.fixed_clock_ms = clock;
            }
            let user = ScriptedUser::load(&script).with_context(|| format!("reading {}", script.display()))?;
            let svc = LectureService::open(&cfg)?;
            let id = svc.create_session(&lecture, "simulated-student")?.session_id;
            loop {
                let s = svc.run_pending(&id)?;
                if s.is_complete() {
                    return print_json(&s.transcript());
                }
                let Some(event) = user.events.get(s.user_events).cloned() else {
                    bail!("script ran out after {} events; session is {}", s.user_events, s.phase.name());
                };
                svc.post_user_event(&id, event)?;
            }
        }
        Command::Serve { bind } => {
            if let Some(b) = bind {
                cfg.bind = b;
            }
            serve(cfg)
        }
    }
}

fn serve(cfg: ServerConfig) -> Result<()> {
    let svc = LectureService::open(&cfg)?;
    svc.start_workers(cfg.workers.max(1));
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&cfg.bind).await.with_context(|| format!("binding {}", cfg.bind))?;
        tracing::info!(addr = %listener.local_addr()?, data = %cfg.data_dir.display(), "serving");
        axum::serve(listener, http::router(svc.clone(), cfg.token.clone()))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        anyhow::Ok(())
    })?;
    svc.shutdown();
    Ok(())
}
