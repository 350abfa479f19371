//! Command-line front end and network server for the gridsite engine.

pub mod server;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gridsite_core::grid::GridConfig;
use gridsite_core::persist::{load_project_from_path, save_project, save_project_to_path, write_atomic};
use gridsite_core::protocol::{replay_with, Engine, SessionScript, DEFAULT_WAKE_WORD};
use gridsite_core::render::export_html;
use gridsite_core::session::SessionState;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gridsite", version, about = "Tangible grid web-authoring engine")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Prefix that turns a line into a command.
    #[arg(long, global = true, default_value = DEFAULT_WAKE_WORD)]
    pub wake_word: String,
    /// Characters per grid cell for text capacity.
    #[arg(long, global = true)]
    pub text_density: Option<f64>,
    /// Starting render revision for fresh sessions.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed_revision: u64,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Serve the engine over line-delimited JSON.
    Serve {
        #[arg(long)]
        listen: String,
        /// Also accept WebSocket clients, one message per frame.
        #[arg(long)]
        ws_listen: Option<String>,
        /// Load from and save to this project file.
        #[arg(long)]
        project: Option<PathBuf>,
    },
    /// Replay a session script headlessly.
    Replay {
        script: PathBuf,
        /// Exit 1 if any expectation fails.
        #[arg(long)]
        assert: bool,
        #[arg(long)]
        out_html: Option<PathBuf>,
        #[arg(long)]
        out_project: Option<PathBuf>,
    },
    /// Print the page check for a project.
    Check { project: PathBuf },
    /// Render a project to a standalone HTML file.
    ExportHtml { project: PathBuf, out: PathBuf },
    /// Write an empty project, to a file or standard output.
    New {
        #[arg(long)]
        rows: Option<u16>,
        #[arg(long)]
        cols: Option<u16>,
        out: Option<PathBuf>,
    },
}

impl GlobalOpts {
    pub fn config(&self, rows: Option<u16>, cols: Option<u16>) -> anyhow::Result<GridConfig> {
        let mut config = GridConfig::default();
        if let Some(r) = rows {
            config.rows = r;
        }
        if let Some(c) = cols {
            config.cols = c;
        }
        if let Some(d) = self.text_density {
            config.text_density = d;
        }
        config.validate().map_err(|e| anyhow::anyhow!("invalid grid configuration: {e}"))?;
        Ok(config)
    }

    pub fn fresh_state(&self, config: GridConfig) -> SessionState {
        let mut state = SessionState::new(config);
        state.revision = self.seed_revision;
        state
    }
}

/// Failures that map to a specific exit code.
#[derive(Debug)]
pub enum Failure {
    Assertion(String),
    Usage(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Assertion(_) => EXIT_ASSERTION,
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Assertion(m) => write!(f, "{m}"),
            Failure::Usage(e) | Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

fn load(path: &Path) -> Result<SessionState, Failure> {
    load_project_from_path(path).with_context(|| format!("loading {}", path.display())).map_err(io)
}

/// Runs one CLI invocation, writing normal output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Cmd::Serve { listen, ws_listen, project } => {
            let state = match &project {
                Some(p) if p.exists() => load(p)?,
                _ => g.fresh_state(g.config(None, None).map_err(Failure::Usage)?),
            };
            let engine = Engine::with_state(state, g.wake_word.clone());
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(serve(listen, ws_listen, engine, project)).map_err(io)
        }
        Cmd::Replay { script, assert, out_html, out_project } => {
            let text = std::fs::read_to_string(&script)
                .with_context(|| format!("reading {}", script.display()))
                .map_err(io)?;
            let parsed = SessionScript::parse(&text).map_err(io)?;
            let config = g.config(None, None).map_err(Failure::Usage)?;
            let engine = Engine::with_state(g.fresh_state(config), g.wake_word.clone());
            let outcome = replay_with(engine, &parsed);
            out.write_all(outcome.transcript_text().as_bytes()).map_err(io)?;
            if let Some(p) = out_html {
                export_html(&outcome.engine.state, &p).map_err(io)?;
            }
            if let Some(p) = out_project {
                save_project_to_path(&outcome.engine.state, &p).map_err(io)?;
            }
            for f in &outcome.failures {
                eprintln!("line {}: expectation not met: {}", f.line, serde_json::to_string(&f.expectation).unwrap_or_default());
            }
            if assert && !outcome.passed() {
                return Err(Failure::Assertion(format!("{} expectation(s) failed", outcome.failures.len())));
            }
            Ok(())
        }
        Cmd::Check { project } => {
            let state = load(&project)?;
            writeln!(out, "{}", state.check_utterance().text).map_err(io)
        }
        Cmd::ExportHtml { project, out: dest } => {
            let state = load(&project)?;
            export_html(&state, &dest).map_err(io)
        }
        Cmd::New { rows, cols, out: dest } => {
            let state = g.fresh_state(g.config(rows, cols).map_err(Failure::Usage)?);
            let bytes = save_project(&state);
            match dest {
                Some(p) => write_atomic(&p, &bytes).with_context(|| format!("writing {}", p.display())).map_err(io),
                None => out.write_all(&bytes).map_err(io),
            }
        }
    }
}

async fn serve(listen: String, ws_listen: Option<String>, engine: Engine, project: Option<PathBuf>) -> anyhow::Result<()> {
    let tcp = tokio::net::TcpListener::bind(&listen).await.with_context(|| format!("binding {listen}"))?;
    eprintln!("gridsite: listening on {}", tcp.local_addr()?);
    let handle = server::spawn_engine(engine, project);
    match ws_listen {
        Some(addr) => {
            let ws = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("binding {addr}"))?;
            eprintln!("gridsite: websocket on {}", ws.local_addr()?);
            tokio::try_join!(server::run_tcp(tcp, handle.clone()), server::run_ws(ws, handle))?;
        }
        None => server::run_tcp(tcp, handle).await?,
    }
    Ok(())
}
