//! `xrk`: run, replay and verify recorded sessions, synthesize depth
//! fixtures, and record live sessions from the simulator bridge.
//!
//! Exit codes: 0 success, 1 mismatch or failure, 2 usage error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand};
use xrk_core::bridge::{BridgeConfig, BridgeServer};
use xrk_core::perception::write_xrdf;
use xrk_core::runtime::{run, sample_script, RunOptions, SAMPLE_SCRIPTS};
use xrk_core::trace::{EventLog, InputTrace, SceneFile};

use config::Defaults;

#[derive(Debug, Parser)]
#[command(name = "xrk", version, about = "Deterministic headless XR runtime")]
#[command(after_help = "Environment: XRK_CONFIG may name a JSON defaults file.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a script over a recorded trace and print the log hash.
    Run(RunArgs),
    /// Like `run`, but compare the log hash against an expected digest.
    Replay {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "HEX")]
        expect_hash: String,
    },
    /// Compare two event logs (or traces) by hash; with one file, print its hash.
    Verify {
        #[arg(long = "log", value_name = "FILE", required = true, num_args = 1)]
        logs: Vec<PathBuf>,
    },
    /// Render the scene's synthetic depth source to an XRDF file.
    SynthDepth {
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve one live bridge session and write its trace when it ends.
    Record {
        /// TCP port; WebSocket clients connect to ws://HOST:PORT/session.
        #[arg(long, value_name = "PORT")]
        listen: Option<u16>,
        /// Bind address [default: 127.0.0.1].
        #[arg(long)]
        host: Option<String>,
        /// Scene description file.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Sample script name.
        #[arg(long)]
        script: Option<String>,
        /// Run options file (mock model script, persona).
        #[arg(long)]
        options: Option<PathBuf>,
        /// Where the recorded trace goes.
        #[arg(long, default_value = "session.trace.json")]
        out: PathBuf,
        /// Also write the session's event log here.
        #[arg(long)]
        log_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scene description file.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Sample script name.
    #[arg(long)]
    script: Option<String>,
    /// Input trace file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run options file (mock model script, persona).
    #[arg(long)]
    options: Option<PathBuf>,
    /// Write the event log here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Prints `message` with the usage of subcommand `sub` and exits with 2.
fn usage_error(sub: &str, kind: ErrorKind, message: impl std::fmt::Display) -> ! {
    let mut cli = Cli::command();
    cli.build();
    let mut cmd = cli.find_subcommand(sub).cloned().unwrap_or(cli);
    cmd = cmd.bin_name(format!("xrk {sub}"));
    cmd.error(kind, message).exit()
}

fn required<T>(value: Option<T>, sub: &str, flag: &str) -> T {
    value.unwrap_or_else(|| usage_error(sub, ErrorKind::MissingRequiredArgument, format!("--{flag} is required")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_scene(path: &Path) -> Result<SceneFile> {
    SceneFile::from_json(&read(path)?).with_context(|| format!("scene {}", path.display()))
}

fn load_options(path: Option<&Path>) -> Result<RunOptions> {
    match path {
        Some(p) => RunOptions::from_json(&read(p)?).with_context(|| format!("options {}", p.display())),
        None => Ok(RunOptions::default()),
    }
}

fn check_script(sub: &str, name: &str) {
    if sample_script(name).is_none() {
        usage_error(
            sub,
            ErrorKind::InvalidValue,
            format!("unknown script `{name}` (available: {})", SAMPLE_SCRIPTS.join(", ")),
        );
    }
}

fn run_log(sub: &str, args: RunArgs, defaults: &Defaults) -> Result<EventLog> {
    let scene = required(args.scene.or_else(|| defaults.scene.clone()), sub, "scene");
    let script = required(args.script.or_else(|| defaults.script.clone()), sub, "script");
    let trace = required(args.trace, sub, "trace");
    check_script(sub, &script);
    let options = load_options(args.options.or_else(|| defaults.options.clone()).as_deref())?;
    let trace = InputTrace::from_json(&read(&trace)?).with_context(|| format!("trace {}", trace.display()))?;
    let log = run(
        &load_scene(&scene)?,
        sample_script(&script).expect("checked"),
        &trace,
        &options,
    )?;
    if let Some(out) = args.out.or_else(|| defaults.out.clone()) {
        std::fs::write(&out, format!("{}\n", log.to_json())).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(log)
}

/// Hash of an event log file, or of a trace file when it holds one.
fn file_hash(path: &Path) -> Result<String> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    if value.get("frames").is_some() {
        let trace = InputTrace::from_json(&text).with_context(|| format!("trace {}", path.display()))?;
        return Ok(trace.hash_hex());
    }
    let log = EventLog::from_json(&text).with_context(|| format!("log {}", path.display()))?;
    Ok(log.hash_hex())
}

fn execute(cli: Cli, defaults: &Defaults) -> Result<bool> {
    match cli.command {
        Command::Run(args) => {
            let log = run_log("run", args, defaults)?;
            println!("{}", log.hash_hex());
            Ok(true)
        }
        Command::Replay { run, expect_hash } => {
            let expected = expect_hash.trim().to_ascii_lowercase();
            if expected.len() != 64 || !expected.bytes().all(|b| b.is_ascii_hexdigit()) {
                usage_error("replay", ErrorKind::InvalidValue, "--expect-hash must be 64 hex digits");
            }
            let actual = run_log("replay", run, defaults)?.hash_hex();
            if actual == expected {
                println!("ok {actual}");
                Ok(true)
            } else {
                println!("hash mismatch");
                println!("expected: {expected}");
                println!("actual:   {actual}");
                Ok(false)
            }
        }
        Command::Verify { logs } => {
            if logs.len() > 2 {
                usage_error(
                    "verify",
                    ErrorKind::TooManyValues,
                    "verify takes one or two --log files",
                );
            }
            let hashes = logs.iter().map(|p| file_hash(p)).collect::<Result<Vec<_>>>()?;
            for (hash, path) in hashes.iter().zip(&logs) {
                println!("{hash}  {}", path.display());
            }
            let same = hashes.windows(2).all(|w| w[0] == w[1]);
            if !same {
                println!("hashes differ");
            }
            Ok(same)
        }
        Command::SynthDepth { scene, out } => {
            let scene_path = required(scene.or_else(|| defaults.scene.clone()), "synth-depth", "scene");
            let scene = load_scene(&scene_path)?;
            let Some(frame) = scene.depth_frame()? else {
                bail!("{} has no depthScene", scene_path.display());
            };
            let file = std::fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut w = std::io::BufWriter::new(file);
            write_xrdf(&frame, &mut w)?;
            std::io::Write::flush(&mut w)?;
            println!("wrote {} ({}x{})", out.display(), frame.width(), frame.height());
            Ok(true)
        }
        Command::Record {
            listen,
            host,
            scene,
            script,
            options,
            out,
            log_out,
        } => {
            let port = required(listen.or(defaults.listen), "record", "listen");
            let scene = required(scene.or_else(|| defaults.scene.clone()), "record", "scene");
            let script = required(script.or_else(|| defaults.script.clone()), "record", "script");
            check_script("record", &script);
            let host = host
                .or_else(|| defaults.host.clone())
                .unwrap_or_else(|| "127.0.0.1".into());
            let config = BridgeConfig {
                scene: load_scene(&scene)?,
                script,
                options: load_options(options.or_else(|| defaults.options.clone()).as_deref())?,
                grammar: Default::default(),
                trace_out: Some(out),
                log_out,
            };
            let server = BridgeServer::bind((host.as_str(), port))?;
            eprintln!("listening on {} (ws path /session)", server.local_addr()?);
            let summary = server.serve_session(config)?;
            println!("{}", serde_json::to_string_pretty(&summary.to_json_value())?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let defaults = match Defaults::from_env() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match execute(cli, &defaults) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
