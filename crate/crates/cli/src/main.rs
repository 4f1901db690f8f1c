use clap::Parser;
use eisenlab_cli::config::read_config_file;
use eisenlab_cli::{execute, Command, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical experiments on the SL2(Z) Eisenstein series.
///
/// Settings come from the command's defaults, then `--config` (a
/// `key = value` file or a previous run's JSON sidecar), then flags.
#[derive(Parser, Debug)]
#[command(name = "eisenlab", version)]
struct Cli {
    command: Command,
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path (`-` for stdout); the sidecar is written to `<out>.json`
    #[arg(long)]
    out: Option<String>,
    /// worker threads (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    /// tolerance override, repeatable
    #[arg(long, value_name = "NAME=VALUE")]
    tol: Vec<String>,

    /// spectral parameters, comma separated
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// alpha,beta
    #[arg(long)]
    window: Option<String>,
    /// `random` or a list of centres
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// logT, fixed (uses --gamma) or power (gamma = T^gamma-exp)
    #[arg(long = "gamma-rule")]
    gamma_rule: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long = "gamma-exp")]
    gamma_exp: Option<String>,
    /// dyadic block sizes
    #[arg(long)]
    delta: Option<String>,
    /// bump or even
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "Y")]
    y_scale: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    #[arg(long = "P")]
    p: Option<String>,
    #[arg(long)]
    dilations: Option<String>,
    #[arg(long = "h-max")]
    h_max: Option<String>,
    #[arg(long = "h-pow")]
    h_pow: Option<String>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long = "x-cut")]
    x_cut: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long = "q-max")]
    q_max: Option<String>,
    #[arg(long = "length-max")]
    length_max: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
}

impl Cli {
    fn flag_entries(&self) -> Vec<(String, String)> {
        let flags = [
            ("T", &self.t),
            ("x", &self.x),
            ("y", &self.y),
            ("window", &self.window),
            ("x0", &self.x0),
            ("seeds", &self.seeds),
            ("seed", &self.seed),
            ("gamma-rule", &self.gamma_rule),
            ("gamma", &self.gamma),
            ("gamma-exp", &self.gamma_exp),
            ("delta", &self.delta),
            ("kernel", &self.kernel),
            ("N", &self.n),
            ("Y", &self.y_scale),
            ("m", &self.m),
            ("P", &self.p),
            ("dilations", &self.dilations),
            ("h-max", &self.h_max),
            ("h-pow", &self.h_pow),
            ("points", &self.points),
            ("x-cut", &self.x_cut),
            ("samples", &self.samples),
            ("q-max", &self.q_max),
            ("length-max", &self.length_max),
            ("q", &self.q),
            ("a", &self.a),
            ("out", &self.out),
        ];
        let mut out: Vec<(String, String)> =
            flags.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
        if let Some(w) = self.workers {
            out.push(("workers".into(), w.to_string()));
        }
        out
    }
}

fn config(cli: &Cli) -> Result<RunConfig, eisenlab_cli::CliError> {
    let mut entries = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => Vec::new(),
    };
    for t in &cli.tol {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| eisenlab_cli::CliError::Validation(format!("--tol expects NAME=VALUE, got {t}")))?;
        entries.push((format!("tol.{k}"), v.to_string()));
    }
    entries.extend(cli.flag_entries());
    if cli.out.is_none() && !entries.iter().any(|(k, _)| k == "out") {
        entries.push(("out".into(), format!("{}.csv", cli.command.name())));
    }
    RunConfig::build(cli.command, &entries)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = match config(&cli) {
        Ok(cfg) => {
            let code = execute(&cfg);
            if let Some(p) = &cfg.output {
                eprintln!("eisenlab {}: wrote {} (exit {code})", cfg.command.name(), p.display());
            }
            code
        }
        Err(e) => {
            eprintln!("eisenlab {}: {e}", cli.command.name());
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

