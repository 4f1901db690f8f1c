//! Experiment runner: every numerical check of the `eisenlab` crate as a
//! command producing a CSV table and a JSON sidecar.

pub mod commands;
pub mod config;

pub use config::{Command, GammaRule, RunConfig, ALL_COMMANDS};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Capacity(String),
    Io(String),
}

impl std::error::Error for CliError {}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Capacity(m) => write!(f, "capacity exceeded: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl From<eisenlab::Error> for CliError {
    fn from(e: eisenlab::Error) -> Self {
        use eisenlab::Error as E;
        match e {
            E::Capacity(_) | E::TableTooSmall { .. } => CliError::Capacity(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Capacity(_) => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:.16e}"),
            Cell::I(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::F(v) => Some(*v),
            Cell::I(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

/// Output of one command.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// extra `#` lines, deterministic
    pub notes: Vec<String>,
    /// tolerance violations; non-empty means exit code 2
    pub failures: Vec<String>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

impl Report {
    pub fn new(header: &[&str]) -> Self {
        Report { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    pub fn note(&mut self, key: &str, value: f64) {
        self.notes.push(format!("{key} = {value:.16e}"));
        self.summary.insert(key.to_string(), serde_json::json!(value));
    }

    pub fn note_str(&mut self, key: &str, value: &str) {
        self.notes.push(format!("{key} = {value}"));
        self.summary.insert(key.to_string(), serde_json::json!(value));
    }

    fn col_index(&self, name: &str) -> usize {
        self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self.col_index(name);
        self.rows.iter().map(|r| r[i].as_f64().expect("numeric column")).collect()
    }

    /// Rows whose column `name` renders as `value`.
    pub fn filter(&self, name: &str, value: &str) -> Report {
        let i = self.col_index(name);
        Report {
            header: self.header.clone(),
            rows: self.rows.iter().filter(|r| r[i].render() == value).cloned().collect(),
            ..Default::default()
        }
    }

    /// CSV text with `#` metadata lines describing `cfg`.
    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut s = String::new();
        writeln!(s, "# eisenlab {VERSION}").unwrap();
        writeln!(s, "# command = {}", cfg.command.name()).unwrap();
        for (k, v) in &cfg.values {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        for (k, v) in &cfg.tolerances {
            writeln!(s, "# tol.{k} = {v:e}").unwrap();
        }
        for n in &self.notes {
            writeln!(s, "# {n}").unwrap();
        }
        writeln!(s, "{}", self.header.join(",")).unwrap();
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

/// Runs the command on the current rayon pool.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    commands::dispatch(cfg)
}

/// Runs the command on a dedicated pool of `workers` threads.
pub fn run_with_workers(cfg: &RunConfig, workers: usize) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg))
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut p = csv.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn sidecar(cfg: &RunConfig, report: Option<&Report>, code: i32, workers: usize, wall: f64, err: Option<&CliError>) -> String {
    let mut v = serde_json::json!({
        "command": cfg.command.name(),
        "version": VERSION,
        "config": cfg.values,
        "tolerances": cfg.tolerances,
        "workers": workers,
        "wall_time_s": wall,
        "exit_code": code,
    });
    if let Some(r) = report {
        v["summary"] = serde_json::Value::Object(r.summary.clone());
        v["failures"] = serde_json::json!(r.failures);
    }
    if let Some(e) = err {
        v["error"] = serde_json::json!(e.to_string());
    }
    serde_json::to_string_pretty(&v).unwrap()
}

/// Runs `cfg`, writes the CSV (and sidecar when an output path is set) and
/// returns the process exit code.
pub fn execute(cfg: &RunConfig) -> i32 {
    let workers = cfg.workers.unwrap_or_else(rayon::current_num_threads);
    let start = Instant::now();
    let result = run_with_workers(cfg, workers);
    let wall = start.elapsed().as_secs_f64();
    let (code, report, err) = match result {
        Ok(r) => (if r.failures.is_empty() { 0 } else { 2 }, Some(r), None),
        Err(e) => (e.exit_code(), None, Some(e)),
    };
    if let Some(e) = &err {
        eprintln!("eisenlab {}: {e}", cfg.command.name());
    }
    if let Some(r) = &report {
        for f in &r.failures {
            eprintln!("eisenlab {}: tolerance failure: {f}", cfg.command.name());
        }
    }
    let csv = report.as_ref().map(|r| r.to_csv(cfg));
    match &cfg.output {
        None => {
            if let Some(c) = csv {
                print!("{c}");
            }
        }
        Some(path) => {
            let write = |p: &Path, text: &str| {
                std::fs::write(p, text).map_err(|e| eprintln!("eisenlab: cannot write {}: {e}", p.display())).is_ok()
            };
            if let Some(c) = &csv {
                if !write(path, c) {
                    return 1;
                }
            }
            if !write(&sidecar_path(path), &sidecar(cfg, report.as_ref(), code, workers, wall, err.as_ref())) {
                return 1;
            }
        }
    }
    code
}
