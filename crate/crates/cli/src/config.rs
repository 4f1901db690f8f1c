//! Run configuration: per-command defaults, `key = value` files and flag
//! overrides merged into one validated map.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Command {
    #[value(name = "identity-3pi")]
    Identity3pi,
    Plancherel,
    Parseval,
    Eval,
    Restrict,
    QueScan,
    IDelta,
    Diagonal,
    ShiftedSum,
    MtOd,
    QScan,
    Sieve,
    RationalCheck,
}

pub const ALL_COMMANDS: [Command; 13] = [
    Command::Identity3pi,
    Command::Plancherel,
    Command::Parseval,
    Command::Eval,
    Command::Restrict,
    Command::QueScan,
    Command::IDelta,
    Command::Diagonal,
    Command::ShiftedSum,
    Command::MtOd,
    Command::QScan,
    Command::Sieve,
    Command::RationalCheck,
];

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Identity3pi => "identity-3pi",
            Command::Plancherel => "plancherel",
            Command::Parseval => "parseval",
            Command::Eval => "eval",
            Command::Restrict => "restrict",
            Command::QueScan => "que-scan",
            Command::IDelta => "i-delta",
            Command::Diagonal => "diagonal",
            Command::ShiftedSum => "shifted-sum",
            Command::MtOd => "mt-od",
            Command::QScan => "q-scan",
            Command::Sieve => "sieve",
            Command::RationalCheck => "rational-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Command> {
        ALL_COMMANDS.iter().copied().find(|c| c.name() == s)
    }

    /// Recognized keys with their defaults.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::Identity3pi => &[("T", "10,50,100,250,1000")],
            Command::Plancherel => &[("T", "5,50,400")],
            Command::Parseval => &[("T", "50"), ("x", "0,0.37"), ("window", "1,2")],
            Command::Eval => &[("T", "5,20,50"), ("x", ""), ("y", ""), ("points", "50"), ("seed", "7")],
            Command::Restrict => &[("T", "500"), ("x", "0"), ("window", "1,2")],
            Command::QueScan => &[
                ("T", "200,1000"),
                ("window", "1,2"),
                ("x0", "random"),
                ("seeds", "20"),
                ("seed", "1"),
                ("gamma-rule", "logT"),
                ("gamma", "1"),
                ("gamma-exp", "0.1"),
            ],
            Command::IDelta => {
                &[("T", "1000,10000,100000"), ("delta", "16,64,256"), ("x", "0.3"), ("kernel", "bump")]
            }
            Command::Diagonal => &[("T", "100"), ("N", "1000,10000,100000")],
            Command::ShiftedSum => &[
                ("T", "100"),
                ("m", "1"),
                ("Y", "1000,10000,100000"),
                ("dilations", "1,1.07,1.15,1.23,1.32"),
                ("P", "1"),
            ],
            Command::MtOd => &[("T", "1000,10000"), ("delta", "16,64"), ("x", "0.3"), ("h-max", "auto")],
            Command::QScan => &[("x", ""), ("points", "100"), ("seed", "1"), ("h-pow", "20,22"), ("kernel", "bump")],
            Command::Sieve => &[("T", "100"), ("x-cut", "100000"), ("samples", "1000000"), ("seed", "1")],
            Command::RationalCheck => &[
                ("points", "50"),
                ("q-max", "50"),
                ("length-max", "300"),
                ("seed", "1"),
                ("q", "3"),
                ("a", "1"),
                ("delta", "64"),
                ("T", "10000"),
            ],
        }
    }

    /// Tolerances checked by the command, with defaults.
    pub fn default_tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Command::Identity3pi => &[("identity", 1e-8), ("normalization", 1e-10)],
            Command::Plancherel => &[("plancherel", 1e-6)],
            Command::Parseval => &[("parseval", 1e-3)],
            Command::Eval => &[("automorphy", 1e-6), ("truncation", 1e-11)],
            Command::Restrict => &[("quadrature", 1e-6)],
            Command::QueScan => &[],
            Command::IDelta => &[("routes", 1e-6)],
            Command::Diagonal => &[("diagonal", 0.5)],
            Command::ShiftedSum => &[("envelope-slack", 10.0)],
            Command::MtOd => &[("imag", 1e-10)],
            Command::QScan => &[("growth", 0.2)],
            Command::Sieve => &[("sieve-slack", 10.0)],
            Command::RationalCheck => &[("change-of-basis", 1e-12), ("routes", 1e-6)],
        }
    }
}

/// Keys that must be ascending lists.
const SORTED_KEYS: [&str; 5] = ["delta", "N", "Y", "h-pow", "dilations"];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub values: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    /// CSV path; `None` writes to stdout without a sidecar
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

/// Parses flat `key = value` lines; `#` starts a comment line. Tolerances are
/// written `tol.<name> = value`.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| invalid(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Reads a `key = value` file, or the `config` object of a JSON sidecar.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let mut out = Vec::new();
        if let Some(cmd) = v.get("command").and_then(|c| c.as_str()) {
            out.push(("command".to_string(), cmd.to_string()));
        }
        for section in ["config", "tolerances"] {
            let obj = v.get(section).and_then(|c| c.as_object()).ok_or_else(|| invalid(format!("sidecar lacks {section}")))?;
            for (k, val) in obj {
                let s = match val {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let key = if section == "tolerances" { format!("tol.{k}") } else { k.clone() };
                out.push((key, s));
            }
        }
        return Ok(out);
    }
    parse_kv(&text)
}

impl RunConfig {
    /// Defaults for `command` overridden by `entries` in order.
    pub fn build(command: Command, entries: &[(String, String)]) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig {
            command,
            values: command.defaults().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            tolerances: command.default_tolerances().iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            output: None,
            workers: None,
        };
        for (k, v) in entries {
            cfg.apply(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_defaults(command: Command) -> RunConfig {
        Self::build(command, &[]).expect("defaults validate")
    }

    /// Returns a copy with `key` overridden.
    pub fn set(&self, key: &str, value: &str) -> Result<RunConfig, CliError> {
        let mut c = self.clone();
        c.apply(key, value)?;
        c.validate()?;
        Ok(c)
    }

    fn apply(&mut self, k: &str, v: &str) -> Result<(), CliError> {
        let name = self.command.name();
        if let Some(tol) = k.strip_prefix("tol.") {
            if !self.tolerances.contains_key(tol) {
                return Err(invalid(format!("{name} has no tolerance {tol}")));
            }
            let x: f64 = v.parse().map_err(|_| invalid(format!("tolerance {tol}: not a number: {v}")))?;
            self.tolerances.insert(tol.to_string(), x);
        } else if k == "command" {
            if v != name {
                return Err(invalid(format!("config is for {v}, not {name}")));
            }
        } else if k == "out" {
            self.output = if v == "-" { None } else { Some(PathBuf::from(v)) };
        } else if k == "workers" {
            self.workers = Some(v.parse().map_err(|_| invalid(format!("workers: {v}")))?);
        } else if self.values.contains_key(k) {
            self.values.insert(k.to_string(), v.to_string());
        } else {
            return Err(invalid(format!("{name} does not take key {k}")));
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        for (k, v) in &self.tolerances {
            if !(*v > 0.0) {
                return Err(invalid(format!("tolerance {k} = {v} must be positive")));
            }
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be at least 1".into()));
        }
        for k in SORTED_KEYS {
            if self.values.contains_key(k) {
                let xs = self.f64_list(k)?;
                if xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid(format!("{k} must be strictly ascending")));
                }
            }
        }
        if self.values.contains_key("window") {
            self.window()?;
        }
        if self.values.contains_key("gamma-rule") {
            self.gamma_rule()?;
        }
        if self.values.contains_key("kernel") {
            self.kernel()?;
        }
        for (k, v) in &self.values {
            if matches!(k.as_str(), "T" | "x" | "y" | "delta" | "N" | "Y" | "dilations") {
                self.f64_list(k)?;
            } else if matches!(k.as_str(), "points" | "seeds" | "samples" | "q-max" | "length-max") {
                self.usize(k)?;
            } else if k == "seed" {
                self.u64(k)?;
            } else if matches!(k.as_str(), "m" | "a") {
                self.i64(k)?;
            } else if matches!(k.as_str(), "P" | "gamma" | "gamma-exp" | "x-cut") {
                self.f64(k)?;
            } else if k == "h-pow" {
                self.u32_list(k)?;
            } else if k == "q" {
                self.u64(k)?;
            } else if k == "h-max" && v != "auto" {
                self.usize(k)?;
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Result<&str, CliError> {
        self.values.get(key).map(|s| s.as_str()).ok_or_else(|| invalid(format!("missing key {key}")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, s: &str) -> Result<T, CliError> {
        s.trim().parse().map_err(|_| invalid(format!("{key}: cannot parse {s:?}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(key, self.raw(key)?)?;
        if !v.is_finite() {
            return Err(invalid(format!("{key} must be finite")));
        }
        Ok(v)
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.parse(key, self.raw(key)?)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.parse(key, self.raw(key)?)
    }

    pub fn i64(&self, key: &str) -> Result<i64, CliError> {
        self.parse(key, self.raw(key)?)
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let s = self.raw(key)?;
        if s.trim().is_empty() {
            return Ok(Vec::new());
        }
        s.split(',')
            .map(|p| {
                let v: f64 = self.parse(key, p)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(invalid(format!("{key} must be finite")))
                }
            })
            .collect()
    }

    pub fn u32_list(&self, key: &str) -> Result<Vec<u32>, CliError> {
        self.raw(key)?.split(',').map(|p| self.parse(key, p)).collect()
    }

    pub fn window(&self) -> Result<(f64, f64), CliError> {
        match self.f64_list("window")?.as_slice() {
            &[a, b] if 0.0 < a && a < b => Ok((a, b)),
            _ => Err(invalid("window must be alpha,beta with 0 < alpha < beta".into())),
        }
    }

    pub fn gamma_rule(&self) -> Result<GammaRule, CliError> {
        match self.raw("gamma-rule")? {
            "logT" => Ok(GammaRule::LogT),
            "fixed" => Ok(GammaRule::Fixed(self.f64("gamma")?)),
            "power" => Ok(GammaRule::Power(self.f64("gamma-exp")?)),
            other => Err(invalid(format!("gamma-rule must be logT, fixed or power, not {other}"))),
        }
    }

    pub fn kernel(&self) -> Result<eisenlab::sums_lab::W1Shape, CliError> {
        use eisenlab::sums_lab::W1Shape;
        match self.raw("kernel")? {
            "bump" => Ok(W1Shape::Bump),
            "even" => Ok(W1Shape::SelfConvolution),
            other => Err(invalid(format!("kernel must be bump or even, not {other}"))),
        }
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaRule {
    LogT,
    Fixed(f64),
    /// `γ = T^δ`
    Power(f64),
}

impl GammaRule {
    pub fn gamma(self, t: f64) -> f64 {
        match self {
            GammaRule::LogT => t.ln(),
            GammaRule::Fixed(g) => g,
            GammaRule::Power(d) => t.powf(d),
        }
    }
}
