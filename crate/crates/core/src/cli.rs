//! Command-line front end: flag and config-file resolution, dispatch to the
//! library, and CSV/JSON rendering.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::criticality::{fidelity_scan, ground_fidelity_checked, phase_diagram, ScanParam};
use crate::dfree::{build_braided_pair, df_ratios_m3, relative_residual, G_REF};
use crate::error::Error;
use crate::interactions::{
    effective_hamiltonian, scan_vs_gain, scan_vs_separation, scan_vs_theta, EffectivePair,
    PairSetup, Placement,
};
use crate::quantum_ops::C64;
use crate::scan::{linspace, ScanResult};
use crate::slh::{cascade_left, cascade_right, gauge_transform, Ordering};
use crate::spinchain::{allowed_momenta, Parity, SpinChainSpec, XyParams, CONTINUUM_POINTS};
use crate::waveguide::{integrate_coupled_wave, propagate_analytic, ModeAmplitudes, WaveguideConfig, DEFAULT_STEP};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Domain,
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Usage, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Domain, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Domain => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = if e.is_numerical() { ErrorKind::Numerical } else { ErrorKind::Domain };
        Self { kind, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "gwqed", version, about = "Giant atoms in a parametric waveguide: couplings, SLH checks and XY-chain criticality")]
pub struct Cli {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate the coupled-wave amplitudes along the waveguide.
    Waveguide(WaveguideArgs),
    /// Decoherence-free coupling profile and its residuals.
    Dfree(DfreeArgs),
    /// Compare the SLH cascade of a braided pair with the closed form.
    SlhCheck(SlhCheckArgs),
    /// Exchange and pairing strengths, single point or scans.
    Interactions(InteractionsArgs),
    /// Excitation spectrum of the XY chain.
    Dispersion(ChainArgs),
    /// Excitation gap versus detuning or pairing.
    Gap(GapArgs),
    /// Ground-state fidelity and its susceptibility.
    Fidelity(FidelityArgs),
    /// Gap map and phase labels over (delta, jp).
    PhaseDiagram(PhaseDiagramArgs),
}

#[derive(Debug, Args)]
pub struct WaveguideArgs {
    #[arg(long)]
    gain: Option<String>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    theta_right: Option<String>,
    #[arg(long)]
    delta_k: Option<String>,
    #[arg(long)]
    loss1: Option<String>,
    #[arg(long)]
    loss2: Option<String>,
    /// Initial amplitude of mode 1 (real).
    #[arg(long)]
    a1: Option<String>,
    /// Initial amplitude of conjugated mode 2 (real).
    #[arg(long)]
    a2c: Option<String>,
    /// Number of output positions.
    #[arg(long)]
    steps: Option<String>,
    /// `analytic` or `rk4`.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Args)]
pub struct DfreeArgs {
    #[arg(long)]
    gain: Option<String>,
    #[arg(long)]
    spacing: Option<String>,
    /// Sweep the gain instead: G_MIN G_MAX STEPS.
    #[arg(long, num_args = 3, value_names = ["G_MIN", "G_MAX", "STEPS"])]
    scan_gain: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SlhCheckArgs {
    #[arg(long)]
    ds: Option<String>,
    #[arg(long)]
    gain: Option<String>,
    #[arg(long)]
    theta_plus: Option<String>,
    #[arg(long)]
    theta_minus: Option<String>,
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    length: Option<String>,
}

#[derive(Debug, Args)]
pub struct InteractionsArgs {
    #[arg(long)]
    gain: Option<String>,
    #[arg(long)]
    theta_minus: Option<String>,
    #[arg(long)]
    theta_plus: Option<String>,
    #[arg(long)]
    ds: Option<String>,
    /// `none`, `gain`, `theta` or `ds`.
    #[arg(long)]
    scan: Option<String>,
    #[arg(long)]
    min: Option<String>,
    #[arg(long)]
    max: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Centre the pair in the waveguide instead of starting at `base`.
    #[arg(long)]
    center: bool,
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    length: Option<String>,
    /// Allow spacings beyond pi (separate, non-braided atoms).
    #[arg(long)]
    extended: bool,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    jc: Option<String>,
    #[arg(long)]
    jp: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Dense momentum grid instead of the allowed momenta.
    #[arg(long)]
    continuum: bool,
    #[arg(long)]
    steps: Option<String>,
    /// `even` or `odd` fermion parity for the allowed momenta.
    #[arg(long)]
    parity: Option<String>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    jc: Option<String>,
    #[arg(long)]
    jp: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    continuum: bool,
    /// `delta` or `jp`.
    #[arg(long)]
    scan: Option<String>,
    #[arg(long)]
    min: Option<String>,
    #[arg(long)]
    max: Option<String>,
    #[arg(long)]
    steps: Option<String>,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    jc: Option<String>,
    #[arg(long)]
    jp: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    delta_h: Option<String>,
    /// `delta` or `jp`.
    #[arg(long)]
    scan: Option<String>,
    #[arg(long)]
    min: Option<String>,
    #[arg(long)]
    max: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// `true` puts grid points at cell centres, off the critical lines.
    #[arg(long)]
    half_step: Option<String>,
    /// Fail if the ground state changes parity sector within a step.
    #[arg(long)]
    checked: bool,
}

#[derive(Debug, Args)]
pub struct PhaseDiagramArgs {
    #[arg(long)]
    jc: Option<String>,
    #[arg(long)]
    delta_min: Option<String>,
    #[arg(long)]
    delta_max: Option<String>,
    #[arg(long)]
    delta_steps: Option<String>,
    #[arg(long)]
    jp_min: Option<String>,
    #[arg(long)]
    jp_max: Option<String>,
    #[arg(long)]
    jp_steps: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
}

fn flag(b: bool) -> Option<String> {
    b.then(|| "true".to_string())
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Waveguide(_) => "waveguide",
            Command::Dfree(_) => "dfree",
            Command::SlhCheck(_) => "slh-check",
            Command::Interactions(_) => "interactions",
            Command::Dispersion(_) => "dispersion",
            Command::Gap(_) => "gap",
            Command::Fidelity(_) => "fidelity",
            Command::PhaseDiagram(_) => "phase-diagram",
        }
    }

    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Waveguide(a) => vec![
                ("gain", a.gain.clone()),
                ("length", a.length.clone()),
                ("theta_right", a.theta_right.clone()),
                ("delta_k", a.delta_k.clone()),
                ("loss1", a.loss1.clone()),
                ("loss2", a.loss2.clone()),
                ("a1", a.a1.clone()),
                ("a2c", a.a2c.clone()),
                ("steps", a.steps.clone()),
                ("method", a.method.clone()),
            ],
            Command::Dfree(a) => vec![
                ("gain", a.gain.clone()),
                ("spacing", a.spacing.clone()),
                ("scan_gain", a.scan_gain.as_ref().map(|v| v.join(" "))),
            ],
            Command::SlhCheck(a) => vec![
                ("ds", a.ds.clone()),
                ("gain", a.gain.clone()),
                ("theta_plus", a.theta_plus.clone()),
                ("theta_minus", a.theta_minus.clone()),
                ("base", a.base.clone()),
                ("length", a.length.clone()),
            ],
            Command::Interactions(a) => vec![
                ("gain", a.gain.clone()),
                ("theta_minus", a.theta_minus.clone()),
                ("theta_plus", a.theta_plus.clone()),
                ("ds", a.ds.clone()),
                ("scan", a.scan.clone()),
                ("min", a.min.clone()),
                ("max", a.max.clone()),
                ("steps", a.steps.clone()),
                ("center", flag(a.center)),
                ("base", a.base.clone()),
                ("length", a.length.clone()),
                ("extended", flag(a.extended)),
            ],
            Command::Dispersion(a) => vec![
                ("n", a.n.clone()),
                ("jc", a.jc.clone()),
                ("jp", a.jp.clone()),
                ("delta", a.delta.clone()),
                ("continuum", flag(a.continuum)),
                ("steps", a.steps.clone()),
                ("parity", a.parity.clone()),
            ],
            Command::Gap(a) => vec![
                ("n", a.n.clone()),
                ("jc", a.jc.clone()),
                ("jp", a.jp.clone()),
                ("delta", a.delta.clone()),
                ("continuum", flag(a.continuum)),
                ("scan", a.scan.clone()),
                ("min", a.min.clone()),
                ("max", a.max.clone()),
                ("steps", a.steps.clone()),
            ],
            Command::Fidelity(a) => vec![
                ("n", a.n.clone()),
                ("jc", a.jc.clone()),
                ("jp", a.jp.clone()),
                ("delta", a.delta.clone()),
                ("delta_h", a.delta_h.clone()),
                ("scan", a.scan.clone()),
                ("min", a.min.clone()),
                ("max", a.max.clone()),
                ("steps", a.steps.clone()),
                ("half_step", a.half_step.clone()),
                ("checked", flag(a.checked)),
            ],
            Command::PhaseDiagram(a) => vec![
                ("jc", a.jc.clone()),
                ("delta_min", a.delta_min.clone()),
                ("delta_max", a.delta_max.clone()),
                ("delta_steps", a.delta_steps.clone()),
                ("jp_min", a.jp_min.clone()),
                ("jp_max", a.jp_max.clone()),
                ("jp_steps", a.jp_steps.clone()),
                ("threshold", a.threshold.clone()),
            ],
        }
    }
}

/// Default values, `auto` where the value depends on the scan choice.
fn defaults(command: &str) -> &'static [(&'static str, &'static str)] {
    match command {
        "waveguide" => &[
            ("gain", "0.8"),
            ("length", "2"),
            ("theta_right", "0"),
            ("delta_k", "0"),
            ("loss1", "0"),
            ("loss2", "0"),
            ("a1", "1"),
            ("a2c", "0"),
            ("steps", "101"),
            ("method", "analytic"),
        ],
        "dfree" => &[("gain", "0.8"), ("spacing", "pi"), ("scan_gain", "none")],
        "slh-check" => &[
            ("ds", "0.2pi"),
            ("gain", "0.8"),
            ("theta_plus", "0"),
            ("theta_minus", "0"),
            ("base", "0"),
            ("length", "4pi"),
        ],
        "interactions" => &[
            ("gain", "0.8"),
            ("theta_minus", "0"),
            ("theta_plus", "0"),
            ("ds", "0.2pi"),
            ("scan", "none"),
            ("min", "auto"),
            ("max", "auto"),
            ("steps", "auto"),
            ("center", "false"),
            ("base", "0"),
            ("length", "4pi"),
            ("extended", "false"),
        ],
        "dispersion" => &[
            ("n", "16"),
            ("jc", "1"),
            ("jp", "0.5"),
            ("delta", "2"),
            ("continuum", "false"),
            ("steps", "201"),
            ("parity", "even"),
        ],
        "gap" => &[
            ("n", "16"),
            ("jc", "1"),
            ("jp", "0.5"),
            ("delta", "2"),
            ("continuum", "false"),
            ("scan", "delta"),
            ("min", "auto"),
            ("max", "auto"),
            ("steps", "auto"),
        ],
        "fidelity" => &[
            ("n", "16"),
            ("jc", "1"),
            ("jp", "0.5"),
            ("delta", "2"),
            ("delta_h", "0.01"),
            ("scan", "delta"),
            ("min", "auto"),
            ("max", "auto"),
            ("steps", "auto"),
            ("half_step", "true"),
            ("checked", "false"),
        ],
        "phase-diagram" => &[
            ("jc", "1"),
            ("delta_min", "-8"),
            ("delta_max", "8"),
            ("delta_steps", "81"),
            ("jp_min", "-2"),
            ("jp_max", "2"),
            ("jp_steps", "41"),
            ("threshold", "0.001"),
        ],
        _ => &[],
    }
}

/// Scan ranges filled in for `auto`: (min, max, steps).
fn auto_range(command: &str, scan: &str) -> Option<(&'static str, &'static str, &'static str)> {
    match (command, scan) {
        ("interactions", "gain") => Some(("0", "2", "41")),
        ("interactions", "theta") => Some(("0", "4pi", "161")),
        ("interactions", "ds") => Some(("0.005pi", "pi", "200")),
        ("interactions", "none") => Some(("0", "0", "1")),
        ("gap", "delta") => Some(("-8", "8", "161")),
        ("gap", "jp") => Some(("-2", "2", "81")),
        ("fidelity", "delta") => Some(("-8", "8", "320")),
        ("fidelity", "jp") => Some(("-2", "2", "80")),
        _ => None,
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

/// Parses a flat `key = value` file; blank lines and `#` comments are
/// skipped, dashes in keys read as underscores.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("malformed config line {}: expected key = value, got {raw:?}", lineno + 1))
        })?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(CliError::usage(format!("malformed config line {}: empty key", lineno + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Defaults, overridden by the file, overridden by flags.
    pub fn resolve(command: &Command, file: Option<&str>) -> CliResult<Self> {
        let name = command.name();
        let mut values: BTreeMap<String, String> = defaults(name)
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(text) = file {
            for (k, v) in parse_config_text(text)? {
                if k == "command" {
                    if v != name {
                        return Err(CliError::usage(format!("config file is for `{v}`, not `{name}`")));
                    }
                    continue;
                }
                if !values.contains_key(&k) {
                    return Err(CliError::usage(format!("unknown config key `{k}` for `{name}`")));
                }
                values.insert(k, v);
            }
        }
        for (k, v) in command.flags() {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        let mut cfg = Self { command: name.to_string(), values };
        cfg.fill_auto()?;
        Ok(cfg)
    }

    fn fill_auto(&mut self) -> CliResult<()> {
        if !self.values.contains_key("min") {
            return Ok(());
        }
        let scan = self.values["scan"].clone();
        let (lo, hi, steps) = auto_range(&self.command, &scan)
            .ok_or_else(|| CliError::usage(format!("unknown scan `{scan}` for `{}`", self.command)))?;
        for (k, v) in [("min", lo), ("max", hi), ("steps", steps)] {
            if self.values[k] == "auto" {
                self.values.insert(k.to_string(), v.to_string());
            }
        }
        Ok(())
    }

    /// Rebuilds a configuration from the `#` header of an emitted CSV.
    pub fn from_metadata(text: &str) -> CliResult<Self> {
        let mut command = None;
        let mut values = BTreeMap::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            let Some((k, v)) = body.split_once('=') else { continue };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "command" => command = Some(v.to_string()),
                "version" => {}
                _ if k.starts_with("result.") => {}
                _ => {
                    values.insert(k.to_string(), v.to_string());
                }
            }
        }
        let command = command.ok_or_else(|| CliError::usage("metadata has no command line"))?;
        Ok(Self { command, values })
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let mut m = vec![
            ("version".to_string(), VERSION.to_string()),
            ("command".to_string(), self.command.clone()),
        ];
        m.extend(self.values.iter().map(|(k, v)| (k.clone(), v.clone())));
        m
    }

    fn raw(&self, key: &str) -> CliResult<&str> {
        self.values
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| CliError::usage(format!("missing parameter `{key}`")))
    }

    pub fn real(&self, key: &str) -> CliResult<f64> {
        let raw = self.raw(key)?;
        parse_real(raw).ok_or_else(|| CliError::usage(format!("`{key}`: cannot read {raw:?} as a number")))
    }

    pub fn count(&self, key: &str) -> CliResult<usize> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| CliError::usage(format!("`{key}`: cannot read {raw:?} as a non-negative integer")))
    }

    pub fn boolean(&self, key: &str) -> CliResult<bool> {
        match self.raw(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::usage(format!("`{key}`: expected true or false, got {other:?}"))),
        }
    }

    pub fn text(&self, key: &str) -> CliResult<String> {
        Ok(self.raw(key)?.to_string())
    }

    fn grid(&self, half_step: bool) -> CliResult<Vec<f64>> {
        let (lo, hi, steps) = (self.real("min")?, self.real("max")?, self.count("steps")?);
        if steps < 2 {
            return Err(CliError::domain(format!("steps = {steps} must be at least 2")));
        }
        if !(lo < hi) {
            return Err(CliError::domain(format!("min = {lo} must be below max = {hi}")));
        }
        Ok(if half_step {
            let h = (hi - lo) / steps as f64;
            (0..steps).map(|i| lo + h * (i as f64 + 0.5)).collect()
        } else {
            linspace(lo, hi, steps)
        })
    }
}

/// Reads a real number, allowing a trailing `pi` factor: `2`, `-0.5`,
/// `pi`, `-pi`, `0.2pi`, `0.2*pi`.
pub fn parse_real(s: &str) -> Option<f64> {
    let t = s.trim();
    let x = if let Some(coef) = t.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().ok()?,
        };
        c * PI
    } else {
        t.parse::<f64>().ok()?
    };
    x.is_finite().then_some(x)
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(ScanResult),
    Json(serde_json::Value),
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Output::Table(t), Format::Csv) => t.to_csv(),
            (Output::Table(t), Format::Json) => {
                let mut s = serde_json::to_string_pretty(t).expect("serializable");
                s.push('\n');
                s
            }
            (Output::Json(v), _) => {
                let mut s = serde_json::to_string_pretty(v).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

fn finish(cfg: &RunConfig, mut table: ScanResult) -> Output {
    let result_meta: Vec<(String, String)> = table
        .metadata
        .drain(..)
        .map(|(k, v)| (format!("result.{k}"), v))
        .collect();
    table.metadata = cfg.metadata();
    table.metadata.extend(result_meta);
    Output::Table(table)
}

fn config_json(cfg: &RunConfig) -> serde_json::Value {
    json!({ "version": VERSION, "command": cfg.command, "config": cfg.values })
}

pub fn run(cfg: &RunConfig) -> CliResult<Output> {
    match cfg.command.as_str() {
        "waveguide" => run_waveguide(cfg),
        "dfree" => run_dfree(cfg),
        "slh-check" => run_slh_check(cfg),
        "interactions" => run_interactions(cfg),
        "dispersion" => run_dispersion(cfg),
        "gap" => run_gap(cfg),
        "fidelity" => run_fidelity(cfg),
        "phase-diagram" => run_phase_diagram(cfg),
        other => Err(CliError::usage(format!("unknown command `{other}`"))),
    }
}

fn run_waveguide(cfg: &RunConfig) -> CliResult<Output> {
    let length = cfg.real("length")?;
    let wg = WaveguideConfig::new(cfg.real("gain")?, length)?
        .with_pump_phases(cfg.real("theta_right")?, 0.0)
        .with_loss(cfg.real("loss1")?, cfg.real("loss2")?)
        .with_delta_k(cfg.real("delta_k")?);
    wg.validate()?;
    let init = ModeAmplitudes::new(C64::new(cfg.real("a1")?, 0.0), C64::new(cfg.real("a2c")?, 0.0));
    let steps = cfg.count("steps")?;
    if steps < 2 {
        return Err(CliError::domain(format!("steps = {steps} must be at least 2")));
    }
    let method = cfg.text("method")?;
    let mut table = ScanResult::new(&["z", "re_a1", "im_a1", "re_a2c", "im_a2c"]);
    let mut state = init;
    for z in linspace(0.0, length, steps) {
        let a = match method.as_str() {
            "analytic" => propagate_analytic(&wg, &init, z)?,
            "rk4" => {
                state = integrate_coupled_wave(&wg, &state, z, DEFAULT_STEP)?;
                state
            }
            other => return Err(CliError::usage(format!("unknown method `{other}`"))),
        };
        table.push(vec![z, a.a1.re, a.a1.im, a.a2_conj.re, a.a2_conj.im])?;
    }
    Ok(finish(cfg, table))
}

fn run_dfree(cfg: &RunConfig) -> CliResult<Output> {
    let spacing = cfg.real("spacing")?;
    let scan = cfg.text("scan_gain")?;
    if scan != "none" {
        let parts: Vec<&str> = scan.split_whitespace().collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(CliError::usage(format!("scan_gain needs G_MIN G_MAX STEPS, got {scan:?}")));
        };
        let read = |s: &str| parse_real(s).ok_or_else(|| CliError::usage(format!("scan_gain: bad number {s:?}")));
        let (lo, hi) = (read(lo)?, read(hi)?);
        let steps: usize = steps
            .parse()
            .map_err(|_| CliError::usage(format!("scan_gain: bad step count {steps:?}")))?;
        if steps < 2 || !(lo < hi) {
            return Err(CliError::domain("scan_gain needs G_MIN < G_MAX and at least 2 steps"));
        }
        let mut table =
            ScanResult::new(&["gain", "middle_ratio", "residual_cosh_abs", "residual_sinh_abs"]);
        for g in linspace(lo, hi, steps) {
            let p = df_ratios_m3(g, spacing)?;
            table.push(vec![g, p.middle_ratio(), p.residual_cosh.norm(), p.residual_sinh.norm()])?;
        }
        return Ok(finish(cfg, table));
    }
    let gain = cfg.real("gain")?;
    let p = df_ratios_m3(gain, spacing)?;
    let atom = p.atom(0.0, G_REF, 0.0)?;
    let mut v = config_json(cfg);
    v["ratios"] = json!(p.ratios);
    v["middle_ratio"] = json!(p.middle_ratio());
    v["residual_cosh_abs"] = json!(p.residual_cosh.norm());
    v["residual_sinh_abs"] = json!(p.residual_sinh.norm());
    v["relative_residual"] = json!(relative_residual(&atom, gain));
    Ok(Output::Json(v))
}

fn run_slh_check(cfg: &RunConfig) -> CliResult<Output> {
    let ds = cfg.real("ds")?;
    let gain = cfg.real("gain")?;
    let length = cfg.real("length")?;
    let (a, b) = build_braided_pair(ds, gain, cfg.real("base")?)?;
    let wg = WaveguideConfig::new(gain, length)?
        .with_phase_sum_diff(cfg.real("theta_plus")?, cfg.real("theta_minus")?);
    wg.validate()?;
    let atoms = [a.clone(), b.clone()];
    let right = cascade_right(&atoms, &wg, Ordering::Braided)?;
    let left = cascade_left(&atoms, &wg, Ordering::Braided)?;
    let h = gauge_transform(&(&right.hamiltonian + &left.hamiltonian), wg.theta_plus());
    let pair = EffectivePair::from_atoms(&a, &b, &wg);
    let closed = effective_hamiltonian(&pair);
    let mut v = config_json(cfg);
    v["l_r_norm"] = json!(right.jump().op_norm());
    v["l_l_norm"] = json!(left.jump().op_norm());
    v["h_max_deviation"] = json!(h.max_abs_diff(&closed));
    v["h_max_entry"] = json!(closed.max_abs());
    v["jc"] = json!(pair.jc);
    v["jp"] = json!(pair.jp);
    Ok(Output::Json(v))
}

fn run_interactions(cfg: &RunConfig) -> CliResult<Output> {
    let placement = if cfg.boolean("center")? {
        Placement::Centered
    } else {
        Placement::Base(cfg.real("base")?)
    };
    let setup = PairSetup {
        placement,
        theta_plus: cfg.real("theta_plus")?,
        length: cfg.real("length")?,
    };
    let extended = cfg.boolean("extended")?;
    let check_ds = |d: f64| -> CliResult<()> {
        if !(d > 0.0) || (!extended && d > PI) {
            let expected = if extended { "(0, inf)" } else { "(0, pi] (pass --extended for separate atoms)" };
            return Err(CliError::domain(format!("ds = {d} is outside {expected}")));
        }
        Ok(())
    };
    let gain = cfg.real("gain")?;
    let tm = cfg.real("theta_minus")?;
    let ds = cfg.real("ds")?;
    let table = match cfg.text("scan")?.as_str() {
        "none" => {
            check_ds(ds)?;
            let p = setup.pair(ds, gain, tm)?;
            let mut t = ScanResult::new(&["d_s", "gain", "theta_minus", "jc", "jp"]);
            t.push(vec![ds, gain, tm, p.jc, p.jp])?;
            t
        }
        "gain" => {
            check_ds(ds)?;
            scan_vs_gain(ds, tm, &cfg.grid(false)?, &setup)?
        }
        "theta" => {
            check_ds(ds)?;
            scan_vs_theta(ds, gain, &cfg.grid(false)?, &setup)?
        }
        "ds" => {
            let grid = cfg.grid(false)?;
            check_ds(grid[0])?;
            check_ds(grid[grid.len() - 1])?;
            scan_vs_separation(gain, tm, &grid, &setup)?.table
        }
        other => return Err(CliError::usage(format!("unknown scan `{other}`"))),
    };
    Ok(finish(cfg, table))
}

fn chain_spec(cfg: &RunConfig) -> CliResult<SpinChainSpec> {
    Ok(SpinChainSpec::new(cfg.count("n")?, cfg.real("jc")?, cfg.real("jp")?, cfg.real("delta")?)?)
}

fn run_dispersion(cfg: &RunConfig) -> CliResult<Output> {
    let parity = match cfg.text("parity")?.as_str() {
        "even" => Parity::Even,
        "odd" => Parity::Odd,
        other => return Err(CliError::usage(format!("parity must be even or odd, got `{other}`"))),
    };
    let spec = chain_spec(cfg)?.with_parity(parity);
    let p = spec.params()?;
    let ks = if cfg.boolean("continuum")? {
        let steps = cfg.count("steps")?;
        if steps < 2 {
            return Err(CliError::domain(format!("steps = {steps} must be at least 2")));
        }
        linspace(0.0, PI, steps)
    } else {
        allowed_momenta(spec.n, parity)
    };
    let mut table = ScanResult::new(&["k", "eps_k"]);
    for k in ks {
        table.push(vec![k, p.dispersion_paper(k)?])?;
    }
    Ok(finish(cfg, table))
}

fn scan_param(cfg: &RunConfig) -> CliResult<ScanParam> {
    match cfg.text("scan")?.as_str() {
        "delta" => Ok(ScanParam::Delta),
        "jp" => Ok(ScanParam::Jp),
        other => Err(CliError::usage(format!("scan must be delta or jp, got `{other}`"))),
    }
}

fn run_gap(cfg: &RunConfig) -> CliResult<Output> {
    let spec = chain_spec(cfg)?;
    let base = spec.params()?;
    let param = scan_param(cfg)?;
    let continuum = cfg.boolean("continuum")?;
    let ks = allowed_momenta(spec.n, spec.parity);
    let mut table = ScanResult::new(&[param.name(), "gap"]);
    for h in cfg.grid(false)? {
        let p = match param {
            ScanParam::Delta => XyParams { delta: h, ..base },
            ScanParam::Jp => XyParams { jp: h, ..base },
        };
        let gap = if continuum { p.continuum_gap()? } else { p.gap_on(&ks)? };
        table.push(vec![h, gap])?;
    }
    let table = table.with_meta("k_points", if continuum { CONTINUUM_POINTS } else { ks.len() });
    Ok(finish(cfg, table))
}

fn run_fidelity(cfg: &RunConfig) -> CliResult<Output> {
    let spec = chain_spec(cfg)?;
    let param = scan_param(cfg)?;
    let dh = cfg.real("delta_h")?;
    let grid = cfg.grid(cfg.boolean("half_step")?)?;
    if cfg.boolean("checked")? {
        for &h in &grid {
            ground_fidelity_checked(&spec, param, h, dh)?;
        }
    }
    let scan = fidelity_scan(&spec, param, &grid, dh)?;
    Ok(finish(cfg, scan.to_table()))
}

fn run_phase_diagram(cfg: &RunConfig) -> CliResult<Output> {
    let axis = |lo: &str, hi: &str, n: &str| -> CliResult<Vec<f64>> {
        let (lo, hi, n) = (cfg.real(lo)?, cfg.real(hi)?, cfg.count(n)?);
        if n < 2 || !(lo < hi) {
            return Err(CliError::domain("each axis needs min < max and at least 2 steps"));
        }
        Ok(linspace(lo, hi, n))
    };
    let deltas = axis("delta_min", "delta_max", "delta_steps")?;
    let jps = axis("jp_min", "jp_max", "jp_steps")?;
    let pd = phase_diagram(cfg.real("jc")?, &deltas, &jps, cfg.real("threshold")?)?;
    Ok(finish(cfg, pd.to_table()))
}

/// Parses arguments, runs, and returns the rendered output.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let file = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config file {}: {e}", path.display()))
        })?),
        None => None,
    };
    let cfg = RunConfig::resolve(&cli.command, file.as_deref())?;
    let out = run(&cfg)?;
    let default_format = match out {
        Output::Table(_) => Format::Csv,
        Output::Json(_) => Format::Json,
    };
    Ok(out.render(cli.format.unwrap_or(default_format)))
}

/// Parses `args` (program name first) and returns the rendered output;
/// `--output` is ignored.
pub fn execute_args<I, T>(args: I) -> CliResult<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::usage(e.to_string()))?;
    execute(&cli)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
                }
            };
            match written {
                Ok(()) => 0,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("gwqed").chain(args.iter().copied())).unwrap()
    }

    fn resolve(args: &[&str], file: Option<&str>) -> CliResult<RunConfig> {
        RunConfig::resolve(&cli(args).command, file)
    }

    #[test]
    fn pi_multiples() {
        assert_eq!(parse_real("pi"), Some(PI));
        assert_eq!(parse_real("-pi"), Some(-PI));
        assert_eq!(parse_real("0.2pi"), Some(0.2 * PI));
        assert_eq!(parse_real("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_real("1.5"), Some(1.5));
        assert_eq!(parse_real("pie"), None);
        assert_eq!(parse_real("nan"), None);
    }

    #[test]
    fn fidelity_defaults_follow_figure_inputs() {
        let c = resolve(&["fidelity"], None).unwrap();
        assert_eq!(c.count("n").unwrap(), 16);
        assert_eq!(c.real("jc").unwrap(), 1.0);
        assert_eq!(c.real("delta_h").unwrap(), 0.01);
        assert_eq!(c.real("jp").unwrap(), 0.5);
        let grid = c.grid(true).unwrap();
        assert!((grid[1] - grid[0] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn interactions_defaults() {
        let c = resolve(&["interactions"], None).unwrap();
        assert_eq!(c.real("ds").unwrap(), 0.2 * PI);
        assert_eq!(c.real("gain").unwrap(), 0.8);
        assert_eq!(c.real("theta_minus").unwrap(), 0.0);
    }

    #[test]
    fn flags_override_file() {
        let c = resolve(&["interactions", "--gain", "1.2"], Some("gain = 0.8\ntheta-minus = 0.5\n")).unwrap();
        assert_eq!(c.real("gain").unwrap(), 1.2);
        assert_eq!(c.real("theta_minus").unwrap(), 0.5);
    }

    #[test]
    fn bad_files_are_usage_errors() {
        let e = resolve(&["gap"], Some("nonsense line")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = resolve(&["gap"], Some("gain = 2")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn braided_spacing_range_enforced() {
        let c = resolve(&["interactions", "--ds", "2pi"], None).unwrap();
        assert_eq!(run(&c).unwrap_err().exit_code(), 3);
        let c = resolve(&["interactions", "--ds", "2.5pi", "--extended", "--length", "6pi"], None).unwrap();
        assert!(run(&c).is_ok());
    }

    #[test]
    fn metadata_round_trip() {
        let c = resolve(&["gap", "--jp", "0.3", "--scan", "jp"], None).unwrap();
        let text = run(&c).unwrap().render(Format::Csv);
        assert_eq!(RunConfig::from_metadata(&text).unwrap(), c);
    }

    #[test]
    fn gain_scan_header() {
        let c = resolve(&["interactions", "--scan", "gain"], None).unwrap();
        let text = run(&c).unwrap().render(Format::Csv);
        assert!(text.lines().any(|l| l == "gain,jc,jp"));
    }
}
