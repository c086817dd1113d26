//! Command-line front end: verification drivers and data export.
//!
//! The subcommand taxonomy mirrors the library modules one to one:
//!
//! * `check-table` — the commutation table on polynomial slots
//!   ([`crate::vfield`]);
//! * `check-symmetry` — the infinitesimal criterion for chosen generators
//!   against a chosen body force ([`crate::prolong`]);
//! * `adjoint` — closed-form adjoint actions against the truncated series
//!   ([`crate::adjoint`]);
//! * `classify` — normal forms of one-dimensional subalgebras and the stored
//!   representative catalogue ([`crate::classify`]);
//! * `solution` — the exact-solution catalogue: pointwise evaluation,
//!   residual certification, and flow-field export ([`crate::solutions`]).
//!
//! Every invocation produces a [`Report`]: the echoed command, the full
//! [`RunConfig`] (file values overridden by flags), one line per check, and
//! optional structured data. With `--json` the report is serialized; the JSON
//! for a given command, config, and seed is byte-identical across runs (wall
//! time is kept out of the serialized form for exactly that reason). The
//! process exits 0 when every check passed, 1 when any failed, and 2 on
//! usage, configuration, or evaluation errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::adjoint::{ad_check, AdCheck, GroupElement};
use crate::classify::{
    normal_form_1d, poly_from_text, poly_to_expr, roundtrip_check, verify_catalog, CatalogGrid,
    NormalBranch,
};
use crate::prolong::{check_symmetry, symmetry_opts, system, Force, PdeSystem};
use crate::solutions::{by_name, family_names, flow_field, to_csv, to_svg, GridSpec};
use crate::symexpr::{num_f64, parse, Expr, SampleBox, ZeroOpts};
use crate::vfield::{check_table, expected_bracket, parse_generator, Slot, TableElem};
use crate::vfield::generators as gen;

pub const SCHEMA: &str = "plastsym-report/1";

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// Shared run parameters. Defaults come from `Default`, a `--config` file
/// (plain `key = value` lines) overrides them, and command-line flags
/// override the file. The resolved config is serialized into every report,
/// so a report always records exactly the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Mass density ρ. `None` leaves ρ to each context: a sampled parameter
    /// in identity checks, the family default in solution checks.
    pub rho: Option<f64>,
    /// Tolerance for zero tests and solution residuals.
    pub tol: f64,
    /// Tolerance for the incompressibility residual of exact solutions.
    pub tol_incompressibility: f64,
    /// Tolerance for the on-manifold symmetry criterion.
    pub tol_symmetry: f64,
    /// Random points per zero test.
    pub trials: usize,
    /// Sample points per solution-residual certification.
    pub points: usize,
    /// Truncation order of the adjoint series.
    pub terms: usize,
    /// Seed for every sampling RNG.
    pub seed: u64,
    /// Overrides of the sampling box, per coordinate.
    pub sample_box: BTreeMap<String, (f64, f64)>,
    /// Flow-field CSV output path (flowfield prints to stdout when unset).
    pub out_csv: Option<String>,
    /// Flow-field SVG output path.
    pub out_svg: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rho: None,
            tol: 1e-9,
            tol_incompressibility: 1e-12,
            tol_symmetry: 1e-8,
            trials: 32,
            points: 100,
            terms: 24,
            seed: 0x5eed,
            sample_box: BTreeMap::new(),
            out_csv: None,
            out_svg: None,
        }
    }
}

impl RunConfig {
    /// Apply a config file: `key = value` per line, `#` comments, blank
    /// lines ignored. Unknown keys are an error so typos cannot silently
    /// fall back to defaults.
    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: String| format!("line {}: {key}: {e}", lineno + 1);
            match key {
                "rho" => self.rho = Some(parse_f64(value).map_err(bad)?),
                "tol" => self.tol = parse_f64(value).map_err(bad)?,
                "tol_incompressibility" => {
                    self.tol_incompressibility = parse_f64(value).map_err(bad)?
                }
                "tol_symmetry" => self.tol_symmetry = parse_f64(value).map_err(bad)?,
                "trials" => self.trials = parse_usize(value).map_err(bad)?,
                "points" => self.points = parse_usize(value).map_err(bad)?,
                "terms" => self.terms = parse_usize(value).map_err(bad)?,
                "seed" => self.seed = parse_u64(value).map_err(bad)?,
                "sample_box" => apply_box_spec(&mut self.sample_box, value).map_err(bad)?,
                "csv" => self.out_csv = Some(value.to_string()),
                "svg" => self.out_svg = Some(value.to_string()),
                other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &ConfigOverrides) -> Result<(), String> {
        if let Some(v) = o.rho {
            self.rho = Some(v);
        }
        if let Some(v) = o.tol {
            self.tol = v;
        }
        if let Some(v) = o.tol_incompressibility {
            self.tol_incompressibility = v;
        }
        if let Some(v) = o.tol_symmetry {
            self.tol_symmetry = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.points {
            self.points = v;
        }
        if let Some(v) = o.terms {
            self.terms = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(spec) = &o.sample_box {
            apply_box_spec(&mut self.sample_box, spec)?;
        }
        Ok(())
    }

    /// Zero-test options under this config, on top of a context-appropriate
    /// sampling box. A pinned ρ becomes a fixed parameter instead of a
    /// sampled one.
    fn zero_opts(&self, base_box: SampleBox, tol: f64) -> ZeroOpts {
        let mut sample_box = base_box;
        for (name, &(lo, hi)) in &self.sample_box {
            sample_box = sample_box.with(name, lo, hi);
        }
        let mut opts = ZeroOpts {
            sample_box,
            trials: self.trials,
            tol,
            seed: self.seed,
            ..Default::default()
        };
        if let Some(r) = self.rho {
            opts.env.set_param("rho", r);
        }
        opts
    }
}

/// Parse `t=0.5:2,x=-2:2` style box overrides into the config map.
fn apply_box_spec(map: &mut BTreeMap<String, (f64, f64)>, spec: &str) -> Result<(), String> {
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, range) = part
            .split_once('=')
            .ok_or_else(|| format!("`{part}`: expected name=lo:hi"))?;
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| format!("`{part}`: expected name=lo:hi"))?;
        let lo = parse_f64(lo)?;
        let hi = parse_f64(hi)?;
        if !(lo < hi) {
            return Err(format!("`{part}`: empty range"));
        }
        map.insert(name.trim().to_string(), (lo, hi));
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a count"))
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).map_err(|_| format!("`{s}` is not a seed"))
    } else {
        s.parse().map_err(|_| format!("`{s}` is not a seed"))
    }
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// One verdict line. `max_residual` is omitted when the underlying test
/// could not produce a finite figure (the witness then explains why).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub label: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

impl CheckLine {
    fn new(label: impl Into<String>, pass: bool, max: f64) -> Self {
        CheckLine {
            label: label.into(),
            pass,
            max_residual: max.is_finite().then_some(max),
            note: None,
            witness: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn with_witness(mut self, witness: Option<String>) -> Self {
        self.witness = witness;
        self
    }
}

/// Structured payload attached to some reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportData {
    Eval {
        family: String,
        t: f64,
        x: f64,
        y: f64,
        u: f64,
        v: f64,
        sigma: f64,
        theta: f64,
    },
    Residual {
        families: Vec<ResidualEntry>,
    },
    FlowField {
        family: String,
        t: f64,
        grid: String,
        rows: usize,
        skipped: usize,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        wrote_csv: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        wrote_svg: Option<String>,
        /// CSV text, embedded when no output path was configured.
        #[serde(skip_serializing_if = "Option::is_none", default)]
        csv: Option<String>,
    },
    NormalForm {
        branch: String,
        m1: usize,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        m2: Option<usize>,
        mu: i32,
        f: String,
        g: String,
        conjugator: Vec<String>,
        rescale: f64,
        description: String,
    },
    Catalog {
        entries: Vec<CatalogEntry>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub family: String,
    pub evaluated: usize,
    pub skipped: usize,
    pub labels: Vec<String>,
    pub max_abs: Vec<f64>,
    pub suspect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    pub family: String,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// The full outcome of one invocation. Serialization deliberately excludes
/// `wall_ms` so that identical (command, config, seed) triples give
/// byte-identical JSON; the human printer shows it instead.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<CheckLine>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub data: Option<ReportData>,
    #[serde(skip, default)]
    pub wall_ms: u128,
}

impl Report {
    fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "plastsym {}", self.command);
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = write!(out, "{verdict}  {}", c.label);
            if let Some(m) = c.max_residual {
                let _ = write!(out, "  (max {m:.3e})");
            }
            if let Some(n) = &c.note {
                let _ = write!(out, "  [{n}]");
            }
            let _ = writeln!(out);
            if let Some(w) = &c.witness {
                if !c.pass {
                    let _ = writeln!(out, "      witness: {w}");
                }
            }
        }
        if let Some(data) = &self.data {
            let _ = write!(out, "{}", human_data(data));
        }
        let verdict = if self.passed { "ok" } else { "FAILED" };
        let _ = writeln!(
            out,
            "{}: {} of {} checks passed, {verdict} ({} ms)",
            self.command.split_whitespace().next().unwrap_or("run"),
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len(),
            self.wall_ms
        );
        out
    }
}

fn human_data(data: &ReportData) -> String {
    let mut out = String::new();
    match data {
        ReportData::Eval {
            family,
            t,
            x,
            y,
            u,
            v,
            sigma,
            theta,
        } => {
            let _ = writeln!(out, "{family} at (t,x,y) = ({t}, {x}, {y}):");
            let _ = writeln!(out, "  u     = {u}");
            let _ = writeln!(out, "  v     = {v}");
            let _ = writeln!(out, "  sigma = {sigma}");
            let _ = writeln!(out, "  theta = {theta}");
        }
        ReportData::Residual { families } => {
            for f in families {
                let _ = writeln!(
                    out,
                    "{}: {} points evaluated, {} skipped{}",
                    f.family,
                    f.evaluated,
                    f.skipped,
                    if f.suspect {
                        " (transcription-suspect variant)"
                    } else {
                        ""
                    }
                );
                for (label, max) in f.labels.iter().zip(&f.max_abs) {
                    let _ = writeln!(out, "  max |{label}| = {max:.3e}");
                }
            }
        }
        ReportData::FlowField {
            rows,
            skipped,
            wrote_csv,
            wrote_svg,
            ..
        } => {
            let _ = writeln!(out, "{rows} grid samples ({skipped} skipped)");
            if let Some(p) = wrote_csv {
                let _ = writeln!(out, "wrote {p}");
            }
            if let Some(p) = wrote_svg {
                let _ = writeln!(out, "wrote {p}");
            }
        }
        ReportData::NormalForm { description, .. } => {
            let _ = writeln!(out, "{description}");
        }
        ReportData::Catalog { entries } => {
            for e in entries {
                let _ = writeln!(
                    out,
                    "{}  ({}, dim {}){}",
                    e.label,
                    e.family,
                    e.dim,
                    e.note.as_deref().map(|n| format!("  — {n}")).unwrap_or_default()
                );
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "plastsym",
    version,
    about = "Symmetry toolkit for non-stationary planar ideal plasticity",
    long_about = None
)]
pub struct Cli {
    /// Config file with `key = value` lines (flags override it).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<String>,
    /// Emit the report as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct ConfigOverrides {
    /// Pin the density ρ to a value.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Zero-test / residual tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Incompressibility residual tolerance.
    #[arg(long, global = true)]
    pub tol_incompressibility: Option<f64>,
    /// Symmetry-criterion tolerance.
    #[arg(long, global = true)]
    pub tol_symmetry: Option<f64>,
    /// Random points per zero test.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Sample points per residual certification.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Adjoint series truncation order.
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    /// RNG seed (decimal or 0x-prefixed hex).
    #[arg(long, global = true, value_parser = parse_u64_arg)]
    pub seed: Option<u64>,
    /// Sampling-box overrides, e.g. "t=0.5:2,x=-2:2".
    #[arg(long, global = true, value_name = "SPEC")]
    pub sample_box: Option<String>,
}

fn parse_u64_arg(s: &str) -> Result<u64, String> {
    parse_u64(s)
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify the commutation table over polynomial slots 1, t, …, t^degree.
    CheckTable {
        /// Highest slot degree.
        #[arg(long, default_value_t = 5)]
        degree: u32,
        /// Negative control: additionally test one deliberately corrupted
        /// structure constant, which must be rejected with a witness.
        #[arg(long)]
        corrupt: bool,
    },
    /// Run the infinitesimal symmetry criterion for generators against a force.
    CheckSymmetry {
        /// Generator text, repeatable: P0, P1, P2, D, L, X[f], Y[g], S[h],
        /// Psigma[s], K, and linear combinations like "D + 2*L".
        #[arg(long = "gen", value_name = "GEN")]
        gens: Vec<String>,
        /// Shorthand for the zero-force battery: P0, D, L, X[f] and Y[g]
        /// for f, g in {1, t, t², t³}, S[h] for h in {1, t²}.
        #[arg(long)]
        all_eq9: bool,
        /// Body force entering the momentum balance.
        #[arg(long, value_enum, default_value_t = ForceKind::None)]
        force: ForceKind,
        /// Potential V(t,x,y) for --force monogenic.
        #[arg(long, value_name = "EXPR")]
        vpot: Option<String>,
        /// Friction profile h₁(s), s = u² + v².
        #[arg(long, default_value = "s", value_name = "EXPR")]
        h1: String,
        /// Friction profile h₂(s).
        #[arg(long, default_value = "1", value_name = "EXPR")]
        h2: String,
        /// Twist coefficients κ₀…κ₄ (κ₀, κ₃, κ₄ only act on friction-spiral).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        k0: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        k2: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        k3: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        k4: f64,
    },
    /// Compare closed-form adjoint actions against the truncated series.
    Adjoint {
        /// Group element as ELEM:PARAM, e.g. "D:0.4" or "X[t^2]:0.3".
        /// Without --g/--x a representative suite runs instead.
        #[arg(long, value_name = "ELEM:PARAM")]
        g: Option<String>,
        /// Target basis element, e.g. "L" or "Y[1 + t^3]".
        #[arg(long, value_name = "ELEM")]
        x: Option<String>,
    },
    /// Subalgebra classification.
    Classify {
        #[command(subcommand)]
        what: ClassifyCmd,
    },
    /// Exact-solution catalogue.
    Solution {
        #[command(subcommand)]
        what: SolutionCmd,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ForceKind {
    /// F = 0.
    None,
    /// F = ∇V for a potential V(t,x,y).
    Monogenic,
    /// Velocity-dependent friction force built from h₁, h₂, κ₁, κ₂.
    Friction,
    /// Friction plus the logarithmic-spiral time term (κ₀, κ₃, κ₄).
    FrictionSpiral,
}

#[derive(Subcommand, Debug)]
pub enum ClassifyCmd {
    /// Reduce the wing element X_f + Y_g to its adjoint normal form.
    NormalForm {
        /// Slot polynomial f(t), e.g. "2t^2 + 6t^3".
        #[arg(long, default_value = "0")]
        f: String,
        /// Slot polynomial g(t).
        #[arg(long, default_value = "0")]
        g: String,
    },
    /// Verify closure/ideal/normalizer relations of the stored
    /// representatives over a parameter grid.
    Catalog {
        /// Comma-separated values for the parameter a.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        a: Option<String>,
        /// Comma-separated values for the parameter b.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        b: Option<String>,
        /// Comma-separated values for the parameter c.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        c: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SolutionCmd {
    /// Evaluate (u, v, σ, θ) at one point.
    Eval {
        /// Family name (see `solution residual` for the list).
        #[arg(long)]
        family: String,
        /// Evaluation point "t,x,y".
        #[arg(long, value_name = "T,X,Y", allow_hyphen_values = true)]
        at: String,
        /// Parameter overrides, repeatable: --set a1=2.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
    },
    /// Certify residuals of one family (or all corrected families).
    Residual {
        /// Family name, or "all" for every non-suspect family.
        #[arg(long, default_value = "all")]
        family: String,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
    },
    /// Export the velocity field over a square grid as CSV (and SVG).
    Flowfield {
        #[arg(long)]
        family: String,
        /// Time slice.
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Grid as "min:max:n" on both axes.
        #[arg(long, default_value = "-2:2:21", allow_hyphen_values = true)]
        grid: String,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
        /// Write the CSV here instead of stdout.
        #[arg(long, value_name = "PATH")]
        csv: Option<String>,
        /// Also render an SVG quiver plot here.
        #[arg(long, value_name = "PATH")]
        svg: Option<String>,
    },
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(RunOutcome { report, json, raw }) => {
            if let Some(text) = raw {
                print!("{text}");
            } else if json {
                match serde_json::to_string_pretty(&report) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("plastsym: serialization failed: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                print!("{}", report.human());
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("plastsym: {e}");
            ExitCode::from(2)
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub json: bool,
    /// Raw pass-through output (flowfield CSV to stdout) replacing the
    /// human report.
    pub raw: Option<String>,
}

/// Resolve the config and execute the subcommand. Errors here are usage or
/// evaluation problems (exit 2); check failures live inside the report.
pub fn run(cli: Cli) -> Result<RunOutcome, String> {
    let started = Instant::now();
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("config {path}: {e}"))?;
        config.apply_file(&text).map_err(|e| format!("config {path}: {e}"))?;
    }
    config.apply_overrides(&cli.overrides)?;

    let (command, checks, data, raw) = dispatch(&cli.command, &mut config)?;
    let passed = checks.iter().all(|c| c.pass);
    let report = Report {
        schema: SCHEMA.to_string(),
        command,
        config,
        passed,
        checks,
        data,
        wall_ms: started.elapsed().as_millis(),
    };
    Ok(RunOutcome {
        report,
        json: cli.json,
        raw,
    })
}

type Dispatch = (String, Vec<CheckLine>, Option<ReportData>, Option<String>);

fn dispatch(command: &Command, config: &mut RunConfig) -> Result<Dispatch, String> {
    match command {
        Command::CheckTable { degree, corrupt } => cmd_check_table(config, *degree, *corrupt),
        Command::CheckSymmetry {
            gens,
            all_eq9,
            force,
            vpot,
            h1,
            h2,
            k0,
            k1,
            k2,
            k3,
            k4,
        } => cmd_check_symmetry(
            config,
            gens,
            *all_eq9,
            *force,
            vpot.as_deref(),
            h1,
            h2,
            [*k0, *k1, *k2, *k3, *k4],
        ),
        Command::Adjoint { g, x } => cmd_adjoint(config, g.as_deref(), x.as_deref()),
        Command::Classify { what } => match what {
            ClassifyCmd::NormalForm { f, g } => cmd_normal_form(config, f, g),
            ClassifyCmd::Catalog { a, b, c } => {
                cmd_catalog(config, a.as_deref(), b.as_deref(), c.as_deref())
            }
        },
        Command::Solution { what } => match what {
            SolutionCmd::Eval { family, at, sets } => cmd_eval(config, family, at, sets),
            SolutionCmd::Residual { family, sets } => cmd_residual(config, family, sets),
            SolutionCmd::Flowfield {
                family,
                t,
                grid,
                sets,
                csv,
                svg,
            } => {
                if let Some(p) = csv {
                    config.out_csv = Some(p.clone());
                }
                if let Some(p) = svg {
                    config.out_svg = Some(p.clone());
                }
                cmd_flowfield(config, family, *t, grid, sets)
            }
        },
    }
}

// ---------------------------------------------------------------------------
// check-table
// ---------------------------------------------------------------------------

fn cmd_check_table(config: &RunConfig, degree: u32, corrupt: bool) -> Result<Dispatch, String> {
    let slots: Vec<Expr> = (0..=degree)
        .map(|k| Expr::pow(crate::symexpr::var("t"), crate::symexpr::rat(k as i64, 1)))
        .collect();
    let opts = config.zero_opts(SampleBox::default_box(), config.tol);
    let table = check_table(&slots, &opts);
    let mut checks: Vec<CheckLine> = table
        .checks
        .iter()
        .map(|c| {
            CheckLine::new(format!("{} = {}", c.lhs, c.expected), c.pass, c.max_relative)
                .with_witness(c.witness.clone())
        })
        .collect();
    if corrupt {
        // Claim [P0, D] = 2·P0 (the true bracket is P0): the checker must
        // refuse this with a concrete witness for the report to pass.
        let got = TableElem::P0.field().bracket(&TableElem::D.field());
        let wrong = TableElem::P0.field().scale(crate::symexpr::int(2));
        let (_, true_label) = expected_bracket(&TableElem::P0, &TableElem::D);
        let residual = got.minus(&wrong).collected();
        let t = residual
            .is_zero_field(&opts)
            .map_err(|e| format!("corrupt control: {e}"))?;
        let rejected = !t.is_zero() && t.test.witness.is_some();
        checks.push(
            CheckLine::new("corrupted [P0, D] = 2*P0 is rejected", rejected, t.test.max_relative)
                .with_note(format!("true bracket: {true_label}"))
                .with_witness(t.test.witness.as_ref().map(|w| {
                    format!(
                        "component {} = {:.3e} at {:?}",
                        t.coord.as_deref().unwrap_or("?"),
                        w.value,
                        w.point
                    )
                })),
        );
    }
    let command = format!(
        "check-table --degree {degree}{}",
        if corrupt { " --corrupt" } else { "" }
    );
    Ok((command, checks, None, None))
}

// ---------------------------------------------------------------------------
// check-symmetry
// ---------------------------------------------------------------------------

/// The zero-force generator battery: the full point-symmetry basis with
/// polynomial slots through degree three on the wings and {1, t²} on the
/// stress shift.
fn eq9_battery() -> Vec<(String, crate::vfield::VectorField)> {
    let t = crate::symexpr::var("t");
    let mut out: Vec<(String, crate::vfield::VectorField)> = vec![
        ("P0".into(), gen::p0()),
        ("D".into(), gen::dil()),
        ("L".into(), gen::rot()),
    ];
    for k in 0..=3u32 {
        let slot = Expr::pow(t.clone(), crate::symexpr::rat(k as i64, 1));
        out.push((
            TableElem::X(slot.clone()).label(),
            gen::x_slot(&Slot::concrete(slot.clone())),
        ));
        out.push((
            TableElem::Y(slot.clone()).label(),
            gen::y_slot(&Slot::concrete(slot)),
        ));
    }
    for k in [0u32, 2] {
        let slot = Expr::pow(t.clone(), crate::symexpr::rat(k as i64, 1));
        out.push((
            TableElem::S(slot.clone()).label(),
            gen::s_slot(&Slot::concrete(slot)),
        ));
    }
    out
}

/// Parse one generator, accepting the table syntax plus the force-specific
/// extras: `K` (the twist κ₀P0 + κ₁D + κ₂L with the configured κ's) and
/// `Psigma[h]` (the time-dependent stress shift).
fn parse_gen(text: &str, k: &[f64; 5]) -> Result<crate::vfield::VectorField, String> {
    let trimmed = text.trim();
    if trimmed == "K" {
        return Ok(gen::k_twist(num_f64(k[0]), num_f64(k[1]), num_f64(k[2])));
    }
    if let Some(inner) = trimmed
        .strip_prefix("Psigma[")
        .and_then(|r| r.strip_suffix(']'))
    {
        let slot = parse(inner).map_err(|e| format!("{trimmed}: {e}"))?;
        return Ok(gen::p_sigma(&Slot::concrete(slot)));
    }
    parse_generator(trimmed)
}

fn build_force(
    kind: ForceKind,
    vpot: Option<&str>,
    h1: &str,
    h2: &str,
    k: &[f64; 5],
) -> Result<Force, String> {
    match kind {
        ForceKind::None => Ok(Force::zero()),
        ForceKind::Monogenic => {
            let v = vpot.ok_or("--force monogenic requires --vpot")?;
            let v = parse(v).map_err(|e| format!("--vpot: {e}"))?;
            Ok(Force::monogenic(&v))
        }
        ForceKind::Friction => {
            let h1 = parse(h1).map_err(|e| format!("--h1: {e}"))?;
            let h2 = parse(h2).map_err(|e| format!("--h2: {e}"))?;
            Ok(Force::friction(&h1, &h2, num_f64(k[1]), num_f64(k[2])))
        }
        ForceKind::FrictionSpiral => {
            let h1 = parse(h1).map_err(|e| format!("--h1: {e}"))?;
            let h2 = parse(h2).map_err(|e| format!("--h2: {e}"))?;
            Ok(Force::friction_spiral(
                &h1,
                &h2,
                num_f64(k[0]),
                num_f64(k[1]),
                num_f64(k[2]),
                num_f64(k[3]),
                num_f64(k[4]),
            ))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check_symmetry(
    config: &RunConfig,
    gens: &[String],
    all_eq9: bool,
    force: ForceKind,
    vpot: Option<&str>,
    h1: &str,
    h2: &str,
    k: [f64; 5],
) -> Result<Dispatch, String> {
    if gens.is_empty() && !all_eq9 {
        return Err("check-symmetry needs --gen or --all-eq9".into());
    }
    let sys: PdeSystem = system(build_force(force, vpot, h1, h2, &k)?);
    let opts = config.zero_opts(symmetry_opts(0).sample_box, config.tol_symmetry);

    let mut battery: Vec<(String, crate::vfield::VectorField)> = Vec::new();
    if all_eq9 {
        battery.extend(eq9_battery());
    }
    for text in gens {
        battery.push((text.clone(), parse_gen(text, &k)?));
    }

    let mut checks = Vec::new();
    for (name, vf) in &battery {
        let rep = check_symmetry(vf, &sys, &opts);
        for c in &rep.checks {
            checks.push(
                CheckLine::new(format!("{name}: {}", c.label), c.pass, c.max_relative)
                    .with_witness(c.witness.clone()),
            );
        }
    }

    let mut command = String::from("check-symmetry");
    if all_eq9 {
        command.push_str(" --all-eq9");
    }
    for g in gens {
        let _ = write!(command, " --gen {g}");
    }
    let _ = write!(command, " --force {}", force_name(force));
    if let Some(v) = vpot {
        let _ = write!(command, " --vpot {v}");
    }
    if matches!(force, ForceKind::Friction | ForceKind::FrictionSpiral) {
        let _ = write!(command, " --h1 {h1} --h2 {h2}");
        let _ = write!(command, " --k0 {} --k1 {} --k2 {} --k3 {} --k4 {}", k[0], k[1], k[2], k[3], k[4]);
    }
    Ok((command, checks, None, None))
}

fn force_name(kind: ForceKind) -> &'static str {
    match kind {
        ForceKind::None => "none",
        ForceKind::Monogenic => "monogenic",
        ForceKind::Friction => "friction",
        ForceKind::FrictionSpiral => "friction-spiral",
    }
}

// ---------------------------------------------------------------------------
// adjoint
// ---------------------------------------------------------------------------

/// Parse a basis element: P0, D, L, or X[f] / Y[g] / S[h] with a slot
/// expression between the brackets.
fn parse_table_elem(text: &str) -> Result<TableElem, String> {
    let t = text.trim();
    match t {
        "P0" => return Ok(TableElem::P0),
        "D" => return Ok(TableElem::D),
        "L" => return Ok(TableElem::L),
        _ => {}
    }
    for (prefix, build) in [
        ("X[", TableElem::X as fn(Expr) -> TableElem),
        ("Y[", TableElem::Y as fn(Expr) -> TableElem),
        ("S[", TableElem::S as fn(Expr) -> TableElem),
    ] {
        if let Some(inner) = t.strip_prefix(prefix).and_then(|r| r.strip_suffix(']')) {
            let slot = parse(inner).map_err(|e| format!("{t}: {e}"))?;
            return Ok(build(slot));
        }
    }
    Err(format!(
        "`{t}` is not a basis element (expected P0, D, L, X[f], Y[g] or S[h])"
    ))
}

/// Parse "ELEM:PARAM" into a group element.
fn parse_group_elem(text: &str) -> Result<GroupElement, String> {
    let (elem, param) = text
        .rsplit_once(':')
        .ok_or_else(|| format!("`{text}`: expected ELEM:PARAM, e.g. D:0.4"))?;
    let param = parse_f64(param)?;
    Ok(GroupElement::new(parse_table_elem(elem)?, param))
}

fn cmd_adjoint(config: &RunConfig, g: Option<&str>, x: Option<&str>) -> Result<Dispatch, String> {
    let mut pairs: Vec<(GroupElement, TableElem)> = Vec::new();
    let command;
    match (g, x) {
        (Some(g), Some(x)) => {
            command = format!("adjoint --g {g} --x {x}");
            pairs.push((parse_group_elem(g)?, parse_table_elem(x)?));
        }
        (None, None) => {
            command = "adjoint --suite".to_string();
            let t = crate::symexpr::var("t");
            let deg = |k: i64| Expr::pow(t.clone(), crate::symexpr::rat(k, 1));
            let gs = [
                GroupElement::new(TableElem::P0, 0.4),
                GroupElement::new(TableElem::D, 0.5),
                GroupElement::new(TableElem::L, 0.5),
                GroupElement::new(TableElem::X(deg(2)), 0.3),
                GroupElement::new(TableElem::Y(Expr::one() + deg(3)), 0.25),
                GroupElement::new(TableElem::S(deg(2)), 0.3),
            ];
            let targets = [
                TableElem::P0,
                TableElem::D,
                TableElem::L,
                TableElem::X(deg(6)),
                TableElem::Y(deg(4)),
                TableElem::S(deg(3)),
            ];
            for g in &gs {
                for lambda in &targets {
                    pairs.push((g.clone(), lambda.clone()));
                }
            }
        }
        _ => return Err("adjoint needs both --g and --x (or neither for the suite)".into()),
    }

    let mut checks = Vec::new();
    for (g, lambda) in &pairs {
        let c: AdCheck = ad_check(g, lambda, config.terms, config.tol_symmetry)
            .map_err(|e| e.to_string())?;
        checks.push(
            CheckLine::new(format!("{} = {}", c.label, c.closed), c.pass, c.max_relative)
                .with_witness(c.witness.clone()),
        );
    }
    Ok((command, checks, None, None))
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn cmd_normal_form(config: &RunConfig, f: &str, g: &str) -> Result<Dispatch, String> {
    let command = format!("classify normal-form --f {f} --g {g}");
    let f_poly = poly_from_text(f).map_err(|e| format!("--f: {e}"))?;
    let g_poly = poly_from_text(g).map_err(|e| format!("--g: {e}"))?;
    let nf = normal_form_1d(&f_poly, &g_poly).map_err(|e| e.to_string())?;

    let opts = config.zero_opts(SampleBox::default_box(), config.tol);
    let round = roundtrip_check(&f_poly, &g_poly, &nf, &opts).map_err(|e| e.to_string())?;
    let idem = normal_form_1d(&nf.f, &nf.g).map_err(|e| e.to_string())?;
    let fixed = idem.is_identity_conjugator()
        && idem.branch == nf.branch
        && (idem.m1, idem.m2, idem.mu) == (nf.m1, nf.m2, nf.mu);

    let checks = vec![
        CheckLine::new("conjugator roundtrip", round.is_zero, round.max_relative)
            .with_witness(round.witness.as_ref().map(|w| {
                format!("residual {:.3e} at {:?}", w.value, w.point)
            })),
        CheckLine::new("normal form is a fixed point", fixed, 0.0),
    ];
    let data = ReportData::NormalForm {
        branch: match nf.branch {
            NormalBranch::X => "X".into(),
            NormalBranch::ConstantX => "constant-X".into(),
        },
        m1: nf.m1,
        m2: nf.m2,
        mu: nf.mu,
        f: poly_to_expr(&nf.f).to_string(),
        g: poly_to_expr(&nf.g).to_string(),
        conjugator: nf.conjugator.iter().map(|g| g.label()).collect(),
        rescale: nf.rescale,
        description: nf.describe(),
    };
    Ok((command, checks, Some(data), None))
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| parse_f64(s))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("empty list".into())
            } else {
                Ok(v)
            }
        })
}

fn cmd_catalog(
    config: &RunConfig,
    a: Option<&str>,
    b: Option<&str>,
    c: Option<&str>,
) -> Result<Dispatch, String> {
    let mut grid = CatalogGrid::default();
    if let Some(list) = a {
        grid.a = parse_f64_list(list).map_err(|e| format!("--a: {e}"))?;
    }
    if let Some(list) = b {
        grid.b = parse_f64_list(list).map_err(|e| format!("--b: {e}"))?;
    }
    if let Some(list) = c {
        grid.c = parse_f64_list(list).map_err(|e| format!("--c: {e}"))?;
    }
    let fmt_list = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let command = format!(
        "classify catalog --a {} --b {} --c {}",
        fmt_list(&grid.a),
        fmt_list(&grid.b),
        fmt_list(&grid.c)
    );

    let opts = config.zero_opts(SampleBox::default_box(), config.tol);
    let reports = verify_catalog(&grid, &opts);
    let mut checks = Vec::new();
    let mut entries = Vec::new();
    for rep in &reports {
        let failures = rep.failures();
        let worst = rep
            .checks
            .iter()
            .map(|c| c.max_relative)
            .fold(0.0f64, f64::max);
        let mut line = CheckLine::new(rep.label.clone(), rep.all_pass(), worst);
        if let Some(first) = failures.first() {
            line = line.with_witness(Some(format!(
                "[{}, {}]: {}",
                first.lhs,
                first.rhs,
                first
                    .witness
                    .clone()
                    .unwrap_or_else(|| "escapes the span".into())
            )));
        }
        if let Some(note) = &rep.note {
            line = line.with_note(note.clone());
        }
        checks.push(line);
        entries.push(CatalogEntry {
            label: rep.label.clone(),
            family: rep.family.to_string(),
            dim: rep.checks.len(),
            note: rep.note.clone(),
        });
    }
    Ok((command, checks, Some(ReportData::Catalog { entries }), None))
}

// ---------------------------------------------------------------------------
// solution
// ---------------------------------------------------------------------------

fn family_or_err(name: &str) -> Result<crate::solutions::SolutionFamily, String> {
    by_name(name).ok_or_else(|| {
        format!(
            "unknown family `{name}` (available: {})",
            family_names().join(", ")
        )
    })
}

fn apply_sets(
    env: &mut crate::symexpr::Env,
    config: &RunConfig,
    sets: &[String],
) -> Result<(), String> {
    if let Some(r) = config.rho {
        env.set_param("rho", r);
    }
    for s in sets {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| format!("--set `{s}`: expected NAME=VALUE"))?;
        env.set_param(name.trim(), parse_f64(value)?);
    }
    Ok(())
}

fn fmt_sets(sets: &[String]) -> String {
    sets.iter().map(|s| format!(" --set {s}")).collect()
}

fn cmd_eval(
    config: &RunConfig,
    family: &str,
    at: &str,
    sets: &[String],
) -> Result<Dispatch, String> {
    let command = format!("solution eval --family {family} --at {at}{}", fmt_sets(sets));
    let fam = family_or_err(family)?;
    let coords = parse_f64_list(at).map_err(|e| format!("--at: {e}"))?;
    if coords.len() != 3 {
        return Err(format!("--at `{at}`: expected three coordinates t,x,y"));
    }
    let (t, x, y) = (coords[0], coords[1], coords[2]);
    let mut env = fam.default_env();
    apply_sets(&mut env, config, sets)?;
    env.set_var("t", t).set_var("x", x).set_var("y", y);

    let mut values = [0.0f64; 4];
    for (slot, (name, field)) in values.iter_mut().zip(fam.fields()) {
        *slot = field
            .eval(&env)
            .map_err(|e| format!("{family}: {name} at ({t}, {x}, {y}): {e}"))?;
    }
    let data = ReportData::Eval {
        family: fam.name.to_string(),
        t,
        x,
        y,
        u: values[0],
        v: values[1],
        sigma: values[2],
        theta: values[3],
    };
    let checks = vec![CheckLine::new(
        format!("{family} evaluates at ({t}, {x}, {y})"),
        true,
        0.0,
    )];
    Ok((command, checks, Some(data), None))
}

fn cmd_residual(config: &RunConfig, family: &str, sets: &[String]) -> Result<Dispatch, String> {
    let command = format!("solution residual --family {family}{}", fmt_sets(sets));
    let names: Vec<String> = if family == "all" {
        family_names()
            .into_iter()
            .filter(|n| by_name(n).map(|f| !f.suspect).unwrap_or(false))
            .map(|n| n.to_string())
            .collect()
    } else {
        vec![family.to_string()]
    };

    let mut checks = Vec::new();
    let mut entries = Vec::new();
    for name in &names {
        let fam = family_or_err(name)?;
        let mut env = fam.default_env();
        apply_sets(&mut env, config, sets)?;
        let points = crate::solutions::sample_points(&fam, config.points, config.seed);
        let rep = crate::solutions::residual(
            &fam,
            &env,
            &points,
            config.tol,
            config.tol_incompressibility,
        )
        .map_err(|e| format!("{name}: {e}"))?;

        let mut line = CheckLine::new(
            format!(
                "{name}: {} points within {:.1e} / {:.1e}",
                rep.evaluated, config.tol, config.tol_incompressibility
            ),
            rep.pass(),
            rep.worst().max(rep.max_abs[3]),
        );
        if fam.suspect {
            line = line.with_note("transcription-suspect variant: failure expected");
        }
        if rep.skipped > 0 {
            line = line.with_witness(Some(format!("{} points skipped (domain)", rep.skipped)));
        }
        checks.push(line);
        entries.push(ResidualEntry {
            family: rep.family.clone(),
            evaluated: rep.evaluated,
            skipped: rep.skipped,
            labels: rep.labels.iter().map(|l| l.to_string()).collect(),
            max_abs: rep.max_abs.to_vec(),
            suspect: rep.suspect,
        });
    }
    Ok((
        command,
        checks,
        Some(ReportData::Residual { families: entries }),
        None,
    ))
}

fn cmd_flowfield(
    config: &RunConfig,
    family: &str,
    t: f64,
    grid_text: &str,
    sets: &[String],
) -> Result<Dispatch, String> {
    let command = format!(
        "solution flowfield --family {family} --t {t} --grid {grid_text}{}",
        fmt_sets(sets)
    );
    let fam = family_or_err(family)?;
    let grid = GridSpec::parse(grid_text).map_err(|e| format!("--grid: {e}"))?;
    let mut env = fam.default_env();
    apply_sets(&mut env, config, sets)?;

    let field = flow_field(&fam, &env, t, &grid).map_err(|e| format!("{family}: {e}"))?;
    let csv = to_csv(&field);

    let mut raw = None;
    let mut embedded = None;
    if let Some(path) = &config.out_csv {
        std::fs::write(path, &csv).map_err(|e| format!("{path}: {e}"))?;
    } else {
        raw = Some(csv.clone());
        embedded = Some(csv);
    }
    if let Some(path) = &config.out_svg {
        std::fs::write(path, to_svg(&field)).map_err(|e| format!("{path}: {e}"))?;
    }

    let produced = !field.rows.is_empty();
    let checks = vec![CheckLine::new(
        format!("{family} flow field at t = {t} over {grid_text}"),
        produced,
        0.0,
    )
    .with_witness((!produced).then(|| "every grid point was skipped".to_string()))];
    let data = ReportData::FlowField {
        family: field.family.clone(),
        t,
        grid: grid_text.to_string(),
        rows: field.rows.len(),
        skipped: field.skipped,
        wrote_csv: config.out_csv.clone(),
        wrote_svg: config.out_svg.clone(),
        csv: embedded,
    };
    Ok((command, checks, Some(data), raw))
}
