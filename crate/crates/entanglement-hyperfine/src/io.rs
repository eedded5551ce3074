//! Declarative runs: TOML config in, CSV fields and a JSON summary out.
//!
//! Exit codes: 0 when every residual check passes, 1 on a computation error
//! or a failed check, 2 when the config is rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cft::{self, ContinuumParams};
use crate::error::{Error, Result};
use crate::fcs;
use crate::fock::product_spectrum;
use crate::gaussian::{self, spectral_decompose, ContourField, FieldKind};
use crate::holo::{self, Branch, HoloChart};
use crate::hyperfine::{self, EDGE_DEPTH};
use crate::lattice::{self, Boundary, ChernParams, CorrelationMatrix, LatticeSpec, Occupation, Region};
use crate::ode::Tolerance;
use crate::recon;

/// Overrides `output_dir` from the config when set.
pub const OUTPUT_ENV: &str = "EHF_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Chain,
    ChernTorus,
    ChernCylinder,
    CftCompare,
    Holo,
    Qpc,
    Recon,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Not echoed into the summary, so artifacts do not depend on where they
    /// were written.
    #[serde(default = "default_output", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default = "default_orders")]
    pub orders: Vec<f64>,
    #[serde(default = "default_cumulants")]
    pub cumulants: Vec<usize>,
    pub chain: Option<ChainConfig>,
    pub chern: Option<ChernConfig>,
    pub region: Option<RegionConfig>,
    pub sweep: Option<SweepConfig>,
    pub holo: Option<HoloConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_orders() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_cumulants() -> Vec<usize> {
    vec![2, 4, 6]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainBoundary {
    Open,
    Periodic,
    /// Infinite chain; `length` sites of the exact sine kernel are kept.
    Infinite,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub length: usize,
    pub boundary: ChainBoundary,
    pub filling: Option<f64>,
    pub chemical_potential: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernConfig {
    #[serde(default)]
    pub m: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "forty")]
    pub lx: usize,
    #[serde(default = "forty")]
    pub ly: usize,
    #[serde(default = "sixty")]
    pub chern_grid: usize,
}

fn one() -> f64 {
    1.0
}
fn forty() -> usize {
    40
}
fn sixty() -> usize {
    60
}

/// Interval `[x0, x0 + width)` for chains; add `y0` and `height` for a
/// rectangle of cells.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    #[serde(default)]
    pub x0: usize,
    pub width: usize,
    pub y0: Option<usize>,
    pub height: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "forty")]
    pub ly: usize,
    #[serde(default = "one")]
    pub lambda: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub m_step: f64,
    pub kx: Vec<f64>,
    #[serde(default = "edge_depth")]
    pub depth: usize,
}

fn edge_depth() -> usize {
    EDGE_DEPTH
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoloConfig {
    pub half_length: f64,
    #[serde(default = "holo_epsilon")]
    pub epsilon: f64,
    #[serde(default = "holo_samples")]
    pub samples: usize,
    #[serde(default = "one")]
    pub flow_time: f64,
    /// Boundary start `(u, v)` inside the causal diamond.
    #[serde(default = "boundary_start")]
    pub boundary_start: [f64; 2],
    /// Bulk start `(u, v, r)`.
    #[serde(default = "bulk_start")]
    pub bulk_start: [f64; 3],
}

fn holo_epsilon() -> f64 {
    1e-3
}
fn holo_samples() -> usize {
    400
}
fn boundary_start() -> [f64; 2] {
    [0.1, -0.2]
}
fn bulk_start() -> [f64; 3] {
    [0.1, -0.05, 3.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "tol_sum_rule")]
    pub sum_rule: f64,
    #[serde(default = "tol_cumulant")]
    pub cumulant: f64,
    #[serde(default = "tol_cumulant")]
    pub geometry: f64,
    #[serde(default = "tol_recon")]
    pub reconstruction: f64,
}

fn tol_sum_rule() -> f64 {
    1e-10
}
fn tol_cumulant() -> f64 {
    1e-8
}
fn tol_recon() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sum_rule: tol_sum_rule(),
            cumulant: tol_cumulant(),
            geometry: tol_cumulant(),
            reconstruction: tol_recon(),
        }
    }
}

/// A rejected config, with the 1-based line it refers to when known.
#[derive(Clone, Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// First line whose text starts with `needle` (after indentation).
fn line_of(source: &str, needle: &str) -> Option<usize> {
    source
        .lines()
        .position(|l| l.trim_start().starts_with(needle))
        .map(|i| i + 1)
}

pub fn parse_config(source: &str) -> std::result::Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(source).map_err(|e| {
        let line = e
            .span()
            .map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
        ConfigError {
            line,
            message: e.message().to_string(),
        }
    })?;
    validate_config(&cfg, source)?;
    Ok(cfg)
}

fn validate_config(cfg: &RunConfig, source: &str) -> std::result::Result<(), ConfigError> {
    let err = |key: &str, msg: String| {
        Err(ConfigError {
            line: line_of(source, key),
            message: msg,
        })
    };
    let need = |present: bool, section: &str| -> std::result::Result<(), ConfigError> {
        if present {
            Ok(())
        } else {
            Err(ConfigError {
                line: line_of(source, "experiment"),
                message: format!("experiment {:?} needs a [{section}] section", cfg.experiment),
            })
        }
    };
    if cfg.orders.iter().any(|&n| !(n > 0.0 && n.is_finite())) {
        return err("orders", "Renyi orders must be positive".into());
    }
    if cfg.cumulants.iter().any(|&k| k == 0 || k % 2 == 1 || k > 40) {
        return err("cumulants", "cumulant orders must be even and in 2..=40".into());
    }
    if let Some(c) = &cfg.chain {
        if c.length < 2 {
            return err("length", "chain length must be at least 2".into());
        }
        match (c.filling, c.chemical_potential, c.boundary) {
            (Some(_), Some(_), _) => {
                return err("filling", "give either filling or chemical_potential, not both".into())
            }
            (None, None, _) => return err("[chain]", "give a filling or a chemical_potential".into()),
            (None, Some(_), ChainBoundary::Infinite) => {
                return err(
                    "chemical_potential",
                    "the infinite chain is specified by its filling".into(),
                )
            }
            (Some(f), _, _) if !(0.0..=1.0).contains(&f) => return err("filling", "filling must lie in [0, 1]".into()),
            _ => {}
        }
    }
    if let Some(r) = &cfg.region {
        if r.width == 0 || r.height == Some(0) {
            return err("width", "region must be non-empty".into());
        }
    }
    match cfg.experiment {
        Experiment::Chain | Experiment::CftCompare | Experiment::Qpc | Experiment::Recon => {
            need(cfg.chain.is_some(), "chain")?;
            need(cfg.region.is_some(), "region")?;
            let (c, r) = (cfg.chain.as_ref().unwrap(), cfg.region.as_ref().unwrap());
            if r.x0 + r.width > c.length {
                return err(
                    "width",
                    format!("region [{}, {}) exceeds the chain", r.x0, r.x0 + r.width),
                );
            }
            if r.y0.is_some() || r.height.is_some() {
                return err("y0", "chain regions are one-dimensional".into());
            }
            if cfg.experiment == Experiment::Recon && r.width > 4 {
                return err("width", "spectrum reconstruction needs 2^width <= 16".into());
            }
        }
        Experiment::ChernTorus => {
            need(cfg.chern.is_some(), "chern")?;
            need(cfg.region.is_some(), "region")?;
            let (c, r) = (cfg.chern.as_ref().unwrap(), cfg.region.as_ref().unwrap());
            let (y0, h) = (r.y0.unwrap_or(0), r.height.unwrap_or(r.width));
            if r.x0 + r.width > c.lx || y0 + h > c.ly {
                return err("width", "region exceeds the torus".into());
            }
        }
        Experiment::ChernCylinder => {
            need(cfg.sweep.is_some(), "sweep")?;
            let s = cfg.sweep.as_ref().unwrap();
            if !(s.m_step > 0.0 && s.m_max >= s.m_min) {
                return err("m_step", "need m_step > 0 and m_max >= m_min".into());
            }
            if s.kx.iter().any(|k| !(0.0..2.0 * PI).contains(k)) {
                return err("kx", "kx values must lie in [0, 2 pi)".into());
            }
            if s.ly < 4 || s.ly % 2 == 1 || s.depth == 0 || s.depth > s.ly / 2 {
                return err("ly", "need an even ly >= 4 and 1 <= depth <= ly / 2".into());
            }
        }
        Experiment::Holo => {
            need(cfg.holo.is_some(), "holo")?;
            let h = cfg.holo.as_ref().unwrap();
            if cfg.orders.iter().any(|&n| n < 1.0) {
                return err("orders", "holographic orders must be >= 1".into());
            }
            if !(h.half_length > 0.0 && h.epsilon > 0.0 && h.samples >= 200) {
                return err(
                    "half_length",
                    "need half_length > 0, epsilon > 0 and samples >= 200".into(),
                );
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- artifacts

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub software: String,
    pub experiment: Experiment,
    pub status: String,
    pub error: Option<String>,
    /// Keyed by `S_n`, `refined_S_n`.
    pub entropies: BTreeMap<String, f64>,
    /// Keyed by `C_k`: field total and generating-function value.
    pub cumulant_totals: BTreeMap<String, [f64; 2]>,
    pub residuals: BTreeMap<String, Residual>,
    pub reports: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
    pub config: RunConfig,
}

impl Summary {
    fn new(cfg: &RunConfig) -> Self {
        Summary {
            software: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            experiment: cfg.experiment,
            status: "ok".into(),
            error: None,
            entropies: BTreeMap::new(),
            cumulant_totals: BTreeMap::new(),
            residuals: BTreeMap::new(),
            reports: BTreeMap::new(),
            artifacts: Vec::new(),
            config: cfg.clone(),
        }
    }

    fn check(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.residuals.insert(
            name.into(),
            Residual {
                value,
                limit,
                pass: value <= limit,
            },
        );
    }

    fn report(&mut self, name: &str, value: impl Serialize) {
        self.reports
            .insert(name.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn all_pass(&self) -> bool {
        self.residuals.values().all(|r| r.pass)
    }
}

/// One row of a field CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub x: usize,
    pub y: Option<usize>,
    pub orbital_summed: bool,
    pub kind: String,
    pub n: Option<f64>,
    pub k: Option<usize>,
    pub value: f64,
}

pub const FIELD_HEADER: &str = "x,y,orbital_summed,kind,n,k,value";

/// Rows of a field, one per cell (orbitals summed) for 2D lattices and one per
/// site for chains, ordered by `(y, x)`.
pub fn field_rows(field: &ContourField) -> Vec<FieldRow> {
    let two_d = field.sites.iter().any(|s| s.y.is_some());
    let (kind, n, k) = (field.kind.label().to_string(), field.n, field.kind.k());
    let mut rows: Vec<FieldRow> = if two_d {
        field
            .orbital_summed()
            .into_iter()
            .map(|((y, x), value)| FieldRow {
                x,
                y: Some(y),
                orbital_summed: true,
                kind: kind.clone(),
                n,
                k,
                value,
            })
            .collect()
    } else {
        field
            .sites
            .iter()
            .zip(&field.values)
            .map(|(s, &value)| FieldRow {
                x: s.x,
                y: None,
                orbital_summed: false,
                kind: kind.clone(),
                n,
                k,
                value,
            })
            .collect()
    };
    rows.sort_by_key(|r| (r.y, r.x));
    rows
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn field_csv(field: &ContourField) -> String {
    let mut out = String::from(FIELD_HEADER);
    out.push('\n');
    for r in field_rows(field) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.x,
            r.y.map(|y| y.to_string()).unwrap_or_default(),
            r.orbital_summed,
            r.kind,
            r.n.map(fmt_f64).unwrap_or_default(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            fmt_f64(r.value)
        );
    }
    out
}

pub fn parse_field_csv(text: &str) -> Result<Vec<FieldRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == FIELD_HEADER => {}
        _ => return Err(Error::Domain(format!("field CSV must start with \"{FIELD_HEADER}\""))),
    }
    let bad = |i: usize, what: &str| Error::Domain(format!("field CSV line {}: bad {what}", i + 2));
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let c: Vec<&str> = l.split(',').collect();
            if c.len() != 7 {
                return Err(bad(i, "column count"));
            }
            fn opt(s: &str) -> Option<&str> {
                if s.is_empty() {
                    None
                } else {
                    Some(s)
                }
            }
            Ok(FieldRow {
                x: c[0].parse().map_err(|_| bad(i, "x"))?,
                y: opt(c[1]).map(|s| s.parse()).transpose().map_err(|_| bad(i, "y"))?,
                orbital_summed: c[2].parse().map_err(|_| bad(i, "orbital_summed"))?,
                kind: c[3].to_string(),
                n: opt(c[4]).map(|s| s.parse()).transpose().map_err(|_| bad(i, "n"))?,
                k: opt(c[5]).map(|s| s.parse()).transpose().map_err(|_| bad(i, "k"))?,
                value: c[6].parse().map_err(|_| bad(i, "value"))?,
            })
        })
        .collect()
}

fn field_file_name(field: &ContourField, prefix: &str) -> String {
    let mut name = format!("{prefix}{}", field.kind.label());
    if let Some(n) = field.n {
        let _ = write!(name, "_n{}", format!("{n}").replace('.', "p"));
    }
    if let Some(k) = field.kind.k() {
        let _ = write!(name, "_k{k}");
    }
    name + ".csv"
}

struct Writer {
    dir: PathBuf,
    written: Vec<String>,
}

impl Writer {
    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", self.dir.join(name).display())))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

// ---------------------------------------------------------------- decay fits

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayLaw {
    Exponential,
    PowerLaw,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    /// Slope of `ln v` against distance.
    pub exp_slope: f64,
    pub exp_r2: f64,
    /// Slope of `ln v` against the log chord distance.
    pub power_exponent: f64,
    pub power_r2: f64,
    /// R^2 of `ln v` against plain `ln d`, kept for comparison.
    pub plain_power_r2: f64,
    pub law: DecayLaw,
    pub r2: f64,
}

/// Least-squares line `y = a x + b`; returns `(a, b, R^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a * xi - b).powi(2)).sum();
    (a, b, if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 })
}

/// Classify the decay of a cross-section `values[d - 1]`, `d = 1..=width`,
/// measured from one cut of a region of that width. Fits use `d = 2..=width/2`.
/// The power law is fitted against the chord distance
/// `l = x (width - x) / width` with `x = d - 1/2`, which accounts for the
/// opposite cut.
pub fn fit_decay(values: &[f64]) -> Result<DecayFit> {
    let width = values.len();
    let hi = width / 2;
    if hi < 4 {
        return Err(Error::Domain("cross-section too short for a decay fit".into()));
    }
    let ds: Vec<usize> = (2..=hi).collect();
    let mut logv = Vec::with_capacity(ds.len());
    for &d in &ds {
        let v = values[d - 1];
        if v.is_nan() || v <= 0.0 {
            return Err(Error::Domain(format!("non-positive value {v} at distance {d}")));
        }
        logv.push(v.ln());
    }
    let dist: Vec<f64> = ds.iter().map(|&d| d as f64).collect();
    let chord: Vec<f64> = ds
        .iter()
        .map(|&d| {
            let x = d as f64 - 0.5;
            (x * (width as f64 - x) / width as f64).ln()
        })
        .collect();
    let (exp_slope, _, exp_r2) = linear_fit(&dist, &logv);
    let (power_exponent, _, power_r2) = linear_fit(&chord, &logv);
    let plain: Vec<f64> = dist.iter().map(|d| d.ln()).collect();
    let plain_power_r2 = linear_fit(&plain, &logv).2;
    let (law, r2) = if exp_r2 >= power_r2 {
        (DecayLaw::Exponential, exp_r2)
    } else {
        (DecayLaw::PowerLaw, power_r2)
    };
    Ok(DecayFit {
        exp_slope,
        exp_r2,
        power_exponent,
        power_r2,
        plain_power_r2,
        law,
        r2,
    })
}

/// Values of row `row` ordered by `x`, as `(distance_from_boundary, value)`
/// with distance 1 at the smallest `x`.
pub fn cross_section(rows: &[FieldRow], row: usize) -> Vec<(usize, f64)> {
    let mut sel: Vec<&FieldRow> = rows.iter().filter(|r| r.y.unwrap_or(0) == row).collect();
    sel.sort_by_key(|r| r.x);
    let x0 = sel.first().map(|r| r.x).unwrap_or(0);
    sel.iter().map(|r| (r.x - x0 + 1, r.value)).collect()
}

/// Gnuplot-style whitespace tables, one per input (separated by two blank
/// lines so `index` can address them).
pub fn plotdata(inputs: &[(String, Vec<FieldRow>)], cross: Option<usize>) -> String {
    let mut out = String::new();
    for (i, (name, rows)) in inputs.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let meta = rows.first().map(|r| {
            format!(
                "kind={} n={} k={}",
                r.kind,
                r.n.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
                r.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into())
            )
        });
        let _ = writeln!(out, "# {name} {}", meta.unwrap_or_default());
        match cross {
            Some(row) => {
                let _ = writeln!(out, "# distance_from_boundary value log_value");
                for (d, v) in cross_section(rows, row) {
                    let _ = writeln!(out, "{d} {} {}", fmt_f64(v), fmt_f64(v.abs().ln()));
                }
            }
            None => {
                let _ = writeln!(out, "# x y value");
                let mut last_y = None;
                for r in rows {
                    if last_y.is_some() && last_y != Some(r.y) {
                        out.push('\n');
                    }
                    last_y = Some(r.y);
                    let _ = writeln!(out, "{} {} {}", r.x, r.y.unwrap_or(0), fmt_f64(r.value));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------- sign pattern

#[derive(Clone, Debug, Serialize)]
pub struct SignPattern {
    /// Signs at the four corner cells.
    pub corners: [i8; 4],
    /// Signs at the midpoints of the four edges.
    pub hinges: [i8; 4],
    pub center: i8,
    pub corners_differ_from_hinges: bool,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Qualitative sign layout of a 2D cell field on a rectangle.
pub fn sign_pattern(rows: &[FieldRow]) -> Option<SignPattern> {
    let get = |x: usize, y: usize| rows.iter().find(|r| r.x == x && r.y == Some(y)).map(|r| r.value);
    let (x0, x1) = (rows.iter().map(|r| r.x).min()?, rows.iter().map(|r| r.x).max()?);
    let (y0, y1) = (
        rows.iter().filter_map(|r| r.y).min()?,
        rows.iter().filter_map(|r| r.y).max()?,
    );
    let (xm, ym) = ((x0 + x1) / 2, (y0 + y1) / 2);
    let corners = [
        sign(get(x0, y0)?),
        sign(get(x1, y0)?),
        sign(get(x0, y1)?),
        sign(get(x1, y1)?),
    ];
    let hinges = [
        sign(get(xm, y0)?),
        sign(get(x0, ym)?),
        sign(get(x1, ym)?),
        sign(get(xm, y1)?),
    ];
    let differ = corners.iter().zip(&hinges).any(|(c, h)| c != h);
    Some(SignPattern {
        corners,
        hinges,
        center: sign(get(xm, ym)?),
        corners_differ_from_hinges: differ,
    })
}

// ---------------------------------------------------------------- running

#[derive(Debug)]
pub struct RunOutcome {
    pub code: i32,
    pub message: String,
    pub summary: Option<Summary>,
}

/// Parse, execute and write artifacts. Never panics on bad input.
pub fn run(path: &Path) -> RunOutcome {
    let source = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            return RunOutcome {
                code: 2,
                message: format!("{}: {e}", path.display()),
                summary: None,
            }
        }
    };
    let mut cfg = match parse_config(&source) {
        Ok(c) => c,
        Err(e) => {
            return RunOutcome {
                code: 2,
                message: format!("{}: {e}", path.display()),
                summary: None,
            }
        }
    };
    if let Ok(dir) = std::env::var(OUTPUT_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    if !cfg.output_dir.is_absolute() {
        if let Some(parent) = path.parent() {
            cfg.output_dir = parent.join(&cfg.output_dir);
        }
    }
    run_config(&cfg)
}

pub fn run_config(cfg: &RunConfig) -> RunOutcome {
    if let Err(e) = fs::create_dir_all(&cfg.output_dir) {
        return RunOutcome {
            code: 1,
            message: format!("cannot create {}: {e}", cfg.output_dir.display()),
            summary: None,
        };
    }
    let mut summary = Summary::new(cfg);
    let mut writer = Writer {
        dir: cfg.output_dir.clone(),
        written: Vec::new(),
    };
    let result = match cfg.experiment {
        Experiment::Chain => run_chain(cfg, &mut summary, &mut writer),
        Experiment::CftCompare => run_cft(cfg, &mut summary, &mut writer),
        Experiment::Qpc => run_qpc(cfg, &mut summary, &mut writer),
        Experiment::Recon => run_recon(cfg, &mut summary),
        Experiment::ChernTorus => run_torus(cfg, &mut summary, &mut writer),
        Experiment::ChernCylinder => run_cylinder(cfg, &mut summary, &mut writer),
        Experiment::Holo => run_holo(cfg, &mut summary, &mut writer),
    };
    let (code, message) = match result {
        Err(e) => {
            summary.status = "error".into();
            summary.error = Some(e.to_string());
            (1, format!("computation failed: {e}"))
        }
        Ok(()) if !summary.all_pass() => {
            summary.status = "residual-check-failed".into();
            let failed: Vec<&str> = summary
                .residuals
                .iter()
                .filter(|(_, r)| !r.pass)
                .map(|(k, _)| k.as_str())
                .collect();
            (1, format!("residual checks failed: {}", failed.join(", ")))
        }
        Ok(()) => (0, "ok".to_string()),
    };
    summary.artifacts = writer.written.clone();
    summary.artifacts.push("summary.json".into());
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    if let Err(e) = writer.put("summary.json", &json) {
        return RunOutcome {
            code: 1,
            message: e.to_string(),
            summary: Some(summary),
        };
    }
    RunOutcome {
        code,
        message,
        summary: Some(summary),
    }
}

fn chain_state(cfg: &RunConfig) -> Result<(CorrelationMatrix, Region)> {
    let c = cfg
        .chain
        .as_ref()
        .ok_or_else(|| Error::Domain("missing [chain]".into()))?;
    let r = cfg
        .region
        .as_ref()
        .ok_or_else(|| Error::Domain("missing [region]".into()))?;
    let m = match c.boundary {
        ChainBoundary::Infinite => lattice::sine_kernel_correlation(c.length, PI * c.filling.unwrap_or(0.5))?,
        b => {
            let boundary = if b == ChainBoundary::Open {
                Boundary::Open
            } else {
                Boundary::Periodic
            };
            let occupation = match (c.filling, c.chemical_potential) {
                (Some(f), _) => Occupation::Filling(f),
                (_, Some(mu)) => Occupation::ChemicalPotential(mu),
                _ => return Err(Error::Domain("chain occupation missing".into())),
            };
            lattice::build_chain_correlation(&LatticeSpec::chain(c.length, boundary, occupation))?
        }
    };
    Ok((m, Region::interval(r.x0, r.width)))
}

/// Entropies, contours and cumulant fields with their sum rules.
fn entropy_and_cumulants(
    cfg: &RunConfig,
    sd: &gaussian::SpectralData,
    summary: &mut Summary,
    writer: &mut Writer,
    write_cumulants: bool,
) -> Result<()> {
    for &n in &cfg.orders {
        let s = gaussian::entropy(sd, n, false)?;
        let field = gaussian::contour(sd, n, false)?;
        summary.entropies.insert(format!("S_{n}"), s.value);
        summary
            .entropies
            .insert(format!("refined_S_{n}"), gaussian::entropy(sd, n, true)?.value);
        summary.check(
            format!("sum_rule_s{n}"),
            (field.total() - s.value).abs(),
            cfg.tolerances.sum_rule,
        );
        writer.put(&field_file_name(&field, "field_"), &field_csv(&field))?;
    }
    let kmax = cfg.cumulants.iter().copied().max().unwrap_or(2);
    let from_chi = fcs::cumulants_from_chi(sd, kmax.max(2))?;
    for &k in &cfg.cumulants {
        let c = hyperfine::cumulant_density_field(sd, k)?;
        let field_total: f64 = c.values.iter().sum();
        summary
            .cumulant_totals
            .insert(format!("C_{k}"), [field_total, from_chi[k - 1]]);
        summary.check(
            format!("cumulant_total_k{k}"),
            (field_total - from_chi[k - 1]).abs(),
            cfg.tolerances.cumulant,
        );
        if write_cumulants {
            let f = c.as_contour();
            writer.put(&field_file_name(&f, "field_"), &field_csv(&f))?;
        }
    }
    Ok(())
}

fn run_chain(cfg: &RunConfig, summary: &mut Summary, writer: &mut Writer) -> Result<()> {
    let (m, region) = chain_state(cfg)?;
    let sd = spectral_decompose(&m.restrict(&region)?)?;
    entropy_and_cumulants(cfg, &sd, summary, writer, true)
}

fn run_cft(cfg: &RunConfig, summary: &mut Summary, writer: &mut Writer) -> Result<()> {
    let (m, region) = chain_state(cfg)?;
    let sd = spectral_decompose(&m.restrict(&region)?)?;
    entropy_and_cumulants(cfg, &sd, summary, writer, true)?;
    let r = region.len() as f64 / 2.0;
    let c2 = hyperfine::cumulant_density_field(&sd, 2)?;
    let base = ContinuumParams::free_fermion(r, 1.0);
    summary.report(
        "c2_vs_closed_form",
        cft::lattice_vs_cft(&c2.values, |x| cft::c2_density_closed(x, &base))?,
    );
    for &n in &cfg.orders {
        let p = ContinuumParams { n, ..base };
        let s = gaussian::contour(&sd, n, false)?;
        summary.report(
            &format!("s{n}_vs_closed_form"),
            cft::lattice_vs_cft(&s.values, |x| cft::h_n2_closed(x, &p))?,
        );
        summary.report(
            &format!("s{n}_over_c2"),
            cft::ratio_spread(&s.values, &c2.values, cft::density_ratio(&p))?,
        );
    }
    Ok(())
}

fn run_qpc(cfg: &RunConfig, summary: &mut Summary, writer: &mut Writer) -> Result<()> {
    let (m, region) = chain_state(cfg)?;
    let sd = spectral_decompose(&m.restrict(&region)?)?;
    let mut worst: f64 = 0.0;
    for &k in &cfg.cumulants {
        let direct = hyperfine::cumulant_density_field(&sd, k)?;
        let mut values = Vec::with_capacity(region.len());
        for (j, site) in region.sites().iter().enumerate() {
            let v = fcs::qpc_protocol(&m, &region, site, k)?;
            worst = worst.max((v - direct.values[j]).abs());
            values.push(v);
        }
        let field = ContourField {
            sites: region.sites().to_vec(),
            values,
            n: None,
            kind: FieldKind::Cumulant(k),
        };
        writer.put(&field_file_name(&field, "qpc_"), &field_csv(&field))?;
    }
    summary.check("qpc_vs_direct", worst, cfg.tolerances.cumulant);
    Ok(())
}

fn run_recon(cfg: &RunConfig, summary: &mut Summary) -> Result<()> {
    let (m, region) = chain_state(cfg)?;
    let sd = spectral_decompose(&m.restrict(&region)?)?;
    let t = recon::traces_from_spectrum(&sd, recon::MAX_DIMENSION)?;
    let rec = recon::reconstruct_spectrum(&t)?;
    let mut want = product_spectrum(&sd.xi);
    want.sort_by(|a, b| b.total_cmp(a));
    let dev = rec
        .roots
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    summary.check("spectrum_vs_product", dev, cfg.tolerances.reconstruction);
    summary.check("trace_normalization", (rec.roots.iter().sum::<f64>() - 1.0).abs(), 1e-8);
    summary.report("traces", &t.values);
    summary.report("reconstruction", &rec);
    Ok(())
}

fn run_torus(cfg: &RunConfig, summary: &mut Summary, writer: &mut Writer) -> Result<()> {
    let c = cfg
        .chern
        .as_ref()
        .ok_or_else(|| Error::Domain("missing [chern]".into()))?;
    let r = cfg
        .region
        .as_ref()
        .ok_or_else(|| Error::Domain("missing [region]".into()))?;
    let params = ChernParams::new(c.m, c.lambda, c.mu);
    let full = lattice::build_chern_torus_correlation(&LatticeSpec::torus(c.lx, c.ly), &params)?;
    let region = Region::rectangle(r.x0, r.y0.unwrap_or(0), r.width, r.height.unwrap_or(r.width), 2);
    let sd = spectral_decompose(&full.restrict(&region)?)?;
    entropy_and_cumulants(cfg, &sd, summary, writer, false)?;
    match hyperfine::chern_number(&params, c.chern_grid) {
        Ok(ch) => summary.report("chern_number", ch),
        Err(e) => summary.report("chern_number", e.to_string()),
    }
    let mid_row = region.sites().iter().filter_map(|s| s.y).min().unwrap_or(0) + r.height.unwrap_or(r.width) / 2;
    for &n in &cfg.orders {
        for &k in &cfg.cumulants {
            let h = hyperfine::hyperfine_field(&sd, n, k)?;
            let rows = field_rows(&h);
            writer.put(&field_file_name(&h, "field_"), &field_csv(&h))?;
            let tag = format!("n{n}_k{k}");
            summary.report(&format!("sign_pattern_{tag}"), sign_pattern(&rows));
            let cs: Vec<f64> = cross_section(&rows, mid_row).iter().map(|p| p.1).collect();
            if let Ok(fit) = fit_decay(&cs) {
                summary.report(&format!("decay_{tag}"), fit);
            }
        }
    }
    Ok(())
}

/// Masses `m_min, m_min + step, ...` rounded to 12 decimals so that grid
/// points land on round values.
pub fn mass_grid(m_min: f64, m_max: f64, step: f64) -> Vec<f64> {
    let count = ((m_max - m_min) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((m_min + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

pub const EDGE_HEADER: &str = "m,kx,k,value_normalized";

fn run_cylinder(cfg: &RunConfig, summary: &mut Summary, writer: &mut Writer) -> Result<()> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Domain("missing [sweep]".into()))?;
    let masses = mass_grid(s.m_min, s.m_max, s.m_step);
    let n = cfg.orders.first().copied().unwrap_or(2.0);
    let mut csv = String::from(EDGE_HEADER);
    csv.push('\n');
    let mut collapse = BTreeMap::new();
    for &kx in &s.kx {
        let prof = hyperfine::edge_scaling_profile(s.ly, s.lambda, &masses, kx, n, &cfg.cumulants, s.depth)?;
        for (ki, &k) in prof.ks.iter().enumerate() {
            for (mi, &m) in prof.masses.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{},{},{k},{}",
                    fmt_f64(m),
                    fmt_f64(kx),
                    fmt_f64(prof.normalized[ki][mi])
                );
            }
            let peak = prof.normalized[ki].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            summary.check(format!("normalization_kx{kx:.4}_k{k}"), (peak - 1.0).abs(), 1e-12);
        }
        let (spread, min) = prof.collapse_stats(s.m_min, s.m_max);
        collapse.insert(
            format!("{kx:.6}"),
            json!({ "max_pairwise_difference": spread, "min_normalized": min }),
        );
    }
    summary.report("collapse_over_sweep", collapse);
    writer.put("edge_profile.csv", &csv)
}

fn run_holo(cfg: &RunConfig, summary: &mut Summary, writer: &mut Writer) -> Result<()> {
    let h = cfg
        .holo
        .as_ref()
        .ok_or_else(|| Error::Domain("missing [holo]".into()))?;
    let tol = cfg.tolerances.geometry;
    let ode_tol = Tolerance::default();
    for &n in &cfg.orders {
        let chart = HoloChart::symmetric(h.half_length, n)?;
        let curve = holo::extremal_curve(&chart, h.epsilon, h.samples)?;
        let mut csv = String::from("param,x,t,z,cumlen\n");
        for ((p, pt), l) in curve.params.iter().zip(&curve.points).zip(&curve.cumlen) {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_f64(*p),
                fmt_f64(pt[0]),
                fmt_f64(pt[1]),
                fmt_f64(pt[2]),
                fmt_f64(*l)
            );
        }
        writer.put(&format!("curve_n{}.csv", format!("{n}").replace('.', "p")), &csv)?;

        let mut null_residual: f64 = 0.0;
        for pt in &curve.points {
            let (u, v, r) = ((pt[0] + pt[1]) / 2.0, (pt[0] - pt[1]) / 2.0, 2.0 / (pt[2] * pt[2]));
            for b in [Branch::Plus, Branch::Minus] {
                let rn = holo::null_surface_r(u, v, &chart, b)?.unwrap_or(f64::INFINITY);
                null_residual = null_residual.max((rn / r - 1.0).abs());
            }
        }
        summary.check(format!("null_surfaces_n{n}"), null_residual, tol);
        if n == 1.0 {
            let rt = curve
                .points
                .iter()
                .map(|p| {
                    (p[0] * p[0] + p[2] * p[2] - h.half_length * h.half_length)
                        .abs()
                        .max(p[1].abs())
                })
                .fold(0.0, f64::max);
            summary.check("rt_semicircle", rt, tol);
        }
        summary.report(
            &format!("curve_n{n}"),
            json!({ "length": curve.length(), "wedge_excess": curve.wedge_excess(h.half_length) }),
        );

        let [u0, v0] = h.boundary_start;
        let mut bdev: f64 = 0.0;
        for i in 0..=20 {
            let s = h.flow_time * (i as f64 / 10.0 - 1.0);
            let exact = holo::modular_flow_boundary(u0, v0, &chart, s)?;
            let (u, v) = holo::modular_flow_boundary_rk(u0, v0, &chart, s, ode_tol)?;
            bdev = bdev.max((u - exact.u).abs()).max((v - exact.v).abs());
        }
        summary.check(format!("boundary_flow_rk_n{n}"), bdev, tol);

        let unit = HoloChart::symmetric(h.half_length, 1.0)?;
        let flow_n = holo::modular_flow_bulk(h.bulk_start, &chart, h.flow_time, 11, ode_tol)?;
        let flow_1 = holo::modular_flow_bulk(h.bulk_start, &unit, n * h.flow_time, 11, ode_tol)?;
        let reparam = flow_n
            .states
            .iter()
            .zip(&flow_1.states)
            .map(|(a, b)| {
                (0..3)
                    .map(|i| (a[i] - b[i]).abs() / b[i].abs().max(1.0))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        summary.report(
            &format!("bulk_flow_n{n}"),
            json!({ "truncated": flow_n.truncated || flow_1.truncated, "samples": flow_n.states.len() }),
        );
        summary.check(format!("bulk_reparameterization_n{n}"), reparam, tol);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SiteIndex;

    const CHAIN: &str = r#"
experiment = "chain"
orders = [1.0, 2.0]
cumulants = [2, 4, 6]

[chain]
length = 40
boundary = "open"
filling = 0.5

[region]
x0 = 10
width = 12
"#;

    #[test]
    fn rejects_unknown_keys_with_a_line() {
        let bad = CHAIN.replace("filling = 0.5", "filling = 0.5\nmass_term = 3");
        let e = parse_config(&bad).unwrap_err();
        assert_eq!(e.line, Some(10));
        assert!(e.message.contains("mass_term"));
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let bad = CHAIN.replace("width = 12", "width = 40");
        let e = parse_config(&bad).unwrap_err();
        assert_eq!(e.line, Some(13));
    }

    #[test]
    fn csv_round_trip() {
        let f = ContourField {
            sites: vec![SiteIndex::chain(3), SiteIndex::chain(2)],
            values: vec![0.5, 1.0 / 3.0],
            n: Some(2.0),
            kind: FieldKind::Renyi,
        };
        let text = field_csv(&f);
        assert!(text.starts_with("x,y,orbital_summed,kind,n,k,value\n2,,false,renyi,"));
        let rows = parse_field_csv(&text).unwrap();
        assert_eq!(rows[0].value, 1.0 / 3.0);
        assert_eq!(rows[1].x, 3);
        assert_eq!(rows[1].k, None);
    }

    #[test]
    fn decay_classification() {
        let exp: Vec<f64> = (1..=20).map(|d| (-0.7 * d as f64).exp()).collect();
        assert_eq!(fit_decay(&exp).unwrap().law, DecayLaw::Exponential);
        let pow: Vec<f64> = (1..=20)
            .map(|d| {
                let x = d as f64 - 0.5;
                (x * (20.0 - x) / 20.0).powf(-2.0)
            })
            .collect();
        let fit = fit_decay(&pow).unwrap();
        assert_eq!(fit.law, DecayLaw::PowerLaw);
        assert!((fit.power_exponent + 2.0).abs() < 1e-12);
    }

    #[test]
    fn plotdata_of_nothing_is_empty() {
        assert_eq!(plotdata(&[], None), "");
        assert_eq!(mass_grid(-0.2, 0.2, 0.1), vec![-0.2, -0.1, 0.0, 0.1, 0.2]);
    }
}
