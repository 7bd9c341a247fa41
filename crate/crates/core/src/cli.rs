//! Study tables and the command implementations behind the `relinfo` binary.
//!
//! Every command is a pure function from parsed inputs to output text, so the
//! binary only parses flags, reads files and writes the results.
//!
//! Study tables are CSV with a header row and the columns
//! `id, n, n0, x0, p0, unit_cost, setup_cost, max_resolvable`. `p0` falls back
//! to a global default when empty; the three cost columns are optional and
//! default to `1.0`, `0.0` and `n - n0`. An optional `n1` column (a count or
//! `full`) overrides the resolution level for `estimate`.

use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::design::{brute_force_allocation, optimize_allocation, DesignProblem, DesignSolution, Mode, VariableRecord};
use crate::error::{Error, Result};
use crate::lod::{lod_mle_vs_null, LogBase};
use crate::montecarlo::{
    contour_grid, empirical_ratio_stats, sd_curve, simulate_joint_lod, RatioStats, SimConfig,
};
use crate::rel_info::{equivalent_additional_individuals, plugin_summary, RiForm, StudyConfig};
use crate::settings::Settings;

/// Value of the top-level `schema` key in every JSON document.
pub const SCHEMA: &str = "relinfo/1";

/// How many missing values to resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum N1 {
    /// All `n - n0` missing values.
    #[default]
    Full,
    Count(u64),
}

impl N1 {
    pub fn resolve(self, cfg: &StudyConfig) -> u64 {
        match self {
            N1::Full => cfg.missing(),
            N1::Count(k) => k,
        }
    }
}

impl FromStr for N1 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(N1::Full);
        }
        s.parse()
            .map(N1::Count)
            .map_err(|_| Error::Invalid(format!("n1 must be a count or 'full', got '{s}'")))
    }
}

impl std::fmt::Display for N1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            N1::Full => f.write_str("full"),
            N1::Count(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawRow {
    id: String,
    n: u64,
    n0: u64,
    x0: u64,
    #[serde(default)]
    p0: Option<f64>,
    #[serde(default)]
    unit_cost: Option<f64>,
    #[serde(default)]
    setup_cost: Option<f64>,
    #[serde(default)]
    max_resolvable: Option<u64>,
    #[serde(default)]
    n1: Option<String>,
}

/// Parsed study table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub records: Vec<VariableRecord>,
    /// Per-row resolution override, aligned with `records`.
    pub n1: Vec<Option<N1>>,
}

impl StudyTable {
    pub fn from_records(records: Vec<VariableRecord>) -> Self {
        let n1 = vec![None; records.len()];
        Self { records, n1 }
    }

    /// Parses CSV text. `default_p0` fills empty `p0` cells. Errors name the
    /// offending line.
    pub fn parse(text: &str, default_p0: Option<f64>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Invalid(format!("line 1: {e}")))?
            .clone();
        for required in ["id", "n", "n0", "x0"] {
            if !headers.iter().any(|h| h == required) {
                return Err(Error::Invalid(format!("line 1: missing required column '{required}'")));
            }
        }
        let mut records = Vec::new();
        let mut n1 = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, row) in reader.deserialize::<RawRow>().enumerate() {
            let line = i + 2;
            let at = |e: String| Error::Invalid(format!("line {line}: {e}"));
            let row = row.map_err(|e| at(e.to_string()))?;
            let p0 = row
                .p0
                .or(default_p0)
                .ok_or_else(|| at("p0 is empty and no default was given".into()))?;
            let cfg = StudyConfig::new(row.n, row.n0, row.x0, p0).map_err(|e| at(e.to_string()))?;
            let record = VariableRecord {
                id: row.id.clone(),
                max_resolvable: row.max_resolvable.unwrap_or(cfg.missing()),
                cfg,
                unit_cost: row.unit_cost.unwrap_or(1.0),
                setup_cost: row.setup_cost.unwrap_or(0.0),
            };
            record.validate().map_err(|e| at(e.to_string()))?;
            if !ids.insert(row.id.clone()) {
                return Err(at(format!("duplicate id '{}'", row.id)));
            }
            let row_n1 = match row.n1.as_deref().map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(s.parse::<N1>().map_err(|e| at(e.to_string()))?),
            };
            records.push(record);
            n1.push(row_n1);
        }
        if records.is_empty() {
            return Err(Error::Invalid("study table has no rows".into()));
        }
        Ok(Self { records, n1 })
    }

    /// Writes every column explicitly; `parse` reads it back unchanged.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let with_n1 = self.n1.iter().any(Option::is_some);
        let mut header = vec!["id", "n", "n0", "x0", "p0", "unit_cost", "setup_cost", "max_resolvable"];
        if with_n1 {
            header.push("n1");
        }
        w.write_record(&header).map_err(csv_err)?;
        for (r, n1) in self.records.iter().zip(&self.n1) {
            let mut fields = vec![
                r.id.clone(),
                r.cfg.n.to_string(),
                r.cfg.n0.to_string(),
                r.cfg.x0.to_string(),
                r.cfg.p0.to_string(),
                r.unit_cost.to_string(),
                r.setup_cost.to_string(),
                r.max_resolvable.to_string(),
            ];
            if with_n1 {
                fields.push(n1.map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&fields).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Invalid(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub id: String,
    pub n: u64,
    pub n0: u64,
    pub x0: u64,
    pub p0: f64,
    pub n1: u64,
    /// Observed MLE-vs-null lod in the configured base.
    pub lod_ob: Option<f64>,
    pub plugin_ri1: Option<f64>,
    pub expected_inverse_ri: Option<f64>,
    pub sd_inverse_ri: Option<f64>,
    pub equivalent_additional_individuals: Option<f64>,
    pub stable: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub schema: &'static str,
    pub log_base: LogBase,
    pub rows: Vec<EstimateRow>,
    /// Rows that failed for a reason other than instability.
    pub hard_failures: usize,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from(
            "id,n,n0,x0,p0,n1,lod_ob,plugin_ri1,expected_inverse_ri,sd_inverse_ri,equivalent_additional_individuals,stable,error\n",
        );
        for r in &self.rows {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record([
                r.id.clone(),
                r.n.to_string(),
                r.n0.to_string(),
                r.x0.to_string(),
                r.p0.to_string(),
                r.n1.to_string(),
                opt(r.lod_ob),
                opt(r.plugin_ri1),
                opt(r.expected_inverse_ri),
                opt(r.sd_inverse_ri),
                opt(r.equivalent_additional_individuals),
                r.stable.to_string(),
                r.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
            out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Plug-in relative information for every row of the table. Rows whose
/// observed MLE equals the null are reported as unstable; other failures are
/// recorded on the row and counted in `hard_failures`.
pub fn cmd_estimate(table: &StudyTable, n1: N1, settings: &Settings) -> EstimateReport {
    let mut hard_failures = 0;
    let rows = table
        .records
        .iter()
        .zip(&table.n1)
        .map(|(rec, row_n1)| {
            let cfg = rec.cfg;
            let k = row_n1.unwrap_or(n1).resolve(&cfg);
            let lod_ob = lod_mle_vs_null(cfg.observed(), cfg.p0)
                .ok()
                .map(|l| l.in_base(settings.log_base).value);
            let mut row = EstimateRow {
                id: rec.id.clone(),
                n: cfg.n,
                n0: cfg.n0,
                x0: cfg.x0,
                p0: cfg.p0,
                n1: k,
                lod_ob,
                plugin_ri1: None,
                expected_inverse_ri: None,
                sd_inverse_ri: None,
                equivalent_additional_individuals: None,
                stable: false,
                error: None,
            };
            match plugin_summary(&cfg, k, settings) {
                Ok(s) => {
                    row.plugin_ri1 = Some(s.plugin_ri1);
                    row.expected_inverse_ri = Some(s.expected_inverse_ri);
                    row.sd_inverse_ri = Some(s.sd_inverse_ri);
                    row.equivalent_additional_individuals =
                        equivalent_additional_individuals(s.plugin_ri1, cfg.n).ok();
                    row.stable = s.stable;
                }
                Err(Error::Instability { lod_ob, eps, .. }) => {
                    let ids = vec![rec.id.clone()];
                    row.error = Some(Error::Instability { ids, lod_ob, eps }.to_string());
                }
                Err(e) => {
                    hard_failures += 1;
                    row.error = Some(e.to_string());
                }
            }
            row
        })
        .collect();
    EstimateReport {
        schema: SCHEMA,
        log_base: settings.log_base,
        rows,
        hard_failures,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub schema: &'static str,
    pub mode: Mode,
    pub budget: f64,
    pub log_base: LogBase,
    pub solver: &'static str,
    #[serde(flatten)]
    pub solution: DesignSolution,
}

impl DesignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Budget-optimal follow-up allocation for the table. With `oracle` set the
/// exhaustive search is used instead of the optimizer.
pub fn cmd_design(
    table: &StudyTable,
    budget: f64,
    mode: Mode,
    form: RiForm,
    oracle: bool,
    settings: &Settings,
) -> Result<DesignReport> {
    let problem = DesignProblem::new(table.records.clone(), budget, mode)
        .with_form(form)
        .with_settings(*settings);
    let (solution, solver) = if oracle {
        (brute_force_allocation(&problem)?, "brute_force")
    } else {
        (optimize_allocation(&problem)?, "optimizer")
    };
    Ok(DesignReport {
        schema: SCHEMA,
        mode,
        budget,
        log_base: settings.log_base,
        solver,
        solution,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub n: u64,
    pub n0: u64,
    pub true_p: f64,
    pub p0: f64,
    pub replicates: u64,
    pub seed: u64,
    pub bins_x: usize,
    pub bins_y: usize,
    /// Extra reference slopes besides 1 and 1.25.
    pub ratios: Vec<f64>,
    pub ratio_floor: f64,
}

impl SimulateArgs {
    /// Defaults for the 800-of-1000 example with a small departure from the null.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            n: 1000,
            n0: 800,
            true_p: 0.55,
            p0: 0.5,
            replicates: 100_000,
            seed,
            bins_x: 40,
            bins_y: 40,
            ratios: Vec::new(),
            ratio_floor: crate::montecarlo::DEFAULT_RATIO_FLOOR,
        }
    }
}

/// The three artifacts of a simulation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulateOutput {
    /// `x_bin_center,y_bin_center,count,density`.
    pub contour_csv: String,
    /// `r,x_start,y_start,x_end,y_end` across the grid's x range.
    pub lines_csv: String,
    pub stats_json: String,
}

#[derive(Serialize)]
struct StatsDoc<'a> {
    schema: &'static str,
    config: &'a SimConfig,
    log_base: LogBase,
    correlation: Option<f64>,
    ratio_stats: &'a RatioStats,
}

/// Joint lod simulation, its contour grid and ratio statistics.
pub fn cmd_simulate(args: &SimulateArgs, settings: &Settings) -> Result<SimulateOutput> {
    let cfg = SimConfig {
        n: args.n,
        n0: args.n0,
        true_p: args.true_p,
        p0: args.p0,
        replicates: args.replicates,
        seed: args.seed,
    };
    let sample = simulate_joint_lod(&cfg)?;
    let grid = contour_grid(&sample, args.bins_x, args.bins_y, &args.ratios)?;
    let stats = empirical_ratio_stats(&sample, args.ratio_floor)?;
    let scale = |v: f64| settings.log_base.from_natural(v);

    let mut contour_csv = String::from("x_bin_center,y_bin_center,count,density\n");
    let (xc, yc) = (grid.x_centers(), grid.y_centers());
    for (ix, x) in xc.iter().enumerate() {
        for (iy, y) in yc.iter().enumerate() {
            let _ = writeln!(
                contour_csv,
                "{},{},{},{}",
                scale(*x),
                scale(*y),
                grid.counts[ix][iy],
                grid.normalized[ix][iy]
            );
        }
    }

    let mut lines_csv = String::from("r,x_start,y_start,x_end,y_end\n");
    let (x_lo, x_hi) = (grid.x_edges[0], grid.x_edges[grid.bins_x()]);
    for r in &grid.reference_ratios {
        let _ = writeln!(
            lines_csv,
            "{},{},{},{},{}",
            r,
            scale(x_lo),
            scale(r * x_lo),
            scale(x_hi),
            scale(r * x_hi)
        );
    }

    let doc = StatsDoc {
        schema: SCHEMA,
        config: &cfg,
        log_base: settings.log_base,
        correlation: sample.correlation(),
        ratio_stats: &stats,
    };
    Ok(SimulateOutput {
        contour_csv,
        lines_csv,
        stats_json: serde_json::to_string_pretty(&doc).expect("stats serialize"),
    })
}

/// Default observed count when only `n` is given: 80% of `n`, at least one.
pub fn default_n0(n: u64) -> u64 {
    ((n as f64 * 0.8).round() as u64).clamp(1, n.max(1))
}

/// Standard-deviation curve CSV: `x0,sd` then one `density_p=<p>` column per
/// true probability. `sd` is empty where the ratio is unstable.
pub fn cmd_curves(n: u64, n0: u64, p0: f64, true_ps: &[f64], settings: &Settings) -> Result<String> {
    let curve = sd_curve(n, n0, p0, true_ps, settings)?;
    let mut out = String::from("x0,sd");
    for d in &curve.density_curves {
        let _ = write!(out, ",density_p={}", d.true_p);
    }
    out.push('\n');
    for (i, row) in curve.rows.iter().enumerate() {
        let _ = write!(out, "{}", row.x0);
        match row.sd_inverse_ri {
            Some(sd) => {
                let _ = write!(out, ",{sd}");
            }
            None => out.push(','),
        }
        for d in &curve.density_curves {
            let _ = write!(out, ",{}", d.masses[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Structured error document written to stderr by the binary.
pub fn error_json(err: &Error) -> String {
    json!({
        "schema": SCHEMA,
        "error": { "kind": err.kind(), "message": err.to_string() }
    })
    .to_string()
}
