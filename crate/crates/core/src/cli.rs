//! Command-line front end: sweeps, membership queries and protocol runners
//! emitting CSV or JSON.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::behaviors::{behavior_from_quantum, Behavior, Scenario};
use crate::bell::{
    catalog, chsh, chsh_measurements, lift, BellFunctional, CatalogName, PostSelection,
    SeesawOptions,
};
use crate::distill::hashing_thresholds;
use crate::error::Error;
use crate::measurements::{dichotomic_to_projective, MeasurementAssignment};
use crate::polytope::{
    deterministic_vertices, hybrid_vertices_3party, membership, ns_vertices_222, VerdictJson,
    VertexSet,
};
use crate::protocols::{
    lambda_search, lambda_swap, sigma_activation, star_crossing, star_threshold, star_violation,
    tau_activation,
};
use crate::states::{compose_network, isotropic, phi_ket, IsotropicParams, NetworkLayout};
use crate::tensor::{fidelity_pure, DensityState, MatrixJson};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BELLNET_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Swept quantity of a [`SweepSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariable {
    P,
    D,
    N,
    L,
    K,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::P => "p",
            SweepVariable::D => "d",
            SweepVariable::N => "N",
            SweepVariable::L => "L",
            SweepVariable::K => "K",
        }
    }

    fn is_integer(self) -> bool {
        self != SweepVariable::P
    }
}

/// `start:stop:step` as given on the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeArg {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{t:?} is not a finite number"))
        };
        let range = RangeArg {
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        };
        if range.step <= 0.0 {
            return Err(format!("step {} must be positive", range.step));
        }
        if range.start > range.stop {
            return Err(format!("start {} exceeds stop {}", range.start, range.stop));
        }
        Ok(range)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub range: RangeArg,
    /// Parameters held constant over the sweep, for the record.
    pub fixed: BTreeMap<String, f64>,
}

impl SweepSpec {
    /// Grid points `start + i·step` up to `stop`, with a relative slack so
    /// that `0:1:0.01` includes 1.
    pub fn points(&self) -> Vec<f64> {
        let RangeArg { start, stop, step } = self.range;
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let x = (start + i as f64 * step).min(stop);
                if self.variable.is_integer() {
                    x.round()
                } else {
                    x
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Bool(b) => json!(b),
            Cell::Text(t) => json!(t),
            Cell::Float(_) | Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Twelve significant digits, fixed notation where it stays readable.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Result of one subcommand: always a table, plus a richer JSON document
/// when one exists.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub table: Table,
    pub document: Option<Value>,
    pub default_format: Format,
}

impl Report {
    fn table(table: Table) -> Self {
        Self {
            table,
            document: None,
            default_format: Format::Csv,
        }
    }

    fn document(table: Table, document: Value) -> Self {
        Self {
            table,
            document: Some(document),
            default_format: Format::Json,
        }
    }

    pub fn render(&self, format: Option<Format>) -> Result<String, Error> {
        match format.unwrap_or(self.default_format) {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let doc = self
                    .document
                    .clone()
                    .unwrap_or_else(|| self.table.to_json());
                Ok(serde_json::to_string_pretty(&doc)? + "\n")
            }
        }
    }
}

/// Evaluates `task` at every grid point in parallel. Rows keep grid order;
/// a failing point leaves its value columns empty and fills `error`.
pub fn run_sweep<F>(spec: &SweepSpec, columns: &[&str], task: F) -> Table
where
    F: Fn(f64) -> crate::Result<Vec<Cell>> + Sync,
{
    let mut header = vec![spec.variable.name()];
    header.extend_from_slice(columns);
    header.push("error");
    let mut table = Table::new(&header);
    table.rows = spec
        .points()
        .par_iter()
        .map(|&x| {
            let key = if spec.variable.is_integer() {
                Cell::Int(x as i64)
            } else {
                Cell::Float(x)
            };
            let mut row = vec![key];
            match task(x) {
                Ok(cells) if cells.len() == columns.len() => {
                    row.extend(cells);
                    row.push(Cell::Empty);
                }
                Ok(cells) => {
                    row.extend(std::iter::repeat_n(Cell::Empty, columns.len()));
                    row.push(Cell::Text(format!(
                        "task returned {} cells for {} columns",
                        cells.len(),
                        columns.len()
                    )));
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(Cell::Empty, columns.len()));
                    row.push(Cell::Text(e.to_string()));
                }
            }
            row
        })
        .collect();
    table
}

#[derive(Debug, Parser)]
#[command(
    name = "bellnet",
    version,
    about = "Nonlocality of quantum states distributed in networks"
)]
pub struct Cli {
    /// Output format; tables default to csv, single results to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed of every randomized routine.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Ineq {
    Chsh,
    Mermin,
    Svetlichny,
    Cglmp,
    Plane,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Local,
    Hybrid,
    Ns,
}

#[derive(Debug, Args)]
pub struct IneqArgs {
    #[arg(long, value_enum, default_value_t = Ineq::Mermin)]
    pub ineq: Ineq,
    /// Settings per party of the plane functional.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Local dimension of CGLMP.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
}

impl IneqArgs {
    fn functional(&self, parties: usize) -> crate::Result<BellFunctional> {
        catalog(match self.ineq {
            Ineq::Chsh => CatalogName::Chsh,
            Ineq::Mermin => CatalogName::Mermin { n: parties },
            Ineq::Svetlichny => CatalogName::Svetlichny,
            Ineq::Cglmp => CatalogName::Cglmp { d: self.d },
            Ineq::Plane => CatalogName::Plane {
                n: parties,
                k: self.k,
            },
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CHSH value and local visibility of the isotropic qubit state under
    /// CHSH-optimal settings, over a grid of p.
    SweepChsh {
        #[arg(long, default_value = "0:1:0.01")]
        range: RangeArg,
    },
    /// Smallest isotropic weight with a positive hashing bound, per local
    /// dimension.
    HashingThreshold {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8, 16, 32, 64, 128, 256, 512, 1024])]
        d_list: Vec<usize>,
    },
    /// Seesaw value of a Bell functional on the leaves of the star network
    /// after the center's GHZ projection.
    Star {
        /// Number of leaves.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        ineq: IneqArgs,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Report the noise level where the violation starts instead.
        #[arg(long)]
        crossing: bool,
        /// Bisection steps for --crossing.
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Entanglement swap of two isotropic states through a Bell projection.
    LambdaSwap {
        #[arg(long, default_value = "0:1:0.1")]
        range: RangeArg,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Membership of a behavior in the local, hybrid or no-signalling
    /// polytope, with a separating functional for non-members.
    Membership {
        /// Behavior JSON file.
        #[arg(long, conflicts_with_all = ["layout", "measurements"])]
        behavior: Option<PathBuf>,
        /// Network layout JSON, used together with --measurements.
        #[arg(long, requires = "measurements")]
        layout: Option<PathBuf>,
        /// Measurement assignment JSON matching the layout's parties.
        #[arg(long, requires = "layout")]
        measurements: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Model::Local)]
        model: Model,
    },
    /// Lifts a functional on the tested parties to a Bell functional on the
    /// full network scenario.
    Lift {
        /// BellFunctional JSON file; defaults to CHSH.
        #[arg(long)]
        functional: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        post_parties: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        post_settings: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        post_outcomes: Vec<usize>,
        /// Reference settings of the tested parties.
        #[arg(long, value_delimiter = ',')]
        x0: Option<Vec<usize>>,
        /// Behavior JSON on the full scenario to evaluate the lift on.
        #[arg(long)]
        behavior: Option<PathBuf>,
    },
    /// Hybrid visibility of the flag protocol output built from the Λ
    /// two-singlet behavior, per number of copies.
    ActivateSigma {
        #[arg(long, default_value_t = 12)]
        l_max: usize,
        /// Behavior JSON of the Λ network; searched by seesaw when absent.
        #[arg(long)]
        behavior: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        restarts: usize,
    },
    /// Bell value guaranteed by reconstructing the star from flagged copies.
    ActivateTau {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.95)]
        p: f64,
        #[command(flatten)]
        ineq: IneqArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 5, 10, 20, 40, 80])]
        l_list: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Prints a catalog functional.
    Catalog {
        /// Number of parties for mermin and plane.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        ineq: IneqArgs,
    },
    /// Projective measurement plus classical response simulating a
    /// dichotomic POVM.
    PovmReduce {
        /// Effect M₀ as JSON, a flat row-major list of [re, im] pairs.
        #[arg(long)]
        effect: PathBuf,
        /// Density matrix in the same format, to compare both probabilities.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> crate::Result<T>) -> Result<T, Failure> {
    f(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<crate::tensor::Operator, Failure> {
    parse(path, |text| {
        let m: MatrixJson = serde_json::from_str(text)?;
        m.to_operator()
    })
}

fn vertices_for(model: Model, s: Scenario) -> crate::Result<VertexSet> {
    match model {
        Model::Local => deterministic_vertices(s),
        Model::Hybrid => Ok(hybrid_vertices_3party()),
        Model::Ns => Ok(ns_vertices_222()),
    }
}

fn seesaw_options(restarts: usize, seed: u64) -> SeesawOptions {
    SeesawOptions {
        restarts,
        seed,
        ..SeesawOptions::default()
    }
}

fn coefficient_table(f: &BellFunctional) -> Table {
    let mut t = Table::new(&["x", "a", "coeff"]);
    let r = f.scenario.outcome_count();
    t.rows = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| vec![Cell::from(i / r), Cell::from(i % r), Cell::from(c)])
        .collect();
    t
}

fn to_value<T: serde::Serialize>(x: &T) -> crate::Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let seed = cli.seed;
    match &cli.command {
        Command::SweepChsh { range } => {
            let spec = SweepSpec {
                variable: SweepVariable::P,
                range: *range,
                fixed: BTreeMap::from([("d".to_string(), 2.0)]),
            };
            let settings = chsh_measurements();
            let vertices = deterministic_vertices(Scenario::new(2, 2, 2)?)?;
            let table = run_sweep(&spec, &["chsh", "v_star", "member"], |p| {
                let state = isotropic(IsotropicParams::new(p, 2)?)?;
                let b = behavior_from_quantum(&state, &settings)?;
                let verdict = membership(&b, &vertices)?;
                Ok(vec![
                    chsh().evaluate(&b)?.into(),
                    verdict.critical_visibility.into(),
                    verdict.member.into(),
                ])
            });
            Ok(Report::table(table))
        }
        Command::HashingThreshold { d_list } => {
            let mut table = Table::new(&["d", "p_star"]);
            for (&d, p) in d_list.iter().zip(hashing_thresholds(d_list)) {
                table.rows.push(vec![d.into(), p?.into()]);
            }
            Ok(Report::table(table))
        }
        Command::Star {
            n,
            p,
            ineq,
            restarts,
            crossing,
            steps,
        } => {
            let f = ineq.functional(*n)?;
            let opts = seesaw_options(*restarts, seed);
            if *crossing {
                let p_hat = star_crossing(*n, &f, &opts, *steps)?;
                let pn = star_threshold(*n);
                let mut t = Table::new(&["leaves", "crossing", "star_threshold"]);
                t.rows.push(vec![(*n).into(), p_hat.into(), pn.into()]);
                let doc = json!({"leaves": n, "crossing": p_hat, "star_threshold": pn});
                return Ok(Report::document(t, doc));
            }
            let v = star_violation(*p, *n, &f, &opts)?;
            let mut t = Table::new(&["p", "leaves", "success_prob", "value", "bound", "violated"]);
            t.rows.push(vec![
                v.p.into(),
                v.leaves.into(),
                v.success_prob.into(),
                v.value.into(),
                v.bound.into(),
                v.violated.into(),
            ]);
            Ok(Report::document(t, to_value(&v)?))
        }
        Command::LambdaSwap { range, d } => {
            let spec = SweepSpec {
                variable: SweepVariable::P,
                range: *range,
                fixed: BTreeMap::from([("d".to_string(), *d as f64)]),
            };
            let d = *d;
            let table = run_sweep(
                &spec,
                &["probability", "fidelity", "isotropic_p2_fidelity"],
                |p| {
                    let link = isotropic(IsotropicParams::new(p, d)?)?;
                    let (prob, out) = lambda_swap(&link, &link)?;
                    let reference = isotropic(IsotropicParams::new(p * p, d)?)?;
                    Ok(vec![
                        prob.into(),
                        fidelity_pure(&out, &phi_ket(d))?.into(),
                        fidelity_pure(&reference, &phi_ket(d))?.into(),
                    ])
                },
            );
            Ok(Report::table(table))
        }
        Command::Membership {
            behavior,
            layout,
            measurements,
            model,
        } => {
            let b = match (behavior, layout, measurements) {
                (Some(path), _, _) => parse(path, Behavior::from_json)?,
                (None, Some(lp), Some(mp)) => {
                    let layout = parse(lp, NetworkLayout::from_json)?;
                    let ma = parse(mp, MeasurementAssignment::from_json)?;
                    let (state, _) = compose_network(&layout, &layout.build_states()?)?;
                    behavior_from_quantum(&state, &ma)?
                }
                _ => {
                    return Err(Failure::Usage(
                        "give --behavior, or --layout with --measurements".into(),
                    ))
                }
            };
            let verdict = membership(&b, &vertices_for(*model, *b.scenario())?)?;
            let mut t = Table::new(&["v_star", "member", "violation"]);
            t.rows.push(vec![
                verdict.critical_visibility.into(),
                verdict.member.into(),
                verdict.violation(&b).into(),
            ]);
            Ok(Report::document(t, to_value(&VerdictJson::from(&verdict))?))
        }
        Command::Lift {
            functional,
            post_parties,
            post_settings,
            post_outcomes,
            x0,
            behavior,
        } => {
            let f = match functional {
                Some(path) => parse(path, BellFunctional::from_json)?,
                None => chsh(),
            };
            let ps = PostSelection::new(
                post_parties.clone(),
                post_settings.clone(),
                post_outcomes.clone(),
            )
            .map_err(|e| Failure::Usage(e.to_string()))?;
            let lifted = lift(&f, &ps, x0.as_deref())?;
            let mut doc = to_value(&lifted)?;
            if let Some(path) = behavior {
                let b = parse(path, Behavior::from_json)?;
                let value = lifted.evaluate(&b)?;
                doc = json!({
                    "functional": doc,
                    "value": value,
                    "violated": value > lifted.bound,
                });
            }
            Ok(Report::document(coefficient_table(&lifted), doc))
        }
        Command::ActivateSigma {
            l_max,
            behavior,
            restarts,
        } => {
            let (p_psi, base) = match behavior {
                Some(path) => {
                    let b = parse(path, Behavior::from_json)?;
                    let v = crate::polytope::visibility(&b, &hybrid_vertices_3party())?.0;
                    (b, v)
                }
                None => {
                    let search = lambda_search(&seesaw_options(*restarts, seed))?;
                    let v = search.critical_visibility();
                    (search.behavior, v)
                }
            };
            let copies: Vec<usize> = (1..=*l_max).collect();
            let rows = sigma_activation(&p_psi, &copies)?;
            let mut t = Table::new(&["copies", "p_eq", "v_star", "member"]);
            for r in &rows {
                t.rows.push(vec![
                    r.copies.into(),
                    r.p_eq.into(),
                    r.v_star.into(),
                    r.member.into(),
                ]);
            }
            let minimal = rows.iter().find(|r| !r.member).map(|r| r.copies);
            let doc = json!({
                "lambda_v_star": base,
                "minimal_copies": minimal,
                "rows": t.to_json(),
                "behavior": to_value(&p_psi)?,
            });
            Ok(Report {
                table: t,
                document: Some(doc),
                default_format: Format::Csv,
            })
        }
        Command::ActivateTau {
            n,
            p,
            ineq,
            l_list,
            restarts,
        } => {
            let f = ineq.functional(*n)?;
            let star = star_violation(*p, *n, &f, &seesaw_options(*restarts, seed))?;
            let rows = tau_activation(&star, &f, l_list);
            let mut t = Table::new(&[
                "copies",
                "coverage",
                "star_value",
                "guaranteed",
                "bound",
                "violated",
            ]);
            for r in &rows {
                t.rows.push(vec![
                    r.copies.into(),
                    r.coverage.into(),
                    r.star_value.into(),
                    r.guaranteed.into(),
                    r.bound.into(),
                    r.violated.into(),
                ]);
            }
            Ok(Report::table(t))
        }
        Command::Catalog { n, ineq } => {
            let f = ineq.functional(*n)?;
            Ok(Report::document(coefficient_table(&f), to_value(&f)?))
        }
        Command::PovmReduce { effect, state } => {
            let m0 = read_matrix(effect)?;
            let sim = dichotomic_to_projective(&m0)?;
            let basis: Vec<Value> = sim
                .basis
                .iter()
                .map(|v| json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()))
                .collect();
            let mut doc = json!({"basis": basis, "response": sim.response});
            let mut t = Table::new(&["index", "response", "basis"]);
            for (i, (l, v)) in sim.response.iter().zip(&basis).enumerate() {
                t.rows
                    .push(vec![i.into(), (*l).into(), Cell::Text(v.to_string())]);
            }
            if let Some(path) = state {
                let rho = DensityState::new(read_matrix(path)?)?;
                let direct = rho.operator().trace_product(&m0)?.re;
                let simulated = sim.probability_zero(rho.operator())?;
                doc["direct"] = json!(direct);
                doc["simulated"] = json!(simulated);
            }
            Ok(Report::document(t, doc))
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV}={raw:?} is not a positive integer"))?;
    // a pool built by an earlier call in the same process stays in place
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 2 on usage errors, 1 when the
/// computation fails.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let text = match report.render(cli.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{text}"),
    }
    0
}
