//! Command-line pipeline: CSV ingestion, grid construction, transport,
//! and report emission.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};

use crate::curves::{self, StepCurve};
use crate::error::{Error, Result};
use crate::grid::{build_grid, factorize, FactorizePolicy};
use crate::indices::{self, IndexReport, ReportMeta};
use crate::potentials::{self, PotentialCurve};
use crate::simulate::{Generator, GeneratorKind};
use crate::transport::{solve_assignment, ExtensionMode, SampleMatrix, TransportPlan};

#[derive(Parser)]
#[command(name = "colorenz", version, about = "Center-outward Lorenz curves and concentration indices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Draw a synthetic sample and write it as CSV
    Simulate(SimulateArgs),
    /// Per-observation center-outward ranks (quantile orders and directions)
    Ranks(InputArgs),
    /// Lorenz / Kakwani step curves (absolute, conditional, relative)
    Curves(CurvesArgs),
    /// Index report: G-, K-, potential, and Koshevoy-Mosler indices
    Indices(InputArgs),
    /// Lorenz potential function table
    Potential(InputArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Subgradient,
    Moreau,
}

impl From<Mode> for ExtensionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Subgradient => ExtensionMode::Subgradient,
            Mode::Moreau => ExtensionMode::Moreau,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
pub struct InputArgs {
    /// CSV file with the X sample; header row required, '.' decimal
    #[arg(long)]
    pub input: PathBuf,
    /// optional CSV file with the Y sample (Kakwani / Y-vs-X analyses)
    #[arg(long)]
    pub input_y: Option<PathBuf>,
    /// comma-separated X columns, by header name or zero-based index; default all
    #[arg(long)]
    pub cols: Option<String>,
    /// column selection for the Y file
    #[arg(long)]
    pub cols_y: Option<String>,
    /// divide each selected column by its maximum before the analysis
    #[arg(long)]
    pub rescale: bool,
    /// number of radial contours; default: balanced automatic factorization
    #[arg(long)]
    pub nr: Option<usize>,
    /// seed for the direction grid (and any sampling)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// extension of the empirical distribution beyond the sample
    #[arg(long, value_enum, default_value_t = Mode::Subgradient)]
    pub mode: Mode,
    /// output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
    /// output format for curve tables
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub common: InputArgs,
    /// which curve family to emit
    #[arg(long, value_enum, default_value_t = Which::Lorenz)]
    pub which: Which,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Lorenz,
    Kakwani,
    LorenzYx,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// generator family
    #[arg(long, value_enum)]
    pub kind: SimKind,
    /// comma-separated parameters (see --help of each kind)
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// output CSV file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    /// uniform on [a, b]; params "a,b", default "0,1"
    Uniform,
    /// exponential; params "rate", default "2"
    Exponential,
    /// Pareto; params "scale,shape", default "0.25,2"
    Pareto,
    /// uniform on a ball; params "cx,cy,...,radius", default "0.5,0.5,0.4"
    Ball,
    /// spherical Gaussian; params "mx,my,...,sigma", default "0,0,1"
    Gaussian,
    /// fixed 3-component banana-shaped normal mixture in d=2 (illustrative)
    Banana,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Ranks(args) => cmd_ranks(&args),
        Command::Curves(args) => cmd_curves(&args),
        Command::Indices(args) => cmd_indices(&args),
        Command::Potential(args) => cmd_potential(&args),
    }
}

fn parse_params(spec: &Option<String>, default: &[f64]) -> Result<Vec<f64>> {
    match spec {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad parameter {p:?}: {e}")))
            })
            .collect(),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let kind = match args.kind {
        SimKind::Uniform => {
            let p = parse_params(&args.params, &[0.0, 1.0])?;
            if p.len() != 2 {
                return Err(Error::Config("uniform takes params a,b".into()));
            }
            GeneratorKind::UniformInterval { a: p[0], b: p[1] }
        }
        SimKind::Exponential => {
            let p = parse_params(&args.params, &[2.0])?;
            if p.len() != 1 {
                return Err(Error::Config("exponential takes params rate".into()));
            }
            GeneratorKind::Exponential { rate: p[0] }
        }
        SimKind::Pareto => {
            let p = parse_params(&args.params, &[0.25, 2.0])?;
            if p.len() != 2 {
                return Err(Error::Config("pareto takes params scale,shape".into()));
            }
            GeneratorKind::Pareto {
                scale: p[0],
                shape: p[1],
            }
        }
        SimKind::Ball => {
            let p = parse_params(&args.params, &[0.5, 0.5, 0.4])?;
            if p.len() < 2 {
                return Err(Error::Config("ball takes params center...,radius".into()));
            }
            GeneratorKind::UniformBall {
                center: p[..p.len() - 1].to_vec(),
                radius: p[p.len() - 1],
            }
        }
        SimKind::Gaussian => {
            let p = parse_params(&args.params, &[0.0, 0.0, 1.0])?;
            if p.len() < 2 {
                return Err(Error::Config("gaussian takes params mean...,sigma".into()));
            }
            GeneratorKind::SphericalGaussian {
                mean: p[..p.len() - 1].to_vec(),
                sigma: p[p.len() - 1],
            }
        }
        SimKind::Banana => GeneratorKind::BananaMixture,
    };
    let sample = Generator::new(kind, args.seed).draw(args.n)?;
    let mut w = csv::Writer::from_path(&args.out)?;
    let header: Vec<String> = (0..sample.dim()).map(|j| format!("x{j}")).collect();
    w.write_record(&header)?;
    for i in 0..sample.len() {
        w.write_record(sample.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV, keep the selected columns, return (column names, rows).
fn load_matrix(path: &Path, cols: &Option<String>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = r.headers()?.iter().map(|h| h.to_string()).collect();
    let selected: Vec<usize> = match cols {
        None => (0..headers.len()).collect(),
        Some(spec) => spec
            .split(',')
            .map(|name| {
                let name = name.trim();
                if let Ok(idx) = name.parse::<usize>() {
                    if idx < headers.len() {
                        return Ok(idx);
                    }
                    return Err(Error::Config(format!(
                        "column index {idx} out of range (file has {})",
                        headers.len()
                    )));
                }
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Config(format!("no column named {name:?}")))
            })
            .collect::<Result<_>>()?,
    };
    if selected.is_empty() {
        return Err(Error::Config("empty column selection".into()));
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2; // header is line 1
        let row: Vec<f64> = selected
            .iter()
            .map(|&j| {
                let field = rec.get(j).ok_or_else(|| {
                    Error::Data(format!("{}:{line}: missing column {j}", path.display()))
                })?;
                field.parse::<f64>().map_err(|e| {
                    Error::Data(format!("{}:{line}: {field:?}: {e}", path.display()))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    let names = selected.iter().map(|&j| headers[j].clone()).collect();
    Ok((names, rows))
}

fn rescale_columns(rows: &mut [Vec<f64>]) -> Result<()> {
    if rows.is_empty() {
        return Ok(());
    }
    let d = rows[0].len();
    for j in 0..d {
        let max = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err(Error::Data(format!(
                "column {j} has nonpositive maximum {max}; cannot rescale"
            )));
        }
        for r in rows.iter_mut() {
            r[j] /= max;
        }
    }
    Ok(())
}

fn load_sample(path: &Path, cols: &Option<String>, rescale: bool) -> Result<SampleMatrix> {
    let (_, mut rows) = load_matrix(path, cols)?;
    if rescale {
        rescale_columns(&mut rows)?;
    }
    SampleMatrix::new(rows)
}

fn make_plan(args: &InputArgs, sample: SampleMatrix) -> Result<TransportPlan> {
    let policy = match args.nr {
        Some(n_radii) => FactorizePolicy::Explicit { n_radii },
        None => FactorizePolicy::Auto,
    };
    let shape = factorize(sample.len(), sample.dim(), policy)?;
    let grid = build_grid(&shape, args.seed)?;
    let plan = solve_assignment(sample, grid)?;
    if plan.epsilon <= 0.0 {
        eprintln!("warning: degenerate optimality gap (epsilon = 0); Moreau extension unavailable");
    }
    Ok(plan)
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::from)
}

fn write_curve(curve: &StepCurve, dir: &Path, stem: &str, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let f = fs::File::create(dir.join(format!("{stem}.csv")))?;
            curve.write_csv(f)
        }
        Format::Json => {
            let f = fs::File::create(dir.join(format!("{stem}.json")))?;
            serde_json::to_writer_pretty(f, curve)?;
            Ok(())
        }
    }
}

pub fn cmd_ranks(args: &InputArgs) -> Result<()> {
    let sample = load_sample(&args.input, &args.cols, args.rescale)?;
    let d = sample.dim();
    let plan = make_plan(args, sample)?;
    ensure_out_dir(&args.out)?;
    let mut w = csv::Writer::from_path(args.out.join("ranks.csv"))?;
    let mut header = vec!["id".to_string()];
    header.extend((0..d).map(|j| format!("x{j}")));
    header.push("rank_norm".into());
    header.extend((0..d).map(|j| format!("dir{j}")));
    w.write_record(&header)?;
    for i in 0..plan.len() {
        let rank = plan.center_outward_rank(i)?;
        let norm = plan.rank_norm(i);
        let mut rec = vec![i.to_string()];
        rec.extend(plan.sample.row(i).iter().map(|v| v.to_string()));
        rec.push(norm.to_string());
        for &g in rank {
            let dir = if norm > 0.0 { g / norm } else { 0.0 };
            rec.push(dir.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(serde::Serialize)]
struct CurveMeta {
    shape: crate::grid::GridShape,
    seed: u64,
    n: usize,
    mode: &'static str,
    which: &'static str,
}

pub fn cmd_curves(args: &CurvesArgs) -> Result<()> {
    let common = &args.common;
    let sample = load_sample(&common.input, &common.cols, common.rescale)?;
    let plan = make_plan(common, sample)?;
    let mode: ExtensionMode = common.mode.into();

    let (absolute, which) = match args.which {
        Which::Lorenz => (curves::lorenz_curve(&plan), "lorenz"),
        Which::Kakwani => {
            let path = common.input_y.as_ref().ok_or_else(|| {
                Error::Config("kakwani curves need --input-y".into())
            })?;
            let y = load_sample(path, &common.cols_y, common.rescale)?;
            (curves::kakwani_curve(&plan, &y)?, "kakwani")
        }
        Which::LorenzYx => {
            let path = common.input_y.as_ref().ok_or_else(|| {
                Error::Config("lorenz-yx curves need --input-y".into())
            })?;
            let y = load_sample(path, &common.cols_y, common.rescale)?;
            (curves::lorenz_yx_curve(&plan, &y, mode)?, "lorenz_yx")
        }
    };
    ensure_out_dir(&common.out)?;
    write_curve(&absolute, &common.out, &format!("{which}_absolute"), common.format)?;
    let conditional = curves::conditionalize(&absolute, &plan.grid.shape)?;
    write_curve(&conditional, &common.out, &format!("{which}_conditional"), common.format)?;
    match curves::relativize(&absolute, absolute.values.last().unwrap()) {
        Ok(relative) => {
            write_curve(&relative, &common.out, &format!("{which}_relative"), common.format)?
        }
        Err(e) => eprintln!("warning: skipping relative curve: {e}"),
    }
    let meta = CurveMeta {
        shape: plan.grid.shape,
        seed: common.seed,
        n: plan.len(),
        mode: match common.mode {
            Mode::Subgradient => "subgradient",
            Mode::Moreau => "moreau",
        },
        which,
    };
    let f = fs::File::create(common.out.join("metadata.json"))?;
    serde_json::to_writer_pretty(f, &meta)?;
    Ok(())
}

pub fn cmd_indices(args: &InputArgs) -> Result<()> {
    let sample = load_sample(&args.input, &args.cols, args.rescale)?;
    let plan = make_plan(args, sample)?;

    let lorenz = curves::lorenz_curve(&plan);
    let relative = curves::relativize(&lorenz, lorenz.values.last().unwrap());
    let (gini_g, pietra_g) = match relative {
        Ok(rel) => (Some(indices::g_index(&rel)?), Some(indices::pietra_g_index(&rel)?)),
        Err(e) => {
            eprintln!("warning: relative Lorenz unavailable ({e}); G-indices omitted");
            (None, None)
        }
    };

    let (gini_k, pietra_k) = match &args.input_y {
        None => (None, None),
        Some(path) => {
            let y = load_sample(path, &args.cols_y, args.rescale)?;
            let kak = curves::kakwani_curve(&plan, &y)?;
            match curves::relativize(&kak, kak.values.last().unwrap()) {
                Ok(rel) => (
                    Some(indices::g_index(&rel)?),
                    Some(indices::pietra_g_index(&rel)?),
                ),
                Err(e) => {
                    eprintln!("warning: relative Kakwani unavailable ({e}); K-indices omitted");
                    (None, None)
                }
            }
        }
    };

    let potential = potentials::lorenz_potential_curve(&plan)?;
    let (potential_gini, potential_pietra) = match indices::potential_gini(&potential) {
        Ok(pg) => (Some(pg), Some(indices::potential_pietra(&potential)?)),
        Err(e) => {
            eprintln!("warning: potential indices unavailable ({e})");
            (None, None)
        }
    };

    let km = indices::km_gini(&plan.sample);
    let (km_gini, km_delta, km_kappa, km_sigma2) = match km {
        Ok(km) => (Some(km.index), km.delta, km.kappa, Some(km.sigma2)),
        Err(e) => {
            eprintln!("warning: Koshevoy-Mosler index unavailable ({e})");
            let km = indices::km_delta_only(&plan.sample);
            (None, km.0, km.1, None)
        }
    };

    let report = IndexReport {
        gini_g,
        pietra_g,
        gini_k,
        pietra_k,
        potential_gini,
        potential_pietra,
        km_gini,
        km_delta,
        km_kappa,
        km_sigma2,
        metadata: ReportMeta {
            shape: plan.grid.shape,
            seed: args.seed,
            n: plan.len(),
            d: plan.sample.dim(),
        },
    };
    ensure_out_dir(&args.out)?;
    let f = fs::File::create(args.out.join("report.json"))?;
    serde_json::to_writer_pretty(f, &report)?;
    let f = fs::File::create(args.out.join("table.csv"))?;
    report.write_table(f)?;
    Ok(())
}

pub fn cmd_potential(args: &InputArgs) -> Result<()> {
    let sample = load_sample(&args.input, &args.cols, args.rescale)?;
    let plan = make_plan(args, sample)?;
    let pc = potentials::lorenz_potential_curve(&plan)?;
    ensure_out_dir(&args.out)?;
    write_potential_table(&pc, &args.out.join("potential.csv"))?;
    if let Some(path) = &args.input_y {
        let y = load_sample(path, &args.cols_y, args.rescale)?;
        let policy = match args.nr {
            Some(n_radii) => FactorizePolicy::Explicit { n_radii },
            None => FactorizePolicy::Auto,
        };
        let shape_y = factorize(y.len(), y.dim(), policy)?;
        let grid_y = build_grid(&shape_y, args.seed)?;
        let plan_y = solve_assignment(y, grid_y)?;
        let yx = potentials::lorenz_potential_yx_curve(&plan, &plan_y, args.mode.into())?;
        write_potential_table(&yx, &args.out.join("potential_yx.csv"))?;
    }
    Ok(())
}

fn write_potential_table(pc: &PotentialCurve, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["u", "lambda", "lambda_rel"])?;
    let rel = pc.relativize();
    for (k, (u, v)) in pc.radii.iter().zip(&pc.values).enumerate() {
        let r = match &rel {
            Ok(rel) => rel.values[k].to_string(),
            Err(_) => String::new(),
        };
        w.write_record([u.to_string(), v.to_string(), r])?;
    }
    w.flush()?;
    Ok(())
}
