use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quadrapt::acceptance::{self, CriterionResult, DEFAULT_SEED};
use quadrapt::blowup::{integrate_portrait, portrait_csv, portrait_svg};
use quadrapt::global::{poincare_hopf_check, summary_table, GlobalReport, GlobalStatus, SearchConfig};
use quadrapt::ingest::SurfaceDoc;
use quadrapt::localmodel::{LocalModel, Region};
use quadrapt::report::{classify, versioned, Classification};

const EXIT_NUMERICAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "quadrapt", version, about = "Quadratic points of surfaces: local models, portraits and index sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RegionArg {
    Elliptic,
    Hyperbolic,
}

impl From<RegionArg> for Region {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Elliptic => Region::Elliptic,
            RegionArg::Hyperbolic => Region::Hyperbolic,
        }
    }
}

#[derive(clap::Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum)]
    region: RegionArg,
    /// Model coefficients `a,b,c,d`.
    #[arg(long, value_parser = parse_four, allow_hyphen_values = true)]
    abcd: [f64; 4],
}

fn parse_four(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    let v: [f64; 4] = v.try_into().map_err(|v: Vec<f64>| format!("expected 4 comma-separated numbers, got {}", v.len()))?;
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err("values must be finite".into())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a first-order local model.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase portrait of a local model. With `--out` and SVG output the
    /// CSV polylines are written next to the SVG.
    Portrait {
        #[command(flatten)]
        model: ModelArgs,
        /// `xmin,ymin,xmax,ymax`
        #[arg(long, value_parser = parse_four, allow_hyphen_values = true, default_value = "-1,-1,1,1")]
        bbox: [f64; 4],
        /// Seeds per unit of box edge.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        /// Width of the SVG in pixels.
        #[arg(long, default_value_t = 480.0)]
        size: f64,
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Global search for quadratic points and the index-sum check.
    Global {
        /// Catalog surface name.
        #[arg(long, conflicts_with = "surface")]
        catalog: Option<String>,
        /// JSON surface document.
        #[arg(long)]
        surface: Option<PathBuf>,
        /// Modulus of the Gauss cusp or bump of the rotation surface.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Further catalog parameters as `key=value`.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 48)]
        grid: usize,
        /// Newton residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Accepted for a uniform interface; the search draws no random numbers.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Run only these criteria (1 to 13).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, msg: msg.into() }
    }
}

impl From<quadrapt::Error> for Failure {
    fn from(e: quadrapt::Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        Self { code, msg: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.msg);
        return ExitCode::from(f.code);
    }
    let r = match cli.command {
        Command::Classify { model, format, out } => cmd_classify(&model, format, out.as_deref()),
        Command::Portrait { model, bbox, grid, size, format, out } => {
            cmd_portrait(&model, bbox, grid, size, format, out.as_deref())
        }
        Command::Global { catalog, surface, lambda, params, grid, tol, seed: _, format, out } => {
            cmd_global(catalog, surface, lambda, params, grid, tol, format, out.as_deref())
        }
        Command::Verify { seed, only, format, out } => cmd_verify(seed, &only, format, out.as_deref()),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("QUADRAPT_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::usage(format!("QUADRAPT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: EXIT_NUMERICAL, msg: e.to_string() })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(kind: &'static str, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&versioned(kind, body)).expect("serializable");
    s.push('\n');
    s
}

fn cmd_classify(model: &ModelArgs, format: Format, out: Option<&Path>) -> CmdResult {
    let c = classify(model.region.into(), model.abcd)?;
    let text = match format {
        Format::Json => to_json("classification", &c),
        Format::Csv => classification_csv(&c),
        Format::Svg => return Err(Failure::usage("classify writes json or csv")),
    };
    emit(&text, out)?;
    Ok(0)
}

fn classification_csv(c: &Classification) -> String {
    let region = match c.region {
        Region::Elliptic => "elliptic",
        Region::Hyperbolic => "hyperbolic",
    };
    let [a, b, cc, d] = c.abcd;
    format!(
        "region,a,b,c,d,delta,discriminant,roots,portrait,saddles,nodes,index\n{region},{a},{b},{cc},{d},{},{},{},{},{},{},{}\n",
        c.delta,
        c.discriminant,
        c.roots,
        c.portrait,
        c.saddles,
        c.nodes,
        ratio_str(&c.index)
    )
}

fn ratio_str(r: &num_rational::Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn cmd_portrait(model: &ModelArgs, bbox: [f64; 4], grid: usize, size: f64, format: Format, out: Option<&Path>) -> CmdResult {
    if !(bbox[2] > bbox[0] && bbox[3] > bbox[1]) {
        return Err(Failure::usage(format!("bounding box {bbox:?} has zero area")));
    }
    if !(size > 0.0 && size.is_finite()) {
        return Err(Failure::usage("--size must be positive"));
    }
    let m = LocalModel::new(model.region.into(), model.abcd);
    if !m.is_simple() {
        return Err(Failure::usage("model is not simple (ad - bc = 0)"));
    }
    let p = integrate_portrait(&m, bbox, grid)?;
    match format {
        Format::Svg => {
            emit(&portrait_svg(&p, size), out)?;
            if let Some(path) = out {
                emit(&portrait_csv(&p), Some(&path.with_extension("csv")))?;
            }
        }
        Format::Csv => emit(&portrait_csv(&p), out)?,
        Format::Json => emit(&to_json("portrait", &p), out)?,
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_global(
    catalog: Option<String>,
    surface: Option<PathBuf>,
    lambda: Option<f64>,
    params: Vec<(String, f64)>,
    grid: usize,
    tol: Option<f64>,
    format: Format,
    out: Option<&Path>,
) -> CmdResult {
    let entry = match (catalog, surface) {
        (Some(name), None) => {
            let mut p: BTreeMap<String, f64> = params.into_iter().collect();
            if let Some(l) = lambda {
                p.insert("lambda".into(), l);
            }
            quadrapt::surfaces::catalog(&name, &p)?
        }
        (None, Some(path)) => {
            if lambda.is_some() || !params.is_empty() {
                return Err(Failure::usage("--lambda and --param apply to --catalog only"));
            }
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            SurfaceDoc::from_json(&text)?.build()?
        }
        _ => return Err(Failure::usage("give exactly one of --catalog and --surface")),
    };
    let mut cfg = SearchConfig::with_grid(grid);
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::usage("--tol must be positive"));
        }
        cfg.residual_tol = t;
    }
    let r = poincare_hopf_check(&entry, &cfg)?;
    let text = match format {
        Format::Json => to_json("globalReport", &r),
        Format::Csv => global_csv(&r),
        Format::Svg => return Err(Failure::usage("global writes json or csv")),
    };
    emit(&text, out)?;
    // With the document in a file the summary table goes to standard output.
    if out.is_some() {
        print!("{}", summary_table(&r));
    } else {
        eprint!("{}", summary_table(&r));
    }
    Ok(match r.status {
        GlobalStatus::Pass | GlobalStatus::TotallyQuadratic | GlobalStatus::Unchecked => 0,
        GlobalStatus::Inconclusive => EXIT_NUMERICAL,
        GlobalStatus::Fail => EXIT_ACCEPTANCE,
    })
}

fn global_csv(r: &GlobalReport) -> String {
    let mut s = String::from("x,y,z,region,index,residual,simple\n");
    for p in &r.points {
        let region = match p.region {
            Region::Elliptic => "elliptic",
            Region::Hyperbolic => "hyperbolic",
        };
        let _ = writeln!(
            s,
            "{},{},{},{region},{},{:e},{}",
            p.location[0],
            p.location[1],
            p.location[2],
            ratio_str(&p.index),
            p.residual,
            p.simple
        );
    }
    s
}

fn cmd_verify(seed: u64, only: &[usize], format: Option<Format>, out: Option<&Path>) -> CmdResult {
    if let Some(bad) = only.iter().find(|i| !(1..=13).contains(*i)) {
        return Err(Failure::usage(format!("no criterion {bad}; criteria are numbered 1 to 13")));
    }
    let ids: Vec<u8> = if only.is_empty() { (1..=13).collect() } else { only.iter().map(|&i| i as u8).collect() };
    let mut results: Vec<CriterionResult> = Vec::new();
    for id in ids {
        let r = acceptance::run(id, seed);
        println!("{}", r.line());
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    match format {
        None => {}
        Some(Format::Json) => {
            let results = results
                .iter()
                .map(|r| VerifyEntry { id: r.id, title: &r.title, passed: r.passed, detail: &r.detail })
                .collect();
            emit(&to_json("acceptance", &VerifyDoc { seed, results }), out)?
        }
        Some(_) => return Err(Failure::usage("verify writes json only")),
    }
    Ok(if failed == 0 { 0 } else { EXIT_ACCEPTANCE })
}

/// Timings are left out so that the document is reproducible.
#[derive(serde::Serialize)]
struct VerifyDoc<'a> {
    seed: u64,
    results: Vec<VerifyEntry<'a>>,
}

#[derive(serde::Serialize)]
struct VerifyEntry<'a> {
    id: u8,
    title: &'a str,
    passed: bool,
    detail: &'a str,
}
