use clap::{Args, Parser, Subcommand, ValueEnum};
use dihedral::besov::{besov_neg_proxy, GridFunction};
use dihedral::capacity::bessel_capacity;
use dihedral::classify::{classify_polyhedron, good_measure_check, removable_check, CapacityEvidence};
use dihedral::exponents::critical_exponents;
use dihedral::geometry::{validate_polyhedron, validate_wedge, CompactSetDescription, DiscreteMeasure, PolyhedronSpec, WedgeSpec};
use dihedral::kernels::j_ar;
use dihedral::quadrature::QuadratureSpec;
use dihedral::spectral::OpeningEigen;
use dihedral::verify::{self, ExperimentReport, HarmonicTarget};
use dihedral::{json, Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "dihedral", version, about = "Critical exponents, kernels, Besov proxies and capacities for wedges and polyhedra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file; stdout when absent. Written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
struct WedgeArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Dihedral angle in radians.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Extra angular interval `a,b` (radians); repeat for each coordinate.
    #[arg(long = "interval", value_parser = parse_interval)]
    intervals: Vec<(f64, f64)>,
    /// First Dirichlet eigenvalue of the opening; overrides the angles.
    #[arg(long)]
    gamma: Option<f64>,
    /// Wedge JSON file; flags override its fields.
    #[arg(long)]
    wedge: Option<PathBuf>,
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical exponents of a wedge or cone opening.
    Exponents(WedgeArgs),
    /// Regime table of a polyhedron, with optional removability and good-measure checks.
    Classify {
        #[arg(long)]
        poly: Option<PathBuf>,
        #[arg(long)]
        q: f64,
        /// Compact set JSON for the removability check.
        #[arg(long)]
        set: Option<PathBuf>,
        /// JSON object mapping stratum ids to measures for the good-measure check.
        #[arg(long)]
        measures: Option<PathBuf>,
        /// Capacity evidence JSON for pieces or atoms that need numerics.
        #[arg(long)]
        evidence: Option<PathBuf>,
    },
    /// Admissibility functional `J^{A,R}` of an edge measure.
    Kernel {
        #[command(flatten)]
        wedge: WedgeArgs,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        q: f64,
        #[arg(long = "R")]
        r: Option<f64>,
        /// Inner τ-cutoff; 0 requests the untruncated integral.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Besov `B^{-s,q}` Poisson-extension proxy of a measure.
    Besov {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Bessel capacity `C_{α,p}` of a finite point set.
    Capacity {
        /// JSON array of points, e.g. `[[0.0], [0.5]]`.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Inline point `x,y,...`; repeatable.
        #[arg(long = "point", value_parser = parse_point)]
        point: Vec<Vec<f64>>,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 12)]
        resolution: u32,
    },
    /// Run one experiment: dichotomy, equivalence, remainder, harmonicity, heat_lifting.
    Verify(VerifyArgs),
}

fn parse_point(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"))).collect()
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[value(rename_all = "snake_case")]
enum Experiment {
    Dichotomy,
    Equivalence,
    Remainder,
    Harmonicity,
    HeatLifting,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    #[arg(value_enum)]
    name: Experiment,
    #[command(flatten)]
    wedge: WedgeArgs,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    /// Remainder experiment: kernel order ν.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
    /// Harmonicity target: `v_a` or `martin`.
    #[arg(long, default_value = "v_a")]
    target: String,
    /// Measure family size (equivalence) or bump family size (heat lifting).
    #[arg(long)]
    family: Option<usize>,
    /// Heat lifting: grid spacing of η.
    #[arg(long, default_value_t = 0.05)]
    h: f64,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

/// Wedge from flags (and an optional file), with `γ` either given or computed.
fn resolve_wedge(args: &WedgeArgs, tol: f64) -> Result<(usize, usize, f64, Option<WedgeSpec>)> {
    let mut w: Option<WedgeSpec> = args.wedge.as_deref().map(read_json).transpose()?;
    let n = args.n.or(w.as_ref().map(|w| w.n)).ok_or_else(|| Error::Validation("--N is required".into()))?;
    let k = args.k.or(w.as_ref().map(|w| w.k)).unwrap_or(2);
    if let Some(a) = args.alpha1 {
        let mut spec = w.unwrap_or_else(|| WedgeSpec::dihedral(n, a));
        spec.n = n;
        spec.k = k;
        spec.alpha1 = a;
        if !args.intervals.is_empty() {
            spec.intervals = args.intervals.clone();
        }
        w = Some(spec);
    }
    if k == 1 {
        return Ok((n, k, 0.0, None));
    }
    if let Some(g) = args.gamma {
        return Ok((n, k, g, w));
    }
    let spec = w.ok_or_else(|| Error::Validation("need --alpha1, --wedge or --gamma for k ≥ 2".into()))?;
    let spec = validate_wedge(&spec)?;
    let gamma = OpeningEigen::compute(&spec, tol.min(1e-10))?.gamma;
    Ok((n, k, gamma, Some(spec)))
}

struct Output {
    config: Value,
    result: Value,
    reports: Vec<ExperimentReport>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    // Non-finite floats become null.
    serde_json::from_str(&json::to_string(v)).unwrap_or(Value::Null)
}

fn run(cli: &Cli) -> Result<Output> {
    let tol = cli.common.tol;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Validation(format!("--tol = {tol} must lie in (0, 1)")));
    }
    let spec = QuadratureSpec::with_tol(tol);
    let common = to_value(&cli.common);
    let plain = |config: Value, result: Value| Output { config, result, reports: Vec::new() };
    match &cli.command {
        Command::Exponents(w) => {
            let (n, k, gamma, wedge) = resolve_wedge(w, tol)?;
            let report = critical_exponents(n, k, gamma)?;
            let config = json!({"command": "exponents", "N": n, "k": k, "gamma": gamma, "wedge": to_value(&wedge), "common": common});
            Ok(plain(config, to_value(&report)))
        }
        Command::Classify { poly, q, set, measures, evidence } => {
            let poly: PolyhedronSpec = match poly {
                Some(p) => read_json(p)?,
                None => PolyhedronSpec::cube(),
            };
            validate_polyhedron(&poly)?;
            let verdicts = classify_polyhedron(&poly, *q)?;
            let evidence: CapacityEvidence = evidence.as_deref().map(read_json).transpose()?.unwrap_or_default();
            let mut result = json!({"verdicts": to_value(&verdicts)});
            let mut config = json!({"command": "classify", "poly": to_value(&poly), "q": q, "common": common});
            if let Some(path) = set {
                let set: CompactSetDescription = read_json(path)?;
                result["removable"] = to_value(&removable_check(&poly, &set, *q, &evidence)?);
                config["set"] = to_value(&set);
            }
            if let Some(path) = measures {
                let measures: BTreeMap<String, DiscreteMeasure> = read_json(path)?;
                let ev = evidence.clone().with_point_evidence(&poly, &measures, *q)?;
                result["good_measure"] = to_value(&good_measure_check(&poly, &measures, *q, &ev)?);
                config["measures"] = to_value(&measures);
            }
            config["evidence"] = to_value(&evidence);
            Ok(plain(config, result))
        }
        Command::Kernel { wedge, measure, q, r, eps } => {
            let (n, k, gamma, _) = resolve_wedge(wedge, tol)?;
            let report = critical_exponents(n, k, gamma)?;
            let mu: DiscreteMeasure = read_json(measure)?;
            let r = r.unwrap_or_else(|| mu.default_radius());
            let est = j_ar(&mu, &report, r, *q, &spec.with_cutoff(*eps))?;
            let config = json!({"command": "kernel", "N": n, "k": k, "gamma": gamma, "q": q, "R": r, "eps": eps,
                "measure": to_value(&mu), "common": common});
            Ok(plain(config, json!({"J": est.value, "error": est.error, "exponents": to_value(&report)})))
        }
        Command::Besov { measure, s, q, eps } => {
            let mu: DiscreteMeasure = read_json(measure)?;
            let res = besov_neg_proxy(&mu, *s, *q, *eps, &spec)?;
            let config = json!({"command": "besov", "s": s, "q": q, "eps": eps, "measure": to_value(&mu), "common": common});
            Ok(plain(config, to_value(&res)))
        }
        Command::Capacity { points, point, alpha, p, resolution } => {
            let mut k: Vec<Vec<f64>> = points.as_deref().map(read_json).transpose()?.unwrap_or_default();
            k.extend(point.iter().cloned());
            let res = bessel_capacity(&k, *alpha, *p, *resolution)?;
            let config = json!({"command": "capacity", "points": k, "alpha": alpha, "p": p, "resolution": resolution, "common": common});
            Ok(plain(config, to_value(&res)))
        }
        Command::Verify(v) => run_verify(v, &cli.common, common),
    }
}

fn run_verify(v: &VerifyArgs, common: &Common, common_value: Value) -> Result<Output> {
    let need = |x: Option<f64>, name: &str| x.ok_or_else(|| Error::Validation(format!("--{name} is required")));
    let report = match v.name {
        Experiment::Dichotomy => {
            let (n, k, gamma, _) = resolve_wedge(&v.wedge, common.tol)?;
            let mut cfg = verify::DichotomyConfig::new(n, k, gamma, need(v.q, "q")?);
            if let Some(r) = v.r {
                cfg.r = r;
            }
            verify::dichotomy_experiment(&cfg)?
        }
        Experiment::Equivalence => {
            let (n, k, gamma, _) = resolve_wedge(&v.wedge, common.tol)?;
            let mut cfg = verify::EquivalenceConfig::new(n, k, gamma, need(v.q, "q")?, v.r.unwrap_or(8.0));
            cfg.seed = common.seed;
            if let Some(f) = v.family {
                cfg.family_size = f;
            }
            verify::equivalence_experiment(&cfg)?
        }
        Experiment::Remainder => {
            let m = v.m.ok_or_else(|| Error::Validation("--m is required".into()))?;
            let j = v.j.ok_or_else(|| Error::Validation("--j is required".into()))?;
            let cfg = verify::RemainderConfig::new(need(v.nu, "nu")?, need(v.sigma, "sigma")?, m, j, need(v.q, "q")?);
            verify::remainder_experiment(&cfg)?
        }
        Experiment::Harmonicity => {
            let (_, _, _, wedge) = resolve_wedge(&WedgeArgs { gamma: None, ..v.wedge.clone() }, common.tol)?;
            let wedge = wedge.ok_or_else(|| Error::Validation("harmonicity needs an explicit opening".into()))?;
            let target = match v.target.as_str() {
                "v_a" => HarmonicTarget::VA,
                "martin" => HarmonicTarget::Martin,
                t => return Err(Error::Validation(format!("--target must be v_a or martin, got {t:?}"))),
            };
            verify::harmonicity_experiment(&verify::HarmonicityConfig::new(target, wedge))?
        }
        Experiment::HeatLifting => {
            let (n, k, gamma, _) = resolve_wedge(&v.wedge, common.tol)?;
            let report = critical_exponents(n, k, gamma)?;
            let r = v.r.unwrap_or(1.0);
            let m = report.m();
            let per_axis = (2.0 * r / v.h).round() as usize + 1;
            let eta = GridFunction::sample(vec![per_axis; m], v.h, &vec![-r; m], |x| {
                verify::tapered_plateau(x, 0.1 * r, 0.45 * r)
            });
            let mut cfg = verify::HeatConfig::new(r, k, report.kappa_plus, need(v.q, "q")?);
            cfg.seed = common.seed;
            if let Some(f) = v.family {
                cfg.family_size = f;
            }
            verify::heat_lifting(&eta, &cfg)?.1
        }
    };
    let config = json!({"command": "verify", "args": to_value(v), "common": common_value});
    Ok(Output { config, result: to_value(&report), reports: vec![report] })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Configuration(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(cli: &Cli, out: &Output) -> Result<()> {
    let bytes = match cli.common.format {
        Format::Json => json::to_string_pretty(&json!({
            "tool": "dihedral",
            "version": env!("CARGO_PKG_VERSION"),
            "config": out.config,
            "result": out.result,
        }))
        .into_bytes(),
        Format::Csv => {
            if out.reports.is_empty() {
                return Err(Error::Configuration("--format csv is only available for verify".into()));
            }
            let mut buf = Vec::new();
            verify::write_csv(&out.reports, &mut buf)?;
            buf
        }
    };
    match &cli.common.out {
        Some(p) => write_atomic(p, &bytes),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Error::Configuration(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidValue | ErrorKind::ValueValidation => 2,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.common.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build_global();
    }
    let start = Instant::now();
    let result = run(&cli).and_then(|out| emit(&cli, &out));
    eprintln!("runtime: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
