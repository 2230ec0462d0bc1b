//! Command-line front end. Exit codes: 0 success, 1 check or convergence
//! failure, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::accum::{box_counting_dimension, cluster, dyadic_scales, PointCloud};
use crate::domains::ModelDomain;
use crate::levi::{classify_boundary, LeviError};
use crate::moebius::{cayley_to_siegel, example12_phi, siegel_to_ball, AnyMap, BallMap, CPoint2, Group, SiegelPoint};
use crate::orbits::{
    accumulation_samples, iterate_family, orbit_limit, orbit_limit_backward, OrbitEntry, OrbitError, OrbitRecord,
};
use crate::scenario::{RunConfig, Scenario};
use crate::verify::{verify_paper, Expectations};

#[derive(Parser, Debug)]
#[command(name = "orbitset", version, about = "Automorphism orbits and boundary accumulation sets of domains in C^2")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate a map or scenario generator from a point and report its limits.
    Orbit(OrbitArgs),
    /// Harvest near-boundary orbit samples, cluster them and fit a dimension.
    Saccum(SaccumArgs),
    /// Box-counting dimension of a point cloud.
    Dimension(DimensionArgs),
    /// Levi form classification of boundary points.
    Levi(LeviArgs),
    /// Cayley transform between the ball and the Siegel half-space.
    Cayley(CayleyArgs),
    /// Re-check every reference value with the default configurations.
    VerifyPaper(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MapName {
    Identity,
    Ex11,
    Ex12,
    Ex21,
    Ex22,
    Ex23,
    Ex24,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[arg(long)]
    scenario: Option<Scenario>,
    #[arg(long)]
    map: Option<MapName>,
    /// Domain name; defaults to the scenario's dented domain or the map's model.
    #[arg(long)]
    domain: Option<String>,
    /// Starting point `re1,im1,re2,im2`, or `x1,x2` for a real point.
    #[arg(long, allow_hyphen_values = true)]
    from: String,
    /// Index range `a:b`.
    #[arg(long, default_value = "0:40", allow_hyphen_values = true)]
    j: String,
    #[arg(long, default_value_t = crate::orbits::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = crate::orbits::DEFAULT_TAIL)]
    tail: usize,
    /// Exit with status 1 unless every end of the range converges.
    #[arg(long)]
    expect_limit: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SaccumArgs {
    #[arg(long)]
    scenario: Scenario,
    /// Family index magnitudes `lo:hi`.
    #[arg(long)]
    j: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Box sides: `a:b` for 2^-a..2^-b, `a:b:k` for k steps per halving, or a comma list.
    #[arg(long)]
    scales: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    base_grid: Option<usize>,
    #[arg(long)]
    a_args: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the point cloud here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DimensionArgs {
    /// Point cloud file (`.json` for JSON, otherwise CSV).
    #[arg(long, conflicts_with = "scenario")]
    input: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<Scenario>,
    #[arg(long)]
    scales: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LeviArgs {
    #[arg(long, default_value = "ball")]
    domain: String,
    /// A boundary point to classify; without it, sampled boundary points are used.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CayleyArgs {
    #[arg(long, allow_hyphen_values = true)]
    from: String,
    /// Read `--from` as a Siegel point and map it back to the ball.
    #[arg(long)]
    inverse: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    json: bool,
    /// Show per-check runtimes in the table.
    #[arg(long)]
    timings: bool,
    #[arg(long, hide = true, default_value_t = 2)]
    expect_ex11_clusters: usize,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
    /// Reader went away; stop quietly.
    BrokenPipe,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
            CliError::BrokenPipe => 0,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn failure(msg: impl ToString) -> CliError {
    CliError::Failure(msg.to_string())
}

type CliResult = Result<i32, CliError>;

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Orbit(a) => cmd_orbit(a),
        Command::Saccum(a) => cmd_saccum(a),
        Command::Dimension(a) => cmd_dimension(a),
        Command::Levi(a) => cmd_levi(a),
        Command::Cayley(a) => cmd_cayley(a),
        Command::VerifyPaper(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Failure(m) => eprintln!("failed: {m}"),
                CliError::BrokenPipe => {}
            }
            e.code()
        }
    }
}

pub fn parse_point(s: &str) -> Result<CPoint2, String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad coordinate `{t}` in `{s}`")))
        .collect::<Result<_, _>>()?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(format!("non-finite coordinate in `{s}`"));
    }
    match vals.as_slice() {
        [x1, x2] => Ok(CPoint2::real(*x1, *x2)),
        [a, b, c, d] => Ok(CPoint2::from_reals([*a, *b, *c, *d])),
        _ => Err(format!("expected 2 or 4 comma-separated numbers, got `{s}`")),
    }
}

pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got `{s}`"))?;
    let a = a.trim().parse::<i64>().map_err(|_| format!("bad range start in `{s}`"))?;
    let b = b.trim().parse::<i64>().map_err(|_| format!("bad range end in `{s}`"))?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok((a, b))
}

pub fn parse_scales(s: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("bad scales `{s}`");
    let scales = if s.contains(':') {
        let parts: Vec<u32> = s.split(':').map(|t| t.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [a, b] if a < b => dyadic_scales(*a, *b, 1),
            [a, b, k] if a < b && *k > 0 => dyadic_scales(*a, *b, *k),
            _ => return Err(bad()),
        }
    } else {
        s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if scales.len() < 2 || scales.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(format!("need at least two positive scales, got `{s}`"));
    }
    Ok(scales)
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_fail(e: io::Error) -> CliError {
    if e.kind() == io::ErrorKind::BrokenPipe {
        CliError::BrokenPipe
    } else {
        failure(e)
    }
}

fn csv_fail(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => io_fail(e),
        other => failure(format!("{other:?}")),
    }
}

fn fmt_point(p: CPoint2) -> String {
    let r = p.to_reals();
    format!("({}, {}, {}, {})", r[0], r[1], r[2], r[3])
}

fn map_for(name: MapName) -> AnyMap {
    match name {
        MapName::Identity => AnyMap::Ball(BallMap::identity()),
        MapName::Ex11 => Scenario::Ex11.orbit_map(),
        MapName::Ex12 => Scenario::Ex12.orbit_map(),
        MapName::Ex21 => Scenario::Ex21.orbit_map(),
        MapName::Ex22 => Scenario::Ex22.orbit_map(),
        MapName::Ex23 => Scenario::Ex23.orbit_map(),
        MapName::Ex24 => Scenario::Ex24.orbit_map(),
    }
}

#[derive(Serialize)]
struct OrbitOutput<'a> {
    #[serde(flatten)]
    record: &'a OrbitRecord,
    backward_limit: Option<CPoint2>,
}

fn cmd_orbit(a: OrbitArgs) -> CliResult {
    let (j_min, j_max) = parse_range(&a.j).map_err(usage)?;
    let x = parse_point(&a.from).map_err(usage)?;
    if a.tail == 0 || !(a.tol > 0.0) {
        return Err(usage("--tail and --tol must be positive"));
    }
    let map_name = match (a.map, a.scenario) {
        (Some(m), _) => m,
        (None, Some(s)) => match s {
            Scenario::Ex11 => MapName::Ex11,
            Scenario::Ex12 => MapName::Ex12,
            Scenario::Ex21 => MapName::Ex21,
            Scenario::Ex22 => MapName::Ex22,
            Scenario::Ex23 => MapName::Ex23,
            Scenario::Ex24 => MapName::Ex24,
        },
        (None, None) => return Err(usage("give --scenario or --map")),
    };
    let map = map_for(map_name);
    let domain = match (&a.domain, a.scenario) {
        (Some(name), _) => ModelDomain::by_name(name).map_err(|e| usage(e.to_string()))?,
        (None, Some(s)) => RunConfig::new(s).domain().map_err(failure)?,
        (None, None) => match map {
            AnyMap::Ball(_) => ModelDomain::ball(),
            AnyMap::Bidisc(_) => ModelDomain::bidisc(),
        },
    };
    let record = if map_name == MapName::Ex12 {
        iterate_family(|j| AnyMap::Ball(example12_phi(j)), x, j_min, j_max, &domain)
    } else {
        iterate_family(|j| map.power(j), x, j_min, j_max, &domain)
    };
    let mut record = match record {
        Ok(r) => r,
        Err(e @ (OrbitError::OutsideDomain(_) | OrbitError::Inconclusive(_) | OrbitError::EmptyRange(..))) => {
            return Err(usage(e.to_string()))
        }
        Err(e) => return Err(failure(e)),
    };
    record.limit = orbit_limit(&record, a.tail, a.tol);
    record.converged = record.limit.is_some();
    let backward = if j_min < 0 { orbit_limit_backward(&record, a.tail, a.tol) } else { None };

    let mut out = open_out(&a.out)?;
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["j", "re1", "im1", "re2", "im2", "bdist"]).map_err(csv_fail)?;
            for e in &record.entries {
                let r = e.point.to_reals();
                w.write_record([
                    e.j.to_string(),
                    r[0].to_string(),
                    r[1].to_string(),
                    r[2].to_string(),
                    r[3].to_string(),
                    e.bdist.to_string(),
                ])
                .map_err(csv_fail)?;
            }
            w.flush().map_err(io_fail)?;
        }
        Format::Json => {
            let doc = OrbitOutput { record: &record, backward_limit: backward };
            writeln!(out, "{}", serde_json::to_string(&doc).map_err(failure)?).map_err(io_fail)?;
        }
    }
    out.flush().map_err(io_fail)?;

    let n = record.entries.len();
    let k = a.tail.min(n);
    let mut ok = verdict("forward", record.limit, &record.entries[n - k..], &a);
    if j_min < 0 {
        ok &= verdict("backward", backward, &record.entries[..k], &a);
    }
    Ok(if a.expect_limit && !ok { 1 } else { 0 })
}

/// One stderr line per orbit end. Without convergence the tail mean,
/// diameter and outermost boundary distance are still shown.
fn verdict(label: &str, limit: Option<CPoint2>, tail: &[OrbitEntry], a: &OrbitArgs) -> bool {
    if let Some(p) = limit {
        eprintln!("{label} limit: {} (tail {}, tol {:e})", fmt_point(p), a.tail, a.tol);
        return true;
    }
    if tail.is_empty() {
        eprintln!("{label} limit: none");
        return false;
    }
    let mean = tail.iter().fold(CPoint2::ORIGIN, |acc, e| acc + e.point) * (1.0 / tail.len() as f64);
    let diameter = tail
        .iter()
        .flat_map(|x| tail.iter().map(move |y| x.point.dist(y.point)))
        .fold(0.0, f64::max);
    let outer = if label == "backward" { &tail[0] } else { &tail[tail.len() - 1] };
    eprintln!(
        "{label} limit: none at tol {:e}; tail mean {} diameter {diameter:e}, bdist at j = {}: {:e}",
        a.tol,
        fmt_point(mean),
        outer.j,
        outer.bdist
    );
    false
}

fn config_from(a: &SaccumArgs) -> Result<RunConfig, CliError> {
    let mut c = RunConfig::new(a.scenario);
    if let Some(j) = &a.j {
        let (lo, hi) = parse_range(j).map_err(usage)?;
        if lo < 0 {
            return Err(usage("--j for saccum takes index magnitudes lo:hi with lo >= 0"));
        }
        c.j_lo = lo;
        c.j_hi = hi;
    }
    if let Some(t) = a.threshold {
        if !(t > 0.0) {
            return Err(usage("--threshold must be positive"));
        }
        c.threshold = t;
    }
    if let Some(s) = &a.scales {
        c.scales = parse_scales(s).map_err(usage)?;
    }
    if let Some(r) = a.radius {
        if !(r > 0.0) {
            return Err(usage("--radius must be positive"));
        }
        c.cluster_radius = r;
    }
    c.seed = a.seed.unwrap_or(c.seed);
    c.samples = a.samples.unwrap_or(c.samples);
    c.base_grid = a.base_grid.unwrap_or(c.base_grid);
    c.a_args = a.a_args.unwrap_or(c.a_args);
    Ok(c)
}

fn harvest(c: &RunConfig) -> Result<PointCloud, CliError> {
    let domain = c.domain().map_err(failure)?;
    let family = c.family().map_err(|e| usage(e.to_string()))?;
    accumulation_samples(&family, &c.base_points(), &domain, c.threshold).map_err(failure)
}

fn write_cloud(cloud: &PointCloud, path: &Path, format: Format) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Csv => cloud.write_csv(&mut w).map_err(failure)?,
        Format::Json => writeln!(w, "{}", cloud.to_json()).map_err(io_fail)?,
    }
    w.flush().map_err(io_fail)
}

fn cmd_saccum(a: SaccumArgs) -> CliResult {
    let c = config_from(&a)?;
    let cloud = harvest(&c)?;
    let clusters = cluster(&cloud, c.cluster_radius).map_err(failure)?;
    let dim = box_counting_dimension(&cloud, &c.scales).map_err(failure)?;
    if let Some(path) = &a.out {
        write_cloud(&cloud, path, a.format)?;
    }
    let mut out = io::stdout().lock();
    match a.format {
        Format::Csv => {
            writeln!(out, "cluster,re1,im1,re2,im2,count,radius").map_err(io_fail)?;
            for (k, cl) in clusters.clusters.iter().enumerate() {
                let [a0, a1, a2, a3] = cl.center;
                writeln!(out, "{k},{a0},{a1},{a2},{a3},{},{}", cl.count, cl.radius).map_err(io_fail)?;
            }
            writeln!(out).map_err(io_fail)?;
            writeln!(out, "{}", serde_json::to_string(&dim).map_err(failure)?).map_err(io_fail)?;
        }
        Format::Json => {
            let doc = json!({
                "scenario": c.scenario,
                "points": cloud.len(),
                "clusters": clusters,
                "dimension": dim,
            });
            writeln!(out, "{doc}").map_err(io_fail)?;
        }
    }
    Ok(0)
}

fn cmd_dimension(a: DimensionArgs) -> CliResult {
    let (cloud, default_scales) = match (&a.input, a.scenario) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let tag = path.display().to_string();
            let cloud = if path.extension().is_some_and(|e| e == "json") {
                let text = io::read_to_string(file).map_err(io_fail)?;
                PointCloud::from_json(&text, &tag)
            } else {
                PointCloud::read_csv(file, &tag)
            }
            .map_err(|e| usage(e.to_string()))?;
            (cloud, dyadic_scales(3, 7, 1))
        }
        (None, Some(s)) => {
            let mut c = RunConfig::new(s);
            c.seed = a.seed.unwrap_or(c.seed);
            (harvest(&c)?, c.scales)
        }
        (None, None) => return Err(usage("give --input or --scenario")),
    };
    let scales = match &a.scales {
        Some(s) => parse_scales(s).map_err(usage)?,
        None => default_scales,
    };
    let dim = box_counting_dimension(&cloud, &scales).map_err(failure)?;
    let mut out = open_out(&a.out)?;
    writeln!(out, "{}", serde_json::to_string(&dim).map_err(failure)?).map_err(io_fail)?;
    out.flush().map_err(io_fail)?;
    Ok(0)
}

fn cmd_levi(a: LeviArgs) -> CliResult {
    let domain = ModelDomain::by_name(&a.domain).map_err(|e| usage(e.to_string()))?;
    let points = match &a.from {
        Some(s) => vec![parse_point(s).map_err(usage)?],
        None => {
            if a.samples == 0 {
                return Err(usage("--samples must be at least 1"));
            }
            domain.sample_boundary(a.samples, a.seed)
        }
    };
    let mut out = open_out(&a.out)?;
    let mut code = 0;
    for p in points {
        match classify_boundary(&domain, p) {
            Ok(c) => {
                let line = json!({ "point": p.to_reals(), "class": c.class, "levi_value": c.levi_value });
                writeln!(out, "{line}").map_err(io_fail)?;
            }
            // a user-supplied point off the boundary is bad input
            Err(e @ LeviError::NotOnBoundary { .. }) if a.from.is_some() => return Err(usage(e.to_string())),
            Err(e) => {
                eprintln!("failed: {e}");
                code = 1;
            }
        }
    }
    out.flush().map_err(io_fail)?;
    Ok(code)
}

fn cmd_cayley(a: CayleyArgs) -> CliResult {
    let p = parse_point(&a.from).map_err(usage)?;
    let pair = |z: num_complex::Complex64| [z.re, z.im];
    let doc = if a.inverse {
        let w = SiegelPoint::new(p.z1, p.z2);
        let z = siegel_to_ball(w).map_err(|e| usage(e.to_string()))?;
        json!({ "z1": pair(z.z1), "z2": pair(z.z2), "in_ball": z.norm() < 1.0 })
    } else {
        let w = cayley_to_siegel(p).map_err(|e| usage(e.to_string()))?;
        json!({ "w1": pair(w.w1), "w2": pair(w.w2), "height": w.height(), "in_domain": w.in_domain() })
    };
    writeln!(io::stdout(), "{doc}").map_err(io_fail)?;
    Ok(0)
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    let exp = Expectations { ex11_clusters: a.expect_ex11_clusters, ..Expectations::default() };
    let report = verify_paper(&exp);
    if a.json {
        writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&report).map_err(failure)?).map_err(io_fail)?;
    } else {
        write!(io::stdout(), "{}", report.table(a.timings)).map_err(io_fail)?;
    }
    Ok(if report.overall { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points() {
        assert_eq!(parse_point("0,0").unwrap(), CPoint2::ORIGIN);
        assert_eq!(parse_point("0.1, 0").unwrap(), CPoint2::real(0.1, 0.0));
        assert_eq!(parse_point("1,2,3,4").unwrap().to_reals(), [1.0, 2.0, 3.0, 4.0]);
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("a,b").is_err());
        assert!(parse_point("nan,0").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-1000:1000").unwrap(), (-1000, 1000));
        assert!(parse_range("5:1").is_err());
        assert!(parse_range("5").is_err());
    }

    #[test]
    fn scales() {
        assert_eq!(parse_scales("3:7").unwrap(), dyadic_scales(3, 7, 1));
        assert_eq!(parse_scales("2:4:2").unwrap().len(), 5);
        assert_eq!(parse_scales("0.5,0.25").unwrap(), vec![0.5, 0.25]);
        assert!(parse_scales("0.5").is_err());
        assert!(parse_scales("0.5,-1").is_err());
        assert!(parse_scales("7:3").is_err());
    }
}
