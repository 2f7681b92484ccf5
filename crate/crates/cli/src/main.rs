//! Command-line front door: sampling runs, moment comparison tables,
//! Weingarten/Itzykson-Zuber/intertwiner queries, and polygon tooling.
//!
//! Every output embeds a metadata header (tool version, subcommand, full
//! config, seed) and is byte-identical across reruns with the same seed
//! and worker count. Exit codes: 0 ok, 1 numeric gate tripped, 2 usage.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use polyhedra::iz::{self, SpectralPair};
use polyhedra::mc::McConfig;
use polyhedra::moments::{self, MomentReport};
use polyhedra::polygon;
use polyhedra::quantum;
use polyhedra::sampler;
use polyhedra::weingarten;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "polyhedra",
    version,
    about = "Random framed polyhedra and polygons under unitary and orthogonal deformations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw Haar-uniform polyhedra, polygons, or free normal-vector sets
    Sample(SampleArgs),
    /// Exact ensemble moments against a Monte Carlo run
    Moments(MomentsArgs),
    /// Weingarten function tables for one symmetric-group order
    Weingarten(WeingartenArgs),
    /// Itzykson-Zuber integral by determinant, Monte Carlo, degenerate
    /// limit, or generating series
    Iz(IzArgs),
    /// Intertwiner dimensions, traces, characters, coherent norms
    Intertwiner(IntertwinerArgs),
    /// Polygon sampling, closing, reconstruction, network validation
    Polygon(PolygonArgs),
    /// Quick self-check of the exact identities and small Monte Carlo gates
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// What to sample: polyhedron, polygon, or free (unclosed vectors)
    #[arg(long, default_value = "polyhedron")]
    kind: String,
    /// Number of faces or edges
    #[arg(long = "n")]
    n: usize,
    /// Total area scale lambda (polyhedron/free) or perimeter (polygon)
    #[arg(long, default_value_t = 1.0)]
    area: f64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv (csv lists normal vectors as sample,i,Vx,Vy,Vz)
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long = "n")]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    area: f64,
    /// Monte Carlo sample count (0 emits the exact columns only)
    #[arg(long, default_value_t = 100_000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Use the closure-free ensemble instead of closed polyhedra
    #[arg(long, default_value_t = false)]
    free: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct WeingartenArgs {
    /// Symmetric-group order n (one row per cycle type)
    #[arg(long = "n")]
    n: u32,
    /// Unitary group dimension N
    #[arg(long = "N")]
    big_n: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct IzArgs {
    /// Eigenvalues of X, comma separated
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
    /// Eigenvalues of Y, comma separated (defaults to the projector
    /// spectrum 1,1,0,..,0 used by the polyhedron ensemble)
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    #[arg(long)]
    theta: f64,
    /// det, mc, degenerate, or series
    #[arg(long, default_value = "det")]
    method: String,
    /// Series truncation order for the series method
    #[arg(long, default_value_t = 12)]
    n_max: u32,
    /// Area scale lambda for the series method
    #[arg(long, default_value_t = 1.0)]
    area: f64,
    #[arg(long, default_value_t = 100_000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct IntertwinerArgs {
    /// dim, dimfixed, trace, char, cohnorm, or mcdim
    verb: String,
    #[arg(long = "n")]
    n: usize,
    /// Total spin J (decimal like 1.5 or fraction like 3/2)
    #[arg(long = "spin-sum")]
    spin_sum: String,
    /// Overall recoupled spin for dimfixed
    #[arg(long)]
    overall_spin: Option<String>,
    /// Moment power for trace
    #[arg(long, default_value_t = 1)]
    power: u32,
    /// Angles for char, comma separated
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// Ensemble JSON file for cohnorm
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct PolygonArgs {
    /// sample, close, reconstruct, or validate
    verb: String,
    #[arg(long = "n", default_value_t = 5)]
    n: usize,
    /// Perimeter of sampled polygons
    #[arg(long, default_value_t = 2.0)]
    area: f64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Input JSON (a polygon config for close/reconstruct, a network for
    /// validate)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or svg
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 20_000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

/// Failures that map to a usage exit (2) rather than a tripped gate (1).
#[derive(Debug)]
struct UsageError(String);

impl From<polyhedra::Error> for UsageError {
    fn from(e: polyhedra::Error) -> Self {
        UsageError(e.to_string())
    }
}

impl From<std::io::Error> for UsageError {
    fn from(e: std::io::Error) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Weingarten(a) => cmd_weingarten(a),
        Command::Iz(a) => cmd_iz(a),
        Command::Intertwiner(a) => cmd_intertwiner(a),
        Command::Polygon(a) => cmd_polygon(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn csv_header(subcommand: &str, config: &str) -> String {
    format!("# polyhedra v{VERSION}\n# subcommand: {subcommand}\n# config: {config}\n")
}

fn json_meta(subcommand: &str, config: &str, seed: u64, workers: usize) -> String {
    format!(
        "\"meta\": {{\"tool\": \"polyhedra v{VERSION}\", \"subcommand\": \"{subcommand}\", \"config\": \"{config}\", \"seed\": {seed}, \"workers\": {workers}}}"
    )
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), UsageError> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn parse_spin(text: &str) -> Result<u32, UsageError> {
    let doubled = if let Some((num, den)) = text.split_once('/') {
        let n: u32 = num
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("bad spin {text}")))?;
        let d: u32 = den
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("bad spin {text}")))?;
        match d {
            2 => n,
            1 => 2 * n,
            _ => {
                return Err(UsageError(format!(
                    "spin denominators other than 2 are not half-integers: {text}"
                )))
            }
        }
    } else {
        let v: f64 = text
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("bad spin {text}")))?;
        let doubled = (2.0 * v).round();
        if (2.0 * v - doubled).abs() > 1e-9 || doubled < 0.0 {
            return Err(UsageError(format!("spin must be a half-integer: {text}")));
        }
        doubled as u32
    };
    Ok(doubled)
}

fn cmd_sample(a: SampleArgs) -> Result<bool, UsageError> {
    if a.n < 2 || a.area <= 0.0 {
        return Err(UsageError("need --n >= 2 and --area > 0".into()));
    }
    let config = format!(
        "kind={} n={} area={} count={} seed={} workers={} format={}",
        a.kind, a.n, a.area, a.count, a.seed, a.workers, a.format
    );
    let mut body = String::new();
    // one RNG stream per sample: reruns are byte-identical for any workers
    match (a.kind.as_str(), a.format.as_str()) {
        ("polyhedron", "json") => {
            let items: Vec<String> = (0..a.count)
                .map(|s| {
                    let mut rng = sampler::stream_rng(a.seed, s);
                    Ok(sampler::sample_polyhedron(a.n, a.area, &mut rng)?.to_json())
                })
                .collect::<Result<_, UsageError>>()?;
            writeln!(
                body,
                "{{{}, \"ensembles\": [{}]}}",
                json_meta("sample", &config, a.seed, a.workers),
                items.join(", ")
            )
            .unwrap();
        }
        ("polyhedron", "csv") | ("free", "csv") => {
            body.push_str(&csv_header("sample", &config));
            body.push_str("sample,i,Vx,Vy,Vz\n");
            for s in 0..a.count {
                let mut rng = sampler::stream_rng(a.seed, s);
                let vectors = if a.kind == "polyhedron" {
                    sampler::sample_polyhedron(a.n, a.area, &mut rng)?
                        .vectors()
                        .into_iter()
                        .map(|(v, _)| v)
                        .collect()
                } else {
                    sampler::sample_free_ensemble(a.n, a.area, &mut rng)?
                };
                for (i, v) in vectors.iter().enumerate() {
                    writeln!(
                        body,
                        "{s},{i},{},{},{}",
                        polyhedra::ensemble::f64_17(v.x),
                        polyhedra::ensemble::f64_17(v.y),
                        polyhedra::ensemble::f64_17(v.z)
                    )
                    .unwrap();
                }
            }
        }
        ("free", "json") => {
            let mut items = Vec::new();
            for s in 0..a.count {
                let mut rng = sampler::stream_rng(a.seed, s);
                let vs = sampler::sample_free_ensemble(a.n, a.area, &mut rng)?;
                let rows: Vec<String> = vs
                    .iter()
                    .map(|v| {
                        format!(
                            "[{}, {}, {}]",
                            polyhedra::ensemble::f64_17(v.x),
                            polyhedra::ensemble::f64_17(v.y),
                            polyhedra::ensemble::f64_17(v.z)
                        )
                    })
                    .collect();
                items.push(format!("[{}]", rows.join(", ")));
            }
            writeln!(
                body,
                "{{{}, \"vectors\": [{}]}}",
                json_meta("sample", &config, a.seed, a.workers),
                items.join(", ")
            )
            .unwrap();
        }
        ("polygon", "json") => {
            let items: Vec<String> = (0..a.count)
                .map(|s| {
                    let mut rng = sampler::stream_rng(a.seed, s);
                    Ok(polygon::sample_polygon(a.n, a.area, &mut rng)?.to_json())
                })
                .collect::<Result<_, UsageError>>()?;
            writeln!(
                body,
                "{{{}, \"polygons\": [{}]}}",
                json_meta("sample", &config, a.seed, a.workers),
                items.join(", ")
            )
            .unwrap();
        }
        ("polygon", "svg") => {
            let mut rng = sampler::stream_rng(a.seed, 0);
            let p = polygon::reconstruct(&polygon::sample_polygon(a.n, a.area, &mut rng)?)?;
            writeln!(
                body,
                "<!-- polyhedra v{VERSION} sample {config} -->\n{}",
                p.to_svg()
            )
            .unwrap();
        }
        (kind, format) => {
            return Err(UsageError(format!(
                "unsupported kind/format combination: {kind}/{format}"
            )));
        }
    }
    emit(&a.out, &body)?;
    Ok(true)
}

fn cmd_moments(a: MomentsArgs) -> Result<bool, UsageError> {
    if a.n < 3 {
        return Err(UsageError("need --n >= 3".into()));
    }
    if a.format != "csv" {
        return Err(UsageError("moments emits csv only".into()));
    }
    let config = format!(
        "n={} area={} count={} seed={} workers={} free={}",
        a.n, a.area, a.count, a.seed, a.workers, a.free
    );
    let cfg = McConfig::new(a.count, a.seed).with_workers(a.workers);
    let reports = if a.free {
        moments::run_free_suite(a.n, a.area, &cfg)?
    } else {
        moments::run_closed_suite(a.n, a.area, &cfg)?
    };
    let mut body = csv_header("moments", &config);
    body.push_str(MomentReport::csv_header());
    body.push('\n');
    let mut tripped = false;
    for r in &reports {
        body.push_str(&r.csv_row(a.seed));
        if let Some(z) = r.z_score() {
            if z.abs() > 4.0 {
                tripped = true;
                body.push_str(",FLAGGED");
            }
        }
        body.push('\n');
    }
    emit(&a.out, &body)?;
    Ok(!tripped)
}

fn cmd_weingarten(a: WeingartenArgs) -> Result<bool, UsageError> {
    if a.format != "csv" {
        return Err(UsageError("weingarten emits csv only".into()));
    }
    let config = format!("n={} N={}", a.n, a.big_n);
    let mut body = csv_header("weingarten", &config);
    body.push_str("n,cycle_type,N,numerator,denominator,asymptotic,ratio\n");
    for class in weingarten::partitions(a.n) {
        let exact = weingarten::weingarten_exact_class(a.n, a.big_n, &class)?;
        let asym = weingarten::weingarten_asymptotic_class(a.big_n, a.n, &class);
        let exact_f = weingarten::rational_to_f64(&exact);
        writeln!(
            body,
            "{},\"{}\",{},{},{},{:.12e},{:.9}",
            a.n,
            class,
            a.big_n,
            exact.numer(),
            exact.denom(),
            asym,
            asym / exact_f
        )
        .unwrap();
    }
    emit(&a.out, &body)?;
    Ok(true)
}

fn cmd_iz(a: IzArgs) -> Result<bool, UsageError> {
    if a.x.is_empty() {
        return Err(UsageError("need --x eigenvalues".into()));
    }
    let y = a.y.clone().unwrap_or_else(|| {
        let mut y = vec![0.0; a.x.len()];
        if y.len() >= 2 {
            y[0] = 1.0;
            y[1] = 1.0;
        }
        y
    });
    let config = format!(
        "x={:?} y={:?} theta={} method={} count={} seed={} workers={}",
        a.x, y, a.theta, a.method, a.count, a.seed, a.workers
    );
    let mut body = csv_header("iz", &config);
    body.push_str("method,re,im,stderr_re,stderr_im\n");
    let push_value = |body: &mut String, method: &str, v: Complex64, se: (f64, f64)| {
        writeln!(
            body,
            "{method},{:.17e},{:.17e},{:.3e},{:.3e}",
            v.re, v.im, se.0, se.1
        )
        .unwrap();
    };
    let cfg = McConfig::new(a.count, a.seed).with_workers(a.workers);
    let is_projector_y = y.len() >= 4
        && y.iter().take(2).all(|&v| v == 1.0)
        && y.iter().skip(2).all(|&v| v == 0.0);
    match a.method.as_str() {
        "det" => {
            let p = SpectralPair::new(a.x.clone(), y, a.theta)?;
            push_value(&mut body, "det", iz::iz_determinant(&p)?, (0.0, 0.0));
        }
        "degenerate" => {
            let v = iz::iz_degenerate_y(&a.x, a.theta)?;
            push_value(&mut body, "degenerate", v, (0.0, 0.0));
            let extr = iz::iz_degenerate_extrapolated(&a.x, a.theta)?;
            push_value(&mut body, "extrapolated-det", extr, (0.0, 0.0));
            writeln!(
                body,
                "delta_degenerate_vs_extrapolated,{:.3e},,,",
                (v - extr).norm()
            )
            .unwrap();
        }
        "series" => {
            let v = iz::area_generating_series(a.x.len(), a.area, a.theta, a.n_max)?;
            push_value(&mut body, "series", v, (0.0, 0.0));
        }
        "mc" => {
            let p = SpectralPair::new(a.x.clone(), y.clone(), a.theta)?;
            let (v, se) = iz::iz_mc(&p, &cfg);
            push_value(&mut body, "mc", v, se);
            // cross-method delta against the best available exact route
            let exact = if is_projector_y {
                iz::iz_degenerate_y(&a.x, a.theta).ok()
            } else {
                iz::iz_determinant(&p).ok()
            };
            if let Some(ex) = exact {
                push_value(&mut body, "exact-reference", ex, (0.0, 0.0));
                writeln!(body, "delta_mc_vs_exact,{:.3e},,,", (v - ex).norm()).unwrap();
            }
        }
        other => return Err(UsageError(format!("unknown method {other}"))),
    }
    emit(&a.out, &body)?;
    Ok(true)
}

fn cmd_intertwiner(a: IntertwinerArgs) -> Result<bool, UsageError> {
    let two_j = parse_spin(&a.spin_sum)?;
    let config = format!(
        "verb={} n={} spin_sum={} count={} seed={}",
        a.verb, a.n, a.spin_sum, a.count, a.seed
    );
    let mut body = csv_header("intertwiner", &config);
    match a.verb.as_str() {
        "dim" => {
            let d = quantum::dimension(a.n, two_j)?;
            body.push_str("quantity,decimal,rational\n");
            writeln!(body, "dimension,{d},{d}/1").unwrap();
        }
        "dimfixed" => {
            let two_jc = parse_spin(
                a.overall_spin
                    .as_deref()
                    .ok_or_else(|| UsageError("dimfixed needs --overall-spin".into()))?,
            )?;
            let d = quantum::dimension_fixed_spin(a.n, two_j, two_jc)?;
            body.push_str("quantity,decimal,rational\n");
            writeln!(body, "dimension_fixed_spin,{d},{d}/1").unwrap();
        }
        "trace" => {
            body.push_str("quantity,decimal,rational\n");
            let spectral = quantum::trace_moment_v(a.n, two_j, a.power)?;
            writeln!(
                body,
                "trace_moment_power_{},{:.17e},{}/{}",
                a.power,
                weingarten::rational_to_f64(&spectral),
                spectral.numer(),
                spectral.denom()
            )
            .unwrap();
            if let Some(closed) = quantum::trace_moment_v_closed(a.n, two_j, a.power)? {
                writeln!(
                    body,
                    "closed_form,{:.17e},{}/{}",
                    weingarten::rational_to_f64(&closed),
                    closed.numer(),
                    closed.denom()
                )
                .unwrap();
            }
        }
        "char" => {
            let thetas = a
                .theta
                .clone()
                .ok_or_else(|| UsageError("char needs --theta angles".into()))?;
            let c = quantum::character(a.n, two_j, &thetas)?;
            body.push_str("quantity,re,im\n");
            writeln!(body, "character,{:.17e},{:.17e}", c.re, c.im).unwrap();
        }
        "cohnorm" => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| UsageError("cohnorm needs --input ensemble.json".into()))?;
            let text = std::fs::read_to_string(path)?;
            let e = polyhedra::SpinorEnsemble::from_json(&text)?;
            let norm = quantum::coherent_norm(two_j, &e)?;
            body.push_str("quantity,decimal\n");
            writeln!(body, "coherent_norm,{:.17e}", norm).unwrap();
        }
        "mcdim" => {
            let cfg = McConfig::new(a.count, a.seed).with_workers(a.workers);
            let est = quantum::dimension_mc(a.n, two_j, &cfg)?;
            let exact = quantum::dimension(a.n, two_j)?;
            body.push_str("quantity,mean,stderr,exact,z\n");
            use num_traits::ToPrimitive;
            let z = est.z_score(exact.to_f64().unwrap_or(f64::NAN));
            writeln!(
                body,
                "dimension_mc,{:.9e},{:.3e},{exact},{z:.3}",
                est.mean, est.stderr
            )
            .unwrap();
            emit(&a.out, &body)?;
            return Ok(z.abs() <= 4.0);
        }
        other => return Err(UsageError(format!("unknown verb {other}"))),
    }
    emit(&a.out, &body)?;
    Ok(true)
}

fn cmd_polygon(a: PolygonArgs) -> Result<bool, UsageError> {
    let config = format!(
        "verb={} n={} area={} count={} seed={} format={}",
        a.verb, a.n, a.area, a.count, a.seed, a.format
    );
    let mut body = String::new();
    match a.verb.as_str() {
        "sample" => {
            if a.format == "svg" {
                let mut rng = sampler::stream_rng(a.seed, 0);
                let p = polygon::reconstruct(&polygon::sample_polygon(a.n, a.area, &mut rng)?)?;
                writeln!(
                    body,
                    "<!-- polyhedra v{VERSION} polygon {config} -->\n{}",
                    p.to_svg()
                )
                .unwrap();
            } else {
                let items: Vec<String> = (0..a.count)
                    .map(|s| {
                        let mut rng = sampler::stream_rng(a.seed, s);
                        Ok(polygon::sample_polygon(a.n, a.area, &mut rng)?.to_json())
                    })
                    .collect::<Result<_, UsageError>>()?;
                writeln!(
                    body,
                    "{{{}, \"polygons\": [{}]}}",
                    json_meta("polygon", &config, a.seed, a.workers),
                    items.join(", ")
                )
                .unwrap();
            }
        }
        "close" => {
            let text = std::fs::read_to_string(
                a.input
                    .as_ref()
                    .ok_or_else(|| UsageError("close needs --input config.json".into()))?,
            )?;
            let c = polygon::PolygonConfig::from_json(&text)?;
            let (closed, theta, eta) = c.close()?;
            writeln!(
                body,
                "{{{}, \"theta\": {}, \"eta\": {}, \"closed\": {}}}",
                json_meta("polygon", &config, a.seed, a.workers),
                polyhedra::ensemble::f64_17(theta),
                polyhedra::ensemble::f64_17(eta),
                closed.to_json()
            )
            .unwrap();
        }
        "reconstruct" => {
            let text = std::fs::read_to_string(
                a.input
                    .as_ref()
                    .ok_or_else(|| UsageError("reconstruct needs --input config.json".into()))?,
            )?;
            let c = polygon::PolygonConfig::from_json(&text)?;
            let p = polygon::reconstruct(&c)?;
            if a.format == "svg" {
                writeln!(
                    body,
                    "<!-- polyhedra v{VERSION} polygon {config} -->\n{}",
                    p.to_svg()
                )
                .unwrap();
            } else {
                writeln!(
                    body,
                    "{{{}, \"polygon\": {}}}",
                    json_meta("polygon", &config, a.seed, a.workers),
                    p.to_json()
                )
                .unwrap();
            }
        }
        "validate" => {
            let text = std::fs::read_to_string(
                a.input
                    .as_ref()
                    .ok_or_else(|| UsageError("validate needs --input network.json".into()))?,
            )?;
            let net: polygon::ComplexNetwork =
                serde_json::from_str(&text).map_err(|e| UsageError(e.to_string()))?;
            let report = polygon::validate_network(&net);
            body.push_str(&csv_header("polygon", &config));
            body.push_str("constraint,index,residual,scale\n");
            for (v, r, s) in &report.vertex_residuals {
                writeln!(body, "vertex_closure,{v},{r:.3e},{s:.3e}").unwrap();
            }
            for (l, r, s) in &report.link_residuals {
                writeln!(body, "link_length,{l},{r:.3e},{s:.3e}").unwrap();
            }
            writeln!(body, "pass,,{},", report.pass).unwrap();
            emit(&a.out, &body)?;
            return Ok(report.pass);
        }
        other => return Err(UsageError(format!("unknown verb {other}"))),
    }
    emit(&a.out, &body)?;
    Ok(true)
}

fn cmd_selftest(a: SelftestArgs) -> Result<bool, UsageError> {
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("{}: {name}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };
    // exact identities
    check(
        "density sphere-volume identity (N <= 20)",
        (2..=20).all(|n| {
            moments::density_coeff(n).unwrap() == moments::density_coeff_sphere_volumes(n).unwrap()
        }),
    );
    check(
        "Weingarten Gram pseudo-inverse (n <= 3, N = 5)",
        (1..=3).all(|n| weingarten::gram_inverse_check(n, 5).unwrap()),
    );
    check(
        "leg-peeling sum rule (N <= 5, J <= 3)",
        (2..=5usize).all(|n| {
            (0..=6u32)
                .step_by(2)
                .all(|two_j| quantum::sum_rule_check(n, two_j).unwrap().peeled_holds)
        }),
    );
    check(
        "trace closed forms equal spectral sums (N <= 5, J <= 3)",
        (2..=5usize).all(|n| {
            (2..=6u32).step_by(2).all(|two_j| {
                (1..=2u32).all(|p| {
                    quantum::trace_moment_v_closed(n, two_j, p).unwrap().unwrap()
                        == quantum::trace_moment_v(n, two_j, p).unwrap()
                })
            })
        }),
    );
    check(
        "IZ series coefficients equal moments (n <= 12)",
        (0..=12u32).all(|p| {
            iz::area_series_coeff(6, p).unwrap()
                * weingarten::Rational::from_integer(num_bigint::BigInt::from(
                    weingarten::factorial(p),
                ))
                == moments::moment_v_coeff(6, p).unwrap()
        }),
    );
    // small Monte Carlo gates
    let cfg = McConfig::new(a.count, a.seed).with_workers(a.workers);
    let reports = moments::run_closed_suite(6, 1.0, &cfg)?;
    check(
        "closed moment suite within 4 sigma (N=6, small run)",
        reports
            .iter()
            .all(|r| r.z_score().map(|z| z.abs() <= 4.0).unwrap_or(true)),
    );
    let mut rng = sampler::stream_rng(a.seed, 7);
    let e = sampler::sample_polyhedron(8, 1.0, &mut rng).unwrap();
    let obs = e.observables();
    check(
        "sampled ensembles closed with Plucker residual <= 1e-12",
        e.is_closed(1e-12) && polyhedra::ensemble::plucker_residual(&obs) <= 1e-12,
    );
    check("polygon fixtures reconstruct", {
        let q = std::f64::consts::FRAC_PI_4;
        let square = polygon::PolygonConfig::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, q),
            Complex64::new(0.0, 1.0),
            Complex64::from_polar(1.0, 3.0 * q),
        ])
        .unwrap();
        polygon::reconstruct(&square)
            .map(|p| (p.area() - 1.0).abs() < 1e-10)
            .unwrap_or(false)
    });
    println!(
        "{}",
        if ok {
            "selftest: all gates passed"
        } else {
            "selftest: FAILURES above"
        }
    );
    Ok(ok)
}
