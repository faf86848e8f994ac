//! The `okkit` command line.
//!
//! Every command writes one JSON document (or CSV for `surface-table
//! --format csv`) to `--output` or stdout. Exit status: 0 on success
//! (including not-certified conclusions), 1 on a failed verification or a
//! computation error, 2 on unreadable input, 3 when the lattice-point cap is
//! exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::jetsep::{
    certify_adjoint, certify_canonical_free, certify_jet_ample, infinitesimal_point_bodies, multipoint_point_bodies,
    verify, xi_max, Assumption, Certificate, MultiplierEvidence, PointBodies,
};
use crate::ratgeom::{format_rational, parse_rational, Polytope, Rational, RationalVector};
use crate::surfaces::{surface_certificate, table, table_csv, DEFAULT_S};
use crate::toric::{
    all_frames, compute_mu, infinitesimal_body_fixed_point, jet_oracle_fixed_point, okounkov_body_invariant_flag,
    random_section_oracle, Body, EnumerationLimits, EvaluationPoint, Multipoint, ToricDivisorData, ToricInstance,
    ValuationKind, DEFAULT_CAP,
};
use crate::{Error, SCHEMA};

/// Environment variable overriding the lattice-point cap.
pub const CAP_ENV: &str = "OKKIT_CAP";

#[derive(Debug, Parser)]
#[command(name = "okkit", version, about = "Exact Newton-Okounkov bodies and jet separation certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-point body of a toric divisor at a fixed point.
    Body(BodyArgs),
    /// Multipoint bodies at all points of the instance.
    Multipoint(MultipointArgs),
    /// Issue a jet-separation certificate.
    Certify(CertifyArgs),
    /// Intersection table for the double-cover family.
    SurfaceTable(TableArgs),
    /// Brute-force jet and random-section oracles.
    Oracle(OracleArgs),
    /// Re-check a stored certificate.
    VerifyCertificate(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Lattice-point cap per level (overrides OKKIT_CAP).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Seed, recorded in the output.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BodyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `vN` (N-th instance point, or N-th vertex when none are listed) or
    /// explicit coordinates `x,y,...`.
    #[arg(long, default_value = "v0")]
    pub point: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub kmax: u32,
    /// Use the infinitesimal flag instead of the invariant flag.
    #[arg(long)]
    pub infinitesimal: bool,
    /// `all`, or comma-separated permutations such as `01,10`.
    #[arg(long)]
    pub frames: Option<String>,
    /// CSV of the vertices of 2-D bodies, in boundary order.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MultipointArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub kmax: u32,
    #[arg(long)]
    pub infinitesimal: bool,
    /// Shift `t` of `L - t𝔻`, as `p/q`.
    #[arg(long, default_value = "0")]
    pub t: String,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub kmax: u32,
    /// `K_X + D` criterion.
    #[arg(long, group = "mode")]
    pub adjoint: bool,
    /// `(m + m(D)) D` criterion on the bodies of `mD`.
    #[arg(long, group = "mode")]
    pub canonical_free: bool,
    /// The double-cover instance with the given ell.
    #[arg(long, group = "mode")]
    pub surface: Option<i64>,
    /// Size of the cited inverted simplex for `--surface`.
    #[arg(long, default_value_t = DEFAULT_S)]
    pub s: i64,
    /// Use multipoint bodies across all selected points.
    #[arg(long)]
    pub multipoint: bool,
    /// Points to certify at (default: all instance points, else `v0`).
    #[arg(long)]
    pub point: Vec<String>,
    #[arg(long)]
    pub frames: Option<String>,
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long)]
    pub m_of_d: Option<i64>,
    /// Why `m(D) D - K_X` is ample.
    #[arg(long)]
    pub evidence: Option<String>,
    /// Wrap the canonical-free certificate as a jet-ampleness certificate.
    #[arg(long)]
    pub jet_ample: bool,
    /// Assert the hypothesis at every point, with this justification.
    #[arg(long)]
    pub all_points: Option<String>,
    /// Name of the divisor in the certificate statement.
    #[arg(long, default_value = "D")]
    pub label: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Range `A..B`, inclusive.
    #[arg(long, default_value = "2..10")]
    pub ell: String,
    #[arg(long, default_value_t = DEFAULT_S)]
    pub s: i64,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "v0")]
    pub point: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub kmax: u32,
    /// Highest jet order to test.
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    #[arg(long)]
    pub infinitesimal: bool,
    /// Random sections per level.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => 3,
            Error::Json(_) | Error::InvalidRational(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` and runs the command; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("okkit: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Body(a) => body(a),
        Command::Multipoint(a) => multipoint(a),
        Command::Certify(a) => certify(a),
        Command::SurfaceTable(a) => surface_table(a),
        Command::Oracle(a) => oracle(a),
        Command::VerifyCertificate(a) => verify_certificate(a),
    }
}

fn limits(common: &Common) -> CliResult<EnumerationLimits> {
    if let Some(cap) = common.cap {
        return Ok(EnumerationLimits { cap });
    }
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(|cap| EnumerationLimits { cap })
            .map_err(|_| Failure::parse(format!("{CAP_ENV}={v:?} is not a nonnegative integer"))),
        Err(_) => Ok(EnumerationLimits { cap: DEFAULT_CAP }),
    }
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    let write = |w: &mut dyn Write| w.write_all(text.as_bytes());
    let res = match output {
        Some(p) => fs::File::create(p).and_then(|mut f| write(&mut f)),
        None => write(&mut std::io::stdout().lock()),
    };
    res.map_err(|e| Failure { code: 1, message: format!("cannot write output: {e}") })
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    emit(output, &text)
}

fn read_instance(path: &Path) -> CliResult<ToricInstance> {
    let text = fs::read_to_string(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    let inst: ToricInstance =
        serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    match &inst.schema {
        Some(s) if s != SCHEMA => Err(Failure::parse(format!("{}: unsupported schema {s}", path.display()))),
        _ => Ok(inst),
    }
}

fn load(path: &Path) -> CliResult<(ToricDivisorData, Vec<EvaluationPoint>)> {
    let inst = read_instance(path)?;
    let parse = |e: Error| Failure::parse(format!("{}: {e}", path.display()));
    let divisor = inst.divisor().map_err(parse)?;
    let points = inst.points().map_err(parse)?;
    Ok((divisor, points))
}

/// Resolves `vN` or `x,y,...` to a vertex.
fn resolve_point(spec: &str, t: &ToricDivisorData, listed: &[EvaluationPoint]) -> CliResult<Vec<i64>> {
    if let Some(idx) = spec.strip_prefix('v') {
        let i: usize = idx.parse().map_err(|_| Failure::parse(format!("bad point {spec:?}")))?;
        if !listed.is_empty() {
            return listed.get(i).map(|p| p.vertex.clone()).ok_or_else(|| Failure::parse(format!("no point {spec}")));
        }
        return t
            .polytope()
            .vertices()
            .get(i)
            .map(|v| v.to_i64().expect("lattice vertex"))
            .ok_or_else(|| Failure::parse(format!("no vertex {spec}")));
    }
    let coords: Result<Vec<i64>, _> = spec.split(',').map(|s| s.trim().parse::<i64>()).collect();
    let coords = coords.map_err(|_| Failure::parse(format!("bad point {spec:?}")))?;
    if coords.len() != t.dim() {
        return Err(Failure::parse(format!("point {spec:?} has the wrong dimension")));
    }
    Ok(coords)
}

fn parse_frames(spec: Option<&str>, n: usize, default_all: bool) -> CliResult<Vec<Vec<usize>>> {
    match spec {
        None if default_all => Ok(all_frames(n)),
        None => Ok(vec![(0..n).collect()]),
        Some("all") => Ok(all_frames(n)),
        Some(list) => list
            .split(',')
            .map(|f| {
                let frame: Option<Vec<usize>> =
                    f.trim().chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect();
                let frame = frame.ok_or_else(|| Failure::parse(format!("bad frame {f:?}")))?;
                EvaluationPoint::new(vec![0; n], frame.clone()).map_err(|e| Failure::parse(e.to_string()))?;
                Ok(frame)
            })
            .collect(),
    }
}

fn rational_arg(s: &str) -> CliResult<Rational> {
    parse_rational(s).map_err(|e| Failure::parse(e.to_string()))
}

fn body_json(b: &Body) -> Value {
    json!({
        "exact": b.exact,
        "exactness": b.label(),
        "kmax": b.kmax,
        "polytope": b.polytope.to_json(),
        "volume": format_rational(&b.polytope.volume()),
    })
}

fn kind_name(kind: ValuationKind) -> &'static str {
    match kind {
        ValuationKind::Flag => "flag",
        ValuationKind::Infinitesimal => "infinitesimal",
    }
}

/// Vertices of a 2-D polytope in counter-clockwise order.
fn boundary_order(p: &Polytope) -> Vec<RationalVector> {
    let v = p.vertices();
    if v.len() < 3 {
        return v.to_vec();
    }
    let (first, last) = (&v[0], &v[v.len() - 1]);
    let side = |q: &RationalVector| {
        let (a, b) = (last.sub(first), q.sub(first));
        &a[0] * &b[1] - &a[1] * &b[0]
    };
    let zero = Rational::from_integer(0.into());
    let mut lower: Vec<RationalVector> = v.iter().filter(|q| side(q) < zero).cloned().collect();
    let upper: Vec<RationalVector> = v.iter().filter(|q| side(q) > zero).cloned().collect();
    let mut out = vec![first.clone()];
    out.append(&mut lower);
    out.push(last.clone());
    out.extend(upper.into_iter().rev());
    out
}

fn write_plot(path: &Path, bodies: &[(String, &Polytope)]) -> CliResult<()> {
    let mut text = String::from("body,x,y\n");
    for (name, p) in bodies {
        if p.dim() != 2 {
            return Err(Failure { code: 1, message: "plots are only written for 2-D bodies".into() });
        }
        for v in boundary_order(p) {
            text.push_str(&format!("{name},{},{}\n", format_rational(&v[0]), format_rational(&v[1])));
        }
    }
    emit(Some(path), &text)
}

fn body(a: BodyArgs) -> CliResult<i32> {
    let lim = limits(&a.common)?;
    let (t, listed) = load(&a.input)?;
    let vertex = resolve_point(&a.point, &t, &listed)?;
    let frames = parse_frames(a.frames.as_deref(), t.dim(), false)?;
    let kind = if a.infinitesimal { ValuationKind::Infinitesimal } else { ValuationKind::Flag };
    let mut bodies = Vec::new();
    let mut plots = Vec::new();
    for f in &frames {
        let p = EvaluationPoint::new(vertex.clone(), f.clone())?;
        let b = match kind {
            ValuationKind::Infinitesimal => infinitesimal_body_fixed_point(&t, &p, a.kmax, lim)?.body,
            ValuationKind::Flag => okounkov_body_invariant_flag(&t, &p)?,
        };
        let mut entry = body_json(&b);
        entry["point"] = json!(crate::jetsep::vertex_label(&vertex));
        entry["frame"] = json!(crate::jetsep::frame_label(f));
        entry["xi_max"] = match xi_max(&b.polytope) {
            Ok(x) => json!(x),
            Err(_) => Value::Null,
        };
        plots.push((p.label(), b.polytope));
        bodies.push(entry);
    }
    if let Some(path) = &a.plot {
        write_plot(path, &plots.iter().map(|(n, p)| (n.clone(), p)).collect::<Vec<_>>())?;
    }
    let doc = json!({
        "schema": SCHEMA,
        "command": "body",
        "seed": a.common.seed,
        "cap": lim.cap,
        "valuation": kind_name(kind),
        "kmax": a.kmax,
        "bodies": bodies,
    });
    emit_json(a.common.output.as_deref(), &doc)?;
    Ok(0)
}

fn multipoint(a: MultipointArgs) -> CliResult<i32> {
    let lim = limits(&a.common)?;
    let (t, points) = load(&a.input)?;
    if points.is_empty() {
        return Err(Failure::parse("multipoint needs a \"points\" list in the instance"));
    }
    let shift = rational_arg(&a.t)?;
    let kind = if a.infinitesimal { ValuationKind::Infinitesimal } else { ValuationKind::Flag };
    let mp = Multipoint::new(&t, &points, kind)?;
    let enumerated = mp.enumerate(&shift, a.kmax, lim)?;
    let limit = mp.limit_bodies(&shift)?;
    let single = mp.single_point_bodies();
    let mu = compute_mu(&t, &mp.family())?;
    let lift = RationalVector::axis(t.dim(), 0, shift.clone());

    let mut entries = Vec::new();
    let mut limit_sum = Some(Rational::from_integer(0.into()));
    for (j, p) in points.iter().enumerate() {
        let e = &enumerated[j];
        let inside_limit = match &limit[j] {
            Some(l) => Some(l.polytope.contains(&e.polytope)?),
            None => None,
        };
        let lifted = e.polytope.translate(&lift)?;
        let inside_single = single[j].polytope.contains(&lifted)?;
        match (&limit[j], &mut limit_sum) {
            (Some(l), Some(sum)) => *sum += l.polytope.volume(),
            _ => limit_sum = None,
        }
        entries.push(json!({
            "point": p.label(),
            "enumerated": body_json(e),
            "limit": limit[j].as_ref().map(body_json),
            "enumerated_inside_limit": inside_limit,
            "inside_single_point_body": inside_single,
            "single_point_volume": format_rational(&single[j].polytope.volume()),
        }));
    }
    if let Some(path) = &a.plot {
        let named: Vec<(String, &Polytope)> = points
            .iter()
            .zip(&enumerated)
            .filter(|(_, b)| !b.polytope.is_empty())
            .map(|(p, b)| (p.label(), &b.polytope))
            .collect();
        write_plot(path, &named)?;
    }
    let doc = json!({
        "schema": SCHEMA,
        "command": "multipoint",
        "seed": a.common.seed,
        "cap": lim.cap,
        "valuation": kind_name(kind),
        "kmax": a.kmax,
        "t": format_rational(&shift),
        "mu": format_rational(&mu),
        "bodies": entries,
        "limit_volume_sum": limit_sum.as_ref().map(format_rational),
        "polytope_volume": format_rational(&t.polytope().volume()),
    });
    emit_json(a.common.output.as_deref(), &doc)?;
    Ok(0)
}

fn certify(a: CertifyArgs) -> CliResult<i32> {
    let cert = build_certificate(&a)?;
    emit_json(a.common.output.as_deref(), &cert)?;
    Ok(0)
}

fn build_certificate(a: &CertifyArgs) -> CliResult<Certificate> {
    if let Some(ell) = a.surface {
        return Ok(surface_certificate(ell, a.s)?);
    }
    if !a.adjoint && !a.canonical_free {
        return Err(Failure::parse("choose one of --adjoint, --canonical-free or --surface"));
    }
    let lim = limits(&a.common)?;
    let path = a.input.as_deref().ok_or_else(|| Failure::parse("--input is required"))?;
    let (t, listed) = load(path)?;
    let vertices: Vec<Vec<i64>> = if !a.point.is_empty() {
        a.point.iter().map(|s| resolve_point(s, &t, &listed)).collect::<CliResult<_>>()?
    } else if !listed.is_empty() {
        listed.iter().map(|p| p.vertex.clone()).collect()
    } else {
        vec![resolve_point("v0", &t, &listed)?]
    };
    let frames = parse_frames(a.frames.as_deref(), t.dim(), true)?;

    // Canonical-free bodies are those of mD.
    let m = if a.canonical_free { a.m.ok_or_else(|| Failure::parse("--m is required"))? } else { 1 };
    let (divisor, vertices) = if m == 1 {
        (t.clone(), vertices)
    } else {
        let scaled = t.scaled(m)?;
        (scaled, vertices.iter().map(|v| v.iter().map(|x| x * m).collect()).collect())
    };
    let bodies: Vec<PointBodies> = if a.multipoint {
        multipoint_point_bodies(&divisor, &vertices, &frames, a.kmax, lim)?
    } else {
        vertices.iter().map(|v| infinitesimal_point_bodies(&divisor, v, &frames, a.kmax, lim)).collect::<Result<_, _>>()?
    };
    let n = t.dim();
    if a.adjoint {
        return Ok(certify_adjoint(&bodies, n, a.k, &a.label, vec![])?);
    }
    let evidence = a.m_of_d.map(|value| MultiplierEvidence { value, evidence: a.evidence.clone().unwrap_or_default() });
    let cert = certify_canonical_free(&bodies, m, evidence, n, a.k, &a.label, vec![])?;
    if !a.jet_ample {
        return Ok(cert);
    }
    let everywhere = a.all_points.as_deref().map(|why| Assumption::new("all-points", why, None));
    Ok(certify_jet_ample(&[cert], a.k, everywhere)?)
}

fn parse_range(s: &str) -> CliResult<(i64, i64)> {
    let bad = || Failure::parse(format!("bad range {s:?}, expected A..B"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn surface_table(a: TableArgs) -> CliResult<i32> {
    let (lo, hi) = parse_range(&a.ell)?;
    let rows = table(lo..=hi, a.s)?;
    match a.format {
        TableFormat::Csv => emit(a.common.output.as_deref(), &table_csv(&rows))?,
        TableFormat::Json => emit_json(
            a.common.output.as_deref(),
            &json!({"schema": SCHEMA, "command": "surface-table", "seed": a.common.seed, "s": a.s, "rows": rows}),
        )?,
    }
    Ok(0)
}

fn oracle(a: OracleArgs) -> CliResult<i32> {
    let lim = limits(&a.common)?;
    let (t, listed) = load(&a.input)?;
    let vertex = resolve_point(&a.point, &t, &listed)?;
    let p = EvaluationPoint::identity(vertex);
    let kind = if a.infinitesimal { ValuationKind::Infinitesimal } else { ValuationKind::Flag };
    let jets: Vec<Value> = (0..=a.k)
        .map(|k| Ok(json!({"k": k, "separates": jet_oracle_fixed_point(&t, &p, k)?})))
        .collect::<Result<_, Error>>()?;
    let report = random_section_oracle(&t, &p, kind, a.kmax, a.samples, a.common.seed, lim)?;
    let doc = json!({
        "schema": SCHEMA,
        "command": "oracle",
        "seed": a.common.seed,
        "cap": lim.cap,
        "valuation": kind_name(kind),
        "kmax": a.kmax,
        "exact": true,
        "point": p.label(),
        "jets": jets,
        "random_sections": report,
    });
    emit_json(a.common.output.as_deref(), &doc)?;
    Ok(0)
}

fn verify_certificate(a: VerifyArgs) -> CliResult<i32> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", a.input.display())))?;
    let cert: Certificate =
        serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", a.input.display())))?;
    let v = verify(&cert)?;
    // The stored text must also be the canonical serialization.
    let canonical = serde_json::to_string_pretty(&cert).map_err(Error::from)?;
    let byte_identical = text.trim_end() == canonical;
    let ok = v.ok && byte_identical;
    emit_json(
        a.output.as_deref(),
        &json!({
            "schema": SCHEMA,
            "command": "verify-certificate",
            "ok": ok,
            "canonical_serialization": byte_identical,
            "mismatches": v.mismatches,
        }),
    )?;
    Ok(if ok { 0 } else { 1 })
}
