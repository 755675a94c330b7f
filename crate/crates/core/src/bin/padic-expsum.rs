use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use padic_expsum::analysis::{
    decay_fit, sigma_fg, sigma_onevar, SigmaCertificate, Verdict, DEFAULT_DEPTH,
    DEFAULT_SLOPE_TOLERANCE,
};
use padic_expsum::enumerate::{brute_points, lift_points, PointSet, DEFAULT_BUDGET};
use padic_expsum::expsum::{sum_curve, sum_onevar, PhaseSpec, SumRecord, SUM_CSV_HEADER};
use padic_expsum::hensel::{hensel_param, CurvePoint};
use padic_expsum::padic::pow_p;
use padic_expsum::{round_sig, BiPoly, Error};

#[derive(Parser)]
#[command(name = "padic-expsum", version, about = "Exponential sums along plane curves over Z_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the solutions of f = 0 mod p^m
    Points(CommonArgs),
    /// Evaluate S_m for every m in the range
    Sum(CommonArgs),
    /// Compute sigma, sweep m and fit the decay exponent
    Verify(CommonArgs),
    /// Certify sigma_f(g) with witness points
    Sigma(CommonArgs),
    /// Print the branch series through a point
    Param(ParamArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Prime p
    #[arg(long)]
    p: Option<u64>,
    /// Level m, or an inclusive range a..b
    #[arg(long)]
    m: Option<String>,
    /// Unit u in z = u / p^m
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i64>,
    /// Curve f(x, y), or f(x) with --onevar
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// Phase g(x, y)
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// Sum over x mod p^m of Psi(z f(x)) instead of a curve sum
    #[arg(long)]
    onevar: bool,
    /// Point enumeration; auto uses the lifting tree
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Search depth for sigma
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on p^(2m) for brute-force scans and p^m for one-variable sums
    #[arg(long)]
    budget: Option<u128>,
    /// File of `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Anchor point x,y
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    /// Highest power of t
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Brute,
    Lift,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// Everything a run depends on, after merging the config file and flags.
#[derive(Debug, Clone, Serialize)]
struct Config {
    command: &'static str,
    p: u64,
    m: String,
    #[serde(skip)]
    m_lo: u32,
    #[serde(skip)]
    m_hi: u32,
    u: i64,
    f: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<String>,
    onevar: bool,
    method: MethodArg,
    depth: u32,
    format: Format,
    budget: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(skip)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(Error::ConstantOnCurve) => 3,
            Failure::Lib(Error::Inconclusive(_) | Error::Precision(_) | Error::DepthExhausted { .. }) => 4,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(s) => s.clone(),
            Failure::Lib(e) => e.to_string(),
            Failure::Io(e) => format!("i/o error: {e}"),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Run<u8> {
    match cli.command {
        Command::Points(a) => cmd_points(&resolve("points", &a, None, None)?),
        Command::Sum(a) => cmd_sum(&resolve("sum", &a, None, None)?),
        Command::Verify(a) => cmd_verify(&resolve("verify", &a, None, None)?),
        Command::Sigma(a) => cmd_sigma(&resolve("sigma", &a, None, None)?),
        Command::Param(a) => cmd_param(&resolve("param", &a.common, a.at, a.order)?),
    }
}

fn read_config_file(path: &PathBuf) -> Run<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("config line {}: expected key = value", n + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Run<T> {
    v.parse()
        .map_err(|_| Failure::Usage(format!("invalid value for {key}: {v:?}")))
}

fn parse_range(s: &str) -> Run<(u32, u32)> {
    let bad = || Failure::Usage(format!("invalid level range {s:?}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(Failure::Usage(format!("level range {s:?} is empty or starts at 0")));
    }
    Ok((lo, hi))
}

fn resolve(
    command: &'static str,
    a: &CommonArgs,
    at: Option<String>,
    order: Option<usize>,
) -> Run<Config> {
    let mut a = a.clone();
    let (mut at, mut order) = (at, order);
    if let Some(path) = &a.config {
        for (k, v) in read_config_file(path)? {
            match k.as_str() {
                "p" => a.p = a.p.or(Some(parse_value(&k, &v)?)),
                "m" => a.m = a.m.or(Some(v)),
                "u" => a.u = a.u.or(Some(parse_value(&k, &v)?)),
                "f" => a.f = a.f.or(Some(v)),
                "g" => a.g = a.g.or(Some(v)),
                "onevar" => a.onevar |= parse_value::<bool>(&k, &v)?,
                "method" => {
                    if a.method.is_none() {
                        a.method = Some(MethodArg::from_str(&v, true).map_err(Failure::Usage)?);
                    }
                }
                "depth" => a.depth = a.depth.or(Some(parse_value(&k, &v)?)),
                "format" => {
                    if a.format.is_none() {
                        a.format = Some(Format::from_str(&v, true).map_err(Failure::Usage)?);
                    }
                }
                "out" => a.out = a.out.or(Some(PathBuf::from(v))),
                "budget" => a.budget = a.budget.or(Some(parse_value(&k, &v)?)),
                "at" => at = at.or(Some(v)),
                "order" => order = order.or(Some(parse_value(&k, &v)?)),
                "command" => {}
                _ => return Err(Failure::Usage(format!("unknown config key {k:?}"))),
            }
        }
    }
    let p = a.p.ok_or_else(|| Failure::Usage("--p is required".into()))?;
    let f_text = a.f.ok_or_else(|| Failure::Usage("--f is required".into()))?;
    let f: BiPoly = f_text.parse()?;
    let g = match (&a.g, a.onevar) {
        (Some(_), true) => return Err(Failure::Usage("--g cannot be combined with --onevar".into())),
        (Some(t), false) => Some(t.parse::<BiPoly>()?.to_string()),
        (None, true) => None,
        (None, false) if matches!(command, "sum" | "verify" | "sigma") => {
            return Err(Failure::Usage("--g is required (or pass --onevar)".into()))
        }
        (None, false) => None,
    };
    if a.onevar && !f.is_univariate_x() {
        return Err(Failure::Usage("--onevar needs f to be a polynomial in x only".into()));
    }
    let default_m = match command {
        "param" => "20",
        "sigma" => "1",
        _ => "",
    };
    let m_text = a.m.unwrap_or_else(|| default_m.to_string());
    if m_text.is_empty() {
        return Err(Failure::Usage("--m is required".into()));
    }
    let (m_lo, m_hi) = parse_range(&m_text)?;
    if matches!(command, "points" | "param") && m_lo != m_hi {
        return Err(Failure::Usage(format!("{command} takes a single level, got {m_text}")));
    }
    if command == "param" {
        if at.is_none() {
            return Err(Failure::Usage("--at x,y is required".into()));
        }
        order = Some(order.unwrap_or(10));
    }
    let u = a.u.unwrap_or(1);
    if u.rem_euclid(p as i64) == 0 {
        return Err(Failure::Usage(format!("u = {u} is not coprime to p = {p}")));
    }
    Ok(Config {
        command,
        p,
        m: if m_lo == m_hi { m_lo.to_string() } else { format!("{m_lo}..{m_hi}") },
        m_lo,
        m_hi,
        u,
        f: f.to_string(),
        g,
        onevar: a.onevar,
        method: a.method.unwrap_or(MethodArg::Auto),
        depth: a.depth.unwrap_or(DEFAULT_DEPTH),
        format: a.format.unwrap_or(Format::Csv),
        budget: a.budget.unwrap_or(DEFAULT_BUDGET),
        at,
        order,
        out: a.out,
    })
}

impl Config {
    fn f(&self) -> BiPoly {
        self.f.parse().expect("canonical")
    }

    fn g(&self) -> BiPoly {
        match &self.g {
            Some(g) => g.parse().expect("canonical"),
            None => BiPoly::y(),
        }
    }

    fn writer(&self) -> Run<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    /// `# key = value` lines that read back as a config file once the `# ` is stripped.
    fn metadata(&self) -> String {
        let value = serde_json::to_value(self).expect("serializable");
        let mut out = String::new();
        for (k, v) in value.as_object().expect("object") {
            let v = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out
    }

    fn points(&self, f: &BiPoly, m: u32) -> Run<PointSet> {
        Ok(match self.method {
            MethodArg::Brute => brute_points(f, self.p, m, self.budget)?,
            MethodArg::Lift | MethodArg::Auto => lift_points(f, self.p, m)?,
        })
    }

    fn sum_at(&self, m: u32) -> Run<SumRecord> {
        let phase = PhaseSpec::new(self.p, m, self.u)?;
        let f = self.f();
        if self.onevar {
            let n = phase.modulus() as u128;
            if n > self.budget {
                return Err(Error::Budget {
                    what: "one-variable sum p^m",
                    needed: n,
                    limit: self.budget,
                }
                .into());
            }
            return Ok(sum_onevar(&f, &phase)?);
        }
        let pts = self.points(&f, m)?;
        Ok(sum_curve(&f, &self.g(), &phase, &pts)?)
    }

    fn sigma(&self) -> Run<SigmaCertificate> {
        Ok(if self.onevar {
            sigma_onevar(&self.f(), self.p, self.depth)?
        } else {
            sigma_fg(&self.f(), &self.g(), self.p, self.depth)?
        })
    }
}

fn cmd_points(cfg: &Config) -> Run<u8> {
    let f = if cfg.onevar { &BiPoly::y() - &cfg.f() } else { cfg.f() };
    let pts = cfg.points(&f, cfg.m_hi)?;
    let mut w = cfg.writer()?;
    match cfg.format {
        Format::Csv => {
            let text = pts.to_text(&f);
            let (header, body) = text.split_once('\n').unwrap_or((&text, ""));
            writeln!(w, "{header}")?;
            w.write_all(cfg.metadata().as_bytes())?;
            w.write_all(body.as_bytes())?;
        }
        Format::Json => {
            let v = json!({
                "config": cfg,
                "p": pts.p(),
                "m": pts.m(),
                "count": pts.len(),
                "points": pts.points(),
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    w.flush()?;
    eprintln!("{} points mod {}^{}", pts.len(), cfg.p, cfg.m_hi);
    Ok(0)
}

fn cmd_sum(cfg: &Config) -> Run<u8> {
    let mut w = cfg.writer()?;
    match cfg.format {
        Format::Csv => {
            w.write_all(cfg.metadata().as_bytes())?;
            writeln!(w, "{SUM_CSV_HEADER}")?;
        }
        Format::Json => writeln!(w, "{}", json!({ "config": cfg }))?,
    }
    w.flush()?;
    for m in cfg.m_lo..=cfg.m_hi {
        let rec = cfg.sum_at(m)?;
        match cfg.format {
            Format::Csv => writeln!(w, "{}", rec.to_csv_row())?,
            Format::Json => writeln!(w, "{}", serde_json::to_string(&rec)?)?,
        }
        w.flush()?;
    }
    Ok(0)
}

fn cmd_verify(cfg: &Config) -> Run<u8> {
    let cert = cfg.sigma()?;
    let records = (cfg.m_lo..=cfg.m_hi)
        .map(|m| cfg.sum_at(m))
        .collect::<Run<Vec<_>>>()?;
    let report = decay_fit(&records, cert.sigma, DEFAULT_SLOPE_TOLERANCE)?;
    let mut w = cfg.writer()?;
    match cfg.format {
        Format::Csv => {
            w.write_all(cfg.metadata().as_bytes())?;
            let slope = report.fitted_slope.map(round_sig::fmt).unwrap_or_else(|| "none".into());
            writeln!(w, "# sigma = {}", cert.sigma)?;
            writeln!(w, "# sigma_confidence = {}", json!(cert.confidence).as_str().unwrap_or(""))?;
            writeln!(w, "# predicted_exponent = {}", round_sig::fmt(report.predicted_exponent))?;
            writeln!(w, "# fitted_slope = {slope}")?;
            writeln!(w, "# a_estimate = {}", round_sig::fmt(report.a_estimate))?;
            writeln!(w, "# verdict = {}", verdict_str(report.verdict))?;
            w.write_all(report.to_csv().as_bytes())?;
        }
        Format::Json => {
            let v = json!({ "config": cfg, "sigma": cert, "report": report });
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    w.flush()?;
    let slope = report.fitted_slope.map(round_sig::fmt);
    eprintln!(
        "sigma = {}, predicted exponent {}, fitted slope {}, {}{}",
        cert.sigma,
        round_sig::fmt(report.predicted_exponent),
        slope.as_deref().unwrap_or("n/a"),
        verdict_str(report.verdict),
        if report.trivially_zero { " (all sums vanish)" } else { "" }
    );
    Ok(match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

fn short_coords(pt: &CurvePoint, p: u64, k: u32) -> (BigInt, BigInt) {
    let n = pow_p(p, k);
    let sym = |v: &BigInt| {
        let r = ((v % &n) + &n) % &n;
        if &r * 2 > n {
            r - &n
        } else {
            r
        }
    };
    (sym(pt.x().value()), sym(pt.y().value()))
}

fn cmd_sigma(cfg: &Config) -> Run<u8> {
    let cert = cfg.sigma()?;
    let mut w = cfg.writer()?;
    match cfg.format {
        Format::Csv => {
            w.write_all(cfg.metadata().as_bytes())?;
            writeln!(w, "# sigma = {}", cert.sigma)?;
            writeln!(w, "# confidence = {}", json!(cert.confidence).as_str().unwrap_or(""))?;
            for note in &cert.notes {
                writeln!(w, "# note = {note}")?;
            }
            writeln!(w, "x,y,mu,v_c0,chart_scale,critical")?;
            for wit in &cert.witnesses {
                let (x, y) = short_coords(&wit.point, cfg.p, cfg.depth);
                writeln!(
                    w,
                    "{x},{y},{},{},{},{}",
                    wit.mu, wit.v_c0, wit.chart_scale, wit.critical
                )?;
            }
        }
        Format::Json => {
            let v = json!({ "config": cfg, "certificate": cert });
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    w.flush()?;
    let witness = cert
        .witnesses
        .iter()
        .find(|x| x.mu == cert.sigma)
        .map(|x| {
            let (a, b) = short_coords(&x.point, cfg.p, cfg.depth);
            format!(", witness ({a}, {b}) mod {}^{}", cfg.p, cfg.depth)
        })
        .unwrap_or_default();
    eprintln!(
        "sigma = {} ({}){witness}",
        cert.sigma,
        json!(cert.confidence).as_str().unwrap_or("")
    );
    Ok(0)
}

fn cmd_param(cfg: &Config) -> Run<u8> {
    let f = if cfg.onevar { &BiPoly::y() - &cfg.f() } else { cfg.f() };
    let at = cfg.at.as_deref().expect("resolved");
    let bad = || Failure::Usage(format!("--at expects x,y integers, got {at:?}"));
    let (xs, ys) = at.split_once(',').ok_or_else(bad)?;
    let x: BigInt = xs.trim().parse().map_err(|_| bad())?;
    let y: BigInt = ys.trim().parse().map_err(|_| bad())?;
    let precision = cfg.m_hi;
    let anchor = CurvePoint::new(&f, x, y, cfg.p, 1)?;
    let branch = hensel_param(&f, &anchor, cfg.order.expect("resolved"), precision)?;
    let pretty = branch.series.to_pretty();
    let orientation = json!(branch.orientation);
    let mut w = cfg.writer()?;
    match cfg.format {
        Format::Csv => {
            w.write_all(cfg.metadata().as_bytes())?;
            writeln!(w, "# orientation = {}", orientation.as_str().unwrap_or(""))?;
            writeln!(w, "{pretty}")?;
        }
        Format::Json => {
            let coeffs: Vec<String> = branch
                .series
                .signed_coeffs()
                .iter()
                .map(|c| c.to_string())
                .collect();
            let v = json!({
                "config": cfg,
                "anchor": branch.anchor,
                "orientation": orientation,
                "series": pretty,
                "coefficients": coeffs,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    w.flush()?;
    Ok(0)
}
