use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jacobi_lusin::area::{area_integral, g_function, ConeGrid};
use jacobi_lusin::jacobi::{JacobiParams, SpectralTruncation};
use jacobi_lusin::par::init_threads_from_env;
use jacobi_lusin::poisson::{kernel_grid, DerivativeSpec, Flavor};
use jacobi_lusin::upsilon::{upsilon, UpsilonSpec, DEFAULT_NPTS};
use jacobi_lusin::verify::{full_run_jobs, run_jobs, run_suite, GammaChoice, Suite, Verdict, VerificationReport, VerifyConfig};
use jacobi_lusin::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_VIOLATED: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "jacobi-lusin", version, about = "Jacobi-Poisson kernels, Lusin area integrals and checks of their kernel estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate H_t or one of its derivatives on a (theta, phi, t) grid.
    Kernel(KernelArgs),
    /// Evaluate the majorant Upsilon_{W,s} on a (theta, phi, t) grid.
    Upsilon(UpsilonArgs),
    /// Apply the conical square function to f = sum c_n P_n.
    Area(SquareArgs),
    /// Apply the vertical square function to f = sum c_n P_n.
    Gfun(SquareArgs),
    /// Run one verification suite, or `all`.
    Verify(VerifyArgs),
    /// Run one suite over a grid of (alpha, beta) and (M, N).
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    beta: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<JacobiParams, Error> {
        JacobiParams::new(self.alpha, self.beta)
    }
}

#[derive(Args, Clone)]
struct OrderArgs {
    /// Order of the t-derivative.
    #[arg(long = "M", default_value_t = 1)]
    m: u32,
    /// Order of the theta-derivative (delta^N or D^N).
    #[arg(long = "N", default_value_t = 0)]
    n: u32,
    /// delta or D.
    #[arg(long, default_value = "delta")]
    flavor: String,
}

impl OrderArgs {
    fn spec(&self) -> Result<DerivativeSpec, Error> {
        Ok(DerivativeSpec::new(self.m, self.n, self.flavor.parse::<Flavor>()?))
    }
}

#[derive(Args, Clone)]
struct ConeArgs {
    /// t-panels of the cone quadrature.
    #[arg(long)]
    panels: Option<usize>,
    /// Gauss nodes per t-panel.
    #[arg(long)]
    t_nodes: Option<usize>,
    /// eta-quadrature level per cone slice.
    #[arg(long)]
    eta_nodes: Option<usize>,
}

impl ConeArgs {
    fn grid(&self, base: ConeGrid) -> Result<ConeGrid, Error> {
        let g = ConeGrid {
            panels: self.panels.unwrap_or(base.panels),
            t_nodes: self.t_nodes.unwrap_or(base.t_nodes),
            eta_nodes: self.eta_nodes.unwrap_or(base.eta_nodes),
            ..base
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// t-derivative order.
    #[arg(long = "M", default_value_t = 0)]
    m: u32,
    /// theta-derivative order.
    #[arg(long = "N", default_value_t = 0)]
    n: u32,
    /// Extra phi-derivative (0 or 1).
    #[arg(long = "L", default_value_t = 0)]
    l: u32,
    /// Extra theta-derivative (0 or 1).
    #[arg(long = "P", default_value_t = 0)]
    p: u32,
    #[arg(long, default_value = "delta")]
    flavor: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    phi: Vec<f64>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct UpsilonArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long = "W", default_value_t = 2.0)]
    w: f64,
    #[arg(long = "s", default_value_t = 0.0)]
    s: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    phi: Vec<f64>,
    /// Nodes of the (u, v) quadrature.
    #[arg(long, default_value_t = DEFAULT_NPTS)]
    npts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SquareArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    order: OrderArgs,
    /// Coefficients c_0, c_1, ... of f in the normalized Jacobi basis.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    coeffs: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    theta: Vec<f64>,
    #[command(flatten)]
    cone: ConeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VerifyOptions {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Hoelder exponent; defaults to 0.9 min(1/2, min(alpha, beta) + 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Admit gamma outside the proven range; reports carry the flag.
    #[arg(long)]
    exploratory: bool,
    /// Majorant weight exponent; defaults to 2M + 2N.
    #[arg(long = "W")]
    w: Option<f64>,
    /// Majorant separation exponent; defaults to L + P.
    #[arg(long = "s")]
    s: Option<f64>,
    /// Points per axis of the per-stratum (theta, phi) grids.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Samples of the pointwise suites.
    #[arg(long)]
    samples: Option<usize>,
    /// Small samples for smoke runs.
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    cone: ConeArgs,
    /// JSON-lines report file, appended to.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite id (growth, smooth-theta, smooth-phi, Ht1, Ht1eta, qeta, finbridge,
    /// longtime, omega, omegadiff, omegaprime, upstilde, estxyxi, l2) or `all`.
    suite: String,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    order: OrderArgs,
    #[command(flatten)]
    opts: VerifyOptions,
}

#[derive(Args)]
struct SweepArgs {
    /// Suite id.
    #[arg(long)]
    suite: String,
    #[arg(long, value_delimiter = ',', default_value = "0.5", allow_hyphen_values = true)]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5", allow_hyphen_values = true)]
    betas: Vec<f64>,
    /// (M, N) pairs as `M:N`, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1:0")]
    orders: Vec<String>,
    /// Flavors, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "delta")]
    flavors: Vec<String>,
    #[command(flatten)]
    opts: VerifyOptions,
}

/// Failure of a command, mapped onto the exit-code contract.
enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams { .. } | Error::Domain(_) | Error::InvalidSpec(_) | Error::InvalidGamma { .. } | Error::Hypothesis(_) | Error::InvalidPiIndex(_) | Error::Ordering { .. } | Error::Coincidence(_) | Error::EndpointProximity { .. } => Failure::Config(e.to_string()),
            Error::NonConvergence { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// CSV rows `theta,phi,t,value` to `out` or stdout.
fn write_grid(out: Option<&Path>, rows: &[(f64, Option<f64>, Option<f64>, f64)]) -> Result<(), Failure> {
    let mut text = String::from("theta,phi,t,value\n");
    let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for &(th, ph, t, v) in rows {
        text.push_str(&format!("{th},{},{},{v}\n", cell(ph), cell(t)));
    }
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

/// Appends one JSON record per report and echoes it to stdout.
fn emit_reports(out: Option<&Path>, reports: &[VerificationReport]) -> Result<(), Failure> {
    let mut lines = String::new();
    for r in reports {
        lines.push_str(&serde_json::to_string(r).map_err(|e| Failure::Io(e.to_string()))?);
        lines.push('\n');
    }
    print!("{lines}");
    if let Some(p) = out {
        let mut f = OpenOptions::new().create(true).append(true).open(p).map_err(|e| io_failure(p, e))?;
        f.write_all(lines.as_bytes()).map_err(|e| io_failure(p, e))?;
    }
    Ok(())
}

fn run_kernel(a: &KernelArgs) -> Result<(), Failure> {
    let p = a.params.params()?;
    let d = DerivativeSpec::new(a.m, a.n, a.flavor.parse()?).with_lp(a.l, a.p)?;
    let tr = SpectralTruncation::for_order(d.total_order());
    let mut rows = Vec::new();
    for &t in &a.t {
        let g = kernel_grid(&d, t, &a.theta, &a.phi, &p, &tr)?;
        for (i, &th) in a.theta.iter().enumerate() {
            for (j, &ph) in a.phi.iter().enumerate() {
                rows.push((th, Some(ph), Some(t), g.get(i, j)));
            }
        }
    }
    write_grid(a.out.as_deref(), &rows)
}

fn run_upsilon(a: &UpsilonArgs) -> Result<(), Failure> {
    let spec = UpsilonSpec::new(a.w, a.s, a.params.params()?);
    let mut rows = Vec::new();
    for &t in &a.t {
        for &th in &a.theta {
            for &ph in &a.phi {
                rows.push((th, Some(ph), Some(t), upsilon(&spec, t, th, ph, a.npts)?));
            }
        }
    }
    write_grid(a.out.as_deref(), &rows)
}

fn run_square(a: &SquareArgs, vertical: bool) -> Result<(), Failure> {
    let p = a.params.params()?;
    let d = a.order.spec()?;
    d.require_area()?;
    let cg = a.cone.grid(ConeGrid::default())?;
    let tr = SpectralTruncation::for_order(d.total_order());
    let mut rows = Vec::new();
    for &th in &a.theta {
        let v = if vertical { g_function(&a.coeffs, &d, th, &p)? } else { area_integral(&a.coeffs, &d, th, &p, &cg, &tr)? };
        rows.push((th, None, None, v));
    }
    write_grid(a.out.as_deref(), &rows)
}

fn verify_config(params: JacobiParams, spec: DerivativeSpec, o: &VerifyOptions) -> Result<VerifyConfig, Failure> {
    let mut cfg = VerifyConfig::new(params, spec, o.seed);
    if o.quick {
        cfg = cfg.quick();
    }
    cfg.gamma = match (o.gamma, o.exploratory) {
        (Some(g), true) => GammaChoice::exploratory(g)?,
        (Some(g), false) => GammaChoice::theorem(g, &params)?,
        (None, _) => GammaChoice::default_for(&params),
    };
    if o.w.is_some() || o.s.is_some() {
        let (w, s) = cfg.majorant();
        cfg.majorant = Some((o.w.unwrap_or(w), o.s.unwrap_or(s)));
    }
    if let Some(k) = o.grid_points {
        if k < 2 {
            return Err(Failure::Config("--grid-points must be at least 2".into()));
        }
        cfg.grid_points = k;
    }
    if let Some(n) = o.samples {
        if n == 0 {
            return Err(Failure::Config("--samples must be positive".into()));
        }
        cfg.pointwise_samples = n;
    }
    cfg.cone = o.cone.grid(cfg.cone)?;
    Ok(cfg)
}

fn parse_suite(id: &str) -> Result<Suite, Failure> {
    Suite::parse(id).ok_or_else(|| Failure::Config(format!("unknown suite `{id}`")))
}

/// Writes every finished report, then maps the worst outcome to an exit code.
fn finish(out: Option<&Path>, results: Vec<Result<VerificationReport, Error>>) -> Result<u8, Failure> {
    let mut reports = Vec::new();
    let mut first_error = None;
    for r in results {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => {
                eprintln!("error: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    emit_reports(out, &reports)?;
    if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        return Ok(EXIT_VIOLATED);
    }
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(0),
    }
}

fn run_verify(a: &VerifyArgs) -> Result<u8, Failure> {
    let cfg = verify_config(a.params.params()?, a.order.spec()?, &a.opts)?;
    let results = if a.suite.eq_ignore_ascii_case("all") {
        run_jobs(&full_run_jobs(&cfg))
    } else {
        vec![run_suite(parse_suite(&a.suite)?, &cfg)]
    };
    finish(a.opts.out.as_deref(), results)
}

fn parse_order(s: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::Config(format!("order `{s}` is not of the form M:N"));
    let (m, n) = s.split_once(':').ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
}

fn run_sweep(a: &SweepArgs) -> Result<u8, Failure> {
    let suite = parse_suite(&a.suite)?;
    let mut jobs = Vec::new();
    for &alpha in &a.alphas {
        for &beta in &a.betas {
            let p = JacobiParams::new(alpha, beta)?;
            for o in &a.orders {
                let (m, n) = parse_order(o)?;
                for f in &a.flavors {
                    let spec = DerivativeSpec::new(m, n, f.parse()?);
                    jobs.push((suite, verify_config(p, spec, &a.opts)?));
                }
            }
        }
    }
    finish(a.opts.out.as_deref(), run_jobs(&jobs))
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Kernel(a) => run_kernel(a).map(|_| 0),
        Command::Upsilon(a) => run_upsilon(a).map(|_| 0),
        Command::Area(a) => run_square(a, false).map(|_| 0),
        Command::Gfun(a) => run_square(a, true).map(|_| 0),
        Command::Verify(a) => run_verify(a),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn main() -> ExitCode {
    init_threads_from_env();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(verdict: &str) -> VerificationReport {
        let line = format!(
            r#"{{"suite":"omega","alpha":0.5,"beta":0.5,"M":1,"N":0,"flavor":"none","gamma":null,"measuredC":1e-3,"refinementDelta":0.0,"samples":1,"verdict":"{verdict}","seed":7,"runtimeMs":0,"version":"0"}}"#
        );
        serde_json::from_str(&line).unwrap()
    }

    #[test]
    fn exit_codes_follow_the_worst_outcome() {
        assert!(matches!(finish(None, vec![Ok(report("stable"))]), Ok(0)));
        assert!(matches!(finish(None, vec![Ok(report("unstable"))]), Ok(0)));
        assert!(matches!(finish(None, vec![Ok(report("stable")), Ok(report("violated"))]), Ok(EXIT_VIOLATED)));
        let numerical = Error::NonConvergence { t: 1e-9, n: 10 };
        assert!(matches!(finish(None, vec![Ok(report("stable")), Err(numerical)]), Err(Failure::Numerical(_))));
        assert!(matches!(finish(None, vec![Err(Error::Hypothesis("x".into()))]), Err(Failure::Config(_))));
    }

    #[test]
    fn orders_parse_as_m_colon_n() {
        assert!(matches!(parse_order("2:1"), Ok((2, 1))));
        assert!(parse_order("21").is_err());
    }
}
