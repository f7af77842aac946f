//! Command-line front end: simulation, exact moment tables, correlation
//! phase-transition datasets (including the limit-curve figure), range
//! diagnostics, CLT checks, regime sweeps, and a self-verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 domain
//! or I/O error. Every output embeds the tool version, the resolved
//! parameters, the seed, and the command line, so outputs are reproducible
//! byte-for-byte from their own headers.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use erws::asymptotics::{
    const_p, const_q, const_r, lil_envelope, predicted_rho, rho_s2_sigma_limit,
};
use erws::core_model::ModelParams;
use erws::exact_moments::{
    closed_e_s2, covariance_suite, mean_s, mean_sigma, moment_table, moment_tables_at,
    partial_sum_identity_check, rho_s2_sigma_from, rho_s_sigma_from,
};
use erws::montecarlo::{clt_test, estimate, run_ensemble, EnsembleSpec};
use erws::oracle::{exact_joint_law, exact_moment};
use erws::range_analysis::{lemma31_case_i, lemma31_case_ii, range_scaling_ensemble, range_series};
use erws::simulator::{checkpoint_schedule, run};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "erws",
    version,
    about = "Elephant random walk with stops: simulation, exact moments, and phase-transition diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one trajectory and emit its checkpoint series.
    Simulate(SimulateArgs),
    /// Exact moment table at geometric checkpoints up to n.
    Moments(MomentsArgs),
    /// Exact finite-n correlations next to their predicted asymptotes.
    Corr(CorrArgs),
    /// Limit curve of the squared-walk/move-count correlation over the
    /// memory-parameter grid, with an exact finite-n overlay.
    Figure1(Figure1Args),
    /// Range diagnostics: ensemble scaling or the deterministic harness.
    Range(RangeArgs),
    /// Kolmogorov–Smirnov test of the Gaussian limit law.
    Clt(CltArgs),
    /// Regime grid over the memory parameters.
    Sweep(SweepArgs),
    /// Self-verification against the exact small-n oracle and identities.
    Verify(VerifyArgs),
}

/// Model parameters from flags or a JSON config; flags win over config.
#[derive(Args, Clone, Default)]
struct ParamArgs {
    /// Copy probability p (use with --q, and optionally --r).
    #[arg(long)]
    p: Option<f64>,
    /// Flip probability q.
    #[arg(long)]
    q: Option<f64>,
    /// Stop probability r (defaults to 1 - p - q).
    #[arg(long)]
    r: Option<f64>,
    /// Memory parameter a = p - q (use with --b).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Memory parameter b = 1 - r = p + q.
    #[arg(long)]
    b: Option<f64>,
    /// First-step up probability (default 0.5).
    #[arg(long)]
    s: Option<f64>,
    /// JSON config file with any of the keys p, q, r, a, b, s.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: u64,
    /// Append the two exact correlation columns (undefined at b = 1).
    #[arg(long)]
    corr: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CorrArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct Figure1Args {
    /// Move-probability values, one curve each.
    #[arg(long = "b", num_args = 1.., value_delimiter = ',', default_values_t = [0.3, 0.6, 0.9])]
    bs: Vec<f64>,
    /// Horizon of the exact finite-n overlay.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// Number of a-grid points per curve.
    #[arg(long, default_value_t = 201)]
    grid: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct RangeArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value_t = 1000)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Run the deterministic staircase/envelope harness instead of an
    /// ensemble; exits 1 if the harness fails.
    #[arg(long)]
    harness: bool,
    /// Horizon for the deterministic harness.
    #[arg(long, default_value_t = 1_000_000)]
    harness_n: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CltArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value_t = 1000)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    parallelism: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Number of b values on (0, 1).
    #[arg(long, default_value_t = 9)]
    b_steps: usize,
    /// Number of a values on [-b, b] per b.
    #[arg(long, default_value_t = 21)]
    a_steps: usize,
    /// Horizon for the exact finite-n correlations.
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Small-n oracle checks only (fast).
    #[arg(long)]
    quick: bool,
    /// Inject an absolute perturbation into one engine value; a nonzero
    /// perturbation must be detected as a failure (sensitivity check).
    #[arg(long, default_value_t = 0.0)]
    perturb: f64,
}

enum CliFail {
    Usage(String),
    Domain(String),
}

impl From<erws::ErwsError> for CliFail {
    fn from(e: erws::ErwsError) -> Self {
        CliFail::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliFail {
    fn from(e: std::io::Error) -> Self {
        CliFail::Domain(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliFail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliFail::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, CliFail> {
    match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args).map(|_| true),
        Cmd::Moments(args) => cmd_moments(args).map(|_| true),
        Cmd::Corr(args) => cmd_corr(args).map(|_| true),
        Cmd::Figure1(args) => cmd_figure1(args).map(|_| true),
        Cmd::Range(args) => cmd_range(args),
        Cmd::Clt(args) => cmd_clt(args).map(|_| true),
        Cmd::Sweep(args) => cmd_sweep(args).map(|_| true),
        Cmd::Verify(args) => cmd_verify(args),
    }
}

impl ParamArgs {
    fn resolve(&self) -> Result<ModelParams<f64>, CliFail> {
        let mut v: [Option<f64>; 6] = [self.p, self.q, self.r, self.a, self.b, self.s];
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let cfg: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliFail::Usage(format!("bad config json: {e}")))?;
            for (i, key) in ["p", "q", "r", "a", "b", "s"].iter().enumerate() {
                if v[i].is_none() {
                    if let Some(x) = cfg.get(*key) {
                        v[i] = Some(x.as_f64().ok_or_else(|| {
                            CliFail::Usage(format!("config key {key} is not a number"))
                        })?);
                    }
                }
            }
        }
        let [p, q, r, a, b, s] = v;
        let s = s.unwrap_or(0.5);
        let params = match (p, q, a, b) {
            (Some(p), Some(q), None, None) => {
                ModelParams::new(p, q, r.unwrap_or(1.0 - p - q), s)?
            }
            (None, None, Some(a), Some(b)) => ModelParams::from_ab(a, b, s)?,
            (None, None, Some(_), None) => {
                return Err(CliFail::Usage("--a requires --b".into()))
            }
            (None, None, None, Some(_)) => {
                return Err(CliFail::Usage("--b requires --a".into()))
            }
            (Some(_), None, ..) | (None, Some(_), ..) => {
                return Err(CliFail::Usage("--p requires --q".into()))
            }
            (None, None, None, None) => {
                return Err(CliFail::Usage(
                    "missing parameters: give --a/--b or --p/--q (or --config)".into(),
                ))
            }
            _ => {
                return Err(CliFail::Usage(
                    "give either --p/--q/--r or --a/--b, not both".into(),
                ))
            }
        };
        Ok(params)
    }
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn params_json(params: &ModelParams<f64>) -> serde_json::Value {
    json!({
        "p": params.p(), "q": params.q(), "r": params.r(), "s": params.s(),
        "a": params.a(), "b": params.b(), "regime": params.classify(),
    })
}

fn csv_header(params: Option<&ModelParams<f64>>, seed: Option<u64>) -> String {
    let mut h = format!("# erws {VERSION}\n# command: {}\n", command_line());
    if let Some(p) = params {
        let _ = writeln!(h, "# params: {}", params_json(p));
    }
    if let Some(s) = seed {
        let _ = writeln!(h, "# seed: {s}");
    }
    h
}

fn json_envelope(
    params: Option<&ModelParams<f64>>,
    seed: Option<u64>,
    data: serde_json::Value,
) -> String {
    let mut doc = json!({
        "version": VERSION,
        "command": command_line(),
        "data": data,
    });
    if let Some(p) = params {
        doc["params"] = params_json(p);
    }
    if let Some(s) = seed {
        doc["seed"] = json!(s);
    }
    format!("{:#}\n", doc)
}

fn emit(out: &OutArgs, content: &str) -> Result<(), CliFail> {
    match &out.out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

// ---------------------------------------------------------------- simulate

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliFail> {
    if args.n < 1 {
        return Err(CliFail::Usage("--n must be >= 1".into()));
    }
    let params = args.params.resolve()?;
    let summary = run(&params, args.n, args.seed);
    let content = match args.out.format {
        Format::Csv => {
            let mut c = csv_header(Some(&params), Some(args.seed));
            c.push_str("k,s_k,sigma_k,range_k\n");
            for cp in &summary.checkpoints {
                let _ = writeln!(c, "{},{},{},{}", cp.k, cp.s, cp.sigma, cp.range);
            }
            c
        }
        Format::Json => json_envelope(
            Some(&params),
            Some(args.seed),
            serde_json::to_value(&summary).expect("serializable"),
        ),
        Format::Svg => {
            let pts: Vec<(f64, f64)> = summary
                .checkpoints
                .iter()
                .map(|cp| (cp.k as f64, cp.s as f64))
                .collect();
            let series = [SvgSeries {
                label: "S_k".into(),
                color: "#1f77b4",
                points: pts,
            }];
            render_svg("trajectory", &csv_header(Some(&params), Some(args.seed)), &series)
        }
    };
    emit(&args.out, &content)
}

// ----------------------------------------------------------------- moments

fn cmd_moments(args: MomentsArgs) -> Result<(), CliFail> {
    if args.n < 1 {
        return Err(CliFail::Usage("--n must be >= 1".into()));
    }
    let params = args.params.resolve()?;
    if args.corr && params.b() == 1.0 {
        return Err(CliFail::Domain(
            "correlations are undefined at b = 1 (deterministic move count)".into(),
        ));
    }
    let ks = checkpoint_schedule(args.n);
    let tables = moment_tables_at(&params, &ks);

    let mut rows = Vec::with_capacity(tables.len());
    for t in &tables {
        let mut row = json!({
            "n": t.n,
            "e_s": t.e_s, "e_sigma": t.e_sigma, "e_s_sigma": t.e_s_sigma,
            "e_s2": t.e_s2, "e_sigma2": t.e_sigma2,
            "e_s2_sigma": t.e_s2_sigma, "e_s4": t.e_s4,
            "method": t.method,
        });
        // both correlations are undefined at n = 1 (Σ₁ is deterministic)
        if args.corr && t.n >= 2 {
            row["rho_s_sigma"] = json!(rho_s_sigma_from(&params, t).map_err(CliFail::from)?);
            row["rho_s2_sigma"] = json!(rho_s2_sigma_from(&params, t).map_err(CliFail::from)?);
        }
        rows.push(row);
    }

    let content = match args.out.format {
        Format::Json => json_envelope(Some(&params), None, json!(rows)),
        _ => {
            let mut c = csv_header(Some(&params), None);
            c.push_str("n,e_s,e_sigma,e_s_sigma,e_s2,e_sigma2,e_s2_sigma,e_s4,method");
            if args.corr {
                c.push_str(",rho_s_sigma,rho_s2_sigma");
            }
            c.push('\n');
            for (t, row) in tables.iter().zip(&rows) {
                let _ = write!(
                    c,
                    "{},{},{},{},{},{},{},{},{}",
                    t.n,
                    fmt_f(t.e_s),
                    fmt_f(t.e_sigma),
                    fmt_f(t.e_s_sigma),
                    fmt_f(t.e_s2),
                    fmt_f(t.e_sigma2),
                    fmt_f(t.e_s2_sigma),
                    fmt_f(t.e_s4),
                    t.method
                );
                if args.corr {
                    let _ = write!(
                        c,
                        ",{},{}",
                        row["rho_s_sigma"].as_f64().map(fmt_f).unwrap_or_default(),
                        row["rho_s2_sigma"].as_f64().map(fmt_f).unwrap_or_default()
                    );
                }
                c.push('\n');
            }
            c
        }
    };
    emit(&args.out, &content)
}

// -------------------------------------------------------------------- corr

fn cmd_corr(args: CorrArgs) -> Result<(), CliFail> {
    if args.n < 2 {
        return Err(CliFail::Usage("--n must be >= 2".into()));
    }
    let params = args.params.resolve()?;
    if params.b() == 1.0 {
        return Err(CliFail::Domain(
            "correlations are undefined at b = 1 (deterministic move count)".into(),
        ));
    }
    let ks: Vec<u64> = checkpoint_schedule(args.n).into_iter().filter(|&k| k >= 2).collect();
    let tables = moment_tables_at(&params, &ks);
    let limit = rho_s2_sigma_limit(&params).ok();

    let mut c = csv_header(Some(&params), None);
    c.push_str("n,rho_s_sigma,predicted_rho_s_sigma,rho_s2_sigma,limit_rho_s2_sigma\n");
    let mut rows = Vec::new();
    for t in &tables {
        let rho1 = rho_s_sigma_from(&params, t).map_err(CliFail::from)?;
        let pred = predicted_rho(&params, t.n).ok();
        let rho2 = rho_s2_sigma_from(&params, t).map_err(CliFail::from)?;
        let _ = writeln!(
            c,
            "{},{},{},{},{}",
            t.n,
            fmt_f(rho1),
            pred.map(fmt_f).unwrap_or_default(),
            fmt_f(rho2),
            limit.map(fmt_f).unwrap_or_default()
        );
        rows.push(json!({
            "n": t.n, "rho_s_sigma": rho1, "predicted_rho_s_sigma": pred,
            "rho_s2_sigma": rho2, "limit_rho_s2_sigma": limit,
        }));
    }
    let content = match args.out.format {
        Format::Json => json_envelope(Some(&params), None, json!(rows)),
        _ => c,
    };
    emit(&args.out, &content)
}

// ----------------------------------------------------------------- figure1

fn cmd_figure1(args: Figure1Args) -> Result<(), CliFail> {
    if args.grid < 3 {
        return Err(CliFail::Usage("--grid must be >= 3".into()));
    }
    for &b in &args.bs {
        if !(b > 0.0 && b < 1.0) {
            return Err(CliFail::Usage(format!("--b must lie in (0,1), got {b}")));
        }
    }
    let mut rows = Vec::new();
    let mut curves: Vec<(f64, Vec<(f64, f64)>, Vec<(f64, f64)>)> = Vec::new();
    for &b in &args.bs {
        let mut limit_pts = Vec::with_capacity(args.grid);
        let mut exact_pts = Vec::with_capacity(args.grid);
        for i in 0..args.grid {
            let a = -b + 2.0 * b * i as f64 / (args.grid - 1) as f64;
            let a = a.clamp(-b, b);
            let params = ModelParams::from_ab(a, b, 1.0).map_err(CliFail::from)?;
            let limit = rho_s2_sigma_limit(&params).map_err(CliFail::from)?;
            let exact =
                rho_s2_sigma_from(&params, &moment_table(&params, args.n)).map_err(CliFail::from)?;
            rows.push(json!({
                "b": b, "a": a, "limit": limit, "exact": exact,
                "abs_dev": (exact - limit).abs(),
            }));
            limit_pts.push((a, limit));
            exact_pts.push((a, exact));
        }
        curves.push((b, limit_pts, exact_pts));
    }

    let content = match args.out.format {
        Format::Json => json_envelope(None, None, json!(rows)),
        Format::Csv => {
            let mut c = csv_header(None, None);
            c.push_str("b,a,limit,exact,abs_dev\n");
            for row in &rows {
                let _ = writeln!(
                    c,
                    "{},{},{},{},{}",
                    row["b"],
                    row["a"],
                    fmt_f(row["limit"].as_f64().unwrap()),
                    fmt_f(row["exact"].as_f64().unwrap()),
                    fmt_f(row["abs_dev"].as_f64().unwrap())
                );
            }
            c
        }
        Format::Svg => {
            const COLORS: [&str; 6] = [
                "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
            ];
            let mut series = Vec::new();
            for (i, (b, limit_pts, exact_pts)) in curves.iter().enumerate() {
                series.push(SvgSeries {
                    label: format!("limit b={b}"),
                    color: COLORS[(2 * i) % COLORS.len()],
                    points: limit_pts.clone(),
                });
                series.push(SvgSeries {
                    label: format!("exact n={} b={b}", args.n),
                    color: COLORS[(2 * i + 1) % COLORS.len()],
                    points: exact_pts.clone(),
                });
            }
            render_svg(
                "correlation of squared walk with move count",
                &csv_header(None, None),
                &series,
            )
        }
    };
    emit(&args.out, &content)
}

// ------------------------------------------------------------------- range

fn cmd_range(args: RangeArgs) -> Result<bool, CliFail> {
    if args.harness {
        let f = |n: u64| (n as f64).sqrt();
        let mut reports = Vec::new();
        let mut all_pass = true;
        for &c in &[-2.0, 0.0, 3.0] {
            let rep = lemma31_case_i(f, c, args.harness_n).map_err(CliFail::from)?;
            all_pass &= rep.pass;
            reports.push(serde_json::to_value(rep).expect("serializable"));
        }
        let (toucher, zig) = lemma31_case_ii(f, args.harness_n).map_err(CliFail::from)?;
        all_pass &= toucher.pass && zig.pass;
        reports.push(serde_json::to_value(toucher).expect("serializable"));
        reports.push(serde_json::to_value(zig).expect("serializable"));
        emit(&args.out, &json_envelope(None, None, json!(reports)))?;
        return Ok(all_pass);
    }

    let params = args.params.resolve()?;
    let spec = EnsembleSpec {
        n: args.n,
        replicas: args.replicas,
        seed: args.seed,
        parallelism: args.parallelism,
    };
    let content = match args.out.format {
        Format::Csv => {
            let summaries = run_ensemble(&params, &spec, true).map_err(CliFail::from)?;
            let mut c = csv_header(Some(&params), Some(args.seed));
            c.push_str("replica,k,r_k,s_k,sigma_k,norm_value\n");
            for (i, t) in summaries.iter().enumerate() {
                for p in range_series(&params, t, i as u64).points {
                    let _ = writeln!(
                        c,
                        "{},{},{},{},{},{}",
                        i,
                        p.k,
                        p.r,
                        p.s,
                        p.sigma,
                        p.norm.map(fmt_f).unwrap_or_default()
                    );
                }
            }
            c
        }
        _ => {
            let report = range_scaling_ensemble(&params, &spec).map_err(CliFail::from)?;
            json_envelope(
                Some(&params),
                Some(args.seed),
                serde_json::to_value(report).expect("serializable"),
            )
        }
    };
    emit(&args.out, &content)?;
    Ok(true)
}

// --------------------------------------------------------------------- clt

fn cmd_clt(args: CltArgs) -> Result<(), CliFail> {
    let params = args.params.resolve()?;
    let spec = EnsembleSpec {
        n: args.n,
        replicas: args.replicas,
        seed: args.seed,
        parallelism: args.parallelism,
    };
    let report = clt_test(&params, &spec).map_err(CliFail::from)?;
    emit(
        &args.out,
        &json_envelope(
            Some(&params),
            Some(args.seed),
            serde_json::to_value(report).expect("serializable"),
        ),
    )
}

// ------------------------------------------------------------------- sweep

fn cmd_sweep(args: SweepArgs) -> Result<(), CliFail> {
    if args.b_steps < 1 || args.a_steps < 2 {
        return Err(CliFail::Usage("--b-steps >= 1 and --a-steps >= 2".into()));
    }
    let mut c = csv_header(None, None);
    c.push_str("a,b,regime,rho_s_sigma,rho_s2_sigma,limit_rho_s2_sigma,lil_envelope\n");
    let mut rows = Vec::new();
    for ib in 1..=args.b_steps {
        let b = ib as f64 / (args.b_steps + 1) as f64;
        for ia in 0..args.a_steps {
            let a = -b + 2.0 * b * ia as f64 / (args.a_steps - 1) as f64;
            let params = ModelParams::from_ab(a.clamp(-b, b), b, 1.0).map_err(CliFail::from)?;
            let t = moment_table(&params, args.n);
            let rho1 = rho_s_sigma_from(&params, &t).map_err(CliFail::from)?;
            let rho2 = rho_s2_sigma_from(&params, &t).map_err(CliFail::from)?;
            let limit = rho_s2_sigma_limit(&params).map_err(CliFail::from)?;
            let lil = lil_envelope(&params).ok();
            let _ = writeln!(
                c,
                "{},{},{},{},{},{},{}",
                params.a(),
                b,
                params.classify(),
                fmt_f(rho1),
                fmt_f(rho2),
                fmt_f(limit),
                lil.map(fmt_f).unwrap_or_default()
            );
            rows.push(json!({
                "a": params.a(), "b": b, "regime": params.classify(),
                "rho_s_sigma": rho1, "rho_s2_sigma": rho2,
                "limit_rho_s2_sigma": limit, "lil_envelope": lil,
            }));
        }
    }
    let content = match args.out.format {
        Format::Json => json_envelope(None, None, json!(rows)),
        _ => c,
    };
    emit(&args.out, &content)
}

// ------------------------------------------------------------------ verify

struct Verifier {
    failures: u32,
}

impl Verifier {
    fn check(&mut self, name: &str, pass: bool, detail: &str) {
        if pass {
            println!("PASS {name}");
        } else {
            self.failures += 1;
            println!("FAIL {name}: {detail}");
        }
    }
}

fn oracle_grid() -> Vec<ModelParams<f64>> {
    let mut grid = Vec::new();
    for &b in &[0.3, 0.6, 0.9] {
        for &af in &[-0.5, 0.5, 1.0] {
            for &s in &[0.0, 0.5, 1.0] {
                grid.push(ModelParams::from_ab(af * b, b, s).expect("valid grid point"));
            }
        }
    }
    grid
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, CliFail> {
    let mut v = Verifier { failures: 0 };
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);

    // exact engine vs the dynamic-programming oracle on the full grid
    let mut worst = 0.0f64;
    for params in oracle_grid() {
        for n in 1..=12u64 {
            let law = exact_joint_law(&params, n).map_err(CliFail::from)?;
            let t = moment_table(&params, n);
            let pairs = [
                (t.e_s + args.perturb, exact_moment(&law, 1, 0)),
                (t.e_sigma, exact_moment(&law, 0, 1)),
                (t.e_s_sigma, exact_moment(&law, 1, 1)),
                (t.e_s2, exact_moment(&law, 2, 0)),
                (t.e_sigma2, exact_moment(&law, 0, 2)),
                (t.e_s2_sigma, exact_moment(&law, 2, 1)),
                (t.e_s4, exact_moment(&law, 4, 0)),
            ];
            for (engine, oracle) in pairs {
                worst = worst.max(rel(engine, oracle));
            }
        }
    }
    v.check(
        "oracle-equivalence (27-point grid, n <= 12)",
        worst <= 1e-10,
        &format!("worst relative error {worst:.3e}"),
    );

    if !args.quick {
        // closed form vs recursion away from the poles
        let m = ModelParams::from_ab(0.2, 0.8, 1.0).map_err(CliFail::from)?;
        let t = moment_table(&m, 100_000);
        let cf = closed_e_s2(&m, 100_000).map_err(CliFail::from)?;
        v.check(
            "closed-form second moment vs recursion",
            rel(t.e_s2, cf) <= 1e-9,
            &format!("rel err {:.3e}", rel(t.e_s2, cf)),
        );

        // summation identity behind the cross-moment closed forms
        let resid = partial_sum_identity_check(0.9f64, 0.1, 10_000);
        v.check(
            "partial-sum identity residual",
            resid < 1e-10,
            &format!("residual {resid:.3e}"),
        );

        // subcritical decay constant
        let sub = ModelParams::from_ab(0.2, 0.8, 1.0).map_err(CliFail::from)?;
        let rho = rho_s_sigma_from(&sub, &moment_table(&sub, 1_000_000)).map_err(CliFail::from)?;
        let target = const_p(0.2, 0.8).map_err(CliFail::from)?;
        let scaled = rho * 1e6f64.powf((0.8 - 0.4) / 2.0);
        v.check(
            "subcritical correlation decay constant",
            (scaled / target - 1.0).abs() < 0.05,
            &format!("scaled {scaled:.6} vs {target:.6}"),
        );

        // critical and supercritical constants
        let crit = ModelParams::from_ab(0.3, 0.6, 1.0).map_err(CliFail::from)?;
        let rho = rho_s_sigma_from(&crit, &moment_table(&crit, 1_000_000)).map_err(CliFail::from)?;
        let target = const_q(0.3).map_err(CliFail::from)?;
        let scaled = rho * 1e6f64.ln().sqrt();
        v.check(
            "critical correlation decay constant",
            (scaled / target - 1.0).abs() < 0.10,
            &format!("scaled {scaled:.6} vs {target:.6}"),
        );
        let sup = ModelParams::from_ab(0.4, 0.5, 1.0).map_err(CliFail::from)?;
        let rho = rho_s_sigma_from(&sup, &moment_table(&sup, 1_000_000)).map_err(CliFail::from)?;
        let target = const_r(0.4f64, 0.5, 1.0).map_err(CliFail::from)?;
        v.check(
            "supercritical correlation limit",
            (rho / target - 1.0).abs() < 0.02,
            &format!("rho {rho:.6} vs {target:.6}"),
        );

        // limit-curve continuity across the critical point
        let mut max_gap = 0.0f64;
        for &b in &[0.3f64, 0.6, 0.9] {
            let left = ModelParams::from_ab(b / 2.0, b, 1.0).map_err(CliFail::from)?;
            let right = ModelParams::from_ab(b / 2.0 + 1e-6, b, 1.0).map_err(CliFail::from)?;
            let gap = (rho_s2_sigma_limit(&right).map_err(CliFail::from)?
                - rho_s2_sigma_limit(&left).map_err(CliFail::from)?)
            .abs();
            max_gap = max_gap.max(gap);
        }
        v.check(
            "limit-curve continuity at the critical point",
            max_gap < 1e-4,
            &format!("max gap {max_gap:.3e}"),
        );

        // deterministic range harness at a reduced horizon
        let f = |n: u64| (n as f64).sqrt();
        let mut pass = true;
        for &c in &[-2.0, 0.0, 3.0] {
            pass &= lemma31_case_i(f, c, 100_000).map_err(CliFail::from)?.pass;
        }
        let (toucher, zig) = lemma31_case_ii(f, 100_000).map_err(CliFail::from)?;
        pass &= toucher.pass && zig.pass;
        v.check("deterministic range harness", pass, "staircase/envelope bound violated");

        // small reproducibility spot check
        let spec1 = EnsembleSpec {
            parallelism: Some(1),
            ..EnsembleSpec::new(2000, 200, 7)
        };
        let spec8 = EnsembleSpec {
            parallelism: Some(8),
            ..spec1
        };
        let r1 = estimate(&sub, &spec1).map_err(CliFail::from)?;
        let r8 = estimate(&sub, &spec8).map_err(CliFail::from)?;
        let same = serde_json::to_string(&r1).expect("serializable")
            == serde_json::to_string(&r8).expect("serializable");
        v.check("ensemble reproducibility across parallelism", same, "reports differ");

        // Monte Carlo vs exact mean agreement
        v.check(
            "ensemble mean of the walk within 4 standard errors of exact",
            (r1.mean_s.mean - mean_s(&sub, 2000)).abs() < 4.0 * r1.mean_s.se,
            &format!("{} vs {}", r1.mean_s.mean, mean_s(&sub, 2000)),
        );
        v.check(
            "ensemble mean of the move count within 4 standard errors of exact",
            (r1.mean_sigma.mean - mean_sigma(&sub, 2000)).abs() < 4.0 * r1.mean_sigma.se,
            &format!("{} vs {}", r1.mean_sigma.mean, mean_sigma(&sub, 2000)),
        );

        // covariance positivity sanity on the sweep grid
        let mut ok = true;
        for ib in 1..=5 {
            let b = ib as f64 / 6.0;
            for ia in 0..7 {
                let a = -b + 2.0 * b * ia as f64 / 6.0;
                let params = ModelParams::from_ab(a, b, 1.0).map_err(CliFail::from)?;
                let cov = covariance_suite(&moment_table(&params, 500));
                ok &= cov.var_s > 0.0 && cov.var_sigma > 0.0 && cov.cov_s2_sigma > 0.0;
            }
        }
        v.check("variance/covariance positivity across regimes", ok, "non-positive value");
    }

    println!(
        "verify: {} check(s) failed{}",
        v.failures,
        if args.quick { " (quick mode)" } else { "" }
    );
    Ok(v.failures == 0)
}

// --------------------------------------------------------------------- svg

struct SvgSeries {
    label: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

/// Minimal polyline rendering: axes, tick labels at the corners, one
/// polyline and legend entry per series. Data files remain the primary
/// artifact; this is a quick-look plot only.
fn render_svg(title: &str, header: &str, series: &[SvgSeries]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const M: f64 = 60.0;

    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    for line in header.lines() {
        let _ = writeln!(svg, "<!-- {} -->", line.trim_start_matches("# "));
    }
    let _ = writeln!(
        svg,
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">{title}</text>",
        W / 2.0
    );
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{M}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>",
        H - M,
        W - M,
        H - M,
        H - M
    );
    let _ = writeln!(
        svg,
        "<text x=\"{M}\" y=\"{}\" font-size=\"11\">{x0:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{x1:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"11\">{y0:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"11\">{y1:.3}</text>",
        H - M + 20.0,
        W - M,
        H - M + 20.0,
        5.0,
        H - M,
        5.0,
        M
    );
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            s.color,
            pts.join(" ")
        );
        let ly = M + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"3\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>",
            W - M - 150.0,
            W - M - 120.0,
            s.color,
            W - M - 112.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
