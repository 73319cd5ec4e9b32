use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use erg_phase::asymptotics::{region, tables, REPORT_HEADER};
use erg_phase::distributions::THETA_GUARD;
use erg_phase::legendre::DUAL_TOL;
use erg_phase::sampler::{edge_pairs, TRACE_HEADER};
use erg_phase::variational::{score_at_theta, stationary_points, CRITICAL_MARGIN, SCAN_GRID, TIE_TOL};
use erg_phase::{
    critical_point, dual_of, exact_small_model, maximizers, phase_curve, rate, run_chain, ChainOptions,
    EdgeWeightDistribution, Error, MaximizerSet, ModelParams, SubgraphSpec,
};
use rayon::prelude::*;

const THREADS_VAR: &str = "ERG_PHASE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "erg-phase", version, about = "Phase structure of edge-weighted exponential random graph models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Edge-weight distribution, e.g. `bernoulli:q=0.5`, `uniform`, `beta:a=2,b=2`, `discrete:0=0.5,1=0.5`.
    #[arg(long, default_value = "bernoulli:q=0.5")]
    dist: String,
    /// Number of edges of the second subgraph.
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key=value` lines, equivalent to the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Point {
    #[arg(long, allow_hyphen_values = true)]
    beta1: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta2: f64,
}

#[derive(Subcommand, Debug)]
#[command(args_override_self = true)]
enum Command {
    /// Limiting free energy and its global maximizers.
    Psi {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = TIE_TOL)]
        tie_tol: f64,
    },
    /// Every stationary point of the variational score.
    Maximizers {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = TIE_TOL)]
        tie_tol: f64,
    },
    /// End point of the transition curve.
    CriticalPoint {
        #[command(flatten)]
        common: Common,
    },
    /// Transition curve and the bounding curves of the V-shaped region.
    PhaseCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        beta1_min: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Also write a gnuplot script next to `--out`.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Exact and asymptotic values for the Bernoulli and uniform comparison tables.
    Tables {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rate function and its dual parameter.
    Rate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list of means in (0, 1).
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
    },
    /// Metropolis-Hastings sampling of the finite-n model.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        /// Second subgraph: `two_star` or `triangle`; defaults from `--p`.
        #[arg(long)]
        h2: Option<String>,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Steps before recording; default 200 sweeps of n²/2 steps.
        #[arg(long)]
        burn_in: Option<u64>,
        /// Steps between records; default one sweep.
        #[arg(long)]
        thin: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace CSV path; the summary goes to stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Enumerate the exact law instead of sampling (n ≤ 3, atomic laws).
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        gnuplot: bool,
    },
    /// Free energy and maximizers on a (β1, β2) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true, default_value_t = -10.0)]
        beta1_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        beta1_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        beta2_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
        beta2_max: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long, default_value_t = TIE_TOL)]
        tie_tol: f64,
        #[arg(long)]
        gnuplot: bool,
    },
}

#[derive(Debug)]
enum CliError {
    Parse(String),
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Parse(_)
                | Error::InvalidDistribution(_)
                | Error::DegenerateDistribution { .. }
                | Error::SymmetryMismatch(_) => 2,
                Error::Domain(_)
                | Error::AssumptionViolated(_)
                | Error::TooLarge(_)
                | Error::UnsupportedSubgraph(_)
                | Error::UnsupportedDistribution(_) => 3,
                _ => 1,
            },
        }
    }

    fn line(&self) -> String {
        let (code, msg) = match self {
            CliError::Parse(m) => ("parse_error", m.clone()),
            CliError::Io(m) => ("io_error", m.clone()),
            CliError::Core(e) => (e.code(), e.to_string()),
        };
        format!("error: {code}: {}", msg.replace('\n', " "))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Splices `key=value` lines from `--config` files in front of the explicit
/// flags, so the command line overrides the file.
fn expand_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = args.get(i + 1).cloned();
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Parse(format!("cannot read config {path}: {e}")))?;
    let mut extra = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("{path}:{}: expected key=value", n + 1)))?;
        let flag = format!("--{}", k.trim().replace('_', "-"));
        match v.trim() {
            "true" => extra.push(flag),
            "false" => {}
            v => {
                extra.push(flag);
                extra.push(v.to_string());
            }
        }
    }
    let cmd = args.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 2);
    let at = cmd.unwrap_or(args.len()).min(args.len());
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Parse(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}

fn parse_dist(spec: &str) -> CliResult<EdgeWeightDistribution> {
    Ok(spec.parse::<EdgeWeightDistribution>()?)
}

fn params(common: &Common, point: &Point) -> CliResult<ModelParams> {
    let pr = ModelParams::new(point.beta1, point.beta2, common.p)?;
    if pr.beta2 < 0.0 {
        eprintln!("warning: beta2 < 0: maximizers are stationarity solutions in the concave regime");
    }
    Ok(pr)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn header(cmd: &str, fields: &[(&str, String)]) -> String {
    let mut s = format!("# erg-phase {cmd} {}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in fields {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

fn solver_defaults(tie_tol: f64) -> Vec<(&'static str, String)> {
    vec![
        ("tie_tol", format!("{tie_tol:e}")),
        ("dual_tol", format!("{DUAL_TOL:e}")),
        ("scan_grid", SCAN_GRID.to_string()),
        ("theta_guard", THETA_GUARD.to_string()),
    ]
}

fn gnuplot(out: Option<&Path>, body: impl FnOnce(&str) -> String) -> CliResult<()> {
    let path = out.ok_or_else(|| CliError::Parse("--gnuplot requires an output file".into()))?;
    let script = path.with_extension("gp");
    let csv = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let text = format!("set datafile separator ','\nset key autotitle columnhead\n{}", body(&csv));
    fs::write(&script, text).map_err(|e| CliError::Io(format!("{}: {e}", script.display())))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn region_name(pr: &ModelParams) -> String {
    region(pr).map(|r| r.to_string()).unwrap_or_else(|_| "boundary".into())
}

fn psi_row(pr: &ModelParams, m: &MaximizerSet) -> String {
    let low = m.points[0].pair;
    let high = (m.points.len() > 1).then(|| m.points[m.points.len() - 1].pair);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        pr.beta1,
        pr.beta2,
        pr.p,
        m.psi,
        m.points.len(),
        low.u,
        low.theta,
        opt(high.map(|h| h.u)),
        opt(high.map(|h| h.theta)),
        m.on_transition,
        region_name(pr)
    )
}

const PSI_HEADER: &str = "beta1,beta2,p,psi,count,u_low,theta_low,u_high,theta_high,on_transition,region";

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Psi { common, point, tie_tol } => {
            let d = parse_dist(&common.dist)?;
            let pr = params(&common, &point)?;
            let m = maximizers(&d, &pr, tie_tol)?;
            let mut fields = vec![("dist", d.to_string())];
            fields.extend(solver_defaults(tie_tol));
            let mut s = header("psi", &fields);
            let _ = writeln!(s, "{PSI_HEADER}\n{}", psi_row(&pr, &m));
            emit(common.out.as_deref(), &s)
        }
        Command::Maximizers { common, point, tie_tol } => {
            let d = parse_dist(&common.dist)?;
            let pr = params(&common, &point)?;
            let m = maximizers(&d, &pr, tie_tol)?;
            let mut fields = vec![("dist", d.to_string()), ("p", pr.p.to_string())];
            fields.extend(solver_defaults(tie_tol));
            let mut s = header("maximizers", &fields);
            s.push_str("beta1,beta2,u,theta,score,global\n");
            for pair in stationary_points(&d, &pr)? {
                let (_, score) = score_at_theta(&d, &pr, pair.theta)?;
                let global = m.points.iter().any(|g| g.pair.theta == pair.theta);
                let _ = writeln!(s, "{},{},{},{},{},{global}", pr.beta1, pr.beta2, pair.u, pair.theta, score);
            }
            emit(common.out.as_deref(), &s)
        }
        Command::CriticalPoint { common } => {
            let d = parse_dist(&common.dist)?;
            let c = critical_point(&d, common.p)?;
            let mut s = header(
                "critical-point",
                &[("dist", d.to_string()), ("p", common.p.to_string()), ("scan_grid", SCAN_GRID.to_string())],
            );
            let _ = writeln!(s, "beta1_c,beta2_c,u0,theta0\n{},{},{},{}", c.beta1_c, c.beta2_c, c.u0, c.theta0);
            emit(common.out.as_deref(), &s)
        }
        Command::PhaseCurve { common, beta1_min, step, gnuplot: gp } => {
            let d = parse_dist(&common.dist)?;
            if gp && common.out.is_none() {
                return Err(CliError::Parse("--gnuplot requires --out".into()));
            }
            let curve = phase_curve(&d, common.p, beta1_min, step)?;
            let c = curve.critical;
            let mut fields = vec![
                ("dist", d.to_string()),
                ("p", common.p.to_string()),
                ("beta1_min", beta1_min.to_string()),
                ("step", step.to_string()),
                ("critical_margin", format!("{CRITICAL_MARGIN:e}")),
                ("critical_point", format!("({}, {})", c.beta1_c, c.beta2_c)),
            ];
            fields.extend(solver_defaults(TIE_TOL));
            let mut s = header("phase-curve", &fields);
            s.push_str("beta1,beta2_transition,beta2_upper,beta2_lower\n");
            for x in &curve.samples {
                let _ = writeln!(s, "{},{},{},{}", x.beta1, x.beta2, x.upper, x.lower);
            }
            emit(common.out.as_deref(), &s)?;
            if gp {
                gnuplot(common.out.as_deref(), |csv| {
                    format!(
                        "set xlabel 'beta1'\nset ylabel 'beta2'\nplot '{csv}' using 1:2 with lines, '' using 1:3 with lines dt 2, '' using 1:4 with lines dt 2\n"
                    )
                })?;
            }
            Ok(())
        }
        Command::Tables { out, .. } => {
            let mut s = header("tables", &solver_defaults(TIE_TOL));
            let _ = writeln!(s, "{REPORT_HEADER}");
            let mut last = String::new();
            for (d, r) in tables()? {
                let name = d.to_string();
                if name != last {
                    let _ = writeln!(s, "# {name}, p=2");
                    last = name;
                }
                let _ = writeln!(s, "{}", r.csv_row());
            }
            emit(out.as_deref(), &s)
        }
        Command::Rate { common, u } => {
            let d = parse_dist(&common.dist)?;
            let mut fields = vec![("dist", d.to_string())];
            fields.extend(solver_defaults(TIE_TOL).into_iter().skip(1));
            let mut s = header("rate", &fields);
            s.push_str("u,theta,rate\n");
            for x in u {
                let pair = dual_of(&d, x)?;
                let _ = writeln!(s, "{x},{},{}", pair.theta, rate(&d, x)?);
            }
            emit(common.out.as_deref(), &s)
        }
        Command::Sample { common, point, h2, n, samples, burn_in, thin, seed, trace, exact, gnuplot: gp } => {
            let d = parse_dist(&common.dist)?;
            let pr = params(&common, &point)?;
            let h2 = match h2 {
                Some(s) => s.parse::<SubgraphSpec>()?,
                None => SubgraphSpec::for_p(pr.p)?,
            };
            if exact {
                let model = exact_small_model(&d, &pr, &h2, n)?;
                let mut s = header(
                    "sample --exact",
                    &[("dist", d.to_string()), ("h2", h2.to_string()), ("n", n.to_string())],
                );
                let cols: Vec<String> = edge_pairs(n).iter().map(|(i, j)| format!("w_{i}_{j}")).collect();
                let _ = writeln!(s, "{},probability,psi_n", cols.join(","));
                for st in &model.states {
                    let ws: Vec<String> = st.weights.iter().map(|w| w.to_string()).collect();
                    let _ = writeln!(s, "{},{},{}", ws.join(","), st.probability, model.psi_n);
                }
                return emit(common.out.as_deref(), &s);
            }
            if gp && trace.is_none() {
                return Err(CliError::Parse("--gnuplot requires --trace".into()));
            }
            let opts = ChainOptions { n, burn_in, samples, thin, seed };
            if samples == 0 {
                return Err(CliError::Parse("--samples must be positive".into()));
            }
            let tr = run_chain(&d, &pr, h2.clone(), &opts)?;
            let fields = vec![
                ("dist", d.to_string()),
                ("h2", h2.to_string()),
                ("beta1", pr.beta1.to_string()),
                ("beta2", pr.beta2.to_string()),
                ("n", n.to_string()),
                ("samples", samples.to_string()),
                ("burn_in", opts.burn_in_steps().to_string()),
                ("thin", opts.thin_steps().to_string()),
                ("seed", seed.to_string()),
            ];
            if let Some(path) = &trace {
                let mut t = header("sample", &fields);
                let _ = writeln!(t, "{TRACE_HEADER}");
                for r in &tr.rows {
                    let _ = writeln!(t, "{},{},{}", r.step, r.t_edge, r.t_h2);
                }
                emit(Some(path), &t)?;
                if gp {
                    gnuplot(Some(path), |csv| {
                        format!("set xlabel 'step'\nplot '{csv}' using 1:2 with lines, '' using 1:3 with lines\n")
                    })?;
                }
            }
            let mean = tr.mean_edge_weight();
            let target = if pr.beta2 >= 0.0 {
                let m = maximizers(&d, &pr, TIE_TOL)?;
                m.points
                    .iter()
                    .map(|x| x.pair.u)
                    .min_by(|a, b| (a - mean).abs().total_cmp(&(b - mean).abs()))
            } else {
                None
            };
            let mut s = header("sample", &fields);
            s.push_str("n,samples,acceptance_rate,mean_t_edge,mean_t_h2,mean_edge_weight,u_star,abs_error\n");
            let _ = writeln!(
                s,
                "{n},{samples},{},{},{},{mean},{},{}",
                tr.acceptance_rate,
                tr.mean_t1(),
                tr.mean_t2(),
                opt(target),
                opt(target.map(|u| (mean - u).abs()))
            );
            emit(common.out.as_deref(), &s)
        }
        Command::Sweep { common, beta1_min, beta1_max, beta2_min, beta2_max, steps, tie_tol, gnuplot: gp } => {
            let d = parse_dist(&common.dist)?;
            if steps < 2 {
                return Err(CliError::Parse("--steps must be at least 2".into()));
            }
            if gp && common.out.is_none() {
                return Err(CliError::Parse("--gnuplot requires --out".into()));
            }
            if beta2_min < 0.0 {
                eprintln!("warning: beta2 < 0: maximizers are stationarity solutions in the concave regime");
            }
            let axis = |lo: f64, hi: f64| -> Vec<f64> {
                (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
            };
            let grid: Vec<(f64, f64)> = axis(beta1_min, beta1_max)
                .into_iter()
                .flat_map(|b1| axis(beta2_min, beta2_max).into_iter().map(move |b2| (b1, b2)))
                .collect();
            let rows: Vec<String> = grid
                .par_iter()
                .map(|&(b1, b2)| {
                    let pr = ModelParams::new(b1, b2, common.p)?;
                    Ok(psi_row(&pr, &maximizers(&d, &pr, tie_tol)?))
                })
                .collect::<erg_phase::Result<_>>()?;
            let mut fields = vec![
                ("dist", d.to_string()),
                ("beta1", format!("[{beta1_min}, {beta1_max}]")),
                ("beta2", format!("[{beta2_min}, {beta2_max}]")),
                ("steps", steps.to_string()),
            ];
            fields.extend(solver_defaults(tie_tol));
            let mut s = header("sweep", &fields);
            let _ = writeln!(s, "{PSI_HEADER}");
            for r in rows {
                let _ = writeln!(s, "{r}");
            }
            emit(common.out.as_deref(), &s)?;
            if gp {
                gnuplot(common.out.as_deref(), |csv| {
                    format!(
                        "set xlabel 'beta1'\nset ylabel 'beta2'\nset view map\nsplot '{csv}' using 1:2:6 with points palette pt 5\n"
                    )
                })?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let result = expand_config(std::env::args().collect())
        .and_then(|args| {
            Cli::try_parse_from(args).map_err(|e| match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => e.exit(),
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
                    CliError::Parse(first)
                }
            })
        })
        .and_then(|cli| {
            configure_threads()?;
            run(cli)
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code())
        }
    }
}
