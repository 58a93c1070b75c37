//! `sdorder`: check dominance orders between distributions stored in files,
//! compute minimal parameters, greediness profiles and oracle agreement, and
//! write example instances.

mod format;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sdorder::gamma::{min_constant_epsilon, min_constant_gamma, min_gamma, ConstantBound};
use sdorder::generators::{self, ThetaVariant};
use sdorder::piecewise::union_knots;
use sdorder::{
    agreement_easd, agreement_ffsd, agreement_mfsd, check_dpm_gamma_with, check_easd_with, check_ffsd_with,
    check_fractional_with, check_fsd_with, check_mfsd_with, check_ssd_with, greediness_profile,
    utility::mfsd_exclusion_with, CheckOptions, Distribution, DpmOptions, EpsilonFn, Error, GammaFn, PairAreas,
    SamplerConfig, Verdict, DEFAULT_TOL,
};

use format::{distribution_record, epsilon_record, gamma_record, to_text, utility_record};
use report::{num, txt};

#[derive(Parser)]
#[command(name = "sdorder", version, about = "Stochastic dominance checks on piecewise distributions")]
struct Cli {
    /// Comparison tolerance, must be positive.
    #[arg(long, global = true, env = "SDORDER_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed for the utility sampler.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of sampled utilities per oracle run.
    #[arg(long, global = true, default_value_t = 500)]
    samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Fsd,
    Ssd,
    Frac,
    Mfsd,
    Ffsd,
    Easd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleOrder {
    Mfsd,
    Ffsd,
    Easd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Mf,
    Ff,
}

#[derive(Args, Default)]
struct GammaArgs {
    /// Gamma function file.
    #[arg(long, conflicts_with = "gamma_const")]
    gamma: Option<PathBuf>,
    /// Constant gamma in [0, 1].
    #[arg(long, allow_negative_numbers = true)]
    gamma_const: Option<f64>,
}

#[derive(Args, Default)]
struct EpsilonArgs {
    /// Epsilon function file.
    #[arg(long, conflicts_with = "epsilon_const")]
    epsilon: Option<PathBuf>,
    /// Constant epsilon in (0, 1/2).
    #[arg(long, allow_negative_numbers = true)]
    epsilon_const: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether G dominates F in the chosen order.
    Check {
        #[arg(long, value_enum)]
        order: OrderArg,
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        gamma: GammaArgs,
        #[command(flatten)]
        epsilon: EpsilonArgs,
        /// Short-circuit the fractional check for equal-mean pairs.
        #[arg(long)]
        equal_mean_shortcut: bool,
    },
    /// Minimal non-decreasing gamma and minimal constant gamma.
    MinGamma { f: PathBuf, g: PathBuf },
    /// Minimal constant epsilon.
    MinEpsilon { f: PathBuf, g: PathBuf },
    /// Partial-greediness profile of a utility, with class checks for a gamma.
    Greediness {
        u: PathBuf,
        #[command(flatten)]
        gamma: GammaArgs,
    },
    /// Compare a decider with sampled expected-utility gaps.
    Oracle {
        #[arg(long, value_enum)]
        order: OracleOrder,
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        gamma: GammaArgs,
        #[command(flatten)]
        epsilon: EpsilonArgs,
    },
    /// Validate a JSON file of any kind and print its canonical form.
    Fmt { file: PathBuf },
    /// Write example instances as JSON files.
    Generate {
        /// Output directory, created when missing.
        #[arg(long, global = true, default_value = ".")]
        out: PathBuf,
        #[command(subcommand)]
        example: Example,
    },
}

#[derive(Subcommand)]
enum Example {
    /// Two-point spread against a point mass at the common mean.
    IdenticalMeans {
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eps: f64,
    },
    /// Gamma stepping from 0 to `gamma_mid` at `t1` and to 1 at `t2`.
    LocalInterpolation {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t2: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        gamma_mid: f64,
    },
    /// Pair where gamma(t) is exactly the minimal constant; gamma defaults to 0.5.
    StrictInclusion {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
        c: f64,
        #[command(flatten)]
        gamma: GammaArgs,
    },
    /// Pair separating the multi-fractional order from a constant gamma.
    /// Gamma defaults to 0.5 stepping to 0.75 at -1.
    Squares {
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        target: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        /// Build the pair where the constant order holds and the other fails.
        #[arg(long)]
        reverse: bool,
        #[command(flatten)]
        gamma: GammaArgs,
    },
    /// Theta family utility with a matching gamma.
    Theta {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long, default_value_t = 8)]
        grid: usize,
    },
    /// Utility touching the greediness bound twice.
    TwoTouch,
}

/// Writes to stdout; a closed pipe is not an error for a report.
fn put(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

/// A valid negative answer; exit status 1.
struct Negative;

struct Ctx {
    tol: f64,
    seed: u64,
    samples: usize,
    json: bool,
}

impl Ctx {
    fn emit(&self, value: Value, text: String) {
        if self.json {
            let mut s = serde_json::to_string_pretty(&value).expect("values are serializable");
            s.push('\n');
            put(&s);
        } else {
            put(&text);
        }
    }

    fn load(&self, path: &Path) -> Result<Distribution> {
        Ok(format::read_distribution(path, self.tol)?)
    }
}

fn gamma_of(args: &GammaArgs) -> Result<Option<GammaFn>> {
    match (&args.gamma, args.gamma_const) {
        (Some(path), _) => Ok(Some(format::read_gamma(path)?)),
        (None, Some(c)) => Ok(Some(GammaFn::constant(c).context("--gamma-const")?)),
        (None, None) => Ok(None),
    }
}

fn epsilon_of(args: &EpsilonArgs) -> Result<Option<EpsilonFn>> {
    match (&args.epsilon, args.epsilon_const) {
        (Some(path), _) => Ok(Some(format::read_epsilon(path)?)),
        (None, Some(c)) => Ok(Some(EpsilonFn::constant(c).context("--epsilon-const")?)),
        (None, None) => Ok(None),
    }
}

fn need_gamma(args: &GammaArgs, order: &str) -> Result<GammaFn> {
    gamma_of(args)?.ok_or_else(|| anyhow!("{order} needs --gamma FILE or --gamma-const R"))
}

fn need_epsilon(args: &EpsilonArgs, order: &str) -> Result<EpsilonFn> {
    epsilon_of(args)?.ok_or_else(|| anyhow!("{order} needs --epsilon FILE or --epsilon-const R"))
}

fn outcome(pass: bool) -> std::result::Result<(), Negative> {
    if pass {
        Ok(())
    } else {
        Err(Negative)
    }
}

type Outcome = std::result::Result<(), Negative>;

fn cmd_check(
    ctx: &Ctx,
    order: OrderArg,
    f: &Path,
    g: &Path,
    gamma: &GammaArgs,
    epsilon: &EpsilonArgs,
    shortcut: bool,
) -> Result<Outcome> {
    let opts = CheckOptions { tol: ctx.tol, equal_mean_shortcut: shortcut };
    let (f, g) = (ctx.load(f)?, ctx.load(g)?);
    let verdict: Verdict = match order {
        OrderArg::Fsd => check_fsd_with(&f, &g, &opts),
        OrderArg::Ssd => check_ssd_with(&f, &g, &opts),
        OrderArg::Frac => {
            let c = match (gamma_of(gamma)?, gamma.gamma_const) {
                (_, Some(c)) => c,
                (Some(gf), None) if gf.knots().is_empty() => gf.lower(),
                (Some(_), None) => bail!("frac needs a constant gamma"),
                (None, None) => bail!("frac needs --gamma-const R"),
            };
            check_fractional_with(&f, &g, c, &opts)?
        }
        OrderArg::Mfsd => check_mfsd_with(&f, &g, &need_gamma(gamma, "mfsd")?, &opts),
        OrderArg::Ffsd => check_ffsd_with(&f, &g, &need_gamma(gamma, "ffsd")?, &opts)?,
        OrderArg::Easd => check_easd_with(&f, &g, &need_epsilon(epsilon, "easd")?, &opts),
    };
    ctx.emit(report::verdict_json(&verdict), report::verdict_text(&verdict));
    Ok(outcome(verdict.holds))
}

/// Knots of gamma and of `F - G`, their midpoints, and one point beyond
/// each end.
fn series_grid(gamma: &GammaFn, areas: &PairAreas) -> Vec<f64> {
    let knots = union_knots(gamma.knots(), areas.knots());
    let mut grid = knots.clone();
    grid.extend(knots.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    match (knots.first(), knots.last()) {
        (Some(a), Some(b)) => grid.extend([a - 1.0, b + 1.0]),
        _ => grid.push(0.0),
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn bound_json(b: ConstantBound) -> Value {
    json!({"value": num(b.raw()), "feasible": b.value().is_some()})
}

fn bound_txt(b: ConstantBound) -> String {
    format!("{} ({})", txt(b.raw()), if b.value().is_some() { "feasible" } else { "infeasible" })
}

fn cmd_min_gamma(ctx: &Ctx, f: &Path, g: &Path) -> Result<Outcome> {
    let (f, g) = (ctx.load(f)?, ctx.load(g)?);
    let gamma = match min_gamma(&f, &g) {
        Ok(gamma) => gamma,
        Err(e @ Error::NotSSDOrdered { t, ratio }) => {
            eprintln!("NotSSDOrdered: {e}");
            if ctx.json {
                ctx.emit(json!({"error": "NotSSDOrdered", "t": num(t), "ratio": num(ratio)}), String::new());
            }
            return Ok(Err(Negative));
        }
        Err(e) => return Err(e.into()),
    };
    let constant = min_constant_gamma(&f, &g);
    let series: Vec<(f64, f64)> =
        series_grid(&gamma, &PairAreas::new(&f, &g)).into_iter().map(|t| (t, gamma.eval(t))).collect();
    let rec = gamma_record(&gamma);
    let value = json!({
        "gamma": serde_json::to_value(&rec)?,
        "constant": bound_json(constant),
        "series": series.iter().map(|&(t, v)| json!([num(t), num(v)])).collect::<Vec<_>>(),
    });
    let mut text = format!("gamma left of first piece: {}\npieces (x jump slope_after):\n", txt(rec.left));
    for p in &rec.pieces {
        text.push_str(&format!("  {} {} {}\n", txt(p.x), txt(p.jump), txt(p.slope_after)));
    }
    text.push_str(&format!("minimal constant gamma: {}\nseries (t gamma):\n", bound_txt(constant)));
    for (t, v) in &series {
        text.push_str(&format!("  {} {}\n", txt(*t), txt(*v)));
    }
    ctx.emit(value, text);
    Ok(Ok(()))
}

fn cmd_min_epsilon(ctx: &Ctx, f: &Path, g: &Path) -> Result<Outcome> {
    let (f, g) = (ctx.load(f)?, ctx.load(g)?);
    let b = min_constant_epsilon(&f, &g);
    ctx.emit(json!({"epsilon": bound_json(b)}), format!("minimal constant epsilon: {}\n", bound_txt(b)));
    Ok(outcome(b.value().is_some()))
}

fn cmd_greediness(ctx: &Ctx, u: &Path, gamma: &GammaArgs) -> Result<Outcome> {
    let u = format::read_utility(u)?;
    let profile = greediness_profile(&u);
    let mut value = report::profile_json(&profile);
    let mut text = report::profile_text(&profile);
    if let Some(gamma) = gamma_of(gamma)? {
        let member = check_dpm_gamma_with(&u, &gamma, &DpmOptions { tol: ctx.tol, opposite_sides: false });
        let exclusion = mfsd_exclusion_with(&u, &gamma, ctx.tol);
        let obj = value.as_object_mut().expect("profile renders as an object");
        obj.insert("dpm".into(), report::membership_json(&member));
        obj.insert("exclusion".into(), report::exclusion_json(&exclusion));
        text.push_str(&format!("derivative ratio class member: {}\n", member.member));
        text.push_str(&format!("exclusion: {}\n", report::exclusion_text(&exclusion)));
    }
    ctx.emit(value, text);
    Ok(Ok(()))
}

fn cmd_oracle(
    ctx: &Ctx,
    order: OracleOrder,
    f: &Path,
    g: &Path,
    gamma: &GammaArgs,
    epsilon: &EpsilonArgs,
) -> Result<Outcome> {
    let (f, g) = (ctx.load(f)?, ctx.load(g)?);
    let mut cfg = SamplerConfig::for_pair(&f, &g, ctx.seed, ctx.samples)?;
    cfg.tol = ctx.tol;
    let r = match order {
        OracleOrder::Mfsd => agreement_mfsd(&f, &g, &need_gamma(gamma, "mfsd")?, &cfg)?,
        OracleOrder::Ffsd => agreement_ffsd(&f, &g, &need_gamma(gamma, "ffsd")?, &cfg)?,
        OracleOrder::Easd => agreement_easd(&f, &g, &need_epsilon(epsilon, "easd")?, &cfg)?,
    };
    let violating = match &r.violating {
        Some(u) => serde_json::to_value(utility_record(u))?,
        None => Value::Null,
    };
    ctx.emit(report::agreement_json(&r, violating), report::agreement_text(&r));
    Ok(outcome(r.agree))
}

fn cmd_fmt(ctx: &Ctx, path: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let kind = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| v.get("kind").and_then(Value::as_str).map(str::to_owned));
    let body = match kind.as_deref() {
        Some("cdf") => to_text(&distribution_record(&format::parse_distribution(&text, path, ctx.tol)?)),
        Some("gamma") => to_text(&gamma_record(&format::parse_gamma(&text, path)?)),
        Some("epsilon") => to_text(&epsilon_record(&format::parse_epsilon(&text, path)?)),
        Some("utility") => to_text(&utility_record(&format::parse_utility(&text, path)?)),
        // Let the distribution parser report the syntax error or the bad kind.
        _ => to_text(&distribution_record(&format::parse_distribution(&text, path, ctx.tol)?)),
    };
    put(&body);
    Ok(Ok(()))
}

fn write_files(ctx: &Ctx, dir: &Path, files: &[(&str, String)], extra: Value) -> Result<Outcome> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
        paths.push(path.display().to_string());
    }
    let mut text: String = paths.iter().map(|p| format!("wrote {p}\n")).collect();
    if let Some(obj) = extra.as_object() {
        for (k, v) in obj {
            text.push_str(&format!("{k}: {v}\n"));
        }
    }
    let mut value = json!({"files": paths});
    if let Some(obj) = extra.as_object() {
        value.as_object_mut().unwrap().extend(obj.clone());
    }
    ctx.emit(value, text);
    Ok(Ok(()))
}

fn cmd_generate(ctx: &Ctx, out: &Path, example: &Example) -> Result<Outcome> {
    match example {
        Example::IdenticalMeans { mu, eps } => {
            let (f, g, gamma) = generators::example_identical_means(*mu, *eps)?;
            let files = [
                ("f.json", to_text(&distribution_record(&f))),
                ("g.json", to_text(&distribution_record(&g))),
                ("gamma.json", to_text(&gamma_record(&gamma))),
            ];
            write_files(ctx, out, &files, Value::Null)
        }
        Example::LocalInterpolation { t1, t2, gamma_mid } => {
            let gamma = generators::example_local_interpolation(*t1, *t2, *gamma_mid)?;
            write_files(ctx, out, &[("gamma.json", to_text(&gamma_record(&gamma)))], Value::Null)
        }
        Example::StrictInclusion { t, c, gamma } => {
            let gamma = gamma_of(gamma)?.unwrap_or(GammaFn::constant(0.5)?);
            let (f, g) = generators::example_strict_inclusion(*t, &gamma, *c)?;
            let files = [
                ("f.json", to_text(&distribution_record(&f))),
                ("g.json", to_text(&distribution_record(&g))),
                ("gamma.json", to_text(&gamma_record(&gamma))),
            ];
            write_files(ctx, out, &files, Value::Null)
        }
        Example::Squares { target, t0, reverse, gamma } => {
            let gamma = match gamma_of(gamma)? {
                Some(g) => g,
                None => GammaFn::step(0.5, vec![-1.0], vec![0.75])?,
            };
            let s = if *reverse {
                generators::example_squares_reverse(*target, &gamma, *t0)?
            } else {
                generators::example_squares(*target, &gamma, *t0)?
            };
            let files = [
                ("f.json", to_text(&distribution_record(&s.f))),
                ("g.json", to_text(&distribution_record(&s.g))),
                ("gamma.json", to_text(&gamma_record(&gamma))),
            ];
            let extra = json!({"m": s.m, "n": s.n, "side": num(s.side), "cell": num(s.cell), "t_star": num(s.t_star)});
            write_files(ctx, out, &files, extra)
        }
        Example::Theta { theta, variant, grid } => {
            let variant = match variant {
                VariantArg::Mf => ThetaVariant::Mf,
                VariantArg::Ff => ThetaVariant::Ff,
            };
            let (u, gamma) = generators::example_theta_family(*theta, variant, *grid)?;
            let files = [("u.json", to_text(&utility_record(&u))), ("gamma.json", to_text(&gamma_record(&gamma)))];
            write_files(ctx, out, &files, Value::Null)
        }
        Example::TwoTouch => {
            let (u, gamma) = generators::example_two_touch();
            let files = [("u.json", to_text(&utility_record(&u))), ("gamma.json", to_text(&gamma_record(&gamma)))];
            write_files(ctx, out, &files, Value::Null)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        bail!("--tol must be a positive real, got {}", cli.tol);
    }
    let ctx = Ctx { tol: cli.tol, seed: cli.seed, samples: cli.samples, json: cli.format == OutputFormat::Json };
    match &cli.command {
        Command::Check { order, f, g, gamma, epsilon, equal_mean_shortcut } => {
            cmd_check(&ctx, *order, f, g, gamma, epsilon, *equal_mean_shortcut)
        }
        Command::MinGamma { f, g } => cmd_min_gamma(&ctx, f, g),
        Command::MinEpsilon { f, g } => cmd_min_epsilon(&ctx, f, g),
        Command::Greediness { u, gamma } => cmd_greediness(&ctx, u, gamma),
        Command::Oracle { order, f, g, gamma, epsilon } => cmd_oracle(&ctx, *order, f, g, gamma, epsilon),
        Command::Fmt { file } => cmd_fmt(&ctx, file),
        Command::Generate { out, example } => cmd_generate(&ctx, out, example),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Negative)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
