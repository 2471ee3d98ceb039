//! Command-line front end. Exit codes: 0 success, 1 verification failure or
//! construction error, 2 usage or configuration error.

use std::collections::HashSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num::{BigUint, One, ToPrimitive, Zero};

use crate::analysis::{free_set, lower_bound_estimate, mdim_report, minimality_check};
use crate::config::ExperimentConfig;
use crate::construction::{materialize, LazyConfiguration, Mode, SymbolValue, MATERIALIZE_LIMIT};
use crate::group::{FiniteSubset, GroupElement, GroupId};
use crate::report;
use crate::schedule::{verify_suite, CheckLine, SuiteReport};
use crate::tiling::{import_text, verify_partition};
use crate::{Error, Int, Rational, Result};

/// Largest window `window` will print.
pub const WINDOW_LIMIT: u64 = 1_000_000;
/// Cells scanned by the no-star and stabilization checks of `verify`.
const SCAN_LIMIT: u64 = 200_000;
/// Largest tuple space the realization check enumerates.
const REALIZATION_LIMIT: u64 = 1 << 16;

#[derive(Parser, Debug)]
#[command(
    name = "subshift",
    version,
    about = "Build and check minimal subshifts of prescribed mean dimension"
)]
struct Cli {
    /// Experiment file (TOML). Without it the built-in toy experiment runs.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// `exact` or `capped:N`.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// `[a,b]` for Z, `[a,b]x[c,d]` for Z^2.
    #[arg(long, global = true)]
    window: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the tiling schedule, write it, and run the tiling checks.
    GenTilings {
        /// Check an explicit tiling file instead of generating.
        #[arg(long)]
        import: Option<PathBuf>,
    },
    /// Print the construction plan.
    Build,
    /// Dump the limit word on a window.
    Window,
    /// Run the construction and analysis checks.
    Verify,
    /// Mean-dimension bracket with rows 1..=depth.
    Mdim,
}

enum Outcome {
    Ok(String),
    Failed(String),
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(Outcome::Ok(text)) => emit(&cli, &text).map_or_else(report_error, |_| 0),
        Ok(Outcome::Failed(text)) => emit(&cli, &text).map_or_else(report_error, |_| 1),
        Err(e) => report_error(e),
    }
}

fn report_error(e: Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(&e)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Argument(_) | Error::Unsupported(_) | Error::MixedGroups(..) => 2,
        _ => 1,
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    let to_file = cli
        .out
        .as_ref()
        .filter(|_| !matches!(cli.command, Command::GenTilings { .. }));
    match to_file {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Argument(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::Argument(e.to_string()))
        }
    }
}

fn experiment(cli: &Cli) -> Result<ExperimentConfig> {
    let mut exp = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::toy(),
    };
    if let Some(d) = cli.depth {
        if d == 0 {
            return Err(Error::Parse("--depth must be at least 1".into()));
        }
        exp.depth = d;
    }
    if let Some(m) = &cli.mode {
        exp.mode = m
            .parse::<Mode>()
            .map_err(|e| Error::Parse(format!("--mode: {e}")))?;
    }
    if let Some(s) = cli.seed {
        exp.seed = s;
    }
    Ok(exp)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let exp = experiment(cli)?;
    match &cli.command {
        Command::GenTilings { import } => gen_tilings(cli, &exp, import.as_ref()),
        Command::Build => {
            let cfg = LazyConfiguration::new(exp.params()?)?;
            Ok(Outcome::Ok(match cli.format {
                Format::Text => report::plan_text(cfg.plan()),
                Format::Json => report::to_json(cfg.plan())?,
            }))
        }
        Command::Window => {
            let spec = cli
                .window
                .as_deref()
                .ok_or_else(|| Error::Parse("window needs --window".into()))?;
            let w = parse_window(spec)?;
            if w.group() != exp.group {
                return Err(Error::Parse(format!(
                    "--window is over {}, the experiment over {}",
                    w.group(),
                    exp.group
                )));
            }
            if w.cardinality() > Int::from(WINDOW_LIMIT) {
                return Err(Error::Parse(format!(
                    "--window has more than {WINDOW_LIMIT} cells"
                )));
            }
            let cfg = LazyConfiguration::new(exp.params()?)?;
            let cells = cfg.window_w(&w)?;
            Ok(Outcome::Ok(match cli.format {
                Format::Text => report::window_text(&cells),
                Format::Json => report::window_json(&cells)?,
            }))
        }
        Command::Verify => {
            let suite = verify_construction(&exp)?;
            let text = match cli.format {
                Format::Text => report::suite_text(&suite),
                Format::Json => report::to_json(&suite)?,
            };
            Ok(if suite.pass {
                Outcome::Ok(text)
            } else {
                Outcome::Failed(text)
            })
        }
        Command::Mdim => {
            let cfg = LazyConfiguration::new(exp.params_at(exp.depth + 1)?)?;
            let r = mdim_report(&cfg, exp.depth)?;
            let text = match cli.format {
                Format::Text => report::mdim_text(&r),
                Format::Json => report::to_json(&r)?,
            };
            let ok = r
                .rows
                .iter()
                .all(|row| row.contains_target && row.upper <= row.envelope);
            Ok(if ok {
                Outcome::Ok(text)
            } else {
                Outcome::Failed(text)
            })
        }
    }
}

fn gen_tilings(cli: &Cli, exp: &ExperimentConfig, import: Option<&PathBuf>) -> Result<Outcome> {
    if let Some(path) = import {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let t = import_text(&src)?;
        let support = t
            .support()
            .cloned()
            .ok_or_else(|| Error::Parse("imported tiling has no support".into()))?;
        let rep = verify_partition(&t, &support)?;
        let text = match cli.format {
            Format::Json => report::to_json(&rep)?,
            Format::Text => {
                let mut s = String::new();
                for v in &rep.violations {
                    s.push_str(&format!(
                        "violation: {}\n",
                        serde_json::to_string(v).unwrap_or_default()
                    ));
                }
                s.push_str(&format!(
                    "{} partition: covered {}, disjoint {}, {} violations\n",
                    if rep.violations.is_empty() {
                        "PASS"
                    } else {
                        "FAIL"
                    },
                    rep.covered,
                    rep.disjoint,
                    rep.violations.len()
                ));
                s
            }
        };
        return Ok(if rep.violations.is_empty() {
            Outcome::Ok(text)
        } else {
            Outcome::Failed(text)
        });
    }
    let schedule = exp.schedule()?;
    let target = cli.out.clone().or_else(|| exp.output.schedule.clone());
    if let Some(p) = &target {
        std::fs::write(p, schedule.to_toml()?)
            .map_err(|e| Error::Argument(format!("cannot write {}: {e}", p.display())))?;
    }
    let suite = verify_suite(
        &schedule,
        exp.verify.nesting_elements,
        exp.verify.max_cells,
        exp.seed,
    )?;
    let mut text = match cli.format {
        Format::Text => report::suite_text(&suite),
        Format::Json => report::to_json(&suite)?,
    };
    if cli.format == Format::Text {
        match &target {
            Some(p) => text.push_str(&format!("schedule written to {}\n", p.display())),
            None => text.push_str("schedule not written (no --out and no output.schedule)\n"),
        }
    }
    Ok(if suite.pass {
        Outcome::Ok(text)
    } else {
        Outcome::Failed(text)
    })
}

/// `[a,b]` or `[a,b]x[c,d]`.
pub fn parse_window(spec: &str) -> Result<FiniteSubset> {
    let bad = || Error::Parse(format!("--window `{spec}`: expected [a,b] or [a,b]x[c,d]"));
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in spec.trim().split('x') {
        let inner = part
            .trim()
            .strip_prefix('[')
            .and_then(|p| p.strip_suffix(']'))
            .ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let a: Int = a.trim().parse().map_err(|_| bad())?;
        let b: Int = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(Error::Parse(format!(
                "--window `{spec}`: empty interval [{a},{b}]"
            )));
        }
        lo.push(a);
        hi.push(b);
    }
    let group = match lo.len() {
        1 => GroupId::Z,
        2 => GroupId::Z2,
        _ => return Err(bad()),
    };
    Ok(FiniteSubset::boxed(group, lo, hi))
}

fn line(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> CheckLine {
    CheckLine {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn small(v: &Int, limit: u64) -> Option<u64> {
    v.to_u64().filter(|x| *x <= limit)
}

/// The construction and analysis checks behind `verify`.
pub fn verify_construction(exp: &ExperimentConfig) -> Result<SuiteReport> {
    let params = exp.params()?;
    let cfg = LazyConfiguration::new(params.clone())?;
    let plan = cfg.plan();
    let depth = plan.depth;
    let rho = plan.rho.clone();
    let mut checks = Vec::new();

    let l1 = plan.level(1)?;
    let a = Rational::new(plan.a_count.clone(), l1.size.clone());
    checks.push(line(
        "step-1 density sandwich",
        rho < a && a <= &rho + Rational::new(Int::one(), l1.size.clone()),
        format!("|A|/|S_1| = {a}"),
    ));
    for n in 1..depth {
        let next = plan.level(n + 1)?;
        let d = next.star_density();
        checks.push(line(
            format!("density sandwich n={n}"),
            rho < d && d <= &rho + Rational::new(Int::one(), next.size.clone()),
            format!("rho_*(v_{n}) = {d}"),
        ));
    }

    if exp.mode == Mode::Exact && depth <= 2 {
        let top = plan.level(depth)?;
        if small(&top.size, MATERIALIZE_LIMIT).is_some() {
            let words = materialize(&params, plan, depth)?;
            let mut diffs = 0usize;
            for (g, want) in &words.limit {
                if &cfg.eval_w(&GroupElement::z(g.clone()))? != want {
                    diffs += 1;
                }
            }
            checks.push(line(
                "oracle equivalence",
                diffs == 0,
                format!("{} cells of S_{depth}, {diffs} differ", words.limit.len()),
            ));
        }
    }

    let scan_level = (1..=depth).rev().find(|n| {
        plan.level(*n)
            .is_ok_and(|l| small(&l.size, SCAN_LIMIT).is_some())
    });
    if let Some(n) = scan_level {
        let w = cfg.shape(n)?;
        let cells = cfg.window_w(&w)?;
        let stars = cells.iter().filter(|(_, v)| v.is_star()).count();
        checks.push(line(
            "no-star limit",
            stars == 0,
            format!("{} cells of S_{n}", cells.len()),
        ));
    }

    if depth >= 2 {
        let lower_cfg = LazyConfiguration::new(exp.params_at(depth - 1)?)?;
        let s = lower_cfg.plan().level(depth - 1)?;
        if small(&s.size, SCAN_LIMIT).is_some() {
            let w = lower_cfg.shape(depth - 1)?;
            let deep = report::window_text(&cfg.window_w(&w)?);
            let shallow = report::window_text(&lower_cfg.window_w(&w)?);
            checks.push(line(
                format!("stabilization depth {} vs {depth}", depth - 1),
                deep == shallow,
                format!("S_{} dump of {} bytes", depth - 1, deep.len()),
            ));
        }
    }

    for n in 1..depth {
        let j = free_set(&cfg, n)?;
        let lb = lower_bound_estimate(&cfg, n)?;
        let d = Rational::from_integer(Int::from(params.polyhedron.dim()));
        let hi = (&rho + Rational::new(Int::one(), j.window_size.clone())) * &d;
        checks.push(line(
            format!("lower bound n={n}"),
            &rho * &d < lb && lb <= hi,
            format!("|J_{n}|/|S_{}| * dim P = {lb}", n + 1),
        ));
        if n + 1 < depth {
            if let Some(elems) = &j.elements {
                let mut inside = true;
                for g in elems {
                    inside &= crate::analysis::in_free_set(&cfg, n + 1, g)?;
                }
                checks.push(line(
                    format!("free-set nesting J_{n} in J_{}", n + 1),
                    inside,
                    format!("{} elements", elems.len()),
                ));
            }
        }
    }

    if depth >= 2 {
        let r = mdim_report(&cfg, depth - 1)?;
        for row in &r.rows {
            checks.push(line(
                format!("upper bound envelope n={}", row.n),
                row.upper <= row.envelope,
                format!("{} <= {}", row.upper, row.envelope),
            ));
            checks.push(line(
                format!("bracket contains rho*dim P n={}", row.n),
                row.contains_target,
                format!("[{}, {}] vs {}", row.lower, row.upper, r.target),
            ));
        }
        checks.push(line(
            "gap non-increasing",
            r.gap_nonincreasing,
            format!("final gap {}", r.gap),
        ));
    }

    if let Some(sub) = &l1.substitution {
        if let Some(total) = small(&sub.r_size, REALIZATION_LIMIT).filter(|_| sub.r_exact) {
            let (pass, detail) = realization_check(&cfg, total)?;
            checks.push(line("realization level 1", pass, detail));
        }
    }

    for n in 1..depth {
        let rep = minimality_check(&cfg, n, exp.verify.samples, exp.seed)?;
        checks.push(line(
            format!("minimality diagnostic n={n}"),
            rep.pass,
            format!(
                "{}/{} recur, syndetic {}",
                rep.matches, rep.samples, rep.syndetic
            ),
        ));
    }

    if plan.approximate {
        checks.push(line(
            "exact block sizes",
            false,
            "capped mode truncated a block; results deviate from the exact construction",
        ));
    }
    Ok(SuiteReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Every level-1 star assignment decodes to its own block center, and the
/// substituted word there spells the assignment.
fn realization_check(cfg: &LazyConfiguration, total: u64) -> Result<(bool, String)> {
    let net = &cfg.params().nets[0];
    let base = net.size();
    let stars = cfg.star_positions(1)?;
    let mut centers = HashSet::new();
    let mut pass = true;
    for idx in 0..total {
        let mut rest = BigUint::from(idx);
        let mut tuple = Vec::with_capacity(stars.len());
        for _ in 0..stars.len() {
            tuple.push(net.point_at(&(&rest % &base))?);
            rest /= &base;
        }
        debug_assert!(rest.is_zero());
        let c = cfg.realization_decode(1, &tuple)?;
        for (p, want) in stars.iter().zip(&tuple) {
            if cfg.w_prime(1, &(c.value() + p))? != SymbolValue::Point(want.clone()) {
                pass = false;
            }
        }
        centers.insert(c);
    }
    pass &= centers.len() as u64 == total;
    Ok((
        pass,
        format!("{total} assignments, {} distinct centers", centers.len()),
    ))
}
