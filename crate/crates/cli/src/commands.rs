use msnet_core::asymptotics::AsymptoteSpec;
use msnet_core::bounds::{
    estimate_gamma0, run_sandwich_suite, select_l, stability_verdict, LSelection, SandwichSuite, DEFAULT_L_CAP,
};
use msnet_core::dist::{Family, HeavyTailDist};
use msnet_core::estimation::{
    big_jump_diagnostic, check_assumption_h, estimate_tail, estimate_tail_of, interarrival_insensitivity_check,
    moment_order_check, HVerdict, TailEstimate,
};
use msnet_core::kernel::{sample_window, NetworkKernel};
use msnet_core::models::tandem::tandem_path;
use msnet_core::models::{AnyKernel, ModelSpec};
use msnet_core::rng::RngStream;
use msnet_core::with_kernel;
use serde::Serialize;

use crate::artifact::{field, ArtifactWriter};
use crate::config::{ExperimentConfig, FormulaChoice, Functional, Keyword, LChoice};
use crate::{CliError, Subcommand};

/// What a subcommand reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    pub out: &'a mut ArtifactWriter,
}

impl Context<'_> {
    fn model(&self) -> Result<&ModelSpec, CliError> {
        self.config.model.as_ref().ok_or_else(|| CliError::Config("this subcommand needs a model".into()))
    }

    fn kernel(&self) -> Result<AnyKernel, CliError> {
        Ok(self.model()?.build()?)
    }

    fn section<'s, T>(&self, s: &'s Option<T>, name: &str) -> Result<&'s T, CliError> {
        s.as_ref().ok_or_else(|| CliError::Config(format!("missing \"{name}\" section")))
    }

    /// Formula requested by `choice`, plus a note when "auto" found none.
    fn formula(&self, choice: &FormulaChoice) -> Result<(Option<AsymptoteSpec>, Option<String>), CliError> {
        Ok(match choice {
            FormulaChoice::Keyword(Keyword::None) => (None, None),
            FormulaChoice::Keyword(Keyword::Auto) => match AsymptoteSpec::for_model(self.model()?) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            },
            FormulaChoice::Keyword(Keyword::W2) => (Some(AsymptoteSpec::w2_for_model(self.model()?)?), None),
            FormulaChoice::Spec(s) => (Some(s.clone()), None),
        })
    }
}

pub fn dispatch(cmd: Subcommand, ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let out = match cmd {
        Subcommand::Axioms => axioms(ctx),
        Subcommand::Gamma0 => gamma0(ctx),
        Subcommand::Bounds => bounds(ctx),
        Subcommand::Tail => tail(ctx),
        Subcommand::Asymptote => asymptote(ctx),
        Subcommand::Moments => moments(ctx),
        Subcommand::Bigjump => bigjump(ctx),
        Subcommand::Hcheck => hcheck(ctx),
        Subcommand::Insensitivity => insensitivity(ctx),
    }?;
    if ctx.config.event_log.is_some() {
        event_log(ctx)?;
    }
    Ok(out)
}

fn axioms(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = &ctx.config.axioms;
    let kernel = ctx.kernel()?;
    let report = with_kernel!(&kernel, k => msnet_core::axioms::run_axiom_suite(k, s.windows, s.max_len, ctx.seed))?;
    let passed = report.passed();
    ctx.out.json("axioms.json", "axioms", passed, &report)?;
    let failed: Vec<&str> = [
        ("causality", report.axioms.causality.passed),
        ("monotonicity", report.axioms.monotonicity.passed),
        ("homogeneity", report.axioms.homogeneity.passed),
        ("separability", report.axioms.separability.passed),
        ("determinism", report.axioms.determinism.passed),
        ("internal_monotonicity", report.lemmas.internal_monotonicity.passed),
        ("subadditivity", report.lemmas.subadditivity.passed),
        ("split_bound", report.lemmas.split_bound.passed),
    ]
    .into_iter()
    .filter(|(_, ok)| !ok)
    .map(|(n, _)| n)
    .collect();
    let summary = if passed {
        format!("{}: all checks passed on {} windows", report.kernel, report.windows)
    } else {
        format!("{}: failed {}", report.kernel, failed.join(", "))
    };
    Ok(Outcome { passed, summary })
}

#[derive(Serialize)]
struct Gamma0Report {
    kernel: String,
    estimate: msnet_core::bounds::Gamma0Estimate,
    relative_error: Option<f64>,
    rel_tol: f64,
    lambda: f64,
    verdict: msnet_core::bounds::Verdict,
}

fn gamma0(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = &ctx.config.gamma0;
    let kernel = ctx.kernel()?;
    let (name, est, a) = with_kernel!(&kernel, k => (
        k.name(),
        estimate_gamma0(k, s.n, s.replications, ctx.seed)?,
        k.arrivals().mean(),
    ));
    let relative_error = est.reference.map(|r| (est.estimate - r).abs() / r.abs());
    let passed = relative_error.map_or(true, |e| e <= s.rel_tol);
    let lambda = 1.0 / a;
    let report = Gamma0Report {
        kernel: name.to_string(),
        verdict: stability_verdict(lambda, &est),
        estimate: est,
        relative_error,
        rel_tol: s.rel_tol,
        lambda,
    };
    ctx.out.json("gamma0.json", "gamma0", passed, &report)?;
    let summary = format!(
        "{name}: gamma(0) = {:.6} +- {:.2e}, reference {}, verdict {:?}",
        report.estimate.estimate,
        report.estimate.half_width,
        report.estimate.reference.map_or("unknown".into(), |r| r.to_string()),
        report.verdict
    );
    Ok(Outcome { passed, summary })
}

#[derive(Serialize)]
struct BoundsReport {
    kernel: String,
    selection: Option<LSelection>,
    l: usize,
    suites: Vec<SandwichSuite>,
}

fn bounds(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = &ctx.config.bounds;
    let kernel = ctx.kernel()?;
    let seed = ctx.seed;
    let report = with_kernel!(&kernel, k => {
        let (selection, l) = match s.l {
            LChoice::Fixed(l) => (None, l),
            LChoice::Keyword(Keyword::Auto) => {
                let sel = select_l(k, s.delta, s.scan_replications, RngStream::derive(seed, 1), DEFAULT_L_CAP)?;
                let l = sel.l;
                (Some(sel), l)
            }
            LChoice::Keyword(other) => {
                return Err(CliError::Config(format!("bounds.l must be an integer or \"auto\", got {other:?}")))
            }
        };
        let mut ls = vec![l];
        if s.double {
            ls.push(2 * l);
        }
        let suites = ls
            .iter()
            .map(|l| run_sandwich_suite(k, *l, s.blocks, s.realizations, RngStream::derive(seed, 2)))
            .collect::<Result<Vec<_>, _>>()?;
        BoundsReport { kernel: k.name().to_string(), selection, l, suites }
    });
    let passed = report.suites.iter().all(|s| s.passed());
    ctx.out.json("bounds.json", "bounds", passed, &report)?;
    let violations: u64 = report
        .suites
        .iter()
        .map(|s| s.lower_violations + s.upper_violations + s.block_bound_violations + s.block_subadditive_violations)
        .sum();
    let summary = format!(
        "{}: L = {}{}, {violations} violations over {} suites",
        report.kernel,
        report.l,
        if report.selection.is_some() { " (auto)" } else { "" },
        report.suites.len()
    );
    Ok(Outcome { passed, summary })
}

#[derive(Serialize)]
struct TailReport<'a> {
    functional: Functional,
    formula: Option<&'a AsymptoteSpec>,
    formula_note: Option<String>,
    ratio_band: Option<(f64, f64)>,
    deepest_resolvable: Option<f64>,
    estimate: &'a TailEstimate,
}

pub const TAIL_HEADER: [&str; 7] = ["x", "p_hat", "ci_lo", "ci_hi", "formula", "ratio", "censor_frac"];

fn tail(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = ctx.section(&ctx.config.tail, "tail")?;
    let (formula, formula_note) = ctx.formula(&s.formula)?;
    let kernel = ctx.kernel()?;
    let policy = ctx.config.horizon;
    let est = match (s.functional, &kernel) {
        (Functional::Response, k) => {
            with_kernel!(k, k => estimate_tail(k, &s.grid, s.replications, &policy, ctx.seed, formula.as_ref())?)
        }
        (Functional::SecondStationWait, AnyKernel::Tandem(k)) => estimate_tail_of(
            k,
            |w| Ok(*tandem_path(w).w2.last().expect("nonempty path")),
            &s.grid,
            s.replications,
            &policy,
            ctx.seed,
            formula.as_ref(),
        )?,
        (Functional::SecondStationWait, _) => {
            return Err(CliError::Config("second_station_wait needs a tandem model".into()))
        }
    };
    let deepest = est.deepest_resolvable(s.min_exceedances);
    let passed = match (s.ratio_band, deepest) {
        (None, _) => true,
        (Some((lo, hi)), Some(l)) => l.ratio.is_some_and(|r| lo <= r && r <= hi),
        (Some(_), None) => false,
    };
    let rows: Vec<Vec<String>> = est
        .levels
        .iter()
        .map(|l| {
            vec![
                l.x.to_string(),
                l.p_hat.to_string(),
                l.ci_lo.to_string(),
                l.ci_hi.to_string(),
                field(l.formula),
                field(l.ratio),
                l.censor_frac.to_string(),
            ]
        })
        .collect();
    ctx.out.csv("tail.csv", &TAIL_HEADER, &rows)?;
    let report = TailReport {
        functional: s.functional,
        formula: formula.as_ref(),
        formula_note,
        ratio_band: s.ratio_band,
        deepest_resolvable: deepest.map(|l| l.x),
        estimate: &est,
    };
    ctx.out.json("tail.json", "tail", passed, &report)?;
    let summary = match deepest {
        Some(l) => format!(
            "{}: p_hat({}) = {:.4e}, ratio {}, censored {:.2e}{}",
            est.kernel,
            l.x,
            l.p_hat,
            l.ratio.map_or("n/a".into(), |r| format!("{r:.4}")),
            est.censored_fraction,
            if est.tainted { " (tainted)" } else { "" }
        ),
        None => format!("{}: no level has {} exceedances", est.kernel, s.min_exceedances),
    };
    Ok(Outcome { passed, summary })
}

#[derive(Serialize)]
struct AsymptoteRow {
    x: f64,
    formula_value: f64,
    certified: bool,
}

fn asymptote(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = ctx.section(&ctx.config.asymptote, "asymptote")?;
    let (spec, note) = ctx.formula(&s.formula)?;
    let spec = spec.ok_or_else(|| CliError::Config(note.unwrap_or_else(|| "no formula selected".into())))?;
    let rows = s
        .grid
        .iter()
        .map(|x| spec.evaluate(*x).map(|v| AsymptoteRow { x: *x, formula_value: v.value, certified: v.certified }))
        .collect::<Result<Vec<_>, _>>()?;
    let csv: Vec<Vec<String>> =
        rows.iter().map(|r| vec![r.x.to_string(), r.formula_value.to_string(), r.certified.to_string()]).collect();
    ctx.out.csv("asymptote.csv", &["x", "formula_value", "certified_flag"], &csv)?;
    ctx.out.json("asymptote.json", "asymptote", true, &serde_json::json!({ "formula": spec, "values": rows }))?;
    let certified = rows.iter().filter(|r| r.certified).count();
    Ok(Outcome { passed: true, summary: format!("{} points, {certified} certified", rows.len()) })
}

fn pareto_index(d: &HeavyTailDist) -> Option<f64> {
    match d.family() {
        Family::Pareto { alpha, .. } => Some(alpha),
        _ => None,
    }
}

fn model_service_index(model: &ModelSpec) -> Option<f64> {
    let services: Vec<&HeavyTailDist> = match model {
        ModelSpec::SingleServer { service, .. }
        | ModelSpec::Multiserver { service, .. }
        | ModelSpec::FixtureNonHomogeneous { service, .. } => vec![service],
        ModelSpec::Tandem { service1, service2, .. } => vec![service1, service2],
        ModelSpec::Jackson { services, .. } => services.iter().collect(),
    };
    services.iter().filter_map(|d| pareto_index(d)).reduce(f64::min)
}

fn moments(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = &ctx.config.moments;
    let model = ctx.model()?;
    let alpha = s.service_index.or_else(|| model_service_index(model)).ok_or_else(|| {
        CliError::Config("no Pareto service in the model; set moments.service_index".into())
    })?;
    let kernel = ctx.kernel()?;
    let policy = ctx.config.horizon;
    let r = with_kernel!(&kernel, k => moment_order_check(k, alpha, s.samples, s.k, &policy, ctx.seed)?);
    ctx.out.json("moments.json", "moments", r.consistent, &r)?;
    let summary = format!(
        "Hill index {:.4} +- {:.4} against {:.4}{}",
        r.estimate.index,
        r.estimate.std_error,
        r.expected_index,
        if r.heavy_tailed { "" } else { ", not heavy-tailed" }
    );
    Ok(Outcome { passed: r.consistent, summary })
}

fn bigjump(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = ctx.section(&ctx.config.bigjump, "bigjump")?;
    let x = match (s.x, s.formula_level) {
        (Some(x), None) => x,
        (None, Some(level)) => AsymptoteSpec::for_model(ctx.model()?)?.depth_for_level(level)?,
        _ => return Err(CliError::Config("bigjump needs exactly one of x and formula_level".into())),
    };
    let mut thetas = s.thetas.clone();
    if !thetas.contains(&s.theta) {
        thetas.push(s.theta);
    }
    let kernel = ctx.kernel()?;
    let policy = ctx.config.horizon;
    let r = with_kernel!(&kernel, k => big_jump_diagnostic(k, x, &thetas, s.target, s.budget, &policy, ctx.seed)?);
    let main = r.at(s.theta).expect("theta is in the list");
    let passed = !r.starved
        && main.fraction_one.is_some_and(|f| f >= s.min_one)
        && main.fraction_two_or_more.is_some_and(|f| f <= s.max_two);
    let mut rows = Vec::new();
    for t in &r.thresholds {
        for (c, n) in t.histogram.iter().enumerate() {
            rows.push(vec![t.theta.to_string(), c.to_string(), n.to_string()]);
        }
    }
    ctx.out.csv("bigjump.csv", &["theta", "jumps", "paths"], &rows)?;
    ctx.out.json("bigjump.json", "bigjump", passed, &r)?;
    let summary = if r.starved {
        format!("{}: conditioning starved, {} of {} paths above x = {x}", r.kernel, r.conditioned, r.target)
    } else {
        format!(
            "{}: x = {x}, theta = {}: one jump {:.3}, two or more {:.3}",
            r.kernel,
            s.theta,
            main.fraction_one.unwrap_or(0.0),
            main.fraction_two_or_more.unwrap_or(0.0)
        )
    };
    Ok(Outcome { passed, summary })
}

fn hcheck(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = ctx.section(&ctx.config.hcheck, "hcheck")?;
    let sampler = s.vector.sampler()?;
    let r = check_assumption_h(sampler, &s.grid, s.samples, s.min_exceedances, ctx.seed)?;
    let ci = |c: Option<msnet_core::estimation::RatioCi>| {
        c.map_or([String::new(), String::new(), String::new()], |c| {
            [c.value.to_string(), c.lo.to_string(), c.hi.to_string()]
        })
    };
    let rows: Vec<Vec<String>> = r
        .levels
        .iter()
        .map(|l| {
            let mut row = vec![l.x.to_string(), l.p_sum.to_string(), l.p_max.to_string(), l.p_marginal.to_string()];
            row.extend(ci(l.sum_over_marginal));
            row.extend(ci(l.max_over_marginal));
            row.extend(ci(l.sum_over_max));
            row
        })
        .collect();
    ctx.out.csv(
        "hcheck.csv",
        &[
            "x",
            "p_sum",
            "p_max",
            "p_marginal",
            "sum_over_marginal",
            "sum_over_marginal_lo",
            "sum_over_marginal_hi",
            "max_over_marginal",
            "max_over_marginal_lo",
            "max_over_marginal_hi",
            "sum_over_max",
            "sum_over_max_lo",
            "sum_over_max_hi",
        ],
        &rows,
    )?;
    let passed = r.verdict == HVerdict::Consistent;
    ctx.out.json("hcheck.json", "hcheck", passed, &r)?;
    let summary = match r.deepest_level() {
        Some(l) => format!(
            "{:?} at x = {}: max/marginal {}",
            r.verdict,
            l.x,
            l.max_over_marginal.map_or("n/a".into(), |c| format!("{:.4}", c.value))
        ),
        None => "no level resolvable".into(),
    };
    Ok(Outcome { passed, summary })
}

fn insensitivity(ctx: &mut Context<'_>) -> Result<Outcome, CliError> {
    let s = ctx.section(&ctx.config.insensitivity, "insensitivity")?;
    let model = ctx.model()?;
    let a = s.a.unwrap_or_else(|| model.arrivals().mean());
    let kernel = ctx.kernel()?;
    let policy = ctx.config.horizon;
    let r = with_kernel!(&kernel, k => interarrival_insensitivity_check(
        k, a, &s.grid, s.replications, &policy, s.min_exceedances, ctx.seed
    )?);
    let rows: Vec<Vec<String>> = r
        .levels
        .iter()
        .map(|l| {
            vec![
                l.x.to_string(),
                l.p_left.to_string(),
                l.p_right.to_string(),
                field(l.ratio.map(|c| c.value)),
                field(l.ratio.map(|c| c.lo)),
                field(l.ratio.map(|c| c.hi)),
            ]
        })
        .collect();
    ctx.out.csv("insensitivity.csv", &["x", "p_deterministic", "p_exponential", "ratio", "ci_lo", "ci_hi"], &rows)?;
    ctx.out.json("insensitivity.json", "insensitivity", r.consistent, &r)?;
    let deepest = r.levels.iter().find(|l| Some(l.x) == r.deepest);
    let summary = match deepest.and_then(|l| l.ratio.map(|c| (l.x, c))) {
        Some((x, c)) => format!("ratio at x = {x}: {:.4} [{:.4}, {:.4}]", c.value, c.lo, c.hi),
        None => "no mutually resolvable level".into(),
    };
    Ok(Outcome { passed: r.consistent, summary })
}

fn event_log(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let n = ctx.section(&ctx.config.event_log, "event_log")?.customers;
    let AnyKernel::Jackson(k) = ctx.kernel()? else {
        return Err(CliError::Config("event_log needs a jackson model".into()));
    };
    if n == 0 {
        return Err(CliError::Config("event_log.customers must be positive".into()));
    }
    let w = sample_window(&k, -(n as i64) + 1, n, RngStream::new(RngStream::derive(ctx.seed, 3), 0))?;
    let mut log = Vec::new();
    k.simulate(&w, Some(&mut log))?;
    let rows: Vec<Vec<String>> = log
        .iter()
        .map(|e| vec![e.epoch.to_string(), e.kind.as_str().to_string(), e.station.to_string(), e.customer.to_string()])
        .collect();
    ctx.out.csv("events.csv", &["epoch", "event_kind", "station", "customer"], &rows)
}
