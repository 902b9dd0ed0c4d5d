//! The `validate` report: closed forms against Laplace inversion, Monte
//! Carlo and the stable sampler, plus the optional discrepancy section for
//! the published formulas.

use std::f64::consts::PI;
use std::io::Write;

use aggint::analytic::{
    airy_asymptotic, airy_asymptotic_crossover, compute_k, compute_k_paper_literal, lambda_theta_for_k,
    pdf_paper_literal, truncated_mean_paper, FadingSpec, InterferenceModel, PaperValue, StableLaw,
};
use aggint::geometry::{lune, RegionSpec};
use aggint::ltinv::{stable_density, InversionConfig};
use aggint::mcsim::{empirical_laplace, ks_distance, run_campaign, stable_sample_seeded, CampaignParams};
use aggint::quad::{integrate, QuadConfig};
use aggint::specfun::{airy_ai, EULER_GAMMA};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{json_document, num, sink};
use crate::ValidateArgs;

pub const ETAS: [f64; 3] = [1.0 / 3.0, 0.5, 2.0 / 3.0];
pub const KS: [f64; 3] = [0.25, 0.5598, 1.0];
pub const DEFAULT_MC_TRIALS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Replace every K handed to the analytic checks by -K.
    NegateK,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: Value,
    pub bound: Value,
    pub passed: bool,
    /// Reported only; does not affect the overall verdict.
    pub informational: bool,
    pub details: Value,
}

impl Check {
    fn upper(name: &'static str, value: f64, bound: f64, details: Value) -> Self {
        Self {
            name,
            value: num(value),
            bound: num(bound),
            passed: value <= bound,
            informational: false,
            details,
        }
    }

    fn failed(name: &'static str, bound: f64, err: CliError) -> Self {
        Self {
            name,
            value: Value::Null,
            bound: num(bound),
            passed: false,
            informational: false,
            details: json!({ "error": err.to_string() }),
        }
    }

    fn info(mut self) -> Self {
        self.informational = true;
        self
    }
}

struct Ctx {
    fault: Option<Fault>,
    seed: u64,
    mc_trials: usize,
}

impl Ctx {
    /// Law as the analytic side sees it, with any injected fault applied.
    fn law(&self, k: f64, eta: f64) -> Result<StableLaw, CliError> {
        let law = StableLaw::new(k, eta)?;
        Ok(match self.fault {
            Some(Fault::NegateK) => StableLaw::new_unchecked(-law.k(), eta),
            None => law,
        })
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn run_check(name: &'static str, bound: f64, f: impl FnOnce() -> Result<Check, CliError>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, bound, e))
}

fn closed_form_vs_inversion(ctx: &Ctx) -> Check {
    const NAME: &str = "closed_form_vs_inversion";
    const BOUND: f64 = 1e-6;
    run_check(NAME, BOUND, || {
        let inv = InversionConfig::default();
        let grid = log_grid(1e-3, 1e4, 50);
        let mut worst = 0.0f64;
        let mut cases = Vec::new();
        for &eta in &ETAS {
            for &k in &KS {
                let law = ctx.law(k, eta)?;
                let errs = grid
                    .par_iter()
                    .map(|&r| {
                        let p = law.pdf(r)?;
                        if p.abs() <= 1e-12 {
                            return Ok(None);
                        }
                        let o = stable_density(k, eta, r, &inv)?;
                        Ok(Some(((p - o) / o).abs()))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let used = errs.iter().flatten().count();
                let max = errs.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
                worst = worst.max(max);
                cases.push(json!({"eta": eta, "k": k, "points": used, "max_rel_err": num(max)}));
            }
        }
        Ok(Check::upper(NAME, worst, BOUND, json!({ "cases": cases })))
    })
}

fn normalization(ctx: &Ctx) -> Check {
    const NAME: &str = "normalization";
    const BOUND: f64 = 1e-6;
    run_check(NAME, BOUND, || {
        let mut worst = 0.0f64;
        let mut cases = Vec::new();
        for &eta in &ETAS {
            for &k in &KS {
                // a failing case counts as an infinite deviation; the others still run
                match ctx.law(k, eta).and_then(|law| Ok(law.normalization()?)) {
                    Ok(total) => {
                        let err = (total - 1.0).abs();
                        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
                        cases.push(json!({"eta": eta, "k": k, "integral": num(total)}));
                    }
                    Err(e) => {
                        worst = f64::INFINITY;
                        cases.push(json!({"eta": eta, "k": k, "error": e.to_string()}));
                    }
                }
            }
        }
        Ok(Check::upper(NAME, worst, BOUND, json!({ "cases": cases })))
    })
}

/// Full-disk Rayleigh network at alpha = 4, lambda = 0.05, with r_max set
/// by the truncation rule at epsilon = 0.01.
pub fn mc_model(r_max: Option<f64>) -> Result<InterferenceModel, CliError> {
    let epsilon = 0.01;
    let r = r_max.unwrap_or_else(|| RegionSpec::truncation_radius(4.0, epsilon));
    let region = RegionSpec::full_disk(r)?.with_epsilon(epsilon)?;
    Ok(InterferenceModel::new(4.0, 0.05, region, FadingSpec::default())?)
}

fn monte_carlo(ctx: &Ctx, r_max: Option<f64>, name: &'static str) -> Check {
    const BOUND: f64 = 0.02;
    run_check(name, BOUND, || {
        let model = mc_model(r_max)?;
        let k = compute_k(&model)?.k();
        let law = ctx.law(k, model.eta())?;
        let params = CampaignParams::new(model, ctx.mc_trials, ctx.seed);
        let result = run_campaign(&params)?;
        let ks = ks_distance(&result.samples, |x| law.cdf(x).unwrap_or(f64::NAN))?;
        let lt: Vec<Value> = [0.01, 0.1, 1.0]
            .iter()
            .map(|&s| {
                let (mean, se) = empirical_laplace(&result.samples, s);
                json!({"s": s, "empirical": num(mean), "std_err": num(se), "analytic": num((-k * s.sqrt()).exp())})
            })
            .collect();
        Ok(Check::upper(
            name,
            ks,
            BOUND,
            json!({
                "alpha": 4.0,
                "lambda": 0.05,
                "r_max": model.region().r_max,
                "k": num(k),
                "trials": ctx.mc_trials,
                "seed": ctx.seed,
                "n_nodes_mean": num(result.n_nodes_mean),
                "laplace": lt,
            }),
        ))
    })
}

fn stable_sampler(ctx: &Ctx) -> Check {
    const NAME: &str = "stable_sampler_vs_levy";
    const BOUND: f64 = 0.01;
    run_check(NAME, BOUND, || {
        let law = StableLaw::new(1.0, 0.5)?;
        let n = 100_000;
        let samples = stable_sample_seeded(&law, n, ctx.seed)?;
        let ks = ks_distance(&samples, |x| law.cdf(x).unwrap_or(f64::NAN))?;
        Ok(Check::upper(NAME, ks, BOUND, json!({"eta": 0.5, "k": 1.0, "n": n, "seed": ctx.seed})))
    })
}

/// Differential entropy of the Lévy law with scale `c = K²/2`.
pub fn levy_entropy(k: f64) -> f64 {
    let c = k * k / 2.0;
    (1.0 + 3.0 * EULER_GAMMA + (16.0 * PI * c * c).ln()) / 2.0
}

fn entropy(ctx: &Ctx) -> Check {
    const NAME: &str = "entropy_vs_levy";
    const BOUND: f64 = 1e-6;
    run_check(NAME, BOUND, || {
        let mut worst = 0.0f64;
        let mut cases = Vec::new();
        for k in [0.5, 1.0, 2.0] {
            let h = -ctx.law(k, 0.5)?.uncertainty()?;
            let want = levy_entropy(k);
            let err = ((h - want) / want).abs();
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            cases.push(json!({"k": k, "entropy": num(h), "closed_form": num(want)}));
        }
        Ok(Check::upper(NAME, worst, BOUND, json!({ "cases": cases })))
    })
}

fn airy(_: &Ctx) -> Check {
    const NAME: &str = "airy_asymptotic";
    const BOUND: f64 = 0.01;
    run_check(NAME, BOUND, || {
        // the error falls monotonically; Ai underflows past x ~ 100
        let worst = (0..=368)
            .map(|i| 8.0 + 0.25 * i as f64)
            .map(|x| (airy_asymptotic(x) / airy_ai(x) - 1.0).abs())
            .fold(0.0f64, f64::max);
        Ok(Check::upper(
            NAME,
            worst,
            BOUND,
            json!({
                "x_range": [8.0, 100.0],
                "crossover_5pct": num(airy_asymptotic_crossover(0.05)),
                "crossover_1pct": num(airy_asymptotic_crossover(0.01)),
            }),
        ))
    })
}

/// Radial integral `∫_{r_p}^{r_max} t^{-η} e^{-t} dt` by quadrature after
/// `u = t^{1-η}`, which removes the endpoint singularity.
pub fn radial_quadrature(eta: f64, r_p: f64, r_max: f64) -> Result<f64, CliError> {
    let a = 1.0 - eta;
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 2000,
    };
    let res = integrate(|u| (-u.powf(1.0 / a)).exp() / a, r_p.powf(a), r_max.powf(a), &cfg)
        .map_err(|e| CliError::NonConvergence(e.to_string()))?;
    Ok(res.value)
}

fn k_quadrature(ctx: &Ctx) -> Check {
    const NAME: &str = "k_closed_form_vs_quadrature";
    const BOUND: f64 = 1e-10;
    run_check(NAME, BOUND, || {
        let mut worst = 0.0f64;
        let mut cases = Vec::new();
        for alpha in [3.0, 4.0, 6.0] {
            for r_p in [0.0, 0.5, 1.0] {
                for r_max in [2.0, 3.4, 10.0] {
                    let region = RegionSpec::new(r_max, r_p, 0.0)?;
                    let model = InterferenceModel::new(alpha, 1.0, region, FadingSpec::default())?;
                    let eta = model.eta();
                    let closed = ctx.law(compute_k(&model)?.k(), eta)?.k();
                    let theta1 = lune(&region)?.theta1;
                    let moment = model.fading().eta_moment(eta)?;
                    let quad = model.lambda() * theta1 * moment * radial_quadrature(eta, r_p, r_max)?;
                    let err = ((closed - quad) / quad).abs();
                    worst = worst.max(err);
                    cases.push(json!({"alpha": alpha, "r_p": r_p, "r_max": r_max, "k": num(closed), "rel_err": num(err)}));
                }
            }
        }
        Ok(Check::upper(NAME, worst, BOUND, json!({ "cases": cases })))
    })
}

fn paper_value(v: &PaperValue) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn literal_pdf_section() -> Result<Value, CliError> {
    let grid = log_grid(1e-3, 1e4, 50);
    let mut out = serde_json::Map::new();
    for alpha in [2.0, 3.0, 4.0, 6.0] {
        let key = format!("alpha_{alpha}");
        if alpha == 2.0 {
            out.insert(key, paper_value(&pdf_paper_literal(alpha, 1.0, 1.0)?));
            continue;
        }
        let mut worst = (0.0f64, Value::Null);
        for &k in &KS {
            let law = StableLaw::from_alpha(k, alpha)?;
            for &r in &grid {
                let c = law.pdf(r)?;
                if c <= 1e-12 {
                    continue;
                }
                let Some(p) = pdf_paper_literal(alpha, k, r)?.value() else {
                    continue;
                };
                let dev = ((p - c) / c).abs();
                if dev > worst.0 || dev.is_nan() {
                    worst = (dev, json!({"k": k, "r": r, "canonical": num(c), "paper_literal": num(p)}));
                }
            }
        }
        out.insert(key, json!({"max_rel_dev": num(worst.0), "at": worst.1}));
    }
    Ok(Value::Object(out))
}

fn literal_mean_section() -> Result<Value, CliError> {
    let r_maxes = [1.0, 3.4, 10.0];
    let mut out = serde_json::Map::new();
    for alpha in [4.0, 6.0] {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for &k in &KS {
            let law = StableLaw::from_alpha(k, alpha)?;
            for &r in &r_maxes {
                let c = law.truncated_mean(r)?;
                let p = truncated_mean_paper(alpha, k, r)?;
                let dev = p.value().map(|v| ((v - c) / c).abs());
                if let Some(d) = dev {
                    worst = worst.max(d);
                }
                rows.push(json!({
                    "k": k, "r_max": r, "canonical": num(c), "paper": paper_value(&p),
                    "rel_dev": dev.map(num),
                    "over_10pct": dev.map(|d| d > 0.1),
                }));
            }
        }
        out.insert(format!("alpha_{alpha}"), json!({"max_rel_dev": num(worst), "cases": rows}));
    }
    let mut rows = Vec::new();
    for &k in &KS {
        let law = StableLaw::from_alpha(k, 3.0)?;
        for &r in &r_maxes {
            let c = law.truncated_mean(r)?;
            rows.push(json!({"k": k, "r_max": r, "canonical": num(c), "paper": paper_value(&truncated_mean_paper(3.0, k, r)?)}));
        }
    }
    out.insert("alpha_3".into(), json!({ "cases": rows }));
    out.insert("alpha_2".into(), paper_value(&truncated_mean_paper(2.0, 1.0, 3.4)?));
    Ok(Value::Object(out))
}

fn paper_literal_section() -> Result<Value, CliError> {
    let model = mc_model(None)?;
    let k_literal = compute_k_paper_literal(&model)?;
    let k = compute_k(&model)?.k();
    let rp70 = match RegionSpec::new(3.4, 70.0, 0.0)
        .map_err(CliError::from)
        .and_then(|r| Ok(InterferenceModel::new(4.0, 1.0, r, FadingSpec::default())?))
        .and_then(|m| Ok(compute_k(&m)?))
    {
        Ok(law) => json!({"k": num(law.k())}),
        Err(e) => json!({"error": e.to_string()}),
    };
    Ok(json!({
        "pdf": literal_pdf_section()?,
        "mean": literal_mean_section()?,
        "compute_k": {
            "model": {"alpha": 4.0, "lambda": 0.05, "r_max": model.region().r_max, "r_p": 0.0},
            "k_canonical": num(k),
            "k_paper_literal": num(k_literal),
            "ratio": num(k_literal / k),
        },
        "lambda_theta_for_k_0_5598": {
            "alpha": 4.0, "r_max": 3.4, "r_p": 0.0,
            "lambda_theta": num(lambda_theta_for_k(4.0, 3.4, 0.0, 0.5598)?),
        },
        "k_for_delta_2_62": {
            "alpha": 4.0,
            "k": num(StableLaw::k_for_uncertainty(0.5, 2.62)?),
        },
        "geometry_r_max_3_4_r_p_70": rp70,
    }))
}

pub fn run(cfg: &RunConfig, a: &ValidateArgs) -> Result<(), CliError> {
    let ctx = Ctx {
        fault: a.inject_fault,
        seed: cfg.seed.unwrap_or(1),
        mc_trials: a.mc_trials.unwrap_or(DEFAULT_MC_TRIALS),
    };
    let checks = vec![
        closed_form_vs_inversion(&ctx),
        normalization(&ctx),
        monte_carlo(&ctx, None, "monte_carlo_vs_analytic"),
        monte_carlo(&ctx, Some(20.0), "monte_carlo_vs_analytic_r_max_20").info(),
        stable_sampler(&ctx),
        entropy(&ctx),
        airy(&ctx),
        k_quadrature(&ctx),
    ];
    let passed = checks.iter().all(|c| c.passed || c.informational);
    let mut body = json!({
        "seed": ctx.seed,
        "mc_trials": ctx.mc_trials,
        "fault": a.inject_fault.map(|f| format!("{f:?}")),
        "checks": checks,
        "passed": passed,
    });
    if a.paper_literal {
        body["paper_literal"] = paper_literal_section()?;
    }
    let doc = json_document("validate", cfg, body)?;
    let mut w = sink(a.common.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    for c in &checks {
        let tag = match (c.passed, c.informational) {
            (true, _) => "pass",
            (false, true) => "info",
            (false, false) => "FAIL",
        };
        eprintln!("{tag:4} {:36} value {} bound {}", c.name, c.value, c.bound);
    }
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = checks
            .iter()
            .filter(|c| !c.passed && !c.informational)
            .map(|c| c.name)
            .collect();
        Err(CliError::Validation(failed.join(", ")))
    }
}
