use std::io::Write;

use aggint::analytic::{
    compute_k_paper_literal, pdf_paper_literal, truncated_mean_paper, AnalyticError, DensityForm, PaperValue,
    StableLaw,
};
use aggint::detector::detection_curve;
use aggint::ltinv::stable_density;
use aggint::mcsim::{ks_distance, run_campaign, CampaignParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ModelSource, RunConfig};
use crate::error::CliError;
use crate::output::{csv_header, json_document, num, sink, write_json, write_row, Cell};
use crate::{AnalyticArgs, DetectArgs, EntropyArgs, MeanArgs, PdfArgs, SimulateArgs};

const DEFAULT_GRID: &str = "log:0.01:100:81";

fn law_info(law: &StableLaw, source: &ModelSource) -> Result<Value, CliError> {
    let mut info = json!({
        "k": num(law.k()),
        "eta": num(law.eta()),
        "form": law.form(),
    });
    if let ModelSource::Network(model) = source {
        info["k_from"] = json!("network");
        info["k_paper_literal"] = num(compute_k_paper_literal(model)?);
    } else {
        info["k_from"] = json!("direct");
    }
    Ok(info)
}

fn require_density(law: &StableLaw) -> Result<(), CliError> {
    if law.form() == DensityForm::PointMass {
        return Err(AnalyticError::PointMass {
            k: law.k(),
            what: "a density",
        }
        .into());
    }
    Ok(())
}

fn paper_cell(v: &PaperValue) -> (Cell, Cell) {
    match v {
        PaperValue::Value { value } => (Cell::Num(*value), Cell::Text("value")),
        PaperValue::NotEvaluable { .. } => (Cell::Empty, Cell::Text("not_evaluable")),
        PaperValue::NoRoot { .. } => (Cell::Empty, Cell::Text("no_root")),
    }
}

fn par_eval<F>(grid: &[f64], f: F) -> Result<Vec<f64>, CliError>
where
    F: Fn(f64) -> Result<f64, CliError> + Sync,
{
    grid.par_iter().map(|&r| f(r)).collect()
}

pub fn pdf(cfg: &RunConfig, a: &PdfArgs) -> Result<(), CliError> {
    let (law, source) = cfg.model.law()?;
    require_density(&law)?;
    let grid = cfg.grid.resolve(DEFAULT_GRID)?;
    if let Some(&bad) = grid.iter().find(|&&r| !(r > 0.0)) {
        return Err(CliError::Config(format!("density grid points must be > 0, got {bad}")));
    }
    let inv = cfg.inversion.resolve()?;
    let canonical = par_eval(&grid, |r| Ok(law.pdf(r)?))?;
    let literal: Option<Vec<PaperValue>> = if a.paper_literal {
        Some(
            grid.iter()
                .map(|&r| pdf_paper_literal(law.alpha(), law.k(), r))
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    // the oracle is only compared where the density is above 1e-12; deeper
    // in the left tail inversion has no relative accuracy left
    let oracle: Option<Vec<Option<f64>>> = if a.oracle {
        Some(
            grid.par_iter()
                .zip(&canonical)
                .map(|(&r, &c)| {
                    if c > 1e-12 {
                        Ok(Some(stable_density(law.k(), law.eta(), r, &inv)?))
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<_, CliError>>()?,
        )
    } else {
        None
    };
    let worst = oracle.as_ref().map(|o| {
        canonical
            .iter()
            .zip(o)
            .filter_map(|(c, o)| o.map(|o| ((o - c) / c).abs()))
            .fold(0.0, f64::max)
    });

    let mut extra = vec![("law", law_info(&law, &source)?)];
    if let Some(w) = worst {
        extra.push(("oracle", json!({"max_rel_err": num(w), "tol": a.oracle_tol})));
    }
    let mut w = sink(a.base.common.out.as_deref())?;
    csv_header(&mut w, "pdf", cfg, &extra)?;
    let mut cols = vec!["r", "pdf_canonical"];
    if literal.is_some() {
        cols.push("pdf_paper_literal");
    }
    if oracle.is_some() {
        cols.push("pdf_ltinv");
    }
    writeln!(w, "{}", cols.join(","))?;
    for (i, &r) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(r), Cell::Num(canonical[i])];
        if let Some(l) = &literal {
            row.push(paper_cell(&l[i]).0);
        }
        if let Some(o) = &oracle {
            row.push(o[i].map_or(Cell::Empty, Cell::Num));
        }
        write_row(&mut w, &row)?;
    }
    w.flush()?;
    match worst {
        Some(e) if !(e <= a.oracle_tol) => Err(CliError::Validation(format!(
            "canonical density and Laplace inversion differ by {e:e} (tolerance {:e})",
            a.oracle_tol
        ))),
        _ => Ok(()),
    }
}

pub fn cdf(cfg: &RunConfig, a: &AnalyticArgs) -> Result<(), CliError> {
    let (law, source) = cfg.model.law()?;
    let grid = cfg.grid.resolve(DEFAULT_GRID)?;
    let values = grid
        .par_iter()
        .map(|&r| Ok((law.cdf(r)?, law.ccdf(r)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut w = sink(a.common.out.as_deref())?;
    csv_header(&mut w, "cdf", cfg, &[("law", law_info(&law, &source)?)])?;
    writeln!(w, "r,cdf,ccdf")?;
    for (&r, (c, cc)) in grid.iter().zip(values) {
        write_row(&mut w, &[Cell::Num(r), Cell::Num(c), Cell::Num(cc)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn mean(cfg: &RunConfig, a: &MeanArgs) -> Result<(), CliError> {
    let (law, source) = cfg.model.law()?;
    let grid = match (&cfg.grid.values, &cfg.grid.spec, &source) {
        (None, None, ModelSource::Network(m)) => vec![m.region().r_max],
        (None, None, ModelSource::Direct) => {
            return Err(CliError::Config(
                "mean needs r_max values (--r or --grid) when K is given directly".into(),
            ))
        }
        _ => cfg.grid.resolve(DEFAULT_GRID)?,
    };
    let means = par_eval(&grid, |r| Ok(law.truncated_mean(r)?))?;
    let literal: Option<Vec<PaperValue>> = if a.paper_literal {
        Some(
            grid.iter()
                .map(|&r| truncated_mean_paper(law.alpha(), law.k(), r))
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    let mut w = sink(a.base.common.out.as_deref())?;
    csv_header(&mut w, "mean", cfg, &[("law", law_info(&law, &source)?)])?;
    if literal.is_some() {
        writeln!(w, "r_max,mean_canonical,mean_paper_literal,paper_status")?;
    } else {
        writeln!(w, "r_max,mean_canonical")?;
    }
    for (i, &r) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(r), Cell::Num(means[i])];
        if let Some(l) = &literal {
            let (v, status) = paper_cell(&l[i]);
            row.push(v);
            row.push(status);
        }
        write_row(&mut w, &row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn entropy(cfg: &RunConfig, a: &EntropyArgs) -> Result<(), CliError> {
    let (law, source) = match a.target_delta {
        Some(target) => {
            if cfg.model.k.is_some() || cfg.model.has_network() {
                return Err(CliError::Config("--target-delta determines K; do not also give a model".into()));
            }
            let eta = 2.0 / cfg.model.alpha()?;
            let k = StableLaw::k_for_uncertainty(eta, target)?;
            (StableLaw::new(k, eta)?, ModelSource::Direct)
        }
        None => cfg.model.law()?,
    };
    let delta = law.uncertainty()?;
    let mut w = sink(a.common.out.as_deref())?;
    let mut extra = vec![("law", law_info(&law, &source)?)];
    if let Some(t) = a.target_delta {
        extra.push(("target_delta", num(t)));
    }
    csv_header(&mut w, "entropy", cfg, &extra)?;
    writeln!(w, "alpha,eta,k,delta")?;
    write_row(
        &mut w,
        &[
            Cell::Num(law.alpha()),
            Cell::Num(law.eta()),
            Cell::Num(law.k()),
            Cell::Num(delta),
        ],
    )?;
    w.flush()?;
    Ok(())
}

pub fn simulate(cfg: &RunConfig, a: &SimulateArgs) -> Result<(), CliError> {
    if cfg.model.k.is_some() {
        return Err(CliError::Config(
            "simulate draws Poisson networks; give --lambda and the region instead of --k".into(),
        ));
    }
    let model = cfg.model.network()?;
    let mut params = CampaignParams::new(model, cfg.campaign.n_trials, cfg.seed.unwrap_or(1));
    params.tx_power = cfg.campaign.tx_power;
    let result = run_campaign(&params)?;
    let summary = result.summary();
    let meta = json!({
        "seed_used": result.seed_used,
        "rng_algorithm": result.rng_algorithm,
        "n_nodes_mean": num(result.n_nodes_mean),
    });

    let mut w = sink(a.common.out.as_deref())?;
    csv_header(&mut w, "simulate", cfg, &[("campaign", meta.clone())])?;
    result.write_csv(&mut w)?;
    w.flush()?;

    if let Some(path) = &a.json {
        // transmit power P scales the law as K -> K P^eta
        let analytic = aggint::analytic::compute_k(&model).and_then(|law| {
            StableLaw::new(law.k() * params.tx_power.powf(law.eta()), law.eta())
        });
        let ks = match analytic {
            Ok(law) if law.form() != DensityForm::PointMass => {
                let d = ks_distance(&result.samples, |x| law.cdf(x).unwrap_or(f64::NAN))?;
                json!({"k": num(law.k()), "eta": num(law.eta()), "ks_distance": num(d)})
            }
            Ok(law) => json!({"k": num(law.k()), "note": "point-mass law; KS not computed"}),
            Err(e) => json!({"note": e.to_string()}),
        };
        let doc = json_document(
            "simulate",
            cfg,
            json!({
                "params": params,
                "campaign": meta,
                "summary": summary,
                "analytic": ks,
                "samples": result.samples.iter().map(|&v| num(v)).collect::<Vec<_>>(),
            }),
        )?;
        write_json(path, &doc)?;
    }
    Ok(())
}

/// Law used for the interference: the model if one is given, else
/// `alpha` (default 4) with `K` set by `delta` (or 1 without one).
fn detector_law(cfg: &RunConfig) -> Result<(StableLaw, ModelSource), CliError> {
    if cfg.model.k.is_some() || cfg.model.has_network() {
        return cfg.model.law();
    }
    let eta = 2.0 / cfg.model.alpha.unwrap_or(4.0);
    let k = match cfg.detector.delta {
        Some(d) => StableLaw::k_for_uncertainty(eta, d)?,
        None => 1.0,
    };
    Ok((StableLaw::new(k, eta)?, ModelSource::Direct))
}

pub fn detect(cfg: &RunConfig, a: &DetectArgs) -> Result<(), CliError> {
    let (law, source) = detector_law(cfg)?;
    let curve = detection_curve(&cfg.detector, &law)?;
    let result = json!({
        "pfa_target": num(cfg.detector.target_pfa),
        "pfa_achieved": num(curve.pfa_achieved),
        "threshold": num(curve.threshold),
        "threshold_calibrated": num(curve.threshold_calibrated),
        "interference_median": num(curve.interference_median),
    });
    let law_json = law_info(&law, &source)?;
    let mut w = sink(a.common.out.as_deref())?;
    csv_header(&mut w, "detect", cfg, &[("law", law_json.clone()), ("result", result.clone())])?;
    curve.write_csv(&mut w)?;
    w.flush()?;
    if let Some(path) = &a.json {
        let doc = json_document(
            "detect",
            cfg,
            json!({
                "law": law_json,
                "result": result,
                "snr_db": curve.snr_db,
                "pd": curve.pd,
            }),
        )?;
        write_json(path, &doc)?;
    }
    Ok(())
}
