use std::path::Path;

use bodyshape::anthro::{classify_drop, PopulationStats};
use bodyshape::eval::{confusion_matrix, report};
use bodyshape::neural::{load_checkpoint, mask_input, predict, ratio_input, Architecture};
use bodyshape::stats::{ModelDocument, StatsModel};
use bodyshape::{ShapeLabel, NUM_CLASSES};
use clap::ValueEnum;
use rayon::prelude::*;

use super::models::{load_drop_stats, ClassifierModel};
use super::Ctx;
use crate::cli::{ClassifyArgs, Method};
use crate::data::{load_masks, measured_input, read_manifest_at, Measured};
use crate::error::{CliError, CliResult};

struct Predictions {
    ids: Vec<String>,
    predicted: Vec<ShapeLabel>,
    actual: Vec<Option<ShapeLabel>>,
    /// Per-row class probabilities from neural methods.
    probabilities: Option<Vec<Vec<f64>>>,
    failures: Vec<(String, String)>,
}

impl Predictions {
    fn from_measured(m: Measured, predicted: Vec<ShapeLabel>) -> Self {
        Self {
            ids: m.ids,
            predicted,
            actual: m.labels,
            probabilities: None,
            failures: m.failures,
        }
    }
}

pub fn parse_method(s: &str) -> CliResult<Method> {
    Method::from_str(s, false).map_err(|_| CliError::usage(format!("unknown method {s:?}")))
}

fn fit_source(ctx: &Ctx, fit_on: &Path) -> CliResult<Measured> {
    let m = measured_input(fit_on)?;
    if m.measurements.is_empty() {
        return Err(CliError::data(format!("{} has no rows to fit on", fit_on.display())));
    }
    ctx.out.say(format!("fitting on {} rows of {}", m.measurements.len(), fit_on.display()));
    Ok(m)
}

fn classify_measurements(ctx: &Ctx, method: Method, input: &Path, model: Option<&Path>, fit_on: Option<&Path>) -> CliResult<Predictions> {
    let missing = || CliError::usage(format!("method {} needs --model or --fit-on", method.name()));
    let measured = measured_input(input)?;
    let predicted = match method {
        Method::Drop => {
            let stats = match (model, fit_on) {
                (Some(p), _) => load_drop_stats(p)?,
                (None, Some(p)) => {
                    let stats = PopulationStats::fit(&fit_source(ctx, p)?.measurements)?;
                    ctx.out.write_json("model.json", &ModelDocument::new(StatsModel::DropStats(stats)))?;
                    stats
                }
                (None, None) => return Err(missing()),
            };
            measured
                .measurements
                .iter()
                .map(|m| classify_drop(m, &stats))
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => {
            let clf = match (model, fit_on) {
                (Some(p), _) => ClassifierModel::load(p, method)?,
                (None, Some(p)) => {
                    let src = fit_source(ctx, p)?;
                    let clf = ClassifierModel::fit(method, &src.measurements, &src.ordinals()?, ctx.seed)?;
                    ctx.out.write_json("model.json", &clf)?;
                    clf
                }
                (None, None) => return Err(missing()),
            };
            clf.predict(&measured.measurements)?
        }
    };
    Ok(Predictions::from_measured(measured, predicted))
}

fn classify_neural(method: Method, input: &Path, model: Option<&Path>) -> CliResult<Predictions> {
    let path = model.ok_or_else(|| CliError::usage(format!("method {} needs --model <checkpoint>", method.name())))?;
    let net = load_checkpoint(path)?;
    if net.arch() != method.name() {
        return Err(CliError::usage(format!("{} holds a {} network, not {}", path.display(), net.arch(), method.name())));
    }
    let arch: Architecture = net.arch().parse()?;
    let (ids, inputs, actual, failures) = if arch.takes_images() {
        let (base, entries) = read_manifest_at(input)?;
        let masks = load_masks(&base, &entries)?;
        let inputs = masks.iter().map(mask_input).collect::<Result<Vec<_>, _>>()?;
        let ids = entries.iter().map(|e| e.path.clone()).collect();
        (ids, inputs, entries.iter().map(|e| e.label).collect(), Vec::new())
    } else {
        let m = measured_input(input)?;
        let inputs = m.measurements.iter().map(ratio_input).collect::<Result<Vec<_>, _>>()?;
        (m.ids, inputs, m.labels, m.failures)
    };
    let preds = inputs.par_iter().map(|x| predict(&net, x)).collect::<Result<Vec<_>, _>>()?;
    Ok(Predictions {
        ids,
        predicted: preds.iter().map(|p| p.label).collect(),
        actual,
        probabilities: Some(preds.into_iter().map(|p| p.probabilities).collect()),
        failures,
    })
}

pub fn run(ctx: &Ctx, args: &ClassifyArgs) -> CliResult<()> {
    let method = match (args.method, &ctx.config.method) {
        (Some(m), _) => m,
        (None, Some(s)) => parse_method(s)?,
        (None, None) => return Err(CliError::usage("missing --method")),
    };
    let input = ctx.path(&args.input, &ctx.config.input, "input")?;
    let model = ctx.optional_path(&args.model, &ctx.config.model);
    let fit_on = ctx.optional_path(&args.fit_on, &ctx.config.fit_on);

    let p = if method.is_neural() {
        classify_neural(method, &input, model.as_deref())?
    } else {
        classify_measurements(ctx, method, &input, model.as_deref(), fit_on.as_deref())?
    };

    let labeled = !p.actual.is_empty() && p.actual.iter().all(Option::is_some);
    let mut header = vec!["id".to_string(), "predicted".to_string()];
    if labeled {
        header.push("actual".into());
    }
    if p.probabilities.is_some() {
        header.extend(ShapeLabel::ALL.iter().map(|l| format!("p_{}", l.name())));
    }
    let rows: Vec<Vec<String>> = (0..p.ids.len())
        .map(|i| {
            let mut r = vec![p.ids[i].clone(), p.predicted[i].name().to_string()];
            if let (true, Some(a)) = (labeled, p.actual[i]) {
                r.push(a.name().to_string());
            }
            if let Some(probs) = &p.probabilities {
                r.extend(probs[i].iter().map(f64::to_string));
            }
            r
        })
        .collect();
    ctx.out.write_csv("predictions.csv", &header, &rows)?;
    if !p.failures.is_empty() {
        let rows: Vec<Vec<String>> = p.failures.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
        ctx.out.write_csv("errors.csv", &["path".into(), "error".into()], &rows)?;
    }
    ctx.out.say(format!("{}: classified {} rows", method.name(), p.ids.len()));

    if labeled {
        let actual: Vec<usize> = p.actual.iter().map(|l| l.expect("labeled").ordinal()).collect();
        let predicted: Vec<usize> = p.predicted.iter().map(|l| l.ordinal()).collect();
        let cm = confusion_matrix(&actual, &predicted, NUM_CLASSES)?;
        let rep = report(&cm)?;
        ctx.out.write_report(&cm, &rep)?;
        ctx.out.say(bodyshape::eval::render_report(&rep, bodyshape::eval::ReportStyle::Text));
        ctx.out.say(format!("accuracy: {:.4}", rep.accuracy));
    }
    Ok(())
}
