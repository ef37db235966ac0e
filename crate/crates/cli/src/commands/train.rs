use bodyshape::anthro::ColumnScaler;
use bodyshape::eval::{confusion_matrix, curve_csv, render_report, report, ReportStyle};
use bodyshape::neural::{
    evaluate, freeze_layers, load_checkpoint, mask_input, ratio_input, stratified_split, train, Architecture,
    Dataset, FreezeSpec, Network, TrainConfig,
};
use bodyshape::NUM_CLASSES;

use super::models::ratio_table;
use super::Ctx;
use crate::cli::{ArchArg, TrainArgs};
use crate::data::{load_masks, measured_input, read_manifest_at};
use crate::error::{CliError, CliResult};

fn resolve_arch(ctx: &Ctx, args: &TrainArgs) -> CliResult<Architecture> {
    match (args.arch, &ctx.config.train.arch) {
        (Some(ArchArg::Mlp13), _) => Ok(Architecture::Mlp13),
        (Some(ArchArg::Rescnn), _) => Ok(Architecture::ResCnn),
        (Some(ArchArg::Incnn), _) => Ok(Architecture::IncCnn),
        (None, Some(s)) => s.parse().map_err(|e: bodyshape::Error| CliError::usage(e.to_string())),
        (None, None) => Err(CliError::usage("missing --arch")),
    }
}

fn resolve_config(ctx: &Ctx, args: &TrainArgs) -> CliResult<TrainConfig> {
    let t = &ctx.config.train;
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: args.lr.or(t.learning_rate).unwrap_or(d.learning_rate),
        momentum: args.momentum.or(t.momentum).unwrap_or(d.momentum),
        batch_size: args.batch_size.or(t.batch_size).unwrap_or(d.batch_size),
        epochs: args.epochs.or(t.epochs).unwrap_or(d.epochs),
        seed: ctx.seed,
        validation_fraction: args.val_fraction.or(t.validation_fraction).unwrap_or(d.validation_fraction),
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn run(ctx: &Ctx, args: &TrainArgs) -> CliResult<()> {
    let arch = resolve_arch(ctx, args)?;
    let cfg = resolve_config(ctx, args)?;
    let freeze = args
        .freeze
        .as_ref()
        .or(ctx.config.train.freeze.as_ref())
        .map(|s| s.parse::<FreezeSpec>().map_err(|e| CliError::usage(e.to_string())))
        .transpose()?;
    let input = ctx.path(&args.input, &ctx.config.input, "input")?;
    let init_from = ctx.optional_path(&args.init_from, &ctx.config.train.init_from);

    let mut ratio_rows = None;
    let (inputs, labels) = if arch.takes_images() {
        let (base, entries) = read_manifest_at(&input)?;
        let labels = entries
            .iter()
            .map(|e| e.label.map(|l| l.ordinal()).ok_or_else(|| CliError::data(format!("{} has no label", e.path))))
            .collect::<CliResult<Vec<_>>>()?;
        let masks = load_masks(&base, &entries)?;
        (masks.iter().map(mask_input).collect::<Result<Vec<_>, _>>()?, labels)
    } else {
        let m = measured_input(&input)?;
        let labels = m.ordinals()?;
        let inputs = m.measurements.iter().map(ratio_input).collect::<Result<Vec<_>, _>>()?;
        ratio_rows = Some(m.measurements);
        (inputs, labels)
    };
    let data = Dataset::new(inputs, labels.clone())?;

    let mut net: Network = match &init_from {
        Some(p) => {
            let net = load_checkpoint(p)?;
            if net.arch() != arch.name() {
                return Err(CliError::usage(format!("{} holds a {} network, not {}", p.display(), net.arch(), arch)));
            }
            net
        }
        None => arch.build(ctx.seed)?,
    };
    if let (None, Some(ms)) = (&init_from, &ratio_rows) {
        // Standardize with statistics of the training split only.
        let (train_idx, _) = stratified_split(&labels, cfg.validation_fraction, cfg.seed)?;
        let picked: Vec<_> = train_idx.iter().map(|&i| ms[i]).collect();
        net = net.with_input_scaling(ColumnScaler::fit(&ratio_table(&picked, vec![None; picked.len()])?)?)?;
    }
    if let Some(spec) = &freeze {
        net = freeze_layers(&net, spec)?;
    }

    let run = train(&net, &data, &cfg)?;
    let mut ckpt = run.network.to_checkpoint_json()?;
    ckpt.push('\n');
    ctx.out.write("checkpoint.json", ckpt)?;
    ctx.out.write("curve.csv", curve_csv(&run.curve)?)?;

    let val = evaluate(&run.network, &data, &run.validation_indices)?;
    let actual: Vec<usize> = run.validation_indices.iter().map(|&i| labels[i]).collect();
    let cm = confusion_matrix(&actual, &val.predictions, NUM_CLASSES)?;
    let rep = report(&cm)?;
    ctx.out.write_report(&cm, &rep)?;

    let last = run.curve.records.last().expect("at least one epoch");
    ctx.out.say(format!(
        "{arch}: {} epochs, train loss {:.4}, val loss {:.4}, val accuracy {:.4} ({} train / {} val)",
        cfg.epochs,
        last.train_loss,
        last.val_loss,
        val.accuracy,
        run.train_indices.len(),
        run.validation_indices.len()
    ));
    ctx.out.say(render_report(&rep, ReportStyle::Text));
    Ok(())
}
