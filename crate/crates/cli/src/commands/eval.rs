use bodyshape::eval::{confusion_matrix, render_report, report, ReportStyle};
use bodyshape::{ShapeLabel, NUM_CLASSES};

use super::Ctx;
use crate::cli::EvalArgs;
use crate::error::{CliError, CliResult};

pub fn run(ctx: &Ctx, args: &EvalArgs) -> CliResult<()> {
    let path = ctx.path(&args.predictions, &ctx.config.input, "predictions")?;
    let mut rdr = csv::Reader::from_path(&path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::data(format!("{} has no `{name}` column", path.display())))
    };
    let (pi, ai) = (col("predicted")?, col("actual")?);
    let (mut predicted, mut actual) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let label = |i: usize| -> CliResult<usize> {
            let field = rec.get(i).unwrap_or_default();
            let l: ShapeLabel = field
                .parse()
                .map_err(|e| CliError::data(format!("row {}: {e}", line + 1)))?;
            Ok(l.ordinal())
        };
        predicted.push(label(pi)?);
        actual.push(label(ai)?);
    }
    let cm = confusion_matrix(&actual, &predicted, NUM_CLASSES)?;
    let rep = report(&cm)?;
    ctx.out.write_report(&cm, &rep)?;
    ctx.out.say(render_report(&rep, ReportStyle::Text));
    Ok(())
}
