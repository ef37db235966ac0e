use super::Ctx;
use crate::cli::MeasureArgs;
use crate::data::{measure_manifest, read_manifest_at};
use crate::error::{CliError, CliResult};

pub fn run(ctx: &Ctx, args: &MeasureArgs) -> CliResult<()> {
    let path = ctx.path(&args.manifest, &ctx.config.input, "manifest")?;
    let (base, entries) = read_manifest_at(&path)?;
    let measured = measure_manifest(&base, &entries);

    let mut csv = Vec::new();
    measured.table()?.write_csv(&mut csv)?;
    ctx.out.write("measurements.csv", csv)?;
    let rows: Vec<Vec<String>> = measured.failures.iter().map(|(p, e)| vec![p.clone(), e.clone()]).collect();
    ctx.out.write_csv("errors.csv", &["path".into(), "error".into()], &rows)?;

    ctx.out.say(format!(
        "measured {} of {} masks ({} failed)",
        measured.measurements.len(),
        entries.len(),
        measured.failures.len()
    ));
    if measured.measurements.is_empty() && !entries.is_empty() {
        return Err(CliError::data("every mask failed; see errors.csv"));
    }
    Ok(())
}
