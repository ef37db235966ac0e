use bodyshape::anthro::DatasetTable;
use bodyshape::rng::SplitMix64;
use bodyshape::silhouette::{augment_plan, encode_pgm, generate_corpus, top_up_class, write_manifest, ManifestEntry};
use bodyshape::{Mask, ShapeLabel};

use super::Ctx;
use crate::cli::GenArgs;
use crate::error::{CliError, CliResult};

fn file_name(label: ShapeLabel, index: usize) -> String {
    format!("{}_{index:04}.pgm", label.name())
}

pub fn run(ctx: &Ctx, args: &GenArgs) -> CliResult<()> {
    let g = &ctx.config.generator;
    let counts: Vec<usize> = match (args.n_per_class, &args.counts) {
        (Some(n), _) => vec![n; ShapeLabel::ALL.len()],
        (None, Some(c)) => c.clone(),
        (None, None) => match (g.n_per_class, &g.counts) {
            (Some(n), _) => vec![n; ShapeLabel::ALL.len()],
            (None, Some(c)) => c.clone(),
            (None, None) => return Err(CliError::usage("gen needs --n-per-class or --counts")),
        },
    };
    if counts.len() != ShapeLabel::ALL.len() {
        return Err(CliError::usage(format!(
            "--counts needs {} values in class order, got {}",
            ShapeLabel::ALL.len(),
            counts.len()
        )));
    }
    let per_class: Vec<(ShapeLabel, usize)> = ShapeLabel::ALL.into_iter().zip(counts).collect();
    let augment_to = args.augment_to.or(g.augment_to);
    let plan = match augment_to {
        Some(target) => augment_plan(&per_class, target).map_err(|e| CliError::usage(e.to_string()))?,
        None => per_class.iter().map(|&(l, _)| (l, 0)).collect(),
    };

    let corpus = generate_corpus(&per_class, ctx.seed);
    let out = &ctx.out;
    let mut entries = Vec::new();
    let mut truth = Vec::new();
    for (&(label, count), &(_, extra)) in per_class.iter().zip(&plan) {
        let members: Vec<&Mask> = corpus.iter().filter(|s| s.label == label).map(|s| &s.mask).collect();
        for s in corpus.iter().filter(|s| s.label == label) {
            let name = file_name(label, s.index);
            out.write(&name, encode_pgm(&s.mask))?;
            entries.push(ManifestEntry { path: name, label: Some(label) });
            truth.push((s.params.measurements(), label));
        }
        if extra > 0 {
            let owned: Vec<Mask> = members.into_iter().cloned().collect();
            let seed = SplitMix64::derive(ctx.seed, 0xA06 + label.ordinal() as u64).next_u64();
            for (i, m) in top_up_class(&owned, extra, seed)?.iter().enumerate() {
                let name = file_name(label, count + i);
                out.write(&name, encode_pgm(m))?;
                entries.push(ManifestEntry { path: name, label: Some(label) });
            }
        }
    }

    let mut manifest = Vec::new();
    write_manifest(&mut manifest, &entries)?;
    out.write("manifest.csv", manifest)?;
    let mut truth_csv = Vec::new();
    DatasetTable::from_labeled_measurements(&truth)?.write_csv(&mut truth_csv)?;
    out.write("truth.csv", truth_csv)?;
    out.say(format!(
        "wrote {} masks ({} generated, {} augmented) to {}",
        entries.len(),
        truth.len(),
        entries.len() - truth.len(),
        out.dir().display()
    ));
    Ok(())
}
