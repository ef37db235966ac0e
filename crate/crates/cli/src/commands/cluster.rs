use bodyshape::anthro::{normalize, remove_outliers, DatasetTable};
use bodyshape::stats::{
    cohen_kappa, fcm_fit, kmeans_fit, pca_fit, select_k, ComponentSelector, DataMatrix, FcmConfig, KCriterion,
    KMeansConfig, ModelDocument, StatsModel,
};
use bodyshape::ShapeLabel;
use serde::Serialize;

use super::models::{majority_labels, ratio_table};
use super::Ctx;
use crate::cli::{ClusterArgs, CriterionArg};
use crate::data::read_table;
use crate::error::{CliError, CliResult};

pub fn parse_pca(s: &str) -> CliResult<ComponentSelector> {
    let bad = || CliError::usage(format!("--pca expects a fraction in (0,1) or a component count, got {s:?}"));
    if s.contains('.') {
        let f: f64 = s.parse().map_err(|_| bad())?;
        if !(f > 0.0 && f < 1.0) {
            return Err(bad());
        }
        Ok(ComponentSelector::VarianceFraction(f))
    } else {
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(ComponentSelector::Fixed(k)),
            _ => Err(bad()),
        }
    }
}

/// `LO..HI` or `LO..=HI`, both inclusive.
pub fn parse_range(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("--select-k expects LO..HI, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let (lo, hi) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if lo < 1 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Original row index of every row that survived outlier removal.
fn surviving_rows(before: &DatasetTable, after: &DatasetTable) -> Vec<usize> {
    let mut ids = Vec::with_capacity(after.len());
    let mut next = 0;
    for (i, row) in before.rows().iter().enumerate() {
        if next < after.len() && after.rows()[next] == *row {
            ids.push(i);
            next += 1;
        }
    }
    ids
}

#[derive(Serialize)]
struct Agreement {
    kappa: f64,
    cluster_labels: Vec<String>,
    rows: usize,
}

pub fn run(ctx: &Ctx, args: &ClusterArgs) -> CliResult<()> {
    let c = &ctx.config.cluster;
    let input = ctx.path(&args.input, &ctx.config.input, "input")?;
    let mut table = read_table(&input)?;
    if args.ratios || c.ratios.unwrap_or(false) {
        table = ratio_table(&table.measurements()?, table.labels().to_vec())?;
    }
    let mut ids: Vec<usize> = (0..table.len()).collect();
    if let Some(z) = args.outlier_z.or(c.outlier_z) {
        let kept = remove_outliers(&table, z).map_err(|e| CliError::usage(e.to_string()))?;
        ids = surviving_rows(&table, &kept);
        ctx.out.say(format!("outlier removal kept {} of {} rows", kept.len(), table.len()));
        table = kept;
    }
    if table.len() < 2 {
        return Err(CliError::data(format!("need at least 2 rows to cluster, got {}", table.len())));
    }
    let (z, scaler) = normalize(&table)?;
    ctx.out.write_json("scaler.json", &ModelDocument::new(StatsModel::Scaler(scaler)))?;
    let mut x = DataMatrix::from_table(&z)?;
    if let Some(s) = args.pca.as_ref().or(c.pca.as_ref()) {
        let pca = pca_fit(&x, parse_pca(s)?)?;
        x = pca.transform(&x)?;
        ctx.out.say(format!("pca kept {} of {} components", pca.k, pca.d));
        ctx.out.write_json("pca.json", &ModelDocument::new(StatsModel::Pca(pca)))?;
    }

    let fuzzy = args.fuzzy || c.fuzzy.unwrap_or(false);
    let mut header = vec!["row".to_string()];
    let (assignments, k, mut rows) = if fuzzy {
        let count = args.c.or(c.c).or(args.k).or(c.k).ok_or_else(|| CliError::usage("--fuzzy needs --c"))?;
        let cfg = FcmConfig {
            fuzzifier: args.fuzzifier.or(c.fuzzifier).unwrap_or(2.0),
            ..FcmConfig::new(count, ctx.seed)
        };
        let model = fcm_fit(&x, &cfg).map_err(|e| CliError::usage(e.to_string()))?;
        header.extend((0..count).map(|j| format!("u{j}")));
        let assign = model.hard_assignments();
        let rows: Vec<Vec<String>> = (0..x.n())
            .map(|i| {
                std::iter::once(ids[i].to_string())
                    .chain(model.membership_row(i).iter().map(f64::to_string))
                    .chain(std::iter::once(assign[i].to_string()))
                    .collect()
            })
            .collect();
        ctx.out.say(format!("fuzzy c-means: c = {count}, objective {:.6}, {} iterations", model.objective, model.iterations));
        ctx.out.write_json("model.json", &ModelDocument::new(StatsModel::Fuzzy(model)))?;
        header.push("cluster".into());
        (assign, count, rows)
    } else {
        let k = match (args.k.or(c.k), args.select_k.as_ref().or(c.select_k.as_ref())) {
            (Some(k), _) => k,
            (None, Some(range)) => {
                let (lo, hi) = parse_range(range)?;
                let criterion = match (args.criterion, c.criterion.as_deref()) {
                    (Some(CriterionArg::Silhouette), _) | (None, Some("silhouette")) => KCriterion::Silhouette,
                    (Some(CriterionArg::Bic), _) | (None, None | Some("bic")) => KCriterion::Bic,
                    (None, Some(other)) => return Err(CliError::usage(format!("unknown criterion {other:?}"))),
                };
                let sel = select_k(&x, lo, hi, criterion, ctx.seed).map_err(|e| CliError::usage(e.to_string()))?;
                ctx.out.write_json("selection.json", &sel)?;
                if sel.degenerate {
                    eprintln!("warning: all rows identical; falling back to k = {lo}");
                }
                ctx.out.say(format!("selected k = {}", sel.chosen));
                sel.chosen
            }
            (None, None) => return Err(CliError::usage("cluster needs --k, --select-k or --fuzzy")),
        };
        let model = kmeans_fit(&x, &KMeansConfig::new(k, ctx.seed)).map_err(|e| CliError::usage(e.to_string()))?;
        let assign = model.assignments.clone();
        let rows: Vec<Vec<String>> = (0..x.n()).map(|i| vec![ids[i].to_string(), assign[i].to_string()]).collect();
        ctx.out.say(format!("k-means: k = {k}, inertia {:.6}", model.inertia));
        ctx.out.write_json("model.json", &ModelDocument::new(StatsModel::Kmeans(model)))?;
        header.push("cluster".into());
        (assign, k, rows)
    };

    if table.is_labeled() {
        let truth: Vec<usize> = table.labels().iter().map(|l| l.expect("labeled").ordinal()).collect();
        let map = majority_labels(&assignments, k, &truth);
        let mapped: Vec<usize> = assignments.iter().map(|&a| map[a]).collect();
        let kappa = cohen_kappa(&truth, &mapped)?;
        header.push("label".into());
        for (r, &t) in rows.iter_mut().zip(&truth) {
            r.push(ShapeLabel::ALL[t].name().to_string());
        }
        ctx.out.write_json(
            "agreement.json",
            &Agreement {
                kappa,
                cluster_labels: map.iter().map(|&o| ShapeLabel::ALL[o].name().to_string()).collect(),
                rows: truth.len(),
            },
        )?;
        ctx.out.say(format!("cohen kappa vs truth (majority-mapped clusters): {kappa:.4}"));
    }
    let name = if fuzzy { "memberships.csv" } else { "assignments.csv" };
    ctx.out.write_csv(name, &header, &rows)?;
    Ok(())
}
