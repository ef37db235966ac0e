use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::silhouette::BodyMeasurements;
use crate::ShapeLabel;

/// Rectangular numeric table with optional per-row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<Option<ShapeLabel>>,
}

impl DatasetTable {
    pub fn new(
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<Option<ShapeLabel>>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("table needs at least one column"));
        }
        if labels.len() != rows.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} rows",
                labels.len(),
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("row {i} contains {v}")));
            }
        }
        Ok(Self {
            columns,
            rows,
            labels,
        })
    }

    pub fn from_measurements(
        measurements: &[BodyMeasurements],
        labels: Vec<Option<ShapeLabel>>,
    ) -> Result<Self> {
        Self::new(
            BodyMeasurements::FIELDS.iter().map(|s| s.to_string()).collect(),
            measurements.iter().map(|m| m.to_array().to_vec()).collect(),
            labels,
        )
    }

    pub fn from_labeled_measurements(items: &[(BodyMeasurements, ShapeLabel)]) -> Result<Self> {
        let (ms, ls): (Vec<_>, Vec<_>) = items.iter().map(|&(m, l)| (m, Some(l))).unzip();
        Self::from_measurements(&ms, ls)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Option<ShapeLabel>] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when every row carries a label.
    pub fn is_labeled(&self) -> bool {
        !self.labels.is_empty() && self.labels.iter().all(Option::is_some)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[j])
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Views the rows as measurements; requires the five measurement columns.
    pub fn measurements(&self) -> Result<Vec<BodyMeasurements>> {
        let idx: Vec<usize> = BodyMeasurements::FIELDS
            .iter()
            .map(|f| {
                self.column_index(f)
                    .ok_or_else(|| Error::invalid(format!("table has no `{f}` column")))
            })
            .collect::<Result<_>>()?;
        self.rows
            .iter()
            .map(|r| {
                let m = BodyMeasurements::from_array([r[idx[0]], r[idx[1]], r[idx[2]], r[idx[3]], r[idx[4]]]);
                m.validate()?;
                Ok(m)
            })
            .collect()
    }

    pub(crate) fn select_rows(&self, keep: &[bool]) -> Self {
        let (rows, labels) = self
            .rows
            .iter()
            .zip(&self.labels)
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|((r, l), _)| (r.clone(), *l))
            .unzip();
        Self {
            columns: self.columns.clone(),
            rows,
            labels,
        }
    }

    /// Reads a CSV of numeric columns with an optional trailing-or-anywhere
    /// `label` column holding canonical class names (empty = unlabeled).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let label_col = headers.iter().position(|h| h == "label");
        let columns: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != label_col)
            .map(|(_, h)| h.clone())
            .collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(columns.len());
            let mut label = None;
            for (i, field) in rec.iter().enumerate() {
                if Some(i) == label_col {
                    if !field.trim().is_empty() {
                        label = Some(field.parse()?);
                    }
                } else {
                    let v: f64 = field.trim().parse().map_err(|_| {
                        Error::invalid(format!("row {}: `{field}` is not a number", line + 1))
                    })?;
                    row.push(v);
                }
            }
            rows.push(row);
            labels.push(label);
        }
        Self::new(columns, rows, labels)
    }

    /// Reads the measurement CSV (`bust,waist,hip,shoulder,stature[,label]`).
    pub fn read_measurements_csv<R: Read>(reader: R) -> Result<Self> {
        let table = Self::read_csv(reader)?;
        if table.columns != BodyMeasurements::FIELDS {
            return Err(Error::invalid(format!(
                "measurement header must be `bust,waist,hip,shoulder,stature[,label]`, got `{}`",
                table.columns.join(",")
            )));
        }
        table.measurements()?;
        Ok(table)
    }

    /// Writes all columns, plus a `label` column when any row is labeled.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let with_label = self.labels.iter().any(Option::is_some);
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.columns.iter().map(String::as_str).collect();
        if with_label {
            header.push("label");
        }
        wtr.write_record(&header)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            if with_label {
                rec.push(label.map(|l| l.name().to_string()).unwrap_or_default());
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Per-column population mean and standard deviation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColumnScaler {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl ColumnScaler {
    pub fn fit(table: &DatasetTable) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::invalid(format!("need at least 2 rows, got {}", table.len())));
        }
        let n = table.len() as f64;
        let d = table.columns().len();
        let means: Vec<f64> = (0..d).map(|j| table.column(j).sum::<f64>() / n).collect();
        let sds = (0..d)
            .map(|j| (table.column(j).map(|v| (v - means[j]).powi(2)).sum::<f64>() / n).sqrt())
            .collect();
        Ok(Self { means, sds })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&z, (&m, &s))| z * s + m)
            .collect()
    }

    pub fn transform(&self, table: &DatasetTable) -> Result<DatasetTable> {
        if table.columns().len() != self.means.len() {
            return Err(Error::ShapeMismatch("scaler/table column count".into()));
        }
        DatasetTable::new(
            table.columns().to_vec(),
            table.rows().iter().map(|r| self.transform_row(r)).collect(),
            table.labels().to_vec(),
        )
    }

    pub fn inverse(&self, table: &DatasetTable) -> Result<DatasetTable> {
        DatasetTable::new(
            table.columns().to_vec(),
            table.rows().iter().map(|r| self.inverse_row(r)).collect(),
            table.labels().to_vec(),
        )
    }
}

/// Z-score standardization; zero-variance columns map to 0.
pub fn normalize(table: &DatasetTable) -> Result<(DatasetTable, ColumnScaler)> {
    let scaler = ColumnScaler::fit(table)?;
    Ok((scaler.transform(table)?, scaler))
}

/// Drops rows whose |z| exceeds `z_threshold` in any column with nonzero sd.
pub fn remove_outliers(table: &DatasetTable, z_threshold: f64) -> Result<DatasetTable> {
    if !(z_threshold > 0.0) {
        return Err(Error::invalid(format!("z threshold must be > 0, got {z_threshold}")));
    }
    if table.len() < 2 {
        return Ok(table.clone());
    }
    let scaler = ColumnScaler::fit(table)?;
    let keep: Vec<bool> = table
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(scaler.means.iter().zip(&scaler.sds))
                .all(|(&v, (&m, &s))| s == 0.0 || ((v - m) / s).abs() <= z_threshold)
        })
        .collect();
    Ok(table.select_rows(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn table(cols: &[&str], rows: Vec<Vec<f64>>) -> DatasetTable {
        let n = rows.len();
        DatasetTable::new(cols.iter().map(|s| s.to_string()).collect(), rows, vec![None; n]).unwrap()
    }

    #[test]
    fn rejects_ragged_and_nonfinite() {
        let cols = vec!["a".to_string(), "b".to_string()];
        assert!(DatasetTable::new(cols.clone(), vec![vec![1.0]], vec![None]).is_err());
        assert!(DatasetTable::new(cols.clone(), vec![vec![1.0, f64::NAN]], vec![None]).is_err());
        assert!(DatasetTable::new(cols, vec![vec![1.0, 2.0]], vec![]).is_err());
    }

    #[test]
    fn normalize_two_values() {
        let t = table(&["x"], vec![vec![1.0], vec![3.0]]);
        let (z, scaler) = normalize(&t).unwrap();
        assert_eq!(z.rows(), &[vec![-1.0], vec![1.0]]);
        assert_eq!(scaler.sds, vec![1.0]);
        assert!(normalize(&table(&["x"], vec![vec![1.0]])).is_err());
    }

    #[test]
    fn normalize_round_trip_and_zero_mean() {
        let mut rng = SplitMix64::new(5);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.uniform(-100.0, 100.0), 7.0, rng.normal() * 1e3])
            .collect();
        let t = table(&["a", "b", "c"], rows);
        let (z, scaler) = normalize(&t).unwrap();
        for j in 0..3 {
            assert!((z.column(j).sum::<f64>() / 50.0).abs() < 1e-9);
        }
        assert!(z.column(1).all(|v| v == 0.0));
        let back = scaler.inverse(&z).unwrap();
        for (a, b) in back.rows().iter().flatten().zip(t.rows().iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn outlier_row_removed() {
        let mut rng = SplitMix64::new(1);
        let mut rows: Vec<Vec<f64>> = (0..200).map(|_| vec![90.0 + rng.normal(), 70.0]).collect();
        rows.push(vec![200.0, 70.0]);
        let t = table(&["bust", "waist"], rows);
        let cleaned = remove_outliers(&t, 3.0).unwrap();
        assert!(cleaned.rows().iter().all(|r| r[0] < 150.0));
        assert!(cleaned.len() >= 195);
        assert_eq!(remove_outliers(&t, f64::INFINITY).unwrap(), t);
        assert!(remove_outliers(&t, 0.0).is_err());
    }

    #[test]
    fn second_outlier_pass_removes_little() {
        let mut rng = SplitMix64::new(42);
        let rows: Vec<Vec<f64>> = (0..1000).map(|_| vec![rng.normal(), rng.normal(), rng.normal()]).collect();
        let t = table(&["a", "b", "c"], rows);
        let once = remove_outliers(&t, 3.0).unwrap();
        let twice = remove_outliers(&once, 3.0).unwrap();
        assert!(((once.len() - twice.len()) as f64) < 0.01 * once.len() as f64);
    }

    #[test]
    fn measurement_csv_round_trip() {
        let csv = "bust,waist,hip,shoulder,stature,label\n96,72,102,40,400,Hourglass\n90,95,85,38,380,\n";
        let t = DatasetTable::read_measurements_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.labels(), &[Some(ShapeLabel::Hourglass), None]);
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        assert_eq!(DatasetTable::read_measurements_csv(out.as_slice()).unwrap(), t);
        assert!(DatasetTable::read_measurements_csv("bust,waist\n1,2\n".as_bytes()).is_err());
        assert!(DatasetTable::read_measurements_csv(
            "bust,waist,hip,shoulder,stature\n1,0,1,1,1\n".as_bytes()
        )
        .is_err());
    }
}
