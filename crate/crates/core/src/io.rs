//! Dataset ingestion, normalization, and report serialization.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adjusted::{AdjustedScore, MeasureConfig, MinMode};
use crate::data::{Dataset, Labeling};
use crate::error::{Error, Result};
use crate::harness::ScoreTable;

/// Column normalization applied right after loading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizationMode {
    None,
    /// Map each nonconstant column to [0, 1]; constant columns map to 0.
    MinMaxPerColumn,
}

impl NormalizationMode {
    pub fn name(&self) -> &'static str {
        match self {
            NormalizationMode::None => "none",
            NormalizationMode::MinMaxPerColumn => "minmax",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NormalizationMode::None),
            "minmax" | "min_max" => Ok(NormalizationMode::MinMaxPerColumn),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization `{other}` (expected none or minmax)"
            ))),
        }
    }
}

/// A labeled dataset loaded from disk, with its provenance.
#[derive(Clone, Debug)]
pub struct LabeledTable {
    pub dataset: Dataset,
    pub labeling: Labeling,
    pub column_names: Vec<String>,
    pub source_path: String,
    /// Rows dropped because a feature or the label was missing.
    pub dropped_rows: usize,
}

/// Load a labeled dataset from a CSV file with a header row.
///
/// Feature cells must be numeric; empty cells mark missing data and drop the
/// whole row (the count is reported on the table). Labels are read as opaque
/// strings; class ids are assigned in order of first appearance.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    normalization: NormalizationMode,
) -> Result<LabeledTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            Error::Schema(format!(
                "label column `{label_column}` not found in {}",
                path.display()
            ))
        })?;
    let column_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    if column_names.is_empty() {
        return Err(Error::Schema("no feature columns besides the label".into()));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut dropped = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row: row_idx + 1,
                col: String::new(),
                msg: format!(
                    "expected {} fields, found {}",
                    headers.len(),
                    record.len()
                ),
            });
        }
        let mut features = Vec::with_capacity(column_names.len());
        let mut missing = false;
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            if cell.is_empty() {
                missing = true;
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row_idx + 1,
                col: headers[i].to_string(),
                msg: format!("`{cell}` is not numeric"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: row_idx + 1,
                    col: headers[i].to_string(),
                    msg: "non-finite value".into(),
                });
            }
            features.push(value);
        }
        let label = record.get(label_idx).unwrap_or("");
        if missing || label.is_empty() {
            dropped += 1;
            continue;
        }
        rows.push(features);
        labels.push(label.to_string());
    }
    if rows.len() < 2 {
        return Err(Error::TooFewRows {
            got: rows.len(),
            min: 2,
        });
    }
    if normalization == NormalizationMode::MinMaxPerColumn {
        min_max_normalize(&mut rows);
    }
    let dataset = Dataset::from_rows(&rows)?;

    // Class ids in order of first appearance.
    let mut class_of: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut assignment = Vec::with_capacity(labels.len());
    for label in labels {
        let next = names.len();
        let id = *class_of.entry(label.clone()).or_insert_with(|| {
            names.push(label);
            next
        });
        assignment.push(id);
    }
    let labeling = Labeling::from_dense(assignment, names)?;
    Ok(LabeledTable {
        dataset,
        labeling,
        column_names,
        source_path: path.display().to_string(),
        dropped_rows: dropped,
    })
}

fn min_max_normalize(rows: &mut [Vec<f64>]) {
    if rows.is_empty() {
        return;
    }
    let dim = rows[0].len();
    for j in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in rows.iter() {
            lo = lo.min(r[j]);
            hi = hi.max(r[j]);
        }
        let span = hi - lo;
        for r in rows.iter_mut() {
            r[j] = if span == 0.0 { 0.0 } else { (r[j] - lo) / span };
        }
    }
}

/// Write a labeled dataset as CSV with columns `f0..f{dim-1}` and a final
/// `label` column.
pub fn write_dataset_csv(ds: &Dataset, lab: &Labeling, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    writer.write_record(&header)?;
    for (i, row) in ds.rows().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(lab.name(lab.assignment()[i]).to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Round to 12 significant digits; reports store rounded values so repeated
/// writes are byte-identical and round trips are stable.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConfigEcho {
    pub k: f64,
    pub k_provenance: String,
    pub min_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_runs: Option<usize>,
    pub p: f64,
    pub agg: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub normalization: String,
}

impl ConfigEcho {
    pub fn new(
        cfg: &MeasureConfig,
        k_provenance: &str,
        seed: Option<u64>,
        normalization: NormalizationMode,
    ) -> Self {
        let mc_runs = match cfg.min_mode {
            MinMode::MonteCarlo { runs, .. } => Some(runs),
            _ => None,
        };
        Self {
            k: round_sig12(cfg.k),
            k_provenance: k_provenance.to_string(),
            min_mode: cfg.min_mode.name().to_string(),
            mc_runs,
            p: round_sig12(cfg.p),
            agg: cfg.agg.name().to_string(),
            seed,
            normalization: normalization.name().to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InputEcho {
    pub path: String,
    pub rows: usize,
    pub dims: usize,
    pub classes: usize,
    pub dropped_rows: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PairReport {
    pub class_a: String,
    pub class_b: String,
    pub core: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_estimate: Option<f64>,
    pub score: f64,
    pub clamped: bool,
}

/// Score report: the measure, its score, the per-class-pair breakdown, and
/// an echo of everything needed to reproduce the run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScoreReport {
    pub tool: String,
    pub version: String,
    pub measure: String,
    pub score: f64,
    pub config: ConfigEcho,
    pub input: InputEcho,
    pub pairs: Vec<PairReport>,
}

impl ScoreReport {
    pub fn new(
        measure: &str,
        score: f64,
        detail: Option<&AdjustedScore>,
        config: ConfigEcho,
        input: InputEcho,
    ) -> Self {
        let pairs = detail
            .map(|d| {
                d.pairs
                    .iter()
                    .map(|p| PairReport {
                        class_a: p.class_a.clone(),
                        class_b: p.class_b.clone(),
                        core: round_sig12(p.core),
                        logistic: p.logistic.map(round_sig12),
                        min_estimate: p.min_estimate.map(round_sig12),
                        score: round_sig12(p.score),
                        clamped: p.clamped,
                    })
                    .collect()
            })
            .unwrap_or_default();
        Self {
            tool: "clmatch".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            measure: measure.to_string(),
            score: round_sig12(score),
            config,
            input,
            pairs,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat CSV: one row per class pair, or a single summary row when there
    /// is no pair breakdown.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record([
                "measure",
                "score",
                "class_a",
                "class_b",
                "pair_core",
                "pair_logistic",
                "pair_min",
                "pair_score",
                "clamped",
            ])?;
            let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            if self.pairs.is_empty() {
                w.write_record([
                    self.measure.as_str(),
                    &self.score.to_string(),
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                ])?;
            }
            for p in &self.pairs {
                w.write_record([
                    self.measure.as_str(),
                    &self.score.to_string(),
                    p.class_a.as_str(),
                    p.class_b.as_str(),
                    &p.core.to_string(),
                    &fmt_opt(p.logistic),
                    &fmt_opt(p.min_estimate),
                    &p.score.to_string(),
                    &p.clamped.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(out).expect("csv output is utf-8"))
    }

    pub fn write(&self, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
        let body = match format {
            ReportFormat::Json => self.to_json()?,
            ReportFormat::Csv => self.to_csv()?,
        };
        let mut file = std::fs::File::create(path.as_ref())?;
        file.write_all(body.as_bytes())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format `{other}` (expected json or csv)"
            ))),
        }
    }
}

/// Load a datasets-by-techniques score table: first column `dataset`,
/// remaining columns one per technique, cells numeric.
pub fn load_score_table(path: impl AsRef<Path>) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Schema(
            "score table needs a dataset column and at least one technique".into(),
        ));
    }
    let technique_names: Vec<String> = headers.iter().skip(1).map(|h| h.to_string()).collect();
    let mut dataset_names = Vec::new();
    let mut values = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        dataset_names.push(record.get(0).unwrap_or("").to_string());
        let mut row = Vec::with_capacity(technique_names.len());
        for (i, cell) in record.iter().enumerate().skip(1) {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row_idx + 1,
                col: headers[i].to_string(),
                msg: format!("`{cell}` is not numeric"),
            })?;
            row.push(v);
        }
        values.push(row);
    }
    ScoreTable::new(dataset_names, technique_names, values)
}

/// Load a `dataset,score` CSV (the calibration targets). Returns the paths
/// verbatim alongside their scores.
pub fn load_calibration_scores(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let d_idx = headers.iter().position(|h| h == "dataset").ok_or_else(|| {
        Error::Schema("calibration scores need a `dataset` column".into())
    })?;
    let s_idx = headers
        .iter()
        .position(|h| h == "score")
        .ok_or_else(|| Error::Schema("calibration scores need a `score` column".into()))?;
    let mut out = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let dataset = record.get(d_idx).unwrap_or("").to_string();
        let cell = record.get(s_idx).unwrap_or("");
        let score: f64 = cell.parse().map_err(|_| Error::Parse {
            row: row_idx + 1,
            col: "score".into(),
            msg: format!("`{cell}` is not numeric"),
        })?;
        out.push((dataset, score));
    }
    if out.is_empty() {
        return Err(Error::TooFewRows { got: 0, min: 1 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_drops_rows_with_missing_cells() {
        let f = write_temp("a,b,label\n1,2,x\n3,,x\n5,6,y\n7,8,y\n");
        let table = load_csv(f.path(), "label", NormalizationMode::None).unwrap();
        assert_eq!(table.dataset.n(), 3);
        assert_eq!(table.dropped_rows, 1);
        assert_eq!(table.column_names, vec!["a", "b"]);
        // Surviving rows keep their order.
        assert_eq!(table.dataset.row(0), &[1.0, 2.0]);
        assert_eq!(table.dataset.row(1), &[5.0, 6.0]);
    }

    #[test]
    fn min_max_normalization_maps_columns_to_unit_range() {
        let f = write_temp("a,c,label\n0,7,x\n5,7,x\n10,7,y\n");
        let table = load_csv(f.path(), "label", NormalizationMode::MinMaxPerColumn).unwrap();
        let col: Vec<f64> = (0..3).map(|i| table.dataset.row(i)[0]).collect();
        assert_eq!(col, vec![0.0, 0.5, 1.0]);
        // Constant column maps to zero.
        assert_eq!(table.dataset.row(1)[1], 0.0);
    }

    #[test]
    fn missing_label_column_is_a_schema_error() {
        let f = write_temp("a,b\n1,2\n3,4\n");
        assert!(matches!(
            load_csv(f.path(), "label", NormalizationMode::None),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let f = write_temp("a,b,label\n1,2,x\n3,oops,y\n");
        match load_csv(f.path(), "label", NormalizationMode::None) {
            Err(Error::Parse { row, col, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(col, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_surviving_row_is_too_few() {
        let f = write_temp("a,label\n1,x\n,x\n");
        assert!(matches!(
            load_csv(f.path(), "label", NormalizationMode::None),
            Err(Error::TooFewRows { got: 1, min: 2 })
        ));
    }

    #[test]
    fn single_class_loads_fine() {
        let f = write_temp("a,label\n1,x\n2,x\n3,x\n");
        let table = load_csv(f.path(), "label", NormalizationMode::None).unwrap();
        assert_eq!(table.labeling.class_count(), 1);
        // Scoring such a labeling is the caller's problem; loading is not.
        assert!(matches!(
            crate::baseline::ch(&table.dataset, &table.labeling),
            Err(Error::TooFewClasses)
        ));
    }

    #[test]
    fn dataset_round_trip_preserves_values_and_labels() {
        let ds = Dataset::from_rows(&[
            vec![0.123456789012345, -7.25],
            vec![1e-11, 42.0],
            vec![3.5, 0.0],
        ])
        .unwrap();
        let lab = Labeling::new(&[0, 1, 0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        write_dataset_csv(&ds, &lab, &path).unwrap();
        let table = load_csv(&path, "label", NormalizationMode::None).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert_relative_eq!(
                    table.dataset.row(i)[j],
                    ds.row(i)[j],
                    max_relative = 1e-12
                );
            }
        }
        assert_eq!(table.labeling.assignment(), lab.assignment());
    }

    #[test]
    fn reports_serialize_deterministically() {
        let cfg = MeasureConfig::default();
        let echo = ConfigEcho::new(&cfg, "default-uncalibrated", Some(7), NormalizationMode::None);
        let input = InputEcho {
            path: "x.csv".into(),
            rows: 10,
            dims: 2,
            classes: 2,
            dropped_rows: 0,
        };
        let report = ScoreReport::new("ch_adj", 0.123456789012345678, None, echo, input);
        let a = report.to_json().unwrap();
        let b = report.to_json().unwrap();
        assert_eq!(a, b);
        let parsed: ScoreReport = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed, report);
        // Stored score was rounded to 12 significant digits.
        assert_relative_eq!(parsed.score, 0.123456789012, max_relative = 1e-12);
    }

    #[test]
    fn round_sig12_keeps_simple_values_exact() {
        assert_eq!(round_sig12(0.5), 0.5);
        assert_eq!(round_sig12(0.0), 0.0);
        assert_eq!(round_sig12(200.0), 200.0);
    }

    #[test]
    fn score_table_loads_rectangular_numeric_cells() {
        let f = write_temp("dataset,kmeans,hdbscan\nd1,0.5,0.25\nd2,0.75,0.5\n");
        let table = load_score_table(f.path()).unwrap();
        assert_eq!(table.technique_names, vec!["kmeans", "hdbscan"]);
        assert_eq!(table.values[1][0], 0.75);
    }
}
