//! Dataset ingest: delimited text parsing, nominal column encoding, min-max
//! normalization and the mapping from category labels to output values.
//!
//! Categories are ordered by their sorted label strings (numerically when
//! every label parses as a number) and category `k` of `C` is represented by
//! the output value `k / (C - 1)`, so three categories map to `0`, `0.5` and
//! `1`. Nominal feature columns use the same evenly spaced encoding over
//! their sorted distinct values.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_delimiter() -> char {
    ','
}

/// Layout of a raw delimited file. Column indices refer to the raw file,
/// before ignored columns are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub has_header: bool,
    pub label_column: usize,
    #[serde(default)]
    pub ignore_columns: BTreeSet<usize>,
    #[serde(default)]
    pub nominal_columns: BTreeSet<usize>,
}

impl DatasetSchema {
    /// Comma-delimited, no header, nothing ignored or nominal.
    pub fn new(label_column: usize) -> Self {
        Self {
            delimiter: default_delimiter(),
            has_header: false,
            label_column,
            ignore_columns: BTreeSet::new(),
            nominal_columns: BTreeSet::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Schema(format!(
                "delimiter {:?} is not a single ASCII character",
                self.delimiter
            )));
        }
        if self.ignore_columns.contains(&self.label_column) {
            return Err(Error::Schema(format!(
                "label column {} is also listed as ignored",
                self.label_column
            )));
        }
        if self.nominal_columns.contains(&self.label_column) {
            return Err(Error::Schema(format!(
                "label column {} is also listed as nominal",
                self.label_column
            )));
        }
        Ok(())
    }

    fn feature_columns(&self, width: usize) -> Vec<usize> {
        (0..width)
            .filter(|c| *c != self.label_column && !self.ignore_columns.contains(c))
            .collect()
    }
}

/// Feature rows plus the category index of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericDataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n: usize,
}

impl NumericDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        let n = rows.first().ok_or(Error::EmptyDataset)?.len();
        if labels.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self { rows, labels, n })
    }

    /// Number of feature variables per row.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.rows
            .iter()
            .map(Vec::as_slice)
            .zip(self.labels.iter().copied())
    }

    /// Splits into the first `at` rows and the remainder. Both halves must be
    /// non-empty.
    pub fn split_at(&self, at: usize) -> Result<(Self, Self)> {
        if at == 0 || at >= self.rows.len() {
            return Err(Error::EmptyDataset);
        }
        let head = Self::new(self.rows[..at].to_vec(), self.labels[..at].to_vec())?;
        let tail = Self::new(self.rows[at..].to_vec(), self.labels[at..].to_vec())?;
        Ok((head, tail))
    }
}

/// Bijection between label strings, category indices and output values.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCodec {
    labels: Vec<String>,
    output_values: Vec<f64>,
    gap: f64,
}

impl CategoryCodec {
    /// Builds a codec over labels in the given order.
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::TooFewCategories(labels.len()));
        }
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let span = (labels.len() - 1) as f64;
        let output_values = (0..labels.len()).map(|k| k as f64 / span).collect();
        Ok(Self {
            labels,
            output_values,
            gap: 1.0 / span,
        })
    }

    /// Builds a codec over the sorted distinct values of `observed`.
    pub fn from_observed<'a, I>(observed: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        Self::new(sorted_distinct(observed))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn output_values(&self) -> &[f64] {
        &self.output_values
    }

    /// Spacing between adjacent output values, `1 / (C - 1)`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn output_value(&self, category: usize) -> Result<f64> {
        self.output_values
            .get(category)
            .copied()
            .ok_or(Error::CategoryOutOfRange(category))
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, category: usize) -> Option<&str> {
        self.labels.get(category).map(String::as_str)
    }

    /// Category whose output value is closest to `x`; ties go to the lower
    /// index.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, o) in self.output_values.iter().enumerate() {
            let d = (x - o).abs();
            if d < best_dist {
                best = k;
                best_dist = d;
            }
        }
        best
    }
}

/// Sorted distinct values of the nominal feature columns, keyed by raw
/// column index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NominalEncoding {
    columns: BTreeMap<usize, Vec<String>>,
}

impl NominalEncoding {
    pub fn new(columns: BTreeMap<usize, Vec<String>>) -> Self {
        Self { columns }
    }

    pub fn columns(&self) -> &BTreeMap<usize, Vec<String>> {
        &self.columns
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Position of `value` among the column's sorted values, spread evenly
    /// over `[0, 1]`. A column with a single value encodes to `0`.
    pub fn encode(&self, column: usize, value: &str) -> Option<f64> {
        let values = self.columns.get(&column)?;
        let k = values.iter().position(|v| v == value)?;
        if values.len() == 1 {
            Some(0.0)
        } else {
            Some(k as f64 / (values.len() - 1) as f64)
        }
    }
}

/// Per-column `(min, max)` fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(data: &NumericDataset) -> Self {
        let mut min = vec![f64::INFINITY; data.n()];
        let mut max = vec![f64::NEG_INFINITY; data.n()];
        for row in data.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self { min, max }
    }

    pub fn from_bounds(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                found: max.len(),
            });
        }
        for (j, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Format(format!(
                    "normalizer column {j} has invalid bounds ({lo}, {hi})"
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    /// Maps `v` to `(v - min) / (max - min)` per column. Constant columns map
    /// to `0`. Values outside the fitted range are not clamped.
    pub fn normalize_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }

    pub fn normalize(&self, data: &NumericDataset) -> Result<NumericDataset> {
        let rows = data
            .rows()
            .iter()
            .map(|r| self.normalize_row(r))
            .collect::<Result<Vec<_>>>()?;
        NumericDataset::new(rows, data.labels().to_vec())
    }
}

pub fn fit_normalizer(data: &NumericDataset) -> Normalizer {
    Normalizer::fit(data)
}

pub fn normalize(data: &NumericDataset, norm: &Normalizer) -> Result<NumericDataset> {
    norm.normalize(data)
}

/// Result of loading a training file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub data: NumericDataset,
    pub codec: CategoryCodec,
    pub nominal: NominalEncoding,
}

/// Parses a training file. The category codec and nominal encodings are
/// derived from the file itself.
pub fn load_dataset<R: Read>(source: R, schema: &DatasetSchema) -> Result<LoadedDataset> {
    let table = RawTable::read(source, schema)?;
    let codec =
        CategoryCodec::from_observed(table.records.iter().map(|r| r.label(schema).as_str()))?;
    let features = schema.feature_columns(table.width);
    let nominal = NominalEncoding::new(
        features
            .iter()
            .filter(|c| schema.nominal_columns.contains(c))
            .map(|&c| {
                let values = sorted_distinct(table.records.iter().map(|r| r.cells[c].as_str()));
                (c, values)
            })
            .collect(),
    );
    let data = table.to_numeric(schema, &codec, &nominal)?;
    Ok(LoadedDataset {
        data,
        codec,
        nominal,
    })
}

/// Parses an evaluation file against the codec and nominal encodings of a
/// training file. Labels or nominal values unseen in training are errors.
pub fn load_dataset_with<R: Read>(
    source: R,
    schema: &DatasetSchema,
    codec: &CategoryCodec,
    nominal: &NominalEncoding,
) -> Result<NumericDataset> {
    RawTable::read(source, schema)?.to_numeric(schema, codec, nominal)
}

struct RawRecord {
    line: usize,
    cells: Vec<String>,
}

impl RawRecord {
    fn label(&self, schema: &DatasetSchema) -> &String {
        &self.cells[schema.label_column]
    }
}

struct RawTable {
    records: Vec<RawRecord>,
    width: usize,
}

impl RawTable {
    fn read<R: Read>(source: R, schema: &DatasetSchema) -> Result<Self> {
        schema.validate()?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(schema.delimiter as u8)
            .has_headers(schema.has_header)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(source);

        let mut records = Vec::new();
        let mut width = None;
        for (i, result) in reader.records().enumerate() {
            let record = result?;
            let line = record
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(i + 1);
            let cells: Vec<String> = record.iter().map(str::to_owned).collect();
            if cells.len() == 1 && cells[0].is_empty() {
                continue;
            }
            let expected = *width.get_or_insert(cells.len());
            if cells.len() != expected {
                return Err(Error::RaggedRow {
                    row: line,
                    expected,
                    found: cells.len(),
                });
            }
            if let Some(column) = cells.iter().position(|c| c.is_empty() || c == "?") {
                return Err(Error::MissingValue { row: line, column });
            }
            records.push(RawRecord { line, cells });
        }

        let width = width.ok_or(Error::EmptyDataset)?;
        let out_of_range = std::iter::once(&schema.label_column)
            .chain(&schema.ignore_columns)
            .chain(&schema.nominal_columns)
            .find(|&&c| c >= width);
        if let Some(c) = out_of_range {
            return Err(Error::Schema(format!(
                "column {c} does not exist, rows have {width} columns"
            )));
        }
        if schema.feature_columns(width).is_empty() {
            return Err(Error::Schema("no feature columns remain".into()));
        }
        Ok(Self { records, width })
    }

    fn to_numeric(
        &self,
        schema: &DatasetSchema,
        codec: &CategoryCodec,
        nominal: &NominalEncoding,
    ) -> Result<NumericDataset> {
        let features = schema.feature_columns(self.width);
        let mut rows = Vec::with_capacity(self.records.len());
        let mut labels = Vec::with_capacity(self.records.len());
        for record in &self.records {
            let label = record.label(schema);
            labels.push(
                codec
                    .index_of(label)
                    .ok_or_else(|| Error::UnknownLabel(label.clone()))?,
            );
            let row = features
                .iter()
                .map(|&c| encode_cell(record, c, schema, nominal))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        NumericDataset::new(rows, labels)
    }
}

fn encode_cell(
    record: &RawRecord,
    column: usize,
    schema: &DatasetSchema,
    nominal: &NominalEncoding,
) -> Result<f64> {
    let cell = &record.cells[column];
    if schema.nominal_columns.contains(&column) {
        return nominal
            .encode(column, cell)
            .ok_or_else(|| Error::UnknownNominal {
                column,
                value: cell.clone(),
            });
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row: record.line,
            message: format!("column {column}: {cell:?} is not a finite number"),
        }),
    }
}

/// Distinct values in sorted order; numeric order when every value parses as
/// a number, lexicographic otherwise.
pub fn sorted_distinct<'a, I>(values: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let distinct: BTreeSet<&str> = values.into_iter().collect();
    let mut out: Vec<String> = distinct.into_iter().map(str::to_owned).collect();
    let numeric: Option<Vec<f64>> = out.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(keys) = numeric {
        let mut keyed: Vec<(f64, String)> = keys.into_iter().zip(out).collect();
        keyed.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.cmp(&b.1))
        });
        out = keyed.into_iter().map(|(_, s)| s).collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(values: &[&str]) -> Vec<String> {
        values.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn three_categories_map_to_zero_half_one() {
        let codec = CategoryCodec::from_observed(["2", "1", "3", "1"]).unwrap();
        assert_eq!(codec.labels(), labels(&["1", "2", "3"]).as_slice());
        assert_eq!(codec.output_values(), &[0.0, 0.5, 1.0]);
        assert_eq!(codec.gap(), 0.5);
    }

    #[test]
    fn two_categories_map_to_endpoints() {
        let codec = CategoryCodec::from_observed(["b", "a"]).unwrap();
        assert_eq!(codec.output_values(), &[0.0, 1.0]);
        assert_eq!(codec.gap(), 1.0);
    }

    #[test]
    fn single_category_is_rejected() {
        assert!(matches!(
            CategoryCodec::from_observed(["x", "x"]),
            Err(Error::TooFewCategories(1))
        ));
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        assert_eq!(sorted_distinct(["10", "9", "1"]), labels(&["1", "9", "10"]));
        assert_eq!(sorted_distinct(["b", "10", "9"]), labels(&["10", "9", "b"]));
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let codec = CategoryCodec::from_observed(["a", "b", "c"]).unwrap();
        assert_eq!(codec.nearest(0.25), 0);
        assert_eq!(codec.nearest(0.26), 1);
        assert_eq!(codec.nearest(1.7), 2);
        assert_eq!(codec.nearest(-3.0), 0);
    }

    #[test]
    fn nominal_column_encodes_evenly_over_sorted_values() {
        let text = "M,1,a\nF,2,b\nI,3,a\nM,4,b\n";
        let mut schema = DatasetSchema::new(2);
        schema.nominal_columns.insert(0);
        let loaded = load_dataset(text.as_bytes(), &schema).unwrap();
        assert_eq!(loaded.nominal.columns()[&0], labels(&["F", "I", "M"]));
        let firsts: Vec<f64> = loaded.data.rows().iter().map(|r| r[0]).collect();
        assert_eq!(firsts, vec![1.0, 0.0, 0.5, 1.0]);
        assert_eq!(loaded.data.labels(), &[0, 1, 0, 1]);
    }

    #[test]
    fn ignored_columns_are_dropped() {
        let text = "x,1,2,a\ny,3,4,b\n";
        let mut schema = DatasetSchema::new(3);
        schema.ignore_columns.insert(0);
        let loaded = load_dataset(text.as_bytes(), &schema).unwrap();
        assert_eq!(loaded.data.n(), 2);
        assert_eq!(loaded.data.rows()[1], vec![3.0, 4.0]);
    }

    #[test]
    fn header_row_is_skipped() {
        let text = "f1,f2,class\n1,2,a\n3,4,b\n";
        let mut schema = DatasetSchema::new(2);
        schema.has_header = true;
        let loaded = load_dataset(text.as_bytes(), &schema).unwrap();
        assert_eq!(loaded.data.len(), 2);
    }

    #[test]
    fn ragged_row_reports_line() {
        let text = "1,2,a\n3,b\n";
        match load_dataset(text.as_bytes(), &DatasetSchema::new(2)) {
            Err(Error::RaggedRow {
                row,
                expected,
                found,
            }) => {
                assert_eq!((row, expected, found), (2, 3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_values_are_rejected() {
        let text = "1,2,a\n3,?,b\n";
        assert!(matches!(
            load_dataset(text.as_bytes(), &DatasetSchema::new(2)),
            Err(Error::MissingValue { row: 2, column: 1 })
        ));
    }

    #[test]
    fn empty_source_is_an_error() {
        assert!(matches!(
            load_dataset("".as_bytes(), &DatasetSchema::new(0)),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn non_numeric_feature_is_a_parse_error() {
        let text = "1,2,a\n3,x,b\n";
        assert!(matches!(
            load_dataset(text.as_bytes(), &DatasetSchema::new(2)),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn label_column_out_of_range_is_a_schema_error() {
        assert!(matches!(
            load_dataset("1,2\n3,4\n".as_bytes(), &DatasetSchema::new(5)),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn ignored_label_column_is_a_schema_error() {
        let mut schema = DatasetSchema::new(1);
        schema.ignore_columns.insert(1);
        assert!(matches!(schema.validate(), Err(Error::Schema(_))));
    }

    #[test]
    fn unseen_test_label_is_an_error() {
        let train = load_dataset("1,a\n2,b\n".as_bytes(), &DatasetSchema::new(1)).unwrap();
        let err = load_dataset_with(
            "1,a\n2,c\n".as_bytes(),
            &DatasetSchema::new(1),
            &train.codec,
            &train.nominal,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownLabel(l) if l == "c"));
    }

    #[test]
    fn unseen_test_nominal_value_is_an_error() {
        let mut schema = DatasetSchema::new(1);
        schema.nominal_columns.insert(0);
        let train = load_dataset("F,a\nM,b\n".as_bytes(), &schema).unwrap();
        let err = load_dataset_with("I,a\n".as_bytes(), &schema, &train.codec, &train.nominal)
            .unwrap_err();
        assert!(matches!(err, Error::UnknownNominal { column: 0, .. }));
    }

    #[test]
    fn load_is_deterministic() {
        let text = "5.1,3.5,x\n4.9,3.0,y\n6.2,2.9,z\n";
        let a = load_dataset(text.as_bytes(), &DatasetSchema::new(2)).unwrap();
        let b = load_dataset(text.as_bytes(), &DatasetSchema::new(2)).unwrap();
        assert_eq!(a, b);
    }

    fn column(values: &[f64]) -> NumericDataset {
        NumericDataset::new(
            values.iter().map(|&v| vec![v]).collect(),
            vec![0; values.len()],
        )
        .unwrap()
    }

    #[test]
    fn fit_takes_column_min_and_max() {
        let norm = fit_normalizer(&column(&[2.0, 8.0, 4.0, 5.0, 10.0]));
        assert_eq!((norm.min(), norm.max()), (&[2.0][..], &[10.0][..]));

        let constant = fit_normalizer(&column(&[5.0, 5.0, 5.0]));
        assert_eq!((constant.min(), constant.max()), (&[5.0][..], &[5.0][..]));

        let single = NumericDataset::new(vec![vec![1.0, -2.0]], vec![0]).unwrap();
        let norm = fit_normalizer(&single);
        assert_eq!(norm.min(), norm.max());
    }

    #[test]
    fn normalize_maps_into_unit_interval() {
        let data = column(&[2.0, 8.0, 4.0, 5.0, 10.0]);
        let out = normalize(&data, &fit_normalizer(&data)).unwrap();
        let values: Vec<f64> = out.rows().iter().map(|r| r[0]).collect();
        assert_eq!(values, vec![0.0, 0.75, 0.25, 0.375, 1.0]);
    }

    #[test]
    fn constant_column_normalizes_to_zero() {
        let data = column(&[5.0, 5.0, 5.0]);
        let out = normalize(&data, &fit_normalizer(&data)).unwrap();
        assert!(out.rows().iter().all(|r| r[0] == 0.0));
    }

    #[test]
    fn test_values_are_not_clamped() {
        let norm = fit_normalizer(&column(&[2.0, 10.0]));
        assert_eq!(norm.normalize_row(&[12.0]).unwrap(), vec![1.25]);
        assert_eq!(norm.normalize_row(&[0.0]).unwrap(), vec![-0.25]);
    }

    #[test]
    fn normalize_rejects_wrong_width() {
        let norm = fit_normalizer(&column(&[1.0, 2.0]));
        assert!(matches!(
            norm.normalize_row(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn split_keeps_order() {
        let data = column(&[1.0, 2.0, 3.0]);
        let (a, b) = data.split_at(2).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(b.rows(), &[vec![3.0]]);
        assert!(data.split_at(3).is_err());
    }
}
