//! Labeled point clouds: storage, CSV / CIFAR-10 ingestion and subsampling.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DsiError, Result};

/// One class of a [`LabeledDataset`]: its dense id, original label text and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassInfo {
    pub id: u32,
    pub name: String,
    pub rows: Vec<usize>,
}

/// `n` points in `d` dimensions with dense integer class ids.
///
/// Points are stored row-major as 64-bit reals. Classes are kept sorted by id
/// and only non-empty classes are listed.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
    labels: Vec<u32>,
    classes: Vec<ClassInfo>,
}

impl LabeledDataset {
    /// Builds a dataset from row-major points and per-row class ids.
    ///
    /// `names[id]` is the reporting label of class `id`; missing entries fall
    /// back to the decimal id.
    pub fn new(points: Vec<f64>, d: usize, labels: Vec<u32>, names: &[String]) -> Result<Self> {
        if d == 0 {
            return Err(DsiError::NoFeatures);
        }
        if labels.is_empty() {
            return Err(DsiError::EmptyDataset);
        }
        let n = labels.len();
        if points.len() != n * d {
            return Err(DsiError::DimensionMismatch(points.len(), n * d));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(DsiError::NonFinite {
                row: pos / d,
                column: pos % d,
                value: points[pos].to_string(),
            });
        }

        let mut buckets: HashMap<u32, Vec<usize>> = HashMap::new();
        for (row, &label) in labels.iter().enumerate() {
            buckets.entry(label).or_default().push(row);
        }
        let mut classes: Vec<ClassInfo> = buckets
            .into_iter()
            .map(|(id, rows)| ClassInfo {
                id,
                name: names
                    .get(id as usize)
                    .cloned()
                    .unwrap_or_else(|| id.to_string()),
                rows,
            })
            .collect();
        classes.sort_by_key(|c| c.id);

        Ok(LabeledDataset {
            points,
            n,
            d,
            labels,
            classes,
        })
    }

    /// Builds a dataset from a list of rows. All rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u32>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut points = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(DsiError::DimensionMismatch(row.len(), d));
            }
            points.extend_from_slice(row);
        }
        if rows.len() != labels.len() {
            return Err(DsiError::DimensionMismatch(rows.len(), labels.len()));
        }
        Self::new(points, d, labels, &[])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, id: u32) -> Option<&ClassInfo> {
        self.classes
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.classes[i])
    }

    /// Returns a new dataset holding `rows` (in the given order).
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(rows.len() * self.d);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            points.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        let mut out = Self::new(points, self.d, labels, &[])?;
        for class in &mut out.classes {
            if let Some(orig) = self.class(class.id) {
                class.name.clone_from(&orig.name);
            }
        }
        Ok(out)
    }

    /// Applies `f` to every point in place, producing a new dataset with the
    /// same labels.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut points = Vec::with_capacity(self.points.len());
        let mut d = self.d;
        for i in 0..self.n {
            let mapped = f(self.row(i));
            d = mapped.len();
            points.extend(mapped);
        }
        let mut out = Self::new(points, d, self.labels.clone(), &[])?;
        out.classes = out
            .classes
            .into_iter()
            .zip(&self.classes)
            .map(|(mut c, orig)| {
                c.name.clone_from(&orig.name);
                c
            })
            .collect();
        Ok(out)
    }

    /// Writes the dataset as CSV with header `x0,..,x{d-1},label`.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so [`load_csv`] recovers the points exactly.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| DsiError::io(path, e))?;
        self.write_csv_to(file)
            .map_err(|e| DsiError::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.d).map(|j| format!("x{j}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        let names: HashMap<u32, &str> = self
            .classes
            .iter()
            .map(|c| (c.id, c.name.as_str()))
            .collect();
        let mut record = Vec::with_capacity(self.d + 1);
        for i in 0..self.n {
            record.clear();
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            record.push(names[&self.labels[i]].to_string());
            w.write_record(&record)?;
        }
        w.flush()
    }
}

/// Which CSV column carries the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Digits are read as a zero-based index, anything else as a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Name(n) => write!(f, "{n:?}"),
            LabelColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub delimiter: u8,
}

impl CsvOptions {
    pub fn new(label_column: LabelColumn) -> Self {
        CsvOptions {
            label_column,
            has_header: true,
            delimiter: b',',
        }
    }
}

/// Loads a labeled dataset from CSV.
///
/// Labels are remapped to dense ids in first-appearance order. Row and column
/// numbers in errors are zero-based and count data rows only.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| DsiError::io(path, e))?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .flexible(true)
        .from_reader(reader);

    let label_idx = match &opts.label_column {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => {
            if !opts.has_header {
                return Err(DsiError::LabelColumnMissing(opts.label_column.to_string()));
            }
            let headers = rdr.headers()?;
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| DsiError::LabelColumnMissing(opts.label_column.to_string()))?
        }
    };
    if opts.has_header && label_idx >= rdr.headers()?.len() {
        return Err(DsiError::LabelColumnMissing(opts.label_column.to_string()));
    }

    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut width = None;

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(DsiError::RaggedRow {
                row,
                expected,
                found: record.len(),
            });
        }
        let li = label_idx;
        if li >= record.len() {
            return Err(DsiError::LabelColumnMissing(opts.label_column.to_string()));
        }
        for (column, cell) in record.iter().enumerate() {
            if column == li {
                continue;
            }
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| DsiError::Unparsable {
                row,
                column,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DsiError::NonFinite {
                    row,
                    column,
                    value: cell.to_string(),
                });
            }
            points.push(value);
        }
        let label = record[li].trim().to_string();
        let next = ids.len() as u32;
        let id = *ids.entry(label.clone()).or_insert_with(|| {
            names.push(label);
            next
        });
        labels.push(id);
    }

    let d = match width {
        None => return Err(DsiError::EmptyDataset),
        Some(w) => w - 1,
    };
    LabeledDataset::new(points, d, labels, &names)
}

/// Bytes per CIFAR-10 record: one label byte then 3 x 32 x 32 pixel bytes.
pub const CIFAR10_RECORD: usize = 3073;
pub const CIFAR10_PIXELS: usize = 3072;

/// Reads CIFAR-10 binary batches, concatenated in argument order.
pub fn load_cifar10_binary<P: AsRef<Path>>(paths: &[P]) -> Result<LabeledDataset> {
    if paths.is_empty() {
        return Err(DsiError::NoInputs);
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
            .map_err(|e| DsiError::io(path, e))?;
        decode_cifar10(&bytes, &mut points, &mut labels)
            .map_err(|e| match e {
                DsiError::MalformedRecord(msg) => {
                    DsiError::MalformedRecord(format!("{}: {msg}", path.display()))
                }
                other => other,
            })?;
    }
    let names: Vec<String> = CIFAR10_CLASSES.iter().map(|s| s.to_string()).collect();
    LabeledDataset::new(points, CIFAR10_PIXELS, labels, &names)
}

pub const CIFAR10_CLASSES: [&str; 10] = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
];

fn decode_cifar10(bytes: &[u8], points: &mut Vec<f64>, labels: &mut Vec<u32>) -> Result<()> {
    if bytes.is_empty() || bytes.len() % CIFAR10_RECORD != 0 {
        return Err(DsiError::MalformedRecord(format!(
            "size {} is not a positive multiple of {CIFAR10_RECORD}",
            bytes.len()
        )));
    }
    let offset = labels.len();
    points.reserve(bytes.len() / CIFAR10_RECORD * CIFAR10_PIXELS);
    for (i, record) in bytes.chunks_exact(CIFAR10_RECORD).enumerate() {
        let label = record[0];
        if label > 9 {
            return Err(DsiError::BadLabel {
                record: offset + i,
                label,
            });
        }
        labels.push(label as u32);
        points.extend(record[1..].iter().map(|&b| f64::from(b)));
    }
    Ok(())
}

/// Subset size for [`subsample`]: a fraction of the rows or an absolute count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSize {
    Fraction(f64),
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleConfig {
    pub size: SubsetSize,
    pub trials: usize,
    pub seed: u64,
}

impl SubsampleConfig {
    /// Number of rows drawn per trial from a dataset of `n` rows.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let count = match self.size {
            SubsetSize::Count(c) => c,
            SubsetSize::Fraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(DsiError::InvalidSubsample(format!(
                        "fraction {f} not in (0, 1]"
                    )));
                }
                (f * n as f64).round() as usize
            }
        };
        if count < 2 {
            return Err(DsiError::InvalidSubsample(format!(
                "subset of {count} rows (need at least 2)"
            )));
        }
        if count > n {
            return Err(DsiError::InvalidSubsample(format!(
                "subset of {count} rows from a dataset of {n}"
            )));
        }
        if self.trials == 0 {
            return Err(DsiError::InvalidSubsample("trials must be >= 1".into()));
        }
        Ok(count)
    }
}

/// Draws trial `trial_index` of `cfg`: a uniform selection of rows without
/// replacement, returned in original row order.
///
/// Each trial uses its own ChaCha stream keyed by `(seed, trial_index)`.
pub fn subsample(
    data: &LabeledDataset,
    cfg: &SubsampleConfig,
    trial_index: usize,
) -> Result<LabeledDataset> {
    let count = cfg.resolve(data.len())?;
    if trial_index >= cfg.trials {
        return Err(DsiError::InvalidSubsample(format!(
            "trial {trial_index} out of range for {} trials",
            cfg.trials
        )));
    }
    if count == data.len() {
        return Ok(data.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial_index as u64);
    let mut rows = index::sample(&mut rng, data.len(), count).into_vec();
    rows.sort_unstable();
    data.select(&rows)
}
