//! Point-to-point metrics and the intra-class / between-class distance multisets.
//!
//! Every metric is reduced to one of four kernels over "prepared" rows:
//! Mahalanobis whitens each point once so that the pairwise loop is plain
//! Euclidean, and Correlation centers each point once so that it becomes a
//! Cosine evaluation. [`point_distance`] goes through the same preparation, so
//! it returns bit-identical values to the pairwise engine.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{DsiError, Result};

/// Rows per work unit of the pairwise engine.
const BLOCK_ROWS: usize = 128;

/// Largest covariance condition number accepted for Mahalanobis.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    CityBlock,
    Chebyshev,
    Cosine,
    Correlation,
    Mahalanobis,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Euclidean,
        MetricKind::CityBlock,
        MetricKind::Chebyshev,
        MetricKind::Cosine,
        MetricKind::Correlation,
        MetricKind::Mahalanobis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::CityBlock => "cityblock",
            MetricKind::Chebyshev => "chebyshev",
            MetricKind::Cosine => "cosine",
            MetricKind::Correlation => "correlation",
            MetricKind::Mahalanobis => "mahalanobis",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = DsiError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "city-block" | "manhattan" | "l1" => return Ok(MetricKind::CityBlock),
            "l2" => return Ok(MetricKind::Euclidean),
            "linf" => return Ok(MetricKind::Chebyshev),
            _ => {}
        }
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| DsiError::Unknown {
                what: "metric",
                name: s.to_string(),
            })
    }
}

/// Inverse covariance for Mahalanobis distance, stored with a whitening map
/// `W` such that `(a-b)^T S^-1 (a-b) = |W a - W b|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCovariance {
    inverse: DMatrix<f64>,
    whitening: DMatrix<f64>,
}

impl InverseCovariance {
    /// Wraps a user-supplied inverse covariance, which must be symmetric
    /// positive definite.
    pub fn new(inverse: DMatrix<f64>) -> Result<Self> {
        if !inverse.is_square() {
            return Err(DsiError::DimensionMismatch(inverse.nrows(), inverse.ncols()));
        }
        let scale = inverse.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if (&inverse - inverse.transpose()).amax() > 1e-12 * scale.max(1.0) {
            return Err(DsiError::NotPositiveDefinite);
        }
        let chol = inverse
            .clone()
            .cholesky()
            .ok_or(DsiError::NotPositiveDefinite)?;
        let whitening = chol.l().transpose();
        Ok(InverseCovariance { inverse, whitening })
    }

    /// Estimates the covariance of all rows of `data` (classes pooled,
    /// denominator n-1) and inverts it.
    pub fn pooled(data: &LabeledDataset) -> Result<Self> {
        let (n, d) = (data.len(), data.dim());
        if n < 2 {
            return Err(DsiError::SingularCovariance(f64::INFINITY));
        }
        let x = DMatrix::from_row_slice(n, d, data.points());
        let mean = x.row_mean();
        let mut centered = x;
        for mut row in centered.row_iter_mut() {
            row -= &mean;
        }
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);

        let eig = SymmetricEigen::new(cov.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let cond = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(cond <= MAX_CONDITION) {
            return Err(DsiError::SingularCovariance(cond));
        }

        let chol = cov.cholesky().ok_or(DsiError::SingularCovariance(cond))?;
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(d, d))
            .ok_or(DsiError::SingularCovariance(cond))?;
        let inverse = l_inv.transpose() * &l_inv;
        Ok(InverseCovariance {
            inverse,
            whitening: l_inv,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn dim(&self) -> usize {
        self.inverse.nrows()
    }

    fn whiten(&self, x: &[f64]) -> Vec<f64> {
        (&self.whitening * DVector::from_column_slice(x))
            .as_slice()
            .to_vec()
    }
}

/// A metric choice plus its state.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub inverse_covariance: Option<Arc<InverseCovariance>>,
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec::new(MetricKind::Euclidean)
    }
}

impl MetricSpec {
    /// A metric without state. Mahalanobis built this way fails at use with
    /// [`DsiError::MissingCovariance`]; see [`MetricSpec::resolve`].
    pub fn new(kind: MetricKind) -> Self {
        MetricSpec {
            kind,
            inverse_covariance: None,
        }
    }

    pub fn mahalanobis(inv: InverseCovariance) -> Self {
        MetricSpec {
            kind: MetricKind::Mahalanobis,
            inverse_covariance: Some(Arc::new(inv)),
        }
    }

    /// Builds the metric for `data`, estimating the pooled covariance when
    /// `kind` is Mahalanobis.
    pub fn resolve(kind: MetricKind, data: &LabeledDataset) -> Result<Self> {
        match kind {
            MetricKind::Mahalanobis => Ok(Self::mahalanobis(InverseCovariance::pooled(data)?)),
            k => Ok(Self::new(k)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    L2,
    L1,
    Linf,
    /// `1 - a.b / sqrt(|a|^2 |b|^2)` with squared norms precomputed.
    Cosine,
}

/// Rows transformed for a metric, plus per-row squared norms for the cosine kernel.
struct Prepared {
    data: Vec<f64>,
    d: usize,
    sq_norms: Vec<f64>,
    kernel: Kernel,
}

impl Prepared {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let (a, b) = (self.row(i), self.row(j));
        match self.kernel {
            Kernel::L2 => l2(a, b),
            Kernel::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Kernel::Linf => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            Kernel::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let cos = dot / (self.sq_norms[i] * self.sq_norms[j]).sqrt();
                (1.0 - cos).clamp(0.0, 2.0)
            }
        }
    }
}

#[inline]
fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

fn sum_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn prepare<'a>(
    rows: impl Iterator<Item = &'a [f64]>,
    d: usize,
    metric: &MetricSpec,
) -> Result<Prepared> {
    let mut data = Vec::new();
    let mut sq_norms = Vec::new();
    let kernel = match metric.kind {
        MetricKind::Euclidean | MetricKind::Mahalanobis => Kernel::L2,
        MetricKind::CityBlock => Kernel::L1,
        MetricKind::Chebyshev => Kernel::Linf,
        MetricKind::Cosine | MetricKind::Correlation => Kernel::Cosine,
    };
    let inv = match metric.kind {
        MetricKind::Mahalanobis => {
            let inv = metric
                .inverse_covariance
                .as_deref()
                .ok_or(DsiError::MissingCovariance)?;
            if inv.dim() != d {
                return Err(DsiError::DimensionMismatch(inv.dim(), d));
            }
            Some(inv)
        }
        _ => None,
    };

    for row in rows {
        match metric.kind {
            MetricKind::Mahalanobis => data.extend(inv.unwrap().whiten(row)),
            MetricKind::Cosine => {
                let ss = sum_sq(row);
                if ss == 0.0 {
                    return Err(DsiError::ZeroNorm);
                }
                sq_norms.push(ss);
                data.extend_from_slice(row);
            }
            MetricKind::Correlation => {
                let mean = row.iter().sum::<f64>() / d as f64;
                let centered: Vec<f64> = row.iter().map(|v| v - mean).collect();
                let ss = sum_sq(&centered);
                // constant rows leave only rounding residue after centering
                if ss <= 1e-24 * sum_sq(row).max(f64::MIN_POSITIVE) {
                    return Err(DsiError::ZeroVariance);
                }
                sq_norms.push(ss);
                data.extend(centered);
            }
            _ => data.extend_from_slice(row),
        }
    }
    Ok(Prepared {
        data,
        d,
        sq_norms,
        kernel,
    })
}

fn prepare_dataset(data: &LabeledDataset, metric: &MetricSpec) -> Result<Prepared> {
    prepare((0..data.len()).map(|i| data.row(i)), data.dim(), metric)
}

/// Distance between two points under `metric`.
pub fn point_distance(a: &[f64], b: &[f64], metric: &MetricSpec) -> Result<f64> {
    if a.len() != b.len() {
        return Err(DsiError::DimensionMismatch(a.len(), b.len()));
    }
    let prep = prepare([a, b].into_iter(), a.len(), metric)?;
    Ok(prep.dist(0, 1))
}

/// Where a [`DistanceSample`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    /// Distances within one class.
    Icd(u32),
    /// Distances between one class and all other classes pooled.
    BcdRest(u32),
    /// Distances between two classes.
    BcdPair(u32, u32),
}

/// Sorted multiset of non-negative distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSample {
    values: Vec<f64>,
    source: SampleSource,
}

const SAMPLE_MAGIC: &[u8; 8] = b"DSISAMP1";

impl DistanceSample {
    /// Sorts `values` ascending. Panics on NaN or negative entries.
    pub fn new(mut values: Vec<f64>, source: SampleSource) -> Self {
        assert!(
            values.iter().all(|v| *v >= 0.0),
            "distances must be finite and non-negative"
        );
        values.par_sort_unstable_by(f64::total_cmp);
        DistanceSample { values, source }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> SampleSource {
        self.source
    }

    /// Writes a 32-byte header (magic, source tag, count) followed by the
    /// values as little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let (tag, a, b) = match self.source {
            SampleSource::Icd(c) => (0u32, c, 0u32),
            SampleSource::BcdRest(c) => (1, c, 0),
            SampleSource::BcdPair(x, y) => (2, x, y),
        };
        w.write_all(SAMPLE_MAGIC)?;
        w.write_all(&tag.to_le_bytes())?;
        w.write_all(&a.to_le_bytes())?;
        w.write_all(&b.to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| DsiError::MalformedRecord(format!("distance sample: {m}"));
        let mut header = [0u8; 32];
        r.read_exact(&mut header).map_err(|_| bad("short header"))?;
        if &header[..8] != SAMPLE_MAGIC {
            return Err(bad("bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        let source = match word(8) {
            0 => SampleSource::Icd(word(12)),
            1 => SampleSource::BcdRest(word(12)),
            2 => SampleSource::BcdPair(word(12), word(16)),
            t => return Err(bad(&format!("unknown source tag {t}"))),
        };
        let count = u64::from_le_bytes(header[24..32].try_into().unwrap()) as usize;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|_| bad("short body"))?;
        if bytes.len() != count * 8 {
            return Err(bad("body length does not match count"));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(bad("invalid distance value"));
        }
        Ok(DistanceSample::new(values, source))
    }
}

fn class_rows(data: &LabeledDataset, class_id: u32) -> Result<&[usize]> {
    data.class(class_id)
        .map(|c| c.rows.as_slice())
        .ok_or(DsiError::ClassAbsent(class_id))
}

/// All `m(m-1)/2` distances between distinct rows of `rows`.
fn within(prep: &Prepared, rows: &[usize]) -> Vec<f64> {
    let m = rows.len();
    let blocks: Vec<Vec<f64>> = (0..m.div_ceil(BLOCK_ROWS))
        .into_par_iter()
        .map(|b| {
            let mut out = Vec::new();
            for p in b * BLOCK_ROWS..((b + 1) * BLOCK_ROWS).min(m) {
                out.extend(rows[p + 1..].iter().map(|&j| prep.dist(rows[p], j)));
            }
            out
        })
        .collect();
    blocks.concat()
}

/// All `|a| * |b|` distances between a row of `a` and a row of `b`.
fn cross(prep: &Prepared, a: &[usize], b: &[usize]) -> Vec<f64> {
    let blocks: Vec<Vec<f64>> = a
        .par_chunks(BLOCK_ROWS)
        .map(|chunk| {
            let mut out = Vec::with_capacity(chunk.len() * b.len());
            for &i in chunk {
                out.extend(b.iter().map(|&j| prep.dist(i, j)));
            }
            out
        })
        .collect();
    blocks.concat()
}

/// Intra-class distance set of `class_id`.
pub fn icd_set(data: &LabeledDataset, class_id: u32, metric: &MetricSpec) -> Result<DistanceSample> {
    let rows = class_rows(data, class_id)?;
    if rows.len() < 2 {
        return Err(DsiError::SingletonClass(class_id));
    }
    let prep = prepare_dataset(data, metric)?;
    Ok(DistanceSample::new(
        within(&prep, rows),
        SampleSource::Icd(class_id),
    ))
}

/// Between-class distance set of `class_id` against all other classes pooled.
pub fn bcd_set(data: &LabeledDataset, class_id: u32, metric: &MetricSpec) -> Result<DistanceSample> {
    let rows = class_rows(data, class_id)?;
    let rest: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels()[i] != class_id)
        .collect();
    if rest.is_empty() {
        return Err(DsiError::EmptyComplement(class_id));
    }
    let prep = prepare_dataset(data, metric)?;
    Ok(DistanceSample::new(
        cross(&prep, rows, &rest),
        SampleSource::BcdRest(class_id),
    ))
}

/// Between-class distance set of two specific classes.
pub fn bcd_pair(
    data: &LabeledDataset,
    first: u32,
    second: u32,
    metric: &MetricSpec,
) -> Result<DistanceSample> {
    let a = class_rows(data, first)?;
    let b = class_rows(data, second)?;
    let prep = prepare_dataset(data, metric)?;
    Ok(DistanceSample::new(
        cross(&prep, a, b),
        SampleSource::BcdPair(first, second),
    ))
}

/// ICD and one-versus-rest BCD sets for every class, in class-id order, from a
/// single pass over all row pairs.
///
/// Each within-class pair lands in its class's ICD; each cross-class pair
/// lands in the BCD of both of its classes.
pub fn class_distance_sets(
    data: &LabeledDataset,
    metric: &MetricSpec,
) -> Result<Vec<(DistanceSample, DistanceSample)>> {
    let classes = data.classes();
    if classes.len() < 2 {
        return Err(DsiError::TooFewClasses(classes.len()));
    }
    let prep = prepare_dataset(data, metric)?;
    let max_id = classes.iter().map(|c| c.id).max().unwrap() as usize;
    let mut slot_of = vec![usize::MAX; max_id + 1];
    for (s, c) in classes.iter().enumerate() {
        slot_of[c.id as usize] = s;
    }
    let slots: Vec<usize> = data.labels().iter().map(|&l| slot_of[l as usize]).collect();
    let k = classes.len();
    let n = data.len();

    let blocks: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = (0..n.div_ceil(BLOCK_ROWS))
        .into_par_iter()
        .map(|b| {
            let mut icd = vec![Vec::new(); k];
            let mut bcd = vec![Vec::new(); k];
            for i in b * BLOCK_ROWS..((b + 1) * BLOCK_ROWS).min(n) {
                let si = slots[i];
                for j in i + 1..n {
                    let dist = prep.dist(i, j);
                    let sj = slots[j];
                    if si == sj {
                        icd[si].push(dist);
                    } else {
                        bcd[si].push(dist);
                        bcd[sj].push(dist);
                    }
                }
            }
            (icd, bcd)
        })
        .collect();

    let mut icd: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut bcd: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (bi, bb) in blocks {
        for (dst, src) in icd.iter_mut().zip(bi) {
            dst.extend(src);
        }
        for (dst, src) in bcd.iter_mut().zip(bb) {
            dst.extend(src);
        }
    }
    Ok(classes
        .iter()
        .zip(icd.into_iter().zip(bcd))
        .map(|(c, (i, b))| {
            (
                DistanceSample::new(i, SampleSource::Icd(c.id)),
                DistanceSample::new(b, SampleSource::BcdRest(c.id)),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(kind: MetricKind) -> MetricSpec {
        MetricSpec::new(kind)
    }

    #[test]
    fn three_four_five() {
        let (a, b) = ([0.0, 0.0], [3.0, 4.0]);
        assert_eq!(point_distance(&a, &b, &m(MetricKind::Euclidean)).unwrap(), 5.0);
        assert_eq!(point_distance(&a, &b, &m(MetricKind::CityBlock)).unwrap(), 7.0);
        assert_eq!(point_distance(&a, &b, &m(MetricKind::Chebyshev)).unwrap(), 4.0);
    }

    #[test]
    fn self_distance_is_zero() {
        let a = [0.3, -1.7, 2.2, 9.1];
        let inv = InverseCovariance::new(DMatrix::from_diagonal_element(4, 4, 2.0)).unwrap();
        let metrics = [
            m(MetricKind::Euclidean),
            m(MetricKind::CityBlock),
            m(MetricKind::Chebyshev),
            m(MetricKind::Cosine),
            m(MetricKind::Correlation),
            MetricSpec::mahalanobis(inv),
        ];
        for metric in &metrics {
            assert_eq!(point_distance(&a, &a, metric).unwrap(), 0.0, "{:?}", metric.kind);
        }
    }

    #[test]
    fn cosine_and_correlation_values() {
        let c = point_distance(&[1.0, 0.0], &[0.0, 2.0], &m(MetricKind::Cosine)).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        let c = point_distance(&[1.0, 1.0], &[-1.0, -1.0], &m(MetricKind::Cosine)).unwrap();
        assert!((c - 2.0).abs() < 1e-15);
        // perfectly anti-correlated after centering
        let r = point_distance(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0], &m(MetricKind::Correlation))
            .unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        // correlation ignores offset and positive scale
        let r = point_distance(&[1.0, 2.0, 4.0], &[12.0, 14.0, 18.0], &m(MetricKind::Correlation))
            .unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn mahalanobis_matches_quadratic_form() {
        let s_inv = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let metric = MetricSpec::mahalanobis(InverseCovariance::new(s_inv.clone()).unwrap());
        let (a, b) = ([1.0, 2.0], [-0.5, 4.0]);
        let diff = DVector::from_vec(vec![a[0] - b[0], a[1] - b[1]]);
        let expected = (diff.transpose() * &s_inv * &diff)[(0, 0)].sqrt();
        let got = point_distance(&a, &b, &metric).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(
            point_distance(&[1.0], &[1.0, 2.0], &m(MetricKind::Euclidean)),
            Err(DsiError::DimensionMismatch(1, 2))
        ));
        assert!(matches!(
            point_distance(&[0.0, 0.0], &[1.0, 2.0], &m(MetricKind::Cosine)),
            Err(DsiError::ZeroNorm)
        ));
        assert!(matches!(
            point_distance(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0], &m(MetricKind::Correlation)),
            Err(DsiError::ZeroVariance)
        ));
        assert!(matches!(
            point_distance(&[0.0], &[1.0], &m(MetricKind::Mahalanobis)),
            Err(DsiError::MissingCovariance)
        ));
        let not_spd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            InverseCovariance::new(not_spd),
            Err(DsiError::NotPositiveDefinite)
        ));
    }

    #[test]
    fn pooled_covariance_singular() {
        // second feature is twice the first
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let ds = LabeledDataset::from_rows(&rows, (0..10).map(|i| i % 2).collect()).unwrap();
        let err = MetricSpec::resolve(MetricKind::Mahalanobis, &ds).unwrap_err();
        assert!(matches!(err, DsiError::SingularCovariance(_)));
        assert_eq!(err.kind(), crate::ErrorKind::Numeric);
    }

    #[test]
    fn pooled_covariance_inverse() {
        let rows = vec![
            vec![0.0, 1.0],
            vec![2.0, 0.0],
            vec![1.0, 3.0],
            vec![4.0, 2.0],
            vec![3.0, 5.0],
        ];
        let ds = LabeledDataset::from_rows(&rows, vec![0, 0, 1, 1, 1]).unwrap();
        let inv = InverseCovariance::pooled(&ds).unwrap();
        // sample covariance of the rows above, computed by hand
        let cov = DMatrix::from_row_slice(2, 2, &[2.5, 1.0, 1.0, 3.7]);
        let prod = &cov * inv.matrix();
        assert!((prod - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    fn ds(rows: &[[f64; 2]], labels: &[u32]) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        LabeledDataset::from_rows(&rows, labels.to_vec()).unwrap()
    }

    #[test]
    fn icd_single_pair_and_collinear_triple() {
        let e = MetricSpec::default();
        let d = ds(&[[0.0, 0.0], [3.0, 4.0], [9.0, 9.0]], &[0, 0, 1]);
        let s = icd_set(&d, 0, &e).unwrap();
        assert_eq!(s.values(), &[5.0]);
        assert_eq!(s.source(), SampleSource::Icd(0));

        let d = ds(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], &[0, 0, 0]);
        assert_eq!(icd_set(&d, 0, &e).unwrap().values(), &[1.0, 1.0, 2.0]);
    }

    #[test]
    fn icd_errors() {
        let d = ds(&[[0.0, 0.0], [3.0, 4.0]], &[0, 1]);
        let e = MetricSpec::default();
        assert!(matches!(icd_set(&d, 0, &e), Err(DsiError::SingletonClass(0))));
        assert!(matches!(icd_set(&d, 5, &e), Err(DsiError::ClassAbsent(5))));
        assert!(matches!(bcd_set(&d, 5, &e), Err(DsiError::ClassAbsent(5))));
        let single = ds(&[[0.0, 0.0], [3.0, 4.0]], &[0, 0]);
        assert!(matches!(bcd_set(&single, 0, &e), Err(DsiError::EmptyComplement(0))));
    }

    #[test]
    fn bcd_single_cross_pair() {
        let d = ds(&[[0.0, 0.0], [3.0, 4.0]], &[0, 1]);
        let s = bcd_set(&d, 0, &MetricSpec::default()).unwrap();
        assert_eq!(s.values(), &[5.0]);
        assert_eq!(s.source(), SampleSource::BcdRest(0));
    }

    #[test]
    fn cloned_clouds_have_one_zero_per_point() {
        // brute-force enumeration over the 25 cross pairs: zero only on the diagonal
        let cloud = [[0.0, 0.0], [1.0, 0.5], [2.5, -1.0], [-3.0, 4.0], [0.25, 0.75]];
        let rows: Vec<[f64; 2]> = cloud.iter().chain(cloud.iter()).copied().collect();
        let labels: Vec<u32> = (0..10).map(|i| (i / 5) as u32).collect();
        let d = ds(&rows, &labels);
        let s = bcd_set(&d, 0, &MetricSpec::default()).unwrap();
        assert_eq!(s.len(), 25);
        assert_eq!(s.values().iter().filter(|v| **v == 0.0).count(), 5);
        assert!(s.values()[5] > 0.0);
    }

    #[test]
    fn spill_round_trip() {
        let s = DistanceSample::new(vec![3.0, 0.5, 1.25], SampleSource::BcdPair(2, 7));
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 3 * 8);
        assert_eq!(&buf[..8], b"DSISAMP1");
        assert_eq!(&buf[32..40], &0.5f64.to_le_bytes());
        assert_eq!(DistanceSample::read_from(buf.as_slice()).unwrap(), s);
        buf.truncate(40);
        assert!(DistanceSample::read_from(buf.as_slice()).is_err());
    }

    #[test]
    fn metric_names_parse() {
        for k in MetricKind::ALL {
            assert_eq!(k.name().parse::<MetricKind>().unwrap(), k);
        }
        assert_eq!("City-Block".parse::<MetricKind>().unwrap(), MetricKind::CityBlock);
        assert!("hamming".parse::<MetricKind>().is_err());
    }
}
