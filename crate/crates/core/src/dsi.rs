//! The distance-based separability index.
//!
//! For each class, the divergence between its intra-class distance set and its
//! one-versus-rest between-class distance set is computed; the index is the
//! unweighted mean over classes.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{subsample, LabeledDataset, SubsampleConfig};
use crate::distrib::Divergence;
use crate::error::{DsiError, Result};
use crate::metrics::{bcd_pair, class_distance_sets, icd_set, MetricKind, MetricSpec};

#[derive(Debug, Clone, Default)]
pub struct DsiConfig {
    pub metric: MetricSpec,
    pub divergence: Divergence,
    pub subsample: Option<SubsampleConfig>,
}

impl DsiConfig {
    pub fn new(metric: MetricKind, divergence: Divergence) -> Self {
        DsiConfig {
            metric: MetricSpec::new(metric),
            divergence,
            subsample: None,
        }
    }

    /// Mahalanobis without a covariance falls back to the pooled covariance
    /// of `data`.
    fn metric_for(&self, data: &LabeledDataset) -> Result<MetricSpec> {
        match (&self.metric.kind, &self.metric.inverse_covariance) {
            (MetricKind::Mahalanobis, None) => MetricSpec::resolve(MetricKind::Mahalanobis, data),
            _ => Ok(self.metric.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStatistic {
    pub class_id: u32,
    pub label: String,
    /// Divergence between this class's ICD and BCD sets.
    pub statistic: f64,
    pub icd_count: usize,
    pub bcd_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub distances_secs: f64,
    pub divergence_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsiReport {
    pub dsi: f64,
    pub per_class: Vec<ClassStatistic>,
    pub metric: MetricKind,
    pub divergence: Divergence,
    pub seed: Option<u64>,
    pub subsample: Option<SubsampleConfig>,
    pub n_points: usize,
    pub timing: Timing,
}

impl DsiReport {
    /// The same report with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        DsiReport {
            timing: Timing::default(),
            ..self.clone()
        }
    }
}

fn check_classes(data: &LabeledDataset) -> Result<()> {
    if data.num_classes() < 2 {
        return Err(DsiError::TooFewClasses(data.num_classes()));
    }
    if let Some(c) = data.classes().iter().find(|c| c.rows.len() < 2) {
        return Err(DsiError::SingletonClass(c.id));
    }
    Ok(())
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len() as f64;
    values.sum::<f64>() / n
}

fn report(
    data: &LabeledDataset,
    cfg: &DsiConfig,
    metric: &MetricSpec,
    per_class: Vec<ClassStatistic>,
    timing: Timing,
) -> DsiReport {
    DsiReport {
        dsi: mean(per_class.iter().map(|c| c.statistic)),
        per_class,
        metric: metric.kind,
        divergence: cfg.divergence,
        seed: cfg.subsample.map(|s| s.seed),
        subsample: cfg.subsample,
        n_points: data.len(),
        timing,
    }
}

/// Two-class index `(s_x + s_y) / 2` with a shared between-class set.
pub fn dsi_two_class(data: &LabeledDataset, cfg: &DsiConfig) -> Result<DsiReport> {
    if data.num_classes() != 2 {
        return Err(DsiError::NotTwoClasses(data.num_classes()));
    }
    check_classes(data)?;
    let metric = cfg.metric_for(data)?;
    let (x, y) = (&data.classes()[0], &data.classes()[1]);

    let start = Instant::now();
    let icd_x = icd_set(data, x.id, &metric)?;
    let icd_y = icd_set(data, y.id, &metric)?;
    let bcd = bcd_pair(data, x.id, y.id, &metric)?;
    let distances_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let s_x = cfg.divergence.between(&icd_x, &bcd)?;
    let s_y = cfg.divergence.between(&icd_y, &bcd)?;
    let divergence_secs = start.elapsed().as_secs_f64();

    let per_class = [(x, s_x, icd_x.len()), (y, s_y, icd_y.len())]
        .into_iter()
        .map(|(c, statistic, icd_count)| ClassStatistic {
            class_id: c.id,
            label: c.name.clone(),
            statistic,
            icd_count,
            bcd_count: bcd.len(),
        })
        .collect();
    Ok(report(
        data,
        cfg,
        &metric,
        per_class,
        Timing {
            distances_secs,
            divergence_secs,
        },
    ))
}

/// Multi-class index, one class versus the pooled rest, averaged over classes.
pub fn dsi_multiclass(data: &LabeledDataset, cfg: &DsiConfig) -> Result<DsiReport> {
    check_classes(data)?;
    let metric = cfg.metric_for(data)?;

    let start = Instant::now();
    let sets = class_distance_sets(data, &metric)?;
    let distances_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let stats: Vec<f64> = sets
        .par_iter()
        .map(|(icd, bcd)| cfg.divergence.between(icd, bcd))
        .collect::<Result<_>>()?;
    let divergence_secs = start.elapsed().as_secs_f64();

    let per_class = data
        .classes()
        .iter()
        .zip(sets.iter().zip(stats))
        .map(|(c, ((icd, bcd), statistic))| ClassStatistic {
            class_id: c.id,
            label: c.name.clone(),
            statistic,
            icd_count: icd.len(),
            bcd_count: bcd.len(),
        })
        .collect();
    Ok(report(
        data,
        cfg,
        &metric,
        per_class,
        Timing {
            distances_secs,
            divergence_secs,
        },
    ))
}

/// Result of repeated subsampled DSI runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsiEstimate {
    pub mean: f64,
    /// Sample standard deviation (denominator `trials - 1`); 0 for one trial.
    pub sd: f64,
    pub trials: Vec<DsiReport>,
}

/// Runs [`dsi_multiclass`] on `cfg.subsample.trials` random subsets.
pub fn dsi_estimate(data: &LabeledDataset, cfg: &DsiConfig) -> Result<DsiEstimate> {
    let sub = cfg
        .subsample
        .ok_or_else(|| DsiError::InvalidSubsample("no subsample configured".into()))?;
    sub.resolve(data.len())?;
    let cfg = DsiConfig {
        metric: cfg.metric_for(data)?,
        ..cfg.clone()
    };

    let trials: Vec<DsiReport> = (0..sub.trials)
        .into_par_iter()
        .map(|t| {
            let subset = subsample(data, &sub, t)?;
            dsi_multiclass(&subset, &cfg)
        })
        .collect::<Result<_>>()?;

    let mean_dsi = mean(trials.iter().map(|r| r.dsi));
    let sd = if trials.len() > 1 {
        let ss: f64 = trials.iter().map(|r| (r.dsi - mean_dsi).powi(2)).sum();
        (ss / (trials.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(DsiEstimate {
        mean: mean_dsi,
        sd,
        trials,
    })
}
