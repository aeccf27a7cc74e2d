//! Empirical CDFs and two-sample divergences between distance multisets.
//!
//! Both divergences walk the two sorted samples once. At each distinct value
//! `x` of the merged support, every sample element `<= x` is consumed from
//! both sides before the ECDFs are compared, so ties across samples are
//! evaluated at the shared jump.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DsiError, Result};
use crate::metrics::DistanceSample;

/// Right-continuous step function `F(x) = #{samples <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    support: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Ecdf {
    /// Builds the ECDF of an ascending-sorted, non-empty sample.
    pub fn from_sorted(sorted: &[f64]) -> Result<Self> {
        if sorted.is_empty() {
            return Err(DsiError::EmptySample);
        }
        let n = sorted.len() as f64;
        let mut support = Vec::new();
        let mut cumulative = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let x = sorted[i];
            while i < sorted.len() && sorted[i] <= x {
                i += 1;
            }
            support.push(x);
            cumulative.push(i as f64 / n);
        }
        Ok(Ecdf {
            support,
            cumulative,
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.support.partition_point(|&s| s <= x) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }
}

/// Walks the merged support of two sorted samples, calling
/// `visit(x, F_p(x), F_q(x))` once per distinct value.
fn merge_sweep(p: &[f64], q: &[f64], mut visit: impl FnMut(f64, f64, f64)) -> Result<()> {
    if p.is_empty() || q.is_empty() {
        return Err(DsiError::EmptySample);
    }
    let (n, m) = (p.len() as f64, q.len() as f64);
    let (mut i, mut j) = (0, 0);
    while i < p.len() || j < q.len() {
        let x = match (p.get(i), q.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < p.len() && p[i] <= x {
            i += 1;
        }
        while j < q.len() && q[j] <= x {
            j += 1;
        }
        visit(x, i as f64 / n, j as f64 / m);
    }
    Ok(())
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_p(x) - F_q(x)|` of two
/// ascending-sorted samples.
pub fn ks_sorted(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut sup = 0.0f64;
    merge_sweep(p, q, |_, fp, fq| sup = sup.max((fp - fq).abs()))?;
    Ok(sup)
}

/// Area between the ECDFs of two ascending-sorted samples (1-D Wasserstein-1).
pub fn wasserstein_sorted(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut area = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    merge_sweep(p, q, |x, fp, fq| {
        if let Some((x0, gap)) = prev {
            area += gap * (x - x0);
        }
        prev = Some((x, (fp - fq).abs()));
    })?;
    Ok(area)
}

pub fn ks_distance(p: &DistanceSample, q: &DistanceSample) -> Result<f64> {
    ks_sorted(p.values(), q.values())
}

pub fn wasserstein_distance(p: &DistanceSample, q: &DistanceSample) -> Result<f64> {
    wasserstein_sorted(p.values(), q.values())
}

/// Wasserstein-1 divided by the range of the union of both samples, so the
/// result lies in `[0, 1]`. A zero range gives 0.
pub fn normalized_wasserstein_sorted(p: &[f64], q: &[f64]) -> Result<f64> {
    let w = wasserstein_sorted(p, q)?;
    let lo = p[0].min(q[0]);
    let hi = p[p.len() - 1].max(q[q.len() - 1]);
    let range = hi - lo;
    if range > 0.0 {
        Ok((w / range).min(1.0))
    } else {
        Ok(0.0)
    }
}

pub fn normalized_wasserstein(p: &DistanceSample, q: &DistanceSample) -> Result<f64> {
    normalized_wasserstein_sorted(p.values(), q.values())
}

/// Which divergence compares an ICD set with its BCD set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    #[default]
    Ks,
    WassersteinNormalized,
}

impl Divergence {
    pub fn name(self) -> &'static str {
        match self {
            Divergence::Ks => "ks",
            Divergence::WassersteinNormalized => "normw",
        }
    }

    pub fn between(self, p: &DistanceSample, q: &DistanceSample) -> Result<f64> {
        match self {
            Divergence::Ks => ks_distance(p, q),
            Divergence::WassersteinNormalized => normalized_wasserstein(p, q),
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Divergence {
    type Err = DsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ks" | "kolmogorov-smirnov" => Ok(Divergence::Ks),
            "normw" | "w" | "wasserstein" | "wasserstein_normalized" => {
                Ok(Divergence::WassersteinNormalized)
            }
            _ => Err(DsiError::Unknown {
                what: "divergence",
                name: s.to_string(),
            }),
        }
    }
}
