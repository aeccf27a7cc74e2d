//! Seeded generators for two-class 2-D benchmark datasets.
//!
//! Canonical forms (class 0 rows first, then class 1):
//!
//! | family  | class 0                                   | class 1                                  | noise default |
//! |---------|-------------------------------------------|------------------------------------------|---------------|
//! | random  | uniform on `[0,1)^2`                      | uniform on `[0,1)^2`                     | unused        |
//! | spirals | `r = 0.1 + 0.9t`, `theta = 3 pi t`        | same arm rotated by `pi`                 | 0.02          |
//! | xor     | uniform on `[-1,1]^2`, `x*y > 0`          | uniform on `[-1,1]^2`, `x*y < 0`         | unused        |
//! | moons   | upper unit half-circle at `(0,0)`         | lower unit half-circle at `(1,0.5)`      | 0.1           |
//! | circles | circle of radius 1                        | circle of radius 0.5                     | 0.05          |
//! | blobs   | Gaussian at `(0,0)`                       | Gaussian at `(10,10)`                    | SD 1.0        |
//!
//! `t` and arc angles are drawn uniformly; noise is isotropic Gaussian.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::dsi::{dsi_multiclass, DsiConfig, DsiReport};
use crate::error::{DsiError, Result};

pub const BLOB_CENTERS: [[f64; 2]; 2] = [[0.0, 0.0], [10.0, 10.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Random,
    Spirals,
    Xor,
    Moons,
    Circles,
    Blobs,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Random,
        Family::Spirals,
        Family::Xor,
        Family::Moons,
        Family::Circles,
        Family::Blobs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Spirals => "spirals",
            Family::Xor => "xor",
            Family::Moons => "moons",
            Family::Circles => "circles",
            Family::Blobs => "blobs",
        }
    }

    /// Noise SD (cluster SD for blobs) used when a spec leaves it unset.
    pub fn default_noise(self) -> f64 {
        match self {
            Family::Random | Family::Xor => 0.0,
            Family::Spirals => 0.02,
            Family::Moons => 0.1,
            Family::Circles => 0.05,
            Family::Blobs => 1.0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = DsiError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| DsiError::Unknown {
                what: "family",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub points_per_class: usize,
    /// Noise SD, or cluster SD for blobs. `None` uses [`Family::default_noise`].
    pub noise_or_sd: Option<f64>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, points_per_class: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            points_per_class,
            noise_or_sd: None,
            seed,
        }
    }

    pub fn with_noise(self, noise: f64) -> Self {
        GeneratorSpec {
            noise_or_sd: Some(noise),
            ..self
        }
    }

    pub fn noise(&self) -> f64 {
        self.noise_or_sd.unwrap_or(self.family.default_noise())
    }
}

/// Generates a balanced two-class dataset, deterministic in `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<LabeledDataset> {
    let m = spec.points_per_class;
    if m < 2 {
        return Err(DsiError::InvalidGenerator(format!(
            "points_per_class = {m} (need at least 2)"
        )));
    }
    let sigma = spec.noise();
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(DsiError::InvalidGenerator(format!("noise/SD = {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // sigma is validated above, so Normal::new cannot fail
    let noise = Normal::new(0.0, sigma).unwrap();
    let jitter = |rng: &mut ChaCha8Rng, x: f64, y: f64| {
        if sigma == 0.0 {
            [x, y]
        } else {
            [x + noise.sample(rng), y + noise.sample(rng)]
        }
    };

    let mut classes: [Vec<[f64; 2]>; 2] = [Vec::with_capacity(m), Vec::with_capacity(m)];
    match spec.family {
        Family::Random => {
            for class in &mut classes {
                for _ in 0..m {
                    class.push([rng.gen::<f64>(), rng.gen::<f64>()]);
                }
            }
        }
        Family::Spirals => {
            for (c, class) in classes.iter_mut().enumerate() {
                for _ in 0..m {
                    let t: f64 = rng.gen();
                    let r = 0.1 + 0.9 * t;
                    let theta = 3.0 * PI * t + c as f64 * PI;
                    class.push(jitter(&mut rng, r * theta.cos(), r * theta.sin()));
                }
            }
        }
        Family::Xor => {
            while classes[0].len() < m || classes[1].len() < m {
                let x = rng.gen_range(-1.0..=1.0);
                let y = rng.gen_range(-1.0..=1.0);
                let prod: f64 = x * y;
                if prod == 0.0 {
                    continue;
                }
                let c = usize::from(prod < 0.0);
                if classes[c].len() < m {
                    classes[c].push([x, y]);
                }
            }
        }
        Family::Moons => {
            for _ in 0..m {
                let a = rng.gen::<f64>() * PI;
                classes[0].push(jitter(&mut rng, a.cos(), a.sin()));
            }
            for _ in 0..m {
                let a = rng.gen::<f64>() * PI;
                classes[1].push(jitter(&mut rng, 1.0 - a.cos(), 0.5 - a.sin()));
            }
        }
        Family::Circles => {
            for (class, radius) in classes.iter_mut().zip([1.0, 0.5]) {
                for _ in 0..m {
                    let a = rng.gen::<f64>() * 2.0 * PI;
                    class.push(jitter(&mut rng, radius * a.cos(), radius * a.sin()));
                }
            }
        }
        Family::Blobs => {
            for (class, [cx, cy]) in classes.iter_mut().zip(BLOB_CENTERS) {
                for _ in 0..m {
                    class.push(jitter(&mut rng, cx, cy));
                }
            }
        }
    }

    let points: Vec<f64> = classes.iter().flatten().flatten().copied().collect();
    let labels: Vec<u32> = (0..2 * m).map(|i| (i / m) as u32).collect();
    LabeledDataset::new(points, 2, labels, &[])
}

/// Regenerates `base` once per parameter value (as its noise/SD, with seed
/// `base.seed + i`) and computes the index of each dataset.
pub fn sweep(
    base: &GeneratorSpec,
    param_values: &[f64],
    cfg: &DsiConfig,
) -> Result<Vec<(f64, DsiReport)>> {
    if param_values.is_empty() {
        return Err(DsiError::EmptyParams);
    }
    param_values
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let spec = GeneratorSpec {
                noise_or_sd: Some(p),
                seed: base.seed.wrapping_add(i as u64),
                ..*base
            };
            let data = generate(&spec)?;
            Ok((p, dsi_multiclass(&data, cfg)?))
        })
        .collect()
}
