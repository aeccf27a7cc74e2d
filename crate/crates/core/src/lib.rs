//! Distance-based separability index (DSI) for labeled datasets.
//!
//! The index compares, for every class, the distribution of distances within
//! the class (ICD) against the distribution of distances from the class to all
//! other points (BCD) using the two-sample Kolmogorov-Smirnov statistic. Values
//! near 0 mean the classes are drawn from the same distribution; values near 1
//! mean they are easy to separate.
//!
//! ```
//! use dsi_core::{dsi_multiclass, generate, DsiConfig, Family, GeneratorSpec};
//!
//! let data = generate(&GeneratorSpec::new(Family::Blobs, 200, 7)).unwrap();
//! let report = dsi_multiclass(&data, &DsiConfig::default()).unwrap();
//! assert!(report.dsi > 0.9);
//! ```

pub mod dataset;
pub mod distrib;
pub mod dsi;
mod error;
pub mod metrics;
pub mod synth;

pub use dataset::{
    load_cifar10_binary, load_csv, read_csv, subsample, CsvOptions, LabelColumn, LabeledDataset,
    SubsampleConfig, SubsetSize,
};
pub use distrib::{
    ks_distance, normalized_wasserstein, wasserstein_distance, Divergence, Ecdf,
};
pub use dsi::{dsi_estimate, dsi_multiclass, dsi_two_class, DsiConfig, DsiEstimate, DsiReport};
pub use error::{DsiError, ErrorKind, Result};
pub use metrics::{
    bcd_set, icd_set, point_distance, DistanceSample, InverseCovariance, MetricKind, MetricSpec,
    SampleSource,
};
pub use synth::{generate, sweep, Family, GeneratorSpec};
