//! Exact detection statistics and worst-case quality of multiplexed
//! photon-number-resolving detectors built from click detectors.
//!
//! Three architectures are modelled:
//!
//! - [`spatial`]: `M` click detectors under uniform illumination.
//! - [`temporal`]: a fiber-coupler delay tree, equivalent to a spatial array with an
//!   efficiency derated by the coupler losses.
//! - [`loop_detector`]: a single click detector behind a lossy fiber loop.
//!
//! Each produces a [`ResponseMatrix`] `P[k][m]` (probability of output `k` for `m`
//! input photons) collapsed to an n-detector whose top class means "n or more".
//! [`quality`] evaluates the worst-case probability of a correct classification over a
//! family of inputs, [`solvers`] inverts it for efficiency thresholds and array sizes,
//! and [`mc`] simulates the detectors photon by photon as an independent check.
//!
//! ```
//! use pnrq_core::{quality_full_set, spatial_response, ClickModel, SpatialArrayConfig, TruncationPolicy};
//!
//! let array = SpatialArrayConfig::new(8, ClickModel::new(1.0, 0.0)?)?;
//! let matrix = spatial_response(&array, 3, &TruncationPolicy::default())?;
//! let q = quality_full_set(&matrix, 3)?;
//! assert!((q.value - 0.65625).abs() < 1e-12);
//! # Ok::<(), pnrq_core::PnrError>(())
//! ```

pub mod detector;
pub mod error;
pub mod loop_detector;
pub mod mc;
mod par;
pub mod quality;
pub mod response;
pub mod search;
pub mod solvers;
mod special;
pub mod spatial;
pub mod temporal;

pub use detector::{DetectorConfig, Parameter};
pub use error::{PnrError, Result};
pub use loop_detector::{loop_response, LoopDetectorConfig};
pub use mc::{compare, simulate, simulate_loop, simulate_spatial, McHistogram, McRun, ZReport};
pub use quality::{
    desired_probability, quality, quality_finite_hull, quality_full_set, quality_poisson, Desired, DistributionSet,
    QualityResult, Witness,
};
pub use response::{
    click_probability, collapse_to_n, distribution_pmf, validate_response, ClickModel, DetectorSource,
    PhotonDistribution, ResponseDiagnostics, ResponseMatrix, TruncationPolicy,
};
pub use solvers::{
    approx_min_elements, dark_sweep, eta_threshold, evaluate, max_resolvable, min_elements, quality_profile,
    quality_sweep, MinElementsResult, SweepGrid, SweepPoint, ThresholdResult,
};
pub use spatial::{diagonal_closed_form, placement_probability, spatial_response, SpatialArrayConfig};
pub use temporal::{effective_efficiency, temporal_response, TemporalArrayConfig};
