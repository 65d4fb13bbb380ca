//! Conductor-galloping prediction from weather features with a
//! Gaussian-kernel SVM, a Den Hartog based synthetic data generator, class
//! balancing and the experiment harness around them.

pub mod data;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod sampling;
pub mod svm;
pub mod synth;

pub use data::{Dataset, FeatureId, FeatureMask, Label, SplitSpec, Standardization, WeatherSample};
pub use error::{Error, Result};
pub use metrics::MetricsReport;
pub use sampling::{SamplingKind, SamplingStrategy};
pub use svm::{KernelParams, SvmModel, TrainConfig};
pub use synth::SynthConfig;
