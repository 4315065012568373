//! Seeded simulation designs and the Monte Carlo study driver.

mod generators;
mod metrics;
mod study;

pub use generators::*;
pub use metrics::mean;
pub use metrics::{ase, efficiency, iqr, median, quantile};
pub use study::*;
