//! Truncated Taylor series in three variables and the geometry of a metric
//! jet written in boundary normal coordinates.

mod geometry;
mod jet;
mod metric;

pub use geometry::{
    christoffel, mean_curvature, mean_curvature_forms, ricci, Christoffel, GeometryCache,
};
pub use jet::{exponent_at, monomial_count, monomial_index, Jet3, MultiIndex, MAX_ORDER};
pub use metric::{random_metric_jet, MetricBlock, MetricDoc, MetricJet, RandomJetSpec, N};
