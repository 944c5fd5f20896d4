//! Theme descriptors, dimensionality reduction and rating correlations.

mod correlation;
mod extract;
mod pca;
mod table;

pub use correlation::{pearson, rank_correlations, CorrelationSign, FeatureCorrelation};
pub use extract::{
    extract_features, feature_schema, plane_fit, FeatureVector, FEATURE_DIM, SCHEMA_VERSION,
};
pub use pca::{fit_pca, PcaModel};
pub use table::{schema_tag, FeatureTable, ID_COLUMN, RATING_COLUMN};
