//! Color assessment model: source reweighting, sparse regression and bagging.

mod ensemble;
mod kmm;
mod lasso;
mod model;

pub use ensemble::{ensemble_train, sample_bag, train_plain, train_weighted, TrainParams};
pub use kmm::{kmm_weights, median_heuristic, KmmParams, KmmWeights};
pub use lasso::{lambda_max, lasso_objective, weighted_lasso, LassoFit, LassoParams};
pub use model::{
    rsse, AssessmentModel, KmmSummary, Member, SourceDataset, TargetDataset, TrainingMetadata,
    TrainingMethod,
};
