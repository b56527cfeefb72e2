//! Opinion polarity classification: sparse lexical, syntactic, lexicon and
//! cluster features fed to a one-vs-one linear SVM trained with SMO.

mod cv;
mod features;
mod smo;
mod svm;

pub use cv::{ablation_run, cross_validate_majority, cross_validate_polarity, polarity_folds, PolarityCvReport};
pub use features::{extract_features, feature_scope, lexicon_scores, NamedFeatures, PolarityFeatureConfig};
pub use smo::{dual_objective, smo_train_binary, BinarySvm, SmoOptions, SparseVector};
pub use svm::{
    labeled_opinions, train_multiclass, train_one_vs_one, vote, FeatureIndex, LabeledOpinion, MajorityBaseline,
    MinMaxScaling, PairwiseMachine, SvmModel, SvmOptions, MODEL_HEADER,
};
