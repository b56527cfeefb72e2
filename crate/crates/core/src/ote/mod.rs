//! Opinion target extraction as BIO sequence labelling with an averaged
//! structured perceptron and beam decoding.

mod features;
mod model;
mod train;

pub(crate) use features::validate_name;
pub use features::{cluster_features, local_features, NamedClusterLexicon, OteFeatureConfig};
pub use model::{beam_search, decode, LabelScores, SequenceModel, MODEL_HEADER};
pub use train::{
    cross_validate_ote, evaluate_tagger, gold_spans, tag_sentences, train_perceptron, OteCvReport, PerceptronTrainer,
    TrainOptions,
};
