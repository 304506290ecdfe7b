//! Training, evaluation and baselines.

pub mod ablation;
pub mod config;
pub mod gan;
pub mod log;
pub mod metrics;
pub mod recognizer;

pub use ablation::{
    generator_variants, loss_variants, run_ablation, AblationReport, AblationRow, Variant,
};
pub use config::{config_hash, TrainConfig};
pub use gan::{
    pipeline_grad_check, pipeline_grad_check_with, train_gan, train_gan_with,
    validate_training_set, TrainOutput, PIPELINE_GRAD_FLOOR,
};
pub use log::{EpochRecord, TrainLog};
pub use metrics::{
    afd, afd_all, mean_by_class, nn_baseline, nn_baseline_batch, synthesize_all, MeanPoseBaseline,
};
pub use recognizer::{
    recognition_accuracy, train_recognizer, AccuracyReport, Classifier, Recognizer,
    RecognizerConfig, RecognizerInput,
};
