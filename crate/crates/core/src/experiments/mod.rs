//! Experiment configuration, ensemble orchestration and the run pipeline.
//!
//! A run is fully determined by its configuration: realization `r` of the
//! ensemble uses disorder stream `r` of the master seed, the IDS boxes use a
//! salted seed, and ensemble results are merged in realization order, so the
//! worker count never changes an emitted number.

pub mod config;
pub mod ensemble;
pub mod record;
pub mod runner;

pub use config::{
    EnsembleConfig, ExperimentConfig, IdsConfig, IdsMethod, ModelConfig, Statistic, StatisticsConfig, TwoScaleConfig,
    WindowConfig,
};
pub use ensemble::{ensemble_map, model_ids, resolve_window, window_spectrum, Model};
pub use record::{default_output_root, ResultRecord, StatisticSummary, OUTPUT_ROOT_VAR};
pub use runner::{decomposition, run, unit_ball_volume};
