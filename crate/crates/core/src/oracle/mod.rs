//! Closed-form predictions and an exact Gaussian-moment reference.

pub mod exact;
pub mod isserlis;
pub mod predict;

pub use exact::{NetSource, Network, ScenarioNetwork, Tap};
pub use isserlis::{intensity_correlation, interference_moment, isserlis_fourth_moment, PairMoments};
pub use predict::{
    predict_astronomy, predict_pulsed, predict_scenario_i, predict_scenario_ii, predict_scenario_iii,
    predict_scenario_iv, predict_uncorrelated, AmplitudeMoments, AstroConfig, ScenarioPrediction,
};
