//! Stochastic optical fields: stationary thermal and coherent traces, common
//! origin splitting, partially coherent pairs, pulse trains, and coherence
//! estimation.

pub mod coherence;
pub mod estimate;
pub mod pulse;
pub mod synth;
pub mod trace;

pub use coherence::{CoherenceModel, CoherenceShape};
pub use estimate::estimate_gamma;
pub use pulse::{synth_pulse_train, AmplitudeStats, PulseProfile, PulseTrain};
pub use synth::{
    make_partially_coherent_pair, split_common_origin, synth_coherent, synth_thermal, ThermalSynthesizer,
};
pub use trace::FieldTrace;
