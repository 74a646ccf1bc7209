//! Intensities, photocurrents and fourth-order correlation estimators for
//! stationary traces and pulse trains.

pub mod correlate;
pub mod detector;
pub mod pulsed;

pub use correlate::{cross_correlate, intensity, slow_detector_rate, CorrelationEstimate};
pub use detector::{DetectorSpec, Response};
pub use pulsed::{
    mean_photocurrent, overlap_beta, pulsed_coincidence_amplitude, pulsed_coincidence_waveform, pulsed_oracle_pair,
    PulseOffsets, PulsedCoincidence,
};
