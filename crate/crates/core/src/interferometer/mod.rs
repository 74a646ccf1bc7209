//! Delays and beam-splitter mixing that turn two input fields into the two
//! detector fields of each scenario.

pub mod delays;
pub mod ops;
pub mod scenario;

pub use delays::DelayConfig;
pub use ops::{align, beam_split, delay};
pub use scenario::{
    assemble_scenario, regime_check, AstroSetup, DetectorFields, RegimeCheck, ScenarioAssembler, ScenarioKind,
    ScenarioSetup, SourceKind, SourceSpec,
};
