//! Deterministic simulator of two-observer polarization correlations built
//! from one coherent field and one phase-noise field.
//!
//! A vertically polarized signal field and a horizontally polarized
//! random-phase field are mixed on a 50/50 beam splitter. Each output arm
//! passes wave plates and a linear analyzer before a square-law detector
//! with a DC block, which leaves a beat signal `±sin(2θ ± φ)`. Multiplying
//! and averaging the two arms' beat signals yields correlation functions
//! with the same angular dependence as the four polarization Bell states.
//!
//! Modules, bottom-up:
//!
//! * [`polarization`]: Jones vectors, wave plates, beam splitter, analyzer.
//! * [`noise`]: seeded phase-noise traces.
//! * [`optical_bench`]: the two-arm bench and its beat traces.
//! * [`correlation`]: product traces, correlation estimates and scans.
//! * [`quantum`]: closed-form two-photon reference values.
//! * [`bell`]: the three-angle Bell functional and violation scans.
//! * [`qkd`]: Ekert-style key distribution over the beat signals.

pub mod bell;
pub mod correlation;
pub mod error;
pub mod noise;
pub mod optical_bench;
pub mod polarization;
pub mod qkd;
pub mod quantum;
pub mod rng;

pub use bell::{bell_f, violation_scan, BellScanResult};
pub use correlation::{
    calibrate, correlation_scan, estimate_correlation, multiply_traces, CorrelationEstimate,
    Calibration, CorrelationScan, Sampling, ScanPoint,
};
pub use error::{Error, Result};
pub use noise::{empirical_phase_uniformity, sample_phase_trace, PhaseProcess, PhaseTrace};
pub use optical_bench::{
    analytic_beat, decompose_beat, simulate_beat_traces, Arm, BeatTrace, BellPreparation,
    BenchConfig, DcBlock,
};
pub use polarization::{AnalyzerSetting, JonesMatrix, JonesVector};
pub use qkd::{comparator_encode, estimate_qber, run_session, SessionConfig, SessionTranscript};
pub use quantum::{
    analyzer_operator, bell_state_correlation, quantum_correlation, BellState, TwoPhotonState,
};
