//! Products of the two arms' beat signals and their averages.
//!
//! For ψ⁻ the product is `−K² sin(2θ₁+φ) sin(2θ₂+φ)
//! = −½K² [cos 2(θ₁−θ₂) − cos 2(θ₁+θ₂+φ)]`; the φ-dependent part averages
//! away, leaving a raw mean of `−½K² cos 2(θ₁−θ₂)`. Normalizing by the
//! magnitude measured at `θ₁ = θ₂ = 0` removes the `½K²` scale.
//!
//! The product fixes `C` only up to a signed constant. For ψ⁺ and φ⁻ the
//! `−φ` beat in arm 2 makes the raw mean `∓½K² cos 2(θ₁+θ₂)`, opposite in
//! sign to the state's correlation, so the calibration also records the
//! orientation that maps the measured reference onto the known `C(0,0)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{sample_phase_trace, PhaseModel, PhaseProcess};
use crate::optical_bench::{BeatTrace, BellPreparation, Bench, BenchConfig};
use crate::polarization::AnalyzerSetting;
use crate::rng::{self, CALIBRATION_STREAM};

/// Elementwise product of two beat traces.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTrace {
    pub samples: Vec<f64>,
    /// Integrated autocorrelation time of the underlying phase, in samples.
    pub correlation_time: f64,
}

impl ProductTrace {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        ProductTrace {
            samples,
            correlation_time: 1.0,
        }
    }

    pub fn with_correlation_time(self, correlation_time: f64) -> Self {
        ProductTrace {
            correlation_time,
            ..self
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Sample mean of a product trace with its standard error, optionally
/// normalized by a calibration magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub raw_mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub normalized_value: Option<f64>,
    /// Standard error of `normalized_value`, including the calibration's own
    /// uncertainty.
    pub normalized_std_error: Option<f64>,
    pub calibration: Option<f64>,
}

impl CorrelationEstimate {
    pub fn is_normalized(&self) -> bool {
        self.normalized_value.is_some()
    }

    pub fn normalize(self, calibration: &Calibration) -> Self {
        let value = calibration.orientation * self.raw_mean / calibration.magnitude;
        let rel = self.std_error / calibration.magnitude;
        let cal_rel = calibration.std_error / calibration.magnitude;
        CorrelationEstimate {
            normalized_value: Some(value),
            normalized_std_error: Some(rel.hypot(value * cal_rel)),
            calibration: Some(calibration.magnitude),
            ..self
        }
    }
}

/// Reference magnitude `|⟨d₁d₂⟩|` at `θ₁ = θ₂ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub magnitude: f64,
    pub std_error: f64,
    /// Sign of the calibration run's raw mean.
    pub sign: f64,
    /// `±1` applied to every normalized value so that the reference setting
    /// reads the prepared state's `C(0,0)`.
    pub orientation: f64,
}

impl Calibration {
    /// A calibration known exactly, e.g. `K²/2` from the closed form.
    pub fn exact(magnitude: f64) -> Self {
        Calibration {
            magnitude,
            std_error: 0.0,
            sign: 1.0,
            orientation: 1.0,
        }
    }
}

/// Monte-Carlo settings shared by every estimate in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub n_samples: usize,
    pub model: PhaseModel,
    pub seed: u64,
}

impl Sampling {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Sampling {
            n_samples,
            model: PhaseModel::default(),
            seed,
        }
    }

    pub fn with_model(self, model: PhaseModel) -> Self {
        Sampling { model, ..self }
    }

    /// The same settings reseeded from this run's seed and `stream`; used to
    /// give nested scans independent stream families.
    pub fn derived(self, stream: u64) -> Self {
        Sampling {
            seed: rng::derive_seed(self.seed, stream),
            ..self
        }
    }

    fn process(&self, stream: u64) -> PhaseProcess {
        PhaseProcess::new(self.model, self.seed).with_stream(stream)
    }
}

pub fn multiply_traces(t1: &BeatTrace, t2: &BeatTrace) -> Result<ProductTrace> {
    if t1.len() != t2.len() {
        return Err(Error::LengthMismatch {
            left: t1.len(),
            right: t2.len(),
        });
    }
    Ok(ProductTrace::from_samples(
        t1.samples
            .iter()
            .zip(&t2.samples)
            .map(|(a, b)| a * b)
            .collect(),
    ))
}

pub fn estimate_correlation(product: &ProductTrace) -> Result<CorrelationEstimate> {
    let n = product.len();
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, got: n });
    }
    let nf = n as f64;
    let mean = product.samples.iter().sum::<f64>() / nf;
    let var = product
        .samples
        .iter()
        .map(|x| (x - mean).powi(2))
        .sum::<f64>()
        / (nf - 1.0);
    let effective_n = (nf / product.correlation_time.max(1.0)).max(1.0);
    Ok(CorrelationEstimate {
        raw_mean: mean,
        std_error: (var / effective_n).sqrt(),
        n_samples: n,
        normalized_value: None,
        normalized_std_error: None,
        calibration: None,
    })
}

/// Simulates one `(θ₁, θ₂)` point on phase stream `stream` and returns its
/// unnormalized estimate.
pub fn measure_correlation(
    prep: BellPreparation,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
    bench: &BenchConfig,
    sampling: &Sampling,
    stream: u64,
) -> Result<CorrelationEstimate> {
    if sampling.n_samples < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: sampling.n_samples,
        });
    }
    let phases = sample_phase_trace(sampling.process(stream), sampling.n_samples)?;
    let (t1, t2) = Bench::new(prep, theta1, theta2, *bench)?.simulate(&phases, None)?;
    let product = multiply_traces(&t1, &t2)?.with_correlation_time(phases.correlation_time());
    estimate_correlation(&product)
}

pub fn calibrate(
    prep: BellPreparation,
    bench: &BenchConfig,
    sampling: &Sampling,
) -> Result<Calibration> {
    let zero = AnalyzerSetting::from_radians(0.0);
    let est = measure_correlation(prep, zero, zero, bench, sampling, CALIBRATION_STREAM)?;
    if est.raw_mean == 0.0 {
        return Err(Error::invalid("calibration", "reference correlation is zero"));
    }
    let sign = est.raw_mean.signum();
    Ok(Calibration {
        magnitude: est.raw_mean.abs(),
        std_error: est.std_error,
        sign,
        orientation: sign * prep.reference_sign(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub theta1: AnalyzerSetting,
    pub theta2: AnalyzerSetting,
    pub estimate: CorrelationEstimate,
}

impl ScanPoint {
    pub fn value(&self) -> f64 {
        self.estimate.normalized_value.unwrap_or(self.estimate.raw_mean)
    }

    pub fn std_error(&self) -> f64 {
        self.estimate
            .normalized_std_error
            .unwrap_or(self.estimate.std_error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationScan {
    pub preparation: BellPreparation,
    pub theta1: AnalyzerSetting,
    pub calibration: Calibration,
    pub points: Vec<ScanPoint>,
}

/// Normalized correlation at each `θ₂` of the grid with `θ₁` fixed. Point
/// `i` draws from phase stream `i` of `sampling.seed`; the calibration uses
/// a reserved stream.
pub fn correlation_scan(
    prep: BellPreparation,
    theta1: AnalyzerSetting,
    theta2_grid: &[AnalyzerSetting],
    bench: &BenchConfig,
    sampling: &Sampling,
) -> Result<CorrelationScan> {
    let calibration = calibrate(prep, bench, sampling)?;
    correlation_scan_calibrated(prep, theta1, theta2_grid, bench, sampling, &calibration)
}

pub fn correlation_scan_calibrated(
    prep: BellPreparation,
    theta1: AnalyzerSetting,
    theta2_grid: &[AnalyzerSetting],
    bench: &BenchConfig,
    sampling: &Sampling,
    calibration: &Calibration,
) -> Result<CorrelationScan> {
    if theta2_grid.is_empty() {
        return Err(Error::Empty("angle grid"));
    }
    let points = theta2_grid
        .par_iter()
        .enumerate()
        .map(|(i, &theta2)| {
            let est = measure_correlation(prep, theta1, theta2, bench, sampling, i as u64)?;
            Ok(ScanPoint {
                theta1,
                theta2,
                estimate: est.normalize(calibration),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationScan {
        preparation: prep,
        theta1,
        calibration: *calibration,
        points,
    })
}
