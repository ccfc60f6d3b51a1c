//! Seeded phase-noise traces standing in for the random generator that
//! drives the noise field's modulator.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng;

/// Statistics of the random phase process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhaseModel {
    /// Independent uniform phase on `[0, 2π)`, held for `dwell_samples`
    /// consecutive samples.
    PiecewiseUniform { dwell_samples: usize },
    /// Random walk with Gaussian increments of variance `diffusion_rate`
    /// (rad² per sample), started from a uniform phase and wrapped to
    /// `[0, 2π)`.
    WienerDiffusion { diffusion_rate: f64 },
}

impl Default for PhaseModel {
    fn default() -> Self {
        PhaseModel::PiecewiseUniform { dwell_samples: 1 }
    }
}

impl PhaseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseModel::PiecewiseUniform { dwell_samples: 0 } => {
                Err(Error::invalid("dwell_samples", "must be at least 1"))
            }
            PhaseModel::WienerDiffusion { diffusion_rate }
                if !(diffusion_rate.is_finite() && diffusion_rate >= 0.0) =>
            {
                Err(Error::invalid(
                    "diffusion_rate",
                    format!("must be finite and non-negative, got {diffusion_rate}"),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Integrated autocorrelation time (in samples) of `e^{2iφ}`, the phase
    /// harmonic that survives in a product of two beat signals. The standard
    /// error of a trace mean is inflated by the square root of this factor.
    pub fn correlation_time(&self) -> f64 {
        match *self {
            PhaseModel::PiecewiseUniform { dwell_samples } => dwell_samples.max(1) as f64,
            PhaseModel::WienerDiffusion { diffusion_rate } => {
                let rho = (-2.0 * diffusion_rate).exp();
                if rho >= 1.0 {
                    f64::INFINITY
                } else {
                    (1.0 + rho) / (1.0 - rho)
                }
            }
        }
    }
}

/// A phase process plus the random stream it draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseProcess {
    pub model: PhaseModel,
    pub seed: u64,
    /// Sub-stream of `seed`; distinct ids give independent traces.
    #[serde(default)]
    pub stream: u64,
}

impl PhaseProcess {
    pub fn new(model: PhaseModel, seed: u64) -> Self {
        PhaseProcess {
            model,
            seed,
            stream: 0,
        }
    }

    pub fn uniform(seed: u64) -> Self {
        PhaseProcess::new(PhaseModel::default(), seed)
    }

    pub fn with_stream(self, stream: u64) -> Self {
        PhaseProcess { stream, ..self }
    }
}

/// One realization of the noise-field phase, in radians on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    samples: Vec<f64>,
    process: Option<PhaseProcess>,
}

impl PhaseTrace {
    /// Wraps explicit phase samples, e.g. a sweep or a fixed test pattern.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFewSamples { min: 1, got: 0 });
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid("phase", format!("non-finite sample {bad}")));
        }
        Ok(PhaseTrace {
            samples,
            process: None,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Generating process, or `None` for explicit samples.
    pub fn process(&self) -> Option<&PhaseProcess> {
        self.process.as_ref()
    }

    pub fn correlation_time(&self) -> f64 {
        self.process.map_or(1.0, |p| p.model.correlation_time())
    }

    /// Circular mean `(1/n) Σ e^{iφ}` as `(re, im)`.
    pub fn circular_mean(&self) -> (f64, f64) {
        let n = self.samples.len() as f64;
        let (c, s) = self
            .samples
            .iter()
            .fold((0.0, 0.0), |(c, s), &p| (c + p.cos(), s + p.sin()));
        (c / n, s / n)
    }
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn sample_phase_trace(process: PhaseProcess, n_samples: usize) -> Result<PhaseTrace> {
    if n_samples == 0 {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    process.model.validate()?;
    let mut rng = rng::stream(process.seed, process.stream);
    let mut samples = Vec::with_capacity(n_samples);
    match process.model {
        PhaseModel::PiecewiseUniform { dwell_samples } => {
            while samples.len() < n_samples {
                let phase = rng.random_range(0.0..TAU);
                let run = dwell_samples.min(n_samples - samples.len());
                samples.extend(std::iter::repeat_n(phase, run));
            }
        }
        PhaseModel::WienerDiffusion { diffusion_rate } => {
            let mut phase = rng.random_range(0.0..TAU);
            samples.push(phase);
            if diffusion_rate > 0.0 {
                let step = Normal::new(0.0, diffusion_rate.sqrt())
                    .map_err(|e| Error::invalid("diffusion_rate", e.to_string()))?;
                for _ in 1..n_samples {
                    phase = wrap_phase(phase + step.sample(&mut rng));
                    samples.push(phase);
                }
            } else {
                samples.resize(n_samples, phase);
            }
        }
    }
    Ok(PhaseTrace {
        samples,
        process: Some(process),
    })
}

/// Pearson chi-square test of binned phases against the uniform law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
}

impl UniformityTest {
    /// Upper-tail probability of the statistic.
    pub fn p_value(&self) -> f64 {
        chi_square(self.degrees_of_freedom).sf(self.statistic)
    }

    pub fn passes(&self, level: f64) -> bool {
        self.statistic < chi_square_quantile(self.degrees_of_freedom, level)
    }
}

fn chi_square(dof: usize) -> ChiSquared {
    ChiSquared::new(dof as f64).expect("positive degrees of freedom")
}

/// Quantile of the chi-square distribution, e.g. `level = 0.99`.
pub fn chi_square_quantile(dof: usize, level: f64) -> f64 {
    chi_square(dof).inverse_cdf(level)
}

pub fn empirical_phase_uniformity(trace: &PhaseTrace, bins: usize) -> Result<UniformityTest> {
    if bins < 2 {
        return Err(Error::invalid("bins", "need at least 2 bins"));
    }
    let min = 10 * bins;
    if trace.len() < min {
        return Err(Error::TooFewSamples {
            min,
            got: trace.len(),
        });
    }
    let mut counts = vec![0u64; bins];
    for &p in trace.samples() {
        let idx = ((wrap_phase(p) / TAU) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let expected = trace.len() as f64 / bins as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    Ok(UniformityTest {
        statistic,
        degrees_of_freedom: bins - 1,
    })
}
