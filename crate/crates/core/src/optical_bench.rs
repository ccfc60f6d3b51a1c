//! The two-arm bench: a vertically polarized signal field and a horizontally
//! polarized random-phase noise field meet on a 50/50 beam splitter; each
//! output arm passes its wave plates and a linear analyzer before a
//! square-law detector whose DC component is blocked.
//!
//! Arm 1 always carries a quarter-wave plate at +45°. Arm 2's elements select
//! which of the four Bell-state correlation laws the bench reproduces. The
//! resulting beat signals, with `K` the beat amplitude
//! `signal_amplitude · noise_amplitude`, are
//!
//! | preparation | arm 1          | arm 2            |
//! |-------------|----------------|------------------|
//! | ψ⁻          | `K sin(2θ₁+φ)` | `−K sin(2θ₂+φ)`  |
//! | ψ⁺          | `K sin(2θ₁+φ)` | `−K sin(2θ₂−φ)`  |
//! | φ⁺          | `K sin(2θ₁+φ)` | `+K sin(2θ₂+φ)`  |
//! | φ⁻          | `K sin(2θ₁+φ)` | `+K sin(2θ₂−φ)`  |

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::PhaseTrace;
use crate::polarization::{
    analyzer_amplitude, beam_splitter, half_wave_plate, quarter_wave_plate, AnalyzerSetting,
    JonesMatrix, JonesVector,
};

/// Detector output is `DETECTOR_GAIN · (I − I_dc)`, which puts the beat
/// amplitude at exactly `signal_amplitude · noise_amplitude`.
const DETECTOR_GAIN: f64 = 2.0;

/// Helium-neon line used for the default optical frequency.
const DEFAULT_WAVELENGTH_M: f64 = 632.8e-9;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellPreparation {
    PsiMinus,
    PsiPlus,
    PhiPlus,
    PhiMinus,
}

/// An optical element placed in one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    QuarterWave { fast_axis: f64 },
    HalfWave { fast_axis: f64 },
}

impl Element {
    pub fn matrix(self) -> JonesMatrix {
        match self {
            Element::QuarterWave { fast_axis } => quarter_wave_plate(fast_axis),
            Element::HalfWave { fast_axis } => half_wave_plate(fast_axis),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl BellPreparation {
    pub const ALL: [BellPreparation; 4] = [
        BellPreparation::PsiMinus,
        BellPreparation::PsiPlus,
        BellPreparation::PhiPlus,
        BellPreparation::PhiMinus,
    ];

    /// Elements in beam order, from the beam splitter to the analyzer.
    ///
    /// The half-wave plate sits directly after the splitter with its axis
    /// on H, where it undoes the splitter's sign on the noise field.
    pub fn arm_elements(self, arm: Arm) -> Vec<Element> {
        let qwp_plus = Element::QuarterWave {
            fast_axis: FRAC_PI_4,
        };
        let qwp_minus = Element::QuarterWave {
            fast_axis: -FRAC_PI_4,
        };
        let hwp = Element::HalfWave { fast_axis: 0.0 };
        match (arm, self) {
            (Arm::One, _) => vec![qwp_plus],
            (Arm::Two, BellPreparation::PsiMinus) => vec![qwp_plus],
            (Arm::Two, BellPreparation::PsiPlus) => vec![qwp_minus],
            (Arm::Two, BellPreparation::PhiPlus) => vec![hwp, qwp_plus],
            (Arm::Two, BellPreparation::PhiMinus) => vec![hwp, qwp_minus],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellPreparation::PsiMinus => "psi-minus",
            BellPreparation::PsiPlus => "psi-plus",
            BellPreparation::PhiPlus => "phi-plus",
            BellPreparation::PhiMinus => "phi-minus",
        }
    }

    /// `+1` when arm 2's beat has the same sign structure as arm 1 (φ±).
    fn arm2_sign(self) -> f64 {
        match self {
            BellPreparation::PsiMinus | BellPreparation::PsiPlus => -1.0,
            BellPreparation::PhiPlus | BellPreparation::PhiMinus => 1.0,
        }
    }

    /// Sign of the prepared state's correlation at `θ₁ = θ₂ = 0`.
    pub fn reference_sign(self) -> f64 {
        match self {
            BellPreparation::PsiMinus | BellPreparation::PsiPlus => -1.0,
            BellPreparation::PhiPlus | BellPreparation::PhiMinus => 1.0,
        }
    }

    /// Sign relating the averaged beat product to the state's correlation:
    /// `−1` for the preparations whose arm-2 beat follows `−φ`.
    pub fn beat_orientation(self) -> f64 {
        self.arm2_phase_sign()
    }

    /// `+1` when arm 2's beat follows `+φ`, `−1` when it follows `−φ`.
    fn arm2_phase_sign(self) -> f64 {
        match self {
            BellPreparation::PsiMinus | BellPreparation::PhiPlus => 1.0,
            BellPreparation::PsiPlus | BellPreparation::PhiMinus => -1.0,
        }
    }
}

impl fmt::Display for BellPreparation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellPreparation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BellPreparation::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "preparation",
                    format!("unknown `{s}` (expected psi-minus, psi-plus, phi-plus or phi-minus)"),
                )
            })
    }
}

/// How the detector removes its constant intensity level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DcBlock {
    /// Subtract the exactly known mean intensity `|a_signal|² + |a_noise|²`.
    #[default]
    Analytic,
    /// Subtract a centered moving average over `window` samples, truncated
    /// at the trace ends.
    MovingAverage { window: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// Optical angular frequency ω (rad/s). Common to both fields.
    pub optical_frequency: f64,
    /// Modulation angular frequency Ω (rad/s). Common to both fields.
    pub modulation_frequency: f64,
    pub signal_amplitude: f64,
    pub noise_amplitude: f64,
    /// Sample spacing in seconds.
    pub dt: f64,
    pub dc_block: DcBlock,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            optical_frequency: TAU * SPEED_OF_LIGHT / DEFAULT_WAVELENGTH_M,
            modulation_frequency: TAU * 110.0e6,
            signal_amplitude: 1.0,
            noise_amplitude: 1.0,
            dt: 1.0,
            dc_block: DcBlock::Analytic,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("signal_amplitude", self.signal_amplitude),
            ("noise_amplitude", self.noise_amplitude),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        for (name, value) in [
            ("optical_frequency", self.optical_frequency),
            ("modulation_frequency", self.modulation_frequency),
            ("dt", self.dt),
        ] {
            if !value.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if let DcBlock::MovingAverage { window: 0 } = self.dc_block {
            return Err(Error::invalid("dc_block.window", "must be at least 1"));
        }
        Ok(())
    }

    /// Beat amplitude `K`.
    pub fn beat_amplitude(&self) -> f64 {
        self.signal_amplitude * self.noise_amplitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceProvenance {
    pub preparation: BellPreparation,
    pub arm: Arm,
    pub theta: AnalyzerSetting,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
}

/// DC-blocked detector output for one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatTrace {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub provenance: TraceProvenance,
}

impl BeatTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// One arm's optics, from beam-splitter port to detector.
#[derive(Debug, Clone, Copy)]
struct ArmChain {
    optics: JonesMatrix,
    analyzer: AnalyzerSetting,
    dc_level: f64,
}

impl ArmChain {
    fn new(elements: &[Element], analyzer: AnalyzerSetting) -> Self {
        let optics = elements
            .iter()
            .fold(JonesMatrix::identity(), |acc, e| e.matrix() * acc);
        ArmChain {
            optics,
            analyzer,
            dc_level: 0.0,
        }
    }

    fn amplitude(&self, field: JonesVector) -> Complex64 {
        analyzer_amplitude(self.optics.apply(field), self.analyzer)
    }
}

/// A configured bench: preparation, analyzer angles and field amplitudes.
///
/// Each call to [`Bench::detect`] builds the two input fields, mixes them on
/// the beam splitter, propagates each port through its arm and returns the
/// square-law intensities.
#[derive(Debug, Clone)]
pub struct Bench {
    preparation: BellPreparation,
    arms: [ArmChain; 2],
    config: BenchConfig,
}

impl Bench {
    pub fn new(
        preparation: BellPreparation,
        theta1: AnalyzerSetting,
        theta2: AnalyzerSetting,
        config: BenchConfig,
    ) -> Result<Self> {
        config.validate()?;
        let mut arms = [
            ArmChain::new(&preparation.arm_elements(Arm::One), theta1),
            ArmChain::new(&preparation.arm_elements(Arm::Two), theta2),
        ];
        // Signal-only and noise-only intensities; their cross term averages
        // out over a uniform phase, so their sum is the DC level.
        let (sig1, sig2) = beam_splitter(signal_field(&config), JonesVector::default());
        let (noise1, noise2) = beam_splitter(JonesVector::default(), noise_field(&config, 0.0));
        arms[0].dc_level = arms[0].amplitude(sig1).norm_sqr() + arms[0].amplitude(noise1).norm_sqr();
        arms[1].dc_level = arms[1].amplitude(sig2).norm_sqr() + arms[1].amplitude(noise2).norm_sqr();
        Ok(Bench {
            preparation,
            arms,
            config,
        })
    }

    pub fn preparation(&self) -> BellPreparation {
        self.preparation
    }

    pub fn config(&self) -> &BenchConfig {
        &self.config
    }

    /// Detector intensities at time `t` when the noise field reaches arm 1
    /// with phase `phase1` and arm 2 with phase `phase2`. In an undisturbed
    /// bench both phases are the same φ.
    pub fn detect(&self, phase1: f64, phase2: f64, t: f64) -> (f64, f64) {
        let carrier = self.carrier(t);
        let signal = signal_field(&self.config).scale(carrier);
        let (port1, port2) = beam_splitter(signal, noise_field(&self.config, phase1).scale(carrier));
        let port2 = if phase2 == phase1 {
            port2
        } else {
            beam_splitter(signal, noise_field(&self.config, phase2).scale(carrier)).1
        };
        (
            self.arms[0].amplitude(port1).norm_sqr(),
            self.arms[1].amplitude(port2).norm_sqr(),
        )
    }

    /// DC-blocked beat pair for one sample under the analytic DC block.
    pub fn beat(&self, phase1: f64, phase2: f64, t: f64) -> (f64, f64) {
        let (i1, i2) = self.detect(phase1, phase2, t);
        (
            DETECTOR_GAIN * (i1 - self.arms[0].dc_level),
            DETECTOR_GAIN * (i2 - self.arms[1].dc_level),
        )
    }

    /// Both fields share the `e^{-i(ω+Ω)t}` carrier; it cancels in the
    /// intensity and is kept only so the field algebra is complete.
    fn carrier(&self, t: f64) -> Complex64 {
        let phase = ((self.config.optical_frequency + self.config.modulation_frequency) * t)
            .rem_euclid(TAU);
        Complex64::from_polar(1.0, -phase)
    }

    /// Simulates both arms over a phase trace. `arm2_offsets`, when given,
    /// adds a per-sample extra phase to the noise field seen by arm 2.
    pub fn simulate(
        &self,
        phases: &PhaseTrace,
        arm2_offsets: Option<&[f64]>,
    ) -> Result<(BeatTrace, BeatTrace)> {
        if phases.is_empty() {
            return Err(Error::Empty("phase trace"));
        }
        if let Some(off) = arm2_offsets {
            if off.len() != phases.len() {
                return Err(Error::LengthMismatch {
                    left: phases.len(),
                    right: off.len(),
                });
            }
        }
        let n = phases.len();
        let mut i1 = Vec::with_capacity(n);
        let mut i2 = Vec::with_capacity(n);
        for (k, &phi) in phases.samples().iter().enumerate() {
            let phi2 = arm2_offsets.map_or(phi, |off| phi + off[k]);
            let (a, b) = self.detect(phi, phi2, k as f64 * self.config.dt);
            i1.push(a);
            i2.push(b);
        }
        let (d1, d2) = match self.config.dc_block {
            DcBlock::Analytic => (
                block_constant(&i1, self.arms[0].dc_level),
                block_constant(&i2, self.arms[1].dc_level),
            ),
            DcBlock::MovingAverage { window } => {
                (block_moving(&i1, window), block_moving(&i2, window))
            }
        };
        let process = phases.process();
        let provenance = |arm, theta| TraceProvenance {
            preparation: self.preparation,
            arm,
            theta,
            seed: process.map(|p| p.seed),
            stream: process.map(|p| p.stream),
        };
        Ok((
            BeatTrace {
                samples: d1,
                dt: self.config.dt,
                provenance: provenance(Arm::One, self.arms[0].analyzer),
            },
            BeatTrace {
                samples: d2,
                dt: self.config.dt,
                provenance: provenance(Arm::Two, self.arms[1].analyzer),
            },
        ))
    }
}

fn signal_field(config: &BenchConfig) -> JonesVector {
    JonesVector::vertical().scale(Complex64::new(config.signal_amplitude, 0.0))
}

fn noise_field(config: &BenchConfig, phase: f64) -> JonesVector {
    JonesVector::horizontal().scale(Complex64::from_polar(config.noise_amplitude, -phase))
}

fn block_constant(intensity: &[f64], dc: f64) -> Vec<f64> {
    intensity.iter().map(|&i| DETECTOR_GAIN * (i - dc)).collect()
}

fn block_moving(intensity: &[f64], window: usize) -> Vec<f64> {
    let n = intensity.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &x in intensity {
        prefix.push(prefix.last().unwrap() + x);
    }
    let half = window / 2;
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + window - half).min(n);
            let mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            DETECTOR_GAIN * (intensity[k] - mean)
        })
        .collect()
}

pub fn simulate_beat_traces(
    prep: BellPreparation,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
    phases: &PhaseTrace,
    config: &BenchConfig,
) -> Result<(BeatTrace, BeatTrace)> {
    Bench::new(prep, theta1, theta2, *config)?.simulate(phases, None)
}

/// Closed-form unit-amplitude beat for one arm.
pub fn analytic_beat(prep: BellPreparation, theta: AnalyzerSetting, phi: f64, arm: Arm) -> f64 {
    let two_theta = 2.0 * theta.radians();
    match arm {
        Arm::One => (two_theta + phi).sin(),
        Arm::Two => prep.arm2_sign() * (two_theta + prep.arm2_phase_sign() * phi).sin(),
    }
}

/// Least-squares split of a beat trace into `sin φ` and `cos φ` components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatDecomposition {
    /// Weight of `sin φ`; `K cos 2θ` for an arm-1 trace.
    pub in_phase_weight: f64,
    /// Weight of `cos φ`; `K sin 2θ` for an arm-1 trace.
    pub quadrature_weight: f64,
    /// Root-mean-square residual of the fit.
    pub rms_residual: f64,
}

impl BeatDecomposition {
    pub fn amplitude(&self) -> f64 {
        self.in_phase_weight.hypot(self.quadrature_weight)
    }

    /// Analyzer angle implied by the weights, in `[0, π)`.
    pub fn analyzer_angle(&self) -> AnalyzerSetting {
        AnalyzerSetting::from_radians(0.5 * self.quadrature_weight.atan2(self.in_phase_weight))
    }

    /// Distance of the weights from `K·(cos 2θ, sin 2θ)`.
    pub fn deviation_from(&self, theta: AnalyzerSetting, k: f64) -> f64 {
        let (s, c) = (2.0 * theta.radians()).sin_cos();
        (self.in_phase_weight - k * c).hypot(self.quadrature_weight - k * s)
    }
}

pub fn decompose_beat(trace: &BeatTrace, phases: &PhaseTrace) -> Result<BeatDecomposition> {
    if trace.len() != phases.len() {
        return Err(Error::LengthMismatch {
            left: trace.len(),
            right: phases.len(),
        });
    }
    let (mut ss, mut sc, mut cc, mut sy, mut cy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&y, &phi) in trace.samples.iter().zip(phases.samples()) {
        let (s, c) = phi.sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        sy += s * y;
        cy += c * y;
    }
    let det = ss * cc - sc * sc;
    if det.abs() <= 1e-12 * (ss * cc).max(f64::MIN_POSITIVE) {
        return Err(Error::invalid(
            "phases",
            "sin φ and cos φ regressors are collinear",
        ));
    }
    let in_phase = (cc * sy - sc * cy) / det;
    let quadrature = (ss * cy - sc * sy) / det;
    let sse: f64 = trace
        .samples
        .iter()
        .zip(phases.samples())
        .map(|(&y, &phi)| {
            let (s, c) = phi.sin_cos();
            (y - in_phase * s - quadrature * c).powi(2)
        })
        .sum();
    Ok(BeatDecomposition {
        in_phase_weight: in_phase,
        quadrature_weight: quadrature,
        rms_residual: (sse / trace.len() as f64).sqrt(),
    })
}

/// Evenly spaced phases over one period, useful as a noiseless regressor set.
pub fn phase_sweep(n: usize) -> Result<PhaseTrace> {
    PhaseTrace::from_samples((0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_phase_trace, PhaseProcess};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn deg(d: f64) -> AnalyzerSetting {
        AnalyzerSetting::from_degrees(d)
    }

    fn fixed(phases: Vec<f64>) -> PhaseTrace {
        PhaseTrace::from_samples(phases).unwrap()
    }

    #[test]
    fn arm_element_tables() {
        use BellPreparation::*;
        for p in BellPreparation::ALL {
            assert_eq!(
                p.arm_elements(Arm::One),
                vec![Element::QuarterWave { fast_axis: FRAC_PI_4 }]
            );
        }
        assert_eq!(PsiMinus.arm_elements(Arm::Two), PsiMinus.arm_elements(Arm::One));
        assert_eq!(
            PsiPlus.arm_elements(Arm::Two),
            vec![Element::QuarterWave { fast_axis: -FRAC_PI_4 }]
        );
        let hwp = Element::HalfWave { fast_axis: 0.0 };
        assert_eq!(PhiPlus.arm_elements(Arm::Two)[0], hwp);
        assert_eq!(PhiPlus.arm_elements(Arm::Two)[1], PsiMinus.arm_elements(Arm::Two)[0]);
        assert_eq!(PhiMinus.arm_elements(Arm::Two)[0], hwp);
        assert_eq!(PhiMinus.arm_elements(Arm::Two)[1], PsiPlus.arm_elements(Arm::Two)[0]);
    }

    #[test]
    fn preparation_names_round_trip() {
        for p in BellPreparation::ALL {
            assert_eq!(p.name().parse::<BellPreparation>().unwrap(), p);
        }
        assert!("psi".parse::<BellPreparation>().is_err());
    }

    #[test]
    fn psi_minus_equal_angles_anticorrelated() {
        let phases = sample_phase_trace(PhaseProcess::uniform(11), 1000).unwrap();
        let cfg = BenchConfig::default();
        for d in [0.0, 17.0, 22.5, 80.0] {
            let (t1, t2) =
                simulate_beat_traces(BellPreparation::PsiMinus, deg(d), deg(d), &phases, &cfg)
                    .unwrap();
            for (a, b) in t1.samples.iter().zip(&t2.samples) {
                assert!((a + b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psi_minus_pointwise_values() {
        let cfg = BenchConfig::default();
        let (t1, _) = simulate_beat_traces(
            BellPreparation::PsiMinus,
            deg(0.0),
            deg(0.0),
            &fixed(vec![FRAC_PI_2]),
            &cfg,
        )
        .unwrap();
        assert!((t1.samples[0] - 1.0).abs() < 1e-12);

        let (t1, _) = simulate_beat_traces(
            BellPreparation::PsiMinus,
            deg(22.5),
            deg(0.0),
            &fixed(vec![0.0]),
            &cfg,
        )
        .unwrap();
        assert!((t1.samples[0] - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn beat_amplitude_is_product_of_field_amplitudes() {
        let cfg = BenchConfig {
            signal_amplitude: 2.0,
            noise_amplitude: 0.75,
            ..BenchConfig::default()
        };
        let (t1, t2) = simulate_beat_traces(
            BellPreparation::PsiMinus,
            deg(0.0),
            deg(0.0),
            &fixed(vec![FRAC_PI_2]),
            &cfg,
        )
        .unwrap();
        assert!((t1.samples[0] - 1.5).abs() < 1e-12);
        assert!((t2.samples[0] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn analytic_beat_examples() {
        use BellPreparation::*;
        assert_eq!(analytic_beat(PsiMinus, deg(0.0), 0.0, Arm::One), 0.0);
        for phi in [0.0, 0.4, 2.0, 5.5] {
            let t = deg(31.0);
            assert!(
                (analytic_beat(PhiPlus, t, phi, Arm::Two) - analytic_beat(PhiPlus, t, phi, Arm::One))
                    .abs()
                    < 1e-15
            );
        }
        // −sin(2·30° − 60°) = 0
        assert!(analytic_beat(PsiPlus, deg(30.0), PI / 3.0, Arm::Two).abs() < 1e-15);
    }

    #[test]
    fn full_field_matches_closed_form_for_all_preparations() {
        let phases = sample_phase_trace(PhaseProcess::uniform(5), 500).unwrap();
        for p in BellPreparation::ALL {
            for (a, b) in [(0.0, 0.0), (12.0, 71.0), (45.0, 135.0), (100.0, 3.0)] {
                let (t1, t2) =
                    simulate_beat_traces(p, deg(a), deg(b), &phases, &BenchConfig::default())
                        .unwrap();
                for (k, &phi) in phases.samples().iter().enumerate() {
                    assert!((t1.samples[k] - analytic_beat(p, deg(a), phi, Arm::One)).abs() < 1e-9);
                    assert!((t2.samples[k] - analytic_beat(p, deg(b), phi, Arm::Two)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn swapping_angles_and_arms_flips_sign() {
        let phases = sample_phase_trace(PhaseProcess::uniform(6), 300).unwrap();
        let cfg = BenchConfig::default();
        let (a, b) = (deg(13.0), deg(58.0));
        let (x1, x2) = simulate_beat_traces(BellPreparation::PsiMinus, a, b, &phases, &cfg).unwrap();
        let (y1, y2) = simulate_beat_traces(BellPreparation::PsiMinus, b, a, &phases, &cfg).unwrap();
        for k in 0..phases.len() {
            assert!((x1.samples[k] + y2.samples[k]).abs() < 1e-12);
            assert!((x2.samples[k] + y1.samples[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_examples() {
        let sweep = phase_sweep(720).unwrap();
        let cfg = BenchConfig::default();
        let cases = [
            (0.0, 1.0, 0.0),
            (45.0, 0.0, 1.0),
            (30.0, 0.5, 3f64.sqrt() / 2.0),
        ];
        for (d, w_in, w_quad) in cases {
            let (t1, _) =
                simulate_beat_traces(BellPreparation::PsiMinus, deg(d), deg(0.0), &sweep, &cfg)
                    .unwrap();
            let dec = decompose_beat(&t1, &sweep).unwrap();
            assert!((dec.in_phase_weight - w_in).abs() < 1e-9, "{d}: {dec:?}");
            assert!((dec.quadrature_weight - w_quad).abs() < 1e-9, "{d}: {dec:?}");
            assert!(dec.rms_residual < 1e-9);
            assert!((dec.analyzer_angle().degrees() - d).abs() < 1e-6);
        }
    }

    #[test]
    fn decomposition_rejects_bad_inputs() {
        let sweep = phase_sweep(16).unwrap();
        let (t1, _) = simulate_beat_traces(
            BellPreparation::PsiMinus,
            deg(0.0),
            deg(0.0),
            &sweep,
            &BenchConfig::default(),
        )
        .unwrap();
        let short = phase_sweep(15).unwrap();
        assert!(matches!(
            decompose_beat(&t1, &short),
            Err(Error::LengthMismatch { .. })
        ));
        let constant = fixed(vec![0.3; 16]);
        assert!(decompose_beat(&t1, &constant).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = BenchConfig {
            noise_amplitude: 0.0,
            ..BenchConfig::default()
        };
        assert!(Bench::new(BellPreparation::PsiMinus, deg(0.0), deg(0.0), cfg).is_err());
        let cfg = BenchConfig {
            dc_block: DcBlock::MovingAverage { window: 0 },
            ..BenchConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn moving_average_block_removes_mean() {
        let phases = sample_phase_trace(PhaseProcess::uniform(9), 20_000).unwrap();
        let cfg = BenchConfig {
            dc_block: DcBlock::MovingAverage { window: 1000 },
            ..BenchConfig::default()
        };
        let (t1, t2) =
            simulate_beat_traces(BellPreparation::PsiMinus, deg(10.0), deg(10.0), &phases, &cfg)
                .unwrap();
        let exact = simulate_beat_traces(
            BellPreparation::PsiMinus,
            deg(10.0),
            deg(10.0),
            &phases,
            &BenchConfig::default(),
        )
        .unwrap();
        // The moving average estimates the DC level to O(1/√window).
        for (m, e) in t1.samples.iter().zip(&exact.0.samples) {
            assert!((m - e).abs() < 0.1);
        }
        assert!(t2.mean().abs() < 0.01);
    }

    #[test]
    fn arm2_offsets_decorrelate_only_arm2() {
        let phases = sample_phase_trace(PhaseProcess::uniform(4), 64).unwrap();
        let bench =
            Bench::new(BellPreparation::PsiMinus, deg(20.0), deg(20.0), BenchConfig::default())
                .unwrap();
        let offsets = vec![PI; 64];
        let (t1, t2) = bench.simulate(&phases, Some(&offsets)).unwrap();
        // A π offset on arm 2's noise turns anti-correlation into correlation.
        for (a, b) in t1.samples.iter().zip(&t2.samples) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(bench.simulate(&phases, Some(&offsets[..10])).is_err());
    }
}
