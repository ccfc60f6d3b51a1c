//! Ekert-style key distribution over the beat signals.
//!
//! Alice holds analyzer A (arm 1) and Bob analyzer B (arm 2). Every round
//! each picks an analyzer angle at random, reads the DC-blocked beat signal
//! and passes it through a comparator: positive → `1`, negative → `0`,
//! inside the dead zone → erasure. Afterwards they exchange basis
//! announcements and erasure flags over the classical channel:
//!
//! * rounds whose angle pair is perfectly (anti)correlated become key bits,
//!   with Bob inverting his bit when the correlation is negative;
//! * rounds on the Bell-test pairs `(a,b)`, `(a,c)`, `(b,c)` disclose their
//!   analog samples, from which `F(a,b,c)` certifies the channel;
//! * everything else is discarded.
//!
//! An eavesdropper is modeled as extra Gaussian phase noise on the noise
//! field reaching Bob, which washes out the correlation.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{assemble_scan, BellScanResult};
use crate::correlation::{
    calibrate, estimate_correlation, Calibration, ProductTrace, Sampling, ScanPoint,
};
use crate::error::{Error, Result};
use crate::noise::PhaseTrace;
use crate::optical_bench::{BellPreparation, Bench, BenchConfig};
use crate::polarization::AnalyzerSetting;
use crate::quantum::bell_state_correlation;
use crate::rng;

/// Angle pairs whose reference correlation is within this of ±1 are keyed.
const KEY_PAIR_TOL: f64 = 1e-9;

/// Comparator output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    One,
    Zero,
    Erasure,
}

impl Outcome {
    pub fn bit(self) -> Option<bool> {
        match self {
            Outcome::One => Some(true),
            Outcome::Zero => Some(false),
            Outcome::Erasure => None,
        }
    }
}

pub fn comparator_encode(sample: f64, threshold: f64) -> Outcome {
    if sample > threshold {
        Outcome::One
    } else if sample < -threshold {
        Outcome::Zero
    } else {
        Outcome::Erasure
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub n_rounds: usize,
    pub alice_angles: Vec<AnalyzerSetting>,
    pub bob_angles: Vec<AnalyzerSetting>,
    pub samples_per_round: usize,
    pub preparation: BellPreparation,
    pub seed: u64,
    /// Standard deviation (rad) of the extra phase on Bob's noise field.
    pub channel_decorrelation: f64,
    /// Comparator dead zone ε.
    pub threshold: f64,
    /// Angles `(a, b, c)` of the Bell check.
    pub bell_angles: [AnalyzerSetting; 3],
    pub bench: BenchConfig,
    /// Samples for the trusted calibration run that normalizes the Bell
    /// check.
    pub calibration_samples: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let deg = AnalyzerSetting::from_degrees;
        SessionConfig {
            n_rounds: 10_000,
            alice_angles: vec![deg(0.0), deg(30.0), deg(60.0)],
            bob_angles: vec![deg(30.0), deg(60.0), deg(90.0)],
            samples_per_round: 1,
            preparation: BellPreparation::PsiMinus,
            seed: 0,
            channel_decorrelation: 0.0,
            threshold: 1e-6,
            bell_angles: [deg(0.0), deg(30.0), deg(60.0)],
            bench: BenchConfig::default(),
            calibration_samples: 100_000,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::invalid("n_rounds", "must be at least 1"));
        }
        if self.alice_angles.is_empty() {
            return Err(Error::Empty("alice angle list"));
        }
        if self.bob_angles.is_empty() {
            return Err(Error::Empty("bob angle list"));
        }
        if self.samples_per_round == 0 {
            return Err(Error::invalid("samples_per_round", "must be at least 1"));
        }
        if !(self.channel_decorrelation.is_finite() && self.channel_decorrelation >= 0.0) {
            return Err(Error::invalid(
                "channel_decorrelation",
                "must be finite and non-negative",
            ));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::invalid("threshold", "must be finite and non-negative"));
        }
        if self.calibration_samples < 2 {
            return Err(Error::TooFewSamples {
                min: 2,
                got: self.calibration_samples,
            });
        }
        self.bench.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alice,
    Bob,
}

/// Public message on the classical channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Message {
    Basis {
        from: Role,
        round: usize,
        basis: usize,
        erased: bool,
    },
    Disclosure {
        from: Role,
        round: usize,
        sample: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartyState {
    Measuring,
    Announced,
    Sifted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LocalRecord {
    basis: usize,
    sample: f64,
    outcome: Outcome,
}

/// How a round is used once both bases are public.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundUse {
    /// Key round; `invert` tells Bob to flip his bit.
    Key { invert: bool },
    /// Bell-test pair 0 = (a,b), 1 = (a,c), 2 = (b,c).
    Test { pair: usize },
    Discard,
}

/// Public rule, known to both parties, for using a basis pair.
#[derive(Debug, Clone)]
pub struct SiftingRule {
    preparation: BellPreparation,
    alice_angles: Vec<AnalyzerSetting>,
    bob_angles: Vec<AnalyzerSetting>,
    bell_angles: [AnalyzerSetting; 3],
}

impl SiftingRule {
    pub fn from_config(config: &SessionConfig) -> Self {
        SiftingRule {
            preparation: config.preparation,
            alice_angles: config.alice_angles.clone(),
            bob_angles: config.bob_angles.clone(),
            bell_angles: config.bell_angles,
        }
    }

    pub fn classify(&self, alice_basis: usize, bob_basis: usize) -> RoundUse {
        let (ta, tb) = (self.alice_angles[alice_basis], self.bob_angles[bob_basis]);
        let c = bell_state_correlation(self.preparation, ta, tb);
        if (c.abs() - 1.0).abs() <= KEY_PAIR_TOL {
            // Bits come from beat samples, whose product carries the
            // preparation's orientation on top of the state's sign.
            let beat = c * self.preparation.beat_orientation();
            return RoundUse::Key { invert: beat < 0.0 };
        }
        let [a, b, cc] = self.bell_angles;
        let same = |x: AnalyzerSetting, y: AnalyzerSetting| (x.radians() - y.radians()).abs() < 1e-12;
        [(a, b), (a, cc), (b, cc)]
            .iter()
            .position(|&(x, y)| same(ta, x) && same(tb, y))
            .map_or(RoundUse::Discard, |pair| RoundUse::Test { pair })
    }
}

/// One protocol participant. It only learns the peer's basis choices,
/// erasure flags and disclosed test samples.
#[derive(Debug, Clone)]
pub struct Party {
    role: Role,
    state: PartyState,
    threshold: f64,
    records: Vec<LocalRecord>,
    key: Vec<bool>,
    test_samples: Vec<(usize, usize, f64)>,
}

impl Party {
    pub fn new(role: Role, threshold: f64) -> Self {
        Party {
            role,
            state: PartyState::Measuring,
            threshold,
            records: Vec::new(),
            key: Vec::new(),
            test_samples: Vec::new(),
        }
    }

    pub fn state(&self) -> PartyState {
        self.state
    }

    pub fn measure(&mut self, basis: usize, sample: f64) -> Result<Outcome> {
        if self.state != PartyState::Measuring {
            return Err(Error::invalid("party", "measurement after announcement"));
        }
        let outcome = comparator_encode(sample, self.threshold);
        self.records.push(LocalRecord {
            basis,
            sample,
            outcome,
        });
        Ok(outcome)
    }

    pub fn announce(&mut self) -> Result<Vec<Message>> {
        if self.state != PartyState::Measuring {
            return Err(Error::invalid("party", "already announced"));
        }
        self.state = PartyState::Announced;
        Ok(self
            .records
            .iter()
            .enumerate()
            .map(|(round, r)| Message::Basis {
                from: self.role,
                round,
                basis: r.basis,
                erased: r.outcome == Outcome::Erasure,
            })
            .collect())
    }

    /// Keeps key rounds where neither side erased and returns disclosures
    /// for the Bell-test rounds.
    pub fn sift(&mut self, peer: &[Message], rule: &SiftingRule) -> Result<Vec<Message>> {
        if self.state != PartyState::Announced {
            return Err(Error::invalid("party", "sifting before announcement"));
        }
        if peer.len() != self.records.len() {
            return Err(Error::LengthMismatch {
                left: self.records.len(),
                right: peer.len(),
            });
        }
        let mut disclosures = Vec::new();
        for msg in peer {
            let Message::Basis {
                round,
                basis: peer_basis,
                erased: peer_erased,
                ..
            } = *msg
            else {
                return Err(Error::invalid("message", "expected a basis announcement"));
            };
            let mine = self.records[round];
            let (alice, bob) = match self.role {
                Role::Alice => (mine.basis, peer_basis),
                Role::Bob => (peer_basis, mine.basis),
            };
            match rule.classify(alice, bob) {
                RoundUse::Key { invert } => {
                    if let (Some(bit), false) = (mine.outcome.bit(), peer_erased) {
                        let flip = invert && self.role == Role::Bob;
                        self.key.push(bit ^ flip);
                    }
                }
                RoundUse::Test { pair } => {
                    self.test_samples.push((round, pair, mine.sample));
                    disclosures.push(Message::Disclosure {
                        from: self.role,
                        round,
                        sample: mine.sample,
                    });
                }
                RoundUse::Discard => {}
            }
        }
        self.state = PartyState::Sifted;
        Ok(disclosures)
    }

    pub fn key(&self) -> &[bool] {
        &self.key
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub alice_basis: AnalyzerSetting,
    pub bob_basis: AnalyzerSetting,
    pub alice_sample: f64,
    pub bob_sample: f64,
    pub alice_outcome: Outcome,
    pub bob_outcome: Outcome,
    pub usage: RoundUse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub rounds: Vec<RoundRecord>,
    pub alice_key: Vec<bool>,
    /// Bob's sifted key after inversion on anti-correlated pairs.
    pub bob_key: Vec<bool>,
    pub qber: Option<f64>,
    pub erasures: usize,
    pub bell_check: Option<BellScanResult>,
    pub calibration: Calibration,
}

impl SessionTranscript {
    pub fn sifted_len(&self) -> usize {
        self.alice_key.len()
    }
}

/// Disagreement fraction between the sifted keys.
pub fn estimate_qber(transcript: &SessionTranscript) -> Result<f64> {
    qber(&transcript.alice_key, &transcript.bob_key)
}

pub fn qber(alice: &[bool], bob: &[bool]) -> Result<f64> {
    if alice.len() != bob.len() {
        return Err(Error::LengthMismatch {
            left: alice.len(),
            right: bob.len(),
        });
    }
    if alice.is_empty() {
        return Err(Error::Empty("sifted key"));
    }
    let errors = alice.iter().zip(bob).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / alice.len() as f64)
}

/// Packs bits MSB-first; a trailing partial byte is zero-padded.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |byte, (i, &b)| byte | ((b as u8) << (7 - i)))
        })
        .collect()
}

struct RawRound {
    alice_basis: usize,
    bob_basis: usize,
    alice_sample: f64,
    bob_sample: f64,
}

fn simulate_round(config: &SessionConfig, benches: &[Vec<Bench>], round: usize) -> Result<RawRound> {
    let mut rng = rng::stream(config.seed, round as u64);
    let alice_basis = rng.random_range(0..config.alice_angles.len());
    let bob_basis = rng.random_range(0..config.bob_angles.len());
    // One noise phase held over the round's integration window.
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let phases = PhaseTrace::from_samples(vec![phi; config.samples_per_round])?;
    let offsets: Option<Vec<f64>> = if config.channel_decorrelation > 0.0 {
        let normal = Normal::new(0.0, config.channel_decorrelation)
            .map_err(|e| Error::invalid("channel_decorrelation", e.to_string()))?;
        Some((0..config.samples_per_round).map(|_| normal.sample(&mut rng)).collect())
    } else {
        None
    };
    let (d1, d2) = benches[alice_basis][bob_basis].simulate(&phases, offsets.as_deref())?;
    Ok(RawRound {
        alice_basis,
        bob_basis,
        alice_sample: d1.mean(),
        bob_sample: d2.mean(),
    })
}

pub fn run_session(config: &SessionConfig) -> Result<SessionTranscript> {
    config.validate()?;
    let benches = config
        .alice_angles
        .iter()
        .map(|&ta| {
            config
                .bob_angles
                .iter()
                .map(|&tb| Bench::new(config.preparation, ta, tb, config.bench))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let raw = (0..config.n_rounds)
        .into_par_iter()
        .map(|r| simulate_round(config, &benches, r))
        .collect::<Result<Vec<_>>>()?;

    let mut alice = Party::new(Role::Alice, config.threshold);
    let mut bob = Party::new(Role::Bob, config.threshold);
    for r in &raw {
        alice.measure(r.alice_basis, r.alice_sample)?;
        bob.measure(r.bob_basis, r.bob_sample)?;
    }
    let rule = SiftingRule::from_config(config);
    let from_alice = alice.announce()?;
    let from_bob = bob.announce()?;
    // Each side discloses its test-round samples; Alice runs the check.
    let _for_bob = alice.sift(&from_bob, &rule)?;
    let bob_disclosures = bob.sift(&from_alice, &rule)?;

    let calibration = calibrate(
        config.preparation,
        &config.bench,
        &Sampling::new(config.calibration_samples, config.seed),
    )?;
    let bell_check = bell_check(&alice, &bob_disclosures, config.bell_angles, &calibration)?;

    let rounds: Vec<RoundRecord> = raw
        .iter()
        .enumerate()
        .map(|(round, r)| RoundRecord {
            round,
            alice_basis: config.alice_angles[r.alice_basis],
            bob_basis: config.bob_angles[r.bob_basis],
            alice_sample: r.alice_sample,
            bob_sample: r.bob_sample,
            alice_outcome: comparator_encode(r.alice_sample, config.threshold),
            bob_outcome: comparator_encode(r.bob_sample, config.threshold),
            usage: rule.classify(r.alice_basis, r.bob_basis),
        })
        .collect();
    let erasures = rounds
        .iter()
        .filter(|r| r.alice_outcome == Outcome::Erasure || r.bob_outcome == Outcome::Erasure)
        .count();
    let qber = qber(alice.key(), bob.key()).ok();
    Ok(SessionTranscript {
        rounds,
        alice_key: alice.key().to_vec(),
        bob_key: bob.key().to_vec(),
        qber,
        erasures,
        bell_check,
        calibration,
    })
}

/// `F(a,b,c)` computed by Alice from her test-round samples and Bob's
/// disclosures, or `None` when some pair has fewer than two rounds.
fn bell_check(
    alice: &Party,
    bob_disclosures: &[Message],
    bell_angles: [AnalyzerSetting; 3],
    calibration: &Calibration,
) -> Result<Option<BellScanResult>> {
    if alice.test_samples.len() != bob_disclosures.len() {
        return Err(Error::LengthMismatch {
            left: alice.test_samples.len(),
            right: bob_disclosures.len(),
        });
    }
    let mut products: [Vec<f64>; 3] = Default::default();
    for (&(round, pair, mine), msg) in alice.test_samples.iter().zip(bob_disclosures) {
        match *msg {
            Message::Disclosure {
                round: theirs_round,
                sample,
                ..
            } if theirs_round == round => products[pair].push(mine * sample),
            _ => return Err(Error::invalid("disclosure", "rounds out of step")),
        }
    }
    if products.iter().any(|p| p.len() < 2) {
        return Ok(None);
    }
    let [a, b, c] = bell_angles;
    let point = |pair: usize, t1, t2| -> Result<ScanPoint> {
        let est = estimate_correlation(&ProductTrace::from_samples(products[pair].clone()))?;
        Ok(ScanPoint {
            theta1: t1,
            theta2: t2,
            estimate: est.normalize(calibration),
        })
    };
    let result = assemble_scan(
        a,
        b,
        point(0, a, b)?,
        vec![point(1, a, c)?],
        vec![point(2, b, c)?],
        *calibration,
    )?;
    Ok(Some(result))
}
