//! Jones-calculus primitives on the (H, V) basis.
//!
//! Wave plates use the symmetric retarder form
//! `R(θ) · diag(e^{-iδ/2}, e^{+iδ/2}) · R(-θ)`, which makes a quarter-wave
//! plate at +45° map `V → (−i·H + V)/√2` and `H → (H − i·V)/√2` with no
//! extra global phase. The beam splitter is the real symmetric 50/50 map
//! `(in1 + in2, in1 − in2)/√2`; the minus sign on port 2 is the only place a
//! π phase enters.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polarization state of one beam: complex amplitudes on H and V.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JonesVector {
    pub h: Complex64,
    pub v: Complex64,
}

impl JonesVector {
    pub const fn new(h: Complex64, v: Complex64) -> Self {
        JonesVector { h, v }
    }

    pub const fn horizontal() -> Self {
        JonesVector::new(Complex64::new(1.0, 0.0), ZERO)
    }

    pub const fn vertical() -> Self {
        JonesVector::new(ZERO, Complex64::new(1.0, 0.0))
    }

    pub fn scale(self, factor: Complex64) -> Self {
        JonesVector::new(self.h * factor, self.v * factor)
    }

    /// Total intensity `|h|² + |v|²`.
    pub fn intensity(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.v.is_finite()
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &JonesVector) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    /// True when `self = e^{iα}·other` for some real α, within `tol` on each
    /// component.
    pub fn equals_up_to_phase(&self, other: &JonesVector, tol: f64) -> bool {
        let overlap = other.inner(self);
        if overlap.norm() <= tol {
            return self.intensity().sqrt() <= tol && other.intensity().sqrt() <= tol;
        }
        let phase = overlap / overlap.norm();
        let aligned = other.scale(phase);
        (self.h - aligned.h).norm() <= tol && (self.v - aligned.v).norm() <= tol
    }
}

impl Add for JonesVector {
    type Output = JonesVector;
    fn add(self, rhs: JonesVector) -> JonesVector {
        JonesVector::new(self.h + rhs.h, self.v + rhs.v)
    }
}

impl Sub for JonesVector {
    type Output = JonesVector;
    fn sub(self, rhs: JonesVector) -> JonesVector {
        JonesVector::new(self.h - rhs.h, self.v - rhs.v)
    }
}

/// 2×2 complex matrix acting on Jones vectors, row-major on (H, V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub [[Complex64; 2]; 2]);

impl JonesMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        JonesMatrix([[one, ZERO], [ZERO, one]])
    }

    /// Linear retarder with retardance `retardance` and fast axis at
    /// `fast_axis` from H.
    pub fn retarder(fast_axis: f64, retardance: f64) -> Self {
        let (s2, c2) = (2.0 * fast_axis).sin_cos();
        let (sd, cd) = (0.5 * retardance).sin_cos();
        let i_sd = Complex64::new(0.0, sd);
        JonesMatrix([
            [Complex64::new(cd, 0.0) - i_sd * c2, -i_sd * s2],
            [-i_sd * s2, Complex64::new(cd, 0.0) + i_sd * c2],
        ])
    }

    pub fn apply(&self, state: JonesVector) -> JonesVector {
        let m = &self.0;
        JonesVector::new(
            m[0][0] * state.h + m[0][1] * state.v,
            m[1][0] * state.h + m[1][1] * state.v,
        )
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        JonesMatrix([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    /// Largest entrywise deviation of `M†M` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint() * *self;
        let id = JonesMatrix::identity();
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.0[r][c] - id.0[r][c]).norm());
            }
        }
        worst
    }

    /// True when `self = e^{iα}·other` within `tol` entrywise.
    pub fn equals_up_to_phase(&self, other: &JonesMatrix, tol: f64) -> bool {
        // Anchor the phase on the largest entry of `other`.
        let (mut r0, mut c0, mut best) = (0, 0, -1.0);
        for r in 0..2 {
            for c in 0..2 {
                let n = other.0[r][c].norm();
                if n > best {
                    (r0, c0, best) = (r, c, n);
                }
            }
        }
        if best <= tol {
            return self.0.iter().flatten().all(|z| z.norm() <= tol);
        }
        let ratio = self.0[r0][c0] / other.0[r0][c0];
        if (ratio.norm() - 1.0).abs() > tol {
            return false;
        }
        let phase = ratio / ratio.norm();
        (0..2).all(|r| (0..2).all(|c| (self.0[r][c] - other.0[r][c] * phase).norm() <= tol))
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;
    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        JonesMatrix(out)
    }
}

/// Quarter-wave plate with its fast axis at `fast_axis` radians from H.
pub fn quarter_wave_plate(fast_axis: f64) -> JonesMatrix {
    JonesMatrix::retarder(fast_axis, FRAC_PI_2)
}

/// Half-wave plate with its fast axis at `fast_axis` radians from H.
pub fn half_wave_plate(fast_axis: f64) -> JonesMatrix {
    JonesMatrix::retarder(fast_axis, PI)
}

/// Lossless 50/50 beam splitter applied per polarization component.
pub fn beam_splitter(in1: JonesVector, in2: JonesVector) -> (JonesVector, JonesVector) {
    let k = Complex64::new(FRAC_1_SQRT_2, 0.0);
    ((in1 + in2).scale(k), (in1 - in2).scale(k))
}

/// Linear analyzer axis angle, canonicalized into `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(into = "f64", from = "f64")]
pub struct AnalyzerSetting(f64);

impl AnalyzerSetting {
    pub fn from_radians(angle: f64) -> Self {
        let mut a = angle.rem_euclid(PI);
        if a >= PI {
            a = 0.0;
        }
        AnalyzerSetting(a)
    }

    pub fn from_degrees(angle: f64) -> Self {
        AnalyzerSetting::from_radians(angle.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Unit vector `ê = cosθ·H + sinθ·V` along the transmission axis.
    pub fn axis(self) -> JonesVector {
        let (s, c) = self.0.sin_cos();
        JonesVector::new(Complex64::new(c, 0.0), Complex64::new(s, 0.0))
    }

    /// Orthogonal state `−sinθ·H + cosθ·V`.
    pub fn orthogonal_axis(self) -> JonesVector {
        let (s, c) = self.0.sin_cos();
        JonesVector::new(Complex64::new(-s, 0.0), Complex64::new(c, 0.0))
    }
}

impl From<AnalyzerSetting> for f64 {
    fn from(a: AnalyzerSetting) -> f64 {
        a.0
    }
}

impl From<f64> for AnalyzerSetting {
    fn from(angle: f64) -> Self {
        AnalyzerSetting::from_radians(angle)
    }
}

/// Field amplitude transmitted by the analyzer: `cosθ·h + sinθ·v`.
pub fn analyzer_amplitude(state: JonesVector, setting: AnalyzerSetting) -> Complex64 {
    let (s, c) = setting.radians().sin_cos();
    state.h * c + state.v * s
}
