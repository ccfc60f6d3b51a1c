//! Two-photon polarization reference: analyzer operators with eigenvalues
//! ±1 and Bell-state expectation values of `A(θ₁) ⊗ A(θ₂)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polarization::{AnalyzerSetting, JonesMatrix, JonesVector};

pub use crate::optical_bench::BellPreparation as BellState;

const NORM_TOL: f64 = 1e-12;

/// Hermitian 2×2 operator on the (H, V) polarization space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationOperator(pub JonesMatrix);

impl PolarizationOperator {
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0 .0[row][col]
    }

    pub fn apply(&self, v: JonesVector) -> JonesVector {
        self.0.apply(v)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.0.adjoint();
        (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (self.entry(r, c) - adj.0[r][c]).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order. Assumes the operator is Hermitian.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_trace = 0.5 * (self.entry(0, 0).re + self.entry(1, 1).re);
        let det = (self.entry(0, 0) * self.entry(1, 1) - self.entry(0, 1) * self.entry(1, 0)).re;
        let disc = (half_trace * half_trace - det).max(0.0).sqrt();
        [half_trace - disc, half_trace + disc]
    }
}

fn outer(a: JonesVector, b: JonesVector) -> JonesMatrix {
    let (a, b) = ([a.h, a.v], [b.h, b.v]);
    JonesMatrix([
        [a[0] * b[0].conj(), a[0] * b[1].conj()],
        [a[1] * b[0].conj(), a[1] * b[1].conj()],
    ])
}

/// `A(θ) = 2|θ⟩⟨θ| − (|θ⟩⟨θ| + |θ⊥⟩⟨θ⊥|) = |θ⟩⟨θ| − |θ⊥⟩⟨θ⊥|`: +1 on the
/// transmitted state, −1 on the rejected one.
pub fn analyzer_operator(theta: AnalyzerSetting) -> PolarizationOperator {
    let par = outer(theta.axis(), theta.axis());
    let perp = outer(theta.orthogonal_axis(), theta.orthogonal_axis());
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            *entry = par.0[r][c] - perp.0[r][c];
        }
    }
    PolarizationOperator(JonesMatrix(m))
}

/// Two-photon polarization state on the basis (HH, HV, VH, VV), photon 1
/// first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonState {
    pub amplitudes: [Complex64; 4],
    pub label: Option<BellState>,
}

impl TwoPhotonState {
    pub fn new(amplitudes: [Complex64; 4]) -> Self {
        TwoPhotonState {
            amplitudes,
            label: None,
        }
    }

    pub fn bell(state: BellState) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (z, p, m) = (0.0, r, -r);
        let amps = match state {
            BellState::PsiMinus => [z, p, m, z],
            BellState::PsiPlus => [z, p, p, z],
            BellState::PhiPlus => [p, z, z, p],
            BellState::PhiMinus => [p, z, z, m],
        };
        TwoPhotonState {
            amplitudes: amps.map(|x| Complex64::new(x, 0.0)),
            label: Some(state),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `⟨ψ| A(θ₁) ⊗ A(θ₂) |ψ⟩` by explicit contraction over the product basis.
pub fn quantum_correlation(
    state: &TwoPhotonState,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
) -> Result<f64> {
    let norm_sqr = state.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized { norm_sqr });
    }
    let (a, b) = (analyzer_operator(theta1), analyzer_operator(theta2));
    let psi = &state.amplitudes;
    let mut acc = Complex64::new(0.0, 0.0);
    // Basis index 2·i + j for photon-1 state i, photon-2 state j.
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    acc += psi[2 * i + j].conj() * a.entry(i, k) * b.entry(j, l) * psi[2 * k + l];
                }
            }
        }
    }
    Ok(acc.re)
}

/// Closed forms: `−cos 2(θ₁∓θ₂)` for ψ∓ and `cos 2(θ₁∓θ₂)` for φ±.
pub fn bell_state_correlation(state: BellState, theta1: AnalyzerSetting, theta2: AnalyzerSetting) -> f64 {
    let (t1, t2) = (theta1.radians(), theta2.radians());
    match state {
        BellState::PsiMinus => -(2.0 * (t1 - t2)).cos(),
        BellState::PsiPlus => -(2.0 * (t1 + t2)).cos(),
        BellState::PhiPlus => (2.0 * (t1 - t2)).cos(),
        BellState::PhiMinus => (2.0 * (t1 + t2)).cos(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn deg(d: f64) -> AnalyzerSetting {
        AnalyzerSetting::from_degrees(d)
    }

    const TOL: f64 = 1e-12;

    #[test]
    fn operator_at_zero_transmits_h() {
        let a = analyzer_operator(deg(0.0));
        let h = a.apply(JonesVector::horizontal());
        let v = a.apply(JonesVector::vertical());
        assert!((h.h - 1.0).norm() < TOL && h.v.norm() < TOL);
        assert!(v.h.norm() < TOL && (v.v + 1.0).norm() < TOL);
    }

    #[test]
    fn operator_matches_projector_expansion() {
        // cos2θ (|H⟩⟨H| − |V⟩⟨V|) + sin2θ (|V⟩⟨H| + |H⟩⟨V|)
        for d in [0.0, 10.0, 45.0, 99.0, 170.0] {
            let t = deg(d);
            let (s, c) = (2.0 * t.radians()).sin_cos();
            let a = analyzer_operator(t);
            let expected = [[c, s], [s, -c]];
            for (r, row) in expected.iter().enumerate() {
                for (col, &want) in row.iter().enumerate() {
                    assert!((a.entry(r, col) - want).norm() < TOL);
                }
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let psi_m = TwoPhotonState::bell(BellState::PsiMinus);
        let phi_p = TwoPhotonState::bell(BellState::PhiPlus);
        for d in [0.0, 33.0, 90.0] {
            assert!((quantum_correlation(&psi_m, deg(d), deg(d)).unwrap() + 1.0).abs() < TOL);
            assert!((quantum_correlation(&phi_p, deg(d), deg(d)).unwrap() - 1.0).abs() < TOL);
        }
        let c = quantum_correlation(&psi_m, deg(0.0), deg(30.0)).unwrap();
        assert!((c + 0.5).abs() < TOL);
    }

    #[test]
    fn rejects_unnormalized() {
        let s = TwoPhotonState::new([Complex64::new(1.0, 0.0); 4]);
        assert!(matches!(
            quantum_correlation(&s, deg(0.0), deg(0.0)),
            Err(Error::Unnormalized { .. })
        ));
    }

    #[test]
    fn bell_states_are_normalized() {
        for s in BellState::ALL {
            assert!((TwoPhotonState::bell(s).norm_sqr() - 1.0).abs() < TOL);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn contraction_equals_closed_form(a in -4.0..4.0f64, b in -4.0..4.0f64) {
            let (t1, t2) = (AnalyzerSetting::from_radians(a), AnalyzerSetting::from_radians(b));
            for s in BellState::ALL {
                let c = quantum_correlation(&TwoPhotonState::bell(s), t1, t2).unwrap();
                prop_assert!((c - bell_state_correlation(s, t1, t2)).abs() < TOL);
            }
        }

        #[test]
        fn singlet_is_rotation_invariant(a in -4.0..4.0f64, b in -4.0..4.0f64, shift in -4.0..4.0f64) {
            let psi = TwoPhotonState::bell(BellState::PsiMinus);
            let at = |x: f64, y: f64| quantum_correlation(
                &psi, AnalyzerSetting::from_radians(x), AnalyzerSetting::from_radians(y)).unwrap();
            prop_assert!((at(a, b) - at(a + shift, b + shift)).abs() < TOL);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn operator_is_hermitian_involution(t in -4.0..4.0f64) {
            let setting = AnalyzerSetting::from_radians(t);
            let a = analyzer_operator(setting);
            prop_assert!(a.hermiticity_error() < TOL);
            let sq = a.0 * a.0;
            prop_assert!(sq.equals_up_to_phase(&JonesMatrix::identity(), TOL));
            prop_assert!((sq.0[0][0] - 1.0).norm() < TOL);
            let [lo, hi] = a.eigenvalues();
            prop_assert!((lo + 1.0).abs() < TOL && (hi - 1.0).abs() < TOL);
            let perp = a.apply(setting.orthogonal_axis());
            let expected = setting.orthogonal_axis().scale(Complex64::new(-1.0, 0.0));
            prop_assert!((perp.h - expected.h).norm() < TOL && (perp.v - expected.v).norm() < TOL);
            let par = a.apply(setting.axis());
            prop_assert!((par.h - setting.axis().h).norm() < TOL && (par.v - setting.axis().v).norm() < TOL);
        }
    }
}
