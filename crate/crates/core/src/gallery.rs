//! Named states used as counterexamples and reference points.

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, tensor, ComplexMatrix, C64, ZERO};
use crate::states::BipartiteState;

/// The four Bell vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

pub fn bell_vector(which: Bell) -> Vec<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![ZERO; 4];
    match which {
        Bell::PhiPlus => {
            v[0] = C64::new(h, 0.0);
            v[3] = C64::new(h, 0.0);
        }
        Bell::PhiMinus => {
            v[0] = C64::new(h, 0.0);
            v[3] = C64::new(-h, 0.0);
        }
        Bell::PsiPlus => {
            v[1] = C64::new(h, 0.0);
            v[2] = C64::new(h, 0.0);
        }
        Bell::PsiMinus => {
            v[1] = C64::new(h, 0.0);
            v[2] = C64::new(-h, 0.0);
        }
    }
    v
}

pub fn bell_state(which: Bell) -> BipartiteState {
    BipartiteState::from_pure(&bell_vector(which), 2, 2).expect("Bell vector")
}

/// `p |Φ⁺⟩⟨Φ⁺| + (1 − p) I/4`.
pub fn werner(p: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("Werner weight {p} outside [0, 1]")));
    }
    let phi = ComplexMatrix::projector(&bell_vector(Bell::PhiPlus));
    let m = &phi.scale_real(p) + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    BipartiteState::new(m, 2, 2)
}

/// `I/2 ⊗ |Φ⁺⟩⟨Φ⁺|` with Alice holding the first two qubits.
pub fn example1_state() -> BipartiteState {
    let phi = ComplexMatrix::projector(&bell_vector(Bell::PhiPlus));
    let m = tensor(&ComplexMatrix::identity(2).scale_real(0.5), &phi);
    BipartiteState::new(m, 4, 2).expect("valid construction")
}

/// What Alice is left with after discarding her first qubit.
pub fn example1_after_discard() -> BipartiteState {
    let rho = example1_state();
    let m = partial_trace(rho.matrix(), &[2, 2, 2], &[1, 2]).expect("dimensions");
    BipartiteState::new(m, 2, 2).expect("valid reduction")
}

/// The pure vector `|001⟩/√6 + |110⟩/√6 + √(2/3)|211⟩` on a qutrit and two qubits.
pub fn example2_purification() -> Vec<C64> {
    let mut v = vec![ZERO; 12];
    let idx = |a: usize, b: usize, bp: usize| (a * 2 + b) * 2 + bp;
    v[idx(0, 0, 1)] = C64::new((1.0_f64 / 6.0).sqrt(), 0.0);
    v[idx(1, 1, 0)] = C64::new((1.0_f64 / 6.0).sqrt(), 0.0);
    v[idx(2, 1, 1)] = C64::new((2.0_f64 / 3.0).sqrt(), 0.0);
    v
}

/// The `3 × 2` reduction of `example2_purification`.
pub fn example2_state() -> BipartiteState {
    let sigma = ComplexMatrix::projector(&example2_purification());
    let m = partial_trace(&sigma, &[3, 2, 2], &[0, 1]).expect("dimensions");
    BipartiteState::new(m, 3, 2).expect("valid reduction")
}

/// `|0⟩⟨0| + |2⟩⟨2|` on Alice's qutrit.
pub fn example2_filter() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[1.0, 0.0, 1.0])
}

/// `|00⟩/√5 + √(4/5)|21⟩`.
pub fn psi_one_fifth() -> Vec<C64> {
    let mut v = vec![ZERO; 6];
    v[0] = C64::new((0.2_f64).sqrt(), 0.0);
    v[5] = C64::new((0.8_f64).sqrt(), 0.0);
    v
}

/// The `2 × 3` family with eigenvectors `|12⟩`, `|02⟩`, `√s|00⟩ + √(1−s)|11⟩`
/// and eigenvalues `s/2`, `(1−s)/2`, `1/2`.
pub fn example3_state(s: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("s = {s} outside [0, 1]")));
    }
    let mut psi2 = vec![ZERO; 6];
    psi2[0] = C64::new(s.sqrt(), 0.0);
    psi2[4] = C64::new((1.0 - s).sqrt(), 0.0);
    let mut m = ComplexMatrix::projector(&psi2).scale_real(0.5);
    m[(5, 5)] += C64::new(s / 2.0, 0.0);
    m[(2, 2)] += C64::new((1.0 - s) / 2.0, 0.0);
    BipartiteState::new(m, 2, 3)
}

/// `√p|0⟩⟨0| + |1⟩⟨1|` on Alice's qubit.
pub fn example3_filter(p: f64) -> ComplexMatrix {
    ComplexMatrix::diag_real(&[p.max(0.0).sqrt(), 1.0])
}

/// Closed-form global and local spectra of the filtered `2 × 3` family,
/// each sorted non-increasing.
pub fn example3_filtered_spectra(s: f64, p: f64) -> (Vec<f64>, Vec<f64>) {
    let n = 1.0 + p;
    let mut global = vec![s / n, (1.0 - s) * p / n, (1.0 - s * (1.0 - p)) / n];
    let mut local = vec![s * p / n, (1.0 - s) / n, (1.0 - (1.0 - s) * (1.0 - p)) / n];
    global.sort_by(|a, b| b.total_cmp(a));
    local.sort_by(|a, b| b.total_cmp(a));
    (global, local)
}

/// Rank-2 state `(|ψ⟩⟨ψ| + |12⟩⟨12|)/2` with `|ψ⟩ = √s|00⟩ + √(1−s)|11⟩` on a
/// qubit and a qutrit; its qutrit marginal has rank 3 for `0 < s < 1`.
pub fn rank2_qubit_qutrit(s: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("s = {s} outside [0, 1]")));
    }
    let mut psi = vec![ZERO; 6];
    psi[0] = C64::new(s.sqrt(), 0.0);
    psi[4] = C64::new((1.0 - s).sqrt(), 0.0);
    let mut m = ComplexMatrix::projector(&psi).scale_real(0.5);
    m[(5, 5)] += C64::new(0.5, 0.0);
    BipartiteState::new(m, 2, 3)
}
