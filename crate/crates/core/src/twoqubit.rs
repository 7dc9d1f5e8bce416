//! Closed-form machinery for two qubits: the pure-extension constructor,
//! extremality, the purity/determinant condition, rank-2 states,
//! Bell-diagonal states and Z-correlated states.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, inner_product, nonzero_eigenvalues, normalize, partial_trace, partial_transpose,
    polar_unitary, svd, swap_vector, tensor, trace_norm, vec_norm, ComplexMatrix, Subsystem, C64,
    ONE, ZERO, ZERO_CUTOFF,
};
use crate::random::Rng;
use crate::states::{
    purify_equal_margins, spectrum_condition, spectrum_deviation, BipartiteState, PureTripartite,
    TripartiteExtension, SPECTRUM_TOL,
};

/// Switch to the Bell-diagonal branch when `‖ρ_B − I/2‖₁` is below this.
pub const MIXED_MARGINAL_TOL: f64 = 1e-7;
/// Amplitudes below this are treated as zero when reading phases.
const PHASE_AMPLITUDE_TOL: f64 = 1e-10;
/// Slack allowed on closed-form inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-10;

fn require_two_qubits(rho: &BipartiteState) -> Result<()> {
    if rho.dims() != (2, 2) {
        return Err(Error::WrongDimension(format!(
            "expected a 2x2 state, got {}x{}",
            rho.d_a(),
            rho.d_b()
        )));
    }
    Ok(())
}

fn pauli(k: usize) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    match k {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap(),
        2 => ComplexMatrix::from_vec(2, 2, vec![ZERO, -i, i, ZERO]).unwrap(),
        _ => ComplexMatrix::diag_real(&[1.0, -1.0]),
    }
}

/// `(v + P_BB' v)/‖·‖` for a vector on three qubits; falls back to the
/// antisymmetric-free part being zero by returning `|000⟩`.
pub fn symmetrize_pure(v: &[C64]) -> Vec<C64> {
    let pv = swap_vector(v, 2);
    let mut s: Vec<C64> = v.iter().zip(&pv).map(|(a, b)| (a + b) * 0.5).collect();
    if vec_norm(&s) < 1e-12 {
        s = vec![ZERO; v.len()];
        s[0] = ONE;
    }
    normalize(&mut s);
    s
}

/// Reduction to `AB` of a random swap-symmetric pure three-qubit vector.
pub fn random_pure_extendible(rng: &mut Rng) -> BipartiteState {
    let v = symmetrize_pure(&rng.random_pure(8));
    let m = partial_trace(&ComplexMatrix::projector(&v), &[2, 2, 2], &[0, 1]).expect("dimensions");
    BipartiteState::new(m, 2, 2).expect("valid reduction")
}

/// Quaternion lift of a rotation: `U σ_j U† = Σ_k R_kj σ_k`.
fn lift_rotation(r: &[[f64; 3]; 3]) -> ComplexMatrix {
    let tr = r[0][0] + r[1][1] + r[2][2];
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (r[2][1] - r[1][2]) / s;
        y = (r[0][2] - r[2][0]) / s;
        z = (r[1][0] - r[0][1]) / s;
    } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
        let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt() * 2.0;
        w = (r[2][1] - r[1][2]) / s;
        x = 0.25 * s;
        y = (r[0][1] + r[1][0]) / s;
        z = (r[0][2] + r[2][0]) / s;
    } else if r[1][1] > r[2][2] {
        let s = (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt() * 2.0;
        w = (r[0][2] - r[2][0]) / s;
        x = (r[0][1] + r[1][0]) / s;
        y = 0.25 * s;
        z = (r[1][2] + r[2][1]) / s;
    } else {
        let s = (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt() * 2.0;
        w = (r[1][0] - r[0][1]) / s;
        x = (r[0][2] + r[2][0]) / s;
        y = (r[1][2] + r[2][1]) / s;
        z = 0.25 * s;
    }
    let i = C64::new(0.0, 1.0);
    // w I − i (x σx + y σy + z σz)
    let mut u = ComplexMatrix::identity(2).scale_real(w);
    for (k, c) in [(1, x), (2, y), (3, z)] {
        u -= &pauli(k).scale(i * c);
    }
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let u = u.scale_real(1.0 / n);
    if rotation_of(&u).iter().flatten().zip(r.iter().flatten()).all(|(a, b)| (a - b).abs() < 1e-6) {
        u
    } else {
        u.adjoint()
    }
}

/// `R_kj = tr(σ_k U σ_j U†)/2`.
fn rotation_of(u: &ComplexMatrix) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for j in 0..3 {
        let rotated = u.sandwich(&pauli(j + 1));
        for (k, row) in r.iter_mut().enumerate() {
            row[j] = 0.5 * (&pauli(k + 1) * &rotated).trace().re;
        }
    }
    r
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Real SVD `T = O₁ D O₂ᵀ` with both factors in SO(3), columns returned as
/// arrays of column vectors.
fn so3_svd(t: &[[f64; 3]; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let ttt = ComplexMatrix::from_fn(3, 3, |i, j| {
        C64::new((0..3).map(|k| t[i][k] * t[j][k]).sum(), 0.0)
    });
    let eig = hermitian_eig(&ttt).expect("symmetric");
    let mut o1 = [[0.0; 3]; 3];
    for (j, col) in o1.iter_mut().enumerate() {
        let v = eig.vector(j);
        // Real input: eigenvectors are real up to a global phase.
        let phase = v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        let ph = phase.conj() / phase.norm();
        for i in 0..3 {
            col[i] = (v[i] * ph).re;
        }
    }
    orthonormalize(&mut o1);
    if det3(&transpose3(&o1)) < 0.0 {
        o1[2] = o1[2].map(|x| -x);
    }
    let mut o2 = [[0.0; 3]; 3];
    let mut filled = 0;
    for j in 0..3 {
        let v: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| t[k][i] * o1[j][k]).sum());
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            o2[j] = v.map(|x| x / n);
            filled = j + 1;
        } else {
            break;
        }
    }
    complete_basis(&mut o2, filled);
    if det3(&transpose3(&o2)) < 0.0 {
        o2[2] = o2[2].map(|x| -x);
    }
    (o1, o2)
}

fn transpose3(cols: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i]))
}

fn orthonormalize(cols: &mut [[f64; 3]; 3]) {
    for j in 0..3 {
        for k in 0..j {
            let d: f64 = (0..3).map(|i| cols[j][i] * cols[k][i]).sum();
            for i in 0..3 {
                cols[j][i] -= d * cols[k][i];
            }
        }
        let n = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        cols[j] = cols[j].map(|x| x / n);
    }
}

fn complete_basis(cols: &mut [[f64; 3]; 3], filled: usize) {
    let mut k = filled;
    let mut e = 0;
    while k < 3 {
        let mut v = [0.0; 3];
        v[e] = 1.0;
        e += 1;
        for c in cols.iter().take(k) {
            let d: f64 = (0..3).map(|i| v[i] * c[i]).sum();
            for i in 0..3 {
                v[i] -= d * c[i];
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols[k] = v.map(|x| x / n);
            k += 1;
        }
    }
    if filled == 2 {
        cols[2] = cross(cols[0], cols[1]);
    }
}

/// Applies `Pauli · V` after `U` to make `ρ_BB'` Bell-diagonal without a
/// singlet component; returns the unitary to apply on `B'`.
fn bell_branch_unitary(psi: &PureTripartite) -> ComplexMatrix {
    let rho_bb = partial_trace(&psi.density(), &[2, 2, 2], &[1, 2]).expect("dimensions");
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (&rho_bb * &tensor(&pauli(i + 1), &pauli(j + 1))).trace().re;
        }
    }
    let (o1, o2) = so3_svd(&t);
    // R(U) = O₁ᵀ, R(V) = O₂ᵀ, so that R(U) T R(V)ᵀ is diagonal.
    let u = lift_rotation(&o1);
    let v = lift_rotation(&o2);
    let rotated = tensor(&u, &v).sandwich(&rho_bb);
    let singlet = crate::gallery::bell_vector(crate::gallery::Bell::PsiMinus);
    let mut best = (f64::INFINITY, 0);
    for k in 0..4 {
        let q = tensor(&ComplexMatrix::identity(2), &pauli(k));
        let w = inner_product(&singlet, &q.sandwich(&rotated).mul_vec(&singlet)).re;
        if w < best.0 {
            best = (w, k);
        }
    }
    &(&u.adjoint() * &pauli(best.1)) * &v
}

/// Diagonal phase gate on `B'` in the eigenbasis of `ρ_B`.
fn phase_branch_unitary(psi: &PureTripartite, basis: &ComplexMatrix) -> ComplexMatrix {
    let wd = basis.adjoint();
    let local = psi.apply_bb(&wd, &wd);
    let a = &local.amplitudes;
    let (b, c, f, g) = (a[1], a[2], a[5], a[6]);
    let pair_bc = b.norm().min(c.norm());
    let pair_fg = f.norm().min(g.norm());
    let theta = if pair_bc >= pair_fg && pair_bc > PHASE_AMPLITUDE_TOL {
        b.arg() - c.arg()
    } else if pair_fg > PHASE_AMPLITUDE_TOL {
        f.arg() - g.arg()
    } else {
        0.0
    };
    let gate = ComplexMatrix::from_vec(2, 2, vec![ONE, ZERO, ZERO, C64::from_polar(1.0, -theta)]).unwrap();
    basis * &(&gate * &wd)
}

/// Rotates `B'` to maximize the overlap with the symmetric projection,
/// keeping the `AB` reduction exact.
fn polish(mut psi: PureTripartite) -> PureTripartite {
    for _ in 0..200 {
        if psi.symmetry_defect() < 1e-13 {
            break;
        }
        let s = symmetrize_pure(&psi.amplitudes);
        let d = psi.d_b;
        let mut y = ComplexMatrix::zeros(d, d);
        for (pk, sk) in psi.amplitudes.chunks(d).zip(s.chunks(d)) {
            for c in 0..d {
                for bp in 0..d {
                    y[(c, bp)] += pk[c] * sk[bp].conj();
                }
            }
        }
        let v = polar_unitary(&y).adjoint();
        let next = psi.apply_b_prime(&v);
        if next.symmetry_defect() >= psi.symmetry_defect() {
            break;
        }
        psi = next;
    }
    psi
}

/// Builds a swap-symmetric pure `|ψ⟩_ABB'` with `tr_B' |ψ⟩⟨ψ| = ρ` for a
/// two-qubit state satisfying the spectrum condition. The purification with
/// equal margins is made symmetric by a unitary on `B'` alone.
pub fn construct_pure_extension(rho: &BipartiteState) -> Result<PureTripartite> {
    require_two_qubits(rho)?;
    let psi = purify_equal_margins(rho)?;
    let rho_b = rho.reduced_b();
    let mixed = trace_norm(&(&rho_b - &ComplexMatrix::identity(2).scale_real(0.5))) < MIXED_MARGINAL_TOL;
    let w = if mixed {
        bell_branch_unitary(&psi)
    } else {
        let basis = hermitian_eig(&rho_b)?.eigenvectors;
        phase_branch_unitary(&psi, &basis)
    };
    Ok(polish(psi.apply_b_prime(&w)))
}

/// Which proven subclass a two-qubit verdict falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Rank2,
    BellDiagonal,
    ZCorrelatedY0,
    ThreeDegenerate,
    Conjectured,
}

impl Regime {
    pub fn proven(self) -> bool {
        self != Regime::Conjectured
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Rank2 => "rank-2",
            Regime::BellDiagonal => "bell-diagonal",
            Regime::ZCorrelatedY0 => "z-correlated-y0",
            Regime::ThreeDegenerate => "three-degenerate",
            Regime::Conjectured => "conjectured",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjectureVerdict {
    pub holds: bool,
    /// `tr ρ_B² − tr ρ_AB² + 4√det ρ_AB`.
    pub margin: f64,
    pub regime: Regime,
}

/// `tr ρ_B² − tr ρ_AB² + 4√det ρ_AB`, with eigenvalues under the zero
/// cutoff treated as zero.
pub fn conjecture_margin(rho: &BipartiteState) -> Result<f64> {
    require_two_qubits(rho)?;
    let eig = rho.eig();
    let lmax = eig.lambda_max();
    let det: f64 = eig
        .eigenvalues
        .iter()
        .map(|&x| if x <= ZERO_CUTOFF * lmax { 0.0 } else { x })
        .product();
    let rb = rho.reduced_b();
    let pb = (&rb * &rb).trace().re;
    Ok(pb - rho.purity() + 4.0 * det.max(0.0).sqrt())
}

/// Whether `tr ρ_B² ≥ tr ρ_AB² − 4√det ρ_AB`. Proven only on the subclasses
/// reported by `conjecture_verdict`.
pub fn check_conjecture(rho: &BipartiteState) -> Result<bool> {
    Ok(conjecture_margin(rho)? >= -INEQUALITY_SLACK)
}

pub fn conjecture_verdict(rho: &BipartiteState) -> Result<ConjectureVerdict> {
    let margin = conjecture_margin(rho)?;
    Ok(ConjectureVerdict {
        holds: margin >= -INEQUALITY_SLACK,
        margin,
        regime: regime_of(rho),
    })
}

fn regime_of(rho: &BipartiteState) -> Regime {
    let eig = rho.eig();
    if eig.rank() <= 2 {
        return Regime::Rank2;
    }
    let half = ComplexMatrix::identity(2).scale_real(0.5);
    if rho.reduced_a().max_diff(&half) < 1e-9 && rho.reduced_b().max_diff(&half) < 1e-9 {
        return Regime::BellDiagonal;
    }
    if let Some(z) = ZCorrParams::from_state(rho) {
        if z.y <= 1e-12 {
            return Regime::ZCorrelatedY0;
        }
    }
    let e = &eig.eigenvalues;
    if (e[1] - e[3]).abs() < 1e-9 || (e[0] - e[2]).abs() < 1e-9 {
        return Regime::ThreeDegenerate;
    }
    Regime::Conjectured
}

fn lambda_max(m: &ComplexMatrix) -> f64 {
    hermitian_eig(m).map(|e| e.lambda_max()).unwrap_or(0.0)
}

/// `λ_max(ρ_AB) ≤ λ_max(ρ_B)` for a rank-2 state with a qubit `B`. Decisive
/// when `A` is also a qubit; for larger `A` a `false` rules out a symmetric
/// extension while `true` is only necessary.
pub fn rank2_condition(rho: &BipartiteState) -> Result<bool> {
    if rho.d_b() != 2 {
        return Err(Error::WrongDimension(format!("B must be a qubit, got dimension {}", rho.d_b())));
    }
    let eig = rho.eig();
    let rank = eig.rank();
    if rank != 2 {
        return Err(Error::WrongRank {
            expected: "2".into(),
            found: rank,
        });
    }
    Ok(eig.lambda_max() <= lambda_max(&rho.reduced_b()) + 1e-9)
}

/// `ρ = (1 − q) ρ^{p₀} + q ρ^{p₁}` with both terms pure-extendible.
#[derive(Clone, Debug)]
pub struct Rank2Decomposition {
    /// Weight of the smaller eigenvalue in `ρ`.
    pub lambda: f64,
    pub p0: f64,
    pub p1: f64,
    pub q: f64,
    pub state0: BipartiteState,
    pub state1: BipartiteState,
    pub extension0: PureTripartite,
    pub extension1: PureTripartite,
}

impl Rank2Decomposition {
    pub fn extension(&self) -> Result<TripartiteExtension> {
        let e0 = self.extension0.to_extension()?;
        if self.q == 0.0 {
            return Ok(e0);
        }
        let e1 = self.extension1.to_extension()?;
        TripartiteExtension::mixture(&[(1.0 - self.q, &e0), (self.q, &e1)])
    }

    /// `‖(1 − q) ρ^{p₀} + q ρ^{p₁} − ρ‖₁`.
    pub fn reconstruction_residual(&self, rho: &BipartiteState) -> f64 {
        let mix = &self.state0.matrix().scale_real(1.0 - self.q) + &self.state1.matrix().scale_real(self.q);
        trace_norm(&(&mix - rho.matrix()))
    }
}

/// Splits a rank-2 two-qubit state satisfying the rank-2 condition into two
/// states on the same eigenvectors that satisfy the spectrum condition.
pub fn rank2_decompose(rho: &BipartiteState) -> Result<Rank2Decomposition> {
    require_two_qubits(rho)?;
    if !rank2_condition(rho)? {
        return Err(Error::ConditionUnsatisfied(
            "λ_max(ρ_AB) exceeds λ_max(ρ_B)".into(),
        ));
    }
    let eig = rho.eig();
    let v0 = eig.vector(0);
    let v1 = eig.vector(1);
    let lambda = eig.eigenvalues[1].max(0.0) / (eig.eigenvalues[0] + eig.eigenvalues[1].max(0.0));
    let p0v = ComplexMatrix::projector(&v0);
    let p1v = ComplexMatrix::projector(&v1);
    let family = |p: f64| &p0v.scale_real(1.0 - p) + &p1v.scale_real(p);
    let state_at = |p: f64| BipartiteState::new(family(p), 2, 2);
    let g = |p: f64| {
        let m = family(p);
        let rb = partial_trace(&m, &[2, 2], &[1]).expect("dimensions");
        lambda_max(&rb) - p.max(1.0 - p)
    };
    if spectrum_condition(rho) {
        let ext = construct_pure_extension(rho)?;
        return Ok(Rank2Decomposition {
            lambda,
            p0: lambda,
            p1: lambda,
            q: 0.0,
            state0: rho.clone(),
            state1: rho.clone(),
            extension0: ext.clone(),
            extension1: ext,
        });
    }
    // g ≤ 0 at both ends, g ≥ 0 at λ.
    let root = |mut neg: f64, mut pos: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (neg + pos);
            if mid == neg || mid == pos {
                break;
            }
            if g(mid) >= 0.0 {
                pos = mid;
            } else {
                neg = mid;
            }
        }
        pos
    };
    let p0 = root(0.0, lambda);
    let p1 = root(1.0, lambda);
    let q = if p1 > p0 { (lambda - p0) / (p1 - p0) } else { 0.0 };
    let state0 = state_at(p0)?;
    let state1 = state_at(p1)?;
    let extension0 = construct_pure_extension(&state0)?;
    let extension1 = construct_pure_extension(&state1)?;
    Ok(Rank2Decomposition {
        lambda,
        p0,
        p1,
        q,
        state0,
        state1,
        extension0,
        extension1,
    })
}

/// A Bell-diagonal state `p_I |Φ⁺⟩⟨Φ⁺| + p_X |Ψ⁺⟩⟨Ψ⁺| + p_Y |Ψ⁻⟩⟨Ψ⁻| + p_Z |Φ⁻⟩⟨Φ⁻|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellDiagonalParams {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub alpha: [f64; 4],
}

impl BellDiagonalParams {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&x| x < -1e-12 || !x.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!("{p:?} is not a probability vector")));
        }
        let [p_i, p_x, p_y, p_z] = p.map(|x| x.max(0.0));
        Ok(BellDiagonalParams {
            p_i,
            p_x,
            p_y,
            p_z,
            alpha: [
                p_i + p_x + p_y + p_z,
                p_i - p_x - p_y + p_z,
                SQRT_2 * (p_i - p_z),
                SQRT_2 * (p_x - p_y),
            ],
        })
    }

    pub fn werner(p: f64) -> Result<Self> {
        let r = (1.0 - p) / 4.0;
        Self::new([p + r, r, r, r])
    }

    pub fn probabilities(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_y, self.p_z]
    }

    pub fn state(&self) -> BipartiteState {
        use crate::gallery::{bell_vector, Bell};
        let mut m = ComplexMatrix::zeros(4, 4);
        for (w, b) in [
            (self.p_i, Bell::PhiPlus),
            (self.p_x, Bell::PsiPlus),
            (self.p_y, Bell::PsiMinus),
            (self.p_z, Bell::PhiMinus),
        ] {
            m += &ComplexMatrix::projector(&bell_vector(b)).scale_real(w);
        }
        BipartiteState::new(m, 2, 2).expect("valid mixture")
    }

    /// Eigenvalues of a state with maximally mixed marginals, which is
    /// Bell-diagonal in a suitable local basis.
    pub fn from_maximally_mixed_marginals(rho: &BipartiteState) -> Option<Self> {
        if rho.dims() != (2, 2) {
            return None;
        }
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        if rho.reduced_a().max_diff(&half) > 1e-9 || rho.reduced_b().max_diff(&half) > 1e-9 {
            return None;
        }
        let e = rho.eig().eigenvalues;
        let s: f64 = e.iter().map(|x| x.max(0.0)).sum();
        Self::new([e[0], e[1], e[2], e[3]].map(|x| x.max(0.0) / s)).ok()
    }
}

/// `(α₁, α₂, α₃)`.
pub fn bell_alphas(p: &BellDiagonalParams) -> [f64; 3] {
    [p.alpha[1], p.alpha[2], p.alpha[3]]
}

/// Left-hand sides of the three inequalities, any one of which being
/// non-negative is equivalent to a symmetric extension.
pub fn bell_inequalities(p: &BellDiagonalParams) -> [f64; 3] {
    let [a1, a2, a3] = bell_alphas(p);
    let d = a2 * a2 - a3 * a3;
    [
        4.0 * a1 * d - d * d - 4.0 * a1 * a1 * (a2 * a2 + a3 * a3),
        d - 2.0 * SQRT_2 * a1 * a2.abs(),
        -d + 2.0 * SQRT_2 * a1 * a3.abs(),
    ]
}

pub fn bell_extendible(p: &BellDiagonalParams) -> bool {
    bell_inequalities(p).iter().any(|&v| v >= -INEQUALITY_SLACK)
}

/// `4√det ρ − (tr ρ² − 1/2)` for the Bell-diagonal state.
pub fn bell_conjecture_margin(p: &BellDiagonalParams) -> f64 {
    let q = p.probabilities();
    let det: f64 = q.iter().product();
    let purity: f64 = q.iter().map(|x| x * x).sum();
    4.0 * det.max(0.0).sqrt() - (purity - 0.5)
}

pub fn bell_conjecture_form(p: &BellDiagonalParams) -> bool {
    bell_conjecture_margin(p) >= -INEQUALITY_SLACK
}

/// Agreement count between `bell_extendible` and `bell_conjecture_form`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EquivalenceReport {
    pub samples: usize,
    /// Points with either margin within the boundary band.
    pub boundary: usize,
    pub disagreements: usize,
    pub first_disagreement: Option<[f64; 4]>,
}

const BELL_BAND: f64 = 1e-9;

pub fn bell_equivalence_on<'a>(points: impl IntoIterator<Item = &'a BellDiagonalParams>) -> EquivalenceReport {
    let mut report = EquivalenceReport::default();
    for p in points {
        report.samples += 1;
        let ineq = bell_inequalities(p);
        let m1 = ineq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let m2 = bell_conjecture_margin(p);
        if m1.abs() < BELL_BAND || m2.abs() < BELL_BAND {
            report.boundary += 1;
            continue;
        }
        if (m1 >= 0.0) != (m2 >= 0.0) {
            report.disagreements += 1;
            report.first_disagreement.get_or_insert(p.probabilities());
        }
    }
    report
}

/// Samples `n` uniform probability vectors and compares the two criteria.
pub fn bell_equivalence_check(n: usize, seed: u64) -> EquivalenceReport {
    let mut rng = Rng::seed(seed);
    let points: Vec<BellDiagonalParams> = (0..n)
        .map(|_| {
            let s = rng.simplex(4);
            BellDiagonalParams::new([s[0], s[1], s[2], s[3]]).expect("simplex point")
        })
        .collect();
    bell_equivalence_on(&points)
}

/// A state diagonal in the product basis plus couplings `x` between
/// `|00⟩, |11⟩` and `y` between `|01⟩, |10⟩`, with `p₁` largest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZCorrParams {
    pub p: [f64; 4],
    pub x: f64,
    pub y: f64,
}

impl ZCorrParams {
    pub fn new(p: [f64; 4], x: f64, y: f64) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&v| v < -1e-12 || !v.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!("{p:?} is not a probability vector")));
        }
        let p = p.map(|v| v.max(0.0));
        if p[0] < p[1].max(p[2]).max(p[3]) {
            return Err(Error::NotCanonical(format!("p1 = {} is not the largest", p[0])));
        }
        if x < 0.0 || y < 0.0 {
            return Err(Error::OutOfRange("x and y must be non-negative".into()));
        }
        if x > (p[0] * p[3]).sqrt() + 1e-12 || y > (p[1] * p[2]).sqrt() + 1e-12 {
            return Err(Error::OutOfRange(format!(
                "x = {x}, y = {y} violate positivity (bounds {}, {})",
                (p[0] * p[3]).sqrt(),
                (p[1] * p[2]).sqrt()
            )));
        }
        Ok(ZCorrParams { p, x, y })
    }

    pub fn state(&self) -> Result<BipartiteState> {
        let mut m = ComplexMatrix::diag_real(&self.p);
        m[(0, 3)] = C64::new(self.x, 0.0);
        m[(3, 0)] = C64::new(self.x, 0.0);
        m[(1, 2)] = C64::new(self.y, 0.0);
        m[(2, 1)] = C64::new(self.y, 0.0);
        BipartiteState::new(m, 2, 2)
    }

    /// Recognizes the pattern in the product basis, bringing it to canonical
    /// form by local bit flips and diagonal phases.
    pub fn from_state(rho: &BipartiteState) -> Option<Self> {
        if rho.dims() != (2, 2) {
            return None;
        }
        let m = rho.matrix();
        for i in 0..4 {
            for j in 0..4 {
                let allowed = i == j || i + j == 3;
                if !allowed && m[(i, j)].norm() > 1e-12 {
                    return None;
                }
            }
        }
        let d = [0, 1, 2, 3].map(|i| m[(i, i)].re);
        let (x, y) = (m[(0, 3)].norm(), m[(1, 2)].norm());
        // identity, X⊗X, X⊗I, I⊗X
        let candidates = [
            ([d[0], d[1], d[2], d[3]], x, y),
            ([d[3], d[2], d[1], d[0]], x, y),
            ([d[2], d[3], d[0], d[1]], y, x),
            ([d[1], d[0], d[3], d[2]], y, x),
        ];
        let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        candidates
            .iter()
            .filter(|c| c.0[0] >= max)
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .and_then(|&(p, x, y)| {
                let s: f64 = p.iter().sum();
                ZCorrParams::new(p.map(|v| v / s), x.min((p[0] * p[3]).sqrt()), y.min((p[1] * p[2]).sqrt())).ok()
            })
    }

    /// Largest `x` reachable from the extension at `(s, t)`.
    pub fn x_bound(&self, s: f64, t: f64) -> f64 {
        zcorr_x_bound(&self.p, s, t)
    }

    /// Largest `y` reachable from the extension at `(s, t)`.
    pub fn y_bound(&self, s: f64, t: f64) -> f64 {
        let p = &self.p;
        s.max(0.0).sqrt() * (p[1] - t).max(0.0).sqrt() + t.max(0.0).sqrt() * (p[2] - s).max(0.0).sqrt()
    }

    /// Upper ends of the `(s, t)` rectangle.
    pub fn ranges(&self) -> (f64, f64) {
        (self.p[2].min(self.p[3]), self.p[1])
    }
}

fn zcorr_x_bound(p: &[f64; 4], s: f64, t: f64) -> f64 {
    s.max(0.0).sqrt() * (p[0] - t).max(0.0).sqrt() + t.max(0.0).sqrt() * (p[3] - s).max(0.0).sqrt()
}

fn check_canonical(p: &[f64; 4]) -> Result<()> {
    if p[0] < p[1].max(p[2]).max(p[3]) {
        return Err(Error::NotCanonical(format!("p1 = {} is not the largest", p[0])));
    }
    Ok(())
}

/// The closed-form maximal `x` at `y = 0`.
pub fn zcorr_bound_y0(p: [f64; 4]) -> Result<f64> {
    check_canonical(&p)?;
    let [p1, p2, p3, p4] = p;
    if p1 * p3 + p2 * p4 >= p1 * p4 {
        Ok((p1 * p4).sqrt())
    } else {
        Ok(p3.sqrt() * (p1 - p2).max(0.0).sqrt() + p2.sqrt() * (p4 - p3).max(0.0).sqrt())
    }
}

const GRID: usize = 200;
const REFINEMENTS: usize = 3;

/// Maximizes `f` over `[0, s_max] × [0, t_max]`: a uniform grid, local
/// refinements shrinking the step tenfold, then coordinate golden-section
/// sweeps that only accept improvements.
fn maximize_on_rectangle(f: impl Fn(f64, f64) -> f64, s_max: f64, t_max: f64) -> (f64, f64, f64) {
    let mut best = (0.0, 0.0, f(0.0, 0.0));
    let consider = |s: f64, t: f64, best: &mut (f64, f64, f64)| {
        let v = f(s, t);
        if v > best.2 {
            *best = (s, t, v);
        }
    };
    let (mut hs, mut ht) = (s_max / (GRID - 1) as f64, t_max / (GRID - 1) as f64);
    for i in 0..GRID {
        for j in 0..GRID {
            consider(i as f64 * hs, j as f64 * ht, &mut best);
        }
    }
    for _ in 0..REFINEMENTS {
        let (cs, ct) = (best.0, best.1);
        let (ns, nt) = (hs / 10.0, ht / 10.0);
        for i in -10..=10 {
            for j in -10..=10 {
                let s = (cs + i as f64 * ns).clamp(0.0, s_max);
                let t = (ct + j as f64 * nt).clamp(0.0, t_max);
                consider(s, t, &mut best);
            }
        }
        hs = ns;
        ht = nt;
    }
    for _ in 0..30 {
        let before = best.2;
        let t = best.1;
        let s = golden(|s| f(s, t), 0.0, s_max);
        consider(s, t, &mut best);
        let s = best.0;
        let t = golden(|t| f(s, t), 0.0, t_max);
        consider(s, t, &mut best);
        if best.2 - before < 1e-15 {
            break;
        }
    }
    best
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid-maximized `x` bound at `y = 0`, with its maximizer `(s, t)`.
pub fn zcorr_grid_max_x(p: [f64; 4]) -> Result<(f64, f64, f64)> {
    check_canonical(&p)?;
    let (s_max, t_max) = (p[2].min(p[3]), p[1]);
    let (s, t, v) = maximize_on_rectangle(|s, t| zcorr_x_bound(&p, s, t), s_max, t_max);
    Ok((v, s, t))
}

const ZCORR_MARGIN: f64 = 1e-9;

/// A point `(s, t)` at which both coupling bounds hold, if one exists.
pub fn zcorr_witness(z: &ZCorrParams) -> Result<Option<(f64, f64)>> {
    check_canonical(&z.p)?;
    let (s_max, t_max) = z.ranges();
    let ok = |s: f64, t: f64| z.x_bound(s, t) >= z.x - ZCORR_MARGIN && z.y_bound(s, t) >= z.y - ZCORR_MARGIN;
    let [p1, p2, p3, p4] = z.p;
    let mut candidates = vec![(0.0, 0.0), (p3.min(p4), p2)];
    // Both Cauchy–Schwarz bounds saturated simultaneously.
    let det = p1 * p3 - p2 * p4;
    if det.abs() > 1e-15 {
        candidates.push((p3 * p4 * (p1 - p2) / det, p1 * p2 * (p3 - p4) / det));
    }
    // Saturating the x bound alone along `p₁ s + p₄ t = p₁ p₄`.
    if p1 > 0.0 {
        let s = s_max;
        candidates.push((s, p4 * (1.0 - s / p1)));
    }
    for (s, t) in candidates {
        if (0.0..=s_max).contains(&s) && (0.0..=t_max).contains(&t) && ok(s, t) {
            return Ok(Some((s, t)));
        }
    }
    let (s, t, v) = maximize_on_rectangle(
        |s, t| (z.x_bound(s, t) - z.x).min(z.y_bound(s, t) - z.y),
        s_max,
        t_max,
    );
    Ok((v >= -ZCORR_MARGIN).then_some((s, t)))
}

/// Whether the Z-correlated state has a symmetric extension.
pub fn zcorr_extendible(z: &ZCorrParams) -> Result<bool> {
    check_canonical(&z.p)?;
    if z.x == 0.0 && z.y == 0.0 || z.p[2] >= z.p[3] {
        return Ok(true);
    }
    if z.y == 0.0 {
        return Ok(z.x <= zcorr_bound_y0(z.p)? + ZCORR_MARGIN);
    }
    Ok(zcorr_witness(z)?.is_some())
}

/// The explicit rank-2 extension at `(s, t)`, mixed with its sign-flipped
/// local-unitary images to lower `x` and `y` to the requested values.
pub fn zcorr_build_extension(z: &ZCorrParams, s: f64, t: f64) -> Result<TripartiteExtension> {
    let (s_max, t_max) = z.ranges();
    let tol = 1e-12;
    if !(-tol..=s_max + tol).contains(&s) || !(-tol..=t_max + tol).contains(&t) {
        return Err(Error::OutOfRange(format!(
            "(s, t) = ({s}, {t}) outside [0, {s_max}] x [0, {t_max}]"
        )));
    }
    let (s, t) = (s.clamp(0.0, s_max), t.clamp(0.0, t_max));
    let (xs, ys) = (z.x_bound(s, t), z.y_bound(s, t));
    if z.x > xs + ZCORR_MARGIN || z.y > ys + ZCORR_MARGIN {
        return Err(Error::OutOfRange(format!(
            "couplings ({}, {}) exceed the bounds ({xs}, {ys}) at (s, t) = ({s}, {t})",
            z.x, z.y
        )));
    }
    let [p1, p2, p3, p4] = z.p;
    let r = |v: f64| C64::new(v.max(0.0).sqrt(), 0.0);
    let idx = |a: usize, b: usize, bp: usize| a * 4 + b * 2 + bp;
    let mut v1 = vec![ZERO; 8];
    v1[idx(0, 0, 0)] = r(p1 - t);
    v1[idx(0, 1, 1)] = r(p2 - t);
    v1[idx(1, 0, 1)] = r(s);
    v1[idx(1, 1, 0)] = r(s);
    let mut v2 = vec![ZERO; 8];
    v2[idx(0, 0, 1)] = r(t);
    v2[idx(0, 1, 0)] = r(t);
    v2[idx(1, 0, 0)] = r(p3 - s);
    v2[idx(1, 1, 1)] = r(p4 - s);
    let saturated = &ComplexMatrix::projector(&v1) + &ComplexMatrix::projector(&v2);

    let ratio = |target: f64, sat: f64| if sat > 1e-15 { (target / sat).clamp(-1.0, 1.0) } else { 0.0 };
    let (u, v) = (ratio(z.x, xs), ratio(z.y, ys));
    let sgate = ComplexMatrix::from_vec(2, 2, vec![ONE, ZERO, ZERO, C64::new(0.0, 1.0)]).unwrap();
    let id = ComplexMatrix::identity(2);
    let sz = pauli(3);
    // (sign of x, sign of y) → (U_A, U_B)
    let flips = [
        (1.0, 1.0, id.clone(), id.clone()),
        (-1.0, 1.0, sgate.clone(), sgate.clone()),
        (1.0, -1.0, sgate.clone(), sgate.adjoint()),
        (-1.0, -1.0, id.clone(), sz),
    ];
    let mut sigma = ComplexMatrix::zeros(8, 8);
    for (sx, sy, ua, ub) in flips {
        let w = 0.25 * (1.0 + sx * u) * (1.0 + sy * v);
        if w == 0.0 {
            continue;
        }
        let full = tensor(&ua, &tensor(&ub, &ub));
        sigma += &full.sandwich(&saturated).scale_real(w);
    }
    TripartiteExtension::new(sigma, 2, 2)
}

/// Decomposition `λ |ψ₀ b₀⟩⟨ψ₀ b₀| + (1 − λ) |ψ₁ b₁⟩⟨ψ₁ b₁|` with `⟨b₀|b₁⟩ = 0`.
#[derive(Clone, Debug)]
pub struct SeparableWitness {
    pub lambda: f64,
    pub psi0: Vec<C64>,
    pub psi1: Vec<C64>,
    pub b0: Vec<C64>,
    pub b1: Vec<C64>,
}

impl SeparableWitness {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let t0 = ComplexMatrix::projector(&crate::linalg::tensor_vec(&self.psi0, &self.b0));
        let t1 = ComplexMatrix::projector(&crate::linalg::tensor_vec(&self.psi1, &self.b1));
        &t0.scale_real(self.lambda) + &t1.scale_real(1.0 - self.lambda)
    }
}

#[derive(Clone, Debug)]
pub enum PureExtendibleClass {
    /// Not a mixture of other pure-extendible states.
    Extremal,
    SeparableNonExtremal(SeparableWitness),
}

/// Largest Schmidt factors `(a, b)` of a two-qubit vector, `v ≈ s · a ⊗ b`.
fn schmidt_factors(v: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let m = ComplexMatrix::from_vec(2, 2, v.to_vec()).expect("four amplitudes");
    let d = svd(&m);
    let a = d.u.column(0);
    let b: Vec<C64> = d.v.column(0).iter().map(|z| z.conj()).collect();
    (a, b)
}

fn det2(v: &[C64]) -> C64 {
    v[0] * v[3] - v[1] * v[2]
}

/// Separates mixed two-qubit pure-extendible states into extremal ones and
/// separable mixtures of two product states.
pub fn classify_pure_extendible(rho: &BipartiteState) -> Result<PureExtendibleClass> {
    require_two_qubits(rho)?;
    let dev = spectrum_deviation(rho);
    if dev > SPECTRUM_TOL {
        return Err(Error::PreconditionFailed(format!(
            "spectrum condition fails (deviation {dev:.3e})"
        )));
    }
    if rho.purity() >= 1.0 - 1e-9 {
        return Err(Error::PreconditionFailed("state is pure".into()));
    }
    let pt = partial_transpose(rho.matrix(), [2, 2], Subsystem::B)?;
    if hermitian_eig(&pt.hermitian_part())?.lambda_min() < -1e-9 {
        return Ok(PureExtendibleClass::Extremal);
    }
    let witness = separable_witness(rho)?;
    let err = 0.5 * trace_norm(&(&witness.reconstruct() - rho.matrix()));
    if err > 1e-8 {
        return Err(Error::PreconditionFailed(format!(
            "no two-term product decomposition found (residual {err:.3e})"
        )));
    }
    Ok(PureExtendibleClass::SeparableNonExtremal(witness))
}

fn separable_witness(rho: &BipartiteState) -> Result<SeparableWitness> {
    let eig = rho.eig();
    let v0 = eig.vector(0);
    let v1 = eig.vector(1);
    // det(α M₀ + β M₁) = α² d₀ + α β x + β² d₁
    let d0 = det2(&v0);
    let d1 = det2(&v1);
    let sum: Vec<C64> = v0.iter().zip(&v1).map(|(a, b)| a + b).collect();
    let x = det2(&sum) - d0 - d1;
    if d0.norm().max(d1.norm()).max(x.norm()) < 1e-10 {
        // Every vector in the support is a product: ρ = |ψ⟩⟨ψ| ⊗ ρ_B.
        let (a, _) = schmidt_factors(&v0);
        let eb = hermitian_eig(&rho.reduced_b())?;
        let w = eb.eigenvalues[0].clamp(0.0, 1.0);
        return Ok(SeparableWitness {
            lambda: w,
            psi0: a.clone(),
            psi1: a,
            b0: eb.vector(0),
            b1: eb.vector(1),
        });
    }
    let disc = (x * x - d0 * d1 * 4.0).sqrt();
    let disc = if (x.conj() * disc).re >= 0.0 { disc } else { -disc };
    let q = -(x + disc) * 0.5;
    let pairs = [(q, d0), (d1, q)];
    let mut terms = Vec::new();
    for (alpha, beta) in pairs {
        let mut u: Vec<C64> = v0.iter().zip(&v1).map(|(a, b)| a * alpha + b * beta).collect();
        normalize(&mut u);
        let (a, b) = schmidt_factors(&u);
        let w = inner_product(&u, &rho.matrix().mul_vec(&u)).re;
        terms.push((w, a, b));
    }
    let total = terms[0].0 + terms[1].0;
    let (t1, t0) = (terms.pop().unwrap(), terms.pop().unwrap());
    Ok(SeparableWitness {
        lambda: t0.0 / total,
        psi0: t0.1,
        psi1: t1.1,
        b0: t0.2,
        b1: t1.2,
    })
}

/// Non-zero spectrum of the two-qubit state, used in reports.
pub fn global_and_local_lambda_max(rho: &BipartiteState) -> (f64, f64) {
    let g = nonzero_eigenvalues(&rho.eig().eigenvalues);
    (g.first().copied().unwrap_or(0.0), lambda_max(&rho.reduced_b()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{bell_state, Bell};
    use crate::linalg::tensor_vec;
    use crate::random::random_unitary;
    use crate::states::is_symmetric_extension;

    fn check_extension(rho: &BipartiteState) -> PureTripartite {
        let psi = construct_pure_extension(rho).unwrap();
        let ext = psi.to_extension().unwrap();
        let cert = ext.certify(rho).unwrap();
        assert!(cert.symmetry_residual <= 1e-8, "symmetry {}", cert.symmetry_residual);
        assert!(cert.reduction_residual <= 1e-8, "reduction {}", cert.reduction_residual);
        psi
    }

    #[test]
    fn lift_matches_rotation() {
        let mut rng = Rng::seed(11);
        for _ in 0..50 {
            let u = random_unitary(2, &mut rng);
            let r = rotation_of(&u);
            let w = lift_rotation(&r);
            let r2 = rotation_of(&w);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((r[i][j] - r2[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn so3_svd_diagonalizes() {
        let mut rng = Rng::seed(12);
        for _ in 0..50 {
            let t: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gaussian()));
            let (o1, o2) = so3_svd(&t);
            assert!((det3(&transpose3(&o1)) - 1.0).abs() < 1e-12);
            assert!((det3(&transpose3(&o2)) - 1.0).abs() < 1e-12);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        let d: f64 = (0..3)
                            .map(|k| (0..3).map(|l| o1[i][k] * t[k][l] * o2[j][l]).sum::<f64>())
                            .sum();
                        assert!(d.abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn product_state_extension() {
        let mut rng = Rng::seed(13);
        let a = rng.random_pure(2);
        let b = rng.random_pure(2);
        let rho = BipartiteState::from_pure(&tensor_vec(&a, &b), 2, 2).unwrap();
        let psi = check_extension(&rho);
        let expected = tensor_vec(&a, &tensor_vec(&b, &b));
        assert!((inner_product(&expected, &psi.amplitudes).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn classical_correlation_extension() {
        let rho = BipartiteState::new(ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]), 2, 2).unwrap();
        check_extension(&rho);
    }

    #[test]
    fn roundtrip_on_random_pure_extendible_states() {
        let mut rng = Rng::seed(14);
        for _ in 0..300 {
            check_extension(&random_pure_extendible(&mut rng));
        }
    }

    #[test]
    fn roundtrip_with_maximally_mixed_marginal() {
        // |0⟩|Φ⁺⟩-type and mixtures of symmetric Bell pairs with A purifying them.
        let mut rng = Rng::seed(15);
        for _ in 0..50 {
            let w: f64 = rng.uniform();
            let phi_p = crate::gallery::bell_vector(Bell::PhiPlus);
            let phi_m = crate::gallery::bell_vector(Bell::PhiMinus);
            let mut v = tensor_vec(&[C64::new(w.sqrt(), 0.0), ZERO], &phi_p);
            let v2 = tensor_vec(&[ZERO, C64::new((1.0 - w).sqrt(), 0.0)], &phi_m);
            v.iter_mut().zip(&v2).for_each(|(a, b)| *a += b);
            let ua = random_unitary(2, &mut rng);
            let ub = random_unitary(2, &mut rng);
            let full = tensor(&ua, &tensor(&ub, &ub));
            let v = full.mul_vec(&v);
            let rho = BipartiteState::new(
                partial_trace(&ComplexMatrix::projector(&v), &[2, 2, 2], &[0, 1]).unwrap(),
                2,
                2,
            )
            .unwrap();
            check_extension(&rho);
        }
    }

    #[test]
    fn constructor_rejects_spectrum_mismatch() {
        assert!(matches!(
            construct_pure_extension(&bell_state(Bell::PhiPlus)),
            Err(Error::SpectrumMismatch(_))
        ));
        assert!(matches!(
            construct_pure_extension(&crate::gallery::example2_state()),
            Err(Error::WrongDimension(_))
        ));
    }

    #[test]
    fn conjecture_examples() {
        let mixed = BipartiteState::maximally_mixed(2, 2);
        assert!(check_conjecture(&mixed).unwrap());
        assert!((conjecture_margin(&mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(!check_conjecture(&bell_state(Bell::PhiPlus)).unwrap());
        let v = conjecture_verdict(&bell_state(Bell::PhiPlus)).unwrap();
        assert_eq!(v.regime, Regime::Rank2);
        assert!(v.regime.proven());
    }

    #[test]
    fn conjecture_werner_threshold_by_bisection() {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if check_conjecture(&crate::gallery::werner(mid).unwrap()).unwrap() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn conjecture_local_unitary_invariance() {
        let mut rng = Rng::seed(16);
        for _ in 0..100 {
            let rho = BipartiteState::new(rng.random_density(4, 4), 2, 2).unwrap();
            let ua = random_unitary(2, &mut rng);
            let ub = random_unitary(2, &mut rng);
            let m1 = conjecture_margin(&rho).unwrap();
            let m2 = conjecture_margin(&rho.local_unitary(&ua, &ub).unwrap()).unwrap();
            assert!((m1 - m2).abs() < 1e-9);
        }
    }

    #[test]
    fn regime_flags() {
        let w = crate::gallery::werner(0.5).unwrap();
        assert_eq!(conjecture_verdict(&w).unwrap().regime, Regime::BellDiagonal);
        let z = ZCorrParams::new([0.4, 0.3, 0.2, 0.1], 0.15, 0.0).unwrap();
        assert_eq!(conjecture_verdict(&z.state().unwrap()).unwrap().regime, Regime::ZCorrelatedY0);
        let mut rng = Rng::seed(17);
        let rho = BipartiteState::new(rng.random_density(4, 4), 2, 2).unwrap();
        assert_eq!(conjecture_verdict(&rho).unwrap().regime, Regime::Conjectured);
    }

    #[test]
    fn rank2_examples() {
        let classical = BipartiteState::new(ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]), 2, 2).unwrap();
        assert!(rank2_condition(&classical).unwrap());
        let mix = BipartiteState::mixture(&[
            (0.9, &bell_state(Bell::PhiPlus)),
            (0.1, &bell_state(Bell::PhiMinus)),
        ])
        .unwrap();
        assert!(!rank2_condition(&mix).unwrap());
        // Passes the eigenvalue test with a 4-dimensional A yet has no extension.
        let ex1 = crate::gallery::example1_state();
        assert!(rank2_condition(&ex1).unwrap());
        assert!(matches!(
            rank2_condition(&BipartiteState::maximally_mixed(2, 2)),
            Err(Error::WrongRank { found: 4, .. })
        ));
    }

    #[test]
    fn rank2_agrees_with_conjecture() {
        let mut rng = Rng::seed(18);
        for _ in 0..300 {
            let rho = BipartiteState::new(rng.random_density(4, 2), 2, 2).unwrap();
            let (g, l) = global_and_local_lambda_max(&rho);
            if (g - l).abs() < 1e-8 {
                continue;
            }
            assert_eq!(rank2_condition(&rho).unwrap(), check_conjecture(&rho).unwrap());
        }
    }

    #[test]
    fn rank2_decomposition_examples() {
        let classical = BipartiteState::new(ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]), 2, 2).unwrap();
        let d = rank2_decompose(&classical).unwrap();
        assert_eq!(d.q, 0.0);
        assert_eq!(d.p0, d.p1);
        assert!(d.reconstruction_residual(&classical) < 1e-8);
        let mut rng = Rng::seed(19);
        let mut done = 0;
        while done < 50 {
            let rho = BipartiteState::new(rng.random_density(4, 2), 2, 2).unwrap();
            if !rank2_condition(&rho).unwrap() {
                continue;
            }
            let d = rank2_decompose(&rho).unwrap();
            assert!(d.reconstruction_residual(&rho) < 1e-8);
            let ext = d.extension().unwrap();
            assert!(is_symmetric_extension(&ext, &rho, 1e-8).unwrap());
            done += 1;
        }
        let bell = bell_state(Bell::PhiPlus);
        assert!(rank2_decompose(&bell).is_err());
    }

    #[test]
    fn bell_alpha_examples() {
        let a = bell_alphas(&BellDiagonalParams::new([1.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!(a, [1.0, SQRT_2, 0.0]);
        let a = bell_alphas(&BellDiagonalParams::new([0.25; 4]).unwrap());
        assert_eq!(a, [0.0, 0.0, 0.0]);
        let a = bell_alphas(&BellDiagonalParams::new([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap());
        assert!((a[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((a[1] - SQRT_2 / 3.0).abs() < 1e-15);
        assert!(a[2].abs() < 1e-15);
    }

    #[test]
    fn bell_inequality_examples() {
        let mixed = BellDiagonalParams::new([0.25; 4]).unwrap();
        assert!(bell_extendible(&mixed) && bell_conjecture_form(&mixed));
        let p = BellDiagonalParams::new([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
        assert!((bell_inequalities(&p)[0] - 12.0 / 81.0).abs() < 1e-14);
        assert!(bell_extendible(&p) && bell_conjecture_form(&p));
        let pure = BellDiagonalParams::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(bell_inequalities(&pure).iter().all(|&v| v < 0.0));
        assert!(!bell_extendible(&pure) && !bell_conjecture_form(&pure));
    }

    #[test]
    fn bell_equivalence_small_batches() {
        let r = bell_equivalence_check(20_000, 1);
        assert_eq!(r.disagreements, 0);
        let r = bell_equivalence_on(&[BellDiagonalParams::new([0.25; 4]).unwrap()]);
        assert_eq!(r.disagreements, 0);
        let r = bell_equivalence_on(&[BellDiagonalParams::new([1.0, 0.0, 0.0, 0.0]).unwrap()]);
        assert_eq!(r.disagreements, 0);
        assert_eq!(r.boundary, 0);
    }

    #[test]
    fn bell_state_matches_conjecture_margin() {
        let mut rng = Rng::seed(20);
        for _ in 0..100 {
            let s = rng.simplex(4);
            let p = BellDiagonalParams::new([s[0], s[1], s[2], s[3]]).unwrap();
            let rho = p.state();
            let m = conjecture_margin(&rho).unwrap();
            let smallest = s.iter().copied().fold(1.0, f64::min);
            if smallest < 1e-6 {
                continue;
            }
            assert!((m - bell_conjecture_margin(&p)).abs() < 1e-9);
            let back = BellDiagonalParams::from_maximally_mixed_marginals(&rho).unwrap();
            assert_eq!(bell_extendible(&back), bell_extendible(&p));
        }
    }

    #[test]
    fn zcorr_examples() {
        let z = ZCorrParams::new([0.4, 0.3, 0.2, 0.1], 0.15, 0.0).unwrap();
        assert!((zcorr_bound_y0(z.p).unwrap() - 0.2).abs() < 1e-15);
        assert!(zcorr_extendible(&z).unwrap());
        let p = [0.7, 0.05, 0.05, 0.2];
        let b = zcorr_bound_y0(p).unwrap();
        let expected = 0.05_f64.sqrt() * 0.65_f64.sqrt() + 0.05_f64.sqrt() * 0.15_f64.sqrt();
        assert!((b - expected).abs() < 1e-15);
        assert!((b - 0.2668801041516433).abs() < 1e-15);
        let z = ZCorrParams::new(p, 0.27, 0.0).unwrap();
        assert!(!zcorr_extendible(&z).unwrap());
        let z = ZCorrParams::new(p, 0.0, 0.0).unwrap();
        assert!(zcorr_extendible(&z).unwrap());
        assert!(matches!(zcorr_bound_y0([0.1, 0.5, 0.2, 0.2]), Err(Error::NotCanonical(_))));
        assert_eq!(zcorr_bound_y0([0.8, 0.0, 0.0, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn zcorr_grid_matches_closed_form() {
        let mut rng = Rng::seed(21);
        for _ in 0..50 {
            let mut s = rng.simplex(4);
            let k = (0..4).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
            s.swap(0, k);
            let p = [s[0], s[1], s[2], s[3]];
            let (g, _, _) = zcorr_grid_max_x(p).unwrap();
            assert!((g - zcorr_bound_y0(p).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn zcorr_extension_examples() {
        let z = ZCorrParams::new([0.4, 0.3, 0.2, 0.1], 0.0, 0.0).unwrap();
        let e = zcorr_build_extension(&z, 0.0, 0.0).unwrap();
        let diag = ComplexMatrix::diag_real(&z.p);
        assert!(e.reduced_ab().max_diff(&diag) < 1e-15);
        let p = [0.7, 0.05, 0.05, 0.2];
        let base = ZCorrParams::new(p, 0.0, 0.0).unwrap();
        let (xs, ys) = (base.x_bound(0.05, 0.05), base.y_bound(0.05, 0.05));
        let z = ZCorrParams::new(p, xs, ys).unwrap();
        let e = zcorr_build_extension(&z, 0.05, 0.05).unwrap();
        assert!(is_symmetric_extension(&e, &z.state().unwrap(), 1e-8).unwrap());
        let b = zcorr_bound_y0(p).unwrap();
        let z = ZCorrParams::new(p, b, 0.0).unwrap();
        let e = zcorr_build_extension(&z, 0.05, 0.05).unwrap();
        assert!(is_symmetric_extension(&e, &z.state().unwrap(), 1e-8).unwrap());
        assert!(zcorr_build_extension(&z, 0.3, 0.0).is_err());
    }

    #[test]
    fn zcorr_witnesses_verify() {
        let mut rng = Rng::seed(22);
        let mut checked = 0;
        while checked < 40 {
            let mut s = rng.simplex(4);
            let k = (0..4).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
            s.swap(0, k);
            let p = [s[0], s[1], s[2], s[3]];
            let x = rng.uniform() * (p[0] * p[3]).sqrt();
            let y = rng.uniform() * (p[1] * p[2]).sqrt();
            let z = ZCorrParams::new(p, x, y).unwrap();
            if let Some((s, t)) = zcorr_witness(&z).unwrap() {
                let e = zcorr_build_extension(&z, s, t).unwrap();
                assert!(is_symmetric_extension(&e, &z.state().unwrap(), 1e-8).unwrap());
                checked += 1;
            }
        }
    }

    #[test]
    fn zcorr_recognition() {
        let z = ZCorrParams::new([0.4, 0.3, 0.2, 0.1], 0.15, 0.1).unwrap();
        let rho = z.state().unwrap();
        let x = crate::linalg::tensor(&pauli(1), &pauli(1));
        let flipped = BipartiteState::new(x.sandwich(rho.matrix()), 2, 2).unwrap();
        let back = ZCorrParams::from_state(&flipped).unwrap();
        assert!(back.p.iter().zip(&z.p).all(|(a, b)| (a - b).abs() < 1e-14));
        assert!((back.x - z.x).abs() < 1e-14 && (back.y - z.y).abs() < 1e-14);
        assert!(ZCorrParams::from_state(&BipartiteState::new(
            crate::random::Rng::seed(1).random_density(4, 4),
            2,
            2
        )
        .unwrap())
        .is_none());
    }

    #[test]
    fn classify_examples() {
        let mut rng = Rng::seed(23);
        let psi0 = rng.random_pure(2);
        let psi1 = rng.random_pure(2);
        let zero = vec![ONE, ZERO];
        let one = vec![ZERO, ONE];
        let m = &ComplexMatrix::projector(&tensor_vec(&psi0, &zero)).scale_real(0.3)
            + &ComplexMatrix::projector(&tensor_vec(&psi1, &one)).scale_real(0.7);
        let rho = BipartiteState::new(m, 2, 2).unwrap();
        match classify_pure_extendible(&rho).unwrap() {
            PureExtendibleClass::SeparableNonExtremal(w) => {
                assert!(0.5 * trace_norm(&(&w.reconstruct() - rho.matrix())) < 1e-8);
                let lam = if w.lambda < 0.5 { w.lambda } else { 1.0 - w.lambda };
                assert!((lam - 0.3).abs() < 1e-8);
            }
            other => panic!("unexpected {other:?}"),
        }
        let classical = BipartiteState::new(ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]), 2, 2).unwrap();
        assert!(matches!(
            classify_pure_extendible(&classical).unwrap(),
            PureExtendibleClass::SeparableNonExtremal(_)
        ));
        let mut found = false;
        for _ in 0..50 {
            let rho = random_pure_extendible(&mut rng);
            let pt = partial_transpose(rho.matrix(), [2, 2], Subsystem::B).unwrap();
            if hermitian_eig(&pt).unwrap().lambda_min() < -1e-6 {
                assert!(matches!(classify_pure_extendible(&rho).unwrap(), PureExtendibleClass::Extremal));
                found = true;
            }
        }
        assert!(found);
        assert!(classify_pure_extendible(&bell_state(Bell::PhiPlus)).is_err());
    }

    #[test]
    fn classify_product_times_mixed() {
        let mut rng = Rng::seed(24);
        let a = rng.random_pure(2);
        let rb = rng.random_density(2, 2);
        let rho = BipartiteState::new(tensor(&ComplexMatrix::projector(&a), &rb), 2, 2).unwrap();
        match classify_pure_extendible(&rho).unwrap() {
            PureExtendibleClass::SeparableNonExtremal(w) => {
                assert!(0.5 * trace_norm(&(&w.reconstruct() - rho.matrix())) < 1e-8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
