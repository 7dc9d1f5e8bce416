//! Bipartite states, extensions, and the spectral tests for pure extendibility.

use crate::error::{Error, Result};
use crate::linalg::{
    check_state, conjugate_by_swap, entropy_of, hermitian_eig, inner_product, nonzero_eigenvalues,
    partial_trace, singular_values, swap_vector, tensor, tensor_vec, trace_norm, vec_norm,
    ComplexMatrix, HermitianEigen, C64, ZERO,
};
use crate::random::Rng;

/// Two spectra match when they have equal length and differ by at most this.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// A filter "breaks" the spectrum condition beyond this deviation.
pub const FILTER_BREAK_TOL: f64 = 1e-6;
/// Strength of the random perturbation in `I + εG` filters.
pub const FILTER_EPSILON: f64 = 0.3;

/// A density matrix on `C^{d_A} ⊗ C^{d_B}`.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    matrix: ComplexMatrix,
    d_a: usize,
    d_b: usize,
}

impl BipartiteState {
    /// Validates Hermiticity, positivity (to −1e−9) and unit trace (to 1e−9).
    pub fn new(matrix: ComplexMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 || !matrix.is_square() || matrix.rows() != d_a * d_b {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dimensions {d_a}x{d_b}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_state(&matrix)?;
        Ok(BipartiteState {
            matrix: matrix.hermitian_part(),
            d_a,
            d_b,
        })
    }

    pub fn from_pure(v: &[C64], d_a: usize, d_b: usize) -> Result<Self> {
        let mut v = v.to_vec();
        let n = vec_norm(&v);
        if n == 0.0 {
            return Err(Error::NotAState("zero vector".into()));
        }
        v.iter_mut().for_each(|z| *z /= n);
        Self::new(ComplexMatrix::projector(&v), d_a, d_b)
    }

    pub fn maximally_mixed(d_a: usize, d_b: usize) -> Self {
        let n = d_a * d_b;
        BipartiteState {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            d_a,
            d_b,
        }
    }

    /// Convex combination `Σ w_i ρ_i`; weights are normalized.
    pub fn mixture(parts: &[(f64, &BipartiteState)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::PreconditionFailed("empty mixture".into()))?
            .1;
        let (d_a, d_b) = first.dims();
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
        for (w, s) in parts {
            if s.dims() != (d_a, d_b) {
                return Err(Error::DimensionMismatch("mixture of different dimensions".into()));
            }
            m += &s.matrix.scale_real(*w / total);
        }
        Self::new(m, d_a, d_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn reduced_a(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, &[self.d_a, self.d_b], &[0]).expect("dimensions validated")
    }

    pub fn reduced_b(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, &[self.d_a, self.d_b], &[1]).expect("dimensions validated")
    }

    pub fn eig(&self) -> HermitianEigen {
        hermitian_eig(&self.matrix).expect("validated state is Hermitian")
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_values(&self.eig().eigenvalues)
    }

    pub fn local_spectrum(&self) -> Spectrum {
        Spectrum::from_values(&hermitian_eig(&self.reduced_b()).expect("Hermitian").eigenvalues)
    }

    pub fn rank(&self) -> usize {
        self.eig().rank()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn trace_distance(&self, other: &BipartiteState) -> f64 {
        0.5 * trace_norm(&(&self.matrix - &other.matrix))
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn local_unitary(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<Self> {
        if ua.rows() != self.d_a || ub.rows() != self.d_b {
            return Err(Error::DimensionMismatch("local unitary dimensions".into()));
        }
        let u = tensor(ua, ub);
        Self::new(u.sandwich(&self.matrix), self.d_a, self.d_b)
    }
}

/// Non-zero eigenvalues in non-increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub lambda_max: f64,
}

impl Spectrum {
    fn from_values(eigenvalues: &[f64]) -> Self {
        let values = nonzero_eigenvalues(eigenvalues);
        let lambda_max = values.first().copied().unwrap_or(0.0);
        Spectrum { values, lambda_max }
    }

    /// Largest elementwise deviation; infinite when the lengths differ.
    pub fn deviation(&self, other: &Spectrum) -> f64 {
        if self.values.len() != other.values.len() {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn matches(&self, other: &Spectrum) -> bool {
        self.deviation(other) <= SPECTRUM_TOL
    }
}

/// Non-zero spectrum of a density matrix.
pub fn spectrum(rho: &ComplexMatrix) -> Result<Spectrum> {
    let eig = check_state(rho)?;
    Ok(Spectrum::from_values(&eig.eigenvalues))
}

/// `spec(ρ_AB) − spec(ρ_B)` in the max norm (infinite on length mismatch).
pub fn spectrum_deviation(rho: &BipartiteState) -> f64 {
    rho.spectrum().deviation(&rho.local_spectrum())
}

/// Whether the global and local (`B`) non-zero spectra coincide — necessary
/// for a pure symmetric extension, and sufficient for two qubits.
pub fn spectrum_condition(rho: &BipartiteState) -> bool {
    spectrum_deviation(rho) <= SPECTRUM_TOL
}

/// `(M ⊗ I) ρ (M ⊗ I)†` before normalization.
#[derive(Clone, Debug)]
pub struct FilteredState {
    pub matrix: ComplexMatrix,
    pub d_a: usize,
    pub d_b: usize,
    /// `tr[(M ⊗ I) ρ (M ⊗ I)†]`.
    pub probability: f64,
}

impl FilteredState {
    pub fn normalized(&self) -> Result<BipartiteState> {
        BipartiteState::new(self.matrix.scale_real(1.0 / self.probability), self.d_a, self.d_b)
    }
}

/// Applies the local filter `M` on `A`.
pub fn apply_filter_a(rho: &BipartiteState, m: &ComplexMatrix) -> Result<FilteredState> {
    let (d_a, d_b) = rho.dims();
    if m.cols() != d_a {
        return Err(Error::DimensionMismatch(format!(
            "filter with {} columns on a {d_a}-dimensional system",
            m.cols()
        )));
    }
    let op = tensor(m, &ComplexMatrix::identity(d_b));
    let out = op.sandwich(rho.matrix()).hermitian_part();
    let probability = out.trace().re;
    if probability < 1e-12 {
        return Err(Error::ZeroProbability);
    }
    Ok(FilteredState {
        matrix: out,
        d_a: m.rows(),
        d_b,
        probability,
    })
}

/// Random near-identity filters `I + εG` with `G` complex Gaussian,
/// redrawn until the smallest singular value exceeds 1e−6.
pub fn random_filters(d_a: usize, count: usize, seed: u64) -> Vec<ComplexMatrix> {
    let mut rng = Rng::seed(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = rng.gaussian_matrix(d_a, d_a);
        let m = &ComplexMatrix::identity(d_a) + &g.scale_real(FILTER_EPSILON);
        let smin = singular_values(&m).last().copied().unwrap_or(0.0);
        if smin > 1e-6 {
            out.push(m);
        }
    }
    out
}

/// One-sided probe for pure extendibility: `false` means some invertible
/// filter on `A` broke the spectrum condition, so `ρ` has no pure symmetric
/// extension. `true` is only "consistent with" pure extendibility.
pub fn filter_probe(rho: &BipartiteState, trials: usize, seed: u64) -> bool {
    filter_probe_with(rho, random_filters(rho.d_a(), trials, seed))
}

pub fn filter_probe_with(rho: &BipartiteState, filters: impl IntoIterator<Item = ComplexMatrix>) -> bool {
    if !spectrum_condition(rho) {
        return false;
    }
    for m in filters {
        let Ok(filtered) = apply_filter_a(rho, &m) else {
            continue;
        };
        let Ok(state) = filtered.normalized() else {
            continue;
        };
        if spectrum_deviation(&state) > FILTER_BREAK_TOL {
            return false;
        }
    }
    true
}

/// A state on `A ⊗ B ⊗ B'` with `d_B' = d_B`.
#[derive(Clone, Debug)]
pub struct TripartiteExtension {
    matrix: ComplexMatrix,
    d_a: usize,
    d_b: usize,
    symmetry_residual: f64,
}

/// Residuals of a candidate extension against a target state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    /// `‖σ − PσP†‖_F`.
    pub symmetry_residual: f64,
    /// `‖tr_B' σ − ρ‖₁`.
    pub reduction_residual: f64,
}

impl TripartiteExtension {
    pub fn new(matrix: ComplexMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 || !matrix.is_square() || matrix.rows() != d_a * d_b * d_b {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dimensions {d_a}x{d_b}x{d_b}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_state(&matrix)?;
        let matrix = matrix.hermitian_part();
        let symmetry_residual = (&matrix - &conjugate_by_swap(&matrix, d_b)).frobenius_norm();
        Ok(TripartiteExtension {
            matrix,
            d_a,
            d_b,
            symmetry_residual,
        })
    }

    pub fn from_pure(v: &[C64], d_a: usize, d_b: usize) -> Result<Self> {
        let mut v = v.to_vec();
        let n = vec_norm(&v);
        if n == 0.0 {
            return Err(Error::NotAState("zero vector".into()));
        }
        v.iter_mut().for_each(|z| *z /= n);
        Self::new(ComplexMatrix::projector(&v), d_a, d_b)
    }

    /// Convex combination `Σ w_i σ_i`; weights are normalized.
    pub fn mixture(parts: &[(f64, &TripartiteExtension)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::PreconditionFailed("empty mixture".into()))?
            .1;
        let (d_a, d_b) = first.dims();
        let n = first.matrix.rows();
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let mut m = ComplexMatrix::zeros(n, n);
        for (w, s) in parts {
            if s.dims() != (d_a, d_b) {
                return Err(Error::DimensionMismatch("mixture of different dimensions".into()));
            }
            m += &s.matrix.scale_real(*w / total);
        }
        Self::new(m, d_a, d_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.symmetry_residual
    }

    /// `tr_B' σ`.
    pub fn reduced_ab(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, &[self.d_a, self.d_b, self.d_b], &[0, 1]).expect("validated")
    }

    pub fn reduced_ab_prime(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, &[self.d_a, self.d_b, self.d_b], &[0, 2]).expect("validated")
    }

    pub fn reduction_residual(&self, rho: &BipartiteState) -> Result<f64> {
        if rho.dims() != self.dims() {
            return Err(Error::DimensionMismatch(format!(
                "extension of a {}x{} state checked against a {}x{} state",
                self.d_a,
                self.d_b,
                rho.d_a(),
                rho.d_b()
            )));
        }
        Ok(trace_norm(&(&self.reduced_ab() - rho.matrix())))
    }

    pub fn certify(&self, rho: &BipartiteState) -> Result<Certificate> {
        Ok(Certificate {
            symmetry_residual: self.symmetry_residual,
            reduction_residual: self.reduction_residual(rho)?,
        })
    }
}

/// Whether `σ` is a valid symmetric extension of `ρ` within `tol`.
pub fn is_symmetric_extension(sigma: &TripartiteExtension, rho: &BipartiteState, tol: f64) -> Result<bool> {
    let cert = sigma.certify(rho)?;
    Ok(cert.symmetry_residual <= tol && cert.reduction_residual <= tol)
}

/// One term `λ |φ⟩⟨φ|` of a swap-adapted spectral decomposition.
#[derive(Clone, Debug)]
pub struct SymmetricTerm {
    pub weight: f64,
    pub vector: Vec<C64>,
    /// `+1` if `P|φ⟩ = |φ⟩`, `−1` if `P|φ⟩ = −|φ⟩`.
    pub parity: i8,
}

const CLUSTER_GAP: f64 = 1e-9;

/// Spectral decomposition of a swap-symmetric `σ` whose eigenvectors are
/// also eigenvectors of `P_BB'`. Degenerate eigenspaces are re-diagonalized
/// against the swap. Only terms with non-zero weight are returned.
pub fn spectral_symmetric_decomposition(sigma: &TripartiteExtension) -> Result<Vec<SymmetricTerm>> {
    if sigma.symmetry_residual > SPECTRUM_TOL {
        return Err(Error::NotSymmetric(sigma.symmetry_residual));
    }
    let d_b = sigma.d_b;
    let eig = hermitian_eig(&sigma.matrix)?;
    let n = eig.eigenvalues.len();
    let lmax = eig.lambda_max();
    let mut terms = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.eigenvalues[end - 1] - eig.eigenvalues[end] < CLUSTER_GAP {
            end += 1;
        }
        if eig.eigenvalues[start] <= crate::linalg::ZERO_CUTOFF * lmax {
            break;
        }
        let cluster: Vec<Vec<C64>> = (start..end).map(|j| eig.vector(j)).collect();
        let k = cluster.len();
        let swapped: Vec<Vec<C64>> = cluster.iter().map(|v| swap_vector(v, d_b)).collect();
        let q = ComplexMatrix::from_fn(k, k, |i, j| inner_product(&cluster[i], &swapped[j]));
        let qe = hermitian_eig(&q.hermitian_part())?;
        for l in 0..k {
            let mut w = vec![ZERO; n];
            for (i, v) in cluster.iter().enumerate() {
                let coef = qe.eigenvectors[(i, l)];
                for (x, y) in w.iter_mut().zip(v) {
                    *x += coef * y;
                }
            }
            let weight = inner_product(&w, &sigma.matrix.mul_vec(&w)).re;
            if weight <= crate::linalg::ZERO_CUTOFF * lmax {
                continue;
            }
            let parity: i8 = if qe.eigenvalues[l] >= 0.0 { 1 } else { -1 };
            let pw = swap_vector(&w, d_b);
            let resid = vec_norm(
                &pw.iter()
                    .zip(&w)
                    .map(|(a, b)| a - b * f64::from(parity))
                    .collect::<Vec<_>>(),
            );
            if resid > SPECTRUM_TOL {
                return Err(Error::NotSymmetric(resid));
            }
            terms.push(SymmetricTerm {
                weight,
                vector: w,
                parity,
            });
        }
        start = end;
    }
    Ok(terms)
}

/// A pure vector on `A ⊗ B ⊗ B'`, ordered `(a, b, b')`.
#[derive(Clone, Debug)]
pub struct PureTripartite {
    pub amplitudes: Vec<C64>,
    pub d_a: usize,
    pub d_b: usize,
}

impl PureTripartite {
    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes)
    }

    pub fn to_extension(&self) -> Result<TripartiteExtension> {
        TripartiteExtension::from_pure(&self.amplitudes, self.d_a, self.d_b)
    }

    fn dims3(&self) -> [usize; 3] {
        [self.d_a, self.d_b, self.d_b]
    }

    pub fn reduced_ab(&self) -> ComplexMatrix {
        partial_trace(&self.density(), &self.dims3(), &[0, 1]).expect("consistent")
    }

    pub fn reduced_b(&self) -> ComplexMatrix {
        partial_trace(&self.density(), &self.dims3(), &[1]).expect("consistent")
    }

    pub fn reduced_b_prime(&self) -> ComplexMatrix {
        partial_trace(&self.density(), &self.dims3(), &[2]).expect("consistent")
    }

    /// `‖(I ⊗ P)|ψ⟩ − |ψ⟩‖`.
    pub fn symmetry_defect(&self) -> f64 {
        let p = swap_vector(&self.amplitudes, self.d_b);
        vec_norm(&p.iter().zip(&self.amplitudes).map(|(a, b)| a - b).collect::<Vec<_>>())
    }

    /// Applies `U` on the `B'` factor.
    pub fn apply_b_prime(&self, u: &ComplexMatrix) -> PureTripartite {
        let d = self.d_b;
        let mut out = vec![ZERO; self.amplitudes.len()];
        for (block, dst) in self.amplitudes.chunks(d).zip(out.chunks_mut(d)) {
            let v = u.mul_vec(block);
            dst.copy_from_slice(&v);
        }
        PureTripartite {
            amplitudes: out,
            d_a: self.d_a,
            d_b: self.d_b,
        }
    }

    /// Applies `U_B ⊗ U_B'` on the two copies.
    pub fn apply_bb(&self, ub: &ComplexMatrix, ubp: &ComplexMatrix) -> PureTripartite {
        let op = tensor(&ComplexMatrix::identity(self.d_a), &tensor(ub, ubp));
        PureTripartite {
            amplitudes: op.mul_vec(&self.amplitudes),
            d_a: self.d_a,
            d_b: self.d_b,
        }
    }
}

/// The purification `Σ_j √λ_j |φ_j⟩_AB |b_j⟩_B'` pairing the eigenvectors
/// of `ρ_AB` and `ρ_B` with equal eigenvalues, so that `ρ_B' = ρ_B`. It need
/// not be swap-symmetric.
pub fn purify_equal_margins(rho: &BipartiteState) -> Result<PureTripartite> {
    let dev = spectrum_deviation(rho);
    if dev > SPECTRUM_TOL {
        return Err(Error::SpectrumMismatch(dev));
    }
    let global = rho.eig();
    let local = hermitian_eig(&rho.reduced_b())?;
    let r = global.rank();
    let mut amps = vec![ZERO; rho.d_a() * rho.d_b() * rho.d_b()];
    for j in 0..r {
        let w = global.eigenvalues[j].max(0.0).sqrt();
        let term = tensor_vec(&global.vector(j), &local.vector(j));
        for (a, t) in amps.iter_mut().zip(&term) {
            *a += t * w;
        }
    }
    crate::linalg::normalize(&mut amps);
    Ok(PureTripartite {
        amplitudes: amps,
        d_a: rho.d_a(),
        d_b: rho.d_b(),
    })
}

/// Result of a one-way LOCC instrument.
#[derive(Clone, Debug)]
pub struct LoccOutcome {
    pub state: BipartiteState,
    pub probability: f64,
}

/// Applies `Σ_ij (A_i ⊗ B_ij) ρ (A_i ⊗ B_ij)†` and renormalizes. Alice's
/// operators may be a partial instrument (`Σ A†A ≤ I`); each of Bob's
/// families must be trace preserving.
pub fn apply_1locc(
    rho: &BipartiteState,
    alice: &[ComplexMatrix],
    bob: &[Vec<ComplexMatrix>],
) -> Result<LoccOutcome> {
    let (d_a, d_b) = rho.dims();
    if alice.is_empty() || alice.len() != bob.len() {
        return Err(Error::InvalidInstrument(format!(
            "{} Alice outcomes but {} Bob families",
            alice.len(),
            bob.len()
        )));
    }
    let out_a = alice[0].rows();
    let out_b = bob
        .iter()
        .flatten()
        .next()
        .map(|b| b.rows())
        .ok_or_else(|| Error::InvalidInstrument("empty Bob family".into()))?;
    let mut povm = ComplexMatrix::zeros(d_a, d_a);
    for a in alice {
        if a.cols() != d_a || a.rows() != out_a {
            return Err(Error::InvalidInstrument("inconsistent Alice operator shape".into()));
        }
        povm += &(&a.adjoint() * a);
    }
    let slack = hermitian_eig(&(&ComplexMatrix::identity(d_a) - &povm).hermitian_part())?;
    if slack.lambda_min() < -1e-9 {
        return Err(Error::InvalidInstrument(format!(
            "Σ A†A exceeds I by {:.3e}",
            -slack.lambda_min()
        )));
    }
    for family in bob {
        let mut sum = ComplexMatrix::zeros(d_b, d_b);
        for b in family {
            if b.cols() != d_b || b.rows() != out_b {
                return Err(Error::InvalidInstrument("inconsistent Bob operator shape".into()));
            }
            sum += &(&b.adjoint() * b);
        }
        let dev = sum.max_diff(&ComplexMatrix::identity(d_b));
        if dev > 1e-9 {
            return Err(Error::InvalidInstrument(format!(
                "Bob family is not trace preserving (deviation {dev:.3e})"
            )));
        }
    }
    let mut out = ComplexMatrix::zeros(out_a * out_b, out_a * out_b);
    for (a, family) in alice.iter().zip(bob) {
        for b in family {
            out += &tensor(a, b).sandwich(rho.matrix());
        }
    }
    let probability = out.trace().re;
    if probability < 1e-12 {
        return Err(Error::ZeroProbability);
    }
    Ok(LoccOutcome {
        state: BipartiteState::new(out.scale_real(1.0 / probability), out_a, out_b)?,
        probability,
    })
}

/// `I(A⟩B) = S(ρ_B) − S(ρ_AB)` in bits. A positive value rules out a
/// symmetric extension.
pub fn coherent_information(rho: &BipartiteState) -> f64 {
    let global = entropy_of(&rho.eig().eigenvalues);
    let local = entropy_of(&hermitian_eig(&rho.reduced_b()).expect("Hermitian").eigenvalues);
    local - global
}
