//! Channels through their Choi states: complementary channels and the
//! degradable / anti-degradable classification by symmetric extension.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, C64, ONE, ZERO, ZERO_CUTOFF};
use crate::oracle::{find_symmetric_extension, FeasibilityResult, OracleOptions, Status};
use crate::random::{random_unitary, Rng};
use crate::states::{is_symmetric_extension, BipartiteState, TripartiteExtension};
use crate::twoqubit::{bell_inequalities, rank2_condition, rank2_decompose, BellDiagonalParams};

const CHANNEL_TOL: f64 = 1e-9;

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Clone, Debug)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
    d_in: usize,
    d_out: usize,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidChannel("empty Kraus operator".into()));
        }
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &kraus {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operators of shapes {d_out}x{d_in} and {}x{}",
                    k.rows(),
                    k.cols()
                )));
            }
            sum += &(&k.adjoint() * k);
        }
        let defect = sum.max_diff(&ComplexMatrix::identity(d_in));
        if defect > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!("Σ K†K deviates from I by {defect:.3e}")));
        }
        Ok(Channel { kraus, d_in, d_out })
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += &k.sandwich(rho);
        }
        out
    }

    /// `N ∘ M` (first `M`, then `self`).
    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        if first.d_out != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed a {}-dimensional output into a {}-dimensional input",
                first.d_out, self.d_in
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Channel::new(kraus)
    }

    pub fn identity(d: usize) -> Self {
        Channel::new(vec![ComplexMatrix::identity(d)]).expect("unitary")
    }

    /// Amplitude damping with transmissivity `η`: `|1⟩` survives with probability `η`.
    pub fn amplitude_damping(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::OutOfRange(format!("η = {eta} outside [0, 1]")));
        }
        let k0 = ComplexMatrix::diag_real(&[1.0, eta.sqrt()]);
        let mut k1 = ComplexMatrix::zeros(2, 2);
        k1[(0, 1)] = C64::new((1.0 - eta).sqrt(), 0.0);
        Channel::new(vec![k0, k1])
    }

    /// Qubit depolarizing `ρ ↦ (1 − p) ρ + p I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("p = {p} outside [0, 1]")));
        }
        let i = C64::new(0.0, 1.0);
        let paulis = [
            ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap(),
            ComplexMatrix::from_vec(2, 2, vec![ZERO, -i, i, ZERO]).unwrap(),
            ComplexMatrix::diag_real(&[1.0, -1.0]),
        ];
        let mut kraus = vec![ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * p).sqrt())];
        kraus.extend(paulis.iter().map(|s| s.scale_real((p / 4.0).sqrt())));
        Channel::new(kraus)
    }

    /// Channel from the blocks of a Haar-random isometry `C^{d_in} → C^{d_out} ⊗ C^n`.
    pub fn random(d_in: usize, d_out: usize, n: usize, rng: &mut Rng) -> Result<Self> {
        if d_out * n < d_in {
            return Err(Error::OutOfRange(format!(
                "{n} Kraus operators of size {d_out}x{d_in} cannot form an isometry"
            )));
        }
        let u = random_unitary(d_out * n, rng);
        let kraus = (0..n)
            .map(|k| ComplexMatrix::from_fn(d_out, d_in, |o, i| u[(k * d_out + o, i)]))
            .collect();
        Channel::new(kraus)
    }
}

/// Bipartite state with a maximally mixed input marginal.
#[derive(Clone, Debug)]
pub struct ChoiState {
    pub state: BipartiteState,
}

impl ChoiState {
    pub fn new(state: BipartiteState) -> Result<Self> {
        let d = state.d_a();
        let defect = state
            .reduced_a()
            .max_diff(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64));
        if defect > CHANNEL_TOL {
            return Err(Error::NotAChoiState(format!("input marginal deviates from I/d by {defect:.3e}")));
        }
        Ok(ChoiState { state })
    }
}

/// `(1/d) Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)`.
pub fn choi_state(n: &Channel) -> Result<ChoiState> {
    let (di, dout) = (n.d_in, n.d_out);
    let mut m = ComplexMatrix::zeros(di * dout, di * dout);
    for i in 0..di {
        for j in 0..di {
            let mut unit = ComplexMatrix::zeros(di, di);
            unit[(i, j)] = ONE;
            let block = n.apply(&unit);
            for a in 0..dout {
                for b in 0..dout {
                    m[(i * dout + a, j * dout + b)] = block[(a, b)] / di as f64;
                }
            }
        }
    }
    let state = BipartiteState::new(m, di, dout).map_err(|e| Error::InvalidChannel(e.to_string()))?;
    ChoiState::new(state).map_err(|e| Error::InvalidChannel(e.to_string()))
}

/// Orthogonal Kraus operators `K[o][i] = √(d μ) v[i·d_out + o]` from the
/// eigendecomposition of the Choi state.
pub fn kraus_from_choi(choi: &ChoiState) -> Result<Channel> {
    let (di, dout) = choi.state.dims();
    let eig = choi.state.eig();
    let lmax = eig.lambda_max();
    let mut kraus = Vec::new();
    for (k, &mu) in eig.eigenvalues.iter().enumerate() {
        if mu <= ZERO_CUTOFF * lmax {
            continue;
        }
        let v = eig.vector(k);
        let s = (di as f64 * mu).sqrt();
        kraus.push(ComplexMatrix::from_fn(dout, di, |o, i| v[i * dout + o] * s));
    }
    Channel::new(kraus).map_err(|e| Error::NotAChoiState(e.to_string()))
}

/// Number of linearly independent Kraus operators.
pub fn kraus_rank(n: &Channel) -> usize {
    let k = n.kraus.len();
    let gram = ComplexMatrix::from_fn(k, k, |a, b| n.kraus[a].inner(&n.kraus[b]));
    hermitian_eig(&gram).map(|e| e.rank()).unwrap_or(k)
}

/// The channel to the environment of a minimal Stinespring dilation:
/// `E_o[k][i] = K_k[o][i]` for orthogonal `K_k`.
pub fn complementary_channel(n: &Channel) -> Result<Channel> {
    let minimal = kraus_from_choi(&choi_state(n)?).map_err(|e| Error::InvalidChannel(e.to_string()))?;
    let d_e = minimal.kraus.len();
    let kraus = (0..n.d_out)
        .map(|o| ComplexMatrix::from_fn(d_e, n.d_in, |k, i| minimal.kraus[k][(o, i)]))
        .collect();
    Channel::new(kraus)
}

/// How a degradability verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Oracle,
    /// Rank-2 two-qubit Choi state, decided by the eigenvalue comparison.
    Rank2,
    /// Choi state with maximally mixed marginals, decided by the Bell-diagonal inequalities.
    BellDiagonal,
    /// Qubit output with more than two environment dimensions.
    EnvironmentRank,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Rank2 => "rank2",
            Method::BellDiagonal => "bell-diagonal",
            Method::EnvironmentRank => "environment-rank",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChannelFeasibility {
    pub result: FeasibilityResult,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelOptions {
    pub oracle: OracleOptions,
    /// Use the closed-form two-qubit verdicts and the environment bound
    /// before calling the oracle.
    pub shortcuts: bool,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        ChannelOptions {
            oracle: OracleOptions::default(),
            shortcuts: true,
        }
    }
}

const SHORTCUT_BAND: f64 = 1e-9;

fn lambda_max(m: &ComplexMatrix) -> f64 {
    hermitian_eig(m).map(|e| e.lambda_max()).unwrap_or(0.0)
}

fn infeasible(residual: f64) -> FeasibilityResult {
    FeasibilityResult {
        status: Status::Infeasible,
        witness: None,
        residual,
        iterations: 0,
    }
}

fn exact_two_qubit(rho: &BipartiteState) -> Option<ChannelFeasibility> {
    if rho.dims() != (2, 2) {
        return None;
    }
    if rho.rank() == 2 {
        let margin = lambda_max(&rho.reduced_b()) - rho.eig().lambda_max();
        if margin.abs() <= SHORTCUT_BAND {
            return None;
        }
        let result = if rank2_condition(rho).ok()? {
            let ext = rank2_decompose(rho).ok()?.extension().ok()?;
            if !is_symmetric_extension(&ext, rho, crate::oracle::WITNESS_TOL).ok()? {
                return None;
            }
            FeasibilityResult {
                status: Status::Feasible,
                witness: Some(ext),
                residual: 0.0,
                iterations: 0,
            }
        } else {
            infeasible(-margin)
        };
        return Some(ChannelFeasibility {
            result,
            method: Method::Rank2,
        });
    }
    let params = BellDiagonalParams::from_maximally_mixed_marginals(rho)?;
    let best = bell_inequalities(&params)
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (best < -SHORTCUT_BAND).then(|| ChannelFeasibility {
        result: infeasible(-best),
        method: Method::BellDiagonal,
    })
}

/// Symmetric-extension feasibility of a Choi state.
pub fn choi_extendibility(choi: &ChoiState, opts: &ChannelOptions) -> Result<ChannelFeasibility> {
    if opts.shortcuts {
        if let Some(v) = exact_two_qubit(&choi.state) {
            return Ok(v);
        }
    }
    Ok(ChannelFeasibility {
        result: find_symmetric_extension(&choi.state, &opts.oracle)?,
        method: Method::Oracle,
    })
}

/// Anti-degradable iff the Choi state has a symmetric extension.
pub fn is_anti_degradable(n: &Channel, opts: &ChannelOptions) -> Result<ChannelFeasibility> {
    choi_extendibility(&choi_state(n)?, opts)
}

/// Degradable iff the complementary channel is anti-degradable. A qubit
/// output with an environment larger than a qubit rules it out at once.
pub fn is_degradable(n: &Channel, opts: &ChannelOptions) -> Result<ChannelFeasibility> {
    let nc = complementary_channel(n)?;
    if opts.shortcuts && n.d_out == 2 && nc.d_out > 2 {
        return Ok(ChannelFeasibility {
            result: infeasible(f64::INFINITY),
            method: Method::EnvironmentRank,
        });
    }
    is_anti_degradable(&nc, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelTag {
    Degradable,
    AntiDegradable,
    Both,
    Neither,
    Undecided,
}

impl ChannelTag {
    pub fn name(self) -> &'static str {
        match self {
            ChannelTag::Degradable => "degradable",
            ChannelTag::AntiDegradable => "anti-degradable",
            ChannelTag::Both => "both",
            ChannelTag::Neither => "neither",
            ChannelTag::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChannelClass {
    pub tag: ChannelTag,
    pub degradable: ChannelFeasibility,
    pub anti_degradable: ChannelFeasibility,
}

pub fn classify_channel(n: &Channel, opts: &ChannelOptions) -> Result<ChannelClass> {
    let degradable = is_degradable(n, opts)?;
    let anti_degradable = is_anti_degradable(n, opts)?;
    let tag = match (degradable.result.status, anti_degradable.result.status) {
        (Status::Undecided, _) | (_, Status::Undecided) => ChannelTag::Undecided,
        (Status::Feasible, Status::Feasible) => ChannelTag::Both,
        (Status::Feasible, Status::Infeasible) => ChannelTag::Degradable,
        (Status::Infeasible, Status::Feasible) => ChannelTag::AntiDegradable,
        (Status::Infeasible, Status::Infeasible) => ChannelTag::Neither,
    };
    Ok(ChannelClass {
        tag,
        degradable,
        anti_degradable,
    })
}

/// For a rank-2 state, whether `rank(ρ_B) ≤ 2`; a symmetric extension
/// requires it.
pub fn rank2_marginal_rank_bound(rho: &BipartiteState) -> Result<bool> {
    let rank = rho.rank();
    if rank != 2 {
        return Err(Error::WrongRank {
            expected: "2".into(),
            found: rank,
        });
    }
    let rb = hermitian_eig(&rho.reduced_b())?;
    Ok(rb.rank() <= 2)
}

/// The map `D` from the environment to the output with `D ∘ N^c = N`,
/// read off from a symmetric extension of the Choi state: purify the
/// extension, match it to the Stinespring purification through an isometry
/// `W: E → B'R`, and trace out `R`.
pub fn degrading_map_from_extension(n: &Channel, sigma: &TripartiteExtension) -> Result<Channel> {
    let choi = choi_state(n)?;
    let (di, dout) = (n.d_in, n.d_out);
    if sigma.dims() != (di, dout) || !is_symmetric_extension(sigma, &choi.state, crate::oracle::WITNESS_TOL)? {
        return Err(Error::NotAnExtension("not a symmetric extension of the Choi state".into()));
    }
    let minimal = kraus_from_choi(&choi)?;
    let d_e = minimal.kraus.len();
    let rows = di * dout;
    // Ω[(a, b), e] = K_e[b][a]/√d
    let omega = ComplexMatrix::from_fn(rows, d_e, |r, e| minimal.kraus[e][(r % dout, r / dout)] / (di as f64).sqrt());
    // Σ[(a, b), (b', r)] from σ = Σ_r s_r |σ_r⟩⟨σ_r|.
    let eig = hermitian_eig(sigma.matrix())?;
    let lmax = eig.lambda_max();
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > ZERO_CUTOFF * lmax)
        .collect();
    let d_r = kept.len();
    let big_sigma = ComplexMatrix::from_fn(rows, dout * d_r, |r, c| {
        let (bp, k) = (c / d_r, c % d_r);
        let idx = kept[k];
        eig.eigenvectors[(r * dout + bp, idx)] * eig.eigenvalues[idx].sqrt()
    });
    // Wᵀ = Ω⁺ Σ
    let gram = &omega.adjoint() * &omega;
    let ginv = hermitian_eig(&gram)?.map_eigenvalues(|x| if x > 1e-14 { 1.0 / x } else { 0.0 });
    let wt = &(&ginv * &omega.adjoint()) * &big_sigma;
    let w = wt.transpose();
    // Nearest isometry.
    let sv = crate::linalg::svd(&w);
    let mut u = ComplexMatrix::zeros(w.rows(), d_e);
    for j in 0..d_e {
        u.set_column(j, &sv.u.column(j));
    }
    let w = &u * &sv.v.adjoint();
    let kraus = (0..d_r)
        .map(|r| ComplexMatrix::from_fn(dout, d_e, |bp, e| w[(bp * d_r + r, e)]))
        .collect();
    let d = Channel::new(kraus).map_err(|e| Error::NotAnExtension(e.to_string()))?;
    let composed = d.compose(&complementary_channel_from(&minimal))?;
    let residual = choi_state(&composed)?.state.matrix().max_diff(choi.state.matrix());
    if residual > 1e-6 {
        return Err(Error::NotAnExtension(format!("composition misses the channel by {residual:.3e}")));
    }
    Ok(d)
}

fn complementary_channel_from(minimal: &Channel) -> Channel {
    let d_e = minimal.kraus.len();
    let kraus = (0..minimal.d_out)
        .map(|o| ComplexMatrix::from_fn(d_e, minimal.d_in, |k, i| minimal.kraus[k][(o, i)]))
        .collect();
    Channel::new(kraus).expect("complement of a valid channel")
}

/// Sorted eigenvalues of a Choi state, invariant under output unitaries.
pub fn choi_spectrum(n: &Channel) -> Result<Vec<f64>> {
    Ok(choi_state(n)?.state.eig().eigenvalues)
}
