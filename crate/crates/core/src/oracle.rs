//! Numerical feasibility oracle for symmetric, bosonic and fermionic
//! extensions of small bipartite states.

use crate::error::{Error, Result};
use crate::linalg::{
    conjugate_by_swap, hermitian_eig, partial_trace, tensor, trace_norm, ComplexMatrix, C64, ZERO,
};
use crate::states::{is_symmetric_extension, spectral_symmetric_decomposition, BipartiteState, TripartiteExtension};

/// Largest `d_A · d_B²` accepted.
pub const MAX_DIMENSION: usize = 1024;
/// Tolerance for independently re-verifying a feasible witness.
pub const WITNESS_TOL: f64 = 1e-7;
const STALL_RELATIVE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Any,
    Bosonic,
    Fermionic,
}

impl Symmetry {
    fn sign(self) -> i32 {
        match self {
            Symmetry::Any => 0,
            Symmetry::Bosonic => 1,
            Symmetry::Fermionic => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Infeasible,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct FeasibilityResult {
    pub status: Status,
    pub witness: Option<TripartiteExtension>,
    /// Final distance between the positive and the affine iterate.
    pub residual: f64,
    pub iterations: usize,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub symmetry: Symmetry,
    pub tol_feasible: f64,
    pub tol_infeasible: f64,
    pub max_iterations: usize,
    pub stall_window: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            symmetry: Symmetry::Any,
            tol_feasible: 1e-9,
            tol_infeasible: 1e-6,
            max_iterations: 50_000,
            stall_window: 500,
        }
    }
}

impl OracleOptions {
    pub fn with_symmetry(symmetry: Symmetry) -> Self {
        OracleOptions {
            symmetry,
            ..Self::default()
        }
    }
}

/// Orthogonal projection onto `{σ Hermitian : σ in the symmetry sector,
/// tr_B' σ = ρ}` in closed form.
struct AffineProjector {
    rho: ComplexMatrix,
    d_a: usize,
    d_b: usize,
    sign: i32,
}

impl AffineProjector {
    fn dims(&self) -> [usize; 3] {
        [self.d_a, self.d_b, self.d_b]
    }

    /// `σ ↦ (σ + PσP)/2` or `Π_± σ Π_±`.
    fn sector(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let pm = conjugate_by_swap(m, self.d_b);
        match self.sign {
            0 => (m + &pm).scale_real(0.5),
            s => {
                // Π M Π = (M + s PM + s MP + PMP)/4
                let p_left = swap_rows(m, self.d_b);
                let p_right = swap_rows(&m.adjoint(), self.d_b).adjoint();
                let cross = (&p_left + &p_right).scale_real(s as f64);
                (&(m + &pm) + &cross).scale_real(0.25)
            }
        }
    }

    /// `X ↦ sector(X ⊗ I)`.
    fn lift(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.sector(&tensor(x, &ComplexMatrix::identity(self.d_b)))
    }

    /// Inverse of `X ↦ tr_B' sector(X ⊗ I)`.
    fn gram_inverse(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let d = self.d_b as f64;
        let m_a = partial_trace(m, &[self.d_a, self.d_b], &[0]).expect("dimensions");
        let id = ComplexMatrix::identity(self.d_b);
        match self.sign {
            0 => (&m.scale_real(2.0) - &tensor(&m_a, &id).scale_real(1.0 / d)).scale_real(1.0 / d),
            s => {
                let s = s as f64;
                let x_a = m_a.scale_real(2.0 / (d + s));
                (&m.scale_real(4.0) - &tensor(&x_a, &id)).scale_real(1.0 / (d + 2.0 * s))
            }
        }
    }

    fn project(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let s = self.sector(&m.hermitian_part());
        let red = partial_trace(&s, &self.dims(), &[0, 1]).expect("dimensions");
        let x = self.gram_inverse(&(&red - &self.rho));
        &s - &self.lift(&x)
    }
}

/// `(I_A ⊗ P_BB') M`.
fn swap_rows(m: &ComplexMatrix, db: usize) -> ComplexMatrix {
    let n = m.rows();
    ComplexMatrix::from_fn(n, n, |i, j| m[(crate::linalg::swapped_index(i, db), j)])
}

/// Cone of positive operators supported on a fixed subspace.
struct Face {
    /// Columns span the subspace; `None` for the whole space.
    basis: Option<ComplexMatrix>,
    n: usize,
}

impl Face {
    fn dim(&self) -> usize {
        self.basis.as_ref().map_or(self.n, |v| v.cols())
    }

    fn compress(&self, m: &ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            None => m.clone(),
            Some(v) => &(&v.adjoint() * m) * v,
        }
    }

    fn expand(&self, m: &ComplexMatrix) -> ComplexMatrix {
        match &self.basis {
            None => m.clone(),
            Some(v) => v.sandwich(m),
        }
    }

    /// Projection onto `{V τ V† : τ ≥ δ I}`.
    fn project_shifted(&self, m: &ComplexMatrix, delta: f64) -> ComplexMatrix {
        if self.dim() == 0 {
            return ComplexMatrix::zeros(self.n, self.n);
        }
        let clipped = hermitian_eig(&self.compress(m).hermitian_part())
            .expect("Hermitian")
            .map_eigenvalues(|x| x.max(delta));
        self.expand(&clipped)
    }

    /// `(λ_min(V† m V), ‖m − V V† m V V†‖_F)`.
    fn positivity(&self, m: &ComplexMatrix) -> (f64, f64) {
        if self.dim() == 0 {
            return (0.0, m.frobenius_norm());
        }
        let inner = self.compress(m).hermitian_part();
        let lmin = hermitian_eig(&inner).expect("Hermitian").lambda_min();
        let off = match &self.basis {
            None => 0.0,
            Some(_) => (m - &self.expand(&inner)).frobenius_norm(),
        };
        (lmin, off)
    }
}

/// Any extension lives on `(supp ρ ⊗ C^d) ∩ P(supp ρ ⊗ C^d)`, intersected
/// with the symmetry sector.
fn support_face(rho: &BipartiteState, symmetry: Symmetry) -> Result<Face> {
    let (d_a, d_b) = rho.dims();
    let n = d_a * d_b * d_b;
    let eig = rho.eig();
    let rank = eig.rank();
    let full = rank == d_a * d_b;
    if full && symmetry == Symmetry::Any {
        return Ok(Face { basis: None, n });
    }
    let mut support = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for j in 0..rank {
        support += &ComplexMatrix::projector(&eig.vector(j));
    }
    let q1 = tensor(&support, &ComplexMatrix::identity(d_b));
    let q2 = conjugate_by_swap(&q1, d_b);
    let mut sum = &q1 + &q2;
    let mut count = 2.0;
    if symmetry != Symmetry::Any {
        let sign = symmetry.sign() as f64;
        let p = swap_rows(&ComplexMatrix::identity(n), d_b);
        sum += &(&ComplexMatrix::identity(n) + &p.scale_real(sign)).scale_real(0.5);
        count += 1.0;
    }
    let e = hermitian_eig(&sum)?;
    let cols: Vec<usize> = (0..n).filter(|&k| e.eigenvalues[k] > count - 1e-8).collect();
    let mut basis = ComplexMatrix::zeros(n, cols.len());
    for (j, &k) in cols.iter().enumerate() {
        basis.set_column(j, &e.vector(k));
    }
    Ok(Face {
        basis: Some(basis),
        n,
    })
}

/// `V (V† z V) V† / tr` re-verified against `ρ`.
fn verified_witness(face: &Face, z: &ComplexMatrix, rho: &BipartiteState) -> Option<TripartiteExtension> {
    let w = face.expand(&face.compress(z).hermitian_part());
    let tr = w.trace().re;
    if tr <= 0.0 {
        return None;
    }
    let (d_a, d_b) = rho.dims();
    let sigma = TripartiteExtension::new(w.scale_real(1.0 / tr), d_a, d_b).ok()?;
    is_symmetric_extension(&sigma, rho, WITNESS_TOL)
        .ok()?
        .then_some(sigma)
}

/// Searches for an extension of `ρ` by Dykstra's alternating projections
/// between the positive cone and the affine constraint set.
pub fn find_symmetric_extension(rho: &BipartiteState, opts: &OracleOptions) -> Result<FeasibilityResult> {
    let (d_a, d_b) = rho.dims();
    let n = d_a * d_b * d_b;
    if n > MAX_DIMENSION {
        return Err(Error::TooLarge(n));
    }
    if !(opts.tol_feasible < opts.tol_infeasible) {
        return Err(Error::OutOfRange("tol_feasible must be below tol_infeasible".into()));
    }
    if opts.symmetry == Symmetry::Fermionic && d_b <= 2 {
        return Ok(fermionic_small(rho));
    }
    let affine = AffineProjector {
        rho: rho.matrix().clone(),
        d_a,
        d_b,
        sign: opts.symmetry.sign(),
    };
    let face = support_face(rho, opts.symmetry)?;
    // Aiming at `σ ≥ δ I` makes an affine iterate within `δ` of the target
    // exactly positive; the shift moves the stall floor of a feasible
    // instance by at most `δ √dim < tol_infeasible / 4`.
    let delta = opts.tol_infeasible / (4.0 * (face.dim().max(1) as f64).sqrt());
    let mut z = affine.project(&tensor(rho.matrix(), &ComplexMatrix::identity(d_b)).scale_real(1.0 / d_b as f64));
    let mut q = ComplexMatrix::zeros(n, n);
    let mut history: Vec<f64> = Vec::with_capacity(opts.max_iterations.min(1 << 16));
    let mut residual = f64::INFINITY;
    let mut refined = false;
    for k in 1..=opts.max_iterations {
        let shifted = &z + &q;
        let y = face.project_shifted(&shifted, delta);
        q = &shifted - &y;
        z = affine.project(&y);
        residual = (&z - &y).frobenius_norm();
        history.push(residual);

        if residual < delta || k % 50 == 0 {
            let (lmin, off) = face.positivity(&z);
            let gap = (-lmin).max(0.0) * (face.dim() as f64).sqrt() + off;
            if face.dim() > 0 && gap <= opts.tol_feasible {
                if let Some(w) = verified_witness(&face, &z, rho) {
                    return Ok(FeasibilityResult {
                        status: Status::Feasible,
                        witness: Some(w),
                        residual: gap,
                        iterations: k,
                    });
                }
            }
        }
        if k == REFINE_AFTER && k <= opts.stall_window && face.dim() <= REFINE_MAX_DIM {
            refined = true;
            if let Some(r) = refine(&face, &affine, &z, rho, opts, k) {
                return Ok(r);
            }
        }
        if k > opts.stall_window {
            let before = history[k - 1 - opts.stall_window];
            if residual > opts.tol_infeasible && before - residual < STALL_RELATIVE * residual {
                return Ok(FeasibilityResult {
                    status: Status::Infeasible,
                    witness: None,
                    residual,
                    iterations: k,
                });
            }
            let slow = before - residual < SLOW_PROGRESS * before || k == REFINE_AFTER;
            if slow && !refined && face.dim() <= REFINE_MAX_DIM {
                refined = true;
                if let Some(r) = refine(&face, &affine, &z, rho, opts, k) {
                    return Ok(r);
                }
            }
        }
    }
    Ok(FeasibilityResult {
        status: Status::Undecided,
        witness: None,
        residual,
        iterations: opts.max_iterations,
    })
}

/// Hand over to the barrier refinement once the residual improves by less
/// than this fraction over a stall window.
const SLOW_PROGRESS: f64 = 1e-2;
/// Largest face dimension handled by the barrier refinement.
const REFINE_MAX_DIM: usize = 20;
/// Iteration at which slow instances are handed over regardless.
const REFINE_AFTER: usize = 100;

/// Orthonormal real basis of the Hermitian `k × k` matrices.
fn hermitian_basis(k: usize) -> Vec<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(k * k);
    for a in 0..k {
        let mut m = ComplexMatrix::zeros(k, k);
        m[(a, a)] = C64::new(1.0, 0.0);
        out.push(m);
        for b in a + 1..k {
            let mut m = ComplexMatrix::zeros(k, k);
            m[(a, b)] = C64::new(h, 0.0);
            m[(b, a)] = C64::new(h, 0.0);
            out.push(m);
            let mut m = ComplexMatrix::zeros(k, k);
            m[(a, b)] = C64::new(0.0, h);
            m[(b, a)] = C64::new(0.0, -h);
            out.push(m);
        }
    }
    out
}

fn push_real(out: &mut Vec<f64>, m: &ComplexMatrix) {
    for z in m.data() {
        out.push(z.re);
        out.push(z.im);
    }
}

/// Solves `H x = g` for symmetric positive definite `H` (row-major).
fn cholesky_solve(h: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let m = g.len();
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = h[i * m + j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * m + i] = s.sqrt();
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    let mut y = vec![0.0; m];
    for i in 0..m {
        let s: f64 = (0..i).map(|k| l[i * m + k] * y[k]).sum();
        y[i] = (g[i] - s) / l[i * m + i];
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|k| l[k * m + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * m + i];
    }
    Some(x)
}

type Basis = std::sync::Arc<Vec<ComplexMatrix>>;

/// Null directions of the full space depend only on the dimensions and the
/// symmetry sector.
fn cached_directions(affine: &AffineProjector, face: &Face) -> Option<Basis> {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, i32), Basis>>> = OnceLock::new();
    let key = (affine.d_a, affine.d_b, affine.sign);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().ok()?.get(&key) {
        return Some(b.clone());
    }
    let (_, null) = constraint_system(affine, face)?;
    let b: Basis = std::sync::Arc::new(null);
    cache.lock().ok()?.insert(key, b.clone());
    Some(b)
}

/// Least-squares face point for the affine constraints with its misfit, and
/// an orthonormal basis of the homogeneous solutions, in face coordinates.
fn constraint_system(affine: &AffineProjector, face: &Face) -> Option<((ComplexMatrix, f64), Vec<ComplexMatrix>)> {
    let kf = face.dim();
    let dims = affine.dims();
    let basis = hermitian_basis(kf);
    // Constraint rows: sector defect and partial trace of V H V†.
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|hb| {
            let g = face.expand(hb);
            let mut col = Vec::new();
            push_real(&mut col, &(&g - &affine.sector(&g)));
            push_real(&mut col, &partial_trace(&g, &dims, &[0, 1]).expect("dimensions"));
            col
        })
        .collect();
    let nb = basis.len();
    let mut target = Vec::new();
    push_real(&mut target, &affine.rho);
    let offset = columns[0].len() - target.len();
    let gram = ComplexMatrix::from_fn(nb, nb, |i, j| {
        C64::new(columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum(), 0.0)
    });
    let rhs: Vec<f64> = columns
        .iter()
        .map(|c| c[offset..].iter().zip(&target).map(|(a, b)| a * b).sum())
        .collect();
    let eig = hermitian_eig(&gram).ok()?;
    let scale = eig.lambda_max().max(1e-300);
    let mut coeffs = vec![0.0; nb];
    let mut null = Vec::new();
    for k in 0..nb {
        let u: Vec<f64> = eig.vector(k).iter().map(|z| z.re).collect();
        let lam = eig.eigenvalues[k];
        if lam > 1e-10 * scale {
            let proj: f64 = u.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>() / lam;
            coeffs.iter_mut().zip(&u).for_each(|(c, x)| *c += proj * x);
        } else {
            null.push(u);
        }
    }
    let combine = |c: &[f64]| {
        let mut m = ComplexMatrix::zeros(kf, kf);
        for (w, hb) in c.iter().zip(&basis) {
            if *w != 0.0 {
                m += &hb.scale_real(*w);
            }
        }
        m
    };
    let mut fit = vec![0.0; columns[0].len()];
    for (w, col) in coeffs.iter().zip(&columns) {
        fit.iter_mut().zip(col).for_each(|(f, c)| *f += w * c);
    }
    let misfit = fit[..offset].iter().map(|x| x * x).sum::<f64>()
        + fit[offset..].iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    Some(((combine(&coeffs), misfit.sqrt()), null.iter().map(|u| combine(u)).collect()))
}

/// Maximizes `t` subject to `τ − t I ≥ 0` over face operators `τ` in the
/// affine set, following the log-det central path. A positive `t` yields a
/// positive definite witness; an upper bound `t ≤ −ε` proves that every
/// operator of the affine set is at distance at least `ε` from the cone.
fn refine(
    face: &Face,
    affine: &AffineProjector,
    z: &ComplexMatrix,
    rho: &BipartiteState,
    opts: &OracleOptions,
    iterations: usize,
) -> Option<FeasibilityResult> {
    let kf = face.dim();
    if kf == 0 {
        return None;
    }
    let (tau0, directions) = if face.basis.is_none() {
        (z.hermitian_part(), cached_directions(affine, face)?)
    } else {
        let ((tau0, misfit), null) = constraint_system(affine, face)?;
        // Non-zero only if the face and the affine set are disjoint.
        if misfit > 1e-9 {
            return Some(FeasibilityResult {
                status: Status::Infeasible,
                witness: None,
                residual: misfit,
                iterations,
            });
        }
        (tau0, std::sync::Arc::new(null))
    };
    let m = directions.len() + 1;
    let id = ComplexMatrix::identity(kf);
    let operator = |x: &[f64]| {
        let mut s = tau0.clone();
        for (w, e) in x.iter().zip(directions.iter()) {
            s += &e.scale_real(*w);
        }
        s -= &id.scale_real(x[m - 1]);
        s
    };
    let lmin = |s: &ComplexMatrix| hermitian_eig(&s.hermitian_part()).map(|e| e.lambda_min()).unwrap_or(f64::NEG_INFINITY);
    let mut x = vec![0.0; m];
    x[m - 1] = lmin(&tau0) - 1.0;
    let objective = |x: &[f64], kappa: f64| -> f64 {
        let s = operator(x);
        match hermitian_eig(&s.hermitian_part()) {
            Ok(e) if e.lambda_min() > 0.0 => -kappa * x[m - 1] - e.eigenvalues.iter().map(|v| v.ln()).sum::<f64>(),
            _ => f64::INFINITY,
        }
    };
    let mut kappa = 1.0;
    let mut steps = iterations;
    while kappa < 1e15 {
        for _ in 0..100 {
            steps += 1;
            let s = operator(&x);
            let e = hermitian_eig(&s.hermitian_part()).ok()?;
            let sinv = e.map_eigenvalues(|v| 1.0 / v);
            let mut w: Vec<ComplexMatrix> = directions.iter().map(|d| &sinv * d).collect();
            w.push(-&sinv);
            let mut g: Vec<f64> = w.iter().map(|wk| -wk.trace().re).collect();
            g[m - 1] -= kappa;
            let mut h = vec![0.0; m * m];
            for a in 0..m {
                for b in a..m {
                    let wt = w[b].transpose();
                    let v: f64 = w[a].data().iter().zip(wt.data()).map(|(p, q)| (p * q).re).sum();
                    h[a * m + b] = v;
                    h[b * m + a] = v;
                }
            }
            let dx = cholesky_solve(&h, &g)?;
            let decrement: f64 = dx.iter().zip(&g).map(|(a, b)| a * b).sum();
            if decrement < 1e-10 {
                break;
            }
            let f0 = objective(&x, kappa);
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - alpha * d).collect();
                if objective(&trial, kappa) <= f0 - 0.25 * alpha * decrement {
                    x = trial;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-12 {
                    break;
                }
            }
            if alpha < 1e-12 {
                break;
            }
        }
        let t = x[m - 1];
        let deficit = (-t).max(0.0) * (kf as f64).sqrt();
        if deficit <= opts.tol_feasible {
            let mut x0 = x.clone();
            x0[m - 1] = 0.0;
            let w = face.expand(&operator(&x0));
            if let Some(sigma) = verified_witness(face, &w, rho) {
                return Some(FeasibilityResult {
                    status: Status::Feasible,
                    witness: Some(sigma),
                    residual: deficit,
                    iterations: steps,
                });
            }
        }
        let upper = t + kf as f64 / kappa;
        if upper < -opts.tol_infeasible {
            return Some(FeasibilityResult {
                status: Status::Infeasible,
                witness: None,
                residual: -upper,
                iterations: steps,
            });
        }
        if upper < 0.0 && kf as f64 / kappa < 1e-3 * (-upper) {
            // Converged just below zero: leave the verdict to the projections.
            return None;
        }
        kappa *= 10.0;
    }
    None
}

/// The antisymmetric part of `B ⊗ B'` is at most the singlet, so the only
/// candidate is `ρ_A ⊗ |Ψ⁻⟩⟨Ψ⁻|`, valid iff `ρ = ρ_A ⊗ I/2`.
fn fermionic_small(rho: &BipartiteState) -> FeasibilityResult {
    let (d_a, d_b) = rho.dims();
    let infeasible = |residual| FeasibilityResult {
        status: Status::Infeasible,
        witness: None,
        residual,
        iterations: 0,
    };
    if d_b == 1 {
        return infeasible(1.0);
    }
    let r_a = rho.reduced_a();
    let residual = trace_norm(&(&tensor(&r_a, &ComplexMatrix::identity(2)).scale_real(0.5) - rho.matrix()));
    if residual > 1e-9 {
        return infeasible(residual);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
    let sigma = tensor(&r_a, &ComplexMatrix::projector(&singlet));
    match TripartiteExtension::new(sigma, d_a, d_b) {
        Ok(w) if is_symmetric_extension(&w, rho, WITNESS_TOL).unwrap_or(false) => FeasibilityResult {
            status: Status::Feasible,
            witness: Some(w),
            residual,
            iterations: 0,
        },
        _ => infeasible(residual),
    }
}

/// Replaces every antisymmetric eigenvector `|ψ⟩_A|Ψ⁻⟩` of a symmetric
/// extension with a qubit `B` by `|ψ⟩_A|Ψ⁺⟩`, leaving the `AB` reduction
/// unchanged.
pub fn bosonic_from_symmetric(sigma: &TripartiteExtension) -> Result<TripartiteExtension> {
    let (d_a, d_b) = sigma.dims();
    if d_b != 2 {
        return Err(Error::WrongDimension(format!("B must be a qubit, got dimension {d_b}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let terms = spectral_symmetric_decomposition(sigma)?;
    let n = d_a * 4;
    let mut out = ComplexMatrix::zeros(n, n);
    for t in terms {
        if t.parity > 0 {
            out += &ComplexMatrix::projector(&t.vector).scale_real(t.weight);
            continue;
        }
        // ψ_a = ⟨Ψ⁻|_BB' φ
        let mut replaced = vec![ZERO; n];
        for a in 0..d_a {
            let c = (t.vector[a * 4 + 1] - t.vector[a * 4 + 2]) * h;
            replaced[a * 4 + 1] = c * h;
            replaced[a * 4 + 2] = c * h;
        }
        out += &ComplexMatrix::projector(&replaced).scale_real(t.weight);
    }
    TripartiteExtension::new(out, d_a, d_b)
}

/// `‖(I − P)/2 · σ‖_F`, zero for bosonic operators.
pub fn antisymmetric_weight(sigma: &TripartiteExtension) -> f64 {
    let m = sigma.matrix();
    let (_, d_b) = sigma.dims();
    (m - &swap_rows(m, d_b)).scale_real(0.5).frobenius_norm()
}

/// Totally antisymmetric-in-`BB'` three-qutrit vector
/// `α(|012⟩ − |021⟩) + β(|120⟩ − |102⟩) + γ(|201⟩ − |210⟩)`, normalized.
pub fn fermionic_qutrit_vector(alpha: f64, beta: f64, gamma: f64) -> Result<Vec<C64>> {
    if alpha == 0.0 || beta == 0.0 || gamma == 0.0 {
        return Err(Error::OutOfRange("coefficients must be non-zero".into()));
    }
    let idx = |a: usize, b: usize, c: usize| a * 9 + b * 3 + c;
    let mut v = vec![ZERO; 27];
    for (a, b, c, w) in [
        (0, 1, 2, alpha),
        (0, 2, 1, -alpha),
        (1, 2, 0, beta),
        (1, 0, 2, -beta),
        (2, 0, 1, gamma),
        (2, 1, 0, -gamma),
    ] {
        v[idx(a, b, c)] = C64::new(w, 0.0);
    }
    crate::linalg::normalize(&mut v);
    Ok(v)
}

/// The qutrit state with a fermionic extension, its verdict under bosonic
/// symmetry and its verdict without symmetry constraint.
pub fn fermionic_qutrit_example() -> (BipartiteState, FeasibilityResult, FeasibilityResult) {
    let c = 1.0 / 6.0_f64.sqrt();
    let v = fermionic_qutrit_vector(c, c, c).expect("non-zero coefficients");
    let sigma = TripartiteExtension::from_pure(&v, 3, 3).expect("pure state");
    let rho = BipartiteState::new(sigma.reduced_ab(), 3, 3).expect("valid reduction");
    let bosonic = find_symmetric_extension(&rho, &OracleOptions::with_symmetry(Symmetry::Bosonic))
        .expect("small dimension");
    let any = find_symmetric_extension(&rho, &OracleOptions::default()).expect("small dimension");
    (rho, bosonic, any)
}

/// Mixture `(1 − w) ρ + w I/(d_A d_B)`.
pub fn mix_with_identity(rho: &BipartiteState, w: f64) -> Result<BipartiteState> {
    let (d_a, d_b) = rho.dims();
    let n = d_a * d_b;
    let m = &rho.matrix().scale_real(1.0 - w) + &ComplexMatrix::identity(n).scale_real(w / n as f64);
    BipartiteState::new(m, d_a, d_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{bell_state, werner, Bell};
    use crate::random::{random_unitary, Rng};
    use crate::twoqubit::{bell_extendible, random_pure_extendible, BellDiagonalParams, ZCorrParams};

    fn opts() -> OracleOptions {
        OracleOptions::default()
    }

    #[test]
    fn affine_projection_is_idempotent_and_exact() {
        let mut rng = Rng::seed(1);
        for sign in [0, 1, -1] {
            for (d_a, d_b) in [(2, 2), (2, 3), (3, 3)] {
                let rho = BipartiteState::new(rng.random_density(d_a * d_b, d_a * d_b), d_a, d_b).unwrap();
                let p = AffineProjector {
                    rho: rho.matrix().clone(),
                    d_a,
                    d_b,
                    sign,
                };
                if sign == -1 && d_b == 2 {
                    continue;
                }
                let n = d_a * d_b * d_b;
                let m = crate::random::random_hermitian(n, &mut rng);
                let x = p.project(&m);
                let red = partial_trace(&x, &p.dims(), &[0, 1]).unwrap();
                assert!(red.max_diff(rho.matrix()) < 1e-12);
                assert!(p.sector(&x).max_diff(&x) < 1e-12);
                assert!(p.project(&x).max_diff(&x) < 1e-12);
                // Orthogonality: m − x is orthogonal to any difference within the set.
                let other = p.project(&crate::random::random_hermitian(n, &mut rng));
                let ip = (&m - &x).inner(&(&other - &x));
                assert!(ip.norm() < 1e-9, "sign {sign} dims {d_a}x{d_b}: {ip}");
            }
        }
    }

    #[test]
    fn pure_extendible_states_are_feasible() {
        let mut rng = Rng::seed(2);
        for _ in 0..10 {
            let rho = random_pure_extendible(&mut rng);
            let r = find_symmetric_extension(&rho, &opts()).unwrap();
            assert_eq!(r.status, Status::Feasible, "{r:?}");
            assert!(is_symmetric_extension(r.witness.as_ref().unwrap(), &rho, WITNESS_TOL).unwrap());
        }
    }

    #[test]
    fn bell_and_werner_examples() {
        let r = find_symmetric_extension(&bell_state(Bell::PhiPlus), &opts()).unwrap();
        assert_eq!(r.status, Status::Infeasible);
        assert!(find_symmetric_extension(&werner(0.6).unwrap(), &opts()).unwrap().is_feasible());
        let r = find_symmetric_extension(&werner(0.75).unwrap(), &opts()).unwrap();
        assert_eq!(r.status, Status::Infeasible);
        assert!(r.residual > 1e-6);
    }

    #[test]
    fn zcorr_state_is_feasible() {
        let z = ZCorrParams::new([0.4, 0.3, 0.2, 0.1], 0.15, 0.1).unwrap();
        let r = find_symmetric_extension(&z.state().unwrap(), &opts()).unwrap();
        assert!(r.is_feasible());
    }

    #[test]
    fn too_large_is_rejected() {
        let rho = BipartiteState::maximally_mixed(5, 5);
        assert!(find_symmetric_extension(&rho, &opts()).is_ok());
        let rho = BipartiteState::maximally_mixed(2, 23);
        assert!(matches!(find_symmetric_extension(&rho, &opts()), Err(Error::TooLarge(1058))));
    }

    #[test]
    fn verdict_invariant_under_local_unitaries() {
        let mut rng = Rng::seed(3);
        for _ in 0..10 {
            let rho = BipartiteState::new(rng.random_density(4, 4), 2, 2).unwrap();
            let m = crate::twoqubit::conjecture_margin(&rho).unwrap();
            if m.abs() < 1e-3 {
                continue;
            }
            let ua = random_unitary(2, &mut rng);
            let ub = random_unitary(2, &mut rng);
            let r1 = find_symmetric_extension(&rho, &opts()).unwrap();
            let r2 = find_symmetric_extension(&rho.local_unitary(&ua, &ub).unwrap(), &opts()).unwrap();
            assert_eq!(r1.status, r2.status);
        }
    }

    #[test]
    fn agrees_with_bell_diagonal_closed_form() {
        let mut rng = Rng::seed(4);
        let mut checked = 0;
        while checked < 20 {
            let s = rng.simplex(4);
            let p = BellDiagonalParams::new([s[0], s[1], s[2], s[3]]).unwrap();
            let ineq = crate::twoqubit::bell_inequalities(&p);
            let margin = ineq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if margin.abs() < 1e-3 {
                continue;
            }
            let r = find_symmetric_extension(&p.state(), &opts()).unwrap();
            assert_ne!(r.status, Status::Undecided);
            assert_eq!(r.is_feasible(), bell_extendible(&p));
            checked += 1;
        }
    }

    #[test]
    fn mixing_with_identity_is_monotone() {
        let bell = bell_state(Bell::PhiPlus);
        let verdicts: Vec<bool> = [0.2, 0.4, 0.6, 0.8, 1.0]
            .iter()
            .map(|&w| {
                find_symmetric_extension(&mix_with_identity(&bell, w).unwrap(), &opts())
                    .unwrap()
                    .is_feasible()
            })
            .collect();
        let first = verdicts.iter().position(|&v| v).unwrap();
        assert!(verdicts[first..].iter().all(|&v| v));
        assert_eq!(verdicts, vec![false, true, true, true, true]);
    }

    #[test]
    fn bosonic_conversion() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
        let triplet = [ZERO, C64::new(h, 0.0), C64::new(h, 0.0), ZERO];
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let sigma = TripartiteExtension::new(tensor(&half, &ComplexMatrix::projector(&singlet)), 2, 2).unwrap();
        let b = bosonic_from_symmetric(&sigma).unwrap();
        assert!(b.matrix().max_diff(&tensor(&half, &ComplexMatrix::projector(&triplet))) < 1e-12);
        assert!(b.reduced_ab().max_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-12);
        let again = bosonic_from_symmetric(&b).unwrap();
        assert!(again.matrix().max_diff(b.matrix()) < 1e-12);
        assert!(antisymmetric_weight(&b) < 1e-12);
    }

    #[test]
    fn bosonic_implies_any_and_qubit_converse() {
        let w = werner(0.5).unwrap();
        let b = find_symmetric_extension(&w, &OracleOptions::with_symmetry(Symmetry::Bosonic)).unwrap();
        assert!(b.is_feasible());
        assert!(find_symmetric_extension(&w, &opts()).unwrap().is_feasible());
    }

    #[test]
    fn fermionic_qubit_cases() {
        let mixed = BipartiteState::maximally_mixed(2, 2);
        let r = find_symmetric_extension(&mixed, &OracleOptions::with_symmetry(Symmetry::Fermionic)).unwrap();
        assert!(r.is_feasible());
        let r = find_symmetric_extension(&werner(0.3).unwrap(), &OracleOptions::with_symmetry(Symmetry::Fermionic))
            .unwrap();
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn qutrit_fermionic_example() {
        let c = 1.0 / 6.0_f64.sqrt();
        let v = fermionic_qutrit_vector(c, c, c).unwrap();
        let sigma = TripartiteExtension::from_pure(&v, 3, 3).unwrap();
        assert!(conjugate_by_swap(sigma.matrix(), 3).max_diff(sigma.matrix()) < 1e-12);
        let (_, bosonic, any) = fermionic_qutrit_example();
        assert_eq!(any.status, Status::Feasible);
        assert_ne!(bosonic.status, Status::Feasible);
        assert!(fermionic_qutrit_vector(0.0, 1.0, 1.0).is_err());
    }
}
