//! Choosing a method for the extension question and running it.

use anyhow::{bail, Result};
use symext::channels::rank2_marginal_rank_bound;
use symext::linalg::tensor;
use symext::oracle::{find_symmetric_extension, WITNESS_TOL};
use symext::states::{is_symmetric_extension, spectrum_condition, spectrum_deviation};
use symext::twoqubit::{
    bell_extendible, bell_inequalities, construct_pure_extension, conjecture_verdict, global_and_local_lambda_max,
    rank2_condition, rank2_decompose, zcorr_build_extension, zcorr_extendible, zcorr_witness, BellDiagonalParams,
    ZCorrParams,
};
use symext::{BipartiteState, OracleOptions, Status, Symmetry, TripartiteExtension};

use crate::verdict::{Answer, Verdict};

pub const QUESTION: &str = "symmetric-extension";
const BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Spectrum,
    Conjecture,
    Oracle,
}

pub struct Decision {
    pub verdict: Verdict,
    pub witness: Option<TripartiteExtension>,
}

impl Decision {
    fn new(verdict: Verdict) -> Self {
        Decision { verdict, witness: None }
    }

    fn with_witness(mut self, w: TripartiteExtension) -> Self {
        self.witness = Some(w);
        self
    }

    fn with_residual_value(mut self, key: &str, value: f64) -> Self {
        self.verdict.residuals.insert(key.into(), value);
        self
    }
}

fn closed(name: &str, answer: bool) -> Verdict {
    Verdict::new(QUESTION, Answer::from_bool(answer), format!("closed-form({name})"), true)
}

/// Pure states: extendible iff `ρ_B` is pure, witnessed by `ρ_AB ⊗ ρ_B`.
fn pure_case(rho: &BipartiteState) -> Result<Decision> {
    let holds = spectrum_condition(rho);
    let v = Verdict::new(QUESTION, Answer::from_bool(holds), "spectrum", true)
        .with_residual("spectrum", spectrum_deviation(rho));
    if !holds {
        return Ok(Decision::new(v));
    }
    let (d_a, d_b) = rho.dims();
    let w = TripartiteExtension::new(tensor(rho.matrix(), &rho.reduced_b()), d_a, d_b)?;
    Ok(Decision::new(v).with_witness(w))
}

fn spectrum_method(rho: &BipartiteState) -> Result<Decision> {
    if rho.rank() == 1 {
        return pure_case(rho);
    }
    let dev = spectrum_deviation(rho);
    if rho.dims() == (2, 2) && spectrum_condition(rho) {
        let w = construct_pure_extension(rho)?.to_extension()?;
        let v = Verdict::new(QUESTION, Answer::Yes, "spectrum", true).with_residual("spectrum", dev);
        return Ok(Decision::new(v).with_witness(w));
    }
    Ok(Decision::new(
        Verdict::new(QUESTION, Answer::Undecided, "spectrum", false).with_residual("spectrum", dev),
    ))
}

fn conjecture_method(rho: &BipartiteState) -> Result<Decision> {
    if rho.dims() != (2, 2) {
        bail!("the conjecture method applies to two qubits only");
    }
    let c = conjecture_verdict(rho)?;
    Ok(Decision::new(
        Verdict::new(
            QUESTION,
            Answer::from_bool(c.holds),
            format!("conjecture({})", c.regime.name()),
            c.regime.proven(),
        )
        .with_residual("margin", c.margin),
    ))
}

pub fn oracle_method(rho: &BipartiteState, opts: &OracleOptions) -> Result<Decision> {
    let r = find_symmetric_extension(rho, opts)?;
    let answer = match r.status {
        Status::Feasible => Answer::Yes,
        Status::Infeasible => Answer::No,
        Status::Undecided => Answer::Undecided,
    };
    let v = Verdict::new(QUESTION, answer, "oracle", r.status == Status::Feasible)
        .with_residual("oracle", r.residual)
        .with_residual("iterations", r.iterations as f64);
    Ok(Decision {
        verdict: v,
        witness: r.witness,
    })
}

/// Proven closed forms first, the oracle otherwise.
fn auto_method(rho: &BipartiteState, opts: &OracleOptions) -> Result<Option<Decision>> {
    if opts.symmetry != Symmetry::Any {
        return Ok(None);
    }
    if rho.rank() == 1 {
        return pure_case(rho).map(Some);
    }
    if rho.dims() == (2, 2) {
        if spectrum_condition(rho) {
            return spectrum_method(rho).map(Some);
        }
        if rho.rank() == 2 {
            let (global, local) = global_and_local_lambda_max(rho);
            let margin = local - global;
            if margin.abs() > BAND {
                let holds = rank2_condition(rho)?;
                let mut d = Decision::new(closed("rank2", holds).with_residual("margin", margin));
                if holds {
                    let dec = rank2_decompose(rho)?;
                    d = d
                        .with_witness(dec.extension()?)
                        .with_residual_value("reconstruction", dec.reconstruction_residual(rho));
                }
                return Ok(Some(d));
            }
        }
        if let Some(p) = BellDiagonalParams::from_maximally_mixed_marginals(rho) {
            let best = bell_inequalities(&p).iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if best.abs() > BAND {
                return Ok(Some(Decision::new(
                    closed("bell-diagonal", bell_extendible(&p)).with_residual("inequality", best),
                )));
            }
        }
        if let Some(z) = ZCorrParams::from_state(rho) {
            if z.y == 0.0 {
                return Ok(Some(Decision::new(closed("z-correlated", zcorr_extendible(&z)?))));
            }
            if let Some((s, t)) = zcorr_witness(&z)? {
                let w = zcorr_build_extension(&z, s, t)?;
                return Ok(Some(Decision::new(closed("z-correlated", true)).with_witness(w)));
            }
        }
        return Ok(None);
    }
    if rho.rank() == 2 && !rank2_marginal_rank_bound(rho)? {
        return Ok(Some(Decision::new(closed("rank2-marginal", false))));
    }
    if rho.rank() == 2 && rho.d_b() == 2 && !rank2_condition(rho)? {
        let (global, local) = global_and_local_lambda_max(rho);
        if global - local > BAND {
            return Ok(Some(Decision::new(
                closed("rank2", false).with_residual("margin", local - global),
            )));
        }
    }
    Ok(None)
}

pub fn decide(rho: &BipartiteState, method: Method, opts: &OracleOptions) -> Result<Decision> {
    if method != Method::Oracle && method != Method::Auto && opts.symmetry != Symmetry::Any {
        bail!("--symmetry other than `any` requires --method oracle or auto");
    }
    match method {
        Method::Spectrum => spectrum_method(rho),
        Method::Conjecture => conjecture_method(rho),
        Method::Oracle => oracle_method(rho, opts),
        Method::Auto => match auto_method(rho, opts)? {
            Some(d) => Ok(d),
            None => oracle_method(rho, opts),
        },
    }
}

/// Like `decide`, but a `yes` always comes with a verified witness: when
/// the deciding method has none, the oracle is asked for one.
pub fn decide_with_witness(rho: &BipartiteState, method: Method, opts: &OracleOptions) -> Result<Decision> {
    let mut d = decide(rho, method, opts)?;
    if d.verdict.answer == Answer::Yes && d.witness.is_none() {
        let o = oracle_method(rho, opts)?;
        match o.witness {
            Some(w) => d.witness = Some(w),
            None => {
                d.verdict.answer = Answer::Undecided;
                d.verdict.method = format!("{}+oracle", d.verdict.method);
                d.verdict.proven = false;
            }
        }
    }
    if let Some(w) = &d.witness {
        if !is_symmetric_extension(w, rho, WITNESS_TOL)? {
            bail!("internal error: witness fails verification");
        }
        d.verdict.residuals.insert("witness.symmetry".into(), w.symmetry_residual());
        d.verdict.residuals.insert("witness.reduction".into(), w.reduction_residual(rho)?);
    }
    Ok(d)
}
