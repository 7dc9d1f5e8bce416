use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;
use symext::channels::{
    choi_state, classify_channel, complementary_channel, Channel, ChannelClass, ChannelFeasibility, ChannelOptions,
    ChannelTag, Method as ChannelMethod,
};
use symext::gallery;
use symext::linalg::von_neumann_entropy;
use symext::oracle::{fermionic_qutrit_example, find_symmetric_extension};
use symext::random::Rng;
use symext::states::{apply_filter_a, coherent_information, is_symmetric_extension, spectrum_condition, spectrum_deviation};
use symext::twoqubit::{
    bell_conjecture_form, bell_conjecture_margin, bell_extendible, bell_inequalities, check_conjecture,
    zcorr_bound_y0, zcorr_extendible, zcorr_grid_max_x, BellDiagonalParams, ZCorrParams,
};
use symext::{BipartiteState, OracleOptions, Status};

use crate::args::{ChannelCommand, Cli, Command, GalleryCommand, OracleArgs, ScanCommand};
use crate::decide::{decide, decide_with_witness, Method};
use crate::io::{fmt_g17, read_channel, read_extension, read_state, write_text, KrausFile, StateFile};
use crate::verdict::{Answer, Verdict};

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Check { file, decide: d, json } => {
            let rho = read_state(&file)?;
            let decision = decide(&rho, d.method.into(), &d.oracle.options())?;
            print!("{}", decision.verdict.render(json));
            Ok(decision.verdict.answer.exit_code())
        }
        Command::Extend {
            file,
            out,
            decide: d,
            json,
        } => extend(&file, out.as_deref(), d.method.into(), &d.oracle.options(), json),
        Command::VerifyExtension {
            extension,
            state,
            tol,
            json,
        } => {
            let sigma = read_extension(&extension)?;
            let rho = read_state(&state)?;
            let ok = is_symmetric_extension(&sigma, &rho, tol)?;
            let mut v = Verdict::new("is-symmetric-extension", Answer::from_bool(ok), "direct", true)
                .with_residual("symmetry", sigma.symmetry_residual());
            if sigma.dims() == rho.dims() {
                v = v.with_residual("reduction", sigma.reduction_residual(&rho)?);
            }
            print!("{}", v.render(json));
            Ok(v.answer.exit_code())
        }
        Command::Channel { command } => channel(command),
        Command::Gallery { name } => gallery_cmd(name),
        Command::Scan { family } => scan(family),
    }
}

fn extend(file: &Path, out: Option<&Path>, method: Method, opts: &OracleOptions, json: bool) -> Result<i32> {
    let rho = read_state(file)?;
    let mut d = decide_with_witness(&rho, method, opts)?;
    if let Some(w) = &d.witness {
        let text = StateFile::from_extension(w).to_json();
        write_text(out, &text)?;
        if let Some(p) = out {
            // Re-read what was written and verify it.
            let back = read_extension(p)?;
            if !is_symmetric_extension(&back, &rho, symext::oracle::WITNESS_TOL)? {
                bail!("written witness {} fails verification", p.display());
            }
            d.verdict.witness_path = Some(p.display().to_string());
        }
    }
    // With the witness on stdout the verdict goes to stderr.
    if out.is_some() || d.witness.is_none() {
        print!("{}", d.verdict.render(json));
    } else {
        eprint!("{}", d.verdict.render(json));
    }
    Ok(d.verdict.answer.exit_code())
}

fn status_answer(s: Status) -> Answer {
    match s {
        Status::Feasible => Answer::Yes,
        Status::Infeasible => Answer::No,
        Status::Undecided => Answer::Undecided,
    }
}

fn channel_verdict(question: &str, f: &ChannelFeasibility) -> Verdict {
    let method = match f.method {
        ChannelMethod::Oracle => "oracle".to_string(),
        m => format!("closed-form({})", m.name()),
    };
    let proven = f.method != ChannelMethod::Oracle || f.result.status == Status::Feasible;
    Verdict::new(question, status_answer(f.result.status), method, proven).with_residual("value", f.result.residual)
}

#[derive(Serialize)]
struct ChannelReport {
    question: &'static str,
    class: &'static str,
    degradable: Verdict,
    anti_degradable: Verdict,
}

impl ChannelReport {
    fn new(c: &ChannelClass) -> Self {
        ChannelReport {
            question: "channel-class",
            class: c.tag.name(),
            degradable: channel_verdict("degradable", &c.degradable),
            anti_degradable: channel_verdict("anti-degradable", &c.anti_degradable),
        }
    }

    fn render(&self, json: bool) -> String {
        if json {
            return serde_json::to_string_pretty(self).expect("serializable") + "\n";
        }
        let mut lines = vec![format!("question: {}", self.question), format!("class: {}", self.class)];
        lines.extend(self.degradable.lines("degradable."));
        lines.extend(self.anti_degradable.lines("anti-degradable."));
        lines.join("\n") + "\n"
    }
}

fn channel_options(oracle: &OracleArgs, no_shortcuts: bool) -> ChannelOptions {
    ChannelOptions {
        oracle: oracle.options(),
        shortcuts: !no_shortcuts,
    }
}

fn channel(command: ChannelCommand) -> Result<i32> {
    match command {
        ChannelCommand::Classify {
            kraus,
            no_shortcuts,
            oracle,
            json,
        } => {
            let n = read_channel(&kraus)?;
            let c = classify_channel(&n, &channel_options(&oracle, no_shortcuts))?;
            print!("{}", ChannelReport::new(&c).render(json));
            Ok(if c.tag == ChannelTag::Undecided { 3 } else { 0 })
        }
        ChannelCommand::Choi { kraus, out } => {
            let n = read_channel(&kraus)?;
            write_text(out.as_deref(), &StateFile::from_state(&choi_state(&n)?.state).to_json())?;
            Ok(0)
        }
        ChannelCommand::Complement { kraus, out } => {
            let n = read_channel(&kraus)?;
            write_text(out.as_deref(), &KrausFile::from_channel(&complementary_channel(&n)?).to_json())?;
            Ok(0)
        }
    }
}

fn kv(key: &str, value: impl std::fmt::Display) {
    println!("{key}: {value}");
}

fn oracle_line(rho: &BipartiteState) -> Result<Answer> {
    let r = find_symmetric_extension(rho, &OracleOptions::default())?;
    let a = status_answer(r.status);
    kv("oracle", format!("{} (residual {})", a.name(), fmt_g17(r.residual)));
    Ok(a)
}

fn gallery_cmd(name: GalleryCommand) -> Result<i32> {
    match name {
        GalleryCommand::Example1 => {
            let rho = gallery::example1_state();
            kv("name", "example1");
            kv("construction", "I/2 on A1 tensored with the Bell pair Phi+ on A2 B; A = A1 A2 (dim 4), B qubit");
            kv("expected", "spectrum condition true, no symmetric extension");
            kv("spectrum_condition", spectrum_condition(&rho));
            kv("spectrum_deviation", fmt_g17(spectrum_deviation(&rho)));
            let after = gallery::example1_after_discard();
            let bell = gallery::bell_state(gallery::Bell::PhiPlus);
            kv("after_discarding_a1.distance_to_bell", fmt_g17(after.trace_distance(&bell)));
            kv("after_discarding_a1.spectrum_condition", spectrum_condition(&after));
            kv("reason", "discarding A1 leaves a pure entangled state, which has no extension");
            kv("verdict", "no");
            oracle_line(&rho)?;
            Ok(1)
        }
        GalleryCommand::Example2 => {
            let rho = gallery::example2_state();
            kv("name", "example2");
            kv("construction", "qutrit-qubit reduction of |001>/sqrt6 + |110>/sqrt6 + sqrt(2/3)|211>");
            kv("expected", "spectrum condition true, no symmetric extension");
            kv("spectrum_condition", spectrum_condition(&rho));
            let f = apply_filter_a(&rho, &gallery::example2_filter())?;
            let out = f.normalized()?;
            kv("filter", "|0><0| + |2><2| on A");
            kv("filter.probability", fmt_g17(f.probability));
            kv("filtered.purity", fmt_g17(out.purity()));
            kv("filtered.entanglement_entropy", fmt_g17(von_neumann_entropy(&out.reduced_b())?));
            kv("reason", "the filter yields a pure entangled state, which has no extension");
            kv("verdict", "no");
            oracle_line(&rho)?;
            Ok(1)
        }
        GalleryCommand::Example3 { s, p } => {
            let rho = gallery::example3_state(s)?;
            kv("name", "example3");
            kv("s", fmt_g17(s));
            kv("p", fmt_g17(p));
            kv("expected", "spectrum condition true, no symmetric extension");
            kv("spectrum_condition", spectrum_condition(&rho));
            let filtered = apply_filter_a(&rho, &gallery::example3_filter(p))?.normalized()?;
            let fmt = |v: &[f64]| v.iter().map(|x| fmt_g17(*x)).collect::<Vec<_>>().join(" ");
            let (g, l) = gallery::example3_filtered_spectra(s, p);
            kv("filtered.spectrum", fmt(&filtered.spectrum().values));
            kv("filtered.local_spectrum", fmt(&filtered.local_spectrum().values));
            kv("filtered.spectrum_closed_form", fmt(&g));
            kv("filtered.local_spectrum_closed_form", fmt(&l));
            let ci = coherent_information(&filtered);
            kv("filtered.coherent_information", fmt_g17(ci));
            kv("reason", "positive coherent information after a local filter rules out an extension");
            let verdict = if ci > 0.0 { Answer::No } else { Answer::Undecided };
            kv("verdict", verdict.name());
            oracle_line(&rho)?;
            Ok(verdict.exit_code())
        }
        GalleryCommand::QutritFermionic => {
            let (rho, bosonic, any) = fermionic_qutrit_example();
            kv("name", "qutrit-fermionic");
            kv("construction", "reduction of a totally antisymmetric-in-BB' qutrit vector");
            kv("expected", "extension exists, none of them bosonic");
            kv("dims", format!("{}x{}", rho.d_a(), rho.d_b()));
            kv("any", status_answer(any.status).name());
            kv("bosonic", status_answer(bosonic.status).name());
            kv("bosonic.residual", fmt_g17(bosonic.residual));
            Ok(if any.is_feasible() && bosonic.status == Status::Infeasible { 0 } else { 3 })
        }
        GalleryCommand::Werner { steps, csv } => {
            let range = crate::args::RangeArgs {
                from: 0.0,
                to: 1.0,
                steps,
            };
            werner_csv(&range.points(), csv.as_deref())?;
            kv("threshold", fmt_g17(2.0 / 3.0));
            Ok(0)
        }
    }
}

fn yn(b: bool) -> &'static str {
    Answer::from_bool(b).name()
}

fn write_csv(path: Option<&Path>, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    write_text(path, &String::from_utf8(bytes)?)
}

fn werner_csv(points: &[f64], path: Option<&Path>) -> Result<()> {
    let mut rows = Vec::with_capacity(points.len());
    for &p in points {
        let rho = gallery::werner(p)?;
        let params = BellDiagonalParams::werner(p)?;
        let oracle = find_symmetric_extension(&rho, &OracleOptions::default())?;
        rows.push(vec![
            fmt_g17(p),
            yn(bell_extendible(&params)).into(),
            yn(check_conjecture(&rho)?).into(),
            status_answer(oracle.status).name().into(),
            fmt_g17(2.0 / 3.0),
        ]);
    }
    write_csv(path, &["p", "closed_form", "conjecture", "oracle", "threshold"], rows)
}

const BAND: f64 = 1e-9;

fn scan(family: ScanCommand) -> Result<i32> {
    match family {
        ScanCommand::Werner { range, csv } => {
            werner_csv(&range.points(), csv.as_deref())?;
            Ok(0)
        }
        ScanCommand::Bell { grid, csv } => {
            let n = grid.max(1);
            let mut rows = Vec::new();
            let mut disagreements = 0usize;
            for i in 0..=n {
                for j in 0..=n - i {
                    for k in 0..=n - i - j {
                        let l = n - i - j - k;
                        let p = [i, j, k, l].map(|v| v as f64 / n as f64);
                        let params = BellDiagonalParams::new(p)?;
                        let ineq = bell_extendible(&params);
                        let conj = bell_conjecture_form(&params);
                        let best = bell_inequalities(&params).iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        let boundary = best.abs() <= BAND || bell_conjecture_margin(&params).abs() <= BAND;
                        if ineq != conj && !boundary {
                            disagreements += 1;
                        }
                        let mut row: Vec<String> = p.iter().map(|x| fmt_g17(*x)).collect();
                        row.extend([yn(ineq).into(), yn(conj).into(), yn(ineq == conj).into(), yn(boundary).into()]);
                        rows.push(row);
                    }
                }
            }
            let count = rows.len();
            write_csv(
                csv.as_deref(),
                &["p_i", "p_x", "p_y", "p_z", "inequalities", "conjecture_form", "agree", "boundary"],
                rows,
            )?;
            eprintln!("points: {count}");
            eprintln!("disagreements_outside_band: {disagreements}");
            Ok(if disagreements == 0 { 0 } else { 1 })
        }
        ScanCommand::Zcorr { samples, seed, csv } => {
            let mut rng = Rng::seed(seed);
            let mut rows = Vec::with_capacity(samples);
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let p = canonical_simplex(&mut rng);
                let x = rng.uniform() * (p[0] * p[3]).sqrt();
                let closed = zcorr_bound_y0(p)?;
                let (grid, _, _) = zcorr_grid_max_x(p)?;
                worst = worst.max((closed - grid).abs());
                let z = ZCorrParams::new(p, x, 0.0)?;
                let rho = z.state()?;
                let mut row: Vec<String> = p.iter().map(|v| fmt_g17(*v)).collect();
                row.extend([
                    fmt_g17(x),
                    fmt_g17(closed),
                    fmt_g17(grid),
                    yn(zcorr_extendible(&z)?).into(),
                    yn(check_conjecture(&rho)?).into(),
                ]);
                rows.push(row);
            }
            write_csv(
                csv.as_deref(),
                &["p1", "p2", "p3", "p4", "x", "bound_closed_form", "bound_grid", "extendible", "conjecture"],
                rows,
            )?;
            eprintln!("max_bound_difference: {}", fmt_g17(worst));
            Ok(0)
        }
        ScanCommand::AmplitudeDamping {
            range,
            no_shortcuts,
            csv,
        } => {
            let opts = ChannelOptions {
                oracle: OracleOptions::default(),
                shortcuts: !no_shortcuts,
            };
            let mut rows = Vec::new();
            for eta in range.points() {
                let c = classify_channel(&Channel::amplitude_damping(eta)?, &opts)?;
                rows.push(vec![
                    fmt_g17(eta),
                    status_answer(c.degradable.result.status).name().into(),
                    status_answer(c.anti_degradable.result.status).name().into(),
                    c.tag.name().into(),
                ]);
            }
            write_csv(csv.as_deref(), &["eta", "degradable", "anti_degradable", "class"], rows)?;
            Ok(0)
        }
    }
}

/// A probability vector with its largest entry first.
fn canonical_simplex(rng: &mut Rng) -> [f64; 4] {
    let v = rng.simplex(4);
    let mut p = [v[0], v[1], v[2], v[3]];
    let imax = (0..4).max_by(|&a, &b| p[a].total_cmp(&p[b])).expect("non-empty");
    p.swap(0, imax);
    p
}
