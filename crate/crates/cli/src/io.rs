//! File formats: states, extensions and Kraus sets as JSON with `[re, im]`
//! pairs, and the number format used in CSV output.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use symext::channels::Channel;
use symext::{BipartiteState, ComplexMatrix, TripartiteExtension, C64};

/// `dims` is `[d_A, d_B]` for a state and `[d_A, d_B, d_B]` for an extension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrausFile {
    /// `[d_in, d_out]`.
    pub dims: [usize; 2],
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>], n_rows: usize, n_cols: usize, what: &str) -> Result<ComplexMatrix> {
    if rows.len() != n_rows {
        bail!("{what}: {} rows, expected {n_rows}", rows.len());
    }
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n_cols {
            bail!("{what}: row {} has {} entries, expected {n_cols}", i + 1, row.len());
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                bail!("{what}: entry ({}, {}) is not finite", i + 1, j + 1);
            }
            data.push(C64::new(re, im));
        }
    }
    Ok(ComplexMatrix::from_vec(n_rows, n_cols, data)?)
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl StateFile {
    pub fn from_state(rho: &BipartiteState) -> Self {
        let (d_a, d_b) = rho.dims();
        StateFile {
            dims: vec![d_a, d_b],
            matrix: matrix_to_rows(rho.matrix()),
        }
    }

    pub fn from_extension(sigma: &TripartiteExtension) -> Self {
        let (d_a, d_b) = sigma.dims();
        StateFile {
            dims: vec![d_a, d_b, d_b],
            matrix: matrix_to_rows(sigma.matrix()),
        }
    }

    fn matrix(&self) -> Result<ComplexMatrix> {
        let n: usize = self.dims.iter().product();
        if n == 0 {
            bail!("dims {:?} contain a zero", self.dims);
        }
        rows_to_matrix(&self.matrix, n, n, "matrix")
    }

    pub fn to_state(&self) -> Result<BipartiteState> {
        let [d_a, d_b] = self.dims[..] else {
            bail!("a state needs dims [d_A, d_B], got {:?}", self.dims);
        };
        Ok(BipartiteState::new(self.matrix()?, d_a, d_b)?)
    }

    pub fn to_extension(&self) -> Result<TripartiteExtension> {
        let [d_a, d_b, d_bp] = self.dims[..] else {
            bail!("an extension needs dims [d_A, d_B, d_B'], got {:?}", self.dims);
        };
        if d_b != d_bp {
            bail!("B and B' dimensions differ: {d_b} vs {d_bp}");
        }
        Ok(TripartiteExtension::new(self.matrix()?, d_a, d_b)?)
    }

    /// One matrix row per line.
    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self.matrix.iter().map(|r| format!("    {}", row_json(r))).collect();
        format!(
            "{{\n  \"dims\": {},\n  \"matrix\": [\n{}\n  ]\n}}\n",
            serde_json::to_string(&self.dims).expect("integers"),
            rows.join(",\n")
        )
    }
}

fn row_json(row: &[[f64; 2]]) -> String {
    serde_json::to_string(row).expect("finite entries")
}

impl KrausFile {
    pub fn from_channel(n: &Channel) -> Self {
        KrausFile {
            dims: [n.d_in(), n.d_out()],
            kraus: n.kraus().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let [d_in, d_out] = self.dims;
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, rows)| rows_to_matrix(rows, d_out, d_in, &format!("Kraus operator {}", k + 1)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Channel::new(kraus)?)
    }

    pub fn to_json(&self) -> String {
        let ops: Vec<String> = self
            .kraus
            .iter()
            .map(|rows| {
                let lines: Vec<String> = rows.iter().map(|r| format!("      {}", row_json(r))).collect();
                format!("    [\n{}\n    ]", lines.join(",\n"))
            })
            .collect();
        format!(
            "{{\n  \"dims\": {},\n  \"kraus\": [\n{}\n  ]\n}}\n",
            serde_json::to_string(&self.dims).expect("integers"),
            ops.join(",\n")
        )
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
}

pub fn read_state(path: &Path) -> Result<BipartiteState> {
    read_json::<StateFile>(path)?
        .to_state()
        .with_context(|| format!("{}: invalid state", path.display()))
}

pub fn read_extension(path: &Path) -> Result<TripartiteExtension> {
    read_json::<StateFile>(path)?
        .to_extension()
        .with_context(|| format!("{}: invalid extension", path.display()))
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    read_json::<KrausFile>(path)?
        .to_channel()
        .with_context(|| format!("{}: invalid Kraus set", path.display()))
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        let m = strip_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c() {
        assert_eq!(fmt_g17(2.0 / 3.0), "0.66666666666666663");
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1e-10), "1.0000000000000000e-10".replace("1.0000000000000000", "1"));
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(-0.25), "-0.25");
        assert_eq!(fmt_g17(123456.0), "123456");
    }

    #[test]
    fn state_roundtrip() {
        let rho = symext::gallery::werner(0.3).unwrap();
        let text = StateFile::from_state(&rho).to_json();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        assert!(back.to_state().unwrap().matrix().max_diff(rho.matrix()) == 0.0);
    }

    #[test]
    fn malformed_rows_are_reported() {
        let f = StateFile {
            dims: vec![2, 1],
            matrix: vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]],
        };
        let err = f.to_state().unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }
}
