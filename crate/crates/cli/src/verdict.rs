use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Undecided,
}

impl Answer {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Undecided => "undecided",
        }
    }

    /// 0 yes, 1 no, 3 undecided.
    pub fn exit_code(self) -> i32 {
        match self {
            Answer::Yes => 0,
            Answer::No => 1,
            Answer::Undecided => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub question: String,
    pub answer: Answer,
    pub method: String,
    /// True only when the method is a theorem or a verified witness.
    pub proven: bool,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_path: Option<String>,
}

impl Verdict {
    pub fn new(question: &str, answer: Answer, method: impl Into<String>, proven: bool) -> Self {
        Verdict {
            question: question.into(),
            answer,
            method: method.into(),
            proven,
            residuals: BTreeMap::new(),
            witness_path: None,
        }
    }

    pub fn with_residual(mut self, key: &str, value: f64) -> Self {
        self.residuals.insert(key.into(), value);
        self
    }

    /// `key: value` lines, keys prefixed with `prefix`.
    pub fn lines(&self, prefix: &str) -> Vec<String> {
        let mut out = vec![
            format!("{prefix}question: {}", self.question),
            format!("{prefix}answer: {}", self.answer.name()),
            format!("{prefix}method: {}", self.method),
            format!("{prefix}proven: {}", self.proven),
        ];
        for (k, v) in &self.residuals {
            out.push(format!("{prefix}residual.{k}: {}", crate::io::fmt_g17(*v)));
        }
        if let Some(p) = &self.witness_path {
            out.push(format!("{prefix}witness: {p}"));
        }
        out
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            serde_json::to_string_pretty(self).expect("serializable") + "\n"
        } else {
            self.lines("").join("\n") + "\n"
        }
    }
}
