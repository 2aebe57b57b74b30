use std::fmt;

use super::{is_valid_name, is_valid_value, Sentence};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub sent_id: Option<String>,
    pub token_id: Option<usize>,
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.sent_id.as_deref().unwrap_or("?"))?;
        if let Some(id) = self.token_id {
            write!(f, " token {id}")?;
        }
        write!(f, ": {}: {}", self.rule, self.message)
    }
}

pub fn validate(sentences: &[Sentence]) -> Vec<Diagnostic> {
    sentences.iter().flat_map(validate_sentence).collect()
}

pub fn validate_sentence(sentence: &Sentence) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let sent_id = sentence.sent_id().map(str::to_owned);
    let mut report = |token_id: Option<usize>, rule: &'static str, message: String| {
        out.push(Diagnostic {
            sent_id: sent_id.clone(),
            token_id,
            rule,
            message,
        })
    };

    let n = sentence.tokens.len();
    if n == 0 {
        report(
            None,
            "empty sentence",
            "sentence has no syntactic words".into(),
        );
        return out;
    }

    for (i, token) in sentence.tokens.iter().enumerate() {
        let id = Some(token.id);
        if token.id != i + 1 {
            report(
                id,
                "non-contiguous ids",
                format!("expected id {}, found {}", i + 1, token.id),
            );
        }
        if token.form.is_empty() {
            report(id, "empty form", "FORM is empty".into());
        }
        if !token.is_aligned() {
            report(
                id,
                "morpheme/tag misalignment",
                format!(
                    "lemma `{}` has {} segments but XPOS `{}` has {} tags",
                    token.lemma_column(),
                    token.lemma.len(),
                    token.xpos_column(),
                    token.xpos.len()
                ),
            );
        }
        if token
            .lemma
            .iter()
            .any(|m| m.is_empty() || (m.contains('+') && m != "+") || m.contains('\t'))
        {
            report(
                id,
                "invalid morpheme",
                format!("bad lemma segment in `{}`", token.lemma_column()),
            );
        }
        for (name, value) in token.feats.pairs() {
            if !is_valid_name(name) || !is_valid_value(value) {
                report(id, "invalid feature", format!("`{name}={value}`"));
            }
        }
        if token.head > n {
            report(
                id,
                "head out of range",
                format!("head {} exceeds sentence length {n}", token.head),
            );
        }
        if (token.head == 0) != (token.deprel == "root") {
            report(
                id,
                "root relation",
                format!("head {} with deprel `{}`", token.head, token.deprel),
            );
        }
    }

    let roots: Vec<usize> = sentence
        .tokens
        .iter()
        .filter(|t| t.head == 0)
        .map(|t| t.id)
        .collect();
    match roots.len() {
        0 => report(None, "no root", "no token has head 0".into()),
        1 => {}
        _ => report(
            Some(roots[1]),
            "multiple roots",
            format!("tokens {roots:?} all have head 0"),
        ),
    }

    // Follow heads from each token; anything not reaching 0 within n steps
    // sits on a cycle.
    let heads: Vec<usize> = sentence.tokens.iter().map(|t| t.head).collect();
    let in_range = heads.iter().all(|&h| h <= n);
    if in_range {
        let cyclic = (1..=n).find(|&start| {
            let mut cur = start;
            for _ in 0..=n {
                if cur == 0 {
                    return false;
                }
                cur = heads[cur - 1];
            }
            true
        });
        if let Some(id) = cyclic {
            report(
                Some(id),
                "cycle",
                format!("token {id} does not reach the root"),
            );
        }
    }
    out
}
