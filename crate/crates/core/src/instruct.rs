//! Instruction-tuning records: a sentence rendered as an input block with
//! `head`/`rel` placeholders and an output block with the gold values.
//!
//! Rendering (v1): eight tab-separated columns per word (id, form, lemma,
//! UPOS, XPOS, FEATS, head, rel), every row newline-terminated. The full
//! training text is `instruction + "\n" + input + "\n" + output`, and
//! `output_offset` is the character index where `output` starts in it.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::conllu::{Sentence, Token};

pub const DEFAULT_INSTRUCTION: &str = "아래의 문장을 의존구조문법에 맞게 분석해줘";
pub const HEAD_PLACEHOLDER: &str = "head";
pub const REL_PLACEHOLDER: &str = "rel";
pub const RENDERING_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItRecord {
    pub instruction: String,
    pub input: String,
    pub output: String,
    pub output_offset: usize,
}

impl ItRecord {
    /// The concatenated training text the offset refers to.
    pub fn text(&self) -> String {
        format!("{}\n{}\n{}", self.instruction, self.input, self.output)
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ItError {
    #[error("sentence has no tokens")]
    EmptySentence,
}

fn row(token: &Token, head: &str, rel: &str) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        token.id,
        token.form,
        token.lemma_column(),
        token.upos,
        token.xpos_column(),
        token.feats,
        head,
        rel
    )
}

pub fn to_it_record(sentence: &Sentence, instruction: &str) -> Result<ItRecord, ItError> {
    if sentence.tokens.is_empty() {
        return Err(ItError::EmptySentence);
    }
    let mut input = String::new();
    let mut output = String::new();
    for token in &sentence.tokens {
        input.push_str(&row(token, HEAD_PLACEHOLDER, REL_PLACEHOLDER));
        output.push_str(&row(token, &token.head.to_string(), &token.deprel));
    }
    let output_offset = instruction.chars().count() + 1 + input.chars().count() + 1;
    Ok(ItRecord {
        instruction: instruction.to_owned(),
        input,
        output,
        output_offset,
    })
}

/// One row recovered from model output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedRow {
    pub id: usize,
    pub head: Option<usize>,
    pub deprel: Option<String>,
}

/// Best-effort extraction of (id, head, deprel) rows from generated text.
///
/// Lines are split on tabs, or on whitespace when a line has no tab.
/// Rows must start with a positive integer. Head and relation come from
/// columns 7 and 8 when present, else from the last two fields.
pub fn from_it_output(text: &str) -> Vec<ParsedRow> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        let Some(id) = fields.first().and_then(|f| f.parse::<usize>().ok()) else {
            continue;
        };
        if id == 0 {
            continue;
        }
        let (head, rel) = if fields.len() >= 8 {
            (fields[6], fields[7])
        } else if fields.len() >= 3 {
            (fields[fields.len() - 2], fields[fields.len() - 1])
        } else {
            ("", "")
        };
        let deprel =
            (!rel.is_empty() && rel != REL_PLACEHOLDER && rel != "_").then(|| rel.to_owned());
        rows.push(ParsedRow {
            id,
            head: head.parse().ok(),
            deprel,
        });
    }
    rows
}

/// Writes one JSON object per record; returns the number written.
pub fn emit_jsonl<W: Write>(records: &[ItRecord], mut sink: W) -> io::Result<usize> {
    for record in records {
        serde_json::to_writer(&mut sink, record)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(records.len())
}
