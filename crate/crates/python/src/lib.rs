use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use unidive::conllu::{
    parse_conllu, parse_conllu_with, serialize_conllu, validate as check, ParseOptions, Sentence,
};
use unidive::correct::{
    aggregate_stats, correct_sentence, parse_aux, parse_record_log, write_record_log,
};
use unidive::eval::{rows_of, score, ScoreOptions};
use unidive::features::{enrich as enrich_sentence, load_rule_pack, RulePack};
use unidive::instruct::{to_it_record, DEFAULT_INSTRUCTION};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pack(rules: Option<&str>) -> PyResult<RulePack> {
    match rules {
        Some(src) => load_rule_pack(src).map_err(value_err),
        None => Ok(RulePack::korean()),
    }
}

fn parse(text: &str) -> PyResult<Vec<Sentence>> {
    parse_conllu(text).map_err(value_err)
}

fn serialize(sentences: &[Sentence]) -> PyResult<String> {
    serialize_conllu(sentences).map_err(|d| {
        value_err(
            d.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })
}

/// Diagnostics for a CoNLL-U document; empty when valid.
#[pyfunction]
fn validate(text: &str) -> PyResult<Vec<String>> {
    Ok(check(&parse(text)?)
        .iter()
        .map(ToString::to_string)
        .collect())
}

/// Adds FEATS and functional-word marks. `rules` is rule-pack source text.
#[pyfunction]
#[pyo3(signature = (text, rules=None))]
fn enrich(text: &str, rules: Option<&str>) -> PyResult<String> {
    let pack = pack(rules)?;
    let out: Vec<Sentence> = parse(text)?
        .iter()
        .map(|s| enrich_sentence(s, &pack))
        .collect();
    serialize(&out)
}

/// Returns the corrected document and the correction log.
#[pyfunction]
#[pyo3(signature = (text, aux=None, rules=None))]
fn correct(text: &str, aux: Option<&str>, rules: Option<&str>) -> PyResult<(String, String)> {
    let pack = pack(rules)?;
    let aux = aux
        .map(parse_aux)
        .transpose()
        .map_err(value_err)?
        .unwrap_or_default();
    let sentences = parse(text)?;
    let mut out = Vec::with_capacity(sentences.len());
    let mut records = Vec::new();
    for s in &sentences {
        let (c, r) = correct_sentence(s, &aux, &pack).map_err(value_err)?;
        out.push(c);
        records.extend(r);
    }
    let total = sentences.iter().map(Sentence::len).sum();
    Ok((serialize(&out)?, write_record_log(&records, total)))
}

/// Conversion statistics TSV for a correction log.
#[pyfunction]
#[pyo3(signature = (log, total_tokens=None, top=None))]
fn stats(log: &str, total_tokens: Option<usize>, top: Option<usize>) -> PyResult<String> {
    let (records, trailer) = parse_record_log(log).map_err(value_err)?;
    let total = total_tokens
        .or(trailer)
        .ok_or_else(|| PyValueError::new_err("log has no total_tokens trailer"))?;
    Ok(aggregate_stats(&records, total)
        .map_err(value_err)?
        .to_tsv(top))
}

/// One instruction-tuning record per sentence, as dicts.
#[pyfunction]
#[pyo3(signature = (text, instruction=DEFAULT_INSTRUCTION))]
fn convert_it<'py>(
    py: Python<'py>,
    text: &str,
    instruction: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    parse(text)?
        .iter()
        .map(|s| {
            let r = to_it_record(s, instruction).map_err(value_err)?;
            let d = PyDict::new(py);
            d.set_item("instruction", r.instruction)?;
            d.set_item("input", r.input)?;
            d.set_item("output", r.output)?;
            d.set_item("output_offset", r.output_offset)?;
            Ok(d)
        })
        .collect()
}

/// UAS/LAS of predicted CoNLL-U against gold.
#[pyfunction]
#[pyo3(signature = (gold, predicted, exclude_punct=false))]
fn evaluate<'py>(
    py: Python<'py>,
    gold: &str,
    predicted: &str,
    exclude_punct: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let gold = parse(gold)?;
    let options = ParseOptions {
        lenient: true,
        strip_bom: false,
    };
    let (pred, _) = parse_conllu_with(predicted, options).map_err(value_err)?;
    let rows: Vec<_> = pred.iter().map(rows_of).collect();
    let r = score(&gold, &rows, ScoreOptions { exclude_punct }).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("total_tokens", r.total_tokens)?;
    d.set_item("head_correct", r.head_correct)?;
    d.set_item("both_correct", r.both_correct)?;
    d.set_item("uas", r.uas.to_string())?;
    d.set_item("las", r.las.to_string())?;
    d.set_item("unmatched_predicted_rows", r.unmatched_predicted_rows)?;
    d.set_item("missing_gold_rows", r.missing_gold_rows)?;
    Ok(d)
}

#[pymodule]
fn unidive_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(enrich, m)?)?;
    m.add_function(wrap_pyfunction!(correct, m)?)?;
    m.add_function(wrap_pyfunction!(stats, m)?)?;
    m.add_function(wrap_pyfunction!(convert_it, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
