//! Unlabeled and labeled attachment scores.
//!
//! Predicted rows align to gold words by id. A word is head-correct when an
//! aligned row carries the gold head, and label-correct when the relation
//! also matches exactly. Percentages are kept as integer hundredths,
//! rounded half-up.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use rayon::prelude::*;

use crate::conllu::{Sentence, Upos};
use crate::instruct::ParsedRow;

/// A percentage with two decimals, stored in hundredths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent(pub i64);

impl Percent {
    /// `100 * num / den`, rounded half-up; zero when `den` is zero.
    pub fn ratio(num: usize, den: usize) -> Percent {
        if den == 0 {
            return Percent(0);
        }
        let (num, den) = (num as i128, den as i128);
        Percent(((20_000 * num + den) / (2 * den)) as i64)
    }

    pub fn hundredths(self) -> i64 {
        self.0
    }

    /// Rendering with an explicit sign, for deltas.
    pub fn signed(self) -> String {
        if self.0 >= 0 {
            format!("+{self}")
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid percentage `{0}`")]
pub struct PercentError(String);

impl FromStr for Percent {
    type Err = PercentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PercentError(s.to_owned());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty()
            || frac.len() > 2
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let whole: i64 = int.parse().map_err(|_| err())?;
        let cents: i64 = format!("{frac:0<2}").parse().map_err(|_| err())?;
        let value = whole
            .checked_mul(100)
            .and_then(|w| w.checked_add(cents))
            .ok_or_else(err)?;
        Ok(Percent(if neg { -value } else { value }))
    }
}

impl Sub for Percent {
    type Output = Percent;

    fn sub(self, rhs: Percent) -> Percent {
        Percent(self.0 - rhs.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub total: usize,
    pub head_correct: usize,
    pub both_correct: usize,
    pub unmatched: usize,
    pub missing: usize,
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            total: self.total + o.total,
            head_correct: self.head_correct + o.head_correct,
            both_correct: self.both_correct + o.both_correct,
            unmatched: self.unmatched + o.unmatched,
            missing: self.missing + o.missing,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub total_tokens: usize,
    pub head_correct: usize,
    pub both_correct: usize,
    pub uas: Percent,
    pub las: Percent,
    pub unmatched_predicted_rows: usize,
    pub missing_gold_rows: usize,
}

impl From<Counts> for EvalReport {
    fn from(c: Counts) -> Self {
        EvalReport {
            total_tokens: c.total,
            head_correct: c.head_correct,
            both_correct: c.both_correct,
            uas: Percent::ratio(c.head_correct, c.total),
            las: Percent::ratio(c.both_correct, c.total),
            unmatched_predicted_rows: c.unmatched,
            missing_gold_rows: c.missing,
        }
    }
}

impl EvalReport {
    /// A report that carries only published scores, over a nominal
    /// 10,000 tokens so the hundredths are exact counts.
    pub fn from_scores(uas: Percent, las: Percent) -> EvalReport {
        let total = 10_000;
        let clamp = |p: Percent| p.0.clamp(0, total) as usize;
        Counts {
            total: total as usize,
            head_correct: clamp(uas),
            both_correct: clamp(las),
            ..Counts::default()
        }
        .into()
    }

    /// Human-readable table followed by `key=value` lines.
    pub fn render(&self) -> String {
        format!(
            "metric\tscore\tcorrect/total\n\
             UAS\t{}\t{}/{}\n\
             LAS\t{}\t{}/{}\n\
             \n\
             total={}\nhead_correct={}\nboth_correct={}\nuas={}\nlas={}\nunmatched={}\nmissing={}\n",
            self.uas,
            self.head_correct,
            self.total_tokens,
            self.las,
            self.both_correct,
            self.total_tokens,
            self.total_tokens,
            self.head_correct,
            self.both_correct,
            self.uas,
            self.las,
            self.unmatched_predicted_rows,
            self.missing_gold_rows
        )
    }

    /// Reads the `key=value` lines written by [`EvalReport::render`].
    pub fn parse_rendered(text: &str) -> Option<EvalReport> {
        let kv: BTreeMap<&str, &str> = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim(), v.trim()))
            .collect();
        let n = |k: &str| kv.get(k)?.parse::<usize>().ok();
        Some(EvalReport {
            total_tokens: n("total")?,
            head_correct: n("head_correct")?,
            both_correct: n("both_correct")?,
            uas: kv.get("uas")?.parse().ok()?,
            las: kv.get("las")?.parse().ok()?,
            unmatched_predicted_rows: n("unmatched")?,
            missing_gold_rows: n("missing")?,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScoreOptions {
    /// Leave PUNCT words out of every count.
    pub exclude_punct: bool,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("gold has {gold} sentences, predictions have {predicted}")]
    SentenceCount { gold: usize, predicted: usize },
    #[error("reports cover different token counts ({a} vs {b})")]
    TokenCount { a: usize, b: usize },
}

pub fn score_sentence(gold: &Sentence, predicted: &[ParsedRow], options: ScoreOptions) -> Counts {
    let n = gold.tokens.len();
    let mut aligned: Vec<Option<&ParsedRow>> = vec![None; n];
    let mut counts = Counts::default();
    for row in predicted {
        match aligned.get_mut(row.id.wrapping_sub(1)) {
            Some(slot @ None) => *slot = Some(row),
            _ => counts.unmatched += 1,
        }
    }
    for (token, row) in gold.tokens.iter().zip(&aligned) {
        if options.exclude_punct && token.upos == Upos::PUNCT {
            continue;
        }
        counts.total += 1;
        let Some(row) = row else {
            counts.missing += 1;
            continue;
        };
        if row.head == Some(token.head) {
            counts.head_correct += 1;
            if row.deprel.as_deref() == Some(token.deprel.as_str()) {
                counts.both_correct += 1;
            }
        }
    }
    counts
}

pub fn score(
    gold: &[Sentence],
    predicted: &[Vec<ParsedRow>],
    options: ScoreOptions,
) -> Result<EvalReport, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let counts = gold
        .par_iter()
        .zip(predicted)
        .map(|(g, p)| score_sentence(g, p, options))
        .reduce(Counts::default, Add::add);
    Ok(counts.into())
}

/// Rows equal to the gold attachments, for scoring a treebank against itself
/// or a parser's CoNLL-U output.
pub fn rows_of(sentence: &Sentence) -> Vec<ParsedRow> {
    sentence
        .tokens
        .iter()
        .map(|t| ParsedRow {
            id: t.id,
            head: Some(t.head),
            deprel: Some(t.deprel.clone()),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeltaReport {
    pub uas: Percent,
    pub las: Percent,
}

impl fmt::Display for DeltaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta_uas={}\ndelta_las={}",
            self.uas.signed(),
            self.las.signed()
        )
    }
}

/// Signed change from `a` to `b`.
pub fn compare(a: &EvalReport, b: &EvalReport) -> Result<DeltaReport, EvalError> {
    if a.total_tokens != b.total_tokens {
        return Err(EvalError::TokenCount {
            a: a.total_tokens,
            b: b.total_tokens,
        });
    }
    Ok(DeltaReport {
        uas: b.uas - a.uas,
        las: b.las - a.las,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_conllu;

    fn sample() -> Sentence {
        parse_conllu(include_str!("../tests/data/sample.conllu"))
            .unwrap()
            .remove(0)
    }

    fn p(s: &str) -> Percent {
        s.parse().unwrap()
    }

    #[test]
    fn identity() {
        let g = sample();
        let r = score(
            std::slice::from_ref(&g),
            &[rows_of(&g)],
            ScoreOptions::default(),
        )
        .unwrap();
        assert_eq!((r.uas, r.las), (p("100.00"), p("100.00")));
        assert_eq!(r.total_tokens, 6);
    }

    #[test]
    fn wrong_head() {
        let g = sample();
        let mut rows = rows_of(&g);
        rows[3].head = Some(1);
        let r = score(&[g], &[rows], ScoreOptions::default()).unwrap();
        assert_eq!(
            (r.uas.to_string(), r.las.to_string()),
            ("83.33".into(), "83.33".into())
        );
    }

    #[test]
    fn wrong_label() {
        let g = sample();
        let mut rows = rows_of(&g);
        rows[1].deprel = Some("conj".into());
        let r = score(&[g], &[rows], ScoreOptions::default()).unwrap();
        assert_eq!(
            (r.uas.to_string(), r.las.to_string()),
            ("100.00".into(), "83.33".into())
        );
    }

    #[test]
    fn total_miss() {
        let g = sample();
        let r = score(&[g], &[vec![]], ScoreOptions::default()).unwrap();
        assert_eq!((r.uas, r.las), (Percent(0), Percent(0)));
        assert_eq!(r.missing_gold_rows, 6);
    }

    #[test]
    fn surplus_and_duplicate_rows() {
        let g = sample();
        let mut rows = rows_of(&g);
        rows.push(ParsedRow {
            id: 9,
            head: Some(0),
            deprel: None,
        });
        rows.push(ParsedRow {
            id: 1,
            head: Some(3),
            deprel: None,
        });
        let r = score(&[g], &[rows], ScoreOptions::default()).unwrap();
        assert_eq!(r.unmatched_predicted_rows, 2);
        assert_eq!(r.head_correct, 6);
    }

    #[test]
    fn exclude_punct() {
        let g = sample();
        let mut rows = rows_of(&g);
        rows[5].head = Some(1);
        let opts = ScoreOptions {
            exclude_punct: true,
        };
        let r = score(&[g], &[rows], opts).unwrap();
        assert_eq!(r.total_tokens, 5);
        assert_eq!(r.uas, p("100"));
    }

    #[test]
    fn sentence_count_mismatch() {
        assert_eq!(
            score(&[sample()], &[], ScoreOptions::default()),
            Err(EvalError::SentenceCount {
                gold: 1,
                predicted: 0
            })
        );
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(Percent::ratio(5, 6).to_string(), "83.33");
        assert_eq!(Percent::ratio(2, 3).to_string(), "66.67");
        assert_eq!(Percent::ratio(1, 8).to_string(), "12.50");
        // 1/800 is exactly 0.125
        assert_eq!(Percent::ratio(1, 16).to_string(), "6.25");
        assert_eq!(Percent::ratio(1, 800).to_string(), "0.13");
        assert_eq!(Percent::ratio(0, 0), Percent(0));
    }

    #[test]
    fn percent_parsing() {
        assert_eq!(p("50.24"), Percent(5024));
        assert_eq!(p("7.5"), Percent(750));
        assert_eq!(p("-0.86"), Percent(-86));
        assert_eq!(p("+14.09"), Percent(1409));
        assert!("1.234".parse::<Percent>().is_err());
        assert!(".5".parse::<Percent>().is_err());
        assert_eq!(Percent(-86).to_string(), "-0.86");
        assert_eq!(Percent(86).signed(), "+0.86");
    }

    #[test]
    fn published_deltas() {
        let a = EvalReport::from_scores(p("80.00"), p("50.24"));
        let b = EvalReport::from_scores(p("85.00"), p("64.33"));
        assert_eq!(compare(&a, &b).unwrap().las.signed(), "+14.09");
        let a = EvalReport::from_scores(p("88.30"), p("80.00"));
        let b = EvalReport::from_scores(p("89.16"), p("80.00"));
        let d = compare(&a, &b).unwrap();
        assert_eq!(d.uas.signed(), "+0.86");
        assert_eq!(d.las.signed(), "+0.00");
    }

    #[test]
    fn compare_requires_same_gold() {
        let g = sample();
        let a = score(
            std::slice::from_ref(&g),
            &[rows_of(&g)],
            ScoreOptions::default(),
        )
        .unwrap();
        let b = EvalReport::from_scores(Percent(0), Percent(0));
        assert!(matches!(compare(&a, &b), Err(EvalError::TokenCount { .. })));
    }

    #[test]
    fn render_round_trip() {
        let g = sample();
        let mut rows = rows_of(&g);
        rows[3].head = Some(1);
        let r = score(&[g], &[rows], ScoreOptions::default()).unwrap();
        let text = r.render();
        assert!(text.contains("uas=83.33\n"));
        assert_eq!(EvalReport::parse_rendered(&text), Some(r));
    }
}
