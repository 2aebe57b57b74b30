//! Systematic UPOS/XPOS/lemma corrections with provenance records.
//!
//! Rules run in a fixed order on each word, each seeing the output of the
//! previous ones:
//!
//! 1. `external-analysis` and `ner-reconcile`: take a whole-word analysis
//!    or a VV/VA stem tag from the sidecar's external tagger, then reconcile
//!    NNG/NNP with the NER label. Skipped for words without a sidecar entry.
//! 2. `canonical-upos`: UPOS from the lexical head morpheme.
//! 3. `xr-normalize`: word-initial XR that stands alone or takes a
//!    derivational suffix becomes NNG, or NNP when the sidecar marks it as
//!    an entity.
//! 4. `complement-marker`: JKS 이/가 before 되다/아니다 becomes JKC.
//! 5. `conjunctive-adverb`: listed MAG words become MAJ.
//!
//! Ids, heads and relations are never touched.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::conllu::{MorphTag, Sentence, Token, Upos};
use crate::features::RulePack;

pub const RULE_EXTERNAL_ANALYSIS: &str = "external-analysis";
pub const RULE_NER_RECONCILE: &str = "ner-reconcile";
pub const RULE_CANONICAL_UPOS: &str = "canonical-upos";
pub const RULE_XR_NORMALIZE: &str = "xr-normalize";
pub const RULE_COMPLEMENT_MARKER: &str = "complement-marker";
pub const RULE_CONJUNCTIVE_ADVERB: &str = "conjunctive-adverb";

/// Sidecar annotation for one word: NER label and an external XPOS analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxAnnotation {
    pub sent_id: String,
    pub token_id: usize,
    pub ner_label: Option<String>,
    pub ext_xpos: Option<Vec<MorphTag>>,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum AuxError {
    #[error("line {line}: expected 4 tab-separated columns, found {found}")]
    Columns { line: usize, found: usize },
    #[error("line {line}: invalid token id `{value}`")]
    TokenId { line: usize, value: String },
    #[error("line {line}: {source}")]
    Tag {
        line: usize,
        source: crate::conllu::UnknownTag,
    },
}

/// Reads the sidecar: `sent_id`, `token_id`, `ner_label`, `ext_xpos`,
/// tab-separated, `_` for absent fields, `#` comments.
pub fn parse_aux(text: &str) -> Result<Vec<AuxAnnotation>, AuxError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 4 {
            return Err(AuxError::Columns {
                line,
                found: cols.len(),
            });
        }
        let token_id = cols[1].parse().map_err(|_| AuxError::TokenId {
            line,
            value: cols[1].to_owned(),
        })?;
        let ner_label = (cols[2] != "_").then(|| cols[2].to_owned());
        let ext_xpos = if cols[3] == "_" {
            None
        } else {
            Some(
                cols[3]
                    .split('+')
                    .map(str::parse)
                    .collect::<Result<Vec<MorphTag>, _>>()
                    .map_err(|source| AuxError::Tag { line, source })?,
            )
        };
        out.push(AuxAnnotation {
            sent_id: cols[0].to_owned(),
            token_id,
            ner_label,
            ext_xpos,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Upos,
    Xpos,
    Lemma,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Upos => "UPOS",
            Field::Xpos => "XPOS",
            Field::Lemma => "LEMMA",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "UPOS" => Ok(Field::Upos),
            "XPOS" => Ok(Field::Xpos),
            "LEMMA" => Ok(Field::Lemma),
            _ => Err(format!("unknown field `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionRecord {
    pub sent_id: Option<String>,
    pub token_id: usize,
    pub field: Field,
    pub original: String,
    pub corrected: String,
    pub rule_id: String,
}

impl fmt::Display for CorrectionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.sent_id.as_deref().unwrap_or("_"),
            self.token_id,
            self.field,
            self.original,
            self.corrected,
            self.rule_id
        )
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum CorrectError {
    #[error("sidecar refers to token {token_id} of sentence `{sent_id}`, which has {len} tokens")]
    Unresolved {
        sent_id: String,
        token_id: usize,
        len: usize,
    },
}

struct Recorder<'a> {
    sent_id: Option<&'a str>,
    records: Vec<CorrectionRecord>,
}

impl Recorder<'_> {
    fn push(
        &mut self,
        token: &Token,
        field: Field,
        original: String,
        corrected: String,
        rule: &str,
    ) {
        if original == corrected {
            return;
        }
        self.records.push(CorrectionRecord {
            sent_id: self.sent_id.map(str::to_owned),
            token_id: token.id,
            field,
            original,
            corrected,
            rule_id: rule.to_owned(),
        });
    }

    fn set_upos(&mut self, token: &mut Token, upos: Upos, rule: &str) {
        let before = token.upos;
        token.upos = upos;
        self.push(
            token,
            Field::Upos,
            before.to_string(),
            upos.to_string(),
            rule,
        );
    }

    fn set_xpos(&mut self, token: &mut Token, xpos: Vec<MorphTag>, rule: &str) {
        let before = token.xpos_column();
        token.xpos = xpos;
        let after = token.xpos_column();
        self.push(token, Field::Xpos, before, after, rule);
    }

    fn set_tag(&mut self, token: &mut Token, index: usize, tag: MorphTag, rule: &str) {
        let mut xpos = token.xpos.clone();
        xpos[index] = tag;
        self.set_xpos(token, xpos, rule);
    }

    fn set_lemma(&mut self, token: &mut Token, lemma: Vec<String>, rule: &str) {
        let before = token.lemma_column();
        token.lemma = lemma;
        let after = token.lemma_column();
        self.push(token, Field::Lemma, before, after, rule);
    }
}

/// Index of the first morpheme that can head a word.
fn head_morpheme(token: &Token) -> Option<usize> {
    token
        .morphemes()
        .position(|m| m.tag.canonical_upos().is_some())
}

/// UPOS implied by the word's morphology: a verbal or adjectival
/// derivational suffix decides, otherwise the first head-capable morpheme.
pub fn canonical_upos(token: &Token) -> Option<Upos> {
    let derived = token.morphemes().skip(1).fold(None, |acc, m| match m.tag {
        MorphTag::XSV => Some(Upos::VERB),
        MorphTag::XSA => Some(Upos::ADJ),
        _ => acc,
    });
    derived.or_else(|| head_morpheme(token).and_then(|i| token.xpos[i].canonical_upos()))
}

fn external_analysis(token: &mut Token, aux: &AuxAnnotation, rec: &mut Recorder<'_>) {
    let Some(ext) = &aux.ext_xpos else { return };
    if ext.len() == 1 && token.lemma.len() > 1 {
        // the external tagger sees a single morpheme: fuse the lemma
        let fused = vec![token.form.clone()];
        rec.set_lemma(token, fused, RULE_EXTERNAL_ANALYSIS);
        rec.set_xpos(token, ext.clone(), RULE_EXTERNAL_ANALYSIS);
        return;
    }
    let predicate = |t: Option<&MorphTag>| matches!(t, Some(MorphTag::VV | MorphTag::VA));
    if ext.len() == token.xpos.len() && predicate(ext.first()) && predicate(token.xpos.first()) {
        rec.set_tag(token, 0, ext[0], RULE_EXTERNAL_ANALYSIS);
    }
}

fn ner_reconcile(token: &mut Token, aux: &AuxAnnotation, rec: &mut Recorder<'_>) {
    let Some(h) = head_morpheme(token) else {
        return;
    };
    let entity = aux.ner_label.is_some();
    match token.xpos[h] {
        MorphTag::NNG if entity => rec.set_tag(token, h, MorphTag::NNP, RULE_NER_RECONCILE),
        MorphTag::NNP if !entity => rec.set_tag(token, h, MorphTag::NNG, RULE_NER_RECONCILE),
        MorphTag::NNP => {}
        _ => return,
    }
    recompute_upos(token, rec, RULE_NER_RECONCILE);
}

fn recompute_upos(token: &mut Token, rec: &mut Recorder<'_>, rule: &str) {
    if let Some(upos) = canonical_upos(token) {
        rec.set_upos(token, upos, rule);
    }
}

fn xr_normalize(token: &mut Token, aux: Option<&AuxAnnotation>, rec: &mut Recorder<'_>) {
    if token.xpos.first() != Some(&MorphTag::XR) || !token.is_aligned() {
        return;
    }
    let standalone = token.xpos.len() == 1;
    if standalone || token.xpos[1].is_derivational_suffix() {
        // an entity root goes straight to the tag NER reconciliation would give it
        let entity = aux.is_some_and(|a| a.ner_label.is_some());
        let noun = if entity { MorphTag::NNP } else { MorphTag::NNG };
        rec.set_tag(token, 0, noun, RULE_XR_NORMALIZE);
        recompute_upos(token, rec, RULE_XR_NORMALIZE);
    }
}

/// Dependency head, or the nearest following predicate for the root.
fn governing_predicate(sentence: &Sentence, index: usize) -> Option<&Token> {
    let token = &sentence.tokens[index];
    if token.head > 0 {
        return sentence.token(token.head);
    }
    sentence.tokens[index + 1..]
        .iter()
        .find(|t| t.first_morpheme().is_some_and(|m| m.tag.is_predicate()))
}

fn complement_marker(token: &mut Token, governor: Option<&Token>, rec: &mut Recorder<'_>) {
    let Some(p) = token.morphemes().rposition(|m| m.tag.is_particle()) else {
        return;
    };
    if token.xpos[p] != MorphTag::JKS || !matches!(token.lemma[p].as_str(), "이" | "가") {
        return;
    }
    let copular = governor
        .and_then(Token::first_morpheme)
        .is_some_and(|m| matches!(m.surface, "되" | "아니"));
    if copular {
        rec.set_tag(token, p, MorphTag::JKC, RULE_COMPLEMENT_MARKER);
    }
}

fn conjunctive_adverb(token: &mut Token, pack: &RulePack, rec: &mut Recorder<'_>) {
    let Some(first) = token.first_morpheme() else {
        return;
    };
    if first.tag == MorphTag::MAG
        && (pack.conjunctive_adverbs.contains(&token.form)
            || pack.conjunctive_adverbs.contains(first.surface))
    {
        rec.set_tag(token, 0, MorphTag::MAJ, RULE_CONJUNCTIVE_ADVERB);
    }
}

/// Applies the correction rules to one sentence.
///
/// Sidecar entries for other sentences are ignored; entries for this
/// sentence must point at existing tokens.
pub fn correct_sentence(
    sentence: &Sentence,
    aux: &[AuxAnnotation],
    pack: &RulePack,
) -> Result<(Sentence, Vec<CorrectionRecord>), CorrectError> {
    let sent_id = sentence.sent_id();
    let mut by_token: BTreeMap<usize, &AuxAnnotation> = BTreeMap::new();
    if let Some(sid) = sent_id {
        for a in aux.iter().filter(|a| a.sent_id == sid) {
            if a.token_id == 0 || a.token_id > sentence.len() {
                return Err(CorrectError::Unresolved {
                    sent_id: sid.to_owned(),
                    token_id: a.token_id,
                    len: sentence.len(),
                });
            }
            by_token.entry(a.token_id).or_insert(a);
        }
    }

    let mut out = sentence.clone();
    let mut rec = Recorder {
        sent_id,
        records: Vec::new(),
    };
    for i in 0..out.tokens.len() {
        let mut token = out.tokens[i].clone();
        let aux = by_token.get(&token.id).copied();
        if let Some(a) = aux {
            external_analysis(&mut token, a, &mut rec);
            ner_reconcile(&mut token, a, &mut rec);
        }
        recompute_upos(&mut token, &mut rec, RULE_CANONICAL_UPOS);
        xr_normalize(&mut token, aux, &mut rec);
        complement_marker(&mut token, governing_predicate(&out, i), &mut rec);
        conjunctive_adverb(&mut token, pack, &mut rec);
        out.tokens[i] = token;
    }
    Ok((out, rec.records))
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("record for missing token {0}")]
    MissingToken(usize),
    #[error("token {token_id}: {field} is `{found}`, record expects `{expected}`")]
    Mismatch {
        token_id: usize,
        field: Field,
        expected: String,
        found: String,
    },
    #[error("token {token_id}: invalid corrected value `{value}`")]
    Invalid { token_id: usize, value: String },
}

/// Re-applies the records that belong to `sentence`, in order.
pub fn replay(sentence: &Sentence, records: &[CorrectionRecord]) -> Result<Sentence, ReplayError> {
    let mut out = sentence.clone();
    let sid = sentence.sent_id();
    for r in records.iter().filter(|r| r.sent_id.as_deref() == sid) {
        let token = r
            .token_id
            .checked_sub(1)
            .and_then(|i| out.tokens.get_mut(i))
            .ok_or(ReplayError::MissingToken(r.token_id))?;
        let found = match r.field {
            Field::Upos => token.upos.to_string(),
            Field::Xpos => token.xpos_column(),
            Field::Lemma => token.lemma_column(),
        };
        if found != r.original {
            return Err(ReplayError::Mismatch {
                token_id: r.token_id,
                field: r.field,
                expected: r.original.clone(),
                found,
            });
        }
        let invalid = || ReplayError::Invalid {
            token_id: r.token_id,
            value: r.corrected.clone(),
        };
        match r.field {
            Field::Upos => token.upos = r.corrected.parse().map_err(|_| invalid())?,
            Field::Xpos => {
                token.xpos = r
                    .corrected
                    .split('+')
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|_| invalid())?
            }
            Field::Lemma => token.lemma = r.corrected.split('+').map(str::to_owned).collect(),
        }
    }
    Ok(out)
}

pub const LOG_HEADER: &str = "# sent_id\ttoken_id\tfield\toriginal\tcorrected\trule";

/// Serializes records as the tab-separated correction log, with the
/// corpus token count as a trailing comment.
pub fn write_record_log(records: &[CorrectionRecord], total_tokens: usize) -> String {
    let mut out = String::new();
    out.push_str(LOG_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out.push_str(&format!("# total_tokens = {total_tokens}\n"));
    out
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct LogError {
    pub line: usize,
    pub message: String,
}

/// Reads a correction log; returns the records and the token count from
/// the trailer, if any.
pub fn parse_record_log(text: &str) -> Result<(Vec<CorrectionRecord>, Option<usize>), LogError> {
    let mut records = Vec::new();
    let mut total = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| LogError { line, message };
        if raw.trim().is_empty() {
            continue;
        }
        if let Some(comment) = raw.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                if k.trim() == "total_tokens" {
                    total = Some(
                        v.trim()
                            .parse()
                            .map_err(|_| err(format!("bad total `{}`", v.trim())))?,
                    );
                }
            }
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        records.push(CorrectionRecord {
            sent_id: (cols[0] != "_").then(|| cols[0].to_owned()),
            token_id: cols[1]
                .parse()
                .map_err(|_| err(format!("bad token id `{}`", cols[1])))?,
            field: cols[2].parse().map_err(err)?,
            original: cols[3].to_owned(),
            corrected: cols[4].to_owned(),
            rule_id: cols[5].to_owned(),
        });
    }
    Ok((records, total))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatRow {
    pub original: String,
    pub corrected: String,
    pub count: usize,
    pub ratio: f64,
}

/// Grouped correction counts, one table per field, each sorted by
/// descending count.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConversionStats {
    pub total_tokens: usize,
    pub upos: Vec<StatRow>,
    pub xpos: Vec<StatRow>,
    pub lemma: Vec<StatRow>,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("total token count is zero")]
    ZeroTokens,
    #[error("{corrected} distinct tokens were corrected but the corpus has only {total}")]
    TooFewTokens { corrected: usize, total: usize },
}

pub fn aggregate_stats(
    records: &[CorrectionRecord],
    total_tokens: usize,
) -> Result<ConversionStats, StatsError> {
    if total_tokens == 0 {
        return Err(StatsError::ZeroTokens);
    }
    let distinct: BTreeSet<(Option<&str>, usize)> = records
        .iter()
        .map(|r| (r.sent_id.as_deref(), r.token_id))
        .collect();
    if distinct.len() > total_tokens {
        return Err(StatsError::TooFewTokens {
            corrected: distinct.len(),
            total: total_tokens,
        });
    }
    let mut groups: BTreeMap<(Field, &str, &str), usize> = BTreeMap::new();
    for r in records {
        *groups
            .entry((r.field, r.original.as_str(), r.corrected.as_str()))
            .or_default() += 1;
    }
    let mut stats = ConversionStats {
        total_tokens,
        ..Default::default()
    };
    for ((field, original, corrected), count) in groups {
        let row = StatRow {
            original: original.to_owned(),
            corrected: corrected.to_owned(),
            count,
            ratio: count as f64 / total_tokens as f64,
        };
        match field {
            Field::Upos => stats.upos.push(row),
            Field::Xpos => stats.xpos.push(row),
            Field::Lemma => stats.lemma.push(row),
        }
    }
    for table in [&mut stats.upos, &mut stats.xpos, &mut stats.lemma] {
        // stable sort keeps the (original, corrected) order among ties
        table.sort_by_key(|r| std::cmp::Reverse(r.count));
    }
    Ok(stats)
}

impl ConversionStats {
    /// Tab-separated report: `field original corrected count ratio`, with
    /// at most `top` rows per field.
    pub fn to_tsv(&self, top: Option<usize>) -> String {
        let mut out = String::from("field\toriginal\tcorrected\tcount\tratio\n");
        for (field, rows) in [
            (Field::Upos, &self.upos),
            (Field::Xpos, &self.xpos),
            (Field::Lemma, &self.lemma),
        ] {
            for row in rows.iter().take(top.unwrap_or(usize::MAX)) {
                out.push_str(&format!(
                    "{field}\t{}\t{}\t{}\t{:.4}\n",
                    row.original, row.corrected, row.count, row.ratio
                ));
            }
        }
        out
    }

    pub fn record_count(&self) -> usize {
        self.upos
            .iter()
            .chain(&self.xpos)
            .chain(&self.lemma)
            .map(|r| r.count)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::MorphTag::*;

    fn sentence(tokens: Vec<Token>) -> Sentence {
        let mut s = Sentence::new(tokens);
        s.comments.push("# sent_id = s1".into());
        s
    }

    fn pack() -> RulePack {
        RulePack::korean()
    }

    #[test]
    fn adverb_labelled_noun_gets_noun() {
        let s = sentence(vec![
            Token::new(
                1,
                "가격에",
                &[("가격", NNG), ("에", JKB)],
                Upos::ADV,
                2,
                "obl",
            ),
            Token::new(
                2,
                "팔았다",
                &[("팔", VV), ("았", EP), ("다", EF)],
                Upos::VERB,
                0,
                "root",
            ),
        ]);
        let (out, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert_eq!(out.tokens[0].upos, Upos::NOUN);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].field, Field::Upos);
        assert_eq!(
            (records[0].original.as_str(), records[0].corrected.as_str()),
            ("ADV", "NOUN")
        );
        assert_eq!(records[0].rule_id, RULE_CANONICAL_UPOS);
    }

    #[test]
    fn xr_root_becomes_noun() {
        let s = sentence(vec![
            Token::new(
                1,
                "깨끗한",
                &[("깨끗", XR), ("하", XSA), ("ㄴ", ETM)],
                Upos::ADJ,
                2,
                "amod",
            ),
            Token::new(2, "방", &[("방", NNG)], Upos::NOUN, 0, "root"),
        ]);
        let (out, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert_eq!(out.tokens[0].xpos_column(), "NNG+XSA+ETM");
        assert_eq!(out.tokens[0].upos, Upos::ADJ);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].original, "XR+XSA+ETM");
        assert_eq!(records[0].corrected, "NNG+XSA+ETM");
    }

    #[test]
    fn standalone_xr() {
        let s = sentence(vec![Token::new(
            1,
            "민주",
            &[("민주", XR)],
            Upos::X,
            0,
            "root",
        )]);
        let (out, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert_eq!(out.tokens[0].xpos, vec![NNG]);
        assert_eq!(out.tokens[0].upos, Upos::NOUN);
        assert_eq!(records.len(), 2);
    }

    #[test]
    fn subject_of_doeda_becomes_complement() {
        let s = sentence(vec![
            Token::new(
                1,
                "경관이",
                &[("경관", NNG), ("이", JKS)],
                Upos::NOUN,
                2,
                "nsubj",
            ),
            Token::new(
                2,
                "되었다",
                &[("되", VV), ("었", EP), ("다", EF)],
                Upos::VERB,
                0,
                "root",
            ),
        ]);
        let (out, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert_eq!(out.tokens[0].xpos_column(), "NNG+JKC");
        assert_eq!(records[0].rule_id, RULE_COMPLEMENT_MARKER);
        assert_eq!(out.tokens[0].deprel, "nsubj");
    }

    #[test]
    fn subject_of_other_verb_is_kept() {
        let s = sentence(vec![
            Token::new(
                1,
                "경관이",
                &[("경관", NNG), ("이", JKS)],
                Upos::NOUN,
                2,
                "nsubj",
            ),
            Token::new(2, "좋다", &[("좋", VA), ("다", EF)], Upos::ADJ, 0, "root"),
        ]);
        let (_, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert!(records.is_empty());
    }

    #[test]
    fn root_falls_back_to_following_predicate() {
        // the nominal is itself the root; the next predicate governs positionally
        let s = sentence(vec![
            Token::new(
                1,
                "학생이",
                &[("학생", NNG), ("이", JKS)],
                Upos::NOUN,
                0,
                "root",
            ),
            Token::new(
                2,
                "아니다",
                &[("아니", VCN), ("다", EF)],
                Upos::ADJ,
                1,
                "cop",
            ),
        ]);
        let (out, _) = correct_sentence(&s, &[], &pack()).unwrap();
        assert_eq!(out.tokens[0].xpos_column(), "NNG+JKC");
    }

    #[test]
    fn conjunctive_adverb() {
        let s = sentence(vec![
            Token::new(1, "그러나", &[("그러나", MAG)], Upos::ADV, 2, "advmod"),
            Token::new(
                2,
                "갔다",
                &[("가", VV), ("았", EP), ("다", EF)],
                Upos::VERB,
                0,
                "root",
            ),
        ]);
        let (out, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert_eq!(out.tokens[0].xpos, vec![MAJ]);
        assert_eq!(out.tokens[0].upos, Upos::ADV);
        assert_eq!(records.len(), 1);
    }

    #[test]
    fn ner_reconciliation() {
        let s = sentence(vec![
            Token::new(
                1,
                "서울에",
                &[("서울", NNG), ("에", JKB)],
                Upos::NOUN,
                3,
                "obl",
            ),
            Token::new(
                2,
                "사과를",
                &[("사과", NNP), ("를", JKO)],
                Upos::PROPN,
                3,
                "obj",
            ),
            Token::new(
                3,
                "샀다",
                &[("사", VV), ("았", EP), ("다", EF)],
                Upos::VERB,
                0,
                "root",
            ),
        ]);
        let aux = parse_aux("s1\t1\tLC\t_\ns1\t2\t_\t_\n").unwrap();
        let (out, records) = correct_sentence(&s, &aux, &pack()).unwrap();
        assert_eq!(out.tokens[0].xpos_column(), "NNP+JKB");
        assert_eq!(out.tokens[0].upos, Upos::PROPN);
        assert_eq!(out.tokens[1].xpos_column(), "NNG+JKO");
        assert_eq!(out.tokens[1].upos, Upos::NOUN);
        assert!(records.iter().all(|r| r.rule_id == RULE_NER_RECONCILE));
        assert_eq!(records.len(), 4);
    }

    #[test]
    fn ner_needs_sidecar_entry() {
        let s = sentence(vec![Token::new(
            1,
            "서울",
            &[("서울", NNP)],
            Upos::PROPN,
            0,
            "root",
        )]);
        let (_, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert!(records.is_empty());
    }

    #[test]
    fn jungil_reanalysis() {
        let s = sentence(vec![
            Token::new(
                1,
                "중일",
                &[("중", NNB), ("이", VCP), ("ㄹ", ETM)],
                Upos::VERB,
                2,
                "nmod",
            ),
            Token::new(2, "관계", &[("관계", NNG)], Upos::NOUN, 0, "root"),
        ]);
        let aux = parse_aux("s1\t1\tLC\tNNP\n").unwrap();
        let (out, records) = correct_sentence(&s, &aux, &pack()).unwrap();
        let t = &out.tokens[0];
        assert_eq!(t.lemma_column(), "중일");
        assert_eq!(t.upos, Upos::PROPN);
        assert_eq!(t.xpos_column(), "NNP");
        let fields: Vec<Field> = records.iter().map(|r| r.field).collect();
        assert_eq!(fields, vec![Field::Lemma, Field::Xpos, Field::Upos]);
        assert_eq!(records[2].original, "VERB");
    }

    #[test]
    fn stem_tag_from_external_tagger() {
        let s = sentence(vec![Token::new(
            1,
            "붉다",
            &[("붉", VV), ("다", EF)],
            Upos::VERB,
            0,
            "root",
        )]);
        let aux = parse_aux("s1\t1\t_\tVA+EF\n").unwrap();
        let (out, records) = correct_sentence(&s, &aux, &pack()).unwrap();
        assert_eq!(out.tokens[0].xpos_column(), "VA+EF");
        assert_eq!(out.tokens[0].upos, Upos::ADJ);
        assert_eq!(records.len(), 2);
        // other tags in the external analysis are not adopted
        let aux = parse_aux("s1\t1\t_\tVV+EC\n").unwrap();
        assert!(correct_sentence(&s, &aux, &pack()).unwrap().1.is_empty());
    }

    #[test]
    fn unresolvable_aux() {
        let s = sentence(vec![Token::new(
            1,
            "서울",
            &[("서울", NNP)],
            Upos::PROPN,
            0,
            "root",
        )]);
        let aux = parse_aux("s1\t5\tLC\t_\n").unwrap();
        assert_eq!(
            correct_sentence(&s, &aux, &pack()).unwrap_err(),
            CorrectError::Unresolved {
                sent_id: "s1".into(),
                token_id: 5,
                len: 1
            }
        );
    }

    #[test]
    fn canonical_sentence_is_fixed_point() {
        let s = sentence(vec![
            Token::new(1, "학교", &[("학교", NNG)], Upos::NOUN, 2, "nsubj"),
            Token::new(2, "좋다", &[("좋", VA), ("다", EF)], Upos::ADJ, 0, "root"),
        ]);
        let (out, records) = correct_sentence(&s, &[], &pack()).unwrap();
        assert_eq!(out, s);
        assert!(records.is_empty());
    }

    #[test]
    fn derivational_suffix_decides_upos() {
        let t = Token::new(
            1,
            "공부한다",
            &[("공부", NNG), ("하", XSV), ("ㄴ다", EF)],
            Upos::NOUN,
            0,
            "root",
        );
        assert_eq!(canonical_upos(&t), Some(Upos::VERB));
        let t = Token::new(
            1,
            "김씨",
            &[("김", NNP), ("씨", XSN)],
            Upos::NOUN,
            0,
            "root",
        );
        assert_eq!(canonical_upos(&t), Some(Upos::PROPN));
    }

    #[test]
    fn aux_parsing_errors() {
        assert_eq!(
            parse_aux("s1\t1\tLC\n"),
            Err(AuxError::Columns { line: 1, found: 3 })
        );
        assert!(matches!(
            parse_aux("# c\ns1\tx\tLC\t_\n"),
            Err(AuxError::TokenId { line: 2, .. })
        ));
        assert!(matches!(
            parse_aux("s1\t1\t_\tNNQ\n"),
            Err(AuxError::Tag { line: 1, .. })
        ));
    }

    fn rec(field: Field, o: &str, c: &str, tok: usize) -> CorrectionRecord {
        CorrectionRecord {
            sent_id: Some("s".into()),
            token_id: tok,
            field,
            original: o.into(),
            corrected: c.into(),
            rule_id: "r".into(),
        }
    }

    #[test]
    fn stats_grouping_and_ratio() {
        let records = vec![
            rec(Field::Upos, "ADV", "NOUN", 1),
            rec(Field::Upos, "ADV", "NOUN", 2),
            rec(Field::Upos, "VERB", "ADJ", 3),
            rec(Field::Xpos, "XR", "NNG", 4),
        ];
        let stats = aggregate_stats(&records, 40).unwrap();
        assert_eq!(stats.upos.len(), 2);
        assert_eq!(stats.upos[0].count, 2);
        assert_eq!(stats.upos[0].ratio, 2.0 / 40.0);
        assert_eq!(stats.xpos[0].original, "XR");
        assert_eq!(stats.record_count(), records.len());
        assert_eq!(
            stats.to_tsv(None).lines().nth(1),
            Some("UPOS\tADV\tNOUN\t2\t0.0500")
        );
    }

    #[test]
    fn stats_edge_cases() {
        assert_eq!(aggregate_stats(&[], 10).unwrap().record_count(), 0);
        assert_eq!(aggregate_stats(&[], 0), Err(StatsError::ZeroTokens));
        let records = vec![
            rec(Field::Upos, "ADV", "NOUN", 1),
            rec(Field::Upos, "ADV", "NOUN", 2),
        ];
        assert!(matches!(
            aggregate_stats(&records, 1),
            Err(StatsError::TooFewTokens { .. })
        ));
    }

    #[test]
    fn table_row_one_ratio() {
        // 3607 of 56,715 tokens, the corpus size implied by the published 0.0636
        let records: Vec<_> = (1..=3607)
            .map(|i| rec(Field::Upos, "ADV", "NOUN", i))
            .collect();
        let stats = aggregate_stats(&records, 56_715).unwrap();
        assert_eq!(format!("{:.4}", stats.upos[0].ratio), "0.0636");
    }

    #[test]
    fn log_round_trip() {
        let records = vec![rec(Field::Xpos, "NNG+JKS", "NNG+JKC", 3)];
        let text = write_record_log(&records, 12);
        assert_eq!(parse_record_log(&text).unwrap(), (records, Some(12)));
    }
}
