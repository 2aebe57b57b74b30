//! Rule-driven morphosyntactic feature assignment.
//!
//! Features are computed from each word's morphemes in two passes. The
//! word-internal pass applies every rule without a lookahead context; the
//! periphrastic pass applies the context rules (`next=`) and may only fill
//! features the first pass left unset. Words that end in a conjunctive
//! ending and received nothing from either pass get the romanized ending
//! as `Case=<ending>`.

use std::collections::BTreeMap;

use crate::conllu::{FeatureBag, MorphTag, Morpheme, Sentence, Token};

mod pack;
pub mod romanize;

pub use pack::{
    load_rule_pack, MorphMatcher, PackError, Position, Rule, RulePack, FEATURE_INVENTORY, HEADER,
    KOREAN_PACK,
};

pub const FUNCTIONAL_MISC: &str = "Functional=Yes";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssignOptions {
    pub periphrastic: bool,
    pub transcribe_endings: bool,
}

impl Default for AssignOptions {
    fn default() -> Self {
        AssignOptions {
            periphrastic: true,
            transcribe_endings: true,
        }
    }
}

/// Per-feature winner while resolving one word.
struct Slot<'a> {
    priority: i32,
    value: &'a str,
}

fn offer<'a>(slots: &mut BTreeMap<&'a str, Slot<'a>>, rule: &'a Rule) {
    for (name, value) in &rule.emits {
        match slots.get(name.as_str()) {
            // earlier rules win ties
            Some(slot) if slot.priority >= rule.priority => {}
            _ => {
                slots.insert(
                    name,
                    Slot {
                        priority: rule.priority,
                        value,
                    },
                );
            }
        }
    }
}

fn lookahead_matches(rule: &Rule, following: &[Token]) -> bool {
    rule.context.len() <= following.len()
        && rule
            .context
            .iter()
            .zip(following)
            .all(|(m, tok)| tok.first_morpheme().is_some_and(|first| m.matches(first)))
}

/// Voice from the lexicon: keys are `stem+suffix` over the first
/// morphemes of a predicate, or the same string written as one stem.
fn lexicon_voice<'a>(pack: &'a RulePack, morphemes: &[Morpheme<'_>]) -> Option<&'a str> {
    let first = morphemes.first()?;
    if !matches!(first.tag, MorphTag::VV | MorphTag::VA) {
        return None;
    }
    let mut best: Option<(usize, &str)> = None;
    for (key, value) in &pack.voice_lexicon {
        let parts: Vec<&str> = key.split('+').collect();
        let split = parts.len() <= morphemes.len()
            && parts.iter().zip(morphemes).all(|(p, m)| *p == m.surface);
        let fused = first.surface == parts.concat();
        if (split || fused) && best.is_none_or(|(n, _)| parts.len() > n) {
            best = Some((parts.len(), value));
        }
    }
    best.map(|(_, v)| v)
}

fn word_features(
    tokens: &[Token],
    index: usize,
    pack: &RulePack,
    options: AssignOptions,
) -> FeatureBag {
    let token = &tokens[index];
    let morphemes: Vec<Morpheme<'_>> = token.morphemes().collect();

    let mut slots = BTreeMap::new();
    for rule in pack.rules.iter().filter(|r| !r.is_periphrastic()) {
        if rule.matches_word(&morphemes) {
            offer(&mut slots, rule);
        }
    }
    if !slots.contains_key("Voice") {
        if let Some(voice) = lexicon_voice(pack, &morphemes) {
            slots.insert(
                "Voice",
                Slot {
                    priority: 0,
                    value: voice,
                },
            );
        }
    }

    if options.periphrastic {
        let following = &tokens[index + 1..tokens.len().min(index + 3)];
        let mut late = BTreeMap::new();
        for rule in pack.rules.iter().filter(|r| r.is_periphrastic()) {
            if rule.matches_word(&morphemes) && lookahead_matches(rule, following) {
                offer(&mut late, rule);
            }
        }
        for (name, slot) in late {
            slots.entry(name).or_insert(slot);
        }
    }

    let mut bag = FeatureBag::new();
    for (name, slot) in slots {
        bag.insert(name, slot.value)
            .expect("pack values are validated at load");
    }
    if options.transcribe_endings && bag.is_empty() {
        if let Some((name, value)) = ending_transcription(token) {
            bag.insert(name, &value)
                .expect("romanization is alphanumeric");
        }
    }
    bag
}

fn ending_transcription(token: &Token) -> Option<(&'static str, String)> {
    let last = token.last_morpheme()?;
    if last.tag != MorphTag::EC {
        return None;
    }
    let roman = romanize::romanize(last.surface);
    (!roman.is_empty()).then_some(("Case", roman))
}

/// `Case=<romanized ending>` for a word ending in a conjunctive ending
/// whose FEATS are still empty; `None` otherwise.
pub fn transcribe_ending(token: &Token) -> Option<(String, String)> {
    if !token.feats.is_empty() {
        return None;
    }
    ending_transcription(token).map(|(k, v)| (k.to_owned(), v))
}

/// Replaces every word's FEATS with the features derived from its
/// morphemes.
pub fn assign_features(sentence: &Sentence, pack: &RulePack) -> Sentence {
    assign_features_with(sentence, pack, AssignOptions::default())
}

pub fn assign_features_with(
    sentence: &Sentence,
    pack: &RulePack,
    options: AssignOptions,
) -> Sentence {
    let mut out = sentence.clone();
    for (i, token) in out.tokens.iter_mut().enumerate() {
        token.feats = word_features(&sentence.tokens, i, pack, options);
    }
    out
}

/// True if the word is one of the pack's functional words for its UPOS.
pub fn is_functional(token: &Token, pack: &RulePack) -> bool {
    pack.functional_words
        .get(&token.upos)
        .is_some_and(|forms| forms.contains(&token.form))
}

/// Like [`is_functional`], and records `Functional=Yes` in MISC.
pub fn tag_functional(token: &mut Token, pack: &RulePack) -> bool {
    let functional = is_functional(token, pack);
    if functional {
        token.misc_add(FUNCTIONAL_MISC);
    }
    functional
}

/// Feature assignment followed by functional-word marking.
pub fn enrich(sentence: &Sentence, pack: &RulePack) -> Sentence {
    let mut out = assign_features(sentence, pack);
    for token in &mut out.tokens {
        tag_functional(token, pack);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{MorphTag::*, Upos};

    fn word(form: &str, morphs: &[(&str, MorphTag)]) -> Token {
        Token::new(1, form, morphs, Upos::X, 0, "root")
    }

    fn feats_of(words: Vec<Token>) -> Vec<String> {
        let mut tokens = words;
        let n = tokens.len();
        for (i, t) in tokens.iter_mut().enumerate() {
            t.id = i + 1;
            t.head = if i + 1 == n { 0 } else { n };
            t.deprel = if i + 1 == n {
                "root".into()
            } else {
                "dep".into()
            };
        }
        let sentence = Sentence::new(tokens);
        assign_features(&sentence, &RulePack::korean())
            .tokens
            .iter()
            .map(|t| t.feats.to_string())
            .collect()
    }

    fn one(form: &str, morphs: &[(&str, MorphTag)]) -> String {
        feats_of(vec![word(form, morphs)]).remove(0)
    }

    #[test]
    fn sample_rows() {
        assert_eq!(one("분위기나", &[("분위기", NNG), ("나", JC)]), "Case=Disj");
        assert_eq!(one("경관이", &[("경관", NNG), ("이", JKS)]), "Case=Nom");
        assert_eq!(one("좋다", &[("좋", VA), ("다", EF)]), "Mood=Ind");
        assert_eq!(one("학교", &[("학교", NNG)]), "_");
        assert_eq!(one("굉장히", &[("굉장히", MAG)]), "_");
    }

    #[test]
    fn past_indicative_composes() {
        // Tense=Past from EP 었, Mood=Ind from EF 다
        assert_eq!(
            one("먹었다", &[("먹", VV), ("었", EP), ("다", EF)]),
            "Mood=Ind|Tense=Past"
        );
    }

    #[test]
    fn plural_suffix() {
        assert_eq!(one("학생들", &[("학생", NNG), ("들", XSN)]), "Number=Plur");
    }

    #[test]
    fn desiderative_is_periphrastic() {
        let out = feats_of(vec![
            word("가고", &[("가", VV), ("고", EC)]),
            word("싶다", &[("싶", VX), ("다", EF)]),
        ]);
        assert_eq!(out[0], "Mood=Des|VerbForm=Conv");
        assert_eq!(out[1], "Mood=Ind");
    }

    #[test]
    fn priority_resolves_conditionals() {
        assert_eq!(one("오면", &[("오", VV), ("면", EC)]), "Mood=Cnd");
        assert_eq!(
            one("사람이면", &[("사람", NNG), ("이", VCP), ("면", EC)]),
            "Mood=CndGen"
        );
        assert_eq!(one("있으면", &[("있", VA), ("으면", EC)]), "Mood=CndPot");
        assert_eq!(
            one("건강하면", &[("건강", NNG), ("하", XSA), ("면", EC)]),
            "Mood=CndGenPot"
        );
    }

    #[test]
    fn topic_particle_loses_to_oblique_case() {
        assert_eq!(
            one("학교에서는", &[("학교", NNG), ("에서", JKB), ("는", JX)]),
            "Case=Abl"
        );
    }

    #[test]
    fn voice_lexicon() {
        assert_eq!(
            one("먹혔다", &[("먹", VV), ("히", XSV), ("었", EP), ("다", EF)]),
            "Mood=Ind|Tense=Past|Voice=Pass"
        );
        assert_eq!(
            one("먹였다", &[("먹", VV), ("이", XSV), ("었", EP), ("다", EF)]),
            "Mood=Ind|Tense=Past|Voice=Cau"
        );
        assert!(one("보였다", &[("보이", VV), ("었", EP), ("다", EF)]).contains("Voice=CauPass"));
        // unknown stems stay unmarked
        assert!(
            !one("읽혔다", &[("읽", VV), ("히", XSV), ("었", EP), ("다", EF)]).contains("Voice")
        );
    }

    #[test]
    fn transcription_only_for_featureless_words() {
        assert_eq!(one("가서", &[("가", VV), ("서", EC)]), "Case=seo");
        // the conditional rule fires, so no transcription
        assert_eq!(one("가면", &[("가", VV), ("면", EC)]), "Mood=Cnd");
    }

    #[test]
    fn transcribe_ending_guard() {
        let mut t = word("가서", &[("가", VV), ("서", EC)]);
        assert_eq!(transcribe_ending(&t), Some(("Case".into(), "seo".into())));
        let go = word("먹고", &[("먹", VV), ("고", EC)]);
        assert_eq!(transcribe_ending(&go), Some(("Case".into(), "go".into())));
        t.feats.insert("Mood", "Cnd").unwrap();
        assert_eq!(transcribe_ending(&t), None);
        assert_eq!(
            transcribe_ending(&word("먹다", &[("먹", VV), ("다", EF)])),
            None
        );
    }

    #[test]
    fn existing_features_are_replaced() {
        let mut t = word("학교", &[("학교", NNG)]);
        t.feats.insert("Case", "Acc").unwrap();
        let s = Sentence::new(vec![t]);
        assert!(assign_features(&s, &RulePack::korean()).tokens[0]
            .feats
            .is_empty());
    }

    #[test]
    fn functional_words() {
        let pack = RulePack::korean();
        let mut geu = Token::new(1, "그", &[("그", MM)], Upos::DET, 0, "root");
        assert!(tag_functional(&mut geu, &pack));
        assert_eq!(geu.misc, "Functional=Yes");
        let deo = Token::new(1, "더", &[("더", MAG)], Upos::ADV, 0, "root");
        assert!(is_functional(&deo, &pack));
        let mut other = Token::new(1, "굉장히", &[("굉장히", MAG)], Upos::ADV, 0, "root");
        assert!(!tag_functional(&mut other, &pack));
        assert_eq!(other.misc, "_");
    }
}
