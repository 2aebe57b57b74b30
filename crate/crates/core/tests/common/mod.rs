#![allow(dead_code)]

use proptest::prelude::*;
use unidive::conllu::{MorphTag, MorphTag::*, Sentence, Token, Upos};
use unidive::correct::AuxAnnotation;

type Entry = (&'static str, &'static [(&'static str, MorphTag)], Upos);

pub const VOCAB: &[Entry] = &[
    ("학교", &[("학교", NNG)], Upos::NOUN),
    ("분위기나", &[("분위기", NNG), ("나", JC)], Upos::NOUN),
    ("경관이", &[("경관", NNG), ("이", JKS)], Upos::NOUN),
    ("굉장히", &[("굉장히", MAG)], Upos::ADV),
    ("좋다", &[("좋", VA), ("다", EF)], Upos::ADJ),
    (".", &[(".", SF)], Upos::PUNCT),
    ("가격에", &[("가격", NNG), ("에", JKB)], Upos::ADV),
    (
        "깨끗한",
        &[("깨끗", XR), ("하", XSA), ("ㄴ", ETM)],
        Upos::ADJ,
    ),
    (
        "깨끗하고",
        &[("깨끗", XR), ("하", XSA), ("고", EC)],
        Upos::ADJ,
    ),
    ("민주", &[("민주", XR)], Upos::X),
    ("되었다", &[("되", VV), ("었", EP), ("다", EF)], Upos::VERB),
    ("아니다", &[("아니", VCN), ("다", EF)], Upos::ADJ),
    ("그러나", &[("그러나", MAG)], Upos::ADV),
    ("서울에서", &[("서울", NNP), ("에서", JKB)], Upos::PROPN),
    ("사과를", &[("사과", NNG), ("를", JKO)], Upos::NOUN),
    ("중일", &[("중", NNB), ("이", VCP), ("ㄹ", ETM)], Upos::VERB),
    ("먹었다", &[("먹", VV), ("었", EP), ("다", EF)], Upos::VERB),
    ("가고", &[("가", VV), ("고", EC)], Upos::VERB),
    ("싶다", &[("싶", VX), ("다", EF)], Upos::AUX),
    ("가서", &[("가", VV), ("서", EC)], Upos::VERB),
    ("학생들", &[("학생", NNG), ("들", XSN)], Upos::NOUN),
    ("갑니다", &[("가", VV), ("ㅂ니다", EF)], Upos::VERB),
    ("먹기", &[("먹", VV), ("기", ETN)], Upos::NOUN),
    ("그", &[("그", MM)], Upos::DET),
    ("더", &[("더", MAG)], Upos::ADV),
    ("나는", &[("나", NP), ("는", JX)], Upos::PRON),
    (
        "먹혔다",
        &[("먹", VV), ("히", XSV), ("었", EP), ("다", EF)],
        Upos::VERB,
    ),
    ("세", &[("세", MM)], Upos::NUM),
    ("3", &[("3", SN)], Upos::NUM),
    (
        "공부한다",
        &[("공부", NNG), ("하", XSV), ("ㄴ다", EF)],
        Upos::VERB,
    ),
    ("있으면", &[("있", VA), ("으면", EC)], Upos::ADJ),
    ("붉다", &[("붉", VV), ("다", EF)], Upos::VERB),
];

pub const DEPRELS: &[&str] = &[
    "nsubj", "obj", "obl", "advmod", "amod", "flat", "conj", "punct", "aux", "dep",
];
pub const FEATS: &[(&str, &str)] = &[
    ("Case", "Nom"),
    ("Mood", "Ind"),
    ("Tense", "Past"),
    ("Number", "Plur"),
];

fn build(
    words: Vec<(usize, usize, usize, bool, Option<usize>)>,
    order: Vec<usize>,
    parents: Vec<usize>,
    with_id: bool,
    index: usize,
) -> Sentence {
    let n = words.len();
    let upos_pool = [
        Upos::NOUN,
        Upos::VERB,
        Upos::ADJ,
        Upos::ADV,
        Upos::PROPN,
        Upos::X,
    ];
    let mut heads = vec![0; n];
    // order[0] is the root; every later word attaches to an earlier one
    for k in 1..n {
        heads[order[k]] = order[parents[k] % k] + 1;
    }
    let tokens = words
        .into_iter()
        .enumerate()
        .map(|(i, (v, rel, upos, space, feat))| {
            let (form, morphs, canonical) = VOCAB[v];
            let upos = if upos < upos_pool.len() {
                upos_pool[upos]
            } else {
                canonical
            };
            let deprel = if heads[i] == 0 { "root" } else { DEPRELS[rel] };
            let mut t = Token::new(i + 1, form, morphs, upos, heads[i], deprel);
            if let Some(f) = feat {
                t.feats.insert(FEATS[f].0, FEATS[f].1).unwrap();
            }
            if space {
                t.misc = "SpaceAfter=No".into();
            }
            t
        })
        .collect();
    let mut s = Sentence::new(tokens);
    if with_id {
        s.comments.push(format!("# sent_id = s{index}"));
    }
    s
}

/// Valid random sentences of 1..=max_len words built from [`VOCAB`].
pub fn arb_sentence(max_len: usize) -> impl Strategy<Value = Sentence> {
    (1..=max_len).prop_flat_map(|n| {
        let word = (
            0..VOCAB.len(),
            0..DEPRELS.len(),
            0..12usize,
            any::<bool>(),
            proptest::option::of(0..FEATS.len()),
        );
        (
            proptest::collection::vec(word, n),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            proptest::collection::vec(0..64usize, n),
            any::<bool>(),
            0..1000usize,
        )
            .prop_map(|(words, order, parents, with_id, index)| {
                build(words, order, parents, with_id, index)
            })
    })
}

pub fn arb_sentence_with_id(max_len: usize) -> impl Strategy<Value = Sentence> {
    arb_sentence(max_len).prop_map(|mut s| {
        if s.sent_id().is_none() {
            s.comments.push("# sent_id = fixed".into());
        }
        s
    })
}

const EXT: &[&[MorphTag]] = &[
    &[NNP],
    &[NNG],
    &[VA, EF],
    &[VV, EF],
    &[XR, XSA, ETM],
    &[NNG, JKS],
];

/// A sentence plus sidecar entries for some of its words.
pub fn arb_sentence_with_aux(
    max_len: usize,
) -> impl Strategy<Value = (Sentence, Vec<AuxAnnotation>)> {
    arb_sentence_with_id(max_len)
        .prop_flat_map(|s| {
            let n = s.len();
            let entry = (1..=n, any::<bool>(), proptest::option::of(0..EXT.len()));
            (Just(s), proptest::collection::vec(entry, 0..=n))
        })
        .prop_map(|(s, entries)| {
            let sid = s.sent_id().unwrap().to_owned();
            let aux = entries
                .into_iter()
                .map(|(token_id, ner, ext)| AuxAnnotation {
                    sent_id: sid.clone(),
                    token_id,
                    ner_label: ner.then(|| "OG".to_owned()),
                    ext_xpos: ext.map(|e| EXT[e].to_vec()),
                })
                .collect();
            (s, aux)
        })
}
