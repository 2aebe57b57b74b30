//! Declarative rule packs.
//!
//! A pack is a line-oriented text file. The first non-empty line must be
//! the version header `#unidive-rules v1`; after that, blank lines and
//! lines starting with `#` are ignored. Directives:
//!
//! ```text
//! language <code>
//! rule <id> prio=<int> match=<m> [match=<m>]... [at=any|initial|final|whole]
//!      [next=<m>] [next=<m>] emit=<Name>=<Value> [emit=...]
//! functional <UPOS> <form>...
//! voice <stem>[+<suffix>] <Value>
//! conj-adverb <form>...
//! ```
//!
//! A matcher `<m>` is `<surfaces>/<tags>`: `|`-separated surface
//! alternatives or `*`, then `|`-separated tag codes, tag prefixes ending
//! in `*` (`JK*`), or a lone `*`. Consecutive `match=` fields describe
//! adjacent morphemes inside one word; `at` anchors that sequence. The
//! first `next=` matches the first morpheme of the following word, the
//! second the word after that.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::conllu::{is_valid_value, MorphTag, Morpheme, Upos};

pub const HEADER: &str = "#unidive-rules v1";

/// Feature names a rule may emit.
pub const FEATURE_INVENTORY: &[&str] = &[
    "Aspect",
    "Case",
    "Evident",
    "Mood",
    "NumType",
    "Number",
    "Person",
    "Person[psor]",
    "Polite",
    "PronType",
    "Tense",
    "VerbForm",
    "Voice",
];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorphMatcher {
    /// `None` matches any surface.
    pub surfaces: Option<BTreeSet<String>>,
    /// `None` matches any tag.
    pub tags: Option<BTreeSet<MorphTag>>,
}

impl MorphMatcher {
    pub fn matches(&self, morpheme: Morpheme<'_>) -> bool {
        self.surfaces
            .as_ref()
            .is_none_or(|s| s.contains(morpheme.surface))
            && self.tags.as_ref().is_none_or(|t| t.contains(&morpheme.tag))
    }
}

impl fmt::Display for MorphMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.surfaces {
            None => f.write_str("*")?,
            Some(s) => f.write_str(&s.iter().cloned().collect::<Vec<_>>().join("|"))?,
        }
        f.write_str("/")?;
        match &self.tags {
            None => f.write_str("*"),
            Some(t) => {
                let codes: Vec<&str> = t.iter().map(|t| t.as_str()).collect();
                f.write_str(&codes.join("|"))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Position {
    #[default]
    Any,
    Initial,
    Final,
    Whole,
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(Position::Any),
            "initial" => Ok(Position::Initial),
            "final" => Ok(Position::Final),
            "whole" => Ok(Position::Whole),
            _ => Err(format!("unknown position `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub pattern: Vec<MorphMatcher>,
    pub position: Position,
    /// Matchers for the first morpheme of the following words.
    pub context: Vec<MorphMatcher>,
    pub emits: Vec<(String, String)>,
    pub priority: i32,
    /// Line of the rule in its source file.
    pub line: usize,
}

impl Rule {
    /// Rules with a lookahead context run in the periphrastic pass.
    pub fn is_periphrastic(&self) -> bool {
        !self.context.is_empty()
    }

    /// True if the word-internal pattern matches `morphemes` under the
    /// rule's position constraint.
    pub fn matches_word(&self, morphemes: &[Morpheme<'_>]) -> bool {
        let (n, k) = (morphemes.len(), self.pattern.len());
        if k == 0 || k > n {
            return false;
        }
        let starts = match self.position {
            Position::Any => 0..=n - k,
            Position::Initial => 0..=0,
            Position::Final => n - k..=n - k,
            Position::Whole if n == k => 0..=0,
            Position::Whole => return false,
        };
        starts.into_iter().any(|start| {
            self.pattern
                .iter()
                .zip(&morphemes[start..start + k])
                .all(|(m, &morph)| m.matches(morph))
        })
    }

    fn signature(&self) -> (&[MorphMatcher], Position, &[MorphMatcher]) {
        (&self.pattern, self.position, &self.context)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RulePack {
    pub language: String,
    pub rules: Vec<Rule>,
    pub functional_words: BTreeMap<Upos, BTreeSet<String>>,
    /// Stem (optionally `stem+suffix`) to Voice value.
    pub voice_lexicon: BTreeMap<String, String>,
    pub conjunctive_adverbs: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PackError {
    #[error("missing `{HEADER}` header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown feature `{name}`")]
    UnknownFeature { line: usize, name: String },
    #[error("line {line}: unknown tag `{code}`")]
    UnknownTag { line: usize, code: String },
    #[error("no rules")]
    NoRules,
    #[error("line {line}: duplicate rule id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("rules `{first}` and `{second}` have the same pattern and priority {priority}")]
    PriorityConflict {
        first: String,
        second: String,
        priority: i32,
    },
}

/// The Korean pack shipped with the crate.
pub const KOREAN_PACK: &str = include_str!("../../rules/korean.rules");

impl RulePack {
    pub fn korean() -> RulePack {
        load_rule_pack(KOREAN_PACK).expect("shipped Korean pack is valid")
    }

    /// Distinct feature names the pack's rules and lexicon can emit.
    pub fn families(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self
            .rules
            .iter()
            .flat_map(|r| r.emits.iter().map(|(k, _)| k.as_str()))
            .collect();
        if !self.voice_lexicon.is_empty() {
            out.insert("Voice");
        }
        out
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

impl FromStr for RulePack {
    type Err = PackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_rule_pack(s)
    }
}

/// Parses and validates a rule pack.
pub fn load_rule_pack(source: &str) -> Result<RulePack, PackError> {
    let mut pack = RulePack::default();
    let mut seen_header = false;
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if !seen_header {
            if text.is_empty() {
                continue;
            }
            if text != HEADER {
                return Err(PackError::MissingHeader);
            }
            seen_header = true;
            continue;
        }
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut fields = text.split_whitespace();
        let directive = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        let syntax = |message: String| PackError::Syntax { line, message };
        match directive {
            "language" => match rest.as_slice() {
                [code] => pack.language = (*code).to_owned(),
                _ => return Err(syntax("expected `language <code>`".into())),
            },
            "rule" => {
                let rule = parse_rule(&rest, line)?;
                if pack.rules.iter().any(|r| r.id == rule.id) {
                    return Err(PackError::DuplicateId { line, id: rule.id });
                }
                pack.rules.push(rule);
            }
            "functional" => {
                let (class, forms) = rest
                    .split_first()
                    .filter(|(_, forms)| !forms.is_empty())
                    .ok_or_else(|| syntax("expected `functional <UPOS> <form>...`".into()))?;
                let upos: Upos = class
                    .parse()
                    .map_err(|_| syntax(format!("unknown UPOS `{class}`")))?;
                pack.functional_words
                    .entry(upos)
                    .or_default()
                    .extend(forms.iter().map(|f| (*f).to_owned()));
            }
            "voice" => match rest.as_slice() {
                [stem, value] if is_valid_value(value) => {
                    pack.voice_lexicon
                        .insert((*stem).to_owned(), (*value).to_owned());
                }
                _ => return Err(syntax("expected `voice <stem> <Value>`".into())),
            },
            "conj-adverb" => {
                if rest.is_empty() {
                    return Err(syntax("expected `conj-adverb <form>...`".into()));
                }
                pack.conjunctive_adverbs
                    .extend(rest.iter().map(|f| (*f).to_owned()));
            }
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }
    if !seen_header {
        return Err(PackError::MissingHeader);
    }
    if pack.rules.is_empty() {
        return Err(PackError::NoRules);
    }
    check_priorities(&pack.rules)?;
    Ok(pack)
}

fn check_priorities(rules: &[Rule]) -> Result<(), PackError> {
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i + 1..] {
            if a.priority == b.priority && a.signature() == b.signature() {
                return Err(PackError::PriorityConflict {
                    first: a.id.clone(),
                    second: b.id.clone(),
                    priority: a.priority,
                });
            }
        }
    }
    Ok(())
}

fn parse_rule(fields: &[&str], line: usize) -> Result<Rule, PackError> {
    let syntax = |message: String| PackError::Syntax { line, message };
    let (id, fields) = fields
        .split_first()
        .ok_or_else(|| syntax("rule without id".into()))?;
    let mut rule = Rule {
        id: (*id).to_owned(),
        pattern: Vec::new(),
        position: Position::Any,
        context: Vec::new(),
        emits: Vec::new(),
        priority: 0,
        line,
    };
    let mut priority = None;
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected key=value, found `{field}`")))?;
        match key {
            "prio" => {
                let p = value
                    .parse()
                    .map_err(|_| syntax(format!("invalid priority `{value}`")))?;
                priority = Some(p);
            }
            "match" => rule.pattern.push(parse_matcher(value, line)?),
            "next" => rule.context.push(parse_matcher(value, line)?),
            "at" => rule.position = value.parse().map_err(syntax)?,
            "emit" => {
                let (name, val) = value
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("expected emit=Name=Value, found `{field}`")))?;
                if !FEATURE_INVENTORY.contains(&name) {
                    return Err(PackError::UnknownFeature {
                        line,
                        name: name.to_owned(),
                    });
                }
                if !is_valid_value(val) {
                    return Err(syntax(format!("invalid feature value `{val}`")));
                }
                if rule.emits.iter().any(|(k, _)| k == name) {
                    return Err(syntax(format!("rule emits `{name}` twice")));
                }
                rule.emits.push((name.to_owned(), val.to_owned()));
            }
            _ => return Err(syntax(format!("unknown rule field `{key}`"))),
        }
    }
    rule.priority = priority.ok_or_else(|| syntax(format!("rule `{id}` has no prio")))?;
    if rule.pattern.is_empty() {
        return Err(syntax(format!("rule `{id}` has no match")));
    }
    if rule.emits.is_empty() {
        return Err(syntax(format!("rule `{id}` emits nothing")));
    }
    if rule.context.len() > 2 {
        return Err(syntax(format!(
            "rule `{id}` looks further than two words ahead"
        )));
    }
    Ok(rule)
}

fn parse_matcher(spec: &str, line: usize) -> Result<MorphMatcher, PackError> {
    let (surfaces, tags) = spec.rsplit_once('/').ok_or_else(|| PackError::Syntax {
        line,
        message: format!("matcher `{spec}` needs the form surfaces/tags"),
    })?;
    let surfaces = match surfaces {
        "*" => None,
        "" => {
            return Err(PackError::Syntax {
                line,
                message: format!("matcher `{spec}` has an empty surface"),
            })
        }
        s => Some(s.split('|').map(str::to_owned).collect()),
    };
    let tags = match tags {
        "*" => None,
        t => {
            let mut set = BTreeSet::new();
            for code in t.split('|') {
                if let Some(prefix) = code.strip_suffix('*') {
                    let before = set.len();
                    set.extend(
                        MorphTag::ALL
                            .iter()
                            .filter(|tag| tag.as_str().starts_with(prefix)),
                    );
                    if set.len() == before {
                        return Err(PackError::UnknownTag {
                            line,
                            code: code.to_owned(),
                        });
                    }
                } else {
                    let tag = code.parse().map_err(|_| PackError::UnknownTag {
                        line,
                        code: code.to_owned(),
                    })?;
                    set.insert(tag);
                }
            }
            Some(set)
        }
    };
    Ok(MorphMatcher { surfaces, tags })
}
