//! CoNLL-U reading and writing for Korean treebanks whose LEMMA and XPOS
//! columns carry `+`-joined morpheme segmentations.
//!
//! Only syntactic word rows become [`Token`]s. Multiword-token ranges
//! (`1-2`) and empty nodes (`1.1`) are kept verbatim as [`ExtraRow`]s so
//! that files survive a read/write cycle byte for byte.

use std::fmt;
use std::io::{self, BufRead};

mod feats;
mod tag;
mod validate;

pub use feats::{is_valid_name, is_valid_value, FeatsError, FeatureAtom, FeatureBag};
pub use tag::{MorphTag, UnknownTag, Upos};
pub use validate::{validate, validate_sentence, Diagnostic};

/// One morpheme of a word: a lemma segment and its XPOS tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Morpheme<'a> {
    pub surface: &'a str,
    pub tag: MorphTag,
}

/// A syntactic word row.
///
/// `lemma` and `xpos` are stored as parallel vectors so that misaligned
/// input can still be represented and reported by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: Vec<String>,
    pub upos: Upos,
    pub xpos: Vec<MorphTag>,
    pub feats: FeatureBag,
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// Builds a token from aligned morphemes, with empty FEATS/DEPS/MISC.
    pub fn new(
        id: usize,
        form: &str,
        morphemes: &[(&str, MorphTag)],
        upos: Upos,
        head: usize,
        deprel: &str,
    ) -> Self {
        Token {
            id,
            form: form.to_owned(),
            lemma: morphemes.iter().map(|(s, _)| (*s).to_owned()).collect(),
            upos,
            xpos: morphemes.iter().map(|(_, t)| *t).collect(),
            feats: FeatureBag::new(),
            head,
            deprel: deprel.to_owned(),
            deps: "_".to_owned(),
            misc: "_".to_owned(),
        }
    }

    pub fn is_aligned(&self) -> bool {
        self.lemma.len() == self.xpos.len()
    }

    /// Lemma segments paired with their tags. Stops at the shorter side
    /// when the columns are misaligned.
    pub fn morphemes(&self) -> impl ExactSizeIterator<Item = Morpheme<'_>> + DoubleEndedIterator {
        self.lemma
            .iter()
            .zip(&self.xpos)
            .map(|(surface, &tag)| Morpheme { surface, tag })
    }

    pub fn first_morpheme(&self) -> Option<Morpheme<'_>> {
        self.morphemes().next()
    }

    pub fn last_morpheme(&self) -> Option<Morpheme<'_>> {
        self.morphemes().next_back()
    }

    pub fn lemma_column(&self) -> String {
        if self.lemma.is_empty() {
            "_".to_owned()
        } else {
            self.lemma.join("+")
        }
    }

    pub fn xpos_column(&self) -> String {
        if self.xpos.is_empty() {
            "_".to_owned()
        } else {
            let tags: Vec<&str> = self.xpos.iter().map(|t| t.as_str()).collect();
            tags.join("+")
        }
    }

    /// True if `key=value` (or the bare `key`) is one of the MISC items.
    pub fn misc_has(&self, item: &str) -> bool {
        self.misc != "_" && self.misc.split('|').any(|m| m == item)
    }

    /// Appends a MISC item unless it is already present.
    pub fn misc_add(&mut self, item: &str) {
        if self.misc_has(item) {
            return;
        }
        if self.misc == "_" || self.misc.is_empty() {
            self.misc = item.to_owned();
        } else {
            self.misc.push('|');
            self.misc.push_str(item);
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id,
            self.form,
            self.lemma_column(),
            self.upos,
            self.xpos_column(),
            self.feats,
            self.head,
            self.deprel,
            self.deps,
            self.misc
        )
    }
}

/// A multiword-token range or empty-node row, kept verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraRow {
    /// Number of syntactic words preceding the row.
    pub position: usize,
    pub line: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    /// Comment lines including the leading `#`.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    pub extra: Vec<ExtraRow>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            ..Default::default()
        }
    }

    fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.strip_prefix('#')?.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }

    pub fn sent_id(&self) -> Option<&str> {
        self.comment_value("sent_id")
    }

    pub fn text(&self) -> Option<&str> {
        self.comment_value("text")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The token with 1-based `id`.
    pub fn token(&self, id: usize) -> Option<&Token> {
        id.checked_sub(1).and_then(|i| self.tokens.get(i))
    }
}

impl fmt::Display for Sentence {
    /// Writes the sentence followed by its terminating blank line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for comment in &self.comments {
            writeln!(f, "{comment}")?;
        }
        let mut extra = self.extra.iter().peekable();
        for (i, token) in self.tokens.iter().enumerate() {
            while let Some(row) = extra.next_if(|r| r.position <= i) {
                writeln!(f, "{}", row.line)?;
            }
            writeln!(f, "{token}")?;
        }
        for row in extra {
            writeln!(f, "{}", row.line)?;
        }
        writeln!(f)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("byte order mark not allowed (use BOM stripping)")]
    Bom,
    #[error("expected 10 tab-separated columns, found {0}")]
    ColumnCount(usize),
    #[error("invalid token id `{0}`")]
    InvalidId(String),
    #[error("non-contiguous token id: expected {expected}, found {found}")]
    NonContiguous { expected: usize, found: usize },
    #[error("invalid head `{0}`")]
    InvalidHead(String),
    #[error("{0}")]
    UnknownTag(#[from] UnknownTag),
    #[error("unknown UPOS `{0}`")]
    UnknownUpos(String),
    #[error("morpheme/tag misalignment: {lemma} lemma segments vs {xpos} XPOS tags")]
    Misaligned { lemma: usize, xpos: usize },
    #[error("empty morpheme in lemma `{0}`")]
    EmptyMorpheme(String),
    #[error("invalid FEATS: {0}")]
    Feats(#[from] FeatsError),
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

/// Non-fatal issue found while parsing in lenient mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: warning: {}", self.line, self.message)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Map unknown tags to `NA` / `X` and keep misaligned rows, with a warning.
    pub lenient: bool,
    /// Drop a leading UTF-8 byte order mark instead of rejecting it.
    pub strip_bom: bool,
}

/// Streaming sentence reader.
pub struct Reader<R> {
    input: R,
    options: ParseOptions,
    line_no: usize,
    warnings: Vec<Warning>,
    buf: String,
    done: bool,
}

impl<R: BufRead> Reader<R> {
    pub fn new(input: R) -> Self {
        Self::with_options(input, ParseOptions::default())
    }

    pub fn with_options(input: R, options: ParseOptions) -> Self {
        Reader {
            input,
            options,
            line_no: 0,
            warnings: Vec::new(),
            buf: String::new(),
            done: false,
        }
    }

    /// Warnings collected so far; drained by the call.
    pub fn take_warnings(&mut self) -> Vec<Warning> {
        std::mem::take(&mut self.warnings)
    }

    fn err(&self, kind: impl Into<ParseErrorKind>) -> ParseError {
        ParseError {
            line: self.line_no,
            kind: kind.into(),
        }
    }

    fn next_line(&mut self) -> Result<Option<&str>, ParseError> {
        self.buf.clear();
        let n = self
            .input
            .read_line(&mut self.buf)
            .map_err(|e| ParseError {
                line: self.line_no + 1,
                kind: e.into(),
            })?;
        if n == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        if self.buf.ends_with('\n') {
            self.buf.pop();
            if self.buf.ends_with('\r') {
                self.buf.pop();
            }
        }
        if self.line_no == 1 && self.buf.starts_with('\u{feff}') {
            if !self.options.strip_bom {
                return Err(self.err(ParseErrorKind::Bom));
            }
            self.buf.drain(..'\u{feff}'.len_utf8());
        }
        Ok(Some(&self.buf))
    }

    /// Reads the next sentence, or `None` at end of input.
    pub fn read_sentence(&mut self) -> Result<Option<Sentence>, ParseError> {
        let mut sentence = Sentence::default();
        let mut started = false;
        while let Some(line) = self.next_line()? {
            let line = line.to_owned();
            if line.trim().is_empty() {
                if started {
                    break;
                }
                continue;
            }
            started = true;
            if line.starts_with('#') {
                sentence.comments.push(line);
                continue;
            }
            self.parse_row(&line, &mut sentence)?;
        }
        Ok(started.then_some(sentence))
    }

    fn parse_row(&mut self, line: &str, sentence: &mut Sentence) -> Result<(), ParseError> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(self.err(ParseErrorKind::ColumnCount(cols.len())));
        }
        if cols[0].contains(['-', '.']) {
            sentence.extra.push(ExtraRow {
                position: sentence.tokens.len(),
                line: line.to_owned(),
            });
            return Ok(());
        }
        let id: usize = cols[0]
            .parse()
            .ok()
            .filter(|&id| id >= 1)
            .ok_or_else(|| self.err(ParseErrorKind::InvalidId(cols[0].to_owned())))?;
        let expected = sentence.tokens.len() + 1;
        if id != expected {
            return Err(self.err(ParseErrorKind::NonContiguous {
                expected,
                found: id,
            }));
        }

        let xpos = self.parse_xpos(cols[4])?;
        let lemma = split_lemma(cols[2], xpos.len());
        if lemma.iter().any(String::is_empty) {
            return Err(self.err(ParseErrorKind::EmptyMorpheme(cols[2].to_owned())));
        }
        if lemma.len() != xpos.len() {
            let kind = ParseErrorKind::Misaligned {
                lemma: lemma.len(),
                xpos: xpos.len(),
            };
            if !self.options.lenient {
                return Err(self.err(kind));
            }
            self.warn(kind.to_string());
        }
        let upos = match cols[3].parse::<Upos>() {
            Ok(upos) => upos,
            Err(_) if self.options.lenient => {
                self.warn(format!("unknown UPOS `{}` mapped to X", cols[3]));
                Upos::X
            }
            Err(_) => return Err(self.err(ParseErrorKind::UnknownUpos(cols[3].to_owned()))),
        };
        let feats: FeatureBag = cols[5]
            .parse()
            .map_err(|e| self.err(ParseErrorKind::Feats(e)))?;
        if cols[5] != "_" && feats.to_string() != cols[5] {
            self.warn(format!("FEATS `{}` is not in canonical order", cols[5]));
        }
        let head = cols[6]
            .parse()
            .map_err(|_| self.err(ParseErrorKind::InvalidHead(cols[6].to_owned())))?;

        sentence.tokens.push(Token {
            id,
            form: cols[1].to_owned(),
            lemma,
            upos,
            xpos,
            feats,
            head,
            deprel: cols[7].to_owned(),
            deps: cols[8].to_owned(),
            misc: cols[9].to_owned(),
        });
        Ok(())
    }

    fn parse_xpos(&mut self, column: &str) -> Result<Vec<MorphTag>, ParseError> {
        if column == "_" {
            return Ok(Vec::new());
        }
        let mut tags = Vec::new();
        for code in column.split('+') {
            match code.parse::<MorphTag>() {
                Ok(tag) => tags.push(tag),
                Err(e) if self.options.lenient => {
                    self.warn(format!("{e} mapped to NA"));
                    tags.push(MorphTag::NA);
                }
                Err(e) => return Err(self.err(e)),
            }
        }
        Ok(tags)
    }

    fn warn(&mut self, message: String) {
        self.warnings.push(Warning {
            line: self.line_no,
            message,
        });
    }
}

/// `_` is an empty lemma unless a single tag accompanies it (the word `_`).
fn split_lemma(column: &str, n_tags: usize) -> Vec<String> {
    if column == "_" && n_tags != 1 {
        return Vec::new();
    }
    if column == "+" {
        return vec![column.to_owned()];
    }
    column.split('+').map(str::to_owned).collect()
}

impl<R: BufRead> Iterator for Reader<R> {
    type Item = Result<Sentence, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.read_sentence().transpose();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

/// Parses a whole CoNLL-U document in strict mode.
pub fn parse_conllu(input: &str) -> Result<Vec<Sentence>, ParseError> {
    Reader::new(input.as_bytes()).collect()
}

/// Parses with explicit options, returning sentences and warnings.
pub fn parse_conllu_with(
    input: &str,
    options: ParseOptions,
) -> Result<(Vec<Sentence>, Vec<Warning>), ParseError> {
    let mut reader = Reader::with_options(input.as_bytes(), options);
    let sentences = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok((sentences, reader.take_warnings()))
}

/// Serializes sentences after checking them with [`validate`].
pub fn serialize_conllu(sentences: &[Sentence]) -> Result<String, Vec<Diagnostic>> {
    let diagnostics = validate(sentences);
    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }
    Ok(sentences.iter().map(ToString::to_string).collect())
}
