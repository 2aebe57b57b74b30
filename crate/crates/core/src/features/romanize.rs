//! Revised Romanization of Korean morpheme surfaces.
//!
//! Covers the letter tables plus the sound changes that show up in verbal
//! endings: liaison of a coda into a following `ㅇ` onset, nasalization of
//! obstruent codas before `ㄴ`/`ㅁ`, and `ㄹ` lateralization. Standalone
//! compatibility jamo (`ㄴ`, `ㅂ` in `ㅂ니다`) act as codas.

const INITIALS: [&str; 19] = [
    "g", "kk", "n", "d", "tt", "r", "m", "b", "pp", "s", "ss", "", "j", "jj", "ch", "k", "t", "p",
    "h",
];

const MEDIALS: [&str; 21] = [
    "a", "ae", "ya", "yae", "eo", "e", "yeo", "ye", "o", "wa", "wae", "oe", "yo", "u", "wo", "we",
    "wi", "yu", "eu", "ui", "i",
];

/// Coda spelled before a consonant or at the end of the word.
const CODAS: [&str; 28] = [
    "", "k", "k", "k", "n", "n", "n", "t", "l", "k", "m", "l", "l", "l", "p", "l", "m", "p", "p",
    "t", "t", "ng", "t", "t", "k", "t", "p", "t",
];

/// Coda carried over into a following vowel-initial syllable.
const LIAISON: [&str; 28] = [
    "", "g", "kk", "gs", "n", "nj", "n", "d", "r", "lg", "lm", "lb", "ls", "lt", "lp", "r", "m",
    "b", "bs", "s", "ss", "ng", "j", "ch", "k", "t", "p", "",
];

/// Compatibility jamo U+3131..=U+314E to coda index (0 = cannot be a coda).
const JAMO_CODA: [usize; 30] = [
    1, 2, 3, 4, 5, 6, 7, 0, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 0, 18, 19, 20, 21, 22, 0, 23, 24,
    25, 26, 27,
];

const ONSET_SILENT: usize = 11;
const ONSET_N: usize = 2;
const ONSET_R: usize = 5;
const ONSET_M: usize = 6;
const CODA_N: usize = 4;
const CODA_L: usize = 8;
const CODA_NG: usize = 21;

#[derive(Clone, Copy, Debug)]
enum Unit {
    Syllable {
        onset: usize,
        vowel: usize,
        coda: usize,
    },
    /// A lone vowel jamo.
    Vowel(usize),
    /// A lone consonant jamo, treated as a coda.
    Coda(usize),
    Other(char),
}

fn units(s: &str) -> Vec<Unit> {
    s.chars()
        .map(|c| match c as u32 {
            cp @ 0xAC00..=0xD7A3 => {
                let idx = (cp - 0xAC00) as usize;
                Unit::Syllable {
                    onset: idx / 588,
                    vowel: (idx % 588) / 28,
                    coda: idx % 28,
                }
            }
            cp @ 0x3131..=0x314E => match JAMO_CODA[(cp - 0x3131) as usize] {
                0 => Unit::Other(c),
                coda => Unit::Coda(coda),
            },
            cp @ 0x314F..=0x3163 => Unit::Vowel((cp - 0x314F) as usize),
            _ => Unit::Other(c),
        })
        .collect()
}

fn coda_of(unit: Unit) -> usize {
    match unit {
        Unit::Syllable { coda, .. } | Unit::Coda(coda) => coda,
        _ => 0,
    }
}

/// Onset index of a unit starting with a consonant letter, or silent for
/// vowel-initial units.
fn onset_of(unit: Unit) -> Option<usize> {
    match unit {
        Unit::Syllable { onset, .. } => Some(onset),
        Unit::Vowel(_) => Some(ONSET_SILENT),
        _ => None,
    }
}

fn nasalized(coda: usize) -> usize {
    match CODAS[coda] {
        "k" => CODA_NG,
        "t" => CODA_N,
        "p" => 16,
        _ => coda,
    }
}

/// Romanizes `surface`; characters outside Hangul are kept if ASCII
/// alphanumeric (lowercased) and dropped otherwise.
pub fn romanize(surface: &str) -> String {
    let units = units(surface);
    let mut out = String::new();
    for (i, &unit) in units.iter().enumerate() {
        let prev_coda = if i > 0 { coda_of(units[i - 1]) } else { 0 };
        let next_onset = units.get(i + 1).copied().and_then(onset_of);

        if let Some(onset) = onset_of(unit) {
            let onset_str = match onset {
                ONSET_SILENT => "",
                ONSET_R if prev_coda == CODA_L || prev_coda == CODA_N => "l",
                ONSET_R if prev_coda != 0 => "n",
                _ => INITIALS[onset],
            };
            out.push_str(onset_str);
        }

        let (vowel, coda) = match unit {
            Unit::Syllable { vowel, coda, .. } => (Some(vowel), coda),
            Unit::Vowel(v) => (Some(v), 0),
            Unit::Coda(c) => (None, c),
            Unit::Other(c) => {
                if c.is_ascii_alphanumeric() {
                    out.push(c.to_ascii_lowercase());
                }
                continue;
            }
        };
        if let Some(v) = vowel {
            out.push_str(MEDIALS[v]);
        }
        if coda == 0 {
            continue;
        }
        let coda_str = match next_onset {
            Some(ONSET_SILENT) => LIAISON[coda],
            Some(ONSET_N) | Some(ONSET_M) => CODAS[nasalized(coda)],
            Some(ONSET_R) if coda == CODA_L || coda == CODA_N => "l",
            _ => CODAS[coda],
        };
        out.push_str(coda_str);
    }
    out
}
