use std::fmt;
use std::str::FromStr;

macro_rules! closed_tagset {
    ($(#[$meta:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl FromStr for $name {
            type Err = UnknownTag;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($variant) => Ok($name::$variant),)+
                    _ => Err(UnknownTag(s.to_owned())),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown tag `{0}`")]
pub struct UnknownTag(pub String);

closed_tagset! {
    /// Sejong morpheme tag.
    MorphTag {
        NNG, NNP, NNB, NP, NR,
        VV, VA, VX, VCP, VCN,
        MM, MAG, MAJ, IC,
        JKS, JKC, JKG, JKO, JKB, JKV, JKQ, JX, JC,
        EP, EF, EC, ETN, ETM,
        XPN, XSN, XSV, XSA, XR,
        SF, SP, SS, SE, SO, SW, SL, SH, SN,
        NA,
    }
}

closed_tagset! {
    /// Universal part-of-speech tag.
    Upos {
        NOUN, PROPN, VERB, ADJ, ADV, PRON, DET, NUM, AUX,
        CCONJ, SCONJ, ADP, PART, INTJ, PUNCT, SYM, X,
    }
}

impl MorphTag {
    /// The UPOS a word receives when this tag is its lexical head.
    ///
    /// Returns `None` for particles, endings, affixes, roots and `NA`,
    /// which never head a word.
    pub fn canonical_upos(self) -> Option<Upos> {
        use MorphTag::*;
        let upos = match self {
            NNG | NNB | NR => Upos::NOUN,
            NNP => Upos::PROPN,
            NP => Upos::PRON,
            VV => Upos::VERB,
            VA => Upos::ADJ,
            VX => Upos::AUX,
            VCP | VCN => Upos::ADJ,
            MM => Upos::DET,
            MAG | MAJ => Upos::ADV,
            IC => Upos::INTJ,
            SN => Upos::NUM,
            SF | SP | SS | SE | SO => Upos::PUNCT,
            SW => Upos::SYM,
            SL | SH => Upos::X,
            _ => return None,
        };
        Some(upos)
    }

    pub fn is_particle(self) -> bool {
        use MorphTag::*;
        matches!(self, JKS | JKC | JKG | JKO | JKB | JKV | JKQ | JX | JC)
    }

    pub fn is_ending(self) -> bool {
        use MorphTag::*;
        matches!(self, EP | EF | EC | ETN | ETM)
    }

    pub fn is_derivational_suffix(self) -> bool {
        matches!(self, MorphTag::XSN | MorphTag::XSV | MorphTag::XSA)
    }

    pub fn is_predicate(self) -> bool {
        use MorphTag::*;
        matches!(self, VV | VA | VX | VCP | VCN)
    }
}
