//! Morphosyntactic enrichment and evaluation for Korean CoNLL-U treebanks.

pub mod cli;
pub mod conllu;
pub mod correct;
pub mod eval;
pub mod features;
pub mod instruct;
