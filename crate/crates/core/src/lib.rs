//! Aspect-based sentiment analysis toolkit.
//!
//! - [`corpus`]: sentences, tokens, opinions, BIO encoding, readers.
//! - [`lexicon`]: general polarity lexicon merging and LLR-induced domain lexicons.
//! - [`clusters`]: Brown/Clark/k-means word cluster lexicons and k-means induction.
//! - [`ote`]: opinion target extraction with an averaged structured perceptron.
//! - [`polarity`]: opinion polarity classification with a one-vs-one SMO linear SVM.
//! - [`eval`]: span P/R/F1, accuracy, fold plans and report tables.
//! - [`config`]: JSON experiment configs with file-relative resource paths.
//! - [`cli`]: the `elixa` command-line front end.

pub mod cli;
pub mod clusters;
pub mod config;
pub mod corpus;
mod error;
pub mod eval;
pub mod lexicon;
pub mod ote;
pub mod polarity;

pub use error::{Error, Result};

pub(crate) fn open_file(path: &std::path::Path) -> Result<std::io::BufReader<std::fs::File>> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}
