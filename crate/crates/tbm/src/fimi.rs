//! FIMI transaction files: one transaction per line, whitespace-separated
//! decimal item identifiers, LF or CRLF line endings.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use tbm_core::{Item, Pattern, TransactionDataset};

#[derive(Debug, thiserror::Error)]
pub enum FimiError {
    #[error("line {line}: invalid item identifier {token:?}")]
    BadToken { line: usize, token: String },
    #[error("input contains no transactions")]
    Empty,
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FimiOptions {
    /// Treat blank lines as observations of the empty pattern instead of
    /// skipping them.
    pub keep_empty: bool,
}

/// Parses FIMI text. Duplicate items within a line collapse; `n_variables`
/// is one more than the largest identifier seen.
pub fn parse_fimi_str(text: &str, opts: FimiOptions) -> Result<TransactionDataset, FimiError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut items = Vec::new();
        for token in line.split_ascii_whitespace() {
            let item: Item = token.parse().map_err(|_| FimiError::BadToken { line: i + 1, token: token.to_owned() })?;
            items.push(item);
        }
        if items.is_empty() && !opts.keep_empty {
            continue;
        }
        rows.push(Pattern::new(items));
    }
    if rows.is_empty() {
        return Err(FimiError::Empty);
    }
    let n = rows.iter().filter_map(Pattern::max_item).max().map_or(0, |m| m as usize + 1);
    let d = TransactionDataset::from_transactions(rows).map_err(|_| FimiError::Empty)?;
    Ok(d.with_n_variables(n).expect("n covers every identifier"))
}

pub fn parse_fimi<R: Read>(mut reader: R, opts: FimiOptions) -> Result<TransactionDataset, FimiError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|_| FimiError::Encoding)?;
    parse_fimi_str(&text, opts)
}

pub fn read_fimi(path: &Path, opts: FimiOptions) -> Result<TransactionDataset, FimiError> {
    parse_fimi(File::open(path)?, opts)
}

/// Canonical form: sorted items, one line per occurrence, patterns in
/// lexicographic order. The empty pattern becomes a blank line.
pub fn write_fimi<W: Write>(d: &TransactionDataset, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    for (x, count) in d.entries() {
        let line = format_items(x);
        for _ in 0..count {
            writeln!(out, "{line}")?;
        }
    }
    out.flush()
}

pub fn format_items(x: &Pattern) -> String {
    x.items().iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}
