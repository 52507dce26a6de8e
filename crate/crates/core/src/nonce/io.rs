use std::io::Read;

use super::{FilterTag, NonceCandidate};
use crate::{Modality, SensorimotorVector};

#[derive(Debug, thiserror::Error)]
pub enum CandidateFileError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("candidate file lacks column `{0}`")]
    MissingColumn(String),
}

/// `text,seed_word,filters_passed,<eleven modality columns>`; the score
/// columns are empty for unscored candidates and filters are `;`-separated.
pub fn candidates_to_csv(candidates: &[NonceCandidate]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["text", "seed_word", "filters_passed"];
    header.extend(Modality::ALL.iter().map(|m| m.key()));
    w.write_record(&header).expect("in-memory write");
    for c in candidates {
        let filters: Vec<&str> = c.filters_passed.iter().map(|f| f.key()).collect();
        let mut row = vec![c.text.clone(), c.seed_word.clone(), filters.join(";")];
        match c.scores {
            Some(s) => row.extend(s.values().iter().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat(String::new()).take(Modality::ALL.len())),
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Parses [`candidates_to_csv`] output; lines starting with `#` are skipped.
pub fn read_candidates_csv<R: Read>(reader: R) -> Result<Vec<NonceCandidate>, CandidateFileError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CandidateFileError::MissingColumn(name.to_string()))
    };
    let text_col = col("text")?;
    let seed_col = col("seed_word")?;
    let filters_col = col("filters_passed")?;
    let mut score_cols = [0usize; 11];
    for (slot, m) in score_cols.iter_mut().zip(Modality::ALL) {
        *slot = col(m.key())?;
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: String| CandidateFileError::Row { line, reason };
        let text = record.get(text_col).unwrap_or("").to_string();
        if text.is_empty() {
            return Err(bad("empty text".into()));
        }
        let mut c = NonceCandidate::new(text, record.get(seed_col).unwrap_or(""));
        for f in record.get(filters_col).unwrap_or("").split(';').filter(|f| !f.is_empty()) {
            let tag = FilterTag::ALL
                .into_iter()
                .find(|t| t.key() == f)
                .ok_or_else(|| bad(format!("unknown filter tag `{f}`")))?;
            c.filters_passed.insert(tag);
        }
        let raw: Vec<&str> = score_cols.iter().map(|&i| record.get(i).unwrap_or("")).collect();
        if raw.iter().all(|v| v.is_empty()) {
            out.push(c);
            continue;
        }
        let mut s = SensorimotorVector::ZERO;
        for (m, v) in Modality::ALL.into_iter().zip(raw) {
            s[m] = v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("{m} score `{v}` is not a number")))?;
        }
        c.scores = Some(s);
        out.push(c);
    }
    Ok(out)
}
