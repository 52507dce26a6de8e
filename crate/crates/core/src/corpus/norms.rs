use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::kv::KvMap;
use crate::{Modality, SensorimotorVector, MODALITY_COUNT};

use super::{open, CorpusError};

/// Upper end of the raw Lancaster rating scale.
pub const RATING_MAX: f64 = 5.0;

pub type NormsMap = BTreeMap<String, SensorimotorVector>;

/// Column names of the norms CSV. Defaults follow the published Lancaster
/// release; any subset can be overridden from a key-value file using the
/// keys `word` and the modality keys (`auditory`, `foot_leg`, ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormsHeaderMap {
    pub word: String,
    pub columns: [String; MODALITY_COUNT],
}

impl Default for NormsHeaderMap {
    fn default() -> Self {
        let names = [
            "Auditory.mean",
            "Gustatory.mean",
            "Haptic.mean",
            "Interoceptive.mean",
            "Olfactory.mean",
            "Visual.mean",
            "Foot_leg.mean",
            "Hand_arm.mean",
            "Head.mean",
            "Mouth.mean",
            "Torso.mean",
        ];
        NormsHeaderMap {
            word: "Word".to_string(),
            columns: names.map(String::from),
        }
    }
}

impl NormsHeaderMap {
    pub fn from_kv(map: &KvMap) -> Result<Self, CorpusError> {
        let mut out = Self::default();
        for (key, value) in map {
            if key == "word" {
                out.word = value.clone();
                continue;
            }
            let m: Modality = key
                .parse()
                .map_err(|_| CorpusError::HeaderMap(format!("unknown key `{key}`")))?;
            out.columns[m.index()] = value.clone();
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    /// 1-based line number in the CSV file (the header is line 1).
    pub row: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct NormsTable {
    pub entries: NormsMap,
    pub rejected: Vec<RejectedRow>,
    /// Rows whose lowercased entry repeated an earlier row.
    pub duplicates: usize,
}

/// Parses a norms CSV, dividing every rating by 5 and lowercasing entries.
/// Rows with a rating outside `[0, 5]` or a non-numeric rating are rejected
/// and reported; a missing column rejects the whole file.
pub fn read_norms_csv<R: Read>(reader: R, header: &NormsHeaderMap) -> Result<NormsTable, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize, CorpusError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let word_col = find(&header.word)?;
    let mut cols = [0usize; MODALITY_COUNT];
    for (slot, name) in cols.iter_mut().zip(&header.columns) {
        *slot = find(name)?;
    }

    let mut table = NormsTable::default();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let Some(word) = record.get(word_col).map(|w| w.trim().to_lowercase()) else {
            table.rejected.push(RejectedRow {
                row,
                reason: "missing word".into(),
            });
            continue;
        };
        if word.is_empty() {
            table.rejected.push(RejectedRow {
                row,
                reason: "empty word".into(),
            });
            continue;
        }
        match parse_ratings(&record, &cols, header) {
            Ok(v) => {
                if table.entries.contains_key(&word) {
                    log::warn!("norms row {row}: duplicate entry `{word}` ignored");
                    table.duplicates += 1;
                } else {
                    table.entries.insert(word, v);
                }
            }
            Err(reason) => table.rejected.push(RejectedRow { row, reason }),
        }
    }
    Ok(table)
}

fn parse_ratings(
    record: &csv::StringRecord,
    cols: &[usize; MODALITY_COUNT],
    header: &NormsHeaderMap,
) -> Result<SensorimotorVector, String> {
    let mut out = SensorimotorVector::ZERO;
    for (i, &c) in cols.iter().enumerate() {
        let name = &header.columns[i];
        let field = record.get(c).ok_or_else(|| format!("missing value for `{name}`"))?;
        let r: f64 = field
            .trim()
            .parse()
            .map_err(|_| format!("`{name}` value `{field}` is not a number"))?;
        if !(0.0..=RATING_MAX).contains(&r) {
            return Err(format!("`{name}` rating {r} outside [0, 5]"));
        }
        out.0[i] = r / RATING_MAX;
    }
    Ok(out)
}

pub fn load_norms_csv(path: &Path, header: &NormsHeaderMap) -> Result<NormsTable, CorpusError> {
    read_norms_csv(std::io::BufReader::new(open(path)?), header)
}
