use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::{open, CorpusError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingFormat {
    Word2vecBinary,
    GloveText,
    GenericTsv,
}

impl EmbeddingFormat {
    pub fn key(self) -> &'static str {
        match self {
            EmbeddingFormat::Word2vecBinary => "word2vec-binary",
            EmbeddingFormat::GloveText => "glove-text",
            EmbeddingFormat::GenericTsv => "generic-tsv",
        }
    }
}

impl fmt::Display for EmbeddingFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for EmbeddingFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word2vec-binary" | "word2vec" => Ok(EmbeddingFormat::Word2vecBinary),
            "glove-text" | "glove" => Ok(EmbeddingFormat::GloveText),
            "generic-tsv" | "tsv" => Ok(EmbeddingFormat::GenericTsv),
            other => Err(format!("unknown embedding format `{other}`")),
        }
    }
}

/// Token to dense vector table of fixed dimension.
///
/// Vectors are stored row-major in one contiguous `f32` buffer, in insertion
/// order.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    format: EmbeddingFormat,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, format: EmbeddingFormat) -> Result<Self, CorpusError> {
        if dim == 0 {
            return Err(CorpusError::InvalidDim);
        }
        Ok(EmbeddingTable {
            dim,
            format,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    pub fn with_capacity(
        dim: usize,
        format: EmbeddingFormat,
        capacity: usize,
    ) -> Result<Self, CorpusError> {
        let mut table = Self::new(dim, format)?;
        table.tokens.reserve(capacity);
        table.index.reserve(capacity);
        table.data.reserve(capacity.saturating_mul(dim));
        Ok(table)
    }

    pub fn insert(&mut self, token: &str, vector: &[f32]) -> Result<(), CorpusError> {
        if token.is_empty() {
            return Err(CorpusError::EmptyToken);
        }
        if vector.len() != self.dim {
            return Err(CorpusError::VectorLength {
                token: token.to_string(),
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(CorpusError::NonFinite {
                token: token.to_string(),
            });
        }
        if self.index.contains_key(token) {
            return Err(CorpusError::DuplicateToken(token.to_string()));
        }
        self.index.insert(token.to_string(), self.tokens.len());
        self.tokens.push(token.to_string());
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn format(&self) -> EmbeddingFormat {
        self.format
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.position(token).map(|i| self.row(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.tokens
            .iter()
            .enumerate()
            .map(move |(i, t)| (t.as_str(), self.row(i)))
    }

    /// Lowercased token to row index. When several tokens fold to the same
    /// lowercase form the earliest row wins.
    pub fn lowercase_index(&self) -> HashMap<String, usize> {
        let mut map = HashMap::with_capacity(self.tokens.len());
        for (i, t) in self.tokens.iter().enumerate() {
            map.entry(t.to_lowercase()).or_insert(i);
        }
        map
    }
}

/// Byte-counting reader so errors can report where parsing stopped.
struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> CountingReader<R> {
    fn peek(&mut self) -> std::io::Result<Option<u8>> {
        Ok(self.inner.fill_buf()?.first().copied())
    }

    fn bump(&mut self) {
        self.inner.consume(1);
        self.offset += 1;
    }

    /// Reads up to `delim`, consuming it. Returns `None` on EOF before the
    /// delimiter.
    fn read_until_delim(&mut self, delim: u8) -> std::io::Result<Option<Vec<u8>>> {
        let mut buf = Vec::new();
        let n = self.inner.read_until(delim, &mut buf)?;
        self.offset += n as u64;
        if buf.last() != Some(&delim) {
            return Ok(None);
        }
        buf.pop();
        Ok(Some(buf))
    }
}

impl<R: BufRead> Read for CountingReader<R> {
    fn read(&mut self, out: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(out)?;
        self.offset += n as u64;
        Ok(n)
    }
}

fn parse_header_field(bytes: &[u8], offset: u64, what: &str) -> Result<usize, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|_| CorpusError::Header {
        offset,
        reason: format!("{what} is not ASCII"),
    })?;
    let value: i64 = text.trim().parse().map_err(|_| CorpusError::Header {
        offset,
        reason: format!("{what} `{text}` is not an integer"),
    })?;
    usize::try_from(value).map_err(|_| CorpusError::Header {
        offset,
        reason: format!("{what} {value} is negative"),
    })
}

/// Reads the word2vec binary format: an ASCII `"<vocab> <dim>\n"` header
/// followed by `vocab` records of token bytes, one space, and `dim`
/// little-endian `f32` values. A newline preceding a token is skipped, so
/// files written by the reference tool (which end every record with `\n`)
/// load as well.
///
/// `keep` filters records by token; rejected records are still parsed and
/// validated for truncation.
pub fn read_word2vec_binary<R: BufRead>(
    reader: R,
    keep: Option<&dyn Fn(&str) -> bool>,
) -> Result<EmbeddingTable, CorpusError> {
    let mut r = CountingReader {
        inner: reader,
        offset: 0,
    };

    let vocab_bytes = r.read_until_delim(b' ')?.ok_or(CorpusError::Header {
        offset: 0,
        reason: "missing vocabulary size".into(),
    })?;
    let vocab = parse_header_field(&vocab_bytes, 0, "vocabulary size")?;
    let dim_offset = r.offset;
    let dim_bytes = r.read_until_delim(b'\n')?.ok_or(CorpusError::Header {
        offset: dim_offset,
        reason: "missing dimension".into(),
    })?;
    let dim = parse_header_field(&dim_bytes, dim_offset, "dimension")?;
    if dim == 0 {
        return Err(CorpusError::InvalidDim);
    }

    let capacity = if keep.is_some() { 0 } else { vocab.min(1 << 24) };
    let mut table = EmbeddingTable::with_capacity(dim, EmbeddingFormat::Word2vecBinary, capacity)?;
    let mut vector = vec![0f32; dim];
    for record in 0..vocab {
        while r.peek()? == Some(b'\n') {
            r.bump();
        }
        let start = r.offset;
        let token_bytes = r
            .read_until_delim(b' ')?
            .ok_or(CorpusError::Truncated {
                record,
                offset: r.offset,
            })?;
        let token = String::from_utf8(token_bytes)
            .map_err(|_| CorpusError::InvalidToken { record, offset: start })?;
        for v in vector.iter_mut() {
            *v = match r.read_f32::<LittleEndian>() {
                Ok(v) => v,
                Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                    return Err(CorpusError::Truncated {
                        record,
                        offset: r.offset,
                    })
                }
                Err(e) => return Err(e.into()),
            };
        }
        if keep.map_or(true, |f| f(&token)) {
            table.insert(&token, &vector)?;
        }
    }
    Ok(table)
}

pub fn load_word2vec_binary(
    path: &Path,
    keep: Option<&dyn Fn(&str) -> bool>,
) -> Result<EmbeddingTable, CorpusError> {
    read_word2vec_binary(BufReader::with_capacity(1 << 20, open(path)?), keep)
}

/// Writes records exactly as [`read_word2vec_binary`] expects them, with no
/// record terminator.
pub fn write_word2vec_binary<W: Write>(table: &EmbeddingTable, writer: W) -> Result<(), CorpusError> {
    let mut w = BufWriter::new(writer);
    write!(w, "{} {}\n", table.len(), table.dim())?;
    for (token, vector) in table.iter() {
        if token.contains(' ') {
            return Err(CorpusError::UnwritableToken(token.to_string()));
        }
        w.write_all(token.as_bytes())?;
        w.write_all(b" ")?;
        for &v in vector {
            w.write_f32::<LittleEndian>(v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads whitespace-separated GloVe text or tab-separated TSV. The dimension
/// is taken from the first non-blank line; line numbers in errors are
/// 1-based, as are column numbers (the token is column 1).
pub fn read_text_embeddings<R: BufRead>(
    reader: R,
    format: EmbeddingFormat,
    keep: Option<&dyn Fn(&str) -> bool>,
) -> Result<EmbeddingTable, CorpusError> {
    let mut table: Option<EmbeddingTable> = None;
    let mut vector = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = match format {
            EmbeddingFormat::GenericTsv => line.split('\t').collect(),
            _ => line.split_ascii_whitespace().collect(),
        };
        if format == EmbeddingFormat::GenericTsv && fields.last() == Some(&"") {
            fields.pop();
        }
        let token = fields[0];
        let found = fields.len() - 1;
        let expected = match &table {
            Some(t) => t.dim(),
            None => {
                if found == 0 {
                    return Err(CorpusError::InvalidDim);
                }
                found
            }
        };
        if found != expected {
            return Err(CorpusError::InconsistentDim {
                line: lineno,
                expected,
                found,
            });
        }
        vector.clear();
        for (j, field) in fields[1..].iter().enumerate() {
            let v: f32 = field.trim().parse().map_err(|_| CorpusError::NonNumeric {
                line: lineno,
                column: j + 2,
                field: field.to_string(),
            })?;
            vector.push(v);
        }
        let t = match table.as_mut() {
            Some(t) => t,
            None => table.insert(EmbeddingTable::new(expected, format)?),
        };
        if keep.map_or(true, |f| f(token)) {
            t.insert(token, &vector)?;
        }
    }
    table.ok_or(CorpusError::NoEmbeddings)
}

pub fn load_text_embeddings(
    path: &Path,
    format: EmbeddingFormat,
    keep: Option<&dyn Fn(&str) -> bool>,
) -> Result<EmbeddingTable, CorpusError> {
    read_text_embeddings(BufReader::with_capacity(1 << 20, open(path)?), format, keep)
}

/// Writes GloVe text or generic TSV. Values use the shortest representation
/// that parses back to the same `f32`.
pub fn write_text_embeddings<W: Write>(
    table: &EmbeddingTable,
    format: EmbeddingFormat,
    writer: W,
) -> Result<(), CorpusError> {
    let sep = match format {
        EmbeddingFormat::GenericTsv => '\t',
        EmbeddingFormat::GloveText => ' ',
        EmbeddingFormat::Word2vecBinary => return write_word2vec_binary(table, writer),
    };
    let mut w = BufWriter::new(writer);
    for (token, vector) in table.iter() {
        let bad = match format {
            EmbeddingFormat::GenericTsv => token.contains(['\t', '\n', '\r']),
            _ => token.chars().any(char::is_whitespace),
        };
        if bad {
            return Err(CorpusError::UnwritableToken(token.to_string()));
        }
        w.write_all(token.as_bytes())?;
        for v in vector {
            write!(w, "{sep}{v}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture() -> Vec<u8> {
        let mut bytes = b"2 3\n".to_vec();
        for (tok, v) in [("cat", [1f32, 0., 0.]), ("dog", [0., 1., 0.])] {
            bytes.extend_from_slice(tok.as_bytes());
            bytes.push(b' ');
            for x in v {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        bytes
    }

    #[test]
    fn reads_hand_written_binary() {
        let t = read_word2vec_binary(&fixture()[..], None).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("cat").unwrap(), &[1.0, 0.0, 0.0]);
        assert_eq!(t.get("dog").unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn accepts_newline_terminated_records() {
        let mut bytes = b"2 1\n".to_vec();
        for tok in ["a", "b"] {
            bytes.extend_from_slice(tok.as_bytes());
            bytes.push(b' ');
            bytes.extend_from_slice(&0.5f32.to_le_bytes());
            bytes.push(b'\n');
        }
        let t = read_word2vec_binary(&bytes[..], None).unwrap();
        assert_eq!(t.tokens(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn empty_file_fails_at_offset_zero() {
        match read_word2vec_binary(&b""[..], None) {
            Err(CorpusError::Header { offset: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncation_names_missing_record() {
        let mut bytes = fixture();
        bytes[0] = b'3';
        match read_word2vec_binary(&bytes[..], None) {
            Err(CorpusError::Truncated { record: 2, offset }) => {
                assert_eq!(offset, bytes.len() as u64)
            }
            other => panic!("unexpected {other:?}"),
        }
        // Cut in the middle of the second vector.
        let cut = &fixture()[..fixture().len() - 5];
        assert!(matches!(
            read_word2vec_binary(cut, None),
            Err(CorpusError::Truncated { record: 1, .. })
        ));
    }

    #[test]
    fn rejects_duplicates_and_bad_dims() {
        let mut bytes = b"2 1\n".to_vec();
        for _ in 0..2 {
            bytes.extend_from_slice(b"x ");
            bytes.extend_from_slice(&1f32.to_le_bytes());
        }
        match read_word2vec_binary(&bytes[..], None) {
            Err(CorpusError::DuplicateToken(t)) => assert_eq!(t, "x"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_word2vec_binary(&b"1 0\n"[..], None),
            Err(CorpusError::InvalidDim)
        ));
        assert!(matches!(
            read_word2vec_binary(&b"1 -3\n"[..], None),
            Err(CorpusError::Header { .. })
        ));
    }

    #[test]
    fn filter_keeps_subset() {
        let keep = |t: &str| t == "dog";
        let t = read_word2vec_binary(&fixture()[..], Some(&keep)).unwrap();
        assert_eq!(t.tokens(), &["dog".to_string()]);
    }

    #[test]
    fn reads_glove_text() {
        let text = "the 0.1 0.2 0.3 0.4\nof -1 2 3.5 4e-2\n";
        let t = read_text_embeddings(text.as_bytes(), EmbeddingFormat::GloveText, None).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dim(), 4);
        assert_eq!(t.get("of").unwrap(), &[-1.0, 2.0, 3.5, 0.04]);
    }

    #[test]
    fn inconsistent_dimension_names_line() {
        let text = "a 1 2 3 4\nb 1 2 3 4\nc 1 2 3 4 5\n";
        let err = read_text_embeddings(text.as_bytes(), EmbeddingFormat::GloveText, None)
            .unwrap_err();
        assert!(matches!(err, CorpusError::InconsistentDim { line: 3, expected: 4, found: 5 }));
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn non_numeric_names_line_and_column() {
        let text = "a\t1\t2\nb\t1\tx\n";
        let err = read_text_embeddings(text.as_bytes(), EmbeddingFormat::GenericTsv, None)
            .unwrap_err();
        assert!(matches!(err, CorpusError::NonNumeric { line: 2, column: 3, .. }));
    }

    #[test]
    fn tsv_tokens_may_contain_spaces() {
        let text = "hot dog\t0.5\t0.25\n";
        let t = read_text_embeddings(text.as_bytes(), EmbeddingFormat::GenericTsv, None).unwrap();
        assert_eq!(t.get("hot dog").unwrap(), &[0.5, 0.25]);
    }

    #[test]
    fn nan_is_rejected() {
        let text = "a 1 NaN\n";
        assert!(matches!(
            read_text_embeddings(text.as_bytes(), EmbeddingFormat::GloveText, None),
            Err(CorpusError::NonFinite { .. })
        ));
    }

    fn arb_table() -> impl Strategy<Value = EmbeddingTable> {
        (1usize..6).prop_flat_map(|dim| {
            prop::collection::btree_map(
                "[a-z]{1,8}",
                prop::collection::vec(-1e6f32..1e6f32, dim),
                1..20,
            )
            .prop_map(move |m| {
                let mut t = EmbeddingTable::new(dim, EmbeddingFormat::GenericTsv).unwrap();
                for (k, v) in m {
                    t.insert(&k, &v).unwrap();
                }
                t
            })
        })
    }

    proptest! {
        #[test]
        fn every_format_round_trips(table in arb_table()) {
            let mut bin = Vec::new();
            write_word2vec_binary(&table, &mut bin).unwrap();
            let back = read_word2vec_binary(&bin[..], None).unwrap();
            prop_assert_eq!(back.tokens(), table.tokens());
            for (tok, v) in table.iter() {
                prop_assert_eq!(back.get(tok).unwrap(), v);
            }
            for format in [EmbeddingFormat::GloveText, EmbeddingFormat::GenericTsv] {
                let mut text = Vec::new();
                write_text_embeddings(&table, format, &mut text).unwrap();
                let back = read_text_embeddings(&text[..], format, None).unwrap();
                prop_assert_eq!(back.tokens(), table.tokens());
                for (tok, v) in table.iter() {
                    for (a, b) in back.get(tok).unwrap().iter().zip(v) {
                        prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
                    }
                }
            }
        }
    }
}
