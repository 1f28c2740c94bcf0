//! Embedding matrices and the EMB1 interchange format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "EMB1"
//! 4       4     version (u32 LE, = 1)
//! 8       4     row_count (u32 LE)
//! 12      4     dim (u32 LE)
//! 16      4·row_count·dim   f32 LE payload, row-major
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::corpus::Lang;

pub const EMB_MAGIC: &[u8; 4] = b"EMB1";
pub const EMB_VERSION: u32 = 1;
pub const EMB_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("embedding matrix has no rows")]
    EmptyMatrix,
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u32),
    #[error("file truncated: header declares {expected} bytes, found {actual}")]
    TruncatedFile { expected: usize, actual: usize },
    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("row count mismatch: {0} vs {1}")]
    RowMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, EmbeddingError>;

/// A single fixed-length vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(pub Vec<f32>);

impl Embedding {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    }
}

/// Row-major matrix of embeddings sharing one dimension and language.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f32>,
    rows: usize,
    dim: usize,
    lang: Lang,
}

impl EmbeddingMatrix {
    /// Wraps a row-major buffer. Rejects zero dims, ragged sizes and non-finite values.
    pub fn from_flat(data: Vec<f32>, dim: usize, lang: Lang) -> Result<Self> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(EmbeddingError::DimMismatch {
                expected: dim,
                actual: data.len() % dim,
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFiniteValue {
                row: i / dim,
                column: i % dim,
            });
        }
        Ok(Self {
            rows: data.len() / dim,
            data,
            dim,
            lang,
        })
    }

    pub fn from_rows(rows: &[Embedding], dim: usize, lang: Lang) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.dim() != dim {
                return Err(EmbeddingError::DimMismatch {
                    expected: dim,
                    actual: r.dim(),
                });
            }
            data.extend_from_slice(&r.0);
        }
        Self::from_flat(data, dim, lang)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lang(&self) -> &Lang {
        &self.lang
    }

    pub fn with_lang(mut self, lang: Lang) -> Self {
        self.lang = lang;
        self
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    /// Rows picked by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            data,
            rows: idx.len(),
            dim: self.dim,
            lang: self.lang.clone(),
        }
    }

    /// Appends the rows of `other` below `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(EmbeddingError::DimMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            data,
            rows: self.rows + other.rows,
            dim: self.dim,
            lang: self.lang.clone(),
        })
    }
}

pub fn encode_emb1(m: &EmbeddingMatrix) -> Result<Vec<u8>> {
    if m.rows == 0 {
        return Err(EmbeddingError::EmptyMatrix);
    }
    let mut buf = Vec::with_capacity(EMB_HEADER_LEN + 4 * m.data.len());
    buf.extend_from_slice(EMB_MAGIC);
    buf.extend_from_slice(&EMB_VERSION.to_le_bytes());
    buf.extend_from_slice(&(m.rows as u32).to_le_bytes());
    buf.extend_from_slice(&(m.dim as u32).to_le_bytes());
    for v in &m.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

fn u32_at(bytes: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap())
}

/// Parses EMB1 bytes. The matrix language is [`Lang::undetermined`]; the
/// format does not carry one.
pub fn decode_emb1(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    if bytes.len() < 4 || &bytes[..4] != EMB_MAGIC {
        return Err(EmbeddingError::BadMagic);
    }
    if bytes.len() < EMB_HEADER_LEN {
        return Err(EmbeddingError::TruncatedFile {
            expected: EMB_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let version = u32_at(bytes, 4);
    if version != EMB_VERSION {
        return Err(EmbeddingError::BadVersion(version));
    }
    let rows = u32_at(bytes, 8) as usize;
    let dim = u32_at(bytes, 12) as usize;
    if rows == 0 {
        return Err(EmbeddingError::EmptyMatrix);
    }
    if dim == 0 {
        return Err(EmbeddingError::ZeroDim);
    }
    let expected = EMB_HEADER_LEN + 4 * rows * dim;
    if bytes.len() != expected {
        return Err(EmbeddingError::TruncatedFile {
            expected,
            actual: bytes.len(),
        });
    }
    let data = bytes[EMB_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EmbeddingMatrix::from_flat(data, dim, Lang::undetermined())
}

pub fn write_embeddings(m: &EmbeddingMatrix, path: &Path) -> Result<()> {
    fs::write(path, encode_emb1(m)?)?;
    Ok(())
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    decode_emb1(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn und() -> Lang {
        Lang::undetermined()
    }

    #[test]
    fn one_row_layout() {
        let m = EmbeddingMatrix::from_flat(vec![1.0, 2.0], 2, und()).unwrap();
        let b = encode_emb1(&m).unwrap();
        assert_eq!(b.len(), 24);
        assert_eq!(&b[..4], b"EMB1");
        assert_eq!(&b[4..16], &[1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&b[16..20], &1.0f32.to_le_bytes());
    }

    #[test]
    fn empty_matrix_rejected() {
        let m = EmbeddingMatrix::from_flat(vec![], 4, und()).unwrap();
        assert!(matches!(encode_emb1(&m), Err(EmbeddingError::EmptyMatrix)));
    }

    #[test]
    fn large_payload_size() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("big.emb");
        let m = EmbeddingMatrix::from_flat(vec![0.5; 2000 * 1024], 1024, und()).unwrap();
        write_embeddings(&m, &p).unwrap();
        assert_eq!(
            fs::metadata(&p).unwrap().len() as usize,
            16 + 2000 * 1024 * 4
        );
        assert_eq!(read_embeddings(&p).unwrap(), m);
    }

    #[test]
    fn bad_magic_and_version() {
        assert!(matches!(
            decode_emb1(b"XXXX\x01\0\0\0"),
            Err(EmbeddingError::BadMagic)
        ));
        let m = EmbeddingMatrix::from_flat(vec![1.0], 1, und()).unwrap();
        let mut b = encode_emb1(&m).unwrap();
        b[4] = 2;
        assert!(matches!(
            decode_emb1(&b),
            Err(EmbeddingError::BadVersion(2))
        ));
    }

    #[test]
    fn nan_payload_rejected() {
        let m = EmbeddingMatrix::from_flat(vec![1.0, 2.0, 3.0, 4.0], 2, und()).unwrap();
        let mut b = encode_emb1(&m).unwrap();
        b[16 + 12..16 + 16].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_emb1(&b),
            Err(EmbeddingError::NonFiniteValue { row: 1, column: 1 })
        ));
    }

    #[test]
    fn size_mismatch_is_truncation() {
        let m = EmbeddingMatrix::from_flat(vec![1.0, 2.0, 3.0, 4.0], 2, und()).unwrap();
        let b = encode_emb1(&m).unwrap();
        assert!(matches!(
            decode_emb1(&b[..b.len() - 1]),
            Err(EmbeddingError::TruncatedFile { .. })
        ));
        let mut longer = b.clone();
        longer.push(0);
        assert!(matches!(
            decode_emb1(&longer),
            Err(EmbeddingError::TruncatedFile { .. })
        ));
        assert!(matches!(
            decode_emb1(&b[..10]),
            Err(EmbeddingError::TruncatedFile { .. })
        ));
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(rows in 1usize..6, dim in 1usize..9, seed in any::<u64>()) {
            let mut rng = crate::rng::DetRng::new(seed);
            let data: Vec<f32> = (0..rows * dim).map(|_| rng.symmetric(1e3) as f32).collect();
            let m = EmbeddingMatrix::from_flat(data, dim, und()).unwrap();
            let b = encode_emb1(&m).unwrap();
            prop_assert_eq!(&decode_emb1(&b).unwrap(), &m);
            prop_assert_eq!(encode_emb1(&decode_emb1(&b).unwrap()).unwrap(), b);
        }
    }
}
