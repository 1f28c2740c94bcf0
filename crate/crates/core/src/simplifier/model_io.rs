//! MLP1 model files.
//!
//! ```text
//! "MLP1" | version u32 LE (=1) | dim u32 LE | hidden u32 LE
//! then f32 LE parameters: W1 (hidden×dim, row-major), b1, W2 (dim×hidden, row-major), b2
//! ```
//!
//! The activation is not stored; files load as ReLU unless
//! [`load_model_with`] is given another one.

use std::fs;
use std::path::Path;

use super::mlp::{param_count, Activation, MlpModel};
use super::SimplifierError;

pub const MLP_MAGIC: &[u8; 4] = b"MLP1";
pub const MLP_VERSION: u32 = 1;
pub const MLP_HEADER_LEN: usize = 16;

pub fn encode_mlp1(model: &MlpModel) -> Vec<u8> {
    let mut buf = Vec::with_capacity(MLP_HEADER_LEN + 4 * model.param_count());
    buf.extend_from_slice(MLP_MAGIC);
    buf.extend_from_slice(&MLP_VERSION.to_le_bytes());
    buf.extend_from_slice(&(model.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(model.hidden() as u32).to_le_bytes());
    for v in model.params.iter() {
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    buf
}

pub fn decode_mlp1(bytes: &[u8], activation: Activation) -> Result<MlpModel, SimplifierError> {
    if bytes.len() < 4 || &bytes[..4] != MLP_MAGIC {
        return Err(SimplifierError::BadMagic);
    }
    if bytes.len() < MLP_HEADER_LEN {
        return Err(SimplifierError::TruncatedFile {
            expected: MLP_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != MLP_VERSION {
        return Err(SimplifierError::BadVersion(version));
    }
    let (dim, hidden) = (word(8) as usize, word(12) as usize);
    if dim == 0 || hidden == 0 {
        return Err(SimplifierError::InvalidConfig(
            "dim and hidden must be positive".into(),
        ));
    }
    let expected = MLP_HEADER_LEN + 4 * param_count(dim, hidden);
    if bytes.len() != expected {
        return Err(SimplifierError::TruncatedFile {
            expected,
            actual: bytes.len(),
        });
    }
    let mut values = bytes[MLP_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    let mut model = MlpModel::zeros(dim, hidden);
    model.activation = activation;
    for s in model.params.slices_mut() {
        for v in s.iter_mut() {
            *v = values.next().expect("length checked");
        }
    }
    if model.params.iter().any(|v| !v.is_finite()) {
        return Err(SimplifierError::NonFinite);
    }
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<(), SimplifierError> {
    fs::write(path, encode_mlp1(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MlpModel, SimplifierError> {
    load_model_with(path, Activation::Relu)
}

pub fn load_model_with(path: &Path, activation: Activation) -> Result<MlpModel, SimplifierError> {
    decode_mlp1(&fs::read(path)?, activation)
}
