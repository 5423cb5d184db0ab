//! Canonical model encodings for voting and tie-breaking.

use std::fmt;

/// Canonical byte encoding of a trained model.
///
/// Equality is bitwise and ordering is lexicographic on the bytes, which
/// gives every model space a total order usable for deterministic
/// tie-breaking. Encodings of numerically equal models are identical.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelKey(Vec<u8>);

impl ModelKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(2 * self.0.len());
        for byte in &self.0 {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

impl fmt::Debug for ModelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelKey({})", self.to_hex())
    }
}

impl fmt::Display for ModelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Order-preserving encoding of an `f64`: byte-lexicographic order of the
/// output matches numeric order of the input. `-0.0` is canonicalized to
/// `+0.0` so equal values always encode identically.
pub fn encode_f64(value: f64) -> [u8; 8] {
    let value = if value == 0.0 { 0.0 } else { value };
    let bits = value.to_bits();
    let flipped = if bits & (1 << 63) != 0 {
        !bits
    } else {
        bits ^ (1 << 63)
    };
    flipped.to_be_bytes()
}

/// A model that can be voted on: anything with a canonical key.
pub trait VoteModel: Clone + Send + Sync {
    fn key(&self) -> ModelKey;
}

impl VoteModel for u8 {
    fn key(&self) -> ModelKey {
        ModelKey::from_bytes(vec![*self])
    }
}

impl VoteModel for f64 {
    fn key(&self) -> ModelKey {
        ModelKey::from_bytes(encode_f64(*self).to_vec())
    }
}

/// Discrete coordinate vectors (subset indicators, permutations).
impl VoteModel for Vec<u8> {
    fn key(&self) -> ModelKey {
        ModelKey::from_bytes(self.clone())
    }
}

/// Continuous coordinate vectors (e.g. simplex points).
impl VoteModel for Vec<f64> {
    fn key(&self) -> ModelKey {
        let mut bytes = Vec::with_capacity(8 * self.len());
        for v in self {
            bytes.extend_from_slice(&encode_f64(*v));
        }
        ModelKey::from_bytes(bytes)
    }
}
