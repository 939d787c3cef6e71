//! Hashed boundary features standing in for an encoder's span vector.
//!
//! Feature strings are hashed with 64-bit FNV-1a, prefixed by the little
//! endian bytes of [`HASH_SEED`], and reduced modulo the dimension. The
//! templates are: boundary unigrams at `i-1`, `i`, `j-1`, `j`; boundary
//! bigrams `(i-1, i)` and `(j-1, j)`; the span text when it has at most four
//! characters; and a length bucket.

use std::hash::Hasher;

use fnv::FnvHasher;

use crate::error::{Error, Result};

/// Default hashing dimension, 2^20.
pub const DEFAULT_DIM: usize = 1 << 20;
/// Fixed seed mixed into every feature hash.
pub const HASH_SEED: u64 = 0x5eed_c4a7_0000_0001;

/// Left-edge sentinel (a Unicode noncharacter).
const BOS: char = '\u{FDD0}';
/// Right-edge sentinel.
const EOS: char = '\u{FDD1}';

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanRepresentation {
    pub ids: Vec<u32>,
    pub dim: usize,
}

pub fn length_bucket(len: usize) -> &'static str {
    match len {
        0 => "0",
        1 => "1",
        2 => "2",
        3 => "3",
        4 => "4",
        5..=8 => "5-8",
        _ => "9+",
    }
}

fn feature_id(template: &str, text: &[char], dim: usize) -> u32 {
    let mut h = FnvHasher::default();
    h.write(&HASH_SEED.to_le_bytes());
    h.write(template.as_bytes());
    h.write(&[0x1f]);
    let mut buf = [0u8; 4];
    for c in text {
        h.write(c.encode_utf8(&mut buf).as_bytes());
    }
    (h.finish() % dim as u64) as u32
}

pub fn span_representation(chars: &[char], i: usize, j: usize, dim: usize) -> Result<SpanRepresentation> {
    let n = chars.len();
    if !(i < j && j <= n) {
        return Err(Error::Offset { i, j, n });
    }
    if dim == 0 || dim > u32::MAX as usize + 1 {
        return Err(Error::Dimension(format!("feature dimension {dim}")));
    }
    let at = |p: isize| -> char {
        if p < 0 {
            BOS
        } else if p as usize >= n {
            EOS
        } else {
            chars[p as usize]
        }
    };
    let (si, sj) = (i as isize, j as isize);
    let mut ids = Vec::with_capacity(8);
    ids.push(feature_id("u:i-1", &[at(si - 1)], dim));
    ids.push(feature_id("u:i", &[at(si)], dim));
    ids.push(feature_id("u:j-1", &[at(sj - 1)], dim));
    ids.push(feature_id("u:j", &[at(sj)], dim));
    ids.push(feature_id("b:i", &[at(si - 1), at(si)], dim));
    ids.push(feature_id("b:j", &[at(sj - 1), at(sj)], dim));
    if j - i <= 4 {
        ids.push(feature_id("span", &chars[i..j], dim));
    }
    ids.push(feature_id(&format!("len:{}", length_bucket(j - i)), &[], dim));
    Ok(SpanRepresentation { ids, dim })
}
