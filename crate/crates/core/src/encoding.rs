//! Positional encoding of raw inputs with sin/cos pairs at doubling
//! frequencies.
//!
//! For an input `x` of `d` scalars and level `L`, every scalar `xᵢ` expands to
//!
//! ```text
//! [xᵢ, sin(2⁰πxᵢ), cos(2⁰πxᵢ), …, sin(2^{L−1}πxᵢ), cos(2^{L−1}πxᵢ)]
//! ```
//!
//! and the groups are concatenated for `i = 1..d`, so the output has
//! `d·(1+2L)` entries. This per-scalar grouped layout is part of the model
//! file contract. Inputs are used as given (radians for joint angles), with
//! no rescaling.

use std::f64::consts::PI;
use std::fmt;

use ndarray::{Array2, ArrayView2, Axis};
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};

/// Name of the layout recorded in model files.
pub const LAYOUT: &str = "per-scalar-grouped";

/// Number of sin/cos pairs per input scalar, `0 ≤ L ≤ 32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct EncodingLevel(u8);

impl EncodingLevel {
    pub const MAX: u8 = 32;
    pub const RAW: EncodingLevel = EncodingLevel(0);

    pub fn new(level: u32) -> Result<Self> {
        if level > Self::MAX as u32 {
            return Err(Error::InvalidArgument(format!(
                "encoding level {level} exceeds {}",
                Self::MAX
            )));
        }
        Ok(Self(level as u8))
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EncodingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L={}", self.0)
    }
}

/// `d·(1+2L)`.
pub fn encoded_length(d: usize, level: EncodingLevel) -> usize {
    d * (1 + 2 * level.get())
}

/// An encoded input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedVector(pub Vec<f64>);

impl EncodedVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Writes the encoding of `x` into `out` (length `encoded_length`).
///
/// The trig functions are evaluated in `f64` regardless of `T`.
pub fn encode_into<T: Float>(x: &[f64], level: EncodingLevel, out: &mut [T]) {
    let group = 1 + 2 * level.get();
    assert_eq!(out.len(), x.len() * group, "output length");
    for (xi, chunk) in x.iter().zip(out.chunks_exact_mut(group)) {
        chunk[0] = T::from(*xi).unwrap();
        let base = PI * xi;
        let mut freq = 1.0;
        for pair in chunk[1..].chunks_exact_mut(2) {
            let (s, c) = (freq * base).sin_cos();
            pair[0] = T::from(s).unwrap();
            pair[1] = T::from(c).unwrap();
            freq *= 2.0;
        }
    }
}

pub fn encode(x: &[f64], level: EncodingLevel) -> EncodedVector {
    let mut out = vec![0.0; encoded_length(x.len(), level)];
    encode_into(x, level, &mut out);
    EncodedVector(out)
}

/// Row-wise [`encode`]; an `m×d` batch becomes `m×d(1+2L)`.
pub fn encode_batch<T: Float>(xs: ArrayView2<'_, f64>, level: EncodingLevel) -> Array2<T> {
    let (m, d) = xs.dim();
    let mut out = Array2::from_elem((m, encoded_length(d, level)), T::zero());
    let mut row_buf = Vec::with_capacity(d);
    for (row, mut dst) in xs.outer_iter().zip(out.axis_iter_mut(Axis(0))) {
        row_buf.clear();
        row_buf.extend(row.iter().copied());
        let dst = dst.as_slice_mut().expect("fresh array rows are contiguous");
        encode_into(&row_buf, level, dst);
    }
    out
}
