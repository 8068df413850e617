//! Seeded i.i.d. matrix ensembles with mean 0 and variance 1.
//!
//! # Generator
//!
//! Draws come from ChaCha8 keyed by `master_seed` (expanded with
//! `SeedableRng::seed_from_u64`), with the 64-bit ChaCha stream id set to
//! `stream_index`. Entry `e` of a matrix (row-major, `e = i*n + j`) reads a
//! fixed block of 64-bit words starting at word `e * words_per_entry`, so
//! every entry is a function of `(kind, master_seed, stream_index, e)` only
//! and can be regenerated in any order or on any thread.
//!
//! | kind         | words | transform                                          |
//! |--------------|-------|----------------------------------------------------|
//! | `gaussian`   | 2     | Box-Muller, cosine branch                          |
//! | `rademacher` | 1     | sign of the top bit                                |
//! | `uniform`    | 1     | `√3 (2u − 1)`, `u ∈ [0, 1)` from the top 53 bits   |
//! | `student_t5` | 6     | `z₀ √(3 / Σ_{i=1..5} z_i²)` from three Box-Muller pairs |
//!
//! Box-Muller uses `u₁ ∈ (0, 1]`, `u₂ ∈ [0, 1)` built from the top 53 bits
//! of consecutive words, and evaluates `log`, `cos`, `sin` with the
//! pure-Rust `libm` port so results are bit-identical across platforms.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealVector};

/// Entry distributions with mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ensemble {
    Gaussian,
    Rademacher,
    Uniform,
    /// Student t with 5 degrees of freedom, scaled by `√(3/5)`.
    StudentT5,
}

impl Ensemble {
    pub const ALL: [Ensemble; 4] = [
        Ensemble::Gaussian,
        Ensemble::Rademacher,
        Ensemble::Uniform,
        Ensemble::StudentT5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Gaussian => "gaussian",
            Ensemble::Rademacher => "rademacher",
            Ensemble::Uniform => "uniform",
            Ensemble::StudentT5 => "student_t5",
        }
    }

    pub fn is_subgaussian(self) -> bool {
        !matches!(self, Ensemble::StudentT5)
    }

    /// `E ξ⁴`.
    pub fn fourth_moment(self) -> f64 {
        match self {
            Ensemble::Gaussian => 3.0,
            Ensemble::Rademacher => 1.0,
            Ensemble::Uniform => 9.0 / 5.0,
            // 3ν²/((ν−2)(ν−4)) = 25 at ν = 5, times (3/5)².
            Ensemble::StudentT5 => 9.0,
        }
    }

    /// Whether draws have a density; discrete ensembles can yield singular
    /// matrices with positive probability.
    pub fn is_continuous(self) -> bool {
        !matches!(self, Ensemble::Rademacher)
    }

    /// 64-bit words consumed per entry.
    pub fn words_per_entry(self) -> u64 {
        match self {
            Ensemble::Gaussian => 2,
            Ensemble::Rademacher | Ensemble::Uniform => 1,
            Ensemble::StudentT5 => 6,
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ensemble::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::InvalidQuery(format!(
                    "unknown ensemble '{s}' (expected gaussian | rademacher | uniform | student_t5)"
                ))
            })
    }
}

impl Serialize for Ensemble {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Fresh stream used for the `attempt`-th redraw after a degenerate
    /// sample. Attempt 0 is the stream itself.
    pub fn resample(self, attempt: u32) -> Self {
        Self {
            stream_index: self.stream_index ^ ((attempt as u64) << 40),
            ..self
        }
    }

    /// Places the stream in a separate domain (top byte of the index) so
    /// that different random objects of one experiment never share words.
    pub fn in_domain(self, domain: u8) -> Self {
        Self {
            stream_index: self.stream_index ^ ((domain as u64) << 56),
            ..self
        }
    }

    pub fn stream(self) -> EntryStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        EntryStream { rng }
    }
}

/// Sequential reader over one stream.
#[derive(Debug, Clone)]
pub struct EntryStream {
    rng: ChaCha8Rng,
}

impl EntryStream {
    /// Positions the stream at the first word of entry `index` of `kind`.
    pub fn seek_entry(&mut self, kind: Ensemble, index: u64) {
        // Word positions count 32-bit words.
        self.rng
            .set_word_pos(index as u128 * kind.words_per_entry() as u128 * 2);
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

fn unit_open_closed(w: u64) -> f64 {
    ((w >> 11) + 1) as f64 * TWO_POW_M53
}

fn unit_closed_open(w: u64) -> f64 {
    (w >> 11) as f64 * TWO_POW_M53
}

fn box_muller(w1: u64, w2: u64) -> (f64, f64) {
    let r = (-2.0 * libm::log(unit_open_closed(w1))).sqrt();
    let t = TAU * unit_closed_open(w2);
    (r * libm::cos(t), r * libm::sin(t))
}

/// One draw of `kind`, consuming exactly `kind.words_per_entry()` words.
pub fn sample_entry(kind: Ensemble, stream: &mut EntryStream) -> f64 {
    match kind {
        Ensemble::Gaussian => {
            let (w1, w2) = (stream.next_u64(), stream.next_u64());
            box_muller(w1, w2).0
        }
        Ensemble::Rademacher => {
            if stream.next_u64() >> 63 == 0 {
                1.0
            } else {
                -1.0
            }
        }
        Ensemble::Uniform => 3f64.sqrt() * (2.0 * unit_closed_open(stream.next_u64()) - 1.0),
        Ensemble::StudentT5 => {
            let mut z = [0.0; 6];
            for pair in z.chunks_exact_mut(2) {
                let (w1, w2) = (stream.next_u64(), stream.next_u64());
                let (a, b) = box_muller(w1, w2);
                pair[0] = a;
                pair[1] = b;
            }
            let chi2: f64 = z[1..].iter().map(|x| x * x).sum();
            z[0] * (3.0 / chi2).sqrt()
        }
    }
}

/// Entry `index` of the stream, by random access.
pub fn entry_at(kind: Ensemble, seed: SeedSpec, index: u64) -> f64 {
    let mut s = seed.stream();
    s.seek_entry(kind, index);
    sample_entry(kind, &mut s)
}

/// `len` consecutive draws from the start of the stream.
pub fn sample_values(kind: Ensemble, len: usize, seed: SeedSpec) -> Vec<f64> {
    let mut s = seed.stream();
    (0..len).map(|_| sample_entry(kind, &mut s)).collect()
}

pub fn sample_vector(kind: Ensemble, dim: usize, seed: SeedSpec) -> RealVector {
    RealVector::from_vec(sample_values(kind, dim, seed))
}

/// `n x n` matrix with i.i.d. entries; entry `(i, j)` is draw `i*n + j`.
pub fn sample_matrix(kind: Ensemble, n: usize, seed: SeedSpec) -> Result<RealMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(RealMatrix::from_raw(n, n, sample_values(kind, n * n, seed)))
}

/// `rows x cols` matrix with i.i.d. entries, for rectangular needs.
pub fn sample_rect(kind: Ensemble, rows: usize, cols: usize, seed: SeedSpec) -> RealMatrix {
    RealMatrix::from_raw(rows, cols, sample_values(kind, rows * cols, seed))
}
