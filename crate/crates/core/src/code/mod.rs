//! Binary linear codes as Tanner graphs.

mod alist;
mod tanner;

use std::collections::VecDeque;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

pub use alist::{emit_alist, parse_alist};
pub use tanner::{build_tanner_155, low_weight_codeword_search, LowWeightSearch};

/// Largest code dimension [`enumerate_codewords`] accepts.
pub const MAX_ENUMERATION_DIMENSION: usize = 24;

/// Sparse parity-check code with a fixed, check-major edge numbering.
///
/// Edges of check `a` occupy the contiguous id range `check_edges(a)`, in the
/// order of `check_neighbors(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheckCode {
    n_bits: usize,
    check_neighbors: Vec<Vec<usize>>,
    bit_neighbors: Vec<Vec<usize>>,
    check_edge_start: Vec<usize>,
    edge_bit: Vec<usize>,
    edge_check: Vec<usize>,
    bit_edges: Vec<Vec<usize>>,
}

impl ParityCheckCode {
    /// Builds a code from per-check bit lists (0-based).
    ///
    /// Checks must be non-empty and must not repeat a bit. Bits of degree zero
    /// are allowed; they describe unconstrained bits.
    pub fn from_checks(n_bits: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut bit_neighbors = vec![Vec::new(); n_bits];
        let mut check_edge_start = Vec::with_capacity(checks.len() + 1);
        let mut edge_bit = Vec::new();
        let mut edge_check = Vec::new();
        let mut bit_edges = vec![Vec::new(); n_bits];
        for (a, bits) in checks.iter().enumerate() {
            if bits.is_empty() {
                return Err(Error::InvalidCode(format!("check {a} is empty")));
            }
            check_edge_start.push(edge_bit.len());
            for (k, &i) in bits.iter().enumerate() {
                if i >= n_bits {
                    return Err(Error::InvalidCode(format!(
                        "check {a} references bit {i}, but the code has {n_bits} bits"
                    )));
                }
                if bits[..k].contains(&i) {
                    return Err(Error::InvalidCode(format!("check {a} repeats bit {i}")));
                }
                bit_neighbors[i].push(a);
                bit_edges[i].push(edge_bit.len());
                edge_bit.push(i);
                edge_check.push(a);
            }
        }
        check_edge_start.push(edge_bit.len());
        Ok(ParityCheckCode {
            n_bits,
            check_neighbors: checks,
            bit_neighbors,
            check_edge_start,
            edge_bit,
            edge_check,
            bit_edges,
        })
    }

    /// Builds a code from a dense 0/1 parity-check matrix given row by row.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        let checks = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: r.len(),
                    });
                }
                Ok(r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(i, _)| i)
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_checks(n, checks)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_checks(&self) -> usize {
        self.check_neighbors.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_bit.len()
    }

    pub fn check_neighbors(&self, check: usize) -> &[usize] {
        &self.check_neighbors[check]
    }

    pub fn bit_neighbors(&self, bit: usize) -> &[usize] {
        &self.bit_neighbors[bit]
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.check_neighbors
    }

    pub fn check_edges(&self, check: usize) -> Range<usize> {
        self.check_edge_start[check]..self.check_edge_start[check + 1]
    }

    /// Edge ids incident to `bit`, ordered like `bit_neighbors(bit)`.
    pub fn bit_edges(&self, bit: usize) -> &[usize] {
        &self.bit_edges[bit]
    }

    pub fn edge_bit(&self, edge: usize) -> usize {
        self.edge_bit[edge]
    }

    pub fn edge_check(&self, edge: usize) -> usize {
        self.edge_check[edge]
    }

    pub fn edge_id(&self, bit: usize, check: usize) -> Option<usize> {
        self.check_edges(check).find(|&e| self.edge_bit[e] == bit)
    }

    pub fn bit_degree(&self, bit: usize) -> usize {
        self.bit_neighbors[bit].len()
    }

    pub fn check_degree(&self, check: usize) -> usize {
        self.check_neighbors[check].len()
    }

    pub fn to_bit_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n_checks(), self.n_bits);
        for (a, bits) in self.check_neighbors.iter().enumerate() {
            for &i in bits {
                m.set(a, i, true);
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        self.to_bit_matrix().rank()
    }

    pub fn dimension(&self) -> usize {
        self.n_bits - self.rank()
    }

    /// Length of the shortest cycle in the Tanner graph (bits and checks both
    /// counted), or `None` for a forest.
    pub fn girth(&self) -> Option<usize> {
        // Vertices: bits 0..n, checks n..n+m.
        let n = self.n_bits;
        let nv = n + self.n_checks();
        let neighbors = |v: usize| -> Vec<usize> {
            if v < n {
                self.bit_neighbors[v].iter().map(|&a| n + a).collect()
            } else {
                self.check_neighbors[v - n].clone()
            }
        };
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; nv];
        let mut parent = vec![usize::MAX; nv];
        for s in 0..nv {
            dist.fill(usize::MAX);
            dist[s] = 0;
            parent[s] = usize::MAX;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                if best.is_some_and(|b| 2 * dist[v] + 1 >= b) {
                    break;
                }
                for w in neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        let len = dist[v] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// Per-check spin products `prod_{i in a} s_i`.
    pub fn syndrome(&self, spins: &[i8]) -> Result<Vec<i8>> {
        if spins.len() != self.n_bits {
            return Err(Error::LengthMismatch {
                expected: self.n_bits,
                got: spins.len(),
            });
        }
        Ok(self
            .check_neighbors
            .iter()
            .map(|bits| bits.iter().map(|&i| spins[i]).product())
            .collect())
    }

    /// True when every check is satisfied by the bit-domain word.
    pub fn is_codeword_bits(&self, bits: &[u8]) -> bool {
        bits.len() == self.n_bits
            && self
                .check_neighbors
                .iter()
                .all(|c| c.iter().map(|&i| bits[i] as u32).sum::<u32>() % 2 == 0)
    }

    pub fn descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            n: self.n_bits,
            m: self.n_checks(),
            checks: self.check_neighbors.clone(),
            bits: self.bit_neighbors.clone(),
        }
    }
}

/// JSON mirror of a code: sizes plus 0-based neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub n: usize,
    pub m: usize,
    pub checks: Vec<Vec<usize>>,
    pub bits: Vec<Vec<usize>>,
}

impl CodeDescriptor {
    pub fn to_code(&self) -> Result<ParityCheckCode> {
        if self.checks.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                got: self.checks.len(),
            });
        }
        let code = ParityCheckCode::from_checks(self.n, self.checks.clone())?;
        if !self.bits.is_empty() && code.bit_neighbors != self.bits {
            return Err(Error::InvalidCode(
                "bit neighbor lists disagree with check neighbor lists".into(),
            ));
        }
        Ok(code)
    }
}

/// A codeword, stored in the bit domain (`spin = 1 - 2 * bit`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Codeword {
    pub bits: Vec<u8>,
}

impl Codeword {
    pub fn zero(n: usize) -> Self {
        Codeword { bits: vec![0; n] }
    }

    pub fn from_spins(spins: &[i8]) -> Self {
        Codeword {
            bits: spins.iter().map(|&s| u8::from(s < 0)).collect(),
        }
    }

    pub fn spins(&self) -> Vec<i8> {
        self.bits.iter().map(|&b| 1 - 2 * b as i8).collect()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// All `2^K` codewords of a code with dimension `K <= 24`.
///
/// Order: binary counting over the null-space basis from GF(2) elimination,
/// starting from the zero word.
pub fn enumerate_codewords(code: &ParityCheckCode) -> Result<Vec<Codeword>> {
    let basis = code.to_bit_matrix().nullspace();
    let k = basis.len();
    if k > MAX_ENUMERATION_DIMENSION {
        return Err(Error::DimensionTooLarge {
            dim: k,
            limit: MAX_ENUMERATION_DIMENSION,
        });
    }
    let words = basis.first().map_or(1, Vec::len);
    let n = code.n_bits();
    let mut out = Vec::with_capacity(1 << k);
    let mut acc = vec![0u64; words];
    for idx in 0u64..(1u64 << k) {
        acc.fill(0);
        for (j, v) in basis.iter().enumerate() {
            if (idx >> j) & 1 == 1 {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a ^= b;
                }
            }
        }
        out.push(Codeword {
            bits: (0..n).map(|i| ((acc[i / 64] >> (i % 64)) & 1) as u8).collect(),
        });
    }
    debug_assert!(out.iter().all(|c| code.is_codeword_bits(&c.bits)));
    Ok(out)
}
