//! Exhaustive enumeration of generalized loops on a Tanner graph.
//!
//! A generalized loop is a nonempty edge subset in which every touched bit and
//! check has loop degree at least 2. Components need not be connected.

use serde::{Deserialize, Serialize};

use crate::code::ParityCheckCode;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneralizedLoop {
    /// Sorted edge ids.
    pub edges: Vec<usize>,
    /// `(bit, loop degree)`, sorted by bit.
    pub bits: Vec<(usize, usize)>,
    /// `(check, loop degree)`, sorted by check.
    pub checks: Vec<(usize, usize)>,
}

impl GeneralizedLoop {
    /// Builds a loop from edges without any degree requirement.
    pub fn from_edges_unchecked(code: &ParityCheckCode, edges: &[usize]) -> Self {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        let mut bits = std::collections::BTreeMap::new();
        let mut checks = std::collections::BTreeMap::new();
        for &e in &edges {
            *bits.entry(code.edge_bit(e)).or_insert(0) += 1;
            *checks.entry(code.edge_check(e)).or_insert(0) += 1;
        }
        GeneralizedLoop {
            edges,
            bits: bits.into_iter().collect(),
            checks: checks.into_iter().collect(),
        }
    }

    /// Builds a loop and checks that every touched vertex has degree >= 2.
    pub fn from_edges(code: &ParityCheckCode, edges: &[usize]) -> Result<Self> {
        if let Some(&e) = edges.iter().find(|&&e| e >= code.n_edges()) {
            return Err(Error::InvalidArgument(format!("edge {e} out of range")));
        }
        let l = Self::from_edges_unchecked(code, edges);
        if l.edges.is_empty() {
            return Err(Error::InvalidArgument("empty loop".into()));
        }
        if l.bits.iter().chain(&l.checks).any(|&(_, q)| q < 2) {
            return Err(Error::InvalidArgument("loop has a vertex of degree 1".into()));
        }
        Ok(l)
    }

    pub fn bit_degree(&self, bit: usize) -> usize {
        self.bits
            .binary_search_by_key(&bit, |&(b, _)| b)
            .map(|k| self.bits[k].1)
            .unwrap_or(0)
    }

    pub fn contains_bit(&self, bit: usize) -> bool {
        self.bit_degree(bit) > 0
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Connected and every vertex of degree exactly 2.
    pub fn is_simple_cycle(&self, code: &ParityCheckCode) -> bool {
        if self.edges.is_empty() || self.bits.iter().chain(&self.checks).any(|&(_, q)| q != 2) {
            return false;
        }
        // A 2-regular graph is a single cycle iff it is connected.
        let mut seen = vec![false; self.edges.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            let (b, c) = (code.edge_bit(self.edges[k]), code.edge_check(self.edges[k]));
            for (j, &f) in self.edges.iter().enumerate() {
                if !seen[j] && (code.edge_bit(f) == b || code.edge_check(f) == c) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Limits on exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopBudget {
    /// Loops with more edges are skipped.
    pub max_edges: usize,
    /// Enumeration fails once more loops than this are found.
    pub max_loops: usize,
}

impl Default for LoopBudget {
    fn default() -> Self {
        LoopBudget {
            max_edges: usize::MAX,
            max_loops: 1_000_000,
        }
    }
}

struct Search<'a> {
    code: &'a ParityCheckCode,
    budget: LoopBudget,
    /// Vertices: bits `0..n`, checks `n..n+m`.
    order: Vec<usize>,
    position: Vec<usize>,
    root: Option<usize>,
    chosen: Vec<bool>,
    degree: Vec<usize>,
    n_chosen: usize,
    out: Vec<GeneralizedLoop>,
}

impl Search<'_> {
    fn incident(&self, v: usize) -> Vec<(usize, usize)> {
        let n = self.code.n_bits();
        if v < n {
            self.code
                .bit_edges(v)
                .iter()
                .map(|&e| (e, n + self.code.edge_check(e)))
                .collect()
        } else {
            self.code
                .check_edges(v - n)
                .map(|e| (e, self.code.edge_bit(e)))
                .collect()
        }
    }

    fn allowed(&self, v: usize, d: usize) -> bool {
        if Some(v) == self.root {
            d >= 1
        } else {
            d != 1
        }
    }

    fn visit(&mut self, k: usize) -> Result<()> {
        if k == self.order.len() {
            if self.n_chosen > 0 {
                if self.out.len() >= self.budget.max_loops {
                    return Err(Error::LoopBudgetExceeded(self.budget.max_loops));
                }
                let edges: Vec<usize> = (0..self.chosen.len()).filter(|&e| self.chosen[e]).collect();
                self.out.push(GeneralizedLoop::from_edges_unchecked(self.code, &edges));
            }
            return Ok(());
        }
        let v = self.order[k];
        let undecided: Vec<(usize, usize)> = self
            .incident(v)
            .into_iter()
            .filter(|&(_, w)| self.position[w] > k)
            .collect();
        let base = self.degree[v];
        for subset in 0u64..(1u64 << undecided.len()) {
            let add = subset.count_ones() as usize;
            if !self.allowed(v, base + add) || self.n_chosen + add > self.budget.max_edges {
                continue;
            }
            for (t, &(e, w)) in undecided.iter().enumerate() {
                if (subset >> t) & 1 == 1 {
                    self.chosen[e] = true;
                    self.degree[w] += 1;
                }
            }
            self.degree[v] += add;
            self.n_chosen += add;
            let r = self.visit(k + 1);
            self.degree[v] -= add;
            self.n_chosen -= add;
            for (t, &(e, w)) in undecided.iter().enumerate() {
                if (subset >> t) & 1 == 1 {
                    self.chosen[e] = false;
                    self.degree[w] -= 1;
                }
            }
            r?;
        }
        Ok(())
    }
}

fn run(code: &ParityCheckCode, budget: LoopBudget, root: Option<usize>) -> Result<Vec<GeneralizedLoop>> {
    let n = code.n_bits();
    let total = n + code.n_checks();
    // Breadth-first order keeps the undecided frontier small.
    let mut order = Vec::with_capacity(total);
    let mut position = vec![usize::MAX; total];
    let start = root.unwrap_or(0);
    for s in std::iter::once(start).chain(0..total) {
        if position[s] != usize::MAX {
            continue;
        }
        position[s] = order.len();
        order.push(s);
        let mut head = order.len() - 1;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let nbrs: Vec<usize> = if v < n {
                code.bit_neighbors(v).iter().map(|&a| n + a).collect()
            } else {
                code.check_neighbors(v - n).to_vec()
            };
            for w in nbrs {
                if position[w] == usize::MAX {
                    position[w] = order.len();
                    order.push(w);
                }
            }
        }
    }
    let mut s = Search {
        code,
        budget,
        order,
        position,
        root,
        chosen: vec![false; code.n_edges()],
        degree: vec![0; total],
        n_chosen: 0,
        out: Vec::new(),
    };
    s.visit(0)?;
    let mut out = s.out;
    out.sort_by(|a, b| a.edges.len().cmp(&b.edges.len()).then_with(|| a.edges.cmp(&b.edges)));
    Ok(out)
}

/// All generalized loops with at most `budget.max_edges` edges.
pub fn enumerate_generalized_loops(code: &ParityCheckCode, budget: LoopBudget) -> Result<Vec<GeneralizedLoop>> {
    run(code, budget, None)
}

/// Edge subsets in which `root` has degree >= 1 and every other touched
/// vertex has degree >= 2. These index the loop corrections to the
/// magnetization of `root`.
pub fn enumerate_extended_loops(
    code: &ParityCheckCode,
    root: usize,
    budget: LoopBudget,
) -> Result<Vec<GeneralizedLoop>> {
    if root >= code.n_bits() {
        return Err(Error::InvalidArgument(format!("bit {root} out of range")));
    }
    run(code, budget, Some(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgraphs;

    #[test]
    fn k4_has_fourteen_loops() {
        let code = testgraphs::k4_cycle_code();
        let loops = enumerate_generalized_loops(&code, LoopBudget::default()).unwrap();
        assert_eq!(loops.len(), 14);
        let simple = loops.iter().filter(|l| l.is_simple_cycle(&code)).count();
        assert_eq!(simple, 7);
    }

    #[test]
    fn trees_have_no_loops() {
        for g in testgraphs::tree_suite() {
            assert!(enumerate_generalized_loops(&g.code, LoopBudget::default()).unwrap().is_empty());
        }
    }

    #[test]
    fn theta_graph_has_four() {
        let code = testgraphs::fused_cycles();
        assert_eq!(enumerate_generalized_loops(&code, LoopBudget::default()).unwrap().len(), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let code = testgraphs::k4_cycle_code();
        assert!(matches!(
            enumerate_generalized_loops(&code, LoopBudget { max_edges: usize::MAX, max_loops: 5 }),
            Err(Error::LoopBudgetExceeded(5))
        ));
        let short = enumerate_generalized_loops(&code, LoopBudget { max_edges: 6, max_loops: 100 }).unwrap();
        assert_eq!(short.len(), 4);
    }

    #[test]
    fn extended_loops_contain_root() {
        let code = testgraphs::single_cycle();
        let ext = enumerate_extended_loops(&code, 3, LoopBudget::default()).unwrap();
        assert!(!ext.is_empty());
        assert!(ext.iter().all(|l| l.contains_bit(3)));
    }

    #[test]
    fn from_edges_rejects_dangling() {
        let code = testgraphs::single_cycle();
        assert!(GeneralizedLoop::from_edges(&code, &[0]).is_err());
    }
}
