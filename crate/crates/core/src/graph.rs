//! Directed interference graphs.
//!
//! An edge `(j, i)` means unit `j`'s treatment can affect unit `i`'s outcome,
//! so `j` belongs to the in-neighborhood `N_i`. Self-loops `(i, i)` make a
//! unit's own treatment part of its neighborhood.

use std::path::Path;

use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Immutable directed graph stored as in- and out-adjacency in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalGraph {
    n: usize,
    self_loops: bool,
    in_offsets: Vec<usize>,
    in_nbrs: Vec<usize>,
    out_offsets: Vec<usize>,
    out_nbrs: Vec<usize>,
    d_in: usize,
    d_out: usize,
}

impl CausalGraph {
    /// Builds a graph from `(src, dst)` edges.
    ///
    /// When `self_loops` is true every `(i, i)` edge is added if missing.
    /// Duplicate edges are collapsed.
    pub fn from_edges(n: usize, self_loops: bool, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(src, dst) in edges {
            for idx in [src, dst] {
                if idx >= n {
                    return Err(Error::NodeOutOfRange { index: idx, n });
                }
            }
            lists[dst].push(src);
        }
        if self_loops {
            for (i, list) in lists.iter_mut().enumerate() {
                list.push(i);
            }
        }
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted_lists(n, self_loops, lists))
    }

    fn from_sorted_lists(n: usize, self_loops: bool, lists: Vec<Vec<usize>>) -> Self {
        let mut in_offsets = Vec::with_capacity(n + 1);
        in_offsets.push(0);
        let mut in_nbrs = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        let mut out_counts = vec![0usize; n];
        for list in &lists {
            for &j in list {
                out_counts[j] += 1;
            }
            in_nbrs.extend_from_slice(list);
            in_offsets.push(in_nbrs.len());
        }
        let mut out_offsets = Vec::with_capacity(n + 1);
        out_offsets.push(0);
        for c in &out_counts {
            out_offsets.push(out_offsets.last().unwrap() + c);
        }
        let mut fill = out_offsets[..n].to_vec();
        let mut out_nbrs = vec![0usize; in_nbrs.len()];
        // visiting destinations in increasing order keeps out-lists sorted
        for (i, list) in lists.iter().enumerate() {
            for &j in list {
                out_nbrs[fill[j]] = i;
                fill[j] += 1;
            }
        }
        let d_in = lists.iter().map(Vec::len).max().unwrap_or(0);
        let d_out = out_counts.iter().copied().max().unwrap_or(0);
        CausalGraph {
            n,
            self_loops,
            in_offsets,
            in_nbrs,
            out_offsets,
            out_nbrs,
            d_in,
            d_out,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_self_loops(&self) -> bool {
        self.self_loops
    }

    /// Maximum in-degree (largest `|N_i|`).
    pub fn d_in(&self) -> usize {
        self.d_in
    }

    /// Maximum out-degree.
    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_max(&self) -> usize {
        self.d_in.max(self.d_out)
    }

    pub fn edge_count(&self) -> usize {
        self.in_nbrs.len()
    }

    /// `N_i` in ascending order; errors on an out-of-range index.
    pub fn in_neighborhood(&self, i: usize) -> Result<&[usize]> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { index: i, n: self.n });
        }
        Ok(self.neighbors(i))
    }

    /// `N_i` without the range check. Panics if `i >= n`.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.in_nbrs[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    /// Units whose neighborhood contains `j`, ascending.
    #[inline]
    pub fn out_neighbors(&self, j: usize) -> &[usize] {
        &self.out_nbrs[self.out_offsets[j]..self.out_offsets[j + 1]]
    }

    #[inline]
    pub fn in_degree(&self, i: usize) -> usize {
        self.in_offsets[i + 1] - self.in_offsets[i]
    }

    #[inline]
    pub fn out_degree(&self, j: usize) -> usize {
        self.out_offsets[j + 1] - self.out_offsets[j]
    }

    pub fn contains_edge(&self, src: usize, dst: usize) -> bool {
        dst < self.n && self.neighbors(dst).binary_search(&src).is_ok()
    }

    pub fn mean_in_degree(&self) -> f64 {
        self.edge_count() as f64 / self.n as f64
    }

    /// All edges `(src, dst)` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.edge_count());
        for src in 0..self.n {
            for &dst in self.out_neighbors(src) {
                edges.push((src, dst));
            }
        }
        edges
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            self_loops: self.self_loops,
            edges: self.edges().into_iter().map(|(s, d)| [s, d]).collect(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_file())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: GraphFile = serde_json::from_str(&text)?;
        file.into_graph()
    }
}

/// On-disk graph: `{ "n": int, "self_loops": bool, "edges": [[src, dst], ...] }`.
///
/// Edges are sorted lexicographically and include the self-loops when
/// `self_loops` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub self_loops: bool,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<CausalGraph> {
        if self.edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGraph(
                "edges must be sorted lexicographically without duplicates".into(),
            ));
        }
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let loops = edges.iter().filter(|(s, d)| s == d).count();
        if self.self_loops && loops != self.n {
            return Err(Error::InvalidGraph(format!(
                "self_loops is set but only {loops} of {} self-loop edges are listed",
                self.n
            )));
        }
        if !self.self_loops && loops != 0 {
            return Err(Error::InvalidGraph(
                "self_loops is false but self-loop edges are listed".into(),
            ));
        }
        CausalGraph::from_edges(self.n, self.self_loops, &edges)
    }
}

/// Directed Erdős–Rényi graph: each ordered pair `(j, i)` with `j != i` is an
/// edge independently with probability `p_edge`. Self-loops, when enabled,
/// are always present.
///
/// Sampling skips over non-edges with geometric jumps, which has the same
/// distribution as one Bernoulli draw per pair.
pub fn gen_erdos_renyi(n: usize, p_edge: f64, self_loops: bool, seed: u64) -> Result<CausalGraph> {
    if n == 0 {
        return Err(Error::InvalidGraph("graph must have at least one node".into()));
    }
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(Error::InvalidProbability {
            what: "edge probability",
            value: p_edge,
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    let candidates = n - 1;
    for (i, list) in lists.iter_mut().enumerate() {
        if p_edge >= 1.0 {
            list.extend((0..n).filter(|&j| j != i));
        } else if p_edge > 0.0 && candidates > 0 {
            let skip = Geometric::new(p_edge).expect("probability validated above");
            // positions 0..n-1 index the sources other than i
            let mut pos: u64 = skip.sample(&mut rng);
            while pos < candidates as u64 {
                let k = pos as usize;
                list.push(if k < i { k } else { k + 1 });
                pos = pos.saturating_add(1).saturating_add(skip.sample(&mut rng));
            }
        }
        if self_loops {
            let at = list.partition_point(|&j| j < i);
            list.insert(at, i);
        }
    }
    Ok(CausalGraph::from_sorted_lists(n, self_loops, lists))
}

/// For each unit `i`, the units `i'` whose neighborhoods intersect `N_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyIndex {
    offsets: Vec<usize>,
    members: Vec<usize>,
}

impl DependencyIndex {
    /// `M_i`, ascending.
    pub fn members(&self, i: usize) -> &[usize] {
        &self.members[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_size(&self) -> usize {
        (0..self.len()).map(|i| self.members(i).len()).max().unwrap_or(0)
    }

    pub fn total_pairs(&self) -> usize {
        self.members.len()
    }
}

pub fn dependency_index(g: &CausalGraph) -> DependencyIndex {
    let n = g.n();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut members = Vec::new();
    let mut mark = vec![usize::MAX; n];
    let mut scratch = Vec::new();
    for i in 0..n {
        scratch.clear();
        for &k in g.neighbors(i) {
            for &other in g.out_neighbors(k) {
                if mark[other] != i {
                    mark[other] = i;
                    scratch.push(other);
                }
            }
        }
        scratch.sort_unstable();
        debug_assert!(scratch.len() <= g.d_in() * g.d_out());
        members.extend_from_slice(&scratch);
        offsets.push(members.len());
    }
    DependencyIndex { offsets, members }
}
