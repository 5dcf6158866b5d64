//! Node-line mapping: pick a node traversal of the degree-filtered graph
//! and spread it over the segment chain in proportion to segment length.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeIx};
use crate::polyline::SegmentChain;

pub const DEFAULT_TAU_FACTOR: f64 = 2.0;

/// The graph without degree-one nodes: `V' = {v : deg(v) > 1}` and the
/// edges induced on it. Degrees are taken in the original graph and the
/// filter is applied once (this is not a 2-core).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreSubgraph {
    /// Original indices, ascending.
    nodes: Vec<NodeIx>,
    /// Adjacency over local indices (positions in `nodes`), ascending.
    local: Vec<Vec<usize>>,
}

impl CoreSubgraph {
    pub fn nodes(&self) -> &[NodeIx] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.local.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Core edges as original-index pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(NodeIx, NodeIx)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, adj) in self.local.iter().enumerate() {
            for &j in adj.iter().filter(|&&j| j > i) {
                out.push((self.nodes[i], self.nodes[j]));
            }
        }
        out
    }

    pub fn contains(&self, v: NodeIx) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn has_edge(&self, a: NodeIx, b: NodeIx) -> bool {
        match (self.nodes.binary_search(&a), self.nodes.binary_search(&b)) {
            (Ok(i), Ok(j)) => self.local[i].binary_search(&j).is_ok(),
            _ => false,
        }
    }

    /// Connected components over local indices, each ascending, in order
    /// of their smallest member.
    fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut head = 0;
            while head < members.len() {
                let v = members[head];
                head += 1;
                for &w in &self.local[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// BFS over local indices: (visit order, distance, parent).
    fn bfs(&self, root: usize) -> (Vec<usize>, Vec<usize>, Vec<Option<usize>>) {
        let mut dist = vec![usize::MAX; self.len()];
        let mut parent = vec![None; self.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root]);
        dist[root] = 0;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &self.local[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        (order, dist, parent)
    }
}

/// Removes degree-one (and isolated) nodes together with their edges.
pub fn core_subgraph(g: &Graph) -> Result<CoreSubgraph> {
    if g.is_empty() {
        return Err(Error::invalid("graph has no nodes"));
    }
    let nodes: Vec<NodeIx> = (0..g.node_count()).filter(|&v| g.degree(v) > 1).collect();
    if nodes.is_empty() {
        return Err(Error::DegenerateGraph("no node has degree greater than one".into()));
    }
    let mut local_of = vec![usize::MAX; g.node_count()];
    for (i, &v) in nodes.iter().enumerate() {
        local_of[v] = i;
    }
    let local = nodes
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|&&w| local_of[w] != usize::MAX)
                .map(|&w| local_of[w])
                .collect()
        })
        .collect();
    Ok(CoreSubgraph { nodes, local })
}

/// Approximates a longest cycle by depth-first search.
///
/// Start nodes are tried in ascending order, skipping any node already
/// reached by an earlier search. Every back edge to a node on the current
/// DFS stack closes a candidate cycle (the stack slice above that node);
/// the longest candidate wins, ties going to the first found. At most
/// `10·|V'|` candidates are examined.
pub fn longest_cycle_approx(core: &CoreSubgraph) -> Option<Vec<NodeIx>> {
    let n = core.len();
    let max_candidates = 10 * n;
    let mut candidates = 0;
    let mut visited = vec![false; n];
    let mut stack_pos: Vec<Option<usize>> = vec![None; n];
    // (node, parent, next neighbor slot)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    let mut best: Option<(usize, usize)> = None;
    let mut best_nodes: Vec<usize> = Vec::new();

    'starts: for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        stack_pos[start] = Some(0);
        stack.push((start, usize::MAX, 0));
        while let Some(top) = stack.last_mut() {
            let (v, parent, next) = *top;
            if next == core.local[v].len() {
                stack_pos[v] = None;
                stack.pop();
                continue;
            }
            top.2 += 1;
            let w = core.local[v][next];
            if w == parent {
                continue;
            }
            if let Some(p) = stack_pos[w] {
                let len = stack.len() - p;
                if len >= 3 && best.is_none_or(|(l, _)| len > l) {
                    best = Some((len, p));
                    best_nodes = stack[p..].iter().map(|&(u, _, _)| u).collect();
                }
                candidates += 1;
                if candidates >= max_candidates {
                    break 'starts;
                }
            } else if !visited[w] {
                visited[w] = true;
                stack_pos[w] = Some(stack.len());
                stack.push((w, v, 0));
            }
        }
    }
    best.map(|_| best_nodes.into_iter().map(|i| core.nodes[i]).collect())
}

/// `|C| ≥ factor·√|V'|`.
pub fn accept_cycle(cycle_len: usize, core_size: usize, tau_factor: f64) -> bool {
    cycle_len as f64 >= tau_factor * (core_size as f64).sqrt()
}

/// A node traversal with each node's predecessor in the traversal tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Traversal {
    pub order: Vec<NodeIx>,
    pub parent: BTreeMap<NodeIx, NodeIx>,
}

/// Two-pass BFS over the largest connected component of the core.
///
/// The first BFS starts at a node drawn with `seed` and finds the farthest
/// node (ties: smallest index); the second BFS from there gives the visit
/// order and BFS-tree parents. Nodes outside the largest component are left
/// out.
pub fn two_pass_bfs(core: &CoreSubgraph, seed: u64) -> Result<Traversal> {
    if core.is_empty() {
        return Err(Error::DegenerateGraph("core subgraph is empty".into()));
    }
    let components = core.components();
    let largest = components
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.len().cmp(&b.len()).then(j.cmp(i)))
        .map(|(_, c)| c)
        .expect("non-empty core has a component");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = largest[rng.random_range(0..largest.len())];

    let (_, dist, _) = core.bfs(start);
    let far = largest
        .iter()
        .copied()
        .max_by(|&a, &b| dist[a].cmp(&dist[b]).then(b.cmp(&a)))
        .expect("component is non-empty");

    let (order, _, parent) = core.bfs(far);
    Ok(Traversal {
        parent: order
            .iter()
            .filter_map(|&v| parent[v].map(|p| (core.nodes[v], core.nodes[p])))
            .collect(),
        order: order.into_iter().map(|v| core.nodes[v]).collect(),
    })
}

/// Nodes per segment: `⌊d_i/D·m⌋`, with the remaining nodes handed one each
/// to the segments with the largest fractional parts (ties: lower index).
pub fn allocate_counts(lengths: &[f64], m: usize) -> Vec<usize> {
    let total: f64 = lengths.iter().sum();
    if lengths.is_empty() {
        return Vec::new();
    }
    if total <= 0.0 {
        let mut counts = vec![0; lengths.len()];
        counts[0] = m;
        return counts;
    }
    let mf = m as f64;
    // the fractional part of d_i·m/D is r_i/D; compare the numerators
    let mut counts = Vec::with_capacity(lengths.len());
    let mut rema = Vec::with_capacity(lengths.len());
    for &d in lengths {
        let q = d * mf;
        let k = (q / total).floor();
        counts.push(k as usize);
        rema.push(q - k * total);
    }
    let mut by_fraction: Vec<usize> = (0..lengths.len()).collect();
    by_fraction.sort_by(|&a, &b| rema[b].total_cmp(&rema[a]).then(a.cmp(&b)));
    let assigned: usize = counts.iter().sum();
    if assigned <= m {
        for &i in by_fraction.iter().cycle().take(m - assigned) {
            counts[i] += 1;
        }
    } else {
        // rounding pushed a floor over; take back from the smallest fractions
        for &i in by_fraction.iter().rev().cycle().take(assigned - m) {
            counts[i] -= 1;
        }
    }
    counts
}

/// Assignment of an ordered node list to chain segments plus the parent
/// map used to derive relative constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLineMapping {
    /// `assignments[i]` are the nodes on segment `i`, in traversal order.
    pub assignments: Vec<Vec<NodeIx>>,
    /// Predecessor of each mapped node; the root of an open traversal has none.
    pub parent: BTreeMap<NodeIx, NodeIx>,
}

impl NodeLineMapping {
    pub fn node_count(&self) -> usize {
        self.assignments.iter().map(Vec::len).sum()
    }

    /// Mapped nodes in traversal order.
    pub fn order(&self) -> impl Iterator<Item = NodeIx> + '_ {
        self.assignments.iter().flatten().copied()
    }

    pub fn segment_of(&self, v: NodeIx) -> Option<usize> {
        self.assignments.iter().position(|n| n.contains(&v))
    }
}

/// Spreads `order` over the segments of `chain` proportionally to segment
/// length, keeping traversal order. Each node's parent is its predecessor
/// in `order`; on a closed chain the first node's parent is the last node.
pub fn distribute(order: &[NodeIx], chain: &SegmentChain) -> Result<NodeLineMapping> {
    if order.is_empty() {
        return Err(Error::invalid("cannot distribute an empty node order"));
    }
    let counts = allocate_counts(&chain.segment_lengths(), order.len());
    let mut assignments = Vec::with_capacity(counts.len());
    let mut rest = order;
    for k in counts {
        let (head, tail) = rest.split_at(k);
        assignments.push(head.to_vec());
        rest = tail;
    }
    debug_assert!(rest.is_empty());

    let mut parent: BTreeMap<NodeIx, NodeIx> = order.windows(2).map(|w| (w[1], w[0])).collect();
    if chain.closed && order.len() >= 2 {
        parent.insert(order[0], order[order.len() - 1]);
    }
    Ok(NodeLineMapping { assignments, parent })
}
