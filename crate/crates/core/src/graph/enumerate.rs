//! Small-graph enumeration up to isomorphism.
//!
//! Only meant for the exhaustive structural checks (a handful of nodes); the
//! canonical form tries every relabelling compatible with a degree refinement.

use std::collections::HashSet;

use super::Graph;

/// Canonical adjacency code of a graph with at most 11 nodes: two graphs are
/// isomorphic iff their codes are equal.
pub fn canonical_form(graph: &Graph) -> (usize, u64) {
    let n = graph.node_count();
    assert!(n <= 11, "canonical form is for small graphs only");
    let cells = refined_cells(graph);
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut best = u64::MAX;
    search(graph, &cells, 0, &mut perm, &mut vec![false; n], &mut best);
    (n, best)
}

pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    canonical_form(a) == canonical_form(b)
}

/// Connected graphs on exactly `p` nodes, one per isomorphism class.
///
/// Every connected graph has a vertex whose removal keeps it connected, so
/// adding one vertex with a non-empty neighborhood to each class on `p-1`
/// nodes reaches every class on `p` nodes.
pub fn connected_graphs(p: usize) -> Vec<Graph> {
    assert!((1..=10).contains(&p));
    let mut level = vec![Graph::from_masks(vec![0])];
    for k in 1..p {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for nbrs in 1u64..(1 << k) {
                let mut adj: Vec<u64> = (0..k).map(|i| g.neighbors(i).mask() | (((nbrs >> i) & 1) << k)).collect();
                adj.push(nbrs);
                let h = Graph::from_masks(adj);
                if seen.insert(canonical_form(&h)) {
                    next.push(h);
                }
            }
        }
        level = next;
    }
    level
}

// Groups nodes by (degree, sorted neighbor degrees), iterated until stable.
fn refined_cells(graph: &Graph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut colour: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
    loop {
        let mut sig: Vec<(usize, Vec<usize>, usize)> = (0..n)
            .map(|i| {
                let mut nb: Vec<usize> = graph.neighbors(i).iter().map(|j| colour[j]).collect();
                nb.sort_unstable();
                (colour[i], nb, i)
            })
            .collect();
        sig.sort();
        let mut next = vec![0; n];
        let mut c = 0;
        for w in 0..n {
            if w > 0 && (sig[w].0 != sig[w - 1].0 || sig[w].1 != sig[w - 1].1) {
                c += 1;
            }
            next[sig[w].2] = c;
        }
        let stable = count_distinct(&next) == count_distinct(&colour);
        colour = next;
        if stable {
            break;
        }
    }
    let k = count_distinct(&colour);
    let mut cells = vec![Vec::new(); k];
    for (i, &c) in colour.iter().enumerate() {
        cells[c].push(i);
    }
    cells
}

fn count_distinct(v: &[usize]) -> usize {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

// Positions are filled cell by cell; `perm[pos]` is the original node placed
// at position `pos`. The code packs the upper triangle row by row.
fn search(graph: &Graph, cells: &[Vec<usize>], cell: usize, perm: &mut Vec<usize>, used: &mut [bool], best: &mut u64) {
    let n = graph.node_count();
    if perm.len() == n {
        let mut code = 0u64;
        for a in 0..n {
            for b in a + 1..n {
                code = (code << 1) | graph.has_edge(perm[a], perm[b]) as u64;
            }
        }
        if code < *best {
            *best = code;
        }
        return;
    }
    let filled_in_cell = perm.len() - cells[..cell].iter().map(Vec::len).sum::<usize>();
    let cell = if filled_in_cell == cells[cell].len() { cell + 1 } else { cell };
    for &v in &cells[cell] {
        if used[v] {
            continue;
        }
        used[v] = true;
        perm.push(v);
        search(graph, cells, cell, perm, used, best);
        perm.pop();
        used[v] = false;
    }
}
