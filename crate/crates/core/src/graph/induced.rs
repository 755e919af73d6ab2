use super::{Graph, NodeSet};

/// 1-based edges of the pendant graph: triangle 1-2-3, node 4 attached to 3.
pub const PENDANT_EDGES: [(usize, usize); 4] = [(1, 2), (1, 3), (2, 3), (3, 4)];

/// Finds an induced pendant subgraph.
///
/// Returns `emb` with `emb[k]` the node of `graph` playing pendant label `k+1`
/// (the two triangle-only nodes in increasing order). The search scans 4-subsets
/// in lexicographic order, so the result is deterministic.
pub fn find_induced_pendant(graph: &Graph) -> Option<[usize; 4]> {
    let n = graph.node_count();
    let mut pick = [0usize; 4];
    scan_subsets(n, 4, 0, &mut pick, 0, &mut |s| match_pendant(graph, s))
}

fn scan_subsets<T>(
    n: usize,
    k: usize,
    start: usize,
    pick: &mut [usize],
    depth: usize,
    f: &mut impl FnMut(&[usize]) -> Option<T>,
) -> Option<T> {
    if depth == k {
        return f(pick);
    }
    for v in start..n {
        pick[depth] = v;
        if let Some(t) = scan_subsets(n, k, v + 1, pick, depth + 1, f) {
            return Some(t);
        }
    }
    None
}

fn match_pendant(graph: &Graph, s: &[usize]) -> Option<[usize; 4]> {
    let set = NodeSet::from_nodes(s);
    let deg: Vec<usize> = s.iter().map(|&v| (graph.neighbors(v) & set).len()).collect();
    let edges: usize = deg.iter().sum::<usize>() / 2;
    if edges != 4 {
        return None;
    }
    // Four edges on four nodes: either a 4-cycle (degrees 2,2,2,2) or the
    // pendant (degrees 1,2,2,3).
    let hub = (0..4).find(|&k| deg[k] == 3)?;
    let leaf = (0..4).find(|&k| deg[k] == 1)?;
    let mut tri = (0..4).filter(|&k| deg[k] == 2).map(|k| s[k]);
    let (a, b) = (tri.next()?, tri.next()?);
    Some([a, b, s[hub], s[leaf]])
}

/// Finds an induced odd cycle of length at least `min_len`, shortest first.
///
/// The cycle is returned in cycle order starting from its smallest node, and
/// the second entry is the smaller of that node's two cycle neighbors.
pub fn find_induced_odd_cycle(graph: &Graph, min_len: usize) -> Option<Vec<usize>> {
    let n = graph.node_count();
    let mut len = min_len.max(3);
    if len.is_multiple_of(2) {
        len += 1;
    }
    while len <= n {
        for s in 0..n {
            let mut path = vec![s];
            if let Some(c) = extend_cycle(graph, len, &mut path, NodeSet::single(s)) {
                return Some(c);
            }
        }
        len += 2;
    }
    None
}

// Grows an induced path from `path[0]` through nodes larger than it; closes
// once the path has `len` nodes and the last one touches the start.
fn extend_cycle(graph: &Graph, len: usize, path: &mut Vec<usize>, on_path: NodeSet) -> Option<Vec<usize>> {
    let s = path[0];
    let last = *path.last().unwrap();
    if path.len() == len {
        return (graph.has_edge(last, s) && path[1] < last).then(|| path.clone());
    }
    // Nodes adjacent to any interior path node other than `last` are excluded,
    // and so is the start unless we are placing the final node.
    let interior = on_path - NodeSet::single(last) - NodeSet::single(s);
    let blocked = graph.neighbors_of_set(interior) | on_path;
    for v in graph.neighbors(last).iter() {
        if v <= s || blocked.contains(v) {
            continue;
        }
        let touches_start = graph.has_edge(v, s);
        let is_final = path.len() + 1 == len;
        // The second node is adjacent to the start by construction.
        if path.len() >= 2 && touches_start != is_final {
            continue;
        }
        if path.len() == 1 && len > 2 && is_final {
            continue;
        }
        path.push(v);
        let found = extend_cycle(graph, len, path, on_path.with(v));
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}
