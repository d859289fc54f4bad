use std::collections::VecDeque;

use super::Graph;

/// Node order used by the elimination game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EliminationOrder {
    /// Repeatedly eliminate a node of minimum degree in the current filled
    /// graph (ties broken by smallest index).
    MinDegree,
    /// `0, 1, ..., p-1`.
    Natural,
    /// Explicit permutation of `0..p`.
    Given(Vec<usize>),
}

/// Elimination game: each processed node has its not-yet-processed
/// neighbours joined pairwise. The result is a chordal supergraph of `g`.
///
/// # Panics
/// If a `Given` order is not a permutation of `0..p`.
pub fn chordal_completion(g: &Graph, order: &EliminationOrder) -> Graph {
    let p = g.node_count();
    let mut adj: Vec<bool> = (0..p * p).map(|k| g.has_edge(k / p, k % p)).collect();
    let mut done = vec![false; p];
    let fixed: Option<Vec<usize>> = match order {
        EliminationOrder::MinDegree => None,
        EliminationOrder::Natural => Some((0..p).collect()),
        EliminationOrder::Given(o) => {
            let mut seen = vec![false; p];
            assert!(
                o.len() == p && o.iter().all(|&v| v < p && !std::mem::replace(&mut seen[v], true)),
                "elimination order must be a permutation of 0..{p}"
            );
            Some(o.clone())
        }
    };
    for step in 0..p {
        let v = match &fixed {
            Some(o) => o[step],
            None => (0..p)
                .filter(|&u| !done[u])
                .min_by_key(|&u| (0..p).filter(|&w| !done[w] && adj[u * p + w]).count())
                .expect("a node remains at every step"),
        };
        let live: Vec<usize> = (0..p).filter(|&w| !done[w] && adj[v * p + w]).collect();
        for (a, &x) in live.iter().enumerate() {
            for &y in &live[a + 1..] {
                adj[x * p + y] = true;
                adj[y * p + x] = true;
            }
        }
        done[v] = true;
    }
    let edges = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j)));
    Graph::new(p, edges.filter(|&(i, j)| adj[i * p + j]).collect::<Vec<_>>())
        .expect("completion preserves graph validity")
}

/// Maximum cardinality search. Returns the reverse visit order, which is a
/// perfect elimination ordering exactly when the graph is chordal.
fn maximum_cardinality_search(g: &Graph) -> Vec<usize> {
    let p = g.node_count();
    let mut weight = vec![0usize; p];
    let mut visited = vec![false; p];
    let mut visit = Vec::with_capacity(p);
    for _ in 0..p {
        let v = (0..p)
            .filter(|&u| !visited[u])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unvisited node exists");
        visited[v] = true;
        visit.push(v);
        for u in g.neighbors(v) {
            if !visited[u] {
                weight[u] += 1;
            }
        }
    }
    visit.reverse();
    visit
}

fn is_perfect_elimination_ordering(g: &Graph, order: &[usize]) -> bool {
    let p = g.node_count();
    let mut position = vec![0; p];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    order.iter().all(|&v| {
        let later: Vec<usize> = g.neighbors(v).filter(|&u| position[u] > position[v]).collect();
        later
            .iter()
            .enumerate()
            .all(|(a, &x)| later[a + 1..].iter().all(|&y| g.has_edge(x, y)))
    })
}

/// Chordality test via maximum cardinality search. When the graph is
/// chordal the second component is a perfect elimination ordering.
pub fn is_chordal(g: &Graph) -> (bool, Option<Vec<usize>>) {
    let order = maximum_cardinality_search(g);
    if is_perfect_elimination_ordering(g, &order) {
        (true, Some(order))
    } else {
        (false, None)
    }
}

/// Some chordless cycle of length at least four, or `None` for chordal
/// graphs.
///
/// For each node `v` and non-adjacent neighbours `u`, `w`, a shortest
/// `u`–`w` path avoiding `v` and the rest of `N(v)` closes an induced cycle
/// through `v`.
pub fn find_chordless_cycle(g: &Graph) -> Option<Vec<usize>> {
    let p = g.node_count();
    for v in 0..p {
        let nbrs: Vec<usize> = g.neighbors(v).collect();
        for (a, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[a + 1..] {
                if g.has_edge(u, w) {
                    continue;
                }
                let blocked = |x: usize| x == v || (g.has_edge(v, x) && x != u && x != w);
                let mut parent = vec![usize::MAX; p];
                parent[u] = u;
                let mut queue = VecDeque::from([u]);
                while let Some(x) = queue.pop_front() {
                    if x == w {
                        break;
                    }
                    for y in g.neighbors(x) {
                        if parent[y] == usize::MAX && !blocked(y) {
                            parent[y] = x;
                            queue.push_back(y);
                        }
                    }
                }
                if parent[w] != usize::MAX {
                    let mut cycle = vec![v];
                    let mut x = w;
                    while x != u {
                        cycle.push(x);
                        x = parent[x];
                    }
                    cycle.push(u);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> Graph {
        Graph::cycle(4).unwrap()
    }

    #[test]
    fn chordality_of_small_graphs() {
        let (ok, peo) = is_chordal(&Graph::complete(3).unwrap());
        assert!(ok);
        assert_eq!(peo.unwrap().len(), 3);
        assert_eq!(is_chordal(&four_cycle()), (false, None));

        let chorded = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let (ok, peo) = is_chordal(&chorded);
        assert!(ok);
        assert!(is_perfect_elimination_ordering(&chorded, &peo.unwrap()));
    }

    #[test]
    fn completion_of_four_cycle_adds_one_chord() {
        let g = four_cycle();
        let h = chordal_completion(&g, &EliminationOrder::MinDegree);
        assert_eq!(h.edge_count(), 5);
        assert!(g.is_subgraph_of(&h));
        assert!(is_chordal(&h).0);
    }

    #[test]
    fn completion_leaves_chordal_graphs_alone() {
        let t = Graph::complete(3).unwrap();
        assert_eq!(chordal_completion(&t, &EliminationOrder::MinDegree), t);
        let e = Graph::empty(5).unwrap();
        assert_eq!(chordal_completion(&e, &EliminationOrder::Natural), e);
    }

    #[test]
    fn given_order_changes_fill() {
        // Star centre eliminated first fills everything; leaves first fills nothing.
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let centre_first = chordal_completion(&star, &EliminationOrder::Natural);
        assert_eq!(centre_first, Graph::complete(4).unwrap());
        let leaves_first = chordal_completion(&star, &EliminationOrder::Given(vec![1, 2, 3, 0]));
        assert_eq!(leaves_first, star);
    }

    #[test]
    fn chordless_cycle_witness() {
        let cyc = find_chordless_cycle(&four_cycle()).unwrap();
        assert_eq!(cyc.len(), 4);
        let mut sorted = cyc.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        for k in 0..cyc.len() {
            assert!(four_cycle().has_edge(cyc[k], cyc[(k + 1) % cyc.len()]));
        }
        assert!(find_chordless_cycle(&Graph::complete(5).unwrap()).is_none());
        let c6 = Graph::cycle(6).unwrap();
        assert_eq!(find_chordless_cycle(&c6).unwrap().len(), 6);
    }
}
