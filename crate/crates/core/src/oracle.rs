//! Reference answers computed without any logic programming machinery.

use std::collections::BTreeSet;

pub type Edge = (String, String);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<Edge>,
}

impl Graph {
    /// The vertices are the endpoints of the edges.
    pub fn from_edges<S: Into<String>>(edges: impl IntoIterator<Item = (S, S)>) -> Graph {
        let edges: BTreeSet<Edge> = edges.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let vertices = edges.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        Graph { vertices, edges }
    }
}

fn permutations(items: &mut Vec<String>, k: usize, visit: &mut impl FnMut(&[String])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Every Hamiltonian cycle as its set of edges. The first vertex is fixed
/// so each cycle is found once.
pub fn hamiltonian_cycles(g: &Graph) -> BTreeSet<BTreeSet<Edge>> {
    let mut out = BTreeSet::new();
    let mut vs: Vec<String> = g.vertices.iter().cloned().collect();
    if vs.is_empty() {
        return out;
    }
    permutations(&mut vs, 1, &mut |order| {
        let cycle: Vec<Edge> = (0..order.len()).map(|i| (order[i].clone(), order[(i + 1) % order.len()].clone())).collect();
        if cycle.iter().all(|e| g.edges.contains(e)) {
            out.insert(cycle.into_iter().collect());
        }
    });
    out
}

/// Transitive closure of a binary relation.
pub fn transitive_closure(rel: &BTreeSet<Edge>) -> BTreeSet<Edge> {
    let mut c = rel.clone();
    loop {
        let mut add = Vec::new();
        for (a, b) in &c {
            for (x, y) in &c {
                if b == x && !c.contains(&(a.clone(), y.clone())) {
                    add.push((a.clone(), y.clone()));
                }
            }
        }
        if add.is_empty() {
            return c;
        }
        c.extend(add);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g1_has_one_cycle() {
        let g = Graph::from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("d", "c")]);
        let cycles = hamiltonian_cycles(&g);
        assert_eq!(cycles.len(), 1);
        let want: BTreeSet<Edge> = Graph::from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]).edges;
        assert!(cycles.contains(&want));
    }

    #[test]
    fn two_vertex_complete_graph() {
        let g = Graph::from_edges([("a", "b"), ("b", "a")]);
        assert_eq!(hamiltonian_cycles(&g).len(), 1);
    }

    #[test]
    fn edgeless_graph_has_no_cycle() {
        assert!(hamiltonian_cycles(&Graph::default()).is_empty());
    }

    #[test]
    fn self_loop_is_a_cycle_on_one_vertex() {
        let g = Graph::from_edges([("a", "a")]);
        assert_eq!(hamiltonian_cycles(&g).len(), 1);
    }

    #[test]
    fn closure_of_chain() {
        let r = Graph::from_edges([("a", "b"), ("b", "c")]).edges;
        let c = transitive_closure(&r);
        assert_eq!(c.len(), 3);
        assert!(c.contains(&("a".into(), "c".into())));
    }
}
