use crate::error::{Error, Result};
use crate::ising::LabeledGraph;

use super::automorphism::Permutation;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Class id of every element, canonicalized to the smallest member.
    pub fn min_labels(&mut self) -> Vec<usize> {
        let n = self.len();
        let mut smallest = vec![usize::MAX; n];
        for x in 0..n {
            let r = self.find(x);
            smallest[r] = smallest[r].min(x);
        }
        (0..n).map(|x| smallest[self.find(x)]).collect()
    }
}

/// Finest vertex and edge partitions closed under `gens`. Ids are the smallest member
/// index (vertex index or edge index into `g.edges()`).
pub fn vertex_and_edge_orbits(
    g: &LabeledGraph,
    gens: &[Permutation],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let edge_index = g.edge_index();
    let mut vertices = UnionFind::new(g.num_vertices());
    let mut edges = UnionFind::new(g.edges().len());
    for (n, gen) in gens.iter().enumerate() {
        if !gen.is_automorphism(g) {
            return Err(Error::NotAutomorphism(format!("generator {n}")));
        }
        for (v, &w) in gen.image().iter().enumerate() {
            vertices.union(v, w);
        }
        for (k, &(a, b)) in g.edges().iter().enumerate() {
            let (x, y) = (gen.apply(a), gen.apply(b));
            edges.union(k, edge_index[&(x.min(y), x.max(y))]);
        }
    }
    Ok((vertices.min_labels(), edges.min_labels()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(3, 1));
        assert!(!uf.union(1, 3));
        uf.union(4, 3);
        assert!(uf.same(4, 1));
        assert_eq!(uf.min_labels(), vec![0, 1, 2, 1, 1]);
    }

    #[test]
    fn identity_gives_singletons() {
        let g = LabeledGraph::unlabeled(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let (v, e) = vertex_and_edge_orbits(&g, &[Permutation::identity(4)]).unwrap();
        assert_eq!(v, vec![0, 1, 2, 3]);
        assert_eq!(e, vec![0, 1, 2, 3]);
        let (v, _) = vertex_and_edge_orbits(&g, &[]).unwrap();
        assert_eq!(v, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rotation_merges_cycle() {
        let g = LabeledGraph::unlabeled(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let rot = Permutation::new(vec![1, 2, 3, 0]).unwrap();
        let (v, e) = vertex_and_edge_orbits(&g, &[rot]).unwrap();
        assert_eq!(v, vec![0; 4]);
        assert_eq!(e, vec![0; 4]);
    }

    #[test]
    fn rejects_non_automorphism() {
        let g = LabeledGraph::unlabeled(3, vec![(0, 1), (1, 2)]).unwrap();
        let bad = Permutation::new(vec![1, 0, 2]).unwrap();
        assert!(matches!(
            vertex_and_edge_orbits(&g, &[bad]),
            Err(Error::NotAutomorphism(_))
        ));
    }
}
