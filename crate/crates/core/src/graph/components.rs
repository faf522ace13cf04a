use super::{ExposomeGraph, NodeKey};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Sets in order of their smallest member; members ascending.
    pub fn sets(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let root = self.find(x);
            if slot[root] == usize::MAX {
                slot[root] = sets.len();
                sets.push(Vec::new());
            }
            sets[slot[root]].push(x);
        }
        sets
    }
}

/// Connected components of an exposome graph, as node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    groups: Vec<Vec<usize>>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Nodes without any shared-exposure connection.
    pub fn isolated(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().filter(|g| g.len() == 1).map(|g| g[0])
    }

    pub fn isolated_count(&self) -> usize {
        self.isolated().count()
    }

    pub fn keys<'g>(&self, graph: &'g ExposomeGraph) -> Vec<Vec<&'g NodeKey>> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&i| &graph.nodes()[i].key).collect())
            .collect()
    }
}

pub fn components(graph: &ExposomeGraph) -> Components {
    let mut uf = UnionFind::new(graph.node_count());
    for edge in graph.edges() {
        uf.union(edge.source_index(), edge.target_index());
    }
    Components { groups: uf.sets() }
}
