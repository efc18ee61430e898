//! Directed multigraph with the fixed incidence sign convention
//! Γ[v][e] = +1 when e leaves v and −1 when e enters v.

/// Directed graph on dense vertex ids `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphModel {
    pub vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphModel {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Self {
        assert!(vertex_count > 0);
        for &(t, h) in &edges {
            assert!(
                t < vertex_count && h < vertex_count,
                "edge endpoint out of range"
            );
            assert_ne!(t, h, "self-loops are not allowed");
        }
        let g = GraphModel {
            vertex_count,
            edges,
        };
        assert!(g.is_weakly_connected(), "graph must be weakly connected");
        g
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn tail(&self, e: usize) -> usize {
        self.edges[e].0
    }

    #[inline]
    pub fn head(&self, e: usize) -> usize {
        self.edges[e].1
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub(crate) fn push_edge(&mut self, tail: usize, head: usize) {
        assert_ne!(tail, head);
        self.edges.push((tail, head));
    }

    /// Incidence entry Γ[v][e]: +1 if e leaves v, −1 if e enters v, else 0.
    #[inline]
    pub fn incidence(&self, v: usize, e: usize) -> i8 {
        let (t, h) = self.edges[e];
        if v == t {
            1
        } else if v == h {
            -1
        } else {
            0
        }
    }

    pub fn is_weakly_connected(&self) -> bool {
        if self.vertex_count == 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(t, h) in &self.edges {
            adj[t].push(h);
            adj[h].push(t);
        }
        reachable_count(&adj, 0) == self.vertex_count
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.strongly_connected_components().component_count <= 1
    }

    /// Vertices reachable from `start` along directed edges.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(t, h) in &self.edges {
            adj[t].push(h);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Tarjan-style SCC computation (iterative Kosaraju for simplicity).
    pub fn strongly_connected_components(&self) -> SccResult {
        let n = self.vertex_count;
        let mut adj = vec![Vec::new(); n];
        let mut radj = vec![Vec::new(); n];
        for &(t, h) in &self.edges {
            adj[t].push(h);
            radj[h].push(t);
        }
        // first pass: finish order
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in 0..n {
            if visited[s] {
                continue;
            }
            let mut stack = vec![(s, 0usize)];
            visited[s] = true;
            while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
                if *idx < adj[v].len() {
                    let w = adj[v][*idx];
                    *idx += 1;
                    if !visited[w] {
                        visited[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(v);
                    stack.pop();
                }
            }
        }
        // second pass on the reverse graph
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for &s in order.iter().rev() {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = count;
            while let Some(v) = stack.pop() {
                for &w in &radj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        // condensation edges for the topological order
        let mut cedges = Vec::new();
        for &(t, h) in &self.edges {
            if comp[t] != comp[h] {
                cedges.push((comp[t], comp[h]));
            }
        }
        SccResult {
            component_of: comp,
            component_count: count,
            condensation_edges: cedges,
        }
    }
}

fn reachable_count(adj: &[Vec<usize>], start: usize) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count
}

/// Result of an SCC computation plus the condensation structure.
#[derive(Debug, Clone)]
pub struct SccResult {
    pub component_of: Vec<usize>,
    pub component_count: usize,
    condensation_edges: Vec<(usize, usize)>,
}

impl SccResult {
    /// Components in a topological order of the condensation DAG.
    pub fn topological_component_order(&self) -> Vec<usize> {
        let c = self.component_count;
        let mut indeg = vec![0usize; c];
        let mut adj = vec![Vec::new(); c];
        for &(a, b) in &self.condensation_edges {
            adj[a].push(b);
            indeg[b] += 1;
        }
        let mut queue: Vec<usize> = (0..c).filter(|&x| indeg[x] == 0).collect();
        queue.sort_unstable();
        let mut out = Vec::with_capacity(c);
        let mut qi = 0;
        while qi < queue.len() {
            let v = queue[qi];
            qi += 1;
            out.push(v);
            for &w in &adj[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        out
    }

    pub fn min_vertex_of(&self, component: usize) -> usize {
        self.component_of
            .iter()
            .position(|&c| c == component)
            .expect("component exists")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_signs() {
        let g = GraphModel::new(2, vec![(0, 1)]);
        assert_eq!(g.incidence(0, 0), 1);
        assert_eq!(g.incidence(1, 0), -1);
    }

    #[test]
    fn scc_on_cycle_and_dag() {
        let cyc = GraphModel::new(3, vec![(0, 1), (1, 2), (2, 0)]);
        assert!(cyc.is_strongly_connected());
        let dag = GraphModel::new(3, vec![(0, 1), (1, 2)]);
        let scc = dag.strongly_connected_components();
        assert_eq!(scc.component_count, 3);
        assert!(!dag.is_strongly_connected());
    }
}
