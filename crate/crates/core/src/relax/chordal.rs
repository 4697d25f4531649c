//! Correlative sparsity: the variable interaction graph, a chordal extension
//! and the assignment of constraints to its maximal cliques.

use std::collections::BTreeSet;

use super::QPOP;
use crate::error::{Error, Result};

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    /// Connects every pair in `vs`.
    pub fn add_clique(&mut self, vs: &[usize]) {
        for (x, &a) in vs.iter().enumerate() {
            for &b in &vs[x + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    /// Vertex sets of the connected components, each sorted, ordered by first vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// The correlative sparsity pattern graph of a problem.
pub fn csp_graph(p: &QPOP) -> Graph {
    let mut g = Graph::new(p.n);
    for (u, _) in p.objective.terms() {
        let vs: Vec<usize> = u.vars().collect();
        g.add_clique(&vs);
    }
    for c in p.ineqs.iter().chain(&p.eqs) {
        g.add_clique(&c.vars());
    }
    g
}

/// Maximal cliques of the chordal extension produced by greedy
/// minimum-degree elimination (ties go to the lowest vertex).
///
/// Cliques are returned sorted internally and ordered lexicographically.
pub fn chordal_cliques(g: &Graph) -> Vec<Vec<usize>> {
    let mut h = g.clone();
    let mut alive: BTreeSet<usize> = (0..g.n()).collect();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    while let Some(&v) = alive.iter().min_by_key(|&&v| (h.adj[v].len(), v)) {
        let nb: Vec<usize> = h.neighbors(v).collect();
        h.add_clique(&nb);
        let mut c = nb.clone();
        c.push(v);
        c.sort_unstable();
        candidates.push(c);
        for w in nb {
            h.adj[w].remove(&v);
        }
        h.adj[v].clear();
        alive.remove(&v);
    }
    let sets: Vec<BTreeSet<usize>> = candidates.iter().map(|c| c.iter().copied().collect()).collect();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, c) in sets.iter().enumerate() {
        let dominated = sets
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && c.is_subset(d) && (c.len() < d.len() || j < i));
        if !dominated {
            out.push(candidates[i].clone());
        }
    }
    out.sort();
    out
}

/// Constraint indices grouped by clique: `(inequalities, equalities)` per clique.
pub type Assignment = (Vec<Vec<usize>>, Vec<Vec<usize>>);

/// Gives every constraint to the first clique containing all its variables.
pub fn assign_constraints(cliques: &[Vec<usize>], p: &QPOP) -> Result<Assignment> {
    let place = |vars: Vec<usize>, what: &str, idx: usize| -> Result<usize> {
        cliques
            .iter()
            .position(|c| vars.iter().all(|v| c.contains(v)))
            .ok_or_else(|| Error::InvalidOptions(format!("{what} {} is not covered by any clique", idx + 1)))
    };
    let mut ineq = vec![Vec::new(); cliques.len()];
    let mut eq = vec![Vec::new(); cliques.len()];
    for (r, g) in p.ineqs.iter().enumerate() {
        ineq[place(g.vars(), "inequality", r)?].push(r);
    }
    for (l, h) in p.eqs.iter().enumerate() {
        eq[place(h.vars(), "equality", l)?].push(l);
    }
    Ok((ineq, eq))
}
