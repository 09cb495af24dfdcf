use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::{ReducedWord, GENERATOR_NAMES};

#[derive(Debug, Clone)]
struct RawEdge {
    from: usize,
    to: usize,
    label: i32,
    lam: ReducedWord,
}

/// Folding workspace. `adj[v][s]` lists edges leaving `v` with signed label `s`
/// (negative for edges read backwards).
struct Folder {
    edges: Vec<Option<RawEdge>>,
    adj: Vec<BTreeMap<i32, Vec<usize>>>,
    alive: Vec<bool>,
    track: bool,
}

impl Folder {
    fn new(track: bool) -> Self {
        Folder {
            edges: Vec::new(),
            adj: vec![BTreeMap::new()],
            alive: vec![true],
            track,
        }
    }

    fn vertex(&mut self) -> usize {
        self.adj.push(BTreeMap::new());
        self.alive.push(true);
        self.adj.len() - 1
    }

    fn edge(&mut self, from: usize, label: i32, to: usize, lam: ReducedWord) {
        let id = self.edges.len();
        self.edges.push(Some(RawEdge { from, to, label, lam }));
        self.adj[from].entry(label).or_default().push(id);
        self.adj[to].entry(-label).or_default().push(id);
    }

    /// One petal per non-trivial generator; the first step carries the generator symbol.
    fn petal(&mut self, j: usize, word: &ReducedWord) {
        let letters = word.letters();
        let mut cur = 0;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() { 0 } else { self.vertex() };
            let step = if i == 0 && self.track {
                ReducedWord::generator(j)
            } else {
                ReducedWord::identity()
            };
            if l > 0 {
                self.edge(cur, l, next, step);
            } else {
                self.edge(next, -l, cur, step.inverse());
            }
            cur = next;
        }
    }

    /// Far endpoint and expression of edge `id` read from `v` along signed label `s`.
    fn oriented(&self, id: usize, s: i32) -> (usize, ReducedWord) {
        let e = self.edges[id].as_ref().expect("live edge");
        if s > 0 {
            (e.to, e.lam.clone())
        } else {
            (e.from, e.lam.inverse())
        }
    }

    fn delete(&mut self, id: usize) {
        let e = self.edges[id].take().expect("live edge");
        for (v, s) in [(e.from, e.label), (e.to, -e.label)] {
            if let Some(list) = self.adj[v].get_mut(&s) {
                list.retain(|&x| x != id);
                if list.is_empty() {
                    self.adj[v].remove(&s);
                }
            }
        }
    }

    /// Identifies `gone` with `keep`, where `δ` evaluates to `h(keep)·h(gone)⁻¹`.
    fn merge(&mut self, keep: usize, gone: usize, delta: ReducedWord) {
        let moved = std::mem::take(&mut self.adj[gone]);
        let ids: BTreeSet<usize> = moved.values().flatten().copied().collect();
        let delta_inv = delta.inverse();
        for id in ids {
            let e = self.edges[id].as_mut().expect("live edge");
            let (out, inc) = (e.from == gone, e.to == gone);
            if self.track {
                if out {
                    e.lam = delta.mul(&e.lam);
                }
                if inc {
                    e.lam = e.lam.mul(&delta_inv);
                }
            }
            if out {
                e.from = keep;
            }
            if inc {
                e.to = keep;
            }
        }
        for (s, list) in moved {
            self.adj[keep].entry(s).or_default().extend(list);
        }
        self.alive[gone] = false;
    }

    fn fold(&mut self) {
        let mut work: Vec<usize> = (0..self.adj.len()).rev().collect();
        while let Some(v) = work.pop() {
            if !self.alive[v] {
                continue;
            }
            let Some((s, e1, e2)) = self.adj[v]
                .iter()
                .find(|(_, l)| l.len() >= 2)
                .map(|(&s, l)| (s, l[0], l[1]))
            else {
                continue;
            };
            let (o1, l1) = self.oriented(e1, s);
            let (o2, l2) = self.oriented(e2, s);
            self.delete(e2);
            if o1 != o2 {
                let delta = if self.track {
                    l1.inverse().mul(&l2)
                } else {
                    ReducedWord::identity()
                };
                let (keep, gone, delta) = if o1 < o2 {
                    (o1, o2, delta)
                } else {
                    (o2, o1, delta.inverse())
                };
                self.merge(keep, gone, delta);
                work.push(keep);
            }
            if self.alive[v] {
                work.push(v);
            }
        }
    }

    /// Strips hanging trees away from the base.
    fn prune(&mut self) {
        let degree = |adj: &BTreeMap<i32, Vec<usize>>| adj.values().map(Vec::len).sum::<usize>();
        let mut queue: VecDeque<usize> = (1..self.adj.len()).filter(|&v| self.alive[v]).collect();
        while let Some(v) = queue.pop_front() {
            if v == 0 || !self.alive[v] || degree(&self.adj[v]) != 1 {
                continue;
            }
            let (&s, list) = self.adj[v].iter().next().expect("one edge");
            let id = list[0];
            let (other, _) = self.oriented(id, s);
            self.delete(id);
            self.alive[v] = false;
            queue.push_back(other);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub from: usize,
    pub label: String,
    pub to: usize,
}

/// The folded core graph of a finitely generated subgroup, based at vertex 0.
#[derive(Debug, Clone)]
pub struct StallingsGraph {
    vertices: usize,
    edges: Vec<(usize, i32, usize, Option<ReducedWord>)>,
    adj: Vec<BTreeMap<i32, (usize, usize)>>,
}

impl StallingsGraph {
    /// The graph of `⟨generators⟩`.
    pub fn new(generators: &[ReducedWord]) -> Self {
        Self::build(generators, false)
    }

    /// Also records, for each edge, an expression in the given generators so
    /// that members can be written back in terms of them.
    pub fn with_expressions(generators: &[ReducedWord]) -> Self {
        Self::build(generators, true)
    }

    fn build(generators: &[ReducedWord], track: bool) -> Self {
        let mut f = Folder::new(track);
        for (j, g) in generators.iter().enumerate() {
            f.petal(j, g);
        }
        f.fold();
        f.prune();

        // Breadth-first renumbering makes the result independent of merge order.
        let mut index = vec![usize::MAX; f.adj.len()];
        index[0] = 0;
        let mut order = vec![0];
        let mut edge_ids = Vec::new();
        let mut seen_edge = vec![false; f.edges.len()];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for (&s, list) in &f.adj[v] {
                let id = list[0];
                if !seen_edge[id] {
                    seen_edge[id] = true;
                    edge_ids.push(id);
                }
                let (o, _) = f.oriented(id, s);
                if index[o] == usize::MAX {
                    index[o] = order.len();
                    order.push(o);
                }
            }
        }
        let vertices = order.len();
        let mut adj = vec![BTreeMap::new(); vertices];
        let mut edges = Vec::with_capacity(edge_ids.len());
        for (k, &id) in edge_ids.iter().enumerate() {
            let e = f.edges[id].as_ref().expect("live edge");
            let (a, b) = (index[e.from], index[e.to]);
            adj[a].insert(e.label, (b, k));
            adj[b].insert(-e.label, (a, k));
            edges.push((a, e.label, b, track.then(|| e.lam.clone())));
        }
        StallingsGraph { vertices, edges, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Rank of the subgroup, `E − V + 1`.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices
    }

    pub fn edge_list(&self) -> Vec<GraphEdge> {
        self.edges
            .iter()
            .map(|&(from, label, to, _)| GraphEdge {
                from,
                label: GENERATOR_NAMES[(label - 1) as usize..label as usize].to_string(),
                to,
            })
            .collect()
    }

    fn trace(&self, w: &ReducedWord) -> Option<(usize, Vec<(usize, bool)>)> {
        let mut v = 0;
        let mut path = Vec::with_capacity(w.len());
        for &l in w.letters() {
            let &(next, id) = self.adj[v].get(&l)?;
            path.push((id, l > 0));
            v = next;
        }
        Some((v, path))
    }

    pub fn contains(&self, w: &ReducedWord) -> bool {
        matches!(self.trace(w), Some((0, _)))
    }

    /// `w` as a word in the generators the graph was built from. Needs a graph
    /// built by [`StallingsGraph::with_expressions`].
    pub fn express(&self, w: &ReducedWord) -> Option<ReducedWord> {
        let (end, path) = self.trace(w)?;
        if end != 0 {
            return None;
        }
        let mut out = ReducedWord::identity();
        for (id, forward) in path {
            let lam = self.edges[id].3.as_ref()?;
            out = out.mul(&if forward { lam.clone() } else { lam.inverse() });
        }
        Some(out)
    }

    /// A free basis read off a breadth-first spanning tree.
    pub fn basis(&self) -> Vec<ReducedWord> {
        // tree edge into each vertex: (parent, signed label read from the parent)
        let mut parent: Vec<Option<(usize, i32)>> = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        let mut tree = vec![false; self.edges.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for (&s, &(o, id)) in &self.adj[v] {
                if !seen[o] {
                    seen[o] = true;
                    parent[o] = Some((v, s));
                    tree[id] = true;
                    queue.push_back(o);
                }
            }
        }
        let path = |mut v: usize| -> Vec<i32> {
            let mut rev = Vec::new();
            while let Some((p, s)) = parent[v] {
                rev.push(s);
                v = p;
            }
            rev.reverse();
            rev
        };
        self.edges
            .iter()
            .enumerate()
            .filter(|(id, _)| !tree[*id])
            .map(|(_, &(a, l, b, _))| {
                let back = path(b).into_iter().rev().map(|s| -s);
                ReducedWord::reduce(path(a).into_iter().chain(std::iter::once(l)).chain(back))
            })
            .collect()
    }
}

/// Replaces generator `i` of `expr` by `words[i]`.
pub(crate) fn substitute(expr: &ReducedWord, words: &[ReducedWord]) -> ReducedWord {
    ReducedWord::reduce(expr.letters().iter().flat_map(|&l| {
        let w = &words[(l.unsigned_abs() - 1) as usize];
        if l > 0 {
            w.letters().to_vec()
        } else {
            w.inverse().letters().to_vec()
        }
    }))
}
