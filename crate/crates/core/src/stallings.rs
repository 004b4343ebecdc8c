//! Stallings subgroup graphs.
//!
//! A finitely generated subgroup `H ≤ F_r` is stored as its folded, based
//! core graph. Every graph is kept in canonical form: vertices are numbered
//! in breadth-first order from the base (vertex 0), exploring letters in the
//! order `a, A, b, B, ...`. Folded graphs are deterministic automata, so two
//! graphs represent the same subgroup exactly when they are equal as values.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

/// Default vertex limit for [`SubgroupGraph::fringe`].
pub const DEFAULT_FRINGE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupGraph {
    rank: usize,
    /// `next[v][letter.key()]`
    next: Vec<Vec<Option<usize>>>,
}

/// A free basis of a subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Basis {
    pub generators: Vec<Word>,
}

/// Union-find folding of a labelled graph with edges in both directions.
struct Folder {
    rank: usize,
    parent: Vec<usize>,
    adj: Vec<Vec<Option<usize>>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn new(rank: usize, vertices: usize) -> Folder {
        Folder {
            rank,
            parent: (0..vertices).collect(),
            adj: vec![vec![None; 2 * rank]; vertices],
            pending: Vec::new(),
        }
    }

    fn add_vertex(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.adj.push(vec![None; 2 * self.rank]);
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn link(&mut self, u: usize, key: usize, v: usize) {
        match self.adj[u][key] {
            Some(w) => {
                let w = self.find(w);
                if w != v {
                    self.pending.push((w, v));
                }
            }
            None => self.adj[u][key] = Some(v),
        }
    }

    fn add_edge(&mut self, u: usize, key: usize, v: usize) {
        let u = self.find(u);
        let v = self.find(v);
        self.link(u, key, v);
        self.link(v, key ^ 1, u);
        self.settle();
    }

    fn merge(&mut self, x: usize, y: usize) {
        self.pending.push((x, y));
        self.settle();
    }

    fn settle(&mut self) {
        while let Some((x, y)) = self.pending.pop() {
            let x = self.find(x);
            let y = self.find(y);
            if x == y {
                continue;
            }
            let (keep, gone) = if x < y { (x, y) } else { (y, x) };
            self.parent[gone] = keep;
            let moved = std::mem::take(&mut self.adj[gone]);
            self.adj[gone] = vec![None; 2 * self.rank];
            for (key, target) in moved.into_iter().enumerate() {
                if let Some(t) = target {
                    let t = self.find(t);
                    let k = self.find(keep);
                    self.link(k, key, t);
                    self.link(t, key ^ 1, k);
                }
            }
        }
    }

    /// Normalized class labels (restricted growth string) of the current
    /// vertex partition.
    fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = Vec::with_capacity(n);
        for v in 0..n {
            let r = self.find(v);
            if map[r] == usize::MAX {
                map[r] = next;
                next += 1;
            }
            out.push(map[r]);
        }
        out
    }

    fn finish(mut self, base: usize) -> SubgroupGraph {
        let n = self.parent.len();
        let base = self.find(base);
        let mut adj: Vec<Vec<Option<usize>>> = vec![vec![None; 2 * self.rank]; n];
        let mut alive = vec![false; n];
        for v in 0..n {
            if self.find(v) == v {
                alive[v] = true;
                let row = self.adj[v].clone();
                for (slot, edge) in adj[v].iter_mut().zip(row) {
                    *slot = edge.map(|t| self.find(t));
                }
            }
        }
        // Strip hanging trees: non-base vertices of degree one.
        let degree = |adj: &Vec<Vec<Option<usize>>>, v: usize| adj[v].iter().filter(|e| e.is_some()).count();
        let mut stack: Vec<usize> = (0..n).filter(|&v| alive[v] && v != base && degree(&adj, v) <= 1).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] || degree(&adj, v) > 1 {
                continue;
            }
            alive[v] = false;
            for key in 0..2 * self.rank {
                if let Some(t) = adj[v][key].take() {
                    adj[t][key ^ 1] = None;
                    if t != base && degree(&adj, t) <= 1 {
                        stack.push(t);
                    }
                }
            }
        }
        canonical_from(self.rank, &adj, base)
    }
}

fn canonical_from(rank: usize, adj: &[Vec<Option<usize>>], base: usize) -> SubgroupGraph {
    let mut index = vec![usize::MAX; adj.len()];
    let mut order = vec![base];
    index[base] = 0;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for t in adj[v].iter().flatten() {
            if index[*t] == usize::MAX {
                index[*t] = order.len();
                order.push(*t);
            }
        }
    }
    let next = order
        .iter()
        .map(|&v| adj[v].iter().map(|e| e.map(|t| index[t])).collect())
        .collect();
    SubgroupGraph { rank, next }
}

impl SubgroupGraph {
    /// Folded core graph of the subgroup generated by `generators`.
    pub fn fold(generators: &[Word], rank: usize) -> Result<SubgroupGraph> {
        let mut folder = Folder::new(rank, 1);
        for g in generators {
            if g.rank() != rank {
                return Err(Error::AlphabetMismatch {
                    left: g.rank(),
                    right: rank,
                });
            }
            let letters = g.letters();
            let mut current = 0;
            for (i, l) in letters.iter().enumerate() {
                let target = if i + 1 == letters.len() { 0 } else { folder.add_vertex() };
                folder.add_edge(current, l.key(), target);
                current = target;
            }
        }
        Ok(folder.finish(0))
    }

    pub fn parse(gens: &[&str], rank: usize) -> Result<SubgroupGraph> {
        let words = gens
            .iter()
            .map(|s| Word::parse(s, rank))
            .collect::<Result<Vec<_>>>()?;
        SubgroupGraph::fold(&words, rank)
    }

    /// The whole free group `F_r`.
    pub fn full(rank: usize) -> SubgroupGraph {
        SubgroupGraph {
            rank,
            next: vec![(0..2 * rank).map(|_| Some(0)).collect()],
        }
    }

    pub fn trivial(rank: usize) -> SubgroupGraph {
        SubgroupGraph {
            rank,
            next: vec![vec![None; 2 * rank]],
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.next.len()
    }

    /// Number of positively labelled edges.
    pub fn edge_count(&self) -> usize {
        self.next
            .iter()
            .map(|row| row.iter().step_by(2).filter(|e| e.is_some()).count())
            .sum()
    }

    /// Rank of the subgroup, `|E| - |V| + 1`.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    pub fn is_full(&self) -> bool {
        *self == SubgroupGraph::full(self.rank)
    }

    pub fn target(&self, vertex: usize, letter: Letter) -> Option<usize> {
        self.next.get(vertex)?.get(letter.key()).copied().flatten()
    }

    /// Positively labelled edges `(from, generator, to)` in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (v, row) in self.next.iter().enumerate() {
            for g in 0..self.rank {
                if let Some(t) = row[2 * g] {
                    out.push((v, g, t));
                }
            }
        }
        out
    }

    fn read(&self, w: &Word) -> Option<usize> {
        let mut v = 0;
        for &l in w.letters() {
            if l.gen() >= self.rank {
                return None;
            }
            v = self.next[v][l.key()]?;
        }
        Some(v)
    }

    /// Membership: `w` reads a closed path at the base.
    pub fn contains(&self, w: &Word) -> bool {
        self.read(w) == Some(0)
    }

    /// Spanning-tree basis. Tree paths come from a breadth-first search in
    /// canonical order; one generator per non-tree positive edge.
    pub fn basis(&self) -> Basis {
        let n = self.vertex_count();
        let mut path: Vec<Option<Word>> = vec![None; n];
        let mut tree_key: Vec<Option<(usize, usize)>> = vec![None; n];
        path[0] = Some(Word::identity(self.rank));
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for key in 0..2 * self.rank {
                if let Some(t) = self.next[v][key] {
                    if path[t].is_none() {
                        let step = Word::from_letters(self.rank, [Letter::from_key(key)]).expect("letter in range");
                        path[t] = Some(path[v].as_ref().expect("visited") * &step);
                        tree_key[t] = Some((v, key));
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut generators = Vec::new();
        for (u, g, v) in self.edges() {
            let key = 2 * g;
            if tree_key[v] == Some((u, key)) || tree_key[u] == Some((v, key ^ 1)) {
                continue;
            }
            let pu = path[u].as_ref().expect("connected");
            let pv = path[v].as_ref().expect("connected");
            let step = Word::generator(self.rank, g);
            generators.push(&(pu * &step) * &pv.invert());
        }
        Basis { generators }
    }

    /// Pullback of the two graphs at the pair of base vertices.
    pub fn intersect(&self, other: &SubgroupGraph) -> Result<SubgroupGraph> {
        if self.rank != other.rank {
            return Err(Error::AlphabetMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        let mut ids = std::collections::HashMap::new();
        let mut pairs = vec![(0usize, 0usize)];
        ids.insert((0usize, 0usize), 0usize);
        let mut edges = Vec::new();
        let mut head = 0;
        while head < pairs.len() {
            let (x, y) = pairs[head];
            let here = head;
            head += 1;
            for key in (0..2 * self.rank).step_by(2) {
                if let (Some(tx), Some(ty)) = (self.next[x][key], other.next[y][key]) {
                    let id = *ids.entry((tx, ty)).or_insert_with(|| {
                        pairs.push((tx, ty));
                        pairs.len() - 1
                    });
                    edges.push((here, key, id));
                }
            }
            for key in (1..2 * self.rank).step_by(2) {
                if let (Some(tx), Some(ty)) = (self.next[x][key], other.next[y][key]) {
                    if let std::collections::hash_map::Entry::Vacant(e) = ids.entry((tx, ty)) {
                        e.insert(pairs.len());
                        pairs.push((tx, ty));
                    }
                }
            }
        }
        let mut folder = Folder::new(self.rank, pairs.len());
        for (u, key, v) in edges {
            folder.add_edge(u, key, v);
        }
        Ok(folder.finish(0))
    }

    /// Whether the subgroup of `other` is contained in the subgroup of `self`.
    pub fn includes(&self, other: &SubgroupGraph) -> Result<bool> {
        if self.rank != other.rank {
            return Err(Error::AlphabetMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(other.basis().generators.iter().all(|w| self.contains(w)))
    }

    /// All elements of reduced length at most `max_len`, in shortlex order.
    pub fn enumerate_elements(&self, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut letters: Vec<Letter> = Vec::new();
        self.walk(0, None, max_len, &mut letters, &mut out);
        out.sort();
        out
    }

    fn walk(&self, v: usize, last: Option<usize>, budget: usize, letters: &mut Vec<Letter>, out: &mut Vec<Word>) {
        if v == 0 {
            out.push(Word::from_letters(self.rank, letters.iter().copied()).expect("letters in range"));
        }
        if budget == 0 {
            return;
        }
        for key in 0..2 * self.rank {
            if last == Some(key ^ 1) {
                continue;
            }
            if let Some(t) = self.next[v][key] {
                letters.push(Letter::from_key(key));
                self.walk(t, Some(key), budget - 1, letters, out);
                letters.pop();
            }
        }
    }

    fn quotient(&self, labels: &[usize]) -> (SubgroupGraph, Vec<usize>) {
        let mut folder = Folder::new(self.rank, self.vertex_count());
        for (u, g, v) in self.edges() {
            folder.add_edge(u, 2 * g, v);
        }
        let mut first = std::collections::HashMap::new();
        for (v, &c) in labels.iter().enumerate() {
            match first.get(&c) {
                Some(&u) => folder.merge(u, v),
                None => {
                    first.insert(c, v);
                }
            }
        }
        let closed = folder.labels();
        (folder.finish(0), closed)
    }

    /// All folded quotients of this graph by identifications of vertices,
    /// deduplicated and sorted. Every algebraic extension of the subgroup
    /// appears among them.
    ///
    /// The search walks the lattice of fold-closed partitions: starting from
    /// the discrete partition it merges two classes and refolds, so each
    /// closed partition is visited once rather than every one of the Bell
    /// number many partitions.
    pub fn fringe(&self, vertex_limit: usize) -> Result<Vec<SubgroupGraph>> {
        let n = self.vertex_count();
        if n > vertex_limit {
            return Err(Error::FringeTooLarge {
                vertices: n,
                limit: vertex_limit,
            });
        }
        let start: Vec<usize> = (0..n).collect();
        let mut seen: HashSet<Vec<usize>> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        let mut graphs = BTreeSet::new();
        while let Some(labels) = queue.pop_front() {
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            let (graph, _) = self.quotient(&labels);
            graphs.insert(graph);
            for i in 0..classes {
                for j in i + 1..classes {
                    let merged: Vec<usize> = labels.iter().map(|&c| if c == j { i } else { c }).collect();
                    let (_, closed) = self.quotient(&merged);
                    if seen.insert(closed.clone()) {
                        queue.push_back(closed);
                    }
                }
            }
        }
        Ok(graphs.into_iter().collect())
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph subgroup {\n  rankdir=LR;\n");
        for v in 0..self.vertex_count() {
            let shape = if v == 0 { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  {v} [shape={shape}];");
        }
        for (u, g, v) in self.edges() {
            let label = Letter::new(g, false).to_char().map_or(format!("x{}", g + 1), String::from);
            let _ = writeln!(s, "  {u} -> {v} [label=\"{label}\"];");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertex_count(),
            base: 0,
            edges: self
                .edges()
                .into_iter()
                .map(|(from, g, to)| EdgeJson {
                    from,
                    label: Letter::new(g, false).to_char().map_or(format!("x{}", g + 1), String::from),
                    to,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphJson {
    pub vertices: usize,
    pub base: usize,
    pub edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeJson {
    pub from: usize,
    pub label: String,
    pub to: usize,
}
