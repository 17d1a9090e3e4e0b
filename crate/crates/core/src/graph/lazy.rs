use std::io::{BufRead, Write};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DegreeDistribution, NodeId};
use crate::error::{Error, Result};
use crate::rng::splitmix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeKind {
    #[serde(rename = "regular_tree")]
    Regular { degree: u32 },
    #[serde(rename = "sampled_tree")]
    Sampled { dist: DegreeDistribution, seed: u64 },
}

#[derive(Debug, Clone, Default)]
struct State {
    adj: Vec<Vec<NodeId>>,
    expanded: Vec<bool>,
    parent: Vec<Option<NodeId>>,
    depth: Vec<u32>,
    degree: Vec<u32>,
    /// Structural key: a function of the root-to-node path only, so the
    /// degree drawn for a node does not depend on query order.
    key: Vec<u64>,
}

/// Infinite tree grown on demand.
///
/// Node ids are handed out in materialization order with the root at 0.
/// A node's degree is fixed when it is created; its children are created
/// when its neighbors are first queried. Interior state sits behind a mutex
/// so a tree can be queried through `&self` from several threads.
#[derive(Debug)]
pub struct LazyTree {
    kind: TreeKind,
    max_depth: Option<u32>,
    state: Mutex<State>,
}

impl Clone for LazyTree {
    fn clone(&self) -> Self {
        LazyTree {
            kind: self.kind.clone(),
            max_depth: self.max_depth,
            state: Mutex::new(self.lock().clone()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    #[serde(flatten)]
    kind: TreeKind,
    max_depth: Option<u32>,
}

fn child_key(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index + 1))
}

impl LazyTree {
    pub fn regular(degree: u32, max_depth: Option<u32>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Config(format!("regular tree degree must be >= 2, got {degree}")));
        }
        Ok(Self::with_kind(TreeKind::Regular { degree }, max_depth))
    }

    pub fn sampled(dist: DegreeDistribution, max_depth: Option<u32>, seed: u64) -> Result<Self> {
        if let Some(0) = max_depth {
            return Err(Error::Config("max_depth must be >= 1".into()));
        }
        Ok(Self::with_kind(TreeKind::Sampled { dist, seed }, max_depth))
    }

    fn with_kind(kind: TreeKind, max_depth: Option<u32>) -> Self {
        let root_key = match &kind {
            TreeKind::Regular { .. } => 0,
            TreeKind::Sampled { seed, .. } => splitmix64(*seed),
        };
        let tree = LazyTree {
            kind,
            max_depth,
            state: Mutex::new(State::default()),
        };
        {
            let mut st = tree.lock();
            let degree = tree.draw_degree(root_key);
            push_node(&mut st, None, 0, degree, root_key);
        }
        tree
    }

    pub fn kind(&self) -> &TreeKind {
        &self.kind
    }

    pub fn max_depth(&self) -> Option<u32> {
        self.max_depth
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn draw_degree(&self, key: u64) -> u32 {
        match &self.kind {
            TreeKind::Regular { degree } => *degree,
            TreeKind::Sampled { dist, .. } => dist.sample(&mut ChaCha8Rng::seed_from_u64(key)),
        }
    }

    /// Number of nodes materialized so far.
    pub fn len(&self) -> usize {
        self.lock().adj.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.len()
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        self.lock()
            .degree
            .get(v.index())
            .map(|&d| d as usize)
            .ok_or(Error::UnknownNode(v))
    }

    pub fn depth(&self, v: NodeId) -> Result<u32> {
        self.lock().depth.get(v.index()).copied().ok_or(Error::UnknownNode(v))
    }

    pub fn parent(&self, v: NodeId) -> Result<Option<NodeId>> {
        self.lock().parent.get(v.index()).copied().ok_or(Error::UnknownNode(v))
    }

    /// Structural key of `v`; equal keys mean the same root-to-node path.
    pub fn structural_key(&self, v: NodeId) -> Result<u64> {
        self.lock().key.get(v.index()).copied().ok_or(Error::UnknownNode(v))
    }

    pub fn neighbors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        let mut st = self.lock();
        self.expand(&mut st, v)?;
        Ok(st.adj[v.index()].clone())
    }

    fn expand(&self, st: &mut State, v: NodeId) -> Result<()> {
        let i = v.index();
        if i >= st.adj.len() {
            return Err(Error::UnknownNode(v));
        }
        if st.expanded[i] {
            return Ok(());
        }
        if let Some(max_depth) = self.max_depth {
            if st.depth[i] >= max_depth {
                return Err(Error::DepthExceeded { node: v, max_depth });
            }
        }
        let children = st.degree[i] as usize - usize::from(st.parent[i].is_some());
        let (key, depth) = (st.key[i], st.depth[i]);
        for c in 0..children {
            let k = child_key(key, c as u64);
            let degree = self.draw_degree(k);
            let id = push_node(st, Some(v), depth + 1, degree, k);
            st.adj[i].push(id);
        }
        st.expanded[i] = true;
        Ok(())
    }

    pub fn hop_distance(&self, u: NodeId, v: NodeId) -> Result<usize> {
        let st = self.lock();
        for w in [u, v] {
            if w.index() >= st.adj.len() {
                return Err(Error::UnknownNode(w));
            }
        }
        let (mut a, mut b) = (u, v);
        let mut dist = 0;
        while st.depth[a.index()] > st.depth[b.index()] {
            a = st.parent[a.index()].expect("non-root has a parent");
            dist += 1;
        }
        while st.depth[b.index()] > st.depth[a.index()] {
            b = st.parent[b.index()].expect("non-root has a parent");
            dist += 1;
        }
        while a != b {
            a = st.parent[a.index()].expect("non-root has a parent");
            b = st.parent[b.index()].expect("non-root has a parent");
            dist += 2;
        }
        Ok(dist)
    }

    /// Header line followed by `parent child` pairs in creation order.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            kind: self.kind.clone(),
            max_depth: self.max_depth,
        };
        writeln!(w, "# {}", serde_json::to_string(&header)?)?;
        let st = self.lock();
        for (child, parent) in st.parent.iter().enumerate() {
            if let Some(p) = parent {
                writeln!(w, "{} {}", p, child)?;
            }
        }
        Ok(())
    }

    /// Restores a tree from its header JSON and the remaining edge lines.
    pub(super) fn read_edge_list<R: BufRead>(header: &str, reader: R) -> Result<Self> {
        let header: Header = serde_json::from_str(header)?;
        let tree = match header.kind {
            TreeKind::Regular { degree } => Self::regular(degree, header.max_depth)?,
            TreeKind::Sampled { dist, seed } => Self::sampled(dist, header.max_depth, seed)?,
        };
        {
            let mut st = tree.lock();
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                let lineno = n + 2;
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut it = line.split_whitespace();
                let parse = |s: Option<&str>| -> Result<u32> {
                    s.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                        line: lineno,
                        msg: format!("expected `parent child`, got `{line}`"),
                    })
                };
                let (p, c) = (NodeId(parse(it.next())?), NodeId(parse(it.next())?));
                tree.expand(&mut st, p).map_err(|e| Error::Parse {
                    line: lineno,
                    msg: e.to_string(),
                })?;
                if st.parent.get(c.index()).copied().flatten() != Some(p) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("edge {p} {c} does not match the tree's creation order"),
                    });
                }
            }
        }
        Ok(tree)
    }
}

fn push_node(st: &mut State, parent: Option<NodeId>, depth: u32, degree: u32, key: u64) -> NodeId {
    let id = NodeId::from_index(st.adj.len());
    st.adj.push(parent.into_iter().collect());
    st.expanded.push(false);
    st.parent.push(parent);
    st.depth.push(depth);
    st.degree.push(degree);
    st.key.push(key);
    id
}
