//! User communities and their pruned directories.
//!
//! Users are linked when the cosine similarity of their usage vectors
//! reaches `tau`; every maximal clique of that graph is a community.
//! A community's directory keeps each category whose score
//! `weight(c) * subtree_hits(c) / total` reaches `theta`, plus its ancestors.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{Bucket, Counts, UsageVector};
use crate::taxonomy::{CategoryPath, Taxonomy};

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_MIN_SIZE: usize = 2;
pub const DEFAULT_MAX_CLIQUES: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommunityError {
    #[error("clique enumeration exceeded the cap of {cap} maximal cliques")]
    ExplosionGuard { cap: usize },
}

/// Cosine similarity of two sparse count vectors, `unspecified` included.
pub fn similarity(u: &UsageVector, v: &UsageVector) -> f64 {
    cosine(&u.counts, &v.counts)
}

pub fn cosine(a: &Counts, b: &Counts) -> f64 {
    let norm = |c: &Counts| c.values().map(|&n| u128::from(n) * u128::from(n)).sum::<u128>();
    let (na, nb) = (norm(a), norm(b));
    if na == 0 || nb == 0 {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: u128 = small
        .iter()
        .filter_map(|(k, &n)| large.get(k).map(|&m| u128::from(n) * u128::from(m)))
        .sum();
    let denom = ((na as f64) * (nb as f64)).sqrt();
    (dot as f64 / denom).clamp(0.0, 1.0)
}

/// Undirected threshold graph over users, vertices sorted by user id.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    users: Vec<String>,
    adjacency: Vec<FixedBitSet>,
    tau: f64,
}

impl SimilarityGraph {
    /// Graph on `users` (sorted and deduplicated) with the given undirected
    /// edges between user ids. Self-loops are ignored.
    pub fn from_edges<S: AsRef<str>>(users: &[S], edges: &[(S, S)], tau: f64) -> Self {
        let mut names: Vec<String> = users.iter().map(|u| u.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let n = names.len();
        let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
        let index = |name: &str| names.binary_search_by(|x| x.as_str().cmp(name)).ok();
        for (a, b) in edges {
            if let (Some(i), Some(j)) = (index(a.as_ref()), index(b.as_ref())) {
                if i != j {
                    adjacency[i].insert(j);
                    adjacency[j].insert(i);
                }
            }
        }
        SimilarityGraph {
            users: names,
            adjacency,
            tau,
        }
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn vertex_count(&self) -> usize {
        self.users.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count_ones(..)
    }

    /// Each edge once as `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.ones().filter(|&j| j > i).map(|j| (i, j)));
        }
        out
    }

    pub fn edge_names(&self) -> Vec<(&str, &str)> {
        self.edges()
            .into_iter()
            .map(|(i, j)| (self.users[i].as_str(), self.users[j].as_str()))
            .collect()
    }
}

/// Links every pair of distinct users whose similarity is at least `tau`.
pub fn build_graph(vectors: &[UsageVector], tau: f64) -> SimilarityGraph {
    let mut sorted: Vec<&UsageVector> = vectors.iter().collect();
    sorted.sort_by(|a, b| a.user.cmp(&b.user));
    sorted.dedup_by(|a, b| a.user == b.user);
    let n = sorted.len();
    let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if similarity(sorted[i], sorted[j]) >= tau {
                adjacency[i].insert(j);
                adjacency[j].insert(i);
            }
        }
    }
    SimilarityGraph {
        users: sorted.iter().map(|v| v.user.clone()).collect(),
        adjacency,
        tau,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CliqueOptions {
    pub min_size: usize,
    pub keep_singletons: bool,
    pub max_cliques: usize,
}

impl Default for CliqueOptions {
    fn default() -> Self {
        CliqueOptions {
            min_size: DEFAULT_MIN_SIZE,
            keep_singletons: false,
            max_cliques: DEFAULT_MAX_CLIQUES,
        }
    }
}

/// Every maximal clique, as sorted vertex indices, in no particular order.
pub fn maximal_cliques(graph: &SimilarityGraph, cap: usize) -> Result<Vec<Vec<usize>>, CommunityError> {
    let n = graph.vertex_count();
    let mut candidates = FixedBitSet::with_capacity(n);
    candidates.insert_range(..);
    let mut search = CliqueSearch {
        adjacency: &graph.adjacency,
        cap,
        found: Vec::new(),
    };
    let mut clique = Vec::new();
    search.expand(&mut clique, candidates, FixedBitSet::with_capacity(n))?;
    Ok(search.found)
}

struct CliqueSearch<'a> {
    adjacency: &'a [FixedBitSet],
    cap: usize,
    found: Vec<Vec<usize>>,
}

impl CliqueSearch<'_> {
    /// Bron–Kerbosch with Tomita pivoting: `clique` is the current clique,
    /// `candidates` can extend it, `excluded` were already explored.
    fn expand(
        &mut self,
        clique: &mut Vec<usize>,
        mut candidates: FixedBitSet,
        mut excluded: FixedBitSet,
    ) -> Result<(), CommunityError> {
        if candidates.is_clear() {
            if excluded.is_clear() && !clique.is_empty() {
                if self.found.len() == self.cap {
                    return Err(CommunityError::ExplosionGuard { cap: self.cap });
                }
                let mut members = clique.clone();
                members.sort_unstable();
                self.found.push(members);
            }
            return Ok(());
        }
        // pivot maximizing |candidates ∩ N(u)|
        let pivot = candidates
            .ones()
            .chain(excluded.ones())
            .max_by_key(|&u| {
                (
                    candidates.intersection_count(&self.adjacency[u]),
                    std::cmp::Reverse(u),
                )
            })
            .expect("candidates is non-empty");
        let mut branch = candidates.clone();
        branch.difference_with(&self.adjacency[pivot]);
        for v in branch.ones() {
            let mut next_candidates = candidates.clone();
            next_candidates.intersect_with(&self.adjacency[v]);
            let mut next_excluded = excluded.clone();
            next_excluded.intersect_with(&self.adjacency[v]);
            clique.push(v);
            self.expand(clique, next_candidates, next_excluded)?;
            clique.pop();
            candidates.set(v, false);
            excluded.insert(v);
        }
        Ok(())
    }
}

/// Maximal cliques of at least `min_size` members (isolated vertices too
/// when `keep_singletons` is set), sorted by member list.
pub fn find_communities(
    graph: &SimilarityGraph,
    opts: &CliqueOptions,
) -> Result<Vec<Vec<String>>, CommunityError> {
    let mut out: Vec<Vec<String>> = maximal_cliques(graph, opts.max_cliques)?
        .into_iter()
        .filter(|c| c.len() >= opts.min_size || (opts.keep_singletons && c.len() == 1))
        .map(|c| c.into_iter().map(|i| graph.users[i].clone()).collect())
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Community {
    pub members: Vec<String>,
    pub profile: Counts,
    pub total: u64,
}

impl Community {
    /// Sums the usage vectors of `members`. Unknown member ids contribute
    /// nothing.
    pub fn from_members(members: &[String], vectors: &[UsageVector]) -> Community {
        let mut members = members.to_vec();
        members.sort();
        members.dedup();
        let mut profile = Counts::new();
        for v in vectors.iter().filter(|v| members.binary_search(&v.user).is_ok()) {
            for (bucket, &n) in &v.counts {
                *profile.entry(bucket.clone()).or_insert(0) += n;
            }
        }
        Community::with_profile(members, profile)
    }

    pub fn with_profile(members: Vec<String>, profile: Counts) -> Community {
        let profile: Counts = profile.into_iter().filter(|&(_, n)| n > 0).collect();
        let total = profile.values().sum();
        Community {
            members,
            profile,
            total,
        }
    }

    pub fn unspecified(&self) -> u64 {
        self.profile.get(&Bucket::Unspecified).copied().unwrap_or(0)
    }
}

/// Hits landing in `path` or anywhere below it.
pub fn subtree_hits(path: &CategoryPath, community: &Community) -> u64 {
    community
        .profile
        .iter()
        .filter_map(|(bucket, &n)| bucket.category().filter(|d| path.contains(d)).map(|_| n))
        .sum()
}

/// `weight(c) * subtree_hits(c) / total`; zero for unknown categories or an
/// empty community.
pub fn score_category(path: &CategoryPath, community: &Community, taxonomy: &Taxonomy) -> f64 {
    let Some(weight) = taxonomy.weight(path) else {
        return 0.0;
    };
    if community.total == 0 {
        return 0.0;
    }
    weight * (subtree_hits(path, community) as f64 / community.total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityDirectory {
    pub community: Community,
    /// Ancestor-closed selection with each category's own score.
    pub selected: BTreeMap<CategoryPath, f64>,
    pub theta: f64,
}

pub fn build_community_directory(
    taxonomy: &Taxonomy,
    community: &Community,
    theta: f64,
) -> CommunityDirectory {
    let mut selected = BTreeMap::new();
    for path in taxonomy.paths() {
        let score = score_category(path, community, taxonomy);
        if score >= theta {
            for anc in path.ancestors() {
                if let std::collections::btree_map::Entry::Vacant(e) = selected.entry(anc) {
                    let s = score_category(e.key(), community, taxonomy);
                    e.insert(s);
                }
            }
            selected.insert(path.clone(), score);
        }
    }
    CommunityDirectory {
        community: community.clone(),
        selected,
        theta,
    }
}

#[derive(Debug, Serialize)]
struct TreeNode<'a> {
    path: &'a CategoryPath,
    score: f64,
    children: Vec<TreeNode<'a>>,
}

#[derive(Serialize)]
struct DirectoryDocument<'a> {
    members: &'a [String],
    total: u64,
    profile: &'a Counts,
    theta: f64,
    selected: usize,
    tree: Option<TreeNode<'a>>,
}

impl CommunityDirectory {
    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, path: &CategoryPath) -> bool {
        self.selected.contains_key(path)
    }

    /// True if every selected category's ancestors are selected too.
    pub fn is_ancestor_closed(&self) -> bool {
        self.selected
            .keys()
            .all(|p| p.ancestors().iter().all(|a| self.selected.contains_key(a)))
    }

    /// `path  score` per line, indented two spaces per level.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (path, score) in &self.selected {
            out.push_str(&"  ".repeat(path.depth()));
            out.push_str(&format!("{path}  {score:.6}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = DirectoryDocument {
            members: &self.community.members,
            total: self.community.total,
            profile: &self.community.profile,
            theta: self.theta,
            selected: self.selected.len(),
            tree: self.selected.keys().next().map(|root| self.node(root)),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("directory document serializes");
        s.push('\n');
        s
    }

    fn node<'a>(&'a self, path: &'a CategoryPath) -> TreeNode<'a> {
        let depth = path.depth() + 1;
        let children = self
            .selected
            .range(path.clone()..)
            .take_while(|(p, _)| path.contains(p))
            .filter(|(p, _)| p.depth() == depth)
            .map(|(p, _)| self.node(p))
            .collect();
        TreeNode {
            path,
            score: self.selected[path],
            children,
        }
    }
}
