//! Artificial two-level directory built by clustering the sites seen in a
//! log, for use when no curated taxonomy is available.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::taxonomy::{CategoryPath, Taxonomy};
use crate::url_extract::{tokenize, PageRef, Site};

pub const DEFAULT_SIGMA: f64 = 0.5;
const SUMMARY_TOKENS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteProfile {
    pub site: String,
    /// Token multiset over every page fetched from the site.
    pub tokens: BTreeMap<String, u64>,
    pub hits: u64,
}

impl SiteProfile {
    pub fn token_set(&self) -> BTreeSet<&str> {
        self.tokens.keys().map(String::as_str).collect()
    }

    /// Most frequent tokens, ties broken alphabetically.
    pub fn top_tokens(&self, n: usize) -> Vec<String> {
        top_tokens(&self.tokens, n)
    }
}

fn top_tokens(tokens: &BTreeMap<String, u64>, n: usize) -> Vec<String> {
    let mut ranked: Vec<(&String, &u64)> = tokens.iter().collect();
    ranked.sort_by_key(|&(t, &c)| (Reverse(c), t));
    ranked.into_iter().take(n).map(|(t, _)| t.clone()).collect()
}

/// One profile per non-local site, sorted by site name.
pub fn profile_sites<'a, I>(refs: I) -> Vec<SiteProfile>
where
    I: IntoIterator<Item = &'a PageRef>,
{
    let mut by_site: BTreeMap<&str, SiteProfile> = BTreeMap::new();
    for page in refs {
        let Site::Host(host) = &page.site else { continue };
        let profile = by_site.entry(host.as_str()).or_insert_with(|| SiteProfile {
            site: host.clone(),
            tokens: BTreeMap::new(),
            hits: 0,
        });
        profile.hits += 1;
        for token in tokenize(page) {
            *profile.tokens.entry(token).or_insert(0) += 1;
        }
    }
    by_site.into_values().collect()
}

/// |A ∩ B| / |A ∪ B|, taken as 0 when both sets are empty.
pub fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Blocks of site names; each block sorted, blocks sorted by first member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub blocks: Vec<Vec<String>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True when every block of `self` lies inside a single block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let owner: BTreeMap<&str, usize> = coarser
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |s| (s.as_str(), i)))
            .collect();
        self.blocks.iter().all(|block| {
            let mut owners = block.iter().map(|s| owner.get(s.as_str()));
            match owners.next() {
                Some(Some(first)) => owners.all(|o| o == Some(first)),
                Some(None) => false,
                None => true,
            }
        })
    }
}

/// A merge performed by the agglomerative pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    pub similarity: f64,
    pub left: String,
    pub right: String,
}

/// Single-linkage agglomerative clustering on Jaccard similarity of token
/// sets, stopping once no cross-cluster pair reaches `sigma`.
pub fn cluster_sites(profiles: &[SiteProfile], sigma: f64) -> Partition {
    cluster_sites_traced(profiles, sigma).0
}

/// Like [`cluster_sites`], also returning the merge sequence.
pub fn cluster_sites_traced(profiles: &[SiteProfile], sigma: f64) -> (Partition, Vec<Merge>) {
    let mut sorted: Vec<&SiteProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.site.cmp(&b.site));
    sorted.dedup_by(|a, b| a.site == b.site);
    let sets: Vec<BTreeSet<&str>> = sorted.iter().map(|p| p.token_set()).collect();

    let mut pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            let sim = jaccard(&sets[i], &sets[j]);
            if sim >= sigma {
                pairs.push((sim, i, j));
            }
        }
    }
    // similarity descending, then site pair ascending
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut parent: Vec<usize> = (0..sorted.len()).collect();
    let mut merges = Vec::new();
    for (sim, i, j) in pairs {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
            merges.push(Merge {
                similarity: sim,
                left: sorted[i].site.clone(),
                right: sorted[j].site.clone(),
            });
        }
    }

    let mut blocks: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, p) in sorted.iter().enumerate() {
        let root = find(&mut parent, i);
        blocks.entry(root).or_default().push(p.site.clone());
    }
    let mut blocks: Vec<Vec<String>> = blocks.into_values().collect();
    blocks.sort();
    (Partition { blocks }, merges)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// `Top / Cluster-k / <site>`, clusters numbered from 1 by descending hits
/// (ties by smallest member site). Keywords are the five most frequent
/// tokens of each cluster and site.
pub fn build_artificial_directory(partition: &Partition, profiles: &[SiteProfile]) -> Taxonomy {
    let by_site: BTreeMap<&str, &SiteProfile> = profiles.iter().map(|p| (p.site.as_str(), p)).collect();

    let mut clusters: Vec<(u64, &str, Vec<&SiteProfile>)> = partition
        .blocks
        .iter()
        .filter_map(|block| {
            let members: Vec<&SiteProfile> = block
                .iter()
                .filter_map(|s| by_site.get(s.as_str()).copied())
                .collect();
            let first = members.iter().map(|p| p.site.as_str()).min()?;
            let hits = members.iter().map(|p| p.hits).sum();
            Some((hits, first, members))
        })
        .collect();
    clusters.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));

    let mut taxonomy = Taxonomy::root_only();
    let root = CategoryPath::root();
    for (k, (_, _, members)) in clusters.iter().enumerate() {
        let cluster_path = root.child(&format!("Cluster-{}", k + 1));
        let mut tokens: BTreeMap<String, u64> = BTreeMap::new();
        for p in members {
            for (t, &n) in &p.tokens {
                *tokens.entry(t.clone()).or_insert(0) += n;
            }
        }
        taxonomy = taxonomy
            .add_or_update_category(
                &cluster_path,
                top_tokens(&tokens, SUMMARY_TOKENS).into_iter().collect(),
                None,
            )
            .expect("default weight is valid");
        for p in members {
            taxonomy = taxonomy
                .add_or_update_category(
                    &cluster_path.child(&p.site),
                    p.top_tokens(SUMMARY_TOKENS).into_iter().collect(),
                    None,
                )
                .expect("default weight is valid");
        }
    }
    taxonomy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::url_extract::extract_page_ref;

    fn profile(site: &str, tokens: &[&str]) -> SiteProfile {
        SiteProfile {
            site: site.to_string(),
            tokens: tokens.iter().map(|t| (t.to_string(), 1)).collect(),
            hits: 1,
        }
    }

    #[test]
    fn profiles_exclude_local_pages() {
        let refs: Vec<PageRef> = [
            "/apache_pb.gif",
            "/www.a.com/x",
            "/www.a.com/y/z.html",
            "/www.b.org/",
        ]
        .iter()
        .map(|r| extract_page_ref(r))
        .collect();
        let profiles = profile_sites(&refs);
        assert_eq!(profiles.len(), 2);
        assert_eq!(profiles[0].site, "www.a.com");
        assert_eq!(profiles[0].hits, 2);
        assert_eq!(profiles[0].tokens["a"], 2);
        assert_eq!(profiles[1].hits, 1);

        let local: Vec<PageRef> = vec![extract_page_ref("/x_y.gif"), extract_page_ref("/")];
        assert!(profile_sites(&local).is_empty());
    }

    #[test]
    fn clustering_thresholds() {
        let ps = vec![
            profile("a", &["x", "y"]),
            profile("b", &["x", "y", "z"]),
            profile("c", &["q"]),
        ];
        let p = cluster_sites(&ps, 0.5);
        assert_eq!(p.blocks, [vec!["a", "b"], vec!["c"]]);
        assert_eq!(cluster_sites(&ps, 0.0).blocks, [vec!["a", "b", "c"]]);
        assert_eq!(cluster_sites(&ps, 1.0 + 1e-9).len(), 3);
    }

    #[test]
    fn merge_order_is_similarity_then_pair() {
        let ps = vec![
            profile("a", &["x", "y"]),
            profile("b", &["x", "y"]),
            profile("c", &["x", "y", "z"]),
            profile("d", &["x", "y", "z"]),
        ];
        let (_, merges) = cluster_sites_traced(&ps, 0.5);
        let names: Vec<(&str, &str)> = merges
            .iter()
            .map(|m| (m.left.as_str(), m.right.as_str()))
            .collect();
        assert_eq!(names, [("a", "b"), ("c", "d"), ("a", "c")]);
    }

    #[test]
    fn refinement() {
        let fine = Partition {
            blocks: vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]],
        };
        let coarse = Partition {
            blocks: vec![vec!["a".into(), "b".into()], vec!["c".into()]],
        };
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }

    #[test]
    fn artificial_directory_shape() {
        let ps = vec![
            SiteProfile {
                hits: 2,
                ..profile("b.com", &["b"])
            },
            SiteProfile {
                hits: 5,
                ..profile("a.com", &["a"])
            },
            SiteProfile {
                hits: 2,
                ..profile("c.com", &["c"])
            },
        ];
        let part = cluster_sites(&ps, 0.9);
        let t = build_artificial_directory(&part, &ps);
        assert_eq!(t.len(), 1 + 3 + 3);
        let paths: Vec<_> = t.paths().map(|p| p.as_str().to_string()).collect();
        assert!(paths.contains(&"Top/Cluster-1/a.com".to_string()));
        assert!(paths.contains(&"Top/Cluster-2/b.com".to_string()));
        assert!(paths.contains(&"Top/Cluster-3/c.com".to_string()));
        let leaf = CategoryPath::parse("Top/Cluster-1/a.com").unwrap();
        assert_eq!(t.weight(&leaf), Some(1.0));

        let empty = build_artificial_directory(&Partition { blocks: vec![] }, &[]);
        assert_eq!(empty.len(), 1);
    }

    #[test]
    fn top_tokens_by_frequency_then_name() {
        let mut p = profile("s", &["b", "c", "d", "e", "f", "g"]);
        p.tokens.insert("z".into(), 3);
        assert_eq!(p.top_tokens(5), ["z", "b", "c", "d", "e"]);
    }
}
