//! How much smaller a community directory is than the full taxonomy, and how
//! much of the community's classified traffic it still covers.

use std::fmt;

use serde::Serialize;

use crate::classify::{Bucket, UsageVector};
use crate::community::{Community, CommunityDirectory};
use crate::taxonomy::Taxonomy;

/// Fraction of the full taxonomy kept in the directory.
pub fn shrinkage(full: &Taxonomy, dir: &CommunityDirectory) -> f64 {
    if full.is_empty() {
        return 0.0;
    }
    let kept = dir.selected.keys().filter(|p| full.contains(p)).count();
    kept as f64 / full.len() as f64
}

/// Fraction of classified (not `unspecified`) hits whose category was
/// selected; 1.0 when nothing was classified.
pub fn coverage(dir: &CommunityDirectory, community: &Community) -> f64 {
    let mut classified = 0u64;
    let mut covered = 0u64;
    for (bucket, &n) in &community.profile {
        if let Bucket::Category(path) = bucket {
            classified += n;
            if dir.selected.contains_key(path) {
                covered += n;
            }
        }
    }
    if classified == 0 {
        1.0
    } else {
        covered as f64 / classified as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityRow {
    /// 1-based position in the canonical community order.
    pub id: usize,
    pub members: Vec<String>,
    pub member_count: usize,
    pub hits: u64,
    pub unspecified_hits: u64,
    pub unspecified_fraction: f64,
    pub selected: usize,
    pub shrinkage: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub zero_communities: bool,
    pub community_count: usize,
    pub taxonomy_categories: usize,
    pub users: usize,
    pub total_hits: u64,
    pub unspecified_hits: u64,
    pub communities: Vec<CommunityRow>,
    /// `overlap[i][j]` = members shared by communities i and j.
    pub overlap: Vec<Vec<usize>>,
    pub mean_shrinkage: Option<f64>,
    pub mean_coverage: Option<f64>,
}

pub fn report(full: &Taxonomy, dirs: &[CommunityDirectory], vectors: &[UsageVector]) -> Report {
    let communities: Vec<CommunityRow> = dirs
        .iter()
        .enumerate()
        .map(|(i, dir)| {
            let c = &dir.community;
            let unspecified = c.unspecified();
            CommunityRow {
                id: i + 1,
                members: c.members.clone(),
                member_count: c.members.len(),
                hits: c.total,
                unspecified_hits: unspecified,
                unspecified_fraction: if c.total == 0 {
                    0.0
                } else {
                    unspecified as f64 / c.total as f64
                },
                selected: dir.selected.len(),
                shrinkage: shrinkage(full, dir),
                coverage: coverage(dir, c),
            }
        })
        .collect();

    let overlap = dirs
        .iter()
        .map(|a| {
            dirs.iter()
                .map(|b| {
                    a.community
                        .members
                        .iter()
                        .filter(|m| b.community.members.contains(m))
                        .count()
                })
                .collect()
        })
        .collect();

    let mean = |f: fn(&CommunityRow) -> f64| {
        (!communities.is_empty()).then(|| communities.iter().map(f).sum::<f64>() / communities.len() as f64)
    };

    Report {
        zero_communities: dirs.is_empty(),
        community_count: dirs.len(),
        taxonomy_categories: full.len(),
        users: vectors.len(),
        total_hits: vectors.iter().map(|v| v.total).sum(),
        unspecified_hits: vectors.iter().map(UsageVector::unspecified).sum(),
        mean_shrinkage: mean(|r| r.shrinkage),
        mean_coverage: mean(|r| r.coverage),
        communities,
        overlap,
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} users, {} hits ({} unspecified), {} categories",
            self.users, self.total_hits, self.unspecified_hits, self.taxonomy_categories
        )?;
        if self.zero_communities {
            return writeln!(f, "0 communities");
        }
        writeln!(f, "{} communities", self.community_count)?;
        writeln!(
            f,
            "{:>4}  {:>7}  {:>8}  {:>8}  {:>9}  {:>8}  {:>8}",
            "id", "members", "hits", "unspec", "selected", "shrink", "coverage"
        )?;
        for r in &self.communities {
            writeln!(
                f,
                "{:>4}  {:>7}  {:>8}  {:>8.4}  {:>9}  {:>8.4}  {:>8.4}",
                r.id, r.member_count, r.hits, r.unspecified_fraction, r.selected, r.shrinkage, r.coverage
            )?;
        }
        if let (Some(s), Some(c)) = (self.mean_shrinkage, self.mean_coverage) {
            writeln!(f, "mean shrinkage {s:.4}, mean coverage {c:.4}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::build_community_directory;
    use crate::taxonomy::CategoryPath;

    fn bucket(s: &str) -> Bucket {
        Bucket::Category(CategoryPath::parse(s).unwrap())
    }

    fn nine() -> Taxonomy {
        Taxonomy::from_reader("Top/A/1\nTop/A/2\nTop/A/3\nTop/B/1\nTop/B/2\nTop/C\n".as_bytes()).unwrap()
    }

    fn dir_with(taxonomy: &Taxonomy, community: &Community, paths: &[&str]) -> CommunityDirectory {
        let mut d = build_community_directory(taxonomy, community, 2.0);
        for p in paths {
            d.selected.insert(CategoryPath::parse(p).unwrap(), 0.0);
        }
        d
    }

    #[test]
    fn shrinkage_ratios() {
        let t = nine();
        assert_eq!(t.len(), 9);
        let c = Community::with_profile(vec!["u".into()], [(bucket("Top/A/1"), 1)].into());
        assert!((shrinkage(&t, &dir_with(&t, &c, &["Top"])) - 1.0 / 9.0).abs() < 1e-12);
        assert_eq!(shrinkage(&t, &build_community_directory(&t, &c, 0.0)), 1.0);
    }

    #[test]
    fn coverage_ratios() {
        let t = nine();
        let c = Community::with_profile(
            vec!["u".into()],
            [
                (bucket("Top/A/1"), 9),
                (bucket("Top/B/1"), 3),
                (Bucket::Unspecified, 5),
            ]
            .into(),
        );
        assert_eq!(
            coverage(&dir_with(&t, &c, &["Top", "Top/A", "Top/A/1"]), &c),
            0.75
        );
        assert_eq!(coverage(&dir_with(&t, &c, &[]), &c), 0.0);
        assert_eq!(coverage(&build_community_directory(&t, &c, 0.0), &c), 1.0);

        let only_unspec = Community::with_profile(vec!["u".into()], [(Bucket::Unspecified, 2)].into());
        assert_eq!(coverage(&dir_with(&t, &only_unspec, &[]), &only_unspec), 1.0);
    }

    #[test]
    fn empty_report() {
        let r = report(&nine(), &[], &[]);
        assert!(r.zero_communities);
        assert!(r.communities.is_empty());
        assert!(r.overlap.is_empty());
        assert_eq!(r.mean_coverage, None);
        assert!(r.to_string().contains("0 communities"));
    }

    #[test]
    fn overlap_counts_shared_members() {
        let t = nine();
        let v = |u: &str| UsageVector::new(u, [(bucket("Top/C"), 2)].into());
        let vectors = vec![v("a"), v("b"), v("c")];
        let ab = Community::from_members(&["a".into(), "b".into()], &vectors);
        let bc = Community::from_members(&["b".into(), "c".into()], &vectors);
        let dirs = vec![
            build_community_directory(&t, &ab, 0.1),
            build_community_directory(&t, &bc, 0.1),
        ];
        let r = report(&t, &dirs, &vectors);
        assert_eq!(r.overlap, [[2, 1], [1, 2]]);
        assert_eq!(r.total_hits, 6);
        assert_eq!(r.communities[0].hits, 4);
        assert_eq!(r.communities[0].coverage, 1.0);
        assert_eq!(r.mean_coverage, Some(1.0));
    }
}
