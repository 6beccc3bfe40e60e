//! Keyword classification of pages into taxonomy categories and per-user
//! aggregation into usage vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::log_ingest::LogRecord;
use crate::taxonomy::{CategoryPath, Taxonomy};
use crate::url_extract::{extract_page_ref, tokenize, PageRef};

pub const UNSPECIFIED: &str = "unspecified";

/// Classification target: a taxonomy category or the fallback bucket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bucket {
    Category(CategoryPath),
    Unspecified,
}

impl Bucket {
    pub fn category(&self) -> Option<&CategoryPath> {
        match self {
            Bucket::Category(p) => Some(p),
            Bucket::Unspecified => None,
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bucket::Category(p) => p.fmt(f),
            Bucket::Unspecified => f.write_str(UNSPECIFIED),
        }
    }
}

impl Serialize for Bucket {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Sparse category hit counts.
pub type Counts = BTreeMap<Bucket, u64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UsageVector {
    pub user: String,
    pub counts: Counts,
    pub total: u64,
}

impl UsageVector {
    pub fn new(user: impl Into<String>, counts: Counts) -> Self {
        let counts: Counts = counts.into_iter().filter(|&(_, n)| n > 0).collect();
        let total = counts.values().sum();
        UsageVector {
            user: user.into(),
            counts,
            total,
        }
    }

    pub fn unspecified(&self) -> u64 {
        self.counts.get(&Bucket::Unspecified).copied().unwrap_or(0)
    }
}

/// Deepest category whose keywords share a token with the page. Ties go to
/// the larger overlap, then the smaller path string.
pub fn classify_page(page: &PageRef, taxonomy: &Taxonomy) -> Bucket {
    let tokens: BTreeSet<String> = tokenize(page).into_iter().collect();
    classify_tokens(&tokens, taxonomy)
}

pub fn classify_tokens(tokens: &BTreeSet<String>, taxonomy: &Taxonomy) -> Bucket {
    let mut best: Option<(usize, usize, &CategoryPath)> = None;
    for cat in taxonomy.categories() {
        let overlap = if cat.keywords.len() < tokens.len() {
            cat.keywords.iter().filter(|k| tokens.contains(*k)).count()
        } else {
            tokens.iter().filter(|t| cat.keywords.contains(*t)).count()
        };
        if overlap == 0 {
            continue;
        }
        let depth = cat.path.depth();
        let better = match best {
            None => true,
            Some((d, o, p)) => {
                (depth, overlap) > (d, o) || ((depth, overlap) == (d, o) && cat.path.as_str() < p.as_str())
            }
        };
        if better {
            best = Some((depth, overlap, &cat.path));
        }
    }
    match best {
        Some((_, _, path)) => Bucket::Category(path.clone()),
        None => Bucket::Unspecified,
    }
}

/// Bucket for one request. Pages without a recognizable site go to
/// `unspecified` without consulting the keywords.
pub fn classify_resource(resource: &str, taxonomy: &Taxonomy) -> Bucket {
    let page = extract_page_ref(resource);
    if page.site.is_local() {
        Bucket::Unspecified
    } else {
        classify_page(&page, taxonomy)
    }
}

/// One vector per distinct user, sorted by user id.
pub fn build_usage_vectors<'a, I>(records: I, taxonomy: &Taxonomy) -> Vec<UsageVector>
where
    I: IntoIterator<Item = &'a LogRecord>,
{
    let mut per_user: BTreeMap<String, Counts> = BTreeMap::new();
    // Many hits repeat the same resource; classify each one once.
    let mut cache: BTreeMap<&str, Bucket> = BTreeMap::new();
    for record in records {
        let bucket = cache
            .entry(record.resource.as_str())
            .or_insert_with(|| classify_resource(&record.resource, taxonomy))
            .clone();
        *per_user
            .entry(record.user_id())
            .or_default()
            .entry(bucket)
            .or_insert(0) += 1;
    }
    per_user
        .into_iter()
        .map(|(user, counts)| UsageVector::new(user, counts))
        .collect()
}

/// `user<TAB>category<TAB>count` lines.
pub fn usage_vectors_tsv(vectors: &[UsageVector]) -> String {
    let mut out = String::new();
    for v in vectors {
        for (bucket, n) in &v.counts {
            out.push_str(&format!("{}\t{}\t{}\n", v.user, bucket, n));
        }
    }
    out
}
