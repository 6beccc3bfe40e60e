//! Thematic web directory: a rooted tree of categories addressed by
//! slash-separated paths from `Top`, each with keywords and an
//! informativeness weight.
//!
//! File format, one category per line:
//!
//! ```text
//! # comment
//! Top/Computers/XML<TAB>xml,xsl,dtd<TAB>0.9
//! ```
//!
//! The keyword and weight columns are optional. Missing ancestors are
//! created with no keywords. A missing weight defaults to
//! `depth / max_depth`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub const ROOT: &str = "Top";

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("duplicate category path {0}")]
    DuplicatePath(String),
    #[error("weight {weight:?} for {path} is not a number in [0, 1]")]
    BadWeight { path: String, weight: String },
    #[error("taxonomy file contains no categories")]
    EmptyFile,
    #[error("invalid category path {0:?}: must be rooted at Top with non-empty segments")]
    BadPath(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("no such category {0}")]
    UnknownPath(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Slash-separated category path. Orders segment by segment, which makes a
/// sorted collection of paths a depth-first walk of the tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategoryPath(String);

impl CategoryPath {
    pub fn parse(s: &str) -> Result<Self, TaxonomyError> {
        let s = s.trim();
        let mut segments = s.split('/');
        if segments.next() != Some(ROOT) || s.split('/').any(|seg| seg.trim().is_empty()) {
            return Err(TaxonomyError::BadPath(s.to_string()));
        }
        Ok(CategoryPath(s.to_string()))
    }

    pub fn root() -> Self {
        CategoryPath(ROOT.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0.split('/')
    }

    pub fn name(&self) -> &str {
        self.0.rsplit('/').next().unwrap_or(&self.0)
    }

    /// Number of `/` separators; the root has depth 0.
    pub fn depth(&self) -> usize {
        self.0.bytes().filter(|&b| b == b'/').count()
    }

    pub fn is_root(&self) -> bool {
        self.0 == ROOT
    }

    pub fn parent(&self) -> Option<CategoryPath> {
        self.0.rfind('/').map(|i| CategoryPath(self.0[..i].to_string()))
    }

    pub fn child(&self, segment: &str) -> CategoryPath {
        CategoryPath(format!("{}/{}", self.0, segment))
    }

    /// Segment-wise prefix test: `Top/A` contains `Top/A/B` but not `Top/AB`.
    pub fn contains(&self, other: &CategoryPath) -> bool {
        other.0 == self.0
            || (other.0.len() > self.0.len()
                && other.0.starts_with(&self.0)
                && other.0.as_bytes()[self.0.len()] == b'/')
    }

    /// Ancestors from the root down to the parent; empty for the root.
    pub fn ancestors(&self) -> Vec<CategoryPath> {
        self.0
            .match_indices('/')
            .map(|(i, _)| CategoryPath(self.0[..i].to_string()))
            .collect()
    }
}

impl Ord for CategoryPath {
    fn cmp(&self, other: &Self) -> Ordering {
        self.segments().cmp(other.segments())
    }
}

impl PartialOrd for CategoryPath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CategoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for CategoryPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Ancestors of `path`, root first. Empty for `Top`.
pub fn ancestors(path: &CategoryPath) -> Vec<CategoryPath> {
    path.ancestors()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Category {
    pub path: CategoryPath,
    pub keywords: BTreeSet<String>,
    /// Weight given in the file; `None` means the depth default applies.
    pub explicit_weight: Option<f64>,
    /// Effective informativeness in [0, 1].
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    categories: BTreeMap<CategoryPath, Category>,
    max_depth: usize,
}

impl Default for Taxonomy {
    fn default() -> Self {
        Taxonomy::root_only()
    }
}

impl Taxonomy {
    pub fn root_only() -> Self {
        let mut t = Taxonomy {
            categories: BTreeMap::new(),
            max_depth: 0,
        };
        t.ensure_path(&CategoryPath::root());
        t.refresh();
        t
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    /// Always false: a taxonomy has at least its root.
    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn get(&self, path: &CategoryPath) -> Option<&Category> {
        self.categories.get(path)
    }

    pub fn contains(&self, path: &CategoryPath) -> bool {
        self.categories.contains_key(path)
    }

    pub fn weight(&self, path: &CategoryPath) -> Option<f64> {
        self.categories.get(path).map(|c| c.weight)
    }

    /// Categories in depth-first path order.
    pub fn categories(&self) -> impl Iterator<Item = &Category> {
        self.categories.values()
    }

    pub fn paths(&self) -> impl Iterator<Item = &CategoryPath> {
        self.categories.keys()
    }

    pub fn children(&self, path: &CategoryPath) -> impl Iterator<Item = &Category> + '_ {
        let path = path.clone();
        let depth = path.depth() + 1;
        self.categories
            .range(path.clone()..)
            .take_while(move |(p, _)| path.contains(p))
            .filter(move |(p, _)| p.depth() == depth)
            .map(|(_, c)| c)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Category> {
        self.categories
            .values()
            .filter(|c| self.children(&c.path).next().is_none())
    }

    /// Inserts the category, or replaces its keywords and weight if present.
    /// Missing ancestors are created.
    pub fn add_or_update_category(
        &self,
        path: &CategoryPath,
        keywords: BTreeSet<String>,
        weight: Option<f64>,
    ) -> Result<Taxonomy, TaxonomyError> {
        let mut next = self.clone();
        next.upsert(path, keywords, weight)?;
        next.refresh();
        Ok(next)
    }

    fn upsert(
        &mut self,
        path: &CategoryPath,
        keywords: BTreeSet<String>,
        weight: Option<f64>,
    ) -> Result<(), TaxonomyError> {
        if let Some(w) = weight {
            check_weight(path, w)?;
        }
        self.ensure_path(path);
        let cat = self.categories.get_mut(path).expect("path ensured");
        cat.keywords = keywords.into_iter().map(|k| k.to_lowercase()).collect();
        cat.explicit_weight = weight;
        Ok(())
    }

    fn ensure_path(&mut self, path: &CategoryPath) {
        for p in path.ancestors().into_iter().chain([path.clone()]) {
            self.categories.entry(p.clone()).or_insert_with(|| Category {
                path: p,
                keywords: BTreeSet::new(),
                explicit_weight: None,
                weight: 0.0,
            });
        }
    }

    fn refresh(&mut self) {
        self.max_depth = self.categories.keys().map(CategoryPath::depth).max().unwrap_or(0);
        let max_depth = self.max_depth;
        for cat in self.categories.values_mut() {
            cat.weight = cat.explicit_weight.unwrap_or_else(|| {
                if max_depth == 0 {
                    0.0
                } else {
                    cat.path.depth() as f64 / max_depth as f64
                }
            });
        }
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Taxonomy, TaxonomyError> {
        let mut taxonomy = Taxonomy {
            categories: BTreeMap::new(),
            max_depth: 0,
        };
        let mut listed = BTreeSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() > 3 {
                return Err(TaxonomyError::Malformed {
                    line: idx + 1,
                    reason: format!("expected at most 3 tab-separated columns, found {}", cols.len()),
                });
            }
            let path = CategoryPath::parse(cols[0])?;
            if !listed.insert(path.clone()) {
                return Err(TaxonomyError::DuplicatePath(path.0));
            }
            let keywords = cols.get(1).map(|k| parse_keywords(k)).unwrap_or_default();
            let weight = match cols.get(2).map(|w| w.trim()).filter(|w| !w.is_empty()) {
                Some(w) => Some(w.parse::<f64>().map_err(|_| TaxonomyError::BadWeight {
                    path: path.0.clone(),
                    weight: w.to_string(),
                })?),
                None => None,
            };
            taxonomy.upsert(&path, keywords, weight)?;
        }
        if taxonomy.categories.is_empty() {
            return Err(TaxonomyError::EmptyFile);
        }
        taxonomy.refresh();
        Ok(taxonomy)
    }

    pub fn load(path: &Path) -> Result<Taxonomy, TaxonomyError> {
        let file = std::fs::File::open(path)?;
        Taxonomy::from_reader(std::io::BufReader::new(file))
    }

    /// Serializes in depth-first order. Keywords are sorted; only explicit
    /// weights are written.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for cat in self.categories.values() {
            out.push_str(cat.path.as_str());
            let kw = cat.keywords.iter().cloned().collect::<Vec<_>>().join(",");
            match cat.explicit_weight {
                Some(w) => {
                    out.push('\t');
                    out.push_str(&kw);
                    out.push('\t');
                    out.push_str(&w.to_string());
                }
                None if !kw.is_empty() => {
                    out.push('\t');
                    out.push_str(&kw);
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }

    /// Indented tree, one category per line.
    pub fn render_tree(&self) -> String {
        let mut out = String::new();
        for cat in self.categories.values() {
            let indent = "  ".repeat(cat.path.depth());
            out.push_str(&indent);
            out.push_str(cat.path.name());
            if !cat.keywords.is_empty() {
                let kw: Vec<&str> = cat.keywords.iter().map(String::as_str).collect();
                out.push_str(&format!(" [{}]", kw.join(", ")));
            }
            out.push_str(&format!(" (w={:.3})\n", cat.weight));
        }
        out
    }
}

fn check_weight(path: &CategoryPath, w: f64) -> Result<(), TaxonomyError> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(TaxonomyError::BadWeight {
            path: path.0.clone(),
            weight: w.to_string(),
        })
    }
}

/// Splits a comma-separated keyword list, lowercasing and dropping blanks.
pub fn parse_keywords(s: &str) -> BTreeSet<String> {
    s.split(',')
        .map(|k| k.trim().to_lowercase())
        .filter(|k| !k.is_empty())
        .collect()
}
