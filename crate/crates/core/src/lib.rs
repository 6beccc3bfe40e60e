//! Community web directories from proxy access logs.
//!
//! The pipeline reads Common Log Format lines ([`log_ingest`]), turns each
//! requested resource into a site/directory/page reference ([`url_extract`]),
//! files pages under a keyword taxonomy ([`taxonomy`], [`classify`]), groups
//! users with similar interests into communities ([`community`]) and prunes
//! the taxonomy down to what each community actually uses. When no curated
//! taxonomy exists, [`artificial`] builds one by clustering the observed
//! sites. [`metrics`] summarizes how much each pruned directory saves.

pub mod artificial;
pub mod classify;
pub mod community;
pub mod log_ingest;
pub mod metrics;
pub mod synth;
pub mod taxonomy;
pub mod url_extract;

pub use artificial::{build_artificial_directory, cluster_sites, profile_sites, Partition, SiteProfile};
pub use classify::{build_usage_vectors, classify_page, Bucket, Counts, UsageVector};
pub use community::{
    build_community_directory, build_graph, find_communities, score_category, similarity, CliqueOptions,
    Community, CommunityDirectory, CommunityError, SimilarityGraph,
};
pub use log_ingest::{
    filter_records, parse_line, parse_stream, FilterPolicy, LogRecord, ParseError, ParseErrorKind,
    ParseOutcome, StreamError,
};
pub use metrics::{coverage, report, shrinkage, Report};
pub use taxonomy::{ancestors, Category, CategoryPath, Taxonomy, TaxonomyError};
pub use url_extract::{extract_page_ref, strip_query, tokenize, PageRef, Site};
