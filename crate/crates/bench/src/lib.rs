//! Input builders shared by the criterion benches.

use webdir_core::synth;
use webdir_core::{build_usage_vectors, parse_line, Taxonomy, UsageVector};

/// Joined synthetic log text of `lines` lines.
pub fn bulk_log_text(lines: usize) -> String {
    let mut text = synth::bulk_log(lines, 42).join("\n");
    text.push('\n');
    text
}

/// Usage vectors of the planted-community log with `users_per_group` users
/// in each of two groups.
pub fn planted_vectors(users_per_group: usize) -> (Taxonomy, Vec<UsageVector>) {
    let planted = synth::planted_communities(2, users_per_group, 42);
    let taxonomy = Taxonomy::from_reader(planted.taxonomy.as_bytes()).expect("generated taxonomy");
    let records: Vec<_> = planted.lines.iter().filter_map(|l| parse_line(l).ok()).collect();
    let vectors = build_usage_vectors(&records, &taxonomy);
    (taxonomy, vectors)
}
