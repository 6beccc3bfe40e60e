//! Seeded generators for synthetic access logs: random valid lines, bulk
//! traffic for throughput runs, and logs with planted user communities.

use chrono::{DateTime, Duration, FixedOffset, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::log_ingest::format_clf_date;
use crate::taxonomy::CategoryPath;

const METHODS: [&str; 6] = ["GET", "POST", "HEAD", "PUT", "DELETE", "OPTIONS"];
const SEGMENT_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-._~%";
const NAME_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_.";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<R: Rng>(rng: &mut R, chars: &[u8], len: std::ops::Range<usize>) -> String {
    let len = rng.gen_range(len);
    (0..len)
        .map(|_| chars[rng.gen_range(0..chars.len())] as char)
        .collect()
}

pub fn random_timestamp<R: Rng>(rng: &mut R) -> DateTime<FixedOffset> {
    let secs = rng.gen_range(631_152_000i64..1_893_456_000); // 1990..2030
    let quarter_hours = rng.gen_range(-48i32..=56);
    let offset = FixedOffset::east_opt(quarter_hours * 15 * 60).expect("offset in range");
    Utc.timestamp_opt(secs, 0)
        .single()
        .expect("valid instant")
        .with_timezone(&offset)
}

/// One syntactically valid Common Log Format line with random fields.
pub fn random_clf_line<R: Rng>(rng: &mut R) -> String {
    let host = if rng.gen_bool(0.5) {
        format!(
            "{}.{}.{}.{}",
            rng.gen::<u8>(),
            rng.gen::<u8>(),
            rng.gen::<u8>(),
            rng.gen::<u8>()
        )
    } else {
        format!(
            "{}.example.net",
            pick(rng, b"abcdefghijklmnopqrstuvwxyz0123456789-", 1..10)
        )
    };
    let optional = |rng: &mut R| {
        if rng.gen_bool(0.5) {
            "-".to_string()
        } else {
            pick(rng, NAME_CHARS, 1..10)
        }
    };
    let ident = optional(rng);
    let authuser = optional(rng);
    let mut resource = String::new();
    for _ in 0..rng.gen_range(1..6) {
        resource.push('/');
        resource.push_str(&pick(rng, SEGMENT_CHARS, 0..12));
    }
    if rng.gen_bool(0.3) {
        resource.push('?');
        resource.push_str(&pick(rng, b"abc=&123+%", 1..20));
    }
    let method = METHODS[rng.gen_range(0..METHODS.len())];
    let protocol = if rng.gen_bool(0.5) { "HTTP/1.0" } else { "HTTP/1.1" };
    let status = rng.gen_range(100..=599);
    let bytes = match rng.gen_range(0..4) {
        0 => "-".to_string(),
        1 => rng.gen::<u64>().to_string(),
        _ => rng.gen_range(0..100_000u64).to_string(),
    };
    format!(
        "{host} {ident} {authuser} [{}] \"{method} {resource} {protocol}\" {status} {bytes}",
        format_clf_date(&random_timestamp(rng))
    )
}

/// Proxy-style traffic over a fixed pool of sites, for throughput runs.
pub fn bulk_log(lines: usize, seed: u64) -> Vec<String> {
    let mut rng = rng(seed);
    let base = FixedOffset::west_opt(7 * 3600)
        .unwrap()
        .with_ymd_and_hms(2000, 10, 10, 0, 0, 0)
        .unwrap();
    let sites: Vec<String> = (0..200).map(|i| format!("www.site{i}.com")).collect();
    (0..lines)
        .map(|i| {
            let ts = base + Duration::seconds(i as i64 / 10);
            let site = &sites[rng.gen_range(0..sites.len())];
            let query = if rng.gen_bool(0.3) { "?q=term&lang=en" } else { "" };
            format!(
                "10.0.{}.{} - - [{}] \"GET /{site}/section{}/page{}.html{query} HTTP/1.0\" 200 {}",
                rng.gen_range(0..4),
                rng.gen_range(1..255),
                format_clf_date(&ts),
                rng.gen_range(0..20),
                rng.gen_range(0..100),
                rng.gen_range(200..20_000),
            )
        })
        .collect()
}

/// A log whose users fall into groups with disjoint interests.
#[derive(Debug, Clone)]
pub struct PlantedLog {
    /// Taxonomy file contents.
    pub taxonomy: String,
    pub taxonomy_size: usize,
    /// Log lines, users interleaved.
    pub lines: Vec<String>,
    /// User ids per group, sorted.
    pub groups: Vec<Vec<String>>,
    /// Leaf categories each group is confined to.
    pub group_leaves: Vec<Vec<CategoryPath>>,
}

/// Builds a 50-category taxonomy (root, 7 sections, 42 leaves) and a log in
/// which each of `groups` groups of `users_per_group` users only visits its
/// own 5 leaves.
pub fn planted_communities(groups: usize, users_per_group: usize, seed: u64) -> PlantedLog {
    const SECTIONS: usize = 7;
    const LEAVES_PER_SECTION: usize = 6;
    const LEAVES_PER_GROUP: usize = 5;
    assert!(groups * LEAVES_PER_GROUP <= SECTIONS * LEAVES_PER_SECTION);

    let mut rng = rng(seed);
    let mut taxonomy = String::from("Top\n");
    let mut leaves = Vec::new();
    for s in 0..SECTIONS {
        taxonomy.push_str(&format!("Top/Section{s}\n"));
        for l in 0..LEAVES_PER_SECTION {
            let idx = s * LEAVES_PER_SECTION + l;
            taxonomy.push_str(&format!("Top/Section{s}/Topic{idx}\ttopic{idx}\n"));
            leaves.push(idx);
        }
    }
    let taxonomy_size = 1 + SECTIONS + SECTIONS * LEAVES_PER_SECTION;

    leaves.shuffle(&mut rng);
    let leaf_path = |idx: usize| {
        CategoryPath::parse(&format!("Top/Section{}/Topic{idx}", idx / LEAVES_PER_SECTION)).unwrap()
    };
    let base = FixedOffset::west_opt(7 * 3600)
        .unwrap()
        .with_ymd_and_hms(2000, 10, 10, 0, 0, 0)
        .unwrap();

    let mut lines = Vec::new();
    let mut group_users = Vec::new();
    let mut group_leaves = Vec::new();
    for g in 0..groups {
        let mine: Vec<usize> = leaves[g * LEAVES_PER_GROUP..(g + 1) * LEAVES_PER_GROUP].to_vec();
        let mut users = Vec::new();
        for u in 0..users_per_group {
            let host = format!("10.{g}.{}.{}", u / 250, u % 250 + 1);
            for &leaf in &mine {
                for k in 0..rng.gen_range(8..=12) {
                    let ts = base + Duration::seconds(rng.gen_range(0..86_400));
                    lines.push(format!(
                        "{host} - - [{}] \"GET /www.site{leaf}.com/topic{leaf}/page{k}.html HTTP/1.0\" 200 {}",
                        format_clf_date(&ts),
                        rng.gen_range(100..10_000),
                    ));
                }
            }
            users.push(host);
        }
        users.sort();
        group_users.push(users);
        let mut paths: Vec<CategoryPath> = mine.into_iter().map(leaf_path).collect();
        paths.sort();
        group_leaves.push(paths);
    }
    lines.shuffle(&mut rng);
    PlantedLog {
        taxonomy,
        taxonomy_size,
        lines,
        groups: group_users,
        group_leaves,
    }
}
