use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;

use anyhow::{anyhow, Context};
use serde::Serialize;
use webdir_core::artificial::{build_artificial_directory, cluster_sites, profile_sites};
use webdir_core::classify::{build_usage_vectors, usage_vectors_tsv};
use webdir_core::community::{
    build_community_directory, build_graph, find_communities, CliqueOptions, Community, CommunityDirectory,
    CommunityError,
};
use webdir_core::log_ingest::{filter_records, FilterPolicy, LogRecord};
use webdir_core::metrics::{report, Report};
use webdir_core::taxonomy::{parse_keywords, CategoryPath, Taxonomy, TaxonomyError};
use webdir_core::url_extract::{extract_page_ref, Site};

use crate::io::{load_records, remove_stale, write_atomic, Loaded};
use crate::{
    ClusterArgs, EditArgs, Failure, ParseArgs, PolicyArgs, SitesArgs, TaxonomyCommand, EXIT_EXPLOSION,
    EXIT_PARSE_EMPTY,
};

pub fn parse(args: &ParseArgs) -> Result<(), Failure> {
    let loaded = load_records(&args.log)?;
    let mut out = String::new();
    for r in &loaded.records {
        out.push_str(&r.to_tsv());
        out.push('\n');
    }
    let summary = format!("{} lines: {}", loaded.lines, loaded.summary());
    for (line, kind) in &loaded.samples {
        eprintln!("line {line}: {kind}");
    }
    match &args.out {
        Some(path) => {
            write_atomic(path, out.as_bytes())?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(out.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    if loaded.records.is_empty() {
        return Err(Failure {
            code: EXIT_PARSE_EMPTY,
            error: anyhow!("no records parsed from {}", args.log.display()),
        });
    }
    Ok(())
}

fn policy(args: &PolicyArgs) -> Result<FilterPolicy, Failure> {
    let methods: BTreeSet<String> = args
        .policy_methods
        .iter()
        .map(|m| m.trim().to_ascii_uppercase())
        .filter(|m| !m.is_empty())
        .collect();
    let mut status_classes = BTreeSet::new();
    for s in &args.policy_status {
        let s = s.trim().to_ascii_lowercase();
        let digit = s.strip_suffix("xx").unwrap_or(&s);
        match digit.parse::<u16>() {
            Ok(c @ 1..=5) => {
                status_classes.insert(c);
            }
            _ => {
                return Err(Failure::usage(anyhow!(
                    "invalid status class {s:?}; expected 1-5 or 1xx-5xx"
                )))
            }
        }
    }
    Ok(FilterPolicy {
        methods,
        status_classes,
    })
}

fn load_filtered(
    input: &std::path::Path,
    policy: &FilterPolicy,
) -> Result<(Loaded, Vec<LogRecord>), Failure> {
    let mut loaded = load_records(input)?;
    if loaded.records.is_empty() {
        return Err(Failure {
            code: EXIT_PARSE_EMPTY,
            error: anyhow!("no records in {}", input.display()),
        });
    }
    let records = filter_records(std::mem::take(&mut loaded.records), policy);
    Ok((loaded, records))
}

fn by_hits_then_name<K: Ord + Clone>(counts: BTreeMap<K, u64>) -> Vec<(K, u64)> {
    let mut v: Vec<(K, u64)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

pub fn sites(args: &SitesArgs) -> Result<(), Failure> {
    let policy = policy(&args.policy)?;
    let (_, records) = load_filtered(&args.input, &policy)?;
    let mut sites: BTreeMap<String, u64> = BTreeMap::new();
    let mut dirs: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut local = 0u64;
    for r in &records {
        let page = extract_page_ref(&r.resource);
        match &page.site {
            Site::Host(host) => {
                *sites.entry(host.clone()).or_default() += 1;
                *dirs.entry((host.clone(), page.directory_path())).or_default() += 1;
            }
            Site::Local => local += 1,
        }
    }
    let mut out = format!(
        "{} {}, {} local\n",
        sites.len(),
        if sites.len() == 1 { "site" } else { "sites" },
        local
    );
    for (site, hits) in by_hits_then_name(sites) {
        out.push_str(&format!("{site}\t{hits}\n"));
    }
    if args.dirs {
        out.push_str(&format!("{} directories\n", dirs.len()));
        for ((site, dir), hits) in by_hits_then_name(dirs) {
            out.push_str(&format!("{site}\t{dir}\t{hits}\n"));
        }
    }
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct Parameters {
    taxonomy: &'static str,
    sigma: Option<f64>,
    tau: f64,
    theta: f64,
    min_size: usize,
    keep_singletons: bool,
    max_cliques: usize,
    policy_methods: BTreeSet<String>,
    policy_status_classes: BTreeSet<u16>,
}

#[derive(Serialize)]
struct InputSummary {
    lines: usize,
    records: usize,
    parse_errors: usize,
    mined_records: usize,
}

#[derive(Serialize)]
struct ClusterReport<'a> {
    parameters: Parameters,
    input: InputSummary,
    #[serde(flatten)]
    report: &'a Report,
}

fn check_unit(name: &str, v: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Failure::usage(anyhow!("--{name} must be in [0, 1], got {v}")))
    }
}

pub fn cluster(args: &ClusterArgs) -> Result<(), Failure> {
    check_unit("tau", args.tau)?;
    check_unit("theta", args.theta)?;
    check_unit("sigma", args.sigma)?;
    if args.min_size == 0 {
        return Err(Failure::usage(anyhow!("--min-size must be at least 1")));
    }
    let policy = policy(&args.policy)?;
    // Validate the taxonomy before touching the log.
    let curated = match &args.taxonomy {
        Some(path) => {
            Some(Taxonomy::load(path).with_context(|| format!("invalid taxonomy {}", path.display()))?)
        }
        None => None,
    };
    let (loaded, records) = load_filtered(&args.input, &policy)?;

    let taxonomy = match curated {
        Some(t) => t,
        None => {
            let pages: Vec<_> = records.iter().map(|r| extract_page_ref(&r.resource)).collect();
            let profiles = profile_sites(&pages);
            build_artificial_directory(&cluster_sites(&profiles, args.sigma), &profiles)
        }
    };

    let vectors = build_usage_vectors(&records, &taxonomy);
    let graph = build_graph(&vectors, args.tau);
    let opts = CliqueOptions {
        min_size: args.min_size,
        keep_singletons: args.keep_singletons,
        max_cliques: args.max_cliques,
    };
    let communities = find_communities(&graph, &opts).map_err(|e| match e {
        CommunityError::ExplosionGuard { .. } => Failure {
            code: EXIT_EXPLOSION,
            error: e.into(),
        },
    })?;
    let dirs: Vec<CommunityDirectory> = communities
        .iter()
        .map(|members| {
            build_community_directory(&taxonomy, &Community::from_members(members, &vectors), args.theta)
        })
        .collect();
    let summary = report(&taxonomy, &dirs, &vectors);

    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    remove_stale(&args.out, "community-")?;
    let width = dirs.len().to_string().len().max(3);
    for (i, dir) in dirs.iter().enumerate() {
        let stem = format!("community-{:0width$}", i + 1);
        write_atomic(
            &args.out.join(format!("{stem}.txt")),
            dir.render_text().as_bytes(),
        )?;
        write_atomic(&args.out.join(format!("{stem}.json")), dir.to_json().as_bytes())?;
    }
    if args.artificial {
        write_atomic(
            &args.out.join("artificial-taxonomy.tsv"),
            taxonomy.to_file_string().as_bytes(),
        )?;
    }
    write_atomic(
        &args.out.join("vectors.tsv"),
        usage_vectors_tsv(&vectors).as_bytes(),
    )?;

    let doc = ClusterReport {
        parameters: Parameters {
            taxonomy: if args.artificial { "artificial" } else { "file" },
            sigma: args.artificial.then_some(args.sigma),
            tau: args.tau,
            theta: args.theta,
            min_size: args.min_size,
            keep_singletons: args.keep_singletons,
            max_cliques: args.max_cliques,
            policy_methods: policy.methods.clone(),
            policy_status_classes: policy.status_classes.clone(),
        },
        input: InputSummary {
            lines: loaded.lines,
            records: loaded.lines - loaded.error_count(),
            parse_errors: loaded.error_count(),
            mined_records: records.len(),
        },
        report: &summary,
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    write_atomic(&args.out.join("report.json"), json.as_bytes())?;
    let table = summary.to_string();
    write_atomic(&args.out.join("report.txt"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

pub fn taxonomy(cmd: &TaxonomyCommand) -> Result<(), Failure> {
    match cmd {
        TaxonomyCommand::Show { file } => {
            let t = Taxonomy::load(file).with_context(|| format!("invalid taxonomy {}", file.display()))?;
            print!("{}", t.render_tree());
            Ok(())
        }
        TaxonomyCommand::Add(args) => edit(args, true),
        TaxonomyCommand::Update(args) => edit(args, false),
    }
}

fn edit(args: &EditArgs, adding: bool) -> Result<(), Failure> {
    let path = CategoryPath::parse(&args.path)?;
    let current = if adding && !args.file.exists() {
        Taxonomy::root_only()
    } else {
        Taxonomy::load(&args.file).with_context(|| format!("invalid taxonomy {}", args.file.display()))?
    };
    let existing = current.get(&path);
    let (keywords, weight) = match (adding, existing) {
        (true, Some(_)) if !path.is_root() => {
            return Err(TaxonomyError::DuplicatePath(path.to_string()).into())
        }
        (false, None) => return Err(TaxonomyError::UnknownPath(path.to_string()).into()),
        (_, existing) => {
            let keywords = match &args.keywords {
                Some(k) => parse_keywords(k),
                None => existing.map(|c| c.keywords.clone()).unwrap_or_default(),
            };
            let weight = if args.default_weight {
                None
            } else {
                args.weight.or_else(|| existing.and_then(|c| c.explicit_weight))
            };
            (keywords, weight)
        }
    };
    let next = current.add_or_update_category(&path, keywords, weight)?;
    write_atomic(&args.file, next.to_file_string().as_bytes())?;
    println!(
        "{} {} ({} categories)",
        if adding { "added" } else { "updated" },
        path,
        next.len()
    );
    Ok(())
}
