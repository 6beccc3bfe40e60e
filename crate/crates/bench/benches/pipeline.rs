use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use webdir_bench::{bulk_log_text, planted_vectors};
use webdir_core::{
    build_community_directory, build_graph, cluster_sites, extract_page_ref, find_communities, parse_stream,
    profile_sites, CliqueOptions, Community,
};

fn parse_and_extract(c: &mut Criterion) {
    let lines = 100_000;
    let text = bulk_log_text(lines);
    let mut group = c.benchmark_group("ingest");
    group.throughput(Throughput::Elements(lines as u64));
    group.sample_size(10);
    group.bench_function("parse+extract", |b| {
        b.iter(|| {
            let mut n = 0usize;
            for o in parse_stream(text.as_bytes()) {
                if let Ok(r) = o.unwrap().result {
                    n += extract_page_ref(&r.resource).directories.len();
                }
            }
            black_box(n)
        })
    });
    group.finish();
}

fn communities(c: &mut Criterion) {
    let mut group = c.benchmark_group("community");
    for users_per_group in [50, 200] {
        let (taxonomy, vectors) = planted_vectors(users_per_group);
        group.bench_function(format!("graph+cliques/{}", 2 * users_per_group), |b| {
            b.iter(|| {
                let g = build_graph(&vectors, 0.5);
                black_box(find_communities(&g, &CliqueOptions::default()).unwrap())
            })
        });
        let members: Vec<String> = vectors.iter().map(|v| v.user.clone()).collect();
        let community = Community::from_members(&members, &vectors);
        group.bench_function(format!("directory/{}", 2 * users_per_group), |b| {
            b.iter(|| black_box(build_community_directory(&taxonomy, &community, 0.05)))
        });
    }
    group.finish();
}

fn artificial(c: &mut Criterion) {
    let text = bulk_log_text(20_000);
    let refs: Vec<_> = parse_stream(text.as_bytes())
        .filter_map(|o| o.ok()?.result.ok())
        .map(|r| extract_page_ref(&r.resource))
        .collect();
    c.bench_function("artificial/cluster_sites", |b| {
        b.iter_batched(
            || profile_sites(&refs),
            |p| black_box(cluster_sites(&p, 0.5)),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, parse_and_extract, communities, artificial);
criterion_main!(benches);
