//! End-to-end runs of the `webdir` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use webdir_core::synth;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn webdir<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_webdir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn planted(dir: &Path) -> (PathBuf, PathBuf) {
    let p = synth::planted_communities(2, 10, 3);
    let log = dir.join("planted.log");
    let tax = dir.join("planted.tsv");
    fs::write(&log, p.lines.join("\n")).unwrap();
    fs::write(&tax, &p.taxonomy).unwrap();
    (log, tax)
}

#[test]
fn parse_fixture() {
    let o = webdir([Path::new("parse"), &fixture("isp_sample.log")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 13);
    assert!(stderr(&o).contains("13 lines: 13 records, 0 errors"));
}

#[test]
fn parse_writes_records_that_reload() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("records.tsv");
    let o = webdir([
        Path::new("parse"),
        &fixture("isp_sample.log"),
        Path::new("--out"),
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "13 lines: 13 records, 0 errors");
    let a = webdir([Path::new("sites"), &out]);
    let b = webdir([Path::new("sites"), &fixture("isp_sample.log")]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn parse_reports_garbage_line() {
    let tmp = TempDir::new().unwrap();
    let mut lines: Vec<String> = fs::read_to_string(fixture("isp_sample.log"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    lines.insert(5, "not a log line".into());
    let log = tmp.path().join("bad.log");
    fs::write(&log, lines.join("\n")).unwrap();
    let o = webdir([Path::new("parse"), &log]);
    assert!(o.status.success());
    let err = stderr(&o);
    assert!(
        err.contains("14 lines: 13 records, 1 error (FieldCountMismatch)"),
        "{err}"
    );
    assert!(err.contains("line 6: "), "{err}");
}

#[test]
fn parse_empty_log_exits_2() {
    let tmp = TempDir::new().unwrap();
    let log = tmp.path().join("empty.log");
    fs::write(&log, "").unwrap();
    assert_eq!(webdir([Path::new("parse"), &log]).status.code(), Some(2));
    fs::write(&log, "garbage\nmore garbage\n").unwrap();
    assert_eq!(webdir([Path::new("parse"), &log]).status.code(), Some(2));
}

#[test]
fn missing_file_is_usage_error() {
    let o = webdir(["parse", "/definitely/not/here.log"]);
    assert_eq!(o.status.code(), Some(1));
    let o = webdir(["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(webdir(["--help"]).status.success());
}

#[test]
fn sites_matches_golden() {
    let o = webdir([Path::new("sites"), &fixture("isp_sample.log")]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        fs::read_to_string(fixture("isp_sample_sites.txt")).unwrap()
    );
}

#[test]
fn sites_lists_directories() {
    let o = webdir([
        Path::new("sites"),
        &fixture("isp_sample.log"),
        Path::new("--dirs"),
    ]);
    let out = stdout(&o);
    assert!(out.contains("8 directories\n"), "{out}");
    assert!(out.contains("www.w3schools.com\txml\t3\n"));
    assert!(out.contains("www.google.co.in\t/\t3\n"));
}

#[test]
fn sites_all_local() {
    let tmp = TempDir::new().unwrap();
    let log = tmp.path().join("local.log");
    fs::write(
        &log,
        "1.2.3.4 - - [10/Oct/2000:13:55:36 -0700] \"GET /index HTTP/1.0\" 200 5\n\
         1.2.3.4 - - [10/Oct/2000:13:55:37 -0700] \"GET /img/a.gif HTTP/1.0\" 200 5\n",
    )
    .unwrap();
    let o = webdir([Path::new("sites"), &log]);
    assert_eq!(stdout(&o), "0 sites, 2 local\n");
}

#[test]
fn sites_policy_filters() {
    let o = webdir([
        Path::new("sites"),
        &fixture("isp_sample.log"),
        Path::new("--policy-methods"),
        Path::new("POST"),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0 sites, 0 local\n");
    let o = webdir([
        Path::new("sites"),
        &fixture("isp_sample.log"),
        Path::new("--policy-status"),
        Path::new("7"),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cluster_single_user_has_no_community() {
    let tmp = TempDir::new().unwrap();
    let o = webdir([
        Path::new("cluster"),
        &fixture("isp_sample.log"),
        Path::new("--taxonomy"),
        &fixture("taxonomy.tsv"),
        Path::new("--out"),
        tmp.path(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 communities"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["zero_communities"], true);
    assert_eq!(report["input"]["records"], 13);
    assert!(tmp.path().join("vectors.tsv").exists());
}

#[test]
fn cluster_keep_singletons() {
    let tmp = TempDir::new().unwrap();
    let o = webdir([
        Path::new("cluster"),
        &fixture("isp_sample.log"),
        Path::new("--taxonomy"),
        &fixture("taxonomy.tsv"),
        Path::new("--keep-singletons"),
        Path::new("--out"),
        tmp.path(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(tmp.path().join("community-001.txt")).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("Top  0.000000\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("community-001.json")).unwrap()).unwrap();
    assert_eq!(json["members"][0], "frank@127.0.0.1");
    assert_eq!(json["tree"]["path"], "Top");
}

#[test]
fn cluster_planted_finds_two_communities_and_clears_stale_files() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("community-009.txt"), "stale").unwrap();
    let (log, tax) = planted(tmp.path());
    let o = webdir([
        Path::new("cluster"),
        &log,
        Path::new("--taxonomy"),
        &tax,
        Path::new("--out"),
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("2 communities"));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "community-001.json",
            "community-001.txt",
            "community-002.json",
            "community-002.txt",
            "report.json",
            "report.txt",
            "vectors.tsv"
        ]
    );
}

#[test]
fn cluster_explosion_guard_exits_3() {
    let tmp = TempDir::new().unwrap();
    let (log, tax) = planted(tmp.path());
    let o = webdir([
        Path::new("cluster"),
        &log,
        Path::new("--taxonomy"),
        &tax,
        Path::new("--max-cliques"),
        Path::new("1"),
        Path::new("--out"),
        &tmp.path().join("out"),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn cluster_artificial() {
    let tmp = TempDir::new().unwrap();
    let o = webdir([
        Path::new("cluster"),
        &fixture("isp_sample.log"),
        Path::new("--artificial"),
        Path::new("--sigma"),
        Path::new("0.9"),
        Path::new("--out"),
        tmp.path(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let tax = fs::read_to_string(tmp.path().join("artificial-taxonomy.tsv")).unwrap();
    assert_eq!(tax.lines().count(), 9);
    assert!(tax.contains("Top/Cluster-1/www.w3schools.com\tasp,catalog,default,w3schools,xml\n"));
}

#[test]
fn cluster_rejects_bad_inputs() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.tsv");
    fs::write(&bad, "Top/A\ta\t1.5\n").unwrap();
    let run = |extra: &[&str], tax: &Path| {
        let mut args: Vec<std::ffi::OsString> = vec![
            "cluster".into(),
            fixture("isp_sample.log").into(),
            "--taxonomy".into(),
            tax.into(),
        ];
        args.extend(extra.iter().map(Into::into));
        args.push("--out".into());
        args.push(tmp.path().join("out").into());
        webdir(args)
    };
    let o = run(&[], &bad);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("weight"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
    assert_eq!(
        run(&["--tau", "1.5"], &fixture("taxonomy.tsv")).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["--min-size", "0"], &fixture("taxonomy.tsv")).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["--artificial"], &fixture("taxonomy.tsv")).status.code(),
        Some(1)
    );
}

#[test]
fn taxonomy_add_update_show() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("t.tsv");
    let o = webdir([
        Path::new("taxonomy"),
        Path::new("add"),
        &file,
        Path::new("Top/Computers/XML"),
        Path::new("--keywords"),
        Path::new("xml,xsl"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "added Top/Computers/XML (3 categories)\n");

    let o = webdir([
        Path::new("taxonomy"),
        Path::new("add"),
        &file,
        Path::new("Top/Computers/XML"),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = webdir([
        Path::new("taxonomy"),
        Path::new("update"),
        &file,
        Path::new("Top/Computers/XML"),
        Path::new("--weight"),
        Path::new("0.25"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&file).unwrap();
    assert!(text.contains("Top/Computers/XML\txml,xsl\t0.25"), "{text}");

    let o = webdir([
        Path::new("taxonomy"),
        Path::new("update"),
        &file,
        Path::new("Top/Nope"),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = webdir([
        Path::new("taxonomy"),
        Path::new("update"),
        &file,
        Path::new("Top/Computers/XML"),
        Path::new("--weight"),
        Path::new("2"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_to_string(&file).unwrap(), text);

    let o = webdir([Path::new("taxonomy"), Path::new("show"), &file]);
    assert_eq!(
        stdout(&o),
        "Top (w=0.000)\n  Computers (w=0.500)\n    XML [xml, xsl] (w=0.250)\n"
    );
}
