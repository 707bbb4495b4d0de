//! Fetching from the fixture server and loading the resulting dumps.

mod support;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use proptest::prelude::*;
use repoecg::ingest::{fetch_records, fetch_repo, load_dump, ApiClient, ClientConfig, RecordKind};
use repoecg::Error;
use repoecg_core::ParentKind;
use serde_json::{json, Value};
use support::*;

fn client(server: &FixtureServer, page_size: u32, token: Option<&str>) -> ApiClient {
    ApiClient::new(ClientConfig {
        api_base_url: server.base_url.clone(),
        token: token.map(str::to_string),
        page_size,
        concurrency: 4,
        max_wait: Duration::from_secs(1),
    })
    .unwrap()
}

fn record_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    RecordKind::ALL
        .iter()
        .map(|k| (k.file_name().to_string(), fs::read(dir.join(k.file_name())).unwrap()))
        .collect()
}

fn counts(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn alpha_round_trip() {
    let server = FixtureServer::alpha(ServerOptions::default());
    let c = client(&server, 100, None);
    let tmp = tempfile::tempdir().unwrap();
    let served = fetch_records(&c, ALPHA, &RecordKind::ALL, 4).unwrap();
    let manifest = fetch_repo(&c, ALPHA, &RecordKind::ALL, tmp.path(), 4).unwrap();
    assert_eq!(
        manifest.record_counts,
        counts(&[("issue", 10), ("pull", 5), ("comment", 21), ("profile", 6)])
    );
    assert_eq!(manifest.repo_slug, ALPHA);
    assert_eq!(manifest.api_base_url, server.base_url);

    let loaded = load_dump(tmp.path()).unwrap();
    assert_eq!(loaded.malformed, 0);
    assert_eq!(loaded.records, served);

    // Offsets are normalized to UTC: 2021-04-01T01:30:00+02:00.
    let late = loaded.records.issues.iter().find(|i| i.number == 14).unwrap();
    assert_eq!(late.created_at, 1_617_233_400);
    // Conversation comments on a PR and inline review comments keep
    // distinct parent kinds.
    let kind = |id| {
        loaded
            .records
            .comments
            .iter()
            .find(|c| c.comment_id == id)
            .unwrap()
            .parent_kind
    };
    assert_eq!(kind(110), ParentKind::Pull);
    assert_eq!(kind(201), ParentKind::Review);
    assert_eq!(kind(101), ParentKind::Issue);
    let merged: Vec<_> = loaded
        .records
        .pulls
        .iter()
        .map(|p| (p.number, p.merged_at.is_some()))
        .collect();
    assert_eq!(merged, [(3, true), (6, true), (9, false), (12, true), (15, false)]);
    let bot = loaded
        .records
        .profiles
        .iter()
        .find(|p| p.login == "helper-bot")
        .unwrap();
    assert_eq!(format!("{:?}", bot.account_type), "Bot");
}

#[test]
fn refetch_is_byte_identical() {
    let server = FixtureServer::alpha(ServerOptions::default());
    let c = client(&server, 7, None);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    fetch_repo(&c, ALPHA, &RecordKind::ALL, a.path(), 4).unwrap();
    fetch_repo(&c, ALPHA, &RecordKind::ALL, b.path(), 4).unwrap();
    assert_eq!(record_files(a.path()), record_files(b.path()));
}

#[test]
fn empty_repo_gives_zero_counts_and_empty_files() {
    let server = FixtureServer::start(
        BTreeMap::from([("fixture/empty".to_string(), RepoData::default())]),
        BTreeMap::new(),
        ServerOptions::default(),
    );
    let tmp = tempfile::tempdir().unwrap();
    let m = fetch_repo(
        &client(&server, 100, None),
        "fixture/empty",
        &RecordKind::ALL,
        tmp.path(),
        4,
    )
    .unwrap();
    assert_eq!(
        m.record_counts,
        counts(&[("issue", 0), ("pull", 0), ("comment", 0), ("profile", 0)])
    );
    for (_, bytes) in record_files(tmp.path()) {
        assert!(bytes.is_empty());
    }
    assert_eq!(load_dump(tmp.path()).unwrap().records, Default::default());
}

#[test]
fn interrupted_fetch_leaves_no_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = FixtureServer::alpha(ServerOptions::default());
    fetch_repo(&client(&ok, 100, None), ALPHA, &RecordKind::ALL, tmp.path(), 4).unwrap();
    assert!(load_dump(tmp.path()).is_ok());

    // The repo lookup and two issue pages succeed, then the server fails.
    let broken = FixtureServer::alpha(ServerOptions {
        fail_after: Some(3),
        omit_last: true,
        ..Default::default()
    });
    let err = fetch_repo(&client(&broken, 4, None), ALPHA, &RecordKind::ALL, tmp.path(), 4).unwrap_err();
    assert!(matches!(err, Error::Network(_)), "{err:?}");
    assert!(!tmp.path().join("manifest.json").exists());
    let err = load_dump(tmp.path()).unwrap_err();
    assert!(matches!(err, Error::PartialFetch(_)), "{err:?}");
    assert_eq!(err.exit_code(), 6);
}

fn issue(n: u64, login: &str, created: &str) -> Value {
    json!({
        "id": 5000 + n, "number": n, "title": format!("t{n}"), "user": { "login": login, "type": "User" },
        "author_association": "NONE", "created_at": created, "closed_at": null, "labels": [], "body": "b",
    })
}

fn comment(id: u64, parent: u64, login: &str, created: &str) -> Value {
    json!({
        "id": id, "issue_url": format!("https://api.example.test/repos/o/two/issues/{parent}"),
        "user": { "login": login, "type": "User" }, "author_association": "NONE",
        "created_at": created, "body": "c",
    })
}

#[test]
fn two_issues_and_three_comments() {
    let repo = RepoData {
        issues: vec![
            issue(1, "ann", "2022-05-01T00:00:00Z"),
            issue(2, "ben", "2022-05-02T00:00:00Z"),
        ],
        issue_comments: vec![
            comment(1, 1, "ben", "2022-05-01T01:00:00Z"),
            comment(2, 1, "ann", "2022-05-01T02:00:00Z"),
            comment(3, 2, "ann", "2022-05-02T03:00:00Z"),
        ],
        ..Default::default()
    };
    let server = FixtureServer::start(
        BTreeMap::from([("o/two".to_string(), repo)]),
        BTreeMap::new(),
        ServerOptions::default(),
    );
    let tmp = tempfile::tempdir().unwrap();
    let m = fetch_repo(&client(&server, 2, None), "o/two", &RecordKind::ALL, tmp.path(), 4).unwrap();
    assert_eq!(m.record_counts["issue"], 2);
    assert_eq!(m.record_counts["comment"], 3);
    assert_eq!(m.record_counts["pull"], 0);
    // Profiles 404 on this server and are skipped.
    assert_eq!(m.record_counts["profile"], 0);
}

#[test]
fn auth_and_not_found() {
    let server = FixtureServer::alpha(ServerOptions {
        require_token: Some("sekrit".into()),
        ..Default::default()
    });
    let tmp = tempfile::tempdir().unwrap();
    let err = fetch_repo(&client(&server, 100, None), ALPHA, &RecordKind::ALL, tmp.path(), 4).unwrap_err();
    assert!(matches!(err, Error::Auth(_)), "{err:?}");
    assert_eq!(err.exit_code(), 3);
    let err = fetch_repo(
        &client(&server, 100, Some("wrong")),
        ALPHA,
        &RecordKind::ALL,
        tmp.path(),
        4,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Auth(_)));
    fetch_repo(
        &client(&server, 100, Some("sekrit")),
        ALPHA,
        &RecordKind::ALL,
        tmp.path(),
        4,
    )
    .unwrap();

    let err = fetch_repo(
        &client(&server, 100, Some("sekrit")),
        "nobody/here",
        &RecordKind::ALL,
        tmp.path(),
        4,
    )
    .unwrap_err();
    assert!(matches!(err, Error::NotFound(_)), "{err:?}");
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn rate_limits_are_retried_then_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let brief = FixtureServer::alpha(ServerOptions {
        rate_limit_first: 3,
        ..Default::default()
    });
    fetch_repo(&client(&brief, 100, None), ALPHA, &RecordKind::ALL, tmp.path(), 1).unwrap();

    let endless = FixtureServer::alpha(ServerOptions {
        rate_limit_first: usize::MAX,
        ..Default::default()
    });
    let err = fetch_repo(&client(&endless, 100, None), ALPHA, &RecordKind::ALL, tmp.path(), 1).unwrap_err();
    assert!(matches!(err, Error::RateLimited(_)), "{err:?}");
    assert_eq!(err.exit_code(), 4);
    // One request plus three retries.
    assert_eq!(endless.requests(), 4);
}

#[test]
fn parallel_and_sequential_paging_agree() {
    let with_last = FixtureServer::alpha(ServerOptions::default());
    let next_only = FixtureServer::alpha(ServerOptions {
        omit_last: true,
        ..Default::default()
    });
    let a = fetch_records(&client(&with_last, 3, None), ALPHA, &RecordKind::ALL, 4).unwrap();
    let b = fetch_records(&client(&next_only, 3, None), ALPHA, &RecordKind::ALL, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.issues.len(), 10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Round trip through a dump yields the served records whatever the
    /// page size, and the record files do not depend on it either.
    #[test]
    fn round_trip_is_page_size_independent(page_size in 1u32..=25, omit_last in any::<bool>()) {
        let server = FixtureServer::alpha(ServerOptions { omit_last, ..Default::default() });
        let base = tempfile::tempdir().unwrap();
        fetch_repo(&client(&server, 100, None), ALPHA, &RecordKind::ALL, base.path(), 4).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        fetch_repo(&client(&server, page_size, None), ALPHA, &RecordKind::ALL, tmp.path(), 4).unwrap();
        prop_assert_eq!(load_dump(tmp.path()).unwrap().records, load_dump(base.path()).unwrap().records);
        prop_assert_eq!(record_files(tmp.path()), record_files(base.path()));
    }
}
