//! The alpha fixture mined from the fixture server and the scripted git
//! repository must reproduce the independently computed golden CSV.

mod support;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use support::*;

/// Ceiling for the `metrics` stage on the fixture.
const METRICS_BUDGET: Duration = Duration::from_secs(5);

fn mined_workspace(tmp: &Path, server: &FixtureServer) -> std::path::PathBuf {
    let clone = tmp.join("clone");
    build_git_repo(&clone);
    let config = write_config(
        tmp,
        &server.base_url,
        &[Project {
            slug: ALPHA,
            clone: Some(&clone),
        }],
        "",
    );
    let out = run(&config, &["mine", ALPHA], Some("t"));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    config
}

fn monthly(tmp: &Path) -> String {
    fs::read_to_string(tmp.join("data/fixture__alpha/monthly.csv")).unwrap()
}

#[test]
fn alpha_monthly_matches_golden_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let server = FixtureServer::alpha(ServerOptions::default());
    let config = mined_workspace(tmp.path(), &server);

    let start = Instant::now();
    let out = run(&config, &["metrics", ALPHA], None);
    let took = start.elapsed();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let first = monthly(tmp.path());

    let want = fs::read_to_string(alpha_dir().join("golden_monthly.csv")).unwrap();
    let diffs = csv_diff(&first, &want);
    assert!(
        diffs.is_empty(),
        "monthly.csv differs from golden:\n{}",
        diffs.join("\n")
    );
    assert!(took < METRICS_BUDGET, "metrics took {took:?}");

    let out = run(&config, &["metrics", ALPHA], None);
    assert_eq!(code(&out), 0);
    assert_eq!(monthly(tmp.path()), first, "rerun changed monthly.csv");
}

#[test]
fn remining_gives_identical_metrics() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let server = FixtureServer::alpha(ServerOptions::default());
    for dir in [a.path(), b.path()] {
        let config = mined_workspace(dir, &server);
        assert_eq!(code(&run(&config, &["metrics", ALPHA], None)), 0);
    }
    assert_eq!(monthly(a.path()), monthly(b.path()));
}
