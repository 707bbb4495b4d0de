//! Fetch repository activity from a GitHub-compatible REST API into dumps.

pub mod api;
pub mod client;
pub mod dump;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};
use repoecg_core::{IssueRecord, RecordSet, UserProfile};

pub use client::{ApiClient, ClientConfig};
pub use dump::{load_dump, write_dump, DumpManifest, LoadedDump, RecordKind};

use crate::config::check_slug;
use crate::error::{Error, Result};

/// Run `f` over `items` on up to `workers` threads, keeping input order.
/// The first error wins.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    workers: usize,
    f: impl Fn(&T) -> Result<R> + Sync,
) -> Result<Vec<R>> {
    let slots: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let cursor = AtomicUsize::new(0);
    thread::scope(|s| {
        for _ in 0..workers.max(1).min(items.len()) {
            s.spawn(|| loop {
                if failure.lock().unwrap().is_some() {
                    return;
                }
                let i = cursor.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { return };
                match f(item) {
                    Ok(r) => slots.lock().unwrap()[i] = Some(r),
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect())
}

fn dedup_by_number(records: &mut Vec<IssueRecord>) {
    let mut seen = BTreeSet::new();
    records.retain(|r| seen.insert(r.number));
}

/// Fetch the requested record kinds for `slug` and return them, sorted.
pub fn fetch_records(client: &ApiClient, slug: &str, kinds: &[RecordKind], workers: usize) -> Result<RecordSet> {
    check_slug(slug)?;
    let repo = format!("/repos/{slug}");
    client.get_json(&repo)?;
    let wants = |k| kinds.contains(&k);
    let mut out = RecordSet::default();

    let need_issues = wants(RecordKind::Issue) || wants(RecordKind::Pull) || wants(RecordKind::Comment);
    let mut pull_numbers = BTreeSet::new();
    if need_issues {
        let items = client.get_paged(
            &format!("{repo}/issues"),
            &[("state", "all"), ("sort", "created"), ("direction", "asc")],
        )?;
        for item in &items {
            let r = api::issue_from_api(slug, item)?;
            if r.is_pull {
                pull_numbers.insert(r.number);
                out.pulls.push(r);
            } else {
                out.issues.push(r);
            }
        }
        info!("{slug}: {} issues, {} pull requests", out.issues.len(), out.pulls.len());
    }

    if wants(RecordKind::Pull) || wants(RecordKind::Comment) {
        let items = client.get_paged(
            &format!("{repo}/pulls"),
            &[("state", "all"), ("sort", "created"), ("direction", "asc")],
        )?;
        let mut from_pulls: BTreeMap<u64, IssueRecord> = BTreeMap::new();
        for item in &items {
            let mut r = api::issue_from_api(slug, item)?;
            r.is_pull = true;
            from_pulls.insert(r.number, r);
        }
        for pr in &mut out.pulls {
            if let Some(p) = from_pulls.remove(&pr.number) {
                pr.merged_at = p.merged_at;
            }
        }
        // pull requests the issues listing did not include
        for (n, p) in from_pulls {
            pull_numbers.insert(n);
            out.pulls.push(p);
        }
    }

    if wants(RecordKind::Comment) {
        let issue_comments = client.get_paged(
            &format!("{repo}/issues/comments"),
            &[("sort", "created"), ("direction", "asc")],
        )?;
        for item in &issue_comments {
            out.comments
                .push(api::comment_from_api(slug, item, false, &pull_numbers)?);
        }
        let review_comments = client.get_paged(
            &format!("{repo}/pulls/comments"),
            &[("sort", "created"), ("direction", "asc")],
        )?;
        for item in &review_comments {
            out.comments
                .push(api::comment_from_api(slug, item, true, &pull_numbers)?);
        }
        let mut seen = BTreeSet::new();
        out.comments
            .retain(|c| seen.insert((c.parent_kind == repoecg_core::ParentKind::Review, c.comment_id)));
        info!("{slug}: {} comments", out.comments.len());
    }

    if wants(RecordKind::Profile) {
        let logins: Vec<String> = out
            .issues
            .iter()
            .chain(&out.pulls)
            .map(|r| r.author_login.clone())
            .chain(out.comments.iter().map(|c| c.author_login.clone()))
            .filter(|l| l != api::GHOST_LOGIN)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let profiles = parallel_map(&logins, workers, |login| -> Result<Option<UserProfile>> {
            match client.get_json(&format!("/users/{login}")) {
                Ok(v) => api::profile_from_api(&v).map(Some),
                Err(Error::NotFound(_)) => {
                    warn!("profile {login} not found; skipped");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })?;
        out.profiles = profiles.into_iter().flatten().collect();
    }

    if !wants(RecordKind::Issue) {
        out.issues.clear();
    }
    if !wants(RecordKind::Pull) {
        out.pulls.clear();
    }
    dedup_by_number(&mut out.issues);
    dedup_by_number(&mut out.pulls);
    out.sort_canonical();
    Ok(out)
}

/// Fetch and persist a dump under `raw_dir`. Any earlier manifest is
/// removed before the first request and the new one is written last, so an
/// interrupted fetch leaves no manifest behind.
pub fn fetch_repo(
    client: &ApiClient,
    slug: &str,
    kinds: &[RecordKind],
    raw_dir: &Path,
    workers: usize,
) -> Result<DumpManifest> {
    dump::begin_dump(raw_dir)?;
    let records = fetch_records(client, slug, kinds, workers)?;
    let fetched_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs() as i64);
    write_dump(raw_dir, slug, client.base_url(), fetched_at, &records, kinds)
}
