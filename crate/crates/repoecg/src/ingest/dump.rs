//! On-disk dumps: one newline-delimited JSON file per record kind plus a
//! manifest written last. A dump without a manifest is incomplete.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::warn;
use repoecg_core::record::RecordError;
use repoecg_core::{CommentRecord, CommitRecord, IssueRecord, RecordSet, UserProfile};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::check_slug;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COMMITS_FILE: &str = "commits.ndjson";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RecordKind {
    Issue,
    Pull,
    Comment,
    Profile,
}

impl RecordKind {
    pub const ALL: [RecordKind; 4] = [
        RecordKind::Issue,
        RecordKind::Pull,
        RecordKind::Comment,
        RecordKind::Profile,
    ];

    /// Key in [`DumpManifest::record_counts`].
    pub fn key(self) -> &'static str {
        match self {
            RecordKind::Issue => "issue",
            RecordKind::Pull => "pull",
            RecordKind::Comment => "comment",
            RecordKind::Profile => "profile",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            RecordKind::Issue => "issues.ndjson",
            RecordKind::Pull => "pulls.ndjson",
            RecordKind::Comment => "comments.ndjson",
            RecordKind::Profile => "profiles.ndjson",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpManifest {
    pub repo_slug: String,
    pub fetched_at: i64,
    pub record_counts: BTreeMap<String, u64>,
    pub api_base_url: String,
    pub schema_version: u32,
}

/// `<data_dir>/<owner>__<name>`.
pub fn project_dir(data_dir: &Path, slug: &str) -> Result<PathBuf> {
    let (owner, name) = check_slug(slug)?;
    Ok(data_dir.join(format!("{owner}__{name}")))
}

/// `<data_dir>/<owner>__<name>/raw`.
pub fn raw_dir(data_dir: &Path, slug: &str) -> Result<PathBuf> {
    Ok(project_dir(data_dir, slug)?.join("raw"))
}

/// Write `bytes` next to `path` and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(Error::io(&tmp))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(Error::io(&tmp))?;
    fs::rename(&tmp, path).map_err(Error::io(path))
}

fn ndjson<T: Serialize>(records: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        // records are plain data; serialization cannot fail
        serde_json::to_writer(&mut out, r).expect("record serializes");
        out.push(b'\n');
    }
    out
}

/// Remove the manifest so a reader never mistakes a dump being rewritten
/// for a complete one.
pub fn begin_dump(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let manifest = dir.join(MANIFEST_FILE);
    match fs::remove_file(&manifest) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(Error::io(manifest)(e)),
        _ => Ok(()),
    }
}

/// Write the record files for `kinds`, then the manifest.
pub fn write_dump(
    dir: &Path,
    repo_slug: &str,
    api_base_url: &str,
    fetched_at: i64,
    records: &RecordSet,
    kinds: &[RecordKind],
) -> Result<DumpManifest> {
    begin_dump(dir)?;
    let mut records = records.clone();
    records.sort_canonical();
    let mut counts = BTreeMap::new();
    for &kind in kinds {
        let (bytes, n) = match kind {
            RecordKind::Issue => (ndjson(&records.issues), records.issues.len()),
            RecordKind::Pull => (ndjson(&records.pulls), records.pulls.len()),
            RecordKind::Comment => (ndjson(&records.comments), records.comments.len()),
            RecordKind::Profile => (ndjson(&records.profiles), records.profiles.len()),
        };
        write_atomic(&dir.join(kind.file_name()), &bytes)?;
        counts.insert(kind.key().to_string(), n as u64);
    }
    let manifest = DumpManifest {
        repo_slug: repo_slug.to_string(),
        fetched_at,
        record_counts: counts,
        api_base_url: api_base_url.to_string(),
        schema_version: SCHEMA_VERSION,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&dir.join(MANIFEST_FILE), &bytes)?;
    Ok(manifest)
}

/// Write mined commits (sorted by authored time) to `commits.ndjson`.
pub fn write_commits(dir: &Path, commits: &[CommitRecord]) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut commits = commits.to_vec();
    commits.sort_by(|a, b| (a.authored_at, &a.sha).cmp(&(b.authored_at, &b.sha)));
    write_atomic(&dir.join(COMMITS_FILE), &ndjson(&commits))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDump {
    pub manifest: DumpManifest,
    pub records: RecordSet,
    /// Lines skipped because they did not parse or broke a record invariant.
    pub malformed: usize,
}

/// Lines of a record file, parsed. Returns the records and the number of
/// nonblank lines.
fn read_lines<T: DeserializeOwned>(
    path: &Path,
    malformed: &mut usize,
    check: impl Fn(&T) -> bool,
) -> Result<(Vec<T>, u64)> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    let mut lines = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        match serde_json::from_str::<T>(line) {
            Ok(r) if check(&r) => out.push(r),
            Ok(_) => {
                warn!("{}:{}: record violates its invariants; skipped", path.display(), i + 1);
                *malformed += 1;
            }
            Err(e) => {
                warn!("{}:{}: malformed record skipped: {e}", path.display(), i + 1);
                *malformed += 1;
            }
        }
    }
    Ok((out, lines))
}

/// Closures stamped before creation are kept: aggregation clamps them and
/// counts a warning. Every other invariant breach makes the record unusable.
fn issue_ok(r: &IssueRecord, want_pull: bool) -> bool {
    r.is_pull == want_pull && !matches!(r.validate(), Err(e) if !matches!(e, RecordError::ClosedBeforeCreated { .. }))
}

/// Load a dump directory (the `raw` directory written by a fetch).
/// Records come back in canonical order, so loading is idempotent.
pub fn load_dump(dir: &Path) -> Result<LoadedDump> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = match fs::read_to_string(&manifest_path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::PartialFetch(format!(
                "{}: no manifest; the fetch never finished",
                dir.display()
            )))
        }
        Err(e) => return Err(Error::io(manifest_path)(e)),
    };
    let manifest: DumpManifest = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: unreadable manifest: {e}", manifest_path.display())))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
            manifest_path.display(),
            manifest.schema_version
        )));
    }

    let mut records = RecordSet::default();
    let mut malformed = 0;
    for kind in RecordKind::ALL {
        let Some(&expected) = manifest.record_counts.get(kind.key()) else {
            continue;
        };
        let path = dir.join(kind.file_name());
        if !path.exists() {
            return Err(Error::PartialFetch(format!("{} is missing", path.display())));
        }
        let lines = match kind {
            RecordKind::Issue => {
                let (v, n) = read_lines::<IssueRecord>(&path, &mut malformed, |r| issue_ok(r, false))?;
                records.issues = v;
                n
            }
            RecordKind::Pull => {
                let (v, n) = read_lines::<IssueRecord>(&path, &mut malformed, |r| issue_ok(r, true))?;
                records.pulls = v;
                n
            }
            RecordKind::Comment => {
                let (v, n) = read_lines::<CommentRecord>(&path, &mut malformed, |_| true)?;
                records.comments = v;
                n
            }
            RecordKind::Profile => {
                let (v, n) = read_lines::<UserProfile>(&path, &mut malformed, |p| !p.login.is_empty())?;
                records.profiles = v;
                n
            }
        };
        if lines != expected {
            return Err(Error::PartialFetch(format!(
                "{}: manifest records {expected} lines, file has {lines}",
                path.display()
            )));
        }
    }
    let commits = dir.join(COMMITS_FILE);
    if commits.exists() {
        records.commits = read_lines::<CommitRecord>(&commits, &mut malformed, |c| c.validate().is_ok())?.0;
    }
    if malformed > 0 {
        warn!("{}: {malformed} malformed record(s) skipped", dir.display());
    }
    records.sort_canonical();
    Ok(LoadedDump {
        manifest,
        records,
        malformed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use repoecg_core::record::{Association, ReactionCounts};

    fn issue(n: u64, t: i64) -> IssueRecord {
        IssueRecord {
            repo_slug: "o/r".into(),
            number: n,
            title: format!("issue {n}"),
            body: String::new(),
            author_login: "a".into(),
            author_association: Association::None,
            created_at: t,
            closed_at: None,
            labels: vec![],
            reaction_counts: ReactionCounts::new(),
            is_pull: false,
            merged_at: None,
        }
    }

    #[test]
    fn paths() {
        let p = raw_dir(Path::new("/d"), "own/name").unwrap();
        assert_eq!(p, Path::new("/d/own__name/raw"));
        assert!(raw_dir(Path::new("/d"), "../x").is_err());
    }

    #[test]
    fn round_trip_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let records = RecordSet {
            issues: vec![issue(2, 20), issue(1, 10)],
            ..Default::default()
        };
        let m = write_dump(dir.path(), "o/r", "http://x", 5, &records, &RecordKind::ALL).unwrap();
        assert_eq!(m.record_counts["issue"], 2);
        assert_eq!(m.record_counts["comment"], 0);
        let first = fs::read(dir.path().join("issues.ndjson")).unwrap();
        let loaded = load_dump(dir.path()).unwrap();
        let mut expect = records.clone();
        expect.sort_canonical();
        assert_eq!(loaded.records, expect);
        assert_eq!(loaded.malformed, 0);
        write_dump(dir.path(), "o/r", "http://x", 6, &loaded.records, &RecordKind::ALL).unwrap();
        assert_eq!(fs::read(dir.path().join("issues.ndjson")).unwrap(), first);
    }

    #[test]
    fn missing_manifest_and_bad_schema() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dump(dir.path()), Err(Error::PartialFetch(_))));
        write_dump(
            dir.path(),
            "o/r",
            "http://x",
            5,
            &RecordSet::default(),
            &RecordKind::ALL,
        )
        .unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 999");
        fs::write(&path, text).unwrap();
        assert!(matches!(load_dump(dir.path()), Err(Error::Schema(_))));
    }

    #[test]
    fn one_malformed_line_in_ten() {
        let dir = tempfile::tempdir().unwrap();
        let records = RecordSet {
            issues: (1..=10).map(|n| issue(n, n as i64 * 100)).collect(),
            ..Default::default()
        };
        write_dump(dir.path(), "o/r", "http://x", 5, &records, &RecordKind::ALL).unwrap();
        let path = dir.path().join("issues.ndjson");
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[4] = "{\"number\": oops";
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        let loaded = load_dump(dir.path()).unwrap();
        assert_eq!(loaded.records.issues.len(), 9);
        assert_eq!(loaded.malformed, 1);
    }

    #[test]
    fn truncated_file_is_partial() {
        let dir = tempfile::tempdir().unwrap();
        let records = RecordSet {
            issues: vec![issue(1, 1), issue(2, 2)],
            ..Default::default()
        };
        write_dump(dir.path(), "o/r", "http://x", 5, &records, &RecordKind::ALL).unwrap();
        let path = dir.path().join("issues.ndjson");
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.lines().next().unwrap()).unwrap();
        assert!(matches!(load_dump(dir.path()), Err(Error::PartialFetch(_))));
    }
}
