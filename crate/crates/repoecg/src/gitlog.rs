//! Commit mining through the `git` executable.

use std::path::Path;
use std::process::Command;

use log::warn;
use repoecg_core::dmm::{dmm_scores, extract_units, ChangedUnit, RiskThresholds};
use repoecg_core::CommitRecord;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MinedCommits {
    /// Ascending by authored time, then sha.
    pub commits: Vec<CommitRecord>,
    /// Log entries that could not be parsed.
    pub skipped: usize,
}

fn git(repo: &Path, args: &[&str]) -> Result<std::process::Output> {
    Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["-c", "core.quotepath=off"])
        .args(args)
        .output()
        .map_err(|e| Error::Git(format!("cannot run git: {e}")))
}

/// Per-file statistics and changed units of one commit's patch.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct PatchSummary {
    pub files_changed: u32,
    pub lines_added: u64,
    pub lines_deleted: u64,
    pub units: Vec<ChangedUnit>,
}

fn file_path(section: &str) -> String {
    let mut old = None;
    let mut new = None;
    for line in section.lines() {
        if line.starts_with("@@") {
            break;
        }
        if let Some(p) = line.strip_prefix("+++ ") {
            new = p.strip_prefix("b/").map(String::from);
        } else if let Some(p) = line.strip_prefix("--- ") {
            old = p.strip_prefix("a/").map(String::from);
        }
    }
    new.or(old).unwrap_or_else(|| {
        // header only (binary or mode change): `diff --git a/x b/x`
        let header = section.lines().next().unwrap_or_default();
        header
            .rsplit_once(" b/")
            .map_or_else(String::new, |(_, p)| p.to_string())
    })
}

/// Split a multi-file unified diff into per-file summaries.
pub fn summarize_patch(patch: &str) -> PatchSummary {
    let mut out = PatchSummary::default();
    let mut sections: Vec<&str> = Vec::new();
    let mut start = None;
    let mut offset = 0;
    for line in patch.split_inclusive('\n') {
        if line.starts_with("diff --git ") {
            if let Some(s) = start {
                sections.push(&patch[s..offset]);
            }
            start = Some(offset);
        }
        offset += line.len();
    }
    if let Some(s) = start {
        sections.push(&patch[s..]);
    }
    for section in sections {
        out.files_changed += 1;
        let path = file_path(section);
        let Some(hunks_at) = section.find("\n@@").map(|i| i + 1) else {
            continue;
        };
        let hunks = &section[hunks_at..];
        for line in hunks.lines() {
            if line.starts_with('+') {
                out.lines_added += 1;
            } else if line.starts_with('-') {
                out.lines_deleted += 1;
            }
        }
        out.units.extend(extract_units(hunks, &path));
    }
    out
}

fn parse_entry(entry: &str, thresholds: &RiskThresholds) -> Option<CommitRecord> {
    let (header, patch) = entry.split_once('\n').unwrap_or((entry, ""));
    let mut fields = header.split('\x1f');
    let sha = fields.next()?.trim().to_string();
    let author_name = fields.next()?.to_string();
    let author_email = fields.next()?.trim().to_lowercase();
    let authored_at: i64 = fields.next()?.trim().parse().ok()?;
    let parent_count = fields.next()?.split_whitespace().count() as u32;
    let summary = summarize_patch(patch);
    let scores = dmm_scores(&summary.units, thresholds);
    let record = CommitRecord {
        sha,
        author_name,
        author_email,
        authored_at,
        parent_count,
        files_changed: summary.files_changed,
        lines_added: summary.lines_added,
        lines_deleted: summary.lines_deleted,
        dmm_unit_size: scores.size,
        dmm_unit_complexity: scores.complexity,
        dmm_unit_interfacing: scores.interfacing,
    };
    record.validate().ok().map(|_| record)
}

/// Parse `git log -p` output produced with the NUL-prefixed header format
/// used by [`mine_commits`].
pub fn parse_log(output: &str, thresholds: &RiskThresholds) -> MinedCommits {
    let mut mined = MinedCommits::default();
    for entry in output.split('\0').filter(|e| !e.trim().is_empty()) {
        match parse_entry(entry, thresholds) {
            Some(c) => mined.commits.push(c),
            None => {
                warn!(
                    "unreadable log entry skipped: {:?}",
                    entry.lines().next().unwrap_or_default()
                );
                mined.skipped += 1;
            }
        }
    }
    mined
        .commits
        .sort_by(|a, b| (a.authored_at, &a.sha).cmp(&(b.authored_at, &b.sha)));
    mined
}

/// Every commit reachable from `branch` (or HEAD), oldest first. A
/// repository without commits gives an empty result.
pub fn mine_commits(repo: &Path, branch: Option<&str>, thresholds: &RiskThresholds) -> Result<MinedCommits> {
    let check = git(repo, &["rev-parse", "--git-dir"])?;
    if !check.status.success() {
        return Err(Error::Git(format!("{} is not a git repository", repo.display())));
    }
    let rev = branch.unwrap_or("HEAD");
    let verify = git(
        repo,
        &["rev-parse", "--verify", "--quiet", &format!("{rev}^{{commit}}")],
    )?;
    if !verify.status.success() {
        if branch.is_none() {
            return Ok(MinedCommits::default());
        }
        return Err(Error::Git(format!("{}: no branch {rev:?}", repo.display())));
    }
    let out = git(
        repo,
        &[
            "log",
            rev,
            "-p",
            "-W",
            "--no-color",
            "--no-ext-diff",
            "--no-renames",
            "--encoding=UTF-8",
            "--format=%x00%H%x1f%an%x1f%ae%x1f%at%x1f%P",
        ],
    )?;
    if !out.status.success() {
        return Err(Error::Git(format!(
            "git log failed in {}: {}",
            repo.display(),
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    Ok(parse_log(&String::from_utf8_lossy(&out.stdout), thresholds))
}
