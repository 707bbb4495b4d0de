//! Per-month aggregation of primary repository metrics.
//!
//! Rows cover every calendar month from the earliest to the latest event in
//! the record set, gaps included. Count components are always present
//! (possibly zero); means and ratios are absent when they have no input.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::component::Component;
use crate::num;
use crate::record::{reaction_total, CommentRecord, CommitRecord, IssueRecord, ParentKind, RecordSet, UserProfile};
use crate::time::{Month, MonthError, Timestamp};

/// One project-month of component values, indexed by [`Component::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyRow {
    pub repo_slug: String,
    pub month: Month,
    values: Vec<Option<f64>>,
}

impl MonthlyRow {
    pub fn new(repo_slug: impl Into<String>, month: Month) -> Self {
        Self {
            repo_slug: repo_slug.into(),
            month,
            values: vec![None; Component::ALL.len()],
        }
    }

    pub fn get(&self, c: Component) -> Option<f64> {
        self.values[c.index()]
    }

    pub fn set(&mut self, c: Component, value: Option<f64>) {
        self.values[c.index()] = value;
    }

    /// Values in registry order.
    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }
}

/// Comments keyed by parent number.
pub type CommentsByParent<'a> = BTreeMap<u64, Vec<&'a CommentRecord>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("duplicate {kind} record {id} with conflicting fields")]
    ConflictingDuplicate { kind: &'static str, id: String },
    #[error(transparent)]
    Month(#[from] MonthError),
}

/// Counted, non-fatal anomalies met while aggregating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricWarnings {
    /// Closures timestamped before creation, clamped to zero seconds.
    pub negative_durations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub rows: Vec<MonthlyRow>,
    pub warnings: MetricWarnings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("closure at {closed_at} precedes creation at {created_at}")]
pub struct NegativeDuration {
    pub created_at: Timestamp,
    pub closed_at: Timestamp,
}

/// Seconds between creation and closure.
pub fn closure_duration(created_at: Timestamp, closed_at: Timestamp) -> Result<i64, NegativeDuration> {
    let d = closed_at - created_at;
    if d < 0 {
        Err(NegativeDuration { created_at, closed_at })
    } else {
        Ok(d)
    }
}

/// Seconds from the parent's creation to the first comment written by
/// someone other than the parent's author. `comments` must be sorted by
/// `created_at`.
pub fn response_time<'a>(parent: &IssueRecord, comments: impl IntoIterator<Item = &'a CommentRecord>) -> Option<i64> {
    comments
        .into_iter()
        .find(|c| c.author_login != parent.author_login)
        .map(|c| (c.created_at - parent.created_at).max(0))
}

/// Normalize a label name for matching: lowercase, `-`/`_` as spaces,
/// whitespace collapsed.
pub fn normalize_label(label: &str) -> String {
    let lowered = label.to_lowercase();
    let spaced: String = lowered
        .chars()
        .map(|c| if c == '-' || c == '_' { ' ' } else { c })
        .collect();
    let mut out = String::with_capacity(spaced.len());
    for word in spaced.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub fn is_newcomer_label(label: &str) -> bool {
    matches!(normalize_label(label).as_str(), "good first issue" | "help wanted")
}

pub fn is_duplicate_label(label: &str) -> bool {
    normalize_label(label) == "duplicate"
}

/// Records deduplicated and partitioned the way every aggregation pass
/// expects: issues and pulls split by `is_pull`, all streams in canonical
/// order.
#[derive(Debug, Clone, Default)]
pub(crate) struct Normalized {
    pub issues: Vec<IssueRecord>,
    pub pulls: Vec<IssueRecord>,
    pub comments: Vec<CommentRecord>,
    pub commits: Vec<CommitRecord>,
    pub profiles: Vec<UserProfile>,
}

impl Normalized {
    pub fn from_records(records: &RecordSet) -> Result<Self, MetricError> {
        let items = dedup(records.issues.iter().chain(records.pulls.iter()), "issue/pull", |r| {
            alloc::format!("#{}", r.number)
        })?;
        let (mut pulls, mut issues): (Vec<_>, Vec<_>) = items.into_iter().partition(|r| r.is_pull);
        issues.sort_by_key(|r| (r.created_at, r.number));
        pulls.sort_by_key(|r| (r.created_at, r.number));

        let mut comments = dedup(records.comments.iter(), "comment", |c| {
            let space = if c.parent_kind == ParentKind::Review {
                "review"
            } else {
                "issue"
            };
            alloc::format!("{space}:{}", c.comment_id)
        })?;
        comments.sort_by_key(|c| (c.created_at, c.comment_id));

        let mut commits = dedup(records.commits.iter(), "commit", |c| c.sha.clone())?;
        commits.sort_by(|a, b| (a.authored_at, &a.sha).cmp(&(b.authored_at, &b.sha)));

        let mut profiles = dedup(records.profiles.iter(), "profile", |p| p.login.clone())?;
        profiles.sort_by(|a, b| a.login.cmp(&b.login));

        Ok(Self {
            issues,
            pulls,
            comments,
            commits,
            profiles,
        })
    }

    /// First and last month touched by any event timestamp.
    pub fn month_span(&self) -> Result<Option<(Month, Month)>, MonthError> {
        let mut stamps = Vec::new();
        for r in self.issues.iter().chain(&self.pulls) {
            stamps.push(r.created_at);
            stamps.extend(r.closed_at);
            stamps.extend(r.merged_at);
        }
        stamps.extend(self.comments.iter().map(|c| c.created_at));
        stamps.extend(self.commits.iter().map(|c| c.authored_at));
        let (Some(&lo), Some(&hi)) = (stamps.iter().min(), stamps.iter().max()) else {
            return Ok(None);
        };
        Ok(Some((Month::from_timestamp(lo)?, Month::from_timestamp(hi)?)))
    }

    /// Comments grouped by the artifact they belong to. Issue comments are
    /// keyed by issue number; pull conversation and review comments are both
    /// keyed under the pull request.
    pub fn comments_by_parent(&self) -> (CommentsByParent<'_>, CommentsByParent<'_>) {
        let mut on_issues = CommentsByParent::new();
        let mut on_pulls = CommentsByParent::new();
        for c in &self.comments {
            match c.parent_kind {
                ParentKind::Issue => on_issues.entry(c.parent_number).or_default().push(c),
                ParentKind::Pull | ParentKind::Review => on_pulls.entry(c.parent_number).or_default().push(c),
            }
        }
        (on_issues, on_pulls)
    }
}

fn dedup<'a, T, I, K>(items: I, kind: &'static str, key: K) -> Result<Vec<T>, MetricError>
where
    T: Clone + PartialEq + 'a,
    I: Iterator<Item = &'a T>,
    K: Fn(&T) -> String,
{
    let mut seen: BTreeMap<String, &T> = BTreeMap::new();
    for item in items {
        let id = key(item);
        match seen.get(&id) {
            Some(prev) if *prev != item => {
                return Err(MetricError::ConflictingDuplicate { kind, id });
            }
            Some(_) => {}
            None => {
                seen.insert(id, item);
            }
        }
    }
    Ok(seen.into_values().cloned().collect())
}

/// Per-month accumulator keyed by month.
pub(crate) struct Buckets<T> {
    first: Month,
    slots: Vec<T>,
}

impl<T: Default> Buckets<T> {
    pub fn new(first: Month, last: Month) -> Self {
        let mut slots = Vec::new();
        slots.resize_with(first.span_to(last), T::default);
        Self { first, slots }
    }

    pub fn at(&mut self, ts: Timestamp) -> Result<&mut T, MonthError> {
        let m = Month::from_timestamp(ts)?;
        let i = self.first.span_to(m) - 1;
        Ok(&mut self.slots[i])
    }

    pub fn into_iter(self) -> impl Iterator<Item = (Month, T)> {
        let first = self.first;
        self.slots
            .into_iter()
            .enumerate()
            .map(move |(i, t)| (first.offset(i as i64), t))
    }
}

#[derive(Default)]
struct MonthAcc {
    issues_created: u64,
    issues_closed: u64,
    issue_durations: Vec<f64>,
    prs_created: u64,
    prs_closed: u64,
    prs_merged: u64,
    pr_durations: Vec<f64>,
    issue_comments: u64,
    review_comments: u64,
    commits: u64,
    commit_authors: BTreeSet<String>,
    merge_parents: u64,
    dmm_size: Vec<f64>,
    dmm_complexity: Vec<f64>,
    dmm_interfacing: Vec<f64>,
    issue_reporters: BTreeSet<String>,
    pr_creators: BTreeSet<String>,
    issue_response: Vec<f64>,
    pr_response: Vec<f64>,
    issue_label_uses: u64,
    issue_labels_new: u64,
    pr_label_uses: u64,
    pr_labels_new: u64,
    newcomer_issues: u64,
    duplicate_issues: u64,
    issue_reactions: u64,
    issue_comment_reactions: u64,
    review_comment_reactions: u64,
}

fn count(n: u64) -> Option<f64> {
    Some(n as f64)
}

/// Aggregate raw records into one [`MonthlyRow`] per calendar month.
pub fn aggregate_monthly(records: &RecordSet) -> Result<Aggregate, MetricError> {
    let norm = Normalized::from_records(records)?;
    aggregate_normalized(&norm, &repo_slug_of(records))
}

pub(crate) fn repo_slug_of(records: &RecordSet) -> String {
    records
        .issues
        .iter()
        .chain(&records.pulls)
        .map(|r| r.repo_slug.clone())
        .chain(records.comments.iter().map(|c| c.repo_slug.clone()))
        .next()
        .unwrap_or_default()
}

pub(crate) fn aggregate_normalized(norm: &Normalized, slug: &str) -> Result<Aggregate, MetricError> {
    let mut warnings = MetricWarnings::default();
    let Some((first, last)) = norm.month_span()? else {
        return Ok(Aggregate {
            rows: Vec::new(),
            warnings,
        });
    };
    let mut acc: Buckets<MonthAcc> = Buckets::new(first, last);
    let (issue_comments, pull_comments) = norm.comments_by_parent();
    let mut duration = |created: Timestamp, closed: Timestamp| match closure_duration(created, closed) {
        Ok(d) => d as f64,
        Err(_) => {
            warnings.negative_durations += 1;
            0.0
        }
    };

    let mut seen_issue_labels: BTreeSet<&str> = BTreeSet::new();
    for issue in &norm.issues {
        let m = acc.at(issue.created_at)?;
        m.issues_created += 1;
        m.issue_reporters.insert(issue.author_login.clone());
        m.issue_reactions += reaction_total(&issue.reaction_counts);
        let labels: BTreeSet<&str> = issue.labels.iter().map(String::as_str).collect();
        m.issue_label_uses += labels.len() as u64;
        for label in &labels {
            if seen_issue_labels.insert(label) {
                m.issue_labels_new += 1;
            }
        }
        if labels.iter().any(|l| is_newcomer_label(l)) {
            m.newcomer_issues += 1;
        }
        if labels.iter().any(|l| is_duplicate_label(l)) {
            m.duplicate_issues += 1;
        }
        let thread = issue_comments.get(&issue.number).map(Vec::as_slice).unwrap_or(&[]);
        if let Some(rt) = response_time(issue, thread.iter().copied()) {
            m.issue_response.push(rt as f64);
        }
        if let Some(closed) = issue.closed_at {
            let d = duration(issue.created_at, closed);
            let m = acc.at(closed)?;
            m.issues_closed += 1;
            m.issue_durations.push(d);
        }
    }

    let mut seen_pr_labels: BTreeSet<&str> = BTreeSet::new();
    for pr in &norm.pulls {
        let m = acc.at(pr.created_at)?;
        m.prs_created += 1;
        m.pr_creators.insert(pr.author_login.clone());
        let labels: BTreeSet<&str> = pr.labels.iter().map(String::as_str).collect();
        m.pr_label_uses += labels.len() as u64;
        for label in &labels {
            if seen_pr_labels.insert(label) {
                m.pr_labels_new += 1;
            }
        }
        let thread = pull_comments.get(&pr.number).map(Vec::as_slice).unwrap_or(&[]);
        if let Some(rt) = response_time(pr, thread.iter().copied()) {
            m.pr_response.push(rt as f64);
        }
        if let Some(closed) = pr.closed_at {
            let d = duration(pr.created_at, closed);
            let m = acc.at(closed)?;
            m.prs_closed += 1;
            m.pr_durations.push(d);
        }
        if let Some(merged) = pr.merged_at {
            acc.at(merged)?.prs_merged += 1;
        }
    }

    for c in &norm.comments {
        let m = acc.at(c.created_at)?;
        let reactions = reaction_total(&c.reaction_counts);
        match c.parent_kind {
            ParentKind::Issue => {
                m.issue_comments += 1;
                m.issue_comment_reactions += reactions;
            }
            // Conversation comments on a pull come from the issue-comments
            // endpoint, so their reactions count as issue-comment reactions.
            ParentKind::Pull => m.issue_comment_reactions += reactions,
            ParentKind::Review => {
                m.review_comments += 1;
                m.review_comment_reactions += reactions;
            }
        }
    }

    for commit in &norm.commits {
        let m = acc.at(commit.authored_at)?;
        m.commits += 1;
        m.commit_authors.insert(commit.author_key());
        m.merge_parents += u64::from(commit.parent_count.saturating_sub(1));
        m.dmm_size.extend(commit.dmm_unit_size);
        m.dmm_complexity.extend(commit.dmm_unit_complexity);
        m.dmm_interfacing.extend(commit.dmm_unit_interfacing);
    }

    let rows = acc
        .into_iter()
        .map(|(month, a)| {
            use Component as C;
            let mut row = MonthlyRow::new(slug, month);
            row.set(C::IssuesCreated, count(a.issues_created));
            row.set(C::IssuesClosed, count(a.issues_closed));
            row.set(C::IssueClosureDuration, num::mean(&a.issue_durations));
            row.set(C::PrsCreated, count(a.prs_created));
            row.set(C::PrsClosed, count(a.prs_closed));
            row.set(C::PrClosureDuration, num::mean(&a.pr_durations));
            row.set(C::CommitsTotal, count(a.commits));
            row.set(C::CommitAuthors, count(a.commit_authors.len() as u64));
            row.set(C::DmmUnitInterfacing, num::mean(&a.dmm_interfacing));
            row.set(C::DmmUnitComplexity, num::mean(&a.dmm_complexity));
            row.set(C::DmmUnitSize, num::mean(&a.dmm_size));
            row.set(C::IssueReporters, count(a.issue_reporters.len() as u64));
            row.set(C::IssueComments, count(a.issue_comments));
            row.set(C::IssueResponseTime, num::mean(&a.issue_response));
            row.set(C::PrCreators, count(a.pr_creators.len() as u64));
            row.set(C::ReviewComments, count(a.review_comments));
            row.set(C::PrResponseTime, num::mean(&a.pr_response));
            row.set(C::IssueLabelsNew, count(a.issue_labels_new));
            row.set(C::IssueLabelsTotal, count(a.issue_label_uses));
            row.set(C::PrLabelsNew, count(a.pr_labels_new));
            row.set(C::PrLabelsTotal, count(a.pr_label_uses));
            row.set(C::NewcomerIssues, count(a.newcomer_issues));
            row.set(C::DeduplicatedIssues, count(a.duplicate_issues));
            row.set(C::IssueReactions, count(a.issue_reactions));
            row.set(C::IssueCommentReactions, count(a.issue_comment_reactions));
            row.set(C::ReviewCommentReactions, count(a.review_comment_reactions));
            row.set(C::MergeParentCommits, count(a.merge_parents));
            row.set(C::PrsMerged, count(a.prs_merged));
            // Closed-in-month over opened-in-month.
            let ratio = (a.issues_created > 0).then(|| a.issues_closed as f64 / a.issues_created as f64);
            row.set(C::IssuesClosedOpenedRatio, ratio);
            row
        })
        .collect();
    Ok(Aggregate { rows, warnings })
}
