//! Normalized mining records.
//!
//! All timestamps are UTC epoch seconds. Field order in each struct is the
//! serialization order of the dump files, so it must stay stable.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::time::Timestamp;

/// Emoji name to reaction count, e.g. `"+1" -> 3`.
pub type ReactionCounts = BTreeMap<String, u64>;

pub fn reaction_total(counts: &ReactionCounts) -> u64 {
    counts.values().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Association {
    Member,
    Owner,
    Collaborator,
    Contributor,
    FirstTimeContributor,
    FirstTimer,
    None,
}

impl Association {
    pub fn as_str(self) -> &'static str {
        match self {
            Association::Member => "MEMBER",
            Association::Owner => "OWNER",
            Association::Collaborator => "COLLABORATOR",
            Association::Contributor => "CONTRIBUTOR",
            Association::FirstTimeContributor => "FIRST_TIME_CONTRIBUTOR",
            Association::FirstTimer => "FIRST_TIMER",
            Association::None => "NONE",
        }
    }

    /// Parse the API's association string. Values outside the known set
    /// (e.g. `MANNEQUIN`) collapse to `None`.
    pub fn from_api(s: &str) -> Self {
        match s {
            "MEMBER" => Association::Member,
            "OWNER" => Association::Owner,
            "COLLABORATOR" => Association::Collaborator,
            "CONTRIBUTOR" => Association::Contributor,
            "FIRST_TIME_CONTRIBUTOR" => Association::FirstTimeContributor,
            "FIRST_TIMER" => Association::FirstTimer,
            _ => Association::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AccountType {
    User,
    Bot,
    Organization,
}

impl AccountType {
    pub fn as_str(self) -> &'static str {
        match self {
            AccountType::User => "User",
            AccountType::Bot => "Bot",
            AccountType::Organization => "Organization",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParentKind {
    Issue,
    Pull,
    Review,
}

/// An issue or, with `is_pull = true`, a pull request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub repo_slug: String,
    pub number: u64,
    pub title: String,
    #[serde(default)]
    pub body: String,
    pub author_login: String,
    pub author_association: Association,
    pub created_at: Timestamp,
    #[serde(default)]
    pub closed_at: Option<Timestamp>,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub reaction_counts: ReactionCounts,
    pub is_pull: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merged_at: Option<Timestamp>,
}

/// Pull requests share the issue layout; `is_pull` is true and `merged_at`
/// may be set.
pub type PullRecord = IssueRecord;

/// Allowed clock skew between a merge and the matching close event.
pub const MERGE_CLOSE_SKEW_SECS: i64 = 60;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("{slug}#{number}: closed_at precedes created_at")]
    ClosedBeforeCreated { slug: String, number: u64 },
    #[error("{slug}#{number}: merged_at on a non-pull record")]
    MergedIssue { slug: String, number: u64 },
    #[error("{slug}#{number}: merged_at without closed_at, or merged after close")]
    MergeWithoutClose { slug: String, number: u64 },
    #[error("comment {id}: review comment attached to a non-pull parent")]
    ReviewOnIssue { id: i64 },
    #[error("commit {sha}: invalid sha")]
    BadSha { sha: String },
    #[error("commit {sha}: dmm score outside [0, 1]")]
    DmmRange { sha: String },
    #[error("profile with empty login")]
    EmptyLogin,
}

impl IssueRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        let ids = || (self.repo_slug.clone(), self.number);
        if let Some(closed) = self.closed_at {
            if closed < self.created_at {
                let (slug, number) = ids();
                return Err(RecordError::ClosedBeforeCreated { slug, number });
            }
        }
        if let Some(merged) = self.merged_at {
            let (slug, number) = ids();
            if !self.is_pull {
                return Err(RecordError::MergedIssue { slug, number });
            }
            match self.closed_at {
                Some(closed) if merged <= closed + MERGE_CLOSE_SKEW_SECS => {}
                _ => return Err(RecordError::MergeWithoutClose { slug, number }),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub repo_slug: String,
    pub parent_kind: ParentKind,
    pub parent_number: u64,
    pub comment_id: i64,
    pub author_login: String,
    pub author_association: Association,
    pub created_at: Timestamp,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub reaction_counts: ReactionCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub login: String,
    #[serde(default)]
    pub display_name: Option<String>,
    #[serde(default)]
    pub location_raw: Option<String>,
    pub account_type: AccountType,
    #[serde(default)]
    pub company: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub sha: String,
    pub author_name: String,
    pub author_email: String,
    pub authored_at: Timestamp,
    pub parent_count: u32,
    pub files_changed: u32,
    pub lines_added: u64,
    pub lines_deleted: u64,
    #[serde(default)]
    pub dmm_unit_size: Option<f64>,
    #[serde(default)]
    pub dmm_unit_complexity: Option<f64>,
    #[serde(default)]
    pub dmm_unit_interfacing: Option<f64>,
}

impl CommitRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.sha.len() != 40 || !self.sha.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(RecordError::BadSha { sha: self.sha.clone() });
        }
        let in_range = |v: Option<f64>| v.is_none_or(|x| (0.0..=1.0).contains(&x));
        if !(in_range(self.dmm_unit_size) && in_range(self.dmm_unit_complexity) && in_range(self.dmm_unit_interfacing))
        {
            return Err(RecordError::DmmRange { sha: self.sha.clone() });
        }
        Ok(())
    }

    /// Identity key used for distinct-author counting.
    pub fn author_key(&self) -> String {
        author_key(&self.author_email)
    }
}

/// Lowercased email, with GitHub noreply addresses mapped to the embedded
/// login (`12345+octocat@users.noreply.github.com` -> `octocat`).
pub fn author_key(email: &str) -> String {
    let email = email.trim().to_lowercase();
    if let Some(local) = email.strip_suffix("@users.noreply.github.com") {
        let login = local.split_once('+').map_or(local, |(_, login)| login);
        if !login.is_empty() {
            return login.into();
        }
    }
    email
}

/// All record streams for one repository.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    pub issues: Vec<IssueRecord>,
    pub pulls: Vec<PullRecord>,
    pub comments: Vec<CommentRecord>,
    pub profiles: Vec<UserProfile>,
    pub commits: Vec<CommitRecord>,
}

impl RecordSet {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
            && self.pulls.is_empty()
            && self.comments.is_empty()
            && self.profiles.is_empty()
            && self.commits.is_empty()
    }

    /// Sort every stream by creation time, then id. This is the canonical
    /// order used by dumps and by every downstream computation.
    pub fn sort_canonical(&mut self) {
        self.issues.sort_by_key(|r| (r.created_at, r.number));
        self.pulls.sort_by_key(|r| (r.created_at, r.number));
        self.comments.sort_by_key(|c| (c.created_at, c.comment_id));
        self.profiles.sort_by(|a, b| a.login.cmp(&b.login));
        self.commits
            .sort_by(|a, b| (a.authored_at, &a.sha).cmp(&(b.authored_at, &b.sha)));
    }

    pub fn profile_index(&self) -> BTreeMap<&str, &UserProfile> {
        self.profiles.iter().map(|p| (p.login.as_str(), p)).collect()
    }
}
