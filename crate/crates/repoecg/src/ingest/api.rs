//! Mapping of REST API JSON objects onto normalized records.

use std::collections::BTreeSet;

use chrono::DateTime;
use repoecg_core::record::{AccountType, Association, ParentKind, ReactionCounts};
use repoecg_core::time::Timestamp;
use repoecg_core::{CommentRecord, IssueRecord, UserProfile};
use serde_json::Value;

use crate::error::{Error, Result};

/// Login used by the API for deleted accounts.
pub const GHOST_LOGIN: &str = "ghost";

fn schema(what: &str, obj: &Value) -> Error {
    let id = obj
        .get("id")
        .or_else(|| obj.get("number"))
        .map_or_else(String::new, Value::to_string);
    Error::Schema(format!("{what} (object {id})"))
}

/// RFC 3339 text (any offset) to UTC epoch seconds.
pub fn parse_time(text: &str) -> Option<Timestamp> {
    DateTime::parse_from_rfc3339(text).ok().map(|t| t.timestamp())
}

fn time_field(obj: &Value, key: &str) -> Result<Option<Timestamp>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => parse_time(s)
            .map(Some)
            .ok_or_else(|| schema(&format!("bad {key} {s:?}"), obj)),
        Some(_) => Err(schema(&format!("{key} is not a string"), obj)),
    }
}

fn required_time(obj: &Value, key: &str) -> Result<Timestamp> {
    time_field(obj, key)?.ok_or_else(|| schema(&format!("missing {key}"), obj))
}

fn text(obj: &Value, key: &str) -> String {
    obj.get(key).and_then(Value::as_str).unwrap_or_default().to_string()
}

fn opt_text(obj: &Value, key: &str) -> Option<String> {
    obj.get(key)
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
}

fn login(obj: &Value) -> String {
    obj.get("user")
        .and_then(|u| u.get("login"))
        .and_then(Value::as_str)
        .unwrap_or(GHOST_LOGIN)
        .to_string()
}

fn association(obj: &Value) -> Association {
    Association::from_api(obj.get("author_association").and_then(Value::as_str).unwrap_or("NONE"))
}

/// Nonzero per-emoji counts from a `reactions` rollup.
pub fn reactions(obj: &Value) -> ReactionCounts {
    let mut out = ReactionCounts::new();
    if let Some(map) = obj.get("reactions").and_then(Value::as_object) {
        for (k, v) in map {
            if k == "total_count" || k == "url" {
                continue;
            }
            if let Some(n) = v.as_u64().filter(|&n| n > 0) {
                out.insert(k.clone(), n);
            }
        }
    }
    out
}

fn number(obj: &Value, key: &str) -> Result<u64> {
    obj.get(key)
        .and_then(Value::as_u64)
        .filter(|&n| n > 0)
        .ok_or_else(|| schema(&format!("missing {key}"), obj))
}

/// Trailing path segment of an API URL, as a positive number.
fn trailing_number(url: &str) -> Option<u64> {
    url.trim_end_matches('/')
        .rsplit('/')
        .next()?
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// An object from the issues or pulls endpoint. Pull requests show up in
/// the issues listing too, marked by a `pull_request` key.
pub fn issue_from_api(slug: &str, obj: &Value) -> Result<IssueRecord> {
    let labels = obj
        .get("labels")
        .and_then(Value::as_array)
        .map(|ls| {
            ls.iter()
                .filter_map(|l| l.get("name").and_then(Value::as_str).or_else(|| l.as_str()))
                .map(String::from)
                .collect()
        })
        .unwrap_or_default();
    // the pulls endpoint always carries `merged_at`, possibly null
    let is_pull = obj.get("pull_request").is_some_and(|p| !p.is_null()) || obj.get("merged_at").is_some();
    let merged_at = if is_pull {
        match time_field(obj, "merged_at")? {
            Some(t) => Some(t),
            None => obj
                .get("pull_request")
                .map(|p| time_field(p, "merged_at"))
                .transpose()?
                .flatten(),
        }
    } else {
        None
    };
    Ok(IssueRecord {
        repo_slug: slug.to_string(),
        number: number(obj, "number")?,
        title: text(obj, "title"),
        body: text(obj, "body"),
        author_login: login(obj),
        author_association: association(obj),
        created_at: required_time(obj, "created_at")?,
        closed_at: time_field(obj, "closed_at")?,
        labels,
        reaction_counts: reactions(obj),
        is_pull,
        merged_at,
    })
}

/// An object from the issue-comments or review-comments endpoint.
/// `pulls` holds the numbers known to be pull requests, so conversation
/// comments on a PR are tagged as such.
pub fn comment_from_api(slug: &str, obj: &Value, review: bool, pulls: &BTreeSet<u64>) -> Result<CommentRecord> {
    let url_key = if review { "pull_request_url" } else { "issue_url" };
    let parent_number = obj
        .get(url_key)
        .and_then(Value::as_str)
        .and_then(trailing_number)
        .ok_or_else(|| schema(&format!("missing {url_key}"), obj))?;
    let parent_kind = if review {
        ParentKind::Review
    } else if pulls.contains(&parent_number) {
        ParentKind::Pull
    } else {
        ParentKind::Issue
    };
    Ok(CommentRecord {
        repo_slug: slug.to_string(),
        parent_kind,
        parent_number,
        comment_id: obj
            .get("id")
            .and_then(Value::as_i64)
            .ok_or_else(|| schema("missing id", obj))?,
        author_login: login(obj),
        author_association: association(obj),
        created_at: required_time(obj, "created_at")?,
        body: text(obj, "body"),
        reaction_counts: reactions(obj),
    })
}

/// An object from `/users/{login}`.
pub fn profile_from_api(obj: &Value) -> Result<UserProfile> {
    let login = opt_text(obj, "login").ok_or_else(|| schema("profile without login", obj))?;
    let account_type = match obj.get("type").and_then(Value::as_str) {
        Some("Bot") => AccountType::Bot,
        Some("Organization") => AccountType::Organization,
        _ => AccountType::User,
    };
    Ok(UserProfile {
        login,
        display_name: opt_text(obj, "name"),
        location_raw: opt_text(obj, "location"),
        account_type,
        company: opt_text(obj, "company"),
    })
}
