//! Secondary metrics: text scores, readability, diversity indices, gender
//! ratio, and geographic coverage, filled into monthly rows.

pub mod cbe;
pub mod diversity;
pub mod readability;
pub mod tables;
pub mod text;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub use cbe::{gender_ratio, location_coverage, GenderRatioMode, Participant};
pub use diversity::{shannon_index, DiversityInput};
pub use readability::readability;
pub use tables::{CountryTable, GenderTable, GenericMailProviders, Tables};
pub use text::{score_text, LexiconScorer, ScoreRequest, ScorerError, TextScore, TextScorer};

use crate::component::Component;
use crate::metricize::{aggregate_normalized, repo_slug_of, MetricError, MetricWarnings, MonthlyRow, Normalized};
use crate::num;
use crate::record::{Association, CommentRecord, ParentKind, RecordSet, UserProfile};
use crate::time::Month;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnrichConfig {
    pub gender_mode: GenderRatioMode,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnrichWarnings {
    /// Month batches whose scorer call failed; their text components are absent.
    pub scorer_failures: usize,
}

/// Primary and secondary metrics for one repository.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyMetrics {
    pub rows: Vec<MonthlyRow>,
    pub metric_warnings: MetricWarnings,
    pub enrich_warnings: EnrichWarnings,
}

/// Aggregate primary metrics and fill in every secondary component.
pub fn monthly_metrics(
    records: &RecordSet,
    scorer: &mut dyn TextScorer,
    tables: &Tables,
    config: &EnrichConfig,
) -> Result<MonthlyMetrics, MetricError> {
    let norm = Normalized::from_records(records)?;
    let aggregate = aggregate_normalized(&norm, &repo_slug_of(records))?;
    let mut rows = aggregate.rows;
    let enrich_warnings = enrich_normalized(&mut rows, &norm, scorer, tables, config)?;
    Ok(MonthlyMetrics {
        rows,
        metric_warnings: aggregate.warnings,
        enrich_warnings,
    })
}

/// Fill secondary components into rows produced by
/// [`aggregate_monthly`](crate::metricize::aggregate_monthly) for the same records.
pub fn enrich_monthly(
    rows: &mut [MonthlyRow],
    records: &RecordSet,
    scorer: &mut dyn TextScorer,
    tables: &Tables,
    config: &EnrichConfig,
) -> Result<EnrichWarnings, MetricError> {
    let norm = Normalized::from_records(records)?;
    enrich_normalized(rows, &norm, scorer, tables, config)
}

#[derive(Default)]
struct MonthInputs<'a> {
    issue_comments: Vec<&'a CommentRecord>,
    review_comments: Vec<&'a CommentRecord>,
    issue_bodies: Vec<&'a str>,
    pr_bodies: Vec<&'a str>,
    issue_comment_bodies: Vec<&'a str>,
    pr_comment_bodies: Vec<&'a str>,
    // (login, association) in chronological order
    issue_people: Vec<(&'a str, Association)>,
    pr_people: Vec<(&'a str, Association)>,
    // (author key, email)
    commit_authors: Vec<(String, &'a str)>,
}

fn enrich_normalized(
    rows: &mut [MonthlyRow],
    norm: &Normalized,
    scorer: &mut dyn TextScorer,
    tables: &Tables,
    config: &EnrichConfig,
) -> Result<EnrichWarnings, MetricError> {
    let mut warnings = EnrichWarnings::default();
    let mut inputs: BTreeMap<Month, MonthInputs<'_>> = rows.iter().map(|r| (r.month, MonthInputs::default())).collect();

    // Events are visited in timestamp order so that a participant's
    // "first seen" association is chronological. Events outside the rows
    // are ignored.
    let mut events: Vec<(i64, u8, usize)> = Vec::new();
    events.extend(norm.issues.iter().enumerate().map(|(i, r)| (r.created_at, 0, i)));
    events.extend(norm.pulls.iter().enumerate().map(|(i, r)| (r.created_at, 1, i)));
    events.extend(norm.comments.iter().enumerate().map(|(i, c)| (c.created_at, 2, i)));
    events.extend(norm.commits.iter().enumerate().map(|(i, c)| (c.authored_at, 3, i)));
    events.sort_unstable();

    for (ts, kind, i) in events {
        let Some(m) = inputs.get_mut(&Month::from_timestamp(ts)?) else {
            continue;
        };
        match kind {
            0 => {
                let r = &norm.issues[i];
                m.issue_bodies.push(&r.body);
                m.issue_people.push((&r.author_login, r.author_association));
            }
            1 => {
                let r = &norm.pulls[i];
                m.pr_bodies.push(&r.body);
                m.pr_people.push((&r.author_login, r.author_association));
            }
            2 => {
                let c = &norm.comments[i];
                match c.parent_kind {
                    ParentKind::Issue => {
                        m.issue_comments.push(c);
                        m.issue_comment_bodies.push(&c.body);
                        m.issue_people.push((&c.author_login, c.author_association));
                    }
                    ParentKind::Pull | ParentKind::Review => {
                        if c.parent_kind == ParentKind::Review {
                            m.review_comments.push(c);
                        }
                        m.pr_comment_bodies.push(&c.body);
                        m.pr_people.push((&c.author_login, c.author_association));
                    }
                }
            }
            _ => {
                let c = &norm.commits[i];
                m.commit_authors.push((c.author_key(), &c.author_email));
            }
        }
    }

    let profiles: BTreeMap<&str, &UserProfile> = norm.profiles.iter().map(|p| (p.login.as_str(), p)).collect();

    for row in rows.iter_mut() {
        let Some(m) = inputs.get(&row.month) else { continue };
        use Component as C;

        for (comments, useful_c, toxic_c, sentiment_c) in [
            (
                &m.issue_comments,
                C::IssueCommentsUsefulRatio,
                C::IssueCommentsToxicRatio,
                C::IssueCommentsSentimentMedian,
            ),
            (
                &m.review_comments,
                C::ReviewCommentsUsefulRatio,
                C::ReviewCommentsToxicRatio,
                C::ReviewCommentsSentimentMedian,
            ),
        ] {
            let scores = if comments.is_empty() {
                None
            } else {
                match score_comments(comments, scorer) {
                    Ok(s) => Some(s),
                    Err(_) => {
                        warnings.scorer_failures += 1;
                        None
                    }
                }
            };
            let (useful, toxic, sentiment) = match scores {
                Some(s) => text_aggregates(&s),
                None => (None, None, None),
            };
            row.set(useful_c, useful);
            row.set(toxic_c, toxic);
            row.set(sentiment_c, sentiment);
        }

        row.set(C::IssueBodyReadability, mean_readability(&m.issue_bodies));
        row.set(C::PrBodyReadability, mean_readability(&m.pr_bodies));
        row.set(C::IssueCommentsReadability, mean_readability(&m.issue_comment_bodies));
        row.set(C::PrCommentsReadability, mean_readability(&m.pr_comment_bodies));

        for (people, gender_c, location_c, assoc_c, usertype_c) in [
            (
                &m.issue_people,
                C::IssueGenderRatio,
                C::IssueLocationCoverage,
                C::IssueAssociationHeterogeneity,
                C::IssueUserTypeVariation,
            ),
            (
                &m.pr_people,
                C::PrGenderRatio,
                C::PrLocationCoverage,
                C::PrAssociationHeterogeneity,
                C::PrUserTypeVariation,
            ),
        ] {
            let distinct = first_seen(people);
            let participants: Vec<Participant<'_>> = distinct
                .iter()
                .map(|(login, _)| Participant {
                    login,
                    display_name: profiles.get(login).and_then(|p| p.display_name.as_deref()),
                })
                .collect();
            row.set(
                gender_c,
                gender_ratio(&participants, &tables.gender, config.gender_mode),
            );
            let known: Vec<&UserProfile> = distinct.iter().filter_map(|(l, _)| profiles.get(l).copied()).collect();
            let coverage = if distinct.is_empty() {
                None
            } else {
                Some(location_coverage(known.iter().copied(), &tables.country) as f64)
            };
            row.set(location_c, coverage);
            let assoc: DiversityInput = distinct.iter().map(|(_, a)| a.as_str()).collect();
            row.set(assoc_c, shannon_index(&assoc).ok());
            let types: DiversityInput = known.iter().map(|p| p.account_type.as_str()).collect();
            row.set(usertype_c, shannon_index(&types).ok());
        }

        let mut authors: BTreeMap<&str, &str> = BTreeMap::new();
        for (key, email) in &m.commit_authors {
            authors.entry(key.as_str()).or_insert(email);
        }
        let affiliations: DiversityInput = authors.values().map(|e| tables.generic_mail.affiliation(e)).collect();
        row.set(C::CommitAffiliationHeterogeneity, shannon_index(&affiliations).ok());
    }
    Ok(warnings)
}

fn first_seen<'a>(people: &[(&'a str, Association)]) -> Vec<(&'a str, Association)> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for &(login, assoc) in people {
        if seen.insert(login, ()).is_none() {
            out.push((login, assoc));
        }
    }
    out
}

fn score_comments(comments: &[&CommentRecord], scorer: &mut dyn TextScorer) -> Result<Vec<TextScore>, ScorerError> {
    let cleaned: Vec<String> = comments.iter().map(|c| text::strip_for_scoring(&c.body)).collect();
    let requests: Vec<ScoreRequest<'_>> = comments
        .iter()
        .zip(&cleaned)
        .map(|(c, text)| ScoreRequest { id: c.comment_id, text })
        .collect();
    let scores = scorer.score_batch(&requests)?;
    if scores.len() != requests.len() {
        return Err(ScorerError(alloc::format!(
            "expected {} scores, got {}",
            requests.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| !(-1.0..=1.0).contains(&s.sentiment)) {
        return Err(ScorerError("sentiment outside [-1, 1]".into()));
    }
    Ok(scores)
}

/// Useful ratio, toxic ratio, and median sentiment of one month's scores.
pub fn text_aggregates(scores: &[TextScore]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if scores.is_empty() {
        return (None, None, None);
    }
    let n = scores.len() as f64;
    let useful = scores.iter().filter(|s| s.useful).count() as f64 / n;
    let toxic = scores.iter().filter(|s| s.toxic).count() as f64 / n;
    let sentiments: Vec<f64> = scores.iter().map(|s| s.sentiment).collect();
    (Some(useful), Some(toxic), num::median(&sentiments))
}

fn mean_readability(texts: &[&str]) -> Option<f64> {
    let scores: Vec<f64> = texts.iter().filter_map(|t| readability(t)).collect();
    num::mean(&scores)
}
