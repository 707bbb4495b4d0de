//! The 18 leads and the components each one draws.

use alloc::collections::BTreeSet;

use crate::component::{Component, ValueKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// Drawn above the baseline.
    Crest,
    /// Drawn below the baseline.
    Trough,
}

/// One waveform row: spikes in drawing order, and the optional duration
/// component that sets each cycle's width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackSpec {
    /// Sub-lane label for leads with more than one track.
    pub label: Option<&'static str>,
    pub spikes: &'static [(Component, Direction)],
    pub period: Option<Component>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeadSpec {
    pub name: &'static str,
    pub tracks: &'static [TrackSpec],
}

impl LeadSpec {
    pub fn components(&self) -> impl Iterator<Item = Component> + '_ {
        self.tracks
            .iter()
            .flat_map(|t| t.spikes.iter().map(|(c, _)| *c).chain(t.period))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("lead {0:?} has a track without crest or trough components")]
    NoSpikes(&'static str),
    #[error("lead {lead:?}: period component {component} is not a duration")]
    PeriodKind {
        lead: &'static str,
        component: &'static str,
    },
    #[error("lead {lead:?}: {component} is a duration and cannot be a spike")]
    SpikeKind {
        lead: &'static str,
        component: &'static str,
    },
    #[error("registry is empty")]
    Empty,
}

use Component as C;
use Direction::{Crest, Trough};

const fn track(spikes: &'static [(Component, Direction)], period: Option<Component>) -> TrackSpec {
    TrackSpec {
        label: None,
        spikes,
        period,
    }
}

const fn lead(name: &'static str, tracks: &'static [TrackSpec]) -> LeadSpec {
    LeadSpec { name, tracks }
}

/// Number of distinct components drawn by [`REGISTRY`].
pub const STG_COMPONENT_COUNT: usize = 46;

pub static REGISTRY: [LeadSpec; 18] = [
    lead(
        "Issues",
        &[track(
            &[(C::IssuesCreated, Crest), (C::IssuesClosed, Trough)],
            Some(C::IssueClosureDuration),
        )],
    ),
    lead(
        "Altruism",
        &[track(
            &[
                (C::IssueCommentsUsefulRatio, Crest),
                (C::IssueCommentsToxicRatio, Trough),
            ],
            Some(C::IssueClosureDuration),
        )],
    ),
    lead(
        "PRs",
        &[track(
            &[(C::PrsCreated, Crest), (C::PrsClosed, Trough)],
            Some(C::PrClosureDuration),
        )],
    ),
    lead(
        "Utility",
        &[track(
            &[
                (C::ReviewCommentsUsefulRatio, Crest),
                (C::ReviewCommentsToxicRatio, Trough),
            ],
            Some(C::PrClosureDuration),
        )],
    ),
    lead(
        "Commits",
        &[track(
            &[
                (C::CommitsTotal, Crest),
                (C::CommitAuthors, Trough),
                (C::DmmUnitInterfacing, Trough),
                (C::DmmUnitComplexity, Trough),
                (C::DmmUnitSize, Trough),
            ],
            None,
        )],
    ),
    lead(
        "Developer Response I",
        &[track(
            &[(C::IssueReporters, Crest), (C::IssueComments, Trough)],
            Some(C::IssueResponseTime),
        )],
    ),
    lead(
        "Developer Response PR",
        &[track(
            &[(C::PrCreators, Crest), (C::ReviewComments, Trough)],
            Some(C::PrResponseTime),
        )],
    ),
    lead(
        "Labels-I",
        &[track(
            &[(C::IssueLabelsNew, Crest), (C::IssueLabelsTotal, Trough)],
            Some(C::IssueResponseTime),
        )],
    ),
    lead(
        "Labels-PR",
        &[track(
            &[(C::PrLabelsNew, Crest), (C::PrLabelsTotal, Trough)],
            Some(C::PrResponseTime),
        )],
    ),
    lead(
        "Newcomer Support",
        &[track(
            &[(C::NewcomerIssues, Crest), (C::DeduplicatedIssues, Trough)],
            Some(C::IssueResponseTime),
        )],
    ),
    lead(
        "Sentiment (support)",
        &[track(
            &[
                (C::IssueCommentsSentimentMedian, Crest),
                (C::ReviewCommentsSentimentMedian, Trough),
            ],
            Some(C::IssueResponseTime),
        )],
    ),
    lead(
        "Readability I/PR",
        &[
            TrackSpec {
                label: Some("I"),
                spikes: &[(C::IssueCommentsReadability, Crest), (C::IssueBodyReadability, Trough)],
                period: Some(C::IssueResponseTime),
            },
            TrackSpec {
                label: Some("PR"),
                spikes: &[(C::PrCommentsReadability, Crest), (C::PrBodyReadability, Trough)],
                period: Some(C::PrResponseTime),
            },
        ],
    ),
    lead(
        "Emoji Reactions",
        &[track(
            &[
                (C::IssueReactions, Crest),
                (C::IssueCommentReactions, Trough),
                (C::ReviewCommentReactions, Crest),
            ],
            None,
        )],
    ),
    lead(
        "CBE developer C",
        &[track(
            &[
                (C::CommitAffiliationHeterogeneity, Crest),
                (C::MergeParentCommits, Trough),
            ],
            None,
        )],
    ),
    lead(
        "CBE developer I",
        &[track(
            &[(C::IssueGenderRatio, Crest), (C::IssueLocationCoverage, Trough)],
            Some(C::IssueResponseTime),
        )],
    ),
    lead(
        "CBE developer PR",
        &[track(
            &[(C::PrGenderRatio, Crest), (C::PrLocationCoverage, Trough)],
            Some(C::PrResponseTime),
        )],
    ),
    lead(
        "CBE roles I",
        &[track(
            &[
                (C::IssueAssociationHeterogeneity, Crest),
                (C::IssueUserTypeVariation, Trough),
            ],
            Some(C::IssueResponseTime),
        )],
    ),
    lead(
        "CBE roles PR",
        &[track(
            &[(C::PrAssociationHeterogeneity, Crest), (C::PrUserTypeVariation, Trough)],
            Some(C::PrResponseTime),
        )],
    ),
];

/// Check the structural rules every lead must satisfy.
pub fn validate_registry(registry: &[LeadSpec]) -> Result<(), RegistryError> {
    if registry.is_empty() {
        return Err(RegistryError::Empty);
    }
    for lead in registry {
        if lead.tracks.is_empty() {
            return Err(RegistryError::NoSpikes(lead.name));
        }
        for t in lead.tracks {
            if t.spikes.is_empty() {
                return Err(RegistryError::NoSpikes(lead.name));
            }
            if let Some(&(c, _)) = t.spikes.iter().find(|(c, _)| c.kind() == ValueKind::Duration) {
                return Err(RegistryError::SpikeKind {
                    lead: lead.name,
                    component: c.id(),
                });
            }
            if let Some(p) = t.period.filter(|p| p.kind() != ValueKind::Duration) {
                return Err(RegistryError::PeriodKind {
                    lead: lead.name,
                    component: p.id(),
                });
            }
        }
    }
    Ok(())
}

/// Distinct components drawn anywhere in `registry`.
pub fn registry_components(registry: &[LeadSpec]) -> BTreeSet<Component> {
    registry.iter().flat_map(LeadSpec::components).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn registry_is_valid() {
        validate_registry(&REGISTRY).unwrap();
    }

    #[test]
    fn draws_exactly_the_stg_components() {
        let drawn = registry_components(&REGISTRY);
        assert_eq!(drawn.len(), STG_COMPONENT_COUNT);
        let expected: BTreeSet<Component> = Component::stg_components().collect();
        assert_eq!(drawn, expected);
    }

    #[test]
    fn issues_lead_shape() {
        let issues = &REGISTRY[0];
        assert_eq!(issues.name, "Issues");
        assert_eq!(
            issues.tracks[0].spikes,
            &[(C::IssuesCreated, Crest), (C::IssuesClosed, Trough)]
        );
        assert_eq!(issues.tracks[0].period, Some(C::IssueClosureDuration));
    }

    #[test]
    fn leads_without_durations() {
        let no_period: Vec<&str> = REGISTRY
            .iter()
            .filter(|l| l.tracks.iter().all(|t| t.period.is_none()))
            .map(|l| l.name)
            .collect();
        assert_eq!(no_period, ["Commits", "Emoji Reactions", "CBE developer C"]);
        let commits = &REGISTRY[4].tracks[0];
        let crests = commits.spikes.iter().filter(|(_, d)| *d == Crest).count();
        assert_eq!((crests, commits.spikes.len() - crests), (1, 4));
    }

    #[test]
    fn rejects_bad_period() {
        static BAD: [LeadSpec; 1] = [lead(
            "Bad",
            &[track(&[(C::IssuesCreated, Crest)], Some(C::IssuesClosed))],
        )];
        assert!(matches!(validate_registry(&BAD), Err(RegistryError::PeriodKind { .. })));
    }
}
