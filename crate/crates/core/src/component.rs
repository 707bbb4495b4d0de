//! The canonical component registry.
//!
//! Every monthly value is keyed by a [`Component`]. The first 46 entries are
//! the STG components in lead order (a component shared by several leads,
//! such as an issue response time, appears once at its first use). Two
//! auxiliary columns follow that are aggregated but not drawn.

use core::fmt;
use core::str::FromStr;

/// How a component's value is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    /// Nonnegative integer count.
    Count,
    /// Seconds.
    Duration,
    /// Proportion in [0, 1].
    Ratio,
    /// Model or formula score (sentiment, readability).
    Score,
    /// Diversity index.
    Index,
}

macro_rules! components {
    ($( $variant:ident => $id:literal, $kind:ident, $stg:literal; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Component {
            $( $variant, )*
        }

        impl Component {
            /// Registry order; also the column order of `monthly.csv`.
            pub const ALL: &'static [Component] = &[ $( Component::$variant, )* ];

            pub fn id(self) -> &'static str {
                match self {
                    $( Component::$variant => $id, )*
                }
            }

            pub fn kind(self) -> ValueKind {
                match self {
                    $( Component::$variant => ValueKind::$kind, )*
                }
            }

            /// Whether the component is drawn in the STG.
            pub fn is_stg(self) -> bool {
                match self {
                    $( Component::$variant => $stg, )*
                }
            }
        }
    };
}

components! {
    // Issues
    IssuesCreated => "issues_created", Count, true;
    IssuesClosed => "issues_closed", Count, true;
    IssueClosureDuration => "issue_closure_duration", Duration, true;
    // Altruism
    IssueCommentsUsefulRatio => "issue_comments_useful_ratio", Ratio, true;
    IssueCommentsToxicRatio => "issue_comments_toxic_ratio", Ratio, true;
    // PRs
    PrsCreated => "prs_created", Count, true;
    PrsClosed => "prs_closed", Count, true;
    PrClosureDuration => "pr_closure_duration", Duration, true;
    // Utility
    ReviewCommentsUsefulRatio => "review_comments_useful_ratio", Ratio, true;
    ReviewCommentsToxicRatio => "review_comments_toxic_ratio", Ratio, true;
    // Commits
    CommitsTotal => "commits_total", Count, true;
    CommitAuthors => "commit_authors", Count, true;
    DmmUnitInterfacing => "dmm_unit_interfacing", Ratio, true;
    DmmUnitComplexity => "dmm_unit_complexity", Ratio, true;
    DmmUnitSize => "dmm_unit_size", Ratio, true;
    // Developer Response I
    IssueReporters => "issue_reporters", Count, true;
    IssueComments => "issue_comments", Count, true;
    IssueResponseTime => "issue_response_time", Duration, true;
    // Developer Response PR
    PrCreators => "pr_creators", Count, true;
    ReviewComments => "review_comments", Count, true;
    PrResponseTime => "pr_response_time", Duration, true;
    // Labels-I
    IssueLabelsNew => "issue_labels_new", Count, true;
    IssueLabelsTotal => "issue_labels_total", Count, true;
    // Labels-PR
    PrLabelsNew => "pr_labels_new", Count, true;
    PrLabelsTotal => "pr_labels_total", Count, true;
    // Newcomer Support
    NewcomerIssues => "newcomer_issues", Count, true;
    DeduplicatedIssues => "deduplicated_issues", Count, true;
    // Sentiment
    IssueCommentsSentimentMedian => "issue_comments_sentiment_median", Score, true;
    ReviewCommentsSentimentMedian => "review_comments_sentiment_median", Score, true;
    // Readability I/PR
    IssueCommentsReadability => "issue_comments_readability", Score, true;
    IssueBodyReadability => "issue_body_readability", Score, true;
    PrCommentsReadability => "pr_comments_readability", Score, true;
    PrBodyReadability => "pr_body_readability", Score, true;
    // Emoji Reactions
    IssueReactions => "issue_reactions", Count, true;
    IssueCommentReactions => "issue_comment_reactions", Count, true;
    ReviewCommentReactions => "review_comment_reactions", Count, true;
    // CBE developer C
    CommitAffiliationHeterogeneity => "commit_affiliation_heterogeneity", Index, true;
    MergeParentCommits => "merge_parent_commits", Count, true;
    // CBE developer I / PR
    IssueGenderRatio => "issue_gender_ratio", Ratio, true;
    IssueLocationCoverage => "issue_location_coverage", Count, true;
    PrGenderRatio => "pr_gender_ratio", Ratio, true;
    PrLocationCoverage => "pr_location_coverage", Count, true;
    // CBE roles I / PR
    IssueAssociationHeterogeneity => "issue_association_heterogeneity", Index, true;
    IssueUserTypeVariation => "issue_user_type_variation", Index, true;
    PrAssociationHeterogeneity => "pr_association_heterogeneity", Index, true;
    PrUserTypeVariation => "pr_user_type_variation", Index, true;
    // Auxiliary
    PrsMerged => "prs_merged", Count, false;
    IssuesClosedOpenedRatio => "issues_closed_opened_ratio", Ratio, false;
}

impl Component {
    pub fn stg_components() -> impl Iterator<Item = Component> {
        Self::ALL.iter().copied().filter(|c| c.is_stg())
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_sentiment(self) -> bool {
        matches!(
            self,
            Component::IssueCommentsSentimentMedian | Component::ReviewCommentsSentimentMedian
        )
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown component id {0:?}")]
pub struct UnknownComponent(pub alloc::string::String);

impl FromStr for Component {
    type Err = UnknownComponent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.id() == s)
            .ok_or_else(|| UnknownComponent(s.into()))
    }
}
