//! Core algorithms for repository sustainability analysis.
//!
//! Everything here is pure computation over already-normalized records:
//! monthly metric aggregation, text and community enrichment, the
//! delta-maintainability model, STG waveform layout and SVG rendering,
//! nonparametric project comparison, and fighting-words token scoring.
//! The crate is `no_std` and only needs `alloc`; IO, HTTP, git, and file
//! formats live in the `repoecg` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod component;
pub mod dmm;
pub mod enrich;
pub mod metricize;
mod num;
pub mod record;
pub mod stats;
pub mod stg;
mod svg;
pub mod time;
pub mod wordscore;

pub use component::{Component, ValueKind};
pub use metricize::{aggregate_monthly, MonthlyRow};
pub use record::{
    AccountType, Association, CommentRecord, CommitRecord, IssueRecord, ParentKind, PullRecord, RecordSet, UserProfile,
};
pub use time::Month;
