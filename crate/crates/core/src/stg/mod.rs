//! Software sustainability graph: monthly rows laid out as 18 ECG-like
//! leads, and their SVG rendering.
//!
//! Each lead draws one cycle per month. A cycle is a run of triangular
//! spikes (crests above the baseline, troughs below) whose total width
//! comes from the lead's duration component.

pub mod lead;
pub mod render;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use lead::{validate_registry, Direction, LeadSpec, RegistryError, TrackSpec, REGISTRY, STG_COMPONENT_COUNT};
pub use render::{render_svg, StyleConfig};

use crate::component::{Component, ValueKind};
use crate::metricize::MonthlyRow;
use crate::num;
use crate::time::Month;

/// Cycle width for leads (or months) without a duration value.
pub const UNIT_WIDTH: f64 = 1.0;
/// Narrowest duration-derived cycle width, so zero durations stay visible.
pub const MIN_PERIOD_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StgError {
    #[error("the window contains no months")]
    EmptyWindow,
    #[error("invalid window {0:?}: expected a positive number of months or \"all\"")]
    InvalidWindow(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// How much history a graph shows, counted back from the latest month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Window {
    Months(u32),
    All,
}

impl Window {
    pub const STANDARD: [Window; 5] = [
        Window::Months(12),
        Window::Months(36),
        Window::Months(60),
        Window::Months(120),
        Window::All,
    ];
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Months(n) => write!(f, "{n}"),
            Window::All => f.write_str("all"),
        }
    }
}

impl FromStr for Window {
    type Err = StgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Window::All);
        }
        match s.parse::<u32>() {
            Ok(n) if n > 0 => Ok(Window::Months(n)),
            _ => Err(StgError::InvalidWindow(s.into())),
        }
    }
}

/// Inclusive month range chosen for a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedWindow {
    pub first: Month,
    pub last: Month,
    /// The request was longer than the available history and was cut to it.
    pub clamped: bool,
}

impl ResolvedWindow {
    pub fn months(&self) -> usize {
        self.first.span_to(self.last)
    }
}

/// Resolve `window` against the months covered by `rows`.
pub fn resolve_window(rows: &[MonthlyRow], window: Window) -> Result<ResolvedWindow, StgError> {
    let first = rows.iter().map(|r| r.month).min().ok_or(StgError::EmptyWindow)?;
    let last = rows.iter().map(|r| r.month).max().ok_or(StgError::EmptyWindow)?;
    let available = first.span_to(last);
    Ok(match window {
        Window::All => ResolvedWindow {
            first,
            last,
            clamped: false,
        },
        Window::Months(0) => return Err(StgError::EmptyWindow),
        Window::Months(n) if n as usize >= available => ResolvedWindow {
            first,
            last,
            clamped: n as usize > available,
        },
        Window::Months(n) => ResolvedWindow {
            first: last.offset(1 - i64::from(n)),
            last,
            clamped: false,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeState {
    Value,
    Zero,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub component: Component,
    pub direction: Direction,
    pub value: Option<f64>,
    /// Signed height in amplitude units: positive for crests, negative for
    /// troughs, zero when flat.
    pub amplitude: f64,
    pub state: SpikeState,
    /// The raw value was negative and is drawn by magnitude.
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub month: Month,
    pub spikes: Vec<Spike>,
    /// Positive width in period units.
    pub width: f64,
    pub period_value: Option<f64>,
    /// Cycles are never joined to their neighbours.
    pub connected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub label: Option<&'static str>,
    pub cycles: Vec<Cycle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub name: &'static str,
    pub tracks: Vec<Track>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StgDocument {
    pub repo_slug: String,
    pub window: ResolvedWindow,
    pub lanes: Vec<Lane>,
}

impl StgDocument {
    pub fn months(&self) -> impl Iterator<Item = Month> {
        self.window.first.range_inclusive(self.window.last)
    }

    pub fn max_width(&self) -> f64 {
        self.lanes
            .iter()
            .flat_map(|l| &l.tracks)
            .flat_map(|t| &t.cycles)
            .map(|c| c.width)
            .fold(UNIT_WIDTH, f64::max)
    }
}

/// Linear scale for non-count values. Readability scores live on a
/// 0-100 scale and are brought down to the same order as ratios.
pub fn unit_scale(component: Component) -> f64 {
    match component {
        Component::IssueCommentsReadability
        | Component::IssueBodyReadability
        | Component::PrCommentsReadability
        | Component::PrBodyReadability => 0.01,
        _ => 1.0,
    }
}

/// Unsigned height of a value: `log10(1 + v)` for counts, `|v| * scale`
/// otherwise.
pub fn magnitude(component: Component, value: f64) -> f64 {
    match component.kind() {
        ValueKind::Count | ValueKind::Duration => num::log10_1p(value.max(0.0)),
        ValueKind::Ratio | ValueKind::Score | ValueKind::Index => num::abs(value) * unit_scale(component),
    }
}

/// Cycle width from a duration in seconds.
pub fn period_width(seconds: Option<f64>) -> f64 {
    match seconds {
        Some(s) => num::log10_1p(s.max(0.0)).max(MIN_PERIOD_WIDTH),
        None => UNIT_WIDTH,
    }
}

fn spike(component: Component, direction: Direction, value: Option<f64>) -> Spike {
    let (amplitude, state, negative) = match value {
        None => (0.0, SpikeState::Absent, false),
        Some(v) if v == 0.0 || !v.is_finite() => (0.0, SpikeState::Zero, false),
        Some(v) => {
            let m = magnitude(component, v);
            let signed = match direction {
                Direction::Crest => m,
                Direction::Trough => -m,
            };
            (signed, SpikeState::Value, v < 0.0)
        }
    };
    Spike {
        component,
        direction,
        value,
        amplitude,
        state,
        negative,
    }
}

/// Lay out `rows` for the months of `window`. Months without a row are
/// drawn as absent; rows outside the window are ignored.
pub fn build_stg(
    repo_slug: &str,
    rows: &[MonthlyRow],
    window: ResolvedWindow,
    registry: &[LeadSpec],
) -> Result<StgDocument, StgError> {
    validate_registry(registry)?;
    if window.first > window.last {
        return Err(StgError::EmptyWindow);
    }
    let months: Vec<Month> = window.first.range_inclusive(window.last).collect();
    let by_month: Vec<Option<&MonthlyRow>> = months.iter().map(|m| rows.iter().find(|r| r.month == *m)).collect();
    let value = |row: Option<&MonthlyRow>, c: Component| row.and_then(|r| r.get(c));

    let lanes = registry
        .iter()
        .map(|lead| Lane {
            name: lead.name,
            tracks: lead
                .tracks
                .iter()
                .map(|t| Track {
                    label: t.label,
                    cycles: months
                        .iter()
                        .zip(&by_month)
                        .map(|(&month, &row)| {
                            let period_value = t.period.and_then(|p| value(row, p));
                            Cycle {
                                month,
                                spikes: t.spikes.iter().map(|&(c, d)| spike(c, d, value(row, c))).collect(),
                                width: period_width(period_value),
                                period_value,
                                connected: false,
                            }
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    Ok(StgDocument {
        repo_slug: repo_slug.into(),
        window,
        lanes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn month(y: i32, m: u32) -> Month {
        Month::new(y, m).unwrap()
    }

    fn row(m: Month) -> MonthlyRow {
        MonthlyRow::new("o/r", m)
    }

    #[test]
    fn count_amplitudes() {
        assert_eq!(magnitude(Component::IssuesCreated, 99.0), 2.0);
        assert_eq!(magnitude(Component::IssuesCreated, 0.0), 0.0);
        assert_eq!(magnitude(Component::IssueCommentsUsefulRatio, 0.75), 0.75);
        assert_eq!(magnitude(Component::IssueBodyReadability, 60.0), 0.6);
    }

    #[test]
    fn one_day_period() {
        let w = period_width(Some(86_400.0));
        assert!((w - 4.9365).abs() < 5e-5, "{w}");
        assert_eq!(period_width(None), UNIT_WIDTH);
        assert_eq!(period_width(Some(0.0)), MIN_PERIOD_WIDTH);
    }

    #[test]
    fn zero_and_absent_are_flat() {
        assert_eq!(
            spike(Component::IssuesCreated, Direction::Crest, Some(0.0)).state,
            SpikeState::Zero
        );
        let s = spike(Component::IssuesCreated, Direction::Crest, None);
        assert_eq!((s.amplitude, s.state), (0.0, SpikeState::Absent));
        let t = spike(Component::IssuesClosed, Direction::Trough, Some(9.0));
        assert_eq!(t.amplitude, -1.0);
    }

    #[test]
    fn negative_sentiment_keeps_direction() {
        let s = spike(Component::IssueCommentsSentimentMedian, Direction::Crest, Some(-0.5));
        assert_eq!(s.amplitude, 0.5);
        assert!(s.negative);
        let t = spike(Component::ReviewCommentsSentimentMedian, Direction::Trough, Some(-0.5));
        assert_eq!(t.amplitude, -0.5);
    }

    #[test]
    fn window_resolution() {
        let rows: Vec<MonthlyRow> = month(2020, 1).range_inclusive(month(2021, 12)).map(row).collect();
        let w = resolve_window(&rows, Window::Months(12)).unwrap();
        assert_eq!((w.first, w.last, w.clamped), (month(2021, 1), month(2021, 12), false));
        let w = resolve_window(&rows, Window::Months(36)).unwrap();
        assert_eq!((w.first, w.clamped), (month(2020, 1), true));
        let w = resolve_window(&rows, Window::Months(24)).unwrap();
        assert_eq!((w.first, w.clamped), (month(2020, 1), false));
        assert_eq!(resolve_window(&[], Window::All), Err(StgError::EmptyWindow));
        assert_eq!("all".parse::<Window>(), Ok(Window::All));
        assert_eq!("60".parse::<Window>(), Ok(Window::Months(60)));
        assert!("0".parse::<Window>().is_err());
    }

    #[test]
    fn document_shape() {
        let mut r = row(month(2021, 3));
        r.set(Component::IssuesCreated, Some(99.0));
        r.set(Component::IssueClosureDuration, Some(86_400.0));
        let rows = vec![r, row(month(2021, 5))];
        let w = resolve_window(&rows, Window::All).unwrap();
        let doc = build_stg("o/r", &rows, w, &REGISTRY).unwrap();
        assert_eq!(doc.lanes.len(), 18);
        for lane in &doc.lanes {
            for t in &lane.tracks {
                assert_eq!(t.cycles.len(), 3);
                assert!(t.cycles.iter().all(|c| c.width > 0.0 && !c.connected));
            }
        }
        let issues = &doc.lanes[0].tracks[0].cycles;
        assert_eq!(issues[0].spikes[0].amplitude, 2.0);
        // April has no row at all
        assert_eq!(issues[1].spikes[0].state, SpikeState::Absent);
        assert_eq!(doc.lanes[11].tracks.len(), 2);
    }
}
