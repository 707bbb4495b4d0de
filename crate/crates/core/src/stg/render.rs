//! Deterministic SVG output for an [`StgDocument`].

use alloc::string::String;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Cycle, Direction, SpikeState, StgDocument};
use crate::svg::{escape, f2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleConfig {
    pub lane_height: f64,
    pub month_width: f64,
    pub label_width: f64,
    /// Pixels per amplitude unit (one count decade, or one ratio unit).
    pub px_per_unit: f64,
    pub crest_color: String,
    pub trough_color: String,
    pub flat_color: String,
    pub clip_color: String,
    pub font_family: String,
    pub font_size: f64,
}

impl Default for StyleConfig {
    fn default() -> Self {
        Self {
            lane_height: 56.0,
            month_width: 28.0,
            label_width: 170.0,
            px_per_unit: 9.0,
            crest_color: "#1f77b4".into(),
            trough_color: "#d62728".into(),
            flat_color: "#7f7f7f".into(),
            clip_color: "#ff7f0e".into(),
            font_family: "sans-serif".into(),
            font_size: 11.0,
        }
    }
}

const TOP: f64 = 34.0;
const AXIS: f64 = 44.0;
const RIGHT: f64 = 16.0;
const SLOT_GAP: f64 = 4.0;
const TRACK_PAD: f64 = 2.0;

/// Month label spacing: the smallest step from a fixed ladder that keeps
/// labels about 48px apart.
fn label_step(month_width: f64) -> usize {
    [1usize, 2, 3, 4, 6, 12, 24, 60]
        .into_iter()
        .find(|&s| s as f64 * month_width >= 48.0)
        .unwrap_or(120)
}

/// Render the document. Identical inputs give identical bytes.
pub fn render_svg(doc: &StgDocument, style: &StyleConfig) -> String {
    let months = doc.window.months();
    let plot_w = months as f64 * style.month_width;
    let width = style.label_width + plot_w + RIGHT;
    let height = TOP + doc.lanes.len() as f64 * style.lane_height + AXIS;
    let w_max = doc.max_width();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="{ff}" font-size="{fs}">"#,
        w = f2(width),
        h = f2(height),
        ff = escape(&style.font_family),
        fs = f2(style.font_size),
    );
    let _ = writeln!(
        s,
        "<style>.crest{{fill:{c};fill-opacity:0.85}}.trough{{fill:{t};fill-opacity:0.85}}.negative{{fill-opacity:0.4;stroke:{t};stroke-width:0.6;stroke-dasharray:1.5 1}}.flat{{stroke:{f};stroke-width:1}}.absent{{stroke-dasharray:2 2;stroke-opacity:0.5}}.clip{{fill:{k}}}.baseline{{stroke:#d0d0d0;stroke-width:0.5}}.sep{{stroke:#e8e8e8;stroke-width:1}}.tick{{stroke:#555;stroke-width:0.5}}</style>",
        c = escape(&style.crest_color),
        t = escape(&style.trough_color),
        f = escape(&style.flat_color),
        k = escape(&style.clip_color),
    );
    let _ = writeln!(
        s,
        r#"<text x="8" y="{}" font-size="{}">{} STG {}..{}</text>"#,
        f2(TOP - 14.0),
        f2(style.font_size + 2.0),
        escape(&doc.repo_slug),
        doc.window.first,
        doc.window.last
    );

    for (li, lane) in doc.lanes.iter().enumerate() {
        let y0 = TOP + li as f64 * style.lane_height;
        let _ = writeln!(s, r#"<g class="lane" data-lead="{}">"#, escape(lane.name));
        let _ = writeln!(
            s,
            r#"<line class="sep" x1="0.00" y1="{y}" x2="{x}" y2="{y}"/>"#,
            y = f2(y0),
            x = f2(width)
        );
        let _ = writeln!(
            s,
            r#"<text x="8" y="{}">{}</text>"#,
            f2(y0 + style.lane_height / 2.0 + style.font_size / 3.0),
            escape(lane.name)
        );
        let track_h = style.lane_height / lane.tracks.len() as f64;
        for (ti, track) in lane.tracks.iter().enumerate() {
            let base = y0 + track_h * (ti as f64 + 0.5);
            let half = track_h / 2.0 - TRACK_PAD;
            if let Some(label) = track.label {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" font-size="{}" text-anchor="end">{}</text>"#,
                    f2(style.label_width - 6.0),
                    f2(base + style.font_size / 3.0),
                    f2(style.font_size - 2.0),
                    escape(label)
                );
            }
            let _ = writeln!(
                s,
                r#"<line class="baseline" x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#,
                f2(style.label_width),
                f2(style.label_width + plot_w),
                y = f2(base)
            );
            for (mi, cycle) in track.cycles.iter().enumerate() {
                let slot_x = style.label_width + mi as f64 * style.month_width + SLOT_GAP / 2.0;
                let glyph_w = (style.month_width - SLOT_GAP) * cycle.width / w_max;
                render_cycle(&mut s, cycle, slot_x, glyph_w, base, half, style.px_per_unit);
            }
        }
        s.push_str("</g>\n");
    }

    let axis_y = TOP + doc.lanes.len() as f64 * style.lane_height;
    let step = label_step(style.month_width);
    s.push_str("<g class=\"axis\">\n");
    let _ = writeln!(
        s,
        r#"<line class="tick" x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#,
        f2(style.label_width),
        f2(style.label_width + plot_w),
        y = f2(axis_y)
    );
    for (i, month) in doc.months().enumerate() {
        let x = style.label_width + i as f64 * style.month_width;
        let _ = writeln!(
            s,
            r#"<line class="tick" x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#,
            f2(axis_y),
            f2(axis_y + 5.0),
            x = f2(x)
        );
        if i % step == 0 {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="{}">{}</text>"#,
                f2(x),
                f2(axis_y + 18.0),
                f2(style.font_size - 2.0),
                month
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn render_cycle(s: &mut String, cycle: &Cycle, x: f64, glyph_w: f64, base: f64, half: f64, px_per_unit: f64) {
    let n = cycle.spikes.len().max(1) as f64;
    let spike_w = glyph_w / n;
    for (j, spike) in cycle.spikes.iter().enumerate() {
        let x0 = x + j as f64 * spike_w;
        let x1 = x0 + spike_w;
        let id = spike.component.id();
        if spike.state != SpikeState::Value {
            let class = if spike.state == SpikeState::Absent {
                "flat absent"
            } else {
                "flat zero"
            };
            let _ = writeln!(
                s,
                r#"<line class="{class}" data-component="{id}" data-month="{}" x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#,
                cycle.month,
                f2(x0),
                f2(x1),
                y = f2(base)
            );
            continue;
        }
        let px = spike.amplitude * px_per_unit;
        let clipped = px.abs() > half;
        let px = px.clamp(-half, half);
        let apex_x = x0 + spike_w / 2.0;
        let apex_y = base - px;
        let dir = match spike.direction {
            Direction::Crest => "crest",
            Direction::Trough => "trough",
        };
        let neg = if spike.negative { " negative" } else { "" };
        let value = spike.value.unwrap_or(0.0);
        let _ = writeln!(
            s,
            r#"<path class="spike {dir}{neg}" data-component="{id}" data-month="{}" data-value="{value}" data-amp="{:.6}" d="M{} {b} L{} {} L{} {b} Z"/>"#,
            cycle.month,
            spike.amplitude,
            f2(x0),
            f2(apex_x),
            f2(apex_y),
            f2(x1),
            b = f2(base)
        );
        if clipped {
            let _ = writeln!(
                s,
                r#"<circle class="clip" cx="{}" cy="{}" r="1.50"/>"#,
                f2(apex_x),
                f2(apex_y)
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::Component;
    use crate::metricize::MonthlyRow;
    use crate::stg::{build_stg, resolve_window, Window, REGISTRY};
    use crate::time::Month;
    use alloc::vec::Vec;

    fn doc() -> StgDocument {
        let months: Vec<Month> = Month::new(2021, 1)
            .unwrap()
            .range_inclusive(Month::new(2021, 3).unwrap())
            .collect();
        let rows: Vec<MonthlyRow> = months
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let mut r = MonthlyRow::new("o/r", m);
                r.set(Component::IssuesCreated, Some((i * 10) as f64));
                r.set(Component::IssuesClosed, Some(1e9));
                r.set(Component::IssueCommentsSentimentMedian, Some(-0.25));
                r
            })
            .collect();
        let w = resolve_window(&rows, Window::All).unwrap();
        build_stg("o/r", &rows, w, &REGISTRY).unwrap()
    }

    #[test]
    fn same_doc_same_bytes() {
        let d = doc();
        let style = StyleConfig::default();
        assert_eq!(render_svg(&d, &style), render_svg(&d, &style));
    }

    #[test]
    fn marks_zero_absent_negative_and_clipped() {
        let svg = render_svg(&doc(), &StyleConfig::default());
        assert!(svg.contains(r#"class="flat zero" data-component="issues_created" data-month="2021-01""#));
        assert!(svg.contains(r#"class="flat absent" data-component="prs_created""#));
        assert!(svg.contains("spike crest negative"));
        // log10(1 + 1e9) = 9 units exceeds the half-height
        assert_eq!(svg.matches(r#"class="clip""#).count(), 3);
        assert_eq!(svg.matches(r#"<g class="lane""#).count(), 18);
        assert!(svg.contains(">Readability I/PR<") && svg.contains(">PR<"));
    }
}
