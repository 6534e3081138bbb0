//! Deterministic SVG plots of episode logs.

use std::fmt::Write;

use cogrisk_core::{AgentKind, EpisodeLog, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Panel {
    Speed,
    Accel,
    Heading,
}

impl Panel {
    fn label(self) -> &'static str {
        match self {
            Panel::Speed => "speed (m/s)",
            Panel::Accel => "acceleration (m/s²)",
            Panel::Heading => "heading (rad)",
        }
    }
}

impl std::str::FromStr for Panel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "speed" => Ok(Panel::Speed),
            "accel" => Ok(Panel::Accel),
            "heading" => Ok(Panel::Heading),
            other => Err(format!("unknown panel '{other}' (speed, accel, heading)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderOptions {
    /// Width of the trajectory plot, px.
    pub width: f64,
    /// Height of the trajectory plot, px.
    pub height: f64,
    pub margin: f64,
    /// Height of each time-series panel, px.
    pub panel_height: f64,
    pub panels: Vec<Panel>,
    /// Draw a dot at every logged position.
    pub step_markers: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { width: 800.0, height: 500.0, margin: 40.0, panel_height: 160.0, panels: Vec::new(), step_markers: true }
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn colour(agent: usize) -> &'static str {
    if agent == 0 {
        "#222222"
    } else {
        PALETTE[(agent - 1) % PALETTE.len()]
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;").replace('\'', "&apos;")
}

/// Affine map from a data box onto a pixel box with y pointing up.
struct Frame {
    x0: f64,
    y0: f64,
    scale_x: f64,
    scale_y: f64,
    left: f64,
    bottom: f64,
}

impl Frame {
    fn fit(min: Vec2, max: Vec2, left: f64, top: f64, width: f64, height: f64, equal: bool) -> Self {
        let span_x = (max.x - min.x).max(1e-9);
        let span_y = (max.y - min.y).max(1e-9);
        let (mut sx, mut sy) = (width / span_x, height / span_y);
        if equal {
            let s = sx.min(sy);
            sx = s;
            sy = s;
        }
        let pad_x = (width - span_x * sx) / 2.0;
        let pad_y = (height - span_y * sy) / 2.0;
        Self { x0: min.x, y0: min.y, scale_x: sx, scale_y: sy, left: left + pad_x, bottom: top + height - pad_y }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (self.left + (p.x - self.x0) * self.scale_x, self.bottom - (p.y - self.y0) * self.scale_y)
    }
}

fn points(frame: &Frame, pts: impl Iterator<Item = Vec2>) -> String {
    pts.map(|p| {
        let (x, y) = frame.map(p);
        format!("{x:.2},{y:.2}")
    })
    .collect::<Vec<_>>()
    .join(" ")
}

/// Steps at which a pair of agents comes into contact: one event per pair
/// per contiguous run of colliding steps.
pub fn collision_events(log: &EpisodeLog) -> Vec<(usize, (usize, usize))> {
    let mut events = Vec::new();
    let mut previous: &[(usize, usize)] = &[];
    for (k, step) in log.steps.iter().enumerate() {
        for &pair in &step.collisions {
            if !previous.contains(&pair) {
                events.push((k, pair));
            }
        }
        previous = &step.collisions;
    }
    events
}

pub fn render_svg(log: &EpisodeLog, options: &RenderOptions) -> String {
    let m = options.margin;
    let total_width = options.width + 2.0 * m;
    let panels_height = options.panels.len() as f64 * (options.panel_height + m);
    let total_height = options.height + 2.0 * m + panels_height;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_width:.0}" height="{total_height:.0}" viewBox="0 0 {total_width:.0} {total_height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{m:.0}" y="{:.0}">{} | seed {} | {} | {}</text>"#,
        m * 0.6,
        escape(&log.scenario_id),
        log.seed,
        log.model.name(),
        log.outcome.name()
    );

    let mut all: Vec<Vec2> = log.steps.iter().flat_map(|s| s.agents.iter().map(|a| a.position())).collect();
    all.extend(log.agents.iter().map(|a| a.goal));
    let (min, max) = all.iter().fold((Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)), |(lo, hi), p| {
        (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y)))
    });
    let (min, max) = if all.is_empty() { (Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0)) } else { (min - Vec2::new(1.0, 1.0), max + Vec2::new(1.0, 1.0)) };
    let frame = Frame::fit(min, max, m, m, options.width, options.height, true);
    let _ = writeln!(svg, r##"<rect class="plot-area" x="{m:.0}" y="{m:.0}" width="{:.0}" height="{:.0}" fill="none" stroke="#bbbbbb"/>"##, options.width, options.height);

    for (a, info) in log.agents.iter().enumerate() {
        let c = colour(a);
        let traj = log.trajectory(a);
        let kind = match info.kind {
            AgentKind::Av => "av",
            AgentKind::Pedestrian => "pedestrian",
        };
        let _ = writeln!(svg, r#"<g class="agent {kind}" id="agent-{a}">"#);
        let _ = writeln!(svg, r#"<polyline class="trajectory" fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, points(&frame, traj.iter().copied()));
        if options.step_markers {
            for p in &traj {
                let (x, y) = frame.map(*p);
                let _ = writeln!(svg, r#"<circle class="step-marker" cx="{x:.2}" cy="{y:.2}" r="2" fill="{c}"/>"#);
            }
        }
        if let (Some(first), Some(last)) = (traj.first(), traj.last()) {
            let (x, y) = frame.map(*first);
            let _ = writeln!(svg, r#"<rect class="start" x="{:.2}" y="{:.2}" width="8" height="8" fill="white" stroke="{c}" stroke-width="2"/>"#, x - 4.0, y - 4.0);
            let (x, y) = frame.map(*last);
            let radius = (info.radius * frame.scale_x).max(3.0);
            let _ = writeln!(svg, r#"<circle class="final" cx="{x:.2}" cy="{y:.2}" r="{radius:.2}" fill="{c}" fill-opacity="0.35" stroke="{c}"/>"#);
        }
        let (x, y) = frame.map(info.goal);
        let _ = writeln!(
            svg,
            r#"<polygon class="goal" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            x,
            y - 6.0,
            x + 6.0,
            y,
            x,
            y + 6.0,
            x - 6.0,
            y
        );
        let _ = writeln!(svg, r#"<text class="label" x="{:.2}" y="{:.2}" fill="{c}">{a}</text>"#, x + 8.0, y - 8.0);
        let _ = writeln!(svg, "</g>");
    }

    for (k, (i, j)) in collision_events(log) {
        let step = &log.steps[k];
        let p = (step.agents[i].position() + step.agents[j].position()) / 2.0;
        let (x, y) = frame.map(p);
        let _ = writeln!(
            svg,
            r##"<path class="collision-marker" data-step="{k}" data-agents="{i} {j}" d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}" stroke="#e00000" stroke-width="3"/>"##,
            x - 7.0,
            y - 7.0,
            x + 7.0,
            y + 7.0,
            x - 7.0,
            y + 7.0,
            x + 7.0,
            y - 7.0
        );
    }

    for (n, panel) in options.panels.iter().enumerate() {
        let top = options.height + 2.0 * m + n as f64 * (options.panel_height + m);
        render_panel(&mut svg, log, *panel, m, top, options.width, options.panel_height);
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_panel(svg: &mut String, log: &EpisodeLog, panel: Panel, left: f64, top: f64, width: f64, height: f64) {
    let value = |s: &cogrisk_core::log::AgentSnapshot| match panel {
        Panel::Speed => s.speed,
        Panel::Accel => s.accel,
        Panel::Heading => s.heading,
    };
    let series: Vec<Vec<Vec2>> = (0..log.agents.len())
        .map(|a| log.steps.iter().map(|s| Vec2::new(s.time, value(&s.agents[a]))).collect())
        .collect();
    let flat = series.iter().flatten();
    let lo = flat.clone().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |acc, p| Vec2::new(acc.x.min(p.x), acc.y.min(p.y)));
    let hi = flat.fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |acc, p| Vec2::new(acc.x.max(p.x), acc.y.max(p.y)));
    let (lo, hi) = if lo.x.is_finite() { (lo - Vec2::new(0.0, 0.1), hi + Vec2::new(0.0, 0.1)) } else { (Vec2::ZERO, Vec2::new(1.0, 1.0)) };
    let frame = Frame::fit(lo, hi, left, top, width, height, false);
    let name = match panel {
        Panel::Speed => "speed",
        Panel::Accel => "accel",
        Panel::Heading => "heading",
    };
    let _ = writeln!(svg, r#"<g class="panel {name}">"#);
    let _ = writeln!(svg, r##"<rect x="{left:.0}" y="{top:.0}" width="{width:.0}" height="{height:.0}" fill="none" stroke="#bbbbbb"/>"##);
    let _ = writeln!(svg, r#"<text x="{left:.0}" y="{:.0}">{} vs time (s), range [{:.3}, {:.3}]</text>"#, top - 4.0, escape(panel.label()), lo.y, hi.y);
    for (a, s) in series.iter().enumerate() {
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, colour(a), points(&frame, s.iter().copied()));
    }
    let _ = writeln!(svg, "</g>");
}
