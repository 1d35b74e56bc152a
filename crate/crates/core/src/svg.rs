//! Minimal SVG plots: polylines, markers and rectangles on linear or log axes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            style: Style::Line,
        }
    }

    pub fn markers(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            style: Style::Markers,
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` in data coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub group: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Same scale on both axes.
    pub equal_aspect: bool,
    pub series: Vec<Series>,
    pub rects: Vec<Rect>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log { v.log10() } else { v };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let u = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                let label = if self.log { format!("1e{u:.1}") } else { format!("{u:.3}") };
                (i as f64 / 4.0, label)
            })
            .collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    pub fn render(&self) -> String {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(self.rects.iter().flat_map(|r| r.x));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.rects.iter().flat_map(|r| r.y));
        let mut ax = Axis::fit(xs, self.log_x);
        let mut ay = Axis::fit(ys, self.log_y);
        if self.equal_aspect && !self.log_x && !self.log_y {
            let half = 0.5 * (ax.hi - ax.lo).max(ay.hi - ay.lo);
            let (cx, cy) = (0.5 * (ax.lo + ax.hi), 0.5 * (ay.lo + ay.hi));
            ax = Axis { lo: cx - half, hi: cx + half, log: false };
            ay = Axis { lo: cy - half, hi: cy + half, log: false };
        }
        let pw = WIDTH - 2.0 * MARGIN;
        let ph = HEIGHT - 2.0 * MARGIN;
        let px = |v: f64| ax.frac(v).map(|f| MARGIN + f * pw);
        let py = |v: f64| ay.frac(v).map(|f| HEIGHT - MARGIN - f * ph);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (f, label) in ax.ticks() {
            let x = MARGIN + f * pw;
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                HEIGHT - MARGIN + 16.0,
                escape(&label)
            );
        }
        for (f, label) in ay.ticks() {
            let y = HEIGHT - MARGIN - f * ph;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                escape(&label)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        for r in &self.rects {
            let (Some(x0), Some(x1), Some(y0), Some(y1)) = (px(r.x[0]), px(r.x[1]), py(r.y[0]), py(r.y[1])) else {
                continue;
            };
            let color = COLORS[r.group % COLORS.len()];
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.6"/>"#,
                x0.min(x1),
                y0.min(y1),
                (x1 - x0).abs().max(0.2),
                (y1 - y0).abs().max(0.2)
            );
        }

        for (idx, s) in self.series.iter().enumerate() {
            let color = COLORS[idx % COLORS.len()];
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter_map(|&(x, y)| Some((px(x)?, py(y)?)))
                .collect();
            match s.style {
                Style::Line => {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                        path.join(" ")
                    );
                }
                Style::Markers => {
                    for (x, y) in pts {
                        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}"/>"#);
                    }
                }
            }
            let ly = MARGIN + 14.0 + 16.0 * idx as f64;
            let lx = WIDTH - MARGIN - 140.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="3"/>"#,
                ly - 4.0,
                lx + 18.0,
                ly - 4.0
            );
            let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 24.0, escape(&s.name));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_rects() {
        let mut p = Plot::new("t <x>", "x", "y");
        p.series.push(Series::line("a", vec![(0.0, 1.0), (1.0, 2.0)]));
        p.series.push(Series::markers("b", vec![(0.5, 1.5)]));
        p.rects.push(Rect { x: [0.0, 0.1], y: [0.0, 0.1], group: 1 });
        let s = p.render();
        assert!(s.starts_with("<svg"));
        assert!(s.contains("<polyline"));
        assert!(s.contains("<circle"));
        assert!(s.contains("t &lt;x&gt;"));
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn log_axes_skip_nonpositive() {
        let mut p = Plot::new("", "", "");
        p.log_y = true;
        p.series.push(Series::markers("m", vec![(1.0, 0.0), (2.0, 10.0)]));
        assert_eq!(p.render().matches("<circle").count(), 1);
    }

    #[test]
    fn empty_plot_renders() {
        assert!(Plot::new("", "", "").render().contains("</svg>"));
    }
}
