//! Self-contained SVG line plots: axes, optional log scales, polylines,
//! horizontal reference lines and a legend.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct RefLine {
    pub label: String,
    pub y: f64,
    /// SVG `stroke-dasharray`, e.g. `"2,3"`; `None` draws a solid line.
    pub dash: Option<&'static str>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
    pub series: Vec<Series>,
    pub ref_lines: Vec<RefLine>,
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool, pad: bool, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = if log { (1.0, 10.0) } else { (0.0, 1.0) };
        }
        if log {
            // with padding, data on a decade boundary does not sit on the frame
            let eps = if pad { 1e-9 } else { 0.0 };
            lo = 10f64.powf((lo.log10() - eps).floor());
            hi = 10f64.powf((hi.log10() + eps).ceil());
            if hi <= lo {
                hi = lo * 10.0;
            }
        } else if hi <= lo {
            hi = lo + 1.0;
        }
        Self { lo, hi, log, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        };
        self.px_lo + t * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            (a..=b).map(|k| 10f64.powi(k)).collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(raw);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last).map(|k| k as f64 * step).collect()
        }
    }

    fn label(&self, v: f64) -> String {
        if self.log {
            format!("1e{}", v.log10().round() as i32)
        } else {
            format!("{v}")
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(plot: &Plot) -> String {
    let xs = plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = plot
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .chain(plot.ref_lines.iter().map(|r| r.y));
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let sx = Scale::new(xs, plot.x_log, false, x0, x1);
    let sy = Scale::new(ys, plot.y_log, true, y0, y1);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(&plot.title)
    );

    for t in sx.ticks() {
        let x = sx.map(t);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}" stroke="#ddd"/>"##);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            sx.label(t)
        );
    }
    for t in sy.ticks() {
        let y = sy.map(t);
        let _ = writeln!(out, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/>"##);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            sy.label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&plot.y_label)
    );

    let mut legend_y = TOP + 10.0;
    let legend_x = x1 + 15.0;
    for r in &plot.ref_lines {
        let y = sy.map(r.y);
        let dash = r.dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let _ = writeln!(
            out,
            r#"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="black" stroke-width="1.5"{dash}/>"#
        );
        let _ = writeln!(
            out,
            r#"<line x1="{legend_x}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="black" stroke-width="1.5"{dash}/>"#,
            legend_x + 20.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, legend_x + 25.0, legend_y + 4.0, escape(&r.label));
        legend_y += 18.0;
    }
    for (i, s) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!sx.log || *x > 0.0) && (!sy.log || *y > 0.0))
            .map(|&(x, y)| format!("{:.2},{:.2}", sx.map(x), sy.map(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<line x1="{legend_x}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{color}" stroke-width="2"/>"#,
            legend_x + 20.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, legend_x + 25.0, legend_y + 4.0, escape(&s.label));
        legend_y += 18.0;
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> Plot {
        Plot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            x_log: true,
            y_log: true,
            series: vec![Series { label: "a<b".into(), points: vec![(1e4, 300.0), (1e6, 20.0)] }],
            ref_lines: vec![RefLine { label: "one".into(), y: 1.0, dash: None }],
        }
    }

    #[test]
    fn log_axes_snap_to_decades() {
        let svg = render(&plot());
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains(">1e-1<") && svg.contains(">1e3<") && svg.contains(">1e6<") && !svg.contains(">1e7<"));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn linear_ticks_are_round() {
        let s = Scale::new([0.0, 40.0].into_iter(), false, false, 0.0, 100.0);
        assert_eq!(s.ticks(), vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(s.map(20.0), 50.0);
    }
}
