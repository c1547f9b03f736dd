//! Minimal self-contained SVG plots.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const MARGIN: f64 = 56.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

/// One panel with data coordinates `[x0, x1] × [y0, y1]`.
pub struct Svg {
    x: (f64, f64),
    y: (f64, f64),
    height: f64,
    body: String,
    legend: Vec<(String, String)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Svg {
    /// With `equal_aspect` the height follows the data aspect ratio.
    pub fn new(x: (f64, f64), y: (f64, f64), equal_aspect: bool) -> Self {
        let inner = WIDTH - 2.0 * MARGIN;
        let height = if equal_aspect {
            (inner * (y.1 - y.0) / (x.1 - x.0)).clamp(120.0, 900.0) + 2.0 * MARGIN
        } else {
            480.0
        };
        Self {
            x,
            y,
            height,
            body: String::new(),
            legend: Vec::new(),
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let inner_w = WIDTH - 2.0 * MARGIN;
        let inner_h = self.height - 2.0 * MARGIN;
        (
            MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * inner_w,
            self.height - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * inner_h,
        )
    }

    fn points(&self, pts: &[(f64, f64)]) -> String {
        let mut s = String::new();
        for &(x, y) in pts {
            let (a, b) = self.px(x, y);
            write!(s, "{a:.2},{b:.2} ").unwrap();
        }
        s.trim_end().to_string()
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str, label: Option<&str>) {
        let p = self.points(pts);
        writeln!(
            self.body,
            r#"<polyline points="{p}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        )
        .unwrap();
        if let Some(l) = label {
            self.legend.push((l.to_string(), color.to_string()));
        }
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], stroke: &str, fill: &str) {
        let p = self.points(pts);
        writeln!(
            self.body,
            r#"<polygon points="{p}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#
        )
        .unwrap();
    }

    pub fn dots(&mut self, pts: &[(f64, f64)], radius: f64, color: &str, label: Option<&str>) {
        for &(x, y) in pts {
            let (a, b) = self.px(x, y);
            writeln!(self.body, r#"<circle cx="{a:.2}" cy="{b:.2}" r="{radius}" fill="{color}"/>"#).unwrap();
        }
        if let Some(l) = label {
            self.legend.push((l.to_string(), color.to_string()));
        }
    }

    pub fn label(&mut self, x: f64, y: f64, text: &str) {
        let (a, b) = self.px(x, y);
        writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="13">{}</text>"#,
            a + 5.0,
            b - 5.0,
            esc(text)
        )
        .unwrap();
    }

    fn axes(&self, out: &mut String) {
        let (l, b) = self.px(self.x.0, self.y.0);
        let (r, t) = self.px(self.x.1, self.y.1);
        writeln!(
            out,
            r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            r - l,
            b - t
        )
        .unwrap();
        for k in 0..=4 {
            let s = k as f64 / 4.0;
            let xv = self.x.0 + s * (self.x.1 - self.x.0);
            let yv = self.y.0 + s * (self.y.1 - self.y.0);
            let (xp, _) = self.px(xv, self.y.0);
            let (_, yp) = self.px(self.x.0, yv);
            writeln!(
                out,
                r#"<text x="{xp:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                b + 16.0,
                tick(xv)
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                l - 6.0,
                yp + 4.0,
                tick(yv)
            )
            .unwrap();
        }
    }

    pub fn finish(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{:.0}" viewBox="0 0 {WIDTH} {:.0}" font-family="sans-serif">"#,
            self.height, self.height
        )
        .unwrap();
        writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            esc(title)
        )
        .unwrap();
        self.axes(&mut out);
        out.push_str(&self.body);
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            self.height - 12.0,
            esc(xlabel)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="14" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            self.height / 2.0,
            self.height / 2.0,
            esc(ylabel)
        )
        .unwrap();
        for (k, (name, color)) in self.legend.iter().enumerate() {
            let y = MARGIN + 8.0 + 16.0 * k as f64;
            let x = WIDTH - MARGIN - 150.0;
            writeln!(
                out,
                r#"<rect x="{x:.1}" y="{:.1}" width="12" height="3" fill="{color}"/><text x="{:.1}" y="{y:.1}" font-size="11">{}</text>"#,
                y - 4.0,
                x + 16.0,
                esc(name)
            )
            .unwrap();
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}
