//! Standalone SVG plots: force tracking, CoM path and the CSA.

use std::fmt::Write as _;

use comsupport_core::controller::TraceRecord;
use comsupport_core::csa::{ContactPatch, Point2, SupportPolygon};

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, equal_aspect: bool) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let d = ((hi - lo) * 0.05).max(1e-6);
            (lo - d, hi + d)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        let mut f = Self { x0, x1, y0, y1 };
        if equal_aspect {
            let sx = (x1 - x0) / (W - 2.0 * MARGIN);
            let sy = (y1 - y0) / (H - 2.0 * MARGIN);
            let s = sx.max(sy);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            f.x0 = cx - 0.5 * s * (W - 2.0 * MARGIN);
            f.x1 = cx + 0.5 * s * (W - 2.0 * MARGIN);
            f.y0 = cy - 0.5 * s * (H - 2.0 * MARGIN);
            f.y1 = cy + 0.5 * s * (H - 2.0 * MARGIN);
        }
        f
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let u = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN);
        let v = H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN);
        (u, v)
    }

    fn polyline(&self, pts: &[(f64, f64)], color: &str, dash: bool) -> String {
        let mut d = String::new();
        for &(x, y) in pts {
            let (u, v) = self.px(x, y);
            let _ = write!(d, "{u:.2},{v:.2} ");
        }
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        format!(r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#, d.trim_end())
    }

    fn polygon(&self, pts: &[(f64, f64)], stroke: &str, fill: &str) -> String {
        let mut d = String::new();
        for &(x, y) in pts {
            let (u, v) = self.px(x, y);
            let _ = write!(d, "{u:.2},{v:.2} ");
        }
        format!(r#"<polygon fill="{fill}" stroke="{stroke}" stroke-width="1.2" points="{}"/>"#, d.trim_end())
    }

    fn marker(&self, x: f64, y: f64, color: &str) -> String {
        let (u, v) = self.px(x, y);
        format!(r#"<circle cx="{u:.2}" cy="{v:.2}" r="4" fill="{color}"/>"#)
    }

    fn axes(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = write!(s, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##, r - l, b - t);
        for i in 0..=4 {
            let fx = self.x0 + (self.x1 - self.x0) * i as f64 / 4.0;
            let fy = self.y0 + (self.y1 - self.y0) * i as f64 / 4.0;
            let (u, _) = self.px(fx, self.y0);
            let (_, v) = self.px(self.x0, fy);
            let _ = write!(
                s,
                r#"<text x="{u:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
                b + 14.0,
                tick(fx)
            );
            let _ = write!(s, r#"<text x="{:.1}" y="{v:.1}" font-size="10" text-anchor="end">{}</text>"#, l - 4.0, tick(fy));
        }
        let _ = write!(s, r#"<text x="{:.1}" y="24" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
        let _ = write!(s, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
        let _ = write!(
            s,
            r#"<text x="14" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
        s
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == 0.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn legend(items: &[(&str, &str)]) -> String {
    let mut s = String::new();
    for (i, (label, color)) in items.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        let x = W - MARGIN - 150.0;
        let _ = write!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-size="11">{}</text>"#,
            x + 20.0,
            x + 26.0,
            y + 4.0,
            escape(label)
        );
    }
    s
}

fn document(body: &str) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}"><rect width="100%" height="100%" fill="white"/>{body}</svg>
"#
    )
}

/// Measured vs desired pressing force over time.
pub fn force_tracking(records: &[TraceRecord]) -> String {
    let meas: Vec<_> = records.iter().map(|r| (r.t, r.f_hand_meas)).collect();
    let des: Vec<_> = records.iter().map(|r| (r.t, r.f_hand_des)).collect();
    let f = Frame::fit(meas.iter().chain(&des).copied(), false);
    let mut body = f.axes("Hand normal force", "t [s]", "force [N]");
    body += &f.polyline(&des, "#d62728", true);
    body += &f.polyline(&meas, "#1f77b4", false);
    body += &legend(&[("desired", "#d62728"), ("measured", "#1f77b4")]);
    document(&body)
}

/// CoM coordinates over time, actual and commanded.
pub fn com_path(records: &[TraceRecord]) -> String {
    let series = [
        (records.iter().map(|r| (r.t, r.com.x)).collect::<Vec<_>>(), "com x", "#1f77b4", false),
        (records.iter().map(|r| (r.t, r.com_des.x)).collect(), "com x desired", "#1f77b4", true),
        (records.iter().map(|r| (r.t, r.com.y)).collect(), "com y", "#2ca02c", false),
        (records.iter().map(|r| (r.t, r.com_des.y)).collect(), "com y desired", "#2ca02c", true),
    ];
    let f = Frame::fit(series.iter().flat_map(|s| s.0.iter().copied()), false);
    let mut body = f.axes("CoM position", "t [s]", "position [m]");
    for (pts, _, color, dash) in &series {
        body += &f.polyline(pts, color, *dash);
    }
    body += &legend(&[("com x", "#1f77b4"), ("com y", "#2ca02c")]);
    document(&body)
}

/// Top view: foot soles, the CSA and the desired CoM.
pub fn csa_view(feet: &[ContactPatch], csa: &SupportPolygon, com: Option<Point2>) -> String {
    let soles: Vec<Vec<(f64, f64)>> = feet.iter().map(|p| p.corners().iter().map(|c| (c.x, c.y)).collect()).collect();
    let poly: Vec<(f64, f64)> = csa.vertices.iter().map(|v| (v.x, v.y)).collect();
    let all = soles.iter().flatten().chain(&poly).copied().chain(com.map(|c| (c.x, c.y)));
    let f = Frame::fit(all, true);
    let mut body = f.axes("CoM support area", "x [m]", "y [m]");
    for sole in &soles {
        body += &f.polygon(sole, "#555", "#dddddd");
    }
    body += &f.polygon(&poly, "#2ca02c", "#2ca02c55");
    if let Some(c) = com {
        body += &f.marker(c.x, c.y, "#d62728");
    }
    body += &legend(&[("feet", "#555"), ("CSA", "#2ca02c"), ("desired CoM", "#d62728")]);
    document(&body)
}
