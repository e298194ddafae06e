//! Static SVG line charts; data CSVs stay the primary artifact.

use std::fmt::Write as _;

pub struct LineChart {
    title: String,
    series: Vec<(String, Vec<(f64, f64)>)>,
}

impl LineChart {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            series: Vec::new(),
        }
    }

    pub fn series(&mut self, label: impl Into<String>, points: Vec<(f64, f64)>) -> &mut Self {
        self.series.push((label.into(), points));
        self
    }

    pub fn render(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 420.0;
        const PAD: f64 = 56.0;
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for (_, pts) in &self.series {
            for &(x, y) in pts {
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        let (x0, x1) = span(&xs);
        let (y0, y1) = span(&ys);
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-300) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(1e-300) * (H - 2.0 * PAD);
        let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" font-family="monospace" font-size="15">{}</text>"#,
            PAD,
            xml_escape(&self.title)
        );
        // axes
        let _ = writeln!(
            out,
            r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
            H - PAD,
            W - PAD
        );
        let _ = writeln!(
            out,
            r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#,
            H - PAD
        );
        for (label, value) in [(format!("{x0:.3}"), sx(x0)), (format!("{x1:.3}"), sx(x1))] {
            let _ = writeln!(
                out,
                r#"<text x="{value}" y="{}" font-family="monospace" font-size="11" text-anchor="middle">{label}</text>"#,
                H - PAD + 16.0
            );
        }
        for (label, value) in [(format!("{y0:.3}"), sy(y0)), (format!("{y1:.3}"), sy(y1))] {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{value}" font-family="monospace" font-size="11" text-anchor="end">{label}</text>"#,
                PAD - 6.0
            );
        }
        for (i, (label, pts)) in self.series.iter().enumerate() {
            let color = colors[i % colors.len()];
            let path: Vec<String> = pts
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            if path.len() > 1 {
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    path.join(" ")
                );
            }
            for p in &path {
                let (px, py) = p.split_once(',').unwrap();
                let _ = writeln!(out, r#"<circle cx="{px}" cy="{py}" r="2.5" fill="{color}"/>"#);
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="monospace" font-size="12" fill="{color}">{}</text>"#,
                W - PAD - 150.0,
                PAD + 16.0 * i as f64,
                xml_escape(label)
            );
        }
        out.push_str("</svg>\n");
        out
    }

    pub fn write_to(&self, path: impl AsRef<std::path::Path>) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }
}

fn span(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 1.0);
    }
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_valid_svg_skeleton() {
        let mut chart = LineChart::new("ratios");
        chart.series("axis", vec![(1.0, 0.5), (2.0, 0.48), (3.0, 0.477)]);
        let svg = chart.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
