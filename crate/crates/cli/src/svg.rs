//! SVG rendering of trajectory bundles: one polyline per eigenvalue in the
//! complex plane, with optional real axis, `i t*` marker and outlier disk.

use std::fmt::Write;

use rankone::analysis::{classify_outlier, DomainParams};
use rankone::trajectory::TrajectoryBundle;
use rankone::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ColorScheme {
    /// Hue spread evenly over the trajectory index.
    Rainbow,
    /// Every trajectory in one color.
    Single(String),
}

impl ColorScheme {
    pub fn color(&self, j: usize, n: usize) -> String {
        match self {
            Self::Rainbow => format!("hsl({:.1},70%,42%)", 300.0 * j as f64 / n.max(2).saturating_sub(1) as f64),
            Self::Single(c) => c.clone(),
        }
    }
}

/// Marks `i t*` and the disk `D(i t*, n^(eps/4) / sqrt(n t*))` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierOverlay {
    pub t: f64,
    pub params: DomainParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub colors: ColorScheme,
    /// `(min, max)` of the real axis; automatic when `None`.
    pub x_range: Option<(f64, f64)>,
    /// `(min, max)` of the imaginary axis; automatic when `None`.
    pub y_range: Option<(f64, f64)>,
    pub real_axis: bool,
    pub outlier: Option<OutlierOverlay>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 800,
            height: 600,
            colors: ColorScheme::Rainbow,
            x_range: None,
            y_range: None,
            real_axis: true,
            outlier: None,
        }
    }
}

const MARGIN: f64 = 40.0;

/// Rounds to the two decimals written into the document.
pub fn px(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

struct Frame {
    x0: f64,
    y1: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn x(&self, re: f64) -> f64 {
        px(MARGIN + (re - self.x0) * self.sx)
    }

    fn y(&self, im: f64) -> f64 {
        px(MARGIN + (self.y1 - im) * self.sy)
    }
}

fn check_range(r: (f64, f64), axis: &str) -> Result<()> {
    if r.0.is_finite() && r.1.is_finite() && r.0 < r.1 {
        Ok(())
    } else {
        Err(Error::Config(format!("{axis} range must be finite and increasing, got {r:?}")))
    }
}

fn auto_range(lo: f64, hi: f64) -> (f64, f64) {
    let pad = ((hi - lo) * 0.05).max(1e-3);
    (lo - pad, hi + pad)
}

/// Disk center `t*` and radius for the overlay, as computed by the outlier
/// classification at the grid point nearest to `t`.
pub fn overlay_disk(bundle: &TrajectoryBundle, overlay: &OutlierOverlay) -> Result<(f64, f64)> {
    let i = bundle
        .times()
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - overlay.t).abs().total_cmp(&(b.1 - overlay.t).abs()))
        .map(|(i, _)| i)
        .expect("bundles are non-empty");
    let report = classify_outlier(&bundle.lambdas[i], overlay.t, &overlay.params)?;
    Ok((report.t_star, report.disk_radius))
}

pub fn render_svg(bundle: &TrajectoryBundle, spec: &PlotSpec) -> Result<String> {
    if bundle.lambdas.is_empty() || bundle.dim() == 0 {
        return Err(Error::Empty("nothing to plot"));
    }
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::Config("plot dimensions must be positive".into()));
    }
    let disk = spec.outlier.as_ref().map(|o| overlay_disk(bundle, o)).transpose()?;

    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for z in bundle.lambdas.iter().flatten() {
        xlo = xlo.min(z.re);
        xhi = xhi.max(z.re);
        ylo = ylo.min(z.im);
        yhi = yhi.max(z.im);
    }
    if let Some((ts, r)) = disk {
        xlo = xlo.min(-r);
        xhi = xhi.max(r);
        ylo = ylo.min(ts - r);
        yhi = yhi.max(ts + r);
    }
    let x_range = spec.x_range.unwrap_or_else(|| auto_range(xlo, xhi));
    let y_range = spec.y_range.unwrap_or_else(|| auto_range(ylo, yhi));
    check_range(x_range, "x")?;
    check_range(y_range, "y")?;
    let (w, h) = (spec.width as f64, spec.height as f64);
    let frame = Frame {
        x0: x_range.0,
        y1: y_range.1,
        sx: (w - 2.0 * MARGIN) / (x_range.1 - x_range.0),
        sy: (h - 2.0 * MARGIN) / (y_range.1 - y_range.0),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.2}" font-family="sans-serif" font-size="12">n = {}, {}, t in [0, {}]</text>"#,
        MARGIN * 0.6,
        bundle.dim(),
        bundle.method.as_str(),
        bundle.grid.t_max()
    );
    if spec.real_axis && y_range.0 <= 0.0 && 0.0 <= y_range.1 {
        let y = frame.y(0.0);
        let _ = writeln!(
            s,
            r#"<line class="real-axis" x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="gray" stroke-width="1"/>"#,
            px(w - MARGIN)
        );
    }
    let n = bundle.dim();
    for j in 0..n {
        let mut pts = String::new();
        for row in &bundle.lambdas {
            let _ = write!(pts, "{},{} ", frame.x(row[j].re), frame.y(row[j].im));
        }
        let _ = writeln!(
            s,
            r#"<polyline class="trajectory" data-j="{}" fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
            j + 1,
            spec.colors.color(j, n),
            pts.trim_end()
        );
    }
    if let Some((ts, r)) = disk {
        let (cx, cy) = (frame.x(0.0), frame.y(ts));
        let _ = writeln!(
            s,
            r#"<ellipse class="outlier-disk" cx="{cx}" cy="{cy}" rx="{}" ry="{}" fill="none" stroke="black" stroke-dasharray="4 3"/>"#,
            px(r * frame.sx),
            px(r * frame.sy)
        );
        let _ = writeln!(s, r#"<circle class="t-star" cx="{cx}" cy="{cy}" r="3" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rankone::resolvent::ResolventInput;
    use rankone::trajectory::{trace_trajectories, TimeGrid, TrackOptions};

    fn attr(doc: &str, tag_class: &str, name: &str) -> Vec<f64> {
        doc.lines()
            .filter(|l| l.contains(tag_class))
            .filter_map(|l| {
                let key = format!(" {name}=\"");
                let start = l.find(&key)? + key.len();
                let end = start + l[start..].find('"')?;
                l[start..end].parse().ok()
            })
            .collect()
    }

    fn polylines(doc: &str) -> Vec<Vec<(f64, f64)>> {
        doc.lines()
            .filter(|l| l.contains("<polyline"))
            .map(|l| {
                let start = l.find("points=\"").unwrap() + 8;
                let end = start + l[start..].find('"').unwrap();
                l[start..end]
                    .split(' ')
                    .map(|p| {
                        let (x, y) = p.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn single_trajectory_is_vertical() {
        let rin = ResolventInput::new(vec![0.4], vec![1.0]).unwrap();
        let b = trace_trajectories(&rin, &TimeGrid::uniform(2.0, 20).unwrap(), &TrackOptions::default()).unwrap();
        let doc = render_svg(&b, &PlotSpec::default()).unwrap();
        assert!(doc.starts_with("<svg") && doc.trim_end().ends_with("</svg>"));
        let lines = polylines(&doc);
        assert_eq!(lines.len(), 1);
        let x0 = lines[0][0].0;
        assert!(lines[0].iter().all(|&(x, _)| x == x0));
        assert!(lines[0].windows(2).all(|w| w[1].1 < w[0].1), "moves up the page");
    }

    #[test]
    fn symmetric_pair_draws_two_arcs_meeting_near_i() {
        let rin = ResolventInput::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let b = trace_trajectories(&rin, &TimeGrid::uniform(1.99, 199).unwrap(), &TrackOptions::default()).unwrap();
        let spec = PlotSpec {
            x_range: Some((-1.0, 1.0)),
            y_range: Some((0.0, 1.0)),
            ..PlotSpec::default()
        };
        let doc = render_svg(&b, &spec).unwrap();
        let lines = polylines(&doc);
        assert_eq!(lines.len(), 2);
        let (l, r) = (lines[0].last().unwrap(), lines[1].last().unwrap());
        // Both ends are near z = i: the top center of the plot.
        let (cx, top) = (400.0, 40.0);
        for p in [l, r] {
            assert!((p.0 - cx).abs() < 0.15 * 720.0 && (p.1 - top).abs() < 0.02 * 520.0, "{p:?}");
        }
    }

    #[test]
    fn overlay_radius_matches_report() {
        let n = 30;
        let inst = rankone::rmt::LightInstance::sample(&rankone::rmt::RunConfig::gue(n, 2).unwrap()).unwrap();
        let b = trace_trajectories(&inst.input, &TimeGrid::uniform(2.5, 50).unwrap(), &TrackOptions::default()).unwrap();
        let params = DomainParams::new(0.3, 0.2, 3.0, n).unwrap();
        let overlay = OutlierOverlay { t: 2.5, params };
        let spec = PlotSpec {
            outlier: Some(overlay.clone()),
            ..PlotSpec::default()
        };
        let doc = render_svg(&b, &spec).unwrap();
        let report = classify_outlier(b.last(), 2.5, &params).unwrap();
        let (ylo, yhi) = {
            let mut lo: f64 = 0.0;
            let mut hi = f64::NEG_INFINITY;
            for z in b.lambdas.iter().flatten() {
                lo = lo.min(z.im);
                hi = hi.max(z.im);
            }
            auto_range(lo.min(report.t_star - report.disk_radius), hi.max(report.t_star + report.disk_radius))
        };
        let sy = (600.0 - 2.0 * MARGIN) / (yhi - ylo);
        assert_eq!(attr(&doc, "outlier-disk", "ry"), vec![px(report.disk_radius * sy)]);
        assert_eq!(attr(&doc, "t-star", "cy"), vec![px(MARGIN + (yhi - report.t_star) * sy)]);
    }

    #[test]
    fn rejects_empty_and_degenerate_input() {
        let b = TrajectoryBundle {
            grid: TimeGrid::uniform(1.0, 1).unwrap(),
            lambdas: vec![vec![], vec![]],
            anchored: None,
            method: rankone::trajectory::Method::Ode,
            diagnostics: Default::default(),
        };
        assert!(render_svg(&b, &PlotSpec::default()).is_err());
        let b = TrajectoryBundle {
            lambdas: vec![vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(0.0, 1.0)]],
            ..b
        };
        assert!(render_svg(&b, &PlotSpec::default()).is_ok());
        let bad = PlotSpec {
            x_range: Some((1.0, 1.0)),
            ..PlotSpec::default()
        };
        assert!(render_svg(&b, &bad).is_err());
        let bad = PlotSpec {
            width: 0,
            ..PlotSpec::default()
        };
        assert!(render_svg(&b, &bad).is_err());
    }
}
