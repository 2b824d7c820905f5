//! Hand-written SVG region maps: one panel per `ε`, `ν` horizontal and `η`
//! vertical, a rect per cell coloured by tag, the traced `C_α` polyline, the
//! cone `η = √(2π)|ν − α|` (dashed) and the cone edges read off the data.

use std::fmt::Write as _;
use std::path::Path;

use circle_core::normalform::RegionTag;

use crate::error::LabError;
use crate::sweep::{cone_edges, CAlphaSample, CellRecord};

const PANEL_W: f64 = 560.0;
const PANEL_H: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn colour(tag: Option<RegionTag>) -> &'static str {
    match tag {
        Some(RegionTag::Thm1) => "#4c78a8",
        Some(RegionTag::Thm2) => "#f58518",
        Some(RegionTag::OnCAlpha) => "#e45756",
        Some(RegionTag::Unresolved) => "#d8d8d8",
        None => "#000000",
    }
}

struct Panel {
    x0: f64,
    y0: f64,
    nu: (f64, f64),
    eta: (f64, f64),
}

impl Panel {
    fn x(&self, nu: f64) -> f64 {
        let span = self.nu.1 - self.nu.0;
        self.x0 + if span > 0.0 { (nu - self.nu.0) / span * PANEL_W } else { 0.5 * PANEL_W }
    }

    fn y(&self, eta: f64) -> f64 {
        let span = self.eta.1 - self.eta.0;
        self.y0 + PANEL_H - if span > 0.0 { (eta - self.eta.0) / span * PANEL_H } else { 0.5 * PANEL_H }
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn polyline(out: &mut String, pts: &[(f64, f64)], style: &str) {
    if pts.len() < 2 {
        if let Some((x, y)) = pts.first() {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" {style}/>"#);
        }
        return;
    }
    let s: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" {style}/>"#, s.join(" "));
}

/// Renders `records` (only the tags in `filter` when given) with the
/// `C_α` trace and cone overlays.
pub fn render_svg(records: &[CellRecord], calpha: &[CAlphaSample], alpha: f64, filter: Option<&[RegionTag]>) -> String {
    let eps_list = sorted_unique(records.iter().map(|r| r.eps).chain(calpha.iter().map(|s| s.eps)).collect());
    let nus = sorted_unique(records.iter().map(|r| r.nu).collect());
    let etas = sorted_unique(records.iter().map(|r| r.eta).collect());
    let lo_hi = |v: &[f64], dflt: (f64, f64)| match (v.first(), v.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => dflt,
    };
    let nu_r = lo_hi(&nus, (alpha - 0.05, alpha + 0.05));
    let eta_r = lo_hi(&etas, (0.0, 1.0));
    let step = |v: &[f64], span: f64| if v.len() > 1 { (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64 } else { span };
    let (dnu, deta) = (step(&nus, 0.01), step(&etas, 0.01));
    let cell_w = if nus.len() > 1 { PANEL_W / (nus.len() - 1) as f64 } else { PANEL_W };
    let cell_h = if etas.len() > 1 { PANEL_H / (etas.len() - 1) as f64 } else { PANEL_H };
    let panels = eps_list.len().max(1);
    let width = PANEL_W + 2.0 * MARGIN + cell_w;
    let height = panels as f64 * (PANEL_H + 2.0 * MARGIN + cell_h);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    for (i, &eps) in eps_list.iter().enumerate() {
        let panel = Panel {
            x0: MARGIN + 0.5 * cell_w,
            y0: i as f64 * (PANEL_H + 2.0 * MARGIN + cell_h) + MARGIN + 0.5 * cell_h,
            nu: nu_r,
            eta: eta_r,
        };
        let _ = writeln!(out, r#"<g id="panel-{i}">"#);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">eps = {eps:e}</text>"#, panel.x0, panel.y0 - 0.5 * cell_h - 12.0);
        for r in records.iter().filter(|r| r.eps == eps) {
            let keep = filter.is_none_or(|tags| r.tag.is_some_and(|t| tags.contains(&t)));
            if !keep {
                continue;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" class="{}"/>"#,
                panel.x(r.nu) - 0.5 * cell_w,
                panel.y(r.eta) - 0.5 * cell_h,
                cell_w,
                cell_h,
                colour(r.tag),
                r.tag_name()
            );
        }
        // Theoretical cone, clipped to the η range.
        let slope = (2.0 * std::f64::consts::PI).sqrt();
        for side in [-1.0, 1.0] {
            let pts: Vec<(f64, f64)> = [eta_r.0.max(0.0), eta_r.1]
                .iter()
                .map(|&eta| (panel.x(alpha + side * eta / slope), panel.y(eta)))
                .collect();
            polyline(&mut out, &pts, r##"stroke="#333" stroke-width="1.5" stroke-dasharray="6,4" class="cone""##);
        }
        let edges: Vec<_> = cone_edges(records).into_iter().filter(|e| e.eps == eps).collect();
        let left: Vec<(f64, f64)> = edges.iter().map(|e| (panel.x(e.nu_left), panel.y(e.eta))).collect();
        let right: Vec<(f64, f64)> = edges.iter().map(|e| (panel.x(e.nu_right), panel.y(e.eta))).collect();
        polyline(&mut out, &left, r##"stroke="#2ca02c" stroke-width="1.5" class="cone-edge""##);
        polyline(&mut out, &right, r##"stroke="#2ca02c" stroke-width="1.5" class="cone-edge""##);
        let mut trace: Vec<(f64, f64)> = calpha
            .iter()
            .filter(|s| s.eps == eps)
            .filter_map(|s| s.nu_star.map(|nu| (s.eta, nu)))
            .collect();
        trace.sort_by(|a, b| a.0.total_cmp(&b.0));
        let pts: Vec<(f64, f64)> = trace.iter().map(|&(eta, nu)| (panel.x(nu), panel.y(eta))).collect();
        polyline(&mut out, &pts, r##"stroke="#d62728" stroke-width="2" class="c-alpha""##);
        let (bx, by) = (panel.x0, panel.y0 + PANEL_H + 0.5 * cell_h);
        let _ = writeln!(out, r#"<text x="{bx:.2}" y="{:.2}">nu in [{}, {}], step {dnu:e}</text>"#, by + 20.0, nu_r.0, nu_r.1);
        let _ = writeln!(out, r#"<text x="{bx:.2}" y="{:.2}">eta in [{}, {}], step {deta:e}</text>"#, by + 36.0, eta_r.0, eta_r.1);
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</svg>");
    out
}

pub fn write_svg(
    path: &Path,
    records: &[CellRecord],
    calpha: &[CAlphaSample],
    alpha: f64,
    filter: Option<&[RegionTag]>,
) -> Result<(), LabError> {
    std::fs::write(path, render_svg(records, calpha, alpha, filter))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(nu: f64, eta: f64, tag: RegionTag) -> CellRecord {
        CellRecord {
            nu,
            eta,
            eps: 0.0,
            tag: Some(tag),
            in_thm1: tag == RegionTag::Thm1,
            in_thm2: true,
            on_c_alpha: false,
            residual: None,
            lambda: None,
            error: None,
        }
    }

    #[test]
    fn vertical_c_alpha_line() {
        let alpha = 0.6;
        let recs = vec![rec(0.55, 0.05, RegionTag::Thm1), rec(0.65, 0.1, RegionTag::Thm1)];
        let trace: Vec<CAlphaSample> = [0.05, 0.1]
            .iter()
            .map(|&eta| CAlphaSample { eps: 0.0, eta, nu_star: Some(alpha), lambda: Some(0.0), k: Some(0.0), status: "exact".into() })
            .collect();
        let svg = render_svg(&recs, &trace, alpha, None);
        let line = svg.lines().find(|l| l.contains("class=\"c-alpha\"")).unwrap();
        let pts = line.split('"').nth(1).unwrap();
        let xs: Vec<&str> = pts.split(' ').map(|p| p.split(',').next().unwrap()).collect();
        assert_eq!(xs.len(), 2);
        assert_eq!(xs[0], xs[1]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn filter_drops_cells() {
        let recs = vec![rec(0.55, 0.05, RegionTag::Thm1), rec(0.65, 0.1, RegionTag::Thm2)];
        let svg = render_svg(&recs, &[], 0.6, Some(&[RegionTag::Thm2]));
        assert_eq!(svg.matches("class=\"thm2_region\"").count(), 1);
        assert_eq!(svg.matches("class=\"thm1_region\"").count(), 0);
    }
}
