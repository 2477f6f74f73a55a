use super::metrics::{pixel_metrics, skeleton_curve, PixelMetrics, SkeletonMetricCurve};
use crate::error::{Error, Result};
use crate::raster::RasterGrid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One ground truth / prediction pair to score.
#[derive(Debug, Clone)]
pub struct SiteInput {
    pub site: String,
    pub product: String,
    pub gt: RasterGrid,
    pub pred: RasterGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteEntry {
    pub site: String,
    pub product: String,
    /// Pixel size of the common grid.
    pub resolution: f64,
    pub pixel: PixelMetrics,
    pub skeleton: SkeletonMetricCurve,
}

/// Scores per site and product. Entries are never pooled or averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tau_max: u32,
    pub entries: Vec<SiteEntry>,
}

impl EvalReport {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn report(sites: &[SiteInput], tau_max: u32) -> Result<EvalReport> {
    let entries = sites
        .par_iter()
        .map(|s| {
            Ok(SiteEntry {
                site: s.site.clone(),
                product: s.product.clone(),
                resolution: s.gt.georef().pixel_size,
                pixel: pixel_metrics(&s.gt, &s.pred)?,
                skeleton: skeleton_curve(&s.gt, &s.pred, tau_max)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport { tau_max, entries })
}

const PLOT_W: f64 = 360.0;
const PLOT_H: f64 = 240.0;
const MARGIN: f64 = 40.0;
type Series = fn(&SkeletonMetricCurve) -> &[f64];

const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// Tolerance curves of one site as an SVG: one panel per metric, one line per
/// product.
pub fn site_svg(entries: &[&SiteEntry]) -> String {
    let panels: [(&str, Series); 3] = [
        ("precision", |c| &c.precision),
        ("recall", |c| &c.recall),
        ("F1", |c| &c.f1),
    ];
    let width = 3.0 * (PLOT_W + MARGIN) + MARGIN;
    let height = PLOT_H + 2.0 * MARGIN + 16.0 * entries.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let site = entries.first().map_or("", |e| e.site.as_str());
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="16" font-size="13">{}</text>"#, escape(site));
    for (k, (name, series)) in panels.iter().enumerate() {
        let x0 = MARGIN + k as f64 * (PLOT_W + MARGIN);
        let y0 = MARGIN;
        let _ = writeln!(
            s,
            r##"<rect x="{x0}" y="{y0}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="#444"/>"##
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, x0 + 4.0, y0 - 6.0);
        for v in [0.0, 0.5, 1.0] {
            let y = y0 + PLOT_H * (1.0 - v);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#, x0 - 4.0, y + 4.0);
        }
        for (j, e) in entries.iter().enumerate() {
            let c = &e.skeleton;
            let tmax = c.tau_values.last().copied().unwrap_or(0).max(1) as f64;
            let pts: Vec<String> = c
                .tau_values
                .iter()
                .zip(series(c))
                .map(|(&t, &v)| format!("{:.1},{:.1}", x0 + PLOT_W * t as f64 / tmax, y0 + PLOT_H * (1.0 - v)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                COLORS[j % COLORS.len()],
                pts.join(" ")
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">tolerance (px)</text>"#,
            x0 + PLOT_W / 2.0,
            y0 + PLOT_H + 16.0
        );
    }
    for (j, e) in entries.iter().enumerate() {
        let y = PLOT_H + 2.0 * MARGIN + 16.0 * j as f64;
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{y}" fill="{}">{} (AUC F1 {:.3})</text>"#,
            COLORS[j % COLORS.len()],
            escape(&e.product),
            e.skeleton.auc_f1
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes one SVG per site into `dir`; returns the written paths.
pub fn write_plots(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sites: Vec<&str> = Vec::new();
    for e in &report.entries {
        if !sites.contains(&e.site.as_str()) {
            sites.push(&e.site);
        }
    }
    let mut paths = Vec::new();
    for site in sites {
        let entries: Vec<&SiteEntry> = report.entries.iter().filter(|e| e.site == site).collect();
        let safe: String = site
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let path = dir.join(format!("{safe}.svg"));
        std::fs::write(&path, site_svg(&entries)).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;

    fn mask(v: Vec<u8>) -> RasterGrid {
        RasterGrid::mask(8, 8, GeoRef::pixel_space(8), v).unwrap()
    }

    fn bar() -> RasterGrid {
        mask((0..64).map(|i| u8::from(i / 8 == 3)).collect())
    }

    #[test]
    fn one_entry_per_pair() {
        let r = report(
            &[SiteInput {
                site: "a".into(),
                product: "p".into(),
                gt: bar(),
                pred: bar(),
            }],
            12,
        )
        .unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].pixel.f1, 1.0);
    }

    #[test]
    fn sites_stay_separate() {
        // a grid of 3 sites x 2 products, with no aggregate entry
        let mut inputs = Vec::new();
        for site in ["north", "east", "south"] {
            for product in ["bkg", "chm"] {
                let pred = if product == "bkg" { bar() } else { mask(vec![0; 64]) };
                inputs.push(SiteInput {
                    site: site.into(),
                    product: product.into(),
                    gt: bar(),
                    pred,
                });
            }
        }
        let r = report(&inputs, 12).unwrap();
        assert_eq!(r.entries.len(), 6);
        for e in &r.entries {
            let expect = if e.product == "bkg" { 1.0 } else { 0.0 };
            assert_eq!(e.skeleton.auc_f1, expect);
        }
        let dir = tempfile::tempdir().unwrap();
        let plots = write_plots(&r, dir.path()).unwrap();
        assert_eq!(plots.len(), 3);
        let svg = std::fs::read_to_string(&plots[0]).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 6);
        let path = dir.path().join("report.json");
        r.write(&path).unwrap();
        assert_eq!(EvalReport::read(&path).unwrap(), r);
    }
}
