//! Deterministic SVG rendering of tile collections.
//!
//! The default view has one row per scale `k`, from `M` at the top down to
//! `-M`, with every tile drawn over its interval. The half-plane view draws
//! the Whitney box `I × [|I|/2, |I|]` of each tile, so that the tiles of a
//! tree fill its Carleson box.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::{Context, Result};
use dhap_core::json::{self, DecompositionJson, TileSetJson};
use dhap_core::{DyadicInterval, GridConfig};

const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const PLOT_W: f64 = 800.0;
const ROW_H: f64 = 24.0;
const HALF_PLANE_H: f64 = 400.0;
const AXIS_GAP: f64 = 30.0;
const LEGEND_ROW: f64 = 18.0;

/// Fill colour per label; unknown labels use the last entry.
const PALETTE: &[(&str, &str)] = &[
    ("small", "#9ecae1"),
    ("heavy", "#e6550d"),
    ("light", "#fdae6b"),
    ("iterate", "#a1d99b"),
    ("selected", "#31a354"),
    ("kept", "#3182bd"),
    ("buffer", "#756bb1"),
    ("removed", "#bdbdbd"),
    ("remainder", "#d9d9d9"),
    ("exceptional", "#de2d26"),
    ("atom", "#fd8d3c"),
    ("tile", "#6baed6"),
    ("other", "#969696"),
];

fn colour(label: &str) -> &'static str {
    PALETTE.iter().find(|(l, _)| *l == label).map_or(PALETTE[PALETTE.len() - 1].1, |(_, c)| c)
}

/// Labelled tile groups parsed from a decomposition or a plain tile set.
pub struct Picture {
    pub grid: GridConfig,
    pub groups: Vec<(String, Vec<DyadicInterval>)>,
}

impl Picture {
    pub fn parse(text: &str) -> Result<Self> {
        if let Ok(d) = json::from_str::<DecompositionJson>(text) {
            let grid = GridConfig::new(d.m)?;
            let groups = d
                .tile_sets()?
                .into_iter()
                .map(|(label, s)| (label, s.iter().collect()))
                .collect();
            return Ok(Picture { grid, groups });
        }
        let t: TileSetJson = json::from_str(text).context("input is neither a decomposition nor a tile set")?;
        let s = t.to_tile_set()?;
        Ok(Picture { grid: s.grid(), groups: vec![("tile".into(), s.iter().collect())] })
    }
}

fn x_of(grid: &GridConfig, x: f64) -> f64 {
    LEFT + x / grid.domain_length() * PLOT_W
}

/// Renders the picture as an SVG 1.1 document.
pub fn render(p: &Picture, half_plane: bool) -> String {
    let grid = p.grid;
    let m = grid.m() as i32;
    let plot_h = if half_plane { HALF_PLANE_H } else { (2 * m + 1) as f64 * ROW_H };
    let labels: BTreeSet<&str> = p.groups.iter().filter(|(_, t)| !t.is_empty()).map(|(l, _)| l.as_str()).collect();
    let legend: Vec<&str> = PALETTE.iter().map(|(l, _)| *l).filter(|l| labels.contains(l)).chain(
        labels.iter().copied().filter(|l| !PALETTE.iter().any(|(k, _)| k == l)),
    ).collect();
    let width = LEFT + PLOT_W + RIGHT;
    let height = TOP + plot_h + AXIS_GAP + LEGEND_ROW * legend.len() as f64 + 10.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="0.5">"#);
    for (label, tiles) in &p.groups {
        let fill = colour(label);
        for d in tiles {
            let x0 = x_of(&grid, d.start());
            let x1 = x_of(&grid, d.end());
            let (y0, y1) = if half_plane {
                let scale = plot_h / grid.domain_length();
                (TOP + plot_h - d.length() * scale, TOP + plot_h - d.length() * scale / 2.0)
            } else {
                let row = (m - d.k) as f64;
                (TOP + row * ROW_H + 2.0, TOP + (row + 1.0) * ROW_H - 2.0)
            };
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
                x1 - x0,
                y1 - y0
            );
        }
    }
    let _ = writeln!(s, "</g>");
    axes(&mut s, &grid, plot_h, half_plane);
    let mut y = TOP + plot_h + AXIS_GAP;
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12">"#);
    for l in legend {
        let _ = writeln!(s, r#"<rect x="{LEFT:.3}" y="{:.3}" width="12" height="12" fill="{}" stroke="black" stroke-width="0.5"/>"#, y, colour(l));
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">{l}</text>"#, LEFT + 18.0, y + 10.0);
        y += LEGEND_ROW;
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

fn axes(s: &mut String, grid: &GridConfig, plot_h: f64, half_plane: bool) {
    let m = grid.m() as i32;
    let base = TOP + plot_h;
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{LEFT:.3}" y1="{base:.3}" x2="{:.3}" y2="{base:.3}"/>"#, LEFT + PLOT_W);
    let _ = writeln!(s, r#"<line x1="{LEFT:.3}" y1="{TOP:.3}" x2="{LEFT:.3}" y2="{base:.3}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="10" text-anchor="middle">"#);
    let len = grid.domain_length();
    let step = (len / 16.0).max(1.0);
    let mut x = 0.0;
    while x <= len {
        let px = x_of(grid, x);
        let _ = writeln!(s, r#"<line x1="{px:.3}" y1="{base:.3}" x2="{px:.3}" y2="{:.3}" stroke="black"/>"#, base + 4.0);
        let _ = writeln!(s, r#"<text x="{px:.3}" y="{:.3}">{x}</text>"#, base + 16.0);
        x += step;
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="10" text-anchor="end">"#);
    if half_plane {
        for k in (-m..=m).rev().step_by(2) {
            let y = base - 2f64.powi(k) / len * plot_h;
            let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">|I| = 2^{k}</text>"#, LEFT - 4.0, y + 3.0);
        }
    } else {
        for k in (-m..=m).rev() {
            let y = TOP + (m - k) as f64 * ROW_H + ROW_H / 2.0 + 3.0;
            let _ = writeln!(s, r#"<text x="{:.3}" y="{y:.3}">k = {k}</text>"#, LEFT - 4.0);
        }
    }
    let _ = writeln!(s, "</g>");
}

#[cfg(test)]
mod tests {
    use super::*;
    use dhap_core::json::IntervalJson;

    fn tiles(m: u32, t: &[(i32, u64)]) -> String {
        json::to_string(&TileSetJson { m, tiles: t.iter().map(|&(k, j)| IntervalJson { k, j }).collect() }).unwrap()
    }

    #[test]
    fn empty_set_has_axes_only() {
        let svg = render(&Picture::parse(&tiles(2, &[])).unwrap(), false);
        assert!(svg.contains("<line"));
        assert!(!svg.contains("fill=\"#"));
    }

    #[test]
    fn complete_tree_gives_three_rows() {
        let svg = render(&Picture::parse(&tiles(1, &[(1, 0), (0, 0), (0, 1), (-1, 0), (-1, 1), (-1, 2), (-1, 3)])).unwrap(), false);
        let ys: BTreeSet<String> = svg
            .lines()
            .filter(|l| l.ends_with("fill=\"#6baed6\"/>"))
            .filter_map(|l| l.split("y=\"").nth(1).map(|r| r.split('"').next().unwrap().to_string()))
            .collect();
        assert_eq!(ys.len(), 3);
    }

    #[test]
    fn output_is_deterministic() {
        let t = tiles(2, &[(2, 0), (1, 1), (-2, 5)]);
        let a = render(&Picture::parse(&t).unwrap(), true);
        let b = render(&Picture::parse(&t).unwrap(), true);
        assert_eq!(a, b);
        assert!(a.starts_with("<?xml"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Picture::parse("{\"x\": 1}").is_err());
    }
}
