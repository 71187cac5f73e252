//! Graymap and vector renderings of spacetime patches.

use std::fmt::Write as _;

use crate::spacetime::SpacetimeRect;

/// Cone edges at one level, in absolute columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeEdge {
    pub row: i64,
    pub left: i64,
    pub right: i64,
}

fn column_range(rect: &SpacetimeRect) -> (i64, i64) {
    let lo = rect.starts.iter().copied().min().unwrap_or(0);
    let hi = rect.starts.iter().zip(&rect.rows).map(|(s, r)| s + r.len() as i64).max().unwrap_or(0);
    (lo, hi)
}

/// Plain graymap, one pixel per cell, time running down. Undefined cells are white.
pub fn pgm(rect: &SpacetimeRect, alphabet: usize) -> String {
    let (lo, hi) = column_range(rect);
    let width = (hi - lo).max(0) as usize;
    let maxval = alphabet.max(2);
    let mut out = format!("P2\n{} {}\n{}\n", width, rect.height(), maxval);
    for t in 0..rect.height() {
        let j = rect.base_row + t as i64;
        let line: Vec<String> = (lo..hi)
            .map(|i| match rect.cell(i, j) {
                Some(a) => (alphabet.max(2) - 1 - a as usize).to_string(),
                None => maxval.to_string(),
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn shade(a: usize, alphabet: usize) -> u8 {
    let top = alphabet.max(2) - 1;
    (255 - (a * 255) / top) as u8
}

/// Vector drawing with `cell` pixels per cell and the cone edges as polylines.
pub fn svg(rect: &SpacetimeRect, alphabet: usize, cone: &[ConeEdge], cell: usize) -> String {
    let (lo, hi) = column_range(rect);
    let c = cell as i64;
    let (w, h) = ((hi - lo) * c, rect.height() as i64 * c);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for t in 0..rect.height() {
        let j = rect.base_row + t as i64;
        for i in lo..hi {
            if let Some(a) = rect.cell(i, j) {
                let g = shade(a as usize, alphabet);
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{c}" height="{c}" fill="rgb({g},{g},{g})"/>"#,
                    (i - lo) * c,
                    t as i64 * c
                );
            }
        }
    }
    let point = |i: i64, row: i64| format!("{},{}", (i - lo) * c + c / 2, (row - rect.base_row) * c + c / 2);
    for (name, colour, pick) in [("left", "blue", 0), ("right", "red", 1)] {
        let pts: Vec<String> = cone.iter().map(|e| point(if pick == 0 { e.left } else { e.right }, e.row)).collect();
        if !pts.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline class="cone-{name}" points="{}" fill="none" stroke="{colour}" stroke-width="{}"/>"#,
                pts.join(" "),
                (cell / 4).max(1)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> SpacetimeRect {
        SpacetimeRect { base_row: 0, starts: vec![0, 1], rows: vec![vec![0, 1, 1], vec![1]] }
    }

    #[test]
    fn graymap_layout() {
        let text = pgm(&rect(), 2);
        assert_eq!(text, "P2\n3 2\n2\n1 0 0\n2 0 2\n");
    }

    #[test]
    fn vector_has_cells_and_cone() {
        let cone = [ConeEdge { row: 0, left: 1, right: 1 }, ConeEdge { row: 1, left: 0, right: 2 }];
        let text = svg(&rect(), 2, &cone, 8);
        assert_eq!(text.matches("<rect x=").count(), 4);
        assert!(text.contains(r#"class="cone-left" points="12,4 4,12""#));
        assert!(text.ends_with("</svg>\n"));
    }
}
