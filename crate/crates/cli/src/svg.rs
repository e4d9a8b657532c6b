//! Figure-data export: axis-aligned rectangles of projected cubes as SVG.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use conecert::cover::{read_box_list, DimSpec};

/// Project a box list onto two axes and write an SVG of the cell
/// rectangles. Projected duplicates are merged; output order is sorted,
/// so identical inputs give byte-identical files.
pub fn export_svg(boxlist: &Path, axes: (usize, usize), out: &mut dyn Write) -> Result<()> {
    let file = std::fs::File::open(boxlist)
        .with_context(|| format!("opening box list {}", boxlist.display()))?;
    let (grid, cubes) = read_box_list(&mut std::io::BufReader::new(file))?;
    let (ax, ay) = axes;
    if ax >= grid.dim() || ay >= grid.dim() || ax == ay {
        bail!(
            "projection axes ({ax}, {ay}) invalid for dimension {}",
            grid.dim()
        );
    }
    let rects: BTreeSet<(i64, i64)> = cubes
        .iter()
        .map(|c| (c.coords()[ax], c.coords()[ay]))
        .collect();

    let side = grid.cell_side();
    let span = |d: usize| -> (f64, f64) {
        match grid.dims()[d] {
            DimSpec::Bounded { lo, hi } => (lo as f64 * side, hi as f64 * side),
            DimSpec::Periodic { modulus } => (0.0, modulus as f64 * side),
        }
    };
    let (x0, x1) = span(ax);
    let (y0, y1) = span(ay);
    let scale = 720.0 / (x1 - x0).max(y1 - y0);
    let width = (x1 - x0) * scale;
    let height = (y1 - y0) * scale;

    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.2} {height:.2}">"#
    )?;
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{width:.2}" height="{height:.2}" fill="white"/>"#
    )?;
    let cell = side * scale;
    for (cx, cy) in rects {
        let x = (cx as f64 * side - x0) * scale;
        // flip the vertical axis so larger coordinates point up
        let y = height - (cy as f64 * side - y0) * scale - cell;
        writeln!(
            out,
            r##"<rect x="{x:.4}" y="{y:.4}" width="{cell:.4}" height="{cell:.4}" fill="#1f4e79" stroke="none"/>"##
        )?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}
