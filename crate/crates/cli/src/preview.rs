//! Side-by-side preview panel.
//!
//! ```text
//! +------------------------------------+
//! |  header bar, coloured by branch    |
//! |  +----------+    +----------+      |
//! |  | original |    | output   |      |
//! |  +----------+    +----------+      |
//! +------------------------------------+
//! ```
//!
//! Local branch: every grid cell of the output tile is outlined in white and
//! the transformed cells in red. Global branch: a red frame around the output
//! tile, drawn in the gutter. Identity branch: no marks at all.

use mmsl_core::pipeline::{grid_partition, PipelineError};
use mmsl_core::{AugmentedSample, Branch, Image, MmslConfig, Rect, Region};

pub const HEADER: u32 = 10;
pub const GAP: u32 = 4;
pub const BACKGROUND: [u8; 3] = [24, 24, 24];
pub const GRID: [u8; 3] = [255, 255, 255];
pub const SELECTED: [u8; 3] = [255, 0, 0];

pub fn branch_colour(branch: Branch) -> [u8; 3] {
    match branch {
        Branch::Global => [200, 60, 60],
        Branch::Local => [60, 120, 210],
        Branch::Identity => [110, 110, 110],
    }
}

/// What was drawn, for callers and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annotations {
    pub grid_cells: usize,
    pub selected_cells: usize,
    pub global_frame: bool,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub image: Image,
    /// Where the original sits in the panel.
    pub left: Rect,
    /// Where the transformed image sits in the panel.
    pub right: Rect,
    pub annotations: Annotations,
}

fn outline(canvas: &mut Image, r: Rect, colour: [u8; 3]) {
    if r.w == 0 || r.h == 0 {
        return;
    }
    let (x1, y1) = (r.x + r.w - 1, r.y + r.h - 1);
    for x in r.x..=x1 {
        canvas.set_pixel(x, r.y, colour);
        canvas.set_pixel(x, y1, colour);
    }
    for y in r.y..=y1 {
        canvas.set_pixel(r.x, y, colour);
        canvas.set_pixel(x1, y, colour);
    }
}

fn offset(r: Rect, by: Rect) -> Rect {
    Rect::new(r.x + by.x, r.y + by.y, r.w, r.h)
}

pub fn render_panel<L>(
    original: &Image,
    sample: &AugmentedSample<L>,
    cfg: &MmslConfig,
) -> Result<Panel, PipelineError> {
    let (w, h) = original.dimensions();
    let mut canvas = Image::filled(2 * w + 3 * GAP, h + HEADER + 2 * GAP, BACKGROUND);
    let bar = branch_colour(sample.branch);
    for y in 0..HEADER {
        for x in 0..canvas.width() {
            canvas.set_pixel(x, y, bar);
        }
    }
    let left = Rect::new(GAP, HEADER + GAP, w, h);
    let right = Rect::new(2 * GAP + w, HEADER + GAP, w, h);
    mmsl_core::imaging::paste_in_place(&mut canvas, original, left)?;
    mmsl_core::imaging::paste_in_place(&mut canvas, &sample.image, right)?;

    let mut annotations = Annotations {
        grid_cells: 0,
        selected_cells: 0,
        global_frame: false,
    };
    match sample.branch {
        Branch::Local => {
            let cells = grid_partition(w, h, cfg.rows, cfg.cols)?;
            for &c in &cells {
                outline(&mut canvas, offset(c, right), GRID);
            }
            annotations.grid_cells = cells.len();
            for entry in &sample.log {
                if let Region::Cell(c) = entry.region {
                    outline(&mut canvas, offset(c, right), SELECTED);
                    annotations.selected_cells += 1;
                }
            }
        }
        Branch::Global => {
            for d in 1..=2 {
                outline(
                    &mut canvas,
                    Rect::new(right.x - d, right.y - d, w + 2 * d, h + 2 * d),
                    SELECTED,
                );
            }
            annotations.global_frame = true;
        }
        Branch::Identity => {}
    }

    Ok(Panel {
        image: canvas,
        left,
        right,
        annotations,
    })
}
