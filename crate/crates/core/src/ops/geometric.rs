//! Inverse-mapped nearest-neighbour warps.

use super::FILL;
use crate::imaging::Image;

/// For each output pixel centre, `source` returns the sampling position in
/// input coordinates; the pixel containing it is copied, or [`FILL`] when it
/// falls outside the image.
fn warp(img: &Image, source: impl Fn(f64, f64) -> (f64, f64)) -> Image {
    let (w, h) = img.dimensions();
    Image::from_fn(w, h, |x, y| {
        let (sx, sy) = source(f64::from(x) + 0.5, f64::from(y) + 0.5);
        let (ix, iy) = (sx.floor(), sy.floor());
        if ix >= 0.0 && iy >= 0.0 && ix < f64::from(w) && iy < f64::from(h) {
            img.pixel(ix as u32, iy as u32)
        } else {
            FILL
        }
    })
}

pub(super) fn shear_x(img: &Image, factor: f64) -> Image {
    warp(img, |x, y| (x + factor * y, y))
}

pub(super) fn shear_y(img: &Image, factor: f64) -> Image {
    warp(img, |x, y| (x, y + factor * x))
}

/// Output pixel `(x, y)` takes input pixel `(x + dx, y + dy)`.
pub(super) fn translate(img: &Image, dx: i64, dy: i64) -> Image {
    let (w, h) = img.dimensions();
    Image::from_fn(w, h, |x, y| {
        let sx = i64::from(x) + dx;
        let sy = i64::from(y) + dy;
        if sx >= 0 && sy >= 0 && sx < i64::from(w) && sy < i64::from(h) {
            img.pixel(sx as u32, sy as u32)
        } else {
            FILL
        }
    })
}

/// Counter-clockwise rotation by `degrees` about the image centre.
pub(super) fn rotate(img: &Image, degrees: f64) -> Image {
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = f64::from(img.width()) / 2.0;
    let cy = f64::from(img.height()) / 2.0;
    warp(img, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        (cx + cos * dx - sin * dy, cy + sin * dx + cos * dy)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered(w: u32, h: u32) -> Image {
        Image::from_fn(w, h, |x, y| [x as u8, y as u8, 0])
    }

    #[test]
    fn translate_shifts_and_fills() {
        let img = numbered(4, 3);
        let out = translate(&img, 1, 0);
        assert_eq!(out.pixel(0, 0), [1, 0, 0]);
        assert_eq!(out.pixel(2, 2), [3, 2, 0]);
        assert_eq!(out.pixel(3, 1), FILL);
        let out = translate(&img, 0, -2);
        assert_eq!(out.pixel(0, 0), FILL);
        assert_eq!(out.pixel(0, 1), FILL);
        assert_eq!(out.pixel(1, 2), [1, 0, 0]);
    }

    #[test]
    fn shear_x_moves_rows_by_their_height() {
        let img = numbered(10, 4);
        let out = shear_x(&img, 0.3);
        // row 0 centre y=0.5 -> offset 0.15, stays on same column
        assert_eq!(out.pixel(0, 0), [0, 0, 0]);
        // row 3 centre y=3.5 -> offset 1.05, samples one column to the right
        assert_eq!(out.pixel(0, 3), [1, 3, 0]);
        assert_eq!(out.pixel(9, 3), FILL);
    }

    #[test]
    fn shear_y_moves_columns() {
        let img = numbered(4, 10);
        let out = shear_y(&img, -0.3);
        // column 3 centre x=3.5 -> offset -1.05
        assert_eq!(out.pixel(3, 0), FILL);
        assert_eq!(out.pixel(3, 5), [3, 4, 0]);
    }

    #[test]
    fn rotate_keeps_centre_pixel() {
        let img = numbered(9, 9);
        for deg in [-30.0, -7.5, 12.0, 30.0] {
            assert_eq!(rotate(&img, deg).pixel(4, 4), [4, 4, 0]);
        }
    }

    #[test]
    fn rotate_corners_fall_outside() {
        let img = numbered(20, 20);
        let out = rotate(&img, 30.0);
        assert_eq!(out.pixel(0, 0), FILL);
        assert_eq!(out.pixel(19, 19), FILL);
    }
}
