//! Owned 8-bit RGB pixel buffers, PNG/JPEG I/O and rectangle arithmetic.
//!
//! Every transform in the crate consumes and produces [`Image`] values. The
//! buffer is always row-major RGB with three bytes per pixel; there is no
//! alpha channel and no color profile.

use std::path::Path;

use image::{ExtendedColorType, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by pixel-buffer construction, geometry checks and file I/O.
#[derive(Debug, Error)]
pub enum ImageError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {message}")]
    Decode { path: String, message: String },
    #[error("rect {rect:?} lies outside a {width}x{height} image")]
    OutOfBounds { rect: Rect, width: u32, height: u32 },
    #[error("source is {src_w}x{src_h} but target rect is {dst_w}x{dst_h}")]
    SizeMismatch {
        src_w: u32,
        src_h: u32,
        dst_w: u32,
        dst_h: u32,
    },
    #[error("invalid image geometry: {0}")]
    InvalidGeometry(String),
}

/// Axis-aligned pixel rectangle. `w` and `h` are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x - self.x < self.w && y - self.y < self.h
    }

    /// True when the rect is non-empty and fits inside a `width`x`height` image.
    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w > 0
            && self.h > 0
            && u64::from(self.x) + u64::from(self.w) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(height)
    }
}

/// Row-major 8-bit RGB image.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Image {
    /// Wraps an existing buffer, checking that it holds exactly `width*height*3` bytes.
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidGeometry(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(ImageError::InvalidGeometry(format!(
                "{width}x{height} RGB needs {expected} bytes, got {}",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single color.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Image {
            width,
            height,
            data,
        }
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Image {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn as_raw_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Full-image rectangle.
    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    /// Panics when `(x, y)` is outside the image.
    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x},{y}) out of range"
        );
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x},{y}) out of range"
        );
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    /// Iterator over pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Applies `f` to every channel value independently.
    pub fn map_channels(&self, mut f: impl FnMut(usize, u8) -> u8) -> Image {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i % 3, v))
            .collect();
        Image {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Decodes a PNG or JPEG file into RGB. Gray sources are replicated across
/// channels and alpha is discarded.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = ImageReader::open(path).map_err(|source| ImageError::Io {
        path: display.clone(),
        source,
    })?;
    let reader = reader
        .with_guessed_format()
        .map_err(|source| ImageError::Io {
            path: display.clone(),
            source,
        })?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        other => {
            return Err(ImageError::Decode {
                path: display,
                message: format!("unsupported format {other:?}"),
            })
        }
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(source) => ImageError::Io {
            path: display.clone(),
            source,
        },
        other => ImageError::Decode {
            path: display.clone(),
            message: other.to_string(),
        },
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    Image::from_raw(w, h, rgb.into_raw())
}

/// Writes `img` as an 8-bit RGB PNG. Loading the file back yields identical bytes.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    image::save_buffer_with_format(
        path,
        &img.data,
        img.width,
        img.height,
        ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .map_err(|e| {
        let source = match e {
            image::ImageError::IoError(source) => source,
            other => std::io::Error::other(other.to_string()),
        };
        ImageError::Io {
            path: path.display().to_string(),
            source,
        }
    })
}

/// Copies the pixels covered by `r` into a new `r.w`x`r.h` image.
pub fn crop(img: &Image, r: Rect) -> Result<Image, ImageError> {
    if !r.fits(img.width, img.height) {
        return Err(ImageError::OutOfBounds {
            rect: r,
            width: img.width,
            height: img.height,
        });
    }
    let row_bytes = r.w as usize * 3;
    let mut data = Vec::with_capacity(row_bytes * r.h as usize);
    for y in r.y..r.y + r.h {
        let o = img.offset(r.x, y);
        data.extend_from_slice(&img.data[o..o + row_bytes]);
    }
    Ok(Image {
        width: r.w,
        height: r.h,
        data,
    })
}

/// Returns a copy of `dst` with `src` written over the region `at`.
pub fn paste(dst: &Image, src: &Image, at: Rect) -> Result<Image, ImageError> {
    let mut out = dst.clone();
    paste_in_place(&mut out, src, at)?;
    Ok(out)
}

/// In-place variant of [`paste`] used where the caller already owns the buffer.
pub fn paste_in_place(dst: &mut Image, src: &Image, at: Rect) -> Result<(), ImageError> {
    if !at.fits(dst.width, dst.height) {
        return Err(ImageError::OutOfBounds {
            rect: at,
            width: dst.width,
            height: dst.height,
        });
    }
    if src.width != at.w || src.height != at.h {
        return Err(ImageError::SizeMismatch {
            src_w: src.width,
            src_h: src.height,
            dst_w: at.w,
            dst_h: at.h,
        });
    }
    let row_bytes = at.w as usize * 3;
    for row in 0..at.h {
        let d = dst.offset(at.x, at.y + row);
        let s = src.offset(0, row);
        dst.data[d..d + row_bytes].copy_from_slice(&src.data[s..s + row_bytes]);
    }
    Ok(())
}
