use std::path::{Path, PathBuf};

use image::DynamicImage;

use super::FrameSource;
use crate::error::{Error, Result};
use crate::frame::{luma_bt601, Frame};

const EXTENSIONS: &[&str] = &["png", "pgm", "ppm", "pnm", "pbm"];

/// Numbered still images in one directory, read in numeric order of the
/// digits in their file names (`frame_2.png` before `frame_10.png`).
pub struct ImageSequence {
    files: Vec<PathBuf>,
    width: usize,
    height: usize,
    next: usize,
    first: Option<Frame>,
    done: bool,
}

fn sort_key(path: &Path) -> (u64, String) {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let digits: String = name
        .chars()
        .rev()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    (digits.parse().unwrap_or(u64::MAX), name)
}

fn to_gray(img: DynamicImage) -> (usize, usize, Vec<u8>) {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0]).collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| luma_bt601(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    (w, h, pixels)
}

fn decode(path: &Path, index: u64) -> Result<Frame> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (w, h, px) = to_gray(img);
    Frame::new(index, w, h, px)
}

impl ImageSequence {
    pub fn open(dir: &Path) -> Result<Self> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
            })
            .collect();
        files.sort_by_key(|p| sort_key(p));
        let first_path = files
            .first()
            .ok_or_else(|| Error::MalformedHeader(format!("no images in {}", dir.display())))?;
        let first = decode(first_path, 0)?;
        Ok(ImageSequence {
            width: first.width(),
            height: first.height(),
            files,
            next: 1,
            first: Some(first),
            done: false,
        })
    }
}

impl Iterator for ImageSequence {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(f) = self.first.take() {
            return Some(Ok(f));
        }
        if self.done || self.next >= self.files.len() {
            return None;
        }
        let index = self.next as u64;
        let path = &self.files[self.next];
        self.next += 1;
        let frame = decode(path, index).and_then(|f| {
            if (f.width(), f.height()) == (self.width, self.height) {
                Ok(f)
            } else {
                Err(Error::Image {
                    path: path.clone(),
                    message: format!(
                        "size {}x{} differs from sequence {}x{}",
                        f.width(),
                        f.height(),
                        self.width,
                        self.height
                    ),
                })
            }
        });
        if frame.is_err() {
            self.done = true;
        }
        Some(frame)
    }
}

impl FrameSource for ImageSequence {
    fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn frame_count(&self) -> Option<u64> {
        Some(self.files.len() as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_order() {
        let mut v = [
            PathBuf::from("f_10.png"),
            PathBuf::from("f_2.png"),
            PathBuf::from("f_1.png"),
        ];
        v.sort_by_key(|p| sort_key(p));
        assert_eq!(v[0], PathBuf::from("f_1.png"));
        assert_eq!(v[2], PathBuf::from("f_10.png"));
    }
}
