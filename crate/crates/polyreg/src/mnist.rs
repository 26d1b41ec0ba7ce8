//! Handwritten-digit data: a reader for the IDX files of the MNIST
//! distribution, and a synthetic stand-in of the same shape for machines
//! without the real files.
//!
//! The stand-in draws each class as a fixed set of pen strokes on a 28x28
//! canvas, then perturbs every sample with a random shift, scale, stroke
//! jitter, thickness and ink intensity. Border pixels stay blank, as in the
//! real data.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use polyreg_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;
pub const CLASSES: usize = 10;

/// Environment variable naming a directory with the four IDX files.
pub const MNIST_DIR_VAR: &str = "POLYREG_MNIST_DIR";

#[derive(Debug, Clone)]
pub struct Digits {
    /// One row per image, pixels scaled to `[0, 1]`.
    pub images: Matrix,
    pub labels: Vec<u32>,
}

impl Digits {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            images: self.images.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Train,
    Test,
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| Error::io(path, e))?;
    Ok(u32::from_be_bytes(b))
}

/// Reads an IDX image file (`0x00000803`) into rows of `rows * cols`
/// pixels, at most `limit` images.
pub fn read_idx_images(path: &Path, limit: Option<usize>) -> Result<Matrix> {
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let magic = read_u32(&mut r, path)?;
    if magic != 0x0000_0803 {
        return Err(Error::Data(format!(
            "{}: not an IDX image file (magic {magic:#010x})",
            path.display()
        )));
    }
    let n = read_u32(&mut r, path)? as usize;
    let rows = read_u32(&mut r, path)? as usize;
    let cols = read_u32(&mut r, path)? as usize;
    let n = limit.map_or(n, |l| l.min(n));
    let mut buf = vec![0u8; n * rows * cols];
    r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(Matrix::new(
        n,
        rows * cols,
        buf.into_iter().map(|b| f64::from(b) / 255.0).collect(),
    )?)
}

/// Reads an IDX label file (`0x00000801`).
pub fn read_idx_labels(path: &Path, limit: Option<usize>) -> Result<Vec<u32>> {
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let magic = read_u32(&mut r, path)?;
    if magic != 0x0000_0801 {
        return Err(Error::Data(format!(
            "{}: not an IDX label file (magic {magic:#010x})",
            path.display()
        )));
    }
    let n = read_u32(&mut r, path)? as usize;
    let n = limit.map_or(n, |l| l.min(n));
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(buf.into_iter().map(u32::from).collect())
}

/// Loads `train-*` or `t10k-*` files from `dir`.
pub fn load_idx(dir: &Path, part: Part, limit: Option<usize>) -> Result<Digits> {
    let prefix = match part {
        Part::Train => "train",
        Part::Test => "t10k",
    };
    let images = read_idx_images(&dir.join(format!("{prefix}-images-idx3-ubyte")), limit)?;
    let labels = read_idx_labels(&dir.join(format!("{prefix}-labels-idx1-ubyte")), limit)?;
    if images.rows() != labels.len() {
        return Err(Error::Data(format!(
            "{}: {} images but {} labels",
            dir.display(),
            images.rows(),
            labels.len()
        )));
    }
    Ok(Digits { images, labels })
}

/// The directory named by [`MNIST_DIR_VAR`], if it holds the training
/// files.
pub fn mnist_dir() -> Option<PathBuf> {
    let dir = PathBuf::from(std::env::var_os(MNIST_DIR_VAR)?);
    dir.join("train-images-idx3-ubyte").is_file().then_some(dir)
}

type Point = (f64, f64);

// Three two-segment strokes per class, inside the central 20x20 box.
fn templates() -> Vec<Vec<[Point; 3]>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00d1_6175);
    (0..CLASSES)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let mut p = || (rng.gen_range(5.0..23.0), rng.gen_range(5.0..23.0));
                    [p(), p(), p()]
                })
                .collect()
        })
        .collect()
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// `n` synthetic 784-pixel digits with balanced random classes.
pub fn surrogate(n: usize, seed: u64) -> Digits {
    let templates = templates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; n * PIXELS];
    let mut labels = Vec::with_capacity(n);
    for img in data.chunks_mut(PIXELS) {
        let class = rng.gen_range(0..CLASSES);
        labels.push(class as u32);
        let (sx, sy) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let scale = rng.gen_range(0.85..1.15);
        let thick = rng.gen_range(1.0..2.2);
        let ink = rng.gen_range(0.7..1.0);
        let c = SIDE as f64 / 2.0;
        let segments: Vec<(Point, Point)> = templates[class]
            .iter()
            .flat_map(|stroke| {
                let pts: Vec<Point> = stroke
                    .iter()
                    .map(|&(x, y)| {
                        let jx = rng.gen_range(-1.2..1.2);
                        let jy = rng.gen_range(-1.2..1.2);
                        (c + (x - c) * scale + sx + jx, c + (y - c) * scale + sy + jy)
                    })
                    .collect();
                [(pts[0], pts[1]), (pts[1], pts[2])]
            })
            .collect();
        for (k, px) in img.iter_mut().enumerate() {
            let p = ((k % SIDE) as f64, (k / SIDE) as f64);
            let d = segments
                .iter()
                .map(|&(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min);
            let v = 1.0 - (d / thick) * (d / thick);
            if v > 0.0 {
                *px = (ink * v * 255.0).round() / 255.0;
            }
        }
    }
    Digits {
        images: Matrix::new(n, PIXELS, data).expect("sized above"),
        labels,
    }
}

/// Real training images when [`MNIST_DIR_VAR`] points at them, otherwise
/// the surrogate. The flag reports which one was used.
pub fn training_digits(n: usize, seed: u64) -> Result<(Digits, bool)> {
    match mnist_dir() {
        Some(dir) => Ok((load_idx(&dir, Part::Train, Some(n))?, true)),
        None => Ok((surrogate(n, seed), false)),
    }
}
