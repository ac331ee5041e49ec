//! MNIST in IDX format, plus a synthetic Gaussian-blob dataset for tests.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::network::Batch;
use crate::rng::{Gaussian, SeedSpec, Stream};

/// Environment variable naming the directory that holds the MNIST IDX files.
pub const DATA_DIR_ENV: &str = "ZAMPLE_DATA_DIR";

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Row-major image matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Vec<f32>,
    labels: Vec<u8>,
    dim: usize,
    classes: usize,
    split: Split,
}

impl Dataset {
    pub fn new(images: Vec<f32>, labels: Vec<u8>, dim: usize, classes: usize, split: Split) -> Result<Self> {
        if dim == 0 || images.len() != labels.len() * dim {
            return Err(Error::dim("image buffer", labels.len() * dim, images.len()));
        }
        if let Some(&l) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(Error::Format(format!("label {l} out of range for {classes} classes")));
        }
        Ok(Dataset {
            images,
            labels,
            dim,
            classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn image(&self, i: usize) -> &[f32] {
        &self.images[i * self.dim..(i + 1) * self.dim]
    }

    pub fn batch(&self, indices: &[usize]) -> Batch {
        let mut inputs = Array2::zeros((indices.len(), self.dim));
        for (mut row, &i) in inputs.rows_mut().into_iter().zip(indices) {
            for (dst, &src) in row.iter_mut().zip(self.image(i)) {
                *dst = f64::from(src);
            }
        }
        let labels = indices.iter().map(|&i| self.labels[i] as usize).collect();
        Batch { inputs, labels }
    }

    pub fn full_batch(&self) -> Batch {
        let all: Vec<usize> = (0..self.len()).collect();
        self.batch(&all)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut images = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            images.extend_from_slice(self.image(i));
        }
        Dataset {
            images,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
            classes: self.classes,
            split: self.split,
        }
    }

    pub fn label_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.classes];
        for &l in &self.labels {
            h[l as usize] += 1;
        }
        h
    }

    /// Accuracy of always predicting the lowest-index most frequent class.
    pub fn majority_rate(&self) -> f64 {
        let h = self.label_histogram();
        let best = h.iter().copied().max().unwrap_or(0);
        best as f64 / self.len().max(1) as f64
    }
}

/// Load the standard train/test files from `dir`.
///
/// Both `train-images-idx3-ubyte` and `train-images.idx3-ubyte` naming
/// styles are accepted. Pixels are scaled by `1/255`.
pub fn load_mnist(dir: &Path) -> Result<(Dataset, Dataset)> {
    let train = load_split(dir, "train", Split::Train)?;
    let test = load_split(dir, "t10k", Split::Test)?;
    Ok((train, test))
}

/// Directory from `explicit`, falling back to [`DATA_DIR_ENV`].
pub fn resolve_data_dir(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
}

fn find_file(dir: &Path, prefix: &str, kind: &str) -> Result<PathBuf> {
    let dashed = dir.join(format!("{prefix}-{kind}"));
    if dashed.is_file() {
        return Ok(dashed);
    }
    let dotted = dir.join(format!("{prefix}-{}", kind.replacen('-', ".", 1)));
    if dotted.is_file() {
        return Ok(dotted);
    }
    Err(Error::MissingFile(dashed))
}

fn load_split(dir: &Path, prefix: &str, split: Split) -> Result<Dataset> {
    let (pixels, rows, dim) = read_idx_images(&find_file(dir, prefix, "images-idx3-ubyte")?)?;
    let labels = read_idx_labels(&find_file(dir, prefix, "labels-idx1-ubyte")?)?;
    if labels.len() != rows {
        return Err(Error::Format(format!(
            "{prefix}: {rows} images but {} labels",
            labels.len()
        )));
    }
    let images = pixels.into_iter().map(|b| f32::from(b) / 255.0).collect();
    Dataset::new(images, labels, dim, 10, split)
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn check_header(path: &Path, bytes: &[u8], header: usize, expected_magic: u32) -> Result<()> {
    if bytes.len() < header {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: header,
            actual: bytes.len(),
        });
    }
    let magic = be_u32(bytes, 0);
    if magic != expected_magic {
        return Err(Error::MagicMismatch {
            path: path.to_path_buf(),
            expected: expected_magic,
            found: magic,
        });
    }
    Ok(())
}

/// Raw pixels, image count and pixels per image.
pub fn read_idx_images(path: &Path) -> Result<(Vec<u8>, usize, usize)> {
    let bytes = read_file(path)?;
    check_header(path, &bytes, 16, IDX_IMAGES_MAGIC)?;
    let count = be_u32(&bytes, 4) as usize;
    let dim = be_u32(&bytes, 8) as usize * be_u32(&bytes, 12) as usize;
    let expected = 16 + count * dim;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{}: {} trailing bytes",
            path.display(),
            bytes.len() - expected
        )));
    }
    Ok((bytes[16..].to_vec(), count, dim))
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_file(path)?;
    check_header(path, &bytes, 8, IDX_LABELS_MAGIC)?;
    let count = be_u32(&bytes, 4) as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{}: {} trailing bytes",
            path.display(),
            bytes.len() - expected
        )));
    }
    Ok(bytes[8..].to_vec())
}

pub fn write_idx_images(path: &Path, pixels: &[u8], count: usize, rows: usize, cols: usize) -> Result<()> {
    if pixels.len() != count * rows * cols {
        return Err(Error::dim("idx pixels", count * rows * cols, pixels.len()));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    for x in [IDX_IMAGES_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&x.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path, out)?;
    Ok(())
}

/// Isotropic unit-variance Gaussian blobs, one per class.
///
/// Class means sit at distance `separation` from each other (scaled axis
/// vectors when `classes <= dim`, random directions otherwise). Sample `i`
/// has label `i % classes`. Values are not range-restricted.
pub fn synthetic_blobs(n_per_class: usize, classes: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 || classes == 0 || dim == 0 {
        return Err(Error::InvalidParameter("synthetic blobs need positive sizes".into()));
    }
    if classes > u8::MAX as usize + 1 {
        return Err(Error::InvalidParameter(format!(
            "{classes} classes do not fit a u8 label"
        )));
    }
    let mut rng = SeedSpec::new(seed).rng(Stream::Data);
    let mut gauss = Gaussian::new();
    let radius = separation / std::f64::consts::SQRT_2;
    let means: Vec<Vec<f64>> = (0..classes)
        .map(|c| {
            let mut mu = vec![0.0; dim];
            if c < dim {
                mu[c] = radius;
            } else {
                let dir: Vec<f64> = (0..dim).map(|_| gauss.sample(&mut rng)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                mu.iter_mut().zip(&dir).for_each(|(m, d)| *m = radius * d / norm);
            }
            mu
        })
        .collect();

    let total = n_per_class * classes;
    let mut images = Vec::with_capacity(total * dim);
    let mut labels = Vec::with_capacity(total);
    for i in 0..total {
        let c = i % classes;
        images.extend(means[c].iter().map(|m| (m + gauss.sample(&mut rng)) as f32));
        labels.push(c as u8);
    }
    Dataset::new(images, labels, dim, classes, Split::Train)
}
