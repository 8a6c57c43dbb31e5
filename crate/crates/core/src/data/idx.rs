use std::fs;
use std::path::Path;

use crate::data::{l2_normalize, DatasetSplit, LabeledDataset, Samples};
use crate::error::{QnnError, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Output side length of [`downsample_area`] as used by [`preprocess_images`].
const OUT_SIDE: usize = 16;

/// Human-readable description of the resize rule, recorded in dataset metadata.
pub const DOWNSAMPLE_RULE: &str =
    "area-weighted resize 28x28 -> 16x16 (fractional 1.75x1.75 footprints), /255, L2-normalized";

/// Images and labels as stored in an IDX pair.
#[derive(Clone, Debug)]
pub struct RawImages {
    pub rows: usize,
    pub cols: usize,
    /// `count · rows · cols` bytes, image-major, row-major within an image.
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl RawImages {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let sz = self.rows * self.cols;
        &self.pixels[i * sz..(i + 1) * sz]
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Reads an IDX3 image file and its IDX1 label file.
pub fn load_idx_images(images_path: &Path, labels_path: &Path) -> Result<RawImages> {
    let img = fs::read(images_path).map_err(|e| QnnError::io(images_path, e))?;
    let lab = fs::read(labels_path).map_err(|e| QnnError::io(labels_path, e))?;

    if img.len() < 16 {
        return Err(QnnError::format(images_path, "header shorter than 16 bytes"));
    }
    let magic = be_u32(&img, 0);
    if magic != IMAGES_MAGIC {
        return Err(QnnError::format(
            images_path,
            format!("bad magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}"),
        ));
    }
    let count = be_u32(&img, 4) as usize;
    let rows = be_u32(&img, 8) as usize;
    let cols = be_u32(&img, 12) as usize;
    let expected = count * rows * cols;
    let payload = &img[16..];
    if payload.len() != expected {
        return Err(QnnError::format(
            images_path,
            format!("expected {expected} pixel bytes, found {}", payload.len()),
        ));
    }

    if lab.len() < 8 {
        return Err(QnnError::format(labels_path, "header shorter than 8 bytes"));
    }
    let magic = be_u32(&lab, 0);
    if magic != LABELS_MAGIC {
        return Err(QnnError::format(
            labels_path,
            format!("bad magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}"),
        ));
    }
    let label_count = be_u32(&lab, 4) as usize;
    if lab.len() - 8 != label_count {
        return Err(QnnError::format(
            labels_path,
            format!("expected {label_count} label bytes, found {}", lab.len() - 8),
        ));
    }
    if label_count != count {
        return Err(QnnError::format(
            labels_path,
            format!("{label_count} labels for {count} images"),
        ));
    }
    Ok(RawImages {
        rows,
        cols,
        pixels: payload.to_vec(),
        labels: lab[8..].to_vec(),
    })
}

/// Overlap of output cell `o` (width `scale`) with every input cell.
fn footprint_weights(in_len: usize, out_len: usize) -> Vec<Vec<f64>> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|o| {
            let (lo, hi) = (o as f64 * scale, (o + 1) as f64 * scale);
            (0..in_len)
                .map(|i| (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0))
                .collect()
        })
        .collect()
}

/// Area-weighted resize of a row-major grayscale image: each output pixel
/// is the mean of the input over its (fractional) footprint.
pub fn downsample_area(
    image: &[f64],
    rows: usize,
    cols: usize,
    out_rows: usize,
    out_cols: usize,
) -> Vec<f64> {
    let wr = footprint_weights(rows, out_rows);
    let wc = footprint_weights(cols, out_cols);
    let area = (rows as f64 / out_rows as f64) * (cols as f64 / out_cols as f64);
    let mut out = vec![0.0; out_rows * out_cols];
    for (r, wrow) in wr.iter().enumerate() {
        for (c, wcol) in wc.iter().enumerate() {
            let mut acc = 0.0;
            for (i, &a) in wrow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &b) in wcol.iter().enumerate() {
                    if b != 0.0 {
                        acc += a * b * image[i * cols + j];
                    }
                }
            }
            out[r * out_cols + c] = acc / area;
        }
    }
    out
}

/// Two-class feature dataset: filter to `classes`, resize each image to
/// 16×16, flatten row-major into 256 values in `[0, 1]`, L2-normalize, and
/// label `classes.0 ↦ 0` and `classes.1 ↦ 1`.
pub fn images_to_dataset(raw: &RawImages, classes: (u8, u8), source: &str) -> Result<LabeledDataset> {
    if classes.0 == classes.1 {
        return Err(QnnError::InvalidArgument(format!(
            "classes must differ, got {} twice",
            classes.0
        )));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for i in 0..raw.len() {
        let class = match raw.labels[i] {
            l if l == classes.0 => 0,
            l if l == classes.1 => 1,
            _ => continue,
        };
        let pixels: Vec<f64> = raw.image(i).iter().map(|&p| f64::from(p) / 255.0).collect();
        let mut x = downsample_area(&pixels, raw.rows, raw.cols, OUT_SIDE, OUT_SIDE);
        l2_normalize(&mut x);
        features.push(x);
        labels.push(class);
    }
    let mut ds = LabeledDataset::new(Samples::Features(features), labels, source)?;
    ds.meta.preprocessing.push(format!("classes {} vs {}", classes.0, classes.1));
    ds.meta.preprocessing.push(DOWNSAMPLE_RULE.to_string());
    Ok(ds)
}

/// [`images_to_dataset`] followed by a seeded stratified train/test split.
pub fn preprocess_images(
    raw: &RawImages,
    classes: (u8, u8),
    num_train: usize,
    num_test: usize,
    seed: u64,
    source: &str,
) -> Result<DatasetSplit> {
    images_to_dataset(raw, classes, source)?.split_stratified(num_train, num_test, seed)
}
