//! Loader for the IDX binary format the MNIST files ship in.

use std::path::Path;

use crate::error::{read_bytes, CliError};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

pub struct MnistData {
    /// Row-major pixel intensities scaled to `[0, 1]`, one vector per
    /// image.
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
}

impl MnistData {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32, CliError> {
    let slice: [u8; 4] = bytes
        .get(offset..offset + 4)
        .and_then(|s| s.try_into().ok())
        .ok_or_else(|| CliError::input(format!("{} is truncated", path.display())))?;
    Ok(u32::from_be_bytes(slice))
}

/// Load an images/labels file pair.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<MnistData, CliError> {
    let image_bytes = read_bytes(images_path)?;
    let magic = be_u32(&image_bytes, 0, images_path)?;
    if magic != IMAGES_MAGIC {
        return Err(CliError::input(format!(
            "{}: magic {magic:#010x}, expected {IMAGES_MAGIC:#010x} (IDX image file)",
            images_path.display()
        )));
    }
    let count = be_u32(&image_bytes, 4, images_path)? as usize;
    let rows = be_u32(&image_bytes, 8, images_path)? as usize;
    let cols = be_u32(&image_bytes, 12, images_path)? as usize;
    let pixels = rows * cols;
    if image_bytes.len() != 16 + count * pixels {
        return Err(CliError::input(format!(
            "{}: {} bytes, expected {} for {count} images of {rows}x{cols}",
            images_path.display(),
            image_bytes.len(),
            16 + count * pixels
        )));
    }

    let label_bytes = read_bytes(labels_path)?;
    let magic = be_u32(&label_bytes, 0, labels_path)?;
    if magic != LABELS_MAGIC {
        return Err(CliError::input(format!(
            "{}: magic {magic:#010x}, expected {LABELS_MAGIC:#010x} (IDX label file)",
            labels_path.display()
        )));
    }
    let label_count = be_u32(&label_bytes, 4, labels_path)? as usize;
    if label_bytes.len() != 8 + label_count {
        return Err(CliError::input(format!(
            "{}: {} bytes, expected {}",
            labels_path.display(),
            label_bytes.len(),
            8 + label_count
        )));
    }
    if label_count != count {
        return Err(CliError::input(format!(
            "{count} images but {label_count} labels"
        )));
    }

    let mut labels = Vec::with_capacity(count);
    for (i, &b) in label_bytes[8..].iter().enumerate() {
        if b > 9 {
            return Err(CliError::input(format!(
                "label {b} at index {i} is not a digit"
            )));
        }
        labels.push(b as usize);
    }

    let images = image_bytes[16..]
        .chunks(pixels)
        .map(|chunk| chunk.iter().map(|&b| b as f64 / 255.0).collect())
        .collect();

    Ok(MnistData {
        images,
        labels,
        rows,
        cols,
    })
}
