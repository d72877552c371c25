//! Image ingestion, occlusion simulation, train/test splitting and synthetic
//! test-data generation.
//!
//! PGM is the only image format understood here (both the binary `P5` and
//! ASCII `P2` flavors); anything else must be converted up front. Labels come
//! either from the ORL-style directory layout `<root>/s<subject>/<n>.pgm` or
//! from a manifest with one `path,label` pair per line.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CmfError, Result};
use crate::linalg::ComplexMatrix;

/// Single grayscale intensity image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    /// Row-major intensities in `[0, maxval]`.
    pub pixels: Vec<u16>,
}

impl Image {
    pub fn new(height: usize, width: usize, pixels: Vec<u16>) -> Result<Self> {
        if height == 0 || width == 0 || pixels.len() != height * width {
            return Err(CmfError::Dataset(format!(
                "image payload of {} pixels does not match {height}x{width}",
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn get(&self, r: usize, c: usize) -> u16 {
        self.pixels[r * self.width + c]
    }
}

/// Collection of equally sized labeled intensity images.
#[derive(Debug, Clone)]
pub struct ImageSet {
    pub images: Vec<Image>,
    pub labels: Vec<u32>,
    pub height: usize,
    pub width: usize,
    pub maxval: u16,
}

impl ImageSet {
    pub fn new(images: Vec<Image>, labels: Vec<u32>, maxval: u16) -> Result<Self> {
        if images.is_empty() {
            return Err(CmfError::Dataset("image set is empty".into()));
        }
        if images.len() != labels.len() {
            return Err(CmfError::Dataset(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        if maxval == 0 {
            return Err(CmfError::Dataset("maxval must be positive".into()));
        }
        let (height, width) = (images[0].height, images[0].width);
        for (i, img) in images.iter().enumerate() {
            if img.height != height || img.width != width {
                return Err(CmfError::Dataset(format!(
                    "image {i} is {}x{} but the set is {height}x{width}",
                    img.height, img.width
                )));
            }
            if let Some(&v) = img.pixels.iter().find(|&&v| v > maxval) {
                return Err(CmfError::Dataset(format!(
                    "image {i} has intensity {v} above maxval {maxval}"
                )));
            }
        }
        Ok(Self {
            images,
            labels,
            height,
            width,
            maxval,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Distinct labels in ascending order.
    pub fn subjects(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.labels.clone();
        s.sort_unstable();
        s.dedup();
        s
    }
}

// ---- PGM ----------------------------------------------------------------

fn pgm_err(path: &Path, reason: impl Into<String>) -> CmfError {
    CmfError::Pgm {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Pulls the next whitespace-delimited token, skipping `#` comments.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

fn parse_usize(tok: &[u8], path: &Path, what: &str) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| pgm_err(path, format!("bad {what} field")))
}

/// Parses a PGM file (`P5` binary or `P2` ASCII, 8- or 16-bit).
pub fn read_pgm(path: &Path) -> Result<(Image, u16)> {
    let bytes = std::fs::read(path)?;
    let mut pos = 0;
    let magic = next_token(&bytes, &mut pos).ok_or_else(|| pgm_err(path, "missing magic"))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(pgm_err(
                path,
                format!("unsupported magic {:?}", String::from_utf8_lossy(other)),
            ))
        }
    };
    let width = parse_usize(
        next_token(&bytes, &mut pos).ok_or_else(|| pgm_err(path, "missing width"))?,
        path,
        "width",
    )?;
    let height = parse_usize(
        next_token(&bytes, &mut pos).ok_or_else(|| pgm_err(path, "missing height"))?,
        path,
        "height",
    )?;
    let maxval = parse_usize(
        next_token(&bytes, &mut pos).ok_or_else(|| pgm_err(path, "missing maxval"))?,
        path,
        "maxval",
    )?;
    if width == 0 || height == 0 {
        return Err(pgm_err(path, "dimensions must be positive"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(pgm_err(path, format!("maxval {maxval} out of range")));
    }
    let count = width * height;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // Exactly one whitespace byte separates the header from the payload.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(pgm_err(path, "missing separator before payload"));
        }
        pos += 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let payload = &bytes[pos..];
        if payload.len() < need {
            return Err(pgm_err(
                path,
                format!("payload truncated: {} bytes, need {need}", payload.len()),
            ));
        }
        if wide {
            for ch in payload[..need].chunks_exact(2) {
                pixels.push(u16::from_be_bytes([ch[0], ch[1]]));
            }
        } else {
            pixels.extend(payload[..need].iter().map(|&b| u16::from(b)));
        }
    } else {
        for _ in 0..count {
            let tok =
                next_token(&bytes, &mut pos).ok_or_else(|| pgm_err(path, "payload truncated"))?;
            let v = parse_usize(tok, path, "pixel")?;
            if v > 65535 {
                return Err(pgm_err(path, format!("pixel value {v} out of range")));
            }
            pixels.push(v as u16);
        }
    }
    if let Some(&v) = pixels.iter().find(|&&v| usize::from(v) > maxval) {
        return Err(pgm_err(path, format!("pixel {v} exceeds maxval {maxval}")));
    }
    Ok((Image::new(height, width, pixels)?, maxval as u16))
}

/// Writes a binary (`P5`) PGM file.
pub fn write_pgm(img: &Image, maxval: u16, path: &Path) -> Result<()> {
    if maxval == 0 {
        return Err(CmfError::Dataset("maxval must be positive".into()));
    }
    if let Some(&v) = img.pixels.iter().find(|&&v| v > maxval) {
        return Err(CmfError::Dataset(format!(
            "pixel {v} exceeds maxval {maxval}"
        )));
    }
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, maxval).into_bytes();
    if maxval > 255 {
        for &v in &img.pixels {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(img.pixels.iter().map(|&v| v as u8));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Sorts by numeric file stem when possible so `2.pgm` precedes `10.pgm`.
fn file_sort_key(path: &Path) -> (u64, String) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match stem.parse::<u64>() {
        Ok(n) => (n, String::new()),
        Err(_) => (u64::MAX, stem),
    }
}

/// Loads `<root>/s<subject>/<n>.pgm` trees (the ORL layout).
///
/// Subject directories are visited in ascending subject order and files in
/// natural filename order, so the resulting set order is deterministic.
pub fn load_pgm_dir(root: &Path) -> Result<ImageSet> {
    let mut subject_dirs: Vec<(u32, std::path::PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        let path = entry.path();
        if !path.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(id) = name.strip_prefix('s').and_then(|s| s.parse::<u32>().ok()) {
            subject_dirs.push((id, path));
        }
    }
    if subject_dirs.is_empty() {
        return Err(CmfError::Dataset(format!(
            "no s<subject> directories under {}",
            root.display()
        )));
    }
    subject_dirs.sort();

    let mut entries: Vec<(std::path::PathBuf, u32)> = Vec::new();
    for (id, dir) in subject_dirs {
        let mut files: Vec<std::path::PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .map(|e| e.eq_ignore_ascii_case("pgm"))
                    .unwrap_or(false)
            })
            .collect();
        files.sort_by_key(|p| file_sort_key(p));
        for f in files {
            entries.push((f, id));
        }
    }
    load_entries(entries)
}

/// Loads images listed in a manifest file with one `path,label` pair per
/// line; relative paths resolve against the manifest's directory.
pub fn load_pgm_manifest(manifest: &Path) -> Result<ImageSet> {
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let text = std::fs::read_to_string(manifest)?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (path, label) = line.rsplit_once(',').ok_or_else(|| {
            CmfError::Dataset(format!(
                "manifest line {}: expected `path,label`, got {line:?}",
                lineno + 1
            ))
        })?;
        let label: u32 = label.trim().parse().map_err(|_| {
            CmfError::Dataset(format!(
                "manifest line {}: label {label:?} is not an integer",
                lineno + 1
            ))
        })?;
        let path = Path::new(path.trim());
        let full = if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        };
        entries.push((full, label));
    }
    load_entries(entries)
}

fn load_entries(entries: Vec<(std::path::PathBuf, u32)>) -> Result<ImageSet> {
    if entries.is_empty() {
        return Err(CmfError::Dataset("no PGM files to load".into()));
    }
    let mut images = Vec::with_capacity(entries.len());
    let mut labels = Vec::with_capacity(entries.len());
    let mut maxval = None;
    for (path, label) in entries {
        let (img, mv) = read_pgm(&path)?;
        match maxval {
            None => maxval = Some(mv),
            Some(prev) if prev != mv => {
                return Err(pgm_err(
                    &path,
                    format!("maxval {mv} differs from the set's {prev}"),
                ));
            }
            _ => {}
        }
        images.push(img);
        labels.push(label);
    }
    ImageSet::new(images, labels, maxval.expect("at least one image"))
}

// ---- Geometry -----------------------------------------------------------

/// Bilinear resize on a corner-aligned sampling grid, rounding back to
/// integer intensities.
pub fn resize_bilinear(img: &Image, new_h: usize, new_w: usize) -> Result<Image> {
    if new_h == 0 || new_w == 0 {
        return Err(CmfError::Dataset("resize target must be positive".into()));
    }
    let scale = |out_idx: usize, out_len: usize, in_len: usize| -> f64 {
        if out_len <= 1 {
            0.0
        } else {
            out_idx as f64 * (in_len - 1) as f64 / (out_len - 1) as f64
        }
    };
    let mut pixels = Vec::with_capacity(new_h * new_w);
    for r in 0..new_h {
        let fr = scale(r, new_h, img.height);
        let r0 = fr.floor() as usize;
        let r1 = (r0 + 1).min(img.height - 1);
        let dr = fr - r0 as f64;
        for c in 0..new_w {
            let fc = scale(c, new_w, img.width);
            let c0 = fc.floor() as usize;
            let c1 = (c0 + 1).min(img.width - 1);
            let dc = fc - c0 as f64;
            let v = f64::from(img.get(r0, c0)) * (1.0 - dr) * (1.0 - dc)
                + f64::from(img.get(r0, c1)) * (1.0 - dr) * dc
                + f64::from(img.get(r1, c0)) * dr * (1.0 - dc)
                + f64::from(img.get(r1, c1)) * dr * dc;
            pixels.push(v.round().clamp(0.0, 65535.0) as u16);
        }
    }
    Image::new(new_h, new_w, pixels)
}

/// Overwrites a `patch x patch` square at a uniformly random location with
/// `fill`. `patch = 0` leaves the image untouched.
pub fn occlude(img: &Image, patch: usize, fill: u16, rng: &mut ChaCha8Rng) -> Result<Image> {
    if patch > img.height.min(img.width) {
        return Err(CmfError::Dataset(format!(
            "patch {patch} does not fit a {}x{} image",
            img.height, img.width
        )));
    }
    let mut out = img.clone();
    if patch == 0 {
        return Ok(out);
    }
    let r0 = rng.gen_range(0..=img.height - patch);
    let c0 = rng.gen_range(0..=img.width - patch);
    for r in r0..r0 + patch {
        out.pixels[r * img.width + c0..r * img.width + c0 + patch].fill(fill);
    }
    Ok(out)
}

/// Applies [`occlude`] to every image of the set with one shared rng stream.
pub fn occlude_all(set: &ImageSet, patch: usize, fill: u16, rng: &mut ChaCha8Rng) -> Result<ImageSet> {
    if fill > set.maxval {
        return Err(CmfError::Dataset(format!(
            "fill {fill} exceeds maxval {}",
            set.maxval
        )));
    }
    let images = set
        .images
        .iter()
        .map(|img| occlude(img, patch, fill, rng))
        .collect::<Result<Vec<_>>>()?;
    ImageSet::new(images, set.labels.clone(), set.maxval)
}

/// Resizes every image of the set.
pub fn resize_all(set: &ImageSet, new_h: usize, new_w: usize) -> Result<ImageSet> {
    let images = set
        .images
        .iter()
        .map(|img| resize_bilinear(img, new_h, new_w))
        .collect::<Result<Vec<_>>>()?;
    ImageSet::new(images, set.labels.clone(), set.maxval)
}

// ---- Splitting and vectorization ----------------------------------------

/// Splits per subject: exactly `n_train` images drawn uniformly without
/// replacement go to the training side, the rest to the test side. Subjects
/// are processed in ascending label order, so the partition depends only on
/// `seed`.
pub fn split(set: &ImageSet, n_train: usize, seed: u64) -> Result<(ImageSet, ImageSet)> {
    if n_train == 0 {
        return Err(CmfError::InvalidParameter("n_train must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for subject in set.subjects() {
        let mut indices: Vec<usize> = (0..set.len())
            .filter(|&i| set.labels[i] == subject)
            .collect();
        if indices.len() <= n_train {
            return Err(CmfError::SubjectTooSmall {
                subject,
                available: indices.len(),
                required: n_train + 1,
            });
        }
        // Fisher-Yates; the first n_train entries form the training draw.
        for i in 0..indices.len() - 1 {
            let j = rng.gen_range(i..indices.len());
            indices.swap(i, j);
        }
        let (tr, te) = indices.split_at(n_train);
        train_idx.extend_from_slice(tr);
        test_idx.extend_from_slice(te);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((subset(set, &train_idx)?, subset(set, &test_idx)?))
}

fn subset(set: &ImageSet, indices: &[usize]) -> Result<ImageSet> {
    ImageSet::new(
        indices.iter().map(|&i| set.images[i].clone()).collect(),
        indices.iter().map(|&i| set.labels[i]).collect(),
        set.maxval,
    )
}

/// Flattens each image row-major into a column and normalizes by `maxval`;
/// the output is a zero-imaginary matrix with entries in `[0, 1]`.
pub fn vectorize(set: &ImageSet) -> ComplexMatrix {
    let n = set.height * set.width;
    let mut raw = vec![0u32; n * set.len()];
    for (j, img) in set.images.iter().enumerate() {
        for (i, &p) in img.pixels.iter().enumerate() {
            raw[i * set.len() + j] = u32::from(p);
        }
    }
    crate::transform::normalize_pixels(n, set.len(), &raw, u32::from(set.maxval))
        .expect("ImageSet construction bounds every intensity by maxval")
}

// ---- Synthetic data -----------------------------------------------------

/// Exact low-rank complex test instance: `Z = W0 * V0` with factors drawn
/// from the seeded generator.
pub fn synth_lowrank(
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    assert!(k >= 1 && k <= n.min(m), "rank must satisfy 1 <= K <= min(N, M)");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize, cols: usize| {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    };
    let w0 = draw(n, k);
    let v0 = draw(k, m);
    let z = w0.matmul(&v0).expect("shapes agree by construction");
    (z, w0, v0)
}

/// Synthetic labeled image set: one Gaussian blob per class at a
/// class-specific grid location, with per-image center jitter, amplitude
/// variation and uniform pixel noise. Meant as a stand-in face gallery for
/// pipeline checks when no real dataset is mounted.
pub fn synth_blob_images(
    classes: u32,
    per_class: usize,
    height: usize,
    width: usize,
    seed: u64,
) -> ImageSet {
    assert!(classes > 0 && per_class > 0 && height >= 8 && width >= 8);
    let maxval = 255u16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Class centers on a grid with a safety margin.
    let grid_cols = (classes as f64).sqrt().ceil() as usize;
    let grid_rows = (classes as usize).div_ceil(grid_cols);
    let margin_r = height / 6;
    let margin_c = width / 6;
    let centers: Vec<(f64, f64)> = (0..classes as usize)
        .map(|c| {
            let gr = c / grid_cols;
            let gc = c % grid_cols;
            let r = if grid_rows > 1 {
                margin_r as f64 + gr as f64 * (height - 1 - 2 * margin_r) as f64 / (grid_rows - 1) as f64
            } else {
                (height / 2) as f64
            };
            let col = if grid_cols > 1 {
                margin_c as f64 + gc as f64 * (width - 1 - 2 * margin_c) as f64 / (grid_cols - 1) as f64
            } else {
                (width / 2) as f64
            };
            (r, col)
        })
        .collect();

    let sigma = height.min(width) as f64 / 13.0;
    let jitter = (height.min(width) as f64 / 16.0).max(1.0);
    let mut images = Vec::with_capacity(classes as usize * per_class);
    let mut labels = Vec::with_capacity(classes as usize * per_class);
    for class in 0..classes {
        let (cr, cc) = centers[class as usize];
        for _ in 0..per_class {
            let dr = rng.gen_range(-jitter..=jitter);
            let dc = rng.gen_range(-jitter..=jitter);
            let amp = rng.gen_range(0.40..0.85) * f64::from(maxval);
            let mut pixels = Vec::with_capacity(height * width);
            for r in 0..height {
                for c in 0..width {
                    let d2 = (r as f64 - cr - dr).powi(2) + (c as f64 - cc - dc).powi(2);
                    let signal = amp * (-d2 / (2.0 * sigma * sigma)).exp();
                    let noise = rng.gen_range(0.0..0.40) * f64::from(maxval);
                    pixels.push((signal + noise).round().clamp(0.0, f64::from(maxval)) as u16);
                }
            }
            images.push(Image::new(height, width, pixels).expect("payload sized above"));
            labels.push(class);
        }
    }
    ImageSet::new(images, labels, maxval).expect("non-empty by construction")
}
