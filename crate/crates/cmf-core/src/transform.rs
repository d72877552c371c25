//! Pixel normalization and the Euler phase map.
//!
//! Intensities are first scaled into `[0, 1]`, then each value `x` is lifted
//! onto the complex sphere of radius `1/sqrt(2)` as
//! `z = (1/sqrt(2)) * exp(i * pi * alpha * x)`. With `alpha < 2` the phase
//! stays inside one revolution, so the map is injective on `[0, 1]` and
//! invertible from the principal argument.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{CmfError, Result};
use crate::linalg::ComplexMatrix;

/// Phase gain of the Euler map; dimensionless, must stay in `(0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub alpha: f64,
}

impl EulerParams {
    pub const DEFAULT_ALPHA: f64 = 1.9;

    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) || !alpha.is_finite() {
            return Err(CmfError::InvalidParameter(format!(
                "alpha must lie in (0, 2), got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }
}

impl Default for EulerParams {
    fn default() -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
        }
    }
}

/// Scales integer intensities into `[0, 1]` by dividing by `maxval`.
///
/// `raw` is row-major with `rows * cols` entries. Every entry must lie in
/// `[0, maxval]`; the output is a zero-imaginary matrix.
pub fn normalize_pixels(
    rows: usize,
    cols: usize,
    raw: &[u32],
    maxval: u32,
) -> Result<ComplexMatrix> {
    if maxval == 0 {
        return Err(CmfError::InvalidParameter("maxval must be positive".into()));
    }
    if raw.len() != rows * cols {
        return Err(CmfError::InvalidParameter(format!(
            "raw has {} entries but shape is {rows}x{cols}",
            raw.len()
        )));
    }
    let scale = 1.0 / f64::from(maxval);
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let v = raw[i * cols + j];
            if v > maxval {
                return Err(CmfError::EntryOutOfRange {
                    row: i,
                    col: j,
                    value: f64::from(v),
                    min: 0.0,
                    max: f64::from(maxval),
                });
            }
            out[(i, j)] = Complex64::new(f64::from(v) * scale, 0.0);
        }
    }
    Ok(out)
}

/// Maps a real matrix in `[0, 1]` onto the complex sphere:
/// `z = (1/sqrt(2)) * exp(i * pi * alpha * x)`. Every output entry has
/// modulus `1/sqrt(2)`.
pub fn euler_map(x: &ComplexMatrix, p: EulerParams) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            let v = x[(i, j)].re;
            if !(0.0..=1.0).contains(&v) || x[(i, j)].im != 0.0 {
                return Err(CmfError::EntryOutOfRange {
                    row: i,
                    col: j,
                    value: v,
                    min: 0.0,
                    max: 1.0,
                });
            }
            let phase = PI * p.alpha * v;
            out[(i, j)] = Complex64::new(FRAC_1_SQRT_2 * phase.cos(), FRAC_1_SQRT_2 * phase.sin());
        }
    }
    Ok(out)
}

/// Inverts [`euler_map`]: `x = arg(z) / (pi * alpha)` with the argument taken
/// in `[0, 2*pi)`. Zero entries have no phase and are rejected.
pub fn euler_invert(z: &ComplexMatrix, p: EulerParams) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(z.rows(), z.cols());
    for i in 0..z.rows() {
        for j in 0..z.cols() {
            let v = z[(i, j)];
            if v.norm_sqr() == 0.0 {
                return Err(CmfError::ZeroEntry { row: i, col: j });
            }
            let mut phase = v.arg(); // (-pi, pi]
            if phase < 0.0 {
                phase += TAU;
            }
            out[(i, j)] = Complex64::new(phase / (PI * p.alpha), 0.0);
        }
    }
    Ok(out)
}
