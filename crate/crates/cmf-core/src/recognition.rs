//! Subspace encoding and one-nearest-neighbor classification.
//!
//! A learned basis `W` encodes any sample through the pseudoinverse,
//! `v = pinv(W) z`. Training samples are re-encoded through the same map to
//! form the gallery, so gallery and probe coefficients live under an
//! identical projection, and a probe takes the label of the gallery vector
//! closest in the complex Euclidean metric.

use num_complex::Complex64;

use crate::error::{CmfError, Result};
use crate::factor::FactorModel;
use crate::linalg::ComplexMatrix;

/// Data matrix whose columns carry subject labels.
#[derive(Debug, Clone)]
pub struct LabeledData {
    pub data: ComplexMatrix,
    pub labels: Vec<u32>,
}

impl LabeledData {
    pub fn new(data: ComplexMatrix, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != data.cols() {
            return Err(CmfError::InvalidParameter(format!(
                "{} labels for {} columns",
                labels.len(),
                data.cols()
            )));
        }
        Ok(Self { data, labels })
    }
}

/// Encoded training set: one K-dimensional coefficient vector per label.
#[derive(Debug, Clone)]
pub struct Gallery {
    coefficients: ComplexMatrix, // K x M, one column per entry
    labels: Vec<u32>,
}

impl Gallery {
    pub fn new(coefficients: ComplexMatrix, labels: Vec<u32>) -> Result<Self> {
        if labels.is_empty() {
            return Err(CmfError::EmptyGallery);
        }
        if labels.len() != coefficients.cols() {
            return Err(CmfError::InvalidParameter(format!(
                "{} labels for {} coefficient columns",
                labels.len(),
                coefficients.cols()
            )));
        }
        Ok(Self {
            coefficients,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.coefficients.rows()
    }
}

/// Applies `pinv(W)` to samples; construction fails on a rank-deficient `W`.
#[derive(Debug, Clone)]
pub struct Encoder {
    pinv_w: ComplexMatrix,
    input_len: usize,
}

impl Encoder {
    pub fn new(w: &ComplexMatrix) -> Result<Self> {
        let rank = w.numerical_rank();
        if rank < w.cols() {
            return Err(CmfError::RankDeficient {
                rank,
                cols: w.cols(),
            });
        }
        Ok(Self {
            pinv_w: w.pinv(),
            input_len: w.rows(),
        })
    }

    /// Encodes a single sample vector of length N into K coefficients.
    pub fn encode_vec(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.input_len {
            return Err(CmfError::InvalidParameter(format!(
                "sample has length {} but the basis expects {}",
                z.len(),
                self.input_len
            )));
        }
        let k = self.pinv_w.rows();
        let mut out = vec![Complex64::new(0.0, 0.0); k];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                s += self.pinv_w[(i, j)] * zj;
            }
            *o = s;
        }
        Ok(out)
    }

    /// Encodes every column of `z` at once.
    pub fn encode_columns(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.pinv_w.matmul(z)
    }
}

/// Encodes one sample into the subspace spanned by `W`: `v = pinv(W) z`.
///
/// Errors when `W` is numerically rank deficient (the message names the
/// numerical rank).
pub fn encode(w: &ComplexMatrix, z: &[Complex64]) -> Result<Vec<Complex64>> {
    Encoder::new(w)?.encode_vec(z)
}

fn dist_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Label of the gallery entry closest to `probe` under the complex Euclidean
/// metric; ties go to the lowest gallery index.
pub fn classify_1nn(gallery: &Gallery, probe: &[Complex64]) -> Result<u32> {
    if gallery.is_empty() {
        return Err(CmfError::EmptyGallery);
    }
    if probe.len() != gallery.dimension() {
        return Err(CmfError::InvalidParameter(format!(
            "probe has dimension {} but the gallery uses {}",
            probe.len(),
            gallery.dimension()
        )));
    }
    let mut best = (f64::INFINITY, 0usize);
    for idx in 0..gallery.len() {
        let d = dist_sq(&gallery.coefficients.col(idx), probe);
        if d < best.0 {
            best = (d, idx);
        }
    }
    Ok(gallery.labels[best.1])
}

/// Fraction of test columns classified correctly.
///
/// Both sides are encoded through `pinv(model.w)`: the gallery from the
/// training columns, probes from the test columns.
pub fn evaluate(model: &FactorModel, train: &LabeledData, test: &LabeledData) -> Result<f64> {
    let encoder = Encoder::new(&model.w)?;
    let gallery = Gallery::new(encoder.encode_columns(&train.data)?, train.labels.clone())?;
    let probes = encoder.encode_columns(&test.data)?;
    let mut correct = 0usize;
    for j in 0..probes.cols() {
        if classify_1nn(&gallery, &probes.col(j))? == test.labels[j] {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{Method, SolverParams};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn model_with_basis(w: ComplexMatrix) -> FactorModel {
        let k = w.cols();
        FactorModel {
            v: ComplexMatrix::zeros(k, 1),
            params: SolverParams::new(Method::Cmf, k),
            objective_trace: vec![0.0],
            converged: true,
            w,
        }
    }

    #[test]
    fn encode_identity_basis_is_identity() {
        let w = ComplexMatrix::identity(4);
        let z: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let v = encode(&w, &z).unwrap();
        for (a, b) in v.iter().zip(&z) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn encode_recovers_basis_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let w = random_matrix(&mut rng, 7, 3);
        let z = w.col(0);
        let v = encode(&w, &z).unwrap();
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() <= 1e-10);
        assert!(v[1].norm() <= 1e-10 && v[2].norm() <= 1e-10);
    }

    #[test]
    fn encode_tolerates_small_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let w = random_matrix(&mut rng, 20, 5);
        let v0 = random_matrix(&mut rng, 5, 1);
        let clean = w.matmul(&v0).unwrap();
        let z: Vec<Complex64> = clean
            .col(0)
            .into_iter()
            .map(|c| c + Complex64::new(rng.gen_range(-1e-8..1e-8), rng.gen_range(-1e-8..1e-8)))
            .collect();
        let v = encode(&w, &z).unwrap();
        let err: f64 = v
            .iter()
            .zip(v0.col(0))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-6, "coefficient error {err}");
    }

    #[test]
    fn encode_rejects_rank_deficient_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let left = random_matrix(&mut rng, 6, 2);
        let right = random_matrix(&mut rng, 2, 4);
        let w = left.matmul(&right).unwrap(); // rank 2, 4 columns
        let z = vec![Complex64::new(1.0, 0.0); 6];
        match encode(&w, &z) {
            Err(CmfError::RankDeficient { rank, cols }) => {
                assert_eq!(rank, 2);
                assert_eq!(cols, 4);
            }
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn singleton_gallery_always_wins() {
        let coeffs = ComplexMatrix::from_real_fn(2, 1, |i, _| i as f64);
        let gallery = Gallery::new(coeffs, vec![9]).unwrap();
        let far = vec![Complex64::new(100.0, 0.0), Complex64::new(-3.0, 8.0)];
        assert_eq!(classify_1nn(&gallery, &far).unwrap(), 9);
    }

    #[test]
    fn exact_match_takes_its_own_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let coeffs = random_matrix(&mut rng, 3, 5);
        let gallery = Gallery::new(coeffs.clone(), vec![10, 11, 12, 13, 14]).unwrap();
        assert_eq!(classify_1nn(&gallery, &coeffs.col(3)).unwrap(), 13);
    }

    #[test]
    fn classification_matches_distance_scan_and_breaks_ties_low() {
        // Hand-placed points: probe at origin, two entries equidistant.
        let coeffs = ComplexMatrix::from_fn(1, 3, |_, j| match j {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0), // same distance as entry 0
            _ => Complex64::new(3.0, 0.0),
        });
        let gallery = Gallery::new(coeffs.clone(), vec![7, 8, 9]).unwrap();
        let probe = vec![Complex64::new(0.0, 0.0)];
        // Exhaustive scan oracle.
        let mut best = (f64::INFINITY, 0usize);
        for j in 0..3 {
            let d = (coeffs[(0, j)] - probe[0]).norm_sqr();
            if d < best.0 {
                best = (d, j);
            }
        }
        assert_eq!(best.1, 0, "oracle must prefer the first of the tie");
        assert_eq!(classify_1nn(&gallery, &probe).unwrap(), 7);
    }

    #[test]
    fn empty_gallery_is_rejected() {
        assert!(matches!(
            Gallery::new(ComplexMatrix::zeros(2, 1), vec![]),
            Err(CmfError::EmptyGallery)
        ));
    }

    #[test]
    fn decision_invariant_under_unitary_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let k = 4;
        // Gram-Schmidt on a random complex matrix yields a unitary.
        let mut u = random_matrix(&mut rng, k, k);
        for j in 0..k {
            for p in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for i in 0..k {
                    proj += u[(i, p)].conj() * u[(i, j)];
                }
                for i in 0..k {
                    let sub = proj * u[(i, p)];
                    u[(i, j)] -= sub;
                }
            }
            let norm: f64 = (0..k).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..k {
                u[(i, j)] /= norm;
            }
        }

        let coeffs = random_matrix(&mut rng, k, 6);
        let labels = vec![1, 2, 3, 4, 5, 6];
        let gallery = Gallery::new(coeffs.clone(), labels.clone()).unwrap();
        let rotated = Gallery::new(u.matmul(&coeffs).unwrap(), labels).unwrap();
        for _ in 0..10 {
            let probe = random_matrix(&mut rng, k, 1);
            let plain = classify_1nn(&gallery, &probe.col(0)).unwrap();
            let spun = classify_1nn(&rotated, &u.matmul(&probe).unwrap().col(0)).unwrap();
            assert_eq!(plain, spun);
        }
    }

    #[test]
    fn evaluate_self_match_is_perfect() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let w = random_matrix(&mut rng, 12, 4);
        let data = random_matrix(&mut rng, 12, 9);
        let labels: Vec<u32> = (0..9).collect();
        let set = LabeledData::new(data, labels).unwrap();
        let acc = evaluate(&model_with_basis(w), &set, &set).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn evaluate_permuted_labels_sit_at_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let classes = 40u32;
        let per_class = 5usize;
        let n = 50;
        let w = random_matrix(&mut rng, n, 20);

        let m = classes as usize * per_class;
        let train = random_matrix(&mut rng, n, m);
        let test = random_matrix(&mut rng, n, m);
        let true_labels: Vec<u32> = (0..m).map(|j| (j / per_class) as u32).collect();
        // Fisher-Yates permutation of the training labels.
        let mut permuted = true_labels.clone();
        for i in (1..permuted.len()).rev() {
            let j = rng.gen_range(0..=i);
            permuted.swap(i, j);
        }

        let train = LabeledData::new(train, permuted).unwrap();
        let test = LabeledData::new(test, true_labels).unwrap();
        let acc = evaluate(&model_with_basis(w), &train, &test).unwrap();

        let p = 1.0 / classes as f64;
        let sigma = (p * (1.0 - p) / m as f64).sqrt();
        assert!(
            (acc - p).abs() <= 3.0 * sigma,
            "accuracy {acc} not within 3 sigma of {p}"
        );
    }
}
