//! Cosine kNN similarity graph and its Laplacian.
//!
//! Vertices are data columns; edge weights are cosine similarities kept for
//! the union of the k-nearest-neighbor relations (an edge survives when
//! either endpoint ranks the other among its k most similar vertices). The
//! Laplacian `L = D - T` feeds the graph-regularized solver, which penalizes
//! `Trace(V L V^H)`, the weighted sum of squared coefficient differences.

use num_complex::Complex64;

use crate::error::{CmfError, Result};
use crate::linalg::ComplexMatrix;

/// Default neighbor count for graph construction.
pub const DEFAULT_K: usize = 5;

/// Symmetric similarity weights plus the derived Laplacian.
#[derive(Debug, Clone)]
pub struct GraphWeights {
    /// Similarity weights; symmetric, zero diagonal.
    pub t: ComplexMatrix,
    /// Laplacian `D - T`; rows sum to zero.
    pub l: ComplexMatrix,
    /// Neighbor count the graph was built with.
    pub k: usize,
}

/// Cosine similarity of two real vectors, clamped to `[-1, 1]`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    assert_eq!(u.len(), v.len(), "cosine_similarity expects equal lengths");
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 {
        return Err(CmfError::ZeroVector { index: 0 });
    }
    if nv == 0.0 {
        return Err(CmfError::ZeroVector { index: 1 });
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Builds the cosine kNN graph over the columns of `features` (a real-valued
/// matrix) and derives the Laplacian.
///
/// `T[i][j]` is the cosine similarity when `j` is among the `k` most similar
/// vertices of `i` or vice versa, zero otherwise; the diagonal is zero.
/// Neighbor ties are broken toward the smaller vertex index, so construction
/// is deterministic.
pub fn knn_graph(features: &ComplexMatrix, k: usize) -> Result<GraphWeights> {
    let m = features.cols();
    if k == 0 || k >= m {
        return Err(CmfError::NeighborCountOutOfRange { k, vertices: m });
    }
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..features.rows()).map(|i| features[(i, j)].re).collect())
        .collect();
    for (j, c) in cols.iter().enumerate() {
        if c.iter().all(|&v| v == 0.0) {
            return Err(CmfError::ZeroVector { index: j });
        }
    }

    // Full similarity table; M is the sample count, so O(M^2) is fine here.
    let mut sim = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let s = cosine_similarity(&cols[i], &cols[j])?;
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }

    let mut keep = vec![vec![false; m]; m];
    for i in 0..m {
        let mut order: Vec<usize> = (0..m).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            sim[i][b]
                .partial_cmp(&sim[i][a])
                .unwrap()
                .then(a.cmp(&b))
        });
        for &j in order.iter().take(k) {
            keep[i][j] = true;
        }
    }

    let mut t = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j && (keep[i][j] || keep[j][i]) {
                t[(i, j)] = Complex64::new(sim[i][j], 0.0);
            }
        }
    }
    let mut l = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        let degree: f64 = (0..m).map(|j| t[(i, j)].re).sum();
        for j in 0..m {
            l[(i, j)] = Complex64::new(
                if i == j { degree } else { -t[(i, j)].re },
                0.0,
            );
        }
    }
    Ok(GraphWeights { t, l, k })
}

/// Graph regularization term `Trace(V L V^H)` for coefficients `V` (K x M)
/// and a real symmetric PSD Laplacian `L` (M x M).
///
/// The trace is real up to roundoff; its real part is returned after checking
/// that the imaginary residue stays below `1e-10`.
pub fn graph_penalty(v: &ComplexMatrix, l: &ComplexMatrix) -> Result<f64> {
    if v.cols() != l.rows() || l.rows() != l.cols() {
        return Err(CmfError::ShapeMismatch {
            op: "graph_penalty",
            left_rows: v.rows(),
            left_cols: v.cols(),
            right_rows: l.rows(),
            right_cols: l.cols(),
        });
    }
    // Trace(V L V^H) = sum_{i,j} L_ij <v_i, v_j> over columns of V.
    let m = l.rows();
    let mut trace = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let lij = l[(i, j)];
            if lij.re == 0.0 && lij.im == 0.0 {
                continue;
            }
            let mut inner = Complex64::new(0.0, 0.0);
            for r in 0..v.rows() {
                inner += v[(r, i)] * v[(r, j)].conj();
            }
            trace += lij * inner;
        }
    }
    debug_assert!(
        trace.im.abs() <= 1e-10 * trace.re.abs().max(1.0),
        "graph penalty trace has imaginary residue {}",
        trace.im
    );
    Ok(trace.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_nonneg_features(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> ComplexMatrix {
        ComplexMatrix::from_real_fn(dim, m, |_, _| rng.gen_range(0.01..1.0))
    }

    #[test]
    fn cosine_parallel_orthogonal_and_diagonal() {
        let u = [1.0, 1.0];
        assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() <= 1e-15);
        assert!((cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap()).abs() <= 1e-15);
        let s = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((s - 1.0 / 2.0_f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn cosine_rejects_zero_vectors() {
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(cosine_similarity(&[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn two_identical_columns_single_neighbor() {
        let f = ComplexMatrix::from_real_fn(3, 2, |i, _| (i + 1) as f64);
        let g = knn_graph(&f, 1).unwrap();
        for (i, j, want) in [(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)] {
            assert!((g.t[(i, j)].re - want).abs() <= 1e-12, "T[{i}][{j}]");
        }
        for (i, j, want) in [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)] {
            assert!((g.l[(i, j)].re - want).abs() <= 1e-12, "L[{i}][{j}]");
        }
    }

    #[test]
    fn orthogonal_columns_give_empty_graph() {
        let f = ComplexMatrix::from_real_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        let g = knn_graph(&f, 1).unwrap();
        assert_eq!(g.t.frob_norm_sq(), 0.0);
        assert_eq!(g.l.frob_norm_sq(), 0.0);
    }

    #[test]
    fn knn_rejects_bad_k() {
        let f = ComplexMatrix::from_real_fn(2, 3, |_, _| 1.0);
        assert!(knn_graph(&f, 0).is_err());
        assert!(knn_graph(&f, 3).is_err());
    }

    #[test]
    fn knn_rejects_zero_feature_column() {
        let f = ComplexMatrix::from_real_fn(3, 4, |_, j| if j == 2 { 0.0 } else { 1.0 });
        assert!(matches!(
            knn_graph(&f, 2),
            Err(CmfError::ZeroVector { index: 2 })
        ));
    }

    /// Brute-force oracle: keep edge (i, j) iff j is among i's k best by
    /// (similarity desc, index asc) or vice versa.
    fn knn_oracle(features: &ComplexMatrix, k: usize) -> Vec<Vec<f64>> {
        let m = features.cols();
        let col = |j: usize| -> Vec<f64> {
            (0..features.rows()).map(|i| features[(i, j)].re).collect()
        };
        let mut t = vec![vec![0.0; m]; m];
        let mut best: Vec<Vec<usize>> = Vec::with_capacity(m);
        for i in 0..m {
            let mut all: Vec<(usize, f64)> = (0..m)
                .filter(|&j| j != i)
                .map(|j| (j, cosine_similarity(&col(i), &col(j)).unwrap()))
                .collect();
            all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            best.push(all.into_iter().take(k).map(|(j, _)| j).collect());
        }
        for (i, row) in t.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                if i != j && (best[i].contains(&j) || best[j].contains(&i)) {
                    *slot = cosine_similarity(&col(i), &col(j)).unwrap();
                }
            }
        }
        t
    }

    #[test]
    fn knn_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_nonneg_features(&mut rng, 6, 8);
        let g = knn_graph(&f, 3).unwrap();
        let oracle = knn_oracle(&f, 3);
        for (i, row) in oracle.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert_eq!(g.t[(i, j)].re, want, "T[{i}][{j}]");
            }
        }
    }

    #[test]
    fn ties_prefer_the_smaller_vertex_index() {
        // Three copies of e1: every similarity is exactly 1, so k = 1 must
        // pick the smallest candidate index for each vertex.
        let f = ComplexMatrix::from_real_fn(2, 3, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let g = knn_graph(&f, 1).unwrap();
        // 0 -> 1, 1 -> 0, 2 -> 0; union keeps (0,1) and (0,2) only.
        assert_eq!(g.t[(0, 1)].re, 1.0);
        assert_eq!(g.t[(0, 2)].re, 1.0);
        assert_eq!(g.t[(1, 2)].re, 0.0);
        assert_eq!(g.t[(2, 1)].re, 0.0);
    }

    #[test]
    fn knn_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let f = random_nonneg_features(&mut rng, 4, 7);
        let a = knn_graph(&f, 2).unwrap();
        let b = knn_graph(&f, 2).unwrap();
        assert_eq!(a.t, b.t);
        assert_eq!(a.l, b.l);
    }

    #[test]
    fn laplacian_rows_sum_to_zero_and_kills_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = random_nonneg_features(&mut rng, 5, 9);
        let g = knn_graph(&f, 3).unwrap();
        for i in 0..9 {
            let s: f64 = (0..9).map(|j| g.l[(i, j)].re).sum();
            assert!(s.abs() <= 1e-12, "row {i} sums to {s}");
        }
        let ones = ComplexMatrix::from_real_fn(9, 1, |_, _| 1.0);
        assert!(g.l.matmul(&ones).unwrap().frob_norm() <= 1e-12);
    }

    #[test]
    fn laplacian_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let f = random_nonneg_features(&mut rng, 5, 8);
        let g = knn_graph(&f, 3).unwrap();
        for _ in 0..50 {
            let x = ComplexMatrix::from_real_fn(8, 1, |_, _| rng.gen_range(-1.0..1.0));
            let quad = graph_penalty(&x.hermitian(), &g.l).unwrap();
            let norm_sq = x.frob_norm_sq();
            assert!(quad >= -1e-10 * norm_sq, "x^T L x = {quad}");
        }
    }

    #[test]
    fn penalty_zero_for_empty_graph_and_constant_columns() {
        let l0 = ComplexMatrix::zeros(4, 4);
        let v = ComplexMatrix::from_fn(2, 4, |i, _| Complex64::new(i as f64, 1.0));
        assert_eq!(graph_penalty(&v, &l0).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let f = random_nonneg_features(&mut rng, 5, 4);
        let g = knn_graph(&f, 2).unwrap();
        // Identical columns lie in the Laplacian null space.
        let p = graph_penalty(&v, &g.l).unwrap();
        assert!(p.abs() <= 1e-12, "penalty {p}");
    }

    #[test]
    fn penalty_matches_pairwise_difference_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let f = random_nonneg_features(&mut rng, 6, 7);
        let g = knn_graph(&f, 3).unwrap();
        let v = ComplexMatrix::from_fn(3, 7, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let fast = graph_penalty(&v, &g.l).unwrap();
        let mut slow = 0.0;
        for i in 0..7 {
            for j in (i + 1)..7 {
                let w = g.t[(i, j)].re;
                if w == 0.0 {
                    continue;
                }
                let diff_sq: f64 = (0..3).map(|r| (v[(r, i)] - v[(r, j)]).norm_sqr()).sum();
                slow += w * diff_sq;
            }
        }
        assert!((fast - slow).abs() <= 1e-10, "trace {fast} vs pairwise {slow}");
        assert!(fast >= -1e-10);
    }

    #[test]
    fn penalty_rejects_shape_mismatch() {
        let v = ComplexMatrix::zeros(2, 4);
        let l = ComplexMatrix::zeros(3, 3);
        assert!(graph_penalty(&v, &l).is_err());
    }
}
