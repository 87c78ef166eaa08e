//! Partial assignment between stitch-graph nodes: inner-product scores, a
//! dustbin row/column, log-domain Sinkhorn with exact unrolled gradients, and
//! the thresholded hard decision.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::tensor::{dot, Matrix};
use crate::{Error, Result};

/// Score placed on the diagonal so an edge never matches itself.
pub const SELF_SCORE: f64 = -1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    pub iterations: usize,
    pub tau_multi: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self { iterations: 100, tau_multi: 0.4 }
    }
}

/// `C[i][j] = <f_i, f_j>` with the diagonal masked.
pub fn score_matrix(f: &Matrix) -> Result<Matrix> {
    let m = f.rows();
    if m < 2 {
        return Err(Error::TooFewNodes(m));
    }
    let mut c = Matrix::zeros(m, m);
    for i in 0..m {
        c[(i, i)] = SELF_SCORE;
        for j in i + 1..m {
            let s = dot(f.row(i), f.row(j));
            c[(i, j)] = s;
            c[(j, i)] = s;
        }
    }
    Ok(c)
}

/// Gradient of a scalar wrt the embeddings, given its gradient wrt the score
/// matrix. Diagonal entries carry no dependence on `f`.
pub fn score_backward(f: &Matrix, grad_c: &Matrix) -> Matrix {
    let (m, d) = f.shape();
    let mut df = Matrix::zeros(m, d);
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let g = grad_c[(i, j)] + grad_c[(j, i)];
            if g == 0.0 {
                continue;
            }
            let fj = f.row(j);
            for (acc, v) in df.row_mut(i).iter_mut().zip(fj) {
                *acc += g * v;
            }
        }
    }
    df
}

/// Appends one row and column filled with `z`.
pub fn augment_dustbin(c: &Matrix, z: f64) -> Matrix {
    let m = c.rows();
    let mut out = Matrix::filled(m + 1, m + 1, z);
    for i in 0..m {
        out.row_mut(i)[..m].copy_from_slice(c.row(i));
    }
    out
}

/// Gradient of a scalar wrt `z`, given its gradient wrt the extended matrix.
pub fn dustbin_backward(grad_ext: &Matrix) -> (Matrix, f64) {
    let n = grad_ext.rows();
    let m = n - 1;
    let mut gc = Matrix::zeros(m, m);
    let mut gz = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i < m && j < m {
                gc[(i, j)] = grad_ext[(i, j)];
            } else {
                gz += grad_ext[(i, j)];
            }
        }
    }
    (gc, gz)
}

/// Log marginals `[0; M]` followed by `ln M`.
pub fn log_marginals(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m + 1];
    v[m] = math::ln(m as f64);
    v
}

/// Soft assignment plus the dual potentials of every iteration, which the
/// backward pass replays.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignment {
    pub log_p: Matrix,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl SoftAssignment {
    pub fn probabilities(&self) -> Matrix {
        self.log_p.map(math::exp)
    }
}

/// Alternating row/column normalization in log space, starting from zero
/// potentials. The marginals are one per real node and `M` for the dustbin.
pub fn sinkhorn_log(k: &Matrix, iterations: usize) -> Result<SoftAssignment> {
    let n = k.rows();
    if n < 3 || k.cols() != n {
        return Err(Error::TooFewNodes(n.saturating_sub(1)));
    }
    if iterations == 0 {
        return Err(Error::Numerical("sinkhorn needs at least one iteration"));
    }
    let la = log_marginals(n - 1);
    let lb = &la;
    let mut us = Vec::with_capacity(iterations);
    let mut vs = Vec::with_capacity(iterations + 1);
    let mut v = vec![0.0; n];
    vs.push(v.clone());
    let kt = k.transpose();
    let mut buf = vec![0.0; n];
    for _ in 0..iterations {
        let mut u = vec![0.0; n];
        for i in 0..n {
            let row = k.row(i);
            for j in 0..n {
                buf[j] = row[j] + v[j];
            }
            u[i] = la[i] - math::logsumexp(buf.iter().copied());
        }
        for j in 0..n {
            let col = kt.row(j);
            for i in 0..n {
                buf[i] = col[i] + u[i];
            }
            v[j] = lb[j] - math::logsumexp(buf.iter().copied());
        }
        if !u.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(Error::Numerical("non-finite Sinkhorn potential"));
        }
        us.push(u);
        vs.push(v.clone());
    }
    let u = us.last().expect("at least one iteration");
    let mut log_p = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            log_p[(i, j)] = k[(i, j)] + u[i] + v[j];
        }
    }
    Ok(SoftAssignment { log_p, u: us, v: vs })
}

/// Exact reverse pass through every Sinkhorn iteration: gradient wrt the
/// extended score matrix given the gradient wrt `log_p`.
pub fn sinkhorn_backward(k: &Matrix, soft: &SoftAssignment, grad_log_p: &Matrix) -> Matrix {
    let n = k.rows();
    let la = log_marginals(n - 1);
    let mut dk = grad_log_p.clone();
    let mut gu = grad_log_p.row_sums();
    let mut gv = grad_log_p.col_sums();
    for t in (0..soft.u.len()).rev() {
        let u = &soft.u[t];
        let v_new = &soft.v[t + 1];
        let v_old = &soft.v[t];
        // v_j = lb_j - LSE_i(K_ij + u_i)
        let mut next_gu = gu.clone();
        for j in 0..n {
            let g = gv[j];
            if g == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = math::exp(k[(i, j)] + u[i] + v_new[j] - la[j]);
                dk[(i, j)] -= g * a;
                next_gu[i] -= g * a;
            }
        }
        gu = next_gu;
        // u_i = la_i - LSE_j(K_ij + v_old_j)
        let mut next_gv = vec![0.0; n];
        for i in 0..n {
            let g = gu[i];
            if g == 0.0 {
                continue;
            }
            for j in 0..n {
                let b = math::exp(k[(i, j)] + v_old[j] + u[i] - la[i]);
                dk[(i, j)] -= g * b;
                next_gv[j] -= g * b;
            }
        }
        gv = next_gv;
        gu = vec![0.0; n];
    }
    dk
}

/// `(P + P^T) / 2`.
pub fn symmetrize(p: &Matrix) -> Matrix {
    let n = p.rows();
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = 0.5 * (p[(i, j)] + p[(j, i)]);
        }
    }
    s
}

/// Node-addressed decision: undirected pairs `(i, j)` with `i < j`, and the
/// nodes that ended up in no pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HardAssignment {
    pub pairs: Vec<(usize, usize)>,
    pub unstitched: Vec<usize>,
}

/// Per row, keeps the best real match unless the dustbin wins, plus every
/// further real match at or above `tau`. Rows are merged as undirected pairs.
pub fn hard_assign(p_sym: &Matrix, tau: f64) -> HardAssignment {
    let n = p_sym.rows();
    let m = n - 1;
    let mut pairs = Vec::new();
    for i in 0..m {
        let row = p_sym.row(i);
        let mut best = None;
        for j in (0..n).filter(|&j| j != i) {
            if best.map_or(true, |b: usize| row[j] > row[b]) {
                best = Some(j);
            }
        }
        let Some(best) = best else { continue };
        if best == m {
            continue;
        }
        for j in (0..m).filter(|&j| j != i) {
            if j == best || row[j] >= tau {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let mut used = vec![false; m];
    for &(a, b) in &pairs {
        used[a] = true;
        used[b] = true;
    }
    let unstitched = (0..m).filter(|&i| !used[i]).collect();
    HardAssignment { pairs, unstitched }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(m: usize, seed: u64, scale: f64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Matrix::zeros(m, m);
        for i in 0..m {
            c[(i, i)] = SELF_SCORE;
            for j in i + 1..m {
                let v = rng.gen_range(-scale..scale);
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        c
    }

    /// Plain multiplicative Sinkhorn on exp(K).
    fn sinkhorn_prob(k: &Matrix, iterations: usize) -> Matrix {
        let n = k.rows();
        let m = n - 1;
        let mut marg = vec![1.0; n];
        marg[m] = m as f64;
        let kk = k.map(f64::exp);
        let mut a = vec![1.0; n];
        let mut b = vec![1.0; n];
        for _ in 0..iterations {
            for i in 0..n {
                let s: f64 = (0..n).map(|j| kk[(i, j)] * b[j]).sum();
                a[i] = marg[i] / s;
            }
            for j in 0..n {
                let s: f64 = (0..n).map(|i| kk[(i, j)] * a[i]).sum();
                b[j] = marg[j] / s;
            }
        }
        let mut p = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] = a[i] * kk[(i, j)] * b[j];
            }
        }
        p
    }

    #[test]
    fn orthonormal_embeddings_score_zero() {
        let f = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let c = score_matrix(&f).unwrap();
        assert_eq!(c.as_slice(), &[SELF_SCORE, 0.0, 0.0, SELF_SCORE]);
    }

    #[test]
    fn equal_embeddings_score_squared_norm() {
        let f = Matrix::from_rows(&[vec![1.0, 2.0, 2.0], vec![1.0, 2.0, 2.0]]);
        assert_eq!(score_matrix(&f).unwrap()[(0, 1)], 9.0);
    }

    #[test]
    fn scores_match_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = Matrix::from_vec(5, 3, (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let c = score_matrix(&f).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    let mut s = 0.0;
                    for k in 0..3 {
                        s += f[(i, k)] * f[(j, k)];
                    }
                    assert!((c[(i, j)] - s).abs() < 1e-15);
                }
            }
        }
        assert!(matches!(score_matrix(&Matrix::zeros(1, 3)), Err(Error::TooFewNodes(1))));
    }

    #[test]
    fn dustbin_border() {
        let c = Matrix::from_rows(&[vec![SELF_SCORE, 0.2], vec![0.2, SELF_SCORE]]);
        let e = augment_dustbin(&c, 0.5);
        assert_eq!(e.shape(), (3, 3));
        for k in 0..3 {
            assert_eq!(e[(2, k)], 0.5);
            assert_eq!(e[(k, 2)], 0.5);
        }
        assert_eq!(e, e.transpose());
        let again = augment_dustbin(&c, 0.5);
        assert_eq!(e, again);
    }

    #[test]
    fn two_node_zero_scores_are_symmetric() {
        let k = Matrix::zeros(3, 3);
        let p = sinkhorn_log(&k, 100).unwrap().probabilities();
        assert!((p[(0, 1)] - p[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn planted_pair_matches_probability_oracle() {
        let mut c = Matrix::filled(2, 2, -5.0);
        c[(0, 1)] = 5.0;
        c[(1, 0)] = 5.0;
        let k = augment_dustbin(&c, 0.0);
        let p = sinkhorn_log(&k, 100).unwrap().probabilities();
        // the dustbin keeps mass M = 2, which caps the planted entry near 0.896
        assert!(p[(0, 1)] > 0.89);
        assert!(p[(0, 1)] > 8.0 * p[(0, 2)]);
        let oracle = sinkhorn_prob(&k, 100);
        for (x, y) in p.as_slice().iter().zip(oracle.as_slice()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn log_domain_agrees_with_oracle_on_random_input() {
        for seed in 0..10 {
            let k = augment_dustbin(&random_sym(6, seed, 2.0), 0.3);
            let p = sinkhorn_log(&k, 50).unwrap().probabilities();
            let oracle = sinkhorn_prob(&k, 50);
            for (x, y) in p.as_slice().iter().zip(oracle.as_slice()) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn marginals_are_met() {
        for (seed, m) in [(1, 4), (2, 16), (3, 64)] {
            let k = augment_dustbin(&random_sym(m, seed, 3.0), 0.7);
            let p = sinkhorn_log(&k, 100).unwrap().probabilities();
            let mut marg = vec![1.0; m + 1];
            marg[m] = m as f64;
            for (s, t) in p.row_sums().iter().zip(&marg) {
                assert!((s - t).abs() < 1e-5);
            }
            for (s, t) in p.col_sums().iter().zip(&marg) {
                assert!((s - t).abs() < 1e-5);
            }
            for i in 0..m {
                assert!(p[(i, i)] < 1e-6);
            }
        }
    }

    #[test]
    fn non_finite_input_is_numerical_error() {
        let mut k = Matrix::zeros(3, 3);
        k[(0, 1)] = f64::NAN;
        assert!(sinkhorn_log(&k, 10).unwrap_err().is_numerical());
    }

    #[test]
    fn sinkhorn_gradient_matches_finite_differences() {
        for seed in 0..4 {
            let m = 3 + seed as usize;
            let k = augment_dustbin(&random_sym(m, seed, 1.5), 0.4);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let mut w = Matrix::from_vec(m + 1, m + 1, (0..(m + 1) * (m + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect());
            // masked self entries sit near -1e9 and would swamp the difference quotient
            for i in 0..m {
                w[(i, i)] = 0.0;
            }
            let objective = |k: &Matrix| {
                let lp = sinkhorn_log(k, 20).unwrap().log_p;
                lp.as_slice().iter().zip(w.as_slice()).map(|(a, b)| a * b).sum::<f64>()
            };
            let soft = sinkhorn_log(&k, 20).unwrap();
            let dk = sinkhorn_backward(&k, &soft, &w);
            let h = 1e-5;
            for i in 0..=m {
                for j in 0..=m {
                    if i == j && i < m {
                        continue;
                    }
                    let mut kp = k.clone();
                    kp[(i, j)] += h;
                    let mut km = k.clone();
                    km[(i, j)] -= h;
                    let fd = (objective(&kp) - objective(&km)) / (2.0 * h);
                    let err = (fd - dk[(i, j)]).abs() / fd.abs().max(dk[(i, j)].abs()).max(1e-8);
                    assert!(err < 1e-5 || (fd - dk[(i, j)]).abs() < 1e-8, "({i},{j}) fd {fd} vs {}", dk[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn symmetrize_examples() {
        let p = Matrix::from_rows(&[vec![0.0, 0.8], vec![0.6, 0.0]]);
        let s = symmetrize(&p);
        assert!((s[(0, 1)] - 0.7).abs() < 1e-15 && (s[(1, 0)] - 0.7).abs() < 1e-15);
        assert_eq!(symmetrize(&s), s);
        assert_eq!(s, s.transpose());
    }

    /// Three real nodes; row 0 holds the given probabilities for nodes 1, 2
    /// and the dustbin.
    fn row_fixture(p1: f64, p2: f64, bin: f64) -> Matrix {
        let mut p = Matrix::zeros(4, 4);
        for (j, v) in [(1, p1), (2, p2), (3, bin)] {
            p[(0, j)] = v;
            p[(j, 0)] = v;
        }
        // rows 1 and 2 prefer the dustbin unless node 0 claims them
        p[(1, 3)] = 0.5;
        p[(2, 3)] = 0.5;
        p
    }

    #[test]
    fn hard_assign_argmax_only() {
        let h = hard_assign(&row_fixture(0.7, 0.2, 0.1), 0.4);
        assert_eq!(h.pairs, vec![(0, 1)]);
        assert_eq!(h.unstitched, vec![2]);
    }

    #[test]
    fn hard_assign_keeps_multi_edge() {
        let h = hard_assign(&row_fixture(0.45, 0.44, 0.01), 0.4);
        assert_eq!(h.pairs, vec![(0, 1), (0, 2)]);
        assert!(h.unstitched.is_empty());
    }

    #[test]
    fn hard_assign_dustbin_wins() {
        let mut p = row_fixture(0.1, 0.1, 0.8);
        p[(1, 3)] = 0.9;
        p[(2, 3)] = 0.9;
        let h = hard_assign(&p, 0.4);
        assert!(h.pairs.is_empty());
        assert_eq!(h.unstitched, vec![0, 1, 2]);
    }

    #[test]
    fn hard_assign_ties_pick_lowest_column() {
        let mut p = Matrix::zeros(4, 4);
        p[(0, 1)] = 0.3;
        p[(0, 2)] = 0.3;
        p[(1, 0)] = 0.3;
        p[(2, 0)] = 0.3;
        p[(1, 3)] = 0.5;
        p[(2, 3)] = 0.5;
        let h = hard_assign(&p, 1.0);
        assert_eq!(h.pairs, vec![(0, 1)]);
    }
}
