//! Independent oracles shared by the integration tests and the acceptance
//! harness. The oracles avoid the library's numerical kernels; `checks`
//! runs the library against them and returns the measured errors.
#![allow(dead_code)]

pub mod checks;

use std::collections::HashMap;
use std::sync::Arc;

use gmrf_core::rng::{stream, StreamRng};
use gmrf_core::{SparseSpd, SupportPattern, SymmetricDense};
use rand::Rng;

pub fn rng(seed: u64) -> StreamRng {
    stream(seed, 0)
}

/// Random off-diagonal pattern with roughly `fill` density, made strictly
/// diagonally dominant (hence SPD) by the diagonal.
pub fn random_sparse_spd(rng: &mut StreamRng, n: usize, fill: f64) -> SparseSpd {
    let mut m = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < fill {
                let v = rng.random_range(-1.0..1.0);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[i * n + j].abs()).sum();
        m[i * n + i] = off + rng.random_range(0.5..1.5);
    }
    let dense = SymmetricDense::from_row_major(n, m).unwrap();
    let pattern = Arc::new(SupportPattern::from_dense_support(&dense, 0.0));
    SparseSpd::new(gmrf_core::PatternMatrix::restrict(&dense, pattern).unwrap()).unwrap()
}

/// `B Bᵀ / n + c I` with Gaussian-ish `B`: dense, well conditioned SPD.
pub fn random_dense_spd(rng: &mut StreamRng, n: usize) -> SymmetricDense {
    let b: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymmetricDense::from_fn(n, |i, j| {
        let g: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>() / n as f64;
        g + if i == j { 0.5 } else { 0.0 }
    })
}

pub fn random_symmetric(rng: &mut StreamRng, n: usize) -> SymmetricDense {
    let v: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymmetricDense::from_fn(n, |i, j| 0.5 * (v[i * n + j] + v[j * n + i]))
}

pub fn to_rows(m: &SymmetricDense) -> Vec<Vec<f64>> {
    (0..m.dim()).map(|i| m.row(i).to_vec()).collect()
}

/// Textbook Cholesky; `None` when a pivot is not positive.
pub fn naive_cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if !(d > 0.0) {
            return None;
        }
        l[j][j] = d.sqrt();
        for i in (j + 1)..n {
            l[i][j] = (a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    Some(l)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn naive_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `−log det Q + tr(S Q)`, or `+∞` when `Q` is not positive definite.
pub fn naive_objective(q: &[Vec<f64>], s: &[Vec<f64>]) -> f64 {
    match naive_cholesky(q) {
        None => f64::INFINITY,
        Some(l) => {
            let logdet: f64 = (0..q.len()).map(|i| 2.0 * l[i][i].ln()).sum();
            let tr: f64 = (0..q.len())
                .flat_map(|i| (0..q.len()).map(move |j| (i, j)))
                .map(|(i, j)| s[i][j] * q[j][i])
                .sum();
            tr - logdet
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Entropies and mutual information straight from joint frequencies.
pub fn brute_force_metrics(a: &[usize], b: &[usize]) -> (f64, f64) {
    let n = a.len() as f64;
    let mut pa: HashMap<usize, f64> = HashMap::new();
    let mut pb: HashMap<usize, f64> = HashMap::new();
    let mut pab: HashMap<(usize, usize), f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *pa.entry(x).or_default() += 1.0;
        *pb.entry(y).or_default() += 1.0;
        *pab.entry((x, y)).or_default() += 1.0;
    }
    for m in [&mut pa, &mut pb] {
        m.values_mut().for_each(|c| *c /= n);
    }
    pab.values_mut().for_each(|c| *c /= n);
    let h = |m: &HashMap<usize, f64>| -> f64 { m.values().map(|p| -p * p.ln()).sum() };
    let (ha, hb) = (h(&pa), h(&pb));
    let mi: f64 = pab.iter().map(|(&(x, y), &p)| p * (p / (pa[&x] * pb[&y])).ln()).sum();
    let nmi = match (pa.len() == 1, pb.len() == 1) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => mi / (0.5 * (ha + hb)),
    };
    (nmi, ha + hb - 2.0 * mi)
}

pub fn random_labels(rng: &mut StreamRng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// Nelder-Mead simplex minimizer; returns the best point and value.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=d)
        .map(|k| {
            let mut x = x0.to_vec();
            if k > 0 {
                x[k - 1] += step;
            }
            let v = f(&x);
            (x, v)
        })
        .collect();
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let centroid: Vec<f64> = (0..d)
            .map(|i| simplex[..d].iter().map(|p| p.0[i]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|i| centroid[i] + t * (simplex[d].0[i] - centroid[i])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let xc = if fr < simplex[d].1 { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = (0..d).map(|i| best[i] + 0.5 * (p.0[i] - best[i])).collect();
                    p.1 = f(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Covariance of `Q`'s inverse as nested rows.
pub fn covariance_rows(q: &SparseSpd) -> Vec<Vec<f64>> {
    naive_inverse(&to_rows(&q.to_dense()))
}
