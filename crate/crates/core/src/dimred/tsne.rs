//! Exact t-SNE: Gaussian input affinities calibrated to a perplexity,
//! Student-t output affinities, gradient descent on the KL divergence.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneConfig {
    pub n_components: usize,
    pub perplexity: f64,
    pub n_iter: usize,
    pub learning_rate: f64,
    /// Momentum 0.5 for the first 250 iterations, then 0.8. Off means plain
    /// gradient descent.
    pub momentum: bool,
    /// Multiply P by this factor for the first 250 iterations (1 = off).
    pub early_exaggeration: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            n_components: 2,
            perplexity: 30.0,
            n_iter: 1000,
            learning_rate: 200.0,
            momentum: true,
            early_exaggeration: 1.0,
            seed: 0,
        }
    }
}

const SWITCH_ITER: usize = 250;
const ENTROPY_TOL: f64 = 1e-5;
const MAX_SEARCH: usize = 64;

/// Symmetric joint input affinities plus the rows whose bandwidth search
/// did not reach the target entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities {
    pub n: usize,
    pub p: Vec<f64>,
    /// Gaussian precision `1 / (2 sigma^2)` chosen for each row.
    pub beta: Vec<f64>,
    pub unconverged: Vec<usize>,
}

pub(crate) fn squared_distances(x: &[f64], n: usize, dim: usize) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let v = math::sq_dist(&x[i * dim..(i + 1) * dim], &x[j * dim..(j + 1) * dim]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Conditional row `p_{.|i}` for precision `beta` and its entropy in bits.
fn conditional_row(d: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let n = out.len();
    // shift by the nearest distance so the exponentials cannot all underflow
    let dmin = (0..n)
        .filter(|&j| j != i)
        .map(|j| d[j])
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for j in 0..n {
        out[j] = if j == i {
            0.0
        } else {
            math::exp(-beta * (d[j] - dmin))
        };
        sum += out[j];
    }
    let mut h = 0.0;
    for v in out.iter_mut() {
        *v /= sum;
        if *v > 0.0 {
            h -= *v * math::log2(*v);
        }
    }
    h
}

/// Input affinities with per-row bandwidths searched so each conditional
/// distribution has entropy `log2(perplexity)` bits, symmetrized as
/// `(p_{j|i} + p_{i|j}) / (2N)`.
pub fn tsne_affinities(x: &[f64], n: usize, dim: usize, perplexity: f64) -> Result<Affinities> {
    if n < 2 {
        return Err(Error::TooShort {
            op: "tsne_affinities",
            needed: 2,
            got: n,
        });
    }
    if !(perplexity > 0.0) || perplexity >= n as f64 {
        return Err(Error::param(
            "perplexity",
            alloc::format!("must be in (0, {n})"),
        ));
    }
    let d = squared_distances(x, n, dim);
    let target = math::log2(perplexity);
    let mut cond = vec![0.0; n * n];
    let mut betas = vec![1.0; n];
    let mut unconverged = Vec::new();
    for i in 0..n {
        let row = &d[i * n..(i + 1) * n];
        let out = &mut cond[i * n..(i + 1) * n];
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut beta = 1.0;
        let mut ok = false;
        for _ in 0..MAX_SEARCH {
            let h = conditional_row(row, i, beta, out);
            if (h - target).abs() <= ENTROPY_TOL {
                ok = true;
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_finite() {
                    (beta + hi) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        if !ok {
            let edge = if hi.is_finite() { hi } else { lo };
            beta = edge;
            conditional_row(row, i, beta, out);
            log::warn!("t-SNE bandwidth search for row {i} stopped at beta = {beta:e}");
            unconverged.push(i);
        }
        betas[i] = beta;
    }
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64);
        }
    }
    Ok(Affinities {
        n,
        p,
        beta: betas,
        unconverged,
    })
}

/// Student-t kernel values `(1 + |yi - yj|^2)^-1` and their off-diagonal sum.
fn student_kernel(y: &[f64], n: usize, c: usize) -> (Vec<f64>, f64) {
    let mut k = vec![0.0; n * n];
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..i {
            let v = 1.0 / (1.0 + math::sq_dist(&y[i * c..(i + 1) * c], &y[j * c..(j + 1) * c]));
            k[i * n + j] = v;
            k[j * n + i] = v;
            z += 2.0 * v;
        }
    }
    (k, z)
}

/// Output affinities `q_ij`.
pub fn output_affinities(y: &[f64], n: usize, c: usize) -> Vec<f64> {
    let (k, z) = student_kernel(y, n, c);
    k.iter().map(|v| v / z).collect()
}

/// `sum p_ij ln(p_ij / q_ij)` over off-diagonal pairs with `p_ij > 0`.
pub fn kl_divergence(p: &[f64], y: &[f64], n: usize, c: usize) -> f64 {
    let (k, z) = student_kernel(y, n, c);
    kl_from_kernel(p, &k, z, n)
}

fn kl_from_kernel(p: &[f64], k: &[f64], z: f64, n: usize) -> f64 {
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[i * n + j];
            if i != j && pij > 0.0 {
                kl += pij * math::ln(pij * z / k[i * n + j]);
            }
        }
    }
    kl
}

fn gradient_from_kernel(p: &[f64], k: &[f64], z: f64, y: &[f64], n: usize, c: usize) -> Vec<f64> {
    let mut g = vec![0.0; n * c];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let kij = k[i * n + j];
            let coef = 4.0 * (p[i * n + j] - kij / z) * kij;
            for d in 0..c {
                g[i * c + d] += coef * (y[i * c + d] - y[j * c + d]);
            }
        }
    }
    g
}

/// `dKL/dy_i = 4 sum_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1`.
pub fn kl_gradient(p: &[f64], y: &[f64], n: usize, c: usize) -> Vec<f64> {
    let (k, z) = student_kernel(y, n, c);
    gradient_from_kernel(p, &k, z, y, n, c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    /// Row-major `n x n_components`.
    pub coords: Vec<f64>,
    pub initial_kl: f64,
    pub final_kl: f64,
    /// KL before every iteration.
    pub kl_trace: Vec<f64>,
    pub unconverged_rows: Vec<usize>,
}

pub fn tsne(x: &[f64], n: usize, dim: usize, cfg: &TsneConfig) -> Result<TsneResult> {
    if cfg.n_iter == 0 || cfg.n_components == 0 {
        return Err(Error::param(
            "tsne",
            "n_iter and n_components must be at least 1",
        ));
    }
    let aff = tsne_affinities(x, n, dim, cfg.perplexity)?;
    let c = cfg.n_components;
    let mut r = rng::seeded(cfg.seed);
    let mut y: Vec<f64> = (0..n * c).map(|_| 1e-4 * rng::normal(&mut r)).collect();
    let mut velocity = vec![0.0; n * c];
    let initial_kl = kl_divergence(&aff.p, &y, n, c);
    let exaggerated: Option<Vec<f64>> = (cfg.early_exaggeration != 1.0)
        .then(|| aff.p.iter().map(|v| v * cfg.early_exaggeration).collect());
    let mut kl_trace = Vec::with_capacity(cfg.n_iter);

    for it in 0..cfg.n_iter {
        let p = match &exaggerated {
            Some(pe) if it < SWITCH_ITER => pe,
            _ => &aff.p,
        };
        let (k, z) = student_kernel(&y, n, c);
        kl_trace.push(kl_from_kernel(&aff.p, &k, z, n));
        let g = gradient_from_kernel(p, &k, z, &y, n, c);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(
                "tsne",
                alloc::format!("non-finite gradient at iteration {it}"),
            ));
        }
        let mom = match (cfg.momentum, it < SWITCH_ITER) {
            (false, _) => 0.0,
            (true, true) => 0.5,
            (true, false) => 0.8,
        };
        for (i, gi) in g.iter().enumerate() {
            velocity[i] = mom * velocity[i] - cfg.learning_rate * gi;
            y[i] += velocity[i];
        }
    }
    let final_kl = kl_divergence(&aff.p, &y, n, c);
    if !final_kl.is_finite() {
        return Err(Error::numerical("tsne", "non-finite loss"));
    }
    Ok(TsneResult {
        coords: y,
        initial_kl,
        final_kl,
        kl_trace,
        unconverged_rows: aff.unconverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_triangle() {
        let h = math::sqrt(3.0) / 2.0;
        let x = [0.0, 0.0, 1.0, 0.0, 0.5, h];
        let a = tsne_affinities(&x, 3, 2, 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.0 } else { 1.0 / 6.0 };
                assert!((a.p[i * 3 + j] - expected).abs() < 1e-12);
            }
        }
        assert!((a.beta[0] - a.beta[1]).abs() < 1e-12 && (a.beta[1] - a.beta[2]).abs() < 1e-12);
    }

    #[test]
    fn affinities_sum_to_one_and_are_symmetric() {
        let mut r = rng::seeded(2);
        let n = 40;
        let x: Vec<f64> = (0..n * 4).map(|_| rng::normal(&mut r)).collect();
        let a = tsne_affinities(&x, n, 4, 10.0).unwrap();
        assert!((a.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..n {
            assert_eq!(a.p[i * n + i], 0.0);
            for j in 0..n {
                assert_eq!(a.p[i * n + j], a.p[j * n + i]);
            }
        }
        assert!(a.unconverged.is_empty());
        let q = output_affinities(&x[..n * 2], n, 2);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_clusters_keep_mass_inside() {
        let mut r = rng::seeded(5);
        let n = 20;
        let x: Vec<f64> = (0..n)
            .flat_map(|i| {
                let off = if i < 10 { 0.0 } else { 50.0 };
                [off + 0.1 * rng::normal(&mut r), 0.1 * rng::normal(&mut r)]
            })
            .collect();
        let a = tsne_affinities(&x, n, 2, 5.0).unwrap();
        let inside: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| (*i < 10) == (*j < 10))
            .map(|(i, j)| a.p[i * n + j])
            .sum();
        assert!(inside >= 0.99, "{inside}");
    }

    #[test]
    fn two_points_converge() {
        let x = [0.0, 0.0, 3.0, 4.0];
        let cfg = TsneConfig {
            perplexity: 1.0,
            n_iter: 500,
            ..TsneConfig::default()
        };
        let res = tsne(&x, 2, 2, &cfg).unwrap();
        assert!(res.final_kl < 1e-3, "{}", res.final_kl);
    }

    #[test]
    fn bad_perplexity() {
        assert!(tsne_affinities(&[0.0, 1.0, 2.0], 3, 1, 3.0).is_err());
    }
}
