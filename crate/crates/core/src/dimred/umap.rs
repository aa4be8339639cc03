//! UMAP: Gaussian k-nearest-neighbour graph, a smooth low-dimensional
//! kernel fitted to `min_dist` / `spread`, and full-batch descent on the
//! fuzzy cross-entropy with sampled non-edges for the repulsive part.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::pca::Pca;
use super::tsne::squared_distances;
use crate::error::{Error, Result};
use crate::math;
use crate::rng;
use crate::select::knn::nearest;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmapConfig {
    pub n_components: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_iter: usize,
    pub learning_rate: f64,
    /// Non-edges drawn per point per epoch.
    pub negative_samples: usize,
    /// Fuzzy union `w + w^T - w * w^T` instead of the directed graph.
    pub symmetrize: bool,
    pub seed: u64,
}

impl Default for UmapConfig {
    fn default() -> Self {
        UmapConfig {
            n_components: 2,
            n_neighbors: 15,
            min_dist: 0.1,
            spread: 1.0,
            n_iter: 200,
            learning_rate: 1.0,
            negative_samples: 5,
            symmetrize: false,
            seed: 0,
        }
    }
}

const CALIBRATION_TOL: f64 = 1e-5;
const MAX_SEARCH: usize = 200;
const W_CLAMP: f64 = 1e-7;
const GRAD_CLIP: f64 = 4.0;

/// Weighted edges `(from, to, w)`. Directed graphs list each neighbour
/// edge; symmetrized graphs list each unordered pair once with `from < to`.
#[derive(Debug, Clone, PartialEq)]
pub struct UmapGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub sigma: Vec<f64>,
    /// Rows whose neighbour distances were (mostly) zero.
    pub degenerate_rows: Vec<usize>,
}

impl UmapGraph {
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n * n];
        for &(i, j, v) in &self.edges {
            w[i * n + j] = v;
        }
        w
    }
}

fn neighbour_sum(d2: &[f64], sigma: f64) -> f64 {
    d2.iter()
        .map(|d| math::exp(-d / (2.0 * sigma * sigma)))
        .sum()
}

/// Brute-force neighbourhoods with per-point `sigma_i` chosen so that
/// `sum_j exp(-d_ij^2 / (2 sigma_i^2)) = log2(n_neighbors)`.
pub fn umap_graph(
    x: &[f64],
    n: usize,
    dim: usize,
    n_neighbors: usize,
    symmetrize: bool,
) -> Result<UmapGraph> {
    if n_neighbors < 2 || n_neighbors >= n {
        return Err(Error::param(
            "n_neighbors",
            alloc::format!("must be in 2..{n}"),
        ));
    }
    let d = squared_distances(x, n, dim);
    let target = math::log2(n_neighbors as f64);
    let mut directed = Vec::with_capacity(n * n_neighbors);
    let mut sigmas = vec![1.0; n];
    let mut degenerate = Vec::new();
    for i in 0..n {
        let other = |t: usize| if t < i { t } else { t + 1 };
        let nn = nearest(n_neighbors, n - 1, |t| d[i * n + other(t)]);
        let d2: Vec<f64> = nn.iter().map(|p| p.0).collect();
        let zeros = d2.iter().filter(|v| **v == 0.0).count();
        let sigma = if zeros == d2.len() {
            degenerate.push(i);
            1.0
        } else if zeros as f64 >= target {
            // duplicates alone already exceed the target mass
            degenerate.push(i);
            let smallest = d2
                .iter()
                .copied()
                .filter(|v| *v > 0.0)
                .fold(f64::INFINITY, f64::min);
            math::sqrt(smallest) * 1e-3
        } else {
            let mut lo = 0.0;
            let mut hi =
                math::sqrt(d2.iter().sum::<f64>() / d2.len() as f64).max(f64::MIN_POSITIVE);
            while neighbour_sum(&d2, hi) < target {
                hi *= 2.0;
            }
            let mut s = hi;
            for _ in 0..MAX_SEARCH {
                s = 0.5 * (lo + hi);
                let f = neighbour_sum(&d2, s);
                if (f - target).abs() <= CALIBRATION_TOL {
                    break;
                }
                if f < target {
                    lo = s;
                } else {
                    hi = s;
                }
            }
            s
        };
        sigmas[i] = sigma;
        for &(dd, t) in &nn {
            let w = if zeros == d2.len() {
                1.0
            } else {
                math::exp(-dd / (2.0 * sigma * sigma))
            };
            directed.push((i, other(t), w));
        }
    }
    let edges = if symmetrize {
        let mut m: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for &(i, j, w) in &directed {
            let e = m.entry((i.min(j), i.max(j))).or_insert((0.0, 0.0));
            if i < j {
                e.0 = w;
            } else {
                e.1 = w;
            }
        }
        m.into_iter()
            .map(|((i, j), (a, b))| (i, j, a + b - a * b))
            .collect()
    } else {
        directed
    };
    Ok(UmapGraph {
        n,
        edges,
        sigma: sigmas,
        degenerate_rows: degenerate,
    })
}

/// Target low-dimensional membership curve.
pub fn target_curve(d: f64, min_dist: f64, spread: f64) -> f64 {
    if d <= min_dist {
        1.0
    } else {
        math::exp(-(d - min_dist) / spread)
    }
}

pub fn kernel(d: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * math::powf(d, 2.0 * b))
}

/// Least-squares `(a, b)` for `1 / (1 + a d^{2b})` against the target curve
/// on 300 points of `[0, 3 spread]` (Levenberg-Marquardt).
pub fn fit_ab(min_dist: f64, spread: f64) -> Result<(f64, f64)> {
    if !(spread > 0.0) || !(min_dist >= 0.0) || min_dist > spread {
        return Err(Error::param(
            "min_dist/spread",
            "need 0 <= min_dist <= spread and spread > 0",
        ));
    }
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| target_curve(x, min_dist, spread))
        .collect();
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = kernel(x, a, b) - y;
                r * r
            })
            .sum()
    };
    let (mut a, mut b) = (1.0, 1.0);
    let mut cost = sse(a, b);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..1000 {
        let (mut jtj, mut jtr) = ([0.0f64; 3], [0.0f64; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            let f = kernel(x, a, b);
            let r = f - y;
            let (da, db) = if x > 0.0 {
                let x2b = math::powf(x, 2.0 * b);
                (-x2b * f * f, -a * x2b * 2.0 * math::ln(x) * f * f)
            } else {
                (0.0, 0.0)
            };
            jtj[0] += da * da;
            jtj[1] += da * db;
            jtj[2] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        let m00 = jtj[0] * (1.0 + lambda);
        let m11 = jtj[2] * (1.0 + lambda);
        let det = m00 * m11 - jtj[1] * jtj[1];
        if det == 0.0 {
            break;
        }
        let step_a = -(m11 * jtr[0] - jtj[1] * jtr[1]) / det;
        let step_b = -(m00 * jtr[1] - jtj[1] * jtr[0]) / det;
        let (na, nb) = (a + step_a, b + step_b);
        let new_cost = if na > 0.0 && nb > 0.0 {
            sse(na, nb)
        } else {
            f64::INFINITY
        };
        if new_cost < cost {
            let done =
                cost - new_cost <= 1e-14 * cost.max(1e-300) && step_a.abs() + step_b.abs() < 1e-10;
            a = na;
            b = nb;
            cost = new_cost;
            lambda = (lambda / 10.0).max(1e-12);
            if done {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }
    let rmse = math::sqrt(cost / xs.len() as f64);
    if !converged || !rmse.is_finite() {
        return Err(Error::numerical(
            "fit_ab",
            alloc::format!("no convergence, rmse {rmse:e}"),
        ));
    }
    Ok((a, b))
}

fn clamp_w(w: f64) -> f64 {
    w.clamp(W_CLAMP, 1.0 - W_CLAMP)
}

/// `sum w ln(w / w') + (1 - w) ln((1 - w) / (1 - w'))` over `pairs`, with
/// `w'` clamped away from 0 and 1.
pub fn umap_loss(y: &[f64], c: usize, pairs: &[(usize, usize, f64)], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for &(i, j, w) in pairs {
        let d = math::sqrt(math::sq_dist(
            &y[i * c..(i + 1) * c],
            &y[j * c..(j + 1) * c],
        ));
        let wp = clamp_w(kernel(d, a, b));
        if w > 0.0 {
            total += w * math::ln(w / wp);
        }
        if w < 1.0 {
            total += (1.0 - w) * math::ln((1.0 - w) / (1.0 - wp));
        }
    }
    total
}

/// Per-pair derivative factor: the gradient with respect to `y_i` is this
/// times `(y_i - y_j)`, and the negative of that for `y_j`.
fn pair_factor(dist2: f64, w: f64, a: f64, b: f64) -> f64 {
    if dist2 <= 0.0 {
        return 0.0;
    }
    let wp = 1.0 / (1.0 + a * math::powf(dist2, b));
    let attract = 2.0 * a * b * math::powf(dist2, b - 1.0) * w * wp;
    let repel = 2.0 * b * (1.0 - w) * wp / dist2;
    attract - repel
}

/// Exact gradient of [`umap_loss`] away from the clamp region.
pub fn umap_gradient(
    y: &[f64],
    c: usize,
    pairs: &[(usize, usize, f64)],
    a: f64,
    b: f64,
) -> Vec<f64> {
    let mut g = vec![0.0; y.len()];
    for &(i, j, w) in pairs {
        let d2 = math::sq_dist(&y[i * c..(i + 1) * c], &y[j * c..(j + 1) * c]);
        let f = pair_factor(d2, w, a, b);
        for k in 0..c {
            let v = f * (y[i * c + k] - y[j * c + k]);
            g[i * c + k] += v;
            g[j * c + k] -= v;
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct UmapResult {
    pub coords: Vec<f64>,
    pub a: f64,
    pub b: f64,
    /// Loss over the edges and that epoch's sampled non-edges.
    pub loss_trace: Vec<f64>,
    pub degenerate_rows: Vec<usize>,
}

/// Top-`c` principal projection with every coordinate scaled to unit variance.
fn pca_init(x: &[f64], dim: usize, c: usize) -> Result<Vec<f64>> {
    let pca = Pca::fit(x, dim, c)?;
    let mut y = pca.transform(x);
    let n = y.len() / c;
    for k in 0..c {
        let col: Vec<f64> = (0..n).map(|i| y[i * c + k]).collect();
        let sd = math::pop_std(&col);
        if sd > 0.0 {
            for i in 0..n {
                y[i * c + k] /= sd;
            }
        }
    }
    Ok(y)
}

pub fn umap(x: &[f64], n: usize, dim: usize, cfg: &UmapConfig) -> Result<UmapResult> {
    if cfg.n_iter == 0 || cfg.n_components == 0 {
        return Err(Error::param(
            "umap",
            "n_iter and n_components must be at least 1",
        ));
    }
    if cfg.n_components > dim {
        return Err(Error::param(
            "n_components",
            "cannot exceed the input dimension",
        ));
    }
    let graph = umap_graph(x, n, dim, cfg.n_neighbors, cfg.symmetrize)?;
    let (a, b) = fit_ab(cfg.min_dist, cfg.spread)?;
    let c = cfg.n_components;
    let mut y = pca_init(x, dim, c)?;
    let mut r = rng::seeded(cfg.seed);
    let mut pairs = graph.edges.clone();
    let n_edges = pairs.len();
    let mut loss_trace = Vec::with_capacity(cfg.n_iter);
    let mut g = vec![0.0; n * c];

    for epoch in 0..cfg.n_iter {
        pairs.truncate(n_edges);
        for i in 0..n {
            for _ in 0..cfg.negative_samples {
                let mut j = rng::index(&mut r, n - 1);
                if j >= i {
                    j += 1;
                }
                pairs.push((i, j, 0.0));
            }
        }
        let loss = umap_loss(&y, c, &pairs, a, b);
        if !loss.is_finite() {
            return Err(Error::numerical(
                "umap",
                alloc::format!("non-finite loss at epoch {epoch}"),
            ));
        }
        loss_trace.push(loss);
        g.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, w) in &pairs {
            let d2 = math::sq_dist(&y[i * c..(i + 1) * c], &y[j * c..(j + 1) * c]);
            let f = pair_factor(d2, w, a, b);
            for k in 0..c {
                let v = (f * (y[i * c + k] - y[j * c + k])).clamp(-GRAD_CLIP, GRAD_CLIP);
                g[i * c + k] += v;
                g[j * c + k] -= v;
            }
        }
        let lr = cfg.learning_rate * (1.0 - epoch as f64 / cfg.n_iter as f64);
        for (yk, gk) in y.iter_mut().zip(&g) {
            *yk -= lr * gk;
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("umap", "non-finite coordinates"));
    }
    Ok(UmapResult {
        coords: y,
        a,
        b,
        loss_trace,
        degenerate_rows: graph.degenerate_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab_rmse(a: f64, b: f64) -> f64 {
        math::sqrt(
            (0..300)
                .map(|i| 3.0 * i as f64 / 299.0)
                .map(|d| (kernel(d, a, b) - target_curve(d, 0.1, 1.0)).powi(2))
                .sum::<f64>()
                / 300.0,
        )
    }

    #[test]
    fn ab_for_default_parameters() {
        let (a, b) = fit_ab(0.1, 1.0).unwrap();
        // reference least-squares optimum
        assert!(
            (a - 1.576943).abs() < 1e-4 && (b - 0.895061).abs() < 1e-4,
            "{a} {b}"
        );
        let rmse = ab_rmse(a, b);
        assert!((rmse - 0.016190).abs() < 1e-5, "{rmse}");
        for (da, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(ab_rmse(a + da, b + db) > rmse);
        }
        let mut prev = 1.0;
        for i in 1..=300 {
            let v = kernel(3.0 * i as f64 / 300.0, a, b);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    #[ignore = "unattainable: the best fit of this curve family has RMSE 0.0162"]
    fn ab_fit_residual_below_one_percent() {
        let (a, b) = fit_ab(0.1, 1.0).unwrap();
        assert!(ab_rmse(a, b) < 1e-2);
    }

    #[test]
    fn ab_with_zero_min_dist() {
        let (a, b) = fit_ab(0.0, 1.0).unwrap();
        assert!((kernel(0.0, a, b) - 1.0).abs() < 1e-3);
        assert!(fit_ab(2.0, 1.0).is_err());
    }

    #[test]
    fn complete_graph_and_calibration() {
        let mut r = rng::seeded(3);
        let n = 12;
        let x: Vec<f64> = (0..n * 3).map(|_| rng::normal(&mut r)).collect();
        let g = umap_graph(&x, n, 3, n - 1, false).unwrap();
        let w = g.to_dense();
        for i in 0..n {
            for j in 0..n {
                assert!(i == j || w[i * n + j] > 0.0);
            }
            let row: f64 = w[i * n..(i + 1) * n].iter().sum();
            assert!((row - math::log2((n - 1) as f64)).abs() < 1e-4, "{row}");
        }
    }

    #[test]
    fn equal_distances_give_equal_weights() {
        // centre plus four points at unit distance
        let x = [0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0];
        let g = umap_graph(&x, 5, 2, 4, false).unwrap();
        let w0: Vec<f64> = g.edges.iter().filter(|e| e.0 == 0).map(|e| e.2).collect();
        assert_eq!(w0.len(), 4);
        assert!(w0.iter().all(|v| (v - w0[0]).abs() < 1e-15));
    }

    #[test]
    fn duplicates_are_flagged() {
        let x = [1.0, 1.0, 1.0, 5.0];
        let g = umap_graph(&x, 4, 1, 2, false).unwrap();
        assert_eq!(g.degenerate_rows, vec![0, 1, 2]);
        assert_eq!(g.sigma[0], 1.0);
        assert!(g.edges.iter().filter(|e| e.0 == 0).all(|e| e.2 == 1.0));
    }

    #[test]
    fn fuzzy_union_is_symmetric() {
        let mut r = rng::seeded(9);
        let n = 15;
        let x: Vec<f64> = (0..n * 2).map(|_| rng::normal(&mut r)).collect();
        let g = umap_graph(&x, n, 2, 4, true).unwrap();
        assert!(g.edges.iter().all(|e| e.0 < e.1 && e.2 > 0.0 && e.2 <= 1.0));
    }
}
