//! Reference implementations and numeric helpers shared by the test
//! targets.

#![allow(dead_code)]

use sleeptopo_core::rng;
use sleeptopo_core::tda::DistanceMatrix;
use sleeptopo_core::FeatureMatrix;

struct Simplex {
    verts: Vec<usize>,
    diam: f64,
}

/// Every simplex of dimension <= 2 with diameter <= eps, reduced with the
/// textbook column algorithm. Returns (dim, birth, death) with death =
/// infinity for unpaired classes, zero-persistence pairs removed.
pub fn oracle(d: &DistanceMatrix, eps: f64) -> Vec<(usize, f64, f64)> {
    let n = d.len();
    let mut s: Vec<Simplex> = Vec::new();
    for i in 0..n {
        s.push(Simplex {
            verts: vec![i],
            diam: 0.0,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            if d.get(i, j) <= eps {
                s.push(Simplex {
                    verts: vec![i, j],
                    diam: d.get(i, j),
                });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let diam = d.get(i, j).max(d.get(i, k)).max(d.get(j, k));
                if diam <= eps {
                    s.push(Simplex {
                        verts: vec![i, j, k],
                        diam,
                    });
                }
            }
        }
    }
    s.sort_by(|a, b| {
        a.diam
            .total_cmp(&b.diam)
            .then(a.verts.len().cmp(&b.verts.len()))
            .then(a.verts.cmp(&b.verts))
    });
    let pos = |v: &[usize]| s.iter().position(|x| x.verts == v).unwrap();
    let mut cols: Vec<Vec<usize>> = s
        .iter()
        .map(|x| {
            if x.verts.len() == 1 {
                return Vec::new();
            }
            let mut c: Vec<usize> = (0..x.verts.len())
                .map(|skip| {
                    let face: Vec<usize> = x
                        .verts
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, v)| *v)
                        .collect();
                    pos(&face)
                })
                .collect();
            c.sort();
            c
        })
        .collect();
    let mut low_owner: Vec<Option<usize>> = vec![None; s.len()];
    let mut paired = vec![false; s.len()];
    let mut out = Vec::new();
    for j in 0..cols.len() {
        while let Some(&low) = cols[j].last() {
            match low_owner[low] {
                Some(k) => {
                    let other = cols[k].clone();
                    let mut merged: Vec<usize> = Vec::new();
                    let (mut a, mut b) = (0, 0);
                    let cur = &cols[j];
                    while a < cur.len() || b < other.len() {
                        if b == other.len() || (a < cur.len() && cur[a] < other[b]) {
                            merged.push(cur[a]);
                            a += 1;
                        } else if a == cur.len() || other[b] < cur[a] {
                            merged.push(other[b]);
                            b += 1;
                        } else {
                            a += 1;
                            b += 1;
                        }
                    }
                    cols[j] = merged;
                }
                None => break,
            }
        }
        if let Some(&low) = cols[j].last() {
            low_owner[low] = Some(j);
            paired[low] = true;
            paired[j] = true;
            let birth = s[low].diam;
            let death = s[j].diam;
            if death > birth {
                out.push((s[low].verts.len() - 1, birth, death));
            }
        }
    }
    for (i, x) in s.iter().enumerate() {
        if !paired[i] && x.verts.len() <= 2 {
            out.push((x.verts.len() - 1, x.diam, f64::INFINITY));
        }
    }
    out
}

pub fn prim_mst(d: &DistanceMatrix) -> Vec<f64> {
    let n = d.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut weights = Vec::new();
    for step in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            weights.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] && d.get(u, v) < best[v] {
                best[v] = d.get(u, v);
            }
        }
    }
    weights.sort_by(f64::total_cmp);
    weights
}

pub fn random(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut r = rng::seeded(seed);
    (0..n).map(|_| scale * rng::normal(&mut r)).collect()
}

pub fn central_difference(f: impl Fn(&[f64]) -> f64, y: &[f64], h: f64) -> Vec<f64> {
    let mut y = y.to_vec();
    (0..y.len())
        .map(|k| {
            let orig = y[k];
            y[k] = orig + h;
            let up = f(&y);
            y[k] = orig - h;
            let down = f(&y);
            y[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / norm
}

pub fn loo_one_nn(coords: &[f64], c: usize, classes: &[usize]) -> f64 {
    let n = classes.len();
    let hits = (0..n)
        .filter(|&i| {
            let nearest = (0..n)
                .filter(|&j| j != i)
                .min_by(|&a, &b| {
                    let da: f64 = (0..c)
                        .map(|k| (coords[i * c + k] - coords[a * c + k]).powi(2))
                        .sum();
                    let db: f64 = (0..c)
                        .map(|k| (coords[i * c + k] - coords[b * c + k]).powi(2))
                        .sum();
                    da.total_cmp(&db)
                })
                .unwrap();
            classes[nearest] == classes[i]
        })
        .count();
    hits as f64 / n as f64
}

pub fn embedded(x: &FeatureMatrix, coords: Vec<f64>, c: usize) -> FeatureMatrix {
    FeatureMatrix::new(
        (0..c).map(|k| format!("c{k}")).collect(),
        coords,
        x.labels.clone(),
        x.subjects.clone(),
        x.epochs.clone(),
    )
    .unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
