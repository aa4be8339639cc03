//! PCA, t-SNE and UMAP from a feature matrix to a low-dimensional
//! embedding.

pub mod linalg;
pub mod pca;
pub mod tsne;
pub mod umap;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
pub use pca::Pca;
pub use tsne::{tsne, tsne_affinities, TsneConfig, TsneResult};
pub use umap::{fit_ab, umap, umap_graph, UmapConfig, UmapResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pca,
    Tsne,
    Umap,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "PCA",
            Method::Tsne => "t-SNE",
            Method::Umap => "UMAP",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().as_str() {
            "pca" => Some(Method::Pca),
            "tsne" | "t-sne" => Some(Method::Tsne),
            "umap" => Some(Method::Umap),
            _ => None,
        }
    }
}

/// Reducer choice with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reducer {
    Pca { n_components: usize },
    Tsne(TsneConfig),
    Umap(UmapConfig),
}

impl Reducer {
    pub fn method(&self) -> Method {
        match self {
            Reducer::Pca { .. } => Method::Pca,
            Reducer::Tsne(_) => Method::Tsne,
            Reducer::Umap(_) => Method::Umap,
        }
    }

    pub fn n_components(&self) -> usize {
        match self {
            Reducer::Pca { n_components } => *n_components,
            Reducer::Tsne(c) => c.n_components,
            Reducer::Umap(c) => c.n_components,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowDimEmbedding {
    /// Row-major `n x n_components`.
    pub coords: Vec<f64>,
    pub n_components: usize,
    pub method: Method,
    pub reducer: Reducer,
    /// Method-specific scalar diagnostics, such as explained variance or
    /// initial and final KL.
    pub diagnostics: Vec<(&'static str, f64)>,
}

impl LowDimEmbedding {
    pub fn n_rows(&self) -> usize {
        self.coords.len() / self.n_components.max(1)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n_components..(i + 1) * self.n_components]
    }
}

/// Embed every row of `x` with the chosen reducer.
pub fn reduce(x: &FeatureMatrix, reducer: &Reducer) -> Result<LowDimEmbedding> {
    let (n, p) = (x.n_rows(), x.n_cols());
    let (coords, diagnostics) = match reducer {
        Reducer::Pca { n_components } => {
            let pca = Pca::fit(&x.data, p, *n_components)?;
            let ratio = pca.explained_variance_ratio();
            let mut diag = Vec::new();
            for (k, r) in ratio.iter().enumerate() {
                diag.push((
                    [
                        "explained_ratio_1",
                        "explained_ratio_2",
                        "explained_ratio_3",
                    ]
                    .get(k)
                    .copied()
                    .unwrap_or("explained_ratio_k"),
                    *r,
                ));
            }
            (pca.transform(&x.data), diag)
        }
        Reducer::Tsne(cfg) => {
            let res = tsne(&x.data, n, p, cfg)?;
            let diag = alloc::vec![
                ("initial_kl", res.initial_kl),
                ("final_kl", res.final_kl),
                ("unconverged_rows", res.unconverged_rows.len() as f64),
            ];
            (res.coords, diag)
        }
        Reducer::Umap(cfg) => {
            let res = umap(&x.data, n, p, cfg)?;
            let diag = alloc::vec![
                ("a", res.a),
                ("b", res.b),
                ("final_loss", res.loss_trace.last().copied().unwrap_or(0.0)),
                ("degenerate_rows", res.degenerate_rows.len() as f64),
            ];
            (res.coords, diag)
        }
    };
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical(
            reducer.method().name(),
            "non-finite coordinates",
        ));
    }
    Ok(LowDimEmbedding {
        coords,
        n_components: reducer.n_components(),
        method: reducer.method(),
        reducer: *reducer,
        diagnostics,
    })
}
