//! Weighted, optionally labelled point clouds and their linear analysis.

mod dsv;
mod pca;

pub use dsv::{load_dsv, parse_dsv, write_dsv, DsvOptions, LabelColumn};
pub use pca::{explained_variance_fraction, pca, project, reconstruct, PcaModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N points in R^m with non-negative weights and optional categorical labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetDoc", into = "DatasetDoc")]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
    feature_names: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetDoc {
    points: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<DatasetDoc> for Dataset {
    type Error = Error;

    fn try_from(doc: DatasetDoc) -> Result<Self> {
        let mut d = Dataset::new(doc.points)?;
        if let Some(w) = doc.weights {
            d = d.with_weights(w)?;
        }
        if let Some(l) = doc.labels {
            d = d.with_labels(l)?;
        }
        Ok(d)
    }
}

impl From<Dataset> for DatasetDoc {
    fn from(d: Dataset) -> Self {
        DatasetDoc {
            points: d.points,
            weights: Some(d.weights),
            labels: d.labels,
        }
    }
}

impl Dataset {
    /// Builds a dataset with unit weights. Rows must be non-empty, equally
    /// long and finite.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("dataset has no points".into()));
        }
        let m = points[0].len();
        if m == 0 {
            return Err(Error::InvalidInput("dataset has zero features".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has {} coordinates, expected {m}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("point {i}")));
            }
        }
        let n = points.len();
        Ok(Dataset {
            points,
            weights: vec![1.0; n],
            labels: None,
            feature_names: None,
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} points",
                weights.len(),
                self.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(
                "weights must be finite and non-negative".into(),
            ));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidInput("total weight must be positive".into()));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} features",
                names.len(),
                self.dim()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weights rescaled to sum to one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let w = self.total_weight();
        self.weights.iter().map(|x| x / w).collect()
    }

    pub fn weighted_mean(&self) -> Vec<f64> {
        let w = self.normalized_weights();
        let mut mean = vec![0.0; self.dim()];
        for (p, wi) in self.points.iter().zip(&w) {
            crate::linalg::add_scaled(&mut mean, p, *wi);
        }
        mean
    }

    /// Weighted mean squared distance of the points to their weighted mean.
    pub fn total_variance(&self) -> f64 {
        let mean = self.weighted_mean();
        let w = self.normalized_weights();
        self.points
            .iter()
            .zip(&w)
            .map(|(p, wi)| wi * crate::linalg::sq_dist(p, &mean))
            .sum()
    }

    /// Per-feature z-scoring (weighted). Features with zero spread are
    /// only centred.
    pub fn standardized(&self) -> Dataset {
        let mean = self.weighted_mean();
        let w = self.normalized_weights();
        let m = self.dim();
        let mut var = vec![0.0; m];
        for (p, wi) in self.points.iter().zip(&w) {
            for j in 0..m {
                let d = p[j] - mean[j];
                var[j] += wi * d * d;
            }
        }
        let sd: Vec<f64> = var
            .iter()
            .map(|v| if *v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        let points = self
            .points
            .iter()
            .map(|p| (0..m).map(|j| (p[j] - mean[j]) / sd[j]).collect())
            .collect();
        Dataset {
            points,
            weights: self.weights.clone(),
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Translates every point by `t`.
    pub fn translated(&self, t: &[f64]) -> Dataset {
        let mut d = self.clone();
        for p in &mut d.points {
            for (x, s) in p.iter_mut().zip(t) {
                *x += s;
            }
        }
        d
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Sorted, de-duplicated label names.
    pub fn label_set(&self) -> Vec<String> {
        let mut set: Vec<String> = self
            .labels
            .as_ref()
            .map(|l| l.to_vec())
            .unwrap_or_default();
        set.sort();
        set.dedup();
        set
    }
}
