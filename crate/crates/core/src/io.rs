//! File schemas consumed by the `bfp` binary and the C API.
//!
//! All inputs are JSON documents. The space file is
//! `{"left": [...], "right": [...], "overlap": [[i, j], ...], "dist": [[...], ...]}`
//! with the distance table row-major (rows follow the left order, columns
//! the right order). The coefficient file carries the scalar contraction
//! data next to the coefficient tables, which may be given as plain scalars
//! for constant functions. The BVP config mirrors the solver inputs.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::contraction::{
    CoeffTable, CoefficientFamily, ContractionError, ContractionSpec, MappingSpec, Variance,
};
use crate::expr::{parse, ParseError};
use crate::fractional::{FracError, FractionalBvp};
use crate::space::{FiniteBipolarSpace, SpaceError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid json in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error("omega expression: {0}")]
    Omega(#[from] ParseError),
    #[error("variance must be \"covariant\" or \"contravariant\", got {0:?}")]
    BadVariance(String),
    #[error("{side} map label {label:?} is not a {target} point")]
    UnknownMapLabel {
        side: &'static str,
        label: String,
        target: &'static str,
    },
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub left: Vec<String>,
    pub right: Vec<String>,
    #[serde(default)]
    pub overlap: Vec<(usize, usize)>,
    pub dist: Vec<Vec<f64>>,
}

impl SpaceFile {
    pub fn into_space(self) -> Result<FiniteBipolarSpace, IoError> {
        Ok(FiniteBipolarSpace::new(
            self.left,
            self.right,
            self.dist,
            self.overlap,
        )?)
    }

    pub fn from_space(space: &FiniteBipolarSpace) -> Self {
        SpaceFile {
            left: space.left_labels().to_vec(),
            right: space.right_labels().to_vec(),
            overlap: space.overlap_pairs().to_vec(),
            dist: (0..space.n_left())
                .map(|i| (0..space.n_right()).map(|j| space.dist_at(i, j)).collect())
                .collect(),
        }
    }
}

/// Map file: images listed by label in left/right order. Covariant images
/// name points of the same side, contravariant images the opposite side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub variance: String,
    pub left_map: Vec<String>,
    pub right_map: Vec<String>,
}

impl MapFile {
    pub fn into_mapping(self, space: &FiniteBipolarSpace) -> Result<MappingSpec, IoError> {
        let variance = match self.variance.as_str() {
            "covariant" => Variance::Covariant,
            "contravariant" => Variance::Contravariant,
            other => return Err(IoError::BadVariance(other.to_string())),
        };
        let resolve = |labels: &[String],
                       side: &'static str,
                       into_left: bool|
         -> Result<Vec<usize>, IoError> {
            labels
                .iter()
                .map(|label| {
                    let idx = if into_left {
                        space.left_index(label)
                    } else {
                        space.right_index(label)
                    };
                    idx.ok_or_else(|| IoError::UnknownMapLabel {
                        side,
                        label: label.clone(),
                        target: if into_left { "left" } else { "right" },
                    })
                })
                .collect()
        };
        let (left_into_left, right_into_left) = match variance {
            Variance::Covariant => (true, false),
            Variance::Contravariant => (false, true),
        };
        let left_map = resolve(&self.left_map, "left", left_into_left)?;
        let right_map = resolve(&self.right_map, "right", right_into_left)?;
        let map = MappingSpec::new(variance, left_map, right_map);
        map.check_against(space)?;
        Ok(map)
    }

    pub fn from_mapping(space: &FiniteBipolarSpace, map: &MappingSpec) -> Self {
        let (left_target_left, right_target_left) = match map.variance {
            Variance::Covariant => (true, false),
            Variance::Contravariant => (false, true),
        };
        let name = |idx: usize, from_left: bool| -> String {
            if from_left {
                space.left_labels()[idx].clone()
            } else {
                space.right_labels()[idx].clone()
            }
        };
        MapFile {
            variance: match map.variance {
                Variance::Covariant => "covariant".into(),
                Variance::Contravariant => "contravariant".into(),
            },
            left_map: map
                .left_map()
                .iter()
                .map(|&i| name(i, left_target_left))
                .collect(),
            right_map: map
                .right_map()
                .iter()
                .map(|&j| name(j, right_target_left))
                .collect(),
        }
    }
}

/// A coefficient entry: scalar for a constant `q_u`, matrix otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffEntry {
    Scalar(f64),
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffFile {
    pub degree: usize,
    pub pi: f64,
    pub rho_index: usize,
    #[serde(rename = "Q")]
    pub q_lower: f64,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub upper_bounds: Option<Vec<f64>>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub almost_terms: Option<Vec<f64>>,
    pub q: Vec<CoeffEntry>,
}

impl CoeffFile {
    pub fn into_parts(self) -> Result<(CoefficientFamily, ContractionSpec), IoError> {
        let tables = self
            .q
            .into_iter()
            .map(|entry| match entry {
                CoeffEntry::Scalar(c) => CoeffTable::Constant(c),
                CoeffEntry::Table(rows) => CoeffTable::Table(rows),
            })
            .collect();
        let coeffs = CoefficientFamily::new(self.degree, tables)?;
        let spec = ContractionSpec::new(
            self.degree,
            self.pi,
            self.rho_index,
            self.q_lower,
            self.upper_bounds,
            self.almost_terms,
        )?;
        Ok((coeffs, spec))
    }

    pub fn from_parts(coeffs: &CoefficientFamily, spec: &ContractionSpec) -> Self {
        CoeffFile {
            degree: coeffs.degree(),
            pi: spec.pi,
            rho_index: spec.rho_index,
            q_lower: spec.q_lower,
            upper_bounds: spec.upper_bounds.clone(),
            almost_terms: spec.almost_terms.clone(),
            q: (0..=coeffs.degree())
                .map(|u| match coeffs.table(u) {
                    CoeffTable::Constant(c) => CoeffEntry::Scalar(*c),
                    CoeffTable::Table(rows) => CoeffEntry::Table(rows.clone()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BvpConfigFile {
    pub order: f64,
    pub omega: String,
    pub sigma: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_grid_n() -> usize {
    201
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    200
}

impl BvpConfigFile {
    pub fn into_bvp(self) -> Result<FractionalBvp, IoError> {
        let omega = parse(&self.omega)?;
        Ok(FractionalBvp::new(
            self.order,
            omega,
            self.omega,
            self.sigma,
            self.grid_n,
            self.tol,
            self.max_iter,
        )?)
    }
}
