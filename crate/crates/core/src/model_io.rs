//! JSON model files: `{dims, site_dim, lambda0, h, phi_r, phi_b, t0, alpha,
//! beta}` with matrices as row-major nested arrays of `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{BoundMode, ModelSpec};
use crate::lattice::Volume;
use crate::linalg::{CMat, C64};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

fn default_t0() -> f64 {
    1.0
}

fn is_local(mode: &BoundMode) -> bool {
    *mode == BoundMode::Local
}

/// Λ₀ offsets: either a flat list (one-dimensional lattices) or a list of
/// coordinate vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OffsetsJson {
    Flat(Vec<i64>),
    Nested(Vec<Vec<i64>>),
}

impl OffsetsJson {
    pub fn to_offsets(&self) -> Vec<Vec<i64>> {
        match self {
            OffsetsJson::Flat(v) => v.iter().map(|&x| vec![x]).collect(),
            OffsetsJson::Nested(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dims: Vec<usize>,
    pub site_dim: usize,
    pub lambda0: OffsetsJson,
    pub h: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_r: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_b: Option<MatrixJson>,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "is_local")]
    pub bound_mode: BoundMode,
}

pub fn matrix_from_json(m: &MatrixJson) -> Result<CMat> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::Serialization("matrix is not square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| C64::new(m[i][j][0], m[i][j][1])))
}

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ModelFile {
    pub fn from_model(model: &ModelSpec) -> Self {
        Self {
            dims: model.volume().dims().to_vec(),
            site_dim: model.volume().site_dim(),
            lambda0: OffsetsJson::Nested(model.geometry.lambda0.clone()),
            h: matrix_to_json(&model.h),
            phi_r: model.phi_r.as_ref().map(matrix_to_json),
            phi_b: model.phi_b.as_ref().map(matrix_to_json),
            t0: model.t0,
            alpha: model.alpha,
            beta: model.beta,
            bound_mode: model.bound_mode,
        }
    }

    /// Builds the model without checking the physical invariants.
    pub fn to_model_unchecked(&self) -> Result<ModelSpec> {
        let volume = Volume::new(&self.dims, self.site_dim)?;
        let mut m = ModelSpec::unchecked(
            volume,
            self.lambda0.to_offsets(),
            matrix_from_json(&self.h)?,
            self.phi_r.as_ref().map(matrix_from_json).transpose()?,
            self.phi_b.as_ref().map(matrix_from_json).transpose()?,
            self.t0,
            self.alpha,
            self.beta,
        )?;
        m.bound_mode = self.bound_mode;
        Ok(m)
    }

    pub fn to_model(&self) -> Result<ModelSpec> {
        let m = self.to_model_unchecked()?;
        m.validate()?;
        Ok(m)
    }
}

pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    serde_json::from_str(text).map_err(|e| {
        Error::Serialization(format!("line {}, column {}: {e}", e.line(), e.column()))
    })
}

pub fn model_to_json(model: &ModelSpec) -> Result<String> {
    crate::report::to_json(&ModelFile::from_model(model))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"{"dims":[2],"site_dim":2,"lambda0":[0],
        "h":[[[0,0],[0,0]],[[0,0],[1,0]]],
        "phi_b":[[[0,0],[0.01,0]],[[0.01,0],[0,0]]],"beta":0.01}"#;

    #[test]
    fn parse_and_round_trip() {
        let f = parse_model_file(TEXT).unwrap();
        assert_eq!(f.t0, 1.0);
        let m = f.to_model().unwrap();
        let s1 = model_to_json(&m).unwrap();
        let m2 = parse_model_file(&s1).unwrap().to_model().unwrap();
        assert_eq!(s1, model_to_json(&m2).unwrap());
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse_model_file("{\"dims\": [2],\n \"site_dim\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
