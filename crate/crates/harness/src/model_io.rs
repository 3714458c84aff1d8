//! JSON model files.

use std::path::Path;

use rankpursuit::baselines::DenseExpansion;
use rankpursuit::multiview::{FeatureSlice, ViewModel};
use rankpursuit::{KernelSpec, MultiViewModel, SparseExpansion, ViewSpec};
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{HarnessError, Result};
use crate::methods::Model;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewRecord {
    pub feature_slice: FeatureSlice,
    /// Only written when a view's kernel differs from the file's kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    pub centers: Vec<Vec<f64>>,
    pub indices: Vec<usize>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub method: Method,
    pub kernel: KernelSpec,
    pub beta: Option<f64>,
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_index: Option<bool>,
    pub views: Vec<ViewRecord>,
}

fn single_view(centers: &[Vec<f64>], indices: &[usize], coefficients: &[f64]) -> Vec<ViewRecord> {
    vec![ViewRecord {
        feature_slice: FeatureSlice::All,
        kernel: None,
        centers: centers.to_vec(),
        indices: indices.to_vec(),
        coefficients: coefficients.to_vec(),
    }]
}

impl ModelFile {
    pub fn from_model(model: &Model) -> Result<Self> {
        Ok(match model {
            Model::Sparse { method, model } => Self {
                schema_version: SCHEMA_VERSION,
                method: *method,
                kernel: model.kernel,
                beta: Some(model.beta),
                nu: None,
                shared_index: None,
                views: single_view(&model.centers, &model.indices, &model.coefficients),
            },
            Model::Dense { method, model } => Self {
                schema_version: SCHEMA_VERSION,
                method: *method,
                kernel: model.kernel,
                beta: None,
                nu: None,
                shared_index: None,
                views: single_view(&model.centers, &model.indices, &model.coefficients),
            },
            Model::MultiView(mv) => {
                let kernel = mv
                    .views
                    .first()
                    .map(|v| v.spec.kernel)
                    .ok_or_else(|| HarnessError::Model("multi-view model without views".into()))?;
                Self {
                    schema_version: SCHEMA_VERSION,
                    method: Method::SsRankingPursuit,
                    kernel,
                    beta: None,
                    nu: Some(mv.nu),
                    shared_index: Some(mv.shared_index),
                    views: mv
                        .views
                        .iter()
                        .map(|v| ViewRecord {
                            feature_slice: v.spec.features.clone(),
                            kernel: (v.spec.kernel != kernel).then_some(v.spec.kernel),
                            centers: v.expansion.centers.clone(),
                            indices: v.expansion.indices.clone(),
                            coefficients: v.expansion.coefficients.clone(),
                        })
                        .collect(),
                }
            }
        })
    }

    pub fn into_model(self) -> Result<Model> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Model(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.kernel.validate()?;
        for v in &self.views {
            let n = v.coefficients.len();
            if v.centers.len() != n || v.indices.len() != n {
                return Err(HarnessError::Model("centers, indices and coefficients differ in length".into()));
            }
            if v.centers.windows(2).any(|w| w[0].len() != w[1].len()) {
                return Err(HarnessError::Model("centers differ in dimension".into()));
            }
        }
        if self.method == Method::SsRankingPursuit {
            let nu = self.nu.ok_or_else(|| HarnessError::Model("multi-view model without nu".into()))?;
            let views = self
                .views
                .into_iter()
                .map(|v| {
                    let kernel = v.kernel.unwrap_or(self.kernel);
                    Ok(ViewModel {
                        spec: ViewSpec::new(v.feature_slice, kernel)?,
                        expansion: SparseExpansion {
                            kernel,
                            centers: v.centers,
                            indices: v.indices,
                            coefficients: v.coefficients,
                            beta: 0.0,
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if views.is_empty() {
                return Err(HarnessError::Model("multi-view model without views".into()));
            }
            return Ok(Model::MultiView(MultiViewModel {
                views,
                nu,
                shared_index: self.shared_index.unwrap_or(true),
            }));
        }
        let [view]: [ViewRecord; 1] = self
            .views
            .try_into()
            .map_err(|v: Vec<ViewRecord>| HarnessError::Model(format!("expected one view, found {}", v.len())))?;
        if view.feature_slice != FeatureSlice::All {
            return Err(HarnessError::Model("single-view models use every feature".into()));
        }
        Ok(if self.method.uses_lambda() {
            Model::Dense {
                method: self.method,
                model: DenseExpansion {
                    kernel: self.kernel,
                    centers: view.centers,
                    coefficients: view.coefficients,
                    indices: view.indices,
                },
            }
        } else {
            Model::Sparse {
                method: self.method,
                model: SparseExpansion {
                    kernel: self.kernel,
                    centers: view.centers,
                    indices: view.indices,
                    coefficients: view.coefficients,
                    beta: self.beta.ok_or_else(|| HarnessError::Model("pursuit model without beta".into()))?,
                },
            }
        })
    }
}

pub fn to_json(model: &Model) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from_model(model)?)?)
}

pub fn from_json(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| HarnessError::Model(format!("corrupted model file: {e}")))?;
    file.into_model()
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    from_json(&std::fs::read_to_string(path)?)
}
