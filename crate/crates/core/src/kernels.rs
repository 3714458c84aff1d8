//! Kernel functions and dictionaries of kernel basis functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataPoint, ScoredDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(-width * ‖x - x'‖²)`
    Gaussian { width: f64 },
    /// `x · x'`
    Linear,
}

impl KernelSpec {
    pub fn gaussian(width: f64) -> Result<Self> {
        let spec = KernelSpec::Gaussian { width };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { width } if !(width > 0.0 && width.is_finite()) => Err(
                Error::InvalidParameter(format!("gaussian width must be positive, got {width}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn width(&self) -> Option<f64> {
        match *self {
            KernelSpec::Gaussian { width } => Some(width),
            KernelSpec::Linear => None,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.validate()?;
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { width } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-width * d2).exp()
            }
            KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.eval(x, y)
}

/// Candidate basis functions `k_γ(·) = k(c_γ, ·)`, one per center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    kernel: KernelSpec,
    centers: Vec<Vec<f64>>,
    /// Position of each center in the dataset it was taken from.
    source_indices: Vec<usize>,
}

impl Dictionary {
    pub fn new(kernel: KernelSpec, centers: Vec<Vec<f64>>, source_indices: Vec<usize>) -> Result<Self> {
        kernel.validate()?;
        if centers.is_empty() {
            return Err(Error::InvalidParameter("dictionary needs at least one center".into()));
        }
        if source_indices.len() != centers.len() {
            return Err(Error::LengthMismatch {
                expected: centers.len(),
                found: source_indices.len(),
            });
        }
        let dim = centers[0].len();
        if let Some(c) = centers.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
        Ok(Self {
            kernel,
            centers,
            source_indices,
        })
    }

    /// Centers at the scored points, or at `subset` (0-based, order kept).
    /// Duplicate feature vectors are kept.
    pub fn from_dataset(dataset: &ScoredDataset, kernel: KernelSpec, subset: Option<&[usize]>) -> Result<Self> {
        let indices: Vec<usize> = match subset {
            Some([]) => return Err(Error::InvalidParameter("empty center subset".into())),
            Some(s) => s.to_vec(),
            None => (0..dataset.len()).collect(),
        };
        let points = dataset.points();
        let centers = indices
            .iter()
            .map(|&i| {
                points
                    .get(i)
                    .map(|p| p.features.clone())
                    .ok_or(Error::IndexOutOfRange { index: i, len: points.len() })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(kernel, centers, indices)
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// Number of basis functions `N`.
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn center(&self, gamma: usize) -> Result<&[f64]> {
        self.centers
            .get(gamma)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: gamma,
                len: self.centers.len(),
            })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    /// `(k_γ(q_1), …, k_γ(q_n))`.
    pub fn column(&self, gamma: usize, points: &[DataPoint]) -> Result<Vec<f64>> {
        let center = self.center(gamma)?;
        points
            .iter()
            .map(|p| {
                if p.features.len() != center.len() {
                    return Err(Error::DimensionMismatch {
                        expected: center.len(),
                        found: p.features.len(),
                    });
                }
                Ok(self.kernel.eval_unchecked(center, &p.features))
            })
            .collect()
    }

    /// Every column, indexed by `γ`.
    pub fn columns(&self, points: &[DataPoint]) -> Result<Vec<Vec<f64>>> {
        (0..self.len()).map(|g| self.column(g, points)).collect()
    }
}

pub fn kernel_column(dict: &Dictionary, gamma: usize, points: &[DataPoint]) -> Result<Vec<f64>> {
    dict.column(gamma, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(features: &[&[f64]]) -> ScoredDataset {
        ScoredDataset::new(
            features
                .iter()
                .enumerate()
                .map(|(i, f)| DataPoint::scored(0, i as u64, f.to_vec(), 0.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_values() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert_eq!(k.eval(&[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        let v = k.eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn linear_value() {
        assert_eq!(KernelSpec::Linear.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }

    #[test]
    fn kernel_errors() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(-1.0).is_err());
        assert!(matches!(
            KernelSpec::Linear.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn columns() {
        let ds = dataset(&[&[1.0], &[2.0], &[3.0]]);
        let dict = Dictionary::from_dataset(&ds, KernelSpec::Linear, Some(&[0])).unwrap();
        assert_eq!(dict.column(0, ds.points()).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(dict.column(1, ds.points()), Err(Error::IndexOutOfRange { .. })));

        let ds = dataset(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let dict = Dictionary::from_dataset(&ds, KernelSpec::gaussian(0.5).unwrap(), None).unwrap();
        let col = dict.column(0, ds.points()).unwrap();
        assert_eq!(col[0], 1.0);
        assert!((col[1] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dictionary_from_dataset_variants() {
        let ds = dataset(&[&[1.0], &[2.0], &[2.0], &[4.0], &[5.0]]);
        let k = KernelSpec::Linear;
        assert_eq!(Dictionary::from_dataset(&ds, k, None).unwrap().len(), 5);
        let sub = Dictionary::from_dataset(&ds, k, Some(&[2, 4])).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.centers(), &[vec![2.0], vec![5.0]]);
        assert_eq!(sub.source_indices(), &[2, 4]);
        assert!(Dictionary::from_dataset(&ds, k, Some(&[])).is_err());
        assert!(Dictionary::from_dataset(&ds, k, Some(&[9])).is_err());
    }
}
