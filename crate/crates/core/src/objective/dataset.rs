use crate::error::{Error, Result};

/// Row-major feature storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Dense {
        values: Vec<f64>,
    },
    /// Compressed sparse rows; `indptr` has `n_samples + 1` entries.
    Sparse {
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    },
}

/// A borrowed feature row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse { indices: &'a [u32], values: &'a [f64] },
}

impl Row<'_> {
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        match *self {
            Row::Dense(v) => crate::vecops::dot(v, x),
            Row::Sparse { indices, values } => indices
                .iter()
                .zip(values)
                .map(|(&j, v)| v * x[j as usize])
                .sum(),
        }
    }

    /// `out += a * row`
    #[inline]
    pub fn add_scaled_to(&self, a: f64, out: &mut [f64]) {
        match *self {
            Row::Dense(v) => crate::vecops::axpy(a, v, out),
            Row::Sparse { indices, values } => {
                for (&j, v) in indices.iter().zip(values) {
                    out[j as usize] += a * v;
                }
            }
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        self.add_scaled_to(1.0, &mut out);
        out
    }
}

/// N labelled feature vectors with labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Features,
    labels: Vec<f64>,
    n_samples: usize,
    n_features: usize,
}

impl Dataset {
    /// Builds a dense dataset from rows. Labels are mapped to {-1, +1} by sign
    /// (anything nonpositive becomes -1).
    pub fn dense(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        let n_samples = rows.len();
        if n_samples == 0 {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        let n_features = rows[0].len();
        if n_features == 0 {
            return Err(Error::InvalidDataset("no features".into()));
        }
        let mut values = Vec::with_capacity(n_samples * n_features);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_features {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} features, expected {n_features}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(Features::Dense { values }, labels, n_features)
    }

    /// Builds a dense dataset from a flat row-major buffer.
    pub fn dense_flat(values: Vec<f64>, n_features: usize, labels: &[f64]) -> Result<Self> {
        Self::new(Features::Dense { values }, labels, n_features)
    }

    /// Builds a sparse dataset; each row is a list of `(column, value)` pairs.
    pub fn sparse(rows: &[Vec<(usize, f64)>], labels: &[f64], n_features: usize) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in rows {
            for &(j, v) in r {
                let j = u32::try_from(j)
                    .map_err(|_| Error::InvalidDataset(format!("feature index {j} too large")))?;
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self::new(
            Features::Sparse {
                indptr,
                indices,
                values,
            },
            labels,
            n_features,
        )
    }

    /// Dataset whose rows are the centers of a mean-square objective. Labels are all +1.
    pub fn centers(rows: &[Vec<f64>]) -> Result<Self> {
        Self::dense(rows, &vec![1.0; rows.len()])
    }

    pub fn new(features: Features, labels: &[f64], n_features: usize) -> Result<Self> {
        let n_samples = labels.len();
        if n_samples == 0 {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if n_features == 0 {
            return Err(Error::InvalidDataset("no features".into()));
        }
        match &features {
            Features::Dense { values } => {
                if values.len() != n_samples * n_features {
                    return Err(Error::InvalidDataset(format!(
                        "dense buffer has {} values, expected {}",
                        values.len(),
                        n_samples * n_features
                    )));
                }
                if !crate::vecops::all_finite(values) {
                    return Err(Error::InvalidDataset("non-finite feature value".into()));
                }
            }
            Features::Sparse {
                indptr,
                indices,
                values,
            } => {
                if indptr.len() != n_samples + 1 || indptr[0] != 0 {
                    return Err(Error::InvalidDataset("malformed row pointer".into()));
                }
                if indptr.windows(2).any(|w| w[1] < w[0])
                    || *indptr.last().unwrap() != indices.len()
                    || indices.len() != values.len()
                {
                    return Err(Error::InvalidDataset("malformed row pointer".into()));
                }
                if let Some(&j) = indices.iter().find(|&&j| j as usize >= n_features) {
                    return Err(Error::InvalidDataset(format!(
                        "feature index {j} out of range for {n_features} features"
                    )));
                }
                if !crate::vecops::all_finite(values) {
                    return Err(Error::InvalidDataset("non-finite feature value".into()));
                }
            }
        }
        if labels.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidDataset("non-finite label".into()));
        }
        let labels = labels
            .iter()
            .map(|&l| if l > 0.0 { 1.0 } else { -1.0 })
            .collect();
        Ok(Self {
            features,
            labels,
            n_samples,
            n_features,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self) -> &Features {
        &self.features
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.features, Features::Sparse { .. })
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.features {
            Features::Dense { values } => {
                Row::Dense(&values[i * self.n_features..(i + 1) * self.n_features])
            }
            Features::Sparse {
                indptr,
                indices,
                values,
            } => {
                let (a, b) = (indptr[i], indptr[i + 1]);
                Row::Sparse {
                    indices: &indices[a..b],
                    values: &values[a..b],
                }
            }
        }
    }

    #[inline]
    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// Same data in the other storage layout.
    pub fn to_dense(&self) -> Dataset {
        let mut values = Vec::with_capacity(self.n_samples * self.n_features);
        for i in 0..self.n_samples {
            values.extend(self.row(i).to_dense(self.n_features));
        }
        Dataset {
            features: Features::Dense { values },
            labels: self.labels.clone(),
            n_samples: self.n_samples,
            n_features: self.n_features,
        }
    }

    pub fn to_sparse(&self) -> Dataset {
        let rows: Vec<Vec<(usize, f64)>> = (0..self.n_samples)
            .map(|i| {
                self.row(i)
                    .to_dense(self.n_features)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0)
                    .collect()
            })
            .collect();
        Dataset::sparse(&rows, &self.labels, self.n_features).expect("valid by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_mapped_to_signs() {
        let d = Dataset::dense(&[vec![1.0], vec![2.0], vec![3.0]], &[0.0, 1.0, -3.0]).unwrap();
        assert_eq!(d.labels(), &[-1.0, 1.0, -1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Dataset::dense(&[], &[]).is_err());
        assert!(Dataset::dense(&[vec![f64::NAN]], &[1.0]).is_err());
        assert!(Dataset::dense(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 1.0]).is_err());
        assert!(Dataset::sparse(&[vec![(3, 1.0)]], &[1.0], 3).is_err());
        assert!(Dataset::dense(&[vec![1.0]], &[f64::INFINITY]).is_err());
    }

    #[test]
    fn sparse_row_ops_match_dense() {
        let d = Dataset::sparse(&[vec![(0, 0.5), (2, -2.0)]], &[1.0], 3).unwrap();
        let x = [1.0, 10.0, 3.0];
        assert_eq!(d.row(0).dot(&x), 0.5 - 6.0);
        assert_eq!(d.row(0).to_dense(3), vec![0.5, 0.0, -2.0]);
        assert_eq!(d.to_dense().to_sparse(), d);
    }
}
