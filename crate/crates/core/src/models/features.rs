use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical { n_levels: usize },
}

/// Raw predictor rows, row-major. Categorical features hold level indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    kinds: Vec<FeatureKind>,
    data: Vec<f64>,
    n_rows: usize,
}

impl FeatureMatrix {
    pub fn new(kinds: Vec<FeatureKind>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = kinds.len();
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::Shape(format!("feature row {i} has {} entries, expected {p}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(kinds, data)
    }

    /// Builds from a row-major flat buffer.
    pub fn from_flat(kinds: Vec<FeatureKind>, data: Vec<f64>) -> Result<Self> {
        let p = kinds.len();
        if p == 0 {
            if !data.is_empty() {
                return Err(Error::Shape("data without features".into()));
            }
            return Ok(FeatureMatrix { kinds, data, n_rows: 0 });
        }
        if !data.len().is_multiple_of(p) {
            return Err(Error::Shape("flat buffer is not a multiple of the feature count".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite feature value".into()));
        }
        let n_rows = data.len() / p;
        Ok(FeatureMatrix { kinds, data, n_rows })
    }

    /// No predictors at all, `n_rows` rows (intercept-only models).
    pub fn intercept_only(n_rows: usize) -> Self {
        FeatureMatrix { kinds: Vec::new(), data: Vec::new(), n_rows }
    }

    /// Single numeric feature.
    pub fn numeric_column(xs: &[f64]) -> Result<Self> {
        Self::from_flat(vec![FeatureKind::Numeric], xs.to_vec())
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.kinds.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert!(i < self.n_rows);
        let p = self.kinds.len();
        &self.data[i * p..(i + 1) * p]
    }

    #[inline]
    pub fn get(&self, i: usize, f: usize) -> f64 {
        self.data[i * self.kinds.len() + f]
    }

    /// Number of linear coefficients including the intercept.
    pub fn design_width(&self) -> usize {
        design_width(&self.kinds)
    }
}

pub(crate) fn design_width(kinds: &[FeatureKind]) -> usize {
    1 + kinds
        .iter()
        .map(|k| match k {
            FeatureKind::Numeric => 1,
            FeatureKind::Categorical { n_levels } => n_levels.saturating_sub(1),
        })
        .sum::<usize>()
}

/// Regression target: numeric values or level indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Numeric(Vec<f64>),
    Categorical { levels: Vec<usize>, n_levels: usize },
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Numeric(v) => v.len(),
            Target::Categorical { levels, .. } => levels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value as stored in donor pools (level index widened for categoricals).
    pub fn value(&self, i: usize) -> f64 {
        match self {
            Target::Numeric(v) => v[i],
            Target::Categorical { levels, .. } => levels[i] as f64,
        }
    }
}

/// Linear design: one column per numeric predictor and one indicator per
/// non-reference level (reference = first level). The intercept is implicit
/// for callers and stored as a leading column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    width: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// Design from plain numeric predictor rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let width = p + 1;
        let mut data = Vec::with_capacity(rows.len() * width);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::Shape(format!("design row {i} has {} entries, expected {p}", r.len())));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::Shape(format!("design row {i} has a non-finite entry")));
            }
            data.push(1.0);
            data.extend_from_slice(r);
        }
        Ok(DesignMatrix { width, data })
    }

    pub fn from_features(features: &FeatureMatrix) -> Self {
        let width = features.design_width();
        let mut data = Vec::with_capacity(features.n_rows() * width);
        for i in 0..features.n_rows() {
            encode_row(features.kinds(), features.row(i), &mut data);
        }
        DesignMatrix { width, data }
    }

    /// Coefficient count `q` (intercept included).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }
}

fn encode_row(kinds: &[FeatureKind], raw: &[f64], out: &mut Vec<f64>) {
    out.push(1.0);
    for (k, &x) in kinds.iter().zip(raw) {
        match *k {
            FeatureKind::Numeric => out.push(x),
            FeatureKind::Categorical { n_levels } => {
                let level = x as usize;
                out.extend((1..n_levels).map(|l| if l == level { 1.0 } else { 0.0 }));
            }
        }
    }
}
