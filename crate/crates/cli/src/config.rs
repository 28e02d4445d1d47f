//! The JSON problem document.

use std::path::Path;

use abflag_core::finsler::{GySource, DEFAULT_FD_STEP};
use abflag_core::metrics::orthonormalize_flag;
use abflag_core::{
    BiInvariantForm, Convention, Error, Flag, InnerProduct, LieAlgebraSpec, Matrix, Method, MetricEndomorphism,
    ReductivePair, Result, Tolerances, Vector,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub dim: usize,
    #[serde(default)]
    pub h_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// `(i, j, k, c)` meaning `[e_i, e_j]` has `c` along `e_k`; 1-based.
    pub structure_constants: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<f64>>>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub flags: Vec<FlagSpec>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagSpec {
    #[serde(rename = "Y")]
    pub y: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub sign_convention: Convention,
    pub method: Method,
    pub fd_step: f64,
    pub gy_source: GySource,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            sign_convention: Convention::OracleAligned,
            method: Method::General,
            fd_step: DEFAULT_FD_STEP,
            gy_source: GySource::Closed,
            tolerances: Tolerances::default(),
            seed: 0,
            samples: 1000,
        }
    }
}

/// Parses and checks shapes and index ranges; metric properties are left to
/// `validate`.
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let cfg: ProblemConfig =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("config parse error: {e}")))?;
    cfg.check_shapes()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn serialize_config(cfg: &ProblemConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

fn matrix(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Matrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("{what} must be a {n}x{n} matrix")));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ProblemConfig {
    pub fn m_dim(&self) -> usize {
        self.dim.saturating_sub(self.h_dim)
    }

    fn check_shapes(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Input("dim must be positive".into()));
        }
        if self.h_dim >= self.dim {
            return Err(Error::Input(format!(
                "h_dim = {} must be below dim = {}",
                self.h_dim, self.dim
            )));
        }
        for (n, &(i, j, k, _)) in self.structure_constants.iter().enumerate() {
            if [i, j, k].iter().any(|&t| t == 0 || t > self.dim) {
                return Err(Error::Input(format!(
                    "structure_constants entry #{} ({i}, {j}, {k}): index out of range 1..={}",
                    n + 1,
                    self.dim
                )));
            }
        }
        if let Some(l) = &self.labels {
            if l.len() != self.dim {
                return Err(Error::Input(format!("labels must have {} entries", self.dim)));
            }
        }
        if let Some(g0) = &self.g0 {
            matrix(g0, self.dim, "g0")?;
        }
        let m = self.m_dim();
        if let Some(phi) = &self.phi {
            matrix(phi, m, "phi")?;
        }
        if let Some(x) = &self.x {
            if x.len() != m {
                return Err(Error::Input(format!("X must have m_dim = {m} entries")));
            }
        }
        for (n, f) in self.flags.iter().enumerate() {
            if f.y.len() != m || f.u.len() != m {
                return Err(Error::Input(format!(
                    "flag #{} must have m_dim = {m} entries in Y and U",
                    n + 1
                )));
            }
        }
        let o = &self.options;
        if !(o.fd_step > 0.0) || !o.fd_step.is_finite() {
            return Err(Error::Input("options.fd_step must be positive".into()));
        }
        Ok(())
    }

    pub fn algebra(&self) -> Result<LieAlgebraSpec> {
        let entries: Vec<_> = self
            .structure_constants
            .iter()
            .map(|&(i, j, k, v)| (i - 1, j - 1, k - 1, v))
            .collect();
        let alg = LieAlgebraSpec::from_entries(self.dim, &entries)?;
        match &self.labels {
            Some(l) => alg.with_labels(l.clone()),
            None => Ok(alg),
        }
    }

    pub fn split(&self) -> Result<ReductivePair> {
        ReductivePair::new(self.dim, self.h_dim)
    }

    pub fn g0(&self) -> Result<BiInvariantForm> {
        match &self.g0 {
            Some(rows) => BiInvariantForm::new(matrix(rows, self.dim, "g0")?, self.options.tolerances.metric),
            None => Ok(BiInvariantForm::identity(self.dim)),
        }
    }

    pub fn phi(&self, g0: &BiInvariantForm, split: &ReductivePair) -> Result<MetricEndomorphism> {
        match &self.phi {
            Some(rows) => MetricEndomorphism::new(
                matrix(rows, self.m_dim(), "phi")?,
                g0,
                split,
                self.options.tolerances.metric,
            ),
            None => Ok(MetricEndomorphism::identity(self.m_dim())),
        }
    }

    pub fn drift(&self) -> Vector {
        match &self.x {
            Some(x) => Vector::from_column_slice(x),
            None => Vector::zeros(self.m_dim()),
        }
    }

    /// Orthonormalizes each raw flag for `g`; the notice lists the flags
    /// that changed.
    pub fn flags(&self, g: &InnerProduct) -> Result<(Vec<Flag>, Vec<String>)> {
        let mut out = Vec::with_capacity(self.flags.len());
        let mut notices = Vec::new();
        for (n, f) in self.flags.iter().enumerate() {
            let (y, u) = (Vector::from_column_slice(&f.y), Vector::from_column_slice(&f.u));
            let flag = orthonormalize_flag(g, &y, &u, self.options.tolerances.dependence)
                .map_err(|e| Error::Flag(format!("flag #{}: {e}", n + 1)))?;
            if (flag.y() - &y).amax() > 1e-12 || (flag.u() - &u).amax() > 1e-12 {
                notices.push(format!("flag #{} was orthonormalized for g", n + 1));
            }
            out.push(flag);
        }
        Ok((out, notices))
    }
}
