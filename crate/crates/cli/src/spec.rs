//! Input files: problem specs for `solve`/`ortho` and `R` specs for `trace`.

use std::path::Path;

use scurve_core::geometry::NoncrossingPartition;
use scurve_core::quaddiff::TraceOptions;
use scurve_core::scurve::{SolverParams, SCHEMA};
use scurve_core::{Error, Poly, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

fn schema() -> String {
    SCHEMA.into()
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "yes")]
    pub solution: bool,
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub ortho_report: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            solution: true,
            svg: false,
            ortho_report: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// `f64` up to the degree cap, double-double beyond it.
    Auto,
    F64,
    DoubleDouble,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrthoOptions {
    pub degrees: Vec<usize>,
    pub precision: Precision,
    pub quad_tol: f64,
}

impl Default for OrthoOptions {
    fn default() -> Self {
        Self {
            degrees: vec![8, 16],
            precision: Precision::Auto,
            quad_tol: 1e-12,
        }
    }
}

/// `solve` / `ortho` input. Coefficients are `[re, im]` pairs, lowest
/// degree first; partition blocks use 1-based sector indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(rename = "V")]
    pub v: Poly,
    pub partition: Vec<Vec<usize>>,
    #[serde(default)]
    pub params: SolverParams,
    /// Overrides the hash-derived seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub ortho: OrthoOptions,
}

/// Validated problem, ready for the solver.
#[derive(Clone, Debug)]
pub struct Problem {
    pub v: Poly,
    pub partition: NoncrossingPartition,
    pub params: SolverParams,
}

impl ProblemSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let spec: Self = read_json(path)?;
        check_schema(&spec.schema)?;
        Ok(spec)
    }

    /// Stable seed: the first eight bytes of SHA-256 over the canonical JSON
    /// of the problem file with any explicit seed removed.
    pub fn hash_seed(&self) -> u64 {
        let mut canon = self.clone();
        canon.seed = None;
        canon.params.seed = 0;
        let bytes = serde_json::to_vec(&canon).expect("spec serializes");
        let digest = Sha256::digest(&bytes);
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Field and partition checks, seed resolution (`--seed`, then the
    /// file's `seed`, then the hash).
    pub fn prepare(&self, seed: Option<u64>) -> Result<Problem, CliError> {
        let v = self.v.clone();
        if v.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidField("non-finite coefficient".into()).into());
        }
        let n = match v.degree() {
            Some(d) if d >= 2 => d,
            _ => return Err(Error::InvalidField("V must have degree at least 2".into()).into()),
        };
        let partition = NoncrossingPartition::new(n, self.partition.clone())?;
        let mut params = self.params.clone();
        params.seed = seed.or(self.seed).unwrap_or_else(|| self.hash_seed());
        Ok(Problem { v, partition, params })
    }
}

/// Regular starting points for `R` without zeros; trajectories are drawn
/// through each of them in both directions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub count: [usize; 2],
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            min: [-2.0, 0.0],
            max: [2.0, 0.0],
            count: [9, 1],
        }
    }
}

impl Grid {
    pub fn points(&self) -> Vec<C64> {
        let axis = |k: usize| -> Vec<f64> {
            let m = self.count[k].max(1);
            if m == 1 {
                return vec![0.5 * (self.min[k] + self.max[k])];
            }
            (0..m)
                .map(|j| self.min[k] + (self.max[k] - self.min[k]) * j as f64 / (m - 1) as f64)
                .collect()
        };
        let (xs, ys) = (axis(0), axis(1));
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| C64::new(x, y)))
            .collect()
    }
}

/// `trace` input.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(rename = "R")]
    pub r: Poly,
    #[serde(default)]
    pub options: TraceOptions,
    /// Extra regular trajectories; used by default when `R` is constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

impl TraceSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let spec: Self = read_json(path)?;
        check_schema(&spec.schema)?;
        if spec.r.is_zero() {
            return Err(Error::Validation("R is identically zero".into()).into());
        }
        Ok(spec)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))
}

pub fn check_schema(s: &str) -> Result<(), CliError> {
    if s == SCHEMA {
        Ok(())
    } else {
        Err(CliError::Schema(format!("unsupported schema {s:?}, expected {SCHEMA:?}")))
    }
}
