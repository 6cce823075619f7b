use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DetailedBalanceGenerator, JumpMode};
use crate::operator::{CMat, DensityMatrix, C64};
use crate::{QmsError, Result};

/// Row-major complex matrix as nested `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub(crate) fn to_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn from_rows(rows: &MatrixRows, d: usize, what: &str) -> Result<CMat> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(QmsError::Parse(format!("{what} must be a {d}x{d} matrix")));
    }
    Ok(CMat::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeFile {
    pub c: f64,
    pub omega: f64,
    #[serde(rename = "L")]
    pub l: MatrixRows,
}

/// On-disk form of a generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub dim: usize,
    pub sigma: MatrixRows,
    pub modes: Vec<ModeFile>,
}

impl GeneratorFile {
    pub fn from_generator(g: &DetailedBalanceGenerator) -> Self {
        Self {
            dim: g.dim(),
            sigma: to_rows(g.sigma().matrix()),
            modes: g
                .modes()
                .iter()
                .map(|m| ModeFile {
                    c: m.c,
                    omega: m.omega,
                    l: to_rows(&m.l),
                })
                .collect(),
        }
    }

    /// Decodes the matrices without validating the generator invariants.
    pub fn decode(&self) -> Result<(DensityMatrix, Vec<JumpMode>)> {
        if self.dim == 0 {
            return Err(QmsError::Parse("dim must be positive".into()));
        }
        let sigma = DensityMatrix::new(from_rows(&self.sigma, self.dim, "sigma")?)?;
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(j, m)| {
                Ok(JumpMode::new(
                    from_rows(&m.l, self.dim, &format!("mode {j}"))?,
                    m.c,
                    m.omega,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((sigma, modes))
    }

    pub fn into_generator(&self) -> Result<DetailedBalanceGenerator> {
        let (sigma, modes) = self.decode()?;
        DetailedBalanceGenerator::new(sigma, modes)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QmsError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("generator file serialises")
    }
}

impl DetailedBalanceGenerator {
    /// Loads and re-validates a generator from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        GeneratorFile::from_json(text)?.into_generator()
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn spec_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
