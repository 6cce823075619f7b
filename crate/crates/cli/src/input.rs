use std::fmt;
use std::path::Path;

use qms_core::generator::{builtin, DetailedBalanceGenerator, GeneratorFile, MatrixRows};
use qms_core::operator::{CMat, DensityMatrix, C64};
use qms_core::QmsError;

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, unreadable or malformed input: exit 2.
    Usage(String),
    /// A computation or check failed: exit 1.
    Check(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

impl From<QmsError> for Failure {
    fn from(e: QmsError) -> Self {
        match e {
            QmsError::Parse(_) | QmsError::InvalidInput(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Where a generator comes from.
pub enum GeneratorSource {
    Builtin(Box<DetailedBalanceGenerator>),
    File(GeneratorFile),
}

pub fn read_generator_source(spec: &str) -> Result<GeneratorSource, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let file = GeneratorFile::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(GeneratorSource::File(file));
    }
    if spec.contains('(') {
        return builtin(spec)
            .map(|g| GeneratorSource::Builtin(Box::new(g)))
            .map_err(|e| match e {
                QmsError::Parse(m) => Failure::Usage(m),
                other => Failure::Usage(other.to_string()),
            });
    }
    Err(Failure::Usage(format!(
        "`{spec}` is neither a readable file nor a builtin generator"
    )))
}

pub fn load_generator(spec: &str) -> Result<DetailedBalanceGenerator, Failure> {
    match read_generator_source(spec)? {
        GeneratorSource::Builtin(g) => Ok(*g),
        GeneratorSource::File(f) => f.into_generator().map_err(|e| match e {
            QmsError::Parse(m) => Failure::Usage(m),
            other => Failure::Check(other.to_string()),
        }),
    }
}

/// Parses `pure:k`, `maxmix`, `sigma`, an inline JSON matrix of `[re, im]`
/// pairs or a path to one.
pub fn parse_state(spec: &str, gen: &DetailedBalanceGenerator) -> Result<DensityMatrix, Failure> {
    let d = gen.dim();
    let spec = spec.trim();
    if spec == "maxmix" {
        return Ok(DensityMatrix::maximally_mixed(d));
    }
    if spec == "sigma" {
        return Ok(gen.sigma().clone());
    }
    if let Some(k) = spec.strip_prefix("pure:") {
        let k: usize = k
            .parse()
            .map_err(|_| Failure::Usage(format!("bad basis index in `{spec}`")))?;
        return DensityMatrix::basis_state(d, k).map_err(|e| Failure::Usage(e.to_string()));
    }
    let text = if spec.starts_with('[') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?
    };
    let rows: MatrixRows = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("state JSON: {e}")))?;
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Failure::Usage(format!("state must be a {d}x{d} matrix")));
    }
    let m = CMat::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
    DensityMatrix::new(m).map_err(|e| Failure::Usage(e.to_string()))
}
