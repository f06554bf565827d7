use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;

/// Symmetric matrix with unit diagonal and entries in `[-1, 1]`.
///
/// Positive semi-definiteness is only checked when the matrix is factorized;
/// see [`CorrelationMatrix::repaired`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        if n == 0 {
            return domain("correlation matrix must be at least 1x1");
        }
        for i in 0..n {
            if (m[(i, i)] - 1.0).abs() > SYMMETRY_TOL {
                return domain(format!("diagonal entry ({i},{i}) = {} is not 1", m[(i, i)]));
            }
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOL {
                    return domain(format!("matrix is not symmetric at ({i},{j}): {a} vs {b}"));
                }
                if a.abs() > 1.0 + SYMMETRY_TOL {
                    return domain(format!("entry ({i},{j}) = {a} outside [-1, 1]"));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Upper-triangle off-diagonal entries in row-major order.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn is_psd(&self) -> bool {
        psd_cholesky(&self.0).is_some()
    }

    /// Nearest PSD correlation matrix by eigenvalue clipping at zero followed
    /// by rescaling to unit diagonal.
    pub fn repaired(&self) -> Result<Self> {
        let n = self.dim();
        let eig = SymmetricEigen::new(self.0.clone());
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        let v = &eig.eigenvectors;
        let r = v * DMatrix::from_diagonal(&clipped) * v.transpose();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let scale = (r[(i, i)] * r[(j, j)]).sqrt();
                if !(scale > 0.0) {
                    return Err(Error::NotPsd(format!(
                        "variable {i} has no variance left after eigenvalue clipping"
                    )));
                }
                out[(i, j)] = if i == j { 1.0 } else { (r[(i, j)] / scale).clamp(-1.0, 1.0) };
            }
        }
        // symmetrize rounding noise
        let out = (&out + out.transpose()) * 0.5;
        Ok(Self(out))
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`, allowing zero pivots for singular
    /// matrices. Repairs the matrix once if it is indefinite.
    pub(crate) fn factor(&self) -> Result<DMatrix<f64>> {
        if let Some(l) = psd_cholesky(&self.0) {
            return Ok(l);
        }
        let fixed = self.repaired()?;
        log::warn!(
            "correlation matrix ({n}x{n}) is not PSD; repaired by eigenvalue clipping",
            n = self.dim()
        );
        psd_cholesky(&fixed.0)
            .ok_or_else(|| Error::NotPsd("factorization failed after repair".into()))
    }
}

impl Serialize for CorrelationMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self.0.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CorrelationMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        CorrelationMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Relative pivot tolerance below which a variable is treated as a linear
/// combination of the previous ones.
const PIVOT_TOL: f64 = 1e-10;

/// Cholesky factorization for positive semi-definite matrices. Returns `None`
/// when a pivot is clearly negative.
pub(crate) fn psd_cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        let scale = a[(j, j)].abs().max(1.0);
        if pivot < -PIVOT_TOL.sqrt() * scale {
            return None;
        }
        if pivot <= PIVOT_TOL * scale {
            // degenerate direction: the residual column must vanish too
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if s.abs() > PIVOT_TOL.sqrt() * scale {
                    return None;
                }
            }
            continue;
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / diag;
        }
    }
    Some(l)
}

/// `n x n` matrix with unit diagonal and `rho` everywhere else.
pub fn build_equicorrelation_matrix(n: usize, rho: f64) -> Result<CorrelationMatrix> {
    if n == 0 {
        return domain("dimension must be >= 1");
    }
    let lower = if n > 1 { -1.0 / (n as f64 - 1.0) } else { -1.0 };
    if !(rho >= lower && rho <= 1.0) {
        return domain(format!(
            "equicorrelation rho={rho} is not PSD for n={n}; valid interval is [{lower}, 1]"
        ));
    }
    Ok(CorrelationMatrix(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            rho
        }
    })))
}

/// Equicorrelation coefficient or a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSpec {
    Rho(f64),
    Matrix(CorrelationMatrix),
}

impl CorrelationSpec {
    pub fn to_matrix(&self, n: usize) -> Result<CorrelationMatrix> {
        match self {
            CorrelationSpec::Rho(rho) => build_equicorrelation_matrix(n, *rho),
            CorrelationSpec::Matrix(m) if m.dim() == n => Ok(m.clone()),
            CorrelationSpec::Matrix(m) => Err(Error::Dimension {
                expected: n,
                got: m.dim(),
            }),
        }
    }
}
