use serde::Serialize;

use super::linalg::{chol_logdet, cholesky, sym_eigen_desc, symmetrize};
use super::types::SumsOfSquares;
use crate::error::{Error, Result};

/// Eigenvalues below this are treated as exact zeros.
const ZERO_EIG: f64 = 1e-12;

/// Which matrix defines the largest root `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `λ_max{(S_E + S_X)⁻¹ S_X} = λ₁ / (1 + λ₁)`.
    #[default]
    Johnstone,
    /// `λ_max{(S_E + S_X)⁻¹ S_E} = 1 / (1 + λ_min)`.
    Paper,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "johnstone" => Ok(Convention::Johnstone),
            "paper" | "literal" => Ok(Convention::Paper),
            other => Err(Error::domain(format!("unknown theta convention `{other}`"))),
        }
    }
}

/// `-2 log L_n = n [log det(S_E + S_X) - log det S_E]`.
pub fn neg2_log_lrt(ss: &SumsOfSquares) -> Result<f64> {
    let ce = cholesky(&ss.se).ok_or(Error::DegenerateErrorMatrix)?;
    let total = &ss.se + &ss.sx;
    let ct = cholesky(&total).ok_or(Error::DegenerateErrorMatrix)?;
    let v = ss.dims.n as f64 * (chol_logdet(&ct) - chol_logdet(&ce));
    Ok(v.max(0.0))
}

/// Eigenvalues of `S_E⁻¹S_X` (descending) from the whitened symmetric
/// matrix `L⁻¹ S_X L⁻ᵀ` with `S_E = LLᵀ`.
pub fn rel_eigenvalues(ss: &SumsOfSquares) -> Result<Vec<f64>> {
    let ce = cholesky(&ss.se).ok_or(Error::DegenerateErrorMatrix)?;
    let l = ce.l_dirty();
    let half = l
        .solve_lower_triangular(&ss.sx)
        .ok_or(Error::DegenerateErrorMatrix)?;
    let mut whitened = l
        .solve_lower_triangular(&half.transpose())
        .ok_or(Error::DegenerateErrorMatrix)?;
    symmetrize(&mut whitened);
    let (vals, _) = sym_eigen_desc(&whitened);
    Ok(vals
        .into_iter()
        .map(|v| if v < ZERO_EIG { 0.0 } else { v })
        .collect())
}

/// Largest root `θ` under the chosen convention.
pub fn theta_max(ss: &SumsOfSquares, convention: Convention) -> Result<f64> {
    let eig = rel_eigenvalues(ss)?;
    Ok(match convention {
        Convention::Johnstone => {
            let top = eig[0];
            top / (1.0 + top)
        }
        Convention::Paper => {
            let bottom = *eig.last().unwrap();
            1.0 / (1.0 + bottom)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Dims;
    use nalgebra::DMatrix;

    fn ss(se: DMatrix<f64>, sx: DMatrix<f64>, n: usize) -> SumsOfSquares {
        let m = se.nrows();
        SumsOfSquares::new(se, sx, Dims::new(n, m, m, m).unwrap()).unwrap()
    }

    #[test]
    fn zero_hypothesis_matrix() {
        let s = ss(DMatrix::identity(2, 2), DMatrix::zeros(2, 2), 10);
        assert_eq!(neg2_log_lrt(&s).unwrap(), 0.0);
        assert_eq!(rel_eigenvalues(&s).unwrap(), vec![0.0, 0.0]);
        assert_eq!(theta_max(&s, Convention::Johnstone).unwrap(), 0.0);
        assert_eq!(theta_max(&s, Convention::Paper).unwrap(), 1.0);
    }

    #[test]
    fn scalar_case_is_two_log_e() {
        let s = ss(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, std::f64::consts::E - 1.0),
            2,
        );
        assert!((neg2_log_lrt(&s).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_case() {
        let s = ss(
            DMatrix::identity(2, 2),
            DMatrix::from_diagonal(&nalgebra::dvector![1.0, 3.0]),
            10,
        );
        let eig = rel_eigenvalues(&s).unwrap();
        assert!((eig[0] - 3.0).abs() < 1e-14 && (eig[1] - 1.0).abs() < 1e-14);
        assert!((theta_max(&s, Convention::Johnstone).unwrap() - 0.75).abs() < 1e-14);
        assert!((theta_max(&s, Convention::Paper).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn singular_error_matrix_is_reported() {
        let s = ss(DMatrix::zeros(2, 2), DMatrix::identity(2, 2), 10);
        assert!(matches!(
            neg2_log_lrt(&s),
            Err(Error::DegenerateErrorMatrix)
        ));
        assert!(matches!(
            rel_eigenvalues(&s),
            Err(Error::DegenerateErrorMatrix)
        ));
    }

    #[test]
    fn convention_parses() {
        assert_eq!(
            "johnstone".parse::<Convention>().unwrap(),
            Convention::Johnstone
        );
        assert_eq!("Paper".parse::<Convention>().unwrap(), Convention::Paper);
        assert!("roy".parse::<Convention>().is_err());
    }
}
