use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result, C64};

/// Residual bound relative to `‖M‖` required of every extremal pair.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Extremal eigenpairs of a Hermitian matrix with residual certificates
/// `‖Mv − λv‖`.
#[derive(Clone, Debug, Serialize)]
pub struct Extremes {
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(skip)]
    pub v_min: DVector<C64>,
    #[serde(skip)]
    pub v_max: DVector<C64>,
    pub residual_min: f64,
    pub residual_max: f64,
    /// Spectral norm `max |λ|`.
    pub norm: f64,
}

fn residual(m: &DMatrix<C64>, v: &DVector<C64>, lambda: f64) -> f64 {
    (m * v - v * C64::new(lambda, 0.0)).norm()
}

/// Dense Hermitian solve; fails with [`Error::Certificate`] when either
/// residual exceeds `1e-8·‖M‖`.
pub fn hermitian_extremes(m: &DMatrix<C64>) -> Result<Extremes> {
    let n = m.nrows();
    if n == 0 || n != m.ncols() {
        return Err(Error::invalid(format!(
            "need a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let eig = m.clone().symmetric_eigen();
    let (mut imin, mut imax) = (0, 0);
    for i in 0..n {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let (lmin, lmax) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
    let v_min = eig.eigenvectors.column(imin).into_owned();
    let v_max = eig.eigenvectors.column(imax).into_owned();
    let norm = lmin.abs().max(lmax.abs());
    let out = Extremes {
        lambda_min: lmin,
        lambda_max: lmax,
        residual_min: residual(m, &v_min, lmin),
        residual_max: residual(m, &v_max, lmax),
        v_min,
        v_max,
        norm,
    };
    let bound = RESIDUAL_TOL * norm.max(f64::MIN_POSITIVE);
    let worst = out.residual_min.max(out.residual_max);
    if worst > bound {
        return Err(Error::Certificate {
            residual: worst,
            bound,
        });
    }
    Ok(out)
}

/// Real symmetric path, used to cross-check measures with real even
/// Fourier coefficients.
pub fn symmetric_extremes(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::invalid("need a non-empty square matrix"));
    }
    let eig = m.clone().symmetric_eigen();
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lmin, lmax))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_hermitian() {
        let z = C64::new(0.3, -0.4);
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), z, z.conj(), C64::new(1.0, 0.0)]);
        let e = hermitian_extremes(&m).unwrap();
        assert!((e.lambda_min - 0.5).abs() < 1e-14);
        assert!((e.lambda_max - 1.5).abs() < 1e-14);
        assert!(e.residual_max < 1e-14);
    }

    #[test]
    fn rejects_non_square() {
        assert!(hermitian_extremes(&DMatrix::<C64>::zeros(2, 3)).is_err());
    }
}
