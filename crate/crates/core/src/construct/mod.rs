//! Explicit eigenfunctions: Bourgain concentration functions, cylinder
//! witnesses, and null-space eigenfunctions vanishing on curve patches.

mod null;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::jacobi_count;
use crate::lattice::{enumerate_shell, LatticeShell};
use crate::measures::MeasureModel;
use crate::quadform::assemble_gram;
use crate::{Error, Freq, Result, C64};

pub use null::{
    amatrix, decay_audit, nullspace_eigenfunction, vanish_audit, vanish_sweep, DecayAudit, NullSolution,
    OscMatrix, VanishRow, VanishSweep, VANISH_FLOOR,
};

/// `u(x) = Σ_k û_k e^{2πik·x}` over a finite frequency set.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenfunctionCoeffs {
    pub freqs: Vec<Freq>,
    pub coeffs: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CoeffEntry {
    k: Freq,
    re: f64,
    im: f64,
}

impl Serialize for EigenfunctionCoeffs {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<CoeffEntry> = self
            .freqs
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| CoeffEntry {
                k: k.clone(),
                re: c.re,
                im: c.im,
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EigenfunctionCoeffs {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<CoeffEntry>::deserialize(de)?;
        let (freqs, coeffs) = entries.into_iter().map(|e| (e.k, C64::new(e.re, e.im))).unzip();
        EigenfunctionCoeffs::new(freqs, coeffs).map_err(serde::de::Error::custom)
    }
}

impl EigenfunctionCoeffs {
    pub fn new(freqs: Vec<Freq>, coeffs: Vec<C64>) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: freqs.len(),
                got: coeffs.len(),
            });
        }
        if freqs.is_empty() {
            return Err(Error::Empty("eigenfunction without frequencies".into()));
        }
        let d = freqs[0].len();
        if let Some(k) = freqs.iter().find(|k| k.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: k.len(),
            });
        }
        Ok(EigenfunctionCoeffs { freqs, coeffs })
    }

    pub fn d(&self) -> usize {
        self.freqs[0].len()
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        self.freqs
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| {
                let s: f64 = k.iter().zip(x).map(|(&ki, xi)| ki as f64 * xi).sum();
                c * C64::from_polar(1.0, 2.0 * PI * s)
            })
            .sum()
    }

    /// `‖u‖²_{L²(dx)} = Σ|û_k|²`
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|k|`.
    pub fn max_frequency(&self) -> f64 {
        self.freqs
            .iter()
            .map(|k| k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> Self {
        let s = self.l2_norm_sq().sqrt();
        EigenfunctionCoeffs {
            freqs: self.freqs.clone(),
            coeffs: self.coeffs.iter().map(|c| c / s).collect(),
        }
    }
}

/// `φ_{λ,x₀}(x) = Σ_k e^{2πik·(x−x₀)}`
pub fn bourgain(shell: &LatticeShell, x0: &[f64]) -> Result<EigenfunctionCoeffs> {
    if shell.is_empty() {
        return Err(Error::Empty("bourgain on an empty shell".into()));
    }
    if x0.len() != shell.d {
        return Err(Error::DimensionMismatch {
            expected: shell.d,
            got: x0.len(),
        });
    }
    let coeffs = shell
        .points
        .iter()
        .map(|k| {
            let s: f64 = k.iter().zip(x0).map(|(&ki, xi)| ki as f64 * xi).sum();
            C64::from_polar(1.0, -2.0 * PI * s)
        })
        .collect();
    EigenfunctionCoeffs::new(shell.points.clone(), coeffs)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub d: usize,
    pub n: u64,
    pub count: usize,
    pub c0: f64,
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    /// `min |u(x)| / N` over the samples.
    pub min_ratio: f64,
    /// Samples with `|u(x)| < N/2`, at most ten listed.
    pub violations: Vec<Vec<f64>>,
    pub violation_count: usize,
    pub pass: bool,
}

/// Sign-flip orbit of a shell: nonnegative representatives with
/// multiplicity `2^{#nonzero}`.
fn orbit_representatives(shell: &LatticeShell) -> Vec<(Vec<usize>, f64)> {
    shell
        .points
        .iter()
        .filter(|k| k.iter().all(|&x| x >= 0))
        .map(|k| {
            let nz = k.iter().filter(|&&x| x != 0).count();
            (k.iter().map(|&x| x as usize).collect(), (1u64 << nz) as f64)
        })
        .collect()
}

/// Checks `|φ_{λ,x₀}(x)| ≥ N/2` at uniform samples of `B_{c0/λ}(x₀)`.
///
/// The shell is closed under coordinate sign flips, so
/// `φ(x₀ + y) = Σ_k Π_i cos(2πk_i y_i)`; the cosines come from a recurrence
/// table per sample.
pub fn concentration_check(
    shell: &LatticeShell,
    x0: &[f64],
    c0: f64,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if shell.is_empty() {
        return Err(Error::Empty("concentration_check on an empty shell".into()));
    }
    if x0.len() != shell.d {
        return Err(Error::DimensionMismatch {
            expected: shell.d,
            got: x0.len(),
        });
    }
    if !(c0 > 0.0) {
        return Err(Error::invalid(format!("c0 must be > 0, got {c0}")));
    }
    let d = shell.d;
    let lambda = shell.lambda().max(1.0);
    let radius = c0 / lambda;
    let count = shell.len();
    let reps = orbit_representatives(shell);
    let kmax = crate::arith::isqrt(shell.n) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConcentrationReport {
        d,
        n: shell.n,
        count,
        c0,
        radius,
        samples,
        seed,
        min_ratio: f64::INFINITY,
        violations: Vec::new(),
        violation_count: 0,
        pass: true,
    };
    let mut table = vec![vec![0.0; kmax + 1]; d];
    let mut y = vec![0.0; d];
    for _ in 0..samples {
        loop {
            for yi in y.iter_mut() {
                *yi = rng.gen_range(-1.0..1.0);
            }
            if y.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                break;
            }
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi *= radius;
            let c1 = (2.0 * PI * *yi).cos();
            let row = &mut table[i];
            row[0] = 1.0;
            if kmax >= 1 {
                row[1] = c1;
            }
            for j in 2..=kmax {
                row[j] = 2.0 * c1 * row[j - 1] - row[j - 2];
            }
        }
        let value: f64 = reps
            .iter()
            .map(|(k, mult)| mult * k.iter().enumerate().map(|(i, &ki)| table[i][ki]).product::<f64>())
            .sum();
        let ratio = value.abs() / count as f64;
        report.min_ratio = report.min_ratio.min(ratio);
        if ratio < 0.5 {
            report.violation_count += 1;
            if report.violations.len() < 10 {
                report
                    .violations
                    .push(y.iter().zip(x0).map(|(a, b)| a + b).collect());
            }
        }
    }
    report.pass = report.violation_count == 0;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct FrostmanRow {
    pub n: u64,
    pub count: usize,
    pub r: f64,
    pub mass: f64,
    /// `4·v*Mv/N²` for the Bourgain function at `x₀`.
    pub form_bound: f64,
    /// `lambda_max / N`
    pub bound: f64,
    /// `4·lambda_max / N`
    pub trace_bound: f64,
    /// `N·μ(B_r)/4`, a lower bound for `lambda_max`.
    pub implied_lambda_max: f64,
    pub lambda_max: f64,
    pub chain_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrostmanReport {
    pub d: usize,
    pub c0: f64,
    pub x0: Vec<f64>,
    pub measure: String,
    pub rows: Vec<FrostmanRow>,
    pub pass: bool,
}

/// For each nonempty shell, compares `μ(B_{c0/λ}(x₀))` with
/// `4·v*Mv/N² ≤ 4·lambda_max/N`.
pub fn frostman_audit(m: &MeasureModel, d: usize, ns: &[u64], x0: &[f64], c0: f64) -> Result<FrostmanReport> {
    if m.d() != d || x0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if m.d() != d { m.d() } else { x0.len() },
        });
    }
    let mut rows = Vec::new();
    for &n in ns {
        let shell = enumerate_shell(d, n as i64)?;
        if shell.is_empty() {
            continue;
        }
        let count = shell.len();
        let r = c0 / shell.lambda().max(1.0);
        let mass = m.ball_mass(x0, r)?;
        let u = bourgain(&shell, x0)?;
        let g = assemble_gram(&shell.points, m)?;
        let form = g.quadratic_form(&u.coeffs)?;
        let nf = count as f64;
        let form_bound = 4.0 * form / (nf * nf);
        let lmax = g.lambda_max();
        let trace_bound = 4.0 * lmax / nf;
        let tol = 1e-8 * trace_bound.abs().max(1.0);
        rows.push(FrostmanRow {
            n,
            count,
            r,
            mass,
            form_bound,
            bound: lmax / nf,
            trace_bound,
            implied_lambda_max: nf * mass / 4.0,
            lambda_max: lmax,
            chain_holds: mass <= form_bound + tol && form_bound <= trace_bound + tol,
        });
    }
    let pass = rows.iter().all(|r| r.chain_holds);
    Ok(FrostmanReport {
        d,
        c0,
        x0: x0.to_vec(),
        measure: m.to_json(),
        rows,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CylinderReport {
    pub n: u64,
    pub d: usize,
    pub ratio: f64,
    pub expected: u64,
    pub relative_error: f64,
    pub pass: bool,
}

/// `g(x) = Σ_{(k₁,k₂) ∈ S¹_λ} e^{2πi(k₁x₁+k₂x₂)}` against the measure
/// supported on `{x₁ = x₂ = 0}`.
pub fn cylinder_witness(n: u64, d: usize) -> Result<CylinderReport> {
    if d < 3 {
        return Err(Error::invalid(format!("cylinder witness needs d >= 3, got {d}")));
    }
    let plane = enumerate_shell(2, n as i64)?;
    if plane.is_empty() {
        return Err(Error::Empty(format!(
            "no lattice points on the circle of radius sqrt({n})"
        )));
    }
    let freqs = plane.embed(d)?.points;
    let coeffs = vec![C64::new(1.0, 0.0); freqs.len()];
    let u = EigenfunctionCoeffs::new(freqs, coeffs)?;
    let m = MeasureModel::HyperplaneCylinder {
        d,
        vanishing: vec![1, 2],
    };
    let g = assemble_gram(&u.freqs, &m)?;
    let ratio = g.quadratic_form(&u.coeffs)? / u.l2_norm_sq();
    let expected = jacobi_count(n as i64)?;
    let relative_error = (ratio - expected as f64).abs() / expected as f64;
    Ok(CylinderReport {
        n,
        d,
        ratio,
        expected,
        relative_error,
        pass: relative_error <= 1e-8 && expected == plane.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bourgain_peak() {
        let s = enumerate_shell(2, 25).unwrap();
        let u = bourgain(&s, &[0.0, 0.0]).unwrap();
        assert!(u.coeffs.iter().all(|c| *c == C64::new(1.0, 0.0)));
        assert!((u.eval(&[0.0, 0.0]).re - 12.0).abs() < 1e-12);
        let v = bourgain(&s, &[0.5, 0.0]).unwrap();
        assert!((v.eval(&[0.5, 0.0]) - C64::new(12.0, 0.0)).norm() < 1e-12);
        assert!((v.l2_norm_sq() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_form_is_peak_squared() {
        let s = enumerate_shell(3, 9).unwrap();
        let x0 = [0.2, 0.7, 0.1];
        let u = bourgain(&s, &x0).unwrap();
        let m = MeasureModel::Dirac {
            d: 3,
            x0: x0.to_vec(),
        };
        let g = assemble_gram(&s.points, &m).unwrap();
        let n = s.len() as f64;
        assert!((g.quadratic_form(&u.coeffs).unwrap() - n * n).abs() < 1e-9 * n * n);
    }

    #[test]
    fn concentration_matches_direct_evaluation() {
        let s = enumerate_shell(3, 11).unwrap();
        let x0 = [0.3, 0.1, 0.9];
        let r = concentration_check(&s, &x0, 1.0 / 6.0, 200, 7).unwrap();
        assert!(r.pass);
        assert!(r.min_ratio >= 0.5);
        let bad = concentration_check(&s, &x0, 2.0, 500, 7).unwrap();
        assert!(!bad.pass);
        let u = bourgain(&s, &x0).unwrap();
        let direct = u.eval(&bad.violations[0]).norm() / s.len() as f64;
        assert!(direct < 0.5 + 1e-9);
    }

    #[test]
    fn concentration_is_seeded() {
        let s = enumerate_shell(2, 25).unwrap();
        let a = concentration_check(&s, &[0.0, 0.0], 1.0 / 6.0, 100, 3).unwrap();
        let b = concentration_check(&s, &[0.0, 0.0], 1.0 / 6.0, 100, 3).unwrap();
        assert_eq!(a.min_ratio, b.min_ratio);
    }

    #[test]
    fn cylinder_examples() {
        for (n, d, want) in [(25, 3, 12.0), (65, 3, 16.0), (1105, 4, 32.0)] {
            let r = cylinder_witness(n, d).unwrap();
            assert!(r.pass);
            assert!((r.ratio - want).abs() < 1e-8 * want);
        }
        assert!(cylinder_witness(3, 3).is_err());
    }

    #[test]
    fn frostman_dirac_violates_trace() {
        let m = MeasureModel::Dirac {
            d: 3,
            x0: vec![0.0; 3],
        };
        let r = frostman_audit(&m, 3, &[9, 25, 50], &[0.0; 3], 1.0 / 6.0).unwrap();
        assert!(r.pass);
        for row in &r.rows {
            assert_eq!(row.mass, 1.0);
            assert!((row.trace_bound - 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn coeffs_json_roundtrip() {
        let u = EigenfunctionCoeffs::new(
            vec![vec![1, 0], vec![0, 1]],
            vec![C64::new(0.5, -1.0), C64::new(2.0, 0.0)],
        )
        .unwrap();
        let text = serde_json::to_string(&u).unwrap();
        assert_eq!(
            text,
            r#"[{"k":[1,0],"re":0.5,"im":-1.0},{"k":[0,1],"re":2.0,"im":0.0}]"#
        );
        let back: EigenfunctionCoeffs = serde_json::from_str(&text).unwrap();
        assert_eq!(back, u);
    }
}
