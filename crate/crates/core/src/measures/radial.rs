//! Periodized power densities `C·Σ_q φ_ε(x+q)`, `φ_ε(x) = e^{−|x|²}/|x|^{2+ε}`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::quadrature::{bessel_jn, integrate_real, QuadConfig};
use crate::{Error, Result};

/// Upper end of the radial integral; `e^{−49}` is below double precision
/// relative to the bulk.
const R_CUT: f64 = 7.0;
/// Lattice sum range `|q|_∞ ≤ 6` for pointwise density values.
const LATTICE_RANGE: i64 = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PowerSpec", into = "PowerSpec")]
pub struct PeriodizedPower {
    pub d: usize,
    pub eps: f64,
    /// `∫_0^∞ e^{−r²} r^{d−3−ε} dr = Γ((d−2−ε)/2)/2`, by the same quadrature
    /// path as the coefficients.
    pub radial_mass: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerSpec {
    pub d: usize,
    pub eps: f64,
}

impl From<PeriodizedPower> for PowerSpec {
    fn from(p: PeriodizedPower) -> Self {
        PowerSpec { d: p.d, eps: p.eps }
    }
}

impl TryFrom<PowerSpec> for PeriodizedPower {
    type Error = Error;
    fn try_from(s: PowerSpec) -> Result<Self> {
        PeriodizedPower::new(s.d, s.eps)
    }
}

/// Fourier transform of normalized surface measure on `S^{d−1}` at radius
/// `z`: `sin z / z` for `d = 3`, `2J₁(z)/z` for `d = 4`,
/// `3(sin z − z cos z)/z³` for `d = 5`.
fn sphere_kernel(d: usize, z: f64, cfg: &QuadConfig) -> Result<f64> {
    let z2 = z * z;
    Ok(match d {
        3 => {
            if z.abs() < 1e-4 {
                1.0 - z2 / 6.0 + z2 * z2 / 120.0
            } else {
                z.sin() / z
            }
        }
        4 => {
            if z.abs() < 1e-4 {
                1.0 - z2 / 8.0 + z2 * z2 / 192.0
            } else {
                2.0 * bessel_jn(1, z, cfg)?.value / z
            }
        }
        5 => {
            if z.abs() < 1e-2 {
                1.0 - z2 / 10.0 + z2 * z2 / 280.0 - z2 * z2 * z2 / 15120.0
            } else {
                3.0 * (z.sin() - z * z.cos()) / (z2 * z)
            }
        }
        _ => unreachable!("dimension checked at construction"),
    })
}

impl PeriodizedPower {
    pub fn new(d: usize, eps: f64) -> Result<Self> {
        if !(3..=5).contains(&d) {
            return Err(Error::Unsupported {
                op: "periodized_power",
                variant: "dimension outside 3..=5",
            });
        }
        if !(eps > 0.0 && eps < (d as f64 - 2.0)) {
            return Err(Error::invalid(format!(
                "periodized_power needs 0 < eps < d - 2, got eps = {eps}"
            )));
        }
        let mut p = PeriodizedPower {
            d,
            eps,
            radial_mass: 1.0,
        };
        p.radial_mass = p.radial_transform(0.0, &QuadConfig::default())?;
        Ok(p)
    }

    /// `∫_0^∞ e^{−r²} r^{d−3−ε} K_d(2πρr) dr`. The inner piece `[0,1]` uses
    /// `r = s^p`, `p = 1/(d−2−ε)`, which turns the power weight into `p·ds`.
    pub fn radial_transform(&self, rho: f64, cfg: &QuadConfig) -> Result<f64> {
        let d = self.d;
        let a = d as f64 - 2.0 - self.eps;
        let p = 1.0 / a;
        let w = 2.0 * PI * rho;
        let err = std::cell::Cell::new(None);
        let kern = |z: f64| match sphere_kernel(d, z, cfg) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        };
        let inner = integrate_real(
            |s| {
                let r = s.powf(p);
                (-r * r).exp() * kern(w * r)
            },
            0.0,
            1.0,
            rho * p.max(1.0),
            cfg,
        )?;
        let outer = integrate_real(
            |r| (-r * r).exp() * r.powf(a - 1.0) * kern(w * r),
            1.0,
            R_CUT,
            rho,
            cfg,
        )?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        Ok(p * inner.value + outer.value)
    }

    /// `μ̂_k` for `|k| = rho`.
    pub fn coefficient(&self, rho: f64, cfg: &QuadConfig) -> Result<f64> {
        if rho == 0.0 {
            return Ok(1.0);
        }
        Ok(self.radial_transform(rho, cfg)? / self.radial_mass)
    }

    /// `|S^{d−1}|`
    fn sphere_area(&self) -> f64 {
        match self.d {
            3 => 4.0 * PI,
            4 => 2.0 * PI * PI,
            _ => 8.0 * PI * PI / 3.0,
        }
    }

    /// Pointwise density, lattice sum truncated at `|q|_∞ ≤ 6`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        let side = (2 * LATTICE_RANGE + 1) as usize;
        let total = side.pow(self.d as u32);
        let mut sum = 0.0;
        for idx in 0..total {
            let mut rem = idx;
            let mut r2 = 0.0;
            for xi in x {
                let q = (rem % side) as i64 - LATTICE_RANGE;
                rem /= side;
                let y = xi + q as f64;
                r2 += y * y;
            }
            if r2 == 0.0 {
                return Ok(f64::INFINITY);
            }
            sum += (-r2).exp() / r2.powf(1.0 + 0.5 * self.eps);
        }
        Ok(sum / (self.sphere_area() * self.radial_mass))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lanczos_gamma(x: f64) -> f64 {
        // Lanczos, g = 7
        const C: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        let x = x - 1.0;
        let t = x + 7.5;
        let mut a = C[0];
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }

    #[test]
    fn normalization_matches_gamma() {
        for (d, eps) in [(3, 0.5), (3, 0.2), (5, 1.5)] {
            let p = PeriodizedPower::new(d, eps).unwrap();
            let want = lanczos_gamma((d as f64 - 2.0 - eps) / 2.0) / 2.0;
            assert!(
                (p.radial_mass - want).abs() < 1e-8 * want,
                "d={d} eps={eps}: {} vs {want}",
                p.radial_mass
            );
        }
    }

    #[test]
    fn coefficients_decay_and_bounded() {
        let p = PeriodizedPower::new(3, 0.5).unwrap();
        let cfg = QuadConfig::default();
        let mut last = 1.0;
        for rho in [1.0f64, 2.0, 4.0, 8.0, 16.0] {
            let c = p.coefficient(rho, &cfg).unwrap();
            assert!(c > 0.0 && c < last);
            last = c;
        }
    }

    #[test]
    fn density_is_periodic_and_even() {
        let p = PeriodizedPower::new(3, 0.5).unwrap();
        let x = [0.13, 0.31, -0.2];
        let a = p.density(&x).unwrap();
        let b = p.density(&[x[0] + 1.0, x[1], x[2]]).unwrap();
        let c = p.density(&[-x[0], -x[1], -x[2]]).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-12 * a);
        assert!((a - c).abs() < 1e-12 * a);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PeriodizedPower::new(2, 0.5).is_err());
        assert!(PeriodizedPower::new(3, 1.0).is_err());
        assert!(PeriodizedPower::new(3, 0.0).is_err());
    }
}
