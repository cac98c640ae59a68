//! Curve patches `t ↦ base + (t, φ(t))` in `T^d` and the normalized arclength
//! measure on their intersection with a small ball.

use serde::{Deserialize, Serialize};

use crate::construct::EigenfunctionCoeffs;
use crate::quadrature::{integrate, integrate_real, QuadConfig};
use crate::{Error, Result, C64};

use super::torus_delta;

/// Graph map `φ: R → R^{d−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatchKind {
    /// `φ(t) = slopes · t`
    Line { slopes: Vec<f64> },
    /// Circle of the given radius tangent to the first axis at the base
    /// point, bending into the second coordinate: `φ(t) = (R − √(R² − t²), 0, …)`.
    CircleArc { radius: f64, d: usize },
    /// One polynomial `Σ_j c_j t^j` per output coordinate.
    Poly { coeffs: Vec<Vec<f64>> },
}

/// A one-dimensional chart of a smooth curve in `T^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub beta: u32,
    pub base: Vec<f64>,
    #[serde(flatten)]
    pub kind: PatchKind,
}

impl Patch {
    pub fn line(base: Vec<f64>, slopes: Vec<f64>) -> Result<Patch> {
        let p = Patch {
            beta: 1,
            base,
            kind: PatchKind::Line { slopes },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta != 1 {
            return Err(Error::invalid(format!(
                "only one-dimensional patches are supported, got beta = {}",
                self.beta
            )));
        }
        let d = self.d();
        if d < 3 {
            return Err(Error::invalid(format!("patches need d >= 3, got {d}")));
        }
        if self.base.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.base.len(),
            });
        }
        if let PatchKind::CircleArc { radius, .. } = self.kind {
            if !(radius > 0.0) {
                return Err(Error::invalid("circle_arc radius must be > 0"));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        match &self.kind {
            PatchKind::Line { slopes } => slopes.len() + 1,
            PatchKind::CircleArc { d, .. } => *d,
            PatchKind::Poly { coeffs } => coeffs.len() + 1,
        }
    }

    /// Largest `|t|` on which the chart is defined.
    pub fn domain_limit(&self) -> f64 {
        match self.kind {
            PatchKind::CircleArc { radius, .. } => radius,
            _ => f64::INFINITY,
        }
    }

    /// `(t, φ(t))`, relative to the base point.
    pub fn offset(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d());
        out.push(t);
        match &self.kind {
            PatchKind::Line { slopes } => out.extend(slopes.iter().map(|s| s * t)),
            PatchKind::CircleArc { radius, d } => {
                out.push(radius - (radius * radius - t * t).max(0.0).sqrt());
                out.resize(*d, 0.0);
            }
            PatchKind::Poly { coeffs } => out.extend(
                coeffs
                    .iter()
                    .map(|c| c.iter().rev().fold(0.0, |acc, &cj| acc * t + cj)),
            ),
        }
        out
    }

    /// `(1, φ'(t))`
    pub fn tangent(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d());
        out.push(1.0);
        match &self.kind {
            PatchKind::Line { slopes } => out.extend_from_slice(slopes),
            PatchKind::CircleArc { radius, d } => {
                out.push(t / (radius * radius - t * t).max(f64::MIN_POSITIVE).sqrt());
                out.resize(*d, 0.0);
            }
            PatchKind::Poly { coeffs } => out.extend(coeffs.iter().map(|c| {
                c.iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (j, &cj)| acc * t + j as f64 * cj)
            })),
        }
        out
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        self.offset(t)
            .iter()
            .zip(&self.base)
            .map(|(o, b)| o + b)
            .collect()
    }

    /// Arclength element `|(1, φ'(t))|`.
    pub fn speed(&self, t: f64) -> f64 {
        self.tangent(t).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Upper bound for the speed on `[-a, a]`, from a fine sample.
    pub fn max_speed(&self, a: f64) -> f64 {
        (0..=64)
            .map(|i| self.speed(-a + 2.0 * a * i as f64 / 64.0))
            .fold(1.0, f64::max)
            * 1.01
    }
}

/// Smooth step with `ψ = 1` on `[0, 1]` and `ψ = 0` on `[2, ∞)`.
pub fn bump_profile(r: f64) -> f64 {
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (f(2.0 - r), f(r - 1.0));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// `χ(t) = ψ(|t|)`
pub fn bump(t: f64) -> f64 {
    bump_profile(t.abs())
}

/// Normalized arclength on `B_ε(x₀) ∩ S`, where `x₀ = base + (0, φ(0))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SurfacePatchSpec", into = "SurfacePatchSpec")]
pub struct SurfacePatch {
    pub patch: Patch,
    pub eps: f64,
    /// Parameter interval `{t : |γ(t) − γ(0)| < ε}`.
    pub t_range: (f64, f64),
    /// `H¹(B_ε(x₀) ∩ S)`, the normalization constant.
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfacePatchSpec {
    pub patch: Patch,
    pub eps: f64,
}

impl From<SurfacePatch> for SurfacePatchSpec {
    fn from(s: SurfacePatch) -> Self {
        SurfacePatchSpec {
            patch: s.patch,
            eps: s.eps,
        }
    }
}

impl TryFrom<SurfacePatchSpec> for SurfacePatch {
    type Error = Error;
    fn try_from(spec: SurfacePatchSpec) -> Result<Self> {
        SurfacePatch::new(spec.patch, spec.eps)
    }
}

impl SurfacePatch {
    pub fn new(patch: Patch, eps: f64) -> Result<Self> {
        patch.validate()?;
        if !(eps > 0.0 && eps < 0.25) {
            return Err(Error::invalid(format!(
                "patch eps must lie in (0, 1/4), got {eps}"
            )));
        }
        if 2.0 * eps >= patch.domain_limit() {
            return Err(Error::invalid(format!(
                "patch chart is only defined for |t| < {}, need 2*eps < that",
                patch.domain_limit()
            )));
        }
        let o0 = patch.offset(0.0);
        let dist = |t: f64| -> f64 {
            patch
                .offset(t)
                .iter()
                .zip(&o0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        // |γ(t) − γ(0)| ≥ |t|, so the ball is reached before |t| = ε
        let grid: Vec<f64> = (0..=256).map(|i| eps * i as f64 / 256.0).collect();
        for w in grid.windows(2) {
            if dist(w[1]) < dist(w[0]) || dist(-w[1]) < dist(-w[0]) {
                return Err(Error::Degenerate(
                    "patch distance from its centre is not monotone on |t| <= eps".into(),
                ));
            }
        }
        let edge = |sign: f64| -> f64 {
            let (mut lo, mut hi) = (0.0, eps);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if dist(sign * mid) < eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            sign * lo
        };
        let t_range = (edge(-1.0), edge(1.0));
        let cfg = QuadConfig::default();
        let mass = integrate_real(|t| patch.speed(t), t_range.0, t_range.1, 0.0, &cfg)?.value;
        Ok(SurfacePatch {
            patch,
            eps,
            t_range,
            mass,
        })
    }

    pub fn d(&self) -> usize {
        self.patch.d()
    }

    pub fn center(&self) -> Vec<f64> {
        self.patch.point(0.0)
    }

    pub fn fourier_coeff(&self, k: &[i64], cfg: &QuadConfig) -> Result<C64> {
        let kn = k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        let vmax = self.patch.max_speed(self.eps);
        let q = integrate(
            |t| {
                let p = self.patch.point(t);
                let phase: f64 = k.iter().zip(&p).map(|(&ki, xi)| ki as f64 * xi).sum();
                C64::from_polar(self.patch.speed(t), -2.0 * std::f64::consts::PI * phase)
            },
            self.t_range.0,
            self.t_range.1,
            kn * vmax,
            cfg,
        )
        .map_err(|e| relabel(e, format!("surface_patch coefficient k = {k:?}")))?;
        Ok(q.value / self.mass)
    }

    pub fn ball_mass(&self, x: &[f64], r: f64, cfg: &QuadConfig) -> Result<f64> {
        let inside = |t: f64| -> bool {
            let p = self.patch.point(t);
            p.iter()
                .zip(x)
                .map(|(a, b)| torus_delta(*a, *b).powi(2))
                .sum::<f64>()
                < r * r
        };
        let (a, b) = self.t_range;
        let steps = 4096;
        let grid: Vec<f64> = (0..=steps)
            .map(|i| a + (b - a) * i as f64 / steps as f64)
            .collect();
        let refine = |mut lo: f64, mut hi: f64| -> f64 {
            // lo and hi differ in membership
            let lo_in = inside(lo);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if inside(mid) == lo_in {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mut total = 0.0;
        let mut start = if inside(a) { Some(a) } else { None };
        for w in grid.windows(2) {
            let (i0, i1) = (inside(w[0]), inside(w[1]));
            if i0 != i1 {
                let edge = refine(w[0], w[1]);
                if i1 {
                    start = Some(edge);
                } else if let Some(s) = start.take() {
                    total += integrate_real(|t| self.patch.speed(t), s, edge, 0.0, cfg)?.value;
                }
            }
        }
        if let Some(s) = start {
            total += integrate_real(|t| self.patch.speed(t), s, b, 0.0, cfg)?.value;
        }
        Ok(total / self.mass)
    }

    /// `∫ |u|² dμ` by quadrature along the curve.
    pub fn integrate_abs_sq(&self, u: &EigenfunctionCoeffs, cfg: &QuadConfig) -> Result<f64> {
        let vmax = self.patch.max_speed(self.eps);
        let q = integrate_real(
            |t| u.eval(&self.patch.point(t)).norm_sqr() * self.patch.speed(t),
            self.t_range.0,
            self.t_range.1,
            2.0 * u.max_frequency() * vmax,
            cfg,
        )?;
        Ok(q.value / self.mass)
    }
}

pub(crate) fn relabel(e: Error, context: String) -> Error {
    match e {
        Error::NonConvergence {
            change, doublings, ..
        } => Error::NonConvergence {
            context,
            change,
            doublings,
        },
        other => other,
    }
}
