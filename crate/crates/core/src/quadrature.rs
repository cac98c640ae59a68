//! Composite trapezoid quadrature with step doubling and one level of
//! Richardson extrapolation.
//!
//! The initial grid resolves the fastest phase of the integrand with
//! `nyquist` samples per period. Each doubling only evaluates the new
//! midpoints. Convergence is declared when two successive trapezoid sums
//! differ by at most `rel_tol · ∫|f|`; the returned value is the Richardson
//! combination `(4T_k − T_{k−1})/3`. Measuring the change against `∫|f|`
//! rather than `|∫f|` keeps strongly cancelling oscillatory integrals
//! from being reported as non-convergent.

use serde::Serialize;

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub max_doublings: u32,
    /// Samples per period of the fastest phase on the initial grid.
    pub nyquist: f64,
    pub min_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-8,
            max_doublings: 22,
            nyquist: 8.0,
            min_panels: 16,
        }
    }
}

/// Value with its convergence certificate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Quad<T> {
    pub value: T,
    pub doublings: u32,
    /// Final `|T_k − T_{k−1}| / ∫|f|`.
    pub change: f64,
    pub evaluations: usize,
}

impl<T> Quad<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Quad<U> {
        Quad {
            value: f(self.value),
            doublings: self.doublings,
            change: self.change,
            evaluations: self.evaluations,
        }
    }
}

/// `∫_a^b f`, where `max_freq` bounds the phase frequency of `f` in cycles
/// per unit length.
pub fn integrate<F>(f: F, a: f64, b: f64, max_freq: f64, cfg: &QuadConfig) -> Result<Quad<C64>>
where
    F: Fn(f64) -> C64,
{
    if !(b > a) {
        return Ok(Quad {
            value: C64::new(0.0, 0.0),
            doublings: 0,
            change: 0.0,
            evaluations: 0,
        });
    }
    let len = b - a;
    let mut panels = ((cfg.nyquist * max_freq.abs() * len).ceil() as usize).max(cfg.min_panels);
    let mut h = len / panels as f64;

    let (fa, fb) = (f(a), f(b));
    let mut sum = (fa + fb) * 0.5;
    let mut abs_sum = (fa.norm() + fb.norm()) * 0.5;
    for i in 1..panels {
        let v = f(a + i as f64 * h);
        sum += v;
        abs_sum += v.norm();
    }
    let mut evaluations = panels + 1;
    let mut t_prev = sum * h;
    let mut change = f64::INFINITY;

    for k in 1..=cfg.max_doublings {
        let mut mid = C64::new(0.0, 0.0);
        for i in 0..panels {
            let v = f(a + (i as f64 + 0.5) * h);
            mid += v;
            abs_sum += v.norm();
        }
        evaluations += panels;
        sum += mid;
        panels *= 2;
        h *= 0.5;
        let t = sum * h;
        let scale = (abs_sum * h).max(f64::MIN_POSITIVE);
        change = (t - t_prev).norm() / scale;
        if change <= cfg.rel_tol || (t - t_prev).norm() == 0.0 {
            return Ok(Quad {
                value: (t * 4.0 - t_prev) / 3.0,
                doublings: k,
                change,
                evaluations,
            });
        }
        t_prev = t;
    }
    Err(Error::NonConvergence {
        context: format!("integral over [{a}, {b}]"),
        change,
        doublings: cfg.max_doublings,
    })
}

pub fn integrate_real<F>(f: F, a: f64, b: f64, max_freq: f64, cfg: &QuadConfig) -> Result<Quad<f64>>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| C64::new(f(x), 0.0), a, b, max_freq, cfg).map(|q| q.map(|v| v.re))
}

/// Tensor-product version over `[a0,b0] × [a1,b1]`, doubling both axes
/// together.
pub fn integrate_2d<F>(
    f: F,
    (a0, b0): (f64, f64),
    (a1, b1): (f64, f64),
    max_freq: (f64, f64),
    cfg: &QuadConfig,
) -> Result<Quad<C64>>
where
    F: Fn(f64, f64) -> C64,
{
    let panels0 = ((cfg.nyquist * max_freq.0.abs() * (b0 - a0)).ceil() as usize).max(cfg.min_panels);
    let panels1 = ((cfg.nyquist * max_freq.1.abs() * (b1 - a1)).ceil() as usize).max(cfg.min_panels);
    let trap = |p0: usize, p1: usize| -> (C64, f64) {
        let (h0, h1) = ((b0 - a0) / p0 as f64, (b1 - a1) / p1 as f64);
        let mut s = C64::new(0.0, 0.0);
        let mut s_abs = 0.0;
        for i in 0..=p0 {
            let w0 = if i == 0 || i == p0 { 0.5 } else { 1.0 };
            let x = a0 + i as f64 * h0;
            for j in 0..=p1 {
                let w1 = if j == 0 || j == p1 { 0.5 } else { 1.0 };
                let v = f(x, a1 + j as f64 * h1);
                s += v * (w0 * w1);
                s_abs += v.norm() * w0 * w1;
            }
        }
        (s * (h0 * h1), s_abs * h0 * h1)
    };
    let (mut t_prev, _) = trap(panels0, panels1);
    let mut evaluations = (panels0 + 1) * (panels1 + 1);
    let mut change = f64::INFINITY;
    // 2D grids grow 4x per doubling, so the budget is much tighter than 1D
    let max_doublings = cfg.max_doublings.min(10);
    for k in 1..=max_doublings {
        let (p0, p1) = (panels0 << k, panels1 << k);
        let (t, abs) = trap(p0, p1);
        evaluations += (p0 + 1) * (p1 + 1);
        change = (t - t_prev).norm() / abs.max(f64::MIN_POSITIVE);
        if change <= cfg.rel_tol || (t - t_prev).norm() == 0.0 {
            return Ok(Quad {
                value: (t * 4.0 - t_prev) / 3.0,
                doublings: k,
                change,
                evaluations,
            });
        }
        t_prev = t;
    }
    Err(Error::NonConvergence {
        context: "2D integral".into(),
        change,
        doublings: max_doublings,
    })
}

/// Bessel function `J₀(z) = (1/π)∫₀^π cos(z sin θ) dθ`.
pub fn bessel_j0(z: f64, cfg: &QuadConfig) -> Result<Quad<f64>> {
    bessel_jn(0, z, cfg)
}

/// Integer-order Bessel function `J_n(z) = (1/π)∫₀^π cos(nθ − z sin θ) dθ`.
pub fn bessel_jn(order: u32, z: f64, cfg: &QuadConfig) -> Result<Quad<f64>> {
    let nu = order as f64;
    let freq = (z.abs() + nu) / (2.0 * std::f64::consts::PI);
    integrate_real(
        |t| (nu * t - z * t.sin()).cos(),
        0.0,
        std::f64::consts::PI,
        freq,
        cfg,
    )
    .map(|q| q.map(|v| v / std::f64::consts::PI))
}

/// Sum of a slice by recursive halving; result does not depend on thread
/// count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}
