//! Oscillatory matrices `A^ε_λ(k,ℓ)` on curve patches and eigenfunctions in
//! their kernel.
//!
//! Rows are indexed by `ℓ ∈ Z` with `|ℓ| ≤ ηλ` (the constraint rows), followed
//! by guard rows `ηλ < |ℓ| ≤ 2ηλ`. The guard rows are also imposed when the
//! kernel is large enough; the head rows alone leave the transition band
//! between the constrained frequencies and the curve's own frequencies free.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::EigenfunctionCoeffs;
use crate::arith::rich_shell_near;
use crate::lattice::{enumerate_shell, LatticeShell};
use crate::measures::{bump, MeasureModel, Patch, SurfacePatch};
use crate::{Error, Result, C64};

/// Per-entry relative accuracy demanded of the trapezoid sums.
pub const ENTRY_TOL: f64 = 1e-8;
const MAX_DOUBLINGS: u32 = 12;

#[derive(Clone, Debug, Serialize)]
pub struct OscMatrix {
    pub lambda: f64,
    pub n: u64,
    pub eps: f64,
    pub eta: f64,
    pub patch: Patch,
    /// Row frequencies; the first `head_rows` satisfy `|ℓ| ≤ ηλ`.
    pub rows: Vec<i64>,
    pub head_rows: usize,
    #[serde(skip)]
    pub shell: LatticeShell,
    #[serde(skip)]
    pub entries: DMatrix<C64>,
    /// Largest `|T_k − T_{k−1}|` over entries at the final refinement.
    pub max_change: f64,
    pub max_entry: f64,
    pub nodes: usize,
    pub doublings: u32,
}

impl OscMatrix {
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn head(&self) -> DMatrix<C64> {
        self.entries.rows(0, self.head_rows).into_owned()
    }

    pub fn guard(&self) -> DMatrix<C64> {
        self.entries
            .rows(self.head_rows, self.rows.len() - self.head_rows)
            .into_owned()
    }
}

/// Row frequencies `|ℓ| ≤ ηλ`, then `ηλ < |ℓ| ≤ 2ηλ`.
fn row_frequencies(eta: f64, lambda: f64) -> (Vec<i64>, usize) {
    let h = (eta * lambda).floor() as i64;
    let g = (2.0 * eta * lambda).floor() as i64;
    let mut rows: Vec<i64> = (-h..=h).collect();
    let head = rows.len();
    for l in h + 1..=g {
        rows.push(-l);
        rows.push(l);
    }
    (rows, head)
}

/// Trapezoid contribution `Σ_j W[ℓ,t_j]·χ(t_j/ε)·e^{2πik·γ(t_j)}` over the
/// nodes `ts`.
fn node_sum(patch: &Patch, eps: f64, rows: &[i64], shell: &LatticeShell, ts: &[f64]) -> DMatrix<C64> {
    let w = DMatrix::from_fn(rows.len(), ts.len(), |i, j| {
        C64::from_polar(1.0, -2.0 * PI * rows[i] as f64 * ts[j] / (4.0 * eps))
    });
    let pts: Vec<(f64, Vec<f64>)> = ts.iter().map(|&t| (bump(t / eps), patch.point(t))).collect();
    let e = DMatrix::from_fn(ts.len(), shell.len(), |j, c| {
        let (chi, ref p) = pts[j];
        if chi == 0.0 {
            return C64::default();
        }
        let s: f64 = shell.points[c].iter().zip(p).map(|(&k, x)| k as f64 * x).sum();
        C64::from_polar(chi, 2.0 * PI * s)
    });
    w * e
}

/// `A(k,ℓ) = ∫_{−2ε}^{2ε} χ(t/ε) e^{−2πiℓt/(4ε)} e^{2πik·γ(t)} dt`, with
/// `γ(t) = base + (t, φ(t))`.
///
/// The integrand and all its derivatives vanish at `±2ε`, so the plain
/// trapezoid sums converge spectrally and are returned without
/// extrapolation.
pub fn amatrix(patch: &Patch, eps: f64, eta: f64, shell: &LatticeShell) -> Result<OscMatrix> {
    patch.validate()?;
    if !(eps > 0.0 && eps < eta) {
        return Err(Error::invalid(format!(
            "need 0 < eps < eta, got eps = {eps}, eta = {eta}"
        )));
    }
    if shell.is_empty() {
        return Err(Error::Empty("amatrix on an empty shell".into()));
    }
    if shell.d != patch.d() {
        return Err(Error::DimensionMismatch {
            expected: patch.d(),
            got: shell.d,
        });
    }
    if 2.0 * eps >= patch.domain_limit() {
        return Err(Error::invalid("patch chart does not cover the bump support"));
    }
    let lambda = shell.lambda();
    let (rows, head_rows) = row_frequencies(eta, lambda);
    let (a, b) = (-2.0 * eps, 2.0 * eps);
    let speed = patch.max_speed(2.0 * eps);
    let max_freq = lambda * speed + rows.iter().map(|l| l.abs()).max().unwrap_or(0) as f64 / (4.0 * eps);
    let mut panels = ((8.0 * max_freq * (b - a)).ceil() as usize).max(32);
    let mut h = (b - a) / panels as f64;
    let ts: Vec<f64> = (0..=panels).map(|j| a + j as f64 * h).collect();
    let mut sum = node_sum(patch, eps, &rows, shell, &ts);
    let mut prev = &sum * C64::new(h, 0.0);
    let mut nodes = ts.len();
    for k in 1..=MAX_DOUBLINGS {
        let mids: Vec<f64> = (0..panels).map(|j| a + (j as f64 + 0.5) * h).collect();
        sum += node_sum(patch, eps, &rows, shell, &mids);
        nodes += mids.len();
        panels *= 2;
        h *= 0.5;
        let cur = &sum * C64::new(h, 0.0);
        let max_entry = cur.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (mut max_change, mut worst) = (0.0, (0, 0));
        for c in 0..cur.ncols() {
            for r in 0..cur.nrows() {
                let ch = (cur[(r, c)] - prev[(r, c)]).norm();
                if ch > max_change {
                    max_change = ch;
                    worst = (r, c);
                }
            }
        }
        if max_change <= ENTRY_TOL * max_entry {
            return Ok(OscMatrix {
                lambda,
                n: shell.n,
                eps,
                eta,
                patch: patch.clone(),
                rows,
                head_rows,
                shell: shell.clone(),
                entries: cur,
                max_change,
                max_entry,
                nodes,
                doublings: k,
            });
        }
        if k == MAX_DOUBLINGS {
            return Err(Error::NonConvergence {
                context: format!(
                    "amatrix entry k = {:?}, l = {}",
                    shell.points[worst.1], rows[worst.0]
                ),
                change: max_change / max_entry.max(f64::MIN_POSITIVE),
                doublings: k,
            });
        }
        prev = cur;
    }
    unreachable!()
}

/// Orthonormal basis of the row space of `m` (columns of the returned
/// matrix) and the singular values.
fn row_space(m: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>) {
    let svd = m.adjoint().svd(true, false);
    let u = svd.u.expect("requested U");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tol = smax * 1e-12 * m.nrows().max(m.ncols()) as f64;
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > tol).collect();
    let basis = DMatrix::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])]);
    (basis, sv)
}

fn project_out(basis: &DMatrix<C64>, v: &DVector<C64>) -> DVector<C64> {
    if basis.ncols() == 0 {
        return v.clone();
    }
    v - basis * (basis.adjoint() * v)
}

#[derive(Clone, Debug, Serialize)]
pub struct NullSolution {
    pub u: EigenfunctionCoeffs,
    /// `‖A_head a‖` for the unit vector `a`.
    pub residual: f64,
    /// `‖A_guard a‖`
    pub guard_residual: f64,
    pub head_rank: usize,
    pub rows: usize,
    pub cols: usize,
    pub smallest_singular_value: f64,
    pub no_kernel: bool,
    /// Which constraint set the returned vector satisfies: `head+guard`,
    /// `head`, or `least-squares`.
    pub constraint: String,
}

/// Unit coefficient vector with `A a ≈ 0`.
///
/// When the kernel is nontrivial the Bourgain vector centred at `γ(0)` is
/// projected onto the kernel of the head and guard rows together (or the
/// head rows alone if that kernel is trivial). Otherwise the smallest right
/// singular vector of the head rows is returned and flagged.
pub fn nullspace_eigenfunction(a: &OscMatrix) -> Result<NullSolution> {
    let head = a.head();
    let guard = a.guard();
    let cols = a.cols();
    let centre = a.patch.point(0.0);
    let reference = DVector::from_iterator(
        cols,
        a.shell.points.iter().map(|k| {
            let s: f64 = k.iter().zip(&centre).map(|(&ki, x)| ki as f64 * x).sum();
            C64::from_polar(1.0, -2.0 * PI * s)
        }),
    );
    let (head_basis, head_sv) = row_space(&head);
    let head_rank = head_basis.ncols();
    let smallest_singular_value = if head.nrows() >= cols {
        head_sv.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };

    let mut chosen: Option<(DVector<C64>, &str)> = None;
    if head_rank < cols {
        let mut candidates: Vec<(DMatrix<C64>, &str)> = Vec::new();
        if a.rows.len() < cols {
            let (joint, _) = row_space(&a.entries);
            if joint.ncols() < cols {
                candidates.push((joint, "head+guard"));
            }
        }
        candidates.push((head_basis.clone(), "head"));
        'outer: for (basis, label) in &candidates {
            let starts = std::iter::once(reference.clone()).chain((0..cols).map(|i| {
                let mut e = DVector::zeros(cols);
                e[i] = C64::new(1.0, 0.0);
                e
            }));
            for v in starts {
                let p = project_out(basis, &v);
                let norm = p.norm();
                if norm > 1e-6 * v.norm() {
                    // second pass removes the roundoff left by the first
                    let p = project_out(basis, &(p / C64::new(norm, 0.0)));
                    let norm = p.norm();
                    chosen = Some((p / C64::new(norm, 0.0), label));
                    break 'outer;
                }
            }
        }
    }
    let (vec, label, no_kernel) = match chosen {
        Some((v, l)) => (v, l.to_string(), false),
        None => {
            let svd = head.clone().svd(false, true);
            let vt = svd.v_t.expect("requested V^T");
            let (imin, _) =
                svd.singular_values
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
                    );
            let v = vt.row(imin).adjoint();
            (v, "least-squares".to_string(), true)
        }
    };
    let residual = (&head * &vec).norm();
    let guard_residual = if guard.nrows() > 0 {
        (&guard * &vec).norm()
    } else {
        0.0
    };
    let u = EigenfunctionCoeffs::new(a.shell.points.clone(), vec.iter().cloned().collect())?;
    Ok(NullSolution {
        u,
        residual,
        guard_residual,
        head_rank,
        rows: head.nrows(),
        cols,
        smallest_singular_value,
        no_kernel,
        constraint: label,
    })
}

/// `∫|u|²dμ / ‖u‖²_{L²}` by direct quadrature.
pub fn vanish_audit(u: &EigenfunctionCoeffs, m: &MeasureModel) -> Result<f64> {
    Ok(m.integrate_abs_sq(u)? / u.l2_norm_sq())
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishRow {
    pub radius: f64,
    pub n: u64,
    pub lambda: f64,
    pub count: usize,
    pub rows: usize,
    pub head_rows: usize,
    pub residual: f64,
    pub guard_residual: f64,
    pub constraint: String,
    pub ratio: f64,
    pub bourgain_ratio: f64,
    pub quadrature_doublings: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishSweep {
    pub eps: f64,
    pub eta: f64,
    pub patch: Patch,
    pub rows: Vec<VanishRow>,
    pub max_residual: f64,
    pub final_ratio: f64,
    pub decreasing: bool,
    /// Smallest `ratio(λ)/ratio(2λ)` over row pairs whose `λ` at least
    /// doubles; `None` if no such pair exists.
    pub min_doubling_drop: Option<f64>,
    pub pass: bool,
}

/// Patch-mass ratios below this are indistinguishable from zero at the
/// kernel residual tolerance (the ratio scales like the residual squared).
pub const VANISH_FLOOR: f64 = ENTRY_TOL * ENTRY_TOL;

/// Null-space eigenfunctions on shells picked by `rich_shell_near` at each
/// radius, audited against the patch measure on `B_ε(γ(0)) ∩ S`.
pub fn vanish_sweep(patch: &Patch, eps: f64, eta: f64, radii: &[f64]) -> Result<VanishSweep> {
    let d = patch.d();
    let measure = MeasureModel::SurfacePatch(SurfacePatch::new(patch.clone(), eps)?);
    let centre = patch.point(0.0);
    let mut rows = Vec::new();
    for &r in radii {
        let sc = rich_shell_near(d, r, 1.0)?;
        let shell = enumerate_shell(d, sc.n as i64)?;
        let a = amatrix(patch, eps, eta, &shell)?;
        let sol = nullspace_eigenfunction(&a)?;
        let ratio = vanish_audit(&sol.u, &measure)?;
        let b = super::bourgain(&shell, &centre)?;
        let bourgain_ratio = vanish_audit(&b, &measure)?;
        rows.push(VanishRow {
            radius: r,
            n: sc.n,
            lambda: shell.lambda(),
            count: shell.len(),
            rows: a.rows.len(),
            head_rows: a.head_rows,
            residual: sol.residual,
            guard_residual: sol.guard_residual,
            constraint: sol.constraint,
            ratio,
            bourgain_ratio,
            quadrature_doublings: a.doublings,
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let final_ratio = rows.last().map_or(f64::NAN, |r| r.ratio);
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].ratio < w[0].ratio || w[1].ratio.max(w[0].ratio) <= VANISH_FLOOR);
    let mut min_doubling_drop: Option<f64> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if rows[j].lambda >= 2.0 * rows[i].lambda && rows[i].ratio > VANISH_FLOOR {
                let drop = rows[i].ratio / rows[j].ratio;
                min_doubling_drop = Some(min_doubling_drop.map_or(drop, |m: f64| m.min(drop)));
            }
        }
    }
    let pass = max_residual <= 1e-8
        && final_ratio <= 1e-3
        && decreasing
        && min_doubling_drop.is_none_or(|x| x >= 2.0);
    Ok(VanishSweep {
        eps,
        eta,
        patch: patch.clone(),
        rows,
        max_residual,
        final_ratio,
        decreasing,
        min_doubling_drop,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayAudit {
    pub lambda: f64,
    pub l_edge: i64,
    /// `max_k |A(k, ±2ηλ)| / max_k |A(k, 0)|`
    pub ratio: f64,
    pub pass: bool,
}

/// Compares the outermost guard rows `|ℓ| = ⌊2ηλ⌋` with the `ℓ = 0` row.
pub fn decay_audit(a: &OscMatrix) -> Result<DecayAudit> {
    let l_edge = *a.rows.iter().max().unwrap_or(&0);
    if l_edge == 0 {
        return Err(Error::Degenerate("no nonzero row frequencies".into()));
    }
    let row_max = |l: i64| -> f64 {
        let i = a.rows.iter().position(|&x| x == l).expect("row present");
        a.entries.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max)
    };
    let base = row_max(0);
    let edge = row_max(l_edge).max(row_max(-l_edge));
    let ratio = edge / base;
    Ok(DecayAudit {
        lambda: a.lambda,
        l_edge,
        ratio,
        pass: ratio <= 1e-6,
    })
}
