//! Lattice shells `Z^d ∩ λS^{d−1}` and their geometry.

mod cluster;
mod exact;

pub use cluster::{
    cluster_decompose, cluster_decompose_with, jarnik_audit, Cluster, ClusterDecomposition, ClusterOptions,
    JarnikReport, UnionFind,
};
pub use exact::{affine_dimension, circumsphere, Circumsphere};

use serde::Serialize;

use crate::arith::{self, isqrt};
use crate::{Error, Freq, Result};

/// Default refusal threshold for [`enumerate_shell`].
pub const DEFAULT_POINT_CAP: u64 = 1_000_000;

/// All integer points of `Z^d` with `|k|² = n`, sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeShell {
    pub d: usize,
    pub n: u64,
    pub points: Vec<Freq>,
}

impl LatticeShell {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    /// Embeds the shell into `Z^dim` by zero-padding trailing coordinates.
    pub fn embed(&self, dim: usize) -> Result<LatticeShell> {
        if dim < self.d {
            return Err(Error::invalid(format!(
                "cannot embed dimension {} into {dim}",
                self.d
            )));
        }
        let mut points: Vec<Freq> = self
            .points
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.resize(dim, 0);
                q
            })
            .collect();
        points.sort();
        Ok(LatticeShell {
            d: dim,
            n: self.n,
            points,
        })
    }
}

/// Exhaustive enumeration with the default cap of 10⁶ points.
pub fn enumerate_shell(d: usize, n: i64) -> Result<LatticeShell> {
    enumerate_shell_capped(d, n, DEFAULT_POINT_CAP)
}

/// Exhaustive enumeration; refuses when the predicted point count exceeds
/// `cap`.
pub fn enumerate_shell_capped(d: usize, n: i64, cap: u64) -> Result<LatticeShell> {
    let predicted = arith::sum_of_squares_count(d, n)?;
    if predicted.count > cap {
        return Err(Error::Resource {
            what: "shell points",
            requested: predicted.count,
            cap,
        });
    }
    let n = predicted.n;
    let mut points = Vec::with_capacity(predicted.count as usize);
    let mut prefix = Vec::with_capacity(d);
    enumerate_rec(d, n, &mut prefix, &mut points);
    points.sort();
    debug_assert_eq!(points.len() as u64, predicted.count);
    Ok(LatticeShell { d, n, points })
}

fn enumerate_rec(left: usize, rem: u64, prefix: &mut Vec<i64>, out: &mut Vec<Freq>) {
    if left == 1 {
        if rem == 0 {
            let mut p = prefix.clone();
            p.push(0);
            out.push(p);
        } else {
            let r = isqrt(rem);
            if r * r == rem {
                for s in [-(r as i64), r as i64] {
                    let mut p = prefix.clone();
                    p.push(s);
                    out.push(p);
                }
            }
        }
        return;
    }
    let r = isqrt(rem) as i64;
    for x in -r..=r {
        prefix.push(x);
        enumerate_rec(left - 1, rem - (x * x) as u64, prefix, out);
        prefix.pop();
    }
}

pub(crate) fn dist_sq(p: &[i64], q: &[i64]) -> i64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Largest number of shell points in a closed ball `B_r(x₀)`, with `x₀`
/// ranging over the shell points themselves. This only estimates the
/// supremum over all centres in `R^d` from below.
pub fn cap_count(shell: &LatticeShell, r: f64) -> Result<usize> {
    if shell.is_empty() {
        return Err(Error::Empty("cap_count on an empty shell".into()));
    }
    if !(r > 0.0) {
        return Err(Error::invalid(format!("radius must be > 0, got {r}")));
    }
    let r2 = r * r;
    Ok(shell
        .points
        .iter()
        .map(|c| {
            shell
                .points
                .iter()
                .filter(|p| (dist_sq(c, p) as f64) <= r2)
                .count()
        })
        .max()
        .unwrap_or(0))
}
