//! Gram matrices `M = [μ̂_{k−ℓ}]` over frequency sets and their extremal
//! eigenvalues.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{hermitian_extremes, Extremes};
use crate::lattice::{cluster_decompose_with, enumerate_shell, ClusterOptions};
use crate::measures::MeasureModel;
use crate::quadrature::QuadConfig;
use crate::{Error, Freq, Result, C64};

pub const DEFAULT_GRAM_CAP: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct GramSpectrum {
    pub freqs: Vec<Freq>,
    /// Canonical JSON of the measure.
    pub measure: String,
    #[serde(skip)]
    pub matrix: DMatrix<C64>,
    #[serde(flatten)]
    pub extremes: Extremes,
    /// Distinct coefficients evaluated after symmetry reduction.
    pub distinct_coefficients: usize,
}

impl GramSpectrum {
    pub fn lambda_min(&self) -> f64 {
        self.extremes.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.extremes.lambda_max
    }

    /// `v* M v`
    pub fn quadratic_form(&self, v: &[C64]) -> Result<f64> {
        quadratic_form(&self.matrix, v)
    }
}

pub fn quadratic_form(m: &DMatrix<C64>, v: &[C64]) -> Result<f64> {
    if v.len() != m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: v.len(),
        });
    }
    let mut acc = C64::default();
    for i in 0..v.len() {
        let mut row = C64::default();
        for j in 0..v.len() {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    Ok(acc.re)
}

fn difference(a: &[i64], b: &[i64]) -> Freq {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Hermitian matrix `[μ̂_{F_i − F_j}]`. Each coefficient is evaluated once
/// per `±` pair of differences, so the result is exactly Hermitian.
pub fn gram_matrix(freqs: &[Freq], m: &MeasureModel, cap: usize) -> Result<(DMatrix<C64>, usize)> {
    let n = freqs.len();
    if n == 0 {
        return Err(Error::Empty("gram matrix over an empty frequency set".into()));
    }
    if n > cap {
        return Err(Error::Resource {
            what: "gram matrix size",
            requested: n as u64,
            cap: cap as u64,
        });
    }
    let d = m.d();
    if let Some(bad) = freqs.iter().find(|k| k.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let mut index: HashMap<Freq, usize> = HashMap::new();
    let mut keys: Vec<Freq> = Vec::new();
    let zero = vec![0i64; d];
    index.insert(zero.clone(), 0);
    keys.push(zero);
    let mut slots = vec![(0usize, false); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let diff = difference(&freqs[i], &freqs[j]);
            let neg: Freq = diff.iter().map(|x| -x).collect();
            // canonical representative is the lexicographically larger one
            let (key, conj) = if diff >= neg { (diff, false) } else { (neg, true) };
            let next = keys.len();
            let slot = *index.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                next
            });
            slots[i * n + j] = (slot, conj);
        }
    }
    let cfg = QuadConfig::default();
    let values: Vec<C64> = keys
        .par_iter()
        .map(|k| m.fourier_coeff_with(k, &cfg))
        .collect::<Result<_>>()?;
    let mut mat = DMatrix::from_element(n, n, values[0]);
    for i in 0..n {
        for j in i + 1..n {
            let (slot, conj) = slots[i * n + j];
            let v = if conj { values[slot].conj() } else { values[slot] };
            mat[(i, j)] = v;
            mat[(j, i)] = v.conj();
        }
    }
    Ok((mat, keys.len()))
}

pub fn assemble_gram(freqs: &[Freq], m: &MeasureModel) -> Result<GramSpectrum> {
    assemble_gram_capped(freqs, m, DEFAULT_GRAM_CAP)
}

pub fn assemble_gram_capped(freqs: &[Freq], m: &MeasureModel, cap: usize) -> Result<GramSpectrum> {
    let (matrix, distinct) = gram_matrix(freqs, m, cap)?;
    let extremes = hermitian_extremes(&matrix)?;
    Ok(GramSpectrum {
        freqs: freqs.to_vec(),
        measure: m.to_json(),
        matrix,
        extremes,
        distinct_coefficients: distinct,
    })
}

/// Extremal Gram eigenvalues over an arbitrary frequency set.
pub fn finite_support_constants(freqs: &[Freq], m: &MeasureModel) -> Result<(f64, f64)> {
    let g = assemble_gram(freqs, m)?;
    Ok((g.lambda_min(), g.lambda_max()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub count: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub residual: f64,
    /// `ok`, `empty`, or an error description.
    pub status: String,
    #[serde(skip)]
    pub numeric_failure: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub d: usize,
    pub measure: String,
    pub rows: Vec<SweepRow>,
    /// Largest `lambda_max`: empirical trace constant on the sweep.
    pub sup_lambda_max: f64,
    /// Smallest `lambda_min`: empirical inverse observability constant.
    pub inf_lambda_min: f64,
    /// Rows with `n ≥ semiclassical_from` enter the semiclassical proxy.
    pub semiclassical_from: u64,
    pub semiclassical_inf_lambda_min: f64,
    pub empty_rows: usize,
    pub failed_rows: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepConfig {
    pub cap: usize,
    /// Fraction of the `n` range below the semiclassical cut.
    pub semiclassical_cut: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            cap: DEFAULT_GRAM_CAP,
            semiclassical_cut: 0.5,
        }
    }
}

pub fn constants_sweep(d: usize, ns: &[u64], m: &MeasureModel) -> Result<SweepReport> {
    constants_sweep_with(d, ns, m, SweepConfig::default())
}

/// Per-shell extremal eigenvalues. Row failures are recorded and the sweep
/// continues.
pub fn constants_sweep_with(d: usize, ns: &[u64], m: &MeasureModel, cfg: SweepConfig) -> Result<SweepReport> {
    if m.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.d(),
        });
    }
    if ns.is_empty() {
        return Err(Error::Empty("sweep over no shells".into()));
    }
    let rows: Vec<SweepRow> = ns
        .par_iter()
        .map(|&n| {
            let mut row = SweepRow {
                n,
                count: 0,
                lambda_min: f64::NAN,
                lambda_max: f64::NAN,
                residual: f64::NAN,
                status: "ok".into(),
                numeric_failure: false,
            };
            let shell = match enumerate_shell(d, n as i64) {
                Ok(s) => s,
                Err(e) => {
                    row.status = format!("error: {e}");
                    return row;
                }
            };
            row.count = shell.len();
            if shell.is_empty() {
                row.status = "empty".into();
                return row;
            }
            match assemble_gram_capped(&shell.points, m, cfg.cap) {
                Ok(g) => {
                    row.lambda_min = g.lambda_min();
                    row.lambda_max = g.lambda_max();
                    row.residual = g.extremes.residual_min.max(g.extremes.residual_max);
                }
                Err(e) => {
                    row.numeric_failure = e.is_numeric();
                    row.status = format!("error: {e}");
                }
            }
            row
        })
        .collect();
    let lo = *ns.iter().min().unwrap();
    let hi = *ns.iter().max().unwrap();
    let semiclassical_from = lo + ((hi - lo) as f64 * cfg.semiclassical_cut).ceil() as u64;
    let ok = || rows.iter().filter(|r| r.status == "ok");
    Ok(SweepReport {
        d,
        measure: m.to_json(),
        sup_lambda_max: ok().map(|r| r.lambda_max).fold(f64::NEG_INFINITY, f64::max),
        inf_lambda_min: ok().map(|r| r.lambda_min).fold(f64::INFINITY, f64::min),
        semiclassical_from,
        semiclassical_inf_lambda_min: ok()
            .filter(|r| r.n >= semiclassical_from)
            .map(|r| r.lambda_min)
            .fold(f64::INFINITY, f64::min),
        empty_rows: rows.iter().filter(|r| r.status == "empty").count(),
        failed_rows: rows.iter().filter(|r| r.status.starts_with("error")).count(),
        rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DyadicCross {
    pub j: u32,
    /// `max |μ̂_ξ|` over cross-cluster differences with `2^j ≤ |ξ| < 2^{j+1}`.
    pub sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockSplit {
    pub n: u64,
    pub d: usize,
    pub count: usize,
    pub threshold: f64,
    pub clusters: usize,
    pub max_cluster_size: usize,
    pub block_min: f64,
    pub block_max: f64,
    /// `max_k Σ_{ℓ in other clusters} |μ̂_{k−ℓ}|`
    pub cross_bound: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub sandwich_holds: bool,
    pub dyadic: Vec<DyadicCross>,
}

/// Slack allowed in the sandwich comparison.
pub const SANDWICH_SLACK: f64 = 1e-8;

/// Splits the Gram matrix of shell `n` into cluster blocks plus the cross
/// term, and checks `block_min − cross ≤ λ_min ≤ λ_max ≤ block_max + cross`.
pub fn cluster_block_split(n: u64, d: usize, m: &MeasureModel, opts: ClusterOptions) -> Result<BlockSplit> {
    let shell = enumerate_shell(d, n as i64)?;
    let dec = cluster_decompose_with(
        &shell,
        ClusterOptions {
            geometry: false,
            ..opts
        },
    )?;
    let pts = &dec.shell.points;
    let g = assemble_gram(pts, m)?;
    let labels = dec.labels();
    let (mut block_min, mut block_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for cl in &dec.clusters {
        let idx = &cl.indices;
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| g.matrix[(idx[a], idx[b])]);
        let e = hermitian_extremes(&sub)?;
        block_min = block_min.min(e.lambda_min);
        block_max = block_max.max(e.lambda_max);
    }
    let np = pts.len();
    let mut cross_bound: f64 = 0.0;
    let mut dyadic: Vec<DyadicCross> = Vec::new();
    for i in 0..np {
        let mut row = 0.0;
        for j in 0..np {
            if labels[i] == labels[j] {
                continue;
            }
            let v = g.matrix[(i, j)].norm();
            row += v;
            let dist2: i64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let jb = ((dist2 as f64).sqrt().log2().floor().max(0.0)) as u32;
            if dyadic.len() <= jb as usize {
                dyadic.extend((dyadic.len() as u32..=jb).map(|j| DyadicCross { j, sup: 0.0 }));
            }
            let slot = &mut dyadic[jb as usize];
            slot.sup = slot.sup.max(v);
        }
        cross_bound = cross_bound.max(row);
    }
    let (lmin, lmax) = (g.lambda_min(), g.lambda_max());
    let sandwich_holds =
        block_min - cross_bound <= lmin + SANDWICH_SLACK && lmax <= block_max + cross_bound + SANDWICH_SLACK;
    Ok(BlockSplit {
        n,
        d,
        count: np,
        threshold: dec.threshold,
        clusters: dec.clusters.len(),
        max_cluster_size: dec.max_cluster_size(),
        block_min,
        block_max,
        cross_bound,
        lambda_min: lmin,
        lambda_max: lmax,
        sandwich_holds,
        dyadic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::FourierTable;

    fn shell(d: usize, n: i64) -> Vec<Freq> {
        enumerate_shell(d, n).unwrap().points
    }

    #[test]
    fn lebesgue_identity() {
        let g = assemble_gram(&shell(2, 25), &MeasureModel::Lebesgue { d: 2 }).unwrap();
        assert!((g.lambda_min() - 1.0).abs() < 1e-12);
        assert!((g.lambda_max() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_all_ones() {
        let g = assemble_gram(
            &shell(2, 25),
            &MeasureModel::Dirac {
                d: 2,
                x0: vec![0.0, 0.0],
            },
        )
        .unwrap();
        assert!((g.lambda_max() - 12.0).abs() < 1e-10);
        assert!(g.lambda_min().abs() < 1e-10);
    }

    #[test]
    fn two_point_formula() {
        let t = FourierTable::from_half(1, &[(vec![3], C64::new(0.3, 0.4))]).unwrap();
        let m = MeasureModel::FourierTable(t);
        let (lo, hi) = finite_support_constants(&[vec![0], vec![3]], &m).unwrap();
        assert!((lo - 0.5).abs() < 1e-14);
        assert!((hi - 1.5).abs() < 1e-14);
    }

    #[test]
    fn matrix_is_exactly_hermitian() {
        let m = MeasureModel::from_json(r#"{"type":"circle","x0":[0.1,0.3],"radius":0.2}"#).unwrap();
        let (mat, _) = gram_matrix(&shell(2, 65), &m, 100).unwrap();
        for i in 0..mat.nrows() {
            assert_eq!(mat[(i, i)], C64::new(1.0, 0.0));
            for j in 0..mat.nrows() {
                assert_eq!(mat[(i, j)], mat[(j, i)].conj());
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = assemble_gram_capped(&shell(2, 25), &MeasureModel::Lebesgue { d: 2 }, 4).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn sweep_flags_empty_shells() {
        let r = constants_sweep(
            2,
            &[1, 2, 3, 4, 5],
            &MeasureModel::Dirac {
                d: 2,
                x0: vec![0.0, 0.0],
            },
        )
        .unwrap();
        assert_eq!(r.empty_rows, 1);
        assert_eq!(r.rows[2].status, "empty");
        for row in r.rows.iter().filter(|r| r.status == "ok") {
            assert!((row.lambda_max - row.count as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn block_split_lebesgue() {
        let b =
            cluster_block_split(25, 2, &MeasureModel::Lebesgue { d: 2 }, ClusterOptions::default()).unwrap();
        assert_eq!(b.cross_bound, 0.0);
        assert!((b.block_min - 1.0).abs() < 1e-12 && (b.block_max - 1.0).abs() < 1e-12);
        assert!(b.sandwich_holds);
    }
}
