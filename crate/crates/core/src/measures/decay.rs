//! Off-zero suprema and dyadic decay fits of `|μ̂_k|`.

use std::collections::HashMap;

use serde::Serialize;

use super::{representable, MeasureModel};
use crate::quadrature::QuadConfig;
use crate::{Error, Freq, Result};

/// Radii sampled per dyadic block for rotation-invariant models.
pub const RADII_PER_BLOCK: usize = 256;
/// Lattice points evaluated per fit for the other models.
pub const DECAY_POINT_CAP: usize = 2_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct SupReport {
    pub k_max: i64,
    pub sup: f64,
    pub argmax: Freq,
}

fn for_each_box_point(d: usize, r: i64, mut f: impl FnMut(&[i64]) -> Result<()>) -> Result<()> {
    let mut k = vec![-r; d];
    loop {
        f(&k)?;
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if k[i] < r {
                k[i] += 1;
                break;
            }
            k[i] = -r;
        }
    }
}

/// `max |μ̂_k|` over `0 < |k|_∞ ≤ K`; the arg-max is the first maximizer in
/// lexicographic order.
pub fn sup_offzero(m: &MeasureModel, k_max: i64) -> Result<SupReport> {
    if k_max < 1 {
        return Err(Error::invalid(format!("K must be >= 1, got {k_max}")));
    }
    let d = m.d();
    let total = (2 * k_max + 1) as f64;
    if total.powi(d as i32) > DECAY_POINT_CAP as f64 {
        return Err(Error::Resource {
            what: "sup_offzero box points",
            requested: total.powi(d as i32) as u64,
            cap: DECAY_POINT_CAP as u64,
        });
    }
    let cfg = QuadConfig::default();
    let mut memo: HashMap<u64, f64> = HashMap::new();
    let mut best = SupReport {
        k_max,
        sup: f64::NEG_INFINITY,
        argmax: Vec::new(),
    };
    for_each_box_point(d, k_max, |k| {
        if k.iter().all(|&x| x == 0) {
            return Ok(());
        }
        let n2 = k.iter().map(|&x| (x * x) as u64).sum::<u64>();
        let v = match memo.get(&n2) {
            Some(&v) => v,
            None => match m.radial_abs(n2, &cfg) {
                Some(r) => {
                    let v = r?;
                    memo.insert(n2, v);
                    v
                }
                None => m.fourier_coeff_with(k, &cfg)?.norm(),
            },
        };
        if v > best.sup {
            best.sup = v;
            best.argmax = k.to_vec();
        }
        Ok(())
    })?;
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayBlock {
    pub j: u32,
    pub lo: f64,
    pub hi: f64,
    pub sup: f64,
    /// `|k|` at which the block maximum was observed.
    pub at_radius: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub k_max: i64,
    /// `α` in `sup_block ≈ C·2^{−jα}`; `+∞` when every coefficient vanishes.
    pub exponent: f64,
    pub constant: f64,
    /// `Σ_j 2^{j(d−2)} sup_j`
    pub dyadic_sum: f64,
    pub blocks: Vec<DecayBlock>,
}

/// Sampled `|k|²` values in `[lo², hi²]` that are sums of `d` squares,
/// always including the first one.
fn admissible_radii(d: usize, lo: u64, hi: u64, cap: usize) -> Vec<u64> {
    let (a, b) = (lo * lo, hi * hi);
    let span = b - a;
    let mut out = Vec::new();
    let mut next_free = a;
    for i in 0..cap as u64 {
        let start = a + span * i / cap as u64;
        let mut m = start.max(next_free);
        while m <= b && !representable(d, m) {
            m += 1;
        }
        if m > b {
            break;
        }
        out.push(m);
        next_free = m + 1;
    }
    out
}

/// Least-squares fit of `log sup_j` against `−j log 2` over dyadic blocks
/// `[2^j, 2^{j+1}]` with `2^{j+1} ≤ K`.
pub fn decay_fit(m: &MeasureModel, k_max: i64) -> Result<DecayFit> {
    if k_max < 8 {
        return Err(Error::invalid(format!("decay_fit needs K >= 8, got {k_max}")));
    }
    let d = m.d();
    let cfg = QuadConfig::default();
    let mut blocks = Vec::new();
    let mut j = 0u32;
    let radial = m.radial_abs(1, &cfg).is_some();
    if !radial {
        let side = (2 * k_max + 1) as f64;
        if side.powi(d as i32) > DECAY_POINT_CAP as f64 {
            return Err(Error::Resource {
                what: "decay_fit lattice points",
                requested: side.powi(d as i32) as u64,
                cap: DECAY_POINT_CAP as u64,
            });
        }
    }
    while (2i64 << j) <= k_max {
        let (lo, hi) = (1u64 << j, 2u64 << j);
        let mut block = DecayBlock {
            j,
            lo: lo as f64,
            hi: hi as f64,
            sup: 0.0,
            at_radius: lo as f64,
            samples: 0,
        };
        if radial {
            for n2 in admissible_radii(d, lo, hi, RADII_PER_BLOCK) {
                let v = m.radial_abs(n2, &cfg).expect("radial model")?;
                block.samples += 1;
                if v > block.sup {
                    block.sup = v;
                    block.at_radius = (n2 as f64).sqrt();
                }
            }
        } else {
            let (lo2, hi2) = (lo * lo, hi * hi);
            for_each_box_point(d, hi as i64, |k| {
                let n2 = k.iter().map(|&x| (x * x) as u64).sum::<u64>();
                if n2 < lo2 || n2 > hi2 {
                    return Ok(());
                }
                let v = m.fourier_coeff_with(k, &cfg)?.norm();
                block.samples += 1;
                if v > block.sup {
                    block.sup = v;
                    block.at_radius = (n2 as f64).sqrt();
                }
                Ok(())
            })?;
        }
        blocks.push(block);
        j += 1;
    }
    let dyadic_sum = blocks
        .iter()
        .map(|b| 2f64.powi(b.j as i32 * (d as i32 - 2)) * b.sup)
        .sum();
    let pts: Vec<(f64, f64)> = blocks
        .iter()
        .filter(|b| b.sup > 0.0)
        .map(|b| (-(b.j as f64) * std::f64::consts::LN_2, b.sup.ln()))
        .collect();
    let (exponent, constant) = if pts.is_empty() {
        (f64::INFINITY, 0.0)
    } else if pts.len() == 1 {
        (0.0, pts[0].1.exp())
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let slope = sxy / sxx;
        (slope, (my - slope * mx).exp())
    };
    Ok(DecayFit {
        k_max,
        exponent,
        constant,
        dyadic_sum,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_and_lebesgue() {
        let dirac = MeasureModel::Dirac {
            d: 2,
            x0: vec![0.3, 0.1],
        };
        let s = sup_offzero(&dirac, 5).unwrap();
        assert!((s.sup - 1.0).abs() < 1e-14);
        let fit = decay_fit(&dirac, 64).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        let leb = MeasureModel::Lebesgue { d: 2 };
        assert_eq!(sup_offzero(&leb, 5).unwrap().sup, 0.0);
        assert!(decay_fit(&leb, 64).unwrap().exponent.is_infinite());
    }

    #[test]
    fn admissible_includes_block_start() {
        let r = admissible_radii(3, 4, 8, 8);
        assert_eq!(r[0], 16);
        assert!(r.iter().all(|&m| representable(3, m) && (16..=64).contains(&m)));
        let r2 = admissible_radii(2, 2, 4, 1000);
        assert!(!r2.contains(&7) && !r2.contains(&12));
    }

    #[test]
    fn non_radial_fit_runs() {
        let cyl = MeasureModel::HyperplaneCylinder {
            d: 2,
            vanishing: vec![1],
        };
        let fit = decay_fit(&cyl, 8).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        assert_eq!(fit.blocks.len(), 3);
    }
}
