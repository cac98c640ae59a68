//! Exact `W^{ε,1}` Gagliardo seminorms of indicator functions of finite
//! interval unions, the fat Cantor construction, and an interval union whose
//! indicator has infinite seminorm for every `ε`.
//!
//! For an indicator `1_E` on an ambient interval `G` the seminorm reduces to
//! `2 ∫_E ∫_{G∖E} |x − y|^{−1−ε}`, and the double integral over two disjoint
//! intervals has the closed form computed by [`pair_energy`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::pairwise_sum;
use crate::{Error, Result};

/// Open interval `(a, b)`.
pub type Interval = (f64, f64);

/// Finite union of disjoint open intervals inside `(0, L)`, sorted by left
/// endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntervalUnionRaw")]
pub struct IntervalUnion {
    pub ambient: Interval,
    pub intervals: Vec<Interval>,
}

#[derive(Deserialize)]
struct IntervalUnionRaw {
    ambient: Interval,
    intervals: Vec<Interval>,
}

impl TryFrom<IntervalUnionRaw> for IntervalUnion {
    type Error = Error;
    fn try_from(raw: IntervalUnionRaw) -> Result<Self> {
        IntervalUnion::new(raw.ambient, raw.intervals)
    }
}

impl IntervalUnion {
    /// Validates: `a < b`, sorted, pairwise disjoint and inside the
    /// ambient interval.
    pub fn new(ambient: Interval, intervals: Vec<Interval>) -> Result<Self> {
        let (lo, hi) = ambient;
        if !(lo < hi) {
            return Err(Error::invalid(format!("bad ambient interval ({lo}, {hi})")));
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if !(a < b) {
                return Err(Error::invalid(format!("empty interval ({a}, {b})")));
            }
            if a < lo || b > hi {
                return Err(Error::invalid(format!(
                    "interval ({a}, {b}) outside ambient ({lo}, {hi})"
                )));
            }
            if i > 0 && intervals[i - 1].1 > a {
                return Err(Error::invalid(format!(
                    "intervals {:?} and ({a}, {b}) overlap or are unsorted",
                    intervals[i - 1]
                )));
            }
        }
        Ok(IntervalUnion { ambient, intervals })
    }

    pub fn total_length(&self) -> f64 {
        pairwise_sum(&self.intervals.iter().map(|(a, b)| b - a).collect::<Vec<_>>())
    }

    /// Components of `ambient ∖ closure(E)`.
    pub fn complement(&self) -> IntervalUnion {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = self.ambient.0;
        for &(a, b) in &self.intervals {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if self.ambient.1 > cursor {
            out.push((cursor, self.ambient.1));
        }
        IntervalUnion {
            ambient: self.ambient,
            intervals: out,
        }
    }

    /// `|E ∩ (lo, hi)|`
    pub fn overlap_length(&self, lo: f64, hi: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
            .sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }
}

fn pow1m(s: f64, eps: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s.powf(1.0 - eps)
    }
}

/// `∫_I ∫_J |x − y|^{−1−ε} dy dx` for disjoint intervals, in closed form:
///
/// ```text
/// [(c−a)^{1−ε} − (c−b)^{1−ε} − (d−a)^{1−ε} + (d−b)^{1−ε}] / (ε(1−ε))
/// ```
///
/// with `I = (a, b)` to the left of `J = (c, d)`. The arguments may be given
/// in either order.
pub fn pair_energy(i: Interval, j: Interval, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    let ((a, b), (c, d)) = if i.0 <= j.0 { (i, j) } else { (j, i) };
    if !(a <= b && c <= d) {
        return Err(Error::invalid("interval with reversed endpoints"));
    }
    if b > c {
        return Err(Error::invalid(format!(
            "intervals ({a}, {b}) and ({c}, {d}) overlap"
        )));
    }
    Ok(pair_energy_unchecked(a, b, c, d, eps))
}

#[inline]
fn pair_energy_unchecked(a: f64, b: f64, c: f64, d: f64, eps: f64) -> f64 {
    (pow1m(c - a, eps) - pow1m(c - b, eps) - pow1m(d - a, eps) + pow1m(d - b, eps)) / (eps * (1.0 - eps))
}

/// `[1_E]_{W^{ε,1}(G)} = 2 Σ_{I ⊂ E} Σ_{J ⊂ G∖E} pair_energy(I, J)`.
pub fn gagliardo_indicator(e: &IntervalUnion, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    let comp = e.complement();
    let rows: Vec<f64> = e
        .intervals
        .par_iter()
        .map(|&(a, b)| {
            let terms: Vec<f64> = comp
                .intervals
                .iter()
                .map(|&(c, d)| {
                    if c >= b {
                        pair_energy_unchecked(a, b, c, d, eps)
                    } else {
                        pair_energy_unchecked(c, d, a, b, eps)
                    }
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(2.0 * pairwise_sum(&rows))
}

/// Kept set `C_depth` (2^depth closed intervals, stored by their interiors)
/// and the removed open intervals `I_{k,m}`, `m < depth`, of the fat Cantor
/// construction on `(0, 1)` with removal ratio `α`.
pub fn fat_cantor(alpha: f64, depth: u32) -> Result<(IntervalUnion, IntervalUnion)> {
    if !(alpha > 0.0 && alpha < 1.0 / 3.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1/3), got {alpha}")));
    }
    let mut kept: Vec<Interval> = vec![(0.0, 1.0)];
    let mut removed: Vec<Interval> = Vec::new();
    for m in 0..depth {
        let hole = alpha.powi(m as i32 + 1);
        let mut next = Vec::with_capacity(kept.len() * 2);
        for &(a, b) in &kept {
            let mid = 0.5 * (a + b);
            let (l, r) = (mid - 0.5 * hole, mid + 0.5 * hole);
            // children at depth m + 1 must be longer than α^{m+1}
            if !(l - a > hole && b - r > hole) {
                return Err(Error::Degenerate(format!(
                    "children of ({a}, {b}) at depth {} are not longer than {hole}",
                    m + 1
                )));
            }
            next.push((a, l));
            next.push((r, b));
            removed.push((l, r));
        }
        kept = next;
    }
    removed.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok((
        IntervalUnion::new((0.0, 1.0), kept)?,
        IntervalUnion::new((0.0, 1.0), removed)?,
    ))
}

/// `1 + ln 2 / ln α`, the upper end of the range of `ε` for which the
/// geometric bound converges.
pub fn cantor_threshold(alpha: f64) -> f64 {
    1.0 + std::f64::consts::LN_2 / alpha.ln()
}

/// `(1/(ε(1−ε))) Σ_{m ≤ depth} 2^{m+1} α^{(m+1)(1−ε)}`
pub fn cantor_geometric_bound(alpha: f64, eps: f64, depth: u32) -> f64 {
    let terms: Vec<f64> = (0..=depth)
        .map(|m| 2f64.powi(m as i32 + 1) * alpha.powf((m as f64 + 1.0) * (1.0 - eps)))
        .collect();
    pairwise_sum(&terms) / (eps * (1.0 - eps))
}

#[derive(Clone, Debug, Serialize)]
pub struct CantorRow {
    pub depth: u32,
    /// Two-sided seminorm `2∫_C∫_{(0,1)∖C}` of the kept set.
    pub seminorm: f64,
    /// One-sided `∫_C∫_{(0,1)∖C}`, the quantity the geometric bound controls.
    pub partial: f64,
    pub bound: f64,
    /// `partial(depth) − partial(depth − 1)`.
    pub increment: f64,
    /// `increment(depth − 1) / increment(depth)`; `None` at depth 1.
    pub shrink: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CantorReport {
    pub alpha: f64,
    pub eps: f64,
    pub threshold: f64,
    pub divergent_regime: bool,
    pub rows: Vec<CantorRow>,
    pub bound_holds: bool,
    pub min_shrink: Option<f64>,
    pub pass: bool,
}

/// Seminorms of the depth-`m` kept sets for `m = 1..=depth` against the
/// geometric bound. The bound is stated for the one-sided double integral,
/// half the seminorm. Outside the convergent range of `ε` the rows are still
/// computed, but the report is flagged and never passes.
pub fn cantor_bound_check(alpha: f64, eps: f64, depth: u32) -> Result<CantorReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    let threshold = cantor_threshold(alpha);
    let divergent_regime = eps >= threshold;
    let mut rows: Vec<CantorRow> = Vec::with_capacity(depth as usize);
    let mut prev_partial = 0.0;
    let mut prev_inc: Option<f64> = None;
    for m in 1..=depth {
        let (kept, _) = fat_cantor(alpha, m)?;
        let seminorm = gagliardo_indicator(&kept, eps)?;
        let partial = 0.5 * seminorm;
        let increment = partial - prev_partial;
        rows.push(CantorRow {
            depth: m,
            seminorm,
            partial,
            bound: cantor_geometric_bound(alpha, eps, m),
            increment,
            shrink: prev_inc.map(|p| p / increment),
        });
        prev_partial = partial;
        prev_inc = Some(increment);
    }
    let bound_holds = rows.iter().all(|r| r.partial <= r.bound);
    let min_shrink = rows
        .iter()
        .filter_map(|r| r.shrink)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))));
    Ok(CantorReport {
        alpha,
        eps,
        threshold,
        divergent_regime,
        pass: bound_holds && !divergent_regime,
        rows,
        bound_holds,
        min_shrink,
    })
}

/// `h_n = 1/(n (ln n)²)`
pub fn irregular_width(n: u64) -> f64 {
    let l = (n as f64).ln();
    1.0 / (n as f64 * l * l)
}

/// The union `∪_{3 ≤ n ≤ N} (a_n, a_n + h_n)` with `a_{n−1} − a_n = 2h_n`,
/// anchored at `a_N = h_N`, in the ambient `(0, 3)`.
pub fn irregular_set(n_max: u64) -> Result<IntervalUnion> {
    if n_max < 4 {
        return Err(Error::invalid(format!("N must be >= 4, got {n_max}")));
    }
    let mut a = irregular_width(n_max);
    let mut intervals = Vec::with_capacity(n_max as usize - 2);
    for n in (3..=n_max).rev() {
        let h = irregular_width(n);
        intervals.push((a, a + h));
        if n > 3 {
            a += 2.0 * h;
        }
    }
    IntervalUnion::new((0.0, 3.0), intervals)
}

fn irregular_partial(set: &IntervalUnion, n_max: u64, eps: f64) -> Result<(f64, f64)> {
    // intervals are stored by increasing position, i.e. decreasing n
    let count = set.intervals.len();
    let mut exact = Vec::with_capacity(count);
    let mut closed = Vec::with_capacity(count);
    for (idx, &(a, b)) in set.intervals.iter().enumerate() {
        let n = n_max - idx as u64;
        if n < 4 {
            continue;
        }
        let h = b - a;
        exact.push(pair_energy((a, b), (b, b + h), eps)?);
        closed.push(irregular_width(n).powf(1.0 - eps));
    }
    let factor = (2.0 - 2f64.powf(1.0 - eps)) / (eps * (1.0 - eps));
    Ok((pairwise_sum(&exact), factor * pairwise_sum(&closed)))
}

#[derive(Clone, Debug, Serialize)]
pub struct IrregularReport {
    pub n_max: u64,
    pub eps: f64,
    pub anchor: f64,
    pub right_end: f64,
    pub partial: f64,
    pub closed_form: f64,
    pub relative_gap: f64,
    /// Partial sum for `N/10`, when `N ≥ 10⁴`.
    pub partial_tenth: Option<f64>,
    pub growth_ratio: Option<f64>,
    pub pass: bool,
}

/// Lower-bound partial sums `Σ_{n=4}^N ∫_{a_n}^{a_n+h_n}∫_{a_n+h_n}^{a_n+2h_n}`
/// for the irregular set, compared with the closed form and checked for
/// growth.
pub fn irregular_divergence_audit(n_max: u64, eps: f64) -> Result<IrregularReport> {
    if n_max < 10 {
        return Err(Error::invalid(format!("N must be >= 10, got {n_max}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    let set = irregular_set(n_max)?;
    let (partial, closed_form) = irregular_partial(&set, n_max, eps)?;
    let relative_gap = (partial - closed_form).abs() / closed_form;
    let (partial_tenth, growth_ratio) = if n_max >= 10_000 {
        let tenth = n_max / 10;
        let (p, _) = irregular_partial(&irregular_set(tenth)?, tenth, eps)?;
        (Some(p), Some(partial / p))
    } else {
        (None, None)
    };
    let lower_ok = partial >= closed_form * (1.0 - 1e-9);
    let growth_ok = growth_ratio.is_none_or(|g| g >= 2.0);
    Ok(IrregularReport {
        n_max,
        eps,
        anchor: set.intervals[0].0,
        right_end: set.intervals.last().map_or(0.0, |iv| iv.1),
        partial,
        closed_form,
        relative_gap,
        partial_tenth,
        growth_ratio,
        pass: lower_ok && growth_ok,
    })
}
