//! Probability measures on `T^d` with Fourier coefficients and ball masses.
//!
//! Measures are read from JSON objects tagged by `"type"`:
//!
//! ```json
//! {"type": "circle", "x0": [0.0, 0.0], "radius": 0.2}
//! ```

mod decay;
mod patch;
mod radial;

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::construct::EigenfunctionCoeffs;
use crate::quadrature::{bessel_j0, integrate_2d, integrate_real, QuadConfig};
use crate::sobolev::IntervalUnion;
use crate::{Error, Result, C64};

pub use decay::{decay_fit, sup_offzero, DecayBlock, DecayFit, SupReport};
pub use patch::{bump, bump_profile, Patch, PatchKind, SurfacePatch, SurfacePatchSpec};
pub use radial::{PeriodizedPower, PowerSpec};

/// Tolerance for `μ̂_0 = 1`, conjugate symmetry and weight sums.
pub const COEFF_TOL: f64 = 1e-10;

/// Signed minimal-image difference `a − b` on `R/Z`.
pub fn torus_delta(a: f64, b: f64) -> f64 {
    let t = a - b;
    t - t.round()
}

fn phase(k: &[i64], x: &[f64]) -> C64 {
    let s: f64 = k.iter().zip(x).map(|(&ki, xi)| ki as f64 * xi).sum();
    C64::from_polar(1.0, -2.0 * PI * s)
}

fn knorm(k: &[i64]) -> f64 {
    (k.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>()).sqrt()
}

/// Volume of the unit ball in `R^m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(m - 2) * 2.0 * PI / m as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// Finitely supported coefficient table, zero outside its keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TableSpec", into = "TableSpec")]
pub struct FourierTable {
    pub d: usize,
    entries: Vec<TableEntry>,
    map: HashMap<Vec<i64>, C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableSpec {
    pub d: usize,
    pub entries: Vec<TableEntry>,
}

impl From<FourierTable> for TableSpec {
    fn from(t: FourierTable) -> Self {
        TableSpec {
            d: t.d,
            entries: t.entries,
        }
    }
}

impl TryFrom<TableSpec> for FourierTable {
    type Error = Error;
    fn try_from(s: TableSpec) -> Result<Self> {
        FourierTable::new(s.d, s.entries)
    }
}

impl FourierTable {
    pub fn new(d: usize, entries: Vec<TableEntry>) -> Result<Self> {
        let mut map = HashMap::new();
        for e in &entries {
            if e.k.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: e.k.len(),
                });
            }
            if map.insert(e.k.clone(), C64::new(e.re, e.im)).is_some() {
                return Err(Error::invalid(format!("duplicate table entry {:?}", e.k)));
            }
        }
        let zero = vec![0i64; d];
        match map.get(&zero) {
            Some(c) if (c - C64::new(1.0, 0.0)).norm() <= COEFF_TOL => {}
            _ => return Err(Error::invalid("fourier_table needs an entry k = 0 with value 1")),
        }
        for (k, c) in &map {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            let partner = map.get(&neg).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > COEFF_TOL {
                return Err(Error::invalid(format!(
                    "fourier_table is not conjugate symmetric at k = {k:?}"
                )));
            }
        }
        Ok(FourierTable { d, entries, map })
    }

    /// Table of a real trigonometric density from its coefficients on a
    /// half set; the conjugate entries are added.
    pub fn from_half(d: usize, half: &[(Vec<i64>, C64)]) -> Result<Self> {
        let mut entries = vec![TableEntry {
            k: vec![0; d],
            re: 1.0,
            im: 0.0,
        }];
        for (k, c) in half {
            entries.push(TableEntry {
                k: k.clone(),
                re: c.re,
                im: c.im,
            });
            entries.push(TableEntry {
                k: k.iter().map(|x| -x).collect(),
                re: c.re,
                im: -c.im,
            });
        }
        FourierTable::new(d, entries)
    }

    pub fn get(&self, k: &[i64]) -> C64 {
        self.map.get(k).copied().unwrap_or_default()
    }

    /// `‖f‖_{L²} = (Σ|f̂_k|²)^{1/2}` for the density `f`.
    pub fn l2_norm(&self) -> f64 {
        let mut sq: Vec<f64> = self.map.values().map(|c| c.norm_sqr()).collect();
        sq.sort_by(f64::total_cmp);
        sq.iter().sum::<f64>().sqrt()
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub measure: MeasureModel,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureModel {
    Lebesgue {
        d: usize,
    },
    Dirac {
        d: usize,
        x0: Vec<f64>,
    },
    Atomic {
        d: usize,
        atoms: Vec<Atom>,
    },
    FourierTable(FourierTable),
    /// Arclength on a circle in `T²`.
    Circle {
        x0: Vec<f64>,
        #[serde(alias = "R")]
        radius: f64,
    },
    /// Surface measure on a sphere in `T³`.
    Sphere {
        x0: Vec<f64>,
        #[serde(alias = "R")]
        radius: f64,
    },
    /// Dirac at 0 in the coordinates listed in `vanishing` (1-based), Lebesgue
    /// in the others.
    HyperplaneCylinder {
        d: usize,
        #[serde(alias = "J")]
        vanishing: Vec<usize>,
    },
    PeriodizedPower(PeriodizedPower),
    /// Normalized `1_E/|E|`, one interval union per coordinate.
    IntervalIndicator {
        factors: Vec<IntervalUnion>,
    },
    SurfacePatch(SurfacePatch),
    /// Convex combination of other measures.
    Mixture {
        components: Vec<Component>,
    },
}

impl MeasureModel {
    /// Parses and validates a JSON measure spec.
    pub fn from_json(text: &str) -> Result<Self> {
        let m: MeasureModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure models always serialize")
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasureModel::Lebesgue { .. } => "lebesgue",
            MeasureModel::Dirac { .. } => "dirac",
            MeasureModel::Atomic { .. } => "atomic",
            MeasureModel::FourierTable(_) => "fourier_table",
            MeasureModel::Circle { .. } => "circle",
            MeasureModel::Sphere { .. } => "sphere",
            MeasureModel::HyperplaneCylinder { .. } => "hyperplane_cylinder",
            MeasureModel::PeriodizedPower(_) => "periodized_power",
            MeasureModel::IntervalIndicator { .. } => "interval_indicator",
            MeasureModel::SurfacePatch(_) => "surface_patch",
            MeasureModel::Mixture { .. } => "mixture",
        }
    }

    pub fn d(&self) -> usize {
        match self {
            MeasureModel::Lebesgue { d }
            | MeasureModel::Dirac { d, .. }
            | MeasureModel::Atomic { d, .. }
            | MeasureModel::HyperplaneCylinder { d, .. } => *d,
            MeasureModel::FourierTable(t) => t.d,
            MeasureModel::Circle { .. } => 2,
            MeasureModel::Sphere { .. } => 3,
            MeasureModel::PeriodizedPower(p) => p.d,
            MeasureModel::IntervalIndicator { factors } => factors.len(),
            MeasureModel::SurfacePatch(s) => s.d(),
            MeasureModel::Mixture { components } => components.first().map_or(0, |c| c.measure.d()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_point = |x: &[f64], d: usize| -> Result<()> {
            if x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: x.len(),
                });
            }
            if x.iter().any(|v| !(0.0..1.0).contains(v)) {
                return Err(Error::invalid(format!("point {x:?} is not in [0,1)^{d}")));
            }
            Ok(())
        };
        let check_weights = |w: &mut dyn Iterator<Item = f64>| -> Result<()> {
            let mut sum = 0.0;
            for x in w {
                if !(x >= 0.0) {
                    return Err(Error::invalid(format!("negative or NaN weight {x}")));
                }
                sum += x;
            }
            if (sum - 1.0).abs() > COEFF_TOL {
                return Err(Error::invalid(format!("weights sum to {sum}, not 1")));
            }
            Ok(())
        };
        let d = self.d();
        if d == 0 {
            return Err(Error::invalid("measure dimension must be >= 1"));
        }
        match self {
            MeasureModel::Lebesgue { .. } => Ok(()),
            MeasureModel::Dirac { d, x0 } => check_point(x0, *d),
            MeasureModel::Atomic { d, atoms } => {
                if atoms.is_empty() {
                    return Err(Error::Empty("atomic measure without atoms".into()));
                }
                for a in atoms {
                    check_point(&a.point, *d)?;
                }
                check_weights(&mut atoms.iter().map(|a| a.weight))
            }
            MeasureModel::FourierTable(_)
            | MeasureModel::PeriodizedPower(_)
            | MeasureModel::SurfacePatch(_) => Ok(()),
            MeasureModel::Circle { x0, radius } | MeasureModel::Sphere { x0, radius } => {
                check_point(x0, d)?;
                if !(*radius > 0.0 && *radius < 0.5) {
                    return Err(Error::invalid(format!(
                        "radius must lie in (0, 1/2), got {radius}"
                    )));
                }
                Ok(())
            }
            MeasureModel::HyperplaneCylinder { d, vanishing } => {
                if vanishing.is_empty() {
                    return Err(Error::invalid(
                        "hyperplane_cylinder needs at least one vanishing coordinate",
                    ));
                }
                let mut seen = vec![false; *d];
                for &j in vanishing {
                    if j == 0 || j > *d || seen[j - 1] {
                        return Err(Error::invalid(format!(
                            "vanishing coordinates must be distinct indices in 1..={d}, got {vanishing:?}"
                        )));
                    }
                    seen[j - 1] = true;
                }
                Ok(())
            }
            MeasureModel::IntervalIndicator { factors } => {
                for f in factors {
                    if f.ambient.0 < 0.0 || f.ambient.1 > 1.0 {
                        return Err(Error::invalid("interval_indicator ambient must lie in [0, 1]"));
                    }
                    if !(f.total_length() > 0.0) {
                        return Err(Error::Empty("interval_indicator factor has zero length".into()));
                    }
                }
                Ok(())
            }
            MeasureModel::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::Empty("mixture without components".into()));
                }
                for c in components {
                    c.measure.validate()?;
                    if c.measure.d() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            got: c.measure.d(),
                        });
                    }
                }
                check_weights(&mut components.iter().map(|c| c.weight))
            }
        }
    }

    pub fn fourier_coeff(&self, k: &[i64]) -> Result<C64> {
        self.fourier_coeff_with(k, &QuadConfig::default())
    }

    pub fn fourier_coeff_with(&self, k: &[i64], cfg: &QuadConfig) -> Result<C64> {
        let d = self.d();
        if k.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: k.len(),
            });
        }
        let is_zero = k.iter().all(|&x| x == 0);
        let one = C64::new(1.0, 0.0);
        Ok(match self {
            MeasureModel::Lebesgue { .. } => {
                if is_zero {
                    one
                } else {
                    C64::default()
                }
            }
            MeasureModel::Dirac { x0, .. } => phase(k, x0),
            MeasureModel::Atomic { atoms, .. } => atoms.iter().map(|a| phase(k, &a.point) * a.weight).sum(),
            MeasureModel::FourierTable(t) => t.get(k),
            MeasureModel::Circle { x0, radius } => {
                if is_zero {
                    return Ok(one);
                }
                let z = 2.0 * PI * radius * knorm(k);
                let j0 = bessel_j0(z, cfg)
                    .map_err(|e| patch::relabel(e, format!("circle coefficient k = {k:?}")))?;
                phase(k, x0) * j0.value
            }
            MeasureModel::Sphere { x0, radius } => {
                if is_zero {
                    return Ok(one);
                }
                let z = 2.0 * PI * radius * knorm(k);
                phase(k, x0) * (z.sin() / z)
            }
            MeasureModel::HyperplaneCylinder { d, vanishing } => {
                let free = (1..=*d).filter(|j| !vanishing.contains(j));
                if free.into_iter().all(|j| k[j - 1] == 0) {
                    one
                } else {
                    C64::default()
                }
            }
            MeasureModel::PeriodizedPower(p) => C64::new(
                p.coefficient(knorm(k), cfg)
                    .map_err(|e| patch::relabel(e, format!("periodized_power coefficient k = {k:?}")))?,
                0.0,
            ),
            MeasureModel::IntervalIndicator { factors } => k
                .iter()
                .zip(factors)
                .map(|(&ki, e)| interval_factor(e, ki))
                .product(),
            MeasureModel::SurfacePatch(s) => s.fourier_coeff(k, cfg)?,
            MeasureModel::Mixture { components } => {
                let mut acc = C64::default();
                for c in components {
                    acc += c.measure.fourier_coeff_with(k, cfg)? * c.weight;
                }
                acc
            }
        })
    }

    /// `|μ̂_k|` as a function of `|k|²` alone, for rotation-invariant models.
    pub(crate) fn radial_abs(&self, norm_sq: u64, cfg: &QuadConfig) -> Option<Result<f64>> {
        let rho = (norm_sq as f64).sqrt();
        let out = match self {
            MeasureModel::Lebesgue { .. } => Ok(if norm_sq == 0 { 1.0 } else { 0.0 }),
            MeasureModel::Dirac { .. } => Ok(1.0),
            MeasureModel::Circle { radius, .. } => {
                if norm_sq == 0 {
                    Ok(1.0)
                } else {
                    bessel_j0(2.0 * PI * radius * rho, cfg).map(|q| q.value.abs())
                }
            }
            MeasureModel::Sphere { radius, .. } => {
                let z = 2.0 * PI * radius * rho;
                Ok(if norm_sq == 0 { 1.0 } else { (z.sin() / z).abs() })
            }
            MeasureModel::PeriodizedPower(p) => p.coefficient(rho, cfg).map(f64::abs),
            _ => return None,
        };
        Some(out)
    }

    /// `μ(B_r(x))` for the geodesic ball of radius `r ≤ 1/2`.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> Result<f64> {
        self.ball_mass_with(x, r, &QuadConfig::default())
    }

    pub fn ball_mass_with(&self, x: &[f64], r: f64, cfg: &QuadConfig) -> Result<f64> {
        let d = self.d();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        if !(r > 0.0 && r <= 0.5) {
            return Err(Error::invalid(format!(
                "ball radius must lie in (0, 1/2], got {r}"
            )));
        }
        let torus_dist_sq =
            |p: &[f64]| -> f64 { p.iter().zip(x).map(|(a, b)| torus_delta(*a, *b).powi(2)).sum() };
        match self {
            MeasureModel::Lebesgue { d } => Ok(unit_ball_volume(*d) * r.powi(*d as i32)),
            MeasureModel::Dirac { x0, .. } => Ok(if torus_dist_sq(x0) < r * r { 1.0 } else { 0.0 }),
            MeasureModel::Atomic { atoms, .. } => Ok(atoms
                .iter()
                .filter(|a| torus_dist_sq(&a.point) < r * r)
                .map(|a| a.weight)
                .sum()),
            MeasureModel::Circle { x0, radius } | MeasureModel::Sphere { x0, radius } => {
                let sphere = matches!(self, MeasureModel::Sphere { .. });
                let delta: Vec<f64> = x.iter().zip(x0).map(|(a, b)| torus_delta(*a, *b)).collect();
                let mut total = 0.0;
                for q in images(d) {
                    let s = delta
                        .iter()
                        .zip(&q)
                        .map(|(a, b)| (a + b) * (a + b))
                        .sum::<f64>()
                        .sqrt();
                    total += cap_fraction(*radius, s, r, sphere);
                }
                Ok(total)
            }
            MeasureModel::HyperplaneCylinder { d, vanishing } => {
                let m = d - vanishing.len();
                let delta: Vec<f64> = vanishing.iter().map(|&j| torus_delta(x[j - 1], 0.0)).collect();
                let mut total = 0.0;
                for q in images(vanishing.len()) {
                    let s2: f64 = delta.iter().zip(&q).map(|(a, b)| (a + b) * (a + b)).sum();
                    if s2 < r * r {
                        total += unit_ball_volume(m) * (r * r - s2).sqrt().powi(m as i32);
                    }
                }
                Ok(total)
            }
            MeasureModel::IntervalIndicator { factors } => match factors.len() {
                1 => Ok(window_overlap(&factors[0], x[0], r) / factors[0].total_length()),
                2 => interval_ball_2d(&factors[0], &factors[1], x, r, cfg),
                _ => Err(Error::Unsupported {
                    op: "ball_mass",
                    variant: "interval_indicator with more than two factors",
                }),
            },
            MeasureModel::SurfacePatch(s) => s.ball_mass(x, r, cfg),
            MeasureModel::Mixture { components } => {
                let mut acc = 0.0;
                for c in components {
                    acc += c.weight * c.measure.ball_mass_with(x, r, cfg)?;
                }
                Ok(acc)
            }
            MeasureModel::FourierTable(_) => Err(Error::Unsupported {
                op: "ball_mass",
                variant: "fourier_table",
            }),
            MeasureModel::PeriodizedPower(_) => Err(Error::Unsupported {
                op: "ball_mass",
                variant: "periodized_power",
            }),
        }
    }

    /// `∫|u|² dμ` by direct integration against the measure, without the
    /// Gram matrix.
    pub fn integrate_abs_sq(&self, u: &EigenfunctionCoeffs) -> Result<f64> {
        self.integrate_abs_sq_with(u, &QuadConfig::default())
    }

    pub fn integrate_abs_sq_with(&self, u: &EigenfunctionCoeffs, cfg: &QuadConfig) -> Result<f64> {
        let d = self.d();
        if u.d() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.d(),
            });
        }
        let fmax = u.max_frequency();
        match self {
            MeasureModel::Lebesgue { .. } => Ok(u.l2_norm_sq()),
            MeasureModel::Dirac { x0, .. } => Ok(u.eval(x0).norm_sqr()),
            MeasureModel::Atomic { atoms, .. } => {
                Ok(atoms.iter().map(|a| a.weight * u.eval(&a.point).norm_sqr()).sum())
            }
            MeasureModel::Circle { x0, radius } => {
                let q = integrate_real(
                    |t| {
                        let (s, c) = (2.0 * PI * t).sin_cos();
                        u.eval(&[x0[0] + radius * c, x0[1] + radius * s]).norm_sqr()
                    },
                    0.0,
                    1.0,
                    4.0 * PI * radius * fmax,
                    cfg,
                )?;
                Ok(q.value)
            }
            MeasureModel::Sphere { x0, radius } => {
                let f = 2.0 * PI * radius * fmax;
                let q = integrate_2d(
                    |th, ph| {
                        let (st, ct) = th.sin_cos();
                        let (sp, cp) = ph.sin_cos();
                        let p = [
                            x0[0] + radius * st * cp,
                            x0[1] + radius * st * sp,
                            x0[2] + radius * ct,
                        ];
                        C64::new(u.eval(&p).norm_sqr() * st, 0.0)
                    },
                    (0.0, PI),
                    (0.0, 2.0 * PI),
                    (f / PI, f / PI),
                    cfg,
                )?;
                Ok(q.value.re / (4.0 * PI))
            }
            MeasureModel::HyperplaneCylinder { vanishing, .. } => {
                // restriction to {x_J = 0} is a trigonometric polynomial in the
                // free coordinates; Parseval there
                let mut grouped: HashMap<Vec<i64>, C64> = HashMap::new();
                for (k, c) in u.freqs.iter().zip(&u.coeffs) {
                    let free: Vec<i64> = k
                        .iter()
                        .enumerate()
                        .map(|(i, &ki)| if vanishing.contains(&(i + 1)) { 0 } else { ki })
                        .collect();
                    *grouped.entry(free).or_default() += c;
                }
                let mut sq: Vec<f64> = grouped.values().map(|c| c.norm_sqr()).collect();
                sq.sort_by(f64::total_cmp);
                Ok(sq.iter().sum())
            }
            MeasureModel::IntervalIndicator { factors } if factors.len() == 1 => {
                let e = &factors[0];
                let mut total = 0.0;
                for &(a, b) in &e.intervals {
                    total += integrate_real(|t| u.eval(&[t]).norm_sqr(), a, b, 2.0 * fmax, cfg)?.value;
                }
                Ok(total / e.total_length())
            }
            MeasureModel::SurfacePatch(s) => s.integrate_abs_sq(u, cfg),
            MeasureModel::Mixture { components } => {
                let mut acc = 0.0;
                for c in components {
                    acc += c.weight * c.measure.integrate_abs_sq_with(u, cfg)?;
                }
                Ok(acc)
            }
            _ => Err(Error::Unsupported {
                op: "integrate_abs_sq",
                variant: self.name(),
            }),
        }
    }
}

/// Shifts `{−1,0,1}^m`.
fn images(m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(m)];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1.0, 0.0, 1.0].into_iter().map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

/// Fraction of a circle (or sphere) of radius `big_r` lying inside a ball of
/// radius `r` whose centre is at distance `s` from the circle's centre.
fn cap_fraction(big_r: f64, s: f64, r: f64, sphere: bool) -> f64 {
    if s == 0.0 {
        return if big_r < r { 1.0 } else { 0.0 };
    }
    let cos_t = ((big_r * big_r + s * s - r * r) / (2.0 * big_r * s)).clamp(-1.0, 1.0);
    if sphere {
        (1.0 - cos_t) / 2.0
    } else {
        cos_t.acos() / PI
    }
}

/// `(e^{−2πika} − e^{−2πikb})/(2πik|E|)` summed over the intervals of `E`.
fn interval_factor(e: &IntervalUnion, k: i64) -> C64 {
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let w = 2.0 * PI * k as f64;
    let mut acc = C64::default();
    for &(a, b) in &e.intervals {
        acc += C64::from_polar(1.0, -w * a) - C64::from_polar(1.0, -w * b);
    }
    acc / (C64::new(0.0, w) * e.total_length())
}

/// `|E ∩ (x − h, x + h)|` on the circle `R/Z`, for `h ≤ 1/2`.
fn window_overlap(e: &IntervalUnion, x: f64, h: f64) -> f64 {
    let x = x - x.floor();
    [-1.0, 0.0, 1.0]
        .iter()
        .map(|s| e.overlap_length(x + s - h, x + s + h))
        .sum()
}

fn interval_ball_2d(
    e1: &IntervalUnion,
    e2: &IntervalUnion,
    x: &[f64],
    r: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let x1 = x[0] - x[0].floor();
    let mut total = 0.0;
    for s in [-1.0, 0.0, 1.0] {
        let c = x1 + s;
        for &(a, b) in &e1.intervals {
            let (lo, hi) = (a.max(c - r), b.min(c + r));
            if hi <= lo {
                continue;
            }
            let q = integrate_real(
                |y| {
                    let h = (r * r - (y - c) * (y - c)).max(0.0).sqrt();
                    window_overlap(e2, x[1], h)
                },
                lo,
                hi,
                0.0,
                cfg,
            )?;
            total += q.value;
        }
    }
    Ok(total / (e1.total_length() * e2.total_length()))
}

/// Whether `m` is a sum of `d` squares.
pub fn representable(d: usize, m: u64) -> bool {
    match d {
        0 => m == 0,
        1 => crate::arith::is_square(m),
        2 => {
            if m == 0 {
                return true;
            }
            crate::arith::factorize(m)
                .iter()
                .all(|&(p, e)| p % 4 != 3 || e % 2 == 0)
        }
        3 => {
            let mut t = m;
            while t > 0 && t.is_multiple_of(4) {
                t /= 4;
            }
            t % 8 != 7
        }
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sum_of_squares_count;
    use crate::quadrature::integrate;

    fn circle() -> MeasureModel {
        MeasureModel::from_json(r#"{"type":"circle","x0":[0.0,0.0],"radius":0.2}"#).unwrap()
    }

    #[test]
    fn lebesgue_and_dirac() {
        let leb = MeasureModel::Lebesgue { d: 2 };
        assert_eq!(leb.fourier_coeff(&[3, 4]).unwrap(), C64::default());
        assert_eq!(leb.fourier_coeff(&[0, 0]).unwrap(), C64::new(1.0, 0.0));
        let dirac = MeasureModel::Dirac {
            d: 3,
            x0: vec![0.0; 3],
        };
        assert!((dirac.fourier_coeff(&[5, -2, 7]).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(dirac.ball_mass(&[0.0; 3], 0.01).unwrap(), 1.0);
        assert!((leb.ball_mass(&[0.3, 0.3], 0.1).unwrap() - PI * 0.01).abs() < 1e-15);
    }

    #[test]
    fn circle_coefficient_matches_curve_quadrature() {
        let m = circle();
        let cfg = QuadConfig::default();
        for k in [[1i64, 0], [3, 4], [-7, 2], [40, 45]] {
            let want = integrate(
                |t| {
                    let (s, c) = (2.0 * PI * t).sin_cos();
                    C64::from_polar(1.0, -2.0 * PI * 0.2 * (k[0] as f64 * c + k[1] as f64 * s))
                },
                0.0,
                1.0,
                0.2 * knorm(&k) + 1.0,
                &cfg,
            )
            .unwrap()
            .value;
            let got = m.fourier_coeff(&k).unwrap();
            assert!((got - want).norm() < 1e-8, "k={k:?}: {got} vs {want}");
        }
    }

    #[test]
    fn cylinder_support() {
        let m = MeasureModel::from_json(r#"{"type":"hyperplane_cylinder","d":3,"vanishing":[1,2]}"#).unwrap();
        assert_eq!(m.fourier_coeff(&[7, -2, 0]).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(m.fourier_coeff(&[0, 0, 1]).unwrap(), C64::default());
    }

    #[test]
    fn interval_coefficients() {
        let e = IntervalUnion::new((0.0, 1.0), vec![(0.25, 0.75)]).unwrap();
        let m = MeasureModel::IntervalIndicator { factors: vec![e] };
        // ∫_{1/4}^{3/4} 2 e^{−2πix} dx = −2/π
        let c = m.fourier_coeff(&[1]).unwrap();
        assert!((c - C64::new(-2.0 / PI, 0.0)).norm() < 1e-14);
        assert!((m.ball_mass(&[0.5], 0.1).unwrap() - 0.4).abs() < 1e-14);
        assert!((m.ball_mass(&[0.0], 0.3).unwrap() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn circle_ball_mass_arc_fraction() {
        let m = circle();
        // ball of radius r at a point on the circle covers an arc of
        // half-angle 2 arcsin(r/(2R))
        let r = 0.05;
        let want = 2.0 * (r / 0.4f64).asin() / PI;
        assert!((m.ball_mass(&[0.2, 0.0], r).unwrap() - want).abs() < 1e-14);
        assert_eq!(m.ball_mass(&[0.5, 0.5], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn mixture_coefficients() {
        let m = MeasureModel::from_json(
            r#"{"type":"mixture","components":[
                {"weight":0.5,"measure":{"type":"dirac","d":2,"x0":[0.0,0.0]}},
                {"weight":0.5,"measure":{"type":"lebesgue","d":2}}]}"#,
        )
        .unwrap();
        assert!((m.fourier_coeff(&[0, 0]).unwrap().re - 1.0).abs() < 1e-15);
        assert!((m.fourier_coeff(&[1, 2]).unwrap().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn table_validation() {
        let ok = FourierTable::from_half(2, &[(vec![1, 0], C64::new(0.25, 0.1))]).unwrap();
        assert_eq!(ok.get(&[-1, 0]), C64::new(0.25, -0.1));
        assert_eq!(ok.get(&[5, 5]), C64::default());
        let bad = FourierTable::new(
            1,
            vec![
                TableEntry {
                    k: vec![0],
                    re: 1.0,
                    im: 0.0,
                },
                TableEntry {
                    k: vec![1],
                    re: 0.2,
                    im: 0.0,
                },
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(MeasureModel::from_json(r#"{"type":"circle","x0":[0.0,0.0],"radius":0.7}"#).is_err());
        assert!(MeasureModel::from_json(r#"{"type":"dirac","d":2,"x0":[0.0]}"#).is_err());
        assert!(
            MeasureModel::from_json(r#"{"type":"atomic","d":1,"atoms":[{"weight":0.3,"point":[0.1]}]}"#)
                .is_err()
        );
        assert!(MeasureModel::from_json(r#"{"type":"nope"}"#).is_err());
        let m = MeasureModel::Lebesgue { d: 2 };
        assert!(m.fourier_coeff(&[1]).is_err());
    }

    #[test]
    fn unsupported_ball_mass() {
        let m = MeasureModel::PeriodizedPower(PeriodizedPower::new(3, 0.5).unwrap());
        assert!(matches!(
            m.ball_mass(&[0.0; 3], 0.1),
            Err(Error::Unsupported { .. })
        ));
    }

    fn representable_by_count(d: usize, m: u64) -> bool {
        sum_of_squares_count(d, m as i64).unwrap().count > 0
    }

    #[test]
    fn representability_matches_counts() {
        for d in 2..=4 {
            for m in 0..300u64 {
                assert_eq!(representable(d, m), representable_by_count(d, m), "d={d} m={m}");
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"type":"sphere","x0":[0.1,0.2,0.3],"radius":0.25}"#;
        let m = MeasureModel::from_json(text).unwrap();
        assert_eq!(m.to_json(), text);
    }
}
