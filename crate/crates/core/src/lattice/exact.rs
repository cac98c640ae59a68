//! Exact affine rank and circumspheres of integer point sets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::{Error, Freq, Result};

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
fn bareiss_rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    let m = rows.len();
    if m == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..ncols {
        let Some(piv) = (rank..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        for r in rank + 1..m {
            for c in col + 1..ncols {
                let v = &rows[rank][col] * &rows[r][c] - &rows[r][col] * &rows[rank][c];
                rows[r][c] = v / &prev;
            }
            rows[r][col] = BigInt::zero();
        }
        prev = rows[rank][col].clone();
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank
}

fn differences(points: &[Freq]) -> Vec<Vec<BigInt>> {
    let p0 = &points[0];
    points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| BigInt::from(a - b)).collect())
        .collect()
}

/// Dimension of the affine hull of `points`, computed exactly.
pub fn affine_dimension(points: &[Freq]) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::Empty("affine_dimension of no points".into()));
    }
    Ok(bareiss_rank(differences(points)))
}

/// Sphere through a point set inside its affine hull, in exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct Circumsphere {
    pub center: Vec<BigRational>,
    pub radius_sq: BigRational,
}

impl Circumsphere {
    pub fn center_f64(&self) -> Vec<f64> {
        self.center.iter().map(rat_to_f64).collect()
    }

    pub fn radius_sq_f64(&self) -> f64 {
        rat_to_f64(&self.radius_sq)
    }

    pub fn contains_exactly(&self, p: &[i64]) -> bool {
        dist_sq_rat(&self.center, p) == self.radius_sq
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

fn rat_string(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Serialize for Circumsphere {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Circumsphere", 2)?;
        let center: Vec<String> = self.center.iter().map(rat_string).collect();
        st.serialize_field("center", &center)?;
        st.serialize_field("radius_sq", &rat_string(&self.radius_sq))?;
        st.end()
    }
}

fn dist_sq_rat(c: &[BigRational], p: &[i64]) -> BigRational {
    c.iter()
        .zip(p)
        .map(|(ci, &pi)| {
            let d = ci - BigRational::from_integer(BigInt::from(pi));
            &d * &d
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            let pivot = a[col].clone();
            for (x, p) in a[r].iter_mut().zip(&pivot).skip(col) {
                *x -= &f * p;
            }
            let v = &f * &b[col];
            b[r] -= v;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Centre and squared radius of the sphere through `points` that lies in
/// their affine hull. Every input point is checked to lie on it exactly.
pub fn circumsphere(points: &[Freq]) -> Result<Circumsphere> {
    if points.len() < 2 {
        return Err(Error::Degenerate("circumsphere needs at least 2 points".into()));
    }
    let diffs = differences(points);
    // greedy affinely independent basis
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    for v in diffs {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if bareiss_rank(trial) > basis.len() {
            basis.push(v);
        }
    }
    if basis.is_empty() {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let m = basis.len();
    let dot = |u: &[BigInt], v: &[BigInt]| -> BigInt { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    // centre = p0 + Σ t_j b_j with b_i·(centre − p0) = |b_i|²/2
    let gram: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| BigRational::from_integer(dot(&basis[i], &basis[j])))
                .collect()
        })
        .collect();
    let rhs: Vec<BigRational> = basis
        .iter()
        .map(|b| BigRational::new(dot(b, b), BigInt::from(2)))
        .collect();
    let t =
        solve_rational(gram, rhs).ok_or_else(|| Error::Degenerate("singular circumsphere system".into()))?;
    let p0 = &points[0];
    let center: Vec<BigRational> = (0..p0.len())
        .map(|c| {
            let mut acc = BigRational::from_integer(BigInt::from(p0[c]));
            for (tj, bj) in t.iter().zip(&basis) {
                acc += tj * BigRational::from_integer(bj[c].clone());
            }
            acc
        })
        .collect();
    let radius_sq = dist_sq_rat(&center, p0);
    let sphere = Circumsphere { center, radius_sq };
    if let Some(bad) = points.iter().find(|p| !sphere.contains_exactly(p)) {
        return Err(Error::Degenerate(format!(
            "point {bad:?} is not on the sphere through the others"
        )));
    }
    debug_assert!(!sphere.radius_sq.is_negative());
    Ok(sphere)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn affine_examples() {
        assert_eq!(affine_dimension(&[vec![1, 0]]).unwrap(), 0);
        assert_eq!(
            affine_dimension(&[vec![3, 4], vec![-3, 4], vec![5, 0]]).unwrap(),
            2
        );
        assert_eq!(
            affine_dimension(&[vec![1, 1, 0], vec![-1, 1, 0], vec![1, -1, 0]]).unwrap(),
            2
        );
        // collinear
        assert_eq!(
            affine_dimension(&[vec![0, 0, 0], vec![1, 2, 3], vec![2, 4, 6], vec![-5, -10, -15]]).unwrap(),
            1
        );
        assert!(affine_dimension(&[]).is_err());
    }

    #[test]
    fn circumsphere_examples() {
        let s = circumsphere(&[vec![3, 4], vec![-3, 4]]).unwrap();
        assert_eq!(s.center, vec![rat(0, 1), rat(4, 1)]);
        assert_eq!(s.radius_sq, rat(9, 1));

        let s = circumsphere(&[vec![5, 0], vec![3, 4], vec![0, 5]]).unwrap();
        assert_eq!(s.center, vec![rat(0, 1), rat(0, 1)]);
        assert_eq!(s.radius_sq, rat(25, 1));

        let pts = [vec![1, 1, 0], vec![1, -1, 0], vec![1, 0, 1]];
        let s = circumsphere(&pts).unwrap();
        // the plane x = 1 cuts the sphere |x|² = 2 in a circle of radius 1 about (1,0,0)
        assert_eq!(s.center, vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(s.radius_sq, rat(1, 1));
        assert!(pts.iter().all(|p| s.contains_exactly(p)));
    }

    #[test]
    fn circumsphere_errors() {
        assert!(circumsphere(&[vec![1, 2], vec![1, 2]]).is_err());
        assert!(circumsphere(&[vec![1, 2]]).is_err());
        // three collinear points have no circle through them
        assert!(circumsphere(&[vec![0, 0], vec![1, 0], vec![2, 0]]).is_err());
    }
}
