//! Lattices of confusion matrices, their 3D projections and ROC slices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ConfusionMatrix;
use crate::surd::{uint, Rational};

/// Number of confusion matrices with entries summing to `total`: C(N+3, 3).
pub fn count_matrices(total: u64) -> BigUint {
    let n = BigUint::from(total);
    (&n + 3u32) * (&n + 2u32) * (&n + 1u32) / 6u32
}

/// All matrices with the given total, in lexicographic `(a, b, c)` order.
pub fn enumerate_total(total: u64) -> impl Iterator<Item = ConfusionMatrix> {
    (0..=total).flat_map(move |a| {
        (0..=total - a).flat_map(move |b| {
            (0..=total - a - b).map(move |c| ConfusionMatrix::new(a, b, c, total - a - b - c))
        })
    })
}

/// The ROC lattice of all matrices with `p` positives and `n` negatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSlice {
    pub p: u64,
    pub n: u64,
}

impl LatticeSlice {
    pub fn len(&self) -> u128 {
        (self.p as u128 + 1) * (self.n as u128 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice points `(a, d)`, `a` ascending then `d` ascending.
    pub fn points(&self) -> impl Iterator<Item = (u64, u64)> {
        let n = self.n;
        (0..=self.p).flat_map(move |a| (0..=n).map(move |d| (a, d)))
    }

    pub fn matrices(&self) -> impl Iterator<Item = ConfusionMatrix> {
        let (p, n) = (self.p, self.n);
        self.points().map(move |(a, d)| ConfusionMatrix::from_slice_point(p, n, a, d))
    }
}

pub fn enumerate_slice(p: u64, n: u64) -> LatticeSlice {
    LatticeSlice { p, n }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point3 {
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
}

impl Point3 {
    pub fn new(x: Rational, y: Rational, z: Rational) -> Self {
        Point3 { x, y, z }
    }

    /// Squared Euclidean distance, exact.
    pub fn dist2(&self, other: &Point3) -> Rational {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        let dz = &self.z - &other.z;
        &dx * &dx + &dy * &dy + &dz * &dz
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Projection {
    Simplex,
    Tetrahedron,
    Barycentric,
}

impl Projection {
    pub fn key(self) -> &'static str {
        match self {
            Projection::Simplex => "simplex",
            Projection::Tetrahedron => "tetra",
            Projection::Barycentric => "bary",
        }
    }

    pub fn apply(self, m: &ConfusionMatrix) -> Result<Point3> {
        match self {
            Projection::Simplex => Ok(project_simplex(m)),
            Projection::Tetrahedron => project_tetrahedron(m),
            Projection::Barycentric => project_barycentric(m),
        }
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Projection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simplex" => Ok(Projection::Simplex),
            "tetra" | "tetrahedron" => Ok(Projection::Tetrahedron),
            "bary" | "barycentric" => Ok(Projection::Barycentric),
            other => Err(Error::InvalidArgument(format!("unknown projection `{other}`"))),
        }
    }
}

/// Isometric projection of integer matrices: `(a − d/3, b − d/3, c − d/3)`.
/// Unit transfers between cells move the point by exactly √2.
pub fn project_simplex(m: &ConfusionMatrix) -> Point3 {
    let third = uint(m.d) / uint(3);
    Point3::new(uint(m.a) - &third, uint(m.b) - &third, uint(m.c) - &third)
}

/// Count-normalising projection into the tetrahedron with TP at (1,0,0),
/// FN at (0,1,0), FP at (0,0,1) and TN at the origin.
pub fn project_tetrahedron(m: &ConfusionMatrix) -> Result<Point3> {
    let total = nonzero_total(m)?;
    Ok(Point3::new(uint(m.a) / &total, uint(m.c) / &total, uint(m.b) / &total))
}

/// Count-normalising projection onto cube corners.
pub fn project_barycentric(m: &ConfusionMatrix) -> Result<Point3> {
    let total = nonzero_total(m)?;
    let (a, b, c, d) = (uint(m.a), uint(m.b), uint(m.c), uint(m.d));
    Ok(Point3::new(
        (&a - &b - &c + &d) / &total,
        (&a + &b - &c - &d) / &total,
        (&a - &b + &c - &d) / &total,
    ))
}

fn nonzero_total(m: &ConfusionMatrix) -> Result<Rational> {
    match m.total() {
        0 => Err(Error::EmptyMatrix),
        t => Ok(uint(t)),
    }
}

/// A point in precision-recall space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrPoint {
    pub recall: Rational,
    /// `None` at the origin of ROC space, where precision is 0/0.
    pub precision: Option<Rational>,
}

/// Maps an ROC point to precision-recall space for a slice with `p`
/// positives and `n` negatives.
pub fn roc_to_pr(fpr: &Rational, tpr: &Rational, p: u64, n: u64) -> Result<PrPoint> {
    if p == 0 {
        return Err(Error::NoPositives);
    }
    for (name, r) in [("fpr", fpr), ("tpr", tpr)] {
        if r.is_negative() || *r > Rational::one() {
            return Err(Error::RateOutOfRange { name, value: r.to_string() });
        }
    }
    // precision = a/(a + b) = p·tpr / (p·tpr + n·fpr)
    let tp = uint(p) * tpr;
    let fp = uint(n) * fpr;
    let den = &tp + fp;
    let precision = (!den.is_zero()).then(|| tp / den);
    Ok(PrPoint { recall: tpr.clone(), precision })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surd::{int, ratio};

    #[test]
    fn lattice_counts() {
        assert_eq!(count_matrices(100), BigUint::from(176_851u32));
        assert_eq!(count_matrices(0), BigUint::one());
        assert_eq!(count_matrices(1), BigUint::from(4u32));
        for total in 0..12 {
            assert_eq!(BigUint::from(enumerate_total(total).count()), count_matrices(total));
        }
    }

    #[test]
    fn slices() {
        assert_eq!(enumerate_slice(20, 40).points().count(), 861);
        assert_eq!(enumerate_slice(0, 0).points().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(enumerate_slice(1, 1).points().collect::<Vec<_>>(), vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        let top_left = enumerate_slice(3, 4).matrices().last().unwrap();
        let r = top_left.rates();
        assert_eq!((r.fpr, r.tpr), (Some(int(0)), Some(int(1))));
    }

    #[test]
    fn vertices() {
        let n = 6;
        let tp = ConfusionMatrix::new(n, 0, 0, 0);
        let tn = ConfusionMatrix::new(0, 0, 0, n);
        assert_eq!(project_simplex(&tp), Point3::new(int(6), int(0), int(0)));
        assert_eq!(project_simplex(&tn), Point3::new(int(-2), int(-2), int(-2)));
        assert_eq!(project_tetrahedron(&tp).unwrap(), Point3::new(int(1), int(0), int(0)));
        assert_eq!(project_tetrahedron(&tn).unwrap(), Point3::new(int(0), int(0), int(0)));
        assert_eq!(project_barycentric(&tp).unwrap(), Point3::new(int(1), int(1), int(1)));
        assert_eq!(project_barycentric(&tn).unwrap(), Point3::new(int(1), int(-1), int(-1)));
        let centre = ConfusionMatrix::new(1, 1, 1, 1);
        assert_eq!(project_tetrahedron(&centre).unwrap(), Point3::new(ratio(1, 4), ratio(1, 4), ratio(1, 4)));
        assert_eq!(project_barycentric(&centre).unwrap(), Point3::new(int(0), int(0), int(0)));
        assert_eq!(project_tetrahedron(&ConfusionMatrix::new(0, 0, 0, 0)), Err(Error::EmptyMatrix));
    }

    #[test]
    fn precision_recall() {
        let pt = roc_to_pr(&ratio(1, 5), &ratio(4, 5), 10, 40).unwrap();
        assert_eq!(pt.precision, Some(ratio(1, 2)));
        let pt = roc_to_pr(&int(0), &ratio(3, 10), 10, 40).unwrap();
        assert_eq!(pt.precision, Some(int(1)));
        let pt = roc_to_pr(&int(1), &int(1), 7, 7).unwrap();
        assert_eq!(pt.precision, Some(ratio(1, 2)));
        assert_eq!(roc_to_pr(&int(0), &int(0), 3, 3).unwrap().precision, None);
        assert_eq!(roc_to_pr(&int(0), &int(0), 0, 3), Err(Error::NoPositives));
    }
}
