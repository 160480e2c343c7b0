//! Unsafe-set geometry: points, balls, axis-aligned boxes and H-polytopes.
//!
//! All sets are closed, so a point on the boundary is inside. Polytope
//! distance goes through an iterative projection (see [`polytope`]); the
//! other three types have closed forms.

pub mod payload;
pub mod polytope;
mod relative;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{dist, Scalar};

pub use polytope::{Polytope, Projection};
pub use relative::{update_relative, RelativeSetSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: set has dimension {expected}, query has dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ball radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("hyperrectangle lower corner exceeds upper corner on axis {axis}")]
    InvertedBounds { axis: usize },
    #[error("polytope needs at least one constraint row")]
    NoConstraints,
    #[error("polytope has {rows} rows in A but {offsets} entries in b")]
    OffsetLength { rows: usize, offsets: usize },
    #[error("polytope row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("set must have dimension at least 1")]
    ZeroDimension,
    #[error("non-finite value in set definition")]
    NonFinite,
    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

/// Type tag carried next to every set definition in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Point,
    Ball,
    Hyperrectangle,
    Polytope,
}

impl SetKind {
    pub const ALL: [SetKind; 4] = [
        SetKind::Point,
        SetKind::Ball,
        SetKind::Hyperrectangle,
        SetKind::Polytope,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SetKind::Point => "point",
            SetKind::Ball => "ball",
            SetKind::Hyperrectangle => "hyperrectangle",
            SetKind::Polytope => "polytope",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Geometric definition of an unsafe set at one instant.
#[derive(Debug, Clone, PartialEq)]
pub enum SetDef<T> {
    Point(Vec<T>),
    Ball { center: Vec<T>, radius: T },
    Hyperrectangle { lower: Vec<T>, upper: Vec<T> },
    Polytope(Polytope<T>),
}

fn finite<T: Scalar>(v: &[T]) -> Result<(), GeometryError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::NonFinite)
    }
}

fn check_dim<T>(expected: usize, p: &[T]) -> Result<(), GeometryError> {
    if p.len() == expected {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch {
            expected,
            found: p.len(),
        })
    }
}

impl<T: Scalar> SetDef<T> {
    pub fn point(coords: Vec<T>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        finite(&coords)?;
        Ok(SetDef::Point(coords))
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self, GeometryError> {
        if center.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        finite(&center)?;
        if !radius.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if radius < T::zero() {
            return Err(GeometryError::NegativeRadius(radius.to_f64_lossy()));
        }
        Ok(SetDef::Ball { center, radius })
    }

    pub fn hyperrectangle(lower: Vec<T>, upper: Vec<T>) -> Result<Self, GeometryError> {
        if lower.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        check_dim(lower.len(), &upper)?;
        finite(&lower)?;
        finite(&upper)?;
        if let Some(axis) = lower.iter().zip(&upper).position(|(l, u)| l > u) {
            return Err(GeometryError::InvertedBounds { axis });
        }
        Ok(SetDef::Hyperrectangle { lower, upper })
    }

    pub fn polytope(a: Vec<Vec<T>>, b: Vec<T>) -> Result<Self, GeometryError> {
        Polytope::new(a, b).map(SetDef::Polytope)
    }

    pub fn kind(&self) -> SetKind {
        match self {
            SetDef::Point(_) => SetKind::Point,
            SetDef::Ball { .. } => SetKind::Ball,
            SetDef::Hyperrectangle { .. } => SetKind::Hyperrectangle,
            SetDef::Polytope(_) => SetKind::Polytope,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SetDef::Point(p) => p.len(),
            SetDef::Ball { center, .. } => center.len(),
            SetDef::Hyperrectangle { lower, .. } => lower.len(),
            SetDef::Polytope(poly) => poly.dim(),
        }
    }

    /// Point that relative placement moves onto the anchor: the point itself,
    /// the ball center, the box midpoint, or the origin for a polytope.
    pub fn reference_point(&self) -> Vec<T> {
        match self {
            SetDef::Point(p) => p.clone(),
            SetDef::Ball { center, .. } => center.clone(),
            SetDef::Hyperrectangle { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| (l + u) / T::lit(2.0))
                .collect(),
            SetDef::Polytope(poly) => vec![T::zero(); poly.dim()],
        }
    }

    pub fn translate(&self, t: &[T]) -> Result<Self, GeometryError> {
        check_dim(self.dim(), t)?;
        let shift = |v: &[T]| v.iter().zip(t).map(|(&x, &d)| x + d).collect::<Vec<T>>();
        Ok(match self {
            SetDef::Point(p) => SetDef::Point(shift(p)),
            SetDef::Ball { center, radius } => SetDef::Ball {
                center: shift(center),
                radius: *radius,
            },
            SetDef::Hyperrectangle { lower, upper } => SetDef::Hyperrectangle {
                lower: shift(lower),
                upper: shift(upper),
            },
            SetDef::Polytope(poly) => SetDef::Polytope(poly.translate(t)),
        })
    }

    /// Closed-set membership.
    pub fn contains(&self, p: &[T]) -> Result<bool, GeometryError> {
        check_dim(self.dim(), p)?;
        Ok(match self {
            SetDef::Point(q) => q.iter().zip(p).all(|(a, b)| a == b),
            SetDef::Ball { center, radius } => dist(center, p) <= *radius,
            SetDef::Hyperrectangle { lower, upper } => p
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (l, u))| l <= x && x <= u),
            SetDef::Polytope(poly) => poly.contains(p),
        })
    }

    /// Euclidean distance from `p` to the set; zero inside.
    pub fn distance(&self, p: &[T]) -> Result<T, GeometryError> {
        check_dim(self.dim(), p)?;
        Ok(match self {
            SetDef::Point(q) => dist(q, p),
            SetDef::Ball { center, radius } => (dist(center, p) - *radius).max(T::zero()),
            SetDef::Hyperrectangle { lower, upper } => {
                let nearest = clamp_to_box(p, lower, upper);
                dist(&nearest, p)
            }
            SetDef::Polytope(poly) => {
                if poly.contains(p) {
                    T::zero()
                } else {
                    let proj = poly.project(p)?;
                    dist(&proj.point, p)
                }
            }
        })
    }

    /// Whether the set meets the closed box `[lower, upper]`.
    ///
    /// A degenerate box reduces exactly to [`SetDef::contains`].
    pub fn intersects_box(&self, lower: &[T], upper: &[T]) -> Result<bool, GeometryError> {
        check_dim(self.dim(), lower)?;
        check_dim(self.dim(), upper)?;
        if lower == upper {
            return self.contains(lower);
        }
        Ok(match self {
            SetDef::Point(q) => q
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (l, u))| l <= x && x <= u),
            SetDef::Ball { center, radius } => {
                let nearest = clamp_to_box(center, lower, upper);
                dist(&nearest, center) <= *radius
            }
            SetDef::Hyperrectangle {
                lower: lo,
                upper: hi,
            } => (0..lo.len()).all(|i| lo[i] <= upper[i] && lower[i] <= hi[i]),
            SetDef::Polytope(poly) => poly.intersects_box(lower, upper)?,
        })
    }
}

pub(crate) fn clamp_to_box<T: Scalar>(p: &[T], lower: &[T], upper: &[T]) -> Vec<T> {
    p.iter()
        .zip(lower.iter().zip(upper))
        .map(|(&x, (&l, &u))| x.max(l).min(u))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_poly() -> SetDef<f64> {
        SetDef::polytope(
            vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            vec![1.0, 0.0, 1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn contains_examples() {
        let b = SetDef::ball(vec![5.0], 7.0).unwrap();
        assert!(b.contains(&[0.0]).unwrap());
        let b = SetDef::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.0, 0.0]).unwrap());
        let r = SetDef::hyperrectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(!r.contains(&[2.0, 0.5]).unwrap());
        let p = SetDef::polytope(vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]).unwrap();
        assert!(p.contains(&[0.5]).unwrap());
    }

    #[test]
    fn boundary_is_inside() {
        let b = SetDef::ball(vec![0.0], 1.0).unwrap();
        assert!(b.contains(&[1.0]).unwrap());
        let r = SetDef::hyperrectangle(vec![0.0], vec![1.0]).unwrap();
        assert!(r.contains(&[1.0]).unwrap());
        assert!(unit_square_poly().contains(&[1.0, 0.0]).unwrap());
    }

    #[test]
    fn distance_examples() {
        let b = SetDef::ball(vec![10.0], 7.0).unwrap();
        assert_eq!(b.distance(&[0.0]).unwrap(), 3.0);
        let p = SetDef::point(vec![1.0, 1.0]).unwrap();
        assert_eq!(p.distance(&[1.0, 1.0]).unwrap(), 0.0);
        let r = SetDef::hyperrectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((r.distance(&[2.0, 2.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let d = unit_square_poly().distance(&[2.0, 2.0]).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn box_distance_matches_grid_search() {
        let r = SetDef::hyperrectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let q = [2.0, 2.0];
        let n = 400;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let x = [i as f64 / n as f64, j as f64 / n as f64];
                best = best.min(dist(&x, &q));
            }
        }
        assert!((r.distance(&q).unwrap() - best).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_names_both_dims() {
        let b = SetDef::ball(vec![0.0, 0.0], 1.0).unwrap();
        let err = b.contains(&[0.0]).unwrap_err();
        assert_eq!(
            err,
            GeometryError::DimensionMismatch {
                expected: 2,
                found: 1
            }
        );
        assert!(err.to_string().contains('2') && err.to_string().contains('1'));
        assert!(b.distance(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert_eq!(
            SetDef::ball(vec![0.0], -1.0).unwrap_err(),
            GeometryError::NegativeRadius(-1.0)
        );
        assert_eq!(
            SetDef::hyperrectangle(vec![0.0, 2.0], vec![1.0, 1.0]).unwrap_err(),
            GeometryError::InvertedBounds { axis: 1 }
        );
        assert_eq!(
            SetDef::<f64>::polytope(vec![], vec![]).unwrap_err(),
            GeometryError::NoConstraints
        );
        assert_eq!(
            SetDef::polytope(vec![vec![1.0]], vec![1.0, 2.0]).unwrap_err(),
            GeometryError::OffsetLength {
                rows: 1,
                offsets: 2
            }
        );
        // x <= 0 and x >= 1
        assert_eq!(
            SetDef::polytope(vec![vec![1.0], vec![-1.0]], vec![0.0, -1.0]).unwrap_err(),
            GeometryError::EmptyPolytope
        );
        // degenerate but nonempty: x == 0
        assert!(SetDef::polytope(vec![vec![1.0], vec![-1.0]], vec![0.0, 0.0]).is_ok());
    }

    #[test]
    fn box_intersection() {
        let ball = SetDef::ball(vec![1.0], 0.5).unwrap();
        // nominal point misses by 0.05, bloated box touches
        assert!(!ball.intersects_box(&[0.45], &[0.45]).unwrap());
        assert!(ball.intersects_box(&[0.35], &[0.55]).unwrap());
        let r = SetDef::hyperrectangle(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(r.intersects_box(&[1.0, 1.0], &[2.0, 2.0]).unwrap());
        assert!(!r.intersects_box(&[1.1, 0.0], &[2.0, 2.0]).unwrap());
        let poly = unit_square_poly();
        assert!(poly.intersects_box(&[0.9, 0.9], &[3.0, 3.0]).unwrap());
        assert!(!poly.intersects_box(&[1.5, 1.5], &[3.0, 3.0]).unwrap());
        let pt = SetDef::point(vec![0.5, 0.5]).unwrap();
        assert!(pt.intersects_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap());
    }

    #[test]
    fn f32_kernels() {
        let b = SetDef::ball(vec![10.0f32], 7.0).unwrap();
        assert_eq!(b.distance(&[0.0]).unwrap(), 3.0);
        let poly = SetDef::polytope(
            vec![vec![1.0f32, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let d = poly.distance(&[2.0, 2.0]).unwrap();
        assert!((d - 2f32.sqrt()).abs() < 1e-4);
    }
}
