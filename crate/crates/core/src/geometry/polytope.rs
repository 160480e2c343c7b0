//! H-polytopes `{x : Ax <= b}` and Euclidean projection onto them.
//!
//! Projection is a dual active-set method (Goldfarb-Idnani with identity
//! Hessian): starting from `p`, the most violated row joins the active set
//! and rows whose multipliers would turn negative leave it. It stops once
//! the worst normalised violation is within the scalar's solver tolerance
//! and fails after [`MAX_SWEEPS`] active-set steps.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::GeometryError;
use crate::scalar::{dot, Scalar};

pub const MAX_SWEEPS: usize = 10_000;


#[derive(Debug, Clone, PartialEq)]
pub struct Polytope<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T> {
    pub point: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

impl<T: Scalar> Polytope<T> {
    /// Validates shapes and checks nonemptiness with a feasibility LP.
    pub fn new(a: Vec<Vec<T>>, b: Vec<T>) -> Result<Self, GeometryError> {
        if a.is_empty() {
            return Err(GeometryError::NoConstraints);
        }
        if a.len() != b.len() {
            return Err(GeometryError::OffsetLength {
                rows: a.len(),
                offsets: b.len(),
            });
        }
        let n = a[0].len();
        if n == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        for (row, r) in a.iter().enumerate() {
            if r.len() != n {
                return Err(GeometryError::RaggedRow {
                    row,
                    expected: n,
                    found: r.len(),
                });
            }
            if !r.iter().all(|x| x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        if !b.iter().all(|x| x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let poly = Polytope { a, b };
        if !poly.is_feasible() {
            return Err(GeometryError::EmptyPolytope);
        }
        Ok(poly)
    }

    fn is_feasible(&self) -> bool {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = (0..self.dim())
            .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let expr: Vec<_> = vars
                .iter()
                .zip(row)
                .map(|(&v, &c)| (v, c.to_f64_lossy()))
                .collect();
            lp.add_constraint(expr.as_slice(), ComparisonOp::Le, rhs.to_f64_lossy());
        }
        lp.solve().is_ok()
    }

    pub fn dim(&self) -> usize {
        self.a[0].len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.a
    }

    pub fn offsets(&self) -> &[T] {
        &self.b
    }

    pub fn contains(&self, p: &[T]) -> bool {
        self.a.iter().zip(&self.b).all(|(r, &b)| dot(r, p) <= b)
    }

    /// `{x + t : Ax <= b}` is `{y : Ay <= b + At}`.
    pub fn translate(&self, t: &[T]) -> Self {
        let b = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(r, &b)| b + dot(r, t))
            .collect();
        Polytope {
            a: self.a.clone(),
            b,
        }
    }

    fn max_violation(&self, x: &[T]) -> T {
        self.a
            .iter()
            .zip(&self.b)
            .filter_map(|(r, &b)| {
                let n = dot(r, r).sqrt();
                (n > T::zero()).then(|| ((dot(r, x) - b) / n).max(T::zero()))
            })
            .fold(T::zero(), T::max)
    }

    /// Nearest point of the polytope to `p`.
    pub fn project(&self, p: &[T]) -> Result<Projection<T>, GeometryError> {
        if p.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        if self.contains(p) {
            return Ok(Projection {
                point: p.to_vec(),
                iterations: 0,
                residual: T::zero(),
            });
        }
        let tol = T::solver_tolerance();
        let eps = T::epsilon() * T::lit(1e4);
        let norms2: Vec<T> = self.a.iter().map(|r| dot(r, r)).collect();
        let mut x = p.to_vec();
        // multipliers of the active rows; x = p - sum lambda_j a_j throughout
        let mut active: Vec<(usize, T)> = Vec::new();
        let mut iterations = 0;
        loop {
            let worst = (0..self.a.len())
                .filter(|&i| norms2[i] > T::zero())
                .map(|i| (i, (dot(&self.a[i], &x) - self.b[i]) / norms2[i].sqrt()))
                .filter(|&(_, v)| v > tol)
                .max_by(|u, v| u.1.partial_cmp(&v.1).expect("finite violations"));
            let Some((q, _)) = worst else { break };
            let aq = &self.a[q];
            let mut lq = T::zero();
            loop {
                iterations += 1;
                if iterations > MAX_SWEEPS {
                    return Err(GeometryError::NonConvergence {
                        iterations: MAX_SWEEPS,
                        residual: self.max_violation(&x).to_f64_lossy(),
                    });
                }
                // r solves (N N^T) r = N a_q; z is a_q with its span(N) part removed
                let gram: Vec<Vec<T>> = active
                    .iter()
                    .map(|&(i, _)| active.iter().map(|&(j, _)| dot(&self.a[i], &self.a[j])).collect())
                    .collect();
                let rhs: Vec<T> = active.iter().map(|&(i, _)| dot(&self.a[i], aq)).collect();
                let r = solve_dense(gram, rhs).unwrap_or_else(|| vec![T::zero(); active.len()]);
                let mut z = aq.clone();
                for (&(i, _), &rj) in active.iter().zip(&r) {
                    for (zk, &ak) in z.iter_mut().zip(&self.a[i]) {
                        *zk = *zk - rj * ak;
                    }
                }
                let zz = dot(&z, &z);
                let full = if zz > eps * norms2[q] {
                    Some((dot(aq, &x) - self.b[q]) / zz)
                } else {
                    None
                };
                let partial = active
                    .iter()
                    .zip(&r)
                    .enumerate()
                    .filter(|(_, (_, &rj))| rj > eps)
                    .map(|(k, (&(_, l), &rj))| (k, l / rj))
                    .min_by(|u, v| u.1.partial_cmp(&v.1).expect("finite ratios"));
                let (t, drop) = match (full, partial) {
                    (None, None) => return Err(GeometryError::EmptyPolytope),
                    (Some(t1), Some((k, t2))) if t2 < t1 => (t2, Some(k)),
                    (Some(t1), _) => (t1, None),
                    (None, Some((k, t2))) => (t2, Some(k)),
                };
                for (xk, &zk) in x.iter_mut().zip(&z) {
                    *xk = *xk - t * zk;
                }
                for ((_, l), &rj) in active.iter_mut().zip(&r) {
                    *l = (*l - t * rj).max(T::zero());
                }
                lq = lq + t;
                match drop {
                    Some(k) => {
                        active.remove(k);
                    }
                    None => {
                        active.push((q, lq));
                        break;
                    }
                }
            }
        }
        Ok(Projection {
            residual: self.max_violation(&x),
            point: x,
            iterations,
        })
    }

    /// Whether the polytope meets the closed box `[lower, upper]`: a box
    /// whose midpoint is inside trivially does, otherwise the stacked
    /// constraints are checked with a feasibility LP.
    pub fn intersects_box(&self, lower: &[T], upper: &[T]) -> Result<bool, GeometryError> {
        for v in [lower, upper] {
            if v.len() != self.dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: self.dim(),
                    found: v.len(),
                });
            }
        }
        let mid: Vec<T> = lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| (l + u) / T::lit(2.0))
            .collect();
        if self.contains(&mid) {
            return Ok(true);
        }
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| lp.add_var(0.0, (l.to_f64_lossy(), u.to_f64_lossy())))
            .collect();
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let expr: Vec<_> = vars
                .iter()
                .zip(row)
                .map(|(&v, &c)| (v, c.to_f64_lossy()))
                .collect();
            lp.add_constraint(expr.as_slice(), ComparisonOp::Le, rhs.to_f64_lossy());
        }
        Ok(lp.solve().is_ok())
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense<T: Scalar>(mut m: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for c in 0..n {
        let pivot = (c..n).max_by(|&x, &y| m[x][c].abs().partial_cmp(&m[y][c].abs()).expect("finite"))?;
        if m[pivot][c].abs() <= T::epsilon() {
            return None;
        }
        m.swap(c, pivot);
        rhs.swap(c, pivot);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] = m[r][j] - f * m[c][j];
            }
            rhs[r] = rhs[r] - f * rhs[c];
        }
    }
    let mut x = vec![T::zero(); n];
    for c in (0..n).rev() {
        let s = (c + 1..n).fold(rhs[c], |acc, j| acc - m[c][j] * x[j]);
        x[c] = s / m[c][c];
    }
    Some(x)
}
