//! Reference computations written independently of the library.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn feasible(a: &[Vec<f64>], b: &[f64], x: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(r, &bi)| dot(r, x) <= bi + tol)
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Distance from `p` to `{x : Ax <= b}` by enumerating candidate active
/// sets: the nearest point is the projection of `p` onto `{A_S x = b_S}`
/// for some linearly independent set of at most `dim` rows.
pub fn polytope_distance(a: &[Vec<f64>], b: &[f64], p: &[f64]) -> f64 {
    if feasible(a, b, p, 0.0) {
        return 0.0;
    }
    let n = p.len();
    let pv = DVector::from_column_slice(p);
    let mut best = f64::INFINITY;
    for k in 1..=n.min(a.len()) {
        for s in subsets(a.len(), k) {
            let rows = DMatrix::from_fn(k, n, |i, j| a[s[i]][j]);
            let bs = DVector::from_fn(k, |i, _| b[s[i]]);
            let gram = &rows * rows.transpose();
            let Some(chol) = gram.cholesky() else { continue };
            if chol.l().diagonal().iter().any(|d| d.abs() < 1e-10) {
                continue;
            }
            let lambda = chol.solve(&(&rows * &pv - bs));
            let x = &pv - rows.transpose() * lambda;
            if feasible(a, b, x.as_slice(), 1e-9) {
                best = best.min((x - &pv).norm());
            }
        }
    }
    best
}

/// Closest of `samples` uniform points of `[lo, hi]^n` that land in the
/// polytope, or `None` if none do.
pub fn sampled_distance(
    a: &[Vec<f64>],
    b: &[f64],
    p: &[f64],
    lo: f64,
    hi: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut x = vec![0.0; p.len()];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen_range(lo..hi);
        }
        if feasible(a, b, &x, 0.0) {
            let d = x.iter().zip(p).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

/// Earliest `t >= 0` with `|gap - t * closing| = r`, from the quadratic
/// `|s|^2 t^2 - 2 (g.s) t + |g|^2 - r^2 = 0`.
pub fn ttc_quadratic(gap: &[f64], closing: &[f64], r: f64) -> f64 {
    let qa = dot(closing, closing);
    let qb = -2.0 * dot(gap, closing);
    let qc = dot(gap, gap) - r * r;
    if qc <= 0.0 {
        return 0.0;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 || disc < 0.0 {
        return f64::INFINITY;
    }
    let t = (-qb - disc.sqrt()) / (2.0 * qa);
    if t >= 0.0 {
        t
    } else {
        f64::INFINITY
    }
}

/// Per-mode counts and the number of adjacent unequal entries.
pub fn recount<T: PartialEq + Clone>(modes: &[T]) -> (Vec<(T, usize)>, usize) {
    let mut counts: Vec<(T, usize)> = Vec::new();
    let mut switches = 0;
    let mut prev: Option<&T> = None;
    for m in modes {
        match counts.iter_mut().find(|(k, _)| k == m) {
            Some((_, c)) => *c += 1,
            None => counts.push((m.clone(), 1)),
        }
        if let Some(p) = prev {
            if p != m {
                switches += 1;
            }
        }
        prev = Some(m);
    }
    (counts, switches)
}
