//! Exact optimization over small polytopes `{x : E x = r, G x ≤ h}`.
//!
//! Dimensions here never exceed six, so linear programs are solved by
//! enumerating vertices and projections by enumerating active sets. Both are
//! exact up to floating-point error and fully deterministic.

use nalgebra::{DMatrix, DVector};

/// Rows with a residual norm below this are treated as linearly dependent.
const DEPENDENCE: f64 = 1e-9;
/// Smallest pivot accepted when solving a square system.
const PIVOT: f64 = 1e-10;
/// Slack when checking inequality rows at a candidate point.
const SLACK: f64 = 1e-10;
/// Vertices closer than this are merged.
const MERGE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Row {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Row { coeffs, rhs }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    fn padded(&self, extra: usize) -> Row {
        let mut coeffs = self.coeffs.clone();
        coeffs.extend(std::iter::repeat_n(0.0, extra));
        Row::new(coeffs, self.rhs)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Polytope {
    dim: usize,
    eq: Vec<Row>,
    ineq: Vec<Row>,
}

impl Polytope {
    /// `{x ∈ [0,1]^dim : E x = r}` with the equality rows reduced to an
    /// orthonormal independent set. `None` when the equalities contradict
    /// each other.
    pub fn boxed(dim: usize, equalities: &[Row]) -> Option<Self> {
        let mut p = Polytope {
            dim,
            eq: Vec::new(),
            ineq: Vec::new(),
        };
        p.add_unit_box(0, dim);
        for row in equalities {
            if !p.add_equality(row) {
                return None;
            }
        }
        Some(p)
    }

    /// The unit box alone.
    pub fn unit_box(dim: usize) -> Self {
        let mut p = Polytope {
            dim,
            eq: Vec::new(),
            ineq: Vec::new(),
        };
        p.add_unit_box(0, dim);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn add_unit_box(&mut self, from: usize, to: usize) {
        for i in from..to {
            let mut lower = vec![0.0; self.dim];
            lower[i] = -1.0;
            self.ineq.push(Row::new(lower, 0.0));
            let mut upper = vec![0.0; self.dim];
            upper[i] = 1.0;
            self.ineq.push(Row::new(upper, 1.0));
        }
    }

    /// Gram-Schmidt step. Returns false on a contradictory row.
    fn add_equality(&mut self, row: &Row) -> bool {
        let mut a = row.coeffs.clone();
        let mut r = row.rhs;
        for u in &self.eq {
            let proj: f64 = u.coeffs.iter().zip(&a).map(|(x, y)| x * y).sum();
            for (ai, ui) in a.iter_mut().zip(&u.coeffs) {
                *ai -= proj * ui;
            }
            r -= proj * u.rhs;
        }
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < DEPENDENCE {
            return r.abs() <= DEPENDENCE;
        }
        self.eq.push(Row::new(a.iter().map(|v| v / norm).collect(), r / norm));
        true
    }

    /// Adds an equality row; `None` if it contradicts the existing ones.
    pub fn with_equality(mut self, row: &Row) -> Option<Self> {
        self.add_equality(row).then_some(self)
    }

    pub fn with_inequality(mut self, row: Row) -> Self {
        debug_assert_eq!(row.coeffs.len(), self.dim);
        self.ineq.push(row);
        self
    }

    /// Adds `|row · x - row.rhs| ≤ bound` as two inequality rows.
    pub fn with_band(self, row: &Row, bound: f64) -> Self {
        let upper = Row::new(row.coeffs.clone(), row.rhs + bound);
        let lower = Row::new(row.coeffs.iter().map(|c| -c).collect(), bound - row.rhs);
        self.with_inequality(upper).with_inequality(lower)
    }

    /// Appends `extra` unconstrained coordinates.
    pub fn lifted(&self, extra: usize) -> Self {
        Polytope {
            dim: self.dim + extra,
            eq: self.eq.iter().map(|r| r.padded(extra)).collect(),
            ineq: self.ineq.iter().map(|r| r.padded(extra)).collect(),
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.ineq.iter().all(|row| row.dot(x) <= row.rhs + SLACK)
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let free = self.dim - self.eq.len();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for_each_subset(self.ineq.len(), free, true, &mut |subset| {
            let rows: Vec<&Row> = self.eq.iter().chain(subset.iter().map(|&i| &self.ineq[i])).collect();
            if let Some(x) = solve_square(&rows) {
                if self.contains(&x) && !out.iter().any(|v| distance(v, &x) < MERGE) {
                    out.push(x);
                }
            }
        });
        out
    }

    /// Minimum of `c · x` and a minimizing vertex.
    pub fn minimize(&self, c: &[f64]) -> Option<(f64, Vec<f64>)> {
        self.vertices()
            .into_iter()
            .map(|v| (c.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>(), v))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Euclidean projection of `point` onto the polytope.
    pub fn project(&self, point: &[f64]) -> Option<Vec<f64>> {
        let free = self.dim - self.eq.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for_each_subset(self.ineq.len(), free, false, &mut |subset| {
            let rows: Vec<&Row> = self.eq.iter().chain(subset.iter().map(|&i| &self.ineq[i])).collect();
            if let Some(x) = project_affine(&rows, point) {
                if self.contains(&x) {
                    let d = distance(&x, point);
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd - 1e-15) {
                        best = Some((d, x));
                    }
                }
            }
        });
        best.map(|(_, x)| x)
    }

    /// Largest spread of any coordinate across the vertices.
    pub fn coordinate_range(vertices: &[Vec<f64>]) -> f64 {
        let Some(first) = vertices.first() else { return 0.0 };
        (0..first.len())
            .map(|i| {
                let (lo, hi) = vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v[i]), hi.max(v[i]))
                });
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Calls `f` on every subset of `0..n` of size `k` (`exact`) or of size at most `k`.
fn for_each_subset(n: usize, k: usize, exact: bool, f: &mut dyn FnMut(&[usize])) {
    fn walk(start: usize, n: usize, k: usize, exact: bool, current: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if !exact || current.len() == k {
            f(current);
        }
        if current.len() == k {
            return;
        }
        for i in start..n {
            current.push(i);
            walk(i + 1, n, k, exact, current, f);
            current.pop();
        }
    }
    walk(0, n, k, exact, &mut Vec::with_capacity(k), f);
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn solve_square(rows: &[&Row]) -> Option<Vec<f64>> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i].coeffs[j]);
    let b = DVector::from_fn(n, |i, _| rows[i].rhs);
    let lu = m.full_piv_lu();
    let u = lu.u();
    if (0..n).any(|i| u[(i, i)].abs() < PIVOT) {
        return None;
    }
    lu.solve(&b).map(|x| x.iter().copied().collect())
}

/// Projection of `point` onto `{x : M x = b}`; `None` if the rows are dependent.
fn project_affine(rows: &[&Row], point: &[f64]) -> Option<Vec<f64>> {
    if rows.is_empty() {
        return Some(point.to_vec());
    }
    let k = rows.len();
    let n = point.len();
    let m = DMatrix::from_fn(k, n, |i, j| rows[i].coeffs[j]);
    let p = DVector::from_column_slice(point);
    let b = DVector::from_fn(k, |i, _| rows[i].rhs);
    let gram = &m * m.transpose();
    let lu = gram.full_piv_lu();
    let u = lu.u();
    if (0..k).any(|i| u[(i, i)].abs() < PIVOT) {
        return None;
    }
    let lambda = lu.solve(&(&m * &p - b))?;
    let x = p - m.transpose() * lambda;
    Some(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_vertices() {
        let v = Polytope::unit_box(2).vertices();
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn segment_on_a_line() {
        // q1 = q0 - 1/2 inside the unit square
        let p = Polytope::boxed(2, &[Row::new(vec![-1.0, 1.0], -0.5)]).unwrap();
        let mut v = p.vertices();
        v.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(v.len(), 2);
        assert!(distance(&v[0], &[0.5, 0.0]) < 1e-12);
        assert!(distance(&v[1], &[1.0, 0.5]) < 1e-12);
        let x = p.project(&[0.25, 0.25]).unwrap();
        assert!(distance(&x, &[0.5, 0.0]) < 1e-12);
    }

    #[test]
    fn contradictory_rows() {
        let rows = [Row::new(vec![1.0, 0.0], 0.2), Row::new(vec![2.0, 0.0], 0.6)];
        assert!(Polytope::boxed(2, &rows).is_none());
        let rows = [Row::new(vec![1.0, 0.0], 0.2), Row::new(vec![2.0, 0.0], 0.4)];
        assert_eq!(Polytope::boxed(2, &rows).unwrap().vertices().len(), 2);
    }

    #[test]
    fn empty_when_outside_box() {
        let p = Polytope::boxed(1, &[Row::new(vec![1.0], 1.5)]).unwrap();
        assert!(p.vertices().is_empty());
        assert!(p.project(&[0.5]).is_none());
    }

    #[test]
    fn lp_minimum() {
        let p = Polytope::unit_box(3).with_inequality(Row::new(vec![-1.0, -1.0, -1.0], -1.5));
        let (value, _) = p.minimize(&[1.0, 2.0, 3.0]).unwrap();
        assert!((value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn projection_inside_is_identity() {
        let p = Polytope::unit_box(2);
        let x = p.project(&[0.3, 0.7]).unwrap();
        assert!(distance(&x, &[0.3, 0.7]) < 1e-15);
        let x = p.project(&[1.4, -2.0]).unwrap();
        assert!(distance(&x, &[1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn epigraph_of_absolute_difference() {
        // min t subject to |q0 - q1| <= t and q0 = 0.9, q1 <= 0.3
        let p = Polytope::boxed(2, &[Row::new(vec![1.0, 0.0], 0.9)])
            .unwrap()
            .with_inequality(Row::new(vec![0.0, 1.0], 0.3))
            .lifted(1)
            .with_inequality(Row::new(vec![1.0, -1.0, -1.0], 0.0))
            .with_inequality(Row::new(vec![-1.0, 1.0, -1.0], 0.0))
            .with_inequality(Row::new(vec![0.0, 0.0, 1.0], 2.0));
        let (t, x) = p.minimize(&[0.0, 0.0, 1.0]).unwrap();
        assert!((t - 0.6).abs() < 1e-12);
        assert!((x[1] - 0.3).abs() < 1e-12);
    }
}
