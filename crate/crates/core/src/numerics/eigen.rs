//! Dense symmetric eigendecomposition and the largest-eigenpair
//! search, optionally restricted to the nonnegative orthant.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Eigen residual bound, relative to `max(1, max |M_ij|)`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// KKT stationarity bound for the nonnegative search.
pub const STATIONARITY_TOL: f64 = 1e-8;
const RESTARTS: usize = 32;
const RESTART_SEED: u64 = 0x00b3_11ca_fe00;

/// Real symmetric matrix with full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Validates symmetry (exact) and finiteness.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for dimension {n}, got {}",
                n * n,
                data.len()
            )));
        }
        for i in 0..n {
            for j in 0..=i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !a.is_finite() || a != b {
                    return Err(Error::InvalidMatrix { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds the matrix from the lower triangle `f(i, j)` with `j <= i`.
    pub fn from_lower<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self { n: k, data }
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Which vectors the maximisation ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Constraint {
    #[default]
    None,
    Nonnegative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||Mv - lambda v||` (unconstrained) or the KKT stationarity residual (constrained).
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// All eigenvalues (ascending) and the matching unit eigenvectors.
pub fn symmetric_eigen(m: &SymmetricMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.n;
    let eig = nalgebra::SymmetricEigen::try_new(DMatrix::from_row_slice(n, n, &m.data), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolver("symmetric eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
        .collect();
    Ok((values, vectors))
}

fn fix_sign(v: &mut [f64]) {
    let tiny = 1e-12 * v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > tiny) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn top_unconstrained(m: &SymmetricMatrix) -> Result<Eigenpair> {
    let (values, vectors) = symmetric_eigen(m)?;
    let value = *values.last().expect("dimension >= 1");
    let mut vector = vectors.last().expect("dimension >= 1").clone();
    let nv = norm(&vector);
    vector.iter_mut().for_each(|x| *x /= nv);
    fix_sign(&mut vector);
    let mv = m.mul_vec(&vector);
    let residual = norm(
        &mv.iter()
            .zip(&vector)
            .map(|(a, b)| a - value * b)
            .collect::<Vec<_>>(),
    );
    if residual > RESIDUAL_TOL * m.max_abs().max(1.0) {
        return Err(Error::Eigensolver(format!("residual {residual:e} above tolerance")));
    }
    Ok(Eigenpair {
        value,
        vector,
        residual,
    })
}

/// KKT residual for maximising `v^T M v` on the unit sphere within the
/// nonnegative orthant.
fn stationarity_residual(m: &SymmetricMatrix, v: &[f64]) -> f64 {
    let mv = m.mul_vec(v);
    let lambda = dot(v, &mv);
    mv.iter()
        .zip(v)
        .map(|(g, x)| {
            let r = g - lambda * x;
            if *x > 0.0 {
                r * r
            } else {
                r.max(0.0).powi(2)
            }
        })
        .sum::<f64>()
        .sqrt()
}

/// Projected power iteration on the shifted (positive semidefinite) matrix.
/// Monotone in `v^T M v` because the objective is convex after the shift.
fn projected_ascent(m: &SymmetricMatrix, shift: f64, start: Vec<f64>, iters: usize) -> Vec<f64> {
    let mut v = start;
    for _ in 0..iters {
        let mv = m.mul_vec(&v);
        let mut next: Vec<f64> = mv
            .iter()
            .zip(&v)
            .map(|(a, x)| (a + shift * x).max(0.0))
            .collect();
        let nn = norm(&next);
        if nn == 0.0 {
            break;
        }
        next.iter_mut().for_each(|x| *x /= nn);
        let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta < 1e-15 {
            break;
        }
    }
    v
}

/// Solves the eigenproblem restricted to the support of `v` and keeps the
/// result if it stays in the orthant.
fn polish_on_support(m: &SymmetricMatrix, v: &[f64]) -> Option<Vec<f64>> {
    let cutoff = 1e-9 * v.iter().fold(0.0_f64, |a, x| a.max(*x));
    let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] > cutoff).collect();
    if support.is_empty() {
        return None;
    }
    let sub = m.principal(&support);
    let (_, vecs) = symmetric_eigen(&sub).ok()?;
    let mut u = vecs.last()?.clone();
    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    if u.iter().any(|&x| x < -1e-12) {
        return None;
    }
    let mut out = vec![0.0; v.len()];
    for (k, &i) in support.iter().enumerate() {
        out[i] = u[k].max(0.0);
    }
    let n = norm(&out);
    out.iter_mut().for_each(|x| *x /= n);
    Some(out)
}

fn top_nonnegative(m: &SymmetricMatrix) -> Result<Eigenpair> {
    let n = m.n;
    let (values, _) = symmetric_eigen(m)?;
    let shift = (-values[0]).max(0.0) + 1e-3 * m.max_abs().max(1e-300);
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for _ in 0..RESTARTS {
        let mut s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let ns = norm(&s);
        s.iter_mut().for_each(|x| *x /= ns);
        starts.push(s);
    }
    let mut best: Option<Eigenpair> = None;
    for start in starts {
        let mut v = projected_ascent(m, shift, start, 20_000);
        let mut residual = stationarity_residual(m, &v);
        for _round in 0..8 {
            if residual <= STATIONARITY_TOL {
                break;
            }
            if let Some(p) = polish_on_support(m, &v) {
                let r = stationarity_residual(m, &p);
                if m.quadratic_form(&p) >= m.quadratic_form(&v) - 1e-14 {
                    v = p;
                    residual = r;
                    if residual <= STATIONARITY_TOL {
                        break;
                    }
                }
            }
            v = projected_ascent(m, shift, v, 20_000);
            residual = stationarity_residual(m, &v);
        }
        if residual > STATIONARITY_TOL {
            continue;
        }
        let value = m.quadratic_form(&v);
        if best.as_ref().is_none_or(|b| value > b.value + 1e-13) {
            best = Some(Eigenpair {
                value,
                vector: v,
                residual,
            });
        }
    }
    best.ok_or_else(|| {
        Error::Eigensolver("no restart reached the stationarity tolerance".into())
    })
}

/// Largest eigenvalue of `m` with a unit eigenvector, or with
/// [`Constraint::Nonnegative`] the maximum of `v^T M v` over unit vectors in
/// the nonnegative orthant (a certified lower bound: the returned vector is
/// feasible and KKT-stationary to 1e-8).
pub fn max_eigenpair(m: &SymmetricMatrix, constraint: Constraint) -> Result<Eigenpair> {
    match constraint {
        Constraint::None => top_unconstrained(m),
        Constraint::Nonnegative => top_nonnegative(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(n: usize, d: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::new(n, d.to_vec()).unwrap()
    }

    #[test]
    fn swap_matrix() {
        let e = max_eigenpair(&mat(2, &[0.0, 1.0, 1.0, 0.0]), Constraint::None).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vector[0] - h).abs() < 1e-12 && (e.vector[1] - h).abs() < 1e-12);
    }

    #[test]
    fn diagonal_matrix() {
        let e = max_eigenpair(&mat(2, &[2.0, 0.0, 0.0, 3.0]), Constraint::None).unwrap();
        assert!((e.value - 3.0).abs() < 1e-14);
        assert!(e.vector[0].abs() < 1e-14 && (e.vector[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orthant_constraint_changes_the_answer() {
        let m = mat(2, &[0.0, -1.0, -1.0, 0.0]);
        let free = max_eigenpair(&m, Constraint::None).unwrap();
        assert!((free.value - 1.0).abs() < 1e-14);
        let cons = max_eigenpair(&m, Constraint::Nonnegative).unwrap();
        // brute force over the quarter circle
        let grid_max = (0..=10_000)
            .map(|k| {
                let t = std::f64::consts::FRAC_PI_2 * k as f64 / 10_000.0;
                m.quadratic_form(&[t.cos(), t.sin()])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(grid_max.abs() < 1e-15);
        assert!(cons.value.abs() < 1e-12);
        assert!(cons.vector.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(SymmetricMatrix::new(0, vec![]), Err(Error::EmptyMatrix));
        assert!(matches!(
            SymmetricMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]),
            Err(Error::InvalidMatrix { .. })
        ));
        assert!(SymmetricMatrix::new(1, vec![f64::NAN]).is_err());
    }

    fn char_poly_max(n: usize, a: &[f64]) -> f64 {
        if n == 2 {
            let (p, q, r) = (a[0], a[1], a[3]);
            0.5 * (p + r) + (0.25 * (p - r).powi(2) + q * q).sqrt()
        } else {
            // trigonometric solution of the symmetric 3x3 characteristic cubic
            let (a11, a12, a13, a22, a23, a33) = (a[0], a[1], a[2], a[4], a[5], a[8]);
            let p1 = a12 * a12 + a13 * a13 + a23 * a23;
            let q = (a11 + a22 + a33) / 3.0;
            let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            if p == 0.0 {
                return q;
            }
            let b = |x: f64| x / p;
            let (b11, b22, b33) = (b(a11 - q), b(a22 - q), b(a33 - q));
            let (b12, b13, b23) = (b(a12), b(a13), b(a23));
            let det = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13)
                + b13 * (b12 * b23 - b22 * b13);
            let r = (det / 2.0).clamp(-1.0, 1.0);
            q + 2.0 * p * (r.acos() / 3.0).cos()
        }
    }

    proptest! {
        #[test]
        fn matches_characteristic_roots(n in 2usize..=3, raw in proptest::collection::vec(-5.0f64..5.0, 9)) {
            let m = SymmetricMatrix::from_lower(n, |i, j| raw[i * 3 + j]).unwrap();
            let data: Vec<f64> = (0..n * n).map(|k| m.get(k / n, k % n)).collect();
            let expect = char_poly_max(n, &data);
            let e = max_eigenpair(&m, Constraint::None).unwrap();
            prop_assert!((e.value - expect).abs() < 1e-9);
            prop_assert!(e.residual < 1e-10);
        }

        #[test]
        fn constrained_never_beats_unconstrained(raw in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let m = SymmetricMatrix::from_lower(4, |i, j| raw[i * 4 + j]).unwrap();
            let free = max_eigenpair(&m, Constraint::None).unwrap();
            let cons = max_eigenpair(&m, Constraint::Nonnegative).unwrap();
            prop_assert!(cons.value <= free.value + 1e-10);
            prop_assert!(cons.vector.iter().all(|&x| x >= 0.0));
            prop_assert!(cons.residual <= 1e-8);
            // lower bound: beats every coordinate vector
            for i in 0..4 {
                prop_assert!(cons.value >= m.get(i, i) - 1e-10);
            }
        }
    }
}
