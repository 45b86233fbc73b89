//! Small numerical utilities: compensated summation, least-squares fits,
//! sorted symmetric eigendecompositions and a Lanczos extreme-eigenpair
//! solver for sectors too large to diagonalize densely.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Kahan–Neumaier compensated accumulator.
///
/// The renormalization sums run over up to ~2·10⁵ modes and are compared
/// between different summation orders at 1e-12 relative, which plain f64
/// accumulation does not guarantee.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a generic scalar sequence (real or complex).
pub fn compensated_sum<S, I>(terms: I) -> S
where
    S: ComplexField<RealField = f64>,
    I: IntoIterator<Item = S>,
{
    let mut sum = S::zero();
    let mut compensation = S::zero();
    for term in terms {
        let y = term - compensation.clone();
        let t = sum.clone() + y.clone();
        compensation = (t.clone() - sum) - y;
        sum = t;
    }
    sum
}

/// Result of a least-squares straight-line fit y = slope·x + intercept.
#[derive(Clone, Copy, Debug)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares for y = a·x + b, with the coefficient of
/// determination R². Inputs must have equal length ≥ 2.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "linear_fit needs two same-length samples of size >= 2".into(),
        ));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
        syy += (yi - mean_y) * (yi - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "linear_fit: abscissae are all equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (slope * xi + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Slope of log(y) against log(x); points with non-positive y are rejected.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let mut lx = Vec::with_capacity(x.len());
    let mut ly = Vec::with_capacity(y.len());
    for (&xi, &yi) in x.iter().zip(y) {
        if xi <= 0.0 || yi <= 0.0 {
            return Err(Error::InvalidParameter(
                "log_log_slope needs strictly positive samples".into(),
            ));
        }
        lx.push(xi.ln());
        ly.push(yi.ln());
    }
    Ok(linear_fit(&lx, &ly)?.slope)
}

/// `points` log-spaced values over [lo, hi], inclusive.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// `points` linearly spaced values over [lo, hi], inclusive.
pub fn lin_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Dense symmetric eigendecomposition with eigenvalues sorted ascending and
/// eigenvector columns permuted to match.
///
/// nalgebra's QR-based solver can mispair values and vectors when the
/// spectrum carries exact degeneracies (symmetry partners of uncoupled
/// modes produce those routinely here), so each column's eigenvalue is
/// re-derived as its Rayleigh quotient and the residuals are verified; a
/// cyclic Jacobi pass is the fallback.
pub fn symmetric_eigen_sorted(matrix: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let dim = matrix.nrows();
    let scale = max_abs_entry(&matrix).max(1.0);
    let eig = matrix.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(dim);
    let mut sound = true;
    for j in 0..dim {
        let q = eig.eigenvectors.column(j);
        let aq = &matrix * q;
        let quotient = q.dot(&aq);
        if (aq - q * quotient).norm() > 1e-9 * scale * (dim as f64).sqrt() {
            sound = false;
            break;
        }
        pairs.push((quotient, j));
    }
    if !sound {
        return jacobi_eigen_sorted(matrix);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = DVector::from_iterator(dim, pairs.iter().map(|p| p.0));
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &(_, j)) in pairs.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(j));
    }
    (values, vectors)
}

/// Cyclic Jacobi eigensolver; slower than QR but immune to the pairing
/// problem.
fn jacobi_eigen_sorted(mut a: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = max_abs_entry(&a).max(1.0);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &v.column(i));
    }
    (values, vectors)
}

/// Largest |eigenvalue| of a symmetric matrix (its operator norm).
pub fn symmetric_operator_norm(matrix: DMatrix<f64>) -> f64 {
    let eig = matrix.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0, |acc, &v| acc.max(v.abs()))
}

/// Largest absolute entry; the max norm used by the resolvent identities.
pub fn max_abs_entry<S: ComplexField<RealField = f64>>(matrix: &DMatrix<S>) -> f64 {
    matrix
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.clone().abs()))
}

/// A symmetric linear operator given by its action on vectors; lets the
/// Lanczos path run matrix-free on sectors above the dense ceiling.
pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
}

impl SymOp for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }
}

/// Smallest eigenpair of a symmetric operator by Lanczos iteration with full
/// reorthogonalization, restarted from the current Ritz vector until the
/// residual ‖Av − λv‖ drops below `tol`.
pub fn lanczos_smallest(
    op: &dyn SymOp,
    tol: f64,
    max_restarts: usize,
    seed: u64,
) -> Result<(f64, DVector<f64>)> {
    use rand::{Rng, SeedableRng};
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::InvalidParameter("lanczos on empty operator".into()));
    }
    if dim == 1 {
        let e = DVector::from_element(1, 1.0);
        return Ok((op.apply(&e)[0], e));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut start: DVector<f64> =
        DVector::from_iterator(dim, (0..dim).map(|_| rng.gen_range(-1.0..1.0)));
    start /= start.norm();

    let block = 60.min(dim);
    for _ in 0..max_restarts {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(block);
        let mut alphas = Vec::with_capacity(block);
        let mut betas = Vec::with_capacity(block);
        basis.push(start.clone());
        let mut w = op.apply(&basis[0]);
        let mut alpha = basis[0].dot(&w);
        alphas.push(alpha);
        w -= &basis[0] * alpha;
        for j in 1..block {
            // full reorthogonalization keeps the Ritz values clean
            for b in &basis {
                let c = b.dot(&w);
                w -= b * c;
            }
            let beta = w.norm();
            if beta < 1e-14 {
                break;
            }
            betas.push(beta);
            let q = &w / beta;
            w = op.apply(&q);
            alpha = q.dot(&w);
            alphas.push(alpha);
            w -= &q * alpha;
            w -= &basis[j - 1] * beta;
            basis.push(q);
        }
        let k = alphas.len();
        let mut tri = DMatrix::zeros(k, k);
        for i in 0..k {
            tri[(i, i)] = alphas[i];
            if i + 1 < k {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let (vals, vecs) = symmetric_eigen_sorted(tri);
        let ritz_value = vals[0];
        let mut ritz = DVector::zeros(dim);
        for (j, b) in basis.iter().enumerate() {
            ritz += b * vecs[(j, 0)];
        }
        ritz /= ritz.norm();
        let residual = (op.apply(&ritz) - &ritz * ritz_value).norm();
        if residual <= tol {
            return Ok((ritz_value, ritz));
        }
        start = ritz;
    }
    Err(Error::IterationLimit {
        context: "lanczos_smallest",
        iterations: max_restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kahan_recovers_ill_conditioned_sum() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert_relative_eq!(k.value(), 1.0 + 1e-12, max_relative = 1e-15);
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let fit = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, -1.0]);
        let (vals, vecs) = symmetric_eigen_sorted(m.clone());
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        for k in 0..3 {
            let v = vecs.column(k).clone_owned();
            let r = (&m * &v - &v * vals[k]).norm();
            assert!(r < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn lanczos_matches_dense_on_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let (vals, _) = symmetric_eigen_sorted(m.clone());
        let (lam, vec) = lanczos_smallest(&m, 1e-12, 50, 1).unwrap();
        assert_relative_eq!(lam, vals[0], epsilon = 1e-10);
        let r = (&m * &vec - &vec * lam).norm();
        assert!(r < 1e-11, "residual {r}");
    }
}
