//! Complex dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Hermitian part `(A + Aᴴ)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted in
/// descending order with eigenvectors as matching columns.
pub fn hermitian_eig(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Largest eigenvalue and a unit eigenvector.
pub fn leading_eigenpair(a: &CMatrix) -> (f64, CVector) {
    let (values, vectors) = hermitian_eig(a);
    (values[0], vectors.column(0).into_owned())
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    let (values, _) = hermitian_eig(a);
    *values.last().expect("non-empty matrix")
}

fn split(a: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

/// Complex product through four real products, which use the blocked
/// real kernel.
pub fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// `Re Tr(A B)` for square matrices of equal size.
pub fn re_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// `xᴴ A x` (real part; exact for Hermitian `A`).
pub fn quad_form(a: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(a * x)).re
}

pub fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

pub fn real_to_complex(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)))
}

pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Frobenius-norm relative difference `‖A − B‖ / max(‖B‖, tiny)`.
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Dense real symmetric solve used by the interior-point method.
pub fn solve_spd(m: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    match m.clone().cholesky() {
        Some(ch) => Some(ch.solve(rhs)),
        None => m.lu().solve(rhs),
    }
}
