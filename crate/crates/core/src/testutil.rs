use num_complex::Complex64;
use rand::Rng;

use crate::oracle::complex_gaussian;
use crate::solvers::hermitian_part;
use crate::{CMatrix, CVector};

pub fn random_cvector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    complex_gaussian(rng, n)
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let cols: Vec<CVector> = (0..n).map(|_| complex_gaussian(rng, n)).collect();
    CMatrix::from_columns(&cols)
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    hermitian_part(&random_matrix(rng, n))
}

pub fn random_pd<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let m = random_matrix(rng, n);
    hermitian_part(&(&m * m.adjoint() + CMatrix::identity(n, n) * Complex64::new(0.1, 0.0)))
}
