//! Dense complex Hermitian kernels: Cholesky, the top eigenpair, and the top
//! generalized eigenpair of a definite pencil.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Relative asymmetry tolerated before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest `|m_ij − conj(m_ji)|` relative to the largest entry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let scale = max_abs(m);
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

pub(crate) fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite {
            what: "matrix entry",
            value: f64::NAN,
        });
    }
    let asymmetry = hermitian_defect(m);
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

/// `(M + Mᴴ)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `v·vᴴ`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
///
/// Eigenvectors are only defined up to a unit phase; fixing one keeps
/// results reproducible and comparable.
pub fn fix_phase(v: &mut CVector) {
    let Some(pivot) = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
    else {
        return;
    };
    let mag = pivot.norm();
    if mag > 0.0 {
        let rot = pivot.conj() / mag;
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Lower-triangular `L` with `E = L·Lᴴ`.
///
/// A pivot at or below `1e-14` of the largest diagonal entry is reported as
/// [`Error::NotPositiveDefinite`]; nothing is regularized.
pub fn cholesky(e: &CMatrix) -> Result<CMatrix> {
    check_hermitian(e)?;
    let n = e.nrows();
    let scale = (0..n).fold(0.0f64, |acc, i| acc.max(e[(i, i)].re.abs()));
    let floor = 1e-14 * scale;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = e[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag.is_nan() || diag <= floor {
            return Err(Error::NotPositiveDefinite { column: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = e[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: CVector = eig.eigenvectors.column(src).into_owned();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Largest eigenvalue of a Hermitian matrix and a unit eigenvector for it.
pub fn hermitian_eig_max(m: &CMatrix) -> Result<(f64, CVector)> {
    if m.nrows() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let eig = hermitian_eigen(m)?;
    Ok((eig.values[0], eig.vectors.column(0).into_owned()))
}

/// Largest `λ` with `U·v = λ·E·v`, for Hermitian `U` and positive definite `E`.
///
/// `E = L·Lᴴ` whitens the pencil into `C = L⁻¹·U·L⁻ᴴ`; the top eigenvector `y`
/// of `C` maps back to `v = L⁻ᴴ·y`, returned with unit norm.
pub fn gen_eig_max(u: &CMatrix, e: &CMatrix) -> Result<(f64, CVector)> {
    check_hermitian(u)?;
    if u.shape() != e.shape() {
        return Err(Error::Dimension(format!(
            "pencil shapes differ: {:?} vs {:?}",
            u.shape(),
            e.shape()
        )));
    }
    let l = cholesky(e)?;
    let singular = || Error::NotPositiveDefinite {
        column: 0,
        pivot: 0.0,
    };
    // C = L⁻¹ U L⁻ᴴ = L⁻¹ (L⁻¹ U)ᴴ because U is Hermitian.
    let left = l.solve_lower_triangular(u).ok_or_else(singular)?;
    let c = l.solve_lower_triangular(&left.adjoint()).ok_or_else(singular)?;
    let (lambda, y) = hermitian_eig_max(&hermitian_part(&c))?;
    let mut v = l.ad_solve_lower_triangular(&y).ok_or_else(singular)?;
    let norm = v.norm();
    v.unscale_mut(norm);
    fix_phase(&mut v);
    Ok((lambda, v))
}

/// Top generalized eigenpair of `(a·I + u·uᴴ, b·I + e·eᴴ)`.
///
/// Off `span{u, e}` the pencil acts as `a/b`, so only the compressed 2×2
/// pencil on that span needs a dense solve. The result matches
/// [`gen_eig_max`] on the full matrices at a fraction of the cost.
pub fn gen_eig_max_loaded_rank_one(a: f64, u: &CVector, b: f64, e: &CVector) -> Result<(f64, CVector)> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::NonPositive {
            what: "identity loading",
            value: a.min(b),
        });
    }
    if u.len() != e.len() {
        return Err(Error::Dimension(format!("{} vs {} entries", u.len(), e.len())));
    }
    let n = u.len();
    let basis = orthonormal_span(&[u, e], 1e-12);
    let k = basis.ncols();
    let complement = a / b;
    if k == 0 {
        let mut v = CVector::zeros(n);
        v[0] = Complex64::new(1.0, 0.0);
        return Ok((complement, v));
    }
    let uq = basis.adjoint() * u;
    let eq = basis.adjoint() * e;
    let ident = CMatrix::identity(k, k);
    let u_small = &ident * Complex64::new(a, 0.0) + outer(&uq);
    let e_small = &ident * Complex64::new(b, 0.0) + outer(&eq);
    let (lambda, y) = gen_eig_max(&u_small, &e_small)?;
    if k < n && complement > lambda {
        // Only reachable when the span carries nothing above the floor.
        let mut v = complement_vector(&basis);
        fix_phase(&mut v);
        return Ok((complement, v));
    }
    let mut v = &basis * y;
    let norm = v.norm();
    v.unscale_mut(norm);
    fix_phase(&mut v);
    Ok((lambda, v))
}

/// Orthonormal basis (as columns) of the span of `vectors`, dropping
/// directions whose residual norm falls below `rel_tol` of the input norm.
pub fn orthonormal_span(vectors: &[&CVector], rel_tol: f64) -> CMatrix {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut cols: Vec<CVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        let mut r = (*v).clone();
        // Two passes of Gram-Schmidt keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&r);
                r -= q * proj;
            }
        }
        let rn = r.norm();
        if rn > rel_tol * norm {
            cols.push(r.unscale(rn));
        }
    }
    let mut basis = CMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        basis.set_column(j, c);
    }
    basis
}

/// A unit vector orthogonal to every column of `basis` (which must not span the space).
fn complement_vector(basis: &CMatrix) -> CVector {
    let n = basis.nrows();
    let mut best = CVector::zeros(n);
    let mut best_norm = -1.0;
    for i in 0..n {
        let mut r = CVector::zeros(n);
        r[i] = Complex64::new(1.0, 0.0);
        for q in basis.column_iter() {
            let proj = q.dotc(&r);
            r -= q * proj;
        }
        let rn = r.norm();
        if rn > best_norm {
            best_norm = rn;
            best = r;
        }
    }
    best.unscale(best_norm)
}
