//! Brute-force reference computations.
//!
//! These only share the problem statement with the solvers: grid searches and
//! random sampling, no closed forms. They back the unit tests, the
//! acceptance suite and `satsec oracle`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{CMatrix, CVector};

/// Circularly-symmetric complex Gaussian vector with unit variance per entry.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    })
}

/// Best min-SNR of a full-power beam restricted to `span{g₁, g₂}`.
///
/// Unit beams `cos θ·q₁ + e^{jφ}·sin θ·q₂` over an orthonormal basis of
/// the span are scanned on a `grid × grid` lattice of `θ ∈ [0, π/2]`,
/// `φ ∈ [0, 2π)`.
pub fn sdp_grid_oracle(g1: &CVector, g2: &CVector, sigma2_1: f64, sigma2_2: f64, p_total: f64, grid: usize) -> f64 {
    let grid = grid.max(2);
    let n1 = g1.norm();
    if n1 == 0.0 || g2.norm() == 0.0 {
        return 0.0;
    }
    let q1 = g1.unscale(n1);
    let mut r = g2 - &q1 * q1.dotc(g2);
    r -= &q1 * q1.dotc(&r);
    let rn = r.norm();
    if rn <= 1e-12 * g2.norm() {
        // Parallel channels: one direction, nothing to scan.
        let a = g1.dotc(&q1).norm_sqr() / sigma2_1;
        let b = g2.dotc(&q1).norm_sqr() / sigma2_2;
        return p_total * a.min(b);
    }
    let q2 = r.unscale(rn);
    // gᵢᴴw = cos θ·αᵢ + sin θ·e^{jφ}·βᵢ
    let coef = |g: &CVector, sigma2: f64| {
        let alpha = g.dotc(&q1);
        let beta = g.dotc(&q2);
        let cross = alpha.conj() * beta;
        (alpha.norm_sqr() / sigma2, beta.norm_sqr() / sigma2, cross / sigma2)
    };
    let (a1, b1, x1) = coef(g1, sigma2_1);
    let (a2, b2, x2) = coef(g2, sigma2_2);
    let phis: Vec<(f64, f64)> = (0..grid)
        .map(|l| {
            let phi = 2.0 * PI * l as f64 / grid as f64;
            let (s, c) = phi.sin_cos();
            // Re(x·e^{jφ})
            (x1.re * c - x1.im * s, x2.re * c - x2.im * s)
        })
        .collect();
    let mut best = 0.0f64;
    for k in 0..grid {
        let theta = FRAC_PI_2 * k as f64 / (grid - 1) as f64;
        let (s, c) = theta.sin_cos();
        let base1 = a1 * c * c + b1 * s * s;
        let base2 = a2 * c * c + b2 * s * s;
        let mix = 2.0 * c * s;
        for &(f1, f2) in &phis {
            let snr = (base1 + mix * f1).min(base2 + mix * f2);
            best = best.max(snr);
        }
    }
    p_total * best
}

/// Grid search of the time-allocation LP over `(t₁, t₂)` with spacing `1/grid`.
pub fn lp_grid_oracle(c: f64, d: f64, a: f64, b: f64, grid: usize) -> f64 {
    lp_grid_window(c, d, a, b, grid, (0.0, 1.0), (0.0, 1.0)).0
}

fn lp_value(t1: f64, t2: f64, c: f64, d: f64, a: f64, b: f64) -> f64 {
    let t3 = 1.0 - t1 - t2;
    (t1 * c).min(t2 * a) + (t1 * d).min(t3 * b)
}

/// Scans a `(grid + 1)²` lattice over a window of `(t₁, t₂)`, skipping points off the simplex.
fn lp_grid_window(c: f64, d: f64, a: f64, b: f64, grid: usize, w1: (f64, f64), w2: (f64, f64)) -> (f64, f64, f64) {
    let (c, d, a, b) = (c.max(0.0), d.max(0.0), a.max(0.0), b.max(0.0));
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=grid {
        let t1 = w1.0 + (w1.1 - w1.0) * i as f64 / grid as f64;
        for j in 0..=grid {
            let t2 = w2.0 + (w2.1 - w2.0) * j as f64 / grid as f64;
            if t1 < 0.0 || t2 < 0.0 || t1 + t2 > 1.0 {
                continue;
            }
            let v = lp_value(t1, t2, c, d, a, b);
            if v > best.0 {
                best = (v, t1, t2);
            }
        }
    }
    best
}

/// Exact LP optimum by vertex enumeration.
///
/// With `x = (t₁, t₂, u₁, u₂)` and `t₃ = 1 − t₁ − t₂` the feasible set is a
/// bounded polytope cut out by nine inequalities. Every choice of four of
/// them that pins down a point is solved and kept if feasible.
pub fn lp_vertex_oracle(c: f64, d: f64, a: f64, b: f64) -> f64 {
    let (c, d, a, b) = (c.max(0.0), d.max(0.0), a.max(0.0), b.max(0.0));
    // Rows of G·x ≤ h.
    let rows: [([f64; 4], f64); 9] = [
        ([-c, 0.0, 1.0, 0.0], 0.0),
        ([0.0, -a, 1.0, 0.0], 0.0),
        ([-d, 0.0, 0.0, 1.0], 0.0),
        ([b, b, 0.0, 1.0], b),
        ([0.0, 0.0, -1.0, 0.0], 0.0),
        ([0.0, 0.0, 0.0, -1.0], 0.0),
        ([-1.0, 0.0, 0.0, 0.0], 0.0),
        ([0.0, -1.0, 0.0, 0.0], 0.0),
        ([1.0, 1.0, 0.0, 0.0], 1.0),
    ];
    let scale = 1.0 + c.max(d).max(a).max(b);
    let mut best = 0.0f64;
    for i in 0..9 {
        for j in (i + 1)..9 {
            for k in (j + 1)..9 {
                for l in (k + 1)..9 {
                    let pick = [i, j, k, l];
                    let g = nalgebra::Matrix4::from_fn(|r, col| rows[pick[r]].0[col]);
                    let h = nalgebra::Vector4::from_fn(|r, _| rows[pick[r]].1);
                    let Some(x) = g.lu().solve(&h) else { continue };
                    let feasible = rows.iter().all(|(gr, hr)| {
                        gr.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= hr + 1e-12 * scale
                    });
                    if feasible && x.iter().all(|v| v.is_finite()) {
                        best = best.max(x[2] + x[3]);
                    }
                }
            }
        }
    }
    best
}

/// Largest Rayleigh quotient `vᴴUv / vᴴEv` over `samples` random complex Gaussian vectors.
pub fn rayleigh_sampling_max<R: Rng + ?Sized>(u: &CMatrix, e: &CMatrix, samples: usize, rng: &mut R) -> f64 {
    let n = u.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut v = CVector::zeros(n);
    let mut uv = CVector::zeros(n);
    let mut ev = CVector::zeros(n);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        for z in v.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z = Complex64::new(re, im);
        }
        uv.gemv(one, u, &v, zero);
        ev.gemv(one, e, &v, zero);
        let num = v.dotc(&uv).re;
        let den = v.dotc(&ev).re;
        best = best.max(num / den);
    }
    best
}
