//! Max-min fair multicast beamforming for two receivers.
//!
//! The relaxed problem is
//!
//! ```text
//! maximize γ  over  W ⪰ 0
//! s.t.  tr(W) ≤ P,  tr(W·A) ≥ γ·σ₁²,  tr(W·B) ≥ γ·σ₂²
//! ```
//!
//! with `A = g₁g₁ᴴ` and `B = g₂g₂ᴴ`. Any part of `W` outside `span{g₁, g₂}`
//! spends power without reaching either receiver, so the problem lives on
//! (at most) a 2-D subspace. There the cheapest `W` reaching SNR `γ` at both
//! receivers is rank one and has a closed form: it is the point of the
//! intersection of two half-planes closest to the origin. The minimum power
//! is linear in `γ`, so the optimal SNR is `P` divided by the power that
//! reaches SNR one.

use num_complex::Complex64;

use super::linalg::{check_hermitian, hermitian_eigen, outer};
use crate::error::{ensure_positive, Error, Result};
use crate::{CMatrix, CVector};

/// Second eigenvalue below this fraction of the trace counts as rank one.
pub const RANK_TOL: f64 = 1e-8;

/// Below this `1 − ρ²` the two channel directions are treated as parallel.
const PARALLEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MaxMinSdpResult {
    /// Largest common SNR both receivers can be guaranteed.
    pub gamma_star: f64,
    /// Optimal transmit covariance `W`.
    pub gram: CMatrix,
    /// Rank-one factor of `gram`, `W = w·wᴴ`.
    pub beamformer: CVector,
    pub power_used: f64,
}

/// Shape of the minimum-power beam that reaches both receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveSet {
    /// Beaming at receiver 2 alone already serves receiver 1.
    Second,
    /// Beaming at receiver 1 alone already serves receiver 2.
    First,
    /// Both SNR constraints bind.
    Both,
}

/// Closed-form minimum-power beamformer for unit SNR at both receivers.
#[derive(Debug, Clone)]
pub struct UnitSnrBeam {
    pub beam: CVector,
    pub power: f64,
    pub active: ActiveSet,
}

/// Least-power `w` with `|g₁ᴴw|²/σ₁² ≥ 1` and `|g₂ᴴw|²/σ₂² ≥ 1`.
///
/// Returns `None` when either channel is identically zero.
pub fn unit_snr_beam(g1: &CVector, g2: &CVector, sigma2_1: f64, sigma2_2: f64) -> Option<UnitSnrBeam> {
    let (n1, n2) = (g1.norm(), g2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return None;
    }
    let u1 = g1.unscale(n1);
    let u2 = g2.unscale(n2);
    // Required projections onto the unit channel directions.
    let s1 = sigma2_1.sqrt() / n1;
    let s2 = sigma2_2.sqrt() / n2;
    let inner = u1.dotc(&u2);
    let rho = inner.norm().min(1.0);
    // Rotating u2 by this phase makes u1ᴴu2 real and nonnegative.
    let align = if rho > 0.0 { inner.conj() / rho } else { Complex64::new(1.0, 0.0) };

    if s2 * rho >= s1 {
        return Some(UnitSnrBeam { power: s2 * s2, beam: u2 * Complex64::new(s2, 0.0), active: ActiveSet::Second });
    }
    if s1 * rho >= s2 {
        return Some(UnitSnrBeam { power: s1 * s1, beam: u1 * Complex64::new(s1, 0.0), active: ActiveSet::First });
    }
    let gap = 1.0 - rho * rho;
    if gap < PARALLEL_TOL {
        // Numerically parallel: whichever requirement is larger decides.
        let (s, u) = if s1 >= s2 { (s1, &u1) } else { (s2, &u2) };
        return Some(UnitSnrBeam { power: s * s, beam: u * Complex64::new(s, 0.0), active: ActiveSet::Both });
    }
    // Both constraints tight: w = α·u1 + β·e^{jψ}·u2 with
    // α + βρ = s1 and αρ + β = s2.
    let alpha = (s1 - rho * s2) / gap;
    let beta = (s2 - rho * s1) / gap;
    let beam = u1 * Complex64::new(alpha, 0.0) + u2 * (align * beta);
    let power = (s1 * s1 - 2.0 * rho * s1 * s2 + s2 * s2) / gap;
    Some(UnitSnrBeam { beam, power, active: ActiveSet::Both })
}

/// Solves the two-receiver max-min problem given the channel factors
/// `g₁`, `g₂` of `A = g₁g₁ᴴ`, `B = g₂g₂ᴴ`.
pub fn maxmin_sdp_factors(
    g1: &CVector,
    g2: &CVector,
    sigma2_1: f64,
    sigma2_2: f64,
    p_total: f64,
) -> Result<MaxMinSdpResult> {
    ensure_positive("noise variance 1", sigma2_1)?;
    ensure_positive("noise variance 2", sigma2_2)?;
    ensure_positive("power budget", p_total)?;
    if g1.len() != g2.len() {
        return Err(Error::Dimension(format!("{} vs {} feeds", g1.len(), g2.len())));
    }
    let n = g1.len();
    let Some(unit) = unit_snr_beam(g1, g2, sigma2_1, sigma2_2) else {
        return Ok(MaxMinSdpResult {
            gamma_star: 0.0,
            gram: CMatrix::zeros(n, n),
            beamformer: CVector::zeros(n),
            power_used: 0.0,
        });
    };
    let gamma_star = p_total / unit.power;
    let beamformer = unit.beam * Complex64::new(gamma_star.sqrt(), 0.0);
    Ok(MaxMinSdpResult {
        gamma_star,
        gram: outer(&beamformer),
        power_used: beamformer.norm_squared(),
        beamformer,
    })
}

/// Rank-one factor `g` of a PSD rank-one matrix `M = g·gᴴ`.
pub fn rank_one_factor(m: &CMatrix) -> Result<CVector> {
    let eig = hermitian_eigen(m)?;
    let trace = eig.values.iter().map(|v| v.max(0.0)).sum::<f64>();
    if trace == 0.0 {
        return Ok(CVector::zeros(m.nrows()));
    }
    let second = eig.values.get(1).copied().unwrap_or(0.0);
    let smallest = *eig.values.last().unwrap();
    if second > RANK_TOL * trace || smallest < -RANK_TOL * trace {
        return Err(Error::NotRankOne { second, trace });
    }
    Ok(eig.vectors.column(0) * Complex64::new(eig.values[0].sqrt(), 0.0))
}

/// Matrix form: `a` and `b` must be PSD and rank one.
pub fn maxmin_sdp(a: &CMatrix, b: &CMatrix, sigma2_1: f64, sigma2_2: f64, p_total: f64) -> Result<MaxMinSdpResult> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let g1 = rank_one_factor(a)?;
    let g2 = rank_one_factor(b)?;
    maxmin_sdp_factors(&g1, &g2, sigma2_1, sigma2_2, p_total)
}

/// Min SNR `min(wᴴAw/σ₁², wᴴBw/σ₂²)` of beamformer `w`.
pub fn min_snr(w: &CVector, a: &CMatrix, b: &CMatrix, sigma2_1: f64, sigma2_2: f64) -> f64 {
    let qa = w.dotc(&(a * w)).re / sigma2_1;
    let qb = w.dotc(&(b * w)).re / sigma2_2;
    qa.min(qb)
}

/// Recovers a beamformer `w` with `w·wᴴ` as good as `result.gram`.
///
/// A rank-one Gram matrix gives its own factor. Otherwise the Gram matrix is
/// purified: with `W = R·Rᴴ`, a Hermitian `Δ` orthogonal to `RᴴR`, `RᴴAR` and
/// `RᴴBR` exists whenever the rank exceeds one (3 real constraints against
/// `r²` unknowns), and `W ← R·(I − Δ/δ)·Rᴴ` with `δ` the largest eigenvalue
/// of `Δ` keeps power and both received powers while dropping the rank.
pub fn rank_one_extract(result: &MaxMinSdpResult, a: &CMatrix, b: &CMatrix, p_total: f64) -> Result<CVector> {
    check_hermitian(&result.gram)?;
    let n = result.gram.nrows();
    if a.shape() != (n, n) || b.shape() != (n, n) {
        return Err(Error::Dimension("gram and channel matrices differ in size".into()));
    }
    let power = result.gram.trace().re;
    if power > p_total * (1.0 + 1e-9) {
        return Err(Error::Config(format!("gram uses {power} W of a {p_total} W budget")));
    }
    if power <= 0.0 {
        return Ok(CVector::zeros(n));
    }
    let constraints = [CMatrix::identity(n, n), a.clone(), b.clone()];
    let mut gram = result.gram.clone();
    let max_iter = n + 2;
    for _ in 0..max_iter {
        let eig = hermitian_eigen(&gram)?;
        let trace = eig.values.iter().map(|v| v.max(0.0)).sum::<f64>();
        let rank = eig.values.iter().filter(|&&v| v > RANK_TOL * trace).count();
        if rank <= 1 {
            return Ok(eig.vectors.column(0) * Complex64::new(eig.values[0].max(0.0).sqrt(), 0.0));
        }
        // R = V_r Λ_r^{1/2}
        let mut r = CMatrix::zeros(n, rank);
        for j in 0..rank {
            let col = eig.vectors.column(j) * Complex64::new(eig.values[j].sqrt(), 0.0);
            r.set_column(j, &col);
        }
        let reduced: Vec<CMatrix> = constraints.iter().map(|m| r.adjoint() * m * &r).collect();
        let Some(delta) = hermitian_null_direction(&reduced, rank) else {
            break;
        };
        let d_eig = hermitian_eigen(&delta)?;
        let (top, bottom) = (d_eig.values[0], *d_eig.values.last().unwrap());
        let step = if top.abs() >= bottom.abs() { top } else { bottom };
        let shrink = CMatrix::identity(rank, rank) - delta * Complex64::new(1.0 / step, 0.0);
        gram = &r * shrink * r.adjoint();
        gram = super::linalg::hermitian_part(&gram);
    }
    let eig = hermitian_eigen(&gram)?;
    let trace = eig.values.iter().map(|v| v.max(0.0)).sum::<f64>();
    let rank = eig.values.iter().filter(|&&v| v > RANK_TOL * trace).count();
    Err(Error::RankReduction { rank, iterations: max_iter })
}

/// A nonzero Hermitian `Δ` (r×r) with `tr(M_k·Δ) = 0` for every `M_k`.
fn hermitian_null_direction(ms: &[CMatrix], r: usize) -> Option<CMatrix> {
    // Real coordinates of a Hermitian matrix: r diagonal entries, then the
    // real and imaginary part of each strictly-upper entry.
    let dim = r * r;
    let rows: Vec<Vec<f64>> = ms
        .iter()
        .map(|m| {
            let mut row = Vec::with_capacity(dim);
            for i in 0..r {
                row.push(m[(i, i)].re);
            }
            for i in 0..r {
                for j in (i + 1)..r {
                    // tr(MΔ) picks up M_ji·Δ_ij + M_ij·Δ_ji = 2·Re(M_ji·Δ_ij).
                    let mji = m[(j, i)];
                    row.push(2.0 * mji.re);
                    row.push(-2.0 * mji.im);
                }
            }
            row
        })
        .collect();

    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut v = row;
        for _ in 0..2 {
            for q in &basis {
                let p: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= p * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    if basis.len() >= dim {
        return None;
    }
    // Best-conditioned coordinate direction after projecting out the row space.
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..dim {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let p: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= p * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
            best = Some((norm, v));
        }
    }
    let (norm, v) = best?;
    if norm < 1e-8 {
        return None;
    }
    let mut delta = CMatrix::zeros(r, r);
    for i in 0..r {
        delta[(i, i)] = Complex64::new(v[i], 0.0);
    }
    let mut idx = r;
    for i in 0..r {
        for j in (i + 1)..r {
            let z = Complex64::new(v[idx], v[idx + 1]);
            delta[(i, j)] = z;
            delta[(j, i)] = z.conj();
            idx += 2;
        }
    }
    Some(delta)
}
