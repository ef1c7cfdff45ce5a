//! Time allocation of the two-slot reference scheme as a tiny LP:
//!
//! ```text
//! maximize u₁ + u₂
//! s.t.  u₁ ≤ t₁·c,  u₁ ≤ t₂·a,  u₂ ≤ t₁·d,  u₂ ≤ t₃·b,  u ≥ 0,
//!       t₁ + t₂ + t₃ = 1,  t ≥ 0
//! ```
//!
//! For a fixed `t₁` the best split of the remaining `1 − t₁` is greedy:
//! each forward slot only needs enough time to match its return-link cap,
//! and when time runs short the slot with the larger rate coefficient is
//! served first. The resulting value `g(t₁)` is concave and piecewise
//! linear, so its maximum sits at an endpoint or at one of the two kinks
//! where a forward slot stops being time-limited.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub u1: f64,
    pub u2: f64,
    pub objective: f64,
}

impl LpResult {
    /// Largest violation of any LP constraint at this point, for the given coefficients.
    pub fn max_violation(&self, c: f64, d: f64, a: f64, b: f64) -> f64 {
        let (c, d, a, b) = (c.max(0.0), d.max(0.0), a.max(0.0), b.max(0.0));
        [
            self.u1 - self.t1 * c,
            self.u1 - self.t2 * a,
            self.u2 - self.t1 * d,
            self.u2 - self.t3 * b,
            -self.u1,
            -self.u2,
            -self.t1,
            -self.t2,
            -self.t3,
            (self.t1 + self.t2 + self.t3 - 1.0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Greedy split of the forward time `1 − t1` for fixed `t1`.
fn split(t1: f64, c: f64, d: f64, a: f64, b: f64) -> LpResult {
    let rest = 1.0 - t1;
    let cap1 = t1 * c;
    let cap2 = t1 * d;
    let need2 = if a > 0.0 { cap1 / a } else { 0.0 };
    let need3 = if b > 0.0 { cap2 / b } else { 0.0 };
    let (t2, t3) = if need2 + need3 <= rest {
        let spare = rest - need2 - need3;
        (need2 + 0.5 * spare, need3 + 0.5 * spare)
    } else if a >= b {
        let t2 = need2.min(rest);
        (t2, rest - t2)
    } else {
        let t3 = need3.min(rest);
        (rest - t3, t3)
    };
    let u1 = cap1.min(t2 * a);
    let u2 = cap2.min(t3 * b);
    LpResult { t1, t2, t3, u1, u2, objective: u1 + u2 }
}

/// Solves the allocation LP exactly. Negative coefficients (a link the
/// eavesdropper hears better) contribute nothing and are clamped to zero.
pub fn tiny_lp(c: f64, d: f64, a: f64, b: f64) -> Result<LpResult> {
    for (what, v) in [("c", c), ("d", d), ("a", a), ("b", b)] {
        ensure_finite(what, v)?;
    }
    let (c, d, a, b) = (c.max(0.0), d.max(0.0), a.max(0.0), b.max(0.0));
    if c.min(a) == 0.0 && d.min(b) == 0.0 {
        return Ok(LpResult { t1: 1.0 / 3.0, t2: 1.0 / 3.0, t3: 1.0 / 3.0, u1: 0.0, u2: 0.0, objective: 0.0 });
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let (r2, r3) = (ratio(c, a), ratio(d, b));
    let mut candidates = vec![0.0, 1.0, 1.0 / (1.0 + r2 + r3)];
    // Kinks of the greedy branch: the favoured slot alone exhausts the time.
    if a >= b {
        candidates.push(1.0 / (1.0 + r2));
    } else {
        candidates.push(1.0 / (1.0 + r3));
    }
    let mut best = split(candidates[0], c, d, a, b);
    for &t1 in &candidates[1..] {
        let s = split(t1, c, d, a, b);
        if s.objective > best.objective {
            best = s;
        }
    }
    Ok(best)
}

/// Objective at a fixed `(t1, t2)`, `t3 = 1 − t1 − t2`; the same clamping as [`tiny_lp`].
pub fn lp_objective_at(t1: f64, t2: f64, c: f64, d: f64, a: f64, b: f64) -> f64 {
    let t3 = 1.0 - t1 - t2;
    let u1 = (t1 * c.max(0.0)).min(t2 * a.max(0.0));
    let u2 = (t1 * d.max(0.0)).min(t3 * b.max(0.0));
    u1 + u2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::lp_grid_oracle;

    #[test]
    fn symmetric_instance() {
        let r = tiny_lp(2.0, 2.0, 4.0, 4.0).unwrap();
        assert!((r.t1 - 0.5).abs() < 1e-12);
        assert!((r.t2 - 0.25).abs() < 1e-12 && (r.t3 - 0.25).abs() < 1e-12);
        assert!((r.u1 - 1.0).abs() < 1e-12 && (r.u2 - 1.0).abs() < 1e-12);
        assert!((r.objective - 2.0).abs() < 1e-12);
        assert!(r.max_violation(2.0, 2.0, 4.0, 4.0) < 1e-12);
        // A fine grid lands on the vertex exactly here.
        assert!((lp_grid_oracle(2.0, 2.0, 4.0, 4.0, 1000) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dead_return_link() {
        let r = tiny_lp(0.0, 3.0, 5.0, 2.0).unwrap();
        assert_eq!(r.u1, 0.0);
        assert_eq!(r.t2, 0.0);
        assert!((r.t1 + r.t3 - 1.0).abs() < 1e-15);
        // u2 = t1·3 = (1 − t1)·2  ⇒  t1 = 0.4
        assert!((r.objective - 1.2).abs() < 1e-12);
    }

    #[test]
    fn homogeneity() {
        let base = tiny_lp(1.3, 0.4, 2.2, 5.1).unwrap();
        for k in [0.5, 2.0, 17.0] {
            let s = tiny_lp(1.3 * k, 0.4 * k, 2.2 * k, 5.1 * k).unwrap();
            assert!((s.objective - k * base.objective).abs() < 1e-12 * k);
        }
    }

    #[test]
    fn all_dead_gives_zero() {
        let r = tiny_lp(-1.0, 0.0, -2.0, 0.0).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!((r.t1 + r.t2 + r.t3 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_forward_coefficient_clamped() {
        let r = tiny_lp(1.0, 1.0, -3.0, 2.0).unwrap();
        assert_eq!(r.u1, 0.0);
        assert!(r.max_violation(1.0, 1.0, -3.0, 2.0) < 1e-12);
        assert!((r.objective - tiny_lp(1.0, 1.0, 0.0, 2.0).unwrap().objective).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(tiny_lp(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }
}
