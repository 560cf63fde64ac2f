//! Direct simulation of the extreme process
//! `M(u) = sup{y_k : t_k ≤ u}` over the atoms `(t_k, y_k)` of a Poisson point
//! process with intensity `Leb ⊗ ν`, `ν{‖y‖ ≥ r} = c r^{-α}`.
//!
//! For `d > 1`, `ν` sits on the coordinate axes with mass `c/d` on each, so
//! the coordinates of `M(u)` are independent Fréchet laws with tail constant
//! `c/d`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default magnitude floor; atoms below it cannot raise a supremum above it.
pub const DEFAULT_R_MIN: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub t: f64,
    /// mark in `[0, ∞)^d`, nonzero in exactly one coordinate
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremeProcessSample {
    pub atoms: Vec<Atom>,
    pub horizon: f64,
    pub tail_constant: f64,
    pub alpha: f64,
    pub dim: usize,
    pub r_min: f64,
}

impl ExtremeProcessSample {
    /// Coordinatewise supremum of marks born by time `u`; 0 for an empty set.
    pub fn m_at(&self, u: f64) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for a in self.atoms.iter().filter(|a| a.t <= u) {
            for (mi, &yi) in m.iter_mut().zip(&a.y) {
                if yi > *mi {
                    *mi = yi;
                }
            }
        }
        m
    }
}

/// Simulate the atoms with `‖y‖ ≥ r_min` on `[0, horizon]`.
pub fn simulate_extreme<R: Rng + ?Sized>(
    c: f64,
    alpha: f64,
    d: usize,
    horizon: f64,
    r_min: f64,
    rng: &mut R,
) -> Result<ExtremeProcessSample> {
    let invalid = |constraint: &str| Error::InvalidParameter {
        law: "extreme_process",
        constraint: constraint.into(),
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("0 < alpha < 1"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("c > 0"));
    }
    if d == 0 {
        return Err(invalid("d >= 1"));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon >= 0"));
    }
    if !(r_min > 0.0) {
        return Err(invalid("r_min > 0"));
    }
    let rate = horizon * c * r_min.powf(-alpha);
    let count = if rate > 0.0 {
        Poisson::new(rate)
            .map_err(|e| invalid(&e.to_string()))?
            .sample(rng) as usize
    } else {
        0
    };
    let mut atoms = Vec::with_capacity(count);
    for _ in 0..count {
        let t = horizon * rng.random::<f64>();
        let u: f64 = 1.0 - rng.random::<f64>();
        let r = r_min * u.powf(-1.0 / alpha);
        let mut y = vec![0.0; d];
        let axis = if d == 1 { 0 } else { rng.random_range(0..d) };
        y[axis] = r;
        atoms.push(Atom { t, y });
    }
    Ok(ExtremeProcessSample {
        atoms,
        horizon,
        tail_constant: c,
        alpha,
        dim: d,
        r_min,
    })
}

/// `P{M(u) ≤ x} = exp(-u c x^{-α})` for `d = 1`.
pub fn frechet_cdf(x: f64, u: f64, c: f64, alpha: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    (-u * c * x.powf(-alpha)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frechet_values() {
        assert!((frechet_cdf(1.0, 1.0, 1.0, 0.5) - (-1f64).exp()).abs() < 1e-16);
        assert_eq!(frechet_cdf(f64::INFINITY, 1.0, 1.0, 0.5), 1.0);
        assert_eq!(frechet_cdf(0.0, 1.0, 1.0, 0.5), 0.0);
        for &x in &[0.1, 1.0, 7.5, 300.0] {
            let one = frechet_cdf(x, 1.0, 1.3, 0.4);
            assert!((frechet_cdf(x, 2.0, 1.3, 0.4) - one * one).abs() < 1e-15);
        }
    }

    #[test]
    fn atom_count_is_poisson_with_nu_tail_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reps = 10_000;
        let counts: Vec<usize> = (0..reps)
            .map(|_| {
                simulate_extreme(1.0, 0.5, 1, 1.0, 1.0, &mut rng)
                    .unwrap()
                    .atoms
                    .len()
            })
            .collect();
        let mean = counts.iter().sum::<usize>() as f64 / reps as f64;
        assert!((mean - 1.0).abs() < 4.0 / (reps as f64).sqrt(), "{mean}");
        let doubled: f64 = (0..reps)
            .map(|_| {
                simulate_extreme(1.0, 0.5, 1, 2.0, 1.0, &mut rng)
                    .unwrap()
                    .atoms
                    .len() as f64
            })
            .sum::<f64>()
            / reps as f64;
        assert!(
            (doubled - 2.0).abs() < 4.0 * (2.0 / reps as f64).sqrt(),
            "{doubled}"
        );
    }

    #[test]
    fn supremum_is_monotone_and_empty_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = simulate_extreme(2.0, 0.5, 2, 1.0, 0.01, &mut rng).unwrap();
        assert_eq!(s.m_at(-1.0), vec![0.0, 0.0]);
        let grid = [0.0, 0.1, 0.3, 0.7, 1.0];
        for w in grid.windows(2) {
            let (a, b) = (s.m_at(w[0]), s.m_at(w[1]));
            assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(simulate_extreme(1.0, 1.0, 1, 1.0, 0.01, &mut rng).is_err());
        assert!(simulate_extreme(0.0, 0.5, 1, 1.0, 0.01, &mut rng).is_err());
        assert!(simulate_extreme(1.0, 0.5, 0, 1.0, 0.01, &mut rng).is_err());
        assert!(simulate_extreme(1.0, 0.5, 1, 1.0, 0.0, &mut rng).is_err());
    }
}
