//! Replica simulation shared by every experiment: one trajectory per replica,
//! snapshotted at all step indices any analysis needs.

use rayon::prelude::*;

use crate::dist::JointStepLaw;
use crate::error::Result;
use crate::extreme::simulate_extreme;
use crate::rng::{jitter_value, oracle_rng, replica_rng};
use crate::walk::{run_trajectory, Snapshot, WalkState};

#[derive(Clone, Debug)]
pub struct ReplicaSet {
    /// sorted, distinct step indices
    pub record_at: Vec<u64>,
    pub primes: Vec<u64>,
    /// `[replica][record index]`
    pub snapshots: Vec<Vec<Snapshot>>,
    /// `U(-1/2, 1/2)` per `[replica][record index][prime index]`, flattened
    /// per replica; shared by every integer statistic of that cell
    pub jitter: Vec<Vec<f64>>,
}

impl ReplicaSet {
    pub fn replicas(&self) -> usize {
        self.snapshots.len()
    }

    pub fn record_index(&self, step: u64) -> usize {
        self.record_at
            .binary_search(&step)
            .unwrap_or_else(|_| panic!("step {step} was not recorded"))
    }

    pub fn prime_index(&self, p: u64) -> usize {
        self.primes
            .binary_search(&p)
            .unwrap_or_else(|_| panic!("prime {p} was not tracked"))
    }

    /// One value per replica.
    pub fn column(&self, step: u64, f: impl Fn(&Snapshot) -> f64) -> Vec<f64> {
        let i = self.record_index(step);
        self.snapshots.iter().map(|s| f(&s[i])).collect()
    }

    pub fn jitter_column(&self, step: u64, p: u64) -> Vec<f64> {
        let k = self.record_index(step) * self.primes.len() + self.prime_index(p);
        self.jitter.iter().map(|j| j[k]).collect()
    }
}

/// Simulate `replicas` independent trajectories of `max(record_at)` steps.
/// Replica `r` uses stream `r` of `seed`, so the result does not depend on
/// the thread count.
pub fn simulate(
    law: &JointStepLaw,
    seed: u64,
    replicas: usize,
    record_at: &[u64],
    primes: &[u64],
) -> Result<ReplicaSet> {
    let mut record_at = record_at.to_vec();
    record_at.sort_unstable();
    record_at.dedup();
    let mut primes = primes.to_vec();
    primes.sort_unstable();
    primes.dedup();
    let n = record_at.last().copied().unwrap_or(0);
    let runs: Vec<(Vec<Snapshot>, Vec<f64>)> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let tr = run_trajectory(law, n, &mut rng, &record_at, &primes, WalkState::new())?;
            let jitter = record_at
                .iter()
                .flat_map(|&k| primes.iter().map(move |&p| jitter_value(seed, r, k, p)))
                .collect();
            Ok((tr.snapshots, jitter))
        })
        .collect::<Result<_>>()?;
    let (snapshots, jitter) = runs.into_iter().unzip();
    Ok(ReplicaSet {
        record_at,
        primes,
        snapshots,
        jitter,
    })
}

/// Draws of `(M_1(u), …, M_d(u))` for each `u` in `u_grid`, where the
/// coordinates are independent Fréchet processes with tail constant 1.
#[derive(Clone, Debug)]
pub struct OracleSet {
    pub u_grid: Vec<f64>,
    /// `[sample][u index][coordinate]`
    pub m: Vec<Vec<Vec<f64>>>,
}

impl OracleSet {
    pub fn coordinate(&self, ui: usize, coord: usize) -> Vec<f64> {
        self.m.iter().map(|s| s[ui][coord]).collect()
    }

    pub fn map(&self, ui: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        self.m.iter().map(|s| f(&s[ui])).collect()
    }
}

/// A coordinate of the oracle stays below the magnitude floor (and reads 0)
/// with at most this probability at the smallest `u`.
pub const ORACLE_EMPTY_PROB: f64 = 1e-9;

/// Largest floor `r` with `P{M_i(u) < r} = exp(-u r^{-α}) ≤ ORACLE_EMPTY_PROB`.
pub fn oracle_floor(alpha: f64, u: f64) -> f64 {
    (u / (1.0 / ORACLE_EMPTY_PROB).ln()).powf(1.0 / alpha)
}

/// `r_min` caps the magnitude floor, which is lowered to
/// [`oracle_floor`] at the smallest `u` when that is smaller.
pub fn simulate_oracle(
    alpha: f64,
    dim: usize,
    u_grid: &[f64],
    samples: usize,
    seed: u64,
    r_min: f64,
) -> Result<OracleSet> {
    let horizon = u_grid.iter().copied().fold(0.0, f64::max);
    let u_min = u_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let r_min = r_min.min(oracle_floor(alpha, u_min));
    let m = (0..samples as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = oracle_rng(seed, j);
            // mass c/d per axis, so each coordinate has tail constant 1
            let s = simulate_extreme(dim as f64, alpha, dim, horizon, r_min, &mut rng)?;
            Ok(u_grid.iter().map(|&u| s.m_at(u)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(OracleSet {
        u_grid: u_grid.to_vec(),
        m,
    })
}
