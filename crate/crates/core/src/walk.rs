//! Streaming state of one trajectory of `Π_k` and `Θ_k = Π_{k-1}η_k` in
//! prime-exponent space.
//!
//! Per prime the state keeps `S_n(p)` and `max_{k≤n} T_k(p)`. A step touches
//! only the primes of `ξ_{n-1}`, `ξ_n` and `η_n`: for every other prime
//! `T_n(p) = S_{n-1}(p) = T_{n-1}(p)` or less, so its running maximum is
//! unchanged.

use std::io::Write;

use rand::Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::arith::{factorize_into, PrimeExponentVector};
use crate::dist::JointStepLaw;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Slot {
    /// `S_n(p)`
    s: u64,
    /// `max_{k≤n} T_k(p)`
    m: u64,
    ln_p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub k: u64,
    pub log_pi: f64,
    pub log_lcm_theta: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WalkState {
    n: u64,
    slots: FxHashMap<u64, Slot>,
    log_pi: f64,
    log_lcm_theta: f64,
    last_xi: Vec<(u64, u64)>,
    last_eta: Vec<(u64, u64)>,
    trace: Option<Trace>,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Trace {
    rows: Vec<TraceRow>,
    limit: usize,
}

impl WalkState {
    /// `Π_0 = 1`, no steps taken.
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `(k, log Π_k, log LCM(Θ_1..Θ_k))` for the first `limit` steps.
    pub fn with_trace(limit: usize) -> Self {
        Self {
            trace: Some(Trace {
                rows: Vec::with_capacity(limit.min(1 << 16)),
                limit,
            }),
            ..Self::default()
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `log Π_n`
    pub fn log_pi(&self) -> f64 {
        self.log_pi
    }

    /// `log LCM(Θ_1, …, Θ_n)`
    pub fn log_lcm_theta(&self) -> f64 {
        self.log_lcm_theta
    }

    /// `S_n(p)`
    pub fn s_value(&self, p: u64) -> u64 {
        self.slots.get(&p).map_or(0, |s| s.s)
    }

    /// `max_{1≤k≤n} T_k(p)`
    pub fn t_max_value(&self, p: u64) -> u64 {
        self.slots.get(&p).map_or(0, |s| s.m)
    }

    /// `T_n(p) = S_n(p) - λ_p(ξ_n) + λ_p(η_n)`; 0 before the first step.
    pub fn t_value(&self, p: u64) -> u64 {
        let find = |v: &[(u64, u64)]| v.iter().find(|e| e.0 == p).map_or(0, |e| e.1);
        self.s_value(p) - find(&self.last_xi) + find(&self.last_eta)
    }

    /// Exponents of `Π_n`.
    pub fn s_exponents(&self) -> PrimeExponentVector {
        self.collect(|s| s.s)
    }

    /// Exponents of `LCM(Θ_1, …, Θ_n)`.
    pub fn t_max(&self) -> PrimeExponentVector {
        self.collect(|s| s.m)
    }

    fn collect(&self, f: impl Fn(&Slot) -> u64) -> PrimeExponentVector {
        let mut v: Vec<(u64, u64)> = self
            .slots
            .iter()
            .map(|(&p, s)| (p, f(s)))
            .filter(|e| e.1 > 0)
            .collect();
        v.sort_unstable();
        PrimeExponentVector::from_sorted_unchecked(v)
    }

    pub fn trace(&self) -> &[TraceRow] {
        self.trace.as_ref().map_or(&[], |t| &t.rows)
    }

    /// Apply one step given the factorizations of `ξ_{n+1}` and `η_{n+1}`
    /// (ascending primes).
    #[inline]
    pub fn step_factors(&mut self, xi: &[(u64, u64)], eta: &[(u64, u64)]) -> Result<()> {
        self.n += 1;
        for &(p, _) in &self.last_xi {
            let slot = self.slots.get_mut(&p).expect("primes of ξ are tracked");
            if slot.s > slot.m {
                self.log_lcm_theta += (slot.s - slot.m) as f64 * slot.ln_p;
                slot.m = slot.s;
            }
        }
        for &(p, e) in eta {
            let slot = self.slots.entry(p).or_insert_with(|| Slot {
                ln_p: (p as f64).ln(),
                ..Slot::default()
            });
            let t = slot
                .s
                .checked_add(e)
                .ok_or(Error::ExponentOverflow { prime: p })?;
            if t > slot.m {
                self.log_lcm_theta += (t - slot.m) as f64 * slot.ln_p;
                slot.m = t;
            }
        }
        for &(p, e) in xi {
            let slot = self.slots.entry(p).or_insert_with(|| Slot {
                ln_p: (p as f64).ln(),
                ..Slot::default()
            });
            slot.s = slot
                .s
                .checked_add(e)
                .ok_or(Error::ExponentOverflow { prime: p })?;
            self.log_pi += e as f64 * slot.ln_p;
        }
        self.last_xi.clear();
        self.last_xi.extend_from_slice(xi);
        self.last_eta.clear();
        self.last_eta.extend_from_slice(eta);
        if let Some(t) = &mut self.trace {
            if t.rows.len() < t.limit {
                t.rows.push(TraceRow {
                    k: self.n,
                    log_pi: self.log_pi,
                    log_lcm_theta: self.log_lcm_theta,
                });
            }
        }
        Ok(())
    }

    /// Apply one step with integer `ξ, η ≥ 1`.
    pub fn step(&mut self, xi: u64, eta: u64) -> Result<()> {
        let (mut fx, mut fe) = (Vec::new(), Vec::new());
        factorize_into(xi, &mut fx)?;
        factorize_into(eta, &mut fe)?;
        self.step_factors(&fx, &fe)
    }
}

/// Values recorded at one step index, restricted to the requested primes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: u64,
    pub log_pi: f64,
    pub log_lcm_theta: f64,
    /// `S_k(p)` per requested prime
    pub s: Vec<u64>,
    /// `T_k(p)` per requested prime
    pub t: Vec<u64>,
    /// `max_{j≤k} T_j(p)` per requested prime
    pub t_max: Vec<u64>,
}

impl Snapshot {
    fn of(state: &WalkState, primes: &[u64]) -> Self {
        Self {
            step: state.n(),
            log_pi: state.log_pi(),
            log_lcm_theta: state.log_lcm_theta(),
            s: primes.iter().map(|&p| state.s_value(p)).collect(),
            t: primes.iter().map(|&p| state.t_value(p)).collect(),
            t_max: primes.iter().map(|&p| state.t_max_value(p)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub state: WalkState,
    pub snapshots: Vec<Snapshot>,
}

/// Run `n` steps drawn from `law`, recording a snapshot at every index in
/// `record_at` (sorted, each ≤ `n`; index 0 records the initial state).
pub fn run_trajectory<R: Rng + ?Sized>(
    law: &JointStepLaw,
    n: u64,
    rng: &mut R,
    record_at: &[u64],
    primes: &[u64],
    state: WalkState,
) -> Result<Trajectory> {
    if record_at.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("record_at must be sorted".into()));
    }
    if record_at.last().is_some_and(|&r| r > n) {
        return Err(Error::InvalidConfig(format!("record_at exceeds n = {n}")));
    }
    let mut state = state;
    let mut snapshots = Vec::with_capacity(record_at.len());
    let mut pending = record_at.iter().peekable();
    let (mut xi, mut eta) = (Vec::with_capacity(8), Vec::with_capacity(8));
    while pending.next_if(|&&r| r == state.n()).is_some() {
        snapshots.push(Snapshot::of(&state, primes));
    }
    for _ in 0..n {
        law.sample_factors(rng, &mut xi, &mut eta);
        state.step_factors(&xi, &eta)?;
        while pending.next_if(|&&r| r == state.n()).is_some() {
            snapshots.push(Snapshot::of(&state, primes));
        }
    }
    Ok(Trajectory { state, snapshots })
}

/// Write trace rows as CSV with columns `k,log_pi,log_lcm_theta`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "log_pi", "log_lcm_theta"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record([r.k.to_string(), r.log_pi.to_string(), r.log_lcm_theta.to_string()])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
