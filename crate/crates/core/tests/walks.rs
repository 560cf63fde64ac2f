use std::collections::BTreeMap;

use lcmwalk_core::dist::compute_moments;
use lcmwalk_core::rng::replica_rng;
use lcmwalk_core::{
    lcm_of, run_trajectory, JointStepLaw, JointTable, PrimeExponentVector, StepLaw, WalkState,
};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

fn value(f: &[(u64, u64)]) -> u64 {
    f.iter().map(|&(p, e)| p.pow(e as u32)).product()
}

fn small_primes(limit: u64) -> Vec<u64> {
    (2..=limit)
        .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

/// Trial division of a big integer whose prime factors are at most `limit`.
fn big_factorize(n: &BigUint, primes: &[u64]) -> BTreeMap<u64, u64> {
    let mut n = n.clone();
    let zero = BigUint::from(0u32);
    let mut out = BTreeMap::new();
    for &p in primes {
        let bp = BigUint::from(p);
        while &n % &bp == zero {
            n /= &bp;
            *out.entry(p).or_insert(0) += 1;
        }
    }
    assert_eq!(n, BigUint::from(1u32), "cofactor beyond the trial primes");
    out
}

fn random_table(rng: &mut impl Rng, max: u64) -> StepLaw {
    let size = rng.random_range(1..=100usize);
    let mut pmf: BTreeMap<u64, f64> = BTreeMap::new();
    for _ in 0..size {
        *pmf.entry(rng.random_range(1..=max)).or_default() += rng.random::<f64>() + 1e-3;
    }
    let total: f64 = pmf.values().sum();
    StepLaw::table(pmf.into_iter().map(|(k, w)| (k, w / total)).collect()).unwrap()
}

fn random_joint(rng: &mut impl Rng, max: u64) -> JointStepLaw {
    match rng.random_range(0..4) {
        0 => JointStepLaw::Independent {
            xi: random_table(rng, max),
            eta: random_table(rng, max),
        },
        1 => JointStepLaw::Identical(random_table(rng, max)),
        2 => JointStepLaw::XiDegenerateOne(random_table(rng, max)),
        _ => {
            let size = rng.random_range(1..=100usize);
            let mut cells: BTreeMap<(u64, u64), f64> = BTreeMap::new();
            for _ in 0..size {
                let key = (rng.random_range(1..=max), rng.random_range(1..=max));
                *cells.entry(key).or_default() += rng.random::<f64>() + 1e-3;
            }
            let total: f64 = cells.values().sum();
            let entries = cells.into_iter().map(|((i, j), w)| (i, j, w / total)).collect();
            JointStepLaw::JointTable(JointTable::new(entries).unwrap())
        }
    }
}

#[test]
fn exponent_space_matches_big_integer_oracle() {
    let primes = small_primes(100);
    let mut meta = replica_rng(99, 0);
    for trial in 0..200u64 {
        let law = random_joint(&mut meta, 100);
        let n = meta.random_range(1..=50u64);
        let mut rng = replica_rng(1000 + trial, 0);
        let mut state = WalkState::new();
        let mut pi = BigUint::from(1u32);
        let mut pis = Vec::new();
        let mut oracle: BTreeMap<u64, u64> = BTreeMap::new();
        let (mut xf, mut ef) = (Vec::new(), Vec::new());
        for _ in 0..n {
            law.sample_factors(&mut rng, &mut xf, &mut ef);
            let (xi, eta) = (value(&xf), value(&ef));
            let theta = &pi * BigUint::from(eta);
            for (p, e) in big_factorize(&theta, &primes) {
                let m = oracle.entry(p).or_insert(0);
                *m = (*m).max(e);
            }
            pi *= BigUint::from(xi);
            pis.push(pi.clone());
            state.step(xi, eta).unwrap();
        }
        let t_max: BTreeMap<u64, u64> = state.t_max().iter().collect();
        assert_eq!(t_max, oracle, "trial {trial}");
        let log_lcm: f64 = oracle.iter().map(|(&p, &e)| e as f64 * (p as f64).ln()).sum();
        assert!((state.log_lcm_theta() - log_lcm).abs() <= 1e-9 * log_lcm.max(1.0));

        // LCM(Π_1..Π_n) = Π_n
        let zero = BigUint::from(0u32);
        assert!(pis.iter().all(|p| &pi % p == zero));
        let pevs: Vec<PrimeExponentVector> = pis
            .iter()
            .map(|p| PrimeExponentVector::from_pairs(big_factorize(p, &primes)).unwrap())
            .collect();
        assert_eq!(lcm_of(&pevs).unwrap(), state.s_exponents());
        assert!((state.log_pi() - state.s_exponents().log_value()).abs() <= 1e-9 * state.log_pi().max(1.0));
    }
}

#[test]
fn identical_coupling_has_equal_logs() {
    let law = JointStepLaw::Identical(StepLaw::zeta(2.0).unwrap());
    let tr = run_trajectory(
        &law,
        5000,
        &mut replica_rng(3, 0),
        &[10, 5000],
        &[2, 3],
        WalkState::new(),
    )
    .unwrap();
    for s in &tr.snapshots {
        assert_eq!(s.log_pi, s.log_lcm_theta);
        assert_eq!(s.s, s.t_max);
        assert_eq!(s.s, s.t);
    }
}

#[test]
fn degenerate_walks() {
    let law = JointStepLaw::Identical(StepLaw::degenerate(2).unwrap());
    let tr = run_trajectory(&law, 5, &mut replica_rng(0, 0), &[5], &[2], WalkState::new()).unwrap();
    assert!((tr.state.log_pi() - 5.0 * 2f64.ln()).abs() < 1e-12);
    assert!((tr.state.log_lcm_theta() - 5.0 * 2f64.ln()).abs() < 1e-12);
    let law = JointStepLaw::XiDegenerateOne(StepLaw::degenerate(6).unwrap());
    let tr = run_trajectory(&law, 3, &mut replica_rng(0, 0), &[], &[], WalkState::new()).unwrap();
    assert!((tr.state.log_lcm_theta() - 6f64.ln()).abs() < 1e-12);
    assert_eq!(tr.state.log_pi(), 0.0);
}

#[test]
fn log_pi_obeys_the_law_of_large_numbers() {
    let xi = StepLaw::zeta(2.0).unwrap();
    let mu = compute_moments(&xi, 10, 1e-10).unwrap().mu_xi;
    let law = JointStepLaw::Independent {
        xi,
        eta: StepLaw::zeta(4.0).unwrap(),
    };
    let n = 1000;
    let xs: Vec<f64> = (0..200)
        .map(|r| {
            let tr = run_trajectory(&law, n, &mut replica_rng(8, r), &[], &[], WalkState::new()).unwrap();
            tr.state.log_pi() / n as f64
        })
        .collect();
    let m = xs.iter().sum::<f64>() / 200.0;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 199.0;
    assert!((m - mu).abs() <= 4.0 * (v / 200.0).sqrt(), "{m} vs {mu}");
}

#[test]
fn trace_rows_are_complete_and_monotone() {
    let law = JointStepLaw::Independent {
        xi: StepLaw::zeta(2.0).unwrap(),
        eta: StepLaw::zeta(4.0).unwrap(),
    };
    let tr = run_trajectory(
        &law,
        300,
        &mut replica_rng(4, 0),
        &[],
        &[],
        WalkState::with_trace(1000),
    )
    .unwrap();
    let rows = tr.state.trace();
    assert_eq!(rows.len(), 300);
    assert!(rows
        .windows(2)
        .all(|w| w[0].log_lcm_theta <= w[1].log_lcm_theta && w[0].k + 1 == w[1].k));
    let mut out = Vec::new();
    lcmwalk_core::walk::write_trace_csv(rows, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 301);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn perturbation_bounds(seed in any::<u64>(), n in 1u64..200) {
        let mut meta = replica_rng(seed, 1);
        let law = random_joint(&mut meta, 200);
        let mut rng = replica_rng(seed, 2);
        let mut state = WalkState::new();
        let mut prev_s: BTreeMap<u64, u64> = BTreeMap::new();
        let mut eta_max: BTreeMap<u64, u64> = BTreeMap::new();
        let (mut xf, mut ef) = (Vec::new(), Vec::new());
        for _ in 0..n {
            law.sample_factors(&mut rng, &mut xf, &mut ef);
            prev_s = state.s_exponents().iter().collect();
            for &(p, e) in &ef {
                let m = eta_max.entry(p).or_insert(0);
                *m = (*m).max(e);
            }
            let before = state.log_lcm_theta();
            state.step_factors(&xf, &ef).unwrap();
            prop_assert!(state.log_lcm_theta() >= before);
        }
        for (&p, &s) in &prev_s {
            prop_assert!(state.t_max_value(p) >= s);
        }
        for (p, m) in state.t_max().iter() {
            let bound = prev_s.get(&p).copied().unwrap_or(0) + eta_max.get(&p).copied().unwrap_or(0);
            prop_assert!(m <= bound, "p={} t_max={} bound={}", p, m, bound);
        }
    }

    #[test]
    fn trajectories_are_deterministic(seed in any::<u64>(), n in 0u64..500) {
        let law = JointStepLaw::Independent {
            xi: StepLaw::zeta(2.0).unwrap(),
            eta: StepLaw::geometric(0.3).unwrap(),
        };
        let run = || run_trajectory(&law, n, &mut replica_rng(seed, 0), &[n / 2, n], &[2, 3], WalkState::new()).unwrap();
        let (a, b) = (run(), run());
        prop_assert_eq!(a.state, b.state);
        prop_assert_eq!(a.snapshots, b.snapshots);
    }
}
