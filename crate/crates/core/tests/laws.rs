use std::collections::HashSet;

use lcmwalk_core::dist::{compute_moments, joint_prime_count_tail};
use lcmwalk_core::rng::replica_rng;
use lcmwalk_core::{JointStepLaw, JointTable, StepLaw};
use rand::Rng;

const DRAWS: usize = 100_000;

fn lambda(p: u64, factors: &[(u64, u64)]) -> u64 {
    factors.iter().find(|f| f.0 == p).map_or(0, |f| f.1)
}

fn draws(law: &StepLaw, seed: u64) -> Vec<Vec<(u64, u64)>> {
    let mut rng = replica_rng(seed, 0);
    (0..DRAWS)
        .map(|_| {
            let mut f = Vec::new();
            law.sample_factors(&mut rng, &mut f);
            f
        })
        .collect()
}

fn analytic_laws() -> Vec<StepLaw> {
    vec![
        StepLaw::zeta(2.0).unwrap(),
        StepLaw::zeta(3.5).unwrap(),
        StepLaw::geometric(0.5).unwrap(),
        StepLaw::trunc_poisson(1.0).unwrap(),
        StepLaw::trunc_poisson(6.0).unwrap(),
        StepLaw::prime_power_heavy(vec![(2, 0.5), (3, 0.3), (5, 0.2)]).unwrap(),
        StepLaw::pareto_exponent(2, 0.5).unwrap(),
        StepLaw::product(vec![
            StepLaw::pareto_exponent(3, 0.7).unwrap(),
            StepLaw::geometric(0.3).unwrap(),
        ])
        .unwrap(),
    ]
}

#[test]
fn empirical_tails_match_lambda_tail() {
    for (li, law) in analytic_laws().iter().enumerate() {
        let xs = draws(law, 100 + li as u64);
        for p in [2, 3, 5] {
            for k in [1, 2] {
                let tail = law.lambda_tail(p, k).unwrap();
                let hits = xs.iter().filter(|f| lambda(p, f) >= k).count() as f64;
                let freq = hits / DRAWS as f64;
                let se = (tail * (1.0 - tail) / DRAWS as f64).sqrt();
                assert!(
                    (freq - tail).abs() <= 4.0 * se + 1e-12,
                    "{} p={p} k={k}: empirical {freq} vs {tail} (se {se})",
                    law.name()
                );
            }
        }
    }
}

#[test]
fn zeta_tail_is_a_power_of_p() {
    for alpha in [2.0, 3.5] {
        let law = StepLaw::zeta(alpha).unwrap();
        for p in [2u64, 3, 5] {
            for k in [1, 2] {
                assert_eq!(
                    law.lambda_tail(p, k).unwrap(),
                    (p as f64).powf(-(k as f64) * alpha)
                );
            }
        }
    }
    assert_eq!(StepLaw::zeta(2.0).unwrap().lambda_tail(2, 1).unwrap(), 0.25);
    assert_eq!(StepLaw::zeta(2.0).unwrap().lambda_tail(2, 2).unwrap(), 0.0625);
}

#[test]
fn zeta_prime_counts_are_uncorrelated() {
    let xs = draws(&StepLaw::zeta(2.0).unwrap(), 7);
    let a: Vec<f64> = xs.iter().map(|f| lambda(2, f) as f64).collect();
    let b: Vec<f64> = xs.iter().map(|f| lambda(3, f) as f64).collect();
    let n = DRAWS as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
    let r = cov / (va * vb).sqrt();
    assert!(r.abs() < 4.0 / n.sqrt(), "correlation {r}");
}

#[test]
fn heavy_tail_equals_partial_sums() {
    let g = [(2u64, 0.5), (3, 0.3), (5, 0.2)];
    let law = StepLaw::prime_power_heavy(g.to_vec()).unwrap();
    let z2 = std::f64::consts::PI.powi(2) / 6.0;
    for &(p, gp) in &g {
        let mut head = 0.0;
        for k in 1..=200u64 {
            let expected = gp * (1.0 - head);
            let got = law.lambda_tail(p, k).unwrap();
            assert!((got - expected).abs() < 1e-12, "p={p} k={k}: {got} vs {expected}");
            head += (k as f64).powi(-2) / z2;
        }
    }
}

#[test]
fn heavy_tail_truncated_means_diverge() {
    let law = StepLaw::prime_power_heavy(vec![(2, 0.5), (3, 0.5)]).unwrap();
    let mut rng = replica_rng(11, 0);
    let xs: Vec<f64> = (0..DRAWS)
        .map(|_| {
            let mut f = Vec::new();
            law.sample_factors(&mut rng, &mut f);
            lambda(2, &f) as f64
        })
        .collect();
    let mut prev = 0.0;
    for c in [1.0, 10.0, 100.0, 1000.0, 10000.0] {
        let capped: Vec<f64> = xs.iter().map(|&x| x.min(c)).collect();
        let m = capped.iter().sum::<f64>() / DRAWS as f64;
        let v = capped.iter().map(|x| (x - m).powi(2)).sum::<f64>() / DRAWS as f64;
        // E min(λ, C) = Σ_{k ≤ C} P{λ ≥ k}
        let exact: f64 = (1..=c as u64).map(|k| law.lambda_tail(2, k).unwrap()).sum();
        assert!(
            (m - exact).abs() <= 4.0 * (v / DRAWS as f64).sqrt(),
            "C={c}: {m} vs {exact}"
        );
        assert!(m > prev);
        prev = m;
    }
    // the exact truncated mean grows like a multiple of ln C
    let at = |c: u64| -> f64 { (1..=c).map(|k| law.lambda_tail(2, k).unwrap()).sum() };
    let step = at(1_000_000) - at(1000);
    assert!(
        step > 0.9 * 0.5 * 6.0 / std::f64::consts::PI.powi(2) * 1000f64.ln(),
        "{step}"
    );
}

fn exponents(mut n: u64) -> [u64; 4] {
    let mut e = [0; 4];
    for (i, p) in [2u64, 3, 5, 7].into_iter().enumerate() {
        while n % p == 0 {
            n /= p;
            e[i] += 1;
        }
    }
    e
}

fn random_table(rng: &mut impl Rng) -> JointTable {
    let size = rng.random_range(1..=100);
    let mut seen = HashSet::new();
    let mut cells = Vec::new();
    while cells.len() < size {
        let i = rng.random_range(1..=720u64);
        let j = rng.random_range(1..=720u64);
        if seen.insert((i, j)) {
            cells.push((i, j, rng.random::<f64>() + 1e-3));
        }
    }
    let total: f64 = cells.iter().map(|c| c.2).sum();
    for c in &mut cells {
        c.2 /= total;
    }
    JointTable::new(cells).unwrap()
}

#[test]
fn joint_tail_matches_enumeration() {
    let mut rng = replica_rng(2024, 0);
    for _ in 0..10 {
        let table = random_table(&mut rng);
        let cells: Vec<([u64; 4], [u64; 4], f64)> = table
            .entries()
            .iter()
            .map(|&(i, j, w)| (exponents(i), exponents(j), w))
            .collect();
        let law = JointStepLaw::JointTable(table);
        for code in 0..(1u32 << 16) {
            let mut k = [0u64; 4];
            let mut l = [0u64; 4];
            for q in 0..4 {
                k[q] = ((code >> (4 * q)) & 3) as u64;
                l[q] = ((code >> (4 * q + 2)) & 3) as u64;
            }
            let brute: f64 = cells
                .iter()
                .filter(|(ei, ej, _)| (0..4).all(|q| ei[q] >= k[q] && ej[q] >= l[q]))
                .map(|c| c.2)
                .sum();
            let constraints: Vec<(u64, u64, u64)> = [2u64, 3, 5, 7]
                .iter()
                .enumerate()
                .map(|(q, &p)| (p, k[q], l[q]))
                .collect();
            let got = joint_prime_count_tail(&law, &constraints).unwrap();
            assert!((got - brute).abs() <= 1e-12, "{constraints:?}: {got} vs {brute}");
        }
    }
}

#[test]
fn joint_tail_of_independent_and_identical_couplings() {
    let xi = StepLaw::zeta(2.0).unwrap();
    let eta = StepLaw::geometric(0.4).unwrap();
    let ind = JointStepLaw::Independent {
        xi: xi.clone(),
        eta: eta.clone(),
    };
    let got = joint_prime_count_tail(&ind, &[(2, 1, 2), (3, 1, 0)]).unwrap();
    let want = 0.25 / 9.0 * eta.lambda_tail(2, 2).unwrap();
    assert!((got - want).abs() < 1e-15);
    let same = JointStepLaw::Identical(xi);
    let got = joint_prime_count_tail(&same, &[(2, 1, 3), (5, 0, 1)]).unwrap();
    assert!((got - 2f64.powi(-6) * 5f64.powi(-2)).abs() < 1e-15);
}

#[test]
fn prime_partial_sums_rise_to_mu() {
    let law = StepLaw::zeta(2.0).unwrap();
    let full = compute_moments(&law, 100_000, 1e-10).unwrap();
    let mut prev = 0.0;
    for limit in [2u64, 10, 100, 1000, 10_000, 100_000] {
        let partial: f64 = full
            .mean_lambda
            .range(..=limit)
            .map(|(&p, &m)| m * (p as f64).ln())
            .sum();
        assert!(partial > prev && partial < full.mu_xi, "limit {limit}: {partial}");
        prev = partial;
    }
    assert!(full.mu_xi - prev < 1e-4, "gap {}", full.mu_xi - prev);
}

#[test]
fn zeta_log_moments_match_direct_summation() {
    let law = StepLaw::zeta(2.0).unwrap();
    let m = compute_moments(&law, 100, 1e-10).unwrap();
    let n = 10_000_000u64;
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for k in (2..=n).rev() {
        let l = (k as f64).ln();
        let w = 1.0 / (k as f64 * k as f64);
        s1 += l * w;
        s2 += l * l * w;
    }
    let (nf, ln) = (n as f64, (n as f64).ln());
    // ∫_N^∞ ln x / x² dx and ∫_N^∞ ln² x / x² dx
    s1 += (ln + 1.0) / nf;
    s2 += (ln * ln + 2.0 * ln + 2.0) / nf;
    let z2 = std::f64::consts::PI.powi(2) / 6.0;
    let mu = s1 / z2;
    let sigma2 = s2 / z2 - mu * mu;
    assert!((m.mu_xi - mu).abs() < 1e-8, "{} vs {mu}", m.mu_xi);
    assert!((m.sigma2_xi - sigma2).abs() < 1e-7, "{} vs {sigma2}", m.sigma2_xi);
}

#[test]
fn zeta_lambda_variance_is_geometric() {
    let m = compute_moments(&StepLaw::zeta(2.0).unwrap(), 10, 1e-12).unwrap();
    assert!((m.var_lambda[&2] - 4.0 / 9.0).abs() < 1e-10);
    assert!((m.mean_lambda[&3] - 1.0 / 8.0).abs() < 1e-10);
    assert!(m.covariance(2, 3).unwrap().abs() < 1e-10);
}
