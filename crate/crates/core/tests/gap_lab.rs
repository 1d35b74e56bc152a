mod common;

use common::{svd_norm, CMat};
use oslab::gap_lab::{
    neumann_resolvent, power_norm_scan, resolvent_bound, resolvent_norm_scan, spectrum, GapError, ResolventScanOptions,
};
use oslab::phase_quant::{baker_closed, baker_open, h_of, TorusOperator};
use oslab::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn random_matrix(seed: u64, n: usize, norm: f64) -> CMat {
    let mut rng = common::rng(seed);
    let m = CMat::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let s = svd_norm(&m);
    m * Complex64::new(norm / s, 0.0)
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

#[test]
fn neumann_matches_direct_solve() {
    for seed in 0..5 {
        let m = random_matrix(seed, 20, 0.9);
        let res = neumann_resolvent(&TorusOperator::new(m.clone()), 50).unwrap();
        let id = CMat::identity(20, 20);
        let direct = (&id - &m).lu().solve(&id).unwrap();
        let diff = svd_norm(&(&res.resolvent - &direct)) / svd_norm(&direct);
        assert!(diff <= 1e-10, "seed {seed}: {diff:e}");
        assert!(res.residual <= 100.0 * f64::EPSILON * res.cond);
    }
}

#[test]
fn neumann_trivial_cases() {
    let mut shift = CMat::zeros(3, 3);
    shift[(1, 0)] = Complex64::new(1.0, 0.0);
    shift[(2, 1)] = Complex64::new(1.0, 0.0);
    let res = neumann_resolvent(&TorusOperator::new(shift.clone()), 3).unwrap();
    let want = CMat::identity(3, 3) + &shift + &shift * &shift;
    assert!(svd_norm(&(&res.resolvent - want)) <= 1e-14);
    assert!(res.residual <= 1e-14);
    let zero = neumann_resolvent(&TorusOperator::new(CMat::zeros(4, 4)), 5).unwrap();
    assert_eq!(zero.resolvent, CMat::identity(4, 4));
    assert!(matches!(
        neumann_resolvent(&TorusOperator::identity(3), 2),
        Err(GapError::SingularPower { .. })
    ));
}

#[test]
fn neumann_on_open_baker() {
    for n in [27, 81] {
        let m = baker_open(n).unwrap();
        let res = neumann_resolvent(&m, 7).unwrap();
        assert!(res.residual <= 100.0 * f64::EPSILON * res.cond, "N = {n}: {:e}", res.residual);
    }
}

#[test]
fn small_operators_have_small_resolvents() {
    let opts = ResolventScanOptions {
        delta: 1.0,
        gamma: 0.1,
        h0: 1.0,
        return_time: 1.0,
    };
    let zs = [Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)];
    let rep = resolvent_norm_scan(
        |n| Ok(TorusOperator::new(random_matrix(n as u64, n, 0.5))),
        &opts,
        &[8, 16, 32],
        &zs,
    )
    .unwrap();
    assert_eq!(rep.entries.len(), 9);
    for e in &rep.entries {
        assert!(e.norm <= 2.0 + 1e-12);
        assert!(e.hypothesis_ok && e.a == 1.0);
        assert!(e.norm <= e.bound, "{e:?}");
    }
    assert!(rep.violations().is_empty());
}

#[test]
fn hypothesis_gate_disables_the_bound() {
    let opts = ResolventScanOptions {
        delta: 1.0,
        gamma: 0.05,
        h0: 1.0,
        return_time: 1.0,
    };
    // Im z < 0 in units of h multiplies the map by e^{0.5}
    let rep = resolvent_norm_scan(baker_open, &opts, &[27], &[Complex64::new(0.3, -0.5)]).unwrap();
    let e = rep.entries[0];
    assert!((e.amp_sup - 0.5f64.exp()).abs() < 1e-9);
    assert!(!e.hypothesis_ok && !e.is_violation(1.0));
    assert!((e.bound - resolvent_bound(1.0, e.h, e.a)).abs() <= 1e-12 * e.bound);
}

#[test]
fn open_baker_resolvent_is_polynomial_in_h() {
    let opts = ResolventScanOptions {
        delta: 1.0,
        gamma: 0.0,
        h0: 0.0,
        return_time: 1.0,
    };
    let rep = resolvent_norm_scan(baker_open, &opts, &[27, 81, 243, 729], &[Complex64::new(0.0, 0.0)]).unwrap();
    let exps: Vec<f64> = rep.entries.iter().map(|e| e.norm.ln() / (1.0 / e.h).ln()).collect();
    assert!(exps.iter().all(|&p| p < 1.0), "{exps:?}");
    // no growth trend: the last exponent is no larger than the first
    assert!(exps[3] <= exps[0] + 0.05, "{exps:?}");
}

#[test]
fn open_baker_gap_and_positive_gamma() {
    let rep = power_norm_scan(baker_open, 1.0, &[27, 81, 243]).unwrap();
    for e in &rep.entries {
        assert_eq!(e.n_of_h, (1.0 / e.h).ln().ceil() as usize);
        assert!(e.power_norm < 1.0 && (e.amp_sup - 1.0).abs() < 1e-9);
    }
    assert!(rep.fitted_gamma.unwrap() > 0.0);
    let ev = spectrum(&baker_open(243).unwrap(), 2187).unwrap();
    assert!(ev[0].norm() < 1.0);
    assert!(ev.windows(2).all(|w| w[0].norm() >= w[1].norm()));
}

#[test]
fn spectrum_examples() {
    let d = TorusOperator::new(CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(0.2, 0.0),
        Complex64::new(0.5, 0.0),
    ])));
    assert_eq!(spectrum(&d, 10).unwrap(), vec![Complex64::new(0.5, 0.0), Complex64::new(0.2, 0.0)]);
    for z in spectrum(&baker_closed(81).unwrap(), 2187).unwrap() {
        assert!((z.norm() - 1.0).abs() <= 1e-10);
    }
    assert!(matches!(spectrum(&d, 1), Err(GapError::TooLarge { .. })));
}

#[test]
fn bound_formula() {
    let h = h_of(81);
    assert!((resolvent_bound(1.0, h, 1.0) - 2.0 * (1.0 / h).ln()).abs() < 1e-12);
    let b = resolvent_bound(0.5, h, 2.0);
    assert!((b - 2.0 * 0.5 * (1.0 / h).ln() * h.powf(-0.5 * 2f64.ln())).abs() <= 1e-12 * b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_is_similarity_invariant(seed in 0u64..10_000, n in 2usize..12) {
        let m = random_matrix(seed, n, 1.0);
        let s = random_matrix(seed + 1, n, 1.0) + CMat::identity(n, n) * Complex64::new(3.0, 0.0);
        let conj = s.clone().lu().solve(&(&m * &s)).unwrap();
        let a = sorted(spectrum(&TorusOperator::new(m), 64).unwrap());
        let b = sorted(spectrum(&TorusOperator::new(conj), 64).unwrap());
        for p in &a {
            let d = b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= 1e-8, "{p} missing ({d:e})");
        }
    }

    #[test]
    fn power_norms_are_submultiplicative(seed in 0u64..10_000, a in 1usize..8, b in 1usize..8) {
        let m = TorusOperator::new(random_matrix(seed, 9, 1.3));
        let na = svd_norm(m.power(a).entries());
        let nb = svd_norm(m.power(b).entries());
        let nab = svd_norm(m.power(a + b).entries());
        prop_assert!(nab <= na * nb * (1.0 + 1e-12));
    }
}

#[test]
fn scan_powers_are_submultiplicative() {
    let m = baker_open(81).unwrap();
    let norms: Vec<f64> = (0..=12).map(|k| svd_norm(m.power(k).entries())).collect();
    for a in 1..=6 {
        for b in 1..=6 {
            assert!(norms[a + b] <= norms[a] * norms[b] * (1.0 + 1e-12));
        }
    }
}
