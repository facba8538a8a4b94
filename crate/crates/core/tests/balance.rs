use std::collections::HashSet;

use crn_core::elimination::{classify, reduce, DEFAULT_MEMO_CAP};
use crn_core::fixtures;
use crn_core::markov::{
    check_complex_balance, check_detailed_balance, check_stationary, complex_residual_at, conditional_distribution,
    detailed_residual_at, irreducible_component, master_residual_at, max_residual, stationary_distribution, Bound,
    ComponentSet, MarkovError,
};
use crn_core::model::{Network, State};
use crn_core::num::{int_pow_rational, rat, NumericMode, Rat};
use crn_core::system::{ReactionSystem, ReducedSrn};
use num_traits::Zero;

fn st(v: &[u64]) -> State {
    State::new(v.to_vec())
}

struct Residuals {
    detailed: Option<Rat>,
    complex: Rat,
    stationary: Rat,
}

fn residuals(sys: &dyn ReactionSystem, gamma: &ComponentSet) -> Residuals {
    let pi = stationary_distribution(sys, gamma, NumericMode::Rational).unwrap();
    let detailed = match check_detailed_balance(sys, gamma, &pi) {
        Ok(t) => Some(max_residual(&t)),
        Err(MarkovError::NotReversible(_)) => None,
        Err(e) => panic!("{e}"),
    };
    Residuals {
        detailed,
        complex: max_residual(&check_complex_balance(sys, gamma, &pi).unwrap()),
        stationary: check_stationary(sys, gamma, &pi).unwrap(),
    }
}

fn assert_hierarchy(name: &str, r: &Residuals) {
    assert!(r.stationary.is_zero(), "{name}: exact solve is stationary");
    if r.detailed.as_ref().is_some_and(Zero::is_zero) {
        assert!(r.complex.is_zero(), "{name}: detailed balance without complex balance");
    }
    if r.complex.is_zero() {
        assert!(r.stationary.is_zero(), "{name}: complex balance without stationarity");
    }
}

/// Finite closed components of each bundled fixture.
fn fixture_components() -> Vec<(String, Network, ComponentSet)> {
    let mut out = Vec::new();
    let exp1 = fixtures::exp1().network;
    for t in [1, 3, 6] {
        let bound = Bound::Linear { weights: vec![1; 3], max: t };
        let gamma = irreducible_component(&exp1, &st(&[t, 0, 0]), &bound).unwrap();
        out.push((format!("exp_1 T={t}"), exp1.clone(), gamma));
    }
    // Without B the irreversible enzyme networks only bind and unbind.
    for (name, doc) in [("enzyme", fixtures::enzyme()), ("enzyme_fast", fixtures::enzyme_fast())] {
        let net = doc.network;
        let gamma = irreducible_component(&net, &st(&[2, 3, 0, 0, 0, 0, 0]), &Bound::Box(vec![3; 7])).unwrap();
        out.push((name.to_string(), net, gamma));
    }
    let rev = fixtures::enzyme_rev().network;
    for seed in [[1, 1, 1, 0, 0, 0, 0], [2, 2, 1, 0, 0, 0, 0], [2, 2, 2, 1, 0, 0, 0]] {
        let gamma = irreducible_component(&rev, &st(&seed), &Bound::Box(vec![4; 7])).unwrap();
        out.push((format!("enzyme_rev {seed:?}"), rev.clone(), gamma));
    }
    out
}

#[test]
fn balance_hierarchy_on_finite_fixtures() {
    for (name, net, gamma) in fixture_components() {
        let r = residuals(&net, &gamma);
        assert_hierarchy(&name, &r);
        if name.starts_with("exp_1") || name.starts_with("enzyme_rev") {
            assert!(r.complex.is_zero(), "{name}: complex balanced fixture");
        }
        if name.starts_with("exp_1") {
            assert_eq!(r.detailed, Some(Rat::zero()), "{name}");
        }
    }
}

#[test]
fn balance_hierarchy_on_the_factorial_network() {
    // pi(x) = 1/(3 * 2^(a+u)) on N^2 minus the origin; residuals at interior states.
    let net = fixtures::exp_count().network;
    let pi = |x: &State| -> Rat {
        if x.total() == 0 {
            return Rat::zero();
        }
        Rat::new(1.into(), 3.into()) / int_pow_rational(2, &rat(x.total() as i64)).unwrap()
    };
    let complexes = net.complexes();
    for a in 1..15u64 {
        for u in 1..15u64 {
            let x = st(&[a, u]);
            for r in 0..net.reactions().len() {
                assert!(detailed_residual_at(&net, &pi, r, &x).unwrap().is_zero(), "detailed at {x} r={r}");
            }
            for eta in &complexes {
                assert!(complex_residual_at(&net, &pi, eta, &x).unwrap().is_zero(), "complex at {x}");
            }
            assert!(master_residual_at(&net, &pi, &x).unwrap().is_zero(), "master at {x}");
        }
    }
}

fn exp1_reduced() -> ReducedSrn {
    let net = fixtures::exp1().network;
    let g = classify(&net, &[2]).unwrap();
    ReducedSrn::new(net.clone(), reduce(&net, &g, DEFAULT_MEMO_CAP).unwrap())
}

#[test]
fn conditional_equals_reduced_stationary_exp1() {
    let net = fixtures::exp1().network;
    let sys = exp1_reduced();
    for t in [2u64, 5, 10] {
        let gamma = irreducible_component(&net, &st(&[t, 0, 0]), &Bound::Linear { weights: vec![1; 3], max: t }).unwrap();
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        let cond = conditional_distribution(&pi, |s| s[2] == 0).unwrap().project(&[0, 1]);
        let gamma0 = irreducible_component(&sys, &st(&[t, 0]), &Bound::Linear { weights: vec![1; 2], max: t }).unwrap();
        let reduced = stationary_distribution(&sys, &gamma0, NumericMode::Rational).unwrap();
        assert!(cond.total_variation(&reduced).is_zero(), "T={t}");
        // The reduced law is binomial(T, 3/4).
        let binom = |k: u64| -> Rat {
            let c = (0..k).fold(Rat::from_integer(1.into()), |acc, i| acc * rat((t - i) as i64) / rat((i + 1) as i64));
            c * int_pow_rational(3, &rat(k as i64)).unwrap() / int_pow_rational(4, &rat(t as i64)).unwrap()
        };
        for a in 0..=t {
            assert_eq!(reduced.get(&st(&[a, t - a])), binom(a), "T={t} a={a}");
        }
        // Detailed balance carries over to the reduced network.
        let db = check_detailed_balance(&sys, &gamma0, &reduced).unwrap();
        assert!(max_residual(&db).is_zero());
    }
}

#[test]
fn conditional_equals_reduced_stationary_enzyme_rev() {
    let doc = fixtures::enzyme_rev();
    let net = doc.network;
    let u = fixtures::species_indices(&net, &["EA", "EAB"]);
    let g = classify(&net, &u).unwrap();
    let rn = reduce(&net, &g, DEFAULT_MEMO_CAP).unwrap();
    let core = rn.core_species.clone();
    let sys = ReducedSrn::new(net.clone(), rn);
    for seed in [[1, 1, 1, 0, 0, 0, 0], [2, 2, 2, 0, 0, 0, 0], [2, 3, 1, 1, 1, 0, 0]] {
        let gamma = irreducible_component(&net, &st(&seed), &Bound::Box(vec![5; 7])).unwrap();
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        let cond = conditional_distribution(&pi, |s| u.iter().all(|&i| s[i] == 0))
            .unwrap()
            .project(&core);
        let slice: HashSet<State> = cond.states.iter().cloned().collect();
        let seed_core = State::new(core.iter().map(|&i| seed[i]).collect());
        let gamma0 = irreducible_component(&sys, &seed_core, &Bound::Box(vec![5; core.len()])).unwrap();
        assert_eq!(gamma0.states.iter().cloned().collect::<HashSet<_>>(), slice, "{seed:?}");
        let reduced = stationary_distribution(&sys, &gamma0, NumericMode::Rational).unwrap();
        assert!(cond.total_variation(&reduced).is_zero(), "{seed:?}");
    }
}

#[test]
fn factorial_network_outcome_without_condition_2() {
    use crn_core::elimination::ElimError;
    use crn_core::kinetics::{build_chain, KineticsError};
    let net = fixtures::exp_count().network;
    let g = classify(&net, &[1]).unwrap();
    assert!(matches!(reduce(&net, &g, DEFAULT_MEMO_CAP), Err(ElimError::Condition1Violated { .. })));
    // Walks through U wander over unboundedly many net changes of A.
    for a in [1u64, 3] {
        let err = build_chain(&net, &g, &st(&[a, 0]), 100).unwrap_err();
        assert!(matches!(err, KineticsError::ChainNotFinite { .. }), "{err:?}");
    }
    // What a reduced network would have to reproduce: pi(a, 0 | U = 0) = 2^-a.
    let pi = |a: u64| Rat::new(1.into(), 3.into()) / int_pow_rational(2, &rat(a as i64)).unwrap();
    let slice_mass = Rat::new(1.into(), 3.into());
    for a in 1..20u64 {
        assert_eq!(pi(a) / &slice_mass, Rat::new(1.into(), 2.into()).pow(a as i32));
    }
}
