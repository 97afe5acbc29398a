use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use asfm::astar::{astar_solve, heuristic_h};
use asfm::bip::{solve, CutMode, CutRow};
use asfm::cg::{cg_solve, icg_solve, sub_icg, CutPool};
use asfm::greedy::greedy;
use asfm::harness::{performance_profile, performance_ratios, run_algorithm, Algorithm, RunRecord, RunSettings};
use asfm::instances::{ratio_bounds_bruteforce, InstanceKind, PerturbSpec, Problem};
use asfm::oracle::brute_force_opt;
use asfm::subset::subsets_up_to;
use asfm::{Limits, Status, Subset};

fn kind() -> impl Strategy<Value = InstanceKind> {
    prop_oneof![Just(InstanceKind::Loc), Just(InstanceKind::Cov), Just(InstanceKind::Inf)]
}

fn problem() -> impl Strategy<Value = Problem> {
    (kind(), 5usize..=9, 1usize..=4, 0u64..1000).prop_map(|(kind, n, k, seed)| {
        Problem::generate(kind, n, None, k.min(n), seed, Some(PerturbSpec { count: 400, gamma: 0.8 })).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cuts_bound_every_feasible_set(p in problem(), pick in any::<u64>()) {
        let f = p.function();
        let (n, k) = (p.n(), p.k);
        let sources: Vec<Subset> = subsets_up_to(n, k).collect();
        let source = sources[(pick % sources.len() as u64) as usize];
        let row = CutRow::generate(&f, source, CutMode::Asfm);
        for t in subsets_up_to(n, k) {
            prop_assert!(row.value(&t) >= f.evaluate(&t) - 1e-9, "{} at {}", source, t);
        }
    }

    #[test]
    fn exact_methods_agree_with_brute_force(p in problem()) {
        let opt = brute_force_opt(&p.function(), &p.ground_set()).unwrap().optimum;
        for algo in [Algorithm::AstarMod, Algorithm::Mcg, Algorithm::Icg, Algorithm::BcIcg] {
            let r = run_algorithm(&p, algo, &RunSettings::default()).unwrap().record;
            prop_assert_eq!(r.status, Status::Optimal);
            prop_assert!((r.value - opt).abs() <= 1e-9, "{} {}: {} vs {}", p.id, algo, r.value, opt);
            prop_assert!((r.bound - r.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn greedy_chain_is_nested_and_guaranteed(p in problem()) {
        let f = p.function();
        let chain = greedy(&f, &p.ground_set());
        prop_assert_eq!(chain.prefixes.len(), p.k + 1);
        for w in chain.prefixes.windows(2) {
            prop_assert!(w[0].is_subset_of(&w[1]));
            prop_assert_eq!(w[0].len() + 1, w[1].len());
        }
        let gamma = ratio_bounds_bruteforce(&f).unwrap().gamma;
        let opt = brute_force_opt(&f, &p.ground_set()).unwrap().optimum;
        prop_assert!(chain.value() >= (1.0 - (-gamma).exp()) * opt - 1e-9);
    }

    #[test]
    fn traces_are_monotone(p in problem(), seed in any::<u64>()) {
        let f = p.function();
        let gs = p.ground_set();
        let runs = [
            cg_solve(&f.fresh(), &gs, CutMode::Asfm, &Limits::none()).unwrap(),
            icg_solve(&f.fresh(), &gs, 10 * p.k, &Limits::none(), seed).unwrap(),
        ];
        for r in runs {
            for w in r.trace.iterations.windows(2) {
                prop_assert!(w[1].z <= w[0].z + 1e-9);
                prop_assert!(w[1].f_best >= w[0].f_best);
            }
            prop_assert!(r.gap() <= 1e-9);
        }
    }

    #[test]
    fn heuristic_is_admissible(p in problem(), pick in any::<u64>()) {
        let f = p.function();
        let (n, k) = (p.n(), p.k);
        let nodes: Vec<Subset> = subsets_up_to(n, k).filter(|s| s.len() < k).collect();
        let s = nodes[(pick % nodes.len() as u64) as usize];
        let hr = heuristic_h(&f, &s, k, p.gamma_lower);
        let lo = s.max_element().map_or(0, |m| m + 1);
        let fs = f.evaluate(&s);
        for t in subsets_up_to(n, k - s.len()) {
            if t.iter().all(|i| i >= lo) {
                prop_assert!(f.evaluate(&s.union(&t)) - fs <= hr.h + 1e-9);
            }
        }
        prop_assert!(hr.completion.len() <= k && s.is_subset_of(&hr.completion));
    }

    #[test]
    fn sub_icg_outputs_are_new_and_feasible(p in problem(), seed in any::<u64>()) {
        let f = p.function();
        let gs = p.ground_set();
        let mut pool = CutPool::new(p.n(), CutMode::Asfm);
        for s in greedy(&f, &gs).prefixes {
            pool.insert_generated(&f, s);
        }
        let sol = solve(&pool.model(p.k, Subset::empty(), Subset::empty()).unwrap(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = sub_icg(&pool, &sol, p.k, 10 * p.k, &mut rng);
        prop_assert!(out.len() <= 10 * p.k);
        for (i, s) in out.iter().enumerate() {
            prop_assert!(s.len() <= p.k);
            prop_assert!(!pool.contains(s));
            prop_assert!(*s != sol.y);
            prop_assert!(!out[..i].contains(s));
        }
    }

    #[test]
    fn astar_nodes_respect_limit(p in problem(), limit in 1u64..20) {
        let r = astar_solve(&p.function(), &p.ground_set(), &Limits::none().with_nodes(limit));
        prop_assert!(r.nodes <= limit || r.status == Status::Optimal);
        prop_assert!(r.bound >= r.value - 1e-12);
    }

    #[test]
    fn profile_is_monotone_and_bounded(
        times in prop::collection::vec((1e-3f64..1e4, any::<bool>()), 12),
    ) {
        let algos = [Algorithm::AstarMod, Algorithm::Mcg, Algorithm::Icg];
        let records: Vec<RunRecord> = times
            .iter()
            .enumerate()
            .map(|(i, &(millis, solved))| RunRecord {
                instance: format!("I{}", i / 3),
                algorithm: algos[i % 3],
                status: if solved { Status::Optimal } else { Status::Limit },
                value: 0.0,
                bound: 0.0,
                nodes: 0,
                subsolver_calls: 0,
                oracle_calls: 0,
                millis,
                seed: 0,
            })
            .collect();
        for r in performance_ratios(&records).unwrap().values() {
            prop_assert!(*r >= 1.0);
        }
        let betas: Vec<f64> = (0..=18).map(|i| 1.0 + i as f64 * 0.5).collect();
        let prof = performance_profile(&records, &betas).unwrap();
        for a in algos {
            let rho: Vec<usize> = prof.iter().filter(|x| x.algorithm == a).map(|x| x.rho).collect();
            prop_assert!(rho.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(rho.iter().all(|&r| r <= 4));
        }
    }
}

#[test]
fn reruns_are_identical() {
    let p =
        Problem::generate(InstanceKind::Loc, 12, None, 4, 17, Some(PerturbSpec { count: 2000, gamma: 0.8 })).unwrap();
    let q =
        Problem::generate(InstanceKind::Loc, 12, None, 4, 17, Some(PerturbSpec { count: 2000, gamma: 0.8 })).unwrap();
    for algo in [Algorithm::AstarMod, Algorithm::Mcg, Algorithm::Icg, Algorithm::BcIcg] {
        let a = run_algorithm(&p, algo, &RunSettings::default()).unwrap();
        let b = run_algorithm(&q, algo, &RunSettings::default()).unwrap();
        assert_eq!(a.record.value.to_bits(), b.record.value.to_bits());
        assert_eq!(a.record.nodes, b.record.nodes);
        assert_eq!(a.record.subsolver_calls, b.record.subsolver_calls);
        assert_eq!(a.record.oracle_calls, b.record.oracle_calls);
        assert_eq!(a.best, b.best);
    }
}

#[test]
fn larger_lambda_needs_fewer_iterations_on_average() {
    let problems: Vec<Problem> = (1..=5)
        .map(|s| {
            Problem::generate(InstanceKind::Loc, 16, None, 5, s, Some(PerturbSpec { count: 5000, gamma: 0.8 })).unwrap()
        })
        .collect();
    let total = |lambda: usize| -> u64 {
        problems
            .iter()
            .map(|p| {
                icg_solve(&p.function(), &p.ground_set(), lambda, &Limits::none(), p.seed).unwrap().subsolver_calls
            })
            .sum()
    };
    let sweep: Vec<u64> = [1, 50, 500].into_iter().map(total).collect();
    assert!(sweep.windows(2).all(|w| w[1] <= w[0]), "{sweep:?}");
}
