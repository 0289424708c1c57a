mod common;

use clusterhop::planner::{
    brute_force_plan, greedy_plan, lp_relaxation_bound, solve_illumination, IlpInstance,
    SolverStatus, DEFAULT_ORACLE_CAP,
};
use common::{integer_instance, rational_objective, same_fraction};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> (Vec<Vec<u64>>, Vec<u64>, usize, IlpInstance) {
    integer_instance(&mut ChaCha8Rng::seed_from_u64(seed), 5, 5, 10)
}

fn check_plan_shape(
    inst: &IlpInstance,
    psi: &[usize],
    schedule: &[usize],
) -> Result<(), TestCaseError> {
    prop_assert_eq!(psi.len(), inst.n_snapshots());
    prop_assert_eq!(psi.iter().sum::<usize>(), inst.n_slot());
    prop_assert_eq!(schedule.len(), inst.n_slot());
    let mut counts = vec![0usize; psi.len()];
    for &u in schedule {
        counts[u] += 1;
    }
    prop_assert_eq!(&counts[..], psi);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ilp_matches_exhaustive_search(seed in any::<u64>()) {
        let (l, m, _, inst) = instance(seed);
        let ilp = solve_illumination(&inst).unwrap();
        let oracle = brute_force_plan(&inst, DEFAULT_ORACLE_CAP).unwrap();
        match (rational_objective(&l, &m, &ilp.psi), rational_objective(&l, &m, &oracle.psi)) {
            (Some(a), Some(b)) => {
                prop_assert!(same_fraction(a, b), "ilp {:?} oracle {:?}", ilp.psi, oracle.psi);
                prop_assert_eq!(ilp.status, SolverStatus::Optimal);
                prop_assert_eq!(&ilp.psi, &oracle.psi);
            }
            (None, None) => prop_assert_eq!(ilp.status, SolverStatus::Heuristic),
            _ => prop_assert!(false, "demanded set differs"),
        }
    }

    #[test]
    fn greedy_below_ilp_below_relaxation(seed in any::<u64>()) {
        let (_, m, _, inst) = instance(seed);
        prop_assume!(m.iter().any(|&x| x > 0));
        let ilp = solve_illumination(&inst).unwrap();
        let greedy = greedy_plan(&inst).unwrap();
        let bound = lp_relaxation_bound(&inst).unwrap();
        prop_assert!(greedy.t <= ilp.t * (1.0 + 1e-12));
        prop_assert!(ilp.t <= bound * (1.0 + 1e-9) + 1e-12);
        check_plan_shape(&inst, &greedy.psi, &greedy.schedule)?;
    }

    #[test]
    fn plans_are_well_formed(seed in any::<u64>()) {
        let (_, _, _, inst) = instance(seed);
        let plan = solve_illumination(&inst).unwrap();
        check_plan_shape(&inst, &plan.psi, &plan.schedule)?;
        let t = inst.objective_of(&plan.psi);
        prop_assert!(t == plan.t || (t.is_infinite() && plan.t.is_infinite()));
        for (s, direct) in plan.offered_bits.iter().zip(inst.offered(&plan.psi)) {
            prop_assert_eq!(*s, direct);
        }
    }

    #[test]
    fn power_of_two_rescaling_keeps_the_plan(seed in any::<u64>(), ks in -20i32..20, kd in -20i32..20) {
        let (_, _, n_slot, inst) = instance(seed);
        let (fs, fd) = (2f64.powi(ks), 2f64.powi(kd));
        let scaled = IlpInstance::new(
            inst.supply() * fs,
            inst.demand().iter().map(|d| d * fd).collect(),
            n_slot,
        ).unwrap();
        let a = solve_illumination(&inst).unwrap();
        let b = solve_illumination(&scaled).unwrap();
        prop_assert_eq!(&a.psi, &b.psi);
        if a.t.is_finite() {
            prop_assert!((b.t - a.t * fs / fd).abs() <= 1e-12 * b.t.abs().max(1e-300));
        }
    }

    #[test]
    fn cluster_order_is_irrelevant(seed in any::<u64>(), rot in 0usize..5) {
        let (l, _, n_slot, inst) = instance(seed);
        let rows = l.len();
        let perm: Vec<usize> = (0..rows).map(|r| (r + rot) % rows).collect();
        let permuted = IlpInstance::new(
            DMatrix::from_fn(rows, inst.n_snapshots(), |r, c| inst.supply()[(perm[r], c)]),
            perm.iter().map(|&r| inst.demand()[r]).collect(),
            n_slot,
        ).unwrap();
        let a = solve_illumination(&inst).unwrap();
        let b = solve_illumination(&permuted).unwrap();
        prop_assert_eq!(&a.psi, &b.psi);
    }

    #[test]
    fn snapshot_order_keeps_the_objective(seed in any::<u64>(), rot in 1usize..5) {
        let (l, m, n_slot, inst) = instance(seed);
        let cols = inst.n_snapshots();
        let perm: Vec<usize> = (0..cols).map(|c| (c + rot) % cols).collect();
        let permuted = IlpInstance::new(
            DMatrix::from_fn(l.len(), cols, |r, c| inst.supply()[(r, perm[c])]),
            inst.demand().to_vec(),
            n_slot,
        ).unwrap();
        let a = solve_illumination(&inst).unwrap();
        let b = solve_illumination(&permuted).unwrap();
        let l_perm: Vec<Vec<u64>> = l.iter().map(|row| perm.iter().map(|&c| row[c]).collect()).collect();
        match (rational_objective(&l, &m, &a.psi), rational_objective(&l_perm, &m, &b.psi)) {
            (Some(x), Some(y)) => prop_assert!(same_fraction(x, y)),
            (None, None) => {}
            _ => prop_assert!(false),
        }
    }
}

#[test]
fn lone_zero_supply_row_pins_objective_to_zero() {
    let inst = IlpInstance::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 2.0]),
        vec![1.0, 1.0],
        4,
    )
    .unwrap();
    let plan = solve_illumination(&inst).unwrap();
    assert_eq!(plan.t, 0.0);
    assert_eq!(plan.psi.iter().sum::<usize>(), 4);
}
