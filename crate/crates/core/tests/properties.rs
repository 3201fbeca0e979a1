//! Property and invariant tests across modules.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use proptest::prelude::*;

use qanneal_core::embedding::{embed_model, find_embedding, unembed, BrokenChains};
use qanneal_core::matinv::{column_qubo, invert, precompute, DEFAULT_POWERS};
use qanneal_core::mle::{run_mle, BinaryEncoding, MleProblem, Normal};
use qanneal_core::model::{parse_qubo, write_qubo};
use qanneal_core::{
    chimera, exact_solve, nqueens_qubo, Assignment, ExactSolver, Graph, HardwareRange, IsingModel, QuboModel,
    Sampler, SamplerParams, SimulatedAnnealing, VarKind,
};

fn qubo_strategy(max_n: usize) -> impl Strategy<Value = QuboModel> {
    (1..=max_n).prop_flat_map(|n| {
        let lin = prop::collection::vec(-10.0..10.0f64, n);
        let quad = prop::collection::vec((0..n, 0..n, -10.0..10.0f64), 0..2 * n);
        (lin, quad, -5.0..5.0f64).prop_map(|(lin, quad, off)| {
            let quad = quad.into_iter().filter(|(i, j, _)| i != j);
            QuboModel::from_terms(lin, quad, off).unwrap()
        })
    })
}

fn ising_strategy(max_n: usize) -> impl Strategy<Value = IsingModel> {
    (2..=max_n).prop_flat_map(|n| {
        let lin = prop::collection::vec(-40.0..40.0f64, n);
        let quad = prop::collection::vec((0..n, 0..n, -40.0..40.0f64), 1..2 * n);
        (lin, quad).prop_map(|(lin, quad)| {
            let quad = quad.into_iter().filter(|(i, j, _)| i != j);
            IsingModel::from_terms(lin, quad, 0.0).unwrap()
        })
    })
}

fn ground_states<V: qanneal_core::model::Vartype>(m: &qanneal_core::QuadraticModel<V>) -> BTreeSet<Vec<i8>> {
    let set = exact_solve(m).unwrap();
    set.records().iter().map(|r| r.assignment.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conversion_preserves_energy(q in qubo_strategy(8), bits in any::<u64>()) {
        let n = q.num_vars();
        let a = Assignment::from_bits(bits, n, VarKind::Qubo);
        let s = a.to_kind(VarKind::Ising);
        let ising = q.to_ising();
        let e_q = q.energy(&a).unwrap();
        let e_s = ising.energy(&s).unwrap();
        prop_assert!((e_q - e_s).abs() <= 1e-9 * (1.0 + e_q.abs()));
        let back = ising.to_qubo();
        prop_assert!((back.energy(&a).unwrap() - e_q).abs() <= 1e-9 * (1.0 + e_q.abs()));
    }

    #[test]
    fn rescaling_preserves_ground_states(m in ising_strategy(8)) {
        let (scaled, factor) = qanneal_core::rescale_to_hardware(&m, &HardwareRange::default());
        prop_assert!(factor >= 1.0);
        prop_assert!(scaled.linear().iter().all(|h| h.abs() <= 2.0 + 1e-12));
        prop_assert!(scaled.quadratic().values().all(|&j| (-4.0 - 1e-12..=1.0 + 1e-12).contains(&j)));
        prop_assert_eq!(ground_states(&m), ground_states(&scaled));
    }

    #[test]
    fn qubo_file_round_trip(q in qubo_strategy(8), bits in any::<u64>()) {
        let back = parse_qubo(&write_qubo(&q)).unwrap();
        let a = Assignment::from_bits(bits, q.num_vars(), VarKind::Qubo);
        prop_assert_eq!(back.num_vars(), q.num_vars());
        let e0 = q.energy(&a).unwrap();
        let e1 = back.energy(&a).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-12 * (1.0 + e0.abs()));
    }
}

#[test]
fn sa_is_independent_of_thread_count() {
    let q = nqueens_qubo(4).unwrap();
    let sampler = SimulatedAnnealing::new(
        SamplerParams::default()
            .with_reads(64)
            .with_sweeps(200)
            .with_seed(11),
    );
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| sampler.sample(&q).unwrap().to_json().unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn embedding_search_is_deterministic() {
    let q = nqueens_qubo(3).unwrap();
    let g = Graph::from_model(&q);
    let hw = chimera(4, 4, 4).unwrap();
    let a = find_embedding(&g, &hw, 5).unwrap();
    let b = find_embedding(&g, &hw, 5).unwrap();
    assert_eq!(a.chains(), b.chains());
    a.validate(&g, hw.graph()).unwrap();
}

#[test]
fn unembedding_intact_chains_restores_logical_energy() {
    let q = nqueens_qubo(3).unwrap();
    let ising = q.to_ising();
    let hw = chimera(4, 4, 4).unwrap();
    let emb = find_embedding(&Graph::from_model(&ising), &hw, 1).unwrap();
    let physical = embed_model(&ising, &emb, hw.graph()).unwrap();
    let sampler = SimulatedAnnealing::new(
        SamplerParams::default()
            .with_reads(50)
            .with_sweeps(500)
            .with_seed(3),
    );
    let raw = sampler.sample(&physical).unwrap();
    let logical = unembed(&raw, &emb, &ising, BrokenChains::Discard).unwrap();
    for r in logical.records() {
        let e = ising.energy_of(&r.assignment);
        assert!((e - r.energy).abs() < 1e-9);
    }
}

fn reference_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[1.344, 0.418, -0.935, -1.018, 1.095, -0.250, 0.277, -0.384, 0.755],
    )
}

#[test]
fn matinv_columns_are_independent_subproblems() {
    let enc = BinaryEncoding::new(vec![0, -1, -2, -3]).unwrap();
    let p = precompute(reference_matrix()).unwrap().with_encoding(enc).unwrap();
    let result = invert(&p, &Sampler::Exact(ExactSolver::default()));
    assert!(result.failures.is_empty());
    for k in 0..3 {
        let set = exact_solve(&column_qubo(&p, k).unwrap()).unwrap();
        let v = p.decode_column(k, &set.records()[0].assignment).unwrap();
        let col: Vec<f64> = result.v_hat.column(k).iter().copied().collect();
        assert_eq!(col, v, "column {k}");
    }
}

#[test]
fn finer_encoding_never_raises_the_optimum() {
    let exact = Sampler::Exact(ExactSolver::default());
    let coarse = BinaryEncoding::new(DEFAULT_POWERS[..4].to_vec()).unwrap();
    let fine = BinaryEncoding::new(DEFAULT_POWERS[..5].to_vec()).unwrap();
    let a = invert(
        &precompute(reference_matrix()).unwrap().with_encoding(coarse).unwrap(),
        &exact,
    );
    let b = invert(
        &precompute(reference_matrix()).unwrap().with_encoding(fine).unwrap(),
        &exact,
    );
    for k in 0..3 {
        let (ea, eb) = (a.column_energies[k].unwrap(), b.column_energies[k].unwrap());
        assert!(eb <= ea + 1e-12, "column {k}: {eb} > {ea}");
    }
}

const REFERENCE_DATA: [f64; 10] = [
    -2.296, -0.216, -0.082, 0.231, 1.127, 1.164, 1.189, 1.236, 1.272, 1.373,
];

fn mle_problem(data: Vec<f64>) -> MleProblem {
    let enc = BinaryEncoding::from_range(1, -7).unwrap();
    MleProblem::new(data, Normal, enc.clone(), enc).unwrap()
}

#[test]
fn mle_loglik_non_decreasing_after_first_step() {
    let p = mle_problem(REFERENCE_DATA.to_vec());
    let trace = run_mle(&p, 0.0, 1.0, &Sampler::Exact(ExactSolver::default()), 6).unwrap();
    for w in trace.steps.windows(2) {
        assert!(w[1].loglik >= w[0].loglik - 1e-12, "{:?}", trace.steps);
    }
}

/// With constant data the likelihood is unbounded as phi shrinks, so phi runs
/// to the encoding boundary; theta must still stay on the constant.
#[test]
fn mle_constant_data_recovers_the_constant() {
    let p = mle_problem(vec![0.75; 10]);
    let trace = match run_mle(&p, 0.75, 1.0, &Sampler::Exact(ExactSolver::default()), 3) {
        Ok(t) => t,
        Err(f) => f.partial,
    };
    assert!(!trace.steps.is_empty());
    assert!(trace.steps.iter().all(|s| s.theta == 0.75), "{:?}", trace.steps);
}

/// Number of ground states of the N-queens QUBO by Gray-code enumeration
/// with incremental local fields; integer weights keep counting exact.
fn nqueens_ground_count(n: usize) -> (i64, usize) {
    let q = nqueens_qubo(n).unwrap();
    let m = q.num_vars();
    let mut nbrs = vec![Vec::new(); m];
    for (&(i, j), &w) in q.quadratic() {
        nbrs[i].push((j, w as i64));
        nbrs[j].push((i, w as i64));
    }
    let lin: Vec<i64> = q.linear().iter().map(|&a| a as i64).collect();
    let mut field = lin.clone();
    let mut x = vec![0i8; m];
    let (mut e, mut best, mut count) = (0i64, 0i64, 1usize);
    for step in 1u64..(1 << m) {
        let i = step.trailing_zeros() as usize;
        let up = x[i] == 0;
        e += if up { field[i] } else { -field[i] };
        x[i] = up as i8;
        let sign = if up { 1 } else { -1 };
        for &(j, w) in &nbrs[i] {
            field[j] += sign * w;
        }
        if e < best {
            best = e;
            count = 1;
        } else if e == best {
            count += 1;
        }
    }
    (best, count)
}

#[test]
fn nqueens_five_has_ten_ground_states() {
    assert_eq!(nqueens_ground_count(5), (-10, 10));
}

fn queens_solutions(n: usize) -> usize {
    fn place(row: usize, n: usize, cols: &mut Vec<usize>) -> usize {
        if row == n {
            return 1;
        }
        let mut total = 0;
        for c in 0..n {
            let ok = cols
                .iter()
                .enumerate()
                .all(|(r, &cc)| cc != c && row - r != c.abs_diff(cc));
            if ok {
                cols.push(c);
                total += place(row + 1, n, cols);
                cols.pop();
            }
        }
        total
    }
    place(0, n, &mut Vec::new())
}

#[test]
fn nqueens_six_ground_states_match_enumerated_placements() {
    assert_eq!(queens_solutions(6), 4);
    let q = nqueens_qubo(6).unwrap();
    let sampler = SimulatedAnnealing::new(
        SamplerParams::default()
            .with_reads(10_000)
            .with_sweeps(100)
            .with_seed(6),
    );
    let set = sampler.sample(&q).unwrap();
    let grounds: BTreeSet<&Vec<i8>> = set
        .records()
        .iter()
        .filter(|r| r.energy == -12.0)
        .map(|r| &r.assignment)
        .collect();
    assert_eq!(grounds.len(), 4);
}
