use proptest::prelude::*;
use symext::channels::{
    choi_state, classify_channel, complementary_channel, is_anti_degradable, is_degradable, kraus_from_choi,
    kraus_rank, Channel, ChannelOptions, ChannelTag,
};
use symext::linalg::{hermitian_eig, partial_trace, swap_operator, tensor, trace_norm};
use symext::oracle::{bosonic_from_symmetric, find_symmetric_extension, mix_with_identity, WITNESS_TOL};
use symext::random::{random_hermitian, random_unitary, Rng};
use symext::states::{
    apply_1locc, coherent_information, is_symmetric_extension, purify_equal_margins, spectral_symmetric_decomposition,
    spectrum_condition,
};
use symext::twoqubit::{
    bell_conjecture_form, bell_conjecture_margin, bell_extendible, bell_inequalities, check_conjecture,
    conjecture_margin, construct_pure_extension, global_and_local_lambda_max, random_pure_extendible,
    rank2_condition, zcorr_build_extension, zcorr_extendible, zcorr_witness, BellDiagonalParams, ZCorrParams,
};
use symext::{BipartiteState, ComplexMatrix, OracleOptions, Status, Symmetry};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn density(rng: &mut Rng, d_a: usize, d_b: usize, rank: usize) -> BipartiteState {
    BipartiteState::new(rng.random_density(d_a * d_b, rank), d_a, d_b).unwrap()
}

fn oracle(rho: &BipartiteState) -> Status {
    find_symmetric_extension(rho, &OracleOptions::default()).unwrap().status
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..=64) {
        let mut rng = Rng::seed(seed);
        let m = random_hermitian(n, &mut rng);
        let eig = hermitian_eig(&m).unwrap();
        let scale = m.frobenius_norm().max(1e-300);
        prop_assert!(eig.reconstruct().max_diff(&m) / scale <= 1e-11);
    }

    #[test]
    fn tensor_and_partial_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..3) {
        let mut rng = Rng::seed(seed);
        let a = rng.gaussian_matrix(da, da);
        let b = rng.gaussian_matrix(db, db);
        let c = rng.gaussian_matrix(dc, dc);
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        prop_assert!(left.max_diff(&right) <= 1e-12);
        let reduced = partial_trace(&tensor(&a, &b), &[da, db], &[0]).unwrap();
        prop_assert!(reduced.max_diff(&a.scale(b.trace())) <= 1e-12 * (1.0 + a.max_abs() * b.max_abs() * db as f64));
    }

    #[test]
    fn trace_norm_is_a_norm(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = Rng::seed(seed);
        let [a, b] = [rng.gaussian_matrix(n, n), rng.gaussian_matrix(n, n)];
        let (na, nb, nab) = (trace_norm(&a), trace_norm(&b), trace_norm(&(&a + &b)));
        prop_assert!(na >= 0.0 && nb >= 0.0);
        prop_assert!(nab <= na + nb + 1e-12);
        prop_assert!(trace_norm(&ComplexMatrix::zeros(n, n)) <= 1e-12);
    }

    #[test]
    fn swap_is_a_hermitian_involution(d in 1usize..7) {
        let p = swap_operator(d);
        let id = ComplexMatrix::identity(d * d);
        prop_assert_eq!(p.max_diff(&p.adjoint()), 0.0);
        prop_assert_eq!((&p * &p).max_diff(&id), 0.0);
    }

    #[test]
    fn spectrum_condition_local_unitary_invariance(seed in any::<u64>(), da in 2usize..4) {
        let mut rng = Rng::seed(seed);
        let rho = if seed % 2 == 0 && da == 2 {
            random_pure_extendible(&mut rng)
        } else {
            density(&mut rng, da, 2, 1 + (seed as usize) % (2 * da))
        };
        let (ua, ub) = (random_unitary(rho.d_a(), &mut rng), random_unitary(2, &mut rng));
        let moved = rho.local_unitary(&ua, &ub).unwrap();
        prop_assert_eq!(spectrum_condition(&rho), spectrum_condition(&moved));
    }

    #[test]
    fn equal_margin_purification(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = random_pure_extendible(&mut rng);
        let psi = purify_equal_margins(&rho).unwrap();
        prop_assert!(trace_norm(&(&psi.reduced_b() - &psi.reduced_b_prime())) <= 1e-8);
        prop_assert!(psi.reduced_ab().max_diff(rho.matrix()) <= 1e-8);
    }

    #[test]
    fn witnesses_decompose_into_swap_eigenvectors(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, 2, 2, 2 + (seed as usize) % 3);
        let r = find_symmetric_extension(&rho, &OracleOptions::default()).unwrap();
        let mut witnesses: Vec<_> = r.witness.into_iter().collect();
        let pure = random_pure_extendible(&mut rng);
        witnesses.push(construct_pure_extension(&pure).unwrap().to_extension().unwrap());
        for w in witnesses {
            let terms = spectral_symmetric_decomposition(&w).unwrap();
            let n = w.matrix().rows();
            let mut rebuilt = ComplexMatrix::zeros(n, n);
            let p = tensor(&ComplexMatrix::identity(w.dims().0), &swap_operator(w.dims().1));
            for t in &terms {
                rebuilt += &ComplexMatrix::projector(&t.vector).scale_real(t.weight);
                let pv = p.mul_vec(&t.vector);
                let defect = pv.iter().zip(&t.vector).map(|(a, b)| (a - b * t.parity as f64).norm()).fold(0.0, f64::max);
                prop_assert!(defect <= 1e-8);
            }
            prop_assert!(rebuilt.max_diff(w.matrix()) <= 1e-8);
        }
    }

    #[test]
    fn one_way_locc_preserves_the_conjecture_condition(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, 2, 2, 2 + (seed as usize) % 3);
        prop_assume!(conjecture_margin(&rho).unwrap() > 1e-6);
        let m = rng.gaussian_matrix(2, 2);
        let norm = symext::linalg::singular_values(&m)[0];
        let alice = vec![m.scale_real(1.0 / norm)];
        let bob = vec![vec![random_unitary(2, &mut rng)]];
        let out = apply_1locc(&rho, &alice, &bob).unwrap();
        prop_assert!(check_conjecture(&out.state).unwrap());
    }

    #[test]
    fn positive_coherent_information_is_never_feasible(seed in any::<u64>(), da in 2usize..4) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, da, 2, 1 + (seed as usize) % 3);
        if coherent_information(&rho) > 1e-6 {
            prop_assert_ne!(oracle(&rho), Status::Feasible);
        }
    }

    #[test]
    fn pure_extension_roundtrip(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = random_pure_extendible(&mut rng);
        let psi = construct_pure_extension(&rho).unwrap();
        prop_assert!(psi.reduced_ab().max_diff(rho.matrix()) <= 1e-8);
        prop_assert!(psi.symmetry_defect() <= 1e-8);
    }

    #[test]
    fn conjecture_local_unitary_invariance(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, 2, 2, 1 + (seed as usize) % 4);
        let moved = rho.local_unitary(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng)).unwrap();
        let (a, b) = (conjecture_margin(&rho).unwrap(), conjecture_margin(&moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-9);
        if a.abs() > 1e-9 {
            prop_assert_eq!(check_conjecture(&rho).unwrap(), check_conjecture(&moved).unwrap());
        }
    }

    #[test]
    fn bell_forms_agree(p in proptest::array::uniform4(0.0f64..1.0)) {
        let sum: f64 = p.iter().sum();
        prop_assume!(sum > 1e-6);
        let params = BellDiagonalParams::new(p.map(|v| v / sum)).unwrap();
        let best = bell_inequalities(&params).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if best.abs() > 1e-9 && bell_conjecture_margin(&params).abs() > 1e-9 {
            prop_assert_eq!(bell_extendible(&params), bell_conjecture_form(&params));
        }
    }

    #[test]
    fn zcorr_witnesses_verify(seed in any::<u64>(), fx in 0.0f64..1.0, fy in 0.0f64..1.0) {
        let mut rng = Rng::seed(seed);
        let v = rng.simplex(4);
        let mut p = [v[0], v[1], v[2], v[3]];
        let imax = (0..4).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        p.swap(0, imax);
        let y = if seed % 2 == 0 { 0.0 } else { fy * (p[1] * p[2]).sqrt() };
        let z = ZCorrParams::new(p, fx * (p[0] * p[3]).sqrt(), y).unwrap();
        if zcorr_extendible(&z).unwrap() {
            if let Some((s, t)) = zcorr_witness(&z).unwrap() {
                let w = zcorr_build_extension(&z, s, t).unwrap();
                prop_assert!(is_symmetric_extension(&w, &z.state().unwrap(), 1e-8).unwrap());
            } else {
                prop_assert!(z.p[2] >= z.p[3] || z.x == 0.0 && z.y == 0.0, "extendible without a witness: {:?}", z);
            }
        }
    }

    #[test]
    fn rank2_condition_equals_conjecture(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, 2, 2, 2);
        let (global, local) = global_and_local_lambda_max(&rho);
        prop_assume!((global - local).abs() > 1e-9);
        prop_assert_eq!(rank2_condition(&rho).unwrap(), check_conjecture(&rho).unwrap());
    }

    #[test]
    fn oracle_local_unitary_invariance(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, 2, 2, 2 + (seed as usize) % 3);
        prop_assume!(conjecture_margin(&rho).unwrap().abs() > 1e-4);
        let moved = rho.local_unitary(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng)).unwrap();
        prop_assert_eq!(oracle(&rho), oracle(&moved));
    }

    #[test]
    fn oracle_witnesses_are_verified(seed in any::<u64>(), da in 2usize..4) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, da, 2, 2 + (seed as usize) % (2 * da - 1));
        let r = find_symmetric_extension(&rho, &OracleOptions::default()).unwrap();
        if r.status == Status::Feasible {
            prop_assert!(is_symmetric_extension(r.witness.as_ref().unwrap(), &rho, WITNESS_TOL).unwrap());
        } else {
            prop_assert!(r.witness.is_none());
        }
    }

    #[test]
    fn mixing_with_identity_is_monotone(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, 2, 2, 1 + (seed as usize) % 2);
        let verdicts: Vec<Status> = (0..=8)
            .map(|k| oracle(&mix_with_identity(&rho, k as f64 / 8.0).unwrap()))
            .collect();
        if let Some(first) = verdicts.iter().position(|&s| s == Status::Feasible) {
            prop_assert!(verdicts[first..].iter().all(|&s| s != Status::Infeasible), "{:?}", verdicts);
        }
    }

    #[test]
    fn bosonic_and_unconstrained_agree_for_qubit_b(seed in any::<u64>(), da in 2usize..4) {
        let mut rng = Rng::seed(seed);
        let rho = density(&mut rng, da, 2, 2 + (seed as usize) % 3);
        let any = find_symmetric_extension(&rho, &OracleOptions::default()).unwrap();
        let bos = find_symmetric_extension(&rho, &OracleOptions::with_symmetry(Symmetry::Bosonic)).unwrap();
        if bos.status == Status::Feasible {
            prop_assert_ne!(any.status, Status::Infeasible);
        }
        if let Some(w) = any.witness {
            let b = bosonic_from_symmetric(&w).unwrap();
            prop_assert!(is_symmetric_extension(&b, &rho, WITNESS_TOL).unwrap());
        }
    }

    #[test]
    fn choi_kraus_roundtrip(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4, k in 1usize..4) {
        let mut rng = Rng::seed(seed);
        prop_assume!(dout * k >= din);
        let n = Channel::random(din, dout, k, &mut rng).unwrap();
        let c = choi_state(&n).unwrap();
        let back = choi_state(&kraus_from_choi(&c).unwrap()).unwrap();
        prop_assert!(back.state.matrix().max_diff(c.state.matrix()) <= 1e-9);
        prop_assert_eq!(kraus_rank(&n), c.state.rank());
    }

    #[test]
    fn anti_degradable_iff_complement_degradable(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = Rng::seed(seed);
        let n = Channel::random(2, 2, k, &mut rng).unwrap();
        let nc = complementary_channel(&n).unwrap();
        let opts = ChannelOptions::default();
        prop_assert_eq!(
            is_anti_degradable(&n, &opts).unwrap().result.status,
            is_degradable(&nc, &opts).unwrap().result.status
        );
    }

    #[test]
    fn qubit_channels_with_qubit_environment_are_never_neither(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let n = Channel::random(2, 2, 2, &mut rng).unwrap();
        let c = classify_channel(&n, &ChannelOptions::default()).unwrap();
        prop_assert_ne!(c.tag, ChannelTag::Neither);
        if matches!(c.tag, ChannelTag::AntiDegradable | ChannelTag::Both) {
            let choi = choi_state(&n).unwrap().state;
            prop_assert!(choi.rank() <= 2);
            let (global, local) = global_and_local_lambda_max(&choi);
            prop_assert!(global <= local + 1e-9);
        }
    }
}
