//! Property tests over the public pipeline: random systems, kernels and
//! coefficient matrices.

use corrdeco_core::dynamics::linspace;
use corrdeco_core::quantum::{pauli, vectorize};
use corrdeco_core::redfield::kossakowski_dissipator;
use corrdeco_core::spectral::BathSite;
use corrdeco_core::{
    build_br_generator, build_secular_generator, eigh, embed_site, map_to_lindblad, positivity_audit, propagate,
    secular_decompose, two_qubit_rates, Coupling, DensityMatrix, IsingParams, Kernel, Mapping, Operator,
    PhenomenologicalKind, Regime, ScalingPrediction, SpectralModel, Superoperator, SystemSpec, C64,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_matrix(rng: &mut StdRng, r: usize, c: usize) -> DMatrix<C64> {
    DMatrix::from_fn(r, c, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_hermitian(rng: &mut StdRng, d: usize) -> Operator {
    let a = random_matrix(rng, d, d);
    Operator::hermitian((&a + a.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

fn random_state(rng: &mut StdRng, d: usize) -> DensityMatrix {
    let a = random_matrix(rng, d, d);
    let p = &a * a.adjoint();
    let tr = p.trace();
    DensityMatrix::new(Operator::hermitian(p / tr).unwrap()).unwrap()
}

fn kernel_kind(which: u8, a: f64) -> PhenomenologicalKind {
    match which % 3 {
        0 => PhenomenologicalKind::Exponential { a },
        1 => PhenomenologicalKind::Gaussian { a },
        _ => PhenomenologicalKind::Step { width: 1 + (a * 3.0) as u32 },
    }
}

/// Random Hermitian `H_S` on `d` levels with `n_ops` random Hermitian
/// couplings at random positions.
fn random_system(rng: &mut StdRng, d: usize, n_ops: usize) -> SystemSpec {
    let h = random_hermitian(rng, d).scale(3.0);
    let cs = (0..n_ops)
        .map(|_| Coupling::hermitian(random_hermitian(rng, d), rng.gen_range(-3..4)))
        .collect();
    SystemSpec::new(h, cs).unwrap()
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Largest deviation from Hermiticity of `L(rho)` and largest `|tr L(rho)|`
/// over a few random Hermitian inputs.
fn hermiticity_and_trace(l: &Superoperator, rng: &mut StdRng) -> (f64, f64) {
    let d = l.dim();
    let mut herm = 0.0f64;
    let mut tr = 0.0f64;
    for _ in 0..4 {
        let out = l.apply(&random_hermitian(rng, d));
        herm = herm.max(out.hermiticity_defect());
        tr = tr.max(out.trace().norm());
    }
    (herm, tr)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), d in 1usize..=16) {
        let mut rng = StdRng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, d);
        let e = eigh(&h).unwrap();
        let diag = DMatrix::from_fn(d, d, |i, j| if i == j { C64::new(e.values[i], 0.0) } else { C64::new(0.0, 0.0) });
        prop_assert!(max_diff(&e.from_eigenbasis(&diag), h.matrix()) < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn superoperator_sandwich_matches_products(seed in any::<u64>(), d in 1usize..=5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (a, b, rho) = (random_matrix(&mut rng, d, d), random_matrix(&mut rng, d, d), random_hermitian(&mut rng, d));
        let mut s = Superoperator::zeros(d);
        s.add_sandwich(C64::new(1.0, 0.0), &a, &b);
        let direct = &a * rho.matrix() * &b;
        prop_assert!(max_diff(s.apply(&rho).matrix(), &direct) < 1e-12);
        let v = s.matrix() * vectorize(rho.matrix());
        prop_assert!((v - vectorize(&direct)).norm() < 1e-12);
    }

    #[test]
    fn dissipators_preserve_trace_and_hermiticity(
        seed in any::<u64>(),
        d in 2usize..=8,
        n_ops in 1usize..=3,
        which in any::<u8>(),
        a in 0.05f64..3.0,
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sys = random_system(&mut rng, d, n_ops);
        let model = SpectralModel::phenomenological(kernel_kind(which, a), 0.7);
        let br = build_br_generator(&sys, &model).unwrap();
        let (herm, tr) = hermiticity_and_trace(&br.dissipator, &mut rng);
        prop_assert!(herm < 1e-10 && tr < 1e-10, "bloch-redfield: {herm:e} {tr:e}");
        let sec = build_secular_generator(&sys, &model, None, false).unwrap();
        let (herm, tr) = hermiticity_and_trace(&sec.dissipator, &mut rng);
        prop_assert!(herm < 1e-10 && tr < 1e-10, "secular: {herm:e} {tr:e}");
    }

    #[test]
    fn generator_is_linear_in_kernel(seed in any::<u64>(), d in 2usize..=6, a in 0.05f64..3.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sys = random_system(&mut rng, d, 2);
        let kind = PhenomenologicalKind::Gaussian { a };
        let one = build_br_generator(&sys, &SpectralModel::phenomenological(kind, 1.0)).unwrap();
        let two = build_br_generator(&sys, &SpectralModel::phenomenological(kind, 2.0)).unwrap();
        prop_assert_eq!(two.dissipator.max_abs_diff(&one.dissipator.scaled(2.0)), 0.0);
    }

    #[test]
    fn secular_parts_reassemble(seed in any::<u64>(), d in 2usize..=8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sys = random_system(&mut rng, d, 2);
        let dec = secular_decompose(&sys, None).unwrap();
        for (j, c) in sys.couplings().iter().enumerate() {
            let mut sum = DMatrix::<C64>::zeros(d, d);
            for parts in &dec.parts {
                sum += parts[j].matrix();
            }
            prop_assert!(max_diff(&sum, c.op.matrix()) < 1e-12);
        }
        for (g, group) in dec.groups.iter().enumerate() {
            if let Some(h) = dec.group_of(-group.epsilon) {
                for j in 0..sys.couplings().len() {
                    let adj = dec.parts[g][j].matrix().adjoint();
                    prop_assert!(max_diff(&adj, dec.parts[h][j].matrix()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lindblad_round_trip(seed in any::<u64>(), d in 2usize..=6, n_ops in 1usize..=4, rank in 1usize..=4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n_ops, rank.min(n_ops));
        let c = &a * a.adjoint();
        let ops: Vec<Operator> = (0..n_ops)
            .map(|_| Operator::from_matrix(random_matrix(&mut rng, d, d)).unwrap())
            .collect();
        match map_to_lindblad(&c, &ops, None).unwrap() {
            Mapping::Lindblad(l) => {
                prop_assert!(l.rates.iter().all(|&r| r >= 0.0));
                let want = kossakowski_dissipator(&c, &ops);
                prop_assert!(l.dissipator().max_abs_diff(&want) < 1e-12);
            }
            Mapping::NotCompletelyPositive(v) => prop_assert!(false, "PSD input rejected: {:?}", v.eigenvalues),
        }
    }

    #[test]
    fn exponential_and_gaussian_kernels_are_psd(a in 0.05f64..10.0, n in 2usize..=64, gaussian in any::<bool>()) {
        let kind = if gaussian { PhenomenologicalKind::Gaussian { a } } else { PhenomenologicalKind::Exponential { a } };
        let r = positivity_audit(kind, n, 1e-9).unwrap();
        prop_assert!(r.mappable, "{r:?}");
        prop_assert!(r.eigenvalues_within_bounds);
    }

    #[test]
    fn wide_step_kernels_are_not_mappable(width in 2u32..6, extra in 1usize..=36) {
        // n <= width gives the all-ones matrix, which is PSD
        let n = width as usize + extra;
        let r = positivity_audit(PhenomenologicalKind::Step { width }, n, 1e-9).unwrap();
        prop_assert!(!r.mappable);
        prop_assert!(r.witness.is_some_and(|w| w.determinant < 0.0));
    }

    #[test]
    fn ising_kernel_is_homogeneous_and_self_positive(
        bj in 0.05f64..2.5,
        alpha in 0.1f64..3.0,
        omega in -5.0f64..5.0,
        dx in 0i64..6,
    ) {
        let m = SpectralModel::new(Kernel::Ising(IsingParams { j: 1.0, beta: bj, alpha }));
        let s = |x: i64| m.spectral(omega, &BathSite::hermitian(0), &BathSite::hermitian(x)).unwrap();
        let (p, q) = (s(dx), s(-dx));
        prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
        prop_assert!(s(0) >= 0.0);
    }

    #[test]
    fn rates_are_nonnegative_and_sum(a in 1e-3f64..20.0, d in 0i64..16, gaussian in any::<bool>()) {
        let m = if gaussian { SpectralModel::gaussian(a) } else { SpectralModel::exponential(a) };
        let r = two_qubit_rates(&m, d, 1.0).unwrap();
        prop_assert!(r.gamma_minus >= -1e-12 && r.gamma_plus >= -1e-12 && r.gamma_zero >= -1e-12);
        prop_assert!(r.sum_defect() < 1e-9);
    }

    #[test]
    fn scaling_prediction_laws(bra in 0usize..64, ket in 0usize..64, gamma in 0.01f64..10.0) {
        let u = ScalingPrediction::new(bra, ket, gamma, Regime::Uncorrelated);
        let c = ScalingPrediction::new(bra, ket, gamma, Regime::FullyCorrelated);
        prop_assert_eq!(u.predicted(), (bra ^ ket).count_ones() as f64 * gamma);
        let ne = (bra.count_ones() as f64 - ket.count_ones() as f64).abs();
        prop_assert_eq!(c.predicted(), ne * ne * gamma);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trajectories_stay_normalized(seed in any::<u64>(), n in 1usize..=3, a in 0.1f64..3.0, mixed in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut h = Operator::zeros(1 << n);
        let mut cs = Vec::new();
        for j in 0..n {
            let z = embed_site(&pauli::sigma_z(), j, n).unwrap();
            h = &h + &z.scale(rng.gen_range(1.0..3.0));
            if mixed {
                cs.push(Coupling::hermitian(embed_site(&pauli::sigma_x(), j, n).unwrap(), j as i64));
            }
            cs.push(Coupling::hermitian(z, j as i64));
        }
        let sys = SystemSpec::new(h, cs).unwrap();
        let gen = build_br_generator(&sys, &SpectralModel::exponential(a).with_strength(0.05)).unwrap();
        let rho = random_state(&mut rng, 1 << n);
        let traj = propagate(&gen.superop, &rho, &linspace(20.0, 41)).unwrap();
        for s in traj.states() {
            prop_assert!((s.trace() - C64::new(1.0, 0.0)).norm() < 1e-9);
            prop_assert!(s.hermiticity_defect() < 1e-10);
        }
    }
}
