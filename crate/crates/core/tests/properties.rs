use proptest::prelude::*;

use qinterf_core::detection::{coincidence_probability_mixed, superposition_scan};
use qinterf_core::random::{self, indexed_basis, kernel_instance};
use qinterf_core::rng::{substream, GENERATOR_STREAM};
use qinterf_core::sampling::sample_events;
use qinterf_core::*;

fn instance_rng(seed: u64) -> qinterf_core::rng::Rng {
    substream(seed, GENERATOR_STREAM)
}

fn arbitrary_element(kind: u8, x: f64) -> OpticalElement {
    match kind % 4 {
        0 => OpticalElement::beam_splitter(x * 6.0),
        1 => OpticalElement::phase_shifter(if x > 0.5 { "I" } else { "II" }, x * 10.0),
        2 => OpticalElement::mirror("I", "II"),
        _ => OpticalElement::blocker(if x > 0.5 { "I" } else { "II" }, 0.2 + 0.8 * x),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn expectation_lies_in_unit_interval(seed in any::<u64>(), dim in 1usize..=8) {
        let mut rng = instance_rng(seed);
        let a = random::random_effect(&mut rng, dim);
        let phi = random::random_state(&mut rng, &indexed_basis(dim));
        let raw = a.operator().quadratic_form(phi.amplitudes()).unwrap();
        prop_assert!(raw.im.abs() <= 1e-10);
        prop_assert!(raw.re >= -1e-10 && raw.re <= 1.0 + 1e-10);
        let p = expectation(&a, &phi).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn superpose_is_componentwise_linear(seed in any::<u64>(), dim in 2usize..=8) {
        let mut rng = instance_rng(seed);
        let (p1, p2) = random::random_orthonormal_pair(&mut rng, &indexed_basis(dim)).unwrap();
        let (c1, c2) = random::random_coefficients(&mut rng);
        let psi = superpose(c1, &p1, c2, &p2).unwrap();
        for ((z, a), b) in psi.amplitudes().iter().zip(p1.amplitudes()).zip(p2.amplitudes()) {
            prop_assert!((z - (c1 * a + c2 * b)).norm() <= 1e-14);
        }
        prop_assert!((psi.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pure_density_operator_agrees(seed in any::<u64>(), dim in 1usize..=8) {
        let mut rng = instance_rng(seed);
        let a = random::random_effect(&mut rng, dim);
        let phi = random::random_state(&mut rng, &indexed_basis(dim));
        let p = expectation(&a, &phi).unwrap();
        let q = expectation_mixed(&a, &DensityOperator::pure(&phi)).unwrap();
        prop_assert!((p - q).abs() <= 1e-12);
    }

    #[test]
    fn unitary_elements_preserve_norm(kind in 0u8..3, x in 0.0f64..1.0, seed in any::<u64>()) {
        let mut rng = instance_rng(seed);
        let psi = random::random_state(&mut rng, &Basis::two_path());
        let element = arbitrary_element(kind, x);
        let r = propagate(&psi, &element).unwrap();
        prop_assert_eq!(r.survival_probability, 1.0);
        let raw = element.matrix(psi.basis()).unwrap().apply(psi.amplitudes()).unwrap();
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn arrangement_is_sequential_propagation(
        parts in prop::collection::vec((0u8..4, 0.0f64..1.0), 0..=8),
        seed in any::<u64>(),
    ) {
        let mut rng = instance_rng(seed);
        let basis = Basis::two_path();
        let input = random::random_state(&mut rng, &basis);
        let elements: Vec<_> = parts.iter().map(|&(k, x)| arbitrary_element(k, x)).collect();
        let arr = Arrangement::new(basis, elements.clone(), Layout::Custom).unwrap();
        let whole = run_arrangement(&arr, &input).unwrap();

        let mut state = input.clone();
        let mut survival = 1.0;
        for e in &elements {
            let r = propagate(&state, e).unwrap();
            survival *= r.survival_probability;
            state = r.conditional_state;
        }
        prop_assert!((whole.survival_probability - survival).abs() <= 1e-12);
        for (a, b) in whole.conditional_state.amplitudes().iter().zip(state.amplitudes()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }

        // product of element matrices, renormalized at the end
        let mut raw = input.amplitudes().to_vec();
        for e in &elements {
            raw = e.matrix(input.basis()).unwrap().apply(&raw).unwrap();
        }
        let total: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((whole.survival_probability - total).abs() <= 1e-12);
    }

    #[test]
    fn appending_blockers_never_raises_survival(
        etas in prop::collection::vec((0.05f64..1.0, any::<bool>()), 1..6),
        seed in any::<u64>(),
    ) {
        let mut rng = instance_rng(seed);
        let basis = Basis::two_path();
        let input = random::random_state(&mut rng, &basis);
        let mut elements = vec![OpticalElement::balanced_beam_splitter()];
        let mut last = 1.0;
        for (eta, first) in etas {
            elements.push(OpticalElement::blocker(if first { "I" } else { "II" }, eta));
            let arr = Arrangement::new(basis.clone(), elements.clone(), Layout::Custom).unwrap();
            let s = run_arrangement(&arr, &input).unwrap().survival_probability;
            prop_assert!(s <= last + 1e-15);
            last = s;
        }
    }

    #[test]
    fn povm_families_are_complete(e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
        let basis = Basis::two_path();
        for (layout, dets) in [
            (Layout::A, [DetectorSpec::new("I", e1, false), DetectorSpec::new("II", e2, false)]),
            (Layout::B, [DetectorSpec::new("I", e1, false), DetectorSpec::new("II", e2, false)]),
            (Layout::C, [DetectorSpec::new("I", e1, true), DetectorSpec::new("I", e2, false)]),
        ] {
            let povm = build_joint_povm(layout, &dets, &basis).unwrap();
            prop_assert!(povm.completeness_residual() <= 1e-10);
        }
    }

    #[test]
    fn serial_unit_efficiency_is_all_or_nothing(seed in any::<u64>()) {
        let mut rng = instance_rng(seed);
        let basis = Basis::two_path();
        let povm = build_joint_povm(
            Layout::C,
            &[DetectorSpec::new("I", 1.0, true), DetectorSpec::ideal("I")],
            &basis,
        ).unwrap();
        let d = serial_correlation(&povm, &random::random_state(&mut rng, &basis)).unwrap();
        prop_assert!(d.exactly_one() <= 1e-12);
        prop_assert!((d.both + d.none - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn mixtures_of_arm_states_never_coincide(w in 0.0f64..=1.0) {
        let basis = Basis::two_path();
        let povm = build_joint_povm(
            Layout::B,
            &[DetectorSpec::ideal("I"), DetectorSpec::ideal("II")],
            &basis,
        ).unwrap();
        let a = StateVector::basis_state(basis.clone(), "I").unwrap();
        let b = StateVector::basis_state(basis, "II").unwrap();
        let rho = DensityOperator::mixture(&[(w, &a), (1.0 - w, &b)]).unwrap();
        prop_assert!(coincidence_probability_mixed(&povm, &rho).unwrap() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Zero expectation under a positive operator forces kernel membership;
    /// quantitatively `||A psi||^2 <= ||A|| <psi|A|psi>`.
    #[test]
    fn vanishing_expectation_implies_kernel(seed in any::<u64>(), dim in 2usize..=8, in_kernel in any::<bool>()) {
        let mut rng = instance_rng(seed);
        let basis = indexed_basis(dim);
        let psi = random::random_state(&mut rng, &basis);
        let a = if in_kernel {
            random::constructed_kernel_effect(&mut rng, &psi, &psi).unwrap()
        } else {
            random::random_effect(&mut rng, dim)
        };
        let norm = a.norm();
        let e = a.operator().quadratic_form(psi.amplitudes()).unwrap().re;
        let k = kernel_member(a.operator(), &psi).unwrap();
        if e <= 1e-12 * norm {
            prop_assert!(k.member, "e={e} residual={}", k.residual);
        }
        prop_assert!(k.residual * k.residual <= norm * e.max(0.0) + 1e-14);
    }

    #[test]
    fn theorem_holds_on_constructed_kernels(seed in any::<u64>(), dim in 2usize..=8) {
        let inst = kernel_instance(seed, dim).unwrap();
        let a = inst.effect.operator();
        let e1 = expectation(&inst.effect, &inst.psi1).unwrap();
        let e2 = expectation(&inst.effect, &inst.psi2).unwrap();
        prop_assert!(e1 <= 1e-14 && e2 <= 1e-14);
        let r = verify_reduction_theorem(a, &inst.psi1, &inst.psi2, 64, seed).unwrap();
        prop_assert!(r.pass);
        prop_assert!(r.max_superposition_expectation <= 1e-10 * inst.effect.norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn robust_bound_on_perturbed_kernels(seed in any::<u64>(), dim in 2usize..=8, i in 0usize..3, j in 0usize..3) {
        let eps = [1e-2, 1e-4, 1e-6];
        let mut rng = instance_rng(seed);
        let (p1, p2) = random::random_orthonormal_pair(&mut rng, &indexed_basis(dim)).unwrap();
        let a = random::perturbed_kernel_effect(&mut rng, &p1, &p2, eps[i], eps[j]).unwrap();
        let scan = superposition_scan(a.operator(), &p1, &p2, 64, seed).unwrap();
        prop_assert!(scan.max_excess <= 1e-10, "excess {}", scan.max_excess);
        prop_assert!(scan.epsilon1 > 0.0 && scan.epsilon2 > 0.0);
    }
}

#[test]
fn robust_bound_is_attained() {
    // the aligned-phase superposition saturates the bound
    let mut rng = instance_rng(5);
    let (p1, p2) = random::random_orthonormal_pair(&mut rng, &indexed_basis(4)).unwrap();
    let a = random::perturbed_kernel_effect(&mut rng, &p1, &p2, 1e-2, 1e-2).unwrap();
    let scan = superposition_scan(a.operator(), &p1, &p2, 20_000, 5).unwrap();
    assert!(scan.max_excess <= 1e-10);
    assert!(
        scan.max_excess > -1e-4,
        "bound should be nearly tight: {}",
        scan.max_excess
    );
}

#[test]
fn sampling_frequencies_converge() {
    let basis = Basis::two_path();
    let povm = build_joint_povm(
        Layout::C,
        &[DetectorSpec::new("I", 0.7, true), DetectorSpec::new("I", 0.4, false)],
        &basis,
    )
    .unwrap();
    let state = StateVector::new(basis, vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
    let n = 100_000u64;
    let reps = 100;
    let mut good = 0;
    for seed in 0..reps {
        let counts = sample_events(&povm, &state, n, seed).unwrap();
        let ok = counts.counts.iter().zip(&counts.probabilities).all(|(&c, &p)| {
            let freq = c as f64 / n as f64;
            (freq - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt()
        });
        good += usize::from(ok);
    }
    assert!(good * 100 >= 99 * reps as usize, "{good}/{reps}");
}
