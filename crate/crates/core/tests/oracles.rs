//! Operation examples checked against independent oracles: naive loops,
//! hand-written matrices and nalgebra's hermitian eigensolver.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;
use qinterf_core::detection::superposition_scan;
use qinterf_core::effect::validate_effect;
use qinterf_core::interferometer::phase_grid;
use qinterf_core::random::{self, indexed_basis};
use qinterf_core::rng::{substream, GENERATOR_STREAM};
use qinterf_core::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// sum_i sum_j conj(v_i) A_ij v_j
fn naive_expectation(a: &Operator, v: &[C64]) -> C64 {
    let n = v.len();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += v[i].conj() * a[(i, j)] * v[j];
        }
    }
    acc
}

fn naive_matmul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn nalgebra_eigenvalues(a: &Operator) -> Vec<f64> {
    let n = a.dim();
    let m = DMatrix::from_fn(n, n, |i, j| a[(i, j)]);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn expectation_matches_triple_loop() {
    let mut rng = substream(2024, GENERATOR_STREAM);
    let basis = indexed_basis(4);
    for _ in 0..50 {
        let a = random::random_effect(&mut rng, 4);
        let phi = random::random_state(&mut rng, &basis);
        let got = expectation(&a, &phi).unwrap();
        let want = naive_expectation(a.operator(), phi.amplitudes());
        assert!(want.im.abs() < 1e-14);
        assert!((got - want.re).abs() <= 1e-12, "{got} vs {}", want.re);
    }
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut rng = substream(7, GENERATOR_STREAM);
    for dim in 1..=12 {
        let b = random::ginibre(&mut rng, dim);
        let h = b.add(&b.adjoint()).unwrap();
        let ours = h.hermitian_eigenvalues();
        let theirs = nalgebra_eigenvalues(&h);
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() <= 1e-11 * (1.0 + y.abs()), "dim {dim}: {x} vs {y}");
        }
    }
}

#[test]
fn scaled_gram_matrix_is_an_effect() {
    let mut rng = substream(8, GENERATOR_STREAM);
    for dim in 2..=8 {
        let b = random::ginibre(&mut rng, dim);
        let g = b.adjoint().matmul(&b).unwrap();
        let oracle = nalgebra_eigenvalues(&g);
        let a = g.scale(1.0 / oracle[dim - 1]);
        let d = validate_effect(&a);
        assert!(d.passed());
        let oracle_scaled: Vec<f64> = nalgebra_eigenvalues(&a);
        assert!(oracle_scaled[0] >= -1e-12 && oracle_scaled[dim - 1] <= 1.0 + 1e-12);
        assert!((d.max_eigenvalue - oracle_scaled[dim - 1]).abs() < 1e-12);
    }
}

#[test]
fn pure_density_matches_vector_form() {
    let mut rng = substream(9, GENERATOR_STREAM);
    for dim in 2..=6 {
        let basis = indexed_basis(dim);
        let a = random::random_effect(&mut rng, dim);
        let phi = random::random_state(&mut rng, &basis);
        let rho = DensityOperator::pure(&phi);
        let p = expectation(&a, &phi).unwrap();
        let q = expectation_mixed(&a, &rho).unwrap();
        assert!((p - q).abs() <= 1e-12);
    }
}

#[test]
fn kernel_member_on_projected_psd() {
    let mut rng = substream(10, GENERATOR_STREAM);
    let basis = indexed_basis(6);
    for _ in 0..20 {
        let psi = random::random_state(&mut rng, &basis);
        // P = I - |psi><psi| annihilates psi
        let p = Operator::identity(6)
            .sub(&Operator::projector(psi.amplitudes()))
            .unwrap();
        let b = random::ginibre(&mut rng, 6);
        let a = p.matmul(&b.adjoint().matmul(&b).unwrap()).unwrap().matmul(&p).unwrap();
        let k = kernel_member(&a, &psi).unwrap();
        // dense multiply oracle
        let n = 6;
        let mut residual = 0.0;
        for i in 0..n {
            let mut row = c(0.0, 0.0);
            for j in 0..n {
                row += a[(i, j)] * psi.amplitudes()[j];
            }
            residual += row.norm_sqr();
        }
        assert!(k.member, "{k:?}");
        assert!((k.residual - residual.sqrt()).abs() < 1e-15);
    }
}

fn bs(theta: f64) -> [[C64; 2]; 2] {
    [
        [c(theta.cos(), 0.0), c(0.0, theta.sin())],
        [c(0.0, theta.sin()), c(theta.cos(), 0.0)],
    ]
}

fn phase_on_first(phi: f64) -> [[C64; 2]; 2] {
    [[C64::from_polar(1.0, phi), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

#[test]
fn splitter_unitarity_by_multiplication() {
    let u = bs(0.37);
    let mut udag = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            udag[i][j] = u[j][i].conj();
        }
    }
    let g = naive_matmul(&udag, &u);
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g[i][j] - want).norm() <= 1e-12);
        }
    }
    let ours = beam_splitter_unitary(0.37, &Basis::two_path(), "I", "II").unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((ours[(i, j)] - u[i][j]).norm() < 1e-16);
        }
    }
}

#[test]
fn mach_zehnder_matches_matrix_product() {
    let basis = Basis::two_path();
    let input = StateVector::basis_state(basis.clone(), "I").unwrap();
    let arr = Arrangement::mach_zehnder(None).unwrap();
    for phi in phase_grid(64) {
        let m = naive_matmul(&bs(FRAC_PI_4), &naive_matmul(&phase_on_first(phi), &bs(FRAC_PI_4)));
        let out = run_arrangement(&arr.with_swept_phase(phi), &input).unwrap();
        for i in 0..2 {
            assert!((out.conditional_state.amplitudes()[i] - m[i][0]).norm() <= 1e-12);
        }
        // closed form of the bright port
        let bright = out.conditional_state.amplitudes()[1].norm_sqr();
        assert!((bright - 0.5 * (1.0 + phi.cos())).abs() <= 1e-12);
    }
    let out = run_arrangement(&arr.with_swept_phase(0.0), &input).unwrap();
    assert!(out.conditional_state.amplitudes()[0].norm() < 1e-15);
}

#[test]
fn blocked_mach_zehnder_matches_matrix_product() {
    let basis = Basis::two_path();
    let input = StateVector::basis_state(basis, "I").unwrap();
    let arr = Arrangement::mach_zehnder(Some(("II", 0.0))).unwrap();
    let block = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
    for phi in [0.0, 1.0, PI, 4.0] {
        let m = naive_matmul(
            &bs(FRAC_PI_4),
            &naive_matmul(&block, &naive_matmul(&phase_on_first(phi), &bs(FRAC_PI_4))),
        );
        let unnormalized = [m[0][0], m[1][0]];
        let survival: f64 = unnormalized.iter().map(|z| z.norm_sqr()).sum();
        let out = run_arrangement(&arr.with_swept_phase(phi), &input).unwrap();
        assert!((out.survival_probability - survival).abs() <= 1e-12);
        assert!((survival - 0.5).abs() <= 1e-12);
        for (i, z) in unnormalized.iter().enumerate() {
            let want = z.norm_sqr() / survival;
            assert!((out.conditional_state.amplitudes()[i].norm_sqr() - want).abs() <= 1e-12);
            assert!((want - 0.5).abs() <= 1e-12);
        }
    }
}

#[test]
fn fringe_scan_values() {
    let basis = Basis::two_path();
    let input = StateVector::basis_state(basis, "I").unwrap();
    let bright = Effect::new(Operator::from_diagonal(&[0.0, 1.0])).unwrap();
    let open = fringe_scan(&Arrangement::mach_zehnder(None).unwrap(), &input, &[0.0, PI], &bright).unwrap();
    assert!((open[0].probability - 1.0).abs() <= 1e-12);
    assert!(open[1].probability.abs() <= 1e-12);
    let blocked = Arrangement::mach_zehnder(Some(("II", 0.0))).unwrap();
    for p in fringe_scan(&blocked, &input, &phase_grid(64), &bright).unwrap() {
        assert!((p.probability - 0.25).abs() <= 1e-12);
    }
}

/// Enumerates the detection tree of two serial detectors for a quantum that
/// is in arm I with probability `w`.
fn serial_tree(w: f64, e1: f64, e2: f64) -> [f64; 4] {
    // [none, first_only, second_only, both]
    let mut out = [1.0 - w, 0.0, 0.0, 0.0];
    for (f1, p1) in [(true, e1), (false, 1.0 - e1)] {
        for (f2, p2) in [(true, e2), (false, 1.0 - e2)] {
            let idx = usize::from(f1) + 2 * usize::from(f2);
            out[idx] += w * p1 * p2;
        }
    }
    out
}

#[test]
fn serial_detectors_match_outcome_tree() {
    let basis = Basis::two_path();
    let h = c(FRAC_1_SQRT_2, 0.0);
    let half = StateVector::new(basis.clone(), vec![h, h]).unwrap();
    let povm = build_joint_povm(
        Layout::C,
        &[DetectorSpec::new("I", 0.5, true), DetectorSpec::new("I", 0.5, false)],
        &basis,
    )
    .unwrap();
    let d = serial_correlation(&povm, &half).unwrap();
    let tree = serial_tree(0.5, 0.5, 0.5);
    assert_eq!(tree, [5.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0]);
    assert!((d.both - 1.0 / 8.0).abs() <= 1e-12);
    assert!((d.exactly_one() - 0.25).abs() <= 1e-12);
    assert!((d.none - 5.0 / 8.0).abs() <= 1e-12);

    let povm = build_joint_povm(
        Layout::C,
        &[DetectorSpec::new("I", 1.0, true), DetectorSpec::new("I", 0.5, false)],
        &basis,
    )
    .unwrap();
    let arm = StateVector::basis_state(basis, "I").unwrap();
    let d = serial_correlation(&povm, &arm).unwrap();
    let tree = serial_tree(1.0, 1.0, 0.5);
    for (got, want) in [d.none, d.first_only, d.second_only, d.both].iter().zip(tree) {
        assert!((got - want).abs() <= 1e-12);
    }
}

#[test]
fn negative_control_by_direct_evaluation() {
    let a = Operator::from_diagonal(&[1.0, -1.0]);
    let basis = Basis::two_path();
    let h = c(FRAC_1_SQRT_2, 0.0);
    let p1 = StateVector::new(basis.clone(), vec![h, h]).unwrap();
    let p2 = StateVector::new(basis, vec![h, -h]).unwrap();
    assert!(naive_expectation(&a, p1.amplitudes()).norm() < 1e-15);
    assert!(naive_expectation(&a, p2.amplitudes()).norm() < 1e-15);
    // (p1 + p2)/sqrt 2 = e1 and (p1 - p2)/sqrt 2 = e2
    let plus: Vec<C64> = p1
        .amplitudes()
        .iter()
        .zip(p2.amplitudes())
        .map(|(x, y)| (x + y) * h)
        .collect();
    let minus: Vec<C64> = p1
        .amplitudes()
        .iter()
        .zip(p2.amplitudes())
        .map(|(x, y)| (x - y) * h)
        .collect();
    assert!((naive_expectation(&a, &plus).re - 1.0).abs() < 1e-15);
    assert!((naive_expectation(&a, &minus).re + 1.0).abs() < 1e-15);

    let scan = superposition_scan(&a, &p1, &p2, 100, 3).unwrap();
    assert!(scan.max_expectation >= 0.5);
    assert!(!validate_effect(&a).passed());
    assert!(matches!(
        verify_reduction_theorem(&a, &p1, &p2, 100, 3),
        Err(Error::NotPositive { .. })
    ));
}

#[test]
fn scan_agrees_with_direct_superposition() {
    let mut rng = substream(33, GENERATOR_STREAM);
    let basis = indexed_basis(5);
    let a = random::random_effect(&mut rng, 5);
    let p1 = random::random_state(&mut rng, &basis);
    let p2 = random::random_state(&mut rng, &basis);
    let scan = superposition_scan(a.operator(), &p1, &p2, 0, 0).unwrap();
    let (c1, c2) = scan.argmax;
    let v: Vec<C64> = p1
        .amplitudes()
        .iter()
        .zip(p2.amplitudes())
        .map(|(x, y)| c1 * x + c2 * y)
        .collect();
    assert!((naive_expectation(a.operator(), &v).re - scan.max_expectation).abs() <= 1e-12);
}
