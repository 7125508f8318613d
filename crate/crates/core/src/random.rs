//! Random states and operators for property checks and fuzzing.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::effect::Effect;
use crate::error::{Error, Result};
use crate::hilbert::{inner, vector_norm, Basis, Operator, StateVector, C64};
use crate::rng::{self, GENERATOR_STREAM};
use crate::tolerance::TAU_SUPERPOSE;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

/// Basis `[e1, ..., ed]`.
pub fn indexed_basis(dim: usize) -> Basis {
    Basis::new((1..=dim).map(|i| format!("e{i}"))).expect("distinct labels")
}

/// Standard complex normal sample, `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, basis: &Basis) -> StateVector {
    loop {
        let v: Vec<C64> = (0..basis.dim()).map(|_| complex_gaussian(rng)).collect();
        if let Ok(s) = StateVector::normalized(basis.clone(), v) {
            return s;
        }
    }
}

/// Coefficients `(c1, c2)` uniform on the unit 3-sphere of
/// `(Re c1, Im c1, Re c2, Im c2)`.
pub fn random_coefficients<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    loop {
        let x: [f64; 4] = core::array::from_fn(|_| rng.sample(StandardNormal));
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 1e-12 {
            return (C64::new(x[0] / r, x[1] / r), C64::new(x[2] / r, x[3] / r));
        }
    }
}

/// Complex Ginibre matrix (i.i.d. standard complex normal entries).
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let rows = (0..dim)
        .map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect())
        .collect();
    Operator::from_rows(rows).expect("finite square matrix")
}

fn gram(b: &Operator) -> Operator {
    b.adjoint().matmul(b).expect("same dimension")
}

/// `B^dagger B / ||B^dagger B||` for Ginibre `B`: a positive effect of norm one.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Effect {
    let m = gram(&ginibre(rng, dim));
    let s = m.hermitian_norm();
    Effect::new(m.scale(1.0 / s)).expect("scaled Gram matrix is an effect")
}

fn orthonormalize(frame: &mut Vec<Vec<C64>>, mut v: Vec<C64>) -> bool {
    let original = vector_norm(&v);
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in frame.iter() {
            let overlap = inner(q, &v);
            v.iter_mut().zip(q).for_each(|(x, qi)| *x -= overlap * qi);
        }
    }
    let n = vector_norm(&v);
    if n <= 1e-8 * original.max(1.0) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    frame.push(v);
    true
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)`.
pub fn orthogonal_complement(vectors: &[&[C64]], dim: usize) -> Vec<Vec<C64>> {
    let mut frame = Vec::new();
    for v in vectors {
        orthonormalize(&mut frame, v.to_vec());
    }
    let spanned = frame.len();
    for i in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[i] = C64::new(1.0, 0.0);
        orthonormalize(&mut frame, e);
        if frame.len() == dim {
            break;
        }
    }
    frame.split_off(spanned)
}

/// Projector onto the orthogonal complement of `span{psi1, psi2}`.
pub fn complement_projector(psi1: &StateVector, psi2: &StateVector) -> Operator {
    let dim = psi1.dim();
    orthogonal_complement(&[psi1.amplitudes(), psi2.amplitudes()], dim)
        .iter()
        .fold(Operator::zeros(dim), |acc, w| {
            acc.add(&Operator::projector(w)).expect("same dimension")
        })
}

/// `P (B^dagger B) P / s` with `P` projecting out `span{psi1, psi2}`, `B`
/// Ginibre and `s` the largest eigenvalue, so that the effect annihilates
/// both states. When the two states span the whole space the only such
/// effect is zero.
pub fn constructed_kernel_effect<R: Rng + ?Sized>(
    rng: &mut R,
    psi1: &StateVector,
    psi2: &StateVector,
) -> Result<Effect> {
    if psi1.basis() != psi2.basis() {
        return Err(Error::BasisMismatch);
    }
    let dim = psi1.dim();
    let p = complement_projector(psi1, psi2);
    let m = p.matmul(&gram(&ginibre(rng, dim)))?.matmul(&p)?;
    let s = m.hermitian_norm();
    if s == 0.0 || p.max_abs_entry() == 0.0 {
        return Ok(Effect::zero(dim));
    }
    Effect::new(m.scale(1.0 / s))
}

/// `A0/2 + |v><v|` where `A0` is a constructed-kernel effect and
/// `v = sqrt(eps1) psi1 + e^{i alpha} sqrt(eps2) psi2` with random `alpha`, so
/// that `<psi_k|A|psi_k> = eps_k` exactly and the superposition bound
/// `(|c1| sqrt(eps1) + |c2| sqrt(eps2))^2` is attained for aligned phases.
/// `psi1` and `psi2` must be orthogonal and `eps1 + eps2 <= 1/2`.
pub fn perturbed_kernel_effect<R: Rng + ?Sized>(
    rng: &mut R,
    psi1: &StateVector,
    psi2: &StateVector,
    eps1: f64,
    eps2: f64,
) -> Result<Effect> {
    let overlap = psi1.inner(psi2)?.norm();
    if overlap > TAU_SUPERPOSE {
        return Err(Error::NotOrthogonal { overlap });
    }
    if !(eps1 >= 0.0 && eps2 >= 0.0 && eps1 + eps2 <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "perturbation sizes {eps1}, {eps2} must be non-negative with sum <= 1/2"
        )));
    }
    let base = constructed_kernel_effect(rng, psi1, psi2)?;
    let alpha = rng.random::<f64>() * 2.0 * core::f64::consts::PI;
    let phase = C64::from_polar(eps2.sqrt(), alpha);
    let v: Vec<C64> = psi1
        .amplitudes()
        .iter()
        .zip(psi2.amplitudes())
        .map(|(a, b)| a * eps1.sqrt() + b * phase)
        .collect();
    let op = base.operator().scale(0.5).add(&Operator::projector(&v))?;
    Effect::new(op)
}

/// Two orthonormal Haar-random states.
pub fn random_orthonormal_pair<R: Rng + ?Sized>(rng: &mut R, basis: &Basis) -> Result<(StateVector, StateVector)> {
    if basis.dim() < 2 {
        return Err(Error::InvalidParameter("need dimension >= 2".into()));
    }
    loop {
        let mut frame = Vec::new();
        let a = random_state(rng, basis).amplitudes().to_vec();
        let b = random_state(rng, basis).amplitudes().to_vec();
        if orthonormalize(&mut frame, a) && orthonormalize(&mut frame, b) {
            let b = frame.pop().expect("two vectors");
            let a = frame.pop().expect("two vectors");
            return Ok((
                StateVector::normalized(basis.clone(), a)?,
                StateVector::normalized(basis.clone(), b)?,
            ));
        }
    }
}

/// One randomized instance of the coincidence theorem: two random states
/// and a positive effect vanishing on both.
#[derive(Debug, Clone)]
pub struct KernelInstance {
    pub seed: u64,
    pub psi1: StateVector,
    pub psi2: StateVector,
    pub effect: Effect,
}

/// Deterministic instance for `(seed, dim)`.
pub fn kernel_instance(seed: u64, dim: usize) -> Result<KernelInstance> {
    let mut rng = rng::substream(seed, GENERATOR_STREAM);
    let basis = indexed_basis(dim);
    let psi1 = random_state(&mut rng, &basis);
    let psi2 = random_state(&mut rng, &basis);
    let effect = constructed_kernel_effect(&mut rng, &psi1, &psi2)?;
    Ok(KernelInstance {
        seed,
        psi1,
        psi2,
        effect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effect::validate_effect;

    #[test]
    fn random_effect_is_valid() {
        let mut rng = rng::substream(11, GENERATOR_STREAM);
        for dim in 1..8 {
            let e = random_effect(&mut rng, dim);
            let d = validate_effect(e.operator());
            assert!(d.passed());
            assert!((d.max_eigenvalue - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let mut rng = rng::substream(12, GENERATOR_STREAM);
        for dim in 2..9 {
            let basis = indexed_basis(dim);
            let a = random_state(&mut rng, &basis);
            let b = random_state(&mut rng, &basis);
            let w = orthogonal_complement(&[a.amplitudes(), b.amplitudes()], dim);
            assert_eq!(w.len(), dim - 2);
            for (i, wi) in w.iter().enumerate() {
                assert!(inner(wi, a.amplitudes()).norm() < 1e-13);
                assert!(inner(wi, b.amplitudes()).norm() < 1e-13);
                for (j, wj) in w.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((inner(wi, wj) - expect).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn complement_of_parallel_states() {
        let basis = indexed_basis(3);
        let a = StateVector::basis_state(basis.clone(), "e1").unwrap();
        let b = StateVector::new(basis, vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        assert_eq!(orthogonal_complement(&[a.amplitudes(), a.amplitudes()], 3).len(), 2);
        assert_eq!(orthogonal_complement(&[a.amplitudes(), b.amplitudes()], 3).len(), 1);
    }

    #[test]
    fn two_dim_kernel_effect_is_zero() {
        let inst = kernel_instance(4, 2).unwrap();
        assert_eq!(inst.effect, Effect::zero(2));
    }

    #[test]
    fn perturbed_effect_hits_requested_epsilons() {
        let mut rng = rng::substream(13, GENERATOR_STREAM);
        for dim in 2..7 {
            let (a, b) = random_orthonormal_pair(&mut rng, &indexed_basis(dim)).unwrap();
            let e = perturbed_kernel_effect(&mut rng, &a, &b, 1e-2, 1e-4).unwrap();
            let e1 = e.operator().quadratic_form(a.amplitudes()).unwrap().re;
            let e2 = e.operator().quadratic_form(b.amplitudes()).unwrap().re;
            assert!((e1 - 1e-2).abs() < 1e-14, "{e1}");
            assert!((e2 - 1e-4).abs() < 1e-14, "{e2}");
        }
    }

    #[test]
    fn kernel_instance_is_deterministic() {
        let a = kernel_instance(77, 5).unwrap();
        let b = kernel_instance(77, 5).unwrap();
        assert_eq!(a.effect, b.effect);
        assert_eq!(a.psi1, b.psi1);
    }
}
