//! Detectors as complete outcome families, coincidence and anticoincidence
//! analysis, and the superposition verifier.
//!
//! The coincidence effect of two detectors in different arms must vanish on
//! each arm state (a calibrated arrangement never fires both detectors for a
//! quantum confined to one arm). Since a positive operator with
//! `<phi|A|phi> = 0` satisfies `A phi = 0`, such an effect vanishes on every
//! superposition of the arm states, so on the path space it is the zero
//! operator. [`build_joint_povm`] uses that as its construction rule.
//!
//! Detector inefficiency is modelled as independent Bernoulli thinning:
//! a detector of efficiency `eta` registers a quantum that reaches it with
//! probability `eta`. Dark counts are not modelled.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::effect::{expectation, expectation_mixed, require_positive, DensityOperator, Effect};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, Operator, StateVector, C64};
use crate::interferometer::Layout;
use crate::random::random_coefficients;
use crate::rng::{self, COEFFICIENT_STREAM};
use crate::tolerance::{Tolerances, TAU_COMPLETE};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

/// A detector placed on a path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectorSpec {
    pub path: String,
    pub efficiency: f64,
    /// Whether the quantum continues along the path after detection.
    pub transmitting: bool,
}

impl DetectorSpec {
    pub fn new(path: impl Into<String>, efficiency: f64, transmitting: bool) -> Self {
        Self {
            path: path.into(),
            efficiency,
            transmitting,
        }
    }

    /// Unit-efficiency absorbing detector.
    pub fn ideal(path: impl Into<String>) -> Self {
        Self::new(path, 1.0, false)
    }
}

/// Which detectors fired in one trial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointOutcome {
    pub fired: Vec<bool>,
}

impl JointOutcome {
    fn from_mask(mask: usize, detectors: usize) -> Self {
        Self {
            fired: (0..detectors).map(|k| mask >> k & 1 == 1).collect(),
        }
    }

    pub fn fired_count(&self) -> usize {
        self.fired.iter().filter(|&&f| f).count()
    }

    pub fn all_fired(&self) -> bool {
        !self.fired.is_empty() && self.fired.iter().all(|&f| f)
    }

    /// `none`, `D1`, `D2`, `D1&D2`, ...
    pub fn label(&self) -> String {
        let names: Vec<String> = self
            .fired
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(k, _)| format!("D{}", k + 1))
            .collect();
        if names.is_empty() {
            "none".into()
        } else {
            names.join("&")
        }
    }
}

/// A complete family of effects indexed by joint detector outcomes.
///
/// Outcomes are ordered by the bitmask of fired detectors (detector `k` is
/// bit `k`), so for two detectors: none, D1, D2, D1&D2.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePovm {
    basis: Basis,
    layout: Layout,
    detectors: Vec<DetectorSpec>,
    outcomes: Vec<(JointOutcome, Effect)>,
}

const MAX_DETECTORS: usize = 8;

/// Builds the outcome family for `detectors` placed according to `layout`.
///
/// Layouts `a` and `b` take detectors on pairwise disjoint paths (output
/// ports or arms). A single detector `k` fires with effect `eta_k P_k`, and
/// every multi-detector outcome has the zero effect. Layout `c` takes two
/// detectors on the same path `P`, the first transmitting: both fire with
/// `eta1 eta2 P`, first only with `eta1 (1 - eta2) P`, second only with
/// `(1 - eta1) eta2 P`. In every layout "none" is the identity minus the rest.
pub fn build_joint_povm(layout: Layout, detectors: &[DetectorSpec], basis: &Basis) -> Result<OutcomePovm> {
    for d in detectors {
        if !(0.0..=1.0).contains(&d.efficiency) {
            return Err(Error::InvalidParameter(format!(
                "detector efficiency {} outside [0, 1]",
                d.efficiency
            )));
        }
    }
    let projectors = detectors
        .iter()
        .map(|d| basis.region_projector(&d.path))
        .collect::<Result<Vec<_>>>()?;
    let regions = detectors
        .iter()
        .map(|d| basis.region(&d.path))
        .collect::<Result<Vec<_>>>()?;
    let dim = basis.dim();
    let n = detectors.len();

    let mut ops: Vec<Operator> = match layout {
        Layout::A | Layout::B => {
            if !(2..=MAX_DETECTORS).contains(&n) {
                return Err(Error::LayoutMismatch(format!(
                    "layout {layout} needs 2 to {MAX_DETECTORS} detectors, got {n}"
                )));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if regions[i].iter().any(|x| regions[j].contains(x)) {
                        return Err(Error::LayoutMismatch(format!(
                            "layout {layout} needs detectors on distinct paths; D{} and D{} overlap",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
            (0..1usize << n)
                .map(|mask| {
                    if mask.count_ones() == 1 {
                        let k = mask.trailing_zeros() as usize;
                        projectors[k].scale(detectors[k].efficiency)
                    } else {
                        Operator::zeros(dim)
                    }
                })
                .collect()
        }
        Layout::C => {
            if n != 2 {
                return Err(Error::LayoutMismatch(format!("layout c needs 2 detectors, got {n}")));
            }
            if regions[0] != regions[1] {
                return Err(Error::LayoutMismatch(
                    "layout c needs both detectors on the same path".into(),
                ));
            }
            if !detectors[0].transmitting {
                return Err(Error::LayoutMismatch(
                    "layout c needs a transmitting first detector".into(),
                ));
            }
            let (e1, e2) = (detectors[0].efficiency, detectors[1].efficiency);
            let p = &projectors[0];
            alloc::vec![
                Operator::zeros(dim),
                p.scale(e1 * (1.0 - e2)),
                p.scale((1.0 - e1) * e2),
                p.scale(e1 * e2),
            ]
        }
        Layout::Custom => {
            return Err(Error::LayoutMismatch("custom layouts have no detector model".into()));
        }
    };

    let fired_sum = ops
        .iter()
        .skip(1)
        .try_fold(Operator::zeros(dim), |acc, op| acc.add(op))?;
    ops[0] = Operator::identity(dim).sub(&fired_sum)?;

    let outcomes = ops
        .into_iter()
        .enumerate()
        .map(|(mask, op)| Ok((JointOutcome::from_mask(mask, n), Effect::new(op)?)))
        .collect::<Result<Vec<_>>>()?;
    let povm = OutcomePovm {
        basis: basis.clone(),
        layout,
        detectors: detectors.to_vec(),
        outcomes,
    };
    let residual = povm.completeness_residual();
    if residual > TAU_COMPLETE {
        return Err(Error::IncompleteFamily { residual });
    }
    Ok(povm)
}

impl OutcomePovm {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn detectors(&self) -> &[DetectorSpec] {
        &self.detectors
    }

    pub fn outcomes(&self) -> &[(JointOutcome, Effect)] {
        &self.outcomes
    }

    pub fn effect(&self, outcome: &JointOutcome) -> Option<&Effect> {
        self.outcomes.iter().find(|(o, _)| o == outcome).map(|(_, e)| e)
    }

    /// Effect of the event "every detector fired".
    pub fn all_fired_effect(&self) -> Option<&Effect> {
        self.outcomes.iter().find(|(o, _)| o.all_fired()).map(|(_, e)| e)
    }

    /// Effect of the event "exactly one detector fired".
    pub fn exactly_one_effect(&self) -> Result<Effect> {
        let sum = self
            .outcomes
            .iter()
            .filter(|(o, _)| o.fired_count() == 1)
            .try_fold(Operator::zeros(self.dim()), |acc, (_, e)| acc.add(e.operator()))?;
        Effect::new(sum)
    }

    /// `max |sum_k E_k - I|`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self.outcomes.iter().fold(Operator::zeros(self.dim()), |acc, (_, e)| {
            acc.add(e.operator()).expect("same dimension")
        });
        sum.sub(&Operator::identity(self.dim()))
            .expect("same dimension")
            .max_abs_entry()
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.basis() != &self.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    /// Outcome probabilities in outcome order.
    pub fn probabilities(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.check_state(state)?;
        self.outcomes.iter().map(|(_, e)| expectation(e, state)).collect()
    }

    pub fn probabilities_mixed(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        self.outcomes.iter().map(|(_, e)| expectation_mixed(e, rho)).collect()
    }
}

/// Probability that every detector fires.
pub fn coincidence_probability(povm: &OutcomePovm, state: &StateVector) -> Result<f64> {
    povm.check_state(state)?;
    let effect = povm.all_fired_effect().ok_or(Error::MissingOutcome)?;
    expectation(effect, state)
}

/// Coincidence probability for a density operator.
pub fn coincidence_probability_mixed(povm: &OutcomePovm, rho: &DensityOperator) -> Result<f64> {
    let effect = povm.all_fired_effect().ok_or(Error::MissingOutcome)?;
    expectation_mixed(effect, rho)
}

/// Outcome distribution of two serial detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SerialDistribution {
    pub both: f64,
    pub first_only: f64,
    pub second_only: f64,
    pub none: f64,
}

impl SerialDistribution {
    pub fn exactly_one(&self) -> f64 {
        self.first_only + self.second_only
    }

    pub fn total(&self) -> f64 {
        self.both + self.first_only + self.second_only + self.none
    }
}

/// Exact outcome distribution of a layout-c family.
pub fn serial_correlation(povm: &OutcomePovm, state: &StateVector) -> Result<SerialDistribution> {
    if povm.layout != Layout::C {
        return Err(Error::LayoutMismatch(format!(
            "serial correlation needs layout c, got {}",
            povm.layout
        )));
    }
    let p = povm.probabilities(state)?;
    Ok(SerialDistribution {
        none: p[0],
        first_only: p[1],
        second_only: p[2],
        both: p[3],
    })
}

/// Extreme coefficient pairs always included in a superposition scan.
pub fn extreme_coefficients() -> [(C64, C64); 6] {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    [
        (r(1.0), r(0.0)),
        (r(0.0), r(1.0)),
        (r(h), r(h)),
        (r(h), r(-h)),
        (r(h), C64::new(0.0, h)),
        (r(h), C64::new(0.0, -h)),
    ]
}

/// Raw statistics of `<psi|A|psi>` over superpositions `psi = c1 psi1 + c2 psi2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SuperpositionScan {
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub max_expectation: f64,
    pub min_expectation: f64,
    pub argmax: (C64, C64),
    pub argmin: (C64, C64),
    /// Largest `(|c1| sqrt(eps1) + |c2| sqrt(eps2))^2` over the samples.
    pub bound: f64,
    /// Largest per-sample excess of the expectation over its own bound.
    pub max_excess: f64,
    pub samples: usize,
}

/// Evaluates `<psi|A|psi>` for the six extreme coefficient pairs plus
/// `n_samples` pairs drawn uniformly from the unit 3-sphere, without
/// checking positivity of `A`.
///
/// The combination `c1 psi1 + c2 psi2` is not renormalized: `psi1`, `psi2`
/// need not be orthogonal and the Cauchy-Schwarz bound
/// `||A^{1/2} psi|| <= |c1| sqrt(eps1) + |c2| sqrt(eps2)` holds for the raw
/// combination. Evaluation goes through the 2x2 matrix `<psi_i|A|psi_j>`.
pub fn superposition_scan(
    op: &Operator,
    psi1: &StateVector,
    psi2: &StateVector,
    n_samples: usize,
    seed: u64,
) -> Result<SuperpositionScan> {
    if psi1.basis() != psi2.basis() {
        return Err(Error::BasisMismatch);
    }
    if op.dim() != psi1.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: psi1.dim(),
        });
    }
    let g = op.compress(&[psi1.amplitudes(), psi2.amplitudes()])?;
    let epsilon1 = g[(0, 0)].re;
    let epsilon2 = g[(1, 1)].re;
    let (s1, s2) = (epsilon1.max(0.0).sqrt(), epsilon2.max(0.0).sqrt());
    let value = |c1: C64, c2: C64| {
        (c1.conj() * c1 * g[(0, 0)]
            + c1.conj() * c2 * g[(0, 1)]
            + c2.conj() * c1 * g[(1, 0)]
            + c2.conj() * c2 * g[(1, 1)])
            .re
    };

    let first = extreme_coefficients()[0];
    let mut scan = SuperpositionScan {
        epsilon1,
        epsilon2,
        max_expectation: f64::NEG_INFINITY,
        min_expectation: f64::INFINITY,
        argmax: first,
        argmin: first,
        bound: 0.0,
        max_excess: f64::NEG_INFINITY,
        samples: 0,
    };
    let mut visit = |c1: C64, c2: C64| {
        let v = value(c1, c2);
        let b = (c1.norm() * s1 + c2.norm() * s2).powi(2);
        if v > scan.max_expectation {
            scan.max_expectation = v;
            scan.argmax = (c1, c2);
        }
        if v < scan.min_expectation {
            scan.min_expectation = v;
            scan.argmin = (c1, c2);
        }
        scan.bound = scan.bound.max(b);
        scan.max_excess = scan.max_excess.max(v - b);
        scan.samples += 1;
    };
    for (c1, c2) in extreme_coefficients() {
        visit(c1, c2);
    }
    let mut rng = rng::substream(seed, COEFFICIENT_STREAM);
    for _ in 0..n_samples {
        let (c1, c2) = random_coefficients(&mut rng);
        visit(c1, c2);
    }
    Ok(scan)
}

/// Result of checking the superposition theorem on one instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TheoremReport {
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub max_superposition_expectation: f64,
    pub bound: f64,
    pub max_excess: f64,
    pub operator_norm: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Checks that a positive operator's expectation on superpositions of
/// `psi1`, `psi2` stays below `(|c1| sqrt(eps1) + |c2| sqrt(eps2))^2`, which
/// is zero when both `eps` vanish.
///
/// Fails with `NotPositive` (or `NotHermitian`) when `op` violates the
/// hypothesis; the scan is meaningless then.
pub fn verify_reduction_theorem(
    op: &Operator,
    psi1: &StateVector,
    psi2: &StateVector,
    n_samples: usize,
    seed: u64,
) -> Result<TheoremReport> {
    verify_reduction_theorem_with(op, psi1, psi2, n_samples, seed, &Tolerances::default())
}

pub fn verify_reduction_theorem_with(
    op: &Operator,
    psi1: &StateVector,
    psi2: &StateVector,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    if op.dim() != psi1.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: psi1.dim(),
        });
    }
    let diag = require_positive(op, tol)?;
    let scan = superposition_scan(op, psi1, psi2, n_samples, seed)?;
    Ok(TheoremReport {
        epsilon1: scan.epsilon1,
        epsilon2: scan.epsilon2,
        max_superposition_expectation: scan.max_expectation,
        bound: scan.bound,
        max_excess: scan.max_excess,
        operator_norm: diag.max_eigenvalue.max(0.0),
        samples: scan.samples,
        pass: scan.max_expectation <= scan.bound + tol.theorem,
    })
}
