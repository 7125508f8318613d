//! Optical elements, arrangements and propagation of single-quantum states.
//!
//! Beam splitters use the symmetric convention
//! `[[cos t, i sin t], [i sin t, cos t]]`, so `t = pi/4` is a 50:50 splitter
//! and reflection picks up a factor `i`. Mirrors are phase-free label swaps;
//! path-length differences are expressed with phase shifters. A blocker with
//! transmission `eta` scales the amplitude on its path by `sqrt(eta)` and the
//! state is then conditioned on survival.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::effect::{expectation, Effect};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, Operator, StateVector, C64};
use crate::tolerance::TAU_NORM;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

/// Detector placement variant of an arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Layout {
    /// Arms recombined, one detector per output port.
    A,
    /// One detector inside each arm, no recombination.
    B,
    /// Two detectors in series on one arm, the first transmitting.
    C,
    Custom,
}

impl Layout {
    pub fn as_str(self) -> &'static str {
        match self {
            Layout::A => "a",
            Layout::B => "b",
            Layout::C => "c",
            Layout::Custom => "custom",
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Layout::A),
            "b" | "B" => Ok(Layout::B),
            "c" | "C" => Ok(Layout::C),
            "custom" => Ok(Layout::Custom),
            other => Err(Error::InvalidParameter(alloc::format!("unknown layout `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "element", rename_all = "snake_case"))]
pub enum OpticalElement {
    BeamSplitter {
        theta: f64,
        ports: [String; 2],
    },
    PhaseShifter {
        path: String,
        phase: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        swept: bool,
    },
    Mirror {
        paths: [String; 2],
    },
    Blocker {
        path: String,
        transmission: f64,
    },
}

impl OpticalElement {
    /// Beam splitter with mixing angle `theta` on ports `I` and `II`.
    pub fn beam_splitter(theta: f64) -> Self {
        Self::BeamSplitter {
            theta,
            ports: ["I".into(), "II".into()],
        }
    }

    /// 50:50 beam splitter on ports `I` and `II`.
    pub fn balanced_beam_splitter() -> Self {
        Self::beam_splitter(core::f64::consts::FRAC_PI_4)
    }

    pub fn phase_shifter(path: impl Into<String>, phase: f64) -> Self {
        Self::PhaseShifter {
            path: path.into(),
            phase,
            swept: false,
        }
    }

    /// Phase shifter whose phase is replaced during a fringe scan.
    pub fn swept_phase(path: impl Into<String>) -> Self {
        Self::PhaseShifter {
            path: path.into(),
            phase: 0.0,
            swept: true,
        }
    }

    pub fn mirror(a: impl Into<String>, b: impl Into<String>) -> Self {
        Self::Mirror {
            paths: [a.into(), b.into()],
        }
    }

    pub fn blocker(path: impl Into<String>, transmission: f64) -> Self {
        Self::Blocker {
            path: path.into(),
            transmission,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Self::Blocker { .. })
    }

    fn check_parameters(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.into()));
        match self {
            Self::BeamSplitter { theta, .. } if !theta.is_finite() => bad("beam splitter angle must be finite"),
            Self::PhaseShifter { phase, .. } if !phase.is_finite() => bad("phase must be finite"),
            Self::Blocker { transmission, .. } if !(0.0..=1.0).contains(transmission) => {
                bad("blocker transmission must lie in [0, 1]")
            }
            _ => Ok(()),
        }
    }

    /// Checks parameters and that every referenced path exists in `basis`.
    pub fn validate(&self, basis: &Basis) -> Result<()> {
        self.check_parameters()?;
        match self {
            Self::BeamSplitter { ports: [a, b], .. } | Self::Mirror { paths: [a, b] } => {
                basis.region_pairs(a, b).map(drop)
            }
            Self::PhaseShifter { path, .. } | Self::Blocker { path, .. } => basis.region(path).map(drop),
        }
    }

    /// The element's matrix on `basis`; for a blocker, the (non-unitary)
    /// amplitude-damping matrix.
    pub fn matrix(&self, basis: &Basis) -> Result<Operator> {
        self.check_parameters()?;
        match self {
            Self::BeamSplitter { theta, ports: [a, b] } => beam_splitter_unitary(*theta, basis, a, b),
            Self::Mirror { paths: [a, b] } => {
                let mut u = Operator::identity(basis.dim());
                for (i, j) in basis.region_pairs(a, b)? {
                    u[(i, i)] = C64::new(0.0, 0.0);
                    u[(j, j)] = C64::new(0.0, 0.0);
                    u[(i, j)] = C64::new(1.0, 0.0);
                    u[(j, i)] = C64::new(1.0, 0.0);
                }
                Ok(u)
            }
            Self::PhaseShifter { path, phase, .. } => {
                let mut u = Operator::identity(basis.dim());
                for i in basis.region(path)? {
                    u[(i, i)] = C64::from_polar(1.0, *phase);
                }
                Ok(u)
            }
            Self::Blocker { path, transmission } => {
                let mut m = Operator::identity(basis.dim());
                for i in basis.region(path)? {
                    m[(i, i)] = C64::new(transmission.sqrt(), 0.0);
                }
                Ok(m)
            }
        }
    }
}

/// Beam splitter with mixing angle `theta` acting on the path pair `(a, b)`
/// and as identity elsewhere.
pub fn beam_splitter_unitary(theta: f64, basis: &Basis, a: &str, b: &str) -> Result<Operator> {
    if !theta.is_finite() {
        return Err(Error::InvalidParameter("beam splitter angle must be finite".into()));
    }
    let (c, s) = (theta.cos(), theta.sin());
    let mut u = Operator::identity(basis.dim());
    for (i, j) in basis.region_pairs(a, b)? {
        u[(i, i)] = C64::new(c, 0.0);
        u[(j, j)] = C64::new(c, 0.0);
        u[(i, j)] = C64::new(0.0, s);
        u[(j, i)] = C64::new(0.0, s);
    }
    Ok(u)
}

/// A sequence of optical elements over a path basis, tagged with its
/// detector layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    basis: Basis,
    elements: Vec<OpticalElement>,
    layout: Layout,
}

impl Arrangement {
    pub fn new(basis: Basis, elements: Vec<OpticalElement>, layout: Layout) -> Result<Self> {
        for e in &elements {
            e.validate(&basis)?;
        }
        Ok(Self {
            basis,
            elements,
            layout,
        })
    }

    /// Balanced Mach-Zehnder on `[I, II]`: splitter, swept phase on arm I,
    /// optional blocker, recombining splitter.
    pub fn mach_zehnder(blocker: Option<(&str, f64)>) -> Result<Self> {
        let mut elements = alloc::vec![
            OpticalElement::balanced_beam_splitter(),
            OpticalElement::swept_phase("I"),
        ];
        if let Some((path, eta)) = blocker {
            elements.push(OpticalElement::blocker(path, eta));
        }
        elements.push(OpticalElement::balanced_beam_splitter());
        Self::new(Basis::two_path(), elements, Layout::A)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Copy with every swept phase shifter set to `phase`.
    pub fn with_swept_phase(&self, phase: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.elements {
            if let OpticalElement::PhaseShifter {
                phase: p, swept: true, ..
            } = e
            {
                *p = phase;
            }
        }
        out
    }

    fn swept_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, OpticalElement::PhaseShifter { swept: true, .. }))
            .count()
    }
}

/// State after propagation, conditioned on the quantum not being absorbed.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub conditional_state: StateVector,
    pub survival_probability: f64,
}

/// Applies one element. Unitary elements keep survival at one; a blocker
/// reports the surviving weight and renormalizes.
pub fn propagate(state: &StateVector, element: &OpticalElement) -> Result<PropagationResult> {
    let m = element.matrix(state.basis())?;
    let out = m.apply(state.amplitudes())?;
    if element.is_unitary() {
        return Ok(PropagationResult {
            conditional_state: StateVector::normalized(state.basis().clone(), out)?,
            survival_probability: 1.0,
        });
    }
    let survival: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    // amplitudes below the norm tolerance are rounding noise
    if survival <= TAU_NORM * TAU_NORM {
        return Err(Error::ZeroSurvival);
    }
    Ok(PropagationResult {
        conditional_state: StateVector::normalized(state.basis().clone(), out)?,
        survival_probability: survival.min(1.0),
    })
}

/// Propagates through every element in order; survival probabilities multiply.
pub fn run_arrangement(arrangement: &Arrangement, input: &StateVector) -> Result<PropagationResult> {
    if input.basis() != arrangement.basis() {
        return Err(Error::BasisMismatch);
    }
    arrangement.elements.iter().try_fold(
        PropagationResult {
            conditional_state: input.clone(),
            survival_probability: 1.0,
        },
        |acc, element| {
            let step = propagate(&acc.conditional_state, element)?;
            Ok(PropagationResult {
                conditional_state: step.conditional_state,
                survival_probability: acc.survival_probability * step.survival_probability,
            })
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FringePoint {
    pub phase: f64,
    pub probability: f64,
}

/// Unconditional detection probability `survival * <out|E|out>` as the
/// single swept phase shifter runs over `phases`. A fully absorbed quantum
/// contributes probability zero.
pub fn fringe_scan(
    arrangement: &Arrangement,
    input: &StateVector,
    phases: &[f64],
    output_effect: &Effect,
) -> Result<Vec<FringePoint>> {
    match arrangement.swept_count() {
        0 => return Err(Error::NoSweptPhase),
        1 => {}
        _ => return Err(Error::AmbiguousSweptPhase),
    }
    phases
        .iter()
        .map(|&phase| {
            let probability = match run_arrangement(&arrangement.with_swept_phase(phase), input) {
                Ok(r) => r.survival_probability * expectation(output_effect, &r.conditional_state)?,
                Err(Error::ZeroSurvival) => 0.0,
                Err(e) => return Err(e),
            };
            Ok(FringePoint { phase, probability })
        })
        .collect()
}

/// `n` uniform phases over `[0, 2 pi)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 2.0 * core::f64::consts::PI * k as f64 / n as f64)
        .collect()
}

/// `(max - min) / (max + min)`; zero for an all-zero scan.
pub fn visibility(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = probabilities
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if (hi + lo).is_nan() || hi + lo <= 0.0 {
        0.0
    } else {
        (hi - lo) / (hi + lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn e(label: &str) -> StateVector {
        StateVector::basis_state(Basis::two_path(), label).unwrap()
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn balanced_splitter_entries() {
        let u = beam_splitter_unitary(FRAC_PI_4, &Basis::two_path(), "I", "II").unwrap();
        for z in u.entries() {
            assert!((z.norm_sqr() - 0.5).abs() < 1e-15);
        }
        let id = beam_splitter_unitary(0.0, &Basis::two_path(), "I", "II").unwrap();
        assert_eq!(id, Operator::identity(2));
    }

    #[test]
    fn splitter_is_unitary() {
        let u = beam_splitter_unitary(0.37, &Basis::two_path(), "I", "II").unwrap();
        assert!(u.unitarity_residual() <= 1e-12);
    }

    #[test]
    fn splitter_errors() {
        let b = Basis::two_path();
        assert!(matches!(
            beam_splitter_unitary(0.1, &b, "I", "I"),
            Err(Error::InvalidPathPair(..))
        ));
        assert!(matches!(
            beam_splitter_unitary(0.1, &b, "I", "III"),
            Err(Error::UnknownLabel(_))
        ));
        assert!(beam_splitter_unitary(f64::NAN, &b, "I", "II").is_err());
    }

    #[test]
    fn zero_phase_is_identity() {
        let psi = StateVector::new(Basis::two_path(), vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let r = propagate(&psi, &OpticalElement::phase_shifter("I", 0.0)).unwrap();
        assert_eq!(r.survival_probability, 1.0);
        assert!(close(r.conditional_state.amplitudes(), psi.amplitudes(), 0.0));
    }

    #[test]
    fn full_block_of_half_state() {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let psi = StateVector::new(Basis::two_path(), vec![h, h]).unwrap();
        let r = propagate(&psi, &OpticalElement::blocker("II", 0.0)).unwrap();
        assert!((r.survival_probability - 0.5).abs() < 1e-15);
        assert!(close(r.conditional_state.amplitudes(), e("I").amplitudes(), 1e-15));
        assert_eq!(
            propagate(&e("II"), &OpticalElement::blocker("II", 0.0)),
            Err(Error::ZeroSurvival)
        );
    }

    #[test]
    fn splitter_on_port_one() {
        let r = propagate(&e("I"), &OpticalElement::balanced_beam_splitter()).unwrap();
        let want = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)];
        assert!(close(r.conditional_state.amplitudes(), &want, 1e-15));
    }

    #[test]
    fn empty_arrangement_is_identity() {
        let arr = Arrangement::new(Basis::two_path(), vec![], Layout::Custom).unwrap();
        let r = run_arrangement(&arr, &e("I")).unwrap();
        assert_eq!(r.conditional_state, e("I"));
        assert_eq!(r.survival_probability, 1.0);
    }

    #[test]
    fn mach_zehnder_routes_to_one_port() {
        let arr = Arrangement::mach_zehnder(None).unwrap().with_swept_phase(0.0);
        let r = run_arrangement(&arr, &e("I")).unwrap();
        let out = r.conditional_state.amplitudes();
        assert!(out[0].norm() < 1e-15);
        assert!((out[1].norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn blocked_mach_zehnder_splits_evenly() {
        for phi in [0.0, 0.3, PI] {
            let arr = Arrangement::mach_zehnder(Some(("II", 0.0)))
                .unwrap()
                .with_swept_phase(phi);
            let r = run_arrangement(&arr, &e("I")).unwrap();
            assert!((r.survival_probability - 0.5).abs() < 1e-15);
            for z in r.conditional_state.amplitudes() {
                assert!((z.norm_sqr() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fringe_scan_closed_form() {
        let arr = Arrangement::mach_zehnder(None).unwrap();
        let bright = Effect::new(Operator::from_diagonal(&[0.0, 1.0])).unwrap();
        let scan = fringe_scan(&arr, &e("I"), &[0.0, PI], &bright).unwrap();
        assert!((scan[0].probability - 1.0).abs() < 1e-15);
        assert!(scan[1].probability.abs() < 1e-15);

        let blocked = Arrangement::mach_zehnder(Some(("II", 0.0))).unwrap();
        for p in fringe_scan(&blocked, &e("I"), &phase_grid(16), &bright).unwrap() {
            assert!((p.probability - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn fringe_scan_requires_one_swept_phase() {
        let bright = Effect::identity(2);
        let none = Arrangement::new(
            Basis::two_path(),
            vec![OpticalElement::balanced_beam_splitter()],
            Layout::A,
        )
        .unwrap();
        assert_eq!(fringe_scan(&none, &e("I"), &[0.0], &bright), Err(Error::NoSweptPhase));
        let two = Arrangement::new(
            Basis::two_path(),
            vec![OpticalElement::swept_phase("I"), OpticalElement::swept_phase("II")],
            Layout::A,
        )
        .unwrap();
        assert_eq!(
            fringe_scan(&two, &e("I"), &[0.0], &bright),
            Err(Error::AmbiguousSweptPhase)
        );
    }

    #[test]
    fn mirror_swaps_labels() {
        let r = propagate(&e("I"), &OpticalElement::mirror("I", "II")).unwrap();
        assert_eq!(r.conditional_state, e("II"));
    }

    #[test]
    fn arrangement_rejects_bad_elements() {
        let b = Basis::two_path();
        assert!(Arrangement::new(b.clone(), vec![OpticalElement::blocker("I", 1.5)], Layout::B).is_err());
        assert!(Arrangement::new(b, vec![OpticalElement::phase_shifter("III", 0.0)], Layout::B).is_err());
    }

    #[test]
    fn visibility_edge_cases() {
        assert_eq!(visibility([0.0, 0.0]), 0.0);
        assert_eq!(visibility([0.0, 1.0]), 1.0);
        assert_eq!(visibility([0.25, 0.25]), 0.0);
    }
}
