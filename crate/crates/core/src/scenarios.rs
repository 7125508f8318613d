//! Preset experiments.
//!
//! Detector layouts: layout a recombines the arms and
//! detects both output ports; layout b detects inside the arms before any
//! recombination; layout c places two detectors in series on arm I with the
//! first one transmitting. The two-slit preset models the screen as a
//! one-parameter family of effects `|s_x><s_x|`, `s_x = (|1> + e^{ix}|2>)/sqrt 2`,
//! standing in for screen position. The Stern-Gerlach preset uses the basis
//! path x spin-1/2 and realises the magnet as the spin-controlled path swap
//! `|I,down> <-> |II,down>`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use core::fmt;
use core::str::FromStr;

use crate::detection::{
    build_joint_povm, coincidence_probability, coincidence_probability_mixed, serial_correlation,
    verify_reduction_theorem, DetectorSpec, OutcomePovm,
};
use crate::effect::{expectation, DensityOperator, Effect};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, Operator, StateVector, C64};
use crate::interferometer::{
    fringe_scan, phase_grid, run_arrangement, visibility, Arrangement, FringePoint, Layout, OpticalElement,
};
use crate::rng::derive_seed;
use crate::sampling::{sample_events_with, EventCounts, Sequential, TrialSampler};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

/// Probability tables must sum to one within this slack.
pub const TAU_TABLE: f64 = 1e-10;
/// Fringe law tolerance.
pub const TAU_FRINGE: f64 = 1e-12;
/// Visibility tolerance.
pub const TAU_VISIBILITY: f64 = 1e-9;
/// Anticoincidence tolerance at unit efficiency.
pub const TAU_ANTICOINCIDENCE: f64 = 1e-12;
/// Sampled counts must lie within this many binomial standard deviations.
pub const SAMPLING_SIGMAS: f64 = 4.0;
/// Coefficient samples per theorem check inside a scenario.
const THEOREM_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioName {
    MachZehnderA,
    CoincidenceB,
    SerialC,
    TwoSlit,
    SternGerlach,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::MachZehnderA,
        ScenarioName::CoincidenceB,
        ScenarioName::SerialC,
        ScenarioName::TwoSlit,
        ScenarioName::SternGerlach,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::MachZehnderA => "mach_zehnder_a",
            ScenarioName::CoincidenceB => "coincidence_b",
            ScenarioName::SerialC => "serial_c",
            ScenarioName::TwoSlit => "two_slit",
            ScenarioName::SternGerlach => "stern_gerlach",
        }
    }

    fn description(self) -> &'static str {
        match self {
            ScenarioName::MachZehnderA => {
                "Layout a: balanced Mach-Zehnder, arms recombined, one detector per output port; \
                 fringe scan over the arm-I phase and visibility, optionally with one arm blocked"
            }
            ScenarioName::CoincidenceB => {
                "Layout b: one detector inside each arm before recombination; exact and sampled \
                 coincidence counts for a single quantum"
            }
            ScenarioName::SerialC => {
                "Layout c: two detectors in series on arm I, the first transmitting; both fire or \
                 neither fires at unit efficiency"
            }
            ScenarioName::TwoSlit => {
                "Two slits as two paths; screen position as a phase-parameterized effect family; \
                 fringes plus the coincidence null for one detector per slit"
            }
            ScenarioName::SternGerlach => {
                "Path x spin-1/2 basis; the magnet routes spin down into the second beam; \
                 coincidence null for detectors on the two output beams"
            }
        }
    }

    fn parameters(self) -> &'static [&'static str] {
        match self {
            ScenarioName::MachZehnderA => &["phase-steps", "blocked", "eta1", "eta2"],
            ScenarioName::CoincidenceB | ScenarioName::SerialC => &["trials", "eta1", "eta2"],
            ScenarioName::TwoSlit => &["phase-steps", "blocked", "trials", "eta1", "eta2"],
            ScenarioName::SternGerlach => &["trials", "spin-polar", "spin-azimuth", "eta1", "eta2"],
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Which arm, if any, carries a fully absorbing blocker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Blocked {
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "none"))]
    None,
    I,
    II,
}

impl Blocked {
    pub fn as_str(self) -> &'static str {
        match self {
            Blocked::None => "none",
            Blocked::I => "I",
            Blocked::II => "II",
        }
    }
}

impl FromStr for Blocked {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Blocked::None),
            "I" => Ok(Blocked::I),
            "II" => Ok(Blocked::II),
            other => Err(Error::InvalidParams(format!(
                "blocked must be none, I or II, got `{other}`"
            ))),
        }
    }
}

/// Scenario parameters. Names in [`ScenarioParams::NAMES`] double as CLI
/// flag names and config-file keys.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub struct ScenarioParams {
    pub phase_steps: usize,
    pub trials: u64,
    pub eta1: f64,
    pub eta2: f64,
    pub blocked: Blocked,
    pub spin_polar: f64,
    pub spin_azimuth: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            phase_steps: 64,
            trials: 100_000,
            eta1: 1.0,
            eta2: 1.0,
            blocked: Blocked::None,
            spin_polar: FRAC_PI_2,
            spin_azimuth: 0.0,
        }
    }
}

pub const MAX_PHASE_STEPS: usize = 1_000_000;
pub const MAX_TRIALS: u64 = 10_000_000_000;

fn parse_value<T: FromStr>(name: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParams(format!("cannot parse `{value}` for {name}")))
}

impl ScenarioParams {
    pub const NAMES: [&'static str; 7] = [
        "phase-steps",
        "trials",
        "eta1",
        "eta2",
        "blocked",
        "spin-polar",
        "spin-azimuth",
    ];

    /// Sets parameter `name` from its text form.
    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        match name {
            "phase-steps" => self.phase_steps = parse_value(name, value)?,
            "trials" => self.trials = parse_value(name, value)?,
            "eta1" => self.eta1 = parse_value(name, value)?,
            "eta2" => self.eta2 = parse_value(name, value)?,
            "blocked" => self.blocked = value.trim().parse()?,
            "spin-polar" => self.spin_polar = parse_value(name, value)?,
            "spin-azimuth" => self.spin_azimuth = parse_value(name, value)?,
            other => return Err(Error::InvalidParams(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    /// Text form of parameter `name`; reals use the shortest round-trip form.
    pub fn get(&self, name: &str) -> Option<String> {
        Some(match name {
            "phase-steps" => self.phase_steps.to_string(),
            "trials" => self.trials.to_string(),
            "eta1" => format!("{:?}", self.eta1),
            "eta2" => format!("{:?}", self.eta2),
            "blocked" => self.blocked.as_str().to_string(),
            "spin-polar" => format!("{:?}", self.spin_polar),
            "spin-azimuth" => format!("{:?}", self.spin_azimuth),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(2..=MAX_PHASE_STEPS).contains(&self.phase_steps) {
            return bad(format!("phase-steps must lie in [2, {MAX_PHASE_STEPS}]"));
        }
        if self.trials > MAX_TRIALS {
            return bad(format!("trials must not exceed {MAX_TRIALS}"));
        }
        for (name, eta) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(0.0..=1.0).contains(&eta) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        if !self.spin_polar.is_finite() || !self.spin_azimuth.is_finite() {
            return bad("spin angles must be finite".into());
        }
        Ok(())
    }
}

/// Parameter schema entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: String,
    pub range: &'static str,
    pub description: &'static str,
}

fn param_spec(name: &'static str) -> ParamSpec {
    let (kind, range, description) = match name {
        "phase-steps" => (
            "integer",
            "[2, 1000000]",
            "points of the uniform phase grid over [0, 2pi)",
        ),
        "trials" => ("integer", "[0, 10000000000]", "Monte Carlo trials"),
        "eta1" => ("real", "[0, 1]", "efficiency of detector D1"),
        "eta2" => ("real", "[0, 1]", "efficiency of detector D2"),
        "blocked" => ("choice", "none | I | II", "arm carrying a fully absorbing blocker"),
        "spin-polar" => ("real", "finite, radians", "polar angle of the incoming spin"),
        "spin-azimuth" => ("real", "finite, radians", "azimuthal angle of the incoming spin"),
        _ => unreachable!("unknown parameter {name}"),
    };
    ParamSpec {
        name,
        kind,
        default: ScenarioParams::default().get(name).expect("known parameter"),
        range,
        description,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub params: Vec<ParamSpec>,
}

/// The presets in a fixed order.
pub fn list_scenarios() -> Vec<ScenarioInfo> {
    ScenarioName::ALL
        .into_iter()
        .map(|n| ScenarioInfo {
            name: n.as_str(),
            description: n.description(),
            params: n.parameters().iter().map(|p| param_spec(p)).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TableEntry {
    pub outcome: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CountEntry {
    pub outcome: String,
    pub count: u64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

impl Check {
    fn within(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            pass: residual <= tolerance,
            residual,
        }
    }

    fn exact(name: &str, residual: f64) -> Self {
        Self {
            name: name.to_string(),
            pass: residual == 0.0,
            residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScenarioReport {
    pub scenario: String,
    pub seed: u64,
    pub params: ScenarioParams,
    pub tables: BTreeMap<String, Vec<TableEntry>>,
    pub fringe: Option<Vec<FringePoint>>,
    pub visibility: Option<f64>,
    pub counts: Option<Vec<CountEntry>>,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    fn new(name: ScenarioName, params: &ScenarioParams, seed: u64) -> Self {
        Self {
            scenario: name.as_str().to_string(),
            seed,
            params: params.clone(),
            tables: BTreeMap::new(),
            fringe: None,
            visibility: None,
            counts: None,
            checks: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn add_table(&mut self, name: &str, entries: Vec<TableEntry>) {
        let total: f64 = entries.iter().map(|e| e.probability).sum();
        let in_range = entries.iter().all(|e| (0.0..=1.0).contains(&e.probability));
        let mut check = Check::within(&format!("table_normalized:{name}"), (total - 1.0).abs(), TAU_TABLE);
        check.pass &= in_range;
        self.checks.push(check);
        self.tables.insert(name.to_string(), entries);
    }

    fn add_counts(&mut self, counts: &EventCounts) {
        self.checks.push(sampling_check(counts));
        self.checks.push(Check::exact(
            "counts_sum",
            (counts.counts.iter().sum::<u64>() as f64 - counts.n_trials as f64).abs(),
        ));
        self.counts = Some(
            counts
                .outcomes
                .iter()
                .zip(&counts.counts)
                .zip(&counts.probabilities)
                .map(|((o, &count), &probability)| CountEntry {
                    outcome: o.label(),
                    count,
                    probability,
                })
                .collect(),
        );
    }

    fn add_povm_checks(&mut self, povm: &OutcomePovm) {
        self.checks.push(Check::within(
            "povm_completeness",
            povm.completeness_residual(),
            TAU_TABLE,
        ));
    }
}

/// Every outcome count within [`SAMPLING_SIGMAS`] binomial deviations of
/// `n p`; residual is the largest z-score (raw deviation where `p` is 0 or 1).
fn sampling_check(counts: &EventCounts) -> Check {
    let n = counts.n_trials as f64;
    let mut pass = true;
    let mut worst = 0.0_f64;
    for (&c, &p) in counts.counts.iter().zip(&counts.probabilities) {
        let dev = (c as f64 - n * p).abs();
        let sigma = (n * p * (1.0 - p)).sqrt();
        if sigma > 0.0 {
            worst = worst.max(dev / sigma);
            pass &= dev <= SAMPLING_SIGMAS * sigma;
        } else {
            worst = worst.max(dev);
            pass &= dev < 0.5;
        }
    }
    Check {
        name: "sampling_within_4_sigma".into(),
        pass,
        residual: worst,
    }
}

fn outcome_table(povm: &OutcomePovm, probabilities: &[f64]) -> Vec<TableEntry> {
    povm.outcomes()
        .iter()
        .zip(probabilities)
        .map(|((o, _), &probability)| TableEntry {
            outcome: o.label(),
            probability,
        })
        .collect()
}

/// 16 superpositions `cos(a) phi1 + e^{ib} sin(a) phi2` with
/// `a in {0, pi/6, pi/3, pi/2}` and `b in {0, pi/2, pi, 3pi/2}`.
pub fn superposition_grid() -> Vec<(C64, C64)> {
    let mut out = Vec::with_capacity(16);
    for a in [0.0, PI / 6.0, PI / 3.0, FRAC_PI_2] {
        for b in [0.0, FRAC_PI_2, PI, 1.5 * PI] {
            out.push((C64::new(a.cos(), 0.0), C64::from_polar(a.sin(), b)));
        }
    }
    out
}

fn two_arm_state(basis: &Basis, c1: C64, c2: C64) -> Result<StateVector> {
    StateVector::normalized(basis.clone(), vec![c1, c2])
}

/// Runs preset `name` with sequential sampling.
pub fn run_scenario(name: &str, params: &ScenarioParams, seed: u64) -> Result<ScenarioReport> {
    run_scenario_with(name, params, seed, &Sequential)
}

/// Runs preset `name`, executing Monte Carlo trials through `sampler`.
pub fn run_scenario_with(
    name: &str,
    params: &ScenarioParams,
    seed: u64,
    sampler: &dyn TrialSampler,
) -> Result<ScenarioReport> {
    let name: ScenarioName = name.parse()?;
    params.validate()?;
    match name {
        ScenarioName::MachZehnderA => mach_zehnder_a(params, seed),
        ScenarioName::CoincidenceB => coincidence_b(params, seed, sampler),
        ScenarioName::SerialC => serial_c(params, seed, sampler),
        ScenarioName::TwoSlit => two_slit(params, seed, sampler),
        ScenarioName::SternGerlach => stern_gerlach(params, seed, sampler),
    }
}

fn blocker_for(blocked: Blocked, first: &'static str, second: &'static str) -> Option<(&'static str, f64)> {
    match blocked {
        Blocked::None => None,
        Blocked::I => Some((first, 0.0)),
        Blocked::II => Some((second, 0.0)),
    }
}

fn mach_zehnder_a(params: &ScenarioParams, seed: u64) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::MachZehnderA, params, seed);
    let arrangement = Arrangement::mach_zehnder(blocker_for(params.blocked, "I", "II"))?;
    let basis = arrangement.basis().clone();
    let input = StateVector::basis_state(basis.clone(), "I")?;
    let povm = build_joint_povm(
        Layout::A,
        &[
            DetectorSpec::new("I", params.eta1, false),
            DetectorSpec::new("II", params.eta2, false),
        ],
        &basis,
    )?;
    report.add_povm_checks(&povm);

    // D2 watches the port that is bright at zero phase
    let d2 = povm.outcomes()[2].1.clone();
    let phases = phase_grid(params.phase_steps);
    let fringe = fringe_scan(&arrangement, &input, &phases, &d2)?;
    let vis = visibility(fringe.iter().map(|p| p.probability));

    let blocked = params.blocked != Blocked::None;
    if !blocked {
        let law = fringe
            .iter()
            .map(|p| (p.probability - params.eta2 * 0.5 * (1.0 + p.phase.cos())).abs())
            .fold(0.0, f64::max);
        report.checks.push(Check::within("fringe_law", law, TAU_FRINGE));
    }
    let expected_vis = if !blocked && params.eta2 > 0.0 { 1.0 } else { 0.0 };
    report
        .checks
        .push(Check::within("visibility", (vis - expected_vis).abs(), TAU_VISIBILITY));

    let mut worst_coincidence = 0.0_f64;
    for &phase in &phases {
        if let Ok(r) = run_arrangement(&arrangement.with_swept_phase(phase), &input) {
            worst_coincidence = worst_coincidence.max(coincidence_probability(&povm, &r.conditional_state)?);
        }
    }
    report
        .checks
        .push(Check::exact("coincidence_exact_zero", worst_coincidence));

    let (survival, probabilities) = match run_arrangement(&arrangement.with_swept_phase(0.0), &input) {
        Ok(r) => (r.survival_probability, povm.probabilities(&r.conditional_state)?),
        Err(Error::ZeroSurvival) => (0.0, vec![0.0; povm.outcomes().len()]),
        Err(e) => return Err(e),
    };
    let mut table: Vec<TableEntry> = outcome_table(&povm, &probabilities)
        .into_iter()
        .map(|mut e| {
            e.probability *= survival;
            e
        })
        .collect();
    table.push(TableEntry {
        outcome: "absorbed".into(),
        probability: 1.0 - survival,
    });
    report.add_table("phase_zero", table);
    report.fringe = Some(fringe);
    report.visibility = Some(vis);
    Ok(report)
}

/// Checks shared by the presets with detectors on disjoint paths: exact
/// and sampled coincidence null, calibration on each arm state, and the
/// mixed-state extension.
fn coincidence_checks(
    report: &mut ScenarioReport,
    povm: &OutcomePovm,
    state: &StateVector,
    arms: (&StateVector, &StateVector),
    counts: &EventCounts,
) -> Result<()> {
    report.checks.push(Check::exact(
        "coincidence_exact_zero",
        coincidence_probability(povm, state)?,
    ));
    report
        .checks
        .push(Check::exact("coincidence_sampled_zero", counts.coincidences() as f64));
    let calibration = coincidence_probability(povm, arms.0)?.max(coincidence_probability(povm, arms.1)?);
    report.checks.push(Check::exact("coincidence_calibration", calibration));
    let rho = DensityOperator::mixture(&[(0.5, arms.0), (0.5, arms.1)])?;
    report.checks.push(Check::exact(
        "coincidence_mixed_state",
        coincidence_probability_mixed(povm, &rho)?,
    ));
    Ok(())
}

fn coincidence_b(params: &ScenarioParams, seed: u64, sampler: &dyn TrialSampler) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::CoincidenceB, params, seed);
    let basis = Basis::two_path();
    let splitter = Arrangement::new(basis.clone(), vec![OpticalElement::balanced_beam_splitter()], Layout::B)?;
    let state = run_arrangement(&splitter, &StateVector::basis_state(basis.clone(), "I")?)?.conditional_state;
    let povm = build_joint_povm(
        Layout::B,
        &[
            DetectorSpec::new("I", params.eta1, false),
            DetectorSpec::new("II", params.eta2, false),
        ],
        &basis,
    )?;
    report.add_povm_checks(&povm);
    let probabilities = povm.probabilities(&state)?;
    report.add_table("outcomes", outcome_table(&povm, &probabilities));

    let counts = sample_events_with(&povm, &state, params.trials, seed, sampler)?;
    let arm1 = StateVector::basis_state(basis.clone(), "I")?;
    let arm2 = StateVector::basis_state(basis, "II")?;
    coincidence_checks(&mut report, &povm, &state, (&arm1, &arm2), &counts)?;

    let coincidence = povm.all_fired_effect().ok_or(Error::MissingOutcome)?;
    let theorem = verify_reduction_theorem(
        coincidence.operator(),
        &arm1,
        &arm2,
        THEOREM_SAMPLES,
        derive_seed(seed, 1),
    )?;
    let mut check = Check::exact(
        "coincidence_superpositions",
        theorem.max_superposition_expectation.max(0.0),
    );
    check.pass &= theorem.pass;
    report.checks.push(check);
    report.add_counts(&counts);
    Ok(report)
}

fn serial_c(params: &ScenarioParams, seed: u64, sampler: &dyn TrialSampler) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::SerialC, params, seed);
    let basis = Basis::two_path();
    let splitter = Arrangement::new(basis.clone(), vec![OpticalElement::balanced_beam_splitter()], Layout::C)?;
    let state = run_arrangement(&splitter, &StateVector::basis_state(basis.clone(), "I")?)?.conditional_state;
    let povm = build_joint_povm(
        Layout::C,
        &[
            DetectorSpec::new("I", params.eta1, true),
            DetectorSpec::new("I", params.eta2, false),
        ],
        &basis,
    )?;
    report.add_povm_checks(&povm);
    let probabilities = povm.probabilities(&state)?;
    report.add_table("outcomes", outcome_table(&povm, &probabilities));

    // closed-form outcome tree for a quantum reaching arm I with weight w
    let (e1, e2) = (params.eta1, params.eta2);
    let mut tree = 0.0_f64;
    for (c1, c2) in superposition_grid() {
        let psi = two_arm_state(&basis, c1, c2)?;
        let d = serial_correlation(&povm, &psi)?;
        let w = c1.norm_sqr();
        let expected = [
            w * e1 * e2,
            w * e1 * (1.0 - e2),
            w * (1.0 - e1) * e2,
            1.0 - w * (e1 + e2 - e1 * e2),
        ];
        let got = [d.both, d.first_only, d.second_only, d.none];
        for (g, x) in got.iter().zip(expected) {
            tree = tree.max((g - x).abs());
        }
    }
    report
        .checks
        .push(Check::within("outcome_tree", tree, TAU_ANTICOINCIDENCE));

    if e1 == 1.0 && e2 == 1.0 {
        let mut exactly_one = 0.0_f64;
        let mut both_or_none = 0.0_f64;
        for (c1, c2) in superposition_grid() {
            let d = serial_correlation(&povm, &two_arm_state(&basis, c1, c2)?)?;
            exactly_one = exactly_one.max(d.exactly_one());
            both_or_none = both_or_none.max((d.both + d.none - 1.0).abs());
        }
        report
            .checks
            .push(Check::within("anticoincidence_grid", exactly_one, TAU_ANTICOINCIDENCE));
        report
            .checks
            .push(Check::within("both_or_none_grid", both_or_none, TAU_ANTICOINCIDENCE));

        let anti = povm.exactly_one_effect()?;
        let arm1 = StateVector::basis_state(basis.clone(), "I")?;
        let arm2 = StateVector::basis_state(basis, "II")?;
        let theorem = verify_reduction_theorem(anti.operator(), &arm1, &arm2, THEOREM_SAMPLES, derive_seed(seed, 1))?;
        let mut check = Check::within(
            "anticoincidence_superpositions",
            theorem.max_superposition_expectation.max(0.0),
            TAU_ANTICOINCIDENCE,
        );
        check.pass &= theorem.pass;
        report.checks.push(check);
    }

    let counts = sample_events_with(&povm, &state, params.trials, seed, sampler)?;
    report.add_counts(&counts);
    Ok(report)
}

/// Screen effect `|s_x><s_x|` for position parameter `x`.
pub fn screen_effect(basis: &Basis, x: f64) -> Result<Effect> {
    let s = [C64::new(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, x)];
    if basis.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: basis.dim(),
        });
    }
    Effect::new(Operator::projector(&s))
}

fn two_slit(params: &ScenarioParams, seed: u64, sampler: &dyn TrialSampler) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::TwoSlit, params, seed);
    let basis = Basis::new(["slit_1", "slit_2"])?;
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let source = StateVector::new(basis.clone(), vec![h, h])?;
    let elements = blocker_for(params.blocked, "slit_1", "slit_2")
        .map(|(path, eta)| OpticalElement::blocker(path, eta))
        .into_iter()
        .collect();
    let arrangement = Arrangement::new(basis.clone(), elements, Layout::B)?;
    let passed = run_arrangement(&arrangement, &source)?;

    let mut fringe = Vec::with_capacity(params.phase_steps);
    for x in phase_grid(params.phase_steps) {
        let p = passed.survival_probability * expectation(&screen_effect(&basis, x)?, &passed.conditional_state)?;
        fringe.push(FringePoint {
            phase: x,
            probability: p,
        });
    }
    let vis = visibility(fringe.iter().map(|p| p.probability));
    if params.blocked == Blocked::None {
        let law = fringe
            .iter()
            .map(|p| (p.probability - 0.5 * (1.0 + p.phase.cos())).abs())
            .fold(0.0, f64::max);
        report.checks.push(Check::within("fringe_law", law, TAU_FRINGE));
    }
    let expected_vis = if params.blocked == Blocked::None { 1.0 } else { 0.0 };
    report
        .checks
        .push(Check::within("visibility", (vis - expected_vis).abs(), TAU_VISIBILITY));

    let povm = build_joint_povm(
        Layout::B,
        &[
            DetectorSpec::new("slit_1", params.eta1, false),
            DetectorSpec::new("slit_2", params.eta2, false),
        ],
        &basis,
    )?;
    report.add_povm_checks(&povm);
    let state = &passed.conditional_state;
    let probabilities = povm.probabilities(state)?;
    report.add_table("slit_detectors", outcome_table(&povm, &probabilities));
    let counts = sample_events_with(&povm, state, params.trials, seed, sampler)?;
    let arm1 = StateVector::basis_state(basis.clone(), "slit_1")?;
    let arm2 = StateVector::basis_state(basis, "slit_2")?;
    coincidence_checks(&mut report, &povm, state, (&arm1, &arm2), &counts)?;
    report.add_counts(&counts);
    report.fringe = Some(fringe);
    report.visibility = Some(vis);
    Ok(report)
}

fn stern_gerlach(params: &ScenarioParams, seed: u64, sampler: &dyn TrialSampler) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(ScenarioName::SternGerlach, params, seed);
    let basis = Basis::new(["I:up", "I:down", "II:up", "II:down"])?;
    let half = 0.5 * params.spin_polar;
    let zero = C64::new(0.0, 0.0);
    let input = StateVector::normalized(
        basis.clone(),
        vec![
            C64::new(half.cos(), 0.0),
            C64::from_polar(half.sin(), params.spin_azimuth),
            zero,
            zero,
        ],
    )?;
    let magnet = Arrangement::new(
        basis.clone(),
        vec![OpticalElement::mirror("I:down", "II:down")],
        Layout::B,
    )?;
    let state = run_arrangement(&magnet, &input)?.conditional_state;
    let povm = build_joint_povm(
        Layout::B,
        &[
            DetectorSpec::new("I", params.eta1, false),
            DetectorSpec::new("II", params.eta2, false),
        ],
        &basis,
    )?;
    report.add_povm_checks(&povm);
    let probabilities = povm.probabilities(&state)?;
    let up = half.cos().powi(2);
    let weights = (probabilities[1] - params.eta1 * up)
        .abs()
        .max((probabilities[2] - params.eta2 * (1.0 - up)).abs());
    report.checks.push(Check::within("beam_weights", weights, TAU_FRINGE));
    report.add_table("outcomes", outcome_table(&povm, &probabilities));

    let counts = sample_events_with(&povm, &state, params.trials, seed, sampler)?;
    let beam_up = StateVector::basis_state(basis.clone(), "I:up")?;
    let beam_down = StateVector::basis_state(basis, "II:down")?;
    coincidence_checks(&mut report, &povm, &state, (&beam_up, &beam_down), &counts)?;
    report.add_counts(&counts);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScenarioParams {
        ScenarioParams {
            trials: 10_000,
            ..ScenarioParams::default()
        }
    }

    #[test]
    fn five_presets_in_stable_order() {
        let list = list_scenarios();
        let names: Vec<&str> = list.iter().map(|s| s.name).collect();
        assert_eq!(
            names,
            [
                "mach_zehnder_a",
                "coincidence_b",
                "serial_c",
                "two_slit",
                "stern_gerlach"
            ]
        );
        assert!(list[1].description.starts_with("Layout b"));
    }

    #[test]
    fn every_default_scenario_passes() {
        for s in list_scenarios() {
            let r = run_scenario(s.name, &quick(), 5).unwrap();
            assert!(r.all_passed(), "{}: {:?}", s.name, r.checks);
        }
    }

    #[test]
    fn blocked_arms_kill_fringes() {
        for blocked in [Blocked::I, Blocked::II] {
            let params = ScenarioParams { blocked, ..quick() };
            for name in ["mach_zehnder_a", "two_slit"] {
                let r = run_scenario(name, &params, 1).unwrap();
                assert!(r.visibility.unwrap() <= 1e-9, "{name}");
                assert!(r.all_passed(), "{name}: {:?}", r.checks);
            }
        }
    }

    #[test]
    fn unknown_and_invalid() {
        assert_eq!(
            run_scenario("fig_d", &quick(), 1).unwrap_err(),
            Error::UnknownScenario("fig_d".into())
        );
        let params = ScenarioParams { eta1: 1.5, ..quick() };
        assert!(matches!(
            run_scenario("serial_c", &params, 1),
            Err(Error::InvalidParams(_))
        ));
        let params = ScenarioParams {
            phase_steps: 1,
            ..quick()
        };
        assert!(matches!(
            run_scenario("mach_zehnder_a", &params, 1),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn params_text_round_trip() {
        let p = ScenarioParams {
            eta1: 0.1,
            spin_polar: 1.0 / 3.0,
            blocked: Blocked::II,
            ..ScenarioParams::default()
        };
        let mut q = ScenarioParams::default();
        for name in ScenarioParams::NAMES {
            q.set(name, &p.get(name).unwrap()).unwrap();
        }
        assert_eq!(p, q);
        assert!(q.set("bogus", "1").is_err());
        assert!(q.set("eta1", "abc").is_err());
    }

    #[test]
    fn deterministic_reports() {
        for s in list_scenarios() {
            assert_eq!(
                run_scenario(s.name, &quick(), 9).unwrap(),
                run_scenario(s.name, &quick(), 9).unwrap()
            );
        }
    }
}
