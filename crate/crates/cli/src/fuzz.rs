//! Randomized verification of the coincidence theorem and kernel lemma.

use qinterf_core::detection::verify_reduction_theorem_with;
use qinterf_core::effect::kernel_member_with;
use qinterf_core::random::{indexed_basis, kernel_instance};
use qinterf_core::rng::derive_seed;
use qinterf_core::scenarios::Check;
use qinterf_core::{Operator, StateVector, TheoremReport, Tolerances, C64};
use serde::{Deserialize, Serialize};

use crate::config::DimRange;
use crate::parallel::par_map;

#[derive(Debug, Clone)]
pub struct FuzzOptions {
    pub dims: DimRange,
    pub instances: u64,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub workers: usize,
    /// Replace instance 0 with an indefinite operator (negative control).
    pub inject_indefinite: bool,
}

/// Worst-case figures for one dimension, all relative to the operator norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimSummary {
    pub dim: usize,
    pub instances: u64,
    pub failures: u64,
    pub max_superposition_ratio: f64,
    pub max_kernel_ratio: f64,
    pub max_excess: f64,
}

/// Everything needed to re-run a failing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBundle {
    pub instance: u64,
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    /// Row-major `[re, im]` entries.
    pub operator: Vec<Vec<[f64; 2]>>,
    pub psi1: Vec<[f64; 2]>,
    pub psi2: Vec<[f64; 2]>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzTables {
    pub dimensions: Vec<DimSummary>,
    pub failure: Option<ReplayBundle>,
}

#[derive(Debug, Clone)]
pub struct FuzzOutcome {
    pub tables: FuzzTables,
    pub checks: Vec<Check>,
}

impl FuzzOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Instance {
    dim: usize,
    seed: u64,
    op: Operator,
    psi1: StateVector,
    psi2: StateVector,
}

struct Evaluation {
    superposition_ratio: f64,
    kernel_ratio: f64,
    excess: f64,
    error: Option<String>,
}

fn to_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

/// `diag(1, -1, 0, ...)` with `psi1, psi2 = (e1 ± e2)/sqrt(2)`: both states
/// have zero expectation but their sum does not.
fn indefinite_instance(dim: usize, seed: u64) -> Instance {
    let basis = indexed_basis(dim);
    let mut diag = vec![0.0; dim];
    diag[0] = 1.0;
    diag[1] = -1.0;
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut a = vec![C64::new(0.0, 0.0); dim];
    let mut b = a.clone();
    a[0] = C64::new(h, 0.0);
    a[1] = C64::new(h, 0.0);
    b[0] = C64::new(h, 0.0);
    b[1] = C64::new(-h, 0.0);
    Instance {
        dim,
        seed,
        op: Operator::from_diagonal(&diag),
        psi1: StateVector::new(basis.clone(), a).expect("unit vector"),
        psi2: StateVector::new(basis, b).expect("unit vector"),
    }
}

fn instance(opts: &FuzzOptions, i: u64) -> Result<Instance, String> {
    let span = (opts.dims.max - opts.dims.min + 1) as u64;
    let dim = opts.dims.min + (i % span) as usize;
    let seed = derive_seed(opts.seed, i);
    if opts.inject_indefinite && i == 0 {
        return Ok(indefinite_instance(dim, seed));
    }
    let k = kernel_instance(seed, dim).map_err(|e| e.to_string())?;
    Ok(Instance {
        dim,
        seed,
        op: k.effect.into_operator(),
        psi1: k.psi1,
        psi2: k.psi2,
    })
}

fn ratio(x: f64, norm: f64) -> f64 {
    if norm > 0.0 {
        x / norm
    } else {
        x
    }
}

fn evaluate(inst: &Instance, samples: usize, tol: &Tolerances) -> Evaluation {
    let run = || -> qinterf_core::Result<(TheoremReport, f64)> {
        let report = verify_reduction_theorem_with(&inst.op, &inst.psi1, &inst.psi2, samples, inst.seed, tol)?;
        let k1 = kernel_member_with(&inst.op, &inst.psi1, tol)?;
        let k2 = kernel_member_with(&inst.op, &inst.psi2, tol)?;
        Ok((report, k1.residual.max(k2.residual)))
    };
    match run() {
        Ok((r, kernel)) => {
            let norm = r.operator_norm;
            let superposition_ratio = ratio(r.max_superposition_expectation, norm);
            let kernel_ratio = ratio(kernel, norm);
            let error = if !r.pass {
                Some(format!("superposition bound exceeded by {:e}", r.max_excess))
            } else if superposition_ratio > tol.theorem {
                Some(format!("superposition expectation ratio {superposition_ratio:e}"))
            } else if kernel_ratio > tol.kernel {
                Some(format!("kernel residual ratio {kernel_ratio:e}"))
            } else {
                None
            };
            Evaluation {
                superposition_ratio,
                kernel_ratio,
                excess: r.max_excess,
                error,
            }
        }
        Err(e) => Evaluation {
            superposition_ratio: f64::NAN,
            kernel_ratio: f64::NAN,
            excess: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

fn bundle(index: u64, inst: &Instance, samples: usize, error: Option<String>) -> ReplayBundle {
    ReplayBundle {
        instance: index,
        dim: inst.dim,
        seed: inst.seed,
        samples,
        operator: inst.op.rows().map(to_pairs).collect(),
        psi1: to_pairs(inst.psi1.amplitudes()),
        psi2: to_pairs(inst.psi2.amplitudes()),
        error,
    }
}

/// Runs `opts.instances` instances, cycling through the dimension range.
pub fn run_fuzz(opts: &FuzzOptions) -> Result<FuzzOutcome, String> {
    let evaluated = par_map(opts.instances, opts.workers, |i| {
        instance(opts, i).map(|inst| {
            let ev = evaluate(&inst, opts.samples, &opts.tolerances);
            (inst, ev)
        })
    });
    let mut summaries: Vec<DimSummary> = (opts.dims.min..=opts.dims.max)
        .map(|dim| DimSummary {
            dim,
            instances: 0,
            failures: 0,
            max_superposition_ratio: 0.0,
            max_kernel_ratio: 0.0,
            max_excess: f64::NEG_INFINITY,
        })
        .collect();
    let mut failure = None;
    for (i, item) in evaluated.into_iter().enumerate() {
        let (inst, ev) = item?;
        let s = &mut summaries[inst.dim - opts.dims.min];
        s.instances += 1;
        // NaN from a rejected operator propagates through f64::max as the
        // other operand, so failures are tracked separately.
        s.max_superposition_ratio = s.max_superposition_ratio.max(ev.superposition_ratio);
        s.max_kernel_ratio = s.max_kernel_ratio.max(ev.kernel_ratio);
        s.max_excess = s.max_excess.max(ev.excess);
        if ev.error.is_some() {
            s.failures += 1;
            if failure.is_none() {
                failure = Some(bundle(i as u64, &inst, opts.samples, ev.error));
            }
        }
    }
    summaries.retain(|s| s.instances > 0);
    let checks = summaries
        .iter()
        .map(|s| Check {
            name: format!("theorem:dim={}", s.dim),
            pass: s.failures == 0,
            residual: s.max_superposition_ratio.max(s.max_kernel_ratio),
        })
        .collect();
    Ok(FuzzOutcome {
        tables: FuzzTables {
            dimensions: summaries,
            failure,
        },
        checks,
    })
}

/// Re-runs the theorem check on a replay bundle.
pub fn replay(bundle: &ReplayBundle, tol: &Tolerances) -> qinterf_core::Result<TheoremReport> {
    let basis = indexed_basis(bundle.dim);
    let rows: Vec<Vec<C64>> = bundle.operator.iter().map(|r| from_pairs(r)).collect();
    let op = Operator::from_rows(rows)?;
    let psi1 = StateVector::new(basis.clone(), from_pairs(&bundle.psi1))?;
    let psi2 = StateVector::new(basis, from_pairs(&bundle.psi2))?;
    verify_reduction_theorem_with(&op, &psi1, &psi2, bundle.samples, bundle.seed, tol)
}
