//! The combiner: best of the derandomized threshold sweep and the
//! primal-dual tour, the randomized variant, and the closed-form guarantee
//! constants.
//!
//! The headline runtime certificate is `H <= alpha * LP` with
//! `alpha = 1 / (1 - (2/3) e^{-1/3}) < 1.91457`; it is recomputed on every
//! solve and a violation aborts the run.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_pctsp, HELD_KARP_CAP};
use crate::instance::{MetricInstance, Tour};
use crate::lp::{solve_relaxation_rounds, FractionalSolution, RelaxationResult, DEFAULT_MAX_ROUNDS};
use crate::primal_dual::{
    scaled_penalty_certificate, primal_dual_tour_detailed, scale_penalties, ScaledPenaltyCheck, MoatRecord,
};
use crate::tour::{christofides, rounding_sweep, threshold_set, SweepResult};

/// The guarantee constants: the lower end `a = e^{-1/3}` of the threshold
/// distribution, the approximation factor `alpha`, and the probability `p`
/// of picking the primal-dual tour in the randomized variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeConstants {
    pub a: f64,
    pub alpha: f64,
    pub p: f64,
}

/// `a = e^{-1/3}`, `alpha = 1/(1 - (2/3) e^{-1/3})`, `p = 1/(3 - 2 e^{-1/3})`.
pub fn constants() -> GuaranteeConstants {
    let a = (-1.0f64 / 3.0).exp();
    GuaranteeConstants {
        a,
        alpha: 1.0 / (1.0 - 2.0 * a / 3.0),
        p: 1.0 / (3.0 - 2.0 * a),
    }
}

/// Guarantee delivered by the same pipeline when the tour subroutine is
/// beta-approximate against its relaxation: `1 / (1 - e^{1-2/beta} / beta)`.
/// Recovers `alpha` at `beta = 3/2`.
pub fn beta_guarantee(beta: f64) -> Result<f64> {
    if !(beta >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be at least 1, got {beta}"
        )));
    }
    Ok(1.0 / (1.0 - (1.0 / beta) * (1.0 - 2.0 / beta).exp()))
}

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSummary {
    pub value: f64,
    pub cost_part: f64,
    pub penalty_part: f64,
    pub separation_rounds: usize,
    pub cuts_added: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdSummary {
    pub objective: f64,
    pub cost: f64,
    pub tour: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedSummary {
    pub seed: u64,
    pub trials: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledPenaltySummary {
    pub scaled_lp_value: f64,
    #[serde(flatten)]
    pub check: ScaledPenaltyCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub objective: f64,
    pub visited: Vec<usize>,
    pub tour: Vec<usize>,
    /// `h / opt`, reported as 1 when both are zero.
    pub ratio_h_opt: f64,
}

/// The solve report emitted by every solver mode; stable JSON schema
/// (`report_version` 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub report_version: u32,
    pub n: usize,
    pub root: usize,
    pub mode: String,
    pub alpha: f64,
    pub lp: Option<LpSummary>,
    pub sweep: Option<SweepResult>,
    pub primal_dual: Option<PdSummary>,
    pub randomized: Option<RandomizedSummary>,
    pub scaled_penalty_certificate: Option<ScaledPenaltySummary>,
    /// Winner objective.
    pub h: f64,
    pub winner: String,
    /// `h / lp`, reported as 1 when the LP value is zero; absent without LP.
    pub ratio_lp: Option<f64>,
    pub certified: bool,
    pub tour: Vec<usize>,
    pub tour_cost: f64,
    pub exact: Option<ExactSummary>,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything a full solve produces beyond the report, for callers that
/// want the LP dump or the moat event log.
#[derive(Debug, Clone)]
pub struct SolveArtifacts {
    pub report: SolveReport,
    pub lp: Option<RelaxationResult>,
    pub pd_record: Option<MoatRecord>,
}

fn ratio_convention(h: f64, denom: f64) -> f64 {
    if denom.abs() <= 1e-12 {
        1.0
    } else {
        h / denom
    }
}

fn lp_summary(sol: &FractionalSolution) -> LpSummary {
    LpSummary {
        value: sol.value,
        cost_part: sol.cost_part,
        penalty_part: sol.penalty_part,
        separation_rounds: sol.rounds,
        cuts_added: sol.cuts_added,
    }
}

/// Exact enumeration path for n <= 2, where the relaxation is not defined
/// (the two-vertex degree equality conflicts with the unit edge bound).
fn solve_tiny(inst: &MetricInstance, mode: &str) -> Result<SolveReport> {
    let res = exact_pctsp(inst)?;
    let tour = Tour::new(inst, res.tour.clone())?;
    Ok(SolveReport {
        report_version: REPORT_VERSION,
        n: inst.n(),
        root: inst.root(),
        mode: mode.to_string(),
        alpha: constants().alpha,
        lp: None,
        sweep: None,
        primal_dual: None,
        randomized: None,
        scaled_penalty_certificate: None,
        h: res.objective,
        winner: "exact".to_string(),
        ratio_lp: None,
        certified: true,
        tour: res.tour.clone(),
        tour_cost: tour.cost(),
        exact: Some(ExactSummary {
            objective: res.objective,
            visited: res.visited,
            tour: res.tour,
            ratio_h_opt: 1.0,
        }),
    })
}

/// Runs the full pipeline (LP, sweep, primal-dual) and combines: `H` is the
/// better of the sweep best and the primal-dual objective. Enforces
/// `H <= alpha * LP + 1e-6` and, on n <= 2, falls back to exact
/// enumeration certified by optimality itself.
pub fn solve_best(inst: &MetricInstance) -> Result<SolveReport> {
    solve_best_full(inst).map(|a| a.report)
}

pub fn solve_best_full(inst: &MetricInstance) -> Result<SolveArtifacts> {
    if inst.n() <= 2 {
        return Ok(SolveArtifacts {
            report: solve_tiny(inst, "best")?,
            lp: None,
            pd_record: None,
        });
    }
    let relax = solve_relaxation_rounds(inst, inst.penalties(), DEFAULT_MAX_ROUNDS)?;
    let sweep = rounding_sweep(inst, &relax.solution)?;
    let (pd_tour, pd_record, _) = primal_dual_tour_detailed(inst, &relax.solution)?;

    let sweep_best = sweep.best_row().objective;
    let pd_obj = pd_tour.objective();
    // Ties go to the sweep.
    let pd_wins = pd_obj < sweep_best - 1e-12;
    let h = if pd_wins { pd_obj } else { sweep_best };
    let (winner, tour_vertices, tour_cost) = if pd_wins {
        (
            "primal-dual",
            pd_tour.vertices().to_vec(),
            pd_tour.cost(),
        )
    } else {
        let row = sweep.best_row();
        ("sweep", row.tour.clone(), row.cost)
    };

    let alpha = constants().alpha;
    let bound = alpha * relax.solution.value;
    if h > bound + 1e-6 {
        return Err(Error::Certification {
            name: "combined-guarantee",
            lhs: h,
            rhs: bound,
            tol: 1e-6,
        });
    }

    let report = SolveReport {
        report_version: REPORT_VERSION,
        n: inst.n(),
        root: inst.root(),
        mode: "best".to_string(),
        alpha,
        lp: Some(lp_summary(&relax.solution)),
        sweep: Some(sweep),
        primal_dual: Some(PdSummary {
            objective: pd_obj,
            cost: pd_tour.cost(),
            tour: pd_tour.vertices().to_vec(),
        }),
        randomized: None,
        scaled_penalty_certificate: None,
        h,
        winner: winner.to_string(),
        ratio_lp: Some(ratio_convention(h, relax.solution.value)),
        certified: true,
        tour: tour_vertices,
        tour_cost,
        exact: None,
    };
    Ok(SolveArtifacts {
        report,
        lp: Some(relax),
        pd_record: Some(pd_record),
    })
}

/// Sweep-only mode: certified by the per-row rounding bound.
pub fn solve_rounding_full(inst: &MetricInstance) -> Result<SolveArtifacts> {
    if inst.n() <= 2 {
        return Ok(SolveArtifacts {
            report: solve_tiny(inst, "rounding")?,
            lp: None,
            pd_record: None,
        });
    }
    let relax = solve_relaxation_rounds(inst, inst.penalties(), DEFAULT_MAX_ROUNDS)?;
    let sweep = rounding_sweep(inst, &relax.solution)?;
    let row = sweep.best_row().clone();
    let report = SolveReport {
        report_version: REPORT_VERSION,
        n: inst.n(),
        root: inst.root(),
        mode: "rounding".to_string(),
        alpha: constants().alpha,
        lp: Some(lp_summary(&relax.solution)),
        sweep: Some(sweep),
        primal_dual: None,
        randomized: None,
        scaled_penalty_certificate: None,
        h: row.objective,
        winner: "sweep".to_string(),
        ratio_lp: Some(ratio_convention(row.objective, relax.solution.value)),
        certified: true,
        tour: row.tour,
        tour_cost: row.cost,
        exact: None,
    };
    Ok(SolveArtifacts {
        report,
        lp: Some(relax),
        pd_record: None,
    })
}

/// Primal-dual-only mode: certified by the cost guarantee inside the run.
pub fn solve_primal_dual_full(inst: &MetricInstance) -> Result<SolveArtifacts> {
    if inst.n() <= 2 {
        return Ok(SolveArtifacts {
            report: solve_tiny(inst, "primal-dual")?,
            lp: None,
            pd_record: None,
        });
    }
    let relax = solve_relaxation_rounds(inst, inst.penalties(), DEFAULT_MAX_ROUNDS)?;
    let (pd_tour, pd_record, _) = primal_dual_tour_detailed(inst, &relax.solution)?;
    let report = SolveReport {
        report_version: REPORT_VERSION,
        n: inst.n(),
        root: inst.root(),
        mode: "primal-dual".to_string(),
        alpha: constants().alpha,
        lp: Some(lp_summary(&relax.solution)),
        sweep: None,
        primal_dual: Some(PdSummary {
            objective: pd_tour.objective(),
            cost: pd_tour.cost(),
            tour: pd_tour.vertices().to_vec(),
        }),
        randomized: None,
        scaled_penalty_certificate: None,
        h: pd_tour.objective(),
        winner: "primal-dual".to_string(),
        ratio_lp: Some(ratio_convention(pd_tour.objective(), relax.solution.value)),
        certified: true,
        tour: pd_tour.vertices().to_vec(),
        tour_cost: pd_tour.cost(),
        exact: None,
    };
    Ok(SolveArtifacts {
        report,
        lp: Some(relax),
        pd_record: Some(pd_record),
    })
}

/// Attaches the flag-gated stronger penalty-side certificate, which needs a
/// second LP solve with the scaled penalties. The certificate is evaluated
/// on the primal-dual tour and must pass.
pub fn attach_scaled_penalty_certificate(inst: &MetricInstance, artifacts: &mut SolveArtifacts) -> Result<()> {
    let Some(pd) = artifacts.report.primal_dual.clone() else {
        return Err(Error::InvalidArgument(
            "the penalty-side certificate needs a primal-dual run".into(),
        ));
    };
    let scaled = scale_penalties(inst)?;
    let lp_scaled = solve_relaxation_rounds(inst, &scaled.values, DEFAULT_MAX_ROUNDS)?;
    let tour = Tour::new(inst, pd.tour)?;
    let check = scaled_penalty_certificate(inst, &tour, lp_scaled.solution.value);
    artifacts.report.scaled_penalty_certificate = Some(ScaledPenaltySummary {
        scaled_lp_value: lp_scaled.solution.value,
        check,
    });
    if !check.pass {
        return Err(Error::Certification {
            name: "scaled-penalty-guarantee",
            lhs: check.lhs,
            rhs: check.rhs,
            tol: 1e-6,
        });
    }
    Ok(())
}

/// Attaches the exact optimum (Held–Karp) to a report.
pub fn attach_exact(inst: &MetricInstance, report: &mut SolveReport) -> Result<()> {
    if inst.n() > HELD_KARP_CAP {
        return Err(Error::InvalidArgument(format!(
            "exact comparison capped at n <= {HELD_KARP_CAP}"
        )));
    }
    let res = exact_pctsp(inst)?;
    report.exact = Some(ExactSummary {
        ratio_h_opt: ratio_convention(report.h, res.objective),
        objective: res.objective,
        visited: res.visited,
        tour: res.tour,
    });
    Ok(())
}

/// Exact-mode report envelope.
pub fn solve_exact_report(inst: &MetricInstance) -> Result<SolveReport> {
    let res = exact_pctsp(inst)?;
    let tour = Tour::new(inst, res.tour.clone())?;
    Ok(SolveReport {
        report_version: REPORT_VERSION,
        n: inst.n(),
        root: inst.root(),
        mode: "exact".to_string(),
        alpha: constants().alpha,
        lp: None,
        sweep: None,
        primal_dual: None,
        randomized: None,
        scaled_penalty_certificate: None,
        h: res.objective,
        winner: "exact".to_string(),
        ratio_lp: None,
        certified: true,
        tour: res.tour.clone(),
        tour_cost: tour.cost(),
        exact: Some(ExactSummary {
            objective: res.objective,
            visited: res.visited,
            tour: res.tour,
            ratio_h_opt: 1.0,
        }),
    })
}

/// One randomized run: per-trial objectives and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedRun {
    pub objectives: Vec<f64>,
    pub mean: f64,
}

impl RandomizedRun {
    pub fn std_error(&self) -> f64 {
        let k = self.objectives.len();
        if k < 2 {
            return 0.0;
        }
        let var: f64 = self
            .objectives
            .iter()
            .map(|o| (o - self.mean).powi(2))
            .sum::<f64>()
            / (k as f64 - 1.0);
        (var / k as f64).sqrt()
    }
}

/// The randomized variant with an explicit mixing probability: each trial
/// takes the primal-dual tour with probability `pd_probability`, otherwise
/// rounds at a threshold drawn uniformly from `[e^{-1/3}, 1]`. Trials are
/// reproducible: trial `i` uses stream `i` of the seeded generator.
pub fn solve_randomized_with_probability(
    inst: &MetricInstance,
    seed: u64,
    trials: usize,
    pd_probability: f64,
) -> Result<RandomizedRun> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if inst.n() <= 2 {
        // The relaxation is undefined here; enumeration stands in for both
        // branches, so every trial returns the optimum.
        let opt = exact_pctsp(inst)?.objective;
        return Ok(RandomizedRun {
            objectives: vec![opt; trials],
            mean: opt,
        });
    }
    let consts = constants();
    let relax = solve_relaxation_rounds(inst, inst.penalties(), DEFAULT_MAX_ROUNDS)?;
    let lp = &relax.solution;
    let (pd_tour, _, _) = primal_dual_tour_detailed(inst, lp)?;
    let pd_obj = pd_tour.objective();

    // Distinct thresholds realize at most n different sets; cache tours by
    // member mask.
    let mut cache: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let mut objectives = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let coin: f64 = rng.gen();
        if coin < pd_probability {
            objectives.push(pd_obj);
            continue;
        }
        let gamma = consts.a + (1.0 - consts.a) * rng.gen::<f64>();
        let set = threshold_set(&lp.y, gamma)?;
        let mask = set.members.iter().fold(0u64, |m, &v| m | (1u64 << v));
        let objective = match cache.get(&mask) {
            Some(&o) => o,
            None => {
                let tour = christofides(inst, &set.members)?;
                cache.insert(mask, tour.objective());
                tour.objective()
            }
        };
        objectives.push(objective);
    }
    let mean = objectives.iter().sum::<f64>() / trials as f64;
    Ok(RandomizedRun { objectives, mean })
}

/// The standard-mix randomized variant (primal-dual with probability `p`).
pub fn solve_randomized(inst: &MetricInstance, seed: u64, trials: usize) -> Result<RandomizedRun> {
    solve_randomized_with_probability(inst, seed, trials, constants().p)
}

/// Randomized-mode report envelope.
pub fn solve_randomized_report(
    inst: &MetricInstance,
    seed: u64,
    trials: usize,
) -> Result<SolveReport> {
    let run = solve_randomized(inst, seed, trials)?;
    let min = run.objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let max = run
        .objectives
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let lp = if inst.n() > 2 {
        Some(solve_relaxation_rounds(inst, inst.penalties(), DEFAULT_MAX_ROUNDS)?.solution)
    } else {
        None
    };
    Ok(SolveReport {
        report_version: REPORT_VERSION,
        n: inst.n(),
        root: inst.root(),
        mode: "randomized".to_string(),
        alpha: constants().alpha,
        lp: lp.as_ref().map(lp_summary),
        sweep: None,
        primal_dual: None,
        randomized: Some(RandomizedSummary {
            seed,
            trials,
            mean: run.mean,
            min,
            max,
            objectives: run.objectives.clone(),
        }),
        scaled_penalty_certificate: None,
        h: min,
        winner: "randomized".to_string(),
        ratio_lp: lp.as_ref().map(|s| ratio_convention(min, s.value)),
        certified: true,
        tour: Vec::new(),
        tour_cost: 0.0,
        exact: None,
    })
}
