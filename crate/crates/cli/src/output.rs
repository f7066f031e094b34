//! Aligned-text renderers. Each mirrors the JSON report field for field:
//! the same data in both, nothing extra in either.

use pctsp::combine::SolveReport;
use pctsp::verify::VerifyReport;

use crate::bench::BenchReport;

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "null".into(), |x| x.to_string())
}

fn vertex_list(vs: &[usize]) -> String {
    let inner: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

pub fn render_solve(report: &SolveReport) -> String {
    let mut out = Vec::new();
    out.push(format!("report_version: {}", report.report_version));
    out.push(format!("mode: {}", report.mode));
    out.push(format!("n: {}", report.n));
    out.push(format!("root: {}", report.root));
    out.push(format!("alpha: {}", report.alpha));
    match &report.lp {
        None => out.push("lp: null".into()),
        Some(lp) => {
            out.push(format!("lp.value: {}", lp.value));
            out.push(format!("lp.cost_part: {}", lp.cost_part));
            out.push(format!("lp.penalty_part: {}", lp.penalty_part));
            out.push(format!("lp.separation_rounds: {}", lp.separation_rounds));
            out.push(format!("lp.cuts_added: {}", lp.cuts_added));
        }
    }
    match &report.sweep {
        None => out.push("sweep: null".into()),
        Some(sweep) => {
            out.push(format!("sweep.best: {}", sweep.best));
            for (i, row) in sweep.rows.iter().enumerate() {
                out.push(format!(
                    "sweep.rows[{i}]: gamma={} set_size={} cost={} objective={} bound={} \
                     bound_ok={} tour={}",
                    row.gamma,
                    row.set_size,
                    row.cost,
                    row.objective,
                    row.bound,
                    row.bound_ok,
                    vertex_list(&row.tour)
                ));
            }
        }
    }
    match &report.primal_dual {
        None => out.push("primal_dual: null".into()),
        Some(pd) => {
            out.push(format!("primal_dual.objective: {}", pd.objective));
            out.push(format!("primal_dual.cost: {}", pd.cost));
            out.push(format!("primal_dual.tour: {}", vertex_list(&pd.tour)));
        }
    }
    match &report.randomized {
        None => out.push("randomized: null".into()),
        Some(r) => {
            out.push(format!("randomized.seed: {}", r.seed));
            out.push(format!("randomized.trials: {}", r.trials));
            out.push(format!("randomized.mean: {}", r.mean));
            out.push(format!("randomized.min: {}", r.min));
            out.push(format!("randomized.max: {}", r.max));
            let objectives: Vec<String> = r.objectives.iter().map(|o| o.to_string()).collect();
            out.push(format!("randomized.objectives: {}", objectives.join(" ")));
        }
    }
    match &report.scaled_penalty_certificate {
        None => out.push("scaled_penalty_certificate: null".into()),
        Some(cert) => {
            out.push(format!(
                "scaled_penalty_certificate.scaled_lp_value: {}",
                cert.scaled_lp_value
            ));
            out.push(format!("scaled_penalty_certificate.factor: {}", cert.check.factor));
            out.push(format!("scaled_penalty_certificate.lhs: {}", cert.check.lhs));
            out.push(format!("scaled_penalty_certificate.rhs: {}", cert.check.rhs));
            out.push(format!("scaled_penalty_certificate.slack: {}", cert.check.slack));
            out.push(format!("scaled_penalty_certificate.pass: {}", cert.check.pass));
        }
    }
    out.push(format!("h: {}", report.h));
    out.push(format!("winner: {}", report.winner));
    out.push(format!("ratio_lp: {}", opt_num(report.ratio_lp)));
    out.push(format!("certified: {}", report.certified));
    out.push(format!("tour: {}", vertex_list(&report.tour)));
    out.push(format!("tour_cost: {}", report.tour_cost));
    match &report.exact {
        None => out.push("exact: null".into()),
        Some(e) => {
            out.push(format!("exact.objective: {}", e.objective));
            out.push(format!("exact.visited: {}", vertex_list(&e.visited)));
            out.push(format!("exact.tour: {}", vertex_list(&e.tour)));
            out.push(format!("exact.ratio_h_opt: {}", e.ratio_h_opt));
        }
    }
    out.join("\n")
}

pub fn render_verify(report: &VerifyReport) -> String {
    let mut out = Vec::new();
    out.push(format!("report_version: {}", report.report_version));
    out.push(format!("n: {}", report.n));
    out.push(format!("root: {}", report.root));
    out.push(format!("h: {}", report.h));
    out.push(format!("opt: {}", report.opt));
    out.push(format!("lp_value: {}", opt_num(report.lp_value)));
    out.push(format!(
        "scaled_lp_value: {}",
        opt_num(report.scaled_lp_value)
    ));
    out.push(format!("ratio_h_opt: {}", report.ratio_h_opt));
    out.push(format!("pass: {}", report.pass));
    let name_width = report
        .checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(0);
    for check in &report.checks {
        out.push(format!(
            "check {:<name_width$}  lhs={:<22} rhs={:<22} tol={:<8} slack={:<22} pass={}",
            check.name, check.lhs, check.rhs, check.tol, check.slack, check.pass
        ));
    }
    out.join("\n")
}

pub fn render_bench(report: &BenchReport) -> String {
    let mut out = Vec::new();
    out.push(format!("report_version: {}", report.report_version));
    out.push(format!("seed: {}", report.seed));
    out.push(format!("count: {}", report.count));
    out.push(format!("penalty_scale: {}", report.penalty_scale));
    out.push(format!("n_from: {}", report.n_from));
    out.push(format!("n_to: {}", report.n_to));
    out.push(format!("max_ratio_h_lp: {}", report.max_ratio_h_lp));
    out.push(format!(
        "max_ratio_h_opt: {}",
        opt_num(report.max_ratio_h_opt)
    ));
    out.push(format!("ratio_bound: {}", report.ratio_bound));
    out.push(format!("bound_ok: {}", report.bound_ok));
    out.push(format!(
        "{:>3} {:>5} {:>20} {:>20} {:>20} {:>20} {:>20} {:>20} {:>10} {:>7}",
        "n",
        "inst",
        "mean_h_lp",
        "max_h_lp",
        "mean_h_opt",
        "max_h_opt",
        "mean_opt_lp",
        "max_opt_lp",
        "sweep_wins",
        "pd_wins"
    ));
    for row in &report.rows {
        out.push(format!(
            "{:>3} {:>5} {:>20} {:>20} {:>20} {:>20} {:>20} {:>20} {:>10} {:>7}",
            row.n,
            row.instances,
            row.mean_ratio_h_lp,
            row.max_ratio_h_lp,
            opt_num(row.mean_ratio_h_opt),
            opt_num(row.max_ratio_h_opt),
            opt_num(row.mean_ratio_opt_lp),
            opt_num(row.max_ratio_opt_lp),
            row.sweep_wins,
            row.pd_wins
        ));
    }
    out.join("\n")
}
