//! Penalty-scaled primal-dual moat growing, pruning, and the doubled-tree
//! tour with its runtime guarantee certificates.
//!
//! Every non-root vertex starts as an active singleton component with
//! growth budget `pi'(v)/2`; active components grow dual values at unit
//! rate. An edge between two components going tight merges them (the union
//! is active iff it excludes the root); a component exhausting its budget
//! deactivates and is labeled. After growth stops, labeled components that
//! hang off the root tree by a single edge are pruned, and the remaining
//! tree is doubled, walked, and shortcut into a closed walk.
//!
//! Simultaneous events resolve deterministically: edge events before
//! deactivations, equal-time edge events by lexicographic endpoint pair,
//! equal-time deactivations by lowest member vertex. Event times coalesce
//! within 1e-9.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{MetricInstance, Tour};
use crate::lp::FractionalSolution;
use crate::tour::euler_shortcut;

const TIME_COALESCE: f64 = 1e-9;
const PACK_TOL: f64 = 1e-6;

/// Penalties divided by `2 - 1/(n-1)`, the factor that trades tour cost
/// against the stronger penalty guarantee of the growth process.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPenalties {
    pub values: Vec<f64>,
    /// The divisor `2 - 1/(n-1)`.
    pub divisor: f64,
}

pub fn scale_penalties(inst: &MetricInstance) -> Result<ScaledPenalties> {
    let n = inst.n();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "penalty scaling needs n >= 2".into(),
        ));
    }
    let divisor = 2.0 - 1.0 / (n as f64 - 1.0);
    Ok(ScaledPenalties {
        values: inst.penalties().iter().map(|p| p / divisor).collect(),
        divisor,
    })
}

/// A grown dual set: its members and accumulated dual value.
#[derive(Debug, Clone, PartialEq)]
pub struct Moat {
    pub members: Vec<usize>,
    pub dual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum MoatEvent {
    Merge {
        time: f64,
        edge: (usize, usize),
        left: Vec<usize>,
        right: Vec<usize>,
    },
    Deactivate { time: f64, members: Vec<usize> },
}

impl MoatEvent {
    pub fn time(&self) -> f64 {
        match self {
            MoatEvent::Merge { time, .. } | MoatEvent::Deactivate { time, .. } => *time,
        }
    }
}

/// The dual solution produced by moat growing: the laminar family of grown
/// sets, the deactivation labels, the time-ordered event log, and the
/// per-vertex growth budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct MoatRecord {
    pub family: Vec<Moat>,
    pub deactivated: Vec<Vec<usize>>,
    pub events: Vec<MoatEvent>,
    pub budgets: Vec<f64>,
}

impl MoatRecord {
    /// Re-checks dual feasibility from scratch: the family is laminar, no
    /// edge is overpaid, and every deactivated component packs its dual
    /// exactly against its budget.
    pub fn check(&self, inst: &MetricInstance) -> Result<()> {
        let masks: Vec<u64> = self.family.iter().map(|m| mask_of(&m.members)).collect();
        for (i, &a) in masks.iter().enumerate() {
            for &b in masks.iter().skip(i + 1) {
                let both = a & b;
                if both != 0 && both != a && both != b {
                    return Err(Error::Certification {
                        name: "moat-laminarity",
                        lhs: 1.0,
                        rhs: 0.0,
                        tol: 0.0,
                    });
                }
            }
        }
        let n = inst.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut load = 0.0;
                for (moat, &mask) in self.family.iter().zip(&masks) {
                    if ((mask >> i) & 1) != ((mask >> j) & 1) {
                        load += moat.dual;
                    }
                }
                if load > inst.dist(i, j) + PACK_TOL {
                    return Err(Error::Certification {
                        name: "moat-edge-packing",
                        lhs: load,
                        rhs: inst.dist(i, j),
                        tol: PACK_TOL,
                    });
                }
            }
        }
        for label in &self.deactivated {
            let lmask = mask_of(label);
            let inside: f64 = self
                .family
                .iter()
                .zip(&masks)
                .filter(|&(_, &mask)| mask & !lmask == 0)
                .map(|(moat, _)| moat.dual)
                .sum();
            let budget: f64 = label.iter().map(|&v| self.budgets[v]).sum();
            if (inside - budget).abs() > PACK_TOL {
                return Err(Error::Certification {
                    name: "moat-penalty-packing",
                    lhs: inside,
                    rhs: budget,
                    tol: PACK_TOL,
                });
            }
        }
        Ok(())
    }
}

fn mask_of(members: &[usize]) -> u64 {
    members.iter().fold(0u64, |m, &v| m | (1u64 << v))
}

fn members_of(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask & (1 << v) != 0).collect()
}

#[derive(Debug, Clone)]
struct Component {
    mask: u64,
    active: bool,
    alive: bool,
    /// Dual accumulated by this set itself.
    own: f64,
    /// Dual accumulated by all sets inside (this one and its history).
    inside: f64,
    budget: f64,
}

/// Grows moats until no component is active. Returns the merge edges
/// restricted to the final root component (a spanning tree of it) and the
/// full dual record.
pub fn moat_growing(inst: &MetricInstance, scaled: &ScaledPenalties) -> (Vec<(usize, usize)>, MoatRecord) {
    let n = inst.n();
    assert!(n <= 64, "moat growing uses 64-bit member masks");
    assert_eq!(scaled.values.len(), n);
    let root = inst.root();
    let budgets: Vec<f64> = (0..n)
        .map(|v| if v == root { 0.0 } else { scaled.values[v] / 2.0 })
        .collect();

    let mut comps: Vec<Component> = (0..n)
        .map(|v| Component {
            mask: 1u64 << v,
            active: v != root,
            alive: true,
            own: 0.0,
            inside: 0.0,
            budget: budgets[v],
        })
        .collect();
    let mut comp_of: Vec<usize> = (0..n).collect();
    let mut events: Vec<MoatEvent> = Vec::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut merge_edges: Vec<(usize, usize)> = Vec::new();
    let mut time = 0.0f64;

    // Dual load on an edge: every grown set that separates its endpoints.
    let load = |comps: &[Component], i: usize, j: usize| -> f64 {
        comps
            .iter()
            .map(|c| {
                if ((c.mask >> i) & 1) != ((c.mask >> j) & 1) {
                    c.own
                } else {
                    0.0
                }
            })
            .sum()
    };

    loop {
        // Earliest edge event (two passes: min time, then lexicographic
        // tie-break within the coalescing window).
        let mut edge_time = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (comp_of[i], comp_of[j]);
                if a == b {
                    continue;
                }
                let rate = comps[a].active as u8 + comps[b].active as u8;
                if rate == 0 {
                    continue;
                }
                let remaining = (inst.dist(i, j) - load(&comps, i, j)).max(0.0);
                edge_time = edge_time.min(time + remaining / f64::from(rate));
            }
        }
        let mut edge_pick: Option<(usize, usize)> = None;
        if edge_time.is_finite() {
            'outer: for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = (comp_of[i], comp_of[j]);
                    if a == b {
                        continue;
                    }
                    let rate = comps[a].active as u8 + comps[b].active as u8;
                    if rate == 0 {
                        continue;
                    }
                    let remaining = (inst.dist(i, j) - load(&comps, i, j)).max(0.0);
                    let t = time + remaining / f64::from(rate);
                    if t <= edge_time + TIME_COALESCE {
                        edge_pick = Some((i, j));
                        break 'outer;
                    }
                }
            }
        }

        let mut deact_time = f64::INFINITY;
        let mut deact_pick: Option<usize> = None;
        for (id, comp) in comps.iter().enumerate() {
            if !comp.alive || !comp.active {
                continue;
            }
            let t = time + (comp.budget - comp.inside).max(0.0);
            if t < deact_time - TIME_COALESCE {
                deact_time = t;
                deact_pick = Some(id);
            } else if t <= deact_time + TIME_COALESCE {
                // Lowest member vertex wins the tie.
                let cur = deact_pick.expect("a pick exists inside the window");
                if comp.mask.trailing_zeros() < comps[cur].mask.trailing_zeros() {
                    deact_pick = Some(id);
                }
                deact_time = deact_time.min(t);
            }
        }

        // Halt when nothing can happen; edge events outrank deactivations
        // inside the coalescing window.
        let take_edge = match (edge_pick, deact_pick) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(_), Some(_)) => edge_time <= deact_time + TIME_COALESCE,
        };
        let event_time = if take_edge { edge_time } else { deact_time };
        let dt = (event_time - time).max(0.0);
        for comp in comps.iter_mut() {
            if comp.alive && comp.active {
                comp.own += dt;
                comp.inside += dt;
            }
        }
        time = event_time;

        if take_edge {
            let (i, j) = edge_pick.unwrap();
            let (a, b) = (comp_of[i], comp_of[j]);
            let union = Component {
                mask: comps[a].mask | comps[b].mask,
                active: (comps[a].mask | comps[b].mask) & (1 << root) == 0,
                alive: true,
                own: 0.0,
                inside: comps[a].inside + comps[b].inside,
                budget: comps[a].budget + comps[b].budget,
            };
            events.push(MoatEvent::Merge {
                time,
                edge: (i, j),
                left: members_of(comps[a].mask, n),
                right: members_of(comps[b].mask, n),
            });
            comps[a].alive = false;
            comps[b].alive = false;
            let id = comps.len();
            for v in members_of(union.mask, n) {
                comp_of[v] = id;
            }
            comps.push(union);
            merge_edges.push((i.min(j), i.max(j)));
        } else {
            let id = deact_pick.unwrap();
            comps[id].active = false;
            labels.push(comps[id].mask);
            events.push(MoatEvent::Deactivate {
                time,
                members: members_of(comps[id].mask, n),
            });
        }
    }

    let root_mask = comps[comp_of[root]].mask;
    let tree: Vec<(usize, usize)> = merge_edges
        .into_iter()
        .filter(|&(u, _)| root_mask & (1 << u) != 0)
        .collect();

    let family: Vec<Moat> = comps
        .iter()
        .filter(|c| c.mask & (1 << root) == 0)
        .map(|c| Moat {
            members: members_of(c.mask, n),
            dual: c.own,
        })
        .collect();
    let record = MoatRecord {
        family,
        deactivated: labels.iter().map(|&m| members_of(m, n)).collect(),
        events,
        budgets,
    };
    (tree, record)
}

/// Removes deactivated components hanging off the tree by exactly one edge,
/// repeating until fixpoint. Labels never contain the root, so the root
/// always survives.
pub fn prune(tree: &[(usize, usize)], record: &MoatRecord) -> Vec<(usize, usize)> {
    let mut edges = tree.to_vec();
    let labels: Vec<u64> = record.deactivated.iter().map(|l| mask_of(l)).collect();
    loop {
        let tree_mask = edges
            .iter()
            .fold(0u64, |m, &(u, v)| m | (1u64 << u) | (1u64 << v));
        let mut removed = false;
        for &label in &labels {
            if label == 0 || label & !tree_mask != 0 {
                continue;
            }
            let crossing = edges
                .iter()
                .filter(|&&(u, v)| (label >> u & 1) != (label >> v & 1))
                .count();
            if crossing == 1 {
                edges.retain(|&(u, v)| (label >> u & 1) == 0 && (label >> v & 1) == 0);
                removed = true;
                break;
            }
        }
        if !removed {
            return edges;
        }
    }
}

/// The primal-dual tour: grow moats on the scaled penalties, prune, double
/// the tree, and shortcut the Euler walk. Checks the dual-feasibility
/// invariants and the cost guarantee
/// `c(T) + pi(skipped) <= 2 c(x*) + pi(1 - y*)` on every run.
pub fn primal_dual_tour(inst: &MetricInstance, lp_sol: &FractionalSolution) -> Result<Tour> {
    let (tour, _, _) = primal_dual_tour_detailed(inst, lp_sol)?;
    Ok(tour)
}

/// As [`primal_dual_tour`], additionally returning the dual record and the
/// pruned tree. The dual-feasibility invariants are always checked; the
/// final guarantee certificate is also checked here, so callers that want
/// to inspect a violating run should catch the certification error.
pub fn primal_dual_tour_detailed(
    inst: &MetricInstance,
    lp_sol: &FractionalSolution,
) -> Result<(Tour, MoatRecord, Vec<(usize, usize)>)> {
    let n = inst.n();
    if n == 1 {
        let tour = Tour::new(inst, vec![inst.root()])?;
        let record = MoatRecord {
            family: Vec::new(),
            deactivated: Vec::new(),
            events: Vec::new(),
            budgets: vec![0.0],
        };
        return Ok((tour, record, Vec::new()));
    }
    let scaled = scale_penalties(inst)?;
    let (tree, record) = moat_growing(inst, &scaled);
    record.check(inst)?;
    let pruned = prune(&tree, &record);

    let doubled: Vec<(usize, usize)> = pruned
        .iter()
        .flat_map(|&e| [e, e])
        .collect();
    let order = euler_shortcut(&doubled, inst.root());
    let tour = Tour::new(inst, order)?;

    let tree_cost: f64 = pruned.iter().map(|&(u, v)| inst.dist(u, v)).sum();
    if tour.cost() > 2.0 * tree_cost + 1e-9 {
        return Err(Error::Certification {
            name: "doubled-tree-shortcut",
            lhs: tour.cost(),
            rhs: 2.0 * tree_cost,
            tol: 1e-9,
        });
    }
    let lhs = tour.objective();
    let rhs = 2.0 * lp_sol.cost_part + lp_sol.penalty_part;
    if lhs > rhs + 1e-6 {
        return Err(Error::Certification {
            name: "primal-dual-guarantee",
            lhs,
            rhs,
            tol: 1e-6,
        });
    }
    Ok((tour, record, pruned))
}

/// The stronger penalty-side certificate, evaluated with the scaled
/// penalties against the scaled-penalty LP value:
/// `c(T) + (2 - 1/(n-1)) pi'(skipped) <= (2 - 1/(n-1)) LP'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPenaltyCheck {
    pub factor: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

pub fn scaled_penalty_certificate(inst: &MetricInstance, tour: &Tour, scaled_lp_value: f64) -> ScaledPenaltyCheck {
    let n = inst.n();
    let factor = 2.0 - 1.0 / (n as f64 - 1.0);
    let scaled = scale_penalties(inst).expect("the penalty-side certificate needs n >= 2");
    let skipped: f64 = (0..n)
        .filter(|&v| !tour.visits(v))
        .map(|v| scaled.values[v])
        .sum();
    let lhs = tour.cost() + factor * skipped;
    let rhs = factor * scaled_lp_value;
    let slack = rhs - lhs;
    ScaledPenaltyCheck {
        factor,
        lhs,
        rhs,
        slack,
        pass: slack >= -1e-6,
    }
}
