//! Scenario documents and their evaluation.
//!
//! A scenario is one JSON object:
//!
//! ```json
//! {
//!   "sizes": [2, 3, 2],
//!   "initial": {"random": 7},
//!   "rates": {"disjoint_stretch": [{"links": [0], "rate": 1.0}]},
//!   "time": {"t_end": 5.0, "stride": 0.5},
//!   "solver": "both",
//!   "h": 0.001
//! }
//! ```
//!
//! `initial` is `{"weights": [..]}` or `{"random": seed}`. `rates` is one of
//! `general` and `disjoint_stretch` (lists of `{links, rate}`), `crossover`
//! (one rate per link) or `cyclic` (`{links, permutation, order, rate}`).

use recoflow_core::dynamics::{
    crossover_trajectory, integrate_rk4, product_flow_trajectory, rk4_on_grid, LinkRates, Method, RateMap, Trajectory,
};
use recoflow_core::generalized::generalized_flow_apply;
use recoflow_core::measure::{random_probability, require_positive};
use recoflow_core::recombinator::POSITIVITY_TOL;
use recoflow_core::{CyclicOperator, DisjointStretchSystem, LinkSet, Measure, ProductSpace};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Closed form vs RK4 gap allowed in `both` mode, before tolerance scaling.
pub const BOTH_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub sizes: Vec<usize>,
    pub initial: Initial,
    pub rates: RateSpec,
    pub time: TimeGrid,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_h() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    Weights(Vec<f64>),
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub links: Vec<usize>,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclicSpec {
    pub links: Vec<usize>,
    pub permutation: Vec<usize>,
    pub order: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    General(Vec<Component>),
    DisjointStretch(Vec<Component>),
    Crossover(Vec<f64>),
    Cyclic(CyclicSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub stride: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    ClosedForm,
    Rk4,
    Both,
}

impl Scenario {
    /// Parses a scenario; errors carry serde's line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Validates the scenario and builds everything needed to evaluate it.
    /// `seed` replaces the seed of a random initial measure.
    pub fn prepare(&self, seed: Option<u64>) -> Result<Prepared, CliError> {
        let space = ProductSpace::new(self.sizes.clone()).map_err(CliError::invalid)?;
        let initial = match &self.initial {
            Initial::Weights(w) => {
                let m = Measure::new(space.clone(), w.clone()).map_err(CliError::invalid)?;
                require_positive(&m, POSITIVITY_TOL).map_err(CliError::invalid)?;
                m
            }
            Initial::Random(s) => random_probability(&space, seed.unwrap_or(*s)),
        };
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(CliError::Validation(format!("step h = {} must be positive", self.h)));
        }
        let grid = output_grid(self.time.t_end, self.time.stride)?;
        let n = space.n_links();
        let closed_needed = self.solver != Solver::Rk4;
        let dynamics = match &self.rates {
            RateSpec::General(comps) => {
                let map = RateMap::new(n, link_sets(n, comps)?).map_err(CliError::invalid)?;
                let system = match map.to_disjoint_stretch_system() {
                    Ok(s) => Some(s),
                    Err(e) if closed_needed => {
                        return Err(CliError::Validation(format!("no closed form for these rates: {e}")))
                    }
                    Err(_) => None,
                };
                Dynamics::Map { map, system }
            }
            RateSpec::DisjointStretch(comps) => {
                let system = DisjointStretchSystem::new(n, link_sets(n, comps)?).map_err(CliError::invalid)?;
                Dynamics::Map {
                    map: system.rate_map(),
                    system: Some(system),
                }
            }
            RateSpec::Crossover(rates) => {
                let rates = LinkRates::new(rates.clone()).map_err(CliError::invalid)?;
                if rates.n_links() != n {
                    return Err(CliError::Validation(format!(
                        "{} crossover rates for {n} links",
                        rates.n_links()
                    )));
                }
                Dynamics::Crossover(rates)
            }
            RateSpec::Cyclic(spec) => {
                let links = LinkSet::from_links(n, &spec.links).map_err(CliError::invalid)?;
                let op = CyclicOperator::new(&space, links, spec.permutation.clone(), spec.order)
                    .map_err(CliError::invalid)?;
                if !(spec.rate.is_finite() && spec.rate >= 0.0) {
                    return Err(CliError::Validation(format!("rate {} must be nonnegative", spec.rate)));
                }
                Dynamics::Cyclic { op, rate: spec.rate }
            }
        };
        Ok(Prepared {
            initial,
            dynamics,
            grid,
            solver: self.solver,
            h: self.h,
        })
    }
}

fn link_sets(n: usize, comps: &[Component]) -> Result<Vec<(LinkSet, f64)>, CliError> {
    comps
        .iter()
        .map(|c| Ok((LinkSet::from_links(n, &c.links).map_err(CliError::invalid)?, c.rate)))
        .collect()
}

/// `0, stride, 2·stride, .., t_end`, the last spacing possibly shorter.
pub fn output_grid(t_end: f64, stride: f64) -> Result<Vec<f64>, CliError> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(CliError::Validation(format!(
            "t_end = {t_end} must be finite and nonnegative"
        )));
    }
    if !(stride.is_finite() && stride > 0.0) {
        return Err(CliError::Validation(format!("stride = {stride} must be positive")));
    }
    let full = (t_end / stride + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=full).map(|j| (j as f64 * stride).min(t_end)).collect();
    if t_end - grid[full] > 1e-12 * stride {
        grid.push(t_end);
    }
    grid.dedup();
    Ok(grid)
}

#[derive(Clone, Debug)]
enum Dynamics {
    Map {
        map: RateMap,
        system: Option<DisjointStretchSystem>,
    },
    Crossover(LinkRates),
    Cyclic {
        op: CyclicOperator,
        rate: f64,
    },
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Prepared {
    initial: Measure,
    dynamics: Dynamics,
    grid: Vec<f64>,
    solver: Solver,
    h: f64,
}

/// Per-grid-point gaps between the closed form and RK4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub times: Vec<f64>,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub closed_form: Option<Trajectory>,
    pub rk4: Option<Trajectory>,
    pub comparison: Option<Comparison>,
}

impl RunOutput {
    /// The trajectory written to the main output.
    pub fn primary(&self) -> &Trajectory {
        self.closed_form
            .as_ref()
            .or(self.rk4.as_ref())
            .expect("a run produces a trajectory")
    }
}

impl Prepared {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    fn closed_form(&self) -> Result<Trajectory, CliError> {
        let w = &self.initial;
        let out = match &self.dynamics {
            Dynamics::Map { system: Some(s), .. } => product_flow_trajectory(w, s, &self.grid),
            Dynamics::Map { system: None, .. } => unreachable!("checked in prepare"),
            Dynamics::Crossover(rates) => crossover_trajectory(w, rates, &self.grid),
            Dynamics::Cyclic { op, rate } => self
                .grid
                .iter()
                .map(|&t| generalized_flow_apply(w, op, *rate, t))
                .collect::<Result<Vec<_>, _>>()
                .and_then(|states| Trajectory::new(self.grid.clone(), states, Method::ClosedForm)),
        };
        out.map_err(CliError::invalid)
    }

    fn rk4(&self) -> Result<Trajectory, CliError> {
        let w = &self.initial;
        let out = match &self.dynamics {
            Dynamics::Map { map, .. } => rk4_on_grid(w, map, &self.grid, self.h),
            Dynamics::Crossover(rates) => rk4_on_grid(w, &rates.singleton_system().rate_map(), &self.grid, self.h),
            Dynamics::Cyclic { op, rate } => {
                integrate_rk4(w, |x| op.apply(x).lincomb(*rate, x, -*rate), &self.grid, self.h)
            }
        };
        out.map_err(CliError::invalid)
    }

    /// Evaluates the requested solvers. In `both` mode the comparison is
    /// returned even when it fails; the caller decides the exit status.
    pub fn run(&self, tolerance_scale: f64) -> Result<RunOutput, CliError> {
        let closed_form = match self.solver {
            Solver::Rk4 => None,
            _ => Some(self.closed_form()?),
        };
        let rk4 = match self.solver {
            Solver::ClosedForm => None,
            _ => Some(self.rk4()?),
        };
        let comparison = match (&closed_form, &rk4) {
            (Some(a), Some(b)) => {
                let gaps = a.gaps(b).map_err(CliError::invalid)?;
                let max_gap = gaps.iter().copied().fold(0.0, f64::max);
                let tolerance = BOTH_TOLERANCE * tolerance_scale;
                Some(Comparison {
                    times: self.grid.clone(),
                    passed: max_gap <= tolerance,
                    gaps,
                    max_gap,
                    tolerance,
                })
            }
            _ => None,
        };
        Ok(RunOutput {
            closed_form,
            rk4,
            comparison,
        })
    }
}
