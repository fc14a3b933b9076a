use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{tv_distance, Measure};

/// How the states of a [`Trajectory`] were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Rk4,
    CrossoverExpansion,
}

/// States of a flow on an increasing time grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Measure>,
    method: Method,
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    times: &'a [f64],
    states: Vec<&'a [f64]>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Measure>, method: Method) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::domain(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("trajectory times must start at 0 and increase strictly"));
        }
        if states.iter().any(|s| !s.same_layout(&states[0])) {
            return Err(Error::domain("trajectory states live on different spaces"));
        }
        Ok(Self { times, states, method })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Measure] {
        &self.states
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn initial(&self) -> &Measure {
        &self.states[0]
    }

    pub fn last(&self) -> &Measure {
        self.states.last().expect("trajectories are nonempty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|ω_t(X) - ω_0(X)|` over the stored states.
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.states[0].mass();
        self.states.iter().map(|s| (s.mass() - m0).abs()).fold(0.0, f64::max)
    }

    /// Smallest weight over all stored states.
    pub fn min_weight(&self) -> f64 {
        self.states
            .iter()
            .map(Measure::min_weight)
            .fold(f64::INFINITY, f64::min)
    }

    /// Total-variation gap per grid point against another trajectory on the
    /// same grid.
    pub fn gaps(&self, other: &Trajectory) -> Result<Vec<f64>> {
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return Err(Error::domain("trajectories are on different time grids"));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| tv_distance(a, b))
            .collect())
    }

    /// CSV with header `t,0,1,..` and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let n = self.states[0].weights().len();
        let mut out = String::from("t");
        for i in 0..n {
            write!(out, ",{i}").unwrap();
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(out, "{t:.16e}").unwrap();
            for w in s.weights() {
                write!(out, ",{w:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// `{"times": [..], "states": [[..], ..]}` with shortest round-trip floats.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&TrajectoryJson {
            times: &self.times,
            states: self.states.iter().map(Measure::weights).collect(),
        })
        .expect("finite floats serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::ProductSpace;

    fn traj() -> Trajectory {
        let s = ProductSpace::new(vec![2]).unwrap();
        Trajectory::new(
            vec![0.0, 0.5],
            vec![
                Measure::new(s.clone(), vec![0.25, 0.75]).unwrap(),
                Measure::new(s, vec![0.5, 0.5]).unwrap(),
            ],
            Method::Rk4,
        )
        .unwrap()
    }

    #[test]
    fn csv_layout() {
        let csv = traj().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,0,1");
        assert_eq!(
            lines[1],
            "0.0000000000000000e0,2.5000000000000000e-1,7.5000000000000000e-1"
        );
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn json_layout() {
        assert_eq!(
            traj().to_json(),
            r#"{"times":[0.0,0.5],"states":[[0.25,0.75],[0.5,0.5]]}"#
        );
    }

    #[test]
    fn validation() {
        let s = ProductSpace::new(vec![2]).unwrap();
        let m = Measure::new(s, vec![0.5, 0.5]).unwrap();
        assert!(Trajectory::new(vec![0.1], vec![m.clone()], Method::Rk4).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![m.clone(), m.clone()], Method::Rk4).is_err());
        assert!(Trajectory::new(vec![0.0], vec![], Method::Rk4).is_err());
        let t = traj();
        assert_eq!(t.max_mass_drift(), 0.0);
        assert_eq!(t.min_weight(), 0.25);
        assert_eq!(t.gaps(&t).unwrap(), vec![0.0, 0.0]);
    }
}
