//! Empirical form of `A(t) <= C B(t)` and `A(t) ≍ B(t)` claims.
//!
//! Every asymptotic statement is checked as a bounded-ratio statement over a
//! declared grid. A report always carries the achieved constants alongside the
//! boolean verdict.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// Ratios stayed finite but exceeded the threshold.
    Fail,
    /// A truncated integral moved by more than the tolerance under the x10 probe.
    DivergentTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub ratio_inf: f64,
    pub ratio_sup: f64,
    pub pass: bool,
    pub threshold: f64,
    pub two_sided: bool,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_change: Option<f64>,
    /// A limiting value extracted alongside the ratios (e.g. a convergent integral).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `lhs / rhs` with the convention `0 / 0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

impl BoundReport {
    /// Pass iff `ratio_sup <= threshold`.
    pub fn one_sided(grid: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, threshold: f64) -> Self {
        Self::build(grid, lhs, rhs, threshold, false)
    }

    /// Pass iff `ratio_sup <= threshold` and `ratio_inf >= 1 / threshold`.
    pub fn two_sided(grid: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, threshold: f64) -> Self {
        Self::build(grid, lhs, rhs, threshold, true)
    }

    fn build(
        grid: Vec<f64>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        threshold: f64,
        two_sided: bool,
    ) -> Self {
        assert_eq!(grid.len(), lhs.len());
        assert_eq!(grid.len(), rhs.len());
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (l, r) in lhs.iter().zip(&rhs) {
            let q = ratio(*l, *r);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if grid.is_empty() {
            lo = 0.0;
            hi = 0.0;
        }
        let mut pass = hi.is_finite() && hi <= threshold;
        if two_sided {
            pass &= lo >= 1.0 / threshold;
        }
        Self {
            grid,
            lhs,
            rhs,
            ratio_inf: lo,
            ratio_sup: hi,
            pass,
            threshold,
            two_sided,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            probe_change: None,
            estimate: None,
            notes: Vec::new(),
        }
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(l, r)| ratio(*l, *r))
            .collect()
    }

    /// Records the relative change seen under the x10 probe; a change above
    /// `tol` overrides the verdict with [`Verdict::DivergentTail`].
    pub fn with_probe(mut self, change: f64, tol: f64) -> Self {
        self.probe_change = Some(change);
        if !(change <= tol) {
            self.pass = false;
            self.verdict = Verdict::DivergentTail;
        }
        self
    }

    pub fn with_estimate(mut self, v: f64) -> Self {
        self.estimate = Some(v);
        self
    }

    /// Forces a failing verdict, keeping the data.
    pub fn fail(mut self, verdict: Verdict, why: impl Into<String>) -> Self {
        self.pass = false;
        self.verdict = verdict;
        self.note(why)
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// `t,lhs,rhs,ratio` table for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,lhs,rhs,ratio\n");
        for ((t, l), r) in self.grid.iter().zip(&self.lhs).zip(&self.rhs) {
            out.push_str(&format!("{t:e},{l:e},{r:e},{:e}\n", ratio(*l, *r)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_over_zero_is_zero() {
        let r = BoundReport::one_sided(vec![1.0, 2.0], vec![0.0, 0.0], vec![0.0, 0.0], 1.0);
        assert_eq!(r.ratio_sup, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn two_sided_needs_lower_bound() {
        let r = BoundReport::two_sided(vec![1.0, 2.0], vec![1.0, 1e-4], vec![1.0, 1.0], 10.0);
        assert_eq!(r.ratio_inf, 1e-4);
        assert!(!r.pass);
        let r = BoundReport::one_sided(vec![1.0, 2.0], vec![1.0, 1e-4], vec![1.0, 1.0], 10.0);
        assert!(r.pass);
    }

    #[test]
    fn probe_marks_divergence() {
        let r = BoundReport::one_sided(vec![1.0], vec![1.0], vec![1.0], 10.0).with_probe(0.5, 0.01);
        assert_eq!(r.verdict, Verdict::DivergentTail);
        assert!(!r.pass);
        let r = BoundReport::one_sided(vec![1.0], vec![1.0], vec![0.0], 10.0);
        assert!(r.ratio_sup.is_infinite() && !r.pass);
    }
}
