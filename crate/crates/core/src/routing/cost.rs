use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edge latency as a function of the edge flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CostFn {
    /// Coefficients in increasing degree.
    #[serde(rename = "poly")]
    Poly(Vec<f64>),
    /// Breakpoints starting at x = 0, extended past the last one with the
    /// last slope.
    #[serde(rename = "pwl")]
    Pwl(Vec<[f64; 2]>),
}

impl CostFn {
    pub fn linear(slope: f64) -> Self {
        CostFn::Poly(vec![0.0, slope])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CostFn::Poly(c) => {
                if c.is_empty() || c.iter().any(|a| !a.is_finite() || *a < 0.0) {
                    return Err(Error::InvalidGame(
                        "polynomial costs need finite nonnegative coefficients".into(),
                    ));
                }
            }
            CostFn::Pwl(points) => {
                if points.len() < 2 || points[0][0] != 0.0 {
                    return Err(Error::InvalidGame(
                        "piecewise-linear costs need two or more points from x = 0".into(),
                    ));
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidGame(
                        "piecewise-linear cost has a non-finite point".into(),
                    ));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::InvalidGame(
                        "piecewise-linear breakpoints must increase".into(),
                    ));
                }
                if points.windows(2).any(|w| w[1][1] < w[0][1]) || points[0][1] < 0.0 {
                    return Err(Error::InvalidGame(
                        "piecewise-linear cost must be nonnegative and nondecreasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn segment(points: &[[f64; 2]], x: f64) -> usize {
        points
            .windows(2)
            .position(|w| x < w[1][0])
            .unwrap_or(points.len() - 2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CostFn::Poly(c) => c.iter().rev().fold(0.0, |acc, a| acc * x + a),
            CostFn::Pwl(p) => {
                let k = Self::segment(p, x);
                let slope = (p[k + 1][1] - p[k][1]) / (p[k + 1][0] - p[k][0]);
                p[k][1] + slope * (x - p[k][0])
            }
        }
    }

    /// Right derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            CostFn::Poly(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, a)| acc * x + a * k as f64),
            CostFn::Pwl(p) => {
                let k = Self::segment(p, x);
                (p[k + 1][1] - p[k][1]) / (p[k + 1][0] - p[k][0])
            }
        }
    }

    /// Integral from 0 to x.
    pub fn integral(&self, x: f64) -> f64 {
        match self {
            CostFn::Poly(c) => {
                c.iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (k, a)| acc * x + a / (k + 1) as f64)
                    * x
            }
            CostFn::Pwl(p) => {
                let mut total = 0.0;
                for w in p.windows(2) {
                    let (x0, x1) = (w[0][0], w[1][0]);
                    if x <= x0 {
                        break;
                    }
                    let hi = x.min(x1);
                    total += (self.eval(x0) + self.eval(hi)) / 2.0 * (hi - x0);
                }
                let last = p[p.len() - 1];
                if x > last[0] {
                    total += (last[1] + self.eval(x)) / 2.0 * (x - last[0]);
                }
                total
            }
        }
    }

    /// Marginal social cost d/dx (x c(x)).
    pub fn marginal(&self, x: f64) -> f64 {
        self.eval(x) + x * self.derivative(x)
    }

    /// Whether x c(x) is convex on [0, upto].
    pub fn total_cost_convex(&self, upto: f64) -> bool {
        match self {
            CostFn::Poly(_) => true,
            CostFn::Pwl(p) => {
                let slopes: Vec<f64> = p
                    .windows(2)
                    .filter(|w| w[0][0] < upto)
                    .map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]))
                    .collect();
                slopes.windows(2).all(|s| s[1] >= s[0] - 1e-12)
            }
        }
    }

    /// Slope when the function is `a * x`.
    pub fn linear_slope(&self) -> Option<f64> {
        match self {
            CostFn::Poly(c) => match c.as_slice() {
                [b, a, rest @ ..] if *b == 0.0 && rest.iter().all(|x| *x == 0.0) => Some(*a),
                _ => None,
            },
            CostFn::Pwl(p) => {
                let a = p[1][1] / p[1][0];
                (p[0][1] == 0.0 && p.iter().all(|q| (q[1] - a * q[0]).abs() <= 1e-12)).then_some(a)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_calculus() {
        let c = CostFn::Poly(vec![1.0, 0.0, 3.0]);
        assert_eq!(c.eval(2.0), 13.0);
        assert_eq!(c.derivative(2.0), 12.0);
        assert!((c.integral(2.0) - 10.0).abs() < 1e-12);
        assert_eq!(c.marginal(1.0), 4.0 + 6.0);
        assert_eq!(CostFn::linear(2.0).linear_slope(), Some(2.0));
        assert_eq!(c.linear_slope(), None);
    }

    #[test]
    fn piecewise_linear_calculus() {
        let c = CostFn::Pwl(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 3.0]]);
        assert_eq!(c.eval(0.5), 0.5);
        assert_eq!(c.eval(1.5), 2.0);
        assert_eq!(c.eval(3.0), 5.0);
        assert_eq!(c.derivative(1.0), 2.0);
        assert!((c.integral(2.0) - (0.5 + 2.0)).abs() < 1e-12);
        assert!((c.integral(3.0) - (0.5 + 2.0 + 4.0)).abs() < 1e-12);
        assert!(c.total_cost_convex(3.0));
        let concave = CostFn::Pwl(vec![[0.0, 0.0], [1.0, 2.0], [2.0, 3.0]]);
        assert!(!concave.total_cost_convex(2.0));
        assert!(concave.validate().is_ok());
    }

    #[test]
    fn rejects_bad_costs() {
        assert!(CostFn::Poly(vec![1.0, -1.0]).validate().is_err());
        assert!(CostFn::Pwl(vec![[0.0, 2.0], [1.0, 1.0]])
            .validate()
            .is_err());
        assert!(CostFn::Pwl(vec![[1.0, 0.0], [2.0, 1.0]])
            .validate()
            .is_err());
    }

    #[test]
    fn serde_layout() {
        let c: CostFn = serde_json::from_str(r#"{"poly": [0, 1]}"#).unwrap();
        assert_eq!(c, CostFn::linear(1.0));
        let p: CostFn = serde_json::from_str(r#"{"pwl": [[0, 0], [1, 2]]}"#).unwrap();
        assert_eq!(p.eval(0.5), 1.0);
    }
}
