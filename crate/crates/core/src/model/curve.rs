use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Continuous, non-decreasing curve given by breakpoints and linear interpolation.
///
/// The first breakpoint sits at `x = 0`. Outside the breakpoint range the curve
/// is extended flat.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseLinearCurve<S> {
    points: Vec<(S, S)>,
}

impl<S: Scalar> PiecewiseLinearCurve<S> {
    pub fn new(points: Vec<(S, S)>) -> Result<Self> {
        let Some(&(x0, y0)) = points.first() else {
            return Err(Error::invalid("curve needs at least one breakpoint"));
        };
        if x0 != S::zero() {
            return Err(Error::invalid(format!("first breakpoint must be at x = 0, got {x0}")));
        }
        if !(y0.is_finite() && y0 >= S::zero()) {
            return Err(Error::invalid(format!("curve must start at a finite y >= 0, got {y0}")));
        }
        for w in points.windows(2) {
            let ((xa, ya), (xb, yb)) = (w[0], w[1]);
            if !(xb > xa) || !xb.is_finite() {
                return Err(Error::invalid(format!("breakpoint x must be strictly increasing ({xa} then {xb})")));
            }
            if !(yb >= ya) || !yb.is_finite() {
                return Err(Error::invalid(format!("breakpoint y must be non-decreasing ({ya} then {yb})")));
            }
        }
        Ok(Self { points })
    }

    /// `y = slope · x` on `[0, end]`.
    pub fn linear(slope: S, end: S) -> Result<Self> {
        Self::new(vec![(S::zero(), S::zero()), (end, slope * end)])
    }

    pub fn points(&self) -> &[(S, S)] {
        &self.points
    }

    pub fn xs(&self) -> impl Iterator<Item = S> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn last(&self) -> (S, S) {
        *self.points.last().expect("non-empty curve")
    }

    pub fn eval(&self, x: S) -> S {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        let (xl, yl) = self.last();
        if x >= xl {
            return yl;
        }
        match pts.binary_search_by(|p| p.0.partial_cmp(&x).expect("finite breakpoints")) {
            Ok(i) => pts[i].1,
            Err(i) => {
                let (xa, ya) = pts[i - 1];
                let (xb, yb) = pts[i];
                let w = (x - xa) / (xb - xa);
                (ya + w * (yb - ya)).min(yb)
            }
        }
    }
}
