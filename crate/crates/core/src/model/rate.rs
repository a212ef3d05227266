use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// AWGN rate map `r(p) = ½·log_b(1 + h·p)` and its inverse.
///
/// `gain` is the channel power gain `h`, `log_base` selects the information
/// unit (2 gives bits, `e` gives nats).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFunction<S> {
    gain: S,
    log_base: S,
}

impl<S: Scalar> RateFunction<S> {
    pub fn new(gain: S, log_base: S) -> Result<Self> {
        if !(gain.is_finite() && gain > S::zero()) {
            return Err(Error::invalid(format!("channel gain must be positive and finite, got {gain}")));
        }
        if !(log_base.is_finite() && log_base > S::zero() && log_base != S::one()) {
            return Err(Error::invalid(format!("log base must be positive and != 1, got {log_base}")));
        }
        Ok(Self { gain, log_base })
    }

    /// Base-2 rate with the given gain.
    pub fn bits(gain: S) -> Result<Self> {
        Self::new(gain, S::lit(2.0))
    }

    /// `h = 1`, base 2.
    pub fn unit() -> Self {
        Self { gain: S::one(), log_base: S::lit(2.0) }
    }

    pub fn gain(&self) -> S {
        self.gain
    }

    pub fn log_base(&self) -> S {
        self.log_base
    }

    #[inline]
    fn two_ln_base(&self) -> S {
        S::lit(2.0) * self.log_base.ln()
    }

    /// Instantaneous rate at power `power`. Non-positive power yields zero.
    #[inline]
    pub fn rate(&self, power: S) -> S {
        if power <= S::zero() {
            return S::zero();
        }
        (self.gain * power).ln_1p() / self.two_ln_base()
    }

    /// Power needed to sustain rate `rate`: `(b^{2ρ} − 1)/h`.
    #[inline]
    pub fn power_for_rate(&self, rate: S) -> S {
        if rate <= S::zero() {
            return S::zero();
        }
        (rate * self.two_ln_base()).exp_m1() / self.gain
    }

    /// `dr/dp` at `power` (clamped to zero from below).
    #[inline]
    pub fn derivative(&self, power: S) -> S {
        let p = power.max(S::zero());
        self.gain / ((S::one() + self.gain * p) * self.two_ln_base())
    }

    /// Largest slope of the rate curve, attained at zero power.
    #[inline]
    pub fn slope_at_zero(&self) -> S {
        self.gain / self.two_ln_base()
    }

    /// `dg/dρ` for the inverse map `g`.
    #[inline]
    pub fn power_for_rate_derivative(&self, rate: S) -> S {
        let k = self.two_ln_base();
        k * (rate.max(S::zero()) * k).exp() / self.gain
    }

    #[inline]
    pub fn power_for_rate_second_derivative(&self, rate: S) -> S {
        let k = self.two_ln_base();
        k * k * (rate.max(S::zero()) * k).exp() / self.gain
    }

    /// Bits delivered by spending `energy` evenly over `duration`.
    #[inline]
    pub fn bits_over(&self, energy: S, duration: S) -> S {
        if duration <= S::zero() || energy <= S::zero() {
            return S::zero();
        }
        duration * self.rate(energy / duration)
    }
}
