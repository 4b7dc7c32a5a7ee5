use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real scalar field usable as the coefficient ring of complex forms.
///
/// Floating types drop coefficients whose modulus falls below `1e-14`;
/// exact rationals only drop true zeros.
pub trait Real:
    Num + Copy + PartialOrd + Signed + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// True when a squared modulus counts as zero.
    fn negligible_sq(sq: Self) -> bool;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Canonical zero threshold for floating coefficients.
pub const ZERO_THRESHOLD: f64 = 1e-14;

impl Real for f64 {
    fn negligible_sq(sq: f64) -> bool {
        sq < ZERO_THRESHOLD * ZERO_THRESHOLD
    }
}

impl Real for f32 {
    fn negligible_sq(sq: f32) -> bool {
        // f32 cannot resolve 1e-14 relative to unit coefficients
        sq < 1e-12
    }
}

impl Real for Ratio<i64> {
    fn negligible_sq(sq: Self) -> bool {
        num_traits::Zero::is_zero(&sq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert!(f64::negligible_sq(1e-30));
        assert!(!f64::negligible_sq(1e-26));
        assert!(Ratio::<i64>::negligible_sq(Ratio::from_integer(0)));
        assert!(!Ratio::<i64>::negligible_sq(Ratio::new(1, 1_000_000)));
        assert_eq!(Ratio::<i64>::half(), Ratio::new(1, 2));
    }
}
