//! Exact rational probabilities.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(BigRational);

impl Probability {
    pub fn zero() -> Self {
        Probability(BigRational::zero())
    }

    pub fn one() -> Self {
        Probability(BigRational::one())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Probability(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    /// Parses `0.8`, `.25`, `1`, or `3/4`. Exact: `0.8` becomes `4/5`.
    pub fn parse(text: &str) -> Option<Self> {
        if let Some((n, d)) = text.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() || n.is_negative() || d.is_negative() {
                return None;
            }
            return Some(Probability(BigRational::new(n, d)));
        }
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().ok()?
        };
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        Some(Probability(BigRational::new(num, den)))
    }

    pub fn complement(&self) -> Self {
        Probability(BigRational::one() - &self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Strictly between `lo` and `hi`.
    pub fn in_open_interval(&self, lo: &Probability, hi: &Probability) -> bool {
        &self.0 > &lo.0 && &self.0 < &hi.0
    }

    /// `"num/den"`.
    pub fn fraction_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

    /// Exact decimal expansion when the denominator has only factors 2 and 5.
    pub fn exact_decimal(&self) -> Option<String> {
        let mut den = self.0.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0usize;
        let mut fives = 0usize;
        while den.is_multiple_of(&two) {
            den /= &two;
            twos += 1;
        }
        while den.is_multiple_of(&five) {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        Some(self.decimal_digits(twos.max(fives)))
    }

    /// Decimal rendering: exact when terminating, otherwise rounded to 20
    /// fractional digits.
    pub fn decimal_string(&self) -> String {
        self.exact_decimal().unwrap_or_else(|| self.decimal_digits(20))
    }

    fn decimal_digits(&self, places: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10), places);
        let scaled = (&self.0 * BigRational::from_integer(scale.clone())).round().to_integer();
        let (int_part, frac) = scaled.div_rem(&scale);
        if places == 0 {
            return int_part.to_string();
        }
        let frac = format!("{:0>width$}", frac.to_string(), width = places);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Probability {
    /// Decimal when terminating, `num/den` otherwise; both re-parse exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_decimal() {
            Some(d) => f.write_str(&d),
            None => f.write_str(&self.fraction_string()),
        }
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fraction_string())
    }
}

impl Mul for &Probability {
    type Output = Probability;

    fn mul(self, rhs: &Probability) -> Probability {
        Probability(&self.0 * &rhs.0)
    }
}

impl Sub for &Probability {
    type Output = Probability;

    fn sub(self, rhs: &Probability) -> Probability {
        Probability(&self.0 - &rhs.0)
    }
}

impl<'a> Product<&'a Probability> for Probability {
    fn product<I: Iterator<Item = &'a Probability>>(iter: I) -> Self {
        Probability(iter.fold(BigRational::one(), |acc, p| acc * &p.0))
    }
}

impl<'a> Sum<&'a Probability> for Probability {
    fn sum<I: Iterator<Item = &'a Probability>>(iter: I) -> Self {
        Probability(iter.fold(BigRational::zero(), |acc, p| acc + &p.0))
    }
}
