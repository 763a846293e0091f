//! Payoff arithmetic. Rationals compare exactly; floats compare with an
//! absolute tolerance.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

pub type Rational = Ratio<i128>;

/// Absolute tolerance used by every comparison in float mode.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Number of decimals in rendered values.
pub const DECIMALS: usize = 10;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_frac(num: i64, den: i64) -> Self;
    /// Nearest representable value; rationals use a 2^-30 grid.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Parses integers, decimals (with optional exponent) and `p/q`.
    fn parse(text: &str) -> Option<Self>;
    /// `p/q` text for exact backends.
    fn exact_text(&self) -> Option<String>;
    fn compare(&self, other: &Self) -> Ordering;

    fn eq_tol(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
    fn lt_tol(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Less
    }
    fn le_tol(&self, other: &Self) -> bool {
        self.compare(other) != Ordering::Greater
    }
    fn gt_tol(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Greater
    }
    fn ge_tol(&self, other: &Self) -> bool {
        self.compare(other) != Ordering::Less
    }
    fn is_zero_tol(&self) -> bool {
        self.eq_tol(&Self::zero())
    }
    fn is_positive(&self) -> bool {
        self.gt_tol(&Self::zero())
    }
    fn is_negative(&self) -> bool {
        self.lt_tol(&Self::zero())
    }
    fn abs_val(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn max_val(self, other: Self) -> Self {
        if other.gt_tol(&self) {
            other
        } else {
            self
        }
    }
    fn min_val(self, other: Self) -> Self {
        if other.lt_tol(&self) {
            other
        } else {
            self
        }
    }
    fn decimal_text(&self) -> String {
        format!("{:.*}", DECIMALS, self.to_f64())
    }
    fn to_json(&self) -> Value {
        match self.exact_text() {
            Some(exact) => json!({ "exact": exact, "decimal": self.decimal_text() }),
            None => json!({ "decimal": self.decimal_text() }),
        }
    }
}

/// Sum of an iterator of scalars.
pub fn sum<V: Scalar, I: IntoIterator<Item = V>>(items: I) -> V {
    items.into_iter().fold(V::zero(), |acc, x| acc + x)
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
    fn from_frac(num: i64, den: i64) -> Self {
        Ratio::new(num as i128, den as i128)
    }
    fn from_f64(x: f64) -> Self {
        let scale = (1i128 << 30) as f64;
        Ratio::new((x * scale).round() as i128, 1i128 << 30)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
    fn parse(text: &str) -> Option<Self> {
        parse_rational(text)
    }
    fn exact_text(&self) -> Option<String> {
        Some(self.to_string())
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_frac(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        match text.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().ok()?;
                let q: f64 = q.trim().parse().ok()?;
                (q != 0.0).then(|| p / q)
            }
            None => text.parse().ok().filter(|x: &f64| x.is_finite()),
        }
    }
    fn exact_text(&self) -> Option<String> {
        None
    }
    fn compare(&self, other: &Self) -> Ordering {
        if (self - other).abs() <= FLOAT_TOLERANCE {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

/// Reads a JSON number or numeric string.
pub fn from_json_value<V: Scalar>(value: &Value) -> Option<V> {
    match value {
        Value::Number(n) => V::parse(&n.to_string()),
        Value::String(s) => V::parse(s),
        _ => None,
    }
}

fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        return (!q.is_zero()).then(|| p / q);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: i128 = if all.is_empty() { 0 } else { all.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    if scale.unsigned_abs() > 30 {
        return None;
    }
    let pow = 10i128.checked_pow(scale.unsigned_abs())?;
    let value = if scale >= 0 {
        Ratio::from_integer(numer.checked_mul(pow)?)
    } else {
        Ratio::new(numer, pow)
    };
    Some(if negative { -value } else { value })
}
