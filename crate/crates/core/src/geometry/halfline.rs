use std::marker::PhantomData;

use super::{Address, ModelKind, SpaceModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Half-line `[0, 2^{m0})` with the Muckenhoupt weight `w(x) = x^{-1/2}`.
///
/// A cube at tree level `j` with index `k` is the interval
/// `[k h, (k+1) h)` with `h = 2^{m0-j}`. Its measure is
/// `2(sqrt((k+1)h) - sqrt(kh))`, which for fixed `j` decreases strictly in `k`,
/// so cubes of one level do not have comparable measures.
#[derive(Debug, Clone)]
pub struct HalfLineModel<T> {
    window_exponent: u32,
    _scalar: PhantomData<T>,
}

impl<T: Scalar> Default for HalfLineModel<T> {
    fn default() -> Self {
        Self::new(0)
    }
}

impl<T: Scalar> HalfLineModel<T> {
    pub fn new(window_exponent: u32) -> Self {
        Self {
            window_exponent,
            _scalar: PhantomData,
        }
    }

    pub fn window_exponent(&self) -> u32 {
        self.window_exponent
    }

    /// Exponent of the weight `x^{-1/2}`.
    pub fn weight_exponent() -> T {
        T::lit(-0.5)
    }

    /// Interval index `k` of the cube at `a`.
    pub fn interval_index(a: &Address) -> u64 {
        a.digits()
            .iter()
            .fold(0u64, |k, &d| 2 * k + (d as u64 - 1))
    }

    /// Address of the interval with index `k` at tree level `level`.
    pub fn interval_address(level: usize, k: u64) -> Result<Address> {
        if level >= 64 || k >> level != 0 {
            return Err(Error::InvalidAddress {
                address: format!("{level}:{k}"),
                reason: format!("interval index must be below 2^{level}"),
            });
        }
        let digits = (0..level)
            .rev()
            .map(|bit| ((k >> bit) & 1) as u8 + 1)
            .collect();
        Address::from_digits(digits)
    }

    /// Closed-open interval `[left, right)` of the cube at `a`.
    pub fn interval(&self, a: &Address) -> (T, T) {
        let h = self.level_scale(a.level());
        let k = T::lit(Self::interval_index(a) as f64);
        (k * h, (k + T::one()) * h)
    }

    /// `∫_left^right x^{-1/2} dx`, in the cancellation-free form `2(b-a)/(sqrt a + sqrt b)`.
    pub fn weighted_length(left: T, right: T) -> T {
        T::lit(2.0) * (right - left) / (left.sqrt() + right.sqrt())
    }
}

impl<T: Scalar> SpaceModel<T> for HalfLineModel<T> {
    type Point = T;

    fn kind(&self) -> ModelKind {
        ModelKind::HalfLine
    }

    fn gamma(&self) -> Option<T> {
        None
    }

    fn branching(&self, _a: &Address) -> usize {
        2
    }

    fn max_branching(&self) -> usize {
        2
    }

    fn scale_ratio(&self) -> T {
        T::lit(0.5)
    }

    fn level_scale(&self, level: usize) -> T {
        T::lit(2.0).powi(self.window_exponent as i32 - level as i32)
    }

    fn cell_measure(&self, a: &Address) -> T {
        let (l, r) = self.interval(a);
        Self::weighted_length(l, r)
    }

    /// Interval midpoint.
    fn representative_point(&self, a: &Address) -> T {
        let (l, r) = self.interval(a);
        (l + r) * T::lit(0.5)
    }

    fn cell_vertices(&self, a: &Address) -> Vec<T> {
        let (l, r) = self.interval(a);
        vec![l, r]
    }

    fn contains(&self, a: &Address, p: &T) -> bool {
        let (l, r) = self.interval(a);
        l <= *p && *p <= r
    }

    fn distance(&self, p: &T, q: &T) -> T {
        (*p - *q).abs()
    }

    /// Parses `"j:k"` with `k` the interval index at tree level `j`.
    fn parse_address(&self, s: &str) -> Result<Address> {
        let err = |reason: &str| Error::ParseAddress {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (j, k) = s.split_once(':').ok_or_else(|| err("missing ':'"))?;
        let j: usize = j.trim().parse().map_err(|_| err("level is not an integer"))?;
        let k: u64 = if k.trim().is_empty() && j == 0 {
            0
        } else {
            k.trim().parse().map_err(|_| err("index is not an integer"))?
        };
        Self::interval_address(j, k).map_err(|e| err(&e.to_string()))
    }

    fn format_address(&self, a: &Address) -> String {
        format!("{}:{}", a.level(), Self::interval_index(a))
    }

    fn coordinates(&self, p: &T) -> Vec<f64> {
        vec![p.as_f64()]
    }
}
