use std::marker::PhantomData;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive, Zero};

use super::{Address, ModelKind, SpaceModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exact planar point with dyadic-times-thirds rational coordinates.
pub type PlanarPoint = [Ratio<i64>; 2];

/// Applies the contraction `F_i` of the Sierpinski iterated function system:
/// `F_1(p) = p/2`, `F_2(p) = (1/2, 0) + p/2`, `F_3(p) = (0, 1/2) + p/2`.
///
/// Works over any numeric type; over rationals the image is exact.
pub fn ifs_map<R: Num + Clone>(i: u8, p: &[R; 2]) -> Result<[R; 2]> {
    let two = R::one() + R::one();
    let half = R::one() / two.clone();
    let [x, y] = p.clone();
    let (hx, hy) = (x / two.clone(), y / two);
    match i {
        1 => Ok([hx, hy]),
        2 => Ok([half + hx, hy]),
        3 => Ok([hx, half + hy]),
        _ => Err(Error::InvalidChildIndex {
            index: i as usize,
            branching: 3,
        }),
    }
}

/// Truncated Sierpinski quadrant: the top cube is `2^{m0} S`, every cube has
/// three children, and the Hausdorff measure is normalised so the top cube
/// has measure 1 (a level-`j` cell has measure `3^{-j}`).
#[derive(Debug, Clone)]
pub struct SierpinskiModel<T> {
    window_exponent: u32,
    _scalar: PhantomData<T>,
}

impl<T: Scalar> Default for SierpinskiModel<T> {
    fn default() -> Self {
        Self::new(0)
    }
}

impl<T: Scalar> SierpinskiModel<T> {
    pub fn new(window_exponent: u32) -> Self {
        Self {
            window_exponent,
            _scalar: PhantomData,
        }
    }

    pub fn window_exponent(&self) -> u32 {
        self.window_exponent
    }

    /// Hausdorff dimension `log 3 / log 2`.
    pub fn dimension() -> T {
        T::lit(3.0).ln() / T::LN_2()
    }

    /// Exact measure `3^{-level}`.
    pub fn cell_measure_exact(&self, a: &Address) -> Ratio<i64> {
        Ratio::new(1, 3i64.pow(a.level() as u32))
    }

    fn window(&self) -> Ratio<i64> {
        Ratio::from_integer(1i64 << self.window_exponent)
    }

    fn compose(&self, a: &Address, p: PlanarPoint) -> PlanarPoint {
        let mut q = p;
        for &d in a.digits().iter().rev() {
            q = ifs_map(d, &q).expect("validated digit");
        }
        let w = self.window();
        [q[0] * w, q[1] * w]
    }

    /// Lower-left corner and leg length of the closed triangle of cell `a`.
    pub fn triangle(&self, a: &Address) -> (PlanarPoint, Ratio<i64>) {
        let zero = Ratio::zero();
        let origin = self.compose(a, [zero, zero]);
        let size = self.window() / Ratio::from_integer(1i64 << a.level());
        (origin, size)
    }
}

fn ratio_to<T: Scalar>(r: &Ratio<i64>) -> T {
    T::lit(r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap())
}

impl<T: Scalar> SpaceModel<T> for SierpinskiModel<T> {
    type Point = PlanarPoint;

    fn kind(&self) -> ModelKind {
        ModelKind::Sierpinski
    }

    fn gamma(&self) -> Option<T> {
        Some(Self::dimension())
    }

    fn branching(&self, _a: &Address) -> usize {
        3
    }

    fn max_branching(&self) -> usize {
        3
    }

    fn scale_ratio(&self) -> T {
        T::lit(0.5)
    }

    fn level_scale(&self, level: usize) -> T {
        T::lit(2.0).powi(self.window_exponent as i32 - level as i32)
    }

    fn cell_measure(&self, a: &Address) -> T {
        T::one() / T::lit(3.0).powi(a.level() as i32)
    }

    /// Centroid of the cell's triangle, the image of `(1/3, 1/3)`.
    fn representative_point(&self, a: &Address) -> PlanarPoint {
        let third = Ratio::new(1, 3);
        self.compose(a, [third, third])
    }

    fn cell_vertices(&self, a: &Address) -> Vec<PlanarPoint> {
        let (o, size) = self.triangle(a);
        vec![
            o,
            [o[0] + size, o[1]],
            [o[0], o[1] + size],
        ]
    }

    fn contains(&self, a: &Address, p: &PlanarPoint) -> bool {
        let (o, size) = self.triangle(a);
        let dx = p[0] - o[0];
        let dy = p[1] - o[1];
        dx >= Ratio::zero() && dy >= Ratio::zero() && dx + dy <= size
    }

    fn distance(&self, p: &PlanarPoint, q: &PlanarPoint) -> T {
        let dx: T = ratio_to(&(p[0] - q[0]));
        let dy: T = ratio_to(&(p[1] - q[1]));
        dx.hypot(dy)
    }

    fn parse_address(&self, s: &str) -> Result<Address> {
        let a: Address = s.parse()?;
        self.validate(&a).map_err(|e| Error::ParseAddress {
            input: s.to_string(),
            reason: e.to_string(),
        })?;
        Ok(a)
    }

    fn format_address(&self, a: &Address) -> String {
        a.to_string()
    }

    fn measure_exact(&self, a: &Address) -> Option<String> {
        Some(self.cell_measure_exact(a).to_string())
    }

    fn coordinates(&self, p: &PlanarPoint) -> Vec<f64> {
        p.iter().map(ratio_to::<f64>).collect()
    }
}
