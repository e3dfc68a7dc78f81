//! Concrete spaces of homogeneous type at finite resolution.
//!
//! A [`SpaceModel`] knows how its top cube subdivides, the measure of every
//! cell, a representative point per cell (the quadrature node), and the
//! distance between points. Models are immutable and `Sync`.

mod address;
mod halfline;
mod sierpinski;

pub use address::Address;
pub use halfline::HalfLineModel;
pub use sierpinski::{ifs_map, PlanarPoint, SierpinskiModel};

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sierpinski,
    HalfLine,
}

pub trait SpaceModel<T: Scalar>: Send + Sync {
    type Point: Clone + Debug + Send + Sync;

    fn kind(&self) -> ModelKind;

    fn name(&self) -> &'static str {
        match self.kind() {
            ModelKind::Sierpinski => "sierpinski",
            ModelKind::HalfLine => "halfline",
        }
    }

    /// Ahlfors regularity exponent, if the model has one.
    fn gamma(&self) -> Option<T>;

    /// Number of children of the cube at `a`.
    fn branching(&self, a: &Address) -> usize;

    /// Upper bound `M` on the number of children.
    fn max_branching(&self) -> usize;

    /// Ratio `ν` between diameters of consecutive levels.
    fn scale_ratio(&self) -> T;

    /// Reference diameter scale at tree level `level` (`ν^level` times the window size).
    fn level_scale(&self, level: usize) -> T;

    fn cell_measure(&self, a: &Address) -> T;

    fn representative_point(&self, a: &Address) -> Self::Point;

    /// Extreme points of the closed cell; the cell diameter is attained between two of them.
    fn cell_vertices(&self, a: &Address) -> Vec<Self::Point>;

    /// Whether `p` lies in the closed cell at `a`.
    fn contains(&self, a: &Address, p: &Self::Point) -> bool;

    fn distance(&self, p: &Self::Point, q: &Self::Point) -> T;

    /// Constant `κ` of the quasi-triangle inequality.
    fn quasi_metric_constant(&self) -> T {
        T::one()
    }

    fn parse_address(&self, s: &str) -> Result<Address>;

    fn format_address(&self, a: &Address) -> String;

    /// Exact cell measure as a fraction, where the model has one.
    fn measure_exact(&self, _a: &Address) -> Option<String> {
        None
    }

    /// Point coordinates as plain floats, for exports.
    fn coordinates(&self, p: &Self::Point) -> Vec<f64>;

    /// Checks that every digit is a valid child of the cube reached by its prefix.
    fn validate(&self, a: &Address) -> Result<()> {
        let mut prefix = Address::root();
        for &d in a.digits() {
            let b = self.branching(&prefix);
            if d as usize > b {
                return Err(Error::InvalidAddress {
                    address: a.to_string(),
                    reason: format!("digit {d} exceeds branching {b} of {prefix}"),
                });
            }
            prefix = prefix.child(d);
        }
        Ok(())
    }

    /// Diameter of the closed cell, from its vertices.
    fn cell_diameter(&self, a: &Address) -> T {
        let v = self.cell_vertices(a);
        let mut diam = T::zero();
        for (i, p) in v.iter().enumerate() {
            for q in &v[i + 1..] {
                diam = diam.max(self.distance(p, q));
            }
        }
        diam
    }
}
