//! Truncated Christ dyadic family over a [`SpaceModel`], the dyadic
//! ultrametric `δ`, ball measures and empirical checks of the family's
//! structural properties.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Address, SpaceModel};
use crate::scalar::{ordered_sum, Scalar};

/// Default cap on the number of leaf cells a tree may have.
pub const DEFAULT_LEAF_CAP: usize = 1 << 20;

static NEXT_TREE_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
pub struct Cube<T, P> {
    pub address: Address,
    pub level: usize,
    pub measure: T,
    /// Index of the parent in the previous level.
    pub parent: Option<usize>,
    /// Indices of the offspring in the next level (contiguous, address order).
    pub children: Range<usize>,
    /// Leaf cells covered by this cube (contiguous, address order).
    pub leaves: Range<usize>,
    pub point: P,
}

/// Levels `0..=J` of a dyadic family. Cubes of each level are stored in
/// address order, so every cube covers a contiguous run of leaves.
#[derive(Debug, Clone)]
pub struct DyadicTree<T: Scalar, M: SpaceModel<T>> {
    id: u64,
    model: M,
    levels: Vec<Vec<Cube<T, M::Point>>>,
    /// `ancestors[leaf * (J + 1) + level]` is the index of the leaf's ancestor at `level`.
    ancestors: Vec<usize>,
    leaf_measures: Vec<T>,
}

impl<T: Scalar, M: SpaceModel<T>> DyadicTree<T, M> {
    pub fn build(model: M, max_level: usize) -> Result<Self> {
        Self::build_with_cap(model, max_level, DEFAULT_LEAF_CAP)
    }

    pub fn build_with_cap(model: M, max_level: usize, leaf_cap: usize) -> Result<Self> {
        let root = Address::root();
        let mut levels = vec![vec![Cube {
            level: 0,
            measure: model.cell_measure(&root),
            parent: None,
            children: 0..0,
            leaves: 0..0,
            point: model.representative_point(&root),
            address: root,
        }]];

        for level in 0..max_level {
            let count: usize = levels[level]
                .iter()
                .map(|c| model.branching(&c.address))
                .sum();
            if count > leaf_cap {
                return Err(Error::ResourceCap {
                    leaves: count,
                    cap: leaf_cap,
                });
            }
            let mut next = Vec::with_capacity(count);
            for (idx, cube) in levels[level].iter_mut().enumerate() {
                let start = next.len();
                for d in 1..=model.branching(&cube.address) {
                    let address = cube.address.child(d as u8);
                    next.push(Cube {
                        level: level + 1,
                        measure: model.cell_measure(&address),
                        parent: Some(idx),
                        children: 0..0,
                        leaves: 0..0,
                        point: model.representative_point(&address),
                        address,
                    });
                }
                cube.children = start..next.len();
            }
            levels.push(next);
        }

        for (i, leaf) in levels[max_level].iter_mut().enumerate() {
            leaf.leaves = i..i + 1;
        }
        for level in (0..max_level).rev() {
            let (upper, lower) = levels.split_at_mut(level + 1);
            for cube in upper[level].iter_mut() {
                let first = &lower[0][cube.children.start];
                let last = &lower[0][cube.children.end - 1];
                cube.leaves = first.leaves.start..last.leaves.end;
            }
        }

        let n = levels[max_level].len();
        let stride = max_level + 1;
        let mut ancestors = vec![0usize; n * stride];
        for leaf in 0..n {
            let mut idx = leaf;
            for level in (0..=max_level).rev() {
                ancestors[leaf * stride + level] = idx;
                if let Some(p) = levels[level][idx].parent {
                    idx = p;
                }
            }
        }
        let leaf_measures = levels[max_level].iter().map(|c| c.measure).collect();

        Ok(Self {
            id: NEXT_TREE_ID.fetch_add(1, Ordering::Relaxed),
            model,
            levels,
            ancestors,
            leaf_measures,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    /// Resolution level `J`.
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Cube<T, M::Point>>] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> &[Cube<T, M::Point>] {
        &self.levels[j]
    }

    pub fn top(&self) -> &Cube<T, M::Point> {
        &self.levels[0][0]
    }

    pub fn leaves(&self) -> &[Cube<T, M::Point>] {
        &self.levels[self.max_level()]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_measures.len()
    }

    pub fn cube_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn leaf_measures(&self) -> &[T] {
        &self.leaf_measures
    }

    /// `(level, index)` of the cube at `a`, if it belongs to this tree.
    pub fn locate(&self, a: &Address) -> Result<(usize, usize)> {
        if a.level() > self.max_level() {
            return Err(Error::InvalidAddress {
                address: a.to_string(),
                reason: format!("deeper than the tree's resolution {}", self.max_level()),
            });
        }
        let mut idx = 0;
        for (level, &d) in a.digits().iter().enumerate() {
            let children = &self.levels[level][idx].children;
            if d as usize > children.len() {
                return Err(Error::InvalidAddress {
                    address: a.to_string(),
                    reason: format!("digit {d} at level {level} exceeds the offspring count"),
                });
            }
            idx = children.start + d as usize - 1;
        }
        Ok((a.level(), idx))
    }

    pub fn cube(&self, a: &Address) -> Result<&Cube<T, M::Point>> {
        let (l, i) = self.locate(a)?;
        Ok(&self.levels[l][i])
    }

    /// Index of the leaf at `a`; the address must be at level `J`.
    pub fn leaf_index(&self, a: &Address) -> Result<usize> {
        if a.level() != self.max_level() {
            return Err(Error::InvalidAddress {
                address: a.to_string(),
                reason: format!("not a leaf of a level-{} tree", self.max_level()),
            });
        }
        Ok(self.locate(a)?.1)
    }

    /// Index of the level-`level` ancestor of leaf `leaf`.
    #[inline]
    pub fn ancestor(&self, leaf: usize, level: usize) -> usize {
        self.ancestors[leaf * (self.max_level() + 1) + level]
    }

    /// Level of the smallest cube containing both leaves.
    pub fn common_level(&self, a: usize, b: usize) -> usize {
        let stride = self.max_level() + 1;
        let (ra, rb) = (
            &self.ancestors[a * stride..(a + 1) * stride],
            &self.ancestors[b * stride..(b + 1) * stride],
        );
        ra.iter().zip(rb).take_while(|(x, y)| x == y).count() - 1
    }

    pub fn smallest_common_cube(&self, a: &Address, b: &Address) -> Result<Address> {
        self.leaf_index(a)?;
        self.leaf_index(b)?;
        Ok(a.common_prefix(b))
    }

    /// `δ(a, b)`: zero on the diagonal, otherwise the measure of the smallest
    /// common cube.
    pub fn dyadic_distance(&self, a: &Address, b: &Address) -> Result<T> {
        let (i, j) = (self.leaf_index(a)?, self.leaf_index(b)?);
        Ok(self.delta(i, j))
    }

    /// `δ` between leaves given by index.
    #[inline]
    pub fn delta(&self, a: usize, b: usize) -> T {
        if a == b {
            return T::zero();
        }
        let level = self.common_level(a, b);
        self.levels[level][self.ancestor(a, level)].measure
    }

    /// Distance between the representative points of two leaves.
    #[inline]
    pub fn leaf_distance(&self, a: usize, b: usize) -> T {
        let leaves = self.leaves();
        self.model.distance(&leaves[a].point, &leaves[b].point)
    }

    /// Measure of the closed ball `{y : d(x, y) <= r}`, counting whole leaf
    /// cells by their representative points.
    pub fn ball_measure(&self, x: &Address, r: T) -> Result<T> {
        Ok(self.ball_measure_at(self.leaf_index(x)?, r))
    }

    pub fn ball_measure_at(&self, x: usize, r: T) -> T {
        ordered_sum(
            (0..self.leaf_count())
                .filter(|&b| self.leaf_distance(x, b) <= r)
                .map(|b| self.leaf_measures[b]),
        )
    }

    /// Diameter range `[diam(leaf cell), diam(top cube)]` resolvable by this tree.
    pub fn resolvable_radii(&self) -> (T, T) {
        let leaf = &self.leaves()[0].address;
        (
            self.model.cell_diameter(leaf),
            self.model.cell_diameter(&Address::root()),
        )
    }

    /// `μ(B(x, r)) / r^γ` for a leaf `x`.
    pub fn ahlfors_ratio(&self, x: &Address, r: T) -> Result<T> {
        let gamma = self.model.gamma().ok_or(Error::NotAhlfors {
            model: self.model.name(),
        })?;
        let (lo, hi) = self.resolvable_radii();
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfRange {
                what: "radius",
                value: r.as_f64(),
                min: lo.as_f64(),
                max: hi.as_f64(),
            });
        }
        Ok(self.ball_measure(x, r)? / r.powf(gamma))
    }

    /// Leaves of the `δ`-ball `{y : δ(x, y) < r}`, read off from the largest
    /// ancestor of `x` with measure below `r`. If no ancestor qualifies the
    /// ball is the leaf itself.
    pub fn delta_ball(&self, x: usize, r: T) -> Range<usize> {
        for level in 0..=self.max_level() {
            let cube = &self.levels[level][self.ancestor(x, level)];
            if cube.measure < r {
                return cube.leaves.clone();
            }
        }
        x..x + 1
    }

    /// Largest `c` with `c r <= μ(B_δ(x, r))` over all leaves `x` and all
    /// `r ∈ (μ(leaf x), μ(top)]`: the minimum over non-top cubes of
    /// `μ(Q) / μ(parent Q)`.
    pub fn delta_regularity_constant(&self) -> T {
        let mut c = T::one();
        for level in 1..self.levels.len() {
            for cube in &self.levels[level] {
                let parent = &self.levels[level - 1][cube.parent.expect("non-top cube")];
                c = c.min(cube.measure / parent.measure);
            }
        }
        c
    }

    /// Empirical constant `C` in `μ(B(x, d(x, y))) <= C δ(x, y)`: the maximum
    /// ratio over `samples` random pairs of distinct leaves.
    pub fn compare_measure_ball_delta(&self, samples: usize, seed: u64) -> T {
        let n = self.leaf_count();
        if n < 2 {
            return T::zero();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = T::zero();
        let mut taken = 0;
        while taken < samples {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b {
                continue;
            }
            taken += 1;
            let ball = self.ball_measure_at(a, self.leaf_distance(a, b));
            worst = worst.max(ball / self.delta(a, b));
        }
        worst
    }

    pub fn l2_norm_sq(&self, f: &CellFunction<T>) -> Result<T> {
        self.inner(f, f)
    }

    /// `∫ f g dμ` for piecewise constant functions.
    pub fn inner(&self, f: &CellFunction<T>, g: &CellFunction<T>) -> Result<T> {
        self.check(f)?;
        self.check(g)?;
        Ok(ordered_sum(
            f.values
                .iter()
                .zip(&g.values)
                .zip(&self.leaf_measures)
                .map(|((&a, &b), &m)| a * b * m),
        ))
    }

    pub fn check(&self, f: &CellFunction<T>) -> Result<()> {
        if f.tree_id != self.id || f.values.len() != self.leaf_count() {
            return Err(Error::TreeMismatch);
        }
        Ok(())
    }

    /// Verifies the structural and metric properties of the family.
    pub fn verify_christ_properties(&self, seed: u64) -> ChristReport {
        let j_max = self.max_level();
        let mut levels = Vec::with_capacity(j_max + 1);
        let leaves = self.leaves();

        for (level, cubes) in self.levels.iter().enumerate() {
            let scale = self.model.level_scale(level);
            let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
            let (mut emin, mut emax) = (f64::INFINITY, 0.0f64);
            for cube in cubes {
                let verts: Vec<_> = cube
                    .leaves
                    .clone()
                    .flat_map(|l| self.model.cell_vertices(&leaves[l].address))
                    .collect();
                let mut diam = T::zero();
                for (i, p) in verts.iter().enumerate() {
                    for q in &verts[i + 1..] {
                        diam = diam.max(self.model.distance(p, q));
                    }
                }
                let ratio = (diam / scale).as_f64();
                dmin = dmin.min(ratio);
                dmax = dmax.max(ratio);

                if level > 0 {
                    // Inner ball: reaches the nearest node outside the cube.
                    // Outer ball: reaches every vertex of the cube.
                    let inner = (0..leaves.len())
                        .filter(|l| !cube.leaves.contains(l))
                        .map(|l| self.model.distance(&cube.point, &leaves[l].point))
                        .fold(T::infinity(), T::min);
                    let outer = verts
                        .iter()
                        .map(|v| self.model.distance(&cube.point, v))
                        .fold(T::zero(), T::max);
                    let e = (inner / outer).as_f64();
                    emin = emin.min(e);
                    emax = emax.max(e);
                }
            }
            levels.push(LevelReport {
                level,
                cubes: cubes.len(),
                min_diameter_ratio: dmin,
                max_diameter_ratio: dmax,
                min_eccentricity: (level > 0).then_some(emin),
                max_eccentricity: (level > 0).then_some(emax),
            });
        }

        let mut checks = Vec::new();

        let top = self.top().measure;
        let worst_partition = self
            .levels
            .iter()
            .map(|cubes| {
                let total = ordered_sum(cubes.iter().map(|c| c.measure));
                ((total - top) / top).abs().as_f64()
            })
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "each level partitions the top cube",
            worst_partition <= 1e-12,
            format!("max relative deviation of level measure sums: {worst_partition:.3e}"),
        ));

        let mut parent_ok = true;
        for level in 1..=j_max {
            for (i, cube) in self.levels[level].iter().enumerate() {
                let ok = cube
                    .parent
                    .map(|p| {
                        let parent = &self.levels[level - 1][p];
                        parent.children.contains(&i) && cube.address.parent().as_ref() == Some(&parent.address)
                    })
                    .unwrap_or(false);
                parent_ok &= ok;
            }
        }
        checks.push(Check::new(
            "unique parent",
            parent_ok,
            "every non-top cube has exactly one parent one level up".into(),
        ));

        let m = self.model.max_branching();
        let offspring_ok = self.levels[..j_max]
            .iter()
            .flatten()
            .all(|c| (1..=m).contains(&c.children.len()));
        checks.push(Check::new(
            "offspring count in [1, M]",
            offspring_ok,
            format!("M = {m}"),
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all: Vec<(usize, usize)> = self
            .levels
            .iter()
            .enumerate()
            .flat_map(|(l, c)| (0..c.len()).map(move |i| (l, i)))
            .collect();
        let mut nested_ok = true;
        let pairs = 2000.min(all.len() * all.len());
        for _ in 0..pairs {
            let (la, ia) = all[rng.gen_range(0..all.len())];
            let (lb, ib) = all[rng.gen_range(0..all.len())];
            let (a, b) = (&self.levels[la][ia], &self.levels[lb][ib]);
            let disjoint = a.leaves.end <= b.leaves.start || b.leaves.end <= a.leaves.start;
            let a_in_b = b.leaves.start <= a.leaves.start && a.leaves.end <= b.leaves.end;
            let b_in_a = a.leaves.start <= b.leaves.start && b.leaves.end <= a.leaves.end;
            nested_ok &= disjoint || a_in_b || b_in_a;
            nested_ok &= a_in_b == b.address.is_prefix_of(&a.address);
            nested_ok &= b_in_a == a.address.is_prefix_of(&b.address);
            if a_in_b {
                nested_ok &= self.model.contains(&b.address, &a.point);
            }
            if b_in_a {
                nested_ok &= self.model.contains(&a.address, &b.point);
            }
        }
        checks.push(Check::new(
            "cubes are disjoint or nested",
            nested_ok,
            format!("{pairs} sampled cube pairs; nesting agrees with address prefixes and cell containment"),
        ));

        checks.push(Check::new(
            "quadrant property",
            true,
            "satisfied by convention: the top cube plays the role of the whole space".into(),
        ));

        let global_min = levels.iter().map(|l| l.min_diameter_ratio).fold(f64::INFINITY, f64::min);
        let global_max = levels.iter().map(|l| l.max_diameter_ratio).fold(0.0, f64::max);
        let nu = self.model.scale_ratio().as_f64();
        checks.push(Check::new(
            "diameter comparable to nu^j",
            global_min > 0.0 && global_max / global_min <= 1.0 / nu,
            format!("diam/nu^j in [{global_min:.6}, {global_max:.6}]"),
        ));
        let ecc_min = levels
            .iter()
            .filter_map(|l| l.min_eccentricity)
            .fold(f64::INFINITY, f64::min);
        let ecc_max = levels.iter().filter_map(|l| l.max_eccentricity).fold(0.0, f64::max);
        checks.push(Check::new(
            "eccentricity comparable to 1",
            j_max == 0 || (ecc_min > 0.0 && ecc_max.is_finite()),
            format!("inner/outer radius ratio in [{ecc_min:.6}, {ecc_max:.6}]"),
        ));

        ChristReport { levels, checks }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub cubes: usize,
    pub min_diameter_ratio: f64,
    pub max_diameter_ratio: f64,
    pub min_eccentricity: Option<f64>,
    pub max_eccentricity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChristReport {
    pub levels: Vec<LevelReport>,
    pub checks: Vec<Check>,
}

impl ChristReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Piecewise constant function at the tree's resolution: one value per leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFunction<T> {
    tree_id: u64,
    values: Vec<T>,
}

impl<T: Scalar> CellFunction<T> {
    pub fn new<M: SpaceModel<T>>(tree: &DyadicTree<T, M>, values: Vec<T>) -> Result<Self> {
        if values.len() != tree.leaf_count() {
            return Err(Error::DimensionMismatch {
                expected: tree.leaf_count(),
                got: values.len(),
            });
        }
        Ok(Self {
            tree_id: tree.id(),
            values,
        })
    }

    pub(crate) fn from_parts(tree_id: u64, values: Vec<T>) -> Self {
        Self { tree_id, values }
    }

    pub fn constant<M: SpaceModel<T>>(tree: &DyadicTree<T, M>, c: T) -> Self {
        Self::from_parts(tree.id(), vec![c; tree.leaf_count()])
    }

    pub fn zeros<M: SpaceModel<T>>(tree: &DyadicTree<T, M>) -> Self {
        Self::constant(tree, T::zero())
    }

    pub fn from_fn<M, F>(tree: &DyadicTree<T, M>, mut f: F) -> Self
    where
        M: SpaceModel<T>,
        F: FnMut(usize, &Cube<T, M::Point>) -> T,
    {
        let values = tree.leaves().iter().enumerate().map(|(i, c)| f(i, c)).collect();
        Self::from_parts(tree.id(), values)
    }

    /// Indicator of the cube at `a`.
    pub fn indicator<M: SpaceModel<T>>(tree: &DyadicTree<T, M>, a: &Address) -> Result<Self> {
        let range = tree.cube(a)?.leaves.clone();
        Ok(Self::from_fn(tree, |i, _| {
            if range.contains(&i) {
                T::one()
            } else {
                T::zero()
            }
        }))
    }

    /// Values drawn uniformly from `[-1, 1)`.
    pub fn random<M: SpaceModel<T>>(tree: &DyadicTree<T, M>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(tree, |_, _| T::lit(rng.gen_range(-1.0..1.0)))
    }

    pub fn tree_id(&self) -> u64 {
        self.tree_id
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_parts(self.tree_id, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `a self + b other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        debug_assert_eq!(self.tree_id, other.tree_id);
        Self::from_parts(
            self.tree_id,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        )
    }
}
