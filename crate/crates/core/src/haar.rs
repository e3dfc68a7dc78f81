//! Haar systems on a dyadic tree.
//!
//! For every cube `Q` with `k >= 2` children, the basis
//! `{χ_Q/√μ(Q)} ∪ {χ_{Q'} : first k-1 children}` of the functions constant on
//! the children is orthonormalised with the scaling function kept first.
//! The `k - 1` resulting vectors are the wavelets `ℋ(Q)`. Together with the
//! top scaling function `χ_top/√μ(top)` they form an orthonormal basis of the
//! piecewise constant functions at resolution `J`.

use std::collections::HashMap;
use std::ops::Range;

use crate::dyadic::{CellFunction, DyadicTree};
use crate::error::{Error, Result};
use crate::geometry::{Address, ModelKind, SpaceModel};
use crate::scalar::{ordered_sum, Scalar};

#[derive(Debug, Clone)]
pub struct HaarFunction<T> {
    pub id: usize,
    /// Address of the base cube `Q(h)`.
    pub address: Address,
    /// Level `j(h)` of the base cube.
    pub level: usize,
    /// Index of the base cube within its level.
    pub cube: usize,
    /// Position `l` (1-based) within `ℋ(Q)`.
    pub index: usize,
    pub cube_measure: T,
    /// Constant value on each child of `Q`, in child order.
    pub child_values: Vec<T>,
    /// Leaf ranges of the children of `Q`.
    pub child_leaves: Vec<Range<usize>>,
}

impl<T: Scalar> HaarFunction<T> {
    pub fn support(&self) -> Range<usize> {
        self.child_leaves[0].start..self.child_leaves[self.child_leaves.len() - 1].end
    }

    /// Value on leaf `leaf` (zero outside the base cube).
    pub fn value_at(&self, leaf: usize) -> T {
        self.child_leaves
            .iter()
            .position(|r| r.contains(&leaf))
            .map(|c| self.child_values[c])
            .unwrap_or_else(T::zero)
    }
}

#[derive(Debug, Clone)]
struct CubeInfo<T> {
    measure: T,
    children: Range<usize>,
    wavelets: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct HaarSystem<T> {
    tree_id: u64,
    max_level: usize,
    leaf_measures: Vec<T>,
    cubes: Vec<Vec<CubeInfo<T>>>,
    wavelets: Vec<HaarFunction<T>>,
    by_key: HashMap<(Address, usize), usize>,
}

/// Coefficients of a function in a [`HaarSystem`]: the top scaling
/// coefficient and one coefficient per wavelet, indexed by wavelet id.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarDecomposition<T> {
    pub top_scaling: T,
    pub wavelets: Vec<T>,
}

impl<T: Scalar> HaarDecomposition<T> {
    pub fn zeros(sys: &HaarSystem<T>) -> Self {
        Self {
            top_scaling: T::zero(),
            wavelets: vec![T::zero(); sys.len()],
        }
    }

    /// Builds a decomposition from `(wavelet id, coefficient)` pairs,
    /// rejecting ids that do not belong to `sys`.
    pub fn from_entries(
        sys: &HaarSystem<T>,
        top_scaling: T,
        entries: impl IntoIterator<Item = (usize, T)>,
    ) -> Result<Self> {
        let mut d = Self::zeros(sys);
        d.top_scaling = top_scaling;
        for (id, c) in entries {
            *d.wavelets.get_mut(id).ok_or(Error::UnknownCoefficient {
                id,
                count: sys.len(),
            })? = c;
        }
        Ok(d)
    }

    /// `top_scaling² + Σ coefficient²`.
    pub fn energy_sum(&self) -> T {
        self.top_scaling * self.top_scaling
            + ordered_sum(self.wavelets.iter().map(|&c| c * c))
    }
}

fn weighted_dot<T: Scalar>(u: &[T], v: &[T], w: &[T]) -> T {
    ordered_sum(u.iter().zip(v).zip(w).map(|((&a, &b), &m)| a * b * m))
}

/// Orthonormalises `{1/√μ(Q)} ∪ {e_c : c < k-1}` in the μ-weighted inner
/// product on `k` children and returns the `k - 1` vectors after the first.
fn gram_schmidt<T: Scalar>(child_measures: &[T]) -> Vec<Vec<T>> {
    let k = child_measures.len();
    let total = ordered_sum(child_measures.iter().copied());
    let mut basis = vec![vec![T::one() / total.sqrt(); k]];
    for c in 0..k.saturating_sub(1) {
        let mut v = vec![T::zero(); k];
        v[c] = T::one();
        // two passes keep the vectors orthogonal to rounding level
        for _ in 0..2 {
            for b in &basis {
                let p = weighted_dot(&v, b, child_measures);
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = *x - p * y;
                }
            }
        }
        let norm = weighted_dot(&v, &v, child_measures).sqrt();
        v.iter_mut().for_each(|x| *x = *x / norm);
        basis.push(v);
    }
    basis.remove(0);
    basis
}

impl<T: Scalar> HaarSystem<T> {
    pub fn new<M: SpaceModel<T>>(tree: &DyadicTree<T, M>) -> Self {
        let max_level = tree.max_level();
        let mut wavelets = Vec::new();
        let mut cubes = Vec::with_capacity(max_level + 1);
        for (level, row) in tree.levels().iter().enumerate() {
            let mut infos = Vec::with_capacity(row.len());
            for (idx, cube) in row.iter().enumerate() {
                let start = wavelets.len();
                if level < max_level && cube.children.len() >= 2 {
                    let next = tree.level(level + 1);
                    let kids = &next[cube.children.clone()];
                    let measures: Vec<T> = kids.iter().map(|c| c.measure).collect();
                    for (l, values) in gram_schmidt(&measures).into_iter().enumerate() {
                        wavelets.push(HaarFunction {
                            id: wavelets.len(),
                            address: cube.address.clone(),
                            level,
                            cube: idx,
                            index: l + 1,
                            cube_measure: cube.measure,
                            child_values: values,
                            child_leaves: kids.iter().map(|c| c.leaves.clone()).collect(),
                        });
                    }
                }
                infos.push(CubeInfo {
                    measure: cube.measure,
                    children: if level < max_level { cube.children.clone() } else { 0..0 },
                    wavelets: start..wavelets.len(),
                });
            }
            cubes.push(infos);
        }
        let by_key = wavelets
            .iter()
            .map(|h| ((h.address.clone(), h.index), h.id))
            .collect();
        Self {
            tree_id: tree.id(),
            max_level,
            leaf_measures: tree.leaf_measures().to_vec(),
            cubes,
            wavelets,
            by_key,
        }
    }

    pub fn tree_id(&self) -> u64 {
        self.tree_id
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn len(&self) -> usize {
        self.wavelets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelets.is_empty()
    }

    pub fn wavelets(&self) -> &[HaarFunction<T>] {
        &self.wavelets
    }

    pub fn wavelet(&self, id: usize) -> Result<&HaarFunction<T>> {
        self.wavelets.get(id).ok_or(Error::UnknownCoefficient {
            id,
            count: self.len(),
        })
    }

    /// Wavelet id for `(base cube address, index l)`.
    pub fn find(&self, address: &Address, index: usize) -> Option<usize> {
        self.by_key.get(&(address.clone(), index)).copied()
    }

    /// Wavelet ids of `ℋ(Q)` for the cube at `(level, idx)`.
    pub fn cube_wavelets(&self, level: usize, idx: usize) -> Range<usize> {
        self.cubes[level][idx].wavelets.clone()
    }

    pub fn leaf_measures(&self) -> &[T] {
        &self.leaf_measures
    }

    pub fn top_measure(&self) -> T {
        self.cubes[0][0].measure
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_measures.len()
    }

    fn check(&self, f: &CellFunction<T>) -> Result<()> {
        if f.tree_id() != self.tree_id || f.len() != self.leaf_count() {
            return Err(Error::TreeMismatch);
        }
        Ok(())
    }

    /// `∫_Q f dμ` for every cube, bottom-up.
    fn cube_integrals(&self, f: &CellFunction<T>) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = vec![Vec::new(); self.max_level + 1];
        out[self.max_level] = f
            .values()
            .iter()
            .zip(&self.leaf_measures)
            .map(|(&v, &m)| v * m)
            .collect();
        for level in (0..self.max_level).rev() {
            out[level] = self.cubes[level]
                .iter()
                .map(|c| ordered_sum(c.children.clone().map(|i| out[level + 1][i])))
                .collect();
        }
        out
    }

    /// Coefficients `⟨f, h⟩` and the top scaling coefficient, in one bottom-up pass.
    pub fn forward(&self, f: &CellFunction<T>) -> Result<HaarDecomposition<T>> {
        self.check(f)?;
        let integrals = self.cube_integrals(f);
        let wavelets = self
            .wavelets
            .iter()
            .map(|h| {
                let kids = self.cubes[h.level][h.cube].children.clone();
                ordered_sum(
                    h.child_values
                        .iter()
                        .zip(kids)
                        .map(|(&v, i)| v * integrals[h.level + 1][i]),
                )
            })
            .collect();
        Ok(HaarDecomposition {
            top_scaling: integrals[0][0] / self.top_measure().sqrt(),
            wavelets,
        })
    }

    /// Reconstruction `c_top χ_top/√μ(top) + Σ c_h h`, top-down.
    pub fn inverse(&self, d: &HaarDecomposition<T>) -> Result<CellFunction<T>> {
        if d.wavelets.len() != self.len() {
            return Err(Error::UnknownCoefficient {
                id: d.wavelets.len().max(self.len()) - 1,
                count: self.len(),
            });
        }
        let mut values = vec![d.top_scaling / self.top_measure().sqrt()];
        for level in 0..self.max_level {
            let mut next = vec![T::zero(); self.cubes[level + 1].len()];
            for (idx, cube) in self.cubes[level].iter().enumerate() {
                for (c, child) in cube.children.clone().enumerate() {
                    let detail = ordered_sum(
                        cube.wavelets
                            .clone()
                            .map(|w| d.wavelets[w] * self.wavelets[w].child_values[c]),
                    );
                    next[child] = values[idx] + detail;
                }
            }
            values = next;
        }
        Ok(CellFunction::from_parts(self.tree_id, values))
    }

    /// The wavelet with id `id` as a cell function.
    pub fn wavelet_function(&self, id: usize) -> Result<CellFunction<T>> {
        let h = self.wavelet(id)?;
        let mut values = vec![T::zero(); self.leaf_count()];
        for (range, &v) in h.child_leaves.iter().zip(&h.child_values) {
            values[range.clone()].iter_mut().for_each(|x| *x = v);
        }
        Ok(CellFunction::from_parts(self.tree_id, values))
    }

    /// `⟨f, g⟩_{L²(μ)}`.
    pub fn inner(&self, f: &CellFunction<T>, g: &CellFunction<T>) -> Result<T> {
        self.check(f)?;
        self.check(g)?;
        Ok(weighted_dot(f.values(), g.values(), &self.leaf_measures))
    }

    pub fn l2_norm_sq(&self, f: &CellFunction<T>) -> Result<T> {
        self.inner(f, f)
    }

    /// `P_j f`: μ-weighted averages of `f` on the level-`j` cubes.
    pub fn project_pj(&self, f: &CellFunction<T>, j: usize) -> Result<CellFunction<T>> {
        self.check(f)?;
        if j > self.max_level {
            return Err(Error::OutOfRange {
                what: "projection level",
                value: j as f64,
                min: 0.0,
                max: self.max_level as f64,
            });
        }
        let integrals = self.cube_integrals(f);
        let mut averages: Vec<T> = integrals[j]
            .iter()
            .zip(&self.cubes[j])
            .map(|(&i, c)| i / c.measure)
            .collect();
        for level in j..self.max_level {
            let mut next = vec![T::zero(); self.cubes[level + 1].len()];
            for (idx, cube) in self.cubes[level].iter().enumerate() {
                for child in cube.children.clone() {
                    next[child] = averages[idx];
                }
            }
            averages = next;
        }
        Ok(CellFunction::from_parts(self.tree_id, averages))
    }

    /// `P_j f` computed by dropping all wavelet coefficients of level `>= j`.
    pub fn project_pj_by_coefficients(&self, f: &CellFunction<T>, j: usize) -> Result<CellFunction<T>> {
        if j > self.max_level {
            return Err(Error::OutOfRange {
                what: "projection level",
                value: j as f64,
                min: 0.0,
                max: self.max_level as f64,
            });
        }
        let mut d = self.forward(f)?;
        for (c, h) in d.wavelets.iter_mut().zip(&self.wavelets) {
            if h.level >= j {
                *c = T::zero();
            }
        }
        self.inverse(&d)
    }

    /// `Π_λ f`: keeps the wavelet coefficients whose base cube has measure
    /// `> λ`. The top scaling coefficient is not part of `M_λ` and is dropped.
    pub fn project_pilambda(&self, f: &CellFunction<T>, lambda: T) -> Result<CellFunction<T>> {
        let mut d = self.forward(f)?;
        d.top_scaling = T::zero();
        for (c, h) in d.wavelets.iter_mut().zip(&self.wavelets) {
            if h.cube_measure <= lambda {
                *c = T::zero();
            }
        }
        self.inverse(&d)
    }

    /// Wavelets spanning the coercivity subspace `Ker Π_λ ∩ {∫u dμ = 0}`:
    /// those whose base cube has measure `<= λ`. May be empty.
    pub fn ker_pilambda_basis(&self, lambda: T) -> Vec<usize> {
        self.wavelets
            .iter()
            .filter(|h| h.cube_measure <= lambda)
            .map(|h| h.id)
            .collect()
    }

    /// Relative residual of the orthogonal projection of `g` onto `span ℋ(Q)`.
    pub fn span_residual(&self, g: &CellFunction<T>, level: usize, idx: usize) -> Result<T> {
        let norm = self.l2_norm_sq(g)?.sqrt();
        let mut proj = CellFunction::from_parts(self.tree_id, vec![T::zero(); self.leaf_count()]);
        for id in self.cube_wavelets(level, idx) {
            let h = self.wavelet_function(id)?;
            let c = self.inner(g, &h)?;
            proj = proj.combine(T::one(), &h, c);
        }
        let r = g.combine(T::one(), &proj, -T::one());
        Ok(self.l2_norm_sq(&r)?.sqrt() / norm)
    }
}

/// The two explicit Sierpinski wavelets on the cube `(j, l)`:
/// `4/√42 · 3^{j/2} · (1, 1/4, -5/4)` and `3/√14 · 3^{j/2} · (-2/3, 1, -1/3)`
/// on the three children.
pub fn sierpinski_reference_wavelets<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    level: usize,
    index: usize,
) -> Result<(CellFunction<T>, CellFunction<T>)> {
    if tree.model().kind() != ModelKind::Sierpinski {
        return Err(Error::NotSierpinski);
    }
    if level >= tree.max_level() || index >= tree.level(level).len() {
        return Err(Error::OutOfRange {
            what: "reference wavelet level",
            value: level as f64,
            min: 0.0,
            max: tree.max_level() as f64 - 1.0,
        });
    }
    let cube = &tree.level(level)[index];
    let kids: Vec<Range<usize>> = tree.level(level + 1)[cube.children.clone()]
        .iter()
        .map(|c| c.leaves.clone())
        .collect();
    let scale = T::lit(3.0).powf(T::lit(level as f64 / 2.0));
    let first = T::lit(4.0) / T::lit(42.0).sqrt() * scale;
    let second = T::lit(3.0) / T::lit(14.0).sqrt() * scale;
    let build = |coef: [T; 3], pre: T| {
        CellFunction::from_fn(tree, |leaf, _| {
            kids.iter()
                .position(|r| r.contains(&leaf))
                .map(|c| pre * coef[c])
                .unwrap_or_else(T::zero)
        })
    };
    let h1 = build([T::one(), T::lit(0.25), T::lit(-1.25)], first);
    let h2 = build(
        [T::lit(-2.0) / T::lit(3.0), T::one(), T::lit(-1.0) / T::lit(3.0)],
        second,
    );
    Ok((h1, h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{HalfLineModel, SierpinskiModel};

    fn sier(j: usize) -> DyadicTree<f64, SierpinskiModel<f64>> {
        DyadicTree::build(SierpinskiModel::new(0), j).unwrap()
    }

    #[test]
    fn wavelet_counts() {
        let t = sier(1);
        let sys = HaarSystem::new(&t);
        assert_eq!(sys.len(), 2);
        let t = sier(3);
        assert_eq!(HaarSystem::new(&t).len() + 1, t.leaf_count());
        let h = DyadicTree::build(HalfLineModel::<f64>::new(0), 1).unwrap();
        assert_eq!(HaarSystem::new(&h).len(), 1);
    }

    #[test]
    fn halfline_two_child_wavelet() {
        let t = DyadicTree::build(HalfLineModel::<f64>::new(0), 1).unwrap();
        let sys = HaarSystem::new(&t);
        let (m1, m2) = (t.leaf_measures()[0], t.leaf_measures()[1]);
        let v = &sys.wavelets()[0].child_values;
        // hand Gram-Schmidt: (√(μ2/μ1), -√(μ1/μ2)) / √(μ1+μ2)
        let s = (m1 + m2).sqrt();
        assert!((v[0] - (m2 / m1).sqrt() / s).abs() < 1e-14);
        assert!((v[1] + (m1 / m2).sqrt() / s).abs() < 1e-14);
        assert!((v[0] * m1 + v[1] * m2).abs() < 1e-14);
    }

    #[test]
    fn constants_have_no_detail() {
        let t = sier(3);
        let sys = HaarSystem::new(&t);
        let d = sys.forward(&CellFunction::constant(&t, 1.0)).unwrap();
        assert!((d.top_scaling - 1.0).abs() < 1e-14);
        assert!(d.wavelets.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn wavelet_coefficients_are_unit_vectors() {
        let t = sier(2);
        let sys = HaarSystem::new(&t);
        for id in 0..sys.len() {
            let d = sys.forward(&sys.wavelet_function(id).unwrap()).unwrap();
            for (k, c) in d.wavelets.iter().enumerate() {
                let want = if k == id { 1.0 } else { 0.0 };
                assert!((c - want).abs() < 1e-13);
            }
            assert!(d.top_scaling.abs() < 1e-13);
        }
    }

    #[test]
    fn inverse_edge_cases() {
        let t = sier(2);
        let sys = HaarSystem::new(&t);
        let zero = sys.inverse(&HaarDecomposition::zeros(&sys)).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let d = HaarDecomposition::from_entries(&sys, 0.0, [(3, 1.0)]).unwrap();
        let f = sys.inverse(&d).unwrap();
        assert!(f.sup_distance(&sys.wavelet_function(3).unwrap()) < 1e-14);
        assert!(matches!(
            HaarDecomposition::from_entries(&sys, 0.0, [(99, 1.0)]),
            Err(Error::UnknownCoefficient { id: 99, .. })
        ));
    }

    #[test]
    fn projections_edge_cases() {
        let t = sier(3);
        let sys = HaarSystem::new(&t);
        let f = CellFunction::random(&t, 5);
        assert!(sys.project_pj(&f, 3).unwrap().sup_distance(&f) < 1e-15);
        let mean = t.inner(&f, &CellFunction::constant(&t, 1.0)).unwrap();
        let p0 = sys.project_pj(&f, 0).unwrap();
        assert!(p0.values().iter().all(|v| (v - mean).abs() < 1e-14));
        assert!(sys.project_pj(&f, 4).is_err());

        let mean_free = f.map(|v| v - mean);
        let big = sys.project_pilambda(&mean_free, 1.0).unwrap();
        assert!(big.values().iter().all(|v| v.abs() < 1e-14));
        let all = sys.project_pilambda(&mean_free, 1.0 / 81.0).unwrap();
        assert!(all.sup_distance(&mean_free) < 1e-13);
    }

    #[test]
    fn pilambda_keeps_level_zero_only() {
        let t = sier(3);
        let sys = HaarSystem::new(&t);
        let kept: Vec<usize> = sys
            .wavelets()
            .iter()
            .filter(|h| h.cube_measure > 1.0 / 3.0)
            .map(|h| h.id)
            .collect();
        assert_eq!(kept, vec![0, 1]);
        let f = sys.wavelet_function(4).unwrap().combine(1.0, &sys.wavelet_function(1).unwrap(), 2.0);
        let p = sys.project_pilambda(&f, 1.0 / 3.0).unwrap();
        let want = sys.wavelet_function(1).unwrap().map(|v| 2.0 * v);
        assert!(p.sup_distance(&want) < 1e-13);
    }

    #[test]
    fn ker_pilambda_enumeration() {
        let t = sier(2);
        let sys = HaarSystem::new(&t);
        let basis = sys.ker_pilambda_basis(1.0 / 3.0);
        assert_eq!(basis.len(), 6);
        assert!(basis.iter().all(|&id| sys.wavelets()[id].level == 1));
        assert_eq!(sys.ker_pilambda_basis(1.0).len(), 8);
        assert!(sys.ker_pilambda_basis(1.0 / 9.0).is_empty());
    }

    #[test]
    fn reference_wavelets() {
        let t = sier(2);
        let sys = HaarSystem::new(&t);
        let (h1, h2) = sierpinski_reference_wavelets(&t, 0, 0).unwrap();
        assert!(sys.inner(&h1, &h2).unwrap().abs() < 1e-15);
        let one = CellFunction::constant(&t, 1.0);
        assert!(sys.inner(&h1, &one).unwrap().abs() < 1e-15);
        assert!((sys.l2_norm_sq(&h1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((sys.l2_norm_sq(&h2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(sys.span_residual(&h1, 0, 0).unwrap() < 1e-10);

        let h = DyadicTree::build(HalfLineModel::<f64>::new(0), 2).unwrap();
        assert_eq!(sierpinski_reference_wavelets(&h, 0, 0).unwrap_err(), Error::NotSierpinski);
        assert!(sierpinski_reference_wavelets(&t, 2, 0).is_err());
    }
}
