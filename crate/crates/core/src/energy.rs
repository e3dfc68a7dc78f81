//! Nonlocal energies on piecewise constant functions.
//!
//! Every double integral becomes a sum over ordered pairs of distinct leaf
//! cells, one node per cell at its representative point. Same-cell pairs
//! contribute nothing because the functions are constant on cells.
//!
//! Kernels:
//! - metric: `d(x, y)^{-(γ + 2s)}` on an Ahlfors `γ`-regular model,
//! - dyadic: `δ(x, y)^{-(1 + 2σ)}`,
//! - ball-measure: `μ(B(x, d(x, y)))^{-(1 + 2σ)}`, symmetrised in `x, y`
//!   (the energy is unchanged by symmetrising).
//!
//! The bilinear form satisfies `B(u, v) = 2 ⟨D u, v⟩` exactly, where
//! `D u(x) = Σ_y (u(x) - u(y)) k(x, y) μ(y)` is the discrete operator `D^{2s}_d`.
//!
//! Row sums are evaluated in parallel on the current rayon pool and reduced
//! in row order, so results do not depend on the number of workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{CellFunction, DyadicTree};
use crate::error::{Error, Result};
use crate::geometry::{Address, SpaceModel};
use crate::haar::HaarSystem;
use crate::scalar::{ordered_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelParams<T> {
    /// `d^{-(γ+2s)}`; needs an Ahlfors model and `0 < s < 1`.
    Metric { s: T },
    /// `δ^{-(1+2σ)}` with `0 < σ < 1`.
    Dyadic { sigma: T },
    /// `μ(B(x, d(x,y)))^{-(1+2σ)}` with `0 < σ < 1`.
    BallMeasure { sigma: T },
}

fn check_unit_interval<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v.as_f64(),
            reason: "must lie in (0, 1)",
        })
    }
}

impl<T: Scalar> KernelParams<T> {
    pub fn mode(&self) -> &'static str {
        match self {
            Self::Metric { .. } => "metric",
            Self::Dyadic { .. } => "dyadic",
            Self::BallMeasure { .. } => "ball",
        }
    }

    pub fn validate<M: SpaceModel<T>>(&self, model: &M) -> Result<()> {
        match *self {
            Self::Metric { s } => {
                model.gamma().ok_or(Error::NotAhlfors { model: model.name() })?;
                check_unit_interval("s", s)
            }
            Self::Dyadic { sigma } | Self::BallMeasure { sigma } => check_unit_interval("sigma", sigma),
        }
    }

    /// Exponent `σ` of the energy `𝓔_σ` this kernel realises (`s/γ` in metric mode).
    pub fn sigma<M: SpaceModel<T>>(&self, model: &M) -> Option<T> {
        match *self {
            Self::Metric { s } => model.gamma().map(|g| s / g),
            Self::Dyadic { sigma } | Self::BallMeasure { sigma } => Some(sigma),
        }
    }

    fn params_json(&self) -> serde_json::Value {
        match *self {
            Self::Metric { s } => serde_json::json!({ "s": s.as_f64() }),
            Self::Dyadic { sigma } | Self::BallMeasure { sigma } => {
                serde_json::json!({ "sigma": sigma.as_f64() })
            }
        }
    }
}

/// `μ(B̄(x_a, d_ab))` for all ordered pairs, row-major.
fn ball_measure_matrix<T: Scalar, M: SpaceModel<T>>(tree: &DyadicTree<T, M>) -> Vec<T> {
    let n = tree.leaf_count();
    let mu = tree.leaf_measures();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let d: Vec<T> = (0..n).map(|b| tree.leaf_distance(a, b)).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| d[x].partial_cmp(&d[y]).expect("finite distances"));
            let mut row = vec![T::zero(); n];
            let mut acc = T::zero();
            let mut i = 0;
            while i < n {
                let mut j = i;
                while j < n && d[order[j]] == d[order[i]] {
                    acc = acc + mu[order[j]];
                    j += 1;
                }
                for &b in &order[i..j] {
                    row[b] = acc;
                }
                i = j;
            }
            row
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// Evaluates kernel entries on demand.
struct KernelEval<'a, T: Scalar, M: SpaceModel<T>> {
    tree: &'a DyadicTree<T, M>,
    params: KernelParams<T>,
    exponent: T,
    balls: Option<Vec<T>>,
}

impl<'a, T: Scalar, M: SpaceModel<T>> KernelEval<'a, T, M> {
    fn new(tree: &'a DyadicTree<T, M>, params: KernelParams<T>) -> Result<Self> {
        params.validate(tree.model())?;
        let two = T::lit(2.0);
        let (exponent, balls) = match params {
            KernelParams::Metric { s } => (tree.model().gamma().expect("validated") + two * s, None),
            KernelParams::Dyadic { sigma } => (T::one() + two * sigma, None),
            KernelParams::BallMeasure { sigma } => (T::one() + two * sigma, Some(ball_measure_matrix(tree))),
        };
        Ok(Self {
            tree,
            params,
            exponent,
            balls,
        })
    }

    #[inline]
    fn k(&self, a: usize, b: usize) -> T {
        if a == b {
            return T::zero();
        }
        match self.params {
            KernelParams::Metric { .. } => self.tree.leaf_distance(a, b).powf(-self.exponent),
            KernelParams::Dyadic { .. } => self.tree.delta(a, b).powf(-self.exponent),
            KernelParams::BallMeasure { .. } => {
                let balls = self.balls.as_ref().expect("ball matrix");
                let n = self.tree.leaf_count();
                let half = T::lit(0.5);
                half * (balls[a * n + b].powf(-self.exponent) + balls[b * n + a].powf(-self.exponent))
            }
        }
    }
}

fn row_reduce<T: Scalar>(n: usize, row: impl Fn(usize) -> T + Sync + Send) -> T {
    let rows: Vec<T> = (0..n).into_par_iter().map(row).collect();
    ordered_sum(rows)
}

/// `Σ_{a≠b} (u_a - u_b)(v_a - v_b) k(a, b) μ_a μ_b` for a kernel given by `k`.
fn pair_sum<T: Scalar>(mu: &[T], u: &[T], v: &[T], k: impl Fn(usize, usize) -> T + Sync + Send) -> T {
    row_reduce(mu.len(), |a| {
        let s = ordered_sum((0..mu.len()).map(|b| (u[a] - u[b]) * (v[a] - v[b]) * k(a, b) * mu[b]));
        s * mu[a]
    })
}

fn apply_operator<T: Scalar>(mu: &[T], u: &[T], k: impl Fn(usize, usize) -> T + Sync + Send) -> Vec<T> {
    (0..mu.len())
        .into_par_iter()
        .map(|a| ordered_sum((0..mu.len()).map(|b| (u[a] - u[b]) * k(a, b) * mu[b])))
        .collect()
}

/// `𝓔(f)` by pairwise quadrature.
pub fn energy_quadrature<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    f: &CellFunction<T>,
    params: KernelParams<T>,
) -> Result<T> {
    bilinear_form(tree, f, f, params)
}

/// `B(u, v)` by pairwise quadrature.
pub fn bilinear_form<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    u: &CellFunction<T>,
    v: &CellFunction<T>,
    params: KernelParams<T>,
) -> Result<T> {
    tree.check(u)?;
    tree.check(v)?;
    let eval = KernelEval::new(tree, params)?;
    Ok(pair_sum(tree.leaf_measures(), u.values(), v.values(), |a, b| eval.k(a, b)))
}

/// `D^{2s}_d u` on every leaf.
pub fn apply_d2s<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    u: &CellFunction<T>,
    params: KernelParams<T>,
) -> Result<CellFunction<T>> {
    tree.check(u)?;
    let eval = KernelEval::new(tree, params)?;
    let values = apply_operator(tree.leaf_measures(), u.values(), |a, b| eval.k(a, b));
    Ok(CellFunction::from_parts(tree.id(), values))
}

/// Stored kernel matrix with per-row prefix sums of `k(a, b) μ_b`, used
/// where many functions are evaluated against the same kernel (Galerkin
/// assembly, verification suites).
#[derive(Debug, Clone)]
pub struct PairKernel<T> {
    tree_id: u64,
    params: KernelParams<T>,
    measures: Vec<T>,
    kernel: Vec<T>,
    prefix: Vec<T>,
}

impl<T: Scalar> PairKernel<T> {
    pub fn build<M: SpaceModel<T>>(tree: &DyadicTree<T, M>, params: KernelParams<T>) -> Result<Self> {
        let eval = KernelEval::new(tree, params)?;
        let n = tree.leaf_count();
        let mu = tree.leaf_measures();
        let rows: Vec<(Vec<T>, Vec<T>)> = (0..n)
            .into_par_iter()
            .map(|a| {
                let row: Vec<T> = (0..n).map(|b| eval.k(a, b)).collect();
                let mut prefix = Vec::with_capacity(n + 1);
                let mut acc = T::zero();
                prefix.push(acc);
                for (&k, &m) in row.iter().zip(mu) {
                    acc = acc + k * m;
                    prefix.push(acc);
                }
                (row, prefix)
            })
            .collect();
        let mut kernel = Vec::with_capacity(n * n);
        let mut prefix = Vec::with_capacity(n * (n + 1));
        for (r, p) in rows {
            kernel.extend(r);
            prefix.extend(p);
        }
        Ok(Self {
            tree_id: tree.id(),
            params,
            measures: mu.to_vec(),
            kernel,
            prefix,
        })
    }

    pub fn params(&self) -> KernelParams<T> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    #[inline]
    pub fn entry(&self, a: usize, b: usize) -> T {
        self.kernel[a * self.len() + b]
    }

    fn check(&self, f: &CellFunction<T>) -> Result<()> {
        if f.tree_id() != self.tree_id || f.len() != self.len() {
            return Err(Error::TreeMismatch);
        }
        Ok(())
    }

    pub fn energy(&self, f: &CellFunction<T>) -> Result<T> {
        self.bilinear(f, f)
    }

    pub fn bilinear(&self, u: &CellFunction<T>, v: &CellFunction<T>) -> Result<T> {
        self.check(u)?;
        self.check(v)?;
        Ok(pair_sum(&self.measures, u.values(), v.values(), |a, b| self.entry(a, b)))
    }

    pub fn apply(&self, u: &CellFunction<T>) -> Result<CellFunction<T>> {
        self.check(u)?;
        let values = apply_operator(&self.measures, u.values(), |a, b| self.entry(a, b));
        Ok(CellFunction::from_parts(self.tree_id, values))
    }

    /// `D h` for a function that is constant on contiguous leaf runs and zero
    /// elsewhere, in `O(N · runs)` using the row prefix sums.
    pub fn apply_piecewise(&self, runs: &[(std::ops::Range<usize>, T)]) -> Vec<T> {
        let n = self.len();
        let stride = n + 1;
        (0..n)
            .into_par_iter()
            .map(|a| {
                let row = &self.prefix[a * stride..(a + 1) * stride];
                let own = runs
                    .iter()
                    .find(|(r, _)| r.contains(&a))
                    .map(|&(_, v)| v)
                    .unwrap_or_else(T::zero);
                let mass = ordered_sum(runs.iter().map(|(r, v)| *v * (row[r.end] - row[r.start])));
                own * row[n] - mass
            })
            .collect()
    }
}

/// `Σ_h ⟨f, h⟩² μ(Q(h))^{-2σ}`: the dyadic energy written in Haar
/// coefficients. The top scaling coefficient carries no energy.
pub fn energy_haar<T: Scalar>(sys: &HaarSystem<T>, f: &CellFunction<T>, sigma: T) -> Result<T> {
    check_unit_interval("sigma", sigma)?;
    let d = sys.forward(f)?;
    let e = T::lit(-2.0) * sigma;
    Ok(ordered_sum(
        d.wavelets
            .iter()
            .zip(sys.wavelets())
            .map(|(&c, h)| c * c * h.cube_measure.powf(e)),
    ))
}

/// Exact eigenvalue of the dyadic-kernel form on each wavelet of `sys`:
/// `B_δ(h, h) = 2 (μ(Q)^{-2σ} + τ(Q))` with
/// `τ(Q) = Σ_{A ⊋ Q} (μ(A) - μ(A'))·μ(A)^{-1-2σ}`, `A'` the child of `A`
/// containing `Q`. Wavelets are mutually orthogonal for this form.
pub fn dyadic_quadrature_weights<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    sys: &HaarSystem<T>,
    sigma: T,
) -> Result<Vec<T>> {
    check_unit_interval("sigma", sigma)?;
    if sys.tree_id() != tree.id() {
        return Err(Error::TreeMismatch);
    }
    let two = T::lit(2.0);
    let tail_exp = -(T::one() + two * sigma);
    Ok(sys
        .wavelets()
        .iter()
        .map(|h| {
            let mut tail = T::zero();
            for level in 0..h.level {
                let outer = tree.cube(&h.address.prefix(level)).expect("ancestor").measure;
                let inner = tree.cube(&h.address.prefix(level + 1)).expect("ancestor").measure;
                tail = tail + (outer - inner) * outer.powf(tail_exp);
            }
            two * (h.cube_measure.powf(-two * sigma) + tail)
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub mode: String,
    pub params: serde_json::Value,
    pub energy: f64,
    pub l2: f64,
    #[serde(rename = "sobolevNorm")]
    pub sobolev_norm: f64,
    #[serde(rename = "J")]
    pub max_level: usize,
    pub model: String,
}

impl EnergyReport {
    pub fn new<T: Scalar, M: SpaceModel<T>>(
        tree: &DyadicTree<T, M>,
        params: KernelParams<T>,
        mode: &str,
        energy: T,
        l2_norm_sq: T,
    ) -> Self {
        Self {
            mode: mode.to_string(),
            params: params.params_json(),
            energy: energy.as_f64(),
            l2: l2_norm_sq.as_f64(),
            sobolev_norm: l2_norm_sq.sqrt().as_f64() + energy.sqrt().as_f64(),
            max_level: tree.max_level(),
            model: tree.model().name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    /// `𝓔^δ_σ(f)` from Haar coefficients.
    pub energy: f64,
    /// `λ^{-2σ} ‖f‖²`, accumulated over the same coefficients.
    pub bound: f64,
    pub pass: bool,
    /// Constant in front of `λ^{-2σ}`; exactly 1 for the dyadic energy.
    pub constant: f64,
    pub l2: f64,
    /// `𝓔^d(f) / ‖f‖²` when a metric kernel was supplied.
    pub metric_ratio: Option<f64>,
    /// `𝓔^d(f) / 𝓔^δ(f)` when a metric kernel was supplied.
    pub delta_comparison: Option<f64>,
}

/// Checks `𝓔^δ_σ(f) >= λ^{-2σ} ‖f‖²` for `f` in the span of
/// [`HaarSystem::ker_pilambda_basis`].
///
/// Both sides are accumulated term by term over the same coefficients, so
/// the comparison has no rounding slack.
pub fn coercivity_check<T: Scalar>(
    sys: &HaarSystem<T>,
    f: &CellFunction<T>,
    lambda: T,
    sigma: T,
    metric: Option<&PairKernel<T>>,
) -> Result<CoercivityReport> {
    check_unit_interval("sigma", sigma)?;
    if lambda <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda.as_f64(),
            reason: "must be positive",
        });
    }
    let d = sys.forward(f)?;
    let tol = T::lit(1e-10) * d.energy_sum().sqrt() + T::min_positive_value();
    let mut offending = Vec::new();
    if d.top_scaling.abs() > tol {
        offending.push(format!("top scaling = {}", d.top_scaling));
    }
    for (&c, h) in d.wavelets.iter().zip(sys.wavelets()) {
        if h.cube_measure > lambda && c.abs() > tol {
            offending.push(format!("{}#{} = {}", h.address, h.index, c));
        }
    }
    if !offending.is_empty() {
        return Err(Error::Precondition { offending });
    }

    let e = T::lit(-2.0) * sigma;
    let scale = lambda.powf(e);
    let energy = ordered_sum(
        d.wavelets
            .iter()
            .zip(sys.wavelets())
            .map(|(&c, h)| c * c * h.cube_measure.powf(e)),
    );
    let bound = ordered_sum(
        d.wavelets
            .iter()
            .zip(sys.wavelets())
            .filter(|(_, h)| h.cube_measure <= lambda)
            .map(|(&c, _)| scale * (c * c)),
    );
    let l2 = sys.l2_norm_sq(f)?;
    let (metric_ratio, delta_comparison) = match metric {
        Some(k) => {
            let m = k.energy(f)?;
            (Some((m / l2).as_f64()), Some((m / energy).as_f64()))
        }
        None => (None, None),
    };
    Ok(CoercivityReport {
        energy: energy.as_f64(),
        bound: bound.as_f64(),
        pass: energy >= bound,
        constant: 1.0,
        l2: l2.as_f64(),
        metric_ratio,
        delta_comparison,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadialRatioRow {
    pub r: f64,
    /// `r^{-s} Σ_{0 < d < r} d^{-(γ-s)} μ`.
    pub ratio_local: f64,
    /// `r^{s} Σ_{d >= r} d^{-(γ+s)} μ`, truncated at the window.
    pub ratio_tail: f64,
}

/// Quadrature versions of the local and tail integrals of powers of the
/// distance around the leaf `x`. The leaf's own cell is left out.
pub fn radial_ratios<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    x: &Address,
    s: T,
    radii: &[T],
) -> Result<Vec<RadialRatioRow>> {
    let gamma = tree.model().gamma().ok_or(Error::NotAhlfors {
        model: tree.model().name(),
    })?;
    if s < T::zero() {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s.as_f64(),
            reason: "must be non-negative",
        });
    }
    let xi = tree.leaf_index(x)?;
    let (lo, hi) = tree.resolvable_radii();
    let mu = tree.leaf_measures();
    let dist: Vec<T> = (0..tree.leaf_count()).map(|b| tree.leaf_distance(xi, b)).collect();
    radii
        .iter()
        .map(|&r| {
            if !(r >= lo && r <= hi) {
                return Err(Error::OutOfRange {
                    what: "radius",
                    value: r.as_f64(),
                    min: lo.as_f64(),
                    max: hi.as_f64(),
                });
            }
            let local = ordered_sum(
                (0..mu.len())
                    .filter(|&b| b != xi && dist[b] < r)
                    .map(|b| dist[b].powf(s - gamma) * mu[b]),
            );
            let tail = ordered_sum(
                (0..mu.len())
                    .filter(|&b| b != xi && dist[b] >= r)
                    .map(|b| dist[b].powf(-(gamma + s)) * mu[b]),
            );
            Ok(RadialRatioRow {
                r: r.as_f64(),
                ratio_local: (local / r.powf(s)).as_f64(),
                ratio_tail: (tail * r.powf(s)).as_f64(),
            })
        })
        .collect()
}

/// Largest `|f_a - f_b| / d(a, b)^β` over leaf pairs. All pairs are visited
/// when `samples` covers them; otherwise `samples` random distinct pairs.
pub fn holder_seminorm<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    f: &CellFunction<T>,
    beta: T,
    samples: usize,
    seed: u64,
) -> Result<T> {
    tree.check(f)?;
    if beta <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta.as_f64(),
            reason: "must be positive",
        });
    }
    let n = tree.leaf_count();
    let v = f.values();
    let q = |a: usize, b: usize| (v[a] - v[b]).abs() / tree.leaf_distance(a, b).powf(beta);
    let pairs = n * n.saturating_sub(1) / 2;
    if samples >= pairs {
        let rows: Vec<T> = (0..n)
            .into_par_iter()
            .map(|a| (a + 1..n).map(|b| q(a, b)).fold(T::zero(), T::max))
            .collect();
        return Ok(rows.into_iter().fold(T::zero(), T::max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = T::zero();
    let mut taken = 0;
    while taken < samples {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            best = best.max(q(a, b));
            taken += 1;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub beta: f64,
    pub s: f64,
    pub radius: f64,
    pub levels: [usize; 2],
    pub energies: [f64; 2],
    /// `E(J+2) / E(J) - 1`.
    pub growth: f64,
    pub degenerate: bool,
    pub pass: bool,
}

/// Energy `𝓔^{d,μ}_{s/γ}` of `u = clamp(1 - d(x, c)/R, 0, 1)^β` at resolution
/// `J` and `J + 2`, with `c` the representative point of the first level-1
/// cube and `R` half the level-1 scale. Passes when the energy grows by less
/// than 25% under the refinement.
pub fn lipschitz_energy_growth<T: Scalar, M: SpaceModel<T> + Clone>(
    tree: &DyadicTree<T, M>,
    beta: T,
    s: T,
) -> Result<GrowthReport> {
    let model = tree.model();
    let center = if tree.max_level() >= 1 {
        model.representative_point(&Address::root().child(1))
    } else {
        model.representative_point(&Address::root())
    };
    let radius = model.level_scale(1) * T::lit(0.5);
    lipschitz_energy_growth_at(tree, beta, s, &center, radius)
}

pub fn lipschitz_energy_growth_at<T: Scalar, M: SpaceModel<T> + Clone>(
    tree: &DyadicTree<T, M>,
    beta: T,
    s: T,
    center: &M::Point,
    radius: T,
) -> Result<GrowthReport> {
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta.as_f64(),
            reason: "must lie in (0, 1]",
        });
    }
    if s >= beta {
        return Err(Error::HypothesisViolated {
            s: s.as_f64(),
            beta: beta.as_f64(),
        });
    }
    let params = KernelParams::Metric { s };
    params.validate(tree.model())?;
    let fine = DyadicTree::build(tree.model().clone(), tree.max_level() + 2)?;
    let bump = |t: &DyadicTree<T, M>| {
        CellFunction::from_fn(t, |_, c| {
            let d = t.model().distance(&c.point, center);
            (T::one() - d / radius).max(T::zero()).min(T::one()).powf(beta)
        })
    };
    let (u0, u1) = (bump(tree), bump(&fine));
    let degenerate = u0.values().iter().all(|&v| v == T::zero());
    let e0 = energy_quadrature(tree, &u0, params)?;
    let e1 = energy_quadrature(&fine, &u1, params)?;
    let growth = if degenerate { 0.0 } else { (e1 / e0).as_f64() - 1.0 };
    Ok(GrowthReport {
        beta: beta.as_f64(),
        s: s.as_f64(),
        radius: radius.as_f64(),
        levels: [tree.max_level(), fine.max_level()],
        energies: [e0.as_f64(), e1.as_f64()],
        growth,
        degenerate,
        pass: degenerate || growth < 0.25,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{HalfLineModel, SierpinskiModel};

    fn sier(j: usize) -> DyadicTree<f64, SierpinskiModel<f64>> {
        DyadicTree::build(SierpinskiModel::new(0), j).unwrap()
    }

    #[test]
    fn params_validation() {
        let s = SierpinskiModel::<f64>::new(0);
        let h = HalfLineModel::<f64>::new(0);
        assert!(KernelParams::Metric { s: 0.5 }.validate(&s).is_ok());
        assert!(matches!(
            KernelParams::Metric { s: 0.5 }.validate(&h),
            Err(Error::NotAhlfors { .. })
        ));
        assert!(KernelParams::Metric { s: 1.0 }.validate(&s).is_err());
        assert!(KernelParams::Dyadic { sigma: 0.0 }.validate(&h).is_err());
        assert!(KernelParams::Dyadic { sigma: 0.3 }.validate(&h).is_ok());
    }

    #[test]
    fn constants_have_zero_energy() {
        let t = sier(3);
        let one = CellFunction::constant(&t, 2.5);
        for p in [
            KernelParams::Metric { s: 0.9 },
            KernelParams::Dyadic { sigma: 0.4 },
            KernelParams::BallMeasure { sigma: 0.4 },
        ] {
            assert_eq!(energy_quadrature(&t, &one, p).unwrap(), 0.0);
            assert!(apply_d2s(&t, &one, p).unwrap().values().iter().all(|&v| v == 0.0));
        }
        let sys = HaarSystem::new(&t);
        assert!(energy_haar(&sys, &one, 0.5).unwrap() < 1e-25);
    }

    #[test]
    fn single_wavelet_haar_energy() {
        let t = sier(2);
        let sys = HaarSystem::new(&t);
        let id = sys.ker_pilambda_basis(1.0 / 3.0)[0];
        let h = sys.wavelet_function(id).unwrap();
        assert!((energy_haar(&sys, &h, 0.5).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn three_leaf_operator_by_hand() {
        // J = 1: three cells of measure 1/3, pairwise δ = 1 and pairwise distance 1/2 between centroids.
        let t = sier(1);
        let u = CellFunction::new(&t, vec![2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0]).unwrap();
        let du = apply_d2s(&t, &u, KernelParams::Dyadic { sigma: 0.3 }).unwrap();
        // leaf 0: (2/3+1/3)·1·(1/3)·2 = 2/3; leaves 1, 2: (-1)·1·(1/3) + 0 = -1/3
        let want = [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
        for (g, w) in du.values().iter().zip(want) {
            assert!((g - w).abs() < 1e-14);
        }
        let s = 0.9;
        let g = SierpinskiModel::<f64>::dimension();
        let k = 0.5f64.powf(-(g + 2.0 * s));
        let dm = apply_d2s(&t, &u, KernelParams::Metric { s }).unwrap();
        let want = [2.0 * k / 3.0, -k / 3.0, -k / 3.0];
        for (g, w) in dm.values().iter().zip(want) {
            assert!((g - w).abs() < 1e-12 * w.abs());
        }
    }

    #[test]
    fn stored_kernel_matches_on_the_fly() {
        let t = sier(3);
        let p = KernelParams::Metric { s: 0.7 };
        let k = PairKernel::build(&t, p).unwrap();
        let f = CellFunction::random(&t, 9);
        let a = energy_quadrature(&t, &f, p).unwrap();
        let b = k.energy(&f).unwrap();
        assert!((a - b).abs() <= 1e-13 * a);
        let sys = HaarSystem::new(&t);
        let h = &sys.wavelets()[5];
        let runs: Vec<_> = h
            .child_leaves
            .iter()
            .cloned()
            .zip(h.child_values.iter().copied())
            .collect();
        let fast = k.apply_piecewise(&runs);
        let slow = k.apply(&sys.wavelet_function(5).unwrap()).unwrap();
        for (x, y) in fast.iter().zip(slow.values()) {
            assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn coercivity_edge_cases() {
        let t = sier(2);
        let sys = HaarSystem::new(&t);
        let zero = CellFunction::zeros(&t);
        let r = coercivity_check(&sys, &zero, 1.0 / 3.0, 0.5, None).unwrap();
        assert!(r.pass && r.energy == 0.0);

        let id = sys.ker_pilambda_basis(1.0 / 3.0)[0];
        let h = sys.wavelet_function(id).unwrap();
        let r = coercivity_check(&sys, &h, 1.0 / 3.0, 0.5, None).unwrap();
        assert!(r.pass);
        assert!((r.energy - 3.0).abs() < 1e-12 && (r.bound - 3.0).abs() < 1e-12);

        let bad = CellFunction::random(&t, 1);
        match coercivity_check(&sys, &bad, 1.0 / 3.0, 0.5, None) {
            Err(Error::Precondition { offending }) => assert!(offending.len() >= 2),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn lemma1_requires_ahlfors() {
        let t = DyadicTree::build(HalfLineModel::<f64>::new(0), 3).unwrap();
        let x = t.leaves()[0].address.clone();
        assert!(matches!(
            radial_ratios(&t, &x, 0.5, &[0.5]),
            Err(Error::NotAhlfors { .. })
        ));
    }

    #[test]
    fn holder_of_constant_and_distance() {
        let t = sier(4);
        assert_eq!(
            holder_seminorm(&t, &CellFunction::constant(&t, 3.0), 0.5, usize::MAX, 0).unwrap(),
            0.0
        );
        let p = t.leaves()[0].point;
        let beta = 0.6;
        let f = CellFunction::from_fn(&t, |_, c| t.model().distance(&c.point, &p).powf(beta));
        let v = holder_seminorm(&t, &f, beta, usize::MAX, 0).unwrap();
        assert!(v > 1.0 / 3.0 && v <= 3.0, "{v}");
    }

    #[test]
    fn lipschitz_growth_rejects_s_above_beta() {
        let t = sier(2);
        assert!(matches!(
            lipschitz_energy_growth(&t, 0.6, 0.9),
            Err(Error::HypothesisViolated { .. })
        ));
        let far = [num_rational::Ratio::from_integer(10), num_rational::Ratio::from_integer(10)];
        let r = lipschitz_energy_growth_at(&t, 1.0, 0.5, &far, 0.1).unwrap();
        assert!(r.degenerate && r.energies == [0.0, 0.0]);
    }
}
