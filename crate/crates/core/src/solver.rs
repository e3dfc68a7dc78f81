//! Galerkin solves on `ker Π_λ`, the span of wavelets whose base cube has
//! measure at most `λ`, where the energy is coercive.
//!
//! The bilinear form is normalised as `B(u, v) = 2 ⟨D u, v⟩` for the
//! quadrature kernels (metric and ball-measure modes). In dyadic mode the
//! Gram matrix is the Haar-diagonal form `B(h, h') = μ(Q(h))^{-2σ} δ_{hh'}`;
//! [`GalerkinProblem::assemble_quadrature`] gives the pairwise-quadrature
//! alternative, which is also diagonal but with larger entries.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::dyadic::{CellFunction, DyadicTree};
use crate::energy::{dyadic_quadrature_weights, KernelParams, PairKernel};
use crate::error::{Error, Result};
use crate::geometry::{Address, SpaceModel};
use crate::haar::{HaarDecomposition, HaarSystem};
use crate::linalg::{conjugate_gradient, mat_vec, Cholesky};
use crate::scalar::{ordered_sum, Scalar};

/// Above this many unknowns the default solver switches to CG.
pub const DIRECT_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Cholesky,
    ConjugateGradient,
}

#[derive(Debug, Clone)]
pub struct WeakSolution<T> {
    /// Coefficients in the order of [`GalerkinProblem::basis`].
    pub coefficients: Vec<T>,
    pub function: CellFunction<T>,
    /// `max |G c - rhs|`.
    pub residual_norm: T,
    pub solver: SolverKind,
}

#[derive(Debug, Clone)]
pub struct GalerkinProblem<T> {
    system: HaarSystem<T>,
    params: KernelParams<T>,
    gamma: Option<T>,
    lambda: T,
    basis: Vec<usize>,
    gram: Vec<T>,
    leaves: HashMap<Address, usize>,
}

impl<T: Scalar> GalerkinProblem<T> {
    /// Assembles the Gram matrix of `B` on `ker Π_λ`.
    pub fn assemble<M: SpaceModel<T>>(
        tree: &DyadicTree<T, M>,
        sys: &HaarSystem<T>,
        params: KernelParams<T>,
        lambda: T,
    ) -> Result<Self> {
        match params {
            KernelParams::Dyadic { sigma } => {
                let mut p = Self::empty(tree, sys, params, lambda)?;
                let m = p.basis.len();
                for (i, &id) in p.basis.iter().enumerate() {
                    let mu = sys.wavelets()[id].cube_measure;
                    p.gram[i * m + i] = mu.powf(T::lit(-2.0) * sigma);
                }
                Ok(p)
            }
            _ => Self::assemble_quadrature(tree, sys, params, lambda),
        }
    }

    /// Gram matrix from the pairwise-quadrature form `2 ⟨D h, h'⟩` in any mode.
    pub fn assemble_quadrature<M: SpaceModel<T>>(
        tree: &DyadicTree<T, M>,
        sys: &HaarSystem<T>,
        params: KernelParams<T>,
        lambda: T,
    ) -> Result<Self> {
        let mut p = Self::empty(tree, sys, params, lambda)?;
        let m = p.basis.len();
        if let KernelParams::Dyadic { sigma } = params {
            let w = dyadic_quadrature_weights(tree, sys, sigma)?;
            for (i, &id) in p.basis.iter().enumerate() {
                p.gram[i * m + i] = w[id];
            }
            return Ok(p);
        }
        let kernel = PairKernel::build(tree, params)?;
        let two = T::lit(2.0);
        for (i, &id) in p.basis.iter().enumerate() {
            let h = &sys.wavelets()[id];
            let runs: Vec<_> = h
                .child_leaves
                .iter()
                .cloned()
                .zip(h.child_values.iter().copied())
                .collect();
            let dh = CellFunction::from_parts(tree.id(), kernel.apply_piecewise(&runs));
            let coeffs = sys.forward(&dh)?.wavelets;
            for (k, &other) in p.basis.iter().enumerate() {
                p.gram[k * m + i] = two * coeffs[other];
            }
        }
        let half = T::lit(0.5);
        for i in 0..m {
            for k in i + 1..m {
                let v = half * (p.gram[i * m + k] + p.gram[k * m + i]);
                p.gram[i * m + k] = v;
                p.gram[k * m + i] = v;
            }
        }
        Ok(p)
    }

    fn empty<M: SpaceModel<T>>(
        tree: &DyadicTree<T, M>,
        sys: &HaarSystem<T>,
        params: KernelParams<T>,
        lambda: T,
    ) -> Result<Self> {
        params.validate(tree.model())?;
        if sys.tree_id() != tree.id() {
            return Err(Error::TreeMismatch);
        }
        if lambda.partial_cmp(&T::zero()) != Some(Ordering::Greater) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda.as_f64(),
                reason: "must be positive",
            });
        }
        let basis = sys.ker_pilambda_basis(lambda);
        if basis.is_empty() {
            return Err(Error::EmptyBasis {
                lambda: lambda.as_f64(),
            });
        }
        let m = basis.len();
        Ok(Self {
            system: sys.clone(),
            params,
            gamma: tree.model().gamma(),
            lambda,
            basis,
            gram: vec![T::zero(); m * m],
            leaves: tree.leaves().iter().enumerate().map(|(i, c)| (c.address.clone(), i)).collect(),
        })
    }

    pub fn params(&self) -> KernelParams<T> {
        self.params
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Wavelet ids spanning `ker Π_λ`.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Row-major Gram matrix `G[i][k] = B(h_k, h_i)`.
    pub fn gram(&self) -> &[T] {
        &self.gram
    }

    /// Solves `G c = rhs` directly up to [`DIRECT_LIMIT`] unknowns, by CG beyond.
    pub fn lax_milgram_solve(&self, rhs: &[T]) -> Result<WeakSolution<T>> {
        let kind = if self.len() <= DIRECT_LIMIT {
            SolverKind::Cholesky
        } else {
            SolverKind::ConjugateGradient
        };
        self.solve_with(rhs, kind)
    }

    pub fn solve_with(&self, rhs: &[T], kind: SolverKind) -> Result<WeakSolution<T>> {
        let m = self.len();
        if rhs.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: rhs.len(),
            });
        }
        let coefficients = match kind {
            SolverKind::Cholesky => Cholesky::factor(&self.gram, m)?.solve(rhs),
            SolverKind::ConjugateGradient => {
                let tol = T::epsilon().sqrt() * T::lit(1e-4);
                conjugate_gradient(&self.gram, m, rhs, tol, 10 * m + 100)?.0
            }
        };
        let gc = mat_vec(&self.gram, m, &coefficients);
        let residual_norm = gc
            .iter()
            .zip(rhs)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        let function = self.synthesize(&coefficients)?;
        Ok(WeakSolution {
            coefficients,
            function,
            residual_norm,
            solver: kind,
        })
    }

    fn synthesize(&self, coefficients: &[T]) -> Result<CellFunction<T>> {
        let d = HaarDecomposition::from_entries(
            &self.system,
            T::zero(),
            self.basis.iter().copied().zip(coefficients.iter().copied()),
        )?;
        self.system.inverse(&d)
    }

    /// `G(x, ·)`: the solution of `B(u, v) = v(x)` for all `v` in the
    /// subspace, with `x` a leaf address. In metric mode the point evaluation
    /// is only bounded on the Sobolev space when `s > γ/2`.
    pub fn green_function(&self, x: &Address) -> Result<WeakSolution<T>> {
        if let (KernelParams::Metric { s }, Some(gamma)) = (self.params, self.gamma) {
            let bound = gamma / T::lit(2.0);
            if s <= bound {
                return Err(Error::GreenThreshold {
                    s: s.as_f64(),
                    bound: bound.as_f64(),
                });
            }
        }
        let leaf = self.leaf_of(x)?;
        let rhs: Vec<T> = self
            .basis
            .iter()
            .map(|&id| self.system.wavelets()[id].value_at(leaf))
            .collect();
        self.lax_milgram_solve(&rhs)
    }

    /// Solves `B(u, v) = ⟨f, v⟩` for all `v` in the subspace.
    pub fn weak_solve(&self, f: &CellFunction<T>) -> Result<WeakSolution<T>> {
        let c = self.system.forward(f)?.wavelets;
        let rhs: Vec<T> = self.basis.iter().map(|&id| c[id]).collect();
        self.lax_milgram_solve(&rhs)
    }

    /// `B(u, v)` for functions in the subspace, via the Gram matrix.
    pub fn form(&self, u: &CellFunction<T>, v: &CellFunction<T>) -> Result<T> {
        let cu = self.system.forward(u)?.wavelets;
        let cv = self.system.forward(v)?.wavelets;
        let m = self.len();
        let a: Vec<T> = self.basis.iter().map(|&id| cu[id]).collect();
        let b: Vec<T> = self.basis.iter().map(|&id| cv[id]).collect();
        let ga = mat_vec(&self.gram, m, &a);
        Ok(ordered_sum(ga.iter().zip(&b).map(|(&p, &q)| p * q)))
    }

    fn leaf_of(&self, x: &Address) -> Result<usize> {
        self.leaves.get(x).copied().ok_or_else(|| Error::InvalidAddress {
            address: x.to_string(),
            reason: "not a leaf of this tree".into(),
        })
    }
}

/// `Σ_{h : μ(Q(h)) <= λ} μ(Q(h))^{2σ} h(x) h(·)`, the dyadic-mode Green
/// function written out in the Haar basis.
pub fn dyadic_green_closed_form<T: Scalar, M: SpaceModel<T>>(
    tree: &DyadicTree<T, M>,
    sys: &HaarSystem<T>,
    x: &Address,
    sigma: T,
    lambda: T,
) -> Result<CellFunction<T>> {
    let leaf = tree.leaf_index(x)?;
    let e = T::lit(2.0) * sigma;
    let entries: Vec<(usize, T)> = sys
        .ker_pilambda_basis(lambda)
        .into_iter()
        .map(|id| {
            let h = &sys.wavelets()[id];
            (id, h.cube_measure.powf(e) * h.value_at(leaf))
        })
        .collect();
    let d = HaarDecomposition::from_entries(sys, T::zero(), entries)?;
    sys.inverse(&d)
}
