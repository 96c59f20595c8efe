//! Operator expression trees.
//!
//! Leaves are firmly nonexpansive maps on ℝᵈ; interior nodes build
//! compositions, convex combinations, relaxations and block (product) maps.
//! Every public constructor validates its inputs, so a value of
//! [`OperatorExpr`] is always nonexpansive and carries an averagedness
//! constant that can be read back with [`OperatorExpr::averaged_constant`].

use crate::error::{invalid, Error, Result};
use crate::hyperbola::project_hyperbola_epigraph;
use crate::resolvent::ResolventMap;
use crate::scalar::Real;
use crate::vector::Vector;

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Node<S> {
    /// `x ↦ x − a`
    Translation {
        a: Vector<S>,
    },
    /// `x ↦ βx − a`
    AffineScale {
        beta: S,
        a: Vector<S>,
    },
    /// Projector onto `{x : ⟨n, x⟩ = offset}`.
    ProjHyperplane {
        normal: Vector<S>,
        offset: S,
    },
    /// Projector onto `{x : ⟨n, x⟩ ≤ offset}`.
    ProjHalfspace {
        normal: Vector<S>,
        offset: S,
    },
    ProjBox {
        lo: Vector<S>,
        hi: Vector<S>,
    },
    ProjBall {
        center: Vector<S>,
        radius: S,
    },
    /// Projector onto `{(x, y) : y ≥ 1/x > 0}` in ℝ².
    ProjHyperbolaEpi,
    Resolvent(ResolventMap<S>),
    /// Product map applying child `i` to the `i`-th coordinate slice.
    Block {
        children: Vec<OperatorExpr<S>>,
    },
    /// Children in application order: the first child is applied first.
    Compose {
        children: Vec<OperatorExpr<S>>,
    },
    ConvexCombo {
        weights: Vec<S>,
        children: Vec<OperatorExpr<S>>,
    },
    /// `(1 − α) Id + α inner`
    Averaged {
        alpha: S,
        inner: Box<OperatorExpr<S>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorExpr<S> {
    node: Node<S>,
    dim: usize,
    label: Option<String>,
}

impl<S: Real> OperatorExpr<S> {
    fn leaf(node: Node<S>, dim: usize) -> Self {
        Self { node, dim, label: None }
    }

    pub fn translation(a: Vector<S>) -> Self {
        let dim = a.dim();
        Self::leaf(Node::Translation { a }, dim)
    }

    pub fn identity(dim: usize) -> Self {
        Self::translation(Vector::zeros(dim))
    }

    pub fn affine_scale(beta: S, a: Vector<S>) -> Result<Self> {
        if !(beta >= S::zero() && beta <= S::one()) {
            return Err(invalid("beta", format!("{beta} is outside [0, 1]")));
        }
        let dim = a.dim();
        Ok(Self::leaf(Node::AffineScale { beta, a }, dim))
    }

    /// Builds an affine map with any `beta`, bypassing validation, so the
    /// checkers have something to reject.
    #[cfg(test)]
    pub(crate) fn unchecked_affine_scale(beta: S, a: Vector<S>) -> Self {
        let dim = a.dim();
        Self::leaf(Node::AffineScale { beta, a }, dim)
    }

    pub fn proj_hyperplane(normal: Vector<S>, offset: S) -> Result<Self> {
        check_normal(&normal, offset)?;
        let dim = normal.dim();
        Ok(Self::leaf(Node::ProjHyperplane { normal, offset }, dim))
    }

    pub fn proj_halfspace(normal: Vector<S>, offset: S) -> Result<Self> {
        check_normal(&normal, offset)?;
        let dim = normal.dim();
        Ok(Self::leaf(Node::ProjHalfspace { normal, offset }, dim))
    }

    pub fn proj_box(lo: Vector<S>, hi: Vector<S>) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
            return Err(invalid("lo", "box lower corner exceeds upper corner"));
        }
        let dim = lo.dim();
        Ok(Self::leaf(Node::ProjBox { lo, hi }, dim))
    }

    pub fn proj_ball(center: Vector<S>, radius: S) -> Result<Self> {
        if !(radius > S::zero() && radius.is_finite()) {
            return Err(invalid("radius", format!("{radius} must be positive and finite")));
        }
        let dim = center.dim();
        Ok(Self::leaf(Node::ProjBall { center, radius }, dim))
    }

    pub fn proj_hyperbola_epi() -> Self {
        Self::leaf(Node::ProjHyperbolaEpi, 2)
    }

    pub(crate) fn from_resolvent(map: ResolventMap<S>) -> Self {
        let dim = map.dim();
        Self::leaf(Node::Resolvent(map), dim)
    }

    pub fn block(children: Vec<Self>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::TooFewChildren {
                kind: "block",
                min: 1,
                found: 0,
            });
        }
        let dim = children.iter().map(|c| c.dim).sum();
        Ok(Self {
            node: Node::Block { children },
            dim,
            label: None,
        })
    }

    pub fn compose(children: Vec<Self>) -> Result<Self> {
        let dim = common_dim("compose", &children)?;
        Ok(Self {
            node: Node::Compose { children },
            dim,
            label: None,
        })
    }

    pub fn convex_combination(weights: Vec<S>, children: Vec<Self>) -> Result<Self> {
        let dim = common_dim("convex_combo", &children)?;
        if weights.len() != children.len() {
            return Err(invalid(
                "weights",
                format!("{} weights for {} children", weights.len(), children.len()),
            ));
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(w > S::zero() && w <= S::one()) {
                return Err(Error::WeightRange {
                    index,
                    value: w.as_f64(),
                });
            }
        }
        let sum: S = weights.iter().copied().sum();
        if (sum - S::one()).abs() > S::tol(WEIGHT_SUM_TOLERANCE) {
            return Err(Error::WeightSum { sum: sum.as_f64() });
        }
        Ok(Self {
            node: Node::ConvexCombo { weights, children },
            dim,
            label: None,
        })
    }

    pub fn averaged(alpha: S, inner: Self) -> Result<Self> {
        if !(alpha > S::zero() && alpha < S::one()) {
            return Err(invalid("alpha", format!("{alpha} is outside (0, 1)")));
        }
        let dim = inner.dim;
        Ok(Self {
            node: Node::Averaged {
                alpha,
                inner: Box::new(inner),
            },
            dim,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self) -> &Node<S> {
        &self.node
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.node {
            Node::Translation { .. } => "translation",
            Node::AffineScale { .. } => "affine_scale",
            Node::ProjHyperplane { .. } => "proj_hyperplane",
            Node::ProjHalfspace { .. } => "proj_halfspace",
            Node::ProjBox { .. } => "proj_box",
            Node::ProjBall { .. } => "proj_ball",
            Node::ProjHyperbolaEpi => "proj_hyperbola_epi",
            Node::Resolvent(_) => "resolvent",
            Node::Block { .. } => "block",
            Node::Compose { .. } => "compose",
            Node::ConvexCombo { .. } => "convex_combo",
            Node::Averaged { .. } => "averaged",
        }
    }

    pub fn is_projector(&self) -> bool {
        matches!(
            self.node,
            Node::ProjHyperplane { .. }
                | Node::ProjHalfspace { .. }
                | Node::ProjBox { .. }
                | Node::ProjBall { .. }
                | Node::ProjHyperbolaEpi
        )
    }

    /// Evaluates `T x`.
    pub fn apply(&self, x: &Vector<S>) -> Result<Vector<S>> {
        x.check_dim(self.dim)?;
        self.eval(x)
    }

    fn eval(&self, x: &Vector<S>) -> Result<Vector<S>> {
        Ok(match &self.node {
            Node::Translation { a } => x - a,
            Node::AffineScale { beta, a } => x.scale(*beta).axpy(-S::one(), a),
            Node::ProjHyperplane { normal, offset } => {
                let excess = (normal.dot(x) - *offset) / normal.norm_sq();
                x.axpy(-excess, normal)
            }
            Node::ProjHalfspace { normal, offset } => {
                let excess = normal.dot(x) - *offset;
                if excess <= S::zero() {
                    x.clone()
                } else {
                    x.axpy(-excess / normal.norm_sq(), normal)
                }
            }
            Node::ProjBox { lo, hi } => {
                let clamped = x.zip_map(lo, |c, l| c.max(l));
                clamped.zip_map(hi, |c, h| c.min(h))
            }
            Node::ProjBall { center, radius } => {
                let offset = x - center;
                let dist = offset.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center.axpy(*radius / dist, &offset)
                }
            }
            Node::ProjHyperbolaEpi => project_hyperbola_epigraph(x)?,
            Node::Resolvent(map) => map.eval(x)?,
            Node::Block { children } => {
                let mut out = Vec::with_capacity(self.dim);
                let mut start = 0;
                for child in children {
                    let part = child.eval(&x.slice(start, child.dim))?;
                    out.extend_from_slice(part.coords());
                    start += child.dim;
                }
                Vector::from_raw(out)
            }
            Node::Compose { children } => {
                let mut y = x.clone();
                for child in children {
                    y = child.eval(&y)?;
                }
                y
            }
            Node::ConvexCombo { weights, children } => {
                let mut acc = Vector::zeros(self.dim);
                for (&w, child) in weights.iter().zip(children) {
                    acc = acc.axpy(w, &child.eval(x)?);
                }
                acc
            }
            Node::Averaged { alpha, inner } => {
                let tx = inner.eval(x)?;
                x.scale(S::one() - *alpha).axpy(*alpha, &tx)
            }
        })
    }

    /// Smallest α this construction certifies `T` to be α-averaged with, or
    /// `None` when no averagedness guarantee is known.
    pub fn averaged_constant(&self) -> Option<S> {
        let half = S::lit(0.5);
        match &self.node {
            Node::AffineScale { beta, .. } => (*beta >= S::zero() && *beta <= S::one()).then_some(half),
            Node::Translation { .. }
            | Node::ProjHyperplane { .. }
            | Node::ProjHalfspace { .. }
            | Node::ProjBox { .. }
            | Node::ProjBall { .. }
            | Node::ProjHyperbolaEpi
            | Node::Resolvent(_) => Some(half),
            Node::Block { children } => children
                .iter()
                .map(|c| c.averaged_constant())
                .try_fold(S::zero(), |m, a| a.map(|a| m.max(a))),
            Node::Compose { children } => {
                let mut constants = children.iter().map(|c| c.averaged_constant());
                let first = constants.next()??;
                constants.try_fold(first, |acc, next| next.map(|a| compose_averaged(acc, a)))
            }
            Node::ConvexCombo { weights, children } => weights
                .iter()
                .zip(children)
                .try_fold(S::zero(), |acc, (&w, c)| c.averaged_constant().map(|a| acc + w * a)),
            Node::Averaged { alpha, inner } => match inner.averaged_constant() {
                Some(beta) => Some(*alpha * beta),
                None if inner.lipschitz_bound() <= S::one() => Some(*alpha),
                None => None,
            },
        }
    }

    pub fn is_firmly_nonexpansive(&self) -> bool {
        self.averaged_constant()
            .is_some_and(|a| a <= S::lit(0.5) + S::epsilon() * S::lit(8.0))
    }

    /// Structural upper bound on the Lipschitz constant.
    pub fn lipschitz_bound(&self) -> S {
        match &self.node {
            Node::AffineScale { beta, .. } => beta.abs(),
            Node::Translation { .. }
            | Node::ProjHyperplane { .. }
            | Node::ProjHalfspace { .. }
            | Node::ProjBox { .. }
            | Node::ProjBall { .. }
            | Node::ProjHyperbolaEpi => S::one(),
            Node::Resolvent(map) => map.lipschitz_bound(),
            Node::Block { children } => children.iter().fold(S::zero(), |m, c| m.max(c.lipschitz_bound())),
            Node::Compose { children } => children.iter().fold(S::one(), |p, c| p * c.lipschitz_bound()),
            Node::ConvexCombo { weights, children } => weights
                .iter()
                .zip(children)
                .map(|(&w, c)| w * c.lipschitz_bound())
                .sum(),
            Node::Averaged { alpha, inner } => S::one() - *alpha + *alpha * inner.lipschitz_bound(),
        }
    }

    /// `Some(a)` when the expression is globally the translation `x ↦ x − a`.
    pub fn translation_offset(&self) -> Option<Vector<S>> {
        match &self.node {
            Node::Translation { a } => Some(a.clone()),
            Node::AffineScale { beta, a } if *beta == S::one() => Some(a.clone()),
            Node::Resolvent(map) => map.translation_offset(),
            Node::Block { children } => {
                let parts: Option<Vec<_>> = children.iter().map(|c| c.translation_offset()).collect();
                parts.map(|p| Vector::concat(&p))
            }
            Node::Compose { children } => children.iter().try_fold(Vector::zeros(self.dim), |acc, c| {
                c.translation_offset().map(|a| &acc + &a)
            }),
            Node::ConvexCombo { weights, children } => weights
                .iter()
                .zip(children)
                .try_fold(Vector::zeros(self.dim), |acc, (&w, c)| {
                    c.translation_offset().map(|a| acc.axpy(w, &a))
                }),
            Node::Averaged { alpha, inner } => inner.translation_offset().map(|a| a.scale(*alpha)),
            _ => None,
        }
    }

    pub fn children(&self) -> &[Self] {
        match &self.node {
            Node::Block { children } | Node::Compose { children } | Node::ConvexCombo { children, .. } => children,
            Node::Averaged { inner, .. } => std::slice::from_ref(inner.as_ref()),
            _ => &[],
        }
    }
}

/// Averagedness constant of `T₂T₁` for α₁- and α₂-averaged factors.
fn compose_averaged<S: Real>(a1: S, a2: S) -> S {
    let denom = S::one() - a1 * a2;
    if denom <= S::zero() {
        return S::one();
    }
    (a1 + a2 - S::lit(2.0) * a1 * a2) / denom
}

fn check_normal<S: Real>(normal: &Vector<S>, offset: S) -> Result<()> {
    if normal.norm() == S::zero() {
        return Err(invalid("normal", "normal vector must be nonzero"));
    }
    if !offset.is_finite() {
        return Err(invalid("offset", "offset must be finite"));
    }
    Ok(())
}

fn common_dim<S: Real>(kind: &'static str, children: &[OperatorExpr<S>]) -> Result<usize> {
    if children.len() < 2 {
        return Err(Error::TooFewChildren {
            kind,
            min: 2,
            found: children.len(),
        });
    }
    let dim = children[0].dim;
    for child in &children[1..] {
        if child.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: child.dim,
            });
        }
    }
    Ok(dim)
}

/// Convenience constructor: composition of two or more operators, first
/// listed applied first.
pub fn compose<S: Real>(children: Vec<OperatorExpr<S>>) -> Result<OperatorExpr<S>> {
    OperatorExpr::compose(children)
}

pub fn convex_combination<S: Real>(weights: Vec<S>, children: Vec<OperatorExpr<S>>) -> Result<OperatorExpr<S>> {
    OperatorExpr::convex_combination(weights, children)
}
