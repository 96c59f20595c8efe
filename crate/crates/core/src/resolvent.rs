//! Maximally monotone operators with closed-form resolvents.
//!
//! A [`MonotoneSpec`] describes `A`; [`resolvent`] turns it into the firmly
//! nonexpansive operator `J_A = (Id + A)⁻¹`. Shifted operators
//! `Ã = −v + A(· − v)` have resolvent `v + J_A`, which is how they are
//! evaluated. [`verify_resolvent_shift`] checks that identity against a
//! direct inversion of `Id + Ã` that never calls `J_A`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{Dense, Lu};
use crate::operator::OperatorExpr;
use crate::sampling::{seeded, uniform_vector};
use crate::scalar::Real;
use crate::vector::Vector;

/// Largest dimension accepted for dense linear operators.
pub const MAX_LINEAR_DIM: usize = 64;

const MONOTONICITY_SLACK: f64 = 1e-10;
const SOLVE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum MonotoneKind<S> {
    /// `A ≡ {c}`
    ConstantMap { c: Vector<S> },
    /// `A = M` with `⟨x, Mx⟩ ≥ 0`.
    PsdLinear { matrix: Vec<Vec<S>> },
    /// `∂(w‖·‖₁)`
    SubdiffAbs { weight: S },
    /// Normal cone of the box `[lo, hi]`.
    NormalConeBox { lo: Vector<S>, hi: Vector<S> },
    /// `−v + inner(· − v)`
    Shifted { inner: Box<MonotoneSpec<S>>, v: Vector<S> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneSpec<S> {
    kind: MonotoneKind<S>,
    dim: usize,
}

impl<S: Real> MonotoneSpec<S> {
    pub fn constant_map(c: Vector<S>) -> Self {
        let dim = c.dim();
        Self {
            kind: MonotoneKind::ConstantMap { c },
            dim,
        }
    }

    pub fn psd_linear(matrix: Vec<Vec<S>>) -> Result<Self> {
        let dim = matrix.len();
        if dim == 0 || dim > MAX_LINEAR_DIM {
            return Err(invalid(
                "matrix",
                format!("dimension {dim} outside 1..={MAX_LINEAR_DIM}"),
            ));
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        if matrix.iter().flatten().any(|m| !m.is_finite()) {
            return Err(invalid("matrix", "entries must be finite"));
        }
        if !Dense::from_rows(&matrix).is_monotone(S::lit(MONOTONICITY_SLACK)) {
            return Err(Error::NotMonotone);
        }
        Ok(Self {
            kind: MonotoneKind::PsdLinear { matrix },
            dim,
        })
    }

    pub fn subdiff_abs(weight: S, dim: usize) -> Result<Self> {
        if !(weight >= S::zero() && weight.is_finite()) {
            return Err(invalid("weight", format!("{weight} must be finite and nonnegative")));
        }
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            kind: MonotoneKind::SubdiffAbs { weight },
            dim,
        })
    }

    pub fn normal_cone_box(lo: Vector<S>, hi: Vector<S>) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
            return Err(invalid("lo", "box lower corner exceeds upper corner"));
        }
        let dim = lo.dim();
        Ok(Self {
            kind: MonotoneKind::NormalConeBox { lo, hi },
            dim,
        })
    }

    pub fn shifted(&self, v: Vector<S>) -> Result<Self> {
        v.check_dim(self.dim)?;
        Ok(Self {
            kind: MonotoneKind::Shifted {
                inner: Box::new(self.clone()),
                v,
            },
            dim: self.dim,
        })
    }

    pub fn kind(&self) -> &MonotoneKind<S> {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `Ã := −v + A(· − v)`; nothing is evaluated.
pub fn shift_operator<S: Real>(spec: &MonotoneSpec<S>, v: Vector<S>) -> Result<MonotoneSpec<S>> {
    spec.shifted(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Kernel<S> {
    Constant(Vector<S>),
    Linear { plus_identity: Dense<S>, lu: Lu<S> },
    SoftThreshold(S),
    Clamp { lo: Vector<S>, hi: Vector<S> },
    Shifted { inner: Box<Kernel<S>>, v: Vector<S> },
}

impl<S: Real> Kernel<S> {
    fn build(spec: &MonotoneSpec<S>) -> Result<Self> {
        Ok(match &spec.kind {
            MonotoneKind::ConstantMap { c } => Kernel::Constant(c.clone()),
            MonotoneKind::PsdLinear { matrix } => {
                let plus_identity = Dense::from_rows(matrix).identity_plus();
                let lu = Lu::factor(&plus_identity).ok_or(Error::SolveFailed {
                    residual: f64::INFINITY,
                    tolerance: SOLVE_TOLERANCE,
                })?;
                Kernel::Linear { plus_identity, lu }
            }
            MonotoneKind::SubdiffAbs { weight } => Kernel::SoftThreshold(*weight),
            MonotoneKind::NormalConeBox { lo, hi } => Kernel::Clamp {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            MonotoneKind::Shifted { inner, v } => Kernel::Shifted {
                inner: Box::new(Kernel::build(inner)?),
                v: v.clone(),
            },
        })
    }

    fn eval(&self, x: &Vector<S>) -> Result<Vector<S>> {
        Ok(match self {
            Kernel::Constant(c) => x - c,
            Kernel::Linear { plus_identity, lu } => solve_refined(plus_identity, lu, x)?,
            Kernel::SoftThreshold(w) => x.map(|c| c.signum() * (c.abs() - *w).max(S::zero())),
            Kernel::Clamp { lo, hi } => x.zip_map(lo, |c, l| c.max(l)).zip_map(hi, |c, h| c.min(h)),
            Kernel::Shifted { inner, v } => v + &inner.eval(x)?,
        })
    }

    fn translation_offset(&self) -> Option<Vector<S>> {
        match self {
            Kernel::Constant(c) => Some(c.clone()),
            Kernel::Shifted { inner, v } => inner.translation_offset().map(|o| &o - v),
            _ => None,
        }
    }
}

/// Solves `(I + M) y = x` with one step of iterative refinement and checks
/// the residual against `1e-12 ‖x‖`.
fn solve_refined<S: Real>(plus_identity: &Dense<S>, lu: &Lu<S>, x: &Vector<S>) -> Result<Vector<S>> {
    let mut y = lu.solve(x.coords());
    let residual_of = |y: &[S]| -> Vec<S> {
        let ay = plus_identity.mul_vec(y);
        x.coords().iter().zip(ay).map(|(&b, a)| b - a).collect()
    };
    let correction = lu.solve(&residual_of(&y));
    for (yi, ci) in y.iter_mut().zip(correction) {
        *yi = *yi + ci;
    }
    let residual = Vector::from_raw(residual_of(&y)).norm();
    let tolerance = S::tol(SOLVE_TOLERANCE) * x.norm();
    if !(residual <= tolerance) {
        return Err(Error::SolveFailed {
            residual: residual.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    Ok(Vector::from_raw(y))
}

/// Evaluable resolvent `J_A` together with the operator it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventMap<S> {
    spec: MonotoneSpec<S>,
    kernel: Kernel<S>,
}

impl<S: Real> ResolventMap<S> {
    pub fn spec(&self) -> &MonotoneSpec<S> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub(crate) fn eval(&self, x: &Vector<S>) -> Result<Vector<S>> {
        self.kernel.eval(x)
    }

    pub(crate) fn lipschitz_bound(&self) -> S {
        S::one()
    }

    pub(crate) fn translation_offset(&self) -> Option<Vector<S>> {
        self.kernel.translation_offset()
    }

    /// Whether `J_A` provably has a fixed point (so its displacement vector is 0).
    pub fn has_fixed_point(&self) -> bool {
        matches!(
            self.spec.kind,
            MonotoneKind::PsdLinear { .. } | MonotoneKind::SubdiffAbs { .. } | MonotoneKind::NormalConeBox { .. }
        )
    }
}

/// `J_A = (Id + A)⁻¹` as an operator expression.
pub fn resolvent<S: Real>(spec: &MonotoneSpec<S>) -> Result<OperatorExpr<S>> {
    let kernel = Kernel::build(spec)?;
    Ok(OperatorExpr::from_resolvent(ResolventMap {
        spec: spec.clone(),
        kernel,
    }))
}

/// The product operator `A₁ × ⋯ × A_m` on `(ℝᵈ)ᵐ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperatorSpec<S> {
    blocks: Vec<MonotoneSpec<S>>,
    block_dim: usize,
}

impl<S: Real> BlockOperatorSpec<S> {
    pub fn new(blocks: Vec<MonotoneSpec<S>>) -> Result<Self> {
        let first = blocks.first().ok_or(Error::TooFewChildren {
            kind: "block",
            min: 1,
            found: 0,
        })?;
        let block_dim = first.dim;
        for b in &blocks {
            if b.dim != block_dim {
                return Err(Error::DimensionMismatch {
                    expected: block_dim,
                    found: b.dim,
                });
            }
        }
        Ok(Self { blocks, block_dim })
    }

    pub fn blocks(&self) -> &[MonotoneSpec<S>] {
        &self.blocks
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn total_dim(&self) -> usize {
        self.block_dim * self.blocks.len()
    }
}

/// `J_𝐀 = J_{A₁} × ⋯ × J_{A_m}` acting on concatenated coordinates.
pub fn block_resolvent<S: Real>(block: &BlockOperatorSpec<S>) -> Result<OperatorExpr<S>> {
    let children = block.blocks.iter().map(resolvent).collect::<Result<Vec<_>>>()?;
    OperatorExpr::block(children)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport<S> {
    pub samples: usize,
    /// max |J_Ã x − (v + J_A x)| over samples and coordinates, with J_Ã
    /// obtained by inverting `Id + Ã` directly.
    pub max_abs_error: S,
    /// Same comparison for the production resolvent of the shifted spec.
    pub max_abs_error_production: S,
}

/// Samples `x` uniformly from `[−10, 10]ᵈ` and compares both sides of
/// `J_Ã = v + J_A`.
pub fn verify_resolvent_shift<S: Real>(
    spec: &MonotoneSpec<S>,
    v: &Vector<S>,
    samples: usize,
    seed: u64,
) -> Result<ShiftReport<S>> {
    v.check_dim(spec.dim)?;
    let shifted = spec.shifted(v.clone())?;
    let base = resolvent(spec)?;
    let production = resolvent(&shifted)?;
    let mut rng = seeded(seed);
    let mut max_direct = S::zero();
    let mut max_production = S::zero();
    for _ in 0..samples {
        let x: Vector<S> = uniform_vector(&mut rng, spec.dim, 10.0);
        let rhs = v + &base.apply(&x)?;
        let direct = invert_directly(&shifted, &x)?;
        let prod = production.apply(&x)?;
        max_direct = max_direct.max((&direct - &rhs).norm_inf());
        max_production = max_production.max((&prod - &rhs).norm_inf());
    }
    Ok(ShiftReport {
        samples,
        max_abs_error: max_direct,
        max_abs_error_production: max_production,
    })
}

/// Peels nested shifts: `Ã = −s + A(· − s)` with `s` the accumulated shift.
fn flatten_shifts<S: Real>(spec: &MonotoneSpec<S>) -> (&MonotoneSpec<S>, Vector<S>) {
    let mut total = Vector::zeros(spec.dim);
    let mut current = spec;
    while let MonotoneKind::Shifted { inner, v } = &current.kind {
        total = &total + v;
        current = inner;
    }
    (current, total)
}

/// Solves `x ∈ y + Ã(y)` for `y` by treating `Ã` as a set-valued map.
fn invert_directly<S: Real>(spec: &MonotoneSpec<S>, x: &Vector<S>) -> Result<Vector<S>> {
    let (base, s) = flatten_shifts(spec);
    match &base.kind {
        // y + c − s = x
        MonotoneKind::ConstantMap { c } => Ok(&(x - c) + &s),
        // y − s + M(y − s) = x  ⇔  (I + M) y = x + s + M s
        MonotoneKind::PsdLinear { matrix } => {
            let m = Dense::from_rows(matrix);
            let ms = m.mul_vec(s.coords());
            let rhs: Vec<S> = x
                .coords()
                .iter()
                .zip(s.coords())
                .zip(ms)
                .map(|((&a, &b), c)| a + b + c)
                .collect();
            let plus_identity = m.identity_plus();
            let lu = Lu::factor(&plus_identity).ok_or(Error::SolveFailed {
                residual: f64::INFINITY,
                tolerance: SOLVE_TOLERANCE,
            })?;
            solve_refined(&plus_identity, &lu, &Vector::from_raw(rhs))
        }
        MonotoneKind::SubdiffAbs { weight } => {
            let w = *weight;
            Ok(separable_inverse(x, &s, |z| {
                if z > S::zero() {
                    Some((w, w))
                } else if z < S::zero() {
                    Some((-w, -w))
                } else {
                    Some((-w, w))
                }
            }))
        }
        MonotoneKind::NormalConeBox { lo, hi } => {
            let mut out = Vec::with_capacity(x.dim());
            for j in 0..x.dim() {
                let (l, h) = (lo[j], hi[j]);
                let y = scalar_inverse(
                    x[j],
                    s[j],
                    |z| {
                        if z < l || z > h {
                            None
                        } else {
                            let lower = if z == l { S::neg_infinity() } else { S::zero() };
                            let upper = if z == h { S::infinity() } else { S::zero() };
                            Some((lower, upper))
                        }
                    },
                    (l, h),
                );
                out.push(y);
            }
            Ok(Vector::from_raw(out))
        }
        MonotoneKind::Shifted { .. } => unreachable!("shifts are flattened"),
    }
}

fn separable_inverse<S: Real>(x: &Vector<S>, s: &Vector<S>, value: impl Fn(S) -> Option<(S, S)> + Copy) -> Vector<S> {
    let coords = (0..x.dim())
        .map(|j| scalar_inverse(x[j], s[j], value, (S::neg_infinity(), S::infinity())))
        .collect();
    Vector::from_raw(coords)
}

/// Bisection for `x ∈ y − s + A(y − s)` with `A` scalar monotone, given as
/// the interval `[inf A(z), sup A(z)]` (or `None` off its domain `[dom.0, dom.1]`).
fn scalar_inverse<S: Real>(x: S, s: S, value: impl Fn(S) -> Option<(S, S)>, dom: (S, S)) -> S {
    let classify = |y: S| -> Ordering {
        let z = y - s;
        match value(z) {
            None if z < dom.0 => Ordering::Less,
            None => Ordering::Greater,
            Some((lo, hi)) => {
                if z + hi < x {
                    Ordering::Less
                } else if z + lo > x {
                    Ordering::Greater
                } else {
                    Ordering::Equal
                }
            }
        }
    };
    let mut radius = S::one();
    let (mut a, mut b);
    loop {
        a = x - radius;
        b = x + radius;
        let (ca, cb) = (classify(a), classify(b));
        if ca == Ordering::Equal {
            return a;
        }
        if cb == Ordering::Equal {
            return b;
        }
        if ca == Ordering::Less && cb == Ordering::Greater {
            break;
        }
        radius = radius + radius;
    }
    for _ in 0..400 {
        let mid = S::lit(0.5) * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        match classify(mid) {
            Ordering::Less => a = mid,
            Ordering::Greater => b = mid,
            Ordering::Equal => return mid,
        }
    }
    S::lit(0.5) * (a + b)
}
