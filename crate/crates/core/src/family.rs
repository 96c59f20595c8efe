//! Random operator family for the randomized bound suites.
//!
//! Leaves are drawn uniformly from five kinds:
//!
//! | kind          | parameters                                             |
//! |---------------|--------------------------------------------------------|
//! | translation   | `a ∈ [−1, 1]ᵈ`                                          |
//! | halfspace     | normal in `[−1, 1]ᵈ` with norm ≥ 0.1, offset in `[−1, 1]` |
//! | box           | centre in `[−2, 2]ᵈ`, half-widths in `[0.1, 1]`          |
//! | ball          | centre in `[−2, 2]ᵈ`, radius in `[0.2, 1.5]`             |
//! | affine scale  | `β ∈ [0.5, 1]`, `a ∈ [−1, 1]ᵈ`                          |

use rand::Rng;

use crate::operator::OperatorExpr;
use crate::sampling::{uniform_in, uniform_vector};
use crate::scalar::Real;
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    Translation,
    Halfspace,
    Box,
    Ball,
    AffineScale,
}

impl LeafKind {
    pub const ALL: [LeafKind; 5] = [
        LeafKind::Translation,
        LeafKind::Halfspace,
        LeafKind::Box,
        LeafKind::Ball,
        LeafKind::AffineScale,
    ];
}

pub fn sample_leaf_of_kind<S: Real>(rng: &mut impl Rng, kind: LeafKind, dim: usize) -> OperatorExpr<S> {
    let built = match kind {
        LeafKind::Translation => Ok(OperatorExpr::translation(uniform_vector(rng, dim, 1.0))),
        LeafKind::Halfspace => {
            let normal = loop {
                let n: Vector<S> = uniform_vector(rng, dim, 1.0);
                if n.norm() >= S::lit(0.1) {
                    break n;
                }
            };
            OperatorExpr::proj_halfspace(normal, uniform_in(rng, -1.0, 1.0))
        }
        LeafKind::Box => {
            let center: Vector<S> = uniform_vector(rng, dim, 2.0);
            let half: Vec<S> = (0..dim).map(|_| uniform_in(rng, 0.1, 1.0)).collect();
            let lo = center.zip_map(&Vector::from_raw(half.clone()), |c, h| c - h);
            let hi = center.zip_map(&Vector::from_raw(half), |c, h| c + h);
            OperatorExpr::proj_box(lo, hi)
        }
        LeafKind::Ball => {
            let center = uniform_vector(rng, dim, 2.0);
            OperatorExpr::proj_ball(center, uniform_in(rng, 0.2, 1.5))
        }
        LeafKind::AffineScale => {
            let beta = uniform_in(rng, 0.5, 1.0);
            OperatorExpr::affine_scale(beta, uniform_vector(rng, dim, 1.0))
        }
    };
    built.expect("sampled parameters are valid by construction")
}

pub fn sample_leaf<S: Real>(rng: &mut impl Rng, dim: usize) -> OperatorExpr<S> {
    let kind = LeafKind::ALL[rng.gen_range(0..LeafKind::ALL.len())];
    sample_leaf_of_kind(rng, kind, dim)
}

/// `m` leaves labelled `T1, …, Tm`.
pub fn sample_tuple<S: Real>(rng: &mut impl Rng, m: usize, dim: usize) -> Vec<OperatorExpr<S>> {
    (1..=m)
        .map(|i| sample_leaf(rng, dim).with_label(format!("T{i}")))
        .collect()
}

/// Convex weights drawn from `[0.1, 1]` and normalised.
pub fn sample_weights<S: Real>(rng: &mut impl Rng, m: usize) -> Vec<S> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..=1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| S::lit(w / total)).collect()
}
