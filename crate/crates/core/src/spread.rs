//! Mean-preserving spreads and random exact instances.
//!
//! Splitting an atom into two atoms with the same total weight and barycenter
//! moves a measure upward in the convex order; chains of such splits generate
//! dominated pairs with known answers.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::{normalize, DiscreteMeasure, Normalization, PointQ};
use crate::rational::{ratio, Rational};

/// Replaces atom `(p, w)` at `index` by `(p + (1 − λ)h, λw)` and `(p − λh, (1 − λ)w)`.
pub fn split_atom(m: &DiscreteMeasure, index: usize, offset: &PointQ, lambda: &Rational) -> Result<DiscreteMeasure> {
    if offset.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: offset.dim(),
        });
    }
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(Error::ShapeMismatch(format!("split fraction {lambda} is not in (0, 1)")));
    }
    let Some((p, w)) = m.atoms().get(index) else {
        return Err(Error::ShapeMismatch(format!("atom index {index} out of range")));
    };
    let rest = Rational::one() - lambda;
    let mut atoms: Vec<(PointQ, Rational)> = m
        .atoms()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != index)
        .map(|(_, a)| a.clone())
        .collect();
    atoms.push((p.add(&offset.scale(&rest))?, w * lambda));
    atoms.push((p.sub(&offset.scale(lambda))?, w * &rest));
    DiscreteMeasure::new(atoms)
}

/// Uniformly drawn `n/d` with `|n| ≤ max_num` and `1 ≤ d ≤ max_den`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    ratio(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn random_point<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_num: i64, max_den: i64) -> PointQ {
    PointQ::new((0..dim).map(|_| random_rational(rng, max_num, max_den)).collect())
}

/// Random measure with at most `max_atoms` atoms, small rational coordinates
/// and random positive weights.
pub fn random_measure<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_atoms: usize) -> DiscreteMeasure {
    let count = rng.gen_range(1..=max_atoms.max(1));
    let atoms = (0..count)
        .map(|_| (random_point(rng, dim, 6, 3), ratio(rng.gen_range(1..=6), 1)))
        .collect();
    normalize(atoms, Normalization::Rescale).expect("positive weights")
}

/// Nonzero random offset.
fn random_offset<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PointQ {
    loop {
        let h = random_point(rng, dim, 4, 3);
        if !h.is_zero() {
            return h;
        }
    }
}

/// Applies `steps` random strict splits to `m`.
pub fn random_spread_chain<R: Rng + ?Sized>(rng: &mut R, m: &DiscreteMeasure, steps: usize) -> DiscreteMeasure {
    let lambdas = [ratio(1, 2), ratio(1, 3), ratio(2, 3), ratio(1, 4), ratio(3, 4)];
    let mut out = m.clone();
    for _ in 0..steps {
        let index = rng.gen_range(0..out.len());
        let h = random_offset(rng, out.dim());
        let lambda = lambdas.choose(rng).expect("nonempty").clone();
        out = split_atom(&out, index, &h, &lambda).expect("valid split");
    }
    out
}

/// Translates `m` so that its barycenter becomes `target`.
pub fn recenter(m: &DiscreteMeasure, target: &PointQ) -> Result<DiscreteMeasure> {
    let shift = target.sub(&m.barycenter())?;
    let identity: Vec<Vec<Rational>> = (0..m.dim())
        .map(|r| {
            (0..m.dim())
                .map(|c| if r == c { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    m.affine_pushforward(&identity, &shift)
}
