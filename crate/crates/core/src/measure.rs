//! Finitely supported probability measures on Q^d.
//!
//! A [`DiscreteMeasure`] keeps its atoms merged (distinct points), with strictly
//! positive weights summing to exactly one, sorted lexicographically by point.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, one, parse_rational_field, ratio, Rational};

/// A point (or direction) with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointQ(Vec<Rational>);

impl PointQ {
    pub fn new(coords: Vec<Rational>) -> Self {
        PointQ(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        PointQ(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        PointQ(vec![Rational::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    fn check_dim(&self, other: &PointQ) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &PointQ) -> Result<Rational> {
        self.check_dim(other)?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &PointQ) -> Rational {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn add(&self, other: &PointQ) -> Result<PointQ> {
        self.check_dim(other)?;
        Ok(PointQ(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &PointQ) -> Result<PointQ> {
        self.check_dim(other)?;
        Ok(PointQ(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, factor: &Rational) -> PointQ {
        PointQ(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn neg(&self) -> PointQ {
        PointQ(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for PointQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for PointQ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(format_rational))
    }
}

/// How [`normalize`] treats the total weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Weights must already sum to exactly 1.
    Probability,
    /// Weights are divided by their total.
    Rescale,
}

/// A finitely supported probability measure on Q^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<(PointQ, Rational)>,
}

/// Builds a measure from raw atoms: merges duplicate points, drops zero weights,
/// and either checks or enforces unit total mass.
pub fn normalize(atoms: Vec<(PointQ, Rational)>, mode: Normalization) -> Result<DiscreteMeasure> {
    let dim = match atoms.first() {
        Some((p, _)) => p.dim(),
        None => return Err(Error::EmptyMeasure),
    };
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut merged: BTreeMap<PointQ, Rational> = BTreeMap::new();
    let mut total = Rational::zero();
    for (point, weight) in atoms {
        if point.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: point.dim(),
            });
        }
        if weight.is_negative() {
            return Err(Error::NegativeWeight(weight));
        }
        if weight.is_zero() {
            continue;
        }
        total += &weight;
        *merged.entry(point).or_insert_with(Rational::zero) += weight;
    }
    if total.is_zero() {
        return Err(Error::ZeroTotalWeight);
    }
    let atoms = match mode {
        Normalization::Probability => {
            if total != one() {
                return Err(Error::WeightSum(total));
            }
            merged.into_iter().collect()
        }
        Normalization::Rescale => merged.into_iter().map(|(p, w)| (p, w / &total)).collect(),
    };
    Ok(DiscreteMeasure { dim, atoms })
}

impl DiscreteMeasure {
    /// Probability-mode constructor: weights must sum to exactly 1.
    pub fn new(atoms: Vec<(PointQ, Rational)>) -> Result<Self> {
        normalize(atoms, Normalization::Probability)
    }

    pub fn dirac(point: PointQ) -> Result<Self> {
        Self::new(vec![(point, one())])
    }

    /// Equal weights on the listed points (duplicates accumulate).
    pub fn uniform(points: Vec<PointQ>) -> Result<Self> {
        let w = ratio(1, points.len().max(1) as i64);
        Self::new(points.into_iter().map(|p| (p, w.clone())).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Atoms in canonical (lexicographic) order.
    pub fn atoms(&self) -> &[(PointQ, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &PointQ> {
        self.atoms.iter().map(|(p, _)| p)
    }

    /// Weight at `point`, zero when it is not in the support.
    pub fn weight_of(&self, point: &PointQ) -> Rational {
        self.atoms
            .binary_search_by(|(p, _)| p.cmp(point))
            .map(|k| self.atoms[k].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn barycenter(&self) -> PointQ {
        let mut acc = vec![Rational::zero(); self.dim];
        for (p, w) in &self.atoms {
            for (a, c) in acc.iter_mut().zip(p.coords()) {
                *a += c * w;
            }
        }
        PointQ(acc)
    }

    /// Integral of `f` against the measure.
    pub fn integrate(&self, mut f: impl FnMut(&PointQ) -> Rational) -> Rational {
        self.atoms
            .iter()
            .fold(Rational::zero(), |acc, (p, w)| acc + f(p) * w)
    }

    fn remap(&self, mut map: impl FnMut(&PointQ) -> PointQ) -> DiscreteMeasure {
        let atoms = self.atoms.iter().map(|(p, w)| (map(p), w.clone())).collect();
        normalize(atoms, Normalization::Probability)
            .expect("image of a probability measure is a probability measure")
    }

    /// Pushforward under `x ↦ v·x`; the zero functional yields the Dirac mass at 0.
    pub fn project(&self, direction: &PointQ) -> Result<DiscreteMeasure> {
        if direction.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: direction.dim(),
            });
        }
        Ok(self.remap(|p| PointQ(vec![p.dot_unchecked(direction)])))
    }

    /// Pads every point with trailing zeros up to `target_dim`.
    pub fn embed(&self, target_dim: usize) -> Result<DiscreteMeasure> {
        if target_dim < self.dim {
            return Err(Error::ShapeMismatch(format!(
                "cannot embed dimension {} into {}",
                self.dim, target_dim
            )));
        }
        Ok(self.remap(|p| {
            let mut c = p.0.clone();
            c.resize(target_dim, Rational::zero());
            PointQ(c)
        }))
    }

    /// Pushforward under `x ↦ A·x + b` where `matrix` has one row per output coordinate.
    pub fn affine_pushforward(&self, matrix: &[Vec<Rational>], shift: &PointQ) -> Result<DiscreteMeasure> {
        if matrix.len() != shift.dim() || matrix.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "matrix has {} rows but shift has dimension {}",
                matrix.len(),
                shift.dim()
            )));
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != self.dim) {
            return Err(Error::ShapeMismatch(format!(
                "matrix row has {} columns, measure dimension is {}",
                row.len(),
                self.dim
            )));
        }
        Ok(self.remap(|p| {
            PointQ(
                matrix
                    .iter()
                    .zip(shift.coords())
                    .map(|(row, b)| {
                        row.iter()
                            .zip(p.coords())
                            .fold(b.clone(), |acc, (a, x)| acc + a * x)
                    })
                    .collect(),
            )
        }))
    }

    /// Canonical file form: `{"dim": d, "atoms": [{"point": [..], "weight": ".."}, ..]}`.
    pub fn to_json(&self) -> String {
        let atoms: Vec<String> = self
            .atoms
            .iter()
            .map(|(p, w)| {
                let coords: Vec<String> = p.coords().iter().map(|c| format!("\"{c}\"")).collect();
                format!("{{\"point\": [{}], \"weight\": \"{}\"}}", coords.join(","), w)
            })
            .collect();
        format!("{{\"dim\": {}, \"atoms\": [{}]}}\n", self.dim, atoms.join(", "))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MeasureFile =
            serde_json::from_str(text).map_err(|e| Error::parse("measure", e.to_string()))?;
        if file.dim == 0 {
            return Err(Error::parse("dim", "dimension must be positive"));
        }
        if file.atoms.is_empty() {
            return Err(Error::parse("atoms", "measure has no atoms"));
        }
        let mut atoms = Vec::with_capacity(file.atoms.len());
        for (k, atom) in file.atoms.iter().enumerate() {
            if atom.point.len() != file.dim {
                return Err(Error::parse(
                    format!("atoms[{k}].point"),
                    format!("has {} coordinates, dim is {}", atom.point.len(), file.dim),
                ));
            }
            let coords = atom
                .point
                .iter()
                .enumerate()
                .map(|(c, s)| parse_rational_field(s, &format!("atoms[{k}].point[{c}]")))
                .collect::<Result<Vec<_>>>()?;
            let weight = parse_rational_field(&atom.weight, &format!("atoms[{k}].weight"))?;
            if weight.is_negative() {
                return Err(Error::parse(format!("atoms[{k}].weight"), "weight is negative"));
            }
            atoms.push((PointQ(coords), weight));
        }
        Self::new(atoms).map_err(|e| match e {
            Error::WeightSum(s) => Error::parse("atoms", format!("weights sum to {s}, expected exactly 1")),
            other => Error::parse("atoms", other.to_string()),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    dim: usize,
    atoms: Vec<AtomEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    point: Vec<String>,
    weight: String,
}

/// ν = (3δ_c + δ_x + δ_y + δ_z)/6 with c the centroid, and μ uniform on the
/// three edge midpoints of the triangle x, y, z. Returns `(mu, nu)`.
pub fn triangle_instance(x: &PointQ, y: &PointQ, z: &PointQ) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    for p in [x, y, z] {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: p.dim(),
            });
        }
    }
    let half = ratio(1, 2);
    let third = ratio(1, 3);
    let sixth = ratio(1, 6);
    let centroid = x.add(y)?.add(z)?.scale(&third);
    let mid = |a: &PointQ, b: &PointQ| a.add(b).map(|s| s.scale(&half));
    let mu = DiscreteMeasure::new(vec![
        (mid(x, y)?, third.clone()),
        (mid(y, z)?, third.clone()),
        (mid(x, z)?, third),
    ])?;
    let nu = DiscreteMeasure::new(vec![
        (centroid, half),
        (x.clone(), sixth.clone()),
        (y.clone(), sixth.clone()),
        (z.clone(), sixth),
    ])?;
    Ok((mu, nu))
}

/// The vertices x = (0,−1), y = (−1,0), z = (2,2) of the counterexample triangle.
pub fn paper_points() -> (PointQ, PointQ, PointQ) {
    (
        PointQ::from_ints(&[0, -1]),
        PointQ::from_ints(&[-1, 0]),
        PointQ::from_ints(&[2, 2]),
    )
}

/// `triangle_instance` at the counterexample vertices.
pub fn paper_instance() -> (DiscreteMeasure, DiscreteMeasure) {
    let (x, y, z) = paper_points();
    triangle_instance(&x, &y, &z).expect("fixed planar points")
}
