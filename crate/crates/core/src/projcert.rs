//! Certification of `μ_v ⪯ ν_v` for every direction `v` in the plane.
//!
//! For a pooled support point `p`, the stop-loss difference of the projections
//! at threshold `p·v` is `Σ_q [ν(q) − μ(q)] max((q − p)·v, 0)`. Inside an arc of
//! directions where no sign of `(q − p)·v` changes, this equals `c_p·v` for a
//! fixed kink vector `c_p`. The sign pattern only changes at directions
//! orthogonal to some pooled difference `q − p`, so the circle splits into
//! finitely many arcs. Every arc subtends less than a half turn, so a linear
//! form that is nonnegative at both endpoints is nonnegative on the whole arc.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, PointQ};
use crate::order1d::{check_convex_order_1d, first_violation, stop_loss, Verdict1d};
use crate::rational::{serde_str, Rational};

fn require_plane(m: &DiscreteMeasure) -> Result<()> {
    if m.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.dim(),
        });
    }
    Ok(())
}

/// Integer multiple of `v` with coprime coordinates and the same direction.
pub fn primitive(v: &PointQ) -> PointQ {
    let denom_lcm = v
        .coords()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = v.coords().iter().map(|c| (c * &denom_lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return v.clone();
    }
    PointQ::new(ints.into_iter().map(|c| Rational::from_integer(c / &g)).collect())
}

fn x(v: &PointQ) -> &Rational {
    &v.coords()[0]
}

fn y(v: &PointQ) -> &Rational {
    &v.coords()[1]
}

fn cross(a: &PointQ, b: &PointQ) -> Rational {
    x(a) * y(b) - y(a) * x(b)
}

fn upper_half(v: &PointQ) -> bool {
    y(v).is_positive() || (y(v).is_zero() && x(v).is_positive())
}

/// Counter-clockwise order by angle in `[0, 2π)`, starting from the positive x-axis.
pub fn angle_cmp(a: &PointQ, b: &PointQ) -> Ordering {
    match (upper_half(a), upper_half(b)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => cross(b, a).cmp(&Rational::zero()),
    }
}

fn rot90(v: &PointQ) -> PointQ {
    PointQ::new(vec![-y(v), x(v).clone()])
}

fn pooled_support(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<PointQ> {
    let mut pts: Vec<PointQ> = mu.points().chain(nu.points()).cloned().collect();
    pts.sort();
    pts.dedup();
    pts
}

fn sorted_unique(mut dirs: Vec<PointQ>) -> Vec<PointQ> {
    dirs.sort_by(angle_cmp);
    dirs.dedup();
    dirs
}

fn axes() -> Vec<PointQ> {
    [[1, 0], [0, 1], [-1, 0], [0, -1]]
        .iter()
        .map(|v| PointQ::from_ints(v))
        .collect()
}

/// Primitive normals `±rot90(p − q)` over all pooled pairs, sorted by angle.
/// With a single pooled point the two coordinate axes (both signs) are returned.
pub fn critical_directions(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Vec<PointQ>> {
    require_plane(mu)?;
    require_plane(nu)?;
    let pts = pooled_support(mu, nu);
    if pts.len() < 2 {
        return Ok(axes());
    }
    let mut dirs = Vec::with_capacity(pts.len() * (pts.len() - 1));
    for (k, p) in pts.iter().enumerate() {
        for q in &pts[k + 1..] {
            let n = primitive(&rot90(&p.sub(q)?));
            dirs.push(n.neg());
            dirs.push(n);
        }
    }
    Ok(sorted_unique(dirs))
}

/// Arc endpoints: the critical directions, refined with the perpendiculars when
/// only one antipodal pair exists so that every arc is shorter than a half turn.
fn arc_directions(critical: Vec<PointQ>) -> Vec<PointQ> {
    if critical.len() > 2 {
        return critical;
    }
    let mut dirs = critical.clone();
    for v in &critical {
        dirs.push(rot90(v));
    }
    sorted_unique(dirs)
}

/// Kink vectors `c_p` for every pooled point `p`, valid on the arc containing `probe`.
pub fn kink_vectors_on_arc(mu: &DiscreteMeasure, nu: &DiscreteMeasure, probe: &PointQ) -> Result<Vec<(PointQ, PointQ)>> {
    require_plane(mu)?;
    require_plane(nu)?;
    if probe.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: probe.dim(),
        });
    }
    let pts = pooled_support(mu, nu);
    let signed: Vec<Rational> = pts.iter().map(|p| nu.weight_of(p) - mu.weight_of(p)).collect();
    let mut out = Vec::with_capacity(pts.len());
    for p in &pts {
        let mut c = PointQ::zero(2);
        for (q, dw) in pts.iter().zip(&signed) {
            if q == p {
                continue;
            }
            let diff = q.sub(p)?;
            let s = diff.dot_unchecked(probe);
            if s.is_zero() {
                return Err(Error::CriticalProbe(probe.to_string()));
            }
            if s.is_positive() && !dw.is_zero() {
                c = c.add(&diff.scale(dw))?;
            }
        }
        out.push((p.clone(), c));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArcRecord {
    pub start: PointQ,
    pub end: PointQ,
    /// Index of the arc; each arc carries its own sign pattern.
    pub sign_pattern_id: usize,
    pub probe: PointQ,
    /// `(p, c_p)` pairs.
    pub kink_vectors: Vec<KinkVector>,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KinkVector {
    pub point: PointQ,
    pub vector: PointQ,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Overall {
    AllDominated,
    /// `stop_loss(μ_v, threshold) > stop_loss(ν_v, threshold)` for `v = direction`.
    FailsAt {
        direction: PointQ,
        #[serde(with = "serde_str")]
        threshold: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionCertificate {
    pub critical_directions: Vec<PointQ>,
    pub arcs: Vec<ArcRecord>,
    pub overall: Overall,
}

impl DirectionCertificate {
    pub fn is_all_dominated(&self) -> bool {
        self.overall == Overall::AllDominated
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("certificate serializes");
        for arc in v["arcs"].as_array_mut().into_iter().flatten() {
            let count = arc["kink_vectors"].as_array().map_or(0, Vec::len);
            arc["kink_vector_count"] = count.into();
        }
        let mut text = serde_json::to_string_pretty(&v).expect("certificate serializes");
        text.push('\n');
        text
    }

    /// Re-checks the stored arcs without re-running the enumeration: they must be
    /// consecutive, cover the circle, each span less than a half turn, and every
    /// kink vector must be nonnegative at both endpoints of its arc.
    pub fn arcs_cover_circle(&self) -> bool {
        let n = self.arcs.len();
        if n < 3 || self.arcs.windows(2).any(|w| angle_cmp(&w[0].start, &w[1].start) != Ordering::Less) {
            return false;
        }
        self.arcs.iter().enumerate().all(|(k, arc)| {
            let next = &self.arcs[(k + 1) % n];
            let e1 = &arc.start;
            let e2 = &arc.end;
            arc.end == next.start
                && cross(e1, e2).is_positive()
                && arc.verified
                    == arc.kink_vectors.iter().all(|kv| {
                        !kv.vector.dot_unchecked(e1).is_negative() && !kv.vector.dot_unchecked(e2).is_negative()
                    })
        }) && self.arcs.iter().all(|a| a.verified) == (self.overall == Overall::AllDominated)
    }
}

fn fails_at(mu: &DiscreteMeasure, nu: &DiscreteMeasure, v: &PointQ) -> Result<Option<Rational>> {
    let a = mu.project(v)?;
    let b = nu.project(v)?;
    Ok(match check_convex_order_1d(&a, &b)? {
        Verdict1d::Dominated => None,
        Verdict1d::NotDominated { threshold } => Some(threshold),
        Verdict1d::MeanMismatch => {
            // Lowest pooled value: both stop-loss values equal mean − t there.
            let t = a
                .points()
                .chain(b.points())
                .map(|p| p.coords()[0].clone())
                .min()
                .expect("nonempty supports");
            debug_assert!(stop_loss(&a, &t)? > stop_loss(&b, &t)?);
            Some(t)
        }
    })
}

/// Decides whether `μ_v ⪯ ν_v` for every `v ∈ R²`.
pub fn certify_all_directions_2d(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DirectionCertificate> {
    let critical = critical_directions(mu, nu)?;
    let bary_mu = mu.barycenter();
    let bary_nu = nu.barycenter();
    if bary_mu != bary_nu {
        let direction = primitive(&bary_mu.sub(&bary_nu)?);
        let threshold = fails_at(mu, nu, &direction)?.expect("projected means differ");
        return Ok(DirectionCertificate {
            critical_directions: critical,
            arcs: Vec::new(),
            overall: Overall::FailsAt { direction, threshold },
        });
    }

    let ends = arc_directions(critical.clone());
    let mut overall = Overall::AllDominated;
    for v in &ends {
        if let Some(threshold) = fails_at(mu, nu, v)? {
            overall = Overall::FailsAt {
                direction: v.clone(),
                threshold,
            };
            break;
        }
    }

    let mut arcs = Vec::with_capacity(ends.len());
    for (k, start) in ends.iter().enumerate() {
        let end = &ends[(k + 1) % ends.len()];
        let probe = start.add(end)?;
        let kinks = kink_vectors_on_arc(mu, nu, &probe)?;
        let verified = kinks.iter().all(|(_, c)| {
            !c.dot_unchecked(start).is_negative() && !c.dot_unchecked(end).is_negative()
        });
        arcs.push(ArcRecord {
            start: start.clone(),
            end: end.clone(),
            sign_pattern_id: k,
            probe,
            kink_vectors: kinks
                .into_iter()
                .map(|(point, vector)| KinkVector { point, vector })
                .collect(),
            verified,
        });
    }
    debug_assert_eq!(arcs.iter().all(|a| a.verified), overall == Overall::AllDominated);
    Ok(DirectionCertificate {
        critical_directions: critical,
        arcs,
        overall,
    })
}

/// Direct one-dimensional checks of `μ_v ⪯ ν_v` at the given directions.
pub fn spot_check_directions(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    dirs: &[PointQ],
) -> Result<Vec<(PointQ, Verdict1d)>> {
    require_plane(mu)?;
    require_plane(nu)?;
    // Work with integers: coordinates, weights and each direction are scaled by
    // positive common denominators, which preserves both means and stop-loss order.
    let coord_den = mu
        .points()
        .chain(nu.points())
        .flat_map(|p| p.coords())
        .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let weight_den = mu
        .atoms()
        .iter()
        .chain(nu.atoms())
        .fold(BigInt::one(), |l, (_, w)| l.lcm(w.denom()));
    let scaled = |m: &DiscreteMeasure| -> Vec<([BigInt; 2], BigInt)> {
        m.atoms()
            .iter()
            .map(|(p, w)| {
                let c = p.coords();
                let int = |x: &Rational| x.numer() * (&coord_den / x.denom());
                ([int(&c[0]), int(&c[1])], w.numer() * (&weight_den / w.denom()))
            })
            .collect()
    };
    let (smu, snu) = (scaled(mu), scaled(nu));
    let projected = |m: &[([BigInt; 2], BigInt)], v: &[BigInt; 2]| {
        let mut atoms: Vec<(BigInt, BigInt)> =
            m.iter().map(|(p, w)| (&p[0] * &v[0] + &p[1] * &v[1], w.clone())).collect();
        atoms.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        atoms
    };
    let moment = |atoms: &[(BigInt, BigInt)]| atoms.iter().fold(BigInt::zero(), |acc, (x, w)| acc + x * w);
    dirs.iter()
        .map(|v| {
            if v.dim() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: v.dim() });
            }
            if v.is_zero() {
                return Err(Error::ZeroDirection);
            }
            let dir_den = v.coords()[0].denom().lcm(v.coords()[1].denom());
            let iv = [0, 1].map(|k| v.coords()[k].numer() * (&dir_den / v.coords()[k].denom()));
            let (a, b) = (projected(&smu, &iv), projected(&snu, &iv));
            let verdict = if moment(&a) != moment(&b) {
                Verdict1d::MeanMismatch
            } else {
                match first_violation(&a, &b) {
                    Some(t) => Verdict1d::NotDominated {
                        threshold: Rational::new(t, &coord_den * &dir_den),
                    },
                    None => Verdict1d::Dominated,
                }
            };
            Ok((v.clone(), verdict))
        })
        .collect()
}
