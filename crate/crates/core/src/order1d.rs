//! Convex order on the real line, majorization, and the three-point
//! Popoviciu inequality.
//!
//! Between finitely supported measures with equal means, `a ⪯ b` holds iff the
//! stop-loss transform `t ↦ ∫ max(x − t, 0)` of `a` lies below that of `b`.
//! The difference of the two transforms is piecewise linear with kinks only at
//! support points and vanishes outside the pooled support, so it suffices to
//! compare them at the pooled support points.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::rational::{ratio, Rational};

fn require_line(m: &DiscreteMeasure) -> Result<()> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: m.dim(),
        });
    }
    Ok(())
}

fn value(m: &DiscreteMeasure, k: usize) -> &Rational {
    &m.atoms()[k].0.coords()[0]
}

fn stop_loss_unchecked(m: &DiscreteMeasure, t: &Rational) -> Rational {
    m.atoms()
        .iter()
        .map(|(p, w)| (&p.coords()[0], w))
        .filter(|(x, _)| *x > t)
        .fold(Rational::zero(), |acc, (x, w)| acc + (x - t) * w)
}

/// `∫ max(x − t, 0) dm` for a measure on the line.
pub fn stop_loss(m: &DiscreteMeasure, t: &Rational) -> Result<Rational> {
    require_line(m)?;
    Ok(stop_loss_unchecked(m, t))
}

pub fn mean(m: &DiscreteMeasure) -> Result<Rational> {
    require_line(m)?;
    Ok(m.barycenter().into_coords().remove(0))
}

/// Stop-loss values of a measure at a sorted threshold grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StopLossProfile {
    pub thresholds: Vec<Rational>,
    pub values: Vec<Rational>,
}

impl StopLossProfile {
    /// Profile at the measure's own support points.
    pub fn of(m: &DiscreteMeasure) -> Result<Self> {
        require_line(m)?;
        let thresholds: Vec<Rational> = (0..m.len()).map(|k| value(m, k).clone()).collect();
        Ok(Self::at(m, thresholds))
    }

    fn at(m: &DiscreteMeasure, thresholds: Vec<Rational>) -> Self {
        let values = thresholds.iter().map(|t| stop_loss_unchecked(m, t)).collect();
        StopLossProfile { thresholds, values }
    }

    /// Nonnegative, nonincreasing, with nondecreasing slopes between grid points.
    pub fn is_convex_nonincreasing(&self) -> bool {
        let v = &self.values;
        let t = &self.thresholds;
        if v.iter().any(Signed::is_negative) || v.windows(2).any(|w| w[1] > w[0]) {
            return false;
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return false;
        }
        let slopes: Vec<Rational> = (1..t.len())
            .map(|k| (&v[k] - &v[k - 1]) / (&t[k] - &t[k - 1]))
            .collect();
        slopes.windows(2).all(|s| s[0] <= s[1])
    }
}

/// Outcome of a one-dimensional convex-order check `a ⪯ b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict1d {
    Dominated,
    /// `stop_loss(a, threshold) > stop_loss(b, threshold)`, so `g(u) = max(u − threshold, 0)`
    /// separates the two measures.
    NotDominated {
        #[serde(with = "crate::rational::serde_str")]
        threshold: Rational,
    },
    MeanMismatch,
}

impl Verdict1d {
    pub fn is_dominated(&self) -> bool {
        matches!(self, Verdict1d::Dominated)
    }
}

/// Decides `a ⪯ b` for two measures on the line.
pub fn check_convex_order_1d(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<Verdict1d> {
    require_line(a)?;
    require_line(b)?;
    if a.barycenter() != b.barycenter() {
        return Ok(Verdict1d::MeanMismatch);
    }
    let atoms = |m: &'_ DiscreteMeasure| (0..m.len()).map(|k| (value(m, k).clone(), m.atoms()[k].1.clone())).collect::<Vec<_>>();
    Ok(match first_violation(&atoms(a), &atoms(b)) {
        Some(threshold) => Verdict1d::NotDominated { threshold },
        None => Verdict1d::Dominated,
    })
}

/// Smallest pooled support point where the stop-loss of `a` exceeds that of `b`.
/// Both inputs are `(value, weight)` lists sorted by value; repeated values are allowed.
pub(crate) fn first_violation<T: Clone + Ord + Signed>(a: &[(T, T)], b: &[(T, T)]) -> Option<T> {
    // Sweep the pooled support downward, tracking mass and first moment above t,
    // so that stop_loss(t) = moment − t·mass.
    let mut pooled: Vec<&T> = a.iter().chain(b).map(|(x, _)| x).collect();
    pooled.sort_unstable_by(|x, y| y.cmp(x));
    pooled.dedup();
    let (mut i, mut j) = (a.len(), b.len());
    let (mut mass, mut moment) = (T::zero(), T::zero());
    let mut found = None;
    for t in pooled {
        if (moment.clone() - t.clone() * mass.clone()).is_positive() {
            found = Some(t);
        }
        while i > 0 && a[i - 1].0 == *t {
            i -= 1;
            mass = mass + a[i].1.clone();
            moment = moment + t.clone() * a[i].1.clone();
        }
        while j > 0 && b[j - 1].0 == *t {
            j -= 1;
            mass = mass - b[j].1.clone();
            moment = moment - t.clone() * b[j].1.clone();
        }
    }
    found.cloned()
}

/// Result of testing `x ≺ y` (x majorized by y).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MajorizationVerdict {
    pub holds: bool,
    /// 1-based index of the first failing partial sum; `n` when only the totals differ.
    pub failing_k: Option<usize>,
    #[serde(serialize_with = "ser_rationals")]
    pub partial_sums_x: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub partial_sums_y: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

fn descending_partial_sums(v: &[Rational]) -> Vec<Rational> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .scan(Rational::zero(), |acc, x| {
            *acc += x;
            Some(acc.clone())
        })
        .collect()
}

pub fn majorizes(x: &[Rational], y: &[Rational]) -> Result<MajorizationVerdict> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::ShapeMismatch("majorization needs nonempty vectors".into()));
    }
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "vectors have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    let px = descending_partial_sums(x);
    let py = descending_partial_sums(y);
    let failing_k = (0..n - 1)
        .find(|&k| px[k] > py[k])
        .map(|k| k + 1)
        .or_else(|| (px[n - 1] != py[n - 1]).then_some(n));
    Ok(MajorizationVerdict {
        holds: failing_k.is_none(),
        failing_k,
        partial_sums_x: px,
        partial_sums_y: py,
    })
}

/// The pair of six-vectors whose majorization proves the three-point inequality:
/// pairwise midpoints (each twice) against the centroid (three times) and `r, s, t`.
pub fn popoviciu_majorization_vectors(r: &Rational, s: &Rational, t: &Rational) -> (Vec<Rational>, Vec<Rational>) {
    let half = ratio(1, 2);
    let third = ratio(1, 3);
    let rs = (r + s) * &half;
    let st = (s + t) * &half;
    let rt = (r + t) * &half;
    let c = (r + s + t) * &third;
    (
        vec![rs.clone(), rs, st.clone(), st, rt.clone(), rt],
        vec![c.clone(), c.clone(), c, r.clone(), s.clone(), t.clone()],
    )
}

pub fn popoviciu_holds(r: &Rational, s: &Rational, t: &Rational) -> bool {
    // Majorization is invariant under positive scaling: compare the vectors
    // multiplied by 6·lcm(denominators) as integers.
    let l = r.denom().lcm(s.denom()).lcm(t.denom());
    let [r, s, t] = [r, s, t].map(|v| v.numer() * (&l / v.denom()));
    let c: BigInt = (&r + &s + &t) * 2;
    let (rs, st, rt): (BigInt, BigInt, BigInt) = ((&r + &s) * 3, (&s + &t) * 3, (&r + &t) * 3);
    let x = [rs.clone(), rs, st.clone(), st, rt.clone(), rt];
    let y = [c.clone(), c.clone(), c, r * 6, s * 6, t * 6];
    integer_majorizes(x, y)
}

fn integer_majorizes(mut x: [BigInt; 6], mut y: [BigInt; 6]) -> bool {
    x.sort_unstable_by(|a, b| b.cmp(a));
    y.sort_unstable_by(|a, b| b.cmp(a));
    let (mut px, mut py) = (BigInt::zero(), BigInt::zero());
    for (a, b) in x.iter().zip(&y) {
        px += a;
        py += b;
        if px > py {
            return false;
        }
    }
    px == py
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{paper_instance, PointQ};
    use crate::rational::{int, parse_rational};

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn qs(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|s| q(s)).collect()
    }

    fn line(atoms: &[(&str, &str)]) -> DiscreteMeasure {
        DiscreteMeasure::new(atoms.iter().map(|(x, w)| (PointQ::new(vec![q(x)]), q(w))).collect()).unwrap()
    }

    fn e1() -> PointQ {
        PointQ::from_ints(&[1, 0])
    }

    #[test]
    fn stop_loss_examples() {
        assert_eq!(stop_loss(&line(&[("0", "1")]), &int(-1)).unwrap(), int(1));
        let (_, nu) = paper_instance();
        let p = nu.project(&e1()).unwrap();
        assert_eq!(stop_loss(&p, &q("1/3")).unwrap(), q("5/18"));
        assert_eq!(stop_loss(&p, &int(2)).unwrap(), int(0));
        assert_eq!(stop_loss(&p, &int(7)).unwrap(), int(0));
        assert!(stop_loss(&nu, &int(0)).is_err());
    }

    #[test]
    fn one_dimensional_examples() {
        let (mu, nu) = paper_instance();
        let pnu = nu.project(&e1()).unwrap();
        let pmu = mu.project(&e1()).unwrap();
        assert_eq!(check_convex_order_1d(&line(&[("1/3", "1")]), &pnu).unwrap(), Verdict1d::Dominated);
        assert_eq!(check_convex_order_1d(&pmu, &pnu).unwrap(), Verdict1d::Dominated);
        assert_eq!(
            check_convex_order_1d(&line(&[("0", "1/2"), ("2", "1/2")]), &line(&[("1", "1")])).unwrap(),
            Verdict1d::NotDominated { threshold: int(1) }
        );
        assert_eq!(
            check_convex_order_1d(&line(&[("0", "1")]), &line(&[("1", "1")])).unwrap(),
            Verdict1d::MeanMismatch
        );
        assert!(check_convex_order_1d(&mu, &nu).is_err());
    }

    #[test]
    fn profile_shape() {
        let (_, nu) = paper_instance();
        let p = StopLossProfile::of(&nu.project(&PointQ::from_ints(&[1, 1])).unwrap()).unwrap();
        assert_eq!(p.thresholds, qs(&["-1", "2/3", "4"]));
        assert!(p.is_convex_nonincreasing());
        let bad = StopLossProfile { thresholds: qs(&["0", "1", "2"]), values: qs(&["2", "2", "0"]) };
        assert!(!bad.is_convex_nonincreasing());
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&qs(&["1", "1"]), &qs(&["2", "0"])).unwrap().holds);
        let v = majorizes(&qs(&["2", "0"]), &qs(&["1", "1"])).unwrap();
        assert!(!v.holds);
        assert_eq!(v.failing_k, Some(1));

        let v = majorizes(&qs(&["1/2", "1/2", "3/2", "3/2", "1", "1"]), &qs(&["1", "1", "1", "0", "1", "2"])).unwrap();
        assert!(v.holds);
        assert_eq!(v.partial_sums_x, qs(&["3/2", "3", "4", "5", "11/2", "6"]));
        assert_eq!(v.partial_sums_y, qs(&["2", "3", "4", "5", "6", "6"]));

        let v = majorizes(&qs(&["1", "1"]), &qs(&["1", "2"])).unwrap();
        assert_eq!(v.failing_k, Some(2));
        assert!(majorizes(&qs(&["1"]), &qs(&["1", "2"])).is_err());
        assert!(majorizes(&[], &[]).is_err());
    }

    #[test]
    fn popoviciu_vectors() {
        let (x, y) = popoviciu_majorization_vectors(&int(0), &int(0), &int(0));
        assert_eq!(x, vec![int(0); 6]);
        assert_eq!(y, vec![int(0); 6]);
        let (x, y) = popoviciu_majorization_vectors(&int(0), &int(1), &int(2));
        assert_eq!(x, qs(&["1/2", "1/2", "3/2", "3/2", "1", "1"]));
        assert_eq!(y, qs(&["1", "1", "1", "0", "1", "2"]));
        let (x, y) = popoviciu_majorization_vectors(&int(0), &int(-1), &int(2));
        assert_eq!(x, qs(&["-1/2", "-1/2", "1/2", "1/2", "1", "1"]));
        assert_eq!(y, qs(&["1/3", "1/3", "1/3", "0", "-1", "2"]));
        assert!(popoviciu_holds(&int(0), &int(1), &int(2)));
        assert!(popoviciu_holds(&int(5), &int(5), &int(5)));
    }
}
