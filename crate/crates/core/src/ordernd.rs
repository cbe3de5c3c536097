//! Convex order in R^d through martingale couplings.
//!
//! `μ ⪯ ν` holds iff there is a coupling π of μ and ν whose conditional mean of
//! the ν-point, given the μ-atom `x_i`, is `x_i`. For finitely supported
//! measures that is a linear feasibility problem in the masses `π_ij`. When it
//! is infeasible, the Farkas certificate is turned into a max-affine convex
//! function whose integral against μ strictly exceeds the one against ν.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_feasibility, verify_outcome, LpOutcome, LpProblem};
use crate::measure::{DiscreteMeasure, PointQ};
use crate::rational::{ratio, serde_str, Rational};

/// Coupling LP for `μ ⪯ ν`.
///
/// Variable `π_ij` sits in column `i·|ν| + j`. Rows come in three blocks:
/// μ-marginals (one per `i`), ν-marginals (one per `j`), then the barycenter
/// rows `Σ_j π_ij y_j[k] = w_i x_i[k]`, grouped by `i` and then coordinate `k`.
#[derive(Clone, Debug)]
pub struct MartingaleSystem {
    pub dim: usize,
    pub mu_atoms: Vec<(PointQ, Rational)>,
    pub nu_atoms: Vec<(PointQ, Rational)>,
    pub lp: LpProblem,
}

impl MartingaleSystem {
    pub fn variable(&self, i: usize, j: usize) -> usize {
        i * self.nu_atoms.len() + j
    }

    fn barycenter_row(&self, i: usize, k: usize) -> usize {
        self.mu_atoms.len() + self.nu_atoms.len() + i * self.dim + k
    }
}

fn same_dim(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    Ok(())
}

pub fn build_martingale_system(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<MartingaleSystem> {
    same_dim(mu, nu)?;
    let d = mu.dim();
    let (m, n) = (mu.len(), nu.len());
    let rows = m + n + d * m;
    let mut matrix = vec![vec![Rational::zero(); m * n]; rows];
    let mut rhs = Vec::with_capacity(rows);

    for (i, (_, w)) in mu.atoms().iter().enumerate() {
        for j in 0..n {
            matrix[i][i * n + j] = Rational::from_integer(1.into());
        }
        rhs.push(w.clone());
    }
    for (j, (_, w)) in nu.atoms().iter().enumerate() {
        for i in 0..m {
            matrix[m + j][i * n + j] = Rational::from_integer(1.into());
        }
        rhs.push(w.clone());
    }
    for (i, (x, w)) in mu.atoms().iter().enumerate() {
        for k in 0..d {
            let row = m + n + i * d + k;
            for (j, (y, _)) in nu.atoms().iter().enumerate() {
                matrix[row][i * n + j] = y.coords()[k].clone();
            }
            rhs.push(w * &x.coords()[k]);
        }
    }
    Ok(MartingaleSystem {
        dim: d,
        mu_atoms: mu.atoms().to_vec(),
        nu_atoms: nu.atoms().to_vec(),
        lp: LpProblem::new(matrix, rhs)?,
    })
}

/// Convex function `w ↦ max_k (slope_k · w + intercept_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxAffineWitness {
    pub pieces: Vec<AffinePiece>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffinePiece {
    pub slope: PointQ,
    #[serde(with = "serde_str")]
    pub intercept: Rational,
}

impl AffinePiece {
    pub fn eval(&self, w: &PointQ) -> Rational {
        self.slope.dot_unchecked(w) + &self.intercept
    }
}

impl MaxAffineWitness {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::ShapeMismatch("witness needs at least one piece".into()));
        };
        let d = first.slope.dim();
        if let Some(p) = pieces.iter().find(|p| p.slope.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.slope.dim(),
            });
        }
        Ok(MaxAffineWitness { pieces })
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].slope.dim()
    }

    pub fn eval(&self, w: &PointQ) -> Result<Rational> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: w.dim(),
            });
        }
        Ok(self.eval_unchecked(w))
    }

    fn eval_unchecked(&self, w: &PointQ) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.eval(w))
            .max()
            .expect("at least one piece")
    }

    /// Drops duplicate pieces and pieces that never attain the maximum on `points`.
    fn pruned(&self, points: &[&PointQ]) -> MaxAffineWitness {
        let mut keep = vec![false; self.pieces.len()];
        for w in points {
            let values: Vec<Rational> = self.pieces.iter().map(|p| p.eval(w)).collect();
            let best = values.iter().max().expect("at least one piece");
            let k = values.iter().position(|v| v == best).expect("max is attained");
            keep[k] = true;
        }
        let mut pieces: Vec<AffinePiece> = Vec::new();
        for (piece, kept) in self.pieces.iter().zip(keep) {
            if kept && !pieces.contains(piece) {
                pieces.push(piece.clone());
            }
        }
        if pieces.is_empty() {
            pieces.push(self.pieces[0].clone());
        }
        MaxAffineWitness { pieces }
    }
}

/// `f(w) = max(0, ξ₁, ξ₂)`.
pub fn paper_witness() -> MaxAffineWitness {
    let piece = |s: &[i64]| AffinePiece {
        slope: PointQ::from_ints(s),
        intercept: Rational::zero(),
    };
    MaxAffineWitness {
        pieces: vec![piece(&[0, 0]), piece(&[1, 0]), piece(&[0, 1])],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessIntegrals {
    #[serde(with = "serde_str")]
    pub int_mu: Rational,
    #[serde(with = "serde_str")]
    pub int_nu: Rational,
    #[serde(with = "serde_str")]
    pub gap: Rational,
}

/// Exact `∫f dμ`, `∫f dν` and their difference.
pub fn evaluate_witness(f: &MaxAffineWitness, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<WitnessIntegrals> {
    same_dim(mu, nu)?;
    if f.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: f.dim(),
        });
    }
    let int_mu = mu.integrate(|p| f.eval_unchecked(p));
    let int_nu = nu.integrate(|p| f.eval_unchecked(p));
    let gap = &int_mu - &int_nu;
    Ok(WitnessIntegrals { int_mu, int_nu, gap })
}

/// Turns a Farkas certificate of the coupling LP into a separating witness.
///
/// Splitting `u` into `a_i` (μ rows), `b_j` (ν rows) and `c_i ∈ Q^d`
/// (barycenter rows), validity means `a_i + b_j + c_i·y_j ≥ 0` and
/// `Σ a_i w_i + Σ b_j v_j + Σ w_i c_i·x_i < 0`. Then `f(w) = max_i(−a_i − c_i·w)`
/// satisfies `f(y_j) ≤ b_j`, so `∫f dν ≤ Σ b_j v_j < Σ w_i(−a_i − c_i·x_i) ≤ ∫f dμ`.
pub fn extract_witness(sys: &MartingaleSystem, farkas: &[Rational]) -> Result<MaxAffineWitness> {
    let outcome = LpOutcome::Infeasible(farkas.to_vec());
    if !verify_outcome(&sys.lp, &outcome)? {
        return Err(Error::InvalidCertificate(
            "certificate does not satisfy uᵀA ≥ 0 and uᵀb < 0".into(),
        ));
    }
    let pieces = sys
        .mu_atoms
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let c = PointQ::new((0..sys.dim).map(|k| -&farkas[sys.barycenter_row(i, k)]).collect());
            AffinePiece {
                slope: c,
                intercept: -&farkas[i],
            }
        })
        .collect();
    let raw = MaxAffineWitness { pieces };
    let support: Vec<&PointQ> = sys
        .mu_atoms
        .iter()
        .chain(&sys.nu_atoms)
        .map(|(p, _)| p)
        .collect();
    Ok(raw.pruned(&support))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderVerdict {
    /// Exact martingale coupling; `coupling[i][j]` is the mass moved from μ-atom `i` to ν-atom `j`.
    Dominated { coupling: Vec<Vec<Rational>> },
    NotDominated { witness: MaxAffineWitness, gap: Rational },
    MeanMismatch,
}

impl OrderVerdict {
    pub fn kind(&self) -> &'static str {
        match self {
            OrderVerdict::Dominated { .. } => "Dominated",
            OrderVerdict::NotDominated { .. } => "NotDominated",
            OrderVerdict::MeanMismatch => "MeanMismatch",
        }
    }
}

/// Decides `μ ⪯ ν`.
pub fn check_convex_order(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OrderVerdict> {
    same_dim(mu, nu)?;
    if mu.barycenter() != nu.barycenter() {
        return Ok(OrderVerdict::MeanMismatch);
    }
    let sys = build_martingale_system(mu, nu)?;
    match solve_feasibility(&sys.lp) {
        LpOutcome::Feasible(z) => {
            let n = nu.len();
            let coupling = z.chunks(n).map(<[Rational]>::to_vec).collect();
            Ok(OrderVerdict::Dominated { coupling })
        }
        LpOutcome::Infeasible(u) => {
            let witness = extract_witness(&sys, &u)?;
            let gap = evaluate_witness(&witness, mu, nu)?.gap;
            debug_assert!(gap.is_positive());
            Ok(OrderVerdict::NotDominated { witness, gap })
        }
    }
}

/// Checks that `coupling` is a martingale coupling of `μ` and `ν`.
pub fn verify_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure, coupling: &[Vec<Rational>]) -> Result<bool> {
    let sys = build_martingale_system(mu, nu)?;
    if coupling.len() != mu.len() || coupling.iter().any(|r| r.len() != nu.len()) {
        return Err(Error::ShapeMismatch(format!(
            "coupling must be {}×{}",
            mu.len(),
            nu.len()
        )));
    }
    let z: Vec<Rational> = coupling.iter().flatten().cloned().collect();
    verify_outcome(&sys.lp, &LpOutcome::Feasible(z))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    #[serde(with = "serde_str")]
    pub lhs: Rational,
    #[serde(with = "serde_str")]
    pub rhs: Rational,
    pub holds: bool,
}

/// Both sides of `3f(c) + f(x) + f(y) + f(z) ≥ 2f((x+y)/2) + 2f((y+z)/2) + 2f((x+z)/2)`
/// where `c` is the centroid.
pub fn evaluate_inequality_1(x: &PointQ, y: &PointQ, z: &PointQ, f: &MaxAffineWitness) -> Result<InequalityCheck> {
    for p in [x, y, z] {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: p.dim(),
            });
        }
    }
    let half = ratio(1, 2);
    let centroid = x.add(y)?.add(z)?.scale(&ratio(1, 3));
    let lhs = Rational::from_integer(3.into()) * f.eval(&centroid)? + f.eval(x)? + f.eval(y)? + f.eval(z)?;
    let two = Rational::from_integer(2.into());
    let rhs = &two
        * (f.eval(&x.add(y)?.scale(&half))? + f.eval(&y.add(z)?.scale(&half))? + f.eval(&x.add(z)?.scale(&half))?);
    let holds = lhs >= rhs;
    Ok(InequalityCheck { lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{paper_instance, paper_points};
    use crate::rational::{int, parse_rational};

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn system_shapes() {
        let o = DiscreteMeasure::dirac(PointQ::zero(2)).unwrap();
        let sys = build_martingale_system(&o, &o).unwrap();
        assert_eq!((sys.lp.rows(), sys.lp.cols()), (4, 1));
        assert_eq!(solve_feasibility(&sys.lp), LpOutcome::Feasible(vec![int(1)]));

        let (mu, nu) = paper_instance();
        let sys = build_martingale_system(&mu, &nu).unwrap();
        assert_eq!((sys.lp.rows(), sys.lp.cols()), (13, 12));

        let a = DiscreteMeasure::uniform(vec![PointQ::from_ints(&[0]), PointQ::from_ints(&[2])]).unwrap();
        let b = DiscreteMeasure::uniform(vec![PointQ::from_ints(&[-1]), PointQ::from_ints(&[3])]).unwrap();
        let sys = build_martingale_system(&a, &b).unwrap();
        assert_eq!((sys.lp.rows(), sys.lp.cols()), (6, 4));
        assert!(build_martingale_system(&a, &nu).is_err());
    }

    #[test]
    fn counterexample_pair_is_not_dominated() {
        let (mu, nu) = paper_instance();
        let OrderVerdict::NotDominated { witness, gap } = check_convex_order(&mu, &nu).unwrap() else {
            panic!("expected NotDominated");
        };
        assert!(gap.is_positive());
        assert_eq!(evaluate_witness(&witness, &mu, &nu).unwrap().gap, gap);
    }

    #[test]
    fn dirac_at_barycenter_is_dominated() {
        let (_, nu) = paper_instance();
        let d = DiscreteMeasure::dirac(PointQ::new(vec![q("1/3"), q("1/3")])).unwrap();
        let OrderVerdict::Dominated { coupling } = check_convex_order(&d, &nu).unwrap() else {
            panic!("expected Dominated");
        };
        assert!(verify_coupling(&d, &nu, &coupling).unwrap());
        assert_eq!(check_convex_order(&nu, &nu).unwrap().kind(), "Dominated");
    }

    #[test]
    fn mean_mismatch_short_circuits() {
        let a = DiscreteMeasure::dirac(PointQ::from_ints(&[0, 0])).unwrap();
        let b = DiscreteMeasure::dirac(PointQ::from_ints(&[0, 1])).unwrap();
        assert_eq!(check_convex_order(&a, &b).unwrap(), OrderVerdict::MeanMismatch);
    }

    #[test]
    fn paper_witness_values() {
        let f = paper_witness();
        assert_eq!(f.eval(&PointQ::from_ints(&[2, 2])).unwrap(), int(2));
        assert_eq!(f.eval(&PointQ::from_ints(&[-1, 0])).unwrap(), int(0));
        assert_eq!(f.eval(&PointQ::new(vec![q("1/3"), q("1/3")])).unwrap(), q("1/3"));

        let (mu, nu) = paper_instance();
        let ints = evaluate_witness(&f, &mu, &nu).unwrap();
        assert_eq!((ints.int_mu, ints.int_nu, ints.gap), (q("2/3"), q("1/2"), q("1/6")));
        assert_eq!(evaluate_witness(&f, &mu, &mu).unwrap().gap, int(0));

        let linear = MaxAffineWitness::new(vec![AffinePiece {
            slope: PointQ::new(vec![q("3"), q("-7/2")]),
            intercept: q("5"),
        }])
        .unwrap();
        assert_eq!(evaluate_witness(&linear, &mu, &nu).unwrap().gap, int(0));
        assert!(evaluate_witness(&f, &mu.embed(3).unwrap(), &nu.embed(3).unwrap()).is_err());
    }

    #[test]
    fn inequality_one() {
        let (x, y, z) = paper_points();
        let f = paper_witness();
        let r = evaluate_inequality_1(&x, &y, &z, &f).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (int(3), int(4), false));

        let r = evaluate_inequality_1(&z, &z, &z, &f).unwrap();
        assert_eq!(r.lhs, int(12));
        assert_eq!(r.rhs, int(12));
        assert!(r.holds);

        let linear = MaxAffineWitness::new(vec![AffinePiece {
            slope: PointQ::from_ints(&[1, -2]),
            intercept: int(1),
        }])
        .unwrap();
        let r = evaluate_inequality_1(&x, &y, &z, &linear).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.holds);
        assert!(evaluate_inequality_1(&PointQ::zero(3), &y, &z, &f).is_err());
    }

    #[test]
    fn certificate_validation_and_constant_witness() {
        let mu = DiscreteMeasure::dirac(PointQ::from_ints(&[0])).unwrap();
        let sys = build_martingale_system(&mu, &mu).unwrap();
        // Rows: μ-marginal, ν-marginal, barycenter. A = [1; 1; 0], b = [1; 1; 0].
        assert!(matches!(
            extract_witness(&sys, &[int(1), int(-2), int(0)]),
            Err(Error::InvalidCertificate(_))
        ));
        assert!(extract_witness(&sys, &[int(0), int(0), int(0)]).is_err());

        // Unequal marginal masses: u = (1, -1, 0) gives uᵀA = 0 and uᵀb = -1, with c = 0.
        let lp = LpProblem::new(vec![vec![int(1)], vec![int(1)], vec![int(0)]], vec![int(1), int(2), int(0)]).unwrap();
        let sys = MartingaleSystem { lp, ..sys };
        let f = extract_witness(&sys, &[int(1), int(-1), int(0)]).unwrap();
        assert_eq!(f.pieces.len(), 1);
        assert!(f.pieces[0].slope.is_zero());
        assert_eq!(f.pieces[0].intercept, int(-1));
    }
}
