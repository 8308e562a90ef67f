use serde_json::{json, Value};

use crate::bell::{check_subset, complement, decode, encode, tuples, ProbabilityBox, Scenario};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// The marginal of `subset` (sorted) must not depend on the complement's inputs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarginalConstraint {
    pub subset: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintRegime {
    FullNS,
    /// Parties on a line in the given order; contiguous runs are protected.
    LineRC(Vec<usize>),
    Custom(Vec<Vec<usize>>),
}

impl ConstraintRegime {
    /// Three collinear parties with the middle one inside the outer
    /// parties' joint future: {0},{1},{2},{0,1},{1,2}.
    pub fn three_party_rc() -> Self {
        ConstraintRegime::Custom(vec![vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2]])
    }

    pub fn line(n: usize) -> Self {
        ConstraintRegime::LineRC((0..n).collect())
    }

    pub fn constraints(&self, scenario: &Scenario) -> Result<Vec<MarginalConstraint>> {
        let mut out = match self {
            ConstraintRegime::FullNS => ns_constraints(scenario),
            ConstraintRegime::LineRC(order) => rc_line_constraints(scenario, order)?,
            ConstraintRegime::Custom(subsets) => {
                let n = scenario.parties();
                let mut seen = Vec::new();
                for s in subsets {
                    check_subset(s, n)?;
                    if s.is_empty() {
                        return invalid("protected subsets must be non-empty");
                    }
                    let mut sorted = s.clone();
                    sorted.sort_unstable();
                    if seen.contains(&sorted) {
                        return invalid(format!("subset {sorted:?} listed twice"));
                    }
                    seen.push(sorted);
                }
                seen.into_iter()
                    .filter(|s| s.len() < n)
                    .map(|subset| MarginalConstraint { subset })
                    .collect()
            }
        };
        out.sort();
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        match self {
            ConstraintRegime::FullNS => json!({"regime": "ns"}),
            ConstraintRegime::LineRC(order) => json!({"regime": "rc-line", "order": order}),
            ConstraintRegime::Custom(subsets) => json!({"regime": "custom", "subsets": subsets}),
        }
    }
}

/// One constraint per non-empty proper subset.
pub fn ns_constraints(scenario: &Scenario) -> Vec<MarginalConstraint> {
    let n = scenario.parties();
    let mut out: Vec<MarginalConstraint> = (1..(1usize << n) - 1)
        .map(|mask| MarginalConstraint { subset: (0..n).filter(|i| mask >> i & 1 == 1).collect() })
        .collect();
    out.sort();
    out
}

/// Proper contiguous runs of `order`; the full set is vacuous and omitted.
pub fn rc_line_constraints(scenario: &Scenario, order: &[usize]) -> Result<Vec<MarginalConstraint>> {
    let n = scenario.parties();
    if order.len() != n {
        return invalid("line order must list every party");
    }
    check_subset(order, n)?;
    let mut out = Vec::new();
    for len in 1..n {
        for start in 0..=n - len {
            let mut subset = order[start..start + len].to_vec();
            subset.sort_unstable();
            out.push(MarginalConstraint { subset });
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation<T> {
    pub subset: Vec<usize>,
    pub a_s: Vec<usize>,
    pub x_s: Vec<usize>,
    /// Reference complement input (all zeros).
    pub x_c: Vec<usize>,
    pub x_c_other: Vec<usize>,
    /// Marginal at `x_c_other` minus marginal at `x_c`.
    pub discrepancy: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport<T> {
    pub passes: bool,
    pub violations: Vec<Violation<T>>,
}

impl<T: Scalar> CheckReport<T> {
    pub fn to_json(&self) -> Value {
        let v: Vec<Value> = self
            .violations
            .iter()
            .map(|v| {
                json!({"subset": v.subset, "a_s": v.a_s, "x_s": v.x_s, "x_c": v.x_c,
                       "x_c_other": v.x_c_other, "discrepancy": v.discrepancy.to_json()})
            })
            .collect();
        json!({"passes": self.passes, "violations": v})
    }
}

/// Assemble a full input tuple from subset and complement parts.
fn join(subset: &[usize], x_s: &[usize], comp: &[usize], x_c: &[usize], n: usize) -> Vec<usize> {
    let mut x = vec![0; n];
    for (k, &p) in subset.iter().enumerate() {
        x[p] = x_s[k];
    }
    for (k, &p) in comp.iter().enumerate() {
        x[p] = x_c[k];
    }
    x
}

pub fn check<T: Scalar>(b: &ProbabilityBox<T>, regime: &ConstraintRegime) -> Result<CheckReport<T>> {
    check_with_tol(b, regime, T::default_tol())
}

/// Every protected marginal is compared against its value at the all-zeros
/// complement input. Violations come ordered by subset, x_S, x_c', a_S.
pub fn check_with_tol<T: Scalar>(b: &ProbabilityBox<T>, regime: &ConstraintRegime, tol: f64) -> Result<CheckReport<T>> {
    let s = b.scenario();
    let n = s.parties();
    let mut violations = Vec::new();
    for c in regime.constraints(s)? {
        let subset = &c.subset;
        let comp = complement(subset, n);
        let in_s: Vec<usize> = subset.iter().map(|&p| s.inputs()[p]).collect();
        let in_c: Vec<usize> = comp.iter().map(|&p| s.inputs()[p]).collect();
        let out_s: Vec<usize> = subset.iter().map(|&p| s.outputs()[p]).collect();
        let table = b.marginal_table(subset);
        let reference = vec![0; comp.len()];
        for x_s in tuples(&in_s) {
            let r = &table[encode(&join(subset, &x_s, &comp, &reference, n), s.inputs())];
            for x_c in tuples(&in_c).skip(1) {
                let other = &table[encode(&join(subset, &x_s, &comp, &x_c, n), s.inputs())];
                for (ai, (p, q)) in r.iter().zip(other).enumerate() {
                    if !q.close_to(p, tol) {
                        violations.push(Violation {
                            subset: subset.clone(),
                            a_s: decode(ai, &out_s),
                            x_s: x_s.clone(),
                            x_c: reference.clone(),
                            x_c_other: x_c.clone(),
                            discrepancy: q.clone() - p.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(CheckReport { passes: violations.is_empty(), violations })
}

/// Single-party marginals of a box passing the line runs are well defined;
/// this recomputes them directly as a cross-check.
pub fn derived_marginal_consistency<T: Scalar>(b: &ProbabilityBox<T>, order: &[usize]) -> Result<bool> {
    let n = b.scenario().parties();
    rc_line_constraints(b.scenario(), order)?;
    let singles = ConstraintRegime::Custom((0..n).map(|p| vec![p]).collect());
    Ok(check(b, &singles)?.passes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, Rational};

    fn subsets(cs: &[MarginalConstraint]) -> Vec<Vec<usize>> {
        cs.iter().map(|c| c.subset.clone()).collect()
    }

    #[test]
    fn counts_match_closed_forms() {
        assert!(ns_constraints(&Scenario::binary(1)).is_empty());
        assert_eq!(subsets(&ns_constraints(&Scenario::binary(2))), vec![vec![0], vec![1]]);
        for n in 1..=6 {
            let s = Scenario::binary(n);
            assert_eq!(ns_constraints(&s).len(), (1 << n) - 2);
            let order: Vec<usize> = (0..n).collect();
            assert_eq!(rc_line_constraints(&s, &order).unwrap().len(), (n * n + n - 2) / 2);
        }
    }

    #[test]
    fn three_party_runs() {
        let runs = subsets(&rc_line_constraints(&Scenario::binary(3), &[0, 1, 2]).unwrap());
        assert_eq!(runs, vec![vec![0], vec![0, 1], vec![1], vec![1, 2], vec![2]]);
        assert!(!runs.contains(&vec![0, 2]));
        assert_eq!(
            ConstraintRegime::three_party_rc().constraints(&Scenario::binary(3)).unwrap(),
            ConstraintRegime::line(3).constraints(&Scenario::binary(3)).unwrap()
        );
    }

    #[test]
    fn four_party_runs() {
        let runs = subsets(&rc_line_constraints(&Scenario::binary(4), &[0, 1, 2, 3]).unwrap());
        assert_eq!(runs.len(), 9);
        for r in [vec![0, 1, 2], vec![1, 2, 3], vec![2, 3], vec![3]] {
            assert!(runs.contains(&r));
        }
        assert!(!runs.contains(&vec![0, 2]));
    }

    #[test]
    fn bad_regimes() {
        let s = Scenario::binary(3);
        assert!(rc_line_constraints(&s, &[0, 1]).is_err());
        assert!(rc_line_constraints(&s, &[0, 1, 1]).is_err());
        assert!(ConstraintRegime::Custom(vec![vec![0], vec![0]]).constraints(&s).is_err());
        assert!(ConstraintRegime::Custom(vec![vec![3]]).constraints(&s).is_err());
    }

    #[test]
    fn signaling_box_is_reported() {
        // b = x: Bob's marginal depends on Alice's input.
        let s = Scenario::binary(2);
        let b = ProbabilityBox::from_fn(s, |a, x| if a[0] == 0 && a[1] == x[0] { int(1) } else { int(0) });
        let r = check(&b, &ConstraintRegime::FullNS).unwrap();
        assert!(!r.passes);
        assert_eq!(r.violations.len(), 4);
        let v = &r.violations[0];
        assert_eq!((v.subset.clone(), v.a_s.clone(), v.x_s.clone()), (vec![1], vec![0], vec![0]));
        assert_eq!(v.x_c_other, vec![1]);
        assert_eq!(v.discrepancy, int(-1));
        assert!(!derived_marginal_consistency(&b, &[0, 1]).unwrap());
    }

    #[test]
    fn middle_party_signaled_by_first() {
        // Three parties; b = x while everything else is constant.
        let s = Scenario::binary(3);
        let b = ProbabilityBox::from_fn(s, |a, x| {
            if a[0] == 0 && a[2] == 0 && a[1] == x[0] {
                int(1)
            } else {
                int(0)
            }
        });
        assert!(!derived_marginal_consistency(&b, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn float_tolerance() {
        let s = Scenario::binary(2);
        let b = ProbabilityBox::from_fn(s.clone(), |a, x| match (a, x) {
            ([0, 0], [1, 1]) => 0.25 + 1e-12,
            ([1, 0], [1, 1]) => 0.25 - 1e-12,
            _ => 0.25,
        });
        assert!(check(&b, &ConstraintRegime::FullNS).unwrap().passes);
        assert!(!check_with_tol(&b, &ConstraintRegime::FullNS, 1e-15).unwrap().passes);
        let exact: ProbabilityBox<Rational> = ProbabilityBox::from_fn(s, |_, _| rat(1, 4));
        assert!(check(&exact, &ConstraintRegime::FullNS).unwrap().passes);
    }
}
