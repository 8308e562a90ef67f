use serde_json::{json, Value};

use crate::bell::{tuples, ProbabilityBox, Scenario};
use crate::error::{invalid, structural, Error, Result};
use crate::scalar::Scalar;

/// Independent input distributions, one per party.
#[derive(Clone, Debug, PartialEq)]
pub struct InputPrior<T> {
    pub per_party: Vec<Vec<T>>,
}

impl<T: Scalar> InputPrior<T> {
    pub fn new(scenario: &Scenario, per_party: Vec<Vec<T>>) -> Result<Self> {
        if per_party.len() != scenario.parties() {
            return structural("one prior per party required");
        }
        for (p, (v, &m)) in per_party.iter().zip(scenario.inputs()).enumerate() {
            if v.len() != m {
                return structural(format!("prior of party {p} has {} entries, expected {m}", v.len()));
            }
            if v.iter().any(|q| *q <= T::zero()) {
                return invalid(format!("prior of party {p} must be strictly positive"));
            }
            let total = v.iter().cloned().fold(T::zero(), |a, b| a + b);
            if !total.close_to(&T::one(), T::default_tol()) {
                return invalid(format!("prior of party {p} sums to {total}"));
            }
        }
        Ok(InputPrior { per_party })
    }

    pub fn uniform(scenario: &Scenario) -> Self {
        let per_party = scenario
            .inputs()
            .iter()
            .map(|&m| vec![T::one() / T::from_i64(m as i64); m])
            .collect();
        InputPrior { per_party }
    }

    fn weight(&self, x: &[usize]) -> T {
        x.iter().enumerate().fold(T::one(), |acc, (p, &xp)| acc * self.per_party[p][xp].clone())
    }
}

/// Observed inputs and outputs; `None` means unobserved.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub inputs: Vec<Option<usize>>,
    pub outputs: Vec<Option<usize>>,
}

impl Observation {
    pub fn none(parties: usize) -> Self {
        Observation { inputs: vec![None; parties], outputs: vec![None; parties] }
    }

    pub fn input(mut self, party: usize, x: usize) -> Self {
        self.inputs[party] = Some(x);
        self
    }

    pub fn output(mut self, party: usize, a: usize) -> Self {
        self.outputs[party] = Some(a);
        self
    }

    fn admits(&self, a: &[usize], x: &[usize]) -> bool {
        let ok = |obs: &[Option<usize>], v: &[usize]| obs.iter().zip(v).all(|(o, v)| o.is_none_or(|o| o == *v));
        ok(&self.inputs, x) && ok(&self.outputs, a)
    }
}

/// Bayes posterior of party `i`'s input given `observed`, with inputs
/// drawn independently from `priors`.
pub fn input_posterior<T: Scalar>(b: &ProbabilityBox<T>, priors: &InputPrior<T>, i: usize, observed: &Observation) -> Result<Vec<T>> {
    let s = b.scenario();
    let n = s.parties();
    if i >= n {
        return invalid(format!("party {i} out of range"));
    }
    if observed.inputs.len() != n || observed.outputs.len() != n {
        return structural("observation must list every party");
    }
    if observed.inputs[i].is_some() {
        return invalid("the audited party's own input cannot be observed");
    }
    for (p, (x, a)) in observed.inputs.iter().zip(&observed.outputs).enumerate() {
        if x.is_some_and(|x| x >= s.inputs()[p]) || a.is_some_and(|a| a >= s.outputs()[p]) {
            return invalid(format!("observed value of party {p} out of range"));
        }
    }
    let mut post = vec![T::zero(); s.inputs()[i]];
    for (k, p) in b.table().iter().enumerate() {
        let (a, x) = s.entry(k);
        if p.is_zero() || !observed.admits(&a, &x) {
            continue;
        }
        post[x[i]] = post[x[i]].clone() + priors.weight(&x) * p.clone();
    }
    let total = post.iter().cloned().fold(T::zero(), |acc, v| acc + v);
    if total.is_zero() {
        return Err(Error::ZeroProbability);
    }
    Ok(post.into_iter().map(|v| v / total.clone()).collect())
}

/// One conditioning cell (x, z, a, c) at spectator input y.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioCell<T> {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub a: usize,
    pub c: usize,
    /// P(y | x, z, a, c) / P(y), from the full joint distribution.
    pub posterior_ratio: T,
    /// P(a, c | x, y, z) / P̄(a, c | x, z), P̄ averaging over y with the prior.
    pub likelihood_ratio: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport<T> {
    pub holds: bool,
    pub cells: Vec<RatioCell<T>>,
    /// (x, z, a, c) with zero probability.
    pub skipped: Vec<[usize; 4]>,
}

impl<T: Scalar> RatioReport<T> {
    /// Cells whose ratio differs from one: where the middle input is not
    /// freely chosen relative to the outer parties' data.
    pub fn informative_cells(&self, tol: f64) -> usize {
        self.cells.iter().filter(|c| !c.posterior_ratio.close_to(&T::one(), tol)).count()
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|c| {
                json!({"x": c.x, "y": c.y, "z": c.z, "a": c.a, "c": c.c,
                       "posterior_ratio": c.posterior_ratio.to_json(),
                       "likelihood_ratio": c.likelihood_ratio.to_json()})
            })
            .collect();
        json!({"holds": self.holds, "cells": cells, "skipped": self.skipped})
    }
}

/// Checks P(y|x,z,a,c)/P(y) = P(a,c|x,y,z)/P̄(a,c|x,z) for the first three
/// parties read as (A, B, C). The left side comes from the joint
/// distribution under the priors, the right side from the box directly.
pub fn ratio_identity_check<T: Scalar>(b: &ProbabilityBox<T>, priors: &InputPrior<T>) -> Result<RatioReport<T>> {
    ratio_identity_check_with_tol(b, priors, T::default_tol())
}

pub fn ratio_identity_check_with_tol<T: Scalar>(b: &ProbabilityBox<T>, priors: &InputPrior<T>, tol: f64) -> Result<RatioReport<T>> {
    let s = b.scenario();
    if s.parties() != 3 {
        return Err(Error::Unsupported("the ratio identity needs exactly three parties".into()));
    }
    let [mx, my, mz] = [s.inputs()[0], s.inputs()[1], s.inputs()[2]];
    let [ka, kb, kc] = [s.outputs()[0], s.outputs()[1], s.outputs()[2]];
    let pac = |a: usize, c: usize, x: &[usize]| {
        (0..kb).fold(T::zero(), |acc, bb| acc + b.get(&[a, bb, c], x).clone())
    };
    // Joint weights P(x, y, z, a, c) under the priors.
    let joint = |x: usize, y: usize, z: usize, a: usize, c: usize| priors.weight(&[x, y, z]) * pac(a, c, &[x, y, z]);
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    let mut holds = true;
    for v in tuples(&[mx, mz, ka, kc]) {
        let (x, z, a, c) = (v[0], v[1], v[2], v[3]);
        let evidence = (0..my).fold(T::zero(), |acc, y| acc + joint(x, y, z, a, c));
        if evidence.is_zero() {
            skipped.push([x, z, a, c]);
            continue;
        }
        let averaged = (0..my).fold(T::zero(), |acc, y| acc + priors.per_party[1][y].clone() * pac(a, c, &[x, y, z]));
        for y in 0..my {
            let py = priors.per_party[1][y].clone();
            let posterior_ratio = joint(x, y, z, a, c) / evidence.clone() / py;
            let likelihood_ratio = pac(a, c, &[x, y, z]) / averaged.clone();
            holds &= posterior_ratio.close_to(&likelihood_ratio, tol);
            cells.push(RatioCell { x, y, z, a, c, posterior_ratio, likelihood_ratio });
        }
    }
    Ok(RatioReport { holds, cells, skipped })
}

/// Weights q(λ) and, per λ, a two-party box for the screened pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CommonCauseDecomposition<T> {
    pub weights: Vec<T>,
    pub components: Vec<ProbabilityBox<T>>,
}

impl<T: Scalar> CommonCauseDecomposition<T> {
    pub fn new(weights: Vec<T>, components: Vec<ProbabilityBox<T>>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return structural("one component per weight required");
        }
        if weights.iter().any(|w| *w < T::zero()) {
            return structural("negative common-cause weight");
        }
        let total = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !total.close_to(&T::one(), T::default_tol()) {
            return structural(format!("common-cause weights sum to {total}"));
        }
        let s = components[0].scenario().clone();
        if s.parties() != 2 {
            return structural("components must be two-party boxes");
        }
        for (l, comp) in components.iter().enumerate() {
            if comp.scenario() != &s {
                return structural(format!("component {l} has a different scenario"));
            }
            if !comp.validate().passes() {
                return structural(format!("component {l} is not a normalized box"));
            }
        }
        Ok(CommonCauseDecomposition { weights, components })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreeningReport {
    /// Components that do not factorize as P(a|x,λ)·P(c|z,λ).
    pub screening_failures: Vec<usize>,
    /// The weighted components reproduce the pair's box at the given y.
    pub reproduces_box: bool,
    /// The pair's single-party marginals do not depend on the spectator input.
    pub marginals_independent: bool,
    pub passes: bool,
}

impl ScreeningReport {
    pub fn to_json(&self) -> Value {
        json!({"passes": self.passes, "screening_failures": self.screening_failures,
               "reproduces_box": self.reproduces_box, "marginals_independent": self.marginals_independent})
    }
}

/// Verifies a common-cause explanation of the `pair` correlations of a
/// three-party box at spectator input `y`: every component factorizes,
/// the mixture equals the pair's box at `y`, and the prior-averaged
/// marginals agree with the box's marginals at every spectator input.
pub fn screening_check<T: Scalar>(
    b: &ProbabilityBox<T>,
    pair: (usize, usize),
    y: usize,
    decomposition: &CommonCauseDecomposition<T>,
) -> Result<ScreeningReport> {
    let s = b.scenario();
    if s.parties() != 3 {
        return Err(Error::Unsupported("screening needs a three-party box".into()));
    }
    let (i, j) = pair;
    if i == j || i > 2 || j > 2 {
        return invalid("pair must name two distinct parties");
    }
    let spectator = 3 - i - j;
    if y >= s.inputs()[spectator] {
        return invalid("spectator input out of range");
    }
    let restricted = |yy: usize| b.reduce(&[i, j], &[yy]);
    let at_y = restricted(y)?;
    if decomposition.components[0].scenario() != at_y.scenario() {
        return structural("decomposition does not match the pair's scenario");
    }
    let tol = T::default_tol();
    let ps = at_y.scenario().clone();
    let screening_failures = decomposition
        .components
        .iter()
        .enumerate()
        .filter(|(_, comp)| {
            tuples(ps.inputs()).any(|x| {
                tuples(ps.outputs()).any(|a| {
                    let left = comp.marginal(&[0], &[a[0]], &[x[0]], &[0]).unwrap();
                    let right = comp.marginal(&[1], &[a[1]], &[x[1]], &[0]).unwrap();
                    !comp.get(&a, &x).close_to(&(left * right), tol)
                })
            })
        })
        .map(|(l, _)| l)
        .collect::<Vec<_>>();
    let weighted: Vec<(T, &ProbabilityBox<T>)> =
        decomposition.weights.iter().cloned().zip(decomposition.components.iter()).collect();
    let mixture = ProbabilityBox::mix(&weighted)?;
    let reproduces_box = mixture.table().iter().zip(at_y.table()).all(|(p, q)| p.close_to(q, tol));
    let mut marginals_independent = true;
    for yy in 0..s.inputs()[spectator] {
        let other = restricted(yy)?;
        for party in [0usize, 1] {
            for x in tuples(ps.inputs()) {
                for a in 0..ps.outputs()[party] {
                    let m = mixture.marginal(&[party], &[a], &[x[party]], &[x[1 - party]])?;
                    let o = other.marginal(&[party], &[a], &[x[party]], &[x[1 - party]])?;
                    marginals_independent &= m.close_to(&o, tol);
                }
            }
        }
    }
    let passes = screening_failures.is_empty() && reproduces_box && marginals_independent;
    Ok(ScreeningReport { screening_failures, reproduces_box, marginals_independent, passes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::*;
    use crate::scalar::{int, rat, Rational};
    use crate::RationalBox;

    fn uniform3() -> InputPrior<Rational> {
        InputPrior::uniform(&Scenario::binary(3))
    }

    #[test]
    fn ns_box_posterior_is_prior() {
        let pr = pr_box();
        let prior = InputPrior::new(pr.scenario(), vec![vec![rat(1, 3), rat(2, 3)], vec![rat(1, 4), rat(3, 4)]]).unwrap();
        let obs = Observation::none(2).input(1, 1).output(1, 0);
        assert_eq!(input_posterior(&pr, &prior, 0, &obs).unwrap(), vec![rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn monogamy_posteriors() {
        let m = monogamy_box();
        // Outer data (x, z, a, c) = (0, 1, 0, 0) reveals y.
        let obs = Observation::none(3).input(0, 0).input(2, 1).output(0, 0).output(2, 0);
        let post = input_posterior(&m, &uniform3(), 1, &obs).unwrap();
        assert_eq!(post, vec![int(1), int(0)]);
        // At (1, 1, 0, 0) both values of y are equally likely.
        let flat = Observation::none(3).input(0, 1).input(2, 1).output(0, 0).output(2, 0);
        assert_eq!(input_posterior(&m, &uniform3(), 1, &flat).unwrap(), vec![rat(1, 2), rat(1, 2)]);
        // A's data alone says nothing about y.
        let a_only = Observation::none(3).input(0, 1).output(0, 0);
        assert_eq!(input_posterior(&m, &uniform3(), 1, &a_only).unwrap(), vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn posterior_errors() {
        let m = monogamy_box();
        let impossible = Observation::none(3).input(0, 0).input(1, 0).input(2, 0).output(0, 0).output(1, 1);
        assert!(matches!(input_posterior(&m, &uniform3(), 2, &Observation::none(3).input(0, 0).input(1, 0).output(0, 0).output(1, 1)), Err(Error::ZeroProbability)));
        assert!(input_posterior(&m, &uniform3(), 0, &impossible).is_err());
        assert!(InputPrior::new(m.scenario(), vec![vec![int(1), int(0)]; 3]).is_err());
        assert!(InputPrior::new(m.scenario(), vec![vec![rat(1, 2), rat(1, 3)]; 3]).is_err());
    }

    #[test]
    fn ratio_identity_examples() {
        let pr3 = ProbabilityBox::product(&pr_box(), &[0, 2], &RationalBox::from_fn(Scenario::binary(1), |_, _| rat(1, 2)), &[1]).unwrap();
        let r = ratio_identity_check(&pr3, &uniform3()).unwrap();
        assert!(r.holds);
        assert_eq!(r.informative_cells(0.0), 0);
        let m = ratio_identity_check(&monogamy_box(), &uniform3()).unwrap();
        assert!(m.holds);
        assert!(m.informative_cells(0.0) > 0);
        assert!(ratio_identity_check(&example_mermin_box(), &uniform3()).unwrap().holds);
        assert!(ratio_identity_check(&pr_box(), &InputPrior::uniform(pr_box().scenario())).is_err());
    }

    #[test]
    fn ratio_report_skips_impossible_cells() {
        let r = ratio_identity_check(&example_mermin_box(), &uniform3()).unwrap();
        // a = c whenever x·z = 0, whatever y is; at x = z = 1 all four (a, c) occur.
        assert_eq!(r.skipped.len(), 6);
        assert_eq!(r.cells.len(), 2 * (16 - 6));
    }

    fn bit_box(a: usize, c: usize) -> RationalBox {
        ProbabilityBox::from_fn(Scenario::binary(2), |o, _| if o == [a, c] { int(1) } else { int(0) })
    }

    #[test]
    fn screening_examples() {
        let ex = example_mermin_box();
        let shared = CommonCauseDecomposition::new(vec![rat(1, 2), rat(1, 2)], vec![bit_box(0, 0), bit_box(1, 1)]).unwrap();
        let r = screening_check(&ex, (0, 2), 0, &shared).unwrap();
        assert!(r.passes, "{r:?}");
        // At y = 1 the pair is PR-correlated: no such explanation.
        let r1 = screening_check(&ex, (0, 2), 1, &shared).unwrap();
        assert!(!r1.reproduces_box);
        let itself = CommonCauseDecomposition::new(vec![int(1)], vec![ex.reduce(&[0, 2], &[1]).unwrap()]).unwrap();
        assert_eq!(screening_check(&ex, (0, 2), 1, &itself).unwrap().screening_failures, vec![0]);
    }

    #[test]
    fn product_box_screens() {
        let pa = RationalBox::from_fn(Scenario::binary(1), |a, x| if a[0] == x[0] { rat(3, 4) } else { rat(1, 4) });
        let pc = RationalBox::from_fn(Scenario::binary(1), |_, _| rat(1, 2));
        let pair = ProbabilityBox::product(&pa, &[0], &pc, &[1]).unwrap();
        let full = ProbabilityBox::product(&pair, &[0, 2], &RationalBox::from_fn(Scenario::binary(1), |a, _| if a[0] == 0 { int(1) } else { int(0) }), &[1]).unwrap();
        let d = CommonCauseDecomposition::new(vec![int(1)], vec![pair]).unwrap();
        assert!(screening_check(&full, (0, 2), 1, &d).unwrap().passes);
    }

    #[test]
    fn bad_decompositions() {
        assert!(CommonCauseDecomposition::new(vec![rat(9, 10)], vec![bit_box(0, 0)]).is_err());
        assert!(CommonCauseDecomposition::new(vec![rat(1, 2), rat(1, 2)], vec![bit_box(0, 0)]).is_err());
        assert!(CommonCauseDecomposition::new(vec![rat(3, 2), rat(-1, 2)], vec![bit_box(0, 0), bit_box(1, 1)]).is_err());
    }
}
