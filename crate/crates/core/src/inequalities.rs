use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::bell::{check_subset, tuples, DeterministicStrategy, ProbabilityBox, Scenario};
use crate::constraints::{check, ConstraintRegime};
use crate::error::{invalid, structural, Error, Result};
use crate::scalar::{format_rational, int, parse_rational, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    Exact(Rational),
    Approx(f64),
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Exact(r) => write!(f, "{}", format_rational(r)),
            BoundValue::Approx(v) => write!(f, "~{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bound {
    pub label: String,
    pub value: BoundValue,
}

/// Linear functional Σ c(a,x) P(a|x) with rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    pub name: String,
    scenario: Scenario,
    coefficients: Vec<Rational>,
    pub bounds: Vec<Bound>,
    /// Single-party or marginal terms read at a reference input; only
    /// meaningful on boxes passing full no-signaling.
    pub requires_ns: bool,
}

/// Result of an evaluation together with any caveats.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl BellFunctional {
    pub fn zero(name: impl Into<String>, scenario: Scenario) -> Self {
        let coefficients = vec![Rational::zero(); scenario.table_len()];
        BellFunctional { name: name.into(), scenario, coefficients, bounds: vec![], requires_ns: false }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn coefficient(&self, a: &[usize], x: &[usize]) -> &Rational {
        &self.coefficients[self.scenario.index(a, x)]
    }

    pub fn add_probability(&mut self, coef: &Rational, a: &[usize], x: &[usize]) -> Result<()> {
        self.scenario.check_tuple(a, x)?;
        let i = self.scenario.index(a, x);
        self.coefficients[i] += coef;
        Ok(())
    }

    /// coef · ⟨∏_{i∈S} A_i⟩ at the full input `x`; outputs outside S summed.
    pub fn add_correlator(&mut self, coef: &Rational, subset: &[usize], x: &[usize]) -> Result<()> {
        check_subset(subset, self.scenario.parties())?;
        for &p in subset {
            if self.scenario.outputs()[p] != 2 {
                return Err(Error::Unsupported(format!("party {p} is not binary")));
            }
        }
        let outputs = self.scenario.outputs().to_vec();
        for a in tuples(&outputs) {
            let parity = subset.iter().fold(0, |acc, &p| acc ^ a[p]);
            let c = if parity == 0 { coef.clone() } else { -coef.clone() };
            self.add_probability(&c, &a, x)?;
        }
        Ok(())
    }

    pub fn with_bound(mut self, label: &str, value: BoundValue) -> Self {
        self.bounds.push(Bound { label: label.into(), value });
        self
    }

    pub fn bound(&self, label: &str) -> Option<&BoundValue> {
        self.bounds.iter().find(|b| b.label == label).map(|b| &b.value)
    }

    pub fn plus(&self, other: &BellFunctional) -> Result<BellFunctional> {
        if self.scenario != other.scenario {
            return structural("functionals live on different scenarios");
        }
        let mut out = BellFunctional::zero(format!("{}+{}", self.name, other.name), self.scenario.clone());
        for (o, (a, b)) in out.coefficients.iter_mut().zip(self.coefficients.iter().zip(&other.coefficients)) {
            *o = a + b;
        }
        out.requires_ns = self.requires_ns || other.requires_ns;
        Ok(out)
    }

    pub fn negated(&self) -> BellFunctional {
        let mut out = self.clone();
        out.name = format!("-{}", self.name);
        out.coefficients.iter_mut().for_each(|c| *c = -c.clone());
        out.bounds.clear();
        out
    }

    /// Value on the deterministic box of `strategy`, without building it.
    pub fn evaluate_deterministic(&self, strategy: &DeterministicStrategy) -> Rational {
        tuples(self.scenario.inputs())
            .map(|x| {
                let a = strategy.respond(&self.scenario, &x);
                self.coefficient(&a, &x).clone()
            })
            .fold(Rational::zero(), |acc, c| acc + c)
    }

    pub fn to_json(&self) -> Value {
        let coefficients: Vec<Value> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let (a, x) = self.scenario.entry(i);
                json!({"a": a, "x": x, "p": format_rational(c)})
            })
            .collect();
        let bounds: Vec<Value> = self
            .bounds
            .iter()
            .map(|b| match &b.value {
                BoundValue::Exact(r) => json!({"label": b.label, "value": format_rational(r)}),
                BoundValue::Approx(v) => json!({"label": b.label, "approx": v}),
            })
            .collect();
        json!({"name": self.name, "scenario": self.scenario.to_json(), "coefficients": coefficients,
               "bounds": bounds, "requires_ns": self.requires_ns})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let scenario = Scenario::from_json(v.get("scenario").ok_or_else(|| Error::Structural("missing scenario".into()))?)?;
        let name = v.get("name").and_then(Value::as_str).unwrap_or("custom");
        let mut f = BellFunctional::zero(name, scenario);
        let coefs = v
            .get("coefficients")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Structural("missing coefficients".into()))?;
        for c in coefs {
            let tuple = |key: &str| -> Result<Vec<usize>> {
                c.get(key)
                    .and_then(Value::as_array)
                    .and_then(|l| l.iter().map(|d| d.as_u64().map(|d| d as usize)).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| Error::Structural(format!("coefficient field {key:?} malformed")))
            };
            let p = c.get("p").ok_or_else(|| Error::Structural("coefficient without p".into()))?;
            let r = <Rational as Scalar>::from_json(p)?;
            f.add_probability(&r, &tuple("a")?, &tuple("x")?)
                .map_err(|e| Error::Structural(e.to_string()))?;
        }
        if let Some(bs) = v.get("bounds").and_then(Value::as_array) {
            for b in bs {
                let label = b.get("label").and_then(Value::as_str).unwrap_or("").to_string();
                let value = match (b.get("value").and_then(Value::as_str), b.get("approx").and_then(Value::as_f64)) {
                    (Some(s), _) => BoundValue::Exact(parse_rational(s)?),
                    (None, Some(a)) => BoundValue::Approx(a),
                    _ => return structural("bound without value"),
                };
                f.bounds.push(Bound { label, value });
            }
        }
        f.requires_ns = v.get("requires_ns").and_then(Value::as_bool).unwrap_or(false);
        Ok(f)
    }
}

pub fn evaluate<T: Scalar>(f: &BellFunctional, b: &ProbabilityBox<T>) -> Result<T> {
    if f.scenario() != b.scenario() {
        return structural("functional and box scenarios differ");
    }
    Ok(f.coefficients
        .iter()
        .zip(b.table())
        .filter(|(c, _)| !c.is_zero())
        .fold(T::zero(), |acc, (c, p)| acc + T::from_rational(c) * p.clone()))
}

/// `evaluate`, warning when the functional presumes no-signaling and the
/// box does not satisfy it.
pub fn evaluate_checked<T: Scalar>(f: &BellFunctional, b: &ProbabilityBox<T>) -> Result<Evaluation<T>> {
    let value = evaluate(f, b)?;
    let mut warnings = Vec::new();
    if f.requires_ns && !check(b, &ConstraintRegime::FullNS)?.passes {
        warnings.push(format!(
            "{} reads marginals at reference input 0, but the box signals; the value depends on that convention",
            f.name
        ));
    }
    Ok(Evaluation { value, warnings })
}

fn binary_party(s: &Scenario, p: usize) -> Result<()> {
    if s.inputs()[p] != 2 || s.outputs()[p] != 2 {
        return Err(Error::Unsupported(format!("party {p} is not binary-input binary-output")));
    }
    Ok(())
}

/// ⟨A0B0⟩ + ⟨A0B1⟩ + ⟨A1B0⟩ − ⟨A1B1⟩ on `pair`; other parties sit at input 0.
pub fn chsh(pair: (usize, usize), scenario: &Scenario) -> Result<BellFunctional> {
    let (i, j) = pair;
    check_subset(&[i, j], scenario.parties())?;
    binary_party(scenario, i)?;
    binary_party(scenario, j)?;
    let mut f = BellFunctional::zero(format!("chsh[{i},{j}]"), scenario.clone());
    for (xi, xj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut x = vec![0; scenario.parties()];
        x[i] = xi;
        x[j] = xj;
        let c = if xi == 1 && xj == 1 { int(-1) } else { int(1) };
        f.add_correlator(&c, &[i, j], &x)?;
    }
    Ok(f.with_bound("local", BoundValue::Exact(int(2))).with_bound("no-signaling", BoundValue::Exact(int(4))))
}

/// CHSH between the first two parties plus CHSH between the last two.
pub fn chsh_sum() -> BellFunctional {
    let s = Scenario::binary(3);
    let mut f = chsh((0, 1), &s).unwrap().plus(&chsh((1, 2), &s).unwrap()).unwrap();
    f.name = "chsh-sum".into();
    f.with_bound("no-signaling", BoundValue::Exact(int(4)))
        .with_bound("line-rc", BoundValue::Exact(int(8)))
}

/// Required ±1 correlator values at selected inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorConstraintSet {
    pub constraints: Vec<(Vec<usize>, i8)>,
}

impl CorrelatorConstraintSet {
    /// Inputs whose correlator misses its target by more than `tol`.
    pub fn violations<T: Scalar>(&self, b: &ProbabilityBox<T>, tol: f64) -> Result<Vec<(Vec<usize>, T)>> {
        let mut out = Vec::new();
        for (x, v) in &self.constraints {
            let c = b.correlator(x)?;
            if !c.close_to(&T::from_i64(*v as i64), tol) {
                out.push((x.clone(), c));
            }
        }
        Ok(out)
    }

    pub fn satisfied_by<T: Scalar>(&self, b: &ProbabilityBox<T>, tol: f64) -> Result<bool> {
        Ok(self.violations(b, tol)?.is_empty())
    }
}

/// For every odd-weight input with Σx = n − 2k: ⟨x⟩ = (−1)^k.
pub fn mermin_constraints(n: usize) -> Result<CorrelatorConstraintSet> {
    if n < 3 || n.is_multiple_of(2) {
        return invalid(format!("Mermin constraints need odd n >= 3, got {n}"));
    }
    let constraints = tuples(&vec![2; n])
        .filter(|x| x.iter().sum::<usize>() % 2 == 1)
        .map(|x| {
            let k = (n - x.iter().sum::<usize>()) / 2;
            (x, if k.is_multiple_of(2) { 1 } else { -1 })
        })
        .collect();
    Ok(CorrelatorConstraintSet { constraints })
}

pub fn mermin_satisfied<T: Scalar>(b: &ProbabilityBox<T>, tol: f64) -> Result<bool> {
    let n = b.scenario().parties();
    if b.scenario() != &Scenario::binary(n) {
        return Err(Error::Unsupported("Mermin constraints need a binary scenario".into()));
    }
    mermin_constraints(n)?.satisfied_by(b, tol)
}

/// Σ_{x=y or x=y+1} P(a⊕b=1|x,y) + P(a⊕b=0|0,m−1).
pub fn chained(m: usize) -> Result<BellFunctional> {
    if m < 2 {
        return invalid("chained inequality needs m >= 2");
    }
    let s = Scenario::new(vec![m, m], vec![2, 2])?;
    let mut f = BellFunctional::zero(format!("chained[{m}]"), s);
    let one = int(1);
    for x in 0..m {
        for y in 0..m {
            let term = x == y || x == y + 1;
            let last = x == 0 && y == m - 1;
            for a in 0..2 {
                for b in 0..2 {
                    if (term && a != b) || (last && a == b) {
                        f.add_probability(&one, &[a, b], &[x, y])?;
                    }
                }
            }
        }
    }
    Ok(f.with_bound("classical", BoundValue::Exact(int(1)))
        .with_bound("polytope", BoundValue::Exact(int(0)))
        .with_bound("quantum", BoundValue::Approx(crate::quantum::chained_closed_form(m))))
}

/// Eight three-body correlators; signs by input (x,y,z):
/// + 000, 001, 100, 010 and − 101, 011, 110, 111.
pub fn svetlichny() -> BellFunctional {
    let s = Scenario::binary(3);
    let mut f = BellFunctional::zero("svetlichny", s);
    for x in tuples(&[2, 2, 2]) {
        let sign = match x[..] {
            [0, 0, 0] | [0, 0, 1] | [1, 0, 0] | [0, 1, 0] => 1,
            _ => -1,
        };
        f.add_correlator(&int(sign), &[0, 1, 2], &x).unwrap();
    }
    f.with_bound("classical-bilocal", BoundValue::Exact(int(4)))
        .with_bound("algebraic", BoundValue::Exact(int(8)))
}

/// 2⟨A0B0⟩ + ⟨A0C0⟩_{y=0} + ⟨A0C0⟩_{y=1} + 2⟨B0C1⟩ − 2⟨A1B1C0⟩ + 2⟨A1B1C1⟩.
/// Two-body terms hold the third party at input 0 unless conditioned.
pub fn rcbl_functional() -> BellFunctional {
    let s = Scenario::binary(3);
    let mut f = BellFunctional::zero("rcbl", s);
    let terms: [(i64, &[usize], [usize; 3]); 6] = [
        (2, &[0, 1], [0, 0, 0]),
        (1, &[0, 2], [0, 0, 0]),
        (1, &[0, 2], [0, 1, 0]),
        (2, &[1, 2], [0, 0, 1]),
        (-2, &[0, 1, 2], [1, 1, 0]),
        (2, &[0, 1, 2], [1, 1, 1]),
    ];
    for (c, subset, x) in terms {
        f.add_correlator(&int(c), subset, &x).unwrap();
    }
    f.with_bound("rcbl", BoundValue::Exact(int(6)))
        .with_bound("quantum", BoundValue::Approx(2.0 * (1.0 + 2.0 * std::f64::consts::SQRT_2)))
}

/// Four-party functional with single-, two- and three-body terms; parties
/// outside a term sit at input 0.
pub fn hidden_influence() -> BellFunctional {
    // (coefficient, [(party, input)])
    const TERMS: [(i64, &[(usize, usize)]); 23] = [
        (-3, &[(0, 0)]),
        (-1, &[(1, 0)]),
        (-1, &[(1, 1)]),
        (-1, &[(2, 0)]),
        (-3, &[(3, 0)]),
        (-1, &[(0, 1), (1, 0)]),
        (-1, &[(0, 1), (1, 1)]),
        (1, &[(0, 0), (2, 0)]),
        (2, &[(0, 1), (2, 0)]),
        (1, &[(0, 0), (3, 0)]),
        (1, &[(1, 0), (3, 1)]),
        (-1, &[(1, 1), (3, 1)]),
        (-1, &[(2, 0), (3, 0)]),
        (-2, &[(2, 1), (3, 1)]),
        (1, &[(0, 0), (1, 0), (3, 0)]),
        (1, &[(0, 0), (1, 0), (3, 1)]),
        (1, &[(0, 0), (1, 1), (3, 0)]),
        (-1, &[(0, 0), (1, 1), (3, 1)]),
        (-1, &[(0, 1), (1, 0), (3, 0)]),
        (-1, &[(0, 1), (1, 1), (3, 0)]),
        (1, &[(0, 0), (2, 0), (3, 0)]),
        (2, &[(0, 1), (2, 0), (3, 0)]),
        (-2, &[(0, 0), (2, 1), (3, 1)]),
    ];
    let s = Scenario::binary(4);
    let mut f = BellFunctional::zero("hidden-influence", s);
    for (c, term) in TERMS {
        let mut x = [0usize; 4];
        let subset: Vec<usize> = term.iter().map(|&(p, xi)| {
            x[p] = xi;
            p
        }).collect();
        f.add_correlator(&int(c), &subset, &x).unwrap();
    }
    f.requires_ns = true;
    f.with_bound("conditional-local", BoundValue::Exact(int(7)))
        .with_bound("quantum", BoundValue::Approx(7.2))
}

/// Names accepted by `by_name`.
pub const NAMES: [&str; 7] = ["chsh", "chsh-sum", "chained", "svetlichny", "rcbl", "hidden-influence", "mermin"];

/// Named functional; `m` is used by the chained family.
pub fn by_name(name: &str, m: Option<usize>) -> Result<BellFunctional> {
    match name {
        "chsh" => chsh((0, 1), &Scenario::binary(2)),
        "chsh-sum" => Ok(chsh_sum()),
        "chained" => chained(m.unwrap_or(2)),
        "svetlichny" => Ok(svetlichny()),
        "rcbl" => Ok(rcbl_functional()),
        "hidden-influence" => Ok(hidden_influence()),
        "mermin" => invalid("mermin is a constraint set, not a functional"),
        other => invalid(format!("unknown inequality {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::*;
    use crate::scalar::rat;

    fn local(s: &Scenario, t: Vec<Vec<usize>>) -> ProbabilityBox<Rational> {
        ProbabilityBox::from_deterministic(s, &DeterministicStrategy::Local(t)).unwrap()
    }

    #[test]
    fn chsh_values() {
        let s = Scenario::binary(2);
        let f = chsh((0, 1), &s).unwrap();
        assert_eq!(evaluate(&f, &pr_box()).unwrap(), int(4));
        assert_eq!(evaluate(&f, &local(&s, vec![vec![0, 0], vec![0, 0]])).unwrap(), int(2));
        let anti = ProbabilityBox::from_fn(s.clone(), |a, x| {
            if a[0] ^ a[1] == (x[0] & x[1]) ^ 1 { rat(1, 2) } else { int(0) }
        });
        assert_eq!(evaluate(&f, &anti).unwrap(), int(-4));
        assert_eq!(evaluate(&BellFunctional::zero("z", s), &pr_box()).unwrap(), int(0));
    }

    #[test]
    fn chsh_rejects_non_binary() {
        let s = Scenario::new(vec![3, 2], vec![2, 2]).unwrap();
        assert!(chsh((0, 1), &s).is_err());
    }

    #[test]
    fn monogamy_box_sums_to_eight() {
        assert_eq!(evaluate(&chsh_sum(), &monogamy_box()).unwrap(), int(8));
    }

    #[test]
    fn mermin_sets() {
        let c = mermin_constraints(3).unwrap();
        assert_eq!(c.constraints.len(), 4);
        assert!(c.constraints.contains(&(vec![1, 1, 1], 1)));
        for x in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            assert!(c.constraints.contains(&(x.to_vec(), -1)));
        }
        assert!(mermin_constraints(4).is_err());
        // The example box meets every constraint with the opposite sign.
        let ex = example_mermin_box();
        assert!(!mermin_satisfied(&ex, 0.0).unwrap());
        for (x, v) in &c.constraints {
            assert_eq!(ex.correlator(x).unwrap(), int(-*v as i64));
        }
        assert!(mermin_satisfied(&mermin_attack_box(3, &[1, 1, 1]).unwrap(), 0.0).unwrap());
    }

    #[test]
    fn chained_values() {
        let f = chained(2).unwrap();
        let corr = ProbabilityBox::from_fn(Scenario::binary(2), |a, _| if a[0] == a[1] { rat(1, 2) } else { int(0) });
        assert_eq!(evaluate(&f, &corr).unwrap(), int(1));
        assert!(chained(1).is_err());
        let qkd = qkd_attack_box(4).unwrap().reduce(&[0, 1], &[0]).unwrap();
        assert_eq!(evaluate(&chained(4).unwrap(), &qkd).unwrap(), int(0));
    }

    #[test]
    fn svetlichny_values() {
        let f = svetlichny();
        assert_eq!(evaluate(&f, &rcbl_svetlichny_box()).unwrap(), int(8));
        let zeros = local(&Scenario::binary(3), vec![vec![0, 0]; 3]);
        assert_eq!(evaluate(&f, &zeros).unwrap(), int(0));
    }

    #[test]
    fn rcbl_on_zeros_is_six() {
        let zeros = local(&Scenario::binary(3), vec![vec![0, 0]; 3]);
        assert_eq!(evaluate(&rcbl_functional(), &zeros).unwrap(), int(6));
        assert_eq!(rcbl_functional().bound("rcbl"), Some(&BoundValue::Exact(int(6))));
    }

    #[test]
    fn hidden_influence_on_zeros() {
        let f = hidden_influence();
        let zeros = local(&Scenario::binary(4), vec![vec![0, 0]; 4]);
        // Term-by-term sum of the coefficients.
        assert_eq!(evaluate(&f, &zeros).unwrap(), int(-9));
        assert_eq!(f.bound("conditional-local"), Some(&BoundValue::Exact(int(7))));
        let e = evaluate_checked(&f, &zeros).unwrap();
        assert!(e.warnings.is_empty());
    }

    #[test]
    fn hidden_influence_warns_on_signaling_boxes() {
        // d = x: the fourth party's output follows the first party's input.
        let b = ProbabilityBox::from_fn(Scenario::binary(4), |a, x| {
            if a[..3] == [0, 0, 0] && a[3] == x[0] { int(1) } else { int(0) }
        });
        let e = evaluate_checked(&hidden_influence(), &b).unwrap();
        assert_eq!(e.warnings.len(), 1);
    }

    #[test]
    fn deterministic_fast_path_matches_box() {
        let s = Scenario::binary(3);
        let t = vec![vec![0, 1], vec![1, 1], vec![1, 0]];
        let f = rcbl_functional();
        let strat = DeterministicStrategy::Local(t.clone());
        assert_eq!(f.evaluate_deterministic(&strat), evaluate(&f, &local(&s, t)).unwrap());
    }

    #[test]
    fn json_round_trip() {
        for f in [rcbl_functional(), chained(3).unwrap(), hidden_influence()] {
            assert_eq!(BellFunctional::from_json(&f.to_json()).unwrap(), f);
        }
    }

    #[test]
    fn scenario_mismatch() {
        assert!(evaluate(&svetlichny(), &pr_box()).is_err());
    }
}
