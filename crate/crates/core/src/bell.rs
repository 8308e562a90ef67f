use std::fmt;

use serde_json::{json, Value};

use crate::error::{invalid, structural, Error, Result};
use crate::scalar::{sum, Rational, Scalar};

/// Decode a flat index into a mixed-radix tuple, first digit most significant.
pub fn decode(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

pub fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

/// All tuples of the given radices in flattening order.
pub fn tuples(radices: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let count: usize = radices.iter().product();
    (0..count).map(move |i| decode(i, radices))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl Scenario {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        if inputs.is_empty() {
            return structural("scenario needs at least one party");
        }
        if inputs.len() != outputs.len() {
            return structural(format!(
                "{} input counts but {} output counts",
                inputs.len(),
                outputs.len()
            ));
        }
        if inputs.iter().chain(&outputs).any(|&k| k == 0) {
            return structural("input and output counts must be positive");
        }
        let size = inputs
            .iter()
            .chain(&outputs)
            .try_fold(1usize, |acc, &k| acc.checked_mul(k));
        if size.is_none() {
            return structural("table size overflows");
        }
        Ok(Scenario { inputs, outputs })
    }

    /// n parties, each with `m` inputs and `k` outputs.
    pub fn uniform(n: usize, m: usize, k: usize) -> Result<Self> {
        Self::new(vec![m; n], vec![k; n])
    }

    pub fn binary(n: usize) -> Self {
        Self::uniform(n, 2, 2).expect("binary scenario")
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }
    pub fn input_count(&self) -> usize {
        self.inputs.iter().product()
    }
    pub fn output_count(&self) -> usize {
        self.outputs.iter().product()
    }
    pub fn table_len(&self) -> usize {
        self.input_count() * self.output_count()
    }

    pub fn is_binary_output(&self) -> bool {
        self.outputs.iter().all(|&k| k == 2)
    }

    pub fn index(&self, a: &[usize], x: &[usize]) -> usize {
        encode(x, &self.inputs) * self.output_count() + encode(a, &self.outputs)
    }

    /// Inverse of `index`: (a, x).
    pub fn entry(&self, index: usize) -> (Vec<usize>, Vec<usize>) {
        let k = self.output_count();
        (decode(index % k, &self.outputs), decode(index / k, &self.inputs))
    }

    pub fn check_tuple(&self, a: &[usize], x: &[usize]) -> Result<()> {
        if a.len() != self.parties() || x.len() != self.parties() {
            return invalid("tuple length does not match party count");
        }
        for i in 0..self.parties() {
            if a[i] >= self.outputs[i] || x[i] >= self.inputs[i] {
                return invalid(format!("label out of range at party {i}"));
            }
        }
        Ok(())
    }

    /// Scenario of the listed parties, in the listed order.
    pub fn restrict(&self, parties: &[usize]) -> Result<Scenario> {
        check_subset(parties, self.parties())?;
        Scenario::new(
            parties.iter().map(|&p| self.inputs[p]).collect(),
            parties.iter().map(|&p| self.outputs[p]).collect(),
        )
    }

    pub fn to_json(&self) -> Value {
        json!({"parties": self.parties(), "inputs": self.inputs, "outputs": self.outputs})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let list = |key: &str| -> Result<Vec<usize>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Structural(format!("scenario.{key} missing")))?
                .iter()
                .map(|e| {
                    e.as_u64()
                        .map(|k| k as usize)
                        .ok_or_else(|| Error::Structural(format!("scenario.{key}: bad entry {e}")))
                })
                .collect()
        };
        let s = Scenario::new(list("inputs")?, list("outputs")?)?;
        if let Some(n) = v.get("parties") {
            if n.as_u64() != Some(s.parties() as u64) {
                return structural("scenario.parties disagrees with list lengths");
            }
        }
        Ok(s)
    }
}

/// Distinct, in-range party indices.
pub(crate) fn check_subset(parties: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &p in parties {
        if p >= n {
            return invalid(format!("party {p} out of range"));
        }
        if seen[p] {
            return invalid(format!("party {p} repeated"));
        }
        seen[p] = true;
    }
    Ok(())
}

pub(crate) fn complement(parties: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|p| !parties.contains(p)).collect()
}

/// Response functions of a deterministic box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeterministicStrategy {
    /// `tables[i][x_i]` is party i's output.
    Local(Vec<Vec<usize>>),
    /// `table[input index]` is the full output tuple.
    Joint(Vec<Vec<usize>>),
}

impl DeterministicStrategy {
    pub fn respond(&self, scenario: &Scenario, x: &[usize]) -> Vec<usize> {
        match self {
            DeterministicStrategy::Local(t) => x.iter().enumerate().map(|(i, &xi)| t[i][xi]).collect(),
            DeterministicStrategy::Joint(t) => t[encode(x, scenario.inputs())].clone(),
        }
    }

    fn check(&self, s: &Scenario) -> Result<()> {
        match self {
            DeterministicStrategy::Local(t) => {
                if t.len() != s.parties() {
                    return structural("one response table per party required");
                }
                for (i, row) in t.iter().enumerate() {
                    if row.len() != s.inputs()[i] || row.iter().any(|&a| a >= s.outputs()[i]) {
                        return structural(format!("bad response table for party {i}"));
                    }
                }
            }
            DeterministicStrategy::Joint(t) => {
                if t.len() != s.input_count() {
                    return structural("joint strategy must cover every input tuple");
                }
                for a in t {
                    if a.len() != s.parties() || a.iter().zip(s.outputs()).any(|(&ai, &k)| ai >= k) {
                        return structural("joint strategy output out of range");
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// Input tuples whose row does not sum to one.
    pub normalization_failures: Vec<Vec<usize>>,
    /// (a, x) of entries below zero.
    pub negative_entries: Vec<(Vec<usize>, Vec<usize>)>,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.normalization_failures.is_empty() && self.negative_entries.is_empty()
    }
}

/// Conditional table P(a|x); `a` varies fastest, party 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityBox<T> {
    scenario: Scenario,
    table: Vec<T>,
}

impl<T: Scalar> ProbabilityBox<T> {
    pub fn new(scenario: Scenario, table: Vec<T>) -> Result<Self> {
        if table.len() != scenario.table_len() {
            return structural(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                scenario.table_len()
            ));
        }
        Ok(ProbabilityBox { scenario, table })
    }

    pub fn zeros(scenario: Scenario) -> Self {
        let table = vec![T::zero(); scenario.table_len()];
        ProbabilityBox { scenario, table }
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> T) -> Self {
        let table = (0..scenario.table_len())
            .map(|i| {
                let (a, x) = scenario.entry(i);
                f(&a, &x)
            })
            .collect();
        ProbabilityBox { scenario, table }
    }

    /// Sparse construction; omitted entries are zero, repeats are an error.
    pub fn from_entries(scenario: Scenario, entries: Vec<(Vec<usize>, Vec<usize>, T)>) -> Result<Self> {
        let mut table = vec![T::zero(); scenario.table_len()];
        let mut set = vec![false; table.len()];
        for (a, x, p) in entries {
            scenario.check_tuple(&a, &x)?;
            let i = scenario.index(&a, &x);
            if set[i] {
                return structural(format!("duplicate entry a={a:?} x={x:?}"));
            }
            set[i] = true;
            table[i] = p;
        }
        Ok(ProbabilityBox { scenario, table })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }
    pub fn table(&self) -> &[T] {
        &self.table
    }
    pub fn into_table(self) -> Vec<T> {
        self.table
    }

    pub fn get(&self, a: &[usize], x: &[usize]) -> &T {
        &self.table[self.scenario.index(a, x)]
    }

    /// Row of P(·|x) in output order.
    pub fn row(&self, x: &[usize]) -> &[T] {
        let k = self.scenario.output_count();
        let start = encode(x, self.scenario.inputs()) * k;
        &self.table[start..start + k]
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with_tol(T::default_tol())
    }

    pub fn validate_with_tol(&self, tol: f64) -> ValidationReport {
        let s = &self.scenario;
        let mut report = ValidationReport { normalization_failures: vec![], negative_entries: vec![] };
        for (xi, x) in tuples(s.inputs()).enumerate() {
            let row = &self.table[xi * s.output_count()..(xi + 1) * s.output_count()];
            for (ai, p) in row.iter().enumerate() {
                let negative = if T::EXACT { *p < T::zero() } else { p.as_f64() < -T::negative_tol() };
                if negative {
                    report.negative_entries.push((decode(ai, s.outputs()), x.clone()));
                }
            }
            if !sum(row.iter().cloned()).close_to(&T::one(), tol) {
                report.normalization_failures.push(x);
            }
        }
        report
    }

    /// Σ over complement outputs of P(a|x), x assembled from x_S and x_c.
    /// `subset` may be in any order; `a_s`, `x_s` follow it and `x_c`
    /// follows the complement in increasing party order.
    pub fn marginal(&self, subset: &[usize], a_s: &[usize], x_s: &[usize], x_c: &[usize]) -> Result<T> {
        let s = &self.scenario;
        let n = s.parties();
        check_subset(subset, n)?;
        let comp = complement(subset, n);
        if a_s.len() != subset.len() || x_s.len() != subset.len() || x_c.len() != comp.len() {
            return invalid("marginal tuples do not match the subset");
        }
        let mut x = vec![0; n];
        let mut a = vec![0; n];
        for (k, &p) in subset.iter().enumerate() {
            x[p] = x_s[k];
            a[p] = a_s[k];
        }
        for (k, &p) in comp.iter().enumerate() {
            x[p] = x_c[k];
        }
        s.check_tuple(&a, &x)?;
        let comp_radix: Vec<usize> = comp.iter().map(|&p| s.outputs()[p]).collect();
        Ok(sum(tuples(&comp_radix).map(|rest| {
            for (k, &p) in comp.iter().enumerate() {
                a[p] = rest[k];
            }
            self.get(&a, &x).clone()
        })))
    }

    /// For every full input index and every output tuple of `subset`
    /// (sorted ascending), the marginal. Layout: `[x_index][a_S index]`.
    pub fn marginal_table(&self, subset: &[usize]) -> Vec<Vec<T>> {
        let s = &self.scenario;
        let radix: Vec<usize> = subset.iter().map(|&p| s.outputs()[p]).collect();
        let k: usize = radix.iter().product();
        (0..s.input_count())
            .map(|xi| {
                let mut acc = vec![T::zero(); k];
                let row = &self.table[xi * s.output_count()..(xi + 1) * s.output_count()];
                for (ai, p) in row.iter().enumerate() {
                    if p.is_zero() {
                        continue;
                    }
                    let a = decode(ai, s.outputs());
                    let sub: Vec<usize> = subset.iter().map(|&q| a[q]).collect();
                    let j = encode(&sub, &radix);
                    acc[j] = acc[j].clone() + p.clone();
                }
                acc
            })
            .collect()
    }

    fn require_binary(&self, parties: &[usize]) -> Result<()> {
        for &p in parties {
            if self.scenario.outputs()[p] != 2 {
                return Err(Error::Unsupported(format!("party {p} does not have binary outputs")));
            }
        }
        Ok(())
    }

    /// Parity correlator of the outputs of `subset` at the full input `x`,
    /// summing the other parties' outputs.
    pub fn subset_correlator(&self, subset: &[usize], x: &[usize]) -> Result<T> {
        check_subset(subset, self.scenario.parties())?;
        self.require_binary(subset)?;
        if x.len() != self.scenario.parties() || x.iter().zip(self.scenario.inputs()).any(|(&v, &m)| v >= m) {
            return invalid("input tuple out of range");
        }
        let s = &self.scenario;
        let mut acc = T::zero();
        for (ai, p) in self.row(x).iter().enumerate() {
            let a = decode(ai, s.outputs());
            let odd = subset.iter().fold(0, |acc, &q| acc ^ a[q]) == 1;
            if odd {
                acc = acc - p.clone();
            } else {
                acc = acc + p.clone();
            }
        }
        Ok(acc)
    }

    /// P(⊕a_i = 0|x) − P(⊕a_i = 1|x).
    pub fn correlator(&self, x: &[usize]) -> Result<T> {
        let all: Vec<usize> = (0..self.scenario.parties()).collect();
        self.subset_correlator(&all, x)
    }

    /// ⟨A_{x_i} A_{x_j}⟩ with spectator inputs fixed (spectators in
    /// increasing party order) and spectator outputs summed.
    pub fn conditioned_pair_correlator(
        &self,
        pair: (usize, usize),
        x_pair: (usize, usize),
        x_spectators: &[usize],
    ) -> Result<T> {
        let (i, j) = pair;
        let n = self.scenario.parties();
        check_subset(&[i, j], n)?;
        let spect = complement(&[i, j], n);
        if spect.len() != x_spectators.len() {
            return invalid("one spectator input per remaining party");
        }
        let mut x = vec![0; n];
        x[i] = x_pair.0;
        x[j] = x_pair.1;
        for (k, &p) in spect.iter().enumerate() {
            x[p] = x_spectators[k];
        }
        self.subset_correlator(&[i, j], &x)
    }

    pub fn from_deterministic(scenario: &Scenario, strategy: &DeterministicStrategy) -> Result<Self> {
        strategy.check(scenario)?;
        let mut b = Self::zeros(scenario.clone());
        for x in tuples(scenario.inputs()) {
            let a = strategy.respond(scenario, &x);
            let i = scenario.index(&a, &x);
            b.table[i] = T::one();
        }
        Ok(b)
    }

    /// Product box; `left_parties`/`right_parties` give the positions of
    /// each factor's parties in the result and must partition 0..n.
    pub fn product(
        left: &Self,
        left_parties: &[usize],
        right: &Self,
        right_parties: &[usize],
    ) -> Result<Self> {
        let n = left_parties.len() + right_parties.len();
        if left_parties.len() != left.scenario.parties() || right_parties.len() != right.scenario.parties() {
            return structural("party placement does not match factor sizes");
        }
        let mut owner = vec![None; n];
        for (k, &p) in left_parties.iter().enumerate() {
            if p >= n || owner[p].is_some() {
                return structural("overlapping or out-of-range party sets");
            }
            owner[p] = Some((0, k));
        }
        for (k, &p) in right_parties.iter().enumerate() {
            if p >= n || owner[p].is_some() {
                return structural("overlapping or out-of-range party sets");
            }
            owner[p] = Some((1, k));
        }
        let owner: Vec<(usize, usize)> = owner.into_iter().map(|o| o.unwrap()).collect();
        let factors = [&left.scenario, &right.scenario];
        let inputs = owner.iter().map(|&(f, k)| factors[f].inputs()[k]).collect();
        let outputs = owner.iter().map(|&(f, k)| factors[f].outputs()[k]).collect();
        let scenario = Scenario::new(inputs, outputs)?;
        let pick = |t: &[usize], parties: &[usize]| -> Vec<usize> { parties.iter().map(|&p| t[p]).collect() };
        Ok(Self::from_fn(scenario, |a, x| {
            let l = left.get(&pick(a, left_parties), &pick(x, left_parties)).clone();
            let r = right.get(&pick(a, right_parties), &pick(x, right_parties)).clone();
            l * r
        }))
    }

    /// Convex combination; weights must be nonnegative and sum to one.
    pub fn mix(weighted: &[(T, &Self)]) -> Result<Self> {
        let first = match weighted.first() {
            Some((_, b)) => *b,
            None => return structural("mixture of zero boxes"),
        };
        let mut total = T::zero();
        for (w, b) in weighted {
            if *w < T::zero() {
                return structural("negative mixture weight");
            }
            if b.scenario != first.scenario {
                return structural("mixture components have different scenarios");
            }
            total = total + w.clone();
        }
        if !total.close_to(&T::one(), T::default_tol()) {
            return structural(format!("mixture weights sum to {total}, not 1"));
        }
        let mut table = vec![T::zero(); first.table.len()];
        for (w, b) in weighted {
            if w.is_zero() {
                continue;
            }
            for (t, p) in table.iter_mut().zip(&b.table) {
                *t = t.clone() + w.clone() * p.clone();
            }
        }
        Ok(ProbabilityBox { scenario: first.scenario.clone(), table })
    }

    /// Box of `parties` (in the given order) with the remaining parties
    /// held at `x_rest` (increasing party order) and their outputs summed.
    pub fn reduce(&self, parties: &[usize], x_rest: &[usize]) -> Result<Self> {
        let sub = self.scenario.restrict(parties)?;
        let n = self.scenario.parties();
        let rest = complement(parties, n);
        if rest.len() != x_rest.len() {
            return invalid("one fixed input per removed party");
        }
        let mut out = Vec::with_capacity(sub.table_len());
        for i in 0..sub.table_len() {
            let (a, x) = sub.entry(i);
            let mut xs = vec![0; n];
            for (k, &p) in parties.iter().enumerate() {
                xs[p] = x[k];
            }
            for (k, &p) in rest.iter().enumerate() {
                xs[p] = x_rest[k];
            }
            let xc: Vec<usize> = rest.iter().map(|&p| xs[p]).collect();
            out.push(self.marginal(parties, &a, &x, &xc)?);
        }
        ProbabilityBox::new(sub, out)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ProbabilityBox<U> {
        ProbabilityBox { scenario: self.scenario.clone(), table: self.table.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> ProbabilityBox<f64> {
        self.map(|p| p.as_f64())
    }

    /// Exact rational copy. Float entries are snapped; within each row the
    /// largest entry then absorbs the residual so rows sum to one exactly.
    pub fn to_rational(&self) -> Result<ProbabilityBox<Rational>> {
        let mut table: Vec<Rational> = self.table.iter().map(|p| p.to_rational()).collect::<Result<_>>()?;
        if !T::EXACT {
            let k = self.scenario.output_count();
            for row in table.chunks_mut(k) {
                let big = (0..k).fold(0, |best, i| if row[i] > row[best] { i } else { best });
                let others: Rational = sum(row.iter().enumerate().filter(|(i, _)| *i != big).map(|(_, p)| p.clone()));
                row[big] = Rational::from_i64(1) - others;
            }
        }
        Ok(ProbabilityBox { scenario: self.scenario.clone(), table })
    }

    /// Nonzero entries in table order.
    pub fn support(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>, &T)> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(move |(i, p)| {
                let (a, x) = self.scenario.entry(i);
                (a, x, p)
            })
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self.support().map(|(a, x, p)| json!({"a": a, "x": x, "p": p.to_json()})).collect();
        json!({"scenario": self.scenario.to_json(), "kind": T::KIND, "entries": entries})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or(T::KIND);
        if kind != T::KIND {
            return structural(format!("expected a {} box, found {kind}", T::KIND));
        }
        let scenario = Scenario::from_json(v.get("scenario").ok_or_else(|| Error::Structural("missing scenario".into()))?)?;
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Structural("missing entries".into()))?;
        let tuple = |e: &Value, key: &str| -> Result<Vec<usize>> {
            e.get(key)
                .and_then(Value::as_array)
                .and_then(|l| l.iter().map(|d| d.as_u64().map(|d| d as usize)).collect::<Option<Vec<_>>>())
                .ok_or_else(|| Error::Structural(format!("entry field {key:?} missing or malformed")))
        };
        let parsed = entries
            .iter()
            .map(|e| {
                let p = e.get("p").ok_or_else(|| Error::Structural("entry without p".into()))?;
                Ok((tuple(e, "a")?, tuple(e, "x")?, T::from_json(p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(scenario, parsed).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Structural(m),
            other => other,
        })
    }
}

impl<T: Scalar> fmt::Display for ProbabilityBox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, x, p) in self.support() {
            writeln!(f, "P({a:?}|{x:?}) = {p}")?;
        }
        Ok(())
    }
}

/// A box of either scalar kind, as read from JSON.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyBox {
    Rational(ProbabilityBox<Rational>),
    Float(ProbabilityBox<f64>),
}

impl AnyBox {
    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("kind").and_then(Value::as_str) {
            Some("rational") => Ok(AnyBox::Rational(ProbabilityBox::from_json(v)?)),
            Some("float") => Ok(AnyBox::Float(ProbabilityBox::from_json(v)?)),
            other => structural(format!("unknown box kind {other:?}")),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyBox::Rational(b) => b.to_json(),
            AnyBox::Float(b) => b.to_json(),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        match self {
            AnyBox::Rational(b) => b.scenario(),
            AnyBox::Float(b) => b.scenario(),
        }
    }
}

impl From<ProbabilityBox<Rational>> for AnyBox {
    fn from(b: ProbabilityBox<Rational>) -> Self {
        AnyBox::Rational(b)
    }
}

impl From<ProbabilityBox<f64>> for AnyBox {
    fn from(b: ProbabilityBox<f64>) -> Self {
        AnyBox::Float(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn pr() -> ProbabilityBox<Rational> {
        ProbabilityBox::from_fn(Scenario::binary(2), |a, x| {
            if a[0] ^ a[1] == x[0] & x[1] {
                rat(1, 2)
            } else {
                int(0)
            }
        })
    }

    #[test]
    fn flattening_order() {
        let s = Scenario::new(vec![2, 3], vec![2, 2]).unwrap();
        assert_eq!(s.index(&[0, 0], &[0, 0]), 0);
        assert_eq!(s.index(&[0, 1], &[0, 0]), 1);
        assert_eq!(s.index(&[1, 0], &[0, 0]), 2);
        assert_eq!(s.index(&[0, 0], &[0, 1]), 4);
        assert_eq!(s.index(&[0, 0], &[1, 0]), 12);
        for i in 0..s.table_len() {
            let (a, x) = s.entry(i);
            assert_eq!(s.index(&a, &x), i);
        }
    }

    #[test]
    fn scenario_rejects_bad_shapes() {
        assert!(Scenario::new(vec![], vec![]).is_err());
        assert!(Scenario::new(vec![2], vec![2, 2]).is_err());
        assert!(Scenario::new(vec![0], vec![2]).is_err());
    }

    #[test]
    fn validation_reports() {
        assert!(pr().validate().passes());
        let s = Scenario::uniform(1, 1, 2).unwrap();
        let bad = ProbabilityBox::new(s.clone(), vec![rat(3, 4), rat(3, 4)]).unwrap();
        assert_eq!(bad.validate().normalization_failures, vec![vec![0]]);
        let neg = ProbabilityBox::new(s.clone(), vec![rat(-1, 8), rat(9, 8)]).unwrap();
        let r = neg.validate();
        assert_eq!(r.negative_entries.len(), 1);
        assert!(r.normalization_failures.is_empty());
        assert!(matches!(ProbabilityBox::new(s, vec![int(1)]), Err(Error::Structural(_))));
    }

    #[test]
    fn pr_marginals_and_correlators() {
        let b = pr();
        for a in 0..2 {
            for x in 0..2 {
                for z in 0..2 {
                    assert_eq!(b.marginal(&[0], &[a], &[x], &[z]).unwrap(), rat(1, 2));
                }
            }
        }
        assert_eq!(b.correlator(&[1, 1]).unwrap(), int(-1));
        assert_eq!(b.correlator(&[0, 0]).unwrap(), int(1));
        assert_eq!(b.marginal(&[0, 1], &[0, 0], &[0, 0], &[]).unwrap(), rat(1, 2));
        assert!(b.marginal(&[2], &[0], &[0], &[0]).is_err());
    }

    #[test]
    fn correlator_needs_binary_outputs() {
        let s = Scenario::new(vec![1], vec![3]).unwrap();
        let b = ProbabilityBox::from_fn(s, |a, _| if a[0] == 0 { int(1) } else { int(0) });
        assert!(matches!(b.correlator(&[0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn deterministic_product_mix() {
        let s1 = Scenario::binary(1);
        let ident = ProbabilityBox::<Rational>::from_deterministic(&s1, &DeterministicStrategy::Local(vec![vec![0, 1]])).unwrap();
        assert_eq!(*ident.get(&[1], &[1]), int(1));
        assert_eq!(*ident.get(&[0], &[1]), int(0));
        let zero = ProbabilityBox::<Rational>::from_deterministic(&s1, &DeterministicStrategy::Local(vec![vec![0, 0]])).unwrap();
        let prod = ProbabilityBox::product(&ident, &[1], &zero, &[0]).unwrap();
        assert_eq!(*prod.get(&[0, 1], &[0, 1]), int(1));
        let same = ProbabilityBox::mix(&[(int(1), &prod)]).unwrap();
        assert_eq!(same, prod);
        assert!(ProbabilityBox::product(&ident, &[0], &zero, &[0]).is_err());
        assert!(ProbabilityBox::mix(&[(rat(1, 2), &prod)]).is_err());

        // Shared randomness over a=c reproduces the correlated uniform box.
        let s2 = Scenario::binary(2);
        let both = |v| {
            ProbabilityBox::<Rational>::from_deterministic(&s2, &DeterministicStrategy::Local(vec![vec![v, v], vec![v, v]])).unwrap()
        };
        let (b0, b1) = (both(0), both(1));
        let local = ProbabilityBox::mix(&[(rat(1, 2), &b0), (rat(1, 2), &b1)]).unwrap();
        for x in tuples(&[2, 2]) {
            assert_eq!(*local.get(&[0, 0], &x), rat(1, 2));
            assert_eq!(*local.get(&[1, 1], &x), rat(1, 2));
            assert_eq!(local.correlator(&x).unwrap(), int(1));
        }
    }

    #[test]
    fn joint_strategy_may_signal() {
        let s = Scenario::binary(2);
        // a = x·y, b = x: both outputs depend on both inputs.
        let table = tuples(&[2, 2]).map(|x| vec![x[0] & x[1], x[0]]).collect();
        let b = ProbabilityBox::<Rational>::from_deterministic(&s, &DeterministicStrategy::Joint(table)).unwrap();
        assert!(b.validate().passes());
        assert_eq!(*b.get(&[1, 1], &[1, 1]), int(1));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let b = pr();
        let back = ProbabilityBox::<Rational>::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        let text = serde_json::to_string(&b.to_json()).unwrap();
        assert_eq!(AnyBox::parse(&text).unwrap(), AnyBox::Rational(b.clone()));
        let f = b.to_f64();
        assert_eq!(ProbabilityBox::<f64>::from_json(&f.to_json()).unwrap(), f);
        assert!(ProbabilityBox::<f64>::from_json(&b.to_json()).is_err());
    }

    #[test]
    fn json_rejects_bad_entries() {
        let v: Value = serde_json::from_str(
            r#"{"scenario":{"parties":1,"inputs":[1],"outputs":[2]},"kind":"rational",
                "entries":[{"a":[2],"x":[0],"p":"1"}]}"#,
        )
        .unwrap();
        assert!(matches!(AnyBox::from_json(&v), Err(Error::Structural(_))));
    }

    #[test]
    fn reduce_keeps_listed_parties() {
        let b = pr();
        let a = b.reduce(&[0], &[1]).unwrap();
        assert_eq!(a.table(), &[rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)]);
        let swapped = b.reduce(&[1, 0], &[]).unwrap();
        assert_eq!(swapped.get(&[1, 0], &[1, 1]), b.get(&[0, 1], &[1, 1]));
    }

    #[test]
    fn snapping_a_float_box_keeps_rows_normalized() {
        let s = Scenario::uniform(1, 1, 3).unwrap();
        let third = 1.0 / 3.0;
        let b = ProbabilityBox::new(s, vec![third, third, 1.0 - 2.0 * third]).unwrap();
        let r = b.to_rational().unwrap();
        assert!(r.validate().passes());
        assert_eq!(*r.get(&[0], &[0]), rat(1, 3));
    }
}
