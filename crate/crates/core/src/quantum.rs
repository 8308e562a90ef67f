//! Dense complex state vectors and ±1-valued qubit observables.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::bell::{tuples, ProbabilityBox, Scenario};
use crate::error::{invalid, structural, Error, Result};
use crate::inequalities::{chained, evaluate};
use crate::FloatBox;

const TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let qubits = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << qubits || amps.is_empty() {
            return structural("state dimension must be a power of two");
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL {
            return invalid(format!("state norm² is {norm}"));
        }
        Ok(StateVector { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Apply a 2×2 matrix to one qubit; qubit 0 is the most significant bit.
    pub fn apply(&self, qubit: usize, m: &[[Complex64; 2]; 2]) -> Vec<Complex64> {
        apply_to(&self.amps, self.qubits, qubit, m)
    }

    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        self.amps.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }
}

fn apply_to(amps: &[Complex64], qubits: usize, qubit: usize, m: &[[Complex64; 2]; 2]) -> Vec<Complex64> {
    let bit = 1 << (qubits - 1 - qubit);
    let mut out = amps.to_vec();
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            out[i] = m[0][0] * a0 + m[0][1] * a1;
            out[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
    out
}

pub fn ghz(n: usize) -> StateVector {
    assert!(n >= 1, "ghz needs at least one qubit");
    let mut amps = vec![c(0.0, 0.0); 1 << n];
    amps[0] = c(FRAC_1_SQRT_2, 0.0);
    amps[(1 << n) - 1] = c(FRAC_1_SQRT_2, 0.0);
    StateVector { qubits: n, amps }
}

pub fn phi_plus() -> StateVector {
    ghz(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Hermitian 2×2 matrix with eigenvalues ±1; outcome 0 is eigenvalue +1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    m: [[Complex64; 2]; 2],
}

impl Observable {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let herm = (0..2).all(|i| (0..2).all(|j| (m[i][j] - m[j][i].conj()).norm() <= TOL));
        if !herm {
            return invalid("observable is not Hermitian");
        }
        let o = Observable { m };
        let sq = o.times(&o);
        let ident = (0..2).all(|i| (0..2).all(|j| (sq[i][j] - if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).norm() <= TOL));
        if !ident {
            return invalid("observable does not square to the identity");
        }
        Ok(o)
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    fn times(&self, other: &Observable) -> [[Complex64; 2]; 2] {
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.m[i][0] * other.m[0][j] + self.m[i][1] * other.m[1][j];
            }
        }
        out
    }

    /// (I + (−1)^outcome O)/2.
    pub fn projector(&self, outcome: usize) -> [[Complex64; 2]; 2] {
        let s = if outcome == 0 { 0.5 } else { -0.5 };
        let mut p = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = self.m[i][j] * s + if i == j { c(0.5, 0.0) } else { c(0.0, 0.0) };
            }
        }
        p
    }

    /// Real linear combination a·self + b·other, checked to be an observable.
    pub fn combine(a: f64, first: &Observable, b: f64, second: &Observable) -> Result<Observable> {
        let mut m = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = first.m[i][j] * a + second.m[i][j] * b;
            }
        }
        Observable::new(m)
    }
}

pub fn pauli(axis: Axis) -> Observable {
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    let m = match axis {
        Axis::X => [[o, l], [l, o]],
        Axis::Y => [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]],
        Axis::Z => [[l, o], [o, -l]],
    };
    Observable { m }
}

/// cos θ σ_z + sin θ σ_x.
pub fn planar_observable(theta: f64) -> Observable {
    let (s, co) = theta.sin_cos();
    Observable { m: [[c(co, 0.0), c(s, 0.0)], [c(s, 0.0), c(-co, 0.0)]] }
}

/// ⟨ψ|O_1 ⊗ … ⊗ O_n|ψ⟩.
pub fn correlator_quantum(state: &StateVector, obs: &[Observable]) -> Result<f64> {
    if obs.len() != state.qubits {
        return structural(format!("{} observables for {} qubits", obs.len(), state.qubits));
    }
    let mut v = state.amps.clone();
    for (q, o) in obs.iter().enumerate() {
        v = apply_to(&v, state.qubits, q, &o.m);
    }
    let e = state.inner(&v);
    if e.im.abs() > TOL {
        return Err(Error::InvalidArgument(format!("expectation has imaginary part {}", e.im)));
    }
    Ok(e.re)
}

/// Observables indexed by party, then input.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSettings {
    pub observables: Vec<Vec<Observable>>,
}

impl MeasurementSettings {
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.observables.iter().map(Vec::len).collect(), vec![2; self.observables.len()])
    }
}

/// P(a|x) = ⟨ψ| ⊗_i Π^{x_i}_{a_i} |ψ⟩.
pub fn box_from_state(state: &StateVector, settings: &MeasurementSettings) -> Result<FloatBox> {
    if settings.observables.len() != state.qubits {
        return structural("one list of observables per qubit required");
    }
    let scenario = settings.scenario()?;
    let n = state.qubits;
    let mut table = Vec::with_capacity(scenario.table_len());
    for x in tuples(scenario.inputs()) {
        for a in tuples(scenario.outputs()) {
            let mut v = state.amps.clone();
            for q in 0..n {
                v = apply_to(&v, n, q, &settings.observables[q][x[q]].projector(a[q]));
            }
            let p = state.inner(&v);
            if p.im.abs() > TOL {
                return Err(Error::Internal(format!("probability with imaginary part {}", p.im)));
            }
            table.push(p.re);
        }
    }
    ProbabilityBox::new(scenario, table)
}

/// Input 0 measures σ_y, input 1 measures σ_x, for every party.
pub fn mermin_settings(n: usize) -> MeasurementSettings {
    MeasurementSettings { observables: vec![vec![pauli(Axis::Y), pauli(Axis::X)]; n] }
}

/// θ_x = πx/m for Alice, θ_y = π(2y+1)/(2m) for Bob.
pub fn chained_settings(m: usize) -> MeasurementSettings {
    let mf = m as f64;
    let alice = (0..m).map(|x| planar_observable(PI * x as f64 / mf)).collect();
    let bob = (0..m).map(|y| planar_observable(PI * (2 * y + 1) as f64 / (2.0 * mf))).collect();
    MeasurementSettings { observables: vec![alice, bob] }
}

/// A and B: σ_z, σ_x. C: (σ_z − σ_x)/√2, (σ_z + σ_x)/√2.
pub fn rcbl_settings() -> MeasurementSettings {
    let (z, x) = (pauli(Axis::Z), pauli(Axis::X));
    let c0 = Observable::combine(FRAC_1_SQRT_2, &z, -FRAC_1_SQRT_2, &x).expect("observable");
    let c1 = Observable::combine(FRAC_1_SQRT_2, &z, FRAC_1_SQRT_2, &x).expect("observable");
    MeasurementSettings { observables: vec![vec![z, x], vec![z, x], vec![c0, c1]] }
}

pub fn mermin_quantum_box(n: usize) -> Result<FloatBox> {
    box_from_state(&ghz(n), &mermin_settings(n))
}

pub fn chained_quantum_box(m: usize) -> Result<FloatBox> {
    box_from_state(&phi_plus(), &chained_settings(m))
}

pub fn rcbl_quantum_box() -> FloatBox {
    box_from_state(&ghz(3), &rcbl_settings()).expect("three-qubit box")
}

/// 2m sin²(π/4m).
pub fn chained_closed_form(m: usize) -> f64 {
    let s = (PI / (4.0 * m as f64)).sin();
    2.0 * m as f64 * s * s
}

/// (value of the chained functional on the optimal quantum box, closed form).
pub fn chained_quantum_value(m: usize) -> Result<(f64, f64)> {
    let f = chained(m)?;
    let direct = evaluate(&f, &chained_quantum_box(m)?)?;
    Ok((direct, chained_closed_form(m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Full Kronecker product of 2×2 matrices, as a dense matrix.
    fn kron_all(ms: &[[[Complex64; 2]; 2]]) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![c(1.0, 0.0)]];
        for m in ms {
            let d = out.len();
            let mut next = vec![vec![c(0.0, 0.0); 2 * d]; 2 * d];
            for i in 0..d {
                for j in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[i * 2 + a][j * 2 + b] = out[i][j] * m[a][b];
                        }
                    }
                }
            }
            out = next;
        }
        out
    }

    fn brute_expectation(state: &StateVector, obs: &[Observable]) -> Complex64 {
        let m = kron_all(&obs.iter().map(|o| o.m).collect::<Vec<_>>());
        let v: Vec<Complex64> = m.iter().map(|row| row.iter().zip(&state.amps).map(|(a, b)| a * b).sum()).collect();
        state.inner(&v)
    }

    #[test]
    fn ghz_amplitudes() {
        let g = ghz(3);
        for (i, a) in g.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 7 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((a.re - want).abs() < TOL && a.im == 0.0);
        }
    }

    #[test]
    fn observables() {
        assert_eq!(planar_observable(0.0), pauli(Axis::Z));
        let y = pauli(Axis::Y);
        let sq = y.times(&y);
        assert!((sq[0][0] - c(1.0, 0.0)).norm() < TOL && sq[0][1].norm() < TOL);
        assert!(Observable::combine(1.0, &pauli(Axis::Z), 1.0, &pauli(Axis::X)).is_err());
        assert!(Observable::new([[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]).is_err());
    }

    #[test]
    fn expectations_match_brute_force() {
        let (x, y, z) = (pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z));
        let g = ghz(3);
        assert!((correlator_quantum(&g, &[x, x, x]).unwrap() - 1.0).abs() < TOL);
        assert!(correlator_quantum(&g, &[z, z, z]).unwrap().abs() < TOL);
        assert!((correlator_quantum(&g, &[x, y, y]).unwrap() + 1.0).abs() < TOL);
        assert!((correlator_quantum(&phi_plus(), &[z, z]).unwrap() - 1.0).abs() < TOL);
        for obs in [[x, x, x], [z, z, z], [x, y, y], [y, x, z]] {
            let b = brute_expectation(&g, &obs);
            assert!((b.re - correlator_quantum(&g, &obs).unwrap()).abs() < TOL);
        }
        assert!(correlator_quantum(&g, &[x, x]).is_err());
    }

    #[test]
    fn imaginary_expectations_rejected() {
        let s = StateVector::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]).unwrap();
        assert!((correlator_quantum(&s, &[pauli(Axis::Y)]).unwrap() - 1.0).abs() < TOL);
        // Anti-Hermitian matrix bypassing the constructor: expectation is i.
        let odd = Observable { m: [[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]] };
        assert!(correlator_quantum(&s, &[odd]).is_err());
    }

    #[test]
    fn chained_values() {
        let (d, cf) = chained_quantum_value(2).unwrap();
        assert!((d - (2.0 - 2f64.sqrt())).abs() < 1e-9 && (cf - d).abs() < 1e-9);
        let (d4, _) = chained_quantum_value(4).unwrap();
        assert!((d4 - 8.0 * (PI / 16.0).sin().powi(2)).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for m in 2..=64 {
            let v = chained_closed_form(m);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn rcbl_box_values() {
        let b = rcbl_quantum_box();
        assert!(b.validate().passes());
        let v = evaluate(&crate::inequalities::rcbl_functional(), &b).unwrap();
        assert!((v - 2.0 * (1.0 + 2.0 * 2f64.sqrt())).abs() < 1e-9);
    }
}
