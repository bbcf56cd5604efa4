//! Real-coefficient Pauli Hamiltonians and conjugation by Pauli rotations.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// Coefficients below this are dropped after arithmetic.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Linear combination of Hermitian, phase-free Pauli terms plus an identity
/// offset. Signs are folded into the real coefficients so the term map stays
/// canonical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n: usize,
    terms: BTreeMap<PauliOperator, f64>,
    constant: f64,
}

impl Hamiltonian {
    pub fn new(n: usize) -> Self {
        Hamiltonian {
            n,
            terms: BTreeMap::new(),
            constant: 0.0,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn set_constant(&mut self, c: f64) {
        self.constant = c;
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliOperator, f64)> {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn operators(&self) -> impl Iterator<Item = &PauliOperator> {
        self.terms.keys()
    }

    pub fn coefficient(&self, op: &PauliOperator) -> f64 {
        self.terms.get(op).copied().unwrap_or(0.0)
    }

    /// Adds `coeff * op`. The operator may carry a real sign (phase 0 or 2);
    /// it is folded into the coefficient. Identity accumulates the constant.
    pub fn add_term(&mut self, op: &PauliOperator, coeff: f64) -> Result<()> {
        if op.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(op.num_qubits(), self.n));
        }
        let (bare, sign) = op.sign_split()?;
        let value = sign * coeff;
        if bare.is_identity() {
            self.constant += value;
            return Ok(());
        }
        let entry = self.terms.entry(bare).or_insert(0.0);
        *entry += value;
        if entry.abs() < PRUNE_THRESHOLD {
            self.terms.remove(&bare);
        }
        Ok(())
    }

    pub fn from_terms<I>(n: usize, iter: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliOperator, f64)>,
    {
        let mut h = Hamiltonian::new(n);
        for (op, c) in iter {
            h.add_term(&op, c)?;
        }
        Ok(h)
    }

    /// Sub-Hamiltonian containing only the terms selected by `keep`.
    pub fn filter<F: Fn(&PauliOperator) -> bool>(&self, keep: F) -> Hamiltonian {
        let mut h = Hamiltonian::new(self.n);
        for (p, c) in self.terms() {
            if keep(p) {
                h.terms.insert(*p, c);
            }
        }
        h
    }

    pub fn conjugate_by_rotation(&self, step: &RotationStep) -> Result<Hamiltonian> {
        let mut out = Hamiltonian::new(self.n);
        out.constant = self.constant;
        for (p, c) in self.terms() {
            for (op, factor) in step.conjugate(p)? {
                out.add_term(&op, c * factor)?;
            }
        }
        Ok(out)
    }

    /// Dense Hermitian matrix of dimension 2^n.
    pub fn to_dense(&self, dense_limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n > dense_limit {
            return Err(Error::Resource(format!(
                "{} qubits exceeds dense limit {}",
                self.n, dense_limit
            )));
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (p, c) in self.terms() {
            m += p.to_dense() * Complex64::new(c, 0.0);
        }
        for i in 0..dim {
            m[(i, i)] += Complex64::new(self.constant, 0.0);
        }
        Ok(m)
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, c) in self.terms() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{c:+.6}*{p}")?;
            first = false;
        }
        if self.constant != 0.0 || first {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{:+.6}", self.constant)?;
        }
        Ok(())
    }
}

/// Conjugation by `exp(i θ/2 P)` for a Hermitian Pauli generator `P`.
/// A Clifford quarter turn is the θ = π/2 special case, tracked exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationStep {
    pub generator: PauliOperator,
    pub kind: RotationKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RotationKind {
    CliffordQuarterTurn,
    Continuous(f64),
}

impl RotationStep {
    pub fn clifford(generator: PauliOperator) -> Result<Self> {
        if !generator.is_hermitian() {
            return Err(Error::Invariant(format!(
                "rotation generator {generator} is not Hermitian"
            )));
        }
        Ok(RotationStep {
            generator,
            kind: RotationKind::CliffordQuarterTurn,
        })
    }

    pub fn continuous(generator: PauliOperator, angle: f64) -> Result<Self> {
        if !generator.is_hermitian() {
            return Err(Error::Invariant(format!(
                "rotation generator {generator} is not Hermitian"
            )));
        }
        Ok(RotationStep {
            generator,
            kind: RotationKind::Continuous(angle),
        })
    }

    /// Step with the rotation sense reversed.
    pub fn inverse(&self) -> RotationStep {
        match self.kind {
            // Quarter turn inverse is three quarter turns; expressed as a
            // continuous step with angle -π/2 it stays a Clifford map.
            RotationKind::CliffordQuarterTurn => RotationStep {
                generator: self.generator,
                kind: RotationKind::Continuous(-std::f64::consts::FRAC_PI_2),
            },
            RotationKind::Continuous(theta) => RotationStep {
                generator: self.generator,
                kind: RotationKind::Continuous(-theta),
            },
        }
    }

    /// Conjugates a Hermitian Pauli: U P U† with U = exp(i θ/2 G).
    /// Commuting terms pass through; anticommuting terms map to
    /// cos θ · P + sin θ · (iGP).
    pub fn conjugate(&self, p: &PauliOperator) -> Result<Vec<(PauliOperator, f64)>> {
        let (bare, sign) = p.sign_split()?;
        if self.generator.num_qubits() != bare.num_qubits() {
            return Err(Error::DimensionMismatch(
                self.generator.num_qubits(),
                bare.num_qubits(),
            ));
        }
        if self.generator.commutes(&bare)? {
            return Ok(vec![(bare, sign)]);
        }
        let rotated = self.generator.multiply(&bare)?;
        let (rot_bare, rot_sign) = rotated.with_phase(rotated.phase_exp() + 1).sign_split()?;
        match self.kind {
            RotationKind::CliffordQuarterTurn => Ok(vec![(rot_bare, sign * rot_sign)]),
            RotationKind::Continuous(theta) => Ok(vec![
                (bare, sign * theta.cos()),
                (rot_bare, sign * rot_sign * theta.sin()),
            ]),
        }
    }

    /// Dense unitary exp(i θ/2 G) for oracle checks.
    pub fn to_dense_unitary(&self) -> DMatrix<Complex64> {
        let theta = match self.kind {
            RotationKind::CliffordQuarterTurn => std::f64::consts::FRAC_PI_2,
            RotationKind::Continuous(t) => t,
        };
        let g = self.generator.to_dense();
        let dim = g.nrows();
        let eye = DMatrix::<Complex64>::identity(dim, dim);
        // G² = 1 for Hermitian Paulis, so exp(iθ/2 G) = cos(θ/2) + i sin(θ/2) G.
        eye * Complex64::new((theta / 2.0).cos(), 0.0)
            + g * Complex64::new(0.0, (theta / 2.0).sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn term_map_stays_canonical() {
        let mut h = Hamiltonian::new(2);
        h.add_term(&p("XI"), 0.5).unwrap();
        h.add_term(&p("XI").with_phase(2), 0.5).unwrap();
        assert_eq!(h.num_terms(), 0);
        h.add_term(&p("II"), 1.25).unwrap();
        assert_eq!(h.constant(), 1.25);
    }

    #[test]
    fn clifford_quarter_turn_about_y_maps_x_to_z() {
        let h = Hamiltonian::from_terms(1, [(p("X"), 1.0)]).unwrap();
        let step = RotationStep::clifford(p("Y")).unwrap();
        let out = h.conjugate_by_rotation(&step).unwrap();
        assert!((out.coefficient(&p("Z")) - 1.0).abs() < 1e-12);
        assert_eq!(out.num_terms(), 1);
    }

    #[test]
    fn commuting_term_unchanged() {
        let h = Hamiltonian::from_terms(1, [(p("Z"), 1.0)]).unwrap();
        let step = RotationStep::clifford(p("Z")).unwrap();
        let out = h.conjugate_by_rotation(&step).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn continuous_rotation_splits_term() {
        let theta = std::f64::consts::FRAC_PI_4;
        let h = Hamiltonian::from_terms(1, [(p("X"), 1.0)]).unwrap();
        let step = RotationStep::continuous(p("Z"), theta).unwrap();
        let out = h.conjugate_by_rotation(&step).unwrap();
        assert!((out.coefficient(&p("X")) - theta.cos()).abs() < 1e-12);
        assert!((out.coefficient(&p("Y")) + theta.sin()).abs() < 1e-12);
        // Cross-check against the dense conjugation oracle.
        let u = step.to_dense_unitary();
        let dense = &u * h.to_dense(14).unwrap() * u.adjoint();
        assert!((dense - out.to_dense(14).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn dense_diagonal_example() {
        let mut h = Hamiltonian::from_terms(2, [(p("ZZ"), 0.5)]).unwrap();
        h.set_constant(1.0);
        let m = h.to_dense(14).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![1.5, 0.5, 0.5, 1.5]);
    }

    #[test]
    fn dense_limit_enforced() {
        let h = Hamiltonian::new(5);
        assert!(matches!(h.to_dense(4), Err(Error::Resource(_))));
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        let m = (1u64 << n) - 1;
        (0..=m, 0..=m).prop_map(move |(x, z)| PauliOperator::new(n, x, z, 0).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conjugation_matches_dense_oracle(
            g in arb_pauli(3).prop_filter("nontrivial", |p| !p.is_identity()),
            t in arb_pauli(3),
            theta in -3.0f64..3.0,
        ) {
            let h = Hamiltonian::from_terms(3, [(t, 0.7)]).unwrap();
            for step in [
                RotationStep::clifford(g).unwrap(),
                RotationStep::continuous(g, theta).unwrap(),
            ] {
                let out = h.conjugate_by_rotation(&step).unwrap();
                let u = step.to_dense_unitary();
                let dense = &u * h.to_dense(14).unwrap() * u.adjoint();
                prop_assert!((dense - out.to_dense(14).unwrap()).norm() < 1e-12);
            }
        }

        #[test]
        fn clifford_preserves_commutation(
            g in arb_pauli(3).prop_filter("nontrivial", |p| !p.is_identity()),
            a in arb_pauli(3),
            b in arb_pauli(3),
        ) {
            let step = RotationStep::clifford(g).unwrap();
            let a2 = step.conjugate(&a).unwrap()[0].0;
            let b2 = step.conjugate(&b).unwrap()[0].0;
            prop_assert_eq!(a.commutes(&b).unwrap(), a2.commutes(&b2).unwrap());
        }
    }
}
