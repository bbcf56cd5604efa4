//! Noncontextuality testing, closure under inference, and the greedy
//! selection of a noncontextual subset of a Hamiltonian's terms.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliOperator;

/// Partition of a Hamiltonian's term set into a noncontextual part
/// (universally-commuting Z-set plus anticommuting cliques) and the
/// remaining contextual terms.
#[derive(Clone, Debug)]
pub struct NoncontextualDecomposition {
    pub z_set: Vec<PauliOperator>,
    pub cliques: Vec<Vec<PauliOperator>>,
    pub contextual_terms: Vec<PauliOperator>,
    pub source: Hamiltonian,
}

impl NoncontextualDecomposition {
    pub fn nc_terms(&self) -> BTreeSet<PauliOperator> {
        let mut set: BTreeSet<PauliOperator> = self.z_set.iter().copied().collect();
        for clique in &self.cliques {
            set.extend(clique.iter().copied());
        }
        set
    }

    /// Checks every structural invariant of the partition.
    pub fn validate(&self) -> Result<()> {
        let nc = self.nc_terms();
        for z in &self.z_set {
            for other in &nc {
                if !z.commutes(other)? {
                    return Err(Error::Invariant(format!(
                        "Z-set member {z} anticommutes with {other}"
                    )));
                }
            }
        }
        for (i, ci) in self.cliques.iter().enumerate() {
            for a in ci {
                for b in ci {
                    if !a.commutes(b)? {
                        return Err(Error::Invariant(format!(
                            "clique members {a} and {b} anticommute"
                        )));
                    }
                }
            }
            for cj in self.cliques.iter().skip(i + 1) {
                for a in ci {
                    for b in cj {
                        if a.commutes(b)? {
                            return Err(Error::Invariant(format!(
                                "cross-clique members {a} and {b} commute"
                            )));
                        }
                    }
                }
            }
        }
        let source_terms: BTreeSet<PauliOperator> = self.source.operators().copied().collect();
        let mut partition = nc.clone();
        for t in &self.contextual_terms {
            if !partition.insert(*t) {
                return Err(Error::Invariant(format!(
                    "term {t} appears in both partitions"
                )));
            }
        }
        if partition != source_terms {
            return Err(Error::Invariant(
                "partition does not cover the source term set".into(),
            ));
        }
        // Closure under inference within S.
        let closed = closure_under_inference(&nc)?;
        for t in closed.intersection(&source_terms) {
            if !nc.contains(t) {
                return Err(Error::Invariant(format!(
                    "noncontextual part is not closed under inference within S: missing {t}"
                )));
            }
        }
        Ok(())
    }
}

fn check_common_n(s: &BTreeSet<PauliOperator>) -> Result<usize> {
    let mut iter = s.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Invariant("empty operator set".into()))?;
    let n = first.num_qubits();
    for op in iter {
        if op.num_qubits() != n {
            return Err(Error::DimensionMismatch(n, op.num_qubits()));
        }
    }
    Ok(n)
}

/// Members of `s` that commute with every member of `s`.
fn universally_commuting(s: &BTreeSet<PauliOperator>) -> Result<BTreeSet<PauliOperator>> {
    let mut z = BTreeSet::new();
    for a in s {
        let mut all = true;
        for b in s {
            if !a.commutes(b)? {
                all = false;
                break;
            }
        }
        if all {
            z.insert(*a);
        }
    }
    Ok(z)
}

/// True iff commutation is transitive on `s` after removing the
/// universally-commuting subset. Runs in O(N³) pairwise checks.
pub fn is_noncontextual(s: &BTreeSet<PauliOperator>) -> Result<bool> {
    check_common_n(s)?;
    let z = universally_commuting(s)?;
    let rest: Vec<&PauliOperator> = s.iter().filter(|p| !z.contains(p)).collect();
    for (i, a) in rest.iter().enumerate() {
        for (j, b) in rest.iter().enumerate().skip(i + 1) {
            if !a.commutes(b)? {
                continue;
            }
            // a and b commute, so they must share a clique: every third
            // operator relates to both in the same way.
            for (k, c) in rest.iter().enumerate() {
                if k == i || k == j {
                    continue;
                }
                if b.commutes(c)? != a.commutes(c)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Fixed point of adding the (phase-free) product AB for every commuting
/// pair A, B. Contains the input set.
pub fn closure_under_inference(s: &BTreeSet<PauliOperator>) -> Result<BTreeSet<PauliOperator>> {
    check_common_n(s)?;
    let mut closed: BTreeSet<PauliOperator> = s.clone();
    loop {
        let members: Vec<PauliOperator> = closed.iter().copied().collect();
        let mut added = false;
        for (i, a) in members.iter().enumerate() {
            for b in members.iter().skip(i + 1) {
                if a.commutes(b)? {
                    let (prod, _) = a.multiply(b)?.sign_split()?;
                    if !prod.is_identity() && closed.insert(prod) {
                        added = true;
                    }
                }
            }
        }
        if !added {
            return Ok(closed);
        }
    }
}

/// Splits a noncontextual set into its Z-set and cliques, both ordered
/// lexicographically by Pauli string. Errors on contextual input.
pub fn decompose_set(
    s: &BTreeSet<PauliOperator>,
) -> Result<(Vec<PauliOperator>, Vec<Vec<PauliOperator>>)> {
    if !is_noncontextual(s)? {
        return Err(Error::Contextual(
            "set is contextual; no clique partition exists".into(),
        ));
    }
    let z = universally_commuting(s)?;
    let rest: Vec<PauliOperator> = s.iter().filter(|p| !z.contains(p)).copied().collect();
    let mut cliques: Vec<Vec<PauliOperator>> = Vec::new();
    for op in rest {
        // BTreeSet iteration is lexicographic, so cliques and their members
        // come out sorted without an extra pass.
        match cliques
            .iter_mut()
            .find(|c| c[0].commutes(&op).unwrap_or(false))
        {
            Some(clique) => clique.push(op),
            None => cliques.push(vec![op]),
        }
    }
    Ok((z.into_iter().collect(), cliques))
}

/// Builds a decomposition of `h` from an explicitly chosen noncontextual
/// term subset. Validates all partition invariants.
pub fn decompose(h: &Hamiltonian, nc_terms: &BTreeSet<PauliOperator>) -> Result<NoncontextualDecomposition> {
    let (z_set, cliques) = decompose_set(nc_terms)?;
    let contextual_terms: Vec<PauliOperator> = h
        .operators()
        .filter(|p| !nc_terms.contains(p))
        .copied()
        .collect();
    let d = NoncontextualDecomposition {
        z_set,
        cliques,
        contextual_terms,
        source: h.clone(),
    };
    d.validate()?;
    Ok(d)
}

/// Greedy noncontextual subset selection: terms are visited in descending
/// |coefficient| order (ties broken lexicographically) and admitted when the
/// grown set stays noncontextual after also admitting any members of S
/// implied by closure under inference.
pub fn greedy_noncontextual_subset(h: &Hamiltonian) -> Result<NoncontextualDecomposition> {
    if h.is_empty() {
        return Err(Error::Invariant("empty Hamiltonian".into()));
    }
    let source_terms: BTreeSet<PauliOperator> = h.operators().copied().collect();
    let mut order: Vec<(PauliOperator, f64)> = h.terms().map(|(p, c)| (*p, c)).collect();
    order.sort_by(|(pa, ca), (pb, cb)| {
        cb.abs()
            .partial_cmp(&ca.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| pa.cmp(pb))
    });

    let mut nc: BTreeSet<PauliOperator> = BTreeSet::new();
    for (candidate, _) in &order {
        if nc.contains(candidate) {
            continue;
        }
        let mut trial = nc.clone();
        trial.insert(*candidate);
        // Repair closure-within-S by admitting implied members until stable.
        loop {
            let implied: BTreeSet<PauliOperator> = closure_under_inference(&trial)?
                .intersection(&source_terms)
                .copied()
                .collect();
            if implied == trial {
                break;
            }
            trial = implied;
        }
        if is_noncontextual(&trial)? {
            nc = trial;
        }
    }
    decompose(h, &nc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(strs: &[&str]) -> BTreeSet<PauliOperator> {
        strs.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn example_nc() -> BTreeSet<PauliOperator> {
        set(&[
            "ZII", "IXI", "IYI", "IZX", "IZY", "IZZ", "ZXI", "ZYI", "ZZX", "ZZY", "ZZZ",
        ])
    }

    #[test]
    fn three_qubit_example_is_noncontextual() {
        assert!(is_noncontextual(&example_nc()).unwrap());
    }

    #[test]
    fn single_qubit_xyz_is_noncontextual() {
        assert!(is_noncontextual(&set(&["X", "Y", "Z"])).unwrap());
    }

    #[test]
    fn known_contextual_set() {
        // Commutation 4-cycle: XI~IX~ZX~XZ~XI but XI!~ZX, IX!~XZ.
        assert!(!is_noncontextual(&set(&["XI", "IX", "XZ", "ZX"])).unwrap());
    }

    #[test]
    fn universal_commuter_is_factored_out() {
        // IX commutes with everything here, so the remainder {XI, ZI, XX}
        // has transitive commutation and the set is noncontextual.
        assert!(is_noncontextual(&set(&["XI", "ZI", "IX", "XX"])).unwrap());
    }

    #[test]
    fn closure_of_commuting_pair() {
        let closed = closure_under_inference(&set(&["ZI", "IZ"])).unwrap();
        assert_eq!(closed, set(&["ZI", "IZ", "ZZ"]));
        let single = closure_under_inference(&set(&["X"])).unwrap();
        assert_eq!(single, set(&["X"]));
    }

    #[test]
    fn example_closed_within_s() {
        let nc = example_nc();
        let mut s = nc.clone();
        s.extend(set(&["IIX", "IIY", "IIZ"]));
        let closed = closure_under_inference(&nc).unwrap();
        let within: BTreeSet<PauliOperator> = closed.intersection(&s).copied().collect();
        assert_eq!(within, nc);
    }

    #[test]
    fn decompose_example_partition() {
        let (z, cliques) = decompose_set(&example_nc()).unwrap();
        assert_eq!(z, vec!["ZII".parse().unwrap()]);
        let expected: Vec<Vec<PauliOperator>> = [
            ["IXI", "ZXI"],
            ["IYI", "ZYI"],
            ["IZX", "ZZX"],
            ["IZY", "ZZY"],
            ["IZZ", "ZZZ"],
        ]
        .iter()
        .map(|pair| pair.iter().map(|s| s.parse().unwrap()).collect())
        .collect();
        assert_eq!(cliques, expected);
    }

    #[test]
    fn decompose_degenerate_shapes() {
        let (z, cliques) = decompose_set(&set(&["X", "Y", "Z"])).unwrap();
        assert!(z.is_empty());
        assert_eq!(cliques.len(), 3);
        let (z, cliques) = decompose_set(&set(&["ZI", "IZ", "ZZ"])).unwrap();
        assert_eq!(z.len(), 3);
        assert!(cliques.is_empty());
        assert!(decompose_set(&set(&["XI", "IX", "XZ", "ZX"])).is_err());
    }

    #[test]
    fn greedy_recovers_example_split() {
        let mut h = Hamiltonian::new(3);
        for t in &example_nc() {
            h.add_term(t, 1.0).unwrap();
        }
        for t in &set(&["IIX", "IIY", "IIZ"]) {
            h.add_term(t, 0.1).unwrap();
        }
        let d = greedy_noncontextual_subset(&h).unwrap();
        assert_eq!(d.nc_terms(), example_nc());
        assert_eq!(d.contextual_terms.len(), 3);
        d.validate().unwrap();
    }

    #[test]
    fn greedy_takes_everything_when_commuting() {
        let h = Hamiltonian::from_terms(
            2,
            [("ZI", 1.0), ("IZ", -0.5), ("ZZ", 0.25)]
                .map(|(s, c)| (s.parse::<PauliOperator>().unwrap(), c)),
        )
        .unwrap();
        let d = greedy_noncontextual_subset(&h).unwrap();
        assert!(d.contextual_terms.is_empty());
        assert_eq!(d.z_set.len(), 3);
    }

    #[test]
    fn greedy_single_term() {
        let h = Hamiltonian::from_terms(1, [("X".parse::<PauliOperator>().unwrap(), 0.3)]).unwrap();
        let d = greedy_noncontextual_subset(&h).unwrap();
        assert_eq!(d.nc_terms().len(), 1);
        assert!(d.contextual_terms.is_empty());
    }
}
