//! Spin-1 operators, the AKLT bond projector and chain Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::embed_matrix;
use crate::linalg::{eigvalsh, CMat, SparseMatrix, C64, ONE, ZERO};

/// Largest chain handled by the sparse constructors (`3^12` states).
pub const MAX_CHAIN: usize = 12;

/// Eigenvalues below this count as zero modes.
pub const KERNEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Free,
}

/// `S^z`, `S^+`, `S^-` in the basis `m = +1, 0, -1`.
pub fn spin1() -> (CMat, CMat, CMat) {
    let s2 = C64::new(2f64.sqrt(), 0.0);
    let sz = CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![ONE, ZERO, -ONE]));
    let mut sp = CMat::zeros(3, 3);
    sp[(0, 1)] = s2;
    sp[(1, 2)] = s2;
    let sm = sp.adjoint();
    (sz, sp, sm)
}

/// `S_1 · S_2` on two spin-1 sites.
pub fn spin_dot() -> CMat {
    let (sz, sp, sm) = spin1();
    let k = |a: &CMat, b: &CMat| a.kronecker(b);
    k(&sz, &sz) + (k(&sp, &sm) + k(&sm, &sp)) * C64::new(0.5, 0.0)
}

/// `P^(2)(S_1 + S_2) = S_1·S_2/2 + (S_1·S_2)²/6 + 1/3`.
pub fn p2_pair() -> CMat {
    let x = spin_dot();
    &x * C64::new(0.5, 0.0) + &x * &x * C64::new(1.0 / 6.0, 0.0) + CMat::identity(9, 9) * C64::new(1.0 / 3.0, 0.0)
}

fn check_chain(n: usize) -> Result<()> {
    if !(2..=MAX_CHAIN).contains(&n) {
        return Err(Error::CapExceeded {
            what: "spin-1 chain length",
            size: n,
            cap: MAX_CHAIN,
        });
    }
    Ok(())
}

/// Bonds of a chain of `n` sites.
pub fn bonds(n: usize, bc: Boundary) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if bc == Boundary::Periodic && n > 2 {
        b.push((n - 1, 0));
    }
    b
}

/// `Σ_bonds P^(2)` on `n` spin-1 sites.
pub fn aklt_hamiltonian(n: usize, bc: Boundary) -> Result<SparseMatrix> {
    check_chain(n)?;
    let p = p2_pair();
    let terms: Vec<SparseMatrix> = bonds(n, bc)
        .iter()
        .map(|&(a, b)| embed_matrix(&p, &[a, b], n, 3))
        .collect();
    let refs: Vec<&SparseMatrix> = terms.iter().collect();
    Ok(SparseMatrix::sum(3usize.pow(n as u32), &refs))
}

/// `P^(2)` on the bond `(a, b)` of an `n`-site chain.
pub fn bond_projector(n: usize, a: usize, b: usize) -> SparseMatrix {
    embed_matrix(&p2_pair(), &[a, b], n, 3)
}

/// Total `S^z` of each basis state of `n` sites.
pub fn total_sz(n: usize) -> Vec<i32> {
    (0..3usize.pow(n as u32))
        .map(|mut i| {
            let mut m = 0;
            for _ in 0..n {
                m += 1 - (i % 3) as i32;
                i /= 3;
            }
            m
        })
        .collect()
}

/// Full spectrum of an `S^z`-conserving operator, diagonalized sector by sector.
pub fn sector_spectrum(h: &SparseMatrix, n: usize) -> Vec<f64> {
    let sz = total_sz(n);
    let mut values = vec![];
    for m in -(n as i32)..=(n as i32) {
        let idx: Vec<usize> = (0..sz.len()).filter(|&i| sz[i] == m).collect();
        let mut pos = vec![usize::MAX; sz.len()];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut block = CMat::zeros(idx.len(), idx.len());
        for (k, &i) in idx.iter().enumerate() {
            for (j, v) in h.row(i) {
                debug_assert!(pos[j] != usize::MAX, "operator mixes S^z sectors");
                block[(k, pos[j])] += v;
            }
        }
        values.extend(eigvalsh(&block));
    }
    values.sort_by(f64::total_cmp);
    values
}

/// Restriction of an `S^z`-conserving operator to the sector `S^z = m`,
/// with the list of full-space indices spanning the sector.
pub fn sector_operator(h: &SparseMatrix, n: usize, m: i32) -> (SparseMatrix, Vec<usize>) {
    let sz = total_sz(n);
    let idx: Vec<usize> = (0..sz.len()).filter(|&i| sz[i] == m).collect();
    let mut pos = vec![usize::MAX; sz.len()];
    for (k, &i) in idx.iter().enumerate() {
        pos[i] = k;
    }
    let rows = idx
        .iter()
        .map(|&i| {
            h.row(i)
                .filter(|&(j, _)| pos[j] != usize::MAX)
                .map(|(j, v)| (pos[j], v))
                .collect()
        })
        .collect();
    (SparseMatrix::from_rows(idx.len(), rows), idx)
}

/// Number of eigenvalues below [`KERNEL_TOL`].
pub fn kernel_dimension(n: usize, bc: Boundary) -> Result<usize> {
    let h = aklt_hamiltonian(n, bc)?;
    Ok(sector_spectrum(&h, n).iter().filter(|&&e| e < KERNEL_TOL).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, max_abs_diff};

    #[test]
    fn p2_is_rank_five_projector() {
        let p = p2_pair();
        assert!(max_abs_diff(&(&p * &p), &p) < 1e-12);
        assert!(hermiticity_defect(&p) < 1e-12);
        let ev = eigvalsh(&p);
        assert_eq!(ev.iter().filter(|e| e.abs() < 1e-10).count(), 4);
        assert_eq!(ev.iter().filter(|e| (*e - 1.0).abs() < 1e-10).count(), 5);
    }

    #[test]
    fn p2_matches_casimir_projector() {
        // Total spin S(S+1) = 4 + 2 S_1·S_2; spin 2 ↔ S·S = 1.
        let x = spin_dot();
        let casimir = CMat::identity(9, 9) * C64::new(4.0, 0.0) + &x * C64::new(2.0, 0.0);
        let e = crate::linalg::eigh(&casimir);
        let spin2: Vec<_> = (0..9).filter(|&i| (e.values[i] - 6.0).abs() < 1e-9).map(|i| e.vector(i)).collect();
        let proj = crate::linalg::projector_onto(&spin2);
        assert!(max_abs_diff(&proj, &p2_pair()) < 1e-12);
    }

    #[test]
    fn two_site_kernel() {
        assert_eq!(kernel_dimension(2, Boundary::Free).unwrap(), 4);
    }
}
