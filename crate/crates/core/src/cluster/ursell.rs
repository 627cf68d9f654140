//! Ursell coefficients `Σ_{G₁ ◁ G} (-1)^{l(G₁)}` of small graphs.

use crate::error::{Error, Result};

/// Default vertex cap for Ursell evaluation.
pub const DEFAULT_URSELL_CAP: usize = 8;

/// Simple undirected graph on at most 32 vertices with bitmask adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<u32>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        assert!(n <= 32, "graph too large");
        Self {
            adjacency: vec![0; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b, "self-loops are not allowed");
        self.adjacency[a] |= 1 << b;
        self.adjacency[b] |= 1 << a;
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a] >> b & 1 == 1
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for a in 0..self.n() {
            for b in a + 1..self.n() {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn has_edge_within(&self, mask: u32) -> bool {
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            if self.adjacency[v] & mask != 0 {
                return true;
            }
            m &= m - 1;
        }
        false
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                next |= self.adjacency[v];
                f &= f - 1;
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen & full == full
    }
}

/// Ursell coefficient via the connected-part recursion
/// `c(S) = f(S) - Σ_{T∋v₀, T⊊S} c(T) f(S∖T)`, where `f(S) = 1` iff `S` is
/// independent (the signed sum over all spanning subgraphs of `G[S]`).
pub fn ursell_coefficient(graph: &Graph) -> Result<i64> {
    ursell_coefficient_with_cap(graph, DEFAULT_URSELL_CAP)
}

pub fn ursell_coefficient_with_cap(graph: &Graph, cap: usize) -> Result<i64> {
    let n = graph.n();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "Ursell vertices",
            size: n,
            cap,
        });
    }
    if n == 0 {
        return Ok(0);
    }
    let size = 1usize << n;
    let f: Vec<i64> = (0..size)
        .map(|s| i64::from(!graph.has_edge_within(s as u32)))
        .collect();
    let mut c = vec![0i64; size];
    for s in 1..size {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        // T = low ∪ t' with t' ⊊ rest, i.e. every proper subset T ∋ low of S.
        let mut acc = f[s];
        let mut sub = rest;
        loop {
            let t = sub | low;
            if t != s {
                acc -= c[t] * f[s ^ t];
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        c[s] = acc;
    }
    Ok(c[size - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(ursell_coefficient(&Graph::new(1)).unwrap(), 1);
        assert_eq!(ursell_coefficient(&Graph::from_edges(2, &[(0, 1)])).unwrap(), -1);
        assert_eq!(ursell_coefficient(&Graph::new(2)).unwrap(), 0);
        let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(ursell_coefficient(&k3).unwrap(), 2);
    }

    #[test]
    fn complete_graphs_follow_factorial_law() {
        // Σ over connected spanning subgraphs of K_n of (-1)^edges = (-1)^{n-1}(n-1)!.
        let mut fact = 1i64;
        for n in 1..=7usize {
            if n > 1 {
                fact *= n as i64 - 1;
            }
            let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let g = Graph::from_edges(n, &edges);
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(ursell_coefficient(&g).unwrap(), sign * fact);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(ursell_coefficient(&Graph::new(9)).is_err());
    }
}
