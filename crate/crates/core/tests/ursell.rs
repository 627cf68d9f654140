use relbound_core::cluster::{ursell_coefficient, Graph};

/// `Σ (-1)^{|E(H)|}` over spanning connected subgraphs `H ⊂ G`, by brute force.
fn spanning_connected_sum(n: usize, edges: &[(usize, usize)]) -> i64 {
    let mut total = 0i64;
    for mask in 0u32..(1 << edges.len()) {
        let chosen: Vec<(usize, usize)> = (0..edges.len()).filter(|&e| mask >> e & 1 == 1).map(|e| edges[e]).collect();
        if connected(n, &chosen) {
            total += if chosen.len().is_multiple_of(2) { 1 } else { -1 };
        }
    }
    total
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

#[test]
fn ursell_coefficients_match_brute_force_up_to_five_vertices() {
    let mut checked = 0;
    for n in 1..=5 {
        let pairs = all_pairs(n);
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|&e| mask >> e & 1 == 1).map(|e| pairs[e]).collect();
            if !connected(n, &edges) {
                continue;
            }
            let g = Graph::from_edges(n, &edges);
            assert_eq!(
                ursell_coefficient(&g).unwrap(),
                spanning_connected_sum(n, &edges),
                "n = {n}, edges {edges:?}"
            );
            checked += 1;
        }
    }
    // Labelled connected graphs on 1..=5 vertices: 1 + 1 + 4 + 38 + 728.
    assert_eq!(checked, 772);
}

#[test]
fn complete_graph_coefficient_is_signed_factorial() {
    for n in 1..=6 {
        let g = Graph::from_edges(n, &all_pairs(n));
        let fact: i64 = (1..n as i64).product();
        let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
        assert_eq!(ursell_coefficient(&g).unwrap(), sign * fact);
    }
}

#[test]
fn trees_have_coefficient_of_sign_minus_one_to_the_edges() {
    let path = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    assert_eq!(ursell_coefficient(&path).unwrap(), 1);
    let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
    assert_eq!(ursell_coefficient(&star).unwrap(), -1);
}
