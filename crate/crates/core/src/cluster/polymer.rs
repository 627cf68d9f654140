//! Enumeration of polymers (connected configurations) up to a support cap.

use rayon::prelude::*;

use crate::cluster::config::{config_support, Atom, AtomKind, Configuration, Support};
use crate::cluster::propagate::Propagators;
use crate::error::Result;
use crate::forms::ModelSpec;
use crate::lattice::{Geometry, SiteSet};
use crate::linalg::{C64, ZERO};

/// Default cap on the number of enumerated polymers.
pub const DEFAULT_POLYMER_CAP: usize = 2_000_000;

/// Weights below this modulus are treated as exact zeros (cancellation noise).
pub const WEIGHT_FLOOR: f64 = 1e-15;

/// A connected configuration, stored as the representative whose first
/// occupied slice is slice 1.
#[derive(Clone, Debug)]
pub struct Polymer {
    pub config: Configuration,
    pub support: Support,
    /// Number of occupied slices.
    pub span: usize,
    pub size: usize,
    pub weight: C64,
    pub structural_zero: bool,
}

impl Polymer {
    /// Number of time translates fitting in `{1..n}`.
    pub fn translates(&self, n: usize) -> usize {
        (n + 1).saturating_sub(self.span)
    }

    pub fn is_negligible(&self) -> bool {
        self.weight.norm() < WEIGHT_FLOOR
    }
}

#[derive(Clone, Debug)]
pub struct PolymerSet {
    pub polymers: Vec<Polymer>,
    pub max_support: usize,
    pub n_slices: usize,
    /// `counts[s]` = number of representatives with `|supp| = s`.
    pub counts: Vec<usize>,
    pub truncated: bool,
}

impl PolymerSet {
    /// Polymers with non-negligible weight.
    pub fn active(&self) -> impl Iterator<Item = &Polymer> {
        self.polymers.iter().filter(|p| !p.is_negligible())
    }

    /// Empirical counting constant `max_n (count_n)^{1/n}` of polymers through a
    /// fixed space-time point, from representatives of all translates.
    pub fn counting_constant(&self, geometry: &Geometry) -> f64 {
        let n_sites = geometry.n_sites().max(1) as f64;
        let mut per_point = vec![0f64; self.max_support + 1];
        for p in &self.polymers {
            // Each representative and its spatial translates contain a fixed
            // point `|supp|` times per translate class; divide by the number of sites.
            per_point[p.size] += p.size as f64 / n_sites;
        }
        per_point
            .iter()
            .enumerate()
            .filter(|(n, c)| *n > 0 && **c > 0.0)
            .map(|(n, c)| c.powf(1.0 / n as f64))
            .fold(1.0, f64::max)
    }

    /// `ε_emp = max |w(χ)|^{1/|supp χ|}` over enumerated polymers.
    pub fn empirical_epsilon(&self) -> f64 {
        self.active()
            .map(|p| p.weight.norm().powf(1.0 / p.size as f64))
            .fold(0.0, f64::max)
    }
}

/// Options for [`enumerate_polymers`].
#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    pub max_support: usize,
    pub cap: usize,
    pub compute_weights: bool,
}

impl EnumerationOptions {
    pub fn new(max_support: usize) -> Self {
        Self {
            max_support,
            cap: DEFAULT_POLYMER_CAP,
            compute_weights: true,
        }
    }
}

struct AtomUniverse {
    atoms: Vec<Atom>,
    supports: Vec<Support>,
    neighbors: Vec<Vec<usize>>,
    n_slices: usize,
}

impl AtomUniverse {
    fn new(geometry: &Geometry, n_slices: usize, max_support: usize) -> Self {
        let mut atoms = vec![];
        for k in 1..=n_slices {
            for x in 0..geometry.n_sites() {
                atoms.push(Atom::new(k, AtomKind::I, x));
            }
            for x in 0..geometry.n_sites() {
                atoms.push(Atom::new(k, AtomKind::J, x));
            }
        }
        atoms.sort();
        let supports: Vec<Support> = atoms
            .iter()
            .map(|a| {
                let mut s = Support::new(n_slices + 1);
                s.add_atom(a, geometry);
                s
            })
            .collect();
        // Atoms whose own support already exceeds the cap can never appear.
        let keep: Vec<bool> = supports.iter().map(|s| s.size() <= max_support).collect();
        let neighbors = (0..atoms.len())
            .map(|a| {
                (0..atoms.len())
                    .filter(|&b| b != a && keep[a] && keep[b] && supports[a].intersects(&supports[b]))
                    .collect()
            })
            .collect();
        Self {
            atoms,
            supports,
            neighbors,
            n_slices,
        }
    }
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
}

struct Search<'a> {
    universe: &'a AtomUniverse,
    geometry: &'a Geometry,
    max_support: usize,
    cap: usize,
    found: Vec<Vec<usize>>,
    truncated: bool,
}

impl Search<'_> {
    fn valid(&self, members: &[usize]) -> bool {
        // J_k ∩ Λ_{I_k} = ∅ slice by slice.
        let mut slices = vec![(SiteSet::EMPTY, SiteSet::EMPTY); self.universe.n_slices + 1];
        for &m in members {
            let a = self.universe.atoms[m];
            match a.kind {
                AtomKind::I => slices[a.slice].0 = slices[a.slice].0.with(a.site),
                AtomKind::J => slices[a.slice].1 = slices[a.slice].1.with(a.site),
            }
        }
        slices
            .iter()
            .all(|&(i, j)| !j.intersects(self.geometry.lambda_of(i)))
    }

    /// ESU extension: every connected atom set whose minimal atom is `root`
    /// is reached exactly once.
    fn extend(&mut self, members: &mut Vec<usize>, ext: Vec<usize>, nbhd: &Bits, support: &Support, root: usize) {
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            if self.found.len() >= self.cap {
                self.truncated = true;
                return;
            }
            let mut s = support.clone();
            s.union_with(&self.universe.supports[w]);
            if s.size() > self.max_support {
                continue;
            }
            members.push(w);
            if !self.valid(members) {
                members.pop();
                continue;
            }
            self.found.push(members.clone());
            let mut nb = nbhd.clone();
            let mut next = ext.clone();
            for &u in &self.universe.neighbors[w] {
                if u > root && !nbhd.get(u) {
                    next.push(u);
                }
                nb.set(u);
            }
            self.extend(members, next, &nb, &s, root);
            members.pop();
        }
    }
}

/// All polymers with `|supp| ≤ max_support` whose first slice is slice 1 and
/// which fit in `{1..n_slices}`; weights are evaluated in parallel.
pub fn enumerate_polymers(model: &ModelSpec, n_slices: usize, opts: EnumerationOptions) -> Result<PolymerSet> {
    let geometry = &model.geometry;
    let slices = n_slices.min(opts.max_support.saturating_sub(1));
    let universe = AtomUniverse::new(geometry, slices, opts.max_support);
    let roots: Vec<usize> = (0..universe.atoms.len())
        .filter(|&r| universe.atoms[r].slice == 1 && universe.supports[r].size() <= opts.max_support)
        .collect();
    let per_root: Vec<(Vec<Vec<usize>>, bool)> = roots
        .par_iter()
        .map(|&root| {
            let mut search = Search {
                universe: &universe,
                geometry,
                max_support: opts.max_support,
                cap: opts.cap,
                found: vec![],
                truncated: false,
            };
            let mut members = vec![root];
            if !search.valid(&members) {
                return (vec![], false);
            }
            search.found.push(members.clone());
            let mut nbhd = Bits::new(universe.atoms.len());
            nbhd.set(root);
            let mut ext = vec![];
            for &u in &universe.neighbors[root] {
                nbhd.set(u);
                if u > root {
                    ext.push(u);
                }
            }
            let support = universe.supports[root].clone();
            search.extend(&mut members, ext, &nbhd, &support, root);
            (search.found, search.truncated)
        })
        .collect();
    let mut truncated = false;
    let mut sets = vec![];
    for (found, t) in per_root {
        truncated |= t;
        sets.extend(found);
    }
    if sets.len() > opts.cap {
        sets.truncate(opts.cap);
        truncated = true;
    }
    let props = if opts.compute_weights {
        Some(Propagators::new(model)?)
    } else {
        None
    };
    let polymers: Vec<Polymer> = sets
        .par_iter()
        .map(|members| {
            let atoms: Vec<Atom> = members.iter().map(|&m| universe.atoms[m]).collect();
            let span = atoms.iter().map(|a| a.slice).max().unwrap_or(0);
            let config = Configuration::from_atoms(span, &atoms);
            let support = config_support(&config, geometry);
            let structural_zero = config.is_structurally_zero(geometry);
            let weight = match (&props, structural_zero) {
                (Some(p), false) => p.weight(&config)?,
                _ => ZERO,
            };
            Ok(Polymer {
                size: support.size(),
                config,
                support,
                span,
                weight,
                structural_zero,
            })
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0; opts.max_support + 1];
    for p in &polymers {
        counts[p.size] += 1;
    }
    Ok(PolymerSet {
        polymers,
        max_support: opts.max_support,
        n_slices,
        counts,
        truncated,
    })
}
