//! Space-time configurations `{(I_k, J_k)}` and their supports.

use crate::error::{Error, Result};
use crate::lattice::{Geometry, SiteSet};

/// Sequence `(I_k, J_k)`, `k = 1..N`; `slices[k-1]` holds slice `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub slices: Vec<(SiteSet, SiteSet)>,
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Self {
            slices: vec![(SiteSet::EMPTY, SiteSet::EMPTY); n],
        }
    }

    /// Validates `J_k ∩ Λ_{I_k} = ∅` and that all sites lie in the volume.
    pub fn new(slices: Vec<(SiteSet, SiteSet)>, geometry: &Geometry) -> Result<Self> {
        let c = Self { slices };
        c.check(geometry)?;
        Ok(c)
    }

    pub fn check(&self, geometry: &Geometry) -> Result<()> {
        let all = geometry.volume.all_sites();
        for (k, &(i, j)) in self.slices.iter().enumerate() {
            if !i.is_subset(all) || !j.is_subset(all) {
                return Err(Error::InvalidConfiguration(format!(
                    "slice {} uses sites outside the volume",
                    k + 1
                )));
            }
            if j.intersects(geometry.lambda_of(i)) {
                return Err(Error::InvalidConfiguration(format!(
                    "slice {}: J meets Λ_I",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices
            .iter()
            .all(|(i, j)| i.is_empty() && j.is_empty())
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = vec![];
        for (k, &(i, j)) in self.slices.iter().enumerate() {
            out.extend(i.iter().map(|x| Atom::new(k + 1, AtomKind::I, x)));
            out.extend(j.iter().map(|x| Atom::new(k + 1, AtomKind::J, x)));
        }
        out
    }

    pub fn from_atoms(n: usize, atoms: &[Atom]) -> Self {
        let mut c = Self::empty(n);
        for a in atoms {
            let s = &mut c.slices[a.slice - 1];
            match a.kind {
                AtomKind::I => s.0 = s.0.with(a.site),
                AtomKind::J => s.1 = s.1.with(a.site),
            }
        }
        c
    }

    /// Slice-wise union `I = I¹ ∪ I²`, `J = J¹ ∪ J²` of two disjoint
    /// configurations with the same `N`.
    pub fn union(&self, other: &Self, geometry: &Geometry) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::InvalidConfiguration("different numbers of slices".into()));
        }
        if config_support(self, geometry).intersects(&config_support(other, geometry)) {
            return Err(Error::InvalidConfiguration("supports intersect".into()));
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| (a.0.union(b.0), a.1.union(b.1)))
            .collect();
        Configuration::new(slices, geometry)
    }

    /// Slice range `(first, last)` of the non-empty slices.
    pub fn time_span(&self) -> Option<(usize, usize)> {
        let occupied: Vec<usize> = self
            .slices
            .iter()
            .enumerate()
            .filter(|(_, (i, j))| !i.is_empty() || !j.is_empty())
            .map(|(k, _)| k + 1)
            .collect();
        Some((*occupied.first()?, *occupied.last()?))
    }

    /// Exact structural zero test: an excitation outside `Λ_I` can neither
    /// appear nor disappear without a quantum term, and `J_1 = J_N = ∅`.
    pub fn is_structurally_zero(&self, geometry: &Geometry) -> bool {
        let n = self.n();
        let mut prev_j = SiteSet::EMPTY;
        let mut prev_lambda = SiteSet::EMPTY;
        for &(i, j) in &self.slices {
            let lambda = geometry.lambda_of(i);
            if !j.is_subset(prev_j.union(prev_lambda)) || !prev_j.is_subset(j.union(lambda)) {
                return true;
            }
            prev_j = j;
            prev_lambda = lambda;
        }
        n > 0 && !self.slices[n - 1].1.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    I,
    J,
}

/// A single site of `I_k` or `J_k`; atoms are ordered by (slice, kind, site).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub slice: usize,
    pub kind: AtomKind,
    pub site: usize,
}

impl Atom {
    pub fn new(slice: usize, kind: AtomKind, site: usize) -> Self {
        Self { slice, kind, site }
    }

    /// Sites contributed to layers `slice-1` and `slice`.
    pub fn footprint(&self, geometry: &Geometry) -> SiteSet {
        match self.kind {
            AtomKind::I => geometry.neighborhood(geometry.translate_set(self.site)),
            AtomKind::J => geometry.neighborhood(SiteSet::singleton(self.site)),
        }
    }
}

/// Subset of `{0..N} × Λ`, one site set per layer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Support {
    pub layers: Vec<SiteSet>,
}

impl Support {
    pub fn new(n_layers: usize) -> Self {
        Self {
            layers: vec![SiteSet::EMPTY; n_layers],
        }
    }

    pub fn size(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.iter().all(|l| l.is_empty())
    }

    pub fn add(&mut self, layer: usize, sites: SiteSet) {
        if self.layers.len() <= layer {
            self.layers.resize(layer + 1, SiteSet::EMPTY);
        }
        self.layers[layer] = self.layers[layer].union(sites);
    }

    pub fn add_atom(&mut self, atom: &Atom, geometry: &Geometry) {
        let f = atom.footprint(geometry);
        self.add(atom.slice - 1, f);
        self.add(atom.slice, f);
    }

    pub fn union_with(&mut self, other: &Support) {
        for (k, &l) in other.layers.iter().enumerate() {
            self.add(k, l);
        }
    }

    pub fn intersects(&self, other: &Support) -> bool {
        self.intersects_shifted(other, 0)
    }

    /// Whether `self` meets `other` shifted up by `shift` layers.
    pub fn intersects_shifted(&self, other: &Support, shift: usize) -> bool {
        other
            .layers
            .iter()
            .enumerate()
            .any(|(k, &l)| self.layers.get(k + shift).is_some_and(|&m| m.intersects(l)))
    }

    pub fn contains(&self, layer: usize, site: usize) -> bool {
        self.layers.get(layer).is_some_and(|l| l.contains(site))
    }

    pub fn points(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(k, l)| l.iter().map(move |x| (k, x)))
            .collect()
    }

    /// Number of layers containing `site`.
    pub fn layers_containing(&self, site: usize) -> usize {
        self.layers.iter().filter(|l| l.contains(site)).count()
    }

    /// First and last non-empty layer.
    pub fn layer_span(&self) -> Option<(usize, usize)> {
        let first = self.layers.iter().position(|l| !l.is_empty())?;
        let last = self.layers.iter().rposition(|l| !l.is_empty())?;
        Some((first, last))
    }
}

/// `{(k,x) | x ∈ Λ̃_{I_k} ∪ Λ̃_{I_{k+1}} ∪ J̃_k ∪ J̃_{k+1}}`, `k = 0..N`.
pub fn config_support(c: &Configuration, geometry: &Geometry) -> Support {
    let mut s = Support::new(c.n() + 1);
    for a in c.atoms() {
        s.add_atom(&a, geometry);
    }
    s
}

/// Maximal connected components (as configurations on the same `N`).
pub fn polymer_decompose(c: &Configuration, geometry: &Geometry) -> Vec<Configuration> {
    let atoms = c.atoms();
    let supports: Vec<Support> = atoms
        .iter()
        .map(|a| {
            let mut s = Support::new(c.n() + 1);
            s.add_atom(a, geometry);
            s
        })
        .collect();
    let n = atoms.len();
    let mut component = vec![usize::MAX; n];
    let mut out = vec![];
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        component[start] = id;
        let mut stack = vec![start];
        let mut members = vec![];
        while let Some(a) = stack.pop() {
            members.push(atoms[a]);
            for b in 0..n {
                if component[b] == usize::MAX && supports[a].intersects(&supports[b]) {
                    component[b] = id;
                    stack.push(b);
                }
            }
        }
        out.push(Configuration::from_atoms(c.n(), &members));
    }
    out
}

/// Blocked configurations `(I_k, J_k, K_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockedConfiguration {
    pub slices: Vec<(SiteSet, SiteSet, SiteSet)>,
}

/// Box neighbourhood `Ĩ = {x | ∃y∈I: |x_a - y_a| ≤ 1 ∀a}` on the blocked torus.
pub fn box_neighborhood(geometry: &Geometry, set: SiteSet) -> SiteSet {
    let vol = &geometry.volume;
    let nu = vol.dimension();
    let mut out = SiteSet::EMPTY;
    for y in set.iter() {
        for m in 0..3usize.pow(nu as u32) {
            let mut shift = vec![0i64; nu];
            let mut r = m;
            for s in shift.iter_mut() {
                *s = (r % 3) as i64 - 1;
                r /= 3;
            }
            out = out.with(vol.translate(y, &shift));
        }
    }
    out
}

/// Support of a blocked configuration: `Λ̄_{I}`, `Λ̄_{J}` and `K` enlarged by
/// the box neighbourhood, on layers `k-1` and `k`.
pub fn blocked_support(c: &BlockedConfiguration, geometry: &Geometry) -> Support {
    let mut s = Support::new(c.slices.len() + 1);
    for (k, &(i, j, kk)) in c.slices.iter().enumerate() {
        let f = box_neighborhood(geometry, geometry.lambda_of(i))
            .union(box_neighborhood(geometry, geometry.lambda_of(j)))
            .union(box_neighborhood(geometry, kk));
        s.add(k, f);
        s.add(k + 1, f);
    }
    s
}
