//! Periodic torus geometry, tensor-product state spaces and the embedding of
//! local operators into volume operators.
//!
//! Sites are indexed lexicographically by their coordinates; the volume basis
//! is the site-major Kronecker product, so basis state `(s_0, …, s_{n-1})`
//! has index `Σ s_i d^{n-1-i}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_hermitian, CMat, CVec, SparseMatrix, C64, ONE, ZERO};

/// Default cap on the total space dimension `d^{|Λ|}`.
pub const DEFAULT_MAX_DIM: usize = 10_000_000;
/// Default dimension below which dense algebra is used.
pub const DEFAULT_DENSE_CAP: usize = 4096;
/// Index of the preferred (ground) basis vector at every site.
pub const PREFERRED_INDEX: usize = 0;

/// Set of sites of a volume with at most 64 sites, as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteSet(pub u64);

impl SiteSet {
    pub const EMPTY: SiteSet = SiteSet(0);

    pub fn singleton(site: usize) -> Self {
        SiteSet(1u64 << site)
    }

    pub fn from_sites(sites: impl IntoIterator<Item = usize>) -> Self {
        sites.into_iter().fold(Self::EMPTY, |s, x| s.with(x))
    }

    /// All sites `0..n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            SiteSet(u64::MAX)
        } else {
            SiteSet((1u64 << n) - 1)
        }
    }

    pub fn with(self, site: usize) -> Self {
        SiteSet(self.0 | (1u64 << site))
    }

    pub fn contains(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: Self) -> Self {
        SiteSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SiteSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        SiteSet(self.0 & !other.0)
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, in increasing order of their bitmask.
    pub fn subsets(self) -> impl Iterator<Item = SiteSet> {
        let full = self.0;
        let mut cur: Option<u64> = Some(0);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = if c == full { None } else { Some((c.wrapping_sub(full)) & full) };
            Some(SiteSet(c))
        })
    }
}

/// Finite torus `ℤ^ν mod dims` with a uniform site dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Volume {
    dims: Vec<usize>,
    site_dim: usize,
    n_sites: usize,
    space_dim: usize,
    coords: Vec<Vec<usize>>,
}

impl Volume {
    pub fn new(dims: &[usize], site_dim: usize) -> Result<Self> {
        Self::with_cap(dims, site_dim, DEFAULT_MAX_DIM)
    }

    pub fn with_cap(dims: &[usize], site_dim: usize, max_dim: usize) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Geometry("side lengths must be positive".into()));
        }
        if site_dim < 2 {
            return Err(Error::Geometry("site dimension must be at least 2".into()));
        }
        let n_sites = dims
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .filter(|&n| n <= 64)
            .ok_or_else(|| Error::Geometry("more than 64 sites".into()))?;
        let space_dim = (0..n_sites)
            .try_fold(1usize, |acc, _| acc.checked_mul(site_dim))
            .filter(|&s| s <= max_dim)
            .ok_or(Error::DimensionOverflow {
                site_dim,
                sites: n_sites,
                max: max_dim,
            })?;
        let mut coords = Vec::with_capacity(n_sites);
        for mut idx in 0..n_sites {
            let mut c = vec![0; dims.len()];
            for axis in (0..dims.len()).rev() {
                c[axis] = idx % dims[axis];
                idx /= dims[axis];
            }
            coords.push(c);
        }
        Ok(Self {
            dims: dims.to_vec(),
            site_dim,
            n_sites,
            space_dim,
            coords,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn all_sites(&self) -> SiteSet {
        SiteSet::full(self.n_sites)
    }

    pub fn coords(&self, site: usize) -> &[usize] {
        &self.coords[site]
    }

    /// Site at integer coordinates, wrapped periodically.
    pub fn site_at(&self, coords: &[i64]) -> usize {
        assert_eq!(coords.len(), self.dims.len());
        coords.iter().zip(&self.dims).fold(0, |acc, (&c, &l)| {
            acc * l + c.rem_euclid(l as i64) as usize
        })
    }

    pub fn translate(&self, site: usize, shift: &[i64]) -> usize {
        let c: Vec<i64> = self.coords[site]
            .iter()
            .zip(shift)
            .map(|(&a, &b)| a as i64 + b)
            .collect();
        self.site_at(&c)
    }

    /// Stride of site `i` in the site-major basis index.
    pub fn stride(&self, site: usize) -> usize {
        self.site_dim.pow((self.n_sites - 1 - site) as u32)
    }

    /// Local state of `site` in basis state `index`.
    pub fn digit(&self, index: usize, site: usize) -> usize {
        index / self.stride(site) % self.site_dim
    }

    /// Basis states in which every site outside `ground` may be anything
    /// and all sites of `ground` are in the preferred state, etc.
    pub fn excited_sites(&self, index: usize) -> SiteSet {
        let mut s = SiteSet::EMPTY;
        let mut idx = index;
        for site in (0..self.n_sites).rev() {
            if idx % self.site_dim != PREFERRED_INDEX {
                s = s.with(site);
            }
            idx /= self.site_dim;
        }
        s
    }
}

pub fn make_torus(dims: &[usize], site_dim: usize) -> Result<Volume> {
    Volume::new(dims, site_dim)
}

/// Ordered list of distinct sites; the order fixes the tensor-factor order of
/// operators living on the region.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    pub fn new(sites: Vec<usize>) -> Result<Self> {
        let mut sorted = sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(Error::Geometry("region lists a site twice".into()));
        }
        Ok(Self { sites })
    }

    pub fn empty() -> Self {
        Self { sites: vec![] }
    }

    pub fn from_set(set: SiteSet) -> Self {
        Self {
            sites: set.iter().collect(),
        }
    }

    /// `Λ₀ + x` for offsets `Λ₀` given in coordinates, keeping the order of
    /// the offsets.
    pub fn translate_of(volume: &Volume, offsets: &[Vec<i64>], x: usize) -> Result<Self> {
        let base: Vec<i64> = volume.coords(x).iter().map(|&c| c as i64).collect();
        let sites = offsets
            .iter()
            .map(|o| {
                if o.len() != base.len() {
                    return Err(Error::Geometry("offset of wrong dimension".into()));
                }
                let c: Vec<i64> = o.iter().zip(&base).map(|(a, b)| a + b).collect();
                Ok(volume.site_at(&c))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sites)
            .map_err(|_| Error::Geometry("translate of Λ₀ wraps onto itself; torus too small".into()))
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn set(&self) -> SiteSet {
        SiteSet::from_sites(self.sites.iter().copied())
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.contains(&site)
    }

    pub fn check_in(&self, volume: &Volume) -> Result<()> {
        match self.sites.iter().find(|&&s| s >= volume.n_sites()) {
            Some(&site) => Err(Error::RegionOutsideVolume {
                site,
                n_sites: volume.n_sites(),
            }),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorTag {
    Classical,
    Relative,
    Bounded,
    Generic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    pub region: Region,
    pub matrix: CMat,
    pub tag: OperatorTag,
}

impl LocalOperator {
    pub fn new(region: Region, matrix: CMat, tag: OperatorTag, site_dim: usize) -> Result<Self> {
        let expected = site_dim.pow(region.len() as u32);
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.nrows(),
            });
        }
        if tag != OperatorTag::Generic {
            check_hermitian(&matrix)?;
        }
        Ok(Self {
            region,
            matrix,
            tag,
        })
    }
}

/// Index bookkeeping for embedding an operator on `region` into the volume.
struct RegionIndex {
    local_dim: usize,
    /// Volume-index contribution of each local basis state.
    offsets: Vec<usize>,
}

impl RegionIndex {
    fn new(sites: &[usize], n_sites: usize, d: usize) -> Self {
        let k = sites.len();
        let local_dim = d.pow(k as u32);
        let offsets = (0..local_dim)
            .map(|a| {
                let mut rem = a;
                let mut off = 0;
                for j in (0..k).rev() {
                    off += (rem % d) * d.pow((n_sites - 1 - sites[j]) as u32);
                    rem /= d;
                }
                off
            })
            .collect();
        Self { local_dim, offsets }
    }

    /// Splits a volume index into (local index, index with region digits zeroed).
    fn split(&self, index: usize, sites: &[usize], n_sites: usize, d: usize) -> (usize, usize) {
        let mut a = 0;
        for &s in sites {
            a = a * d + index / d.pow((n_sites - 1 - s) as u32) % d;
        }
        (a, index - self.offsets[a])
    }
}

/// Embeds a matrix acting on the ordered `sites` of a `d`-dimensional site
/// chain of `n_sites` sites, as a sparse operator on the whole space.
pub fn embed_matrix(matrix: &CMat, sites: &[usize], n_sites: usize, d: usize) -> SparseMatrix {
    let n = d.pow(n_sites as u32);
    let idx = RegionIndex::new(sites, n_sites, d);
    let local_rows: Vec<Vec<(usize, C64)>> = (0..idx.local_dim)
        .map(|a| {
            (0..idx.local_dim)
                .filter(|&b| matrix[(a, b)] != ZERO)
                .map(|b| (b, matrix[(a, b)]))
                .collect()
        })
        .collect();
    let rows = (0..n)
        .map(|i| {
            let (a, base) = idx.split(i, sites, n_sites, d);
            local_rows[a]
                .iter()
                .map(|&(b, v)| (base + idx.offsets[b], v))
                .collect()
        })
        .collect();
    SparseMatrix::from_rows(n, rows)
}

/// Adds `coef · (M ⊗ 1) x` to `y` without forming the volume operator.
pub fn apply_local(
    matrix: &CMat,
    sites: &[usize],
    n_sites: usize,
    d: usize,
    coef: C64,
    x: &[C64],
    y: &mut [C64],
) {
    let idx = RegionIndex::new(sites, n_sites, d);
    let n = x.len();
    let mut visited_base = vec![false; n];
    let mut buf = vec![ZERO; idx.local_dim];
    for i in 0..n {
        let (_, base) = idx.split(i, sites, n_sites, d);
        if visited_base[base] {
            continue;
        }
        visited_base[base] = true;
        for (a, b) in buf.iter_mut().enumerate() {
            *b = x[base + idx.offsets[a]];
        }
        for a in 0..idx.local_dim {
            let mut acc = ZERO;
            for (b, &xb) in buf.iter().enumerate() {
                acc += matrix[(a, b)] * xb;
            }
            y[base + idx.offsets[a]] += coef * acc;
        }
    }
}

/// `embed(op, volume)`: the operator acting as `op` on its region and as the
/// identity elsewhere.
pub fn embed(op: &LocalOperator, volume: &Volume) -> Result<SparseMatrix> {
    op.region.check_in(volume)?;
    Ok(embed_matrix(
        &op.matrix,
        op.region.sites(),
        volume.n_sites(),
        volume.site_dim(),
    ))
}

/// Matrix on the ordered `target` sites acting as `matrix` on `sites`
/// (each of which must appear in `target`) and as the identity elsewhere.
pub fn extend_to_sites(matrix: &CMat, sites: &[usize], target: &[usize], d: usize) -> Result<CMat> {
    let positions = sites
        .iter()
        .map(|s| {
            target
                .iter()
                .position(|t| t == s)
                .ok_or(Error::Geometry(format!("site {s} outside target region")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(embed_matrix(matrix, &positions, target.len(), d).to_dense())
}

/// `⊗_x Ω_x` with `Ω_x` the `preferred_index` basis vector.
pub fn product_ground_vector(volume: &Volume, preferred_index: usize) -> Result<CVec> {
    if preferred_index >= volume.site_dim() {
        return Err(Error::InvalidModel(format!(
            "preferred index {preferred_index} ≥ site dimension"
        )));
    }
    let index = (0..volume.n_sites()).fold(0, |acc, _| acc * volume.site_dim() + preferred_index);
    let mut v = CVec::zeros(volume.space_dim());
    v[index] = ONE;
    Ok(v)
}

/// Diagonal of the projector onto `(⊗_{x∈K} H'_x) ⊗ (⊗_{x∈G} Ω_x)`, identity
/// on the remaining sites.
pub fn excitation_diagonal(volume: &Volume, excited: SiteSet, ground: SiteSet) -> Vec<bool> {
    (0..volume.space_dim())
        .map(|i| {
            let ex = volume.excited_sites(i);
            excited.is_subset(ex) && !ground.intersects(ex)
        })
        .collect()
}

pub fn excitation_projector(volume: &Volume, excited: &Region, ground: &Region) -> Result<SparseMatrix> {
    excited.check_in(volume)?;
    ground.check_in(volume)?;
    let (k, g) = (excited.set(), ground.set());
    if k.intersects(g) {
        return Err(Error::OverlappingRegions(k.intersection(g).iter().next().unwrap()));
    }
    let diag: Vec<C64> = excitation_diagonal(volume, k, g)
        .into_iter()
        .map(|b| if b { ONE } else { ZERO })
        .collect();
    Ok(SparseMatrix::diagonal(&diag))
}

/// Interaction geometry: the volume together with the translates `Λ₀ + x`.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub volume: Volume,
    pub lambda0: Vec<Vec<i64>>,
    translates: Vec<Region>,
    translate_sets: Vec<SiteSet>,
}

impl Geometry {
    pub fn new(volume: Volume, lambda0: Vec<Vec<i64>>) -> Result<Self> {
        if lambda0.is_empty() {
            return Err(Error::Geometry("Λ₀ must be non-empty".into()));
        }
        let translates = (0..volume.n_sites())
            .map(|x| Region::translate_of(&volume, &lambda0, x))
            .collect::<Result<Vec<_>>>()?;
        let translate_sets = translates.iter().map(|r| r.set()).collect();
        Ok(Self {
            volume,
            lambda0,
            translates,
            translate_sets,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.volume.n_sites()
    }

    pub fn lambda0_size(&self) -> usize {
        self.lambda0.len()
    }

    /// `Λ₀ + x`.
    pub fn translate(&self, x: usize) -> &Region {
        &self.translates[x]
    }

    pub fn translate_set(&self, x: usize) -> SiteSet {
        self.translate_sets[x]
    }

    /// `Λ_I = ∪_{x∈I} (Λ₀ + x)`.
    pub fn lambda_of(&self, i: SiteSet) -> SiteSet {
        i.iter()
            .fold(SiteSet::EMPTY, |acc, x| acc.union(self.translate_sets[x]))
    }

    /// Translates `x` with `(Λ₀ + x) ∩ A ≠ ∅`.
    pub fn touching(&self, a: SiteSet) -> SiteSet {
        SiteSet::from_sites((0..self.n_sites()).filter(|&x| self.translate_sets[x].intersects(a)))
    }

    /// Neighbourhood `Ã = ∪_{x:(Λ₀+x)∩A≠∅} (Λ₀ + x)`.
    pub fn neighborhood(&self, a: SiteSet) -> SiteSet {
        self.lambda_of(self.touching(a))
    }

    /// Largest coordinate extent of `Λ₀` along any axis.
    pub fn lambda0_diameter(&self) -> usize {
        (0..self.volume.dimension())
            .map(|axis| {
                let (lo, hi) = self.lambda0.iter().fold((i64::MAX, i64::MIN), |(lo, hi), o| {
                    (lo.min(o[axis]), hi.max(o[axis]))
                });
                (hi - lo) as usize
            })
            .max()
            .unwrap_or(0)
    }
}

/// Permutation of sites induced by a translation: `perm[x] = x + shift`.
pub fn translation_permutation(volume: &Volume, shift: &[i64]) -> Vec<usize> {
    (0..volume.n_sites()).map(|x| volume.translate(x, shift)).collect()
}

/// Basis permutation `U` with `U e_{(s_0..)} = e_{(s'_..)}`, `s'_{perm[x]} = s_x`.
pub fn site_permutation_matrix(volume: &Volume, perm: &[usize]) -> SparseMatrix {
    let n = volume.space_dim();
    let rows: Vec<Vec<(usize, C64)>> = {
        let mut target = vec![0usize; n];
        for (i, t) in target.iter_mut().enumerate() {
            let mut j = 0;
            for x in 0..volume.n_sites() {
                j += volume.digit(i, x) * volume.stride(perm[x]);
            }
            *t = j;
        }
        let mut rows = vec![vec![]; n];
        for (i, &j) in target.iter().enumerate() {
            rows[j].push((i, ONE));
        }
        rows
    };
    SparseMatrix::from_rows(n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn torus_counts() {
        let v = make_torus(&[4], 2).unwrap();
        assert_eq!((v.n_sites(), v.space_dim()), (4, 16));
        let v = make_torus(&[2, 2], 3).unwrap();
        assert_eq!((v.n_sites(), v.space_dim()), (4, 81));
        assert!(matches!(
            make_torus(&[30], 3),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn periodic_wrap() {
        let v = make_torus(&[3, 4], 2).unwrap();
        for x in 0..v.n_sites() {
            assert_eq!(v.translate(x, &[3, 0]), x);
            assert_eq!(v.translate(x, &[0, 4]), x);
            assert_eq!(v.translate(v.translate(x, &[1, -1]), &[-1, 1]), x);
        }
    }

    #[test]
    fn single_site_embedding_is_site_major() {
        let v = make_torus(&[2], 2).unwrap();
        let m = CMat::from_diagonal(&CVec::from_vec(vec![re(0.0), re(1.0)]));
        let op = LocalOperator::new(Region::new(vec![0]).unwrap(), m, OperatorTag::Classical, 2).unwrap();
        let e = embed(&op, &v).unwrap().to_dense();
        let expected = CMat::from_diagonal(&CVec::from_vec(vec![re(0.), re(0.), re(1.), re(1.)]));
        assert_eq!(e, expected);
    }

    #[test]
    fn excitation_projector_example() {
        let v = make_torus(&[2], 2).unwrap();
        let p = excitation_projector(&v, &Region::new(vec![0]).unwrap(), &Region::new(vec![1]).unwrap())
            .unwrap()
            .to_dense();
        let expected = CMat::from_diagonal(&CVec::from_vec(vec![re(0.), re(0.), re(1.), re(0.)]));
        assert_eq!(p, expected);
        assert!(excitation_projector(&v, &Region::new(vec![0]).unwrap(), &Region::new(vec![0]).unwrap()).is_err());
    }

    #[test]
    fn subsets_enumeration() {
        let s = SiteSet::from_sites([1, 3, 4]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset(s)));
        assert_eq!(SiteSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn neighborhoods_on_a_ring() {
        let v = make_torus(&[6], 2).unwrap();
        let g = Geometry::new(v, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(g.lambda_of(SiteSet::singleton(5)), SiteSet::from_sites([5, 0]));
        assert_eq!(g.neighborhood(SiteSet::from_sites([2, 3])), SiteSet::from_sites([1, 2, 3, 4]));
    }
}
