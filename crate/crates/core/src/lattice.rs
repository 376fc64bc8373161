//! Hypercubic lattice geometry.
//!
//! Sites are integer offsets relative to an anchor; the lattice itself is
//! infinite and never stored. Clusters are canonicalised under translations
//! and a selectable subgroup of the hyperoctahedral point group.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteOffset {
    dim: u8,
    coords: [i32; MAX_DIM],
}

impl SiteOffset {
    pub fn origin(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(SiteOffset { dim: d as u8, coords: [0; MAX_DIM] })
    }

    pub fn new(coords: &[i32]) -> Result<Self> {
        check_dim(coords.len())?;
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(SiteOffset { dim: coords.len() as u8, coords: c })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    /// The site one step along `axis` in direction `sign` (+1 or -1).
    pub fn step(&self, axis: usize, sign: i32) -> SiteOffset {
        let mut s = *self;
        s.coords[axis] += sign;
        s
    }

    pub fn offset_by(&self, other: &SiteOffset) -> SiteOffset {
        let mut s = *self;
        for a in 0..self.dim() {
            s.coords[a] += other.coords[a];
        }
        s
    }

    pub fn minus(&self, other: &SiteOffset) -> SiteOffset {
        let mut s = *self;
        for a in 0..self.dim() {
            s.coords[a] -= other.coords[a];
        }
        s
    }

    /// Axis along which `self` and `other` are nearest neighbours, if any.
    pub fn bond_axis(&self, other: &SiteOffset) -> Option<usize> {
        if self.dim != other.dim {
            return None;
        }
        let mut axis = None;
        for a in 0..self.dim() {
            match (other.coords[a] - self.coords[a]).abs() {
                0 => {}
                1 if axis.is_none() => axis = Some(a),
                _ => return None,
            }
        }
        axis
    }
}

impl fmt::Debug for SiteOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// The `2d` nearest neighbours of `site`.
pub fn neighbors(site: &SiteOffset, d: usize) -> Result<Vec<SiteOffset>> {
    check_dim(d)?;
    if site.dim() != d {
        return Err(Error::InvalidDimension(d));
    }
    let mut out = Vec::with_capacity(2 * d);
    for axis in 0..d {
        out.push(site.step(axis, 1));
        out.push(site.step(axis, -1));
    }
    Ok(out)
}

/// Phase gradient imposed along one lattice axis.
///
/// `axis` is zero-based. The site phase is `phi(x) = theta_over_ell * x[axis]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistSpec {
    pub theta_over_ell: f64,
    pub axis: usize,
}

impl TwistSpec {
    pub const NONE: TwistSpec = TwistSpec { theta_over_ell: 0.0, axis: 0 };

    pub fn new(theta_over_ell: f64, axis: usize) -> Self {
        TwistSpec { theta_over_ell, axis }
    }

    pub fn is_zero(&self) -> bool {
        self.theta_over_ell == 0.0
    }

    pub fn site_phase(&self, site: &SiteOffset) -> f64 {
        self.theta_over_ell * site.coord(self.axis) as f64
    }

    /// Phase factor for a total particle displacement `delta` along the twist axis.
    pub fn displacement_phase(&self, delta: i32) -> Complex64 {
        Complex64::from_polar(1.0, self.theta_over_ell * delta as f64)
    }
}

/// Phase `exp(i [phi(to) - phi(from)])` carried by a particle hopping `from -> to`.
pub fn hop_phase(from: &SiteOffset, to: &SiteOffset, twist: &TwistSpec) -> Result<Complex64> {
    from.bond_axis(to).ok_or(Error::InvalidBond)?;
    if twist.axis >= from.dim() {
        return Err(Error::InvalidDimension(twist.axis + 1));
    }
    Ok(Complex64::from_polar(1.0, twist.site_phase(to) - twist.site_phase(from)))
}

/// Which lattice symmetries are used when identifying clusters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// Translations only.
    Translations,
    /// Translations and the full hyperoctahedral group.
    Cubic,
    /// Translations and the point operations leaving the given axis
    /// (zero-based) and its orientation unchanged.
    FixingAxis(usize),
}

impl Symmetry {
    /// The symmetry appropriate for a given twist: the full group without
    /// twist, the axis-fixing subgroup otherwise.
    pub fn for_twist(twist: &TwistSpec) -> Symmetry {
        if twist.is_zero() {
            Symmetry::Cubic
        } else {
            Symmetry::FixingAxis(twist.axis)
        }
    }
}

/// A hyperoctahedral point operation: `x'[perm[a]] = sign[a] * x[a]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointOp {
    perm: [u8; MAX_DIM],
    flip: [bool; MAX_DIM],
}

impl PointOp {
    pub fn apply(&self, s: &SiteOffset) -> SiteOffset {
        let mut out = *s;
        for a in 0..s.dim() {
            let v = s.coords[a];
            out.coords[self.perm[a] as usize] = if self.flip[a] { -v } else { v };
        }
        out
    }

    pub fn axis_image(&self, axis: usize) -> usize {
        self.perm[axis] as usize
    }
}

/// The point operations of `symmetry` in dimension `d`.
pub fn point_group(d: usize, symmetry: Symmetry) -> Result<Vec<PointOp>> {
    check_dim(d)?;
    if let Symmetry::FixingAxis(a) = symmetry {
        if a >= d {
            return Err(Error::InvalidDimension(a + 1));
        }
    }
    let identity = PointOp { perm: [0, 1, 2, 3], flip: [false; MAX_DIM] };
    if symmetry == Symmetry::Translations {
        return Ok(alloc::vec![identity]);
    }
    let mut ops = Vec::new();
    let mut perm: Vec<u8> = (0..d as u8).collect();
    loop {
        for mask in 0..(1u32 << d) {
            let mut op = identity;
            for (a, &p) in perm.iter().enumerate().take(d) {
                op.perm[a] = p;
                op.flip[a] = mask & (1 << a) != 0;
            }
            let keep = match symmetry {
                Symmetry::FixingAxis(fixed) => op.perm[fixed] as usize == fixed && !op.flip[fixed],
                _ => true,
            };
            if keep {
                ops.push(op);
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(ops)
}

fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// An undirected nearest-neighbour bond, stored by its lower endpoint.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Bond {
    pub lower: SiteOffset,
    pub axis: u8,
}

impl Bond {
    pub fn between(a: &SiteOffset, b: &SiteOffset) -> Result<Bond> {
        let axis = a.bond_axis(b).ok_or(Error::InvalidBond)?;
        let lower = if a.coord(axis) < b.coord(axis) { *a } else { *b };
        Ok(Bond { lower, axis: axis as u8 })
    }

    pub fn upper(&self) -> SiteOffset {
        self.lower.step(self.axis as usize, 1)
    }

    fn transformed(&self, op: &PointOp) -> Bond {
        let a = op.apply(&self.lower);
        let b = op.apply(&self.upper());
        let axis = op.axis_image(self.axis as usize);
        let lower = if a.coord(axis) < b.coord(axis) { a } else { b };
        Bond { lower, axis: axis as u8 }
    }

    fn translated(&self, shift: &SiteOffset) -> Bond {
        Bond { lower: self.lower.minus(shift), axis: self.axis }
    }
}

/// A finite set of sites together with a multiset of bonds between them.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cluster {
    sites: Vec<SiteOffset>,
    bonds: Vec<Bond>,
}

impl Cluster {
    /// Builds a cluster; the site set is completed with all bond endpoints.
    pub fn new(sites: &[SiteOffset], bonds: &[(SiteOffset, SiteOffset)]) -> Result<Self> {
        let d = sites
            .first()
            .map(|s| s.dim())
            .or_else(|| bonds.first().map(|b| b.0.dim()))
            .ok_or(Error::InvalidCluster("empty cluster"))?;
        let mut all: Vec<SiteOffset> = sites.to_vec();
        let mut bl = Vec::with_capacity(bonds.len());
        for (a, b) in bonds {
            bl.push(Bond::between(a, b)?);
            all.push(*a);
            all.push(*b);
        }
        if all.iter().any(|s| s.dim() != d) {
            return Err(Error::InvalidDimension(d));
        }
        all.sort();
        all.dedup();
        bl.sort();
        let c = Cluster { sites: all, bonds: bl };
        if !c.is_connected() {
            return Err(Error::InvalidCluster("cluster is not connected"));
        }
        Ok(c)
    }

    pub fn sites(&self) -> &[SiteOffset] {
        &self.sites
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn dim(&self) -> usize {
        self.sites[0].dim()
    }

    pub fn is_connected(&self) -> bool {
        if self.sites.is_empty() {
            return false;
        }
        let mut reached = alloc::vec![false; self.sites.len()];
        let mut stack = alloc::vec![0usize];
        reached[0] = true;
        while let Some(i) = stack.pop() {
            let s = self.sites[i];
            for b in &self.bonds {
                let other = if b.lower == s {
                    b.upper()
                } else if b.upper() == s {
                    b.lower
                } else {
                    continue;
                };
                if let Ok(j) = self.sites.binary_search(&other) {
                    if !reached[j] {
                        reached[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        reached.iter().all(|&r| r)
    }

    fn image(&self, op: &PointOp) -> (Vec<SiteOffset>, Vec<Bond>) {
        let mut sites: Vec<SiteOffset> = self.sites.iter().map(|s| op.apply(s)).collect();
        let mut bonds: Vec<Bond> = self.bonds.iter().map(|b| b.transformed(op)).collect();
        let shift = lowest_corner(&sites);
        for s in sites.iter_mut() {
            *s = s.minus(&shift);
        }
        for b in bonds.iter_mut() {
            *b = b.translated(&shift);
        }
        sites.sort();
        bonds.sort();
        (sites, bonds)
    }
}

/// Componentwise minimum of a nonempty site list.
fn lowest_corner(sites: &[SiteOffset]) -> SiteOffset {
    let mut corner = sites[0];
    for s in &sites[1..] {
        for a in 0..s.dim() {
            corner.coords[a] = corner.coords[a].min(s.coords[a]);
        }
    }
    corner
}

/// Unique representative of `cluster` under translations and `symmetry`.
///
/// The representative has its bounding-box corner at the origin and is the
/// lexicographically smallest image over the allowed point operations.
pub fn canonical_form(cluster: &Cluster, symmetry: Symmetry) -> Result<Cluster> {
    Ok(canonicalize(cluster, symmetry)?.0)
}

/// Canonical representative together with the order of its stabiliser in
/// the point group.
pub fn canonicalize(cluster: &Cluster, symmetry: Symmetry) -> Result<(Cluster, usize)> {
    if !cluster.is_connected() {
        return Err(Error::InvalidCluster("cluster is not connected"));
    }
    let ops = point_group(cluster.dim(), symmetry)?;
    let mut best: Option<(Vec<SiteOffset>, Vec<Bond>)> = None;
    let mut stabilizer = 0;
    for op in &ops {
        let img = cluster.image(op);
        match &best {
            Some(b) if (&img.1, &img.0) > (&b.1, &b.0) => {}
            Some(b) if (&img.1, &img.0) == (&b.1, &b.0) => stabilizer += 1,
            _ => {
                best = Some(img);
                stabilizer = 1;
            }
        }
    }
    let (sites, bonds) = best.expect("point group is never empty");
    Ok((Cluster { sites, bonds }, stabilizer))
}

/// A connected set of distinct bonds, canonical under translations and the
/// symmetry it was enumerated with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Animal {
    pub bonds: Vec<Bond>,
    pub sites: Vec<SiteOffset>,
    /// Number of distinct translation classes in the orbit of this animal
    /// under the point group used for enumeration.
    pub orbit: u64,
}

impl Animal {
    /// The one-site cluster without bonds.
    pub fn single_site(d: usize) -> Result<Animal> {
        Ok(Animal { bonds: Vec::new(), sites: alloc::vec![SiteOffset::origin(d)?], orbit: 1 })
    }

    /// Index of each bond's endpoints in `sites`.
    pub fn bond_endpoints(&self) -> Vec<(usize, usize)> {
        self.bonds
            .iter()
            .map(|b| {
                let lo = self.sites.binary_search(&b.lower).expect("bond endpoint");
                let hi = self.sites.binary_search(&b.upper()).expect("bond endpoint");
                (lo, hi)
            })
            .collect()
    }
}

fn pack_key(bonds: &[Bond]) -> Vec<u64> {
    let mut key: Vec<u64> = bonds
        .iter()
        .map(|b| {
            let mut k = b.axis as u64;
            for a in 0..b.lower.dim() {
                k |= ((b.lower.coords[a] as u64) & 0xfff) << (3 + 12 * a);
            }
            k
        })
        .collect();
    key.sort_unstable();
    key
}

fn canonical_bond_set(bonds: &[Bond], ops: &[PointOp]) -> (Vec<u64>, Vec<Bond>, usize) {
    let mut best: Option<(Vec<u64>, Vec<Bond>)> = None;
    let mut stab = 0;
    let mut ends: Vec<SiteOffset> = Vec::with_capacity(2 * bonds.len());
    for op in ops {
        let mut img: Vec<Bond> = bonds.iter().map(|b| b.transformed(op)).collect();
        ends.clear();
        for b in &img {
            ends.push(b.lower);
        }
        let shift = lowest_corner(&ends);
        for b in img.iter_mut() {
            *b = b.translated(&shift);
        }
        let key = pack_key(&img);
        match &best {
            Some((k, _)) if key > *k => {}
            Some((k, _)) if key == *k => stab += 1,
            _ => {
                img.sort();
                best = Some((key, img));
                stab = 1;
            }
        }
    }
    let (k, b) = best.expect("point group is never empty");
    (k, b, stab)
}

fn animal_from_bonds(bonds: Vec<Bond>, orbit: u64) -> Animal {
    let mut sites = Vec::with_capacity(bonds.len() + 1);
    for b in &bonds {
        sites.push(b.lower);
        sites.push(b.upper());
    }
    sites.sort();
    sites.dedup();
    Animal { bonds, sites, orbit }
}

/// All connected bond animals with `1..=max_bonds` bonds, grouped by bond
/// count (index 0 holds the one-bond animals).
pub fn enumerate_animals(d: usize, max_bonds: usize, symmetry: Symmetry) -> Result<Vec<Vec<Animal>>> {
    let ops = point_group(d, symmetry)?;
    let group_order = ops.len() as u64;
    let origin = SiteOffset::origin(d)?;
    let mut levels: Vec<Vec<Animal>> = Vec::new();
    if max_bonds == 0 {
        return Ok(levels);
    }
    let mut first: BTreeMap<Vec<u64>, (Vec<Bond>, usize)> = BTreeMap::new();
    for axis in 0..d {
        let (k, b, s) = canonical_bond_set(&[Bond { lower: origin, axis: axis as u8 }], &ops);
        first.entry(k).or_insert((b, s));
    }
    levels.push(first.into_values().map(|(b, s)| animal_from_bonds(b, group_order / s as u64)).collect());
    for _ in 1..max_bonds {
        let prev = levels.last().expect("nonempty");
        let mut next: BTreeMap<Vec<u64>, (Vec<Bond>, usize)> = BTreeMap::new();
        let mut grown: Vec<Bond> = Vec::new();
        for animal in prev {
            for site in &animal.sites {
                for axis in 0..d {
                    for lower in [*site, site.step(axis, -1)] {
                        let cand = Bond { lower, axis: axis as u8 };
                        if animal.bonds.binary_search(&cand).is_ok() {
                            continue;
                        }
                        grown.clear();
                        grown.extend_from_slice(&animal.bonds);
                        grown.push(cand);
                        let (k, b, s) = canonical_bond_set(&grown, &ops);
                        next.entry(k).or_insert((b, s));
                    }
                }
            }
        }
        levels.push(next.into_values().map(|(b, s)| animal_from_bonds(b, group_order / s as u64)).collect());
    }
    Ok(levels)
}
