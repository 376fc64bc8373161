//! Process chains: diagram enumeration and evaluation.
//!
//! A diagram is the unordered event content of a process chain: `k`
//! creations, `k` annihilations and `nu` nearest-neighbour hops whose
//! touched sites form a connected cluster and whose net effect leaves every
//! site occupation unchanged. Summing a diagram over all orderings of its
//! events and over all Kato terms gives its contribution to the coefficient
//! of `|eta|^{2k} (J/U)^nu` in the ground-state energy per site.
//!
//! Diagrams are generated on canonical bond animals; every diagram on an
//! animal inherits the animal's orbit size as its embedding multiplicity.
//! Contributions of disconnected event sets cancel exactly, so only
//! connected diagrams are generated.
//!
//! Two evaluation routes exist. [`evaluate_diagram`] takes one reduced Kato
//! term and sums over the event orderings that term admits. The production
//! route, [`Evaluator`], sums all terms at once with a recursion over event
//! subsets: the occupation state after a subset of events does not depend on
//! their order, so the amplitude of every partial chain can be accumulated
//! per subset instead of per permutation.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::kato::KatoTerm;
use crate::lattice::{self, Animal, SiteOffset, Symmetry, TwistSpec, MAX_DIM};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Largest order the subset kernel accepts by default.
pub const DEFAULT_MAX_ORDER: usize = 14;

/// Changes whenever kernel output could change; part of cache keys.
pub const KERNEL_REVISION: &str = "subset-rs-4";

/// Reference Mott state with `g` particles per site at chemical potential
/// `mu_over_u` (energies in units of `U`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MottState {
    g: u32,
    mu_over_u: f64,
}

impl MottState {
    pub fn new(g: u32, mu_over_u: f64) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidState(alloc::string::String::from("filling factor must be at least 1")));
        }
        if !(mu_over_u > (g - 1) as f64 && mu_over_u < g as f64) {
            return Err(Error::InvalidState(alloc::format!(
                "mu/U = {mu_over_u} outside the nondegenerate window ({}, {g})",
                g - 1
            )));
        }
        Ok(MottState { g, mu_over_u })
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn mu_over_u(&self) -> f64 {
        self.mu_over_u
    }

    /// Single-site energy `n(n-1)/2 - mu n`.
    pub fn site_energy(&self, n: u32) -> f64 {
        let n = n as f64;
        0.5 * n * (n - 1.0) - self.mu_over_u * n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Create,
    Annihilate,
    Hop,
}

/// One perturbation event. For hops, `site` is the origin and `target` the
/// destination of the moving particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub kind: EventKind,
    pub site: SiteOffset,
    pub target: Option<SiteOffset>,
}

impl Event {
    pub fn create(site: SiteOffset) -> Self {
        Event { kind: EventKind::Create, site, target: None }
    }

    pub fn annihilate(site: SiteOffset) -> Self {
        Event { kind: EventKind::Annihilate, site, target: None }
    }

    pub fn hop(from: SiteOffset, to: SiteOffset) -> Result<Self> {
        from.bond_axis(&to).ok_or(Error::InvalidBond)?;
        Ok(Event { kind: EventKind::Hop, site: from, target: Some(to) })
    }
}

/// A process-chain diagram with its per-site embedding multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    events: Vec<Event>,
    k: usize,
    nu: usize,
    multiplicity: u64,
}

impl Diagram {
    /// Validates event content, balance and connectivity.
    pub fn new(mut events: Vec<Event>, multiplicity: u64) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidOrder { order: 0, min: 1 });
        }
        events.sort();
        let creates = events.iter().filter(|e| e.kind == EventKind::Create).count();
        let annihilates = events.iter().filter(|e| e.kind == EventKind::Annihilate).count();
        if creates != annihilates {
            return Err(Error::InvalidCluster("creation and annihilation counts differ"));
        }
        let nu = events.len() - 2 * creates;
        let d = Diagram { events, k: creates, nu, multiplicity };
        let local = d.local()?;
        if local.flow_imbalance() {
            return Err(Error::InvalidCluster("events do not restore the Mott state"));
        }
        let bonds: Vec<(SiteOffset, SiteOffset)> = d.events.iter().filter_map(|e| e.target.map(|t| (e.site, t))).collect();
        let sites: Vec<SiteOffset> = d.events.iter().map(|e| e.site).collect();
        lattice::Cluster::new(&sites, &bonds)?;
        Ok(d)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn order(&self) -> usize {
        2 * self.k + self.nu
    }

    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    /// Total particle displacement summed over all hops.
    pub fn displacement(&self) -> Vec<i32> {
        let d = self.events[0].site.dim();
        let mut out = alloc::vec![0; d];
        for e in &self.events {
            if let Some(t) = e.target {
                for (a, o) in out.iter_mut().enumerate() {
                    *o += t.coord(a) - e.site.coord(a);
                }
            }
        }
        out
    }

    fn local(&self) -> Result<LocalDiagram> {
        let mut sites: Vec<SiteOffset> = Vec::new();
        for e in &self.events {
            sites.push(e.site);
            if let Some(t) = e.target {
                sites.push(t);
            }
        }
        sites.sort();
        sites.dedup();
        if sites.len() > u8::MAX as usize {
            return Err(Error::Capacity { order: sites.len(), max: u8::MAX as usize });
        }
        let idx = |s: &SiteOffset| sites.binary_search(s).expect("site present") as u8;
        let mut local = LocalDiagram::with_sites(sites.len());
        local.nu = self.nu;
        for e in &self.events {
            let ev = LocalEvent { kind: e.kind, a: idx(&e.site), b: e.target.map(|t| idx(&t)).unwrap_or(0) };
            local.events.push(ev);
            if let Some(t) = e.target {
                for a in 0..t.dim() {
                    local.displacement[a] += t.coord(a) - e.site.coord(a);
                }
            }
        }
        local.finish();
        Ok(local)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalEvent {
    pub kind: EventKind,
    pub a: u8,
    pub b: u8,
}

/// Kernel-side diagram: events on local site indices, one entry per event
/// (repeated events appear repeatedly).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalDiagram {
    pub nsites: usize,
    pub events: Vec<LocalEvent>,
    pub nu: usize,
    pub displacement: [i32; MAX_DIM],
    /// `1 / prod(m!)` over multiplicities of identical events.
    pub symmetry_factor: f64,
}

impl LocalDiagram {
    fn with_sites(nsites: usize) -> Self {
        LocalDiagram { nsites, events: Vec::new(), nu: 0, displacement: [0; MAX_DIM], symmetry_factor: 1.0 }
    }

    fn finish(&mut self) {
        self.events.sort();
        let mut factor = 1.0;
        let mut run = 1;
        for i in 1..=self.events.len() {
            if i < self.events.len() && self.events[i] == self.events[i - 1] {
                run += 1;
                factor *= run as f64;
            } else {
                run = 1;
            }
        }
        self.symmetry_factor = 1.0 / factor;
    }

    pub fn order(&self) -> usize {
        self.events.len()
    }

    fn flow_imbalance(&self) -> bool {
        let mut dev = alloc::vec![0i32; self.nsites];
        for e in &self.events {
            apply_event(&mut dev, e, 1);
        }
        dev.iter().any(|&x| x != 0)
    }
}

#[inline]
fn apply_event<T: Copy + core::ops::AddAssign + core::ops::SubAssign + From<i8>>(dev: &mut [T], e: &LocalEvent, _unit: i8) {
    let one = T::from(1);
    match e.kind {
        EventKind::Create => dev[e.a as usize] += one,
        EventKind::Annihilate => dev[e.a as usize] -= one,
        EventKind::Hop => {
            dev[e.a as usize] -= one;
            dev[e.b as usize] += one;
        }
    }
}

/// Calls `f` for every balanced diagram with `k` source pairs and `nu` hops
/// that uses every bond of `animal` at least once.
///
/// For `nu == 0` pass [`Animal::single_site`].
pub fn for_each_diagram_on(animal: &Animal, k: usize, nu: usize, mut f: impl FnMut(&LocalDiagram)) {
    let nb = animal.bonds.len();
    if nb > nu || (nb == 0 && nu > 0) || 2 * k + nu == 0 {
        return;
    }
    let mut b = ShapeBuilder {
        animal,
        ends: animal.bond_endpoints(),
        k,
        nu,
        fwd: alloc::vec![0; nb],
        bwd: alloc::vec![0; nb],
        flow: alloc::vec![0; animal.sites.len()],
        pending: alloc::vec![0; animal.sites.len()],
        extra: alloc::vec![0; animal.sites.len()],
        scratch: LocalDiagram::with_sites(animal.sites.len()),
    };
    for &(lo, hi) in &b.ends {
        b.pending[lo] += 1;
        b.pending[hi] += 1;
    }
    b.assign(0, nu, &mut f);
}

struct ShapeBuilder<'a> {
    animal: &'a Animal,
    ends: Vec<(usize, usize)>,
    k: usize,
    nu: usize,
    fwd: Vec<u8>,
    bwd: Vec<u8>,
    /// Outflow minus inflow per site, equal to creations minus annihilations.
    flow: Vec<i32>,
    pending: Vec<u32>,
    extra: Vec<u8>,
    scratch: LocalDiagram,
}

impl ShapeBuilder<'_> {
    fn closed_excess_ok(&self) -> bool {
        let (mut pos, mut neg) = (0i32, 0i32);
        for (s, &fl) in self.flow.iter().enumerate() {
            if self.pending[s] == 0 {
                if fl > 0 {
                    pos += fl;
                } else {
                    neg -= fl;
                }
            }
        }
        pos as usize <= self.k && neg as usize <= self.k
    }

    fn assign(&mut self, i: usize, left: usize, f: &mut impl FnMut(&LocalDiagram)) {
        let nb = self.ends.len();
        if i == nb {
            debug_assert_eq!(left, 0);
            self.sources(f);
            return;
        }
        let after = nb - i - 1;
        let (lo, hi) = self.ends[i];
        let max_c = left - after;
        let min_c = if after == 0 { left } else { 1 };
        self.pending[lo] -= 1;
        self.pending[hi] -= 1;
        for c in min_c..=max_c {
            for fw in 0..=c {
                let bw = c - fw;
                let net = fw as i32 - bw as i32;
                self.fwd[i] = fw as u8;
                self.bwd[i] = bw as u8;
                self.flow[lo] += net;
                self.flow[hi] -= net;
                if self.closed_excess_ok() {
                    self.assign(i + 1, left - c, f);
                }
                self.flow[lo] -= net;
                self.flow[hi] += net;
            }
        }
        self.pending[lo] += 1;
        self.pending[hi] += 1;
    }

    fn sources(&mut self, f: &mut impl FnMut(&LocalDiagram)) {
        let forced: i32 = self.flow.iter().filter(|&&x| x > 0).sum();
        if forced as usize > self.k {
            return;
        }
        let spare = self.k - forced as usize;
        self.distribute(0, spare, f);
    }

    fn distribute(&mut self, s: usize, left: usize, f: &mut impl FnMut(&LocalDiagram)) {
        let n = self.extra.len();
        if s + 1 == n {
            self.extra[s] = left as u8;
            self.emit(f);
            return;
        }
        for v in 0..=left {
            self.extra[s] = v as u8;
            self.distribute(s + 1, left - v, f);
        }
    }

    fn emit(&mut self, f: &mut impl FnMut(&LocalDiagram)) {
        let d = &mut self.scratch;
        d.events.clear();
        d.nu = self.nu;
        d.displacement = [0; MAX_DIM];
        for (i, &(lo, hi)) in self.ends.iter().enumerate() {
            let axis = self.animal.bonds[i].axis as usize;
            for _ in 0..self.fwd[i] {
                d.events.push(LocalEvent { kind: EventKind::Hop, a: lo as u8, b: hi as u8 });
            }
            for _ in 0..self.bwd[i] {
                d.events.push(LocalEvent { kind: EventKind::Hop, a: hi as u8, b: lo as u8 });
            }
            d.displacement[axis] += self.fwd[i] as i32 - self.bwd[i] as i32;
        }
        for s in 0..self.extra.len() {
            let fl = self.flow[s];
            let creates = fl.max(0) as u8 + self.extra[s];
            let annihilates = (-fl).max(0) as u8 + self.extra[s];
            for _ in 0..creates {
                d.events.push(LocalEvent { kind: EventKind::Create, a: s as u8, b: 0 });
            }
            for _ in 0..annihilates {
                d.events.push(LocalEvent { kind: EventKind::Annihilate, a: s as u8, b: 0 });
            }
        }
        d.finish();
        f(d);
    }
}

fn to_public(animal: &Animal, local: &LocalDiagram, multiplicity: u64) -> Diagram {
    let site = |i: u8| animal.sites[i as usize];
    let mut events: Vec<Event> = local
        .events
        .iter()
        .map(|e| match e.kind {
            EventKind::Create => Event::create(site(e.a)),
            EventKind::Annihilate => Event::annihilate(site(e.a)),
            EventKind::Hop => Event { kind: EventKind::Hop, site: site(e.a), target: Some(site(e.b)) },
        })
        .collect();
    events.sort();
    let creates = events.iter().filter(|e| e.kind == EventKind::Create).count();
    Diagram { events, k: creates, nu: local.nu, multiplicity }
}

fn check_args(k: usize, nu: usize, d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidDimension(d));
    }
    if 2 * k + nu == 0 {
        return Err(Error::InvalidOrder { order: 0, min: 1 });
    }
    Ok(())
}

/// Connected balanced diagrams with `k` source pairs and `nu` hops, one per
/// class under translations and the full point group.
pub fn enumerate_diagrams(k: usize, nu: usize, d: usize) -> Result<Vec<Diagram>> {
    enumerate_diagrams_with(k, nu, d, Symmetry::Cubic)
}

/// As [`enumerate_diagrams`] with an explicit symmetry reduction.
pub fn enumerate_diagrams_with(k: usize, nu: usize, d: usize, symmetry: Symmetry) -> Result<Vec<Diagram>> {
    check_args(k, nu, d)?;
    let mut out = Vec::new();
    if nu == 0 {
        let animal = Animal::single_site(d)?;
        for_each_diagram_on(&animal, k, 0, |ld| out.push(to_public(&animal, ld, 1)));
        return Ok(out);
    }
    for level in lattice::enumerate_animals(d, nu, symmetry)? {
        for animal in &level {
            for_each_diagram_on(animal, k, nu, |ld| out.push(to_public(animal, ld, animal.orbit)));
        }
    }
    Ok(out)
}

const FLAG_RETURN: u8 = 1;
const FLAG_INVALID: u8 = 2;

/// Reusable scratch space for the subset recursion.
#[derive(Default)]
pub struct Evaluator {
    nsites: usize,
    dev: Vec<i8>,
    base: Vec<f64>,
    net: Vec<i32>,
    flags: Vec<u8>,
    x: Vec<f64>,
    energy: Vec<f64>,
    returning: Vec<usize>,
}

impl Evaluator {
    pub fn new() -> Self {
        Evaluator::default()
    }

    /// Occupation deviations, energy-denominator parts and flags per subset.
    fn prepare(&mut self, d: &LocalDiagram, g: u32) {
        let n = d.events.len();
        let size = 1usize << n;
        let ns = d.nsites;
        self.nsites = ns;
        self.dev.clear();
        self.dev.resize(size * ns, 0);
        self.base.clear();
        self.base.resize(size, 0.0);
        self.net.clear();
        self.net.resize(size, 0);
        self.flags.clear();
        self.flags.resize(size, 0);
        let g = g as i32;
        let two_g_minus_one = (2 * g - 1) as f64;
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let prev = mask & (mask - 1);
            let (head, tail) = self.dev.split_at_mut(mask * ns);
            let cur = &mut tail[..ns];
            cur.copy_from_slice(&head[prev * ns..prev * ns + ns]);
            apply_event(cur, &d.events[low], 1);
            let mut base = 0.0;
            let mut net = 0;
            let mut flag = FLAG_RETURN;
            for &dv in cur.iter() {
                if dv != 0 {
                    flag &= !FLAG_RETURN;
                    let dv = dv as i32;
                    if g + dv < 0 {
                        flag |= FLAG_INVALID;
                    }
                    let df = dv as f64;
                    base -= 0.5 * (df * two_g_minus_one + df * df);
                    net += dv;
                }
            }
            self.base[mask] = base;
            self.net[mask] = net;
            self.flags[mask] = flag;
        }
    }

    /// Matrix element in the basis rescaled by `sqrt(n!)` per site, where
    /// `b^dagger` carries `n + 1` and `b` carries 1. Closed paths pick up the
    /// same product as with `sqrt` factors, and every factor is an exact
    /// integer. Annihilation from an empty site leads to an invalid subset.
    #[inline]
    fn amplitude(&self, e: &LocalEvent, prev: usize, g: i32) -> f64 {
        let dev = &self.dev[prev * self.nsites..prev * self.nsites + self.nsites];
        let occ = |s: u8| (g + dev[s as usize] as i32) as f64;
        match e.kind {
            EventKind::Create => occ(e.a) + 1.0,
            EventKind::Annihilate => 1.0,
            EventKind::Hop => occ(e.b) + 1.0,
        }
    }

    /// Multilinear energy coefficient of the full event set, all couplings 1.
    fn run(&mut self, d: &LocalDiagram, g: u32, mu: f64) -> f64 {
        let n = d.events.len();
        let size = 1usize << n;
        let gi = g as i32;
        self.x.clear();
        self.x.resize(size, 0.0);
        self.energy.clear();
        self.energy.resize(size, 0.0);
        self.returning.clear();
        self.x[0] = 1.0;
        for mask in 1..size {
            let flag = self.flags[mask];
            if flag & FLAG_INVALID != 0 {
                continue;
            }
            let mut acc = 0.0;
            let mut bits = mask;
            while bits != 0 {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let prev = mask ^ (1 << e);
                let xp = self.x[prev];
                if xp != 0.0 {
                    acc += self.amplitude(&d.events[e], prev, gi) * xp;
                }
            }
            if flag & FLAG_RETURN != 0 {
                self.energy[mask] = acc;
                if acc != 0.0 {
                    self.returning.push(mask);
                }
                continue;
            }
            for &t in &self.returning {
                if t & mask == t && t != mask {
                    acc -= self.energy[t] * self.x[mask ^ t];
                }
            }
            let denom = self.base[mask] + mu * self.net[mask] as f64;
            self.x[mask] = acc / denom;
        }
        self.energy[size - 1]
    }

    /// Coefficient of `|eta|^{2k} (J/U)^nu` contributed by one placement of
    /// the diagram, at zero twist, for each chemical potential in `mus`.
    pub fn diagram_values(&mut self, d: &LocalDiagram, g: u32, mus: &[f64], out: &mut [f64]) {
        self.prepare(d, g);
        let sign = if d.nu.is_multiple_of(2) { 1.0 } else { -1.0 };
        for (o, &mu) in out.iter_mut().zip(mus) {
            *o = sign * d.symmetry_factor * self.run(d, g, mu);
        }
    }

    /// Sum over the Kato term's admissible orderings of one block pattern:
    /// orderings of `subset` that do not return to the Mott state before
    /// their last event, weighted by `(E_m - E_i)^{-b_j}`.
    fn block_value(&self, d: &LocalDiagram, g: u32, mu: f64, subset: usize, exps: &[u8]) -> f64 {
        let n = d.events.len();
        let size = 1usize << n;
        let len = subset.count_ones() as usize;
        if len != exps.len() + 1 || self.flags[subset] & FLAG_RETURN == 0 {
            return 0.0;
        }
        let gi = g as i32;
        let mut table = alloc::vec![0.0f64; size];
        table[0] = 1.0;
        for mask in 1..size {
            if mask & !subset != 0 || self.flags[mask] & FLAG_INVALID != 0 {
                continue;
            }
            let pos = mask.count_ones() as usize;
            let factor = if pos == len {
                1.0
            } else if self.flags[mask] & FLAG_RETURN != 0 {
                continue;
            } else {
                let denom = self.base[mask] + mu * self.net[mask] as f64;
                libm::pow(denom, -(exps[pos - 1] as f64))
            };
            let mut acc = 0.0;
            let mut bits = mask;
            while bits != 0 {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let prev = mask ^ (1 << e);
                if table[prev] != 0.0 {
                    acc += self.amplitude(&d.events[e], prev, gi) * table[prev];
                }
            }
            table[mask] = acc * factor;
        }
        table[subset]
    }
}

/// Value of one reduced Kato term on one placement of `diagram`: the sum over
/// all event orderings compatible with the term's projector pattern of the
/// products of bosonic matrix elements, bond phases and energy denominators.
pub fn evaluate_diagram(diagram: &Diagram, term: &KatoTerm, state: &MottState, twist: &TwistSpec) -> Result<Complex64> {
    if diagram.order() != term.order() {
        return Err(Error::OrderMismatch { diagram: diagram.order(), term: term.order() });
    }
    let local = diagram.local()?;
    if local.order() > DEFAULT_MAX_ORDER {
        return Err(Error::Capacity { order: local.order(), max: DEFAULT_MAX_ORDER });
    }
    let mut ev = Evaluator::new();
    ev.prepare(&local, state.g());
    let blocks: Vec<&[u8]> = term.blocks().collect();
    let full = (1usize << local.order()) - 1;
    let mut total = CompensatedSum::new();
    partition_blocks(&ev, &local, state, &blocks, 0, full, 1.0, &mut total);
    let sign = if local.nu % 2 == 0 { 1.0 } else { -1.0 };
    let value = total.value() * term.weight_f64() * term.projector_sign() * sign * local.symmetry_factor;
    Ok(twist.displacement_phase(local.displacement[twist.axis]) * value)
}

#[allow(clippy::too_many_arguments)]
fn partition_blocks(
    ev: &Evaluator,
    d: &LocalDiagram,
    state: &MottState,
    blocks: &[&[u8]],
    i: usize,
    left: usize,
    product: f64,
    total: &mut CompensatedSum,
) {
    if i == blocks.len() {
        if left == 0 {
            total.add(product);
        }
        return;
    }
    let want = blocks[i].len() + 1;
    let rev: Vec<u8> = blocks[i].iter().rev().copied().collect();
    // Iterate over all submasks of `left` with the right size.
    let mut sub = left;
    loop {
        if sub != 0 && sub.count_ones() as usize == want && ev.flags[sub] & FLAG_RETURN != 0 {
            let mu = state.mu_over_u();
            let v = 0.5 * (ev.block_value(d, state.g(), mu, sub, blocks[i]) + ev.block_value(d, state.g(), mu, sub, &rev));
            if v != 0.0 {
                partition_blocks(ev, d, state, blocks, i + 1, left & !sub, product * v, total);
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & left;
    }
}

/// Value of one placement of `diagram` summed over all Kato terms of its
/// order, including the twist phase.
pub fn diagram_coefficient(diagram: &Diagram, state: &MottState, twist: &TwistSpec) -> Result<Complex64> {
    let local = diagram.local()?;
    if local.order() > DEFAULT_MAX_ORDER {
        return Err(Error::Capacity { order: local.order(), max: DEFAULT_MAX_ORDER });
    }
    let mut ev = Evaluator::new();
    let mut out = [0.0];
    ev.diagram_values(&local, state.g(), &[state.mu_over_u()], &mut out);
    Ok(twist.displacement_phase(local.displacement[twist.axis]) * out[0])
}

/// Hop-order expansion `sum_nu gamma_{2k}^{(nu)} (J/U)^nu` of one source
/// coefficient `c_{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingSeries {
    pub k: usize,
    /// `coefficients[nu]` is `gamma_{2k}^{(nu)}`.
    pub coefficients: Vec<Complex64>,
}

impl HoppingSeries {
    pub fn max_order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// Contributions of all diagrams of one `(k, nu)`, binned by the signed
/// particle displacement along the twist axis.
///
/// `gamma(theta) = sum_delta bins[delta] exp(i theta delta)`; the zero-twist
/// value is the plain sum of the bins.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistHistogram {
    pub nu: usize,
    /// Index `delta + nu`.
    pub bins: Vec<CompensatedSum>,
}

impl TwistHistogram {
    pub fn new(nu: usize) -> Self {
        TwistHistogram { nu, bins: alloc::vec![CompensatedSum::new(); 2 * nu + 1] }
    }

    pub fn add(&mut self, delta: i32, value: f64) {
        let idx = (delta + self.nu as i32) as usize;
        self.bins[idx].add(value);
    }

    pub fn merge(&mut self, other: &TwistHistogram) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.merge(b);
        }
    }

    pub fn value_at(&self, theta_over_ell: f64) -> Complex64 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (i, b) in self.bins.iter().enumerate() {
            let delta = i as f64 - self.nu as f64;
            let v = b.value();
            if theta_over_ell == 0.0 || delta == 0.0 {
                re.add(v);
            } else {
                re.add(v * libm::cos(theta_over_ell * delta));
                im.add(v * libm::sin(theta_over_ell * delta));
            }
        }
        Complex64::new(re.value(), im.value())
    }

    pub fn raw_bins(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.value()).collect()
    }

    pub fn from_raw(nu: usize, raw: &[f64]) -> Result<Self> {
        if raw.len() != 2 * nu + 1 {
            return Err(Error::InvalidArgument(alloc::format!("expected {} twist bins, got {}", 2 * nu + 1, raw.len())));
        }
        let mut h = TwistHistogram::new(nu);
        for (b, &v) in h.bins.iter_mut().zip(raw) {
            b.add(v);
        }
        Ok(h)
    }
}

/// Adds one diagram's value to per-state histograms, averaging the twist
/// displacement over the orbit of the point group used for enumeration.
pub fn record_diagram(
    hist: &mut [TwistHistogram],
    values: &[f64],
    local: &LocalDiagram,
    multiplicity: u64,
    d: usize,
    symmetry: Symmetry,
    twist_axis: usize,
) {
    let m = multiplicity as f64;
    for (h, &v) in hist.iter_mut().zip(values) {
        match symmetry {
            Symmetry::Cubic => {
                let w = v * m / (2 * d) as f64;
                for a in 0..d {
                    h.add(local.displacement[a], w);
                    h.add(-local.displacement[a], w);
                }
            }
            Symmetry::FixingAxis(_) | Symmetry::Translations => {
                h.add(local.displacement[twist_axis], v * m);
            }
        }
    }
}

/// Work unit of the kernel: all diagrams of one `(k, nu)` on one animal,
/// evaluated for each state in `states`.
pub fn animal_contribution(
    ev: &mut Evaluator,
    animal: &Animal,
    k: usize,
    nu: usize,
    states: &[MottState],
    d: usize,
    symmetry: Symmetry,
    twist_axis: usize,
) -> (Vec<TwistHistogram>, usize) {
    let g = states.first().map(|s| s.g()).unwrap_or(1);
    let mus: Vec<f64> = states.iter().map(|s| s.mu_over_u()).collect();
    let mut hist: Vec<TwistHistogram> = states.iter().map(|_| TwistHistogram::new(nu)).collect();
    let mut values = alloc::vec![0.0; states.len()];
    let mut count = 0;
    for_each_diagram_on(animal, k, nu, |ld| {
        ev.diagram_values(ld, g, &mus, &mut values);
        record_diagram(&mut hist, &values, ld, animal.orbit, d, symmetry, twist_axis);
        count += 1;
    });
    (hist, count)
}

/// Kernel configuration shared by the sequential and parallel drivers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig {
    pub d: usize,
    pub max_order: usize,
    pub symmetry: Symmetry,
    pub twist_axis: usize,
}

impl KernelConfig {
    pub fn new(d: usize) -> Self {
        KernelConfig { d, max_order: 12, symmetry: Symmetry::Cubic, twist_axis: 0 }
    }

    pub fn check(&self, k: usize, nu: usize) -> Result<()> {
        check_args(k, nu, self.d)?;
        let order = 2 * k + nu;
        let cap = self.max_order.min(DEFAULT_MAX_ORDER);
        if order > cap {
            return Err(Error::Capacity { order, max: cap });
        }
        if self.twist_axis >= self.d {
            return Err(Error::InvalidDimension(self.twist_axis + 1));
        }
        Ok(())
    }
}

/// Sequential reference driver: twist histograms of `gamma_{2k}^{(nu)}` for
/// every state in `states`.
pub fn gamma_histograms(
    k: usize,
    nu: usize,
    states: &[MottState],
    config: &KernelConfig,
    animals: &[Vec<Animal>],
) -> Result<Vec<TwistHistogram>> {
    config.check(k, nu)?;
    if states.is_empty() || states.iter().any(|s| s.g() != states[0].g()) {
        return Err(Error::InvalidArgument(alloc::string::String::from("states must be nonempty and share one filling factor")));
    }
    let mut ev = Evaluator::new();
    let mut hist: Vec<TwistHistogram> = states.iter().map(|_| TwistHistogram::new(nu)).collect();
    let mut push = |(h, _): (Vec<TwistHistogram>, usize)| {
        for (a, b) in hist.iter_mut().zip(&h) {
            a.merge(b);
        }
    };
    if nu == 0 {
        let single = Animal::single_site(config.d)?;
        push(animal_contribution(&mut ev, &single, k, 0, states, config.d, config.symmetry, config.twist_axis));
    } else {
        if animals.len() < nu {
            return Err(Error::InvalidArgument(alloc::format!("animal table holds {} levels, need {nu}", animals.len())));
        }
        for level in &animals[..nu] {
            for animal in level {
                push(animal_contribution(&mut ev, animal, k, nu, states, config.d, config.symmetry, config.twist_axis));
            }
        }
    }
    Ok(hist)
}

/// `gamma_{2k}^{(nu)}` per lattice site: the coefficient of
/// `|eta|^{2k} (J/U)^nu` in the ground-state energy per site.
pub fn gamma_coefficient(k: usize, nu: usize, state: &MottState, d: usize, twist: &TwistSpec) -> Result<Complex64> {
    let mut config = KernelConfig::new(d);
    config.twist_axis = twist.axis;
    config.check(k, nu)?;
    let animals = lattice::enumerate_animals(d, nu, config.symmetry)?;
    let h = gamma_histograms(k, nu, core::slice::from_ref(state), &config, &animals)?;
    Ok(h[0].value_at(twist.theta_over_ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kato::reduce_to_kato_terms;

    fn state(mu: f64) -> MottState {
        MottState::new(1, mu).unwrap()
    }

    #[test]
    fn mott_state_window() {
        assert!(MottState::new(1, 0.5).is_ok());
        assert!(MottState::new(1, 1.0).is_err());
        assert!(MottState::new(1, 0.0).is_err());
        assert!(MottState::new(0, 0.5).is_err());
        assert!(MottState::new(2, 1.5).is_ok());
    }

    #[test]
    fn single_site_second_order() {
        let diagrams = enumerate_diagrams(1, 0, 2).unwrap();
        assert_eq!(diagrams.len(), 1);
        assert_eq!(diagrams[0].multiplicity(), 1);
        let terms = reduce_to_kato_terms(2).unwrap();
        let v = evaluate_diagram(&diagrams[0], &terms[0], &state(0.5), &TwistSpec::NONE).unwrap();
        assert!((v.re + 6.0).abs() < 1e-14 && v.im == 0.0);
        let g = gamma_coefficient(1, 0, &state(0.5), 2, &TwistSpec::NONE).unwrap();
        assert!((g.re + 6.0).abs() < 1e-14);
    }

    #[test]
    fn single_hop_has_no_diagrams() {
        assert!(enumerate_diagrams(0, 1, 2).unwrap().is_empty());
        let g = gamma_coefficient(0, 1, &state(0.4), 2, &TwistSpec::NONE).unwrap();
        assert_eq!(g, Complex64::new(0.0, 0.0));
        assert_eq!(enumerate_diagrams(0, 0, 2), Err(Error::InvalidOrder { order: 0, min: 1 }));
    }

    #[test]
    fn one_hop_source_chain_embeddings() {
        let ds = enumerate_diagrams(1, 1, 2).unwrap();
        let total: u64 = ds.iter().map(|d| d.multiplicity()).sum();
        assert_eq!(total, 4);
        for d in &ds {
            assert_eq!(d.events().iter().filter(|e| e.kind == EventKind::Hop).count(), 1);
        }
    }

    #[test]
    fn hop_pair_second_order() {
        let o = SiteOffset::origin(2).unwrap();
        let x = o.step(0, 1);
        let d = Diagram::new(alloc::vec![Event::hop(o, x).unwrap(), Event::hop(x, o).unwrap()], 1).unwrap();
        let terms = reduce_to_kato_terms(2).unwrap();
        let v = evaluate_diagram(&d, &terms[0], &state(0.37), &TwistSpec::NONE).unwrap();
        assert!((v.re + 4.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let d = &enumerate_diagrams(1, 0, 1).unwrap()[0];
        let terms = reduce_to_kato_terms(3).unwrap();
        assert!(matches!(evaluate_diagram(d, &terms[0], &state(0.5), &TwistSpec::NONE), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn unbalanced_diagram_is_rejected() {
        let o = SiteOffset::origin(1).unwrap();
        let r = Diagram::new(alloc::vec![Event::hop(o, o.step(0, 1)).unwrap()], 1);
        assert!(r.is_err());
    }

    #[test]
    fn capacity_guard() {
        let cfg = KernelConfig { max_order: 6, ..KernelConfig::new(2) };
        assert_eq!(cfg.check(1, 5), Err(Error::Capacity { order: 7, max: 6 }));
    }

    #[test]
    fn kato_route_matches_subset_recursion() {
        // Summed over all diagrams the two evaluation routes agree.
        let st = state(0.42);
        for (k, nu, d) in [(1, 2, 2), (1, 3, 1), (2, 1, 2), (0, 4, 2), (1, 4, 1), (2, 2, 1), (3, 0, 2)] {
            let terms = reduce_to_kato_terms(2 * k + nu).unwrap();
            let mut by_terms = CompensatedSum::new();
            let mut by_recursion = CompensatedSum::new();
            for dg in enumerate_diagrams(k, nu, d).unwrap() {
                let m = dg.multiplicity() as f64;
                for t in &terms {
                    by_terms.add(m * evaluate_diagram(&dg, t, &st, &TwistSpec::NONE).unwrap().re);
                }
                by_recursion.add(m * diagram_coefficient(&dg, &st, &TwistSpec::NONE).unwrap().re);
            }
            let (a, b) = (by_terms.value(), by_recursion.value());
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "k={k} nu={nu} d={d}: {a} vs {b}");
        }
    }
}
