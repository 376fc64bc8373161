//! Kato's trace formula and its reduction to matrix-element terms.
//!
//! The `n`-th order energy correction of a nondegenerate level `|m>` is the
//! trace of `S^{a_1} V S^{a_2} V ... V S^{a_{n+1}}` summed over all exponent
//! tuples `a` of `n+1` nonnegative integers adding up to `n-1`, where
//! `S^0 = -|m><m|` and `S^a = sum_{i != m} |i><i| / (E_m - E_i)^a` for `a > 0`.
//!
//! Cyclic rotation moves one `S^0` to the ends of the trace, turning every
//! nonvanishing trace into a matrix element
//! `<m| V S^{b_1} V ... S^{b_{n-1}} V |m>`. Each remaining zero exponent
//! splits that element into a product of blocks `<m| V S.. V |m>` with a
//! factor `-1`. Products commute and blocks are identified with their
//! reversal (their reversal-symmetrised values are used on evaluation), so a
//! term is a multiset of blocks with an integer weight.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::{Error, Result};

/// Largest order accepted by the enumerators.
pub const MAX_KATO_ORDER: usize = 16;

/// Exponents `(a_1, .., a_{n+1})` of one trace in Kato's formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlphaSequence(pub Vec<u8>);

impl AlphaSequence {
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }
}

/// Visits every composition of `total` into `parts` nonnegative parts in
/// lexicographic order.
fn for_each_composition(total: usize, parts: usize, mut f: impl FnMut(&[u8])) {
    let mut buf = alloc::vec![0u8; parts];
    fn rec(buf: &mut [u8], pos: usize, left: usize, f: &mut impl FnMut(&[u8])) {
        if pos + 1 == buf.len() {
            buf[pos] = left as u8;
            f(buf);
            return;
        }
        for v in 0..=left {
            buf[pos] = v as u8;
            rec(buf, pos + 1, left - v, f);
        }
    }
    rec(&mut buf, 0, total, &mut f);
}

fn check_order(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::InvalidOrder { order: n, min })
    } else if n > MAX_KATO_ORDER {
        Err(Error::Capacity { order: n, max: MAX_KATO_ORDER })
    } else {
        Ok(())
    }
}

/// The index set of order `n`: all compositions of `n-1` into `n+1` parts.
pub fn enumerate_alpha_sequences(n: usize) -> Result<Vec<AlphaSequence>> {
    check_order(n, 1)?;
    let mut out = Vec::new();
    for_each_composition(n - 1, n + 1, |a| out.push(AlphaSequence(a.to_vec())));
    Ok(out)
}

/// Binomial coefficient, exact for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// One reduced matrix-element term of Kato's formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatoTerm {
    order: usize,
    inner: Vec<u8>,
    weight: Ratio<i64>,
}

impl KatoTerm {
    pub fn new(order: usize, inner: Vec<u8>, weight: Ratio<i64>) -> Result<Self> {
        if order < 2 || inner.len() + 1 != order {
            return Err(Error::InvalidOrder { order, min: 2 });
        }
        if inner.iter().map(|&a| a as usize).sum::<usize>() != order - 1 {
            return Err(Error::InvalidArgument(String::from("Kato exponents must add up to order - 1")));
        }
        if weight == Ratio::from_integer(0) {
            return Err(Error::InvalidArgument(String::from("Kato term weight is zero")));
        }
        Ok(KatoTerm { order, inner, weight })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The `n-1` exponents between successive perturbations; zeros mark
    /// `-|m><m|` insertions.
    pub fn inner_alphas(&self) -> &[u8] {
        &self.inner
    }

    pub fn weight(&self) -> Ratio<i64> {
        self.weight
    }

    pub fn weight_f64(&self) -> f64 {
        *self.weight.numer() as f64 / *self.weight.denom() as f64
    }

    /// Positions (zero-based, into `inner_alphas`) of projector insertions.
    pub fn projector_pattern(&self) -> Vec<usize> {
        self.inner.iter().enumerate().filter(|(_, &a)| a == 0).map(|(i, _)| i).collect()
    }

    /// The blocks `<m| V S^{b_1} .. S^{b_j} V |m>` whose product forms this
    /// term, each given by its positive exponents.
    pub fn blocks(&self) -> impl Iterator<Item = &[u8]> {
        self.inner.split(|&a| a == 0)
    }

    pub fn block_count(&self) -> usize {
        self.inner.iter().filter(|&&a| a == 0).count() + 1
    }

    /// `(-1)^(number of projector insertions)`.
    pub fn projector_sign(&self) -> f64 {
        if self.block_count() % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Rewrites one trace as a matrix element; `None` if the trace vanishes.
///
/// The trace is rotated at the first inner projector when both end
/// exponents are positive, which contributes the sign of that projector.
fn trace_to_element(alpha: &[u8]) -> Option<(Vec<u8>, i64)> {
    let n = alpha.len() - 1;
    let (first, last) = (alpha[0], alpha[n]);
    let inner = &alpha[1..n];
    match (first, last) {
        (0, 0) => Some((inner.to_vec(), 1)),
        (a, b) if a > 0 && b > 0 => {
            let j = inner.iter().position(|&x| x == 0)?;
            let mut beta = Vec::with_capacity(n - 1);
            beta.extend_from_slice(&inner[j + 1..]);
            beta.push(a + b);
            beta.extend_from_slice(&inner[..j]);
            Some((beta, -1))
        }
        _ => None,
    }
}

type BlockKey = Vec<Vec<u8>>;

fn canonical_blocks(beta: &[u8]) -> BlockKey {
    let mut blocks: BlockKey = beta
        .split(|&a| a == 0)
        .map(|b| {
            let rev: Vec<u8> = b.iter().rev().copied().collect();
            if rev.as_slice() < b {
                rev
            } else {
                b.to_vec()
            }
        })
        .collect();
    blocks.sort();
    blocks
}

/// Sum of the signs of all nonvanishing traces of order `n`.
pub fn raw_weight_sum(n: usize) -> Result<Ratio<i64>> {
    check_order(n, 2)?;
    let mut total = 0i64;
    for_each_composition(n - 1, n + 1, |a| {
        if let Some((_, sign)) = trace_to_element(a) {
            total += sign;
        }
    });
    Ok(Ratio::from_integer(total))
}

/// The minimal list of distinct matrix-element terms of order `n` with
/// nonzero combined weight.
///
/// Terms are ordered by block count, then lexicographically by their
/// canonical block lists.
pub fn reduce_to_kato_terms(n: usize) -> Result<Vec<KatoTerm>> {
    check_order(n, 2)?;
    let mut acc: BTreeMap<(usize, BlockKey), i64> = BTreeMap::new();
    for_each_composition(n - 1, n + 1, |a| {
        if let Some((beta, sign)) = trace_to_element(a) {
            let key = canonical_blocks(&beta);
            *acc.entry((key.len(), key)).or_insert(0) += sign;
        }
    });
    let mut terms = Vec::new();
    for ((_, blocks), w) in acc {
        if w == 0 {
            continue;
        }
        let mut inner = Vec::with_capacity(n - 1);
        for (i, b) in blocks.iter().enumerate() {
            if i > 0 {
                inner.push(0);
            }
            inner.extend_from_slice(b);
        }
        terms.push(KatoTerm { order: n, inner, weight: Ratio::from_integer(w) });
    }
    Ok(terms)
}

/// A dense perturbation problem: diagonal `h0`, Hermitian `v` in row-major
/// order, reference level `m`.
#[derive(Clone, Debug)]
pub struct DenseProblem<'a> {
    pub h0: &'a [f64],
    pub v: &'a [Complex64],
    pub m: usize,
}

impl DenseProblem<'_> {
    fn dim(&self) -> usize {
        self.h0.len()
    }

    /// `<m| V S^{b_1} V .. S^{b_j} V |m>` for positive exponents `b`.
    pub fn block_element(&self, exps: &[u8]) -> Complex64 {
        let n = self.dim();
        let e_m = self.h0[self.m];
        let mut x: Vec<Complex64> = (0..n).map(|i| self.v[i * n + self.m]).collect();
        for &a in exps {
            for (i, xi) in x.iter_mut().enumerate() {
                if i == self.m {
                    *xi = Complex64::new(0.0, 0.0);
                } else {
                    *xi /= libm::pow(e_m - self.h0[i], a as f64);
                }
            }
            x = (0..n).map(|i| (0..n).map(|j| self.v[i * n + j] * x[j]).sum()).collect();
        }
        x[self.m]
    }

    /// Reversal-symmetrised block value.
    pub fn symmetric_block(&self, exps: &[u8]) -> Complex64 {
        let rev: Vec<u8> = exps.iter().rev().copied().collect();
        (self.block_element(exps) + self.block_element(&rev)) * 0.5
    }

    pub fn evaluate_term(&self, term: &KatoTerm) -> Complex64 {
        let mut value = Complex64::new(term.weight_f64() * term.projector_sign(), 0.0);
        for b in term.blocks() {
            value *= self.symmetric_block(b);
        }
        value
    }

    /// Order-`n` energy correction from a reduced term list.
    pub fn evaluate(&self, terms: &[KatoTerm]) -> Complex64 {
        terms.iter().map(|t| self.evaluate_term(t)).sum()
    }
}

const FORMAT_HEADER: &str = "kato-terms v1";

/// Serialises a term list:
///
/// ```text
/// kato-terms v1
/// order 3
/// count 2
/// 1/1 1,1 -
/// -1/1 0,2 0
/// ```
///
/// Each term line holds the weight, the exponent sequence and the projector
/// positions (`-` when there are none).
pub fn format_terms(order: usize, terms: &[KatoTerm]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{FORMAT_HEADER}");
    let _ = writeln!(s, "order {order}");
    let _ = writeln!(s, "count {}", terms.len());
    for t in terms {
        let _ = write!(s, "{}/{} ", t.weight.numer(), t.weight.denom());
        join_into(&mut s, t.inner.iter());
        s.push(' ');
        let p = t.projector_pattern();
        if p.is_empty() {
            s.push('-');
        } else {
            join_into(&mut s, p.iter());
        }
        s.push('\n');
    }
    s
}

fn join_into<T: core::fmt::Display>(s: &mut String, items: impl Iterator<Item = T>) {
    for (i, v) in items.enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse { line, message: String::from(message) }
}

fn parse_list<T: core::str::FromStr>(field: &str, line: usize) -> Result<Vec<T>> {
    if field == "-" {
        return Ok(Vec::new());
    }
    field.split(',').map(|x| x.parse().map_err(|_| parse_err(line, "bad list entry"))).collect()
}

/// Parses the output of [`format_terms`], checking every declared field.
pub fn parse_terms(text: &str) -> Result<(usize, Vec<KatoTerm>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| lines.next().ok_or_else(|| parse_err(0, what));
    let (l, header) = next("missing header")?;
    if header != FORMAT_HEADER {
        return Err(parse_err(l, "unknown header"));
    }
    let (l, order_line) = next("missing order")?;
    let order: usize =
        order_line.strip_prefix("order ").and_then(|v| v.parse().ok()).ok_or_else(|| parse_err(l, "bad order line"))?;
    let (l, count_line) = next("missing count")?;
    let count: usize =
        count_line.strip_prefix("count ").and_then(|v| v.parse().ok()).ok_or_else(|| parse_err(l, "bad count line"))?;
    let mut terms = Vec::with_capacity(count);
    for (l, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (w, ex, pr) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(w), Some(e), Some(p), None) => (w, e, p),
            _ => return Err(parse_err(l, "expected three fields")),
        };
        let (num, den) = w.split_once('/').ok_or_else(|| parse_err(l, "bad weight"))?;
        let num: i64 = num.parse().map_err(|_| parse_err(l, "bad weight numerator"))?;
        let den: i64 = den.parse().map_err(|_| parse_err(l, "bad weight denominator"))?;
        if den == 0 {
            return Err(parse_err(l, "zero denominator"));
        }
        let inner: Vec<u8> = parse_list(ex, l)?;
        let projectors: Vec<usize> = parse_list(pr, l)?;
        let term = KatoTerm::new(order, inner, Ratio::new(num, den)).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Parse { line: l, message: m },
            _ => parse_err(l, "inconsistent term"),
        })?;
        if term.projector_pattern() != projectors {
            return Err(parse_err(l, "projector pattern does not match exponents"));
        }
        terms.push(term);
    }
    if terms.len() != count {
        return Err(parse_err(0, "term count does not match header"));
    }
    Ok((order, terms))
}
