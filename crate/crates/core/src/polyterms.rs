//! The polynomial basis: enumeration of monomials over the design columns,
//! expansion of a design matrix into polynomial features, term-count bounds,
//! and random column deletion.
//!
//! Indicator (dummy) columns are never raised to a power above one, and two
//! indicators from the same categorical column never appear in the same
//! monomial: both would only reproduce an existing column or the zero
//! vector.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::DummyGroups;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::par;

/// Product of design columns raised to positive integer powers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monomial {
    /// `(column, exponent)` pairs sorted by column, exponents >= 1.
    factors: Vec<(usize, u32)>,
}

impl Monomial {
    /// Builds a monomial from `(column, exponent)` factors; zero exponents
    /// are dropped and repeated columns merged.
    pub fn new(factors: impl IntoIterator<Item = (usize, u32)>) -> Result<Self> {
        let mut f: Vec<(usize, u32)> = factors.into_iter().filter(|&(_, e)| e > 0).collect();
        f.sort_unstable();
        let mut merged: Vec<(usize, u32)> = Vec::with_capacity(f.len());
        for (c, e) in f {
            match merged.last_mut() {
                Some((lc, le)) if *lc == c => *le += e,
                _ => merged.push((c, e)),
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidArgument("monomial must have degree >= 1".into()));
        }
        Ok(Self { factors: merged })
    }

    pub fn linear(column: usize) -> Self {
        Self {
            factors: vec![(column, 1)],
        }
    }

    pub fn factors(&self) -> &[(usize, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    /// Number of distinct columns involved.
    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn exponent(&self, column: usize) -> u32 {
        self.factors.iter().find(|&&(c, _)| c == column).map_or(0, |&(_, e)| e)
    }

    pub fn max_column(&self) -> usize {
        self.factors.last().map_or(0, |&(c, _)| c)
    }

    #[inline]
    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut acc = 1.0;
        for &(c, e) in &self.factors {
            acc *= powi(row[c], e);
        }
        acc
    }

    /// Whether the monomial respects the indicator rules for `groups`.
    pub fn respects(&self, groups: &DummyGroups) -> bool {
        let width = self.max_column() + 1;
        let table = groups.group_table(width);
        let mut seen: Vec<usize> = Vec::new();
        for &(c, e) in &self.factors {
            if let Some(g) = table[c] {
                if e > 1 || seen.contains(&g) {
                    return false;
                }
                seen.push(g);
            }
        }
        true
    }
}

/// Graded order: lower total degree first, then larger exponents on
/// earlier columns first (so `u^2 < u*v < v^2`).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let mut a = self.factors.iter().peekable();
            let mut b = other.factors.iter().peekable();
            loop {
                match (a.peek(), b.peek()) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(&&(ca, ea)), Some(&&(cb, eb))) => {
                        if ca != cb {
                            // the one with the earlier column has a positive
                            // exponent where the other has zero
                            return ca.cmp(&cb);
                        }
                        if ea != eb {
                            return eb.cmp(&ea);
                        }
                        a.next();
                        b.next();
                    }
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
pub(crate) fn powi(x: f64, e: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Polynomial degree and the cap on the total degree of interaction terms
/// (monomials with two or more distinct columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolySpec {
    degree: u32,
    max_interact_degree: u32,
}

impl PolySpec {
    pub fn new(degree: u32, max_interact_degree: u32) -> Result<Self> {
        if degree == 0 || max_interact_degree == 0 || max_interact_degree > degree {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= max_interact_degree ({max_interact_degree}) <= degree ({degree})"
            )));
        }
        Ok(Self {
            degree,
            max_interact_degree,
        })
    }

    /// Full degree-`d` basis, no separate interaction cap.
    pub fn full(degree: u32) -> Result<Self> {
        Self::new(degree, degree)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn max_interact_degree(&self) -> u32 {
        self.max_interact_degree
    }
}

/// Ordered, duplicate-free polynomial basis together with the design it was
/// enumerated for.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TermSet {
    monomials: Vec<Monomial>,
    width: usize,
    groups: DummyGroups,
    spec: PolySpec,
}

impl TermSet {
    /// Assembles a term set from explicit monomials; they are validated
    /// against the width and indicator rules and put in graded order.
    pub fn from_monomials(
        mut monomials: Vec<Monomial>,
        width: usize,
        groups: DummyGroups,
        spec: PolySpec,
    ) -> Result<Self> {
        monomials.sort();
        if monomials.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate monomial".into()));
        }
        for m in &monomials {
            if m.max_column() >= width {
                return Err(Error::Dimension(format!(
                    "monomial uses column {} of a width-{} design",
                    m.max_column(),
                    width
                )));
            }
            if !m.respects(&groups) {
                return Err(Error::InvalidArgument(
                    "monomial powers an indicator or multiplies indicators of one group".into(),
                ));
            }
        }
        Ok(Self {
            monomials,
            width,
            groups,
            spec,
        })
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Design width the terms were enumerated for.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn groups(&self) -> &DummyGroups {
        &self.groups
    }

    pub fn spec(&self) -> PolySpec {
        self.spec
    }

    /// Keeps only the terms at the given positions (in their existing order).
    pub fn subset(&self, positions: &[usize]) -> TermSet {
        let mut pos = positions.to_vec();
        pos.sort_unstable();
        pos.dedup();
        TermSet {
            monomials: pos.iter().map(|&i| self.monomials[i].clone()).collect(),
            width: self.width,
            groups: self.groups.clone(),
            spec: self.spec,
        }
    }
}

/// Enumerates every monomial of total degree `1..=degree` over `m` design
/// columns, skipping powers of indicators, products of indicators from one
/// group, and interaction terms above the interaction cap. The intercept is
/// not a term.
pub fn enumerate_terms(m: usize, groups: &DummyGroups, spec: PolySpec) -> Result<TermSet> {
    if m == 0 {
        return Err(Error::InvalidArgument("design width must be >= 1".into()));
    }
    let table = groups.group_table(m);
    let mut out = Vec::new();
    let mut exps = vec![0u32; m];
    let mut used_groups: Vec<usize> = Vec::new();
    for total in 1..=spec.degree {
        fill(0, total, &table, spec, total, &mut exps, &mut used_groups, &mut out);
    }
    Ok(TermSet {
        monomials: out,
        width: m,
        groups: groups.clone(),
        spec,
    })
}

// Depth-first over columns, assigning the largest exponent first so output
// comes out in graded order.
#[allow(clippy::too_many_arguments)]
fn fill(
    col: usize,
    remaining: u32,
    table: &[Option<usize>],
    spec: PolySpec,
    total: u32,
    exps: &mut [u32],
    used_groups: &mut Vec<usize>,
    out: &mut Vec<Monomial>,
) {
    if remaining == 0 {
        let factors: Vec<(usize, u32)> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(c, &e)| (c, e))
            .collect();
        if factors.len() >= 2 && total > spec.max_interact_degree {
            return;
        }
        out.push(Monomial { factors });
        return;
    }
    if col == exps.len() {
        return;
    }
    let max_e = match table[col] {
        Some(g) if used_groups.contains(&g) => 0,
        Some(_) => remaining.min(1),
        None => remaining,
    };
    for e in (0..=max_e).rev() {
        exps[col] = e;
        let pushed = match table[col] {
            Some(g) if e > 0 => {
                used_groups.push(g);
                true
            }
            _ => false,
        };
        fill(col + 1, remaining - e, table, spec, total, exps, used_groups, out);
        if pushed {
            used_groups.pop();
        }
    }
    exps[col] = 0;
}

/// Recurrence bound on the number of polynomial columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermBound {
    pub value: u64,
    /// The recurrence overflowed and `value` is `u64::MAX`.
    pub saturated: bool,
}

/// `B(1) = p`, `B(d+1) = (p+1) B(d)`; an upper bound on the all-numeric term
/// count at degree `d`.
pub fn count_terms_bound(p: u64, d: u32) -> Result<TermBound> {
    if p == 0 || d == 0 {
        return Err(Error::InvalidArgument("need p >= 1 and d >= 1".into()));
    }
    let mut b = p;
    for _ in 1..d {
        match b.checked_mul(p + 1) {
            Some(v) => b = v,
            None => {
                return Ok(TermBound {
                    value: u64::MAX,
                    saturated: true,
                })
            }
        }
    }
    Ok(TermBound {
        value: b,
        saturated: false,
    })
}

/// Default cap on `rows x columns` of an expanded matrix.
pub const DEFAULT_CELL_BUDGET: u128 = 200_000_000;

/// Expands a design into polynomial features under the default cell budget.
pub fn expand(design: &Matrix, terms: &TermSet) -> Result<Matrix> {
    expand_with_budget(design, terms, DEFAULT_CELL_BUDGET)
}

pub fn expand_with_budget(design: &Matrix, terms: &TermSet, budget: u128) -> Result<Matrix> {
    if design.cols() != terms.width() {
        return Err(Error::Dimension(format!(
            "design has {} columns, terms were built for {}",
            design.cols(),
            terms.width()
        )));
    }
    let n = design.rows();
    let l = terms.len();
    let cells = n as u128 * l as u128;
    if cells > budget {
        return Err(Error::MemoryBudget { cells, budget });
    }
    const BLOCK: usize = 512;
    let blocks = n.div_ceil(BLOCK);
    let parts = par::map_range(blocks, |b| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n);
        let mut chunk = Vec::with_capacity((hi - lo) * l);
        for i in lo..hi {
            let row = design.row(i);
            chunk.extend(terms.monomials().iter().map(|m| m.eval(row)));
        }
        chunk
    });
    Matrix::new(n, l, parts.concat())
}

/// Keeps `ceil(keep_fraction * |terms|)` terms: every degree-1 term plus a
/// seeded uniform draw among the higher-degree ones.
pub fn drop_random_columns(terms: &TermSet, keep_fraction: f64, seed: u64) -> Result<TermSet> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "keep_fraction must lie in (0, 1], got {keep_fraction}"
        )));
    }
    let total = terms.len();
    let target = libm::ceil(keep_fraction * total as f64) as usize;
    let (linear, higher): (Vec<usize>, Vec<usize>) = (0..total).partition(|&i| terms.monomials()[i].degree() == 1);
    let extra = target.saturating_sub(linear.len()).min(higher.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, higher.len(), extra);
    let mut keep = linear;
    keep.extend(picked.iter().map(|i| higher[i]));
    Ok(terms.subset(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DummyGroup;
    use alloc::string::String;

    fn mono(f: &[(usize, u32)]) -> Monomial {
        Monomial::new(f.iter().copied()).unwrap()
    }

    #[test]
    fn two_numeric_degree_two() {
        let t = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(2).unwrap()).unwrap();
        let want = [
            mono(&[(0, 1)]),
            mono(&[(1, 1)]),
            mono(&[(0, 2)]),
            mono(&[(0, 1), (1, 1)]),
            mono(&[(1, 2)]),
        ];
        assert_eq!(t.monomials(), &want[..]);
    }

    #[test]
    fn single_linear_term() {
        let t = enumerate_terms(1, &DummyGroups::all_numeric(1), PolySpec::full(1).unwrap()).unwrap();
        assert_eq!(t.monomials(), &[Monomial::linear(0)]);
    }

    #[test]
    fn dummies_are_never_powered_or_paired() {
        let groups = DummyGroups {
            groups: vec![DummyGroup {
                source: String::from("c"),
                columns: vec![0, 1],
            }],
            numeric_indices: vec![],
        };
        let t = enumerate_terms(2, &groups, PolySpec::full(2).unwrap()).unwrap();
        assert_eq!(t.monomials(), &[Monomial::linear(0), Monomial::linear(1)]);
    }

    #[test]
    fn interaction_cap_excludes_high_degree_products() {
        let groups = DummyGroups {
            groups: vec![DummyGroup {
                source: String::from("c"),
                columns: vec![1],
            }],
            numeric_indices: vec![0],
        };
        let t = enumerate_terms(2, &groups, PolySpec::new(3, 2).unwrap()).unwrap();
        let want = [
            mono(&[(0, 1)]),
            mono(&[(1, 1)]),
            mono(&[(0, 2)]),
            mono(&[(0, 1), (1, 1)]),
            mono(&[(0, 3)]),
        ];
        assert_eq!(t.monomials(), &want[..]);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(count_terms_bound(3, 2).unwrap().value, 12);
        assert_eq!(count_terms_bound(1, 1).unwrap().value, 1);
        assert_eq!(count_terms_bound(90, 2).unwrap().value, 8190);
        let big = count_terms_bound(1000, 10).unwrap();
        assert!(big.saturated);
        assert_eq!(big.value, u64::MAX);
        assert!(count_terms_bound(0, 2).is_err());
    }

    #[test]
    fn expand_rows() {
        let design = Matrix::from_rows(&[[2.0, 3.0], [0.0, 0.0]]).unwrap();
        let terms = TermSet::from_monomials(
            vec![
                mono(&[(0, 1)]),
                mono(&[(1, 1)]),
                mono(&[(0, 1), (1, 1)]),
                mono(&[(0, 2)]),
            ],
            2,
            DummyGroups::all_numeric(2),
            PolySpec::full(2).unwrap(),
        )
        .unwrap();
        let x = expand(&design, &terms).unwrap();
        // graded order puts u^2 before u*v
        assert_eq!(x.row(0), &[2.0, 3.0, 4.0, 6.0]);
        assert_eq!(x.row(1), &[0.0; 4]);
    }

    #[test]
    fn expand_respects_budget() {
        let design = Matrix::zeros(10, 3);
        let terms = enumerate_terms(3, &DummyGroups::all_numeric(3), PolySpec::full(2).unwrap()).unwrap();
        let err = expand_with_budget(&design, &terms, 50).unwrap_err();
        assert_eq!(err, Error::MemoryBudget { cells: 90, budget: 50 });
        assert!(expand(&Matrix::zeros(10, 2), &terms).is_err());
    }

    #[test]
    fn drop_keeps_linear_terms() {
        let terms = enumerate_terms(3, &DummyGroups::all_numeric(3), PolySpec::full(2).unwrap()).unwrap();
        // 3 linear + 6 quadratic; add one cubic to reach 10
        let mut ms = terms.monomials().to_vec();
        ms.push(mono(&[(0, 3)]));
        let ten = TermSet::from_monomials(ms, 3, DummyGroups::all_numeric(3), PolySpec::full(3).unwrap()).unwrap();
        assert_eq!(ten.len(), 10);
        let kept = drop_random_columns(&ten, 0.5, 11).unwrap();
        assert_eq!(kept.len(), 5);
        assert_eq!(kept.monomials().iter().filter(|m| m.degree() == 1).count(), 3);
        assert_eq!(kept, drop_random_columns(&ten, 0.5, 11).unwrap());
        assert_eq!(drop_random_columns(&ten, 1.0, 3).unwrap(), ten);
        assert!(drop_random_columns(&ten, 0.0, 3).is_err());
    }

    #[test]
    fn from_monomials_rejects_bad_terms() {
        let groups = DummyGroups {
            groups: vec![DummyGroup {
                source: String::from("c"),
                columns: vec![0, 1],
            }],
            numeric_indices: vec![],
        };
        let spec = PolySpec::full(2).unwrap();
        assert!(TermSet::from_monomials(vec![mono(&[(0, 2)])], 2, groups.clone(), spec).is_err());
        assert!(TermSet::from_monomials(vec![mono(&[(0, 1), (1, 1)])], 2, groups.clone(), spec).is_err());
        assert!(TermSet::from_monomials(vec![mono(&[(2, 1)])], 2, groups, spec).is_err());
    }
}
