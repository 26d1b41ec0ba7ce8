use std::collections::BTreeSet;

use polyreg_core::dataset::DummyGroup;
use polyreg_core::{count_terms_bound, enumerate_terms, expand, DummyGroups, Matrix, PolySpec};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

// Every exponent vector over p columns with total degree in 1..=d.
fn brute_force(p: usize, d: u32) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    let mut e = vec![0u32; p];
    loop {
        let total: u32 = e.iter().sum();
        if (1..=d).contains(&total) {
            out.insert(e.clone());
        }
        let mut i = 0;
        loop {
            if i == p {
                return out;
            }
            e[i] += 1;
            if e[i] <= d {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn exponent_vectors(p: usize, d: u32) -> Vec<Vec<u32>> {
    let terms = enumerate_terms(p, &DummyGroups::all_numeric(p), PolySpec::full(d).unwrap()).unwrap();
    terms
        .monomials()
        .iter()
        .map(|m| (0..p).map(|c| m.exponent(c)).collect())
        .collect()
}

#[test]
fn numeric_term_count_matches_brute_force() {
    for p in 1..=6 {
        for d in 1..=4 {
            let got = exponent_vectors(p, d);
            let want = brute_force(p, d);
            assert_eq!(
                got.len() as u64,
                binomial(p as u64 + d as u64, d as u64) - 1,
                "p={p} d={d}"
            );
            assert_eq!(got.iter().cloned().collect::<BTreeSet<_>>(), want, "p={p} d={d}");
        }
    }
}

#[test]
fn lower_degree_is_a_prefix() {
    for p in 1..=5 {
        for d in 1..4 {
            let lo = exponent_vectors(p, d);
            let hi = exponent_vectors(p, d + 1);
            assert_eq!(&hi[..lo.len()], &lo[..], "p={p} d={d}");
        }
    }
}

#[test]
fn bound_dominates_exact_count() {
    for p in 1..=6u64 {
        for d in 1..=4u32 {
            let b = count_terms_bound(p, d).unwrap();
            let exact = binomial(p + d as u64, d as u64) - 1;
            assert!(b.value >= exact, "p={p} d={d}: bound {} < {exact}", b.value);
        }
    }
}

fn groups(numeric: usize, sizes: &[usize]) -> DummyGroups {
    let mut next = numeric;
    let groups = sizes
        .iter()
        .enumerate()
        .map(|(g, &s)| {
            let columns: Vec<usize> = (next..next + s).collect();
            next += s;
            DummyGroup {
                source: format!("g{g}"),
                columns,
            }
        })
        .collect();
    DummyGroups {
        groups,
        numeric_indices: (0..numeric).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        rng_seed: RngSeed::Fixed(0x7e57),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn dummy_rules_hold_and_columns_are_distinct(
        numeric in 0usize..3,
        sizes in proptest::collection::vec(1usize..4, 0..3),
        degree in 1u32..4,
        cap_offset in 0u32..3,
        seed in any::<u64>(),
    ) {
        let g = groups(numeric, &sizes);
        let m = g.width();
        prop_assume!(m >= 1);
        let cap = degree.saturating_sub(cap_offset).max(1);
        let spec = PolySpec::new(degree, cap).unwrap();
        let terms = enumerate_terms(m, &g, spec).unwrap();
        let table = g.group_table(m);
        for mono in terms.monomials() {
            prop_assert!(mono.degree() <= degree);
            if mono.arity() >= 2 {
                prop_assert!(mono.degree() <= cap);
            }
            let mut seen = BTreeSet::new();
            for &(c, e) in mono.factors() {
                if let Some(gi) = table[c] {
                    prop_assert_eq!(e, 1);
                    prop_assert!(seen.insert(gi), "two dummies of one group");
                }
            }
        }
        // Random design honoring the indicator layout: one-hot (or all-zero
        // reference) rows within each group.
        let n = 40;
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut x = Matrix::zeros(n, m);
        for i in 0..n {
            for &c in &g.numeric_indices {
                x.row_mut(i)[c] = (next() % 10_000) as f64 / 5000.0 - 1.0;
            }
            for grp in &g.groups {
                let pick = (next() % (grp.columns.len() as u64 + 1)) as usize;
                if pick < grp.columns.len() {
                    x.row_mut(i)[grp.columns[pick]] = 1.0;
                }
            }
        }
        let e = expand(&x, &terms).unwrap();
        let cols = e.columns();
        let distinct: BTreeSet<Vec<u64>> =
            cols.iter().map(|c| c.iter().map(|v| v.to_bits()).collect()).collect();
        // Indicator products can vanish on a sample, so only columns with
        // some nonzero entry are required to be distinct.
        let nonzero: Vec<&Vec<f64>> = cols.iter().filter(|c| c.iter().any(|v| *v != 0.0)).collect();
        let distinct_nonzero: BTreeSet<Vec<u64>> =
            nonzero.iter().map(|c| c.iter().map(|v| v.to_bits()).collect()).collect();
        prop_assert!(distinct.len() <= cols.len());
        prop_assert_eq!(distinct_nonzero.len(), nonzero.len());
    }
}
