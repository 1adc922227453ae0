// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::sampler::identify_leaf_nodes;

fn lib() -> CellLibrary {
    CellLibrary::default_library()
}

fn mask(k: usize) -> u64 {
    (1u64 << k) - 1
}

fn bit(x: u64, i: usize) -> u64 {
    x >> i & 1
}

/// Integer reference model of every adder family.
fn reference(spec: &FixtureSpec, a: u64, b: u64) -> u64 {
    let (w, k) = (spec.width, spec.param);
    let high = |cin: u64| ((a >> k) + (b >> k) + cin) << k;
    match spec.family {
        Family::Exact => a + b,
        Family::Lta => high(0),
        Family::Lca => high(0) | (a & mask(k)),
        Family::Loa => {
            let cin = if k > 0 { bit(a, k - 1) & bit(b, k - 1) } else { 0 };
            high(cin) | ((a | b) & mask(k))
        }
        Family::EtaI => {
            let mut low = 0;
            for i in 0..k {
                let forced = (i + 1..k).any(|j| bit(a, j) & bit(b, j) == 1);
                low |= (bit(a ^ b, i) | forced as u64) << i;
            }
            high(0) | low
        }
        Family::Aca => {
            let m = k;
            let mut out = ((a & mask(m)) + (b & mask(m))) & mask(m);
            let mut last = (a & mask(m)) + (b & mask(m));
            for i in m..w {
                let lo = i + 1 - m;
                last = ((a >> lo) & mask(m)) + ((b >> lo) & mask(m));
                out |= bit(last, m - 1) << i;
            }
            out | bit(last, m) << w
        }
    }
}

/// Simulate all operand pairs 64 at a time; outputs are read as an integer
/// with output `i` at bit `i`.
fn exhaustive(n: &Netlist, in_bits: usize, mut check: impl FnMut(u64, u64)) {
    let lib = lib();
    let total = 1u64 << in_bits;
    let mut base = 0;
    while base < total {
        let lanes = (total - base).min(64);
        let words: Vec<u64> = (0..in_bits)
            .map(|i| (0..lanes).fold(0u64, |acc, l| acc | (((base + l) >> i) & 1) << l))
            .collect();
        let outs = n.simulate_words(&lib, &words).unwrap();
        for l in 0..lanes {
            let v = outs.iter().enumerate().fold(0u64, |acc, (i, w)| acc | (w >> l & 1) << i);
            check(base + l, v);
        }
        base += lanes;
    }
}

fn check_fixture(spec: FixtureSpec) {
    let n = gen_fixture(&spec, &lib()).unwrap();
    let w = spec.width;
    exhaustive(&n, 2 * w, |x, got| {
        let (a, b) = (x & mask(w), x >> w);
        assert_eq!(got, reference(&spec, a, b), "{spec:?} a={a} b={b}");
    });
}

#[test]
fn all_families_match_reference_small_widths() {
    for w in 1..=6 {
        check_fixture(FixtureSpec::exact(w));
        for fam in [Family::Lta, Family::Lca, Family::Loa, Family::EtaI] {
            for k in 0..w {
                check_fixture(FixtureSpec::new(fam, w, k));
            }
        }
        for m in 1..=w {
            check_fixture(FixtureSpec::new(Family::Aca, w, m));
        }
    }
}

#[test]
fn width_eight_spot_checks() {
    for spec in [
        FixtureSpec::new(Family::Lta, 8, 4),
        FixtureSpec::new(Family::EtaI, 8, 5),
        FixtureSpec::new(Family::Aca, 8, 3),
    ] {
        check_fixture(spec);
    }
}

#[test]
fn degenerate_parameters_are_exact() {
    let lib = lib();
    let exact = gen_fixture(&FixtureSpec::exact(6), &lib).unwrap();
    for spec in [
        FixtureSpec::new(Family::Lta, 6, 0),
        FixtureSpec::new(Family::Lca, 6, 0),
        FixtureSpec::new(Family::Loa, 6, 0),
        FixtureSpec::new(Family::EtaI, 6, 0),
        FixtureSpec::new(Family::Aca, 6, 6),
    ] {
        let n = gen_fixture(&spec, &lib).unwrap();
        assert_eq!(n.gates.len(), exact.gates.len(), "{spec:?}");
        exhaustive(&n, 12, |x, got| assert_eq!(got, (x & 63) + (x >> 6)));
    }
}

#[test]
fn lta_truncates_low_nibble() {
    let lib = lib();
    let n = gen_fixture(&FixtureSpec::new(Family::Lta, 8, 4), &lib).unwrap();
    let mut input = vec![true; 8];
    input.extend([false; 8]);
    let out = n.simulate(&lib, &input).unwrap();
    let v: u32 = out.iter().enumerate().map(|(i, &b)| (b as u32) << i).sum();
    assert_eq!(v, 0xF0);
}

#[test]
fn exact_gate_counts() {
    for w in 1..=16 {
        let n = gen_fixture(&FixtureSpec::exact(w), &lib()).unwrap();
        assert_eq!(n.gates.len(), exact_gate_count(w));
        assert!(n.gates.iter().all(|g| g.name.starts_with("add_")));
    }
}

#[test]
fn lca_has_isolated_copy_paths() {
    let lib = lib();
    let classes = ClassMap::default();
    let n = gen_fixture(&FixtureSpec::new(Family::Lca, 12, 6), &lib).unwrap();
    let g = labeled_graph(n, &lib, &classes, Some("LCA")).unwrap();
    let buf = g.buf_id().unwrap();
    let copies: Vec<usize> = (0..g.len())
        .filter(|&v| g.node(v).cell == buf && g.neighbors(v).is_empty())
        .collect();
    assert_eq!(copies.len(), 6);
    for v in copies {
        assert!(g.node(v).is_pi() && g.node(v).is_po());
    }
}

#[test]
fn invalid_parameters_rejected() {
    let lib = lib();
    assert!(gen_fixture(&FixtureSpec::new(Family::Lta, 8, 8), &lib).is_err());
    assert!(gen_fixture(&FixtureSpec::new(Family::Aca, 8, 0), &lib).is_err());
    assert!(gen_fixture(&FixtureSpec::new(Family::Aca, 8, 9), &lib).is_err());
    assert!(gen_fixture(&FixtureSpec::exact(0), &lib).is_err());
    assert!("nope".parse::<Family>().is_err());
    assert_eq!("eta-i".parse::<Family>().unwrap(), Family::EtaI);
}

#[test]
fn multiplier_is_exact() {
    for w in 1..=5 {
        let n = gen_multiplier(w, &lib()).unwrap();
        exhaustive(&n, 2 * w, |x, got| assert_eq!(got, (x & mask(w)) * (x >> w), "w={w}"));
    }
}

#[test]
fn comparator_is_exact() {
    for w in 1..=5 {
        let n = gen_comparator(w, &lib()).unwrap();
        exhaustive(&n, 2 * w, |x, got| {
            let (a, b) = (x & mask(w), x >> w);
            assert_eq!(got, (a > b) as u64 | ((a == b) as u64) << 1);
        });
    }
}

#[test]
fn mux_is_exact() {
    let w = 2;
    let n = gen_mux4(w, &lib()).unwrap();
    exhaustive(&n, 4 * w + 2, |x, got| {
        let sel = (x >> (4 * w)) as usize;
        assert_eq!(got, (x >> (sel * w)) & mask(w));
    });
}

#[test]
fn subtractor_is_exact() {
    for w in 1..=5 {
        let n = gen_subtractor(w, &lib()).unwrap();
        exhaustive(&n, 2 * w, |x, got| {
            let (a, b) = (x & mask(w), x >> w);
            let diff = a.wrapping_sub(b) & mask(w);
            assert_eq!(got, diff | ((a >= b) as u64) << w, "w={w} a={a} b={b}");
        });
    }
}

#[test]
fn circuits_are_fully_labeled() {
    let lib = lib();
    let classes = ClassMap::default();
    for kind in CircuitKind::ALL {
        let g = labeled_graph(gen_circuit(kind, 4, &lib).unwrap(), &lib, &classes, None).unwrap();
        let want = classes.id(kind.name()).unwrap();
        assert!(g.labels().iter().all(|l| *l == Some(want)), "{kind:?}");
    }
}

fn exact_adders(widths: &[usize]) -> Vec<CircuitGraph> {
    let lib = lib();
    let classes = ClassMap::default();
    widths
        .iter()
        .map(|&w| labeled_graph(gen_fixture(&FixtureSpec::exact(w), &lib).unwrap(), &lib, &classes, Some("exact")).unwrap())
        .collect()
}

#[test]
fn default_augmentation_yields_35() {
    let src = exact_adders(&[8, 9, 12, 16]);
    let out = augment(&src, SamplingMode::Leaf, None, 1).unwrap();
    assert_eq!(out.len(), 35);
    for g in &out {
        let source = src.iter().find(|s| Some(&s.name) == g.meta.source.as_ref()).unwrap();
        assert_eq!(identify_leaf_nodes(g).len(), identify_leaf_nodes(source).len());
        assert!(g.labels().iter().all(|l| *l == Some(0)));
        let area = g.meta.normalized_area.unwrap();
        assert!((area - g.len() as f64 / source.len() as f64).abs() < 1e-12);
    }
    assert!(augment(&src, SamplingMode::Leaf, Some(&[]), 1).unwrap().is_empty());
}

#[test]
fn augmented_graphs_shrink() {
    let src = exact_adders(&[8, 12]);
    for mode in [SamplingMode::Leaf, SamplingMode::Random] {
        for g in augment(&src, mode, None, 2).unwrap() {
            let source = src.iter().find(|s| Some(&s.name) == g.meta.source.as_ref()).unwrap();
            assert!(g.len() <= source.len());
            if mode == SamplingMode::Random {
                assert!(g.len() < source.len());
            }
        }
    }
}

#[test]
fn augmentation_level_too_high() {
    let src = exact_adders(&[4]);
    assert!(matches!(augment(&src, SamplingMode::Leaf, Some(&[6]), 0), Err(DatasetError::Level { .. })));
}

#[test]
fn augmentation_is_seeded() {
    let src = exact_adders(&[12]);
    let a = augment(&src, SamplingMode::Leaf, None, 5).unwrap();
    let b = augment(&src, SamplingMode::Leaf, None, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn split_counts() {
    let s = make_splits(20, [0.65, 0.20, 0.15], 3).unwrap();
    let count = |x| s.iter().filter(|&&y| y == x).count();
    assert_eq!((count(Split::Train), count(Split::Val), count(Split::Test)), (13, 4, 3));
    assert_eq!(s, make_splits(20, [0.65, 0.20, 0.15], 3).unwrap());
    assert!(make_splits(5, [1.0, 0.0, 0.0], 0).unwrap().iter().all(|&x| x == Split::Train));
    assert!(matches!(make_splits(2, [0.9, 0.05, 0.05], 0), Err(DatasetError::EmptySplit(_))));
    assert!(make_splits(3, [0.0, 0.0, 0.0], 0).is_err());
    // unnormalized fractions are normalized
    assert_eq!(make_splits(20, [65.0, 20.0, 15.0], 3).unwrap(), s);
}

#[test]
fn group_splits_keep_groups_together() {
    let groups: Vec<String> = (0..30).map(|i| format!("g{}", i % 10)).collect();
    let s = make_group_splits(&groups, [0.6, 0.2, 0.2], 1).unwrap();
    for i in 0..30 {
        assert_eq!(s[i], s[i % 10]);
    }
}

#[test]
fn standardizer_uses_train_only() {
    let graphs = exact_adders(&[4, 8]);
    let ds = Dataset::new(graphs.clone(), vec![Split::Train, Split::Val], ClassMap::default()).unwrap();
    let st = ds.fit_standardizer().unwrap();
    assert_eq!(st, Standardizer::fit([graphs[0].features()]).unwrap());
}

#[test]
fn manifest_area() {
    let spec = FixtureSpec::new(Family::Lta, 16, 4);
    let n = gen_fixture(&spec, &lib()).unwrap();
    let e = ManifestEntry::for_fixture("x.v".into(), &spec, n.gates.len());
    assert_eq!(e.k, Some(4));
    assert!((e.normalized_area - n.gates.len() as f64 / 62.0).abs() < 1e-12);
}
