//! Worked examples checked against independent computations.

use nalgebra::{DMatrix, DVector};

use eqlines::equiangular::{extend_gram, extract_lines, gram_from_graph, surd_obstruction, verify_line_system, EquiangularError, Obstruction};
use eqlines::factors::{
    c_bound, cycle_partition, decompose_even_into_cycles, find_perfect_matching, sample_a_factor, sample_half_factor,
    select_concentrated_factor, FactorSampler,
};
use eqlines::graph::families::{complete, complete_bipartite, cycle, petersen, random_regular_bipartite};
use eqlines::graph::{check_graph_lift, two_lift, Graph, Signing};
use eqlines::lifts::{ramanujan_lift_iterate, search_ramanujan_signing, signing_from_factors};
use eqlines::pipeline::{bipartite_triple, integer_triple, seed_graph, surd_triple, validate_triple};
use eqlines::rng::substream;
use eqlines::spectral::exact::IntMatrix;
use eqlines::spectral::{certify_by_conjugate_pairs, max_quadform_2x2, SpectralTarget};

fn spectrum(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn shifted(a: &IntMatrix, c: i64) -> IntMatrix {
    let mut m = a.clone();
    for i in 0..m.rows() {
        m.set(i, i, m.get(i, i) - c);
    }
    m
}

fn c_oracle(d: usize) -> f64 {
    match d {
        1 => 0.0,
        _ if d % 2 == 1 => c_oracle(d - 1) + 1.0,
        _ => c_oracle(d / 2) + (2.0 * d as f64).sqrt(),
    }
}

#[test]
fn c_bound_values() {
    assert_eq!(c_bound(1), 0.0);
    assert_eq!(c_bound(2), 2.0);
    assert_eq!(c_bound(3), 3.0);
    for d in 1..=4096 {
        assert!((c_bound(d) - c_oracle(d)).abs() < 1e-9, "d = {d}");
    }
    for d in 1..=1_000_000 {
        assert!(c_bound(d) <= 6.0 * (d as f64).sqrt(), "d = {d}");
    }
}

#[test]
fn k33_signing_matches_brute_force() {
    let g = complete_bipartite(3, 3);
    let bound = 2.0 * 2f64.sqrt();
    let best = (0u32..1 << 9)
        .map(|mask| {
            let signs = (0..9).map(|e| if mask >> e & 1 == 1 { -1 } else { 1 }).collect();
            let s = Signing::new(g.clone(), signs).unwrap();
            *spectrum(&s.signed_adjacency()).last().unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best <= bound + 1e-9);
    let cert = search_ramanujan_signing(&g, 1, &mut substream(0, 0));
    assert!(cert.met);
    assert!(*spectrum(&cert.signing.signed_adjacency()).last().unwrap() <= bound + 1e-9);
}

#[test]
fn c4_lifts() {
    let c4 = cycle(4);
    let trivial = two_lift(&Signing::all_positive(c4.clone()));
    assert_eq!(trivial.components().len(), 2);
    let mut signs = vec![1i8; 4];
    signs[0] = -1;
    let c8 = two_lift(&Signing::new(c4, signs).unwrap());
    assert_eq!(c8.n(), 8);
    assert_eq!(c8.m(), 8);
    assert!(c8.is_connected() && c8.regularity() == Some(2));
    let k2 = two_lift(&Signing::new(complete(2), vec![-1]).unwrap());
    assert_eq!(k2.edges(), &[(0, 3), (1, 2)]);
}

#[test]
fn petersen_spectrum_by_nullities() {
    let a = petersen().adjacency_int();
    assert_eq!(shifted(&a, 3).nullity(), 1);
    assert_eq!(shifted(&a, 1).nullity(), 5);
    assert_eq!(shifted(&a, -2).nullity(), 4);
}

#[test]
fn quadform_constants() {
    let (r, s, t) = (17533.0f64, 3560.0f64, 3857.0f64);
    let closed = (r + t + ((r - t).powi(2) + 4.0 * s * s).sqrt()) / 2.0;
    let got = max_quadform_2x2(r, s, t);
    assert!((got - closed).abs() < 1e-9);
    assert!((got - 18404.0).abs() < 1.0 && got <= 18440.0);
}

#[test]
fn integer_triple_at_22000() {
    let a = (1u64..).find(|a| a * a >= 144 * 22000).unwrap();
    assert_eq!(a, 1780);
    let tr = integer_triple(22000).unwrap();
    assert_eq!(tr.mp.get(0, 1), 18440);
    assert!((tr.beta - 1780.0 / 22000.0).abs() < 1e-15);
    assert!(validate_triple(&tr.m, &tr.mp, tr.beta).unwrap().member);
    assert!(validate_triple(&tr.m, &tr.mp, 0.6).is_err());
}

#[test]
fn surd_matrix_spectrum() {
    for (t, u) in [(12u64, 10u64), (7, 3), (9, 5), (120, 100)] {
        let tr = surd_triple(t, u, false).unwrap();
        let w = ((u * u + 1) as f64).sqrt();
        let mut want = vec![2.0 * w - 1.0, -2.0 * w - 1.0, 3.0, -1.0];
        want.sort_by(f64::total_cmp);
        for (x, y) in spectrum(&tr.mp.to_f64()).iter().zip(&want) {
            assert!((x - y).abs() < 1e-9, "(t, u) = ({t}, {u})");
        }
        // λ_1(M) = 2t + 3 on the all-ones vector
        let ones = DVector::from_element(4, 1.0);
        assert_eq!(tr.m.to_f64() * &ones, ones * (2 * t + 3) as f64);
        assert_eq!(certify_by_conjugate_pairs(&tr.mp, SpectralTarget::Surd(u)).unwrap(), 1);
    }
}

#[test]
fn seed_graphs_are_graph_lifts() {
    let tr = surd_triple(10, 6, false).unwrap();
    let g = seed_graph(&tr).unwrap();
    assert_eq!(g.n(), 40);
    assert!(check_graph_lift(&g, &tr.m).unwrap());
    let v = spectrum(&g.adjacency_matrix());
    assert!((v[39] - 23.0).abs() < 1e-8 && v[38] <= 3.0 + 1e-8);
    let tr = bipartite_triple(6, 1).unwrap();
    let g = seed_graph(&tr).unwrap();
    assert!(check_graph_lift(&g, &tr.m).unwrap());
    assert!(!check_graph_lift(&complete_bipartite(3, 3).with_parts(Some(vec![0, 0, 0, 1, 1, 1])).unwrap(), &IntMatrix::from_rows(&[vec![0, 2], vec![2, 0]])).unwrap());
}

#[test]
fn kdd_factor_signing_has_part_constant_eigenvector() {
    for (d, a) in [(5u64, 1u64), (8, 3), (9, 2)] {
        let tr = bipartite_triple(d, a).unwrap();
        let g = seed_graph(&tr).unwrap();
        let du = d as usize;
        for seed in 0..5 {
            let s = sample_a_factor(&g, a as usize, &mut substream(seed, d)).unwrap();
            let signing = signing_from_factors(&g, &tr, &[((0, 1), s.h_edges.clone())]).unwrap();
            let a_s = signing.signed_adjacency();
            let ones = DVector::from_element(2 * du, 1.0);
            let lambda = (d - 2 * a) as f64;
            assert!((&a_s * &ones - &ones * lambda).amax() < 1e-12);
            let alt = DVector::from_fn(2 * du, |i, _| if i < du { 1.0 } else { -1.0 });
            assert!((&a_s * &alt + &alt * lambda).amax() < 1e-12);
        }
    }
}

#[test]
fn ramanujan_lift_of_k44() {
    let chain = ramanujan_lift_iterate(&complete_bipartite(4, 4), 1, 8, &mut substream(1, 0)).unwrap();
    let g = chain.graph;
    assert_eq!(g.n(), 16);
    assert_eq!(g.regularity(), Some(4));
    assert!(g.bipartition().is_some());
    let v = spectrum(&g.adjacency_matrix());
    assert!((v[15] - 4.0).abs() < 1e-9 && (v[0] + 4.0).abs() < 1e-9);
    assert!(v[1..15].iter().all(|x| x.abs() <= 2.0 * 3f64.sqrt() + 1e-9));
    // top eigenvector is equal on both copies
    let eig = g.adjacency_matrix().symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let x = eig.eigenvectors.column(top);
    assert!((0..8).all(|i| (x[i] - x[i + 8]).abs() < 1e-9));
    assert!(ramanujan_lift_iterate(&cycle(6), 0, 1, &mut substream(0, 0)).unwrap().graph.edges() == cycle(6).edges());
}

#[test]
fn cycle_partition_examples() {
    let c4 = cycle(4);
    let p = cycle_partition(&c4, 4);
    assert_eq!(p.short_cycles.len(), 1);
    assert!(p.residual.is_empty());
    let p = cycle_partition(&cycle(16), 8);
    assert!(p.short_cycles.is_empty() && p.residual.len() == 16);
    let k33 = complete_bipartite(3, 3);
    let p = cycle_partition(&k33, 6);
    assert_eq!(p.short_cycles.len(), 1);
    assert_eq!(p.short_cycles[0].len(), 4);
    let forest = k33.spanning_subgraph(&p.residual);
    assert_eq!(forest.m(), 5);
    assert!(forest.is_connected());
}

#[test]
fn even_decomposition_of_bowtie() {
    let bowtie = Graph::new(5, &[(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)], None).unwrap();
    let cycles = decompose_even_into_cycles(&bowtie).unwrap();
    assert_eq!(cycles.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![3, 3]);
    assert!(decompose_even_into_cycles(&Graph::empty(3)).unwrap().is_empty());
    assert!(decompose_even_into_cycles(&complete_bipartite(1, 3)).is_err());
}

#[test]
fn perfect_matchings() {
    let c4 = cycle(4);
    let m = find_perfect_matching(&c4).unwrap();
    let mut edges: Vec<_> = m.iter().map(|&e| c4.edges()[e]).collect();
    edges.sort();
    assert_eq!(edges, vec![(0, 1), (2, 3)]);
    assert!(find_perfect_matching(&complete_bipartite(1, 3)).is_err());
}

#[test]
fn c4_half_factor_is_uniform_with_zero_m() {
    let c4 = cycle(4);
    let mut seen = std::collections::BTreeMap::new();
    for seed in 0..200 {
        let s = sample_half_factor(&c4, &mut substream(seed, 0)).unwrap();
        assert!(s.m_weights.iter().all(|&w| w == 0.0));
        *seen.entry(s.h_edges.clone()).or_insert(0) += 1;
    }
    assert_eq!(seen.len(), 2);
    assert!(seen.values().all(|&c| c > 60));
}

#[test]
fn c16_half_factor_is_fixed() {
    let g = cycle(16);
    let first = sample_half_factor(&g, &mut substream(0, 0)).unwrap();
    // M = ±(A_G/2 − A_H) is half a balanced signing of C_16, so its norm is 1
    assert!((first.m_norm() - 1.0).abs() < 1e-9);
    for seed in 1..20 {
        let s = sample_half_factor(&g, &mut substream(seed, 0)).unwrap();
        assert_eq!(s.h_edges, first.h_edges);
    }
}

#[test]
fn short_cycle_edges_are_marginally_uniform() {
    // 4 copies of C_4 lie entirely in short cycles
    let g = Graph::disjoint_union(&[cycle(4), cycle(4), cycle(4), cycle(4)]);
    let sampler = FactorSampler::new(&g).unwrap();
    let trials = 4000;
    let mut count = vec![0usize; g.m()];
    for i in 0..trials {
        for &e in &sampler.sample(1, &mut substream(9, i)).unwrap().h_edges {
            count[e] += 1;
        }
    }
    let sd = (0.25 / trials as f64).sqrt();
    for c in count {
        assert!((c as f64 / trials as f64 - 0.5).abs() < 5.0 * sd);
    }
}

#[test]
fn k66_factors_are_regular_and_bounded() {
    let g = complete_bipartite(6, 6);
    let sampler = FactorSampler::new(&g).unwrap();
    for a in 0..=6 {
        for seed in 0..500 {
            let s = sampler.sample(a, &mut substream(seed, a as u64)).unwrap();
            assert!(s.is_a_regular());
            assert!(s.m_norm() <= 6.0 * 6f64.sqrt() + 1e-9);
        }
    }
}

#[test]
fn concentrated_factor_on_random_subspace() {
    let g = random_regular_bipartite(128, 8, &mut substream(4, 0));
    let raw = DMatrix::from_fn(256, 4, |i, j| ((i * 7 + j * 13) % 11) as f64 - 5.0 + (i % 3) as f64 * j as f64);
    let basis = raw.qr().q();
    let sampler = FactorSampler::new(&g).unwrap();
    let sel = select_concentrated_factor(&sampler, 4, &basis, 100, &mut substream(4, 1)).unwrap();
    assert!(sel.trials <= 100);
    assert!(sel.value <= 7.0 * 8f64.sqrt());
    let ones = DMatrix::from_element(256, 1, 1.0 / 16.0);
    let sel = select_concentrated_factor(&sampler, 2, &ones, 1, &mut substream(4, 2)).unwrap();
    assert!(sel.value < 1e-12);
}

#[test]
fn equiangular_examples() {
    let pet = gram_from_graph(&petersen(), 1.0).unwrap();
    assert_eq!((pet.rank, pet.mult_k, pet.exact_k), (5, 5, Some(5)));
    let ls = extract_lines(&pet).unwrap();
    let w = DMatrix::from_columns(&ls.vectors);
    assert!((w.transpose() * &w - &pet.gram).amax() <= 1e-9);
    let report = verify_line_system(&ls);
    assert!(report.pass && report.excess == 5);
    let mut bad = ls.clone();
    bad.vectors[3][0] += 1e-3;
    let report = verify_line_system(&bad);
    assert!(!report.pass);
    assert!(report.worst_pair.is_some_and(|(i, j)| i == 3 || j == 3));
    assert!(matches!(gram_from_graph(&cycle(4), 0.0), Err(EquiangularError::NonPositiveLambda(_))));
    assert!(matches!(extend_gram(&pet, 12), Err(EquiangularError::RamanujanCondition { .. })));
    let two_k4 = gram_from_graph(&Graph::disjoint_union(&[complete(4), complete(4)]), 3.0).unwrap();
    assert_eq!((two_k4.rank, two_k4.mult_k), (7, 1));
    assert!((two_k4.alpha - 1.0 / 7.0).abs() < 1e-15);
    assert_eq!(extend_gram(&two_k4, 8).unwrap().gram, two_k4.gram);
}

#[test]
fn obstruction_verdicts() {
    assert_eq!(surd_obstruction(2), Obstruction::KInfinite);
    assert_eq!(surd_obstruction(4), Obstruction::Inconclusive);
    for u in 1..2000u64 {
        assert_eq!(surd_obstruction(u * u + 1), Obstruction::KInfinite);
    }
}
