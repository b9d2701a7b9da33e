use std::f64::consts::PI;

use nodal_transport::graph_uncertainty::{
    graph_w1, uncertainty_product_graph, verify_design, Graph, VertexFunction,
};
use nodal_transport::ot_solver::{w1_1d_oracle, wp_exact};
use nodal_transport::spectral_cube::{heat_evolve, SpectralFunction};
use nodal_transport::uncertainty::{cube_decomposition, product_exponent, uncertainty_product};
use nodal_transport::{sample_family, DiscreteMeasure, FamilySpec, GridFunction, SolverConfig};
use proptest::prelude::*;

fn measure(atoms: Vec<(f64, f64, f64)>) -> DiscreteMeasure {
    let total: f64 = atoms.iter().map(|a| a.2).sum();
    let points = atoms.iter().flat_map(|a| [a.0, a.1]).collect();
    let masses = atoms.iter().map(|a| a.2 / total).collect();
    DiscreteMeasure::new(2, points, masses).unwrap()
}

fn atoms(lo: f64, hi: f64) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((lo..hi, lo..hi, 0.1f64..1.0), 1..12)
}

fn w1(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    wp_exact(a, b, 1.0).unwrap().cost
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_inequality(a in atoms(0.0, 1.0), b in atoms(0.0, 1.0), c in atoms(0.0, 1.0)) {
        let (a, b, c) = (measure(a), measure(b), measure(c));
        prop_assert!(w1(&a, &c) <= w1(&a, &b) + w1(&b, &c) + 1e-9);
    }

    #[test]
    fn translation_covariance(a in atoms(0.0, 0.7), b in atoms(0.0, 0.7), sx in 0.0f64..0.3, sy in 0.0f64..0.3) {
        let (a, b) = (measure(a), measure(b));
        let shift = [sx, sy];
        let moved = w1(&a.translated(&shift).unwrap(), &b.translated(&shift).unwrap());
        prop_assert!((moved - w1(&a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn w1_is_at_most_wp(a in atoms(0.0, 1.0), b in atoms(0.0, 1.0), p in 1.0f64..3.0) {
        let (a, b) = (measure(a), measure(b));
        let wp = wp_exact(&a, &b, p).unwrap().cost;
        prop_assert!(w1(&a, &b) <= wp * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn exact_certificate_holds(a in atoms(0.0, 1.0), b in atoms(0.0, 1.0), p in 1.0f64..2.5) {
        let (a, b) = (measure(a), measure(b));
        let sol = wp_exact(&a, &b, p).unwrap();
        prop_assert!(sol.certificate.holds(1e-9));
        prop_assert!(sol.plan.marginal_error(&a, &b) <= 1e-9);
    }

    #[test]
    fn exact_matches_one_d_oracle(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..5),
        n in prop::sample::select(vec![64usize, 256, 512]),
    ) {
        let f = GridFunction::from_fn(1, n, |x| {
            coeffs.iter().enumerate().map(|(k, a)| a * (PI * (k + 1) as f64 * x[0]).cos()).sum()
        }).unwrap();
        prop_assume!(f.norms().l1 > 1e-3);
        let (mu, nu) = f.split_signs().unwrap();
        let exact = wp_exact(&mu, &nu, 1.0).unwrap().cost;
        let oracle = w1_1d_oracle(&f).unwrap();
        prop_assert!((exact - oracle).abs() <= 1e-6 * oracle, "{exact} vs {oracle}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_signs_balances_mass(seed in 0u64..1000) {
        let f = sample_family(&FamilySpec::named("trig", 2, 32, seed).unwrap()).unwrap();
        let (mu, nu) = f.split_signs().unwrap();
        prop_assert!((mu.total_mass() - nu.total_mass()).abs() <= f.mean_tol() * f.norms().l1);
    }

    #[test]
    fn norms_and_nodal_scale(seed in 0u64..1000, c in prop::sample::select(vec![-3.0, -0.5, 0.3, 2.0, 7.0])) {
        let f = sample_family(&FamilySpec::named("trig", 2, 32, seed).unwrap()).unwrap();
        let g = f.scaled(c);
        let (nf, ng) = (f.norms(), g.norms());
        // Bit-exact only for powers of two; other factors round per cell.
        let tol = if c.abs().log2().fract() == 0.0 { 0.0 } else { 1e-14 };
        prop_assert!((ng.l1 - c.abs() * nf.l1).abs() <= tol * ng.l1);
        prop_assert!((ng.linf - c.abs() * nf.linf).abs() <= tol * ng.linf);
        prop_assert!((g.nodal_measure() - f.nodal_measure()).abs() <= 1e-12 * f.nodal_measure().max(1.0));
    }

    #[test]
    fn nodal_refinement_is_stable(seed in 0u64..1000) {
        let at = |n| sample_family(&FamilySpec::named("trig", 2, n, seed).unwrap()).unwrap().nodal_measure();
        let (coarse, fine) = (at(128), at(256));
        prop_assert!((coarse - fine).abs() <= 0.05 * fine, "{coarse} vs {fine}");
    }

    #[test]
    fn one_d_nodal_count(k in 1usize..20, extra in 0usize..50) {
        let n = 4 * k + extra;
        let f = GridFunction::from_fn(1, n, |x| (PI * k as f64 * x[0]).cos()).unwrap();
        prop_assert_eq!(f.nodal_measure(), k as f64);
    }

    #[test]
    fn decomposition_partitions(seed in 0u64..1000, q in prop::sample::select(vec![1usize, 2, 4, 8, 16])) {
        let f = sample_family(&FamilySpec::named("trig", 2, 32, seed).unwrap()).unwrap();
        let dec = cube_decomposition(&f, 1.0 / q as f64).unwrap();
        prop_assert_eq!(dec.negligible + dec.significant, q * q);
        prop_assert_eq!(dec.balanced + dec.unbalanced, dec.significant);
        prop_assert_eq!(dec.cubes.len(), q * q);
    }

    #[test]
    fn quotient_is_scale_invariant(seed in 0u64..1000, c in 0.1f64..10.0) {
        let f = sample_family(&FamilySpec::named("trig", 2, 16, seed).unwrap()).unwrap();
        let cfg = SolverConfig::default();
        let a = uncertainty_product(&f, &cfg).unwrap().quotient;
        let b = uncertainty_product(&f.scaled(c), &cfg).unwrap().quotient;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }
}

#[test]
fn exponent_for_p_one_is_four_minus_one_over_d() {
    for d in 1..=3 {
        assert_eq!(product_exponent(d, 1.0), 4.0 - 1.0 / d as f64);
    }
}

/// Random tree on `1..=n`: vertex `i + 2` hangs off `parents[i] ∈ 1..=i+1`.
fn tree() -> impl Strategy<Value = (Vec<usize>, Vec<f64>, Vec<f64>)> {
    (2usize..30).prop_flat_map(|n| {
        let parents = (0..n - 1).map(|i| 1..=i + 1).collect::<Vec<_>>();
        (
            parents,
            prop::collection::vec(0.5f64..3.0, n - 1),
            prop::collection::vec(-1.0f64..1.0, n),
        )
    })
}

fn centred(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

fn spectral(modes: &[([usize; 3], f64)]) -> SpectralFunction {
    SpectralFunction::new(2, modes.iter().copied()).unwrap()
}

fn modes() -> impl Strategy<Value = Vec<([usize; 3], f64)>> {
    prop::collection::btree_map((0usize..5, 0usize..5), -1.0f64..1.0, 1..8).prop_map(|m| {
        m.into_iter()
            .filter(|((a, b), _)| a + b > 0)
            .map(|((a, b), c)| ([a, b, 0], c))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tree_transport_closed_form((parents, lengths, values) in tree()) {
        let n = values.len();
        let edges: Vec<_> = parents.iter().enumerate().map(|(i, &p)| (p, i + 2)).collect();
        let g = Graph::new(n, &edges, Some(lengths.clone())).unwrap();
        let values = centred(values);
        let f = VertexFunction::new(values.clone()).unwrap();
        // Children have larger labels, so one backward pass accumulates subtrees.
        let mut subtree = values.clone();
        let mut expected = 0.0;
        for v in (2..=n).rev() {
            let p = parents[v - 2];
            expected += lengths[v - 2] * subtree[v - 1].abs();
            subtree[p - 1] += subtree[v - 1];
        }
        let t = graph_w1(&g, &f).unwrap();
        prop_assert!((t.cost - expected).abs() <= 1e-9 * expected.max(1.0), "{} vs {expected}", t.cost);
        prop_assert!(t.divergence_error(&g, &f) <= 1e-9);
    }

    #[test]
    fn graph_product_is_linear_in_scale(subset in prop::sample::subsequence((1..=24).collect::<Vec<_>>(), 1..23), c in 0.1f64..10.0) {
        let g = Graph::nauru();
        let f = VertexFunction::centered_indicator(24, &subset).unwrap();
        let a = uncertainty_product_graph(&g, &f).unwrap();
        let b = uncertainty_product_graph(&g, &f.scaled(c)).unwrap();
        prop_assert_eq!(a.boundary, b.boundary);
        prop_assert!((b.product - c * a.product).abs() <= 1e-9 * b.product);
    }

    #[test]
    fn designs_are_invariant_under_relabelling(
        perm in Just((1..=24).collect::<Vec<usize>>()).prop_shuffle(),
        subset in prop::sample::subsequence((1..=24).collect::<Vec<_>>(), 1..12),
        k in 1usize..23,
        mcgee in any::<bool>(),
    ) {
        let g = if mcgee { Graph::mcgee() } else { Graph::nauru() };
        let h = g.relabel(&perm).unwrap();
        let image: Vec<usize> = subset.iter().map(|&v| perm[v - 1]).collect();
        let a = verify_design(&g, &subset, k).unwrap();
        let b = verify_design(&h, &image, k).unwrap();
        prop_assert_eq!(a.pass, b.pass);
        prop_assert_eq!(a.orthogonal_eigenfunctions, b.orthogonal_eigenfunctions);
        prop_assert_eq!(a.orthogonal_eigenspaces, b.orthogonal_eigenspaces);
        for (x, y) in a.residuals.iter().zip(&b.residuals) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn parseval(m in modes()) {
        prop_assume!(!m.is_empty());
        let f = spectral(&m);
        let n = 8 * f.k_max().max(1);
        let g = f.synthesize(n).unwrap();
        let discrete = (g.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume()).sqrt();
        let coeffs = m.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        prop_assert!((discrete - coeffs).abs() <= 0.01 * coeffs, "{discrete} vs {coeffs}");
    }

    #[test]
    fn heat_semigroup(m in modes(), s in 0.0f64..0.01, t in 0.0f64..0.01) {
        prop_assume!(!m.is_empty());
        let f = spectral(&m);
        let twice = heat_evolve(&heat_evolve(&f, s).unwrap(), t).unwrap();
        let once = heat_evolve(&f, s + t).unwrap();
        for (k, c) in once.modes() {
            prop_assert!((twice.coefficient(*k) - c).abs() <= 1e-12);
        }
        prop_assert_eq!(once.coefficient([0, 0, 0]), 0.0);
        let g = once.synthesize(8 * once.k_max().max(1)).unwrap();
        prop_assert!(g.integral().abs() <= 1e-12);
    }
}
