//! Randomized invariant checks over the public surface.

use ndarray::Array2;
use proptest::prelude::*;

use nplap::dynamics::{f_p, plap_rhs};
use nplap::graphon::{project_graphon, Graphon, Partition1D};
use nplap::metrics::{lp_norm_piecewise, regime_classify};
use nplap::sampling::{sample_graph, sample_nodes, RngStream, SampleMode};

/// Strictly increasing breakpoints 0 = b_0 < ... < b_n = 1.
fn partition_strategy() -> impl Strategy<Value = Partition1D> {
    proptest::collection::vec(1e-3..1.0f64, 1..8).prop_map(|raw| {
        let total: f64 = raw.iter().sum::<f64>() + 1e-3;
        let mut breaks = vec![0.0];
        let mut acc = 0.0;
        for w in &raw {
            acc += w / total;
            breaks.push(acc);
        }
        breaks.push(1.0);
        Partition1D::from_breakpoints(breaks).expect("positive cells")
    })
}

fn graphon_strategy() -> impl Strategy<Value = Graphon> {
    prop_oneof![
        (0.0..3.0f64).prop_map(|c| Graphon::constant(c).unwrap()),
        (0.0..3.0f64).prop_map(|a| Graphon::product(a).unwrap()),
        (0.1..0.9f64, 0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64).prop_map(|(b, v00, v01, v11)| {
            Graphon::block_model(vec![0.0, b, 1.0], vec![vec![v00, v01], vec![v01, v11]])
                .unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projected_weights_symmetric_and_clamped(
        k in graphon_strategy(),
        part in partition_strategy(),
        q_n in 0.2..4.0f64,
    ) {
        let m = project_graphon(&k, &part, q_n).unwrap();
        let n = part.n_cells();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m[(i, j)].to_bits(), m[(j, i)].to_bits());
                prop_assert!(m[(i, j)] >= 0.0 && m[(i, j)] <= 1.0 / q_n);
            }
        }
    }

    #[test]
    fn spacings_sum_to_one_and_mesh_bounded(n in 1usize..300, seed in 0u64..1000) {
        let ns = sample_nodes(n, &RngStream::new(seed, 0)).unwrap();
        let sp = ns.spacings();
        prop_assert_eq!(sp.len(), n + 1);
        let total: f64 = sp.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(sp.iter().all(|&d| d >= 0.0));
        prop_assert!(ns.max_spacing() <= 1.0);
    }

    #[test]
    fn sampled_weights_obey_bernoulli_support(
        n in 1usize..24,
        seed in 0u64..200,
        q_n in 0.25..2.0f64,
    ) {
        let ns = sample_nodes(n, &RngStream::new(seed, 1)).unwrap();
        let k = Graphon::product(1.5).unwrap();
        let g = sample_graph(&ns, &k, q_n, &RngStream::new(seed, 2), SampleMode::CellAverage)
            .unwrap();
        // exact two-valued support {0, 1/q_n}
        let w = 1.0 / q_n;
        for i in 0..n {
            for j in 0..n {
                let v = g.weights()[(i, j)];
                prop_assert!(v == 0.0 || v.to_bits() == w.to_bits());
                prop_assert_eq!(v.to_bits(), g.weights()[(j, i)].to_bits());
            }
        }
    }

    #[test]
    fn f_p_is_odd_and_increasing(p in 1.1..5.0f64, x in -10.0..10.0f64, dx in 1e-6..1.0f64) {
        let fx = f_p(x, p).unwrap();
        let fmx = f_p(-x, p).unwrap();
        prop_assert_eq!(fx, -fmx);
        prop_assert!(f_p(x + dx, p).unwrap() > fx);
    }

    #[test]
    fn rhs_sum_vanishes_under_symmetric_weights(
        n in 2usize..16,
        seed in 0u64..100,
        p in 1.2..4.0f64,
    ) {
        use rand::Rng;
        let mut rng = RngStream::new(seed, 3).rng();
        let mut w = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let r = plap_rhs(&u, &w, p).unwrap();
        prop_assert!(r.iter().sum::<f64>().abs() <= 1e-11);
    }

    #[test]
    fn lp_norms_embed_on_unit_domain(
        vals in proptest::collection::vec(-3.0..3.0f64, 1..10),
        p in 1.0..4.0f64,
        extra in 0.1..3.0f64,
    ) {
        let part = Partition1D::uniform(vals.len()).unwrap();
        let q = p + extra;
        let np = lp_norm_piecewise(&part, &vals, p).unwrap();
        let nq = lp_norm_piecewise(&part, &vals, q).unwrap();
        let ninf = lp_norm_piecewise(&part, &vals, f64::INFINITY).unwrap();
        prop_assert!(np <= nq + 1e-12);
        prop_assert!(nq <= ninf + 1e-12);
        // reverse bound through the interpolation inequality
        let bound = ninf.powf(1.0 - p / q) * np.powf(p / q);
        prop_assert!(nq <= bound + 1e-12);
    }

    #[test]
    fn regime_exponent_matches_min_formula(
        p in 1.01..6.0f64,
        s in 0.01..1.0f64,
        q_off in 0.0..5.0f64,
    ) {
        let q = 1.0 + q_off;
        let v = regime_classify(p, s, q).unwrap();
        let expected = (1.0f64 / p).min(0.5).min(s * q / p) * (p / 2.0).min(1.0);
        prop_assert!((v.exponent - expected).abs() < 1e-12);
    }

    #[test]
    fn cell_index_respects_half_open_convention(
        part in partition_strategy(),
        x in 0.0..=1.0f64,
    ) {
        let i = part.cell_index(x);
        let (l, r) = part.cell(i);
        if x == 0.0 {
            prop_assert_eq!(i, 0);
        } else {
            prop_assert!(l < x && x <= r);
        }
    }
}
