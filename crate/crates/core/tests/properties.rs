use std::collections::BTreeMap;

use boxlab_core::bitmask;
use boxlab_core::box_norms::{box_norm, box_norm_direct, gcs_check, lp_box_norm};
use boxlab_core::generators::{generate, Atoms, GenSpec, Kind};
use boxlab_core::pseudo::conditions::c2b_problem;
use boxlab_core::pseudo::sup::ascent_trace;
use boxlab_core::pseudo::{
    ell_pseudorandom, linear_forms_deviation, sup_multilinear, Families, Selector, WeightFamily,
};
use boxlab_core::{
    EdgeFunction, ExtendedExponent, HypergraphSystem, Instance, OmegaIndex, ProbSpace, SearchMode, Verdict,
};
use proptest::prelude::*;

fn space() -> impl Strategy<Value = ProbSpace> {
    prop::collection::vec(0.1f64..1.0, 1..=3).prop_map(|w| ProbSpace::new(&w).unwrap())
}

/// A single edge on `arity` spaces with a function on it.
fn edge_instance(arity: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (HypergraphSystem, EdgeFunction)> {
    prop::collection::vec(space(), arity).prop_flat_map(|spaces| {
        let n = spaces.len();
        let cells: usize = spaces.iter().map(ProbSpace::atoms).product();
        let sys = HypergraphSystem::new(spaces, vec![(0..n).collect()]).unwrap();
        prop::collection::vec(-2.0f64..2.0, cells).prop_map(move |v| {
            let f = EdgeFunction::new(&sys, &(0..n).collect::<Vec<_>>(), v).unwrap();
            (sys.clone(), f)
        })
    })
}

fn pair_instance() -> impl Strategy<Value = (HypergraphSystem, EdgeFunction, EdgeFunction)> {
    edge_instance(2..=3).prop_flat_map(|(sys, f)| {
        let len = f.len();
        prop::collection::vec(-2.0f64..2.0, len).prop_map(move |v| {
            let g = EdgeFunction::new(&sys, f.edge(), v).unwrap();
            (sys.clone(), f.clone(), g)
        })
    })
}

fn ell() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 4])
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_matches_enumeration((sys, f) in edge_instance(1..=3), ell in ell()) {
        let e = f.edge().to_vec();
        let a = box_norm(&sys, &e, &f, ell).unwrap().value;
        let b = box_norm_direct(&sys, &e, &f, ell).unwrap().value;
        prop_assert!(close(a, b, 1e-9), "{} vs {}", a, b);
    }

    #[test]
    fn box_norm_is_a_norm((sys, f, g) in pair_instance(), ell in ell(), c in -3.0f64..3.0) {
        let e = f.edge().to_vec();
        let nf = box_norm(&sys, &e, &f, ell).unwrap().value;
        let ng = box_norm(&sys, &e, &g, ell).unwrap().value;
        let nfg = box_norm(&sys, &e, &f.add(&g).unwrap(), ell).unwrap().value;
        prop_assert!(nfg <= nf + ng + 1e-9 * (nf + ng));
        let ncf = box_norm(&sys, &e, &f.scale(c), ell).unwrap().value;
        prop_assert!(close(ncf, c.abs() * nf, 1e-9));
        prop_assert!(nf >= 0.0);
        let zero = f.scale(0.0);
        prop_assert_eq!(box_norm(&sys, &e, &zero, ell).unwrap().value, 0.0);
    }

    #[test]
    fn lp_box_norm_is_a_norm((sys, f, g) in pair_instance(), ell in ell(), p in 1.0f64..6.0) {
        let e = f.edge().to_vec();
        let p = ExtendedExponent::Finite(p);
        let nf = lp_box_norm(&sys, &e, &f, ell, p).unwrap();
        let ng = lp_box_norm(&sys, &e, &g, ell, p).unwrap();
        let nfg = lp_box_norm(&sys, &e, &f.add(&g).unwrap(), ell, p).unwrap();
        prop_assert!(nfg <= nf + ng + 1e-9 * (nf + ng));
        let n2 = lp_box_norm(&sys, &e, &f.scale(-2.5), ell, p).unwrap();
        prop_assert!(close(n2, 2.5 * nf, 1e-9));
        if f.max_abs() > 0.0 {
            prop_assert!(nf > 0.0);
        }
    }

    #[test]
    fn box_norm_grows_with_ell((sys, f) in edge_instance(1..=3)) {
        let e = f.edge().to_vec();
        let n2 = box_norm(&sys, &e, &f, 2).unwrap().value;
        let n4 = box_norm(&sys, &e, &f, 4).unwrap().value;
        prop_assert!(n2 <= n4 * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn lp_box_norm_grows_with_p((sys, f) in edge_instance(1..=3), ell in ell(), p in 1.0f64..4.0, dp in 0.0f64..4.0) {
        let e = f.edge().to_vec();
        let a = lp_box_norm(&sys, &e, &f, ell, ExtendedExponent::Finite(p)).unwrap();
        let b = lp_box_norm(&sys, &e, &f, ell, ExtendedExponent::Finite(p + dp)).unwrap();
        let c = lp_box_norm(&sys, &e, &f, ell, ExtendedExponent::Infinity).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-9) + 1e-300);
        prop_assert!(b <= c * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn gowers_cauchy_schwarz((sys, f) in edge_instance(2..=2), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let e = f.edge().to_vec();
        let family: BTreeMap<OmegaIndex, EdgeFunction> = OmegaIndex::all(&e, 2)
            .into_iter()
            .map(|w| {
                let g = EdgeFunction::from_fn(&sys, &e, |_| rng.gen_range(-1.0..1.0)).unwrap();
                (w, g)
            })
            .collect();
        let cert = gcs_check(&sys, &e, &family, 2).unwrap();
        prop_assert!(cert.holds, "{:?}", cert);
    }

    #[test]
    fn hex_masks_round_trip(bits in prop::collection::vec(any::<bool>(), 0..40)) {
        let text = bitmask::to_hex(&bits);
        prop_assert_eq!(text.len(), bits.len().div_ceil(4));
        prop_assert_eq!(bitmask::from_hex(&text, bits.len()).unwrap(), bits);
    }

    #[test]
    fn instances_round_trip(seed in any::<u64>(), n in 2usize..=4, signed in any::<bool>()) {
        let kind = if signed { Kind::RandomSigned { scale: 3.0 } } else { Kind::ProductWeights };
        let spec = GenSpec { n, r: 2, atoms: Atoms::Uniform(2), kind, seed };
        let inst = generate(&spec).unwrap();
        let back = Instance::from_json_str(&inst.to_json_string()).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(generate(&spec).unwrap(), inst);
    }

    #[test]
    fn ell_rule_is_least_even_above_threshold(c in 1.0f64..50.0, p in 1.01f64..20.0) {
        let p = ExtendedExponent::Finite(p);
        let ell = ell_pseudorandom(c, p).unwrap();
        let threshold = 2.0 * p.conjugate().value() + (1.0 - 1.0 / c) + p.reciprocal();
        prop_assert_eq!(ell % 2, 0);
        prop_assert!(ell as f64 >= threshold - 1e-9);
        prop_assert!((ell as f64) - 2.0 < threshold);
    }

    #[test]
    fn ones_satisfy_every_linear_form(atoms in prop::collection::vec(1usize..=2, 3)) {
        let spaces = atoms.iter().map(|&m| ProbSpace::uniform(m).unwrap()).collect();
        let sys = HypergraphSystem::complete(spaces, 2).unwrap();
        let one = WeightFamily::constant(&sys, 1.0).unwrap();
        let r = linear_forms_deviation(&sys, &one, 2, SearchMode::Exact, 0, 0).unwrap();
        prop_assert_eq!((r.min_value, r.max_value), (1.0, 1.0));
    }

    #[test]
    fn verdict_conjunction(a in 0u8..3, b in 0u8..3) {
        let v = |k: u8| [Verdict::True, Verdict::False, Verdict::Unknown][k as usize];
        let (x, y) = (v(a), v(b));
        prop_assert_eq!(x.and(y), y.and(x));
        prop_assert_eq!(x.and(y) == Verdict::False, x == Verdict::False || y == Verdict::False);
        prop_assert_eq!(x.and(y) == Verdict::True, x == Verdict::True && y == Verdict::True);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ascent_is_monotone_and_below_exact(seed in any::<u64>(), restart in 0usize..8, k in 0usize..3) {
        let spec = |s, kind| GenSpec { n: 3, r: 2, atoms: Atoms::Uniform(2), kind, seed: s };
        let nu = generate(&spec(seed, Kind::RandomNonneg { scale: 2.0 })).unwrap();
        let psi = generate(&spec(seed ^ 1, Kind::RandomNonneg { scale: 2.0 })).unwrap();
        let sys = nu.system.clone();
        let nu = WeightFamily::new(&sys, nu.functions).unwrap();
        let psi = WeightFamily::new(&sys, psi.functions).unwrap();
        let prob = c2b_problem(&sys, &nu, &psi, k, 2).unwrap();
        let fams = Families::new().with(Selector::Nu, &nu);
        for sigma in [1.0, -1.0] {
            let trace = ascent_trace(&sys, &prob, &fams, seed, restart, sigma).unwrap();
            for w in trace.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-14 * w[0].abs().max(1.0));
            }
        }
        let exact = sup_multilinear(&sys, &prob, &fams, SearchMode::Exact, 0, 0).unwrap();
        let heur = sup_multilinear(&sys, &prob, &fams, SearchMode::Heuristic, 4, seed).unwrap();
        prop_assert!(heur.value <= exact.value * (1.0 + 1e-12));
    }

    #[test]
    fn results_do_not_depend_on_thread_count((sys, f) in edge_instance(3..=3), ell in ell()) {
        let e = f.edge().to_vec();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| box_norm_direct(&sys, &e, &f, ell).unwrap().value)
        };
        prop_assert_eq!(run(1).to_bits(), run(8).to_bits());
    }
}
