use boxlab_core::box_norms::{box_norm, box_norm_direct};
use boxlab_core::cut_norms::cut_norm;
use boxlab_core::generators::{generate_family, Atoms, GenSpec, Kind};
use boxlab_core::pseudo::conditions::c2b_problem;
use boxlab_core::pseudo::lemmas::{lemma51_deviation, lemma51_mass, OracleSearch};
use boxlab_core::pseudo::sup::sup_objective;
use boxlab_core::pseudo::{
    check_c1, check_c3, sup_multilinear, thm42_certificate, Families, PseudoParams, Selector, WeightFamily,
};
use boxlab_core::{EdgeFunction, ExtendedExponent, HypergraphSystem, ProbSpace, SearchMode, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn triangle(atoms: usize) -> HypergraphSystem {
    HypergraphSystem::complete(vec![ProbSpace::uniform(atoms).unwrap(); 3], 2).unwrap()
}

fn random_family(sys: &HypergraphSystem, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> WeightFamily {
    let fs = sys
        .edges()
        .iter()
        .map(|e| EdgeFunction::from_fn(sys, e, |_| rng.gen_range(lo..hi)).unwrap())
        .collect();
    WeightFamily::new(sys, fs).unwrap()
}

/// All points of the full product space as (weight, coordinates).
fn points(sys: &HypergraphSystem) -> Vec<(f64, Vec<usize>)> {
    let mut out = vec![(1.0, vec![])];
    for i in 0..sys.n() {
        let w = sys.space(i).weights();
        out = out
            .into_iter()
            .flat_map(|(pw, x)| {
                (0..w.len()).map(move |a| {
                    let mut y = x.clone();
                    y.push(a);
                    (pw * w[a], y)
                })
            })
            .collect();
    }
    out
}

#[test]
fn c1_matches_direct_subset_expectations() {
    let sys = triangle(2);
    for seed in 0..5 {
        let eps = 0.01;
        let spec = GenSpec {
            n: 3,
            r: 2,
            atoms: Atoms::Uniform(2),
            kind: Kind::PerturbedOnes { eps },
            seed,
        };
        let (_, nu) = generate_family(&spec).unwrap();
        let mut oracle = f64::INFINITY;
        for mask in 1..8usize {
            let mut total = 0.0;
            for (w, x) in points(&sys) {
                let mut prod = w;
                for k in 0..3 {
                    if mask >> k & 1 == 1 {
                        prod *= nu.get(k).at_point(&x);
                    }
                }
                total += prod;
            }
            oracle = oracle.min(total);
        }
        let params = PseudoParams::new(1.0, 0.5, ExtendedExponent::Infinity).unwrap();
        let r = check_c1(&sys, &nu, &params).unwrap();
        assert!((r.worst_value - oracle).abs() < 1e-14);
        let k = 12.0;
        assert!(r.worst_value >= 1.0 - 3.0 * eps - k * eps * eps);
        assert!(r.worst_value <= 1.0 + 3.0 * eps + k * eps * eps);
    }
}

/// `E[ν_{e,G}^ℓ]` by replicating the outside coordinates `ℓ` times.
fn c3_replica_oracle(sys: &HypergraphSystem, nu: &WeightFamily, ell: u32) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (k, e) in sys.edges().iter().enumerate() {
        let out: Vec<usize> = (0..sys.n()).filter(|v| !e.contains(v)).collect();
        let others: Vec<usize> = (0..sys.edges().len()).filter(|&j| j != k).collect();
        for mask in 1..1usize << others.len() {
            let members: Vec<usize> = (0..others.len())
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| others[j])
                .collect();
            let mut total = 0.0;
            // coordinates: e, then ℓ copies of `out`
            let mut axes: Vec<usize> = e.clone();
            for _ in 0..ell {
                axes.extend(&out);
            }
            let sizes: Vec<usize> = axes.iter().map(|&v| sys.space(v).atoms()).collect();
            let count: usize = sizes.iter().product();
            for idx in 0..count {
                let mut digits = vec![0; axes.len()];
                let mut r = idx;
                for t in (0..axes.len()).rev() {
                    digits[t] = r % sizes[t];
                    r /= sizes[t];
                }
                let w: f64 = axes
                    .iter()
                    .zip(&digits)
                    .map(|(&v, &d)| sys.space(v).weights()[d])
                    .product();
                let mut prod = w;
                for rep in 0..ell as usize {
                    let mut x = vec![0; sys.n()];
                    for (t, &v) in e.iter().enumerate() {
                        x[v] = digits[t];
                    }
                    for (t, &v) in out.iter().enumerate() {
                        x[v] = digits[e.len() + rep * out.len() + t];
                    }
                    for &j in &members {
                        prod *= nu.get(j).at_point(&x);
                    }
                }
                total += prod;
            }
            worst = worst.max(total);
        }
    }
    worst
}

#[test]
fn c3_matches_replica_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (atoms, ell) in [(2, 2), (3, 2), (2, 4)] {
        let sys = triangle(atoms);
        let nu = random_family(&sys, &mut rng, 0.0, 2.0);
        let params = PseudoParams::new(1.0, 0.5, ExtendedExponent::Infinity)
            .unwrap()
            .with_ell(ell)
            .unwrap();
        let got = check_c3(&sys, &nu, &params).unwrap().worst_value;
        let want = c3_replica_oracle(&sys, &nu, ell);
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }
    // four vertices, 3-uniform
    let sys = HypergraphSystem::complete(vec![ProbSpace::new(&[0.3, 0.7]).unwrap(); 4], 3).unwrap();
    let nu = random_family(&sys, &mut rng, 0.0, 2.0);
    let params = PseudoParams::new(2.0, 0.5, ExtendedExponent::Finite(2.0)).unwrap();
    let got = check_c3(&sys, &nu, &params).unwrap().worst_value;
    let want = c3_replica_oracle(&sys, &nu, params.ell);
    assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
}

#[test]
fn sup_heuristic_tracks_exact() {
    let sys = triangle(2);
    let mut agree = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nu = random_family(&sys, &mut rng, 0.0, 2.0);
        let psi = random_family(&sys, &mut rng, 0.0, 2.0);
        let prob = c2b_problem(&sys, &nu, &psi, 0, 2).unwrap();
        let fams = Families::new().with(Selector::Nu, &nu);
        let exact = sup_multilinear(&sys, &prob, &fams, SearchMode::Exact, 0, 0).unwrap();
        let heur = sup_multilinear(&sys, &prob, &fams, SearchMode::Heuristic, 32, seed).unwrap();
        assert!(heur.value <= exact.value * (1.0 + 1e-12), "seed {seed}");
        if heur.value >= exact.value * (1.0 - 1e-12) {
            agree += 1;
        }
        // the all-ones vertex is one candidate
        let mean_diff: f64 = nu.get(0).sub(psi.get(0)).unwrap().values().iter().sum::<f64>() / 4.0;
        assert!(exact.value >= mean_diff.abs() - 1e-15);
    }
    assert!(agree >= 95, "heuristic matched exact on {agree} of 100");
}

#[test]
fn interior_points_never_beat_vertices() {
    let sys = triangle(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let nu = random_family(&sys, &mut rng, 0.0, 2.0);
        let psi = random_family(&sys, &mut rng, 0.0, 2.0);
        let prob = c2b_problem(&sys, &nu, &psi, 1, 2).unwrap();
        let fams = Families::new().with(Selector::Nu, &nu);
        let sup = sup_multilinear(&sys, &prob, &fams, SearchMode::Exact, 0, 0)
            .unwrap()
            .value;
        for _ in 0..50 {
            let gs: Vec<EdgeFunction> = prob
                .slots
                .iter()
                .map(|slot| {
                    let k = sys.edge_index(&slot.edge).unwrap();
                    let use_nu = rng.gen::<bool>();
                    let vals = (0..4)
                        .map(|c| {
                            let b = if use_nu { nu.get(k).values()[c] } else { 1.0 };
                            b * rng.gen::<f64>()
                        })
                        .collect();
                    EdgeFunction::new(&sys, &slot.edge, vals).unwrap()
                })
                .collect();
            let v = sup_objective(&sys, &prob, &gs).unwrap().abs();
            assert!(v <= sup * (1.0 + 1e-12) + 1e-15);
        }
    }
}

#[test]
fn product_weights_have_closed_form_box_norms() {
    for (n, r, ell) in [(3, 3, 2), (3, 2, 4), (4, 2, 2), (3, 3, 4)] {
        let spec = GenSpec {
            n,
            r,
            atoms: Atoms::PerSpace((0..n).map(|i| 2 + i % 2).collect()),
            kind: Kind::ProductWeights,
            seed: 5,
        };
        let (sys, fam) = generate_family(&spec).unwrap();
        for (k, e) in sys.edges().iter().enumerate() {
            let f = fam.get(k);
            let shape = f.shape().to_vec();
            let mut expected = 1.0;
            for (axis, &v) in e.iter().enumerate() {
                // marginal of a mean-one tensor factor recovers the factor
                let w = sys.cell_weights(e);
                let mut u = vec![0.0; shape[axis]];
                let strides: Vec<usize> = (0..shape.len()).map(|t| shape[t + 1..].iter().product()).collect();
                for (c, &val) in f.values().iter().enumerate() {
                    let a = c / strides[axis] % shape[axis];
                    u[a] += w[c] * val / sys.space(v).weights()[a];
                }
                let q = (ell as f64).powi(e.len() as i32 - 1);
                let m: f64 = u.iter().zip(sys.space(v).weights()).map(|(x, w)| w * x.powf(q)).sum();
                expected *= m.powf(1.0 / q);
            }
            let got = box_norm(&sys, e, f, ell).unwrap().value;
            assert!((got - expected).abs() <= 1e-9 * expected, "{got} vs {expected}");
        }
    }
}

#[test]
fn recursive_and_direct_box_norms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..40 {
        let atoms: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=3)).collect();
        let spaces = atoms
            .iter()
            .map(|&m| ProbSpace::new(&(0..m).map(|_| rng.gen_range(0.1..1.0)).collect::<Vec<_>>()).unwrap())
            .collect();
        let sys = HypergraphSystem::new(spaces, vec![vec![0, 1, 2]]).unwrap();
        let f = EdgeFunction::from_fn(&sys, &[0, 1, 2], |_| rng.gen_range(-1.0..1.0)).unwrap();
        let a = box_norm(&sys, &[0, 1, 2], &f, 2).unwrap().value;
        let b = box_norm_direct(&sys, &[0, 1, 2], &f, 2).unwrap().value;
        assert!((a - b).abs() <= 1e-9 * a.max(b).max(1e-300));
    }
}

#[test]
fn cut_norm_is_bounded_by_the_box_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in [2, 3] {
        let sys = HypergraphSystem::new(vec![ProbSpace::uniform(m).unwrap(); 2], vec![vec![0, 1]]).unwrap();
        for _ in 0..30 {
            let f = EdgeFunction::from_fn(&sys, &[0, 1], |_| rng.gen_range(-1.0..1.0)).unwrap();
            let exact = cut_norm(&sys, &[0, 1], &f, SearchMode::Exact, 0, 0).unwrap().value;
            let heur = cut_norm(&sys, &[0, 1], &f, SearchMode::Heuristic, 8, 1).unwrap().value;
            assert!(heur <= exact + 1e-15);
            assert!(exact <= box_norm(&sys, &[0, 1], &f, 2).unwrap().value + 1e-12);
        }
    }
}

#[test]
fn thm42_soundness_on_random_instances() {
    let sys = triangle(2);
    let one = WeightFamily::constant(&sys, 1.0).unwrap();
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_family(&sys, &mut rng, 0.0, 1.0);
        let cert = thm42_certificate(
            &sys,
            &one,
            &phi,
            1.0,
            ExtendedExponent::Infinity,
            1e-15,
            SearchMode::Exact,
            4,
            seed,
        )
        .unwrap();
        if cert.hypotheses_hold == Verdict::True && cert.report.all_exact() {
            assert_eq!(cert.verdict, Verdict::True, "seed {seed}");
        }
        let search = OracleSearch {
            mode: SearchMode::Exact,
            budget: 1,
            seed: 0,
        };
        let d = lemma51_deviation(&sys, &one, &phi, 0, 1.0, 1e-15, 2, search).unwrap();
        assert_eq!(d.value, 0.0);
        let m = lemma51_mass(&sys, &one, &phi, 2, 1.0, 2, search).unwrap();
        assert_eq!(m.holds, Verdict::True);
    }
}
