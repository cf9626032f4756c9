use acmetric::classify::{check_nijenhuis_difference, check_projected_nijenhuis, classify};
use acmetric::connection::{
    lc_adapted, lc_from_coordinates, n_connection, n_connection_from_levi_civita, nabla_omega,
    nabla_psi, torsion, Endomorphism,
};
use acmetric::curvature::{curvature_direct, curvature_k, ricci_k};
use acmetric::{
    catalog, change_chart, parse, pull_back, AdaptedChart, AdaptedStructure, ScalarField, Slot,
    TensorGrid, Transition,
};
use proptest::prelude::*;

const COORDS: [&str; 5] = ["x", "y", "z", "u", "v"];

fn coords() -> Vec<String> {
    COORDS.iter().map(|s| s.to_string()).collect()
}

/// Small polynomial in the five coordinates, as text.
fn poly() -> impl Strategy<Value = String> {
    let term = (-1.0f64..1.0, proptest::collection::vec(0u32..3, 5)).prop_map(|(c, exps)| {
        let mut t = format!("({c:.6})");
        for (name, e) in COORDS.iter().zip(&exps) {
            match e {
                0 => {}
                1 => t.push_str(&format!("*{name}")),
                k => t.push_str(&format!("*{name}^{k}")),
            }
        }
        t
    });
    proptest::collection::vec(term, 1..5).prop_map(|ts| ts.join(" + "))
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-0.9f64..0.9, 5)
}

fn central_difference(f: &ScalarField, x: &[f64], i: usize, h: f64) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    (f.evaluate(&a).unwrap() - f.evaluate(&b).unwrap()) / (2.0 * h)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// Perturbs the flat structure: Γ, g and φ get small polynomial corrections.
fn perturbed(gamma: &[String], g: &[String], phi: &[String], eps: f64) -> AdaptedStructure {
    let gamma: Vec<String> = gamma.iter().map(|t| format!("{eps}*({t})")).collect();
    let gamma_refs: Vec<&str> = gamma.iter().map(String::as_str).collect();
    let chart = AdaptedChart::from_text(&COORDS, &gamma_refs, &[(-1.0, 1.0); 5], &[]).unwrap();
    let base = catalog::flat();
    let c = chart.coords().clone();
    let g_rows: Vec<Vec<ScalarField>> = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    let k = a.min(b) * 4 + a.max(b);
                    let diag = if a == b { "1" } else { "0" };
                    ScalarField::parse(&format!("{diag} + {eps}*({})", g[k]), c.clone()).unwrap()
                })
                .collect()
        })
        .collect();
    let phi_rows: Vec<Vec<ScalarField>> = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    let canon = base.phi()[a][b].to_string();
                    ScalarField::parse(&format!("{canon} + {eps}*({})", phi[a * 4 + b]), c.clone())
                        .unwrap()
                })
                .collect()
        })
        .collect();
    AdaptedStructure::new(chart, g_rows, phi_rows, false).unwrap()
}

fn perturbation() -> impl Strategy<Value = (Vec<String>, Vec<String>, Vec<String>)> {
    (
        proptest::collection::vec(poly(), 4),
        proptest::collection::vec(poly(), 16),
        proptest::collection::vec(poly(), 16),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_agree_with_finite_differences(text in poly(), x in point()) {
        let f = parse(&text, &coords()).unwrap();
        let jet = f.evaluate_jet(&x).unwrap();
        prop_assert!(close(jet.value, f.evaluate(&x).unwrap(), 1e-14));
        let h = 1e-5;
        for i in 0..5 {
            prop_assert!(close(jet.grad[i], central_difference(&f, &x, i, h), 1e-6));
            for j in 0..5 {
                let mut a = x.clone();
                let mut b = x.clone();
                a[j] += h;
                b[j] -= h;
                let ga = f.evaluate_jet(&a).unwrap().grad[i];
                let gb = f.evaluate_jet(&b).unwrap().grad[i];
                prop_assert!(close(jet.hess(i, j), (ga - gb) / (2.0 * h), 1e-6));
                prop_assert_eq!(jet.hess(i, j), jet.hess(j, i));
            }
        }
    }

    #[test]
    fn printing_then_parsing_preserves_values(text in poly(), x in point()) {
        let f = parse(&text, &coords()).unwrap();
        let g = parse(&f.to_string(), &coords()).unwrap();
        prop_assert!(close(f.evaluate(&x).unwrap(), g.evaluate(&x).unwrap(), 1e-12));
    }

    #[test]
    fn nijenhuis_identities_hold_for_any_structure((gamma, g, phi) in perturbation(), x in point()) {
        let s = perturbed(&gamma, &g, &phi, 0.05);
        let p = s.chart().point(&x).unwrap();
        prop_assert!(check_projected_nijenhuis(&s, &p).unwrap().max < 1e-9);
        prop_assert!(check_nijenhuis_difference(&s, &p).unwrap().max < 1e-9);
    }

    #[test]
    fn levi_civita_routes_agree((gamma, g, phi) in perturbation(), x in point()) {
        let s = perturbed(&gamma, &g, &phi, 0.05);
        let p = s.chart().point(&x).unwrap();
        let a = lc_adapted(&s, &p).unwrap().coeffs;
        let b = lc_from_coordinates(&s, &p).unwrap().coeffs;
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-9);
    }

    #[test]
    fn n_connection_routes_and_torsion_agree((gamma, g, phi) in perturbation(), x in point()) {
        let s = perturbed(&gamma, &g, &phi, 0.05);
        let p = s.chart().point(&x).unwrap();
        for endo in [Endomorphism::Canonical, Endomorphism::zero(4)] {
            let a = n_connection(&s, &endo, &p).unwrap().coeffs;
            let b = n_connection_from_levi_civita(&s, &endo, &p).unwrap().coeffs;
            prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
            let t = torsion(&s, &endo, &p, 1e-9).unwrap();
            prop_assert!(t.cross_check < 1e-10);
        }
        prop_assert!(torsion(&s, &Endomorphism::Canonical, &p, 1e-9).unwrap().is_skew);
    }

    #[test]
    fn canonical_frame_curvature_matches_direct((gamma, g, phi) in perturbation(), x in point()) {
        let s = perturbed(&gamma, &g, &phi, 0.05);
        let p = s.chart().point(&x).unwrap();
        let k = curvature_k(&s, &p).unwrap();
        let direct = curvature_direct(&s, &Endomorphism::Canonical, &p).unwrap();
        for idx in k.frame.indices() {
            prop_assert!((k.frame.get(&idx) - direct.get(&idx)).abs() < 1e-8);
        }
        let ric = ricci_k(&s, &p).unwrap();
        for a in 0..5 {
            prop_assert_eq!(ric.get(&[a, 4]), 0.0);
        }
    }

    #[test]
    fn parallel_omega_iff_parallel_psi((gamma, g, phi) in perturbation(), x in point(), eps in prop_oneof![Just(0.0), Just(0.05)]) {
        let s = perturbed(&gamma, &g, &phi, eps);
        let p = s.chart().point(&x).unwrap();
        let a = nabla_omega(&s, &p).unwrap().max_abs() < 1e-12;
        let b = nabla_psi(&s, &p).unwrap().max_abs() < 1e-12;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn chart_change_round_trips(
        lin in proptest::collection::vec(-0.5f64..0.5, 16),
        shift in poly(),
        comps in proptest::collection::vec(-2.0f64..2.0, 64),
        x in point(),
    ) {
        let s = catalog::flat();
        let c = s.chart().coords().clone();
        let map = (0..4)
            .map(|a| {
                let mut t = COORDS[a].to_string();
                for b in 0..4 {
                    t.push_str(&format!(" + ({:.6})*{}^2", lin[a * 4 + b] * 0.3, COORDS[b]));
                }
                ScalarField::parse(&t, c.clone()).unwrap()
            })
            .collect();
        // the shift may not depend on the ξ coordinate
        let shift = ScalarField::parse(&shift.replace('v', "x"), c.clone()).unwrap();
        let tr = Transition::new(map, shift).unwrap();
        let t = TensorGrid::from_data(5, &[Slot::FrameUpper, Slot::FrameLower, Slot::FrameLower], comps).unwrap();
        let there = change_chart(s.chart(), &tr, &t, &x).unwrap();
        let back = pull_back(s.chart(), &tr, &there, &x).unwrap();
        prop_assert!(back.max_abs_diff(&t).unwrap() < 1e-9);
    }
}

#[test]
fn verdicts_are_monotone_in_tolerance() {
    for s in catalog::all() {
        let tight = classify(&s, 8, 3, 1e-9).unwrap();
        let loose = classify(&s, 8, 3, 1e-5).unwrap();
        for (name, v) in &tight.verdicts {
            if v.holds {
                assert!(loose.verdicts[name].holds, "{name}");
            }
        }
    }
}

#[test]
fn verdicts_are_stable_when_sampling_more() {
    for s in catalog::all() {
        let few = classify(&s, 32, 42, 1e-7).unwrap();
        let many = classify(&s, 128, 42, 1e-7).unwrap();
        for (name, v) in &few.verdicts {
            assert_eq!(v.holds, many.verdicts[name].holds, "{name}");
        }
    }
}

#[test]
fn example1_trace_of_psi_squared_is_constant() {
    let s = catalog::example1();
    let traces: Vec<f64> = (0..32)
        .map(|i| {
            s.derived(&s.chart().sample(42, i).unwrap())
                .unwrap()
                .trace_psi_sq
        })
        .collect();
    let lo = traces.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = traces.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo < 1e-12);
}
