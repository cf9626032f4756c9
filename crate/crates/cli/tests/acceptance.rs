//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

#![allow(clippy::needless_range_loop)]

use std::path::PathBuf;
use std::process::Command;

use acmetric::classify::{
    check_aqs_phi_derivative, check_canonical_phi_parallel, check_nijenhuis_difference,
    check_projected_nijenhuis, classify, nijenhuis_tensors,
};
use acmetric::connection::{
    lc_adapted, lc_from_coordinates, metricity_defect, nabla_omega, torsion, Endomorphism,
};
use acmetric::curvature::{einstein_check, einstein_residual, ricci_wagner, schouten, OmegaSource};
use acmetric::{parse, AdaptedChart, AdaptedStructure, Point, ScalarField};
use acmetric_cli::load_manifest;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const SAMPLES: usize = 32;
const FIXTURES: [&str; 5] = [
    "flat",
    "example1",
    "example2",
    "example3-qs",
    "example3-aqs",
];
const COORDS: [&str; 5] = ["x", "y", "z", "u", "v"];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> AdaptedStructure {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("fixtures/{name}.json"));
    load_manifest(&path).expect("fixture loads").structure
}

fn samples(s: &AdaptedStructure) -> Vec<Point> {
    s.chart().samples(SEED, SAMPLES).expect("samples")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn levi_civita_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    for name in FIXTURES {
        let s = fixture(name);
        for p in samples(&s) {
            let a = lc_adapted(&s, &p).map_err(err)?.coeffs;
            let b = lc_from_coordinates(&s, &p).map_err(err)?.coeffs;
            let d = a.max_abs_diff(&b).map_err(err)?;
            ensure(d < 1e-8, || format!("{name}: residual {d:e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("max residual {worst:e}"))
}

fn torsion_skew_biconditional() -> Outcome {
    const E: f64 = 0.25;
    let mut perturbation = vec![vec![0.0; 4]; 4];
    perturbation[3][2] = E;
    let (mut worst_skew, mut least_perturbed) = (0.0_f64, f64::INFINITY);
    for name in FIXTURES {
        let s = fixture(name);
        for p in samples(&s) {
            let t = torsion(&s, &Endomorphism::Canonical, &p, 1e-9).map_err(err)?;
            ensure(t.skew_residual < 1e-9, || {
                format!("{name}: N = 2ψ skew residual {:e}", t.skew_residual)
            })?;
            worst_skew = worst_skew.max(t.skew_residual);
            let endo = Endomorphism::CanonicalPlus(perturbation.clone());
            let t = torsion(&s, &endo, &p, 1e-9).map_err(err)?;
            ensure(!t.is_skew && t.skew_residual >= E, || {
                format!(
                    "{name}: perturbed N gave is_skew {} residual {:e}",
                    t.is_skew, t.skew_residual
                )
            })?;
            least_perturbed = least_perturbed.min(t.skew_residual);
        }
    }
    Ok(format!(
        "N = 2ψ residual {worst_skew:e}; perturbed residual >= {least_perturbed:e}"
    ))
}

fn random_poly(rng: &mut ChaCha8Rng) -> String {
    let terms = rng.gen_range(1..4);
    (0..terms)
        .map(|_| {
            let mut t = format!("({:.6})", rng.gen_range(-1.0..1.0));
            for c in COORDS {
                match rng.gen_range(0..3) {
                    0 => {}
                    1 => t.push_str(&format!("*{c}")),
                    k => t.push_str(&format!("*{c}^{k}")),
                }
            }
            t
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Flat structure with small random polynomial corrections to Γ, g and φ.
fn perturbed_flat(rng: &mut ChaCha8Rng) -> AdaptedStructure {
    let eps = 0.05;
    let gamma: Vec<String> = (0..4)
        .map(|_| format!("{eps}*({})", random_poly(rng)))
        .collect();
    let gamma_refs: Vec<&str> = gamma.iter().map(String::as_str).collect();
    let chart =
        AdaptedChart::from_text(&COORDS, &gamma_refs, &[(-1.0, 1.0); 5], &[]).expect("chart");
    let c = chart.coords().clone();
    let base = fixture("flat");
    let mut g = vec![vec![None; 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            let diag = if a == b { "1" } else { "0" };
            let f =
                ScalarField::parse(&format!("{diag} + {eps}*({})", random_poly(rng)), c.clone())
                    .expect("g");
            g[a][b] = Some(f.clone());
            g[b][a] = Some(f);
        }
    }
    let g = g
        .into_iter()
        .map(|r| r.into_iter().map(Option::unwrap).collect())
        .collect();
    let phi = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    let text = format!("{} + {eps}*({})", base.phi()[a][b], random_poly(rng));
                    ScalarField::parse(&text, c.clone()).expect("phi")
                })
                .collect()
        })
        .collect();
    AdaptedStructure::new(chart, g, phi, false).expect("perturbed structure")
}

fn nijenhuis_identities() -> Outcome {
    let mut structures: Vec<(String, AdaptedStructure)> = FIXTURES
        .iter()
        .map(|n| (n.to_string(), fixture(n)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..10 {
        structures.push((format!("perturbed flat #{i}"), perturbed_flat(&mut rng)));
    }
    let mut worst = 0.0_f64;
    for (name, s) in &structures {
        for p in samples(s) {
            let a = check_projected_nijenhuis(s, &p).map_err(err)?.max;
            let b = check_nijenhuis_difference(s, &p).map_err(err)?.max;
            ensure(a < 1e-9 && b < 1e-9, || {
                format!("{name}: residuals {a:e}, {b:e}")
            })?;
            worst = worst.max(a).max(b);
        }
    }
    Ok(format!(
        "{} structures, max residual {worst:e}",
        structures.len()
    ))
}

fn example1() -> Outcome {
    let s = fixture("example1");
    let mut traces = Vec::new();
    for p in samples(&s) {
        let nij = nijenhuis_tensors(&s, &p).map_err(err)?;
        let n1 = nij.n1.get(&[0, 1, 4]);
        ensure((n1 + 1.0).abs() < 1e-9, || {
            format!("N1(e_1, e_2) ξ-component {n1}")
        })?;
        for k in 0..5 {
            let v = nij.n_tilde.get(&[0, 1, k]);
            ensure(v.abs() < 1e-9, || {
                format!("Ñ(e_1, e_2) component {k} = {v}")
            })?;
        }
        let dw = nabla_omega(&s, &p).map_err(err)?.max_abs();
        ensure(dw < 1e-9, || format!("∇ω = {dw:e}"))?;
        traces.push(s.derived(&p).map_err(err)?.trace_psi_sq);
    }
    let c = classify(&s, SAMPLES, SEED, 1e-7).map_err(err)?;
    ensure(
        c.holds("almost_normal") && !c.holds("normal") && c.holds("aqs"),
        || {
            format!(
                "classification {:?}",
                c.verdicts
                    .iter()
                    .map(|(k, v)| (k, v.holds))
                    .collect::<Vec<_>>()
            )
        },
    )?;
    let lo = traces.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = traces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ensure(hi - lo < 1e-12, || format!("tr ψ² spread {:e}", hi - lo))?;
    Ok(format!("tr ψ² = {lo}, almost normal, not normal, aqs"))
}

fn example2() -> Outcome {
    let s = fixture("example2");
    let mut worst = 0.0_f64;
    for p in samples(&s) {
        let y = p.coords()[1];
        let via_gamma = s.chart().d_eta_xi(&p).map_err(err)?[0];
        let rel = (via_gamma - y).abs() / y.abs();
        ensure(rel < 1e-9, || {
            format!("2dη(ξ, e_1) = {via_gamma} at y = {y}")
        })?;
        // dη(ξ, e_1) = dη(∂_v, ∂_x) since dη(∂_v, ∂_v) = 0
        let form = s.d_eta(&p).map_err(err)?.get(&[4, 0]);
        let rel_form = (form - y / 2.0).abs() / (y / 2.0).abs();
        ensure(rel_form < 1e-9, || {
            format!("dη(ξ, e_1) = {form} at y = {y}")
        })?;
        worst = worst.max(rel).max(rel_form);
        let m = metricity_defect(&s, &Endomorphism::Canonical, &p)
            .map_err(err)?
            .get(&[4, 4, 0]);
        ensure((m - y).abs() < 1e-9, || {
            format!("metricity (n, n, 1) = {m} at y = {y}")
        })?;
        let rank = s.chart().rank_at(&p).map_err(err)?;
        ensure(rank % 2 == 0, || format!("rank {rank} at {:?}", p.coords()))?;
    }
    let c = classify(&s, SAMPLES, SEED, 1e-7).map_err(err)?;
    ensure(!c.holds("aqs"), || "classified aqs".into())?;
    Ok(format!("relative error {worst:e}, not aqs, even rank"))
}

fn example3_ricci() -> Outcome {
    let s = fixture("example3-qs");
    let coords: Vec<String> = COORDS.iter().map(|c| c.to_string()).collect();
    let u = parse("-ln(1+x^2+y^2)", &coords).map_err(err)?;
    let (mut worst_ricci, mut worst_k) = (0.0_f64, 0.0_f64);
    for p in samples(&s) {
        let r = ricci_wagner(&s, &p).map_err(err)?;
        let gv = |a: usize, b: usize| s.metric()[a][b].evaluate(p.coords());
        for a in 0..2 {
            for b in 0..2 {
                let gab = gv(a, b).map_err(err)?;
                let d = (r.get(&[a, b]) + 4.0 * gab).abs();
                ensure(d < 1e-7, || format!("r_{a}{b} residual {d:e}"))?;
                worst_ricci = worst_ricci.max(d);
            }
        }
        // Gaussian curvature of e^{2u}(dx² + dy²) is -e^{-2u} Δu
        let jet = u.evaluate_jet(p.coords()).map_err(err)?;
        let gauss = -(-2.0 * jet.value).exp() * (jet.hess(0, 0) + jet.hess(1, 1));
        ensure((gauss - 4.0).abs() < 1e-7, || {
            format!("Gaussian curvature {gauss}")
        })?;
        // sectional curvature g(R(e_1, e_2)e_2, e_1) / (g_11 g_22 - g_12²)
        let rs = schouten(&s, &p).map_err(err)?;
        let num: f64 = (0..2)
            .map(|d| gv(0, d).unwrap() * rs.get(&[d, 0, 1, 1]))
            .sum();
        let det = gv(0, 0).map_err(err)? * gv(1, 1).map_err(err)? - gv(0, 1).map_err(err)?.powi(2);
        let sectional = num / det;
        ensure((sectional - gauss).abs() < 1e-7, || {
            format!("sectional {sectional} vs Gaussian {gauss}")
        })?;
        worst_k = worst_k.max((sectional - 4.0).abs());
    }
    Ok(format!(
        "Ricci residual {worst_ricci:e}, |K - 4| {worst_k:e}"
    ))
}

fn example3_einstein() -> Outcome {
    let s = fixture("example3-qs");
    let ff = einstein_check(&s, SAMPLES, SEED, 1e-7, OmegaSource::FundamentalForm).map_err(err)?;
    ensure(ff.holds && ff.max_residual < 1e-7, || {
        format!("fundamental_form residual {:e}", ff.max_residual)
    })?;
    let mut worst = 0.0_f64;
    for p in samples(&s) {
        let x = p.coords();
        let t = 1.0 + x[0] * x[0] + x[1] * x[1];
        let predicted = (-4.0 / (t * t) + t * t).abs();
        let got = einstein_residual(&s, &p, OmegaSource::DEta)
            .map_err(err)?
            .get(&[0, 0])
            .abs();
        ensure((got - predicted).abs() < 1e-6, || {
            format!("d_eta residual {got} vs predicted {predicted}")
        })?;
        worst = worst.max((got - predicted).abs());
    }
    Ok(format!(
        "fundamental_form residual {:e}; d_eta profile error {worst:e}",
        ff.max_residual
    ))
}

fn canonical_phi_parallel_biconditional() -> Outcome {
    let qs = fixture("example3-qs");
    let mut qs_max = 0.0_f64;
    for p in samples(&qs) {
        qs_max = qs_max.max(check_canonical_phi_parallel(&qs, &p).map_err(err)?.max);
    }
    ensure(qs_max < 1e-8, || format!("example3-qs ∇ᴺφ = {qs_max:e}"))?;
    let c = classify(&qs, SAMPLES, SEED, 1e-7).map_err(err)?;
    ensure(c.holds("quasi_sasakian"), || {
        "example3-qs not classified quasi-Sasakian".into()
    })?;

    let aqs = fixture("example3-aqs");
    let mut aqs_min = f64::INFINITY;
    for p in samples(&aqs) {
        aqs_min = aqs_min.min(check_canonical_phi_parallel(&aqs, &p).map_err(err)?.max);
    }
    ensure(aqs_min > 1e-3, || {
        format!("example3-aqs ∇ᴺφ = {aqs_min:e} at some sample")
    })?;
    let c = classify(&aqs, SAMPLES, SEED, 1e-7).map_err(err)?;
    ensure(c.holds("aqs") && !c.holds("quasi_sasakian"), || {
        let v = |k: &str| c.verdicts[k].max_residual;
        format!(
            "example3-aqs classified aqs = {}, quasi_sasakian = {} (almost_normal residual {:e}, dΩ residual {:e})",
            c.holds("aqs"),
            c.holds("quasi_sasakian"),
            v("almost_normal"),
            v("d_Omega_zero"),
        )
    })?;
    Ok(format!("qs ∇ᴺφ {qs_max:e}; aqs ∇ᴺφ >= {aqs_min:e}"))
}

fn aqs_phi_derivative_biconditional() -> Outcome {
    let mut summary = Vec::new();
    for name in FIXTURES {
        let s = fixture(name);
        let per: Vec<f64> = samples(&s)
            .iter()
            .map(|p| check_aqs_phi_derivative(&s, p).map(|r| r.max))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let max = per.iter().copied().fold(0.0, f64::max);
        let is_aqs = classify(&s, SAMPLES, SEED, 1e-7).map_err(err)?.holds("aqs");
        ensure((max < 1e-7) == is_aqs, || {
            format!("{name}: aqs = {is_aqs} but residual {max:e}")
        })?;
        if name == "example2" {
            let min = per.iter().copied().fold(f64::INFINITY, f64::min);
            ensure(min > 1e-3, || {
                format!("example2 residual {min:e} at some sample")
            })?;
        }
        summary.push(format!("{name} {max:.1e}"));
    }
    Ok(summary.join(", "))
}

fn jets_vs_finite_differences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let coords: Vec<String> = COORDS.iter().map(|c| c.to_string()).collect();
    let h = 1e-4;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1.0);
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let text = random_poly(&mut rng);
        let f = parse(&text, &coords).map_err(err)?;
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let eval = |dx: &[(usize, f64)]| {
            let mut y = x.clone();
            for (i, d) in dx {
                y[*i] += d;
            }
            f.evaluate(&y).unwrap()
        };
        let jet = f.evaluate_jet(&x).map_err(err)?;
        for i in 0..5 {
            let fd = (eval(&[(i, h)]) - eval(&[(i, -h)])) / (2.0 * h);
            ensure(close(jet.grad[i], fd), || {
                format!("#{k} {text}: ∂_{i} {} vs {fd}", jet.grad[i])
            })?;
            worst = worst.max((jet.grad[i] - fd).abs());
            for j in 0..5 {
                let fd =
                    (eval(&[(i, h), (j, h)]) - eval(&[(i, h), (j, -h)]) - eval(&[(i, -h), (j, h)])
                        + eval(&[(i, -h), (j, -h)]))
                        / (4.0 * h * h);
                let v = jet.hess(i, j);
                ensure(close(v, fd), || {
                    format!("#{k} {text}: ∂_{i}∂_{j} {v} vs {fd}")
                })?;
                worst = worst.max((v - fd).abs());
            }
        }
    }
    Ok(format!("100 polynomials, max difference {worst:e}"))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_acmetric");
    for name in FIXTURES {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("fixtures/{name}.json"));
        let run = |threads: &str| {
            Command::new(bin)
                .args(["check", "--json"])
                .arg(&path)
                .env("RAYON_NUM_THREADS", threads)
                .output()
                .map_err(err)
        };
        let a = run("1")?;
        let b = run("8")?;
        ensure(a.status.success(), || {
            format!("{name}: exit {:?}", a.status.code())
        })?;
        ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || {
            format!("{name}: reports differ")
        })?;
    }
    Ok("five fixtures, 1 vs 8 threads".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("levi-civita oracle", levi_civita_oracle),
        ("torsion skew biconditional", torsion_skew_biconditional),
        ("nijenhuis identities", nijenhuis_identities),
        ("example 1", example1),
        ("example 2", example2),
        ("example 3 ricci", example3_ricci),
        ("example 3 einstein", example3_einstein),
        (
            "canonical phi parallel biconditional",
            canonical_phi_parallel_biconditional,
        ),
        (
            "aqs phi derivative biconditional",
            aqs_phi_derivative_biconditional,
        ),
        ("jets vs finite differences", jets_vs_finite_differences),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
