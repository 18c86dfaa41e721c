//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{max_abs, odometer, phase, random_complex, random_frame, random_unitary, theta_oracle};
use starhilb::dsl::{check_equal, parse, Environment};
use starhilb::fields::{dec, enc, factor_through_theta, FieldSpace, SiteString, DEFAULT_SIZE_BUDGET};
use starhilb::frobenius::{
    algebra_from_basis, algebra_from_onb, check_frobenius_laws, check_strong_complementarity,
};
use starhilb::groups::{ratio_to_f64, LatticePoint};
use starhilb::hilb::{dimension_scalar, snake_residuals, Morphism, TruncatedSpace};
use starhilb::qho::{ladder_ops, number_operator, FieldKind, Oscillator, OscillatorField};
use starhilb::sparse::SparseMatrix;
use starhilb::systems::{make_lattice_system, make_real_system, make_torus_system, QuantumSystem};
use starhilb::report::CheckReport;

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        summary: summary.into(),
    }
}

fn f64_of(p: &LatticePoint) -> Vec<f64> {
    p.coords().iter().map(ratio_to_f64).collect()
}

fn small_systems() -> Vec<QuantumSystem> {
    let mut out = Vec::new();
    for omega in 1..=2 {
        for n in 1..=2 {
            out.push(make_torus_system(omega, n).unwrap());
            out.push(make_lattice_system(omega, n).unwrap());
        }
    }
    out.push(make_real_system(3, 3, 1).unwrap());
    out.push(make_real_system(3, 5, 1).unwrap());
    out
}

fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut spaces: Vec<TruncatedSpace> = Vec::new();
    for sys in small_systems() {
        spaces.push(sys.space().clone());
        spaces.push(sys.space().dual());
    }
    for (dim, ambient) in [(1, 1), (2, 5), (3, 7), (6, 6), (4, 16)] {
        spaces.push(TruncatedSpace::padded("P", dim, ambient, None).unwrap());
        let frame = random_frame(&mut rng, ambient, dim);
        spaces.push(TruncatedSpace::new("R", ambient, &frame, None).unwrap());
    }
    let a = TruncatedSpace::padded("A", 2, 3, None).unwrap();
    let b = TruncatedSpace::new("B", 4, &random_frame(&mut rng, 4, 3), None).unwrap();
    spaces.push(a.tensor(&b));
    spaces.push(a.tensor(&b.dual()).tensor(&a));
    spaces.push(a.power(3));
    for tau in [1, 4, 20] {
        spaces.push(Oscillator::new(tau).unwrap().space().clone());
    }
    let site = TruncatedSpace::padded("S", 2, 3, None).unwrap();
    let sites = (0..3).map(|k| LatticePoint::from_fractions(&[(k, 1)])).collect();
    spaces.push(FieldSpace::over_sites(&site, sites, DEFAULT_SIZE_BUDGET).unwrap().space().clone());
    spaces.push(
        OscillatorField::on_uv_lattice(2, 3, 1, 1, 1.0, 1.0)
            .unwrap()
            .space()
            .clone(),
    );
    spaces.push(TruncatedSpace::unit());

    // Oracle: P = E E†, checked densely.
    let mut worst: f64 = 0.0;
    for s in &spaces {
        let e = s.frame().to_dense();
        let p = &e * e.adjoint();
        let gram = max_abs(&(e.adjoint() * &e - DMatrix::identity(s.dim(), s.dim())));
        let idem = max_abs(&(&p * &p - &p));
        let sa = max_abs(&(&p - p.adjoint()));
        let lib = s.frame_residuals().max();
        worst = worst.max(gram).max(idem).max(sa).max(lib);
    }
    outcome(
        worst < 1e-9,
        format!("projector/frame laws over {} spaces, worst residual {worst:.3e}", spaces.len()),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in 1..=50usize {
        let mut spaces = vec![TruncatedSpace::standard("H", d)];
        if d % 7 == 0 || d <= 4 {
            spaces.push(TruncatedSpace::padded("P", d, d + 3, None).unwrap());
            spaces.push(TruncatedSpace::new("R", d + 1, &random_frame(&mut rng, d + 1, d), None).unwrap());
        }
        for h in spaces {
            let (s1, s2) = snake_residuals(&h);
            let dim_err = (dimension_scalar(&h) - C64::new(d as f64, 0.0)).norm();
            worst = worst.max(s1).max(s2).max(dim_err);
            count += 1;
        }
    }
    outcome(
        worst < 1e-9,
        format!("snake equations and loop = dim for {count} spaces with D <= 50, worst {worst:.3e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut worst_special: f64 = 0.0;
    let mut count = 0;
    let mut all = true;
    for n in 1..=2usize {
        for omega in 1u32.. {
            let order = (2 * omega + 1) as usize;
            let size = order.pow(n as u32);
            if size > 125 {
                break;
            }
            let sys = make_torus_system(omega, n).unwrap();
            let rep = check_frobenius_laws(sys.x_alg(), 1e-9);
            let c = rep.detail("speciality").unwrap().fitted_scalar.unwrap();
            worst_special = worst_special.max((c - C64::new(size as f64, 0.0)).norm());
            worst = worst.max(rep.residual);
            all &= rep.passed;
            let rep = check_frobenius_laws(sys.z_alg(), 1e-9);
            let c = rep.detail("speciality").unwrap().fitted_scalar.unwrap();
            worst_special = worst_special.max((c - C64::new(1.0, 0.0)).norm());
            worst = worst.max(rep.residual);
            all &= rep.passed;
            count += 2;
        }
    }
    for sys in [make_real_system(3, 3, 1).unwrap(), make_real_system(3, 5, 1).unwrap()] {
        for (alg, expected) in [(sys.x_alg(), sys.dim() as f64), (sys.z_alg(), 1.0)] {
            let rep = check_frobenius_laws(alg, 1e-9);
            let c = rep.detail("speciality").unwrap().fitted_scalar.unwrap();
            worst_special = worst_special.max((c - C64::new(expected, 0.0)).norm());
            worst = worst.max(rep.residual);
            all &= rep.passed;
            count += 1;
        }
    }
    for d in [2usize, 5, 12] {
        let h = TruncatedSpace::standard("H", d);
        let u = SparseMatrix::from_dense(&random_unitary(&mut rng, d));
        for alg in [algebra_from_onb(&h), algebra_from_basis(&h, &u).unwrap()] {
            let rep = check_frobenius_laws(&alg, 1e-9);
            let c = rep.detail("speciality").unwrap().fitted_scalar.unwrap();
            worst_special = worst_special.max((c - C64::new(1.0, 0.0)).norm());
            worst = worst.max(rep.residual);
            all &= rep.passed;
            count += 1;
        }
    }
    outcome(
        all && worst < 1e-9 && worst_special < 1e-9,
        format!(
            "five Frobenius laws for {count} algebras, worst residual {worst:.3e}, worst speciality error {worst_special:.3e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all = true;
    let systems = small_systems();
    for sys in &systems {
        let rep = check_strong_complementarity(sys.x_alg(), sys.z_alg(), 1e-9).unwrap();
        all &= rep.passed;
        worst = worst.max(rep.residual);
    }
    outcome(
        all && worst < 1e-9,
        format!("interaction laws for {} (X, Z) pairs, worst residual {worst:.3e}", systems.len()),
    )
}

fn criterion_5() -> Outcome {
    let mut on: f64 = 0.0;
    let mut off = f64::INFINITY;
    let mut norm: f64 = 0.0;
    let mut all = true;
    let systems = small_systems();
    for sys in &systems {
        let rep = sys.classicality_check(0.05, 1e-9).unwrap();
        all &= rep.passed;
        on = on.max(rep.detail("on_mesh").unwrap().residual);
        norm = norm.max(rep.detail("square_norm").unwrap().residual);
        off = off.min(rep.detail("off_mesh").unwrap().fitted_scalar.unwrap().re);
    }
    outcome(
        all && on < 1e-9 && norm < 1e-9 && off > 0.05,
        format!(
            "{} systems: on-mesh copy residual {on:.3e}, smallest off-mesh copy residual {off:.4}, square-norm error {norm:.3e}",
            systems.len()
        ),
    )
}

fn ccr_via_dsl(sys: &QuantumSystem, x: &LatticePoint, p: &LatticePoint) -> CheckReport {
    let mut env = Environment::for_system(sys);
    let h = sys.space();
    env.bind_state("dx", Morphism::state(h, &sys.delta_state(&x.neg()).unwrap()).unwrap())
        .unwrap();
    env.bind_state("ep", Morphism::state(h, &sys.basis_state(p).unwrap()).unwrap())
        .unwrap();
    let u = parse("(state[dx] * id[H]) ; mult[Z]").unwrap();
    let v = parse("(state[ep] * id[H]) ; mult[X]").unwrap();
    let lhs = starhilb::dsl::DiagramExpr::seq(u.clone(), v.clone());
    let rhs = starhilb::dsl::DiagramExpr::seq(v, u);
    check_equal(&lhs, &rhs, &env, 1e-9, true).unwrap()
}

fn criterion_6() -> Outcome {
    let mut worst_direct: f64 = 0.0;
    let mut worst_dsl: f64 = 0.0;
    let mut pairs = 0;
    let mut all = true;
    for (uv, ir) in [(3, 3), (3, 5)] {
        let sys = make_real_system(uv, ir, 1).unwrap();
        for x in sys.dual_points() {
            for p in sys.basis_points() {
                let expected = phase(f64_of(&p)[0] * f64_of(&x)[0]);
                let rep = sys.weyl_ccr_check(&x, &p, 1e-9).unwrap();
                let direct = (rep.fitted_scalar.unwrap() - expected).norm().max(rep.residual);
                let dsl = ccr_via_dsl(&sys, &x, &p);
                let replay = (dsl.fitted_scalar.unwrap() - expected).norm().max(dsl.residual);
                all &= rep.passed && dsl.passed;
                worst_direct = worst_direct.max(direct);
                worst_dsl = worst_dsl.max(replay);
                pairs += 1;
            }
        }
    }
    outcome(
        all && worst_direct < 1e-9 && worst_dsl < 1e-9,
        format!(
            "{pairs} on-mesh (x, p) pairs: phase error {worst_direct:.3e} direct, {worst_dsl:.3e} through the diagram language"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut cases = 0;
    let mut bad = 0;
    for d in 1..=4096usize {
        let mut mu = 1;
        while d.pow(mu as u32) <= 4096 {
            let strings = odometer(d, mu);
            for (i, s) in strings.iter().enumerate() {
                let idx = i as u128 + 1;
                let chars: Vec<u32> = s.iter().map(|&c| c as u32 + 1).collect();
                let expected = SiteString::new(d as u32, chars).unwrap();
                let decoded = dec(d as u32, mu, idx).unwrap();
                if decoded != expected || enc(d as u32, mu, &decoded).unwrap() != idx {
                    bad += 1;
                }
            }
            cases += 1;
            if d == 1 && mu >= 12 {
                break;
            }
            mu += 1;
        }
    }

    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for mu in [2usize, 3] {
        let site = TruncatedSpace::standard("S", 2);
        let sites = (0..mu as i64).map(|k| LatticePoint::from_fractions(&[(k, 1)])).collect();
        let fs = FieldSpace::over_sites(&site, sites, DEFAULT_SIZE_BUDGET).unwrap();
        let ws: Vec<Vec<DVector<C64>>> = (0..3)
            .map(|_| (0..mu).map(|_| DVector::from_fn(2, |_, _| random_complex(&mut rng))).collect())
            .collect();
        let us: Vec<DVector<C64>> = (0..3)
            .map(|_| DVector::from_fn(3, |_, _| random_complex(&mut rng)))
            .collect();
        let f_tilde = |v: &[DVector<C64>]| {
            let mut acc = DVector::zeros(3);
            for (w, u) in ws.iter().zip(&us) {
                let weight: C64 = w.iter().zip(v).map(|(a, b)| a.dot(b)).product();
                acc += u * weight;
            }
            acc
        };
        let f = factor_through_theta(&fs, &f_tilde, &TruncatedSpace::standard("T", 3)).unwrap();
        for _ in 0..100 {
            let v: Vec<DVector<C64>> = (0..mu)
                .map(|_| DVector::from_fn(2, |_, _| random_complex(&mut rng)))
                .collect();
            let lhs = f.apply(&theta_oracle(&v)).unwrap();
            let rhs = f_tilde(&v);
            worst = worst.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    outcome(
        bad == 0 && worst < 1e-9,
        format!(
            "enc/dec bijective on {cases} (D, mu) shapes ({bad} mismatches); factorization residual {worst:.3e} over 200 product inputs"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for tau in 1..=20usize {
        let osc = Oscillator::new(tau).unwrap();
        let (a, a_dag) = ladder_ops(&osc);
        let a = a.to_dense();
        let a_dag = a_dag.to_dense();
        let d = tau + 1;
        let oracle = DMatrix::from_fn(d, d, |i, j| {
            C64::new(if j == i + 1 { (j as f64).sqrt() } else { 0.0 }, 0.0)
        });
        let n = number_operator(&osc).to_dense();
        let mut corrected = DMatrix::<C64>::identity(d, d);
        corrected[(tau, tau)] -= C64::new(d as f64, 0.0);
        let comm = &a * &a_dag - &a_dag * &a;
        let raise = &n * &a_dag - &a_dag * &n - &a_dag;
        let lower = &n * &a - &a * &n + &a;
        worst = worst
            .max(max_abs(&(&a - oracle)))
            .max(max_abs(&(comm - corrected)))
            .max(max_abs(&raise))
            .max(max_abs(&lower));
    }
    outcome(
        worst < 1e-12,
        format!("ladder, corrected commutator and number identities for tau = 1..20, worst {worst:.3e}"),
    )
}

fn spectrum_error(field: &OscillatorField, momenta: &[Vec<f64>], mass: f64, hbar: f64) -> f64 {
    let tau = field.oscillator().tau();
    let (n_op, h_op) = field.number_and_hamiltonian().unwrap();
    let nu: Vec<f64> = momenta
        .iter()
        .map(|p| (p.iter().map(|x| x * x).sum::<f64>() + mass * mass).sqrt())
        .collect();
    let mut worst: f64 = 0.0;
    for (i, occ) in odometer(tau + 1, momenta.len()).iter().enumerate() {
        let total: f64 = occ.iter().map(|&k| k as f64).sum();
        let energy: f64 = occ.iter().zip(&nu).map(|(&k, v)| hbar * v * k as f64).sum();
        worst = worst
            .max((n_op.matrix().get(i, i) - C64::new(total, 0.0)).norm())
            .max((h_op.matrix().get(i, i) - C64::new(energy, 0.0)).norm());
    }
    let off = |m: &SparseMatrix| {
        m.triplets()
            .filter(|(i, j, _)| i != j)
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    };
    worst.max(off(n_op.matrix())).max(off(h_op.matrix()))
}

fn criterion_9() -> Outcome {
    let mut configs: Vec<(Vec<LatticePoint>, u32, usize)> = Vec::new();
    let pts = |v: &[(i64, i64)]| -> Vec<LatticePoint> {
        v.iter().map(|&f| LatticePoint::from_fractions(&[f])).collect()
    };
    configs.push((pts(&[(0, 1), (1, 3)]), 3, 1));
    configs.push((pts(&[(-1, 3), (0, 1), (1, 3)]), 3, 1));
    configs.push((pts(&[(-2, 5), (-1, 5), (0, 1), (1, 5), (2, 5)]), 5, 1));
    configs.push((pts(&[(-4, 3), (-1, 1), (-2, 3), (-1, 3), (0, 1), (1, 3), (2, 3), (1, 1)]), 3, 1));
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut stability: f64 = 0.0;
    let (mass, hbar) = (1.0, 1.3);
    for (momenta, uv, n) in &configs {
        let mu = momenta.len() as u32;
        let floats: Vec<Vec<f64>> = momenta.iter().map(f64_of).collect();
        for tau in 1usize.. {
            if ((tau + 1) as u64).pow(mu) > 256 {
                break;
            }
            let field =
                OscillatorField::new(tau, momenta.clone(), *uv, *n, mass, hbar, DEFAULT_SIZE_BUDGET)
                    .unwrap();
            worst = worst.max(spectrum_error(&field, &floats, mass, hbar));
            checked += 1;
            let higher =
                OscillatorField::new(tau + 1, momenta.clone(), *uv, *n, mass, hbar, DEFAULT_SIZE_BUDGET)
                    .unwrap();
            let (_, h_low) = field.number_and_hamiltonian().unwrap();
            let (_, h_high) = higher.number_and_hamiltonian().unwrap();
            for (i, occ) in odometer(tau + 1, momenta.len()).iter().enumerate() {
                if occ.iter().all(|&k| k < tau) {
                    let j = odometer(tau + 2, momenta.len())
                        .iter()
                        .position(|o| o == occ)
                        .unwrap();
                    stability = stability
                        .max((h_low.matrix().get(i, i) - h_high.matrix().get(j, j)).norm());
                }
            }
        }
    }
    outcome(
        worst < 1e-9 && stability < 1e-9,
        format!(
            "{checked} field configurations: diagonal error {worst:.3e}, low-energy drift under tau -> tau+1 {stability:.3e}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let pairs: [[(i64, i64); 2]; 3] = [[(0, 1), (1, 3)], [(-1, 3), (1, 3)], [(1, 3), (2, 3)]];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for pair in pairs {
        let momenta: Vec<LatticePoint> = pair.iter().map(|&f| LatticePoint::from_fractions(&[f])).collect();
        for tau in 1..=3 {
            for mass in [0.5, 1.0, 2.0] {
                let field =
                    OscillatorField::new(tau, momenta.clone(), 3, 1, mass, 1.0, DEFAULT_SIZE_BUDGET).unwrap();
                for j in -2..=2 {
                    let x = LatticePoint::from_fractions(&[(j, 5)]);
                    for kind in [FieldKind::Phi, FieldKind::Pi] {
                        let a = field.field_operator(&x, kind).unwrap().to_dense();
                        worst = worst.max(max_abs(&(&a - a.adjoint())));
                        count += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst < 1e-12,
        format!("{count} field operators at two-site configurations, worst |A - A^dagger| {worst:.3e}"),
    )
}

fn run_binary(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_starhilb"))
        .args(args)
        .env_remove("STARHILB_SIZE_BUDGET")
        .output()
        .expect("binary runs");
    (out.status.code(), out.stdout)
}

fn criterion_11() -> Outcome {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../diagrams");
    let files: Vec<String> = ["weyl_ccr.diag", "bialgebra.diag", "compact.diag", "classical_copy.diag"]
        .iter()
        .map(|f| format!("{root}/{f}"))
        .collect();
    let mut suites: Vec<Vec<String>> = vec![
        vec!["laws", "--flavor", "torus", "--omega", "2", "--n", "1"],
        vec!["laws", "--flavor", "real", "--omega-uv", "3", "--omega-ir", "5"],
        vec!["classicality", "--flavor", "lattice", "--omega", "1", "--n", "2"],
        vec!["strong-comp", "--flavor", "torus", "--omega", "2", "--n", "2"],
        vec!["ccr", "--omega-uv", "3", "--omega-ir", "5"],
        vec!["ccr", "--omega-uv", "3", "--omega-ir", "5", "--x", "1/5", "--p", "1/3"],
        vec!["fields-universal", "--d", "2", "--mu", "3"],
        vec!["qho", "--tau", "20"],
        vec!["field-spectra", "--momenta", "0;1/3", "--tau", "1"],
        vec!["field-spectra", "--momenta", "0;1/3", "--tau", "1", "--format", "tabular"],
        vec!["laws", "--format", "tabular"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for f in &files {
        suites.push(vec!["diagram".into(), f.clone()]);
    }
    let mut identical = 0;
    let mut passing = 0;
    let mut problems = Vec::new();
    for args in &suites {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (c1, o1) = run_binary(&refs);
        let (c2, o2) = run_binary(&refs);
        if o1 == o2 && c1 == c2 && !o1.is_empty() {
            identical += 1;
        } else {
            problems.push(format!("nondeterministic: {}", args.join(" ")));
        }
        if c1 == Some(0) {
            passing += 1;
        } else {
            problems.push(format!("exit {c1:?}: {}", args.join(" ")));
        }
    }
    let mut summary = format!(
        "{identical}/{} suite invocations byte-identical across two runs, {passing} exit 0",
        suites.len()
    );
    if !problems.is_empty() {
        summary.push_str(&format!(" [{}]", problems.join("; ")));
    }
    outcome(identical == suites.len() && passing == suites.len(), summary)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("projector and frame laws", criterion_1),
        ("compact structure", criterion_2),
        ("Frobenius algebras", criterion_3),
        ("strong complementarity", criterion_4),
        ("classicality dichotomy", criterion_5),
        ("Weyl commutation relations", criterion_6),
        ("enc/dec and universal property", criterion_7),
        ("oscillator identities", criterion_8),
        ("field spectra", criterion_9),
        ("field operator self-adjointness", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} [{:>2}] {name}: {} ({:.1}s)",
            i + 1,
            o.summary,
            start.elapsed().as_secs_f64()
        );
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
