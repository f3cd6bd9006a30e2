//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p relapse-core --test acceptance -- --nocapture
//! --test-threads=1` to see the lines in order.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relapse::analytic::{
    bifurcation_condition, closed_form_profiles, fixed_points_quadratic, g_hat_rational, r0_rc_const, ConstantRates,
    Region,
};
use relapse::demography::mixing_density_inf;
use relapse::grid::{AgeGrid, AgeState, GridSpec};
use relapse::params::ParameterSet;
use relapse::presets::{preset, reference_rates, PresetName};
use relapse::steady::{find_fixed_points, steady_profiles};
use relapse::thresholds::{dominant_root, euler_lotka_g, r0_general};
use relapse::transport::{simulate, SimulationOptions, Trajectory};

fn report(id: u32, title: &str, pass: bool, detail: String, started: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:>2} [{verdict}] {title}: {detail} ({:.2}s)",
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn constants(beta: f64) -> ParameterSet {
    ParameterSet::from_constants(&reference_rates(beta))
}

fn run_preset(name: PresetName) -> Trajectory {
    let p = preset(name).unwrap();
    let init = p.initial.state(&p.grid.ages).unwrap();
    simulate(
        &p.params,
        &init,
        &p.grid,
        &SimulationOptions {
            store_every: 0,
            ..Default::default()
        },
    )
    .unwrap()
}

/// Fixed points of the problem a preset actually simulates (its own age
/// domain and mixing density).
fn preset_fixed_points(name: PresetName) -> Vec<f64> {
    let p = preset(name).unwrap();
    let kernel = mixing_density_inf(&p.params, &p.grid.ages).unwrap();
    find_fixed_points(&p.params, &kernel, 1e-12)
        .unwrap()
        .into_iter()
        .map(|s| s.b_star)
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_01_constant_rate_thresholds() {
    let t = Instant::now();
    let (r0_b, rc_b) = r0_rc_const(&reference_rates(60.0));
    let (r0_a, rc_a) = r0_rc_const(&reference_rates(0.011));
    let (r0_c, _) = r0_rc_const(&reference_rates(120.0));
    // The quoted value 1.5e-4 carries two significant digits, so it is
    // matched to half a unit in its last digit; the relative gap is printed.
    let checks = [
        ("R0(60)", r0_b, 0.8218, rel(r0_b, 0.8218) <= 1e-3),
        ("RC(60)", rc_b, 4800.0, rel(rc_b, 4800.0) <= 1e-3),
        ("R0(0.011)", r0_a, 1.5e-4, rel(r0_a, 1.5e-4) <= 1e-3 || (r0_a - 1.5e-4).abs() <= 0.05e-4),
        ("RC(0.011)", rc_a, 0.88, rel(rc_a, 0.88) <= 1e-3),
        ("R0(120)", r0_c, 1.6436, rel(r0_c, 1.6436) <= 1e-3),
    ];
    let detail = checks
        .iter()
        .map(|(n, got, want, _)| format!("{n}={got:.6} (quoted {want}, rel {:.1e})", rel(*got, *want)))
        .collect::<Vec<_>>()
        .join(", ");
    report(1, "constant-rate thresholds", checks.iter().all(|c| c.3), detail, t);
}

#[test]
fn criterion_02_general_thresholds_match_closed_form() {
    let t = Instant::now();
    let p = constants(60.0);
    let kernel = mixing_density_inf(&p, &AgeGrid::new(800.0, 1600).unwrap()).unwrap();
    let r0 = r0_general(&p, &kernel).unwrap();
    let g0 = euler_lotka_g(0.0, &p, &kernel).unwrap();
    let want = 60.0 / 73.0125;
    let e1 = rel(r0, want);
    let e2 = rel(g0, r0);
    report(
        2,
        "general R0 vs closed form",
        e1 <= 1e-6 && e2 <= 1e-10,
        format!("R0_general={r0:.12}, closed form={want:.12}, rel {e1:.1e}; |G(0)-R0|/R0={e2:.1e}"),
        t,
    );
}

#[test]
fn criterion_03_dominant_root() {
    let t = Instant::now();
    let grid = AgeGrid::new(800.0, 1600).unwrap();
    let mut worst: f64 = 0.0;
    for (beta, want) in [(60.0, -13.0125), (120.0, 46.9875)] {
        let p = constants(beta);
        let k = mixing_density_inf(&p, &grid).unwrap();
        let got = dominant_root(&p, &k, 1e-10).unwrap();
        worst = worst.max((got - want).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sign_failures = 0;
    for _ in 0..50 {
        let c = ConstantRates::new(
            rng.gen_range(0.005..0.05),
            rng.gen_range(1.0..200.0),
            rng.gen_range(0.0..100.0),
            rng.gen_range(0.1..50.0),
            rng.gen_range(0.0..150.0),
        )
        .unwrap();
        let p = ParameterSet::from_constants(&c);
        let k = mixing_density_inf(&p, &grid).unwrap();
        let r0 = r0_general(&p, &k).unwrap();
        let lambda = dominant_root(&p, &k, 1e-10).unwrap();
        if (lambda > 0.0) != (r0 > 1.0) {
            sign_failures += 1;
        }
    }
    report(
        3,
        "dominant root",
        worst <= 1e-4 && sign_failures == 0,
        format!("max |λ* - analytic| = {worst:.1e}; sign(λ*) != sign(R0-1) in {sign_failures}/50 random sets"),
        t,
    );
}

fn bisect_rational(c: &ConstantRates, mut lo: f64, mut hi: f64) -> f64 {
    let f = |b: f64| g_hat_rational(b, c).unwrap() - 1.0;
    let lo_positive = f(lo) > 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[test]
fn criterion_04_fixed_points() {
    let t = Instant::now();
    let c = reference_rates(60.0);
    let p = ParameterSet::from_constants(&c);
    // e^{-μA} ≈ 1.4e-11 keeps the truncation bias well below the tolerance.
    let kernel = mixing_density_inf(&p, &AgeGrid::new(2000.0, 4000).unwrap()).unwrap();
    let found: Vec<f64> = find_fixed_points(&p, &kernel, 1e-12)
        .unwrap()
        .iter()
        .map(|s| s.b_star)
        .collect();
    let quad = fixed_points_quadratic(&c).unwrap();
    let peak = (quad[0] * quad[1]).sqrt();
    let oracle = [bisect_rational(&c, 1e-9, peak), bisect_rational(&c, peak, 1.0)];
    let gap_general = found
        .iter()
        .zip(&quad)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gap_oracle = quad
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let pass = found.len() == 2 && quad.len() == 2 && gap_general <= 1e-8 && gap_oracle <= 1e-12;
    report(
        4,
        "fixed points",
        pass,
        format!(
            "general {found:?}, quadratic {quad:?}; max gap general-quadratic {gap_general:.1e}, quadratic-bisection {gap_oracle:.1e}"
        ),
        t,
    );
}

#[test]
fn criterion_05_bifurcation_condition_predicts_two_roots() {
    let t = Instant::now();
    let mu = 0.0125;
    let axis = |centre: f64, k: usize| centre * (0.5 + k as f64 / 9.0);
    let mut mismatches = 0;
    let mut example = None;
    for bi in 0..10 {
        for ri in 0..10 {
            for ki in 0..10 {
                let (beta, rho, outflow) = (axis(60.0, bi), axis(76.65, ri), axis(73.0, ki));
                let c = ConstantRates::new(mu, beta, 60.0 / 73.0 * outflow, 13.0 / 73.0 * outflow, rho).unwrap();
                let predicted = bifurcation_condition(&c).region == Region::Bistable;
                let actual = fixed_points_quadratic(&c).unwrap().len() == 2;
                if predicted != actual {
                    mismatches += 1;
                    example.get_or_insert((beta, rho, outflow, predicted, actual));
                }
            }
        }
    }
    report(
        5,
        "bifurcation condition vs two-root outcome",
        mismatches == 0,
        format!(
            "{mismatches}/1000 mismatches on β, ρ, φ+γ in [0.5, 1.5] × reference; first: {:?}",
            example.map(|(b, r, k, p, a)| format!("β={b:.3} ρ={r:.3} φ+γ={k:.3} predicted two={p} actual two={a}"))
        ),
        t,
    );
}

#[test]
fn criterion_06_steady_profiles_match_closed_forms() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ages: Vec<f64> = (0..=200).map(|k| k as f64 * 0.5).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let c = ConstantRates::new(
            rng.gen_range(0.005..0.05),
            rng.gen_range(0.1..150.0),
            rng.gen_range(0.0..100.0),
            rng.gen_range(0.1..50.0),
            rng.gen_range(0.0..150.0),
        )
        .unwrap();
        let b = rng.gen_range(1e-4..1.0);
        let (s, i, r) = steady_profiles(b, &ParameterSet::from_constants(&c), &ages).unwrap();
        for (k, &a) in ages.iter().enumerate() {
            let (cs, ci, cr) = closed_form_profiles(b, &c, a);
            worst = worst.max((s[k] - cs).abs()).max((i[k] - ci).abs()).max((r[k] - cr).abs());
        }
    }
    report(
        6,
        "steady profiles vs closed forms",
        worst <= 1e-8,
        format!("max-norm gap over 10 random draws = {worst:.1e}"),
        t,
    );
}

#[test]
fn criterion_07_conservation_and_positivity() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for name in PresetName::ALL {
        let traj = run_preset(name);
        let ok = traj.max_sum_defect <= 1e-12 && traj.min_value >= -1e-14;
        pass &= ok;
        lines.push(format!(
            "{name}: max|s+i+r-1|={:.1e} min={:.1e}",
            traj.max_sum_defect, traj.min_value
        ));
    }
    report(7, "conservation and positivity", pass, lines.join("; "), t);
}

#[test]
fn criterion_08_extinction() {
    let t = Instant::now();
    let p = preset(PresetName::Extinction).unwrap();
    let traj = run_preset(PresetName::Extinction);
    let final_sup = *traj.sup_infected.last().unwrap();
    // Inflow transient: one age cell's worth of steps.
    let start = (p.grid.da() / p.grid.dt()).ceil() as usize;
    let rises = traj.sup_infected[start..].windows(2).filter(|w| w[1] > w[0]).count();
    report(
        8,
        "extinction",
        final_sup < 1e-4 && rises == 0,
        format!("sup_a i(T) = {final_sup:.2e}; increases of sup_a i after step {start}: {rises}"),
        t,
    );
}

#[test]
fn criterion_09_bistability() {
    let t = Instant::now();
    let roots = preset_fixed_points(PresetName::BistableHigh);
    let upper = *roots.last().unwrap();
    let high = run_preset(PresetName::BistableHigh).final_b();
    let low = run_preset(PresetName::BistableLow).final_b();
    let quad = fixed_points_quadratic(&reference_rates(60.0)).unwrap()[1];
    let err = rel(high, upper);
    report(
        9,
        "bistability",
        roots.len() == 2 && err <= 0.05 && low < 1e-6,
        format!(
            "large bump B(T)={high:.6} vs upper fixed point {upper:.6} (rel {err:.2e}; infinite-domain root {quad:.6}, rel {:.2e}); small bump B(T)={low:.2e}",
            rel(high, quad)
        ),
        t,
    );
}

#[test]
fn criterion_10_endemic_convergence() {
    let t = Instant::now();
    let roots = preset_fixed_points(PresetName::Endemic);
    let b = run_preset(PresetName::Endemic).final_b();
    let pass = roots.len() == 1 && rel(b, roots[0]) <= 0.05;
    report(
        10,
        "endemic convergence",
        pass,
        format!(
            "B(T)={b:.6}, fixed points {roots:?}, rel {:.2e}",
            roots.first().map_or(f64::NAN, |r| rel(b, *r))
        ),
        t,
    );
}

#[test]
fn criterion_11_first_order_convergence() {
    let t = Instant::now();
    let c = reference_rates(60.0);
    let p = ParameterSet::from_constants(&c);
    let max_age = 100.0;
    // Steady state of the truncated problem: the closed-form profiles at the
    // fixed point of Ĝ on [0, A] solve the continuous problem exactly.
    let kernel = mixing_density_inf(&p, &AgeGrid::new(max_age, 1000).unwrap()).unwrap();
    let b_star = find_fixed_points(&p, &kernel, 1e-13).unwrap().last().unwrap().b_star;
    let ratio_dt_da = {
        let da = 0.05;
        (1.0 / (1.0 / da + 149.65)) / da
    };
    let horizon = 3.0;
    let errors: Vec<f64> = [2000usize, 4000, 8000]
        .iter()
        .map(|&n| {
            let da = max_age / n as f64;
            let steps = (horizon / (ratio_dt_da * da)).round() as usize;
            let grid = GridSpec::new(max_age, horizon, n, steps).unwrap();
            let ages = grid.ages.nodes();
            let mut init = AgeState::infection_free(ages.len());
            let mut exact = AgeState::infection_free(ages.len());
            for (k, &a) in ages.iter().enumerate() {
                let (s, i, r) = closed_form_profiles(b_star, &c, a);
                init.s[k] = s;
                init.i[k] = i;
                init.r[k] = r;
                exact.s[k] = s;
                exact.i[k] = i;
                exact.r[k] = r;
            }
            let traj = simulate(
                &p,
                &init,
                &grid,
                &SimulationOptions {
                    store_every: 0,
                    ..Default::default()
                },
            )
            .unwrap();
            let last = traj.final_state();
            (0..ages.len())
                .map(|k| {
                    (last.s[k] - exact.s[k])
                        .abs()
                        .max((last.i[k] - exact.i[k]).abs())
                        .max((last.r[k] - exact.r[k]).abs())
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let pass = ratios.iter().all(|r| (1.8..=2.2).contains(r));
    report(
        11,
        "first-order convergence",
        pass,
        format!("errors {:.3e}, {:.3e}, {:.3e} at Δa = 0.05, 0.025, 0.0125; ratios {ratios:.3?}", errors[0], errors[1], errors[2]),
        t,
    );
}
