//! Acceptance gate: one line per criterion.
//!
//! Criteria in [`EXPECTED_RED`] are implemented as stated and fail for
//! reasons recorded in the README. The exit status is nonzero when the set of
//! failing criteria differs from that list in either direction.

use std::process::ExitCode;
use std::time::Instant;

use nsv_core::diagnostics::{interpolant_identities, TestFunctionSpec};
use nsv_core::field::Coefficient;
use nsv_core::harness::{power_schedule, DatumKind, DatumSpec, SweepPlan, SweepReport};
use nsv_core::nonlinearity::{calibrate_tail_constant, convective, energy_transfer, qn_tail_bound};
use nsv_core::oracle::{direct_convective, direct_pressure, max_relative_difference};
use nsv_core::pressure::pressure_gradient;
use nsv_core::{
    diagnose, generate_datum, run, run_sweep, solve_pressure, DiscreteTrajectory, SchemeParams,
    SpatialWeight, SpectralVelocity, TruncationBall, WeightSpec,
};

/// Criterion 10 asserts two time-integration identities that omit the jump
/// terms at the time nodes; they cannot hold at finite `(n, M)`.
const EXPECTED_RED: &[u32] = &[10];

struct Gate {
    failed: Vec<u32>,
}

impl Gate {
    fn line(&mut self, id: u32, pass: bool, what: &str, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} [{tag}] {what}: {detail}");
        if !pass && EXPECTED_RED.contains(&id) {
            note("expected failure, see the README".into());
        }
        if !pass {
            self.failed.push(id);
        }
    }
}

/// Calibration family size per radius, ten times the verification set.
const CALIBRATION_SEEDS: u64 = 500;

fn note(text: String) {
    println!("    note: {text}");
}

fn random(seed: u64, n: u32) -> SpectralVelocity {
    generate_datum(&DatumSpec::random(seed), TruncationBall(n)).unwrap()
}

fn criterion_one_trajectory() -> DiscreteTrajectory {
    let params = SchemeParams::new(TruncationBall(4), 8, 0.5, 0.5);
    run(&random(2024, 4), &params).unwrap()
}

fn phis() -> Vec<TestFunctionSpec> {
    vec![
        TestFunctionSpec {
            weight: WeightSpec::Product,
            start: 0.1,
            end: 0.4,
        },
        TestFunctionSpec {
            weight: WeightSpec::Cosine {
                k: [1, 1, 0],
                amplitude: 0.5,
            },
            start: 0.05,
            end: 0.45,
        },
    ]
}

fn sweep(kind: DatumKind) -> SweepReport {
    let plan = SweepPlan {
        levels: power_schedule(&[4, 6, 8], 0.75).unwrap(),
        datum: DatumSpec::new(kind),
        final_time: 0.5,
        phis: phis(),
        output_dir: None,
        picard_tol: 1e-12,
        picard_max_iter: 200,
    };
    run_sweep(&plan).unwrap()
}

type Metric = fn(&nsv_core::harness::SummaryRow) -> f64;

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", items.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: Vec::new() };

    // 1
    let clock = Instant::now();
    let traj1 = criterion_one_trajectory();
    let report1 = diagnose(&traj1, &[]).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let worst = report1.energy.max_residual();
    gate.line(
        1,
        worst <= 1e-10 && secs < 10.0,
        "discrete energy equality, random datum n=4 M=8 alpha=0.5",
        format!("max relative residual {worst:.2e} (limit 1e-10), {secs:.2}s"),
    );

    // 2
    let clock = Instant::now();
    let params = SchemeParams::new(TruncationBall(4), 20, 0.5, 0.5);
    let shear = generate_datum(&DatumSpec::new(DatumKind::Shear), TruncationBall(4)).unwrap();
    let traj2 = run(&shear, &params).unwrap();
    let ratio = (1.0 + 0.25) / (1.0 + 0.25 + params.time_step());
    let mut worst = 0.0f64;
    for (m, s) in traj2.states.iter().enumerate() {
        let f = ratio.powi(m as i32);
        for (k, c) in s.iter() {
            let want = shear.get(k).scale(f);
            let err = (*c).sub(want).abs_sq().sqrt();
            let scale = want.abs_sq().sqrt();
            worst = worst.max(if scale > 0.0 { err / scale } else { err });
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    gate.line(
        2,
        worst <= 1e-12 && secs < 1.0,
        "closed-form shear decay over 20 steps",
        format!("max relative mode error {worst:.2e} (limit 1e-12), {secs:.3}s"),
    );

    // 3
    let ids = interpolant_identities(&traj1);
    gate.line(
        3,
        ids.residual1.pass && ids.residual2.pass,
        "interpolant identities on the criterion 1 trajectory",
        format!(
            "L2 {:.2e}, H1 {:.2e} (limit 1e-13)",
            ids.residual1.value, ids.residual2.value
        ),
    );

    // 4
    let clock = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let n = 2 + (seed % 3) as u32;
        let u = random(100 + seed, n);
        let fast = convective(&u).unwrap();
        worst = worst.max(max_relative_difference(&fast, &direct_convective(&u)));
    }
    let secs = clock.elapsed().as_secs_f64();
    gate.line(
        4,
        worst <= 1e-12 && secs < 30.0,
        "padded transform vs direct convolution, 20 fields n<=4",
        format!("max relative difference {worst:.2e} (limit 1e-12), {secs:.2}s"),
    );

    // 5
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let n = 3 + (seed % 6) as u32;
        let u = random(200 + seed, n);
        let nm = u.norms();
        let t = energy_transfer(&u).unwrap();
        worst = worst.max(t.abs() / (nm.l2() * nm.h1_seminorm()));
    }
    gate.line(
        5,
        worst <= 1e-11,
        "energy cancellation on 50 fields",
        format!("max |(P_n N(u), u)| / (|u| |grad u|) = {worst:.2e} (limit 1e-11)"),
    );

    // 6
    let mut split = 0.0f64;
    for seed in 0..10u64 {
        let u = random(300 + seed, 4);
        let full = convective(&u).unwrap();
        let grad = full.gradient_part();
        let minus_grad_p = pressure_gradient(&solve_pressure(&u).unwrap()).scale(-1.0);
        split = split.max(max_relative_difference(&grad, &minus_grad_p));
    }
    let tg = generate_datum(&DatumSpec::new(DatumKind::TaylorGreen), TruncationBall(4)).unwrap();
    let tgp = max_relative_difference(&solve_pressure(&tg).unwrap(), &direct_pressure(&tg));
    gate.line(
        6,
        split <= 1e-11 && tgp <= 1e-12,
        "pressure consistency",
        format!("Helmholtz split vs -grad p {split:.2e} (limit 1e-11), Taylor-Green vs direct {tgp:.2e} (limit 1e-12)"),
    );

    // 8 to 10 share the sweep; 7 also covers its trajectories
    let clock = Instant::now();
    let tg_sweep = sweep(DatumKind::TaylorGreen);
    let tg3_sweep = sweep(DatumKind::TaylorGreen3d);
    let sweep_secs = clock.elapsed().as_secs_f64();

    // 7
    let mut gn_ok = true;
    let mut worst_ratio = 0.0f64;
    let mut worst_quad = 0.0f64;
    let mut worst_p_quad = 0.0f64;
    let reports = [&report1, &diagnose(&traj2, &[]).unwrap()]
        .into_iter()
        .cloned()
        .chain(tg_sweep.levels.iter().map(|l| l.report.clone()))
        .chain(tg3_sweep.levels.iter().map(|l| l.report.clone()))
        .collect::<Vec<_>>();
    for r in &reports {
        gn_ok &= r.pressure.gn_all_hold;
        for row in &r.pressure.rows {
            if row.gn_rhs > 0.0 {
                worst_ratio = worst_ratio.max(row.u_l10_3.norm() / row.gn_rhs);
            }
            worst_quad = worst_quad.max(row.u_l10_3.relative_change);
            if !row.p_negligible {
                worst_p_quad = worst_p_quad.max(row.p_l5_3.relative_change);
            }
        }
    }
    gate.line(
        7,
        gn_ok && worst_quad <= 1e-6,
        "interpolation inequality at every step of every acceptance trajectory",
        format!(
            "max |u|_10/3 / (|u|^0.4 |grad u|^0.6) = {worst_ratio:.4}, worst quadrature self-check {worst_quad:.2e} (limit 1e-6), {} trajectories",
            reports.len()
        ),
    );
    let labels = ["random", "shear"]
        .into_iter()
        .map(String::from)
        .chain(tg_sweep.levels.iter().map(|l| format!("taylor_green n={}", l.level.n)))
        .chain(tg3_sweep.levels.iter().map(|l| format!("taylor_green_3d n={}", l.level.n)));
    let unresolved: Vec<String> = labels
        .zip(&reports)
        .filter(|(_, r)| !r.pressure.pressure_resolved)
        .map(|(l, _)| l)
        .collect();
    note(format!(
        "pressure L^5/3 self-check: worst change {worst_p_quad:.2e}, flagged unresolved: {unresolved:?}"
    ));

    // 8
    let uniform = |s: &SweepReport| -> (bool, String) {
        let rows = &s.summary;
        let base = &rows[0];
        let keys: [(&str, Metric); 4] = [
            ("tdw", |r| r.tdw),
            ("twodw", |r| r.twodw),
            ("pressure", |r| r.pressure_sum),
            ("sup energy", |r| r.sup_energy),
        ];
        let mut ok = true;
        let mut text = Vec::new();
        for (name, f) in keys {
            let c = f(base);
            let vals: Vec<f64> = rows.iter().map(f).collect();
            ok &= vals.iter().all(|v| *v <= 1.1 * c);
            text.push(format!("{name} {}", list(&vals)));
        }
        (ok, text.join("; "))
    };
    let (ok8, text8) = uniform(&tg_sweep);
    gate.line(
        8,
        ok8 && sweep_secs < 600.0,
        "uniform bounds within x1.1 of n=4, Taylor-Green, n=4,6,8, alpha=n^-3/4",
        format!("{text8}; sweeps {sweep_secs:.1}s"),
    );
    let (ok8b, text8b) = uniform(&tg3_sweep);
    note(format!("3D Taylor-Green companion: {} {text8b}", if ok8b { "within" } else { "outside" }));

    // 9
    let trend = |s: &SweepReport| -> (bool, String) {
        let uv: Vec<f64> = s.summary.iter().map(|r| r.u_minus_v).collect();
        let bound_ok = s.summary.iter().all(|r| r.u_minus_v <= r.u_minus_v_bound * (1.0 + 1e-12));
        let cauchy_ok = strictly_decreasing(&s.cauchy);
        let mut i5_ok = true;
        let mut i5_text = Vec::new();
        for phi in 0..s.plan.phis.len() {
            let i5: Vec<f64> = s.summary.iter().map(|r| r.i5_abs[phi]).collect();
            let lhs: f64 = s
                .levels
                .iter()
                .map(|l| l.report.lei[phi].terms.lhs.abs())
                .fold(0.0, f64::max);
            let floor = 1e-13 * lhs;
            i5_ok &= i5.windows(2).all(|w| w[1] < w[0] || w[1] <= floor);
            i5_text.push(list(&i5));
        }
        let ok = strictly_decreasing(&uv) && bound_ok && cauchy_ok && i5_ok;
        (
            ok,
            format!(
                "|u-v| {} (bound ok {bound_ok}), Cauchy {}, |I5| per phi {}",
                list(&uv),
                list(&s.cauchy),
                i5_text.join(" ")
            ),
        )
    };
    let (ok9, text9) = trend(&tg_sweep);
    gate.line(9, ok9, "convergence trend, Taylor-Green sweep", text9);
    let (ok9b, text9b) = trend(&tg3_sweep);
    note(format!("3D Taylor-Green companion: {} {text9b}", if ok9b { "holds" } else { "fails" }));

    // 10
    let lei_lines = |s: &SweepReport| -> (bool, bool, f64, f64, f64, f64) {
        let (mut lit, mut cor, mut stab) = (true, true, 0.0f64);
        let (mut d1, mut d21, mut c) = (0.0f64, 0.0f64, 0.0f64);
        for l in &s.levels {
            for r in &l.report.lei {
                lit &= r.i1_literal_defect <= 1e-10 && r.i21_literal_defect <= 1e-10;
                cor &= r.i1_identity.pass && r.i21_identity.pass;
                stab = stab.max(r.order_stability.value);
                d1 = d1.max(r.i1_literal_defect);
                d21 = d21.max(r.i21_literal_defect);
                c = c.max(r.i1_identity.value).max(r.i21_identity.value);
            }
        }
        (lit && stab <= 1e-8, cor && stab <= 1e-8, stab, d1, d21, c)
    };
    let (lit, cor, stab, d1, d21, c) = lei_lines(&tg_sweep);
    gate.line(
        10,
        lit,
        "I1 and I2,1 identities as stated (no jump terms), Taylor-Green sweep",
        format!("max relative defect I1 {d1:.2e}, I2,1 {d21:.2e} (limit 1e-10); order 6 vs 12 change {stab:.2e} (limit 1e-8)"),
    );
    note(format!(
        "with the jump terms J1, J2 and the gradient term G the identities hold: max defect {c:.2e}, {}",
        if cor { "pass" } else { "fail" }
    ));
    let (_, cor3, stab3, d13, d213, c3) = lei_lines(&tg3_sweep);
    note(format!(
        "3D Taylor-Green companion: literal defects I1 {d13:.2e}, I2,1 {d213:.2e}; corrected {c3:.2e} ({}); order change {stab3:.2e}",
        if cor3 { "pass" } else { "fail" }
    ));
    for s in [&tg_sweep, &tg3_sweep] {
        let gaps: Vec<String> = s
            .summary
            .iter()
            .map(|r| format!("n={}: residual {} gap {}", r.n, list(&r.lei_residual), list(&r.lei_gap)))
            .collect();
        note(format!("{:?} local energy balance: {}", s.plan.datum.kind, gaps.join("; ")));
    }

    // 11
    let psi = SpatialWeight::from_spec(&WeightSpec::Product).unwrap();
    let mut all_hold = true;
    let mut text = Vec::new();
    let calib: Vec<SpectralVelocity> = [8u32, 16]
        .iter()
        .flat_map(|&n| (0..CALIBRATION_SEEDS).map(move |s| random(50_000 + s, n)))
        .collect();
    let c = calibrate_tail_constant(calib.iter(), &psi).unwrap();
    for n in [8u32, 16] {
        let mut worst = 0.0f64;
        for seed in 0..50u64 {
            let b = qn_tail_bound(&random(9000 + seed, n), &psi).unwrap();
            all_hold &= b.holds(c);
            worst = worst.max(b.ratio());
        }
        text.push(format!("n={n}: max ratio {worst:.4e}"));
    }
    gate.line(
        11,
        all_hold,
        "tail bound with calibrated constant on 50 fresh fields, n=8,16",
        format!("c = {c:.4e} from {CALIBRATION_SEEDS} seeds per radius; {}", text.join(", ")),
    );

    let passed = 11 - gate.failed.len();
    println!("acceptance: {passed} of 11 pass, failing {:?}, expected failing {EXPECTED_RED:?}", gate.failed);
    if gate.failed == EXPECTED_RED {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
