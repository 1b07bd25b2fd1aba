//! Acceptance run: prints one PASS/FAIL line per criterion, with the measured
//! values, and exits non-zero on any failure not listed in `KNOWN_FAILURES`.

use std::process::ExitCode;
use std::time::Instant;

use phonocat_cli::config::{Numerics, Point, SweepConfig, LOSS_THETAS};
use phonocat_cli::feasibility::{detection_efficiency, run_feasibility, squeezing_rate_hz};
use phonocat_cli::sweeps::evaluate_point;
use phonocat_cli::{Cell, Mode};
use phonocat_core::fock::{squeezed_thermal_converged, squeezed_thermal_state, thermal_state};
use phonocat_core::measures::{report_with, ReportOptions};
use phonocat_core::steady_state::{cooperativity_for_purity, purity_tradeoff};
use phonocat_core::subtraction::{
    event_rate, herald, herald_oracle_with, herald_squeezed_thermal, Dephasing, OracleOptions,
};
use phonocat_core::{DensityMatrix, NonclassicalityReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail for reasons analysed in the README; they are still
/// evaluated and printed.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    8,
    "I(m=3) < I(m=1) does not hold at n_eff=0.1, r=0.1 (it holds for r < 0.04 and r > 0.33)",
)];

// Pinned tolerances.
const WORKING_POINT_REL: f64 = 0.30;
const LOSS_I_R05: (f64, f64) = (1.0, 0.35);
const LOSS_I_R1: (f64, f64) = (4.0, 1.0);
const PROB_WINDOW: (f64, f64) = (1e-8, 1e-3);
const PROB_MIN_DECADES: f64 = 2.0;
const ORACLE_CASES: usize = 50;
const ORACLE_DIM_M: usize = 30;
const ORACLE_ETAS: [f64; 4] = [0.1, 0.2, 0.5, 1.0];
const ORACLE_STATE_TOL: f64 = 1e-8;
const ORACLE_PROB_REL: f64 = 1e-10;
const I_VACUUM_TOL: f64 = 1e-3;
const I_FOCK1_TOL: f64 = 1e-2;
const I_SQUEEZED_REL: f64 = 0.01;
const I_BOUND_SLACK: f64 = 0.02;
const N_GAUSSIAN_TOL: f64 = 1e-5;
const N_FOCK1_TOL: f64 = 1e-4;
const PARITY_TOL: f64 = 1e-10;
const SLOPE_TOL: f64 = 0.05;
const FEASIBILITY_REL: f64 = 1e-12;
const DOUBLING_REL: f64 = 0.01;

struct Line {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

#[derive(Default)]
struct Suite {
    states: Vec<(String, DensityMatrix)>,
    reports: Vec<(String, NonclassicalityReport)>,
}

impl Suite {
    fn numerics() -> Numerics {
        SweepConfig::defaults(Mode::Losses).numerics
    }

    /// Heralded state and report through the same path as the sweeps.
    fn point(&mut self, p: Point) -> (DensityMatrix, f64, NonclassicalityReport) {
        let o = evaluate_point(&p, &Self::numerics());
        let label = format!("{p:?}");
        let h = o.herald.unwrap_or_else(|e| panic!("{label}: {e}"));
        let rep = o.report.expect("report attempted").unwrap_or_else(|e| panic!("{label}: {e}"));
        self.states.push((label.clone(), h.state.clone()));
        self.reports.push((label, rep.clone()));
        (h.state, h.probability, rep)
    }

    fn report(&mut self, label: &str, rho: &DensityMatrix) -> NonclassicalityReport {
        let rep = report_with(rho, &ReportOptions::default()).unwrap_or_else(|e| panic!("{label}: {e}"));
        self.states.push((label.to_string(), rho.clone()));
        self.reports.push((label.to_string(), rep.clone()));
        rep
    }
}

fn pt(r: f64, n_eff: f64, theta: f64, eta: f64, m: usize) -> Point {
    Point { r, n_eff, theta, eta, m }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Line {
    let a = purity_tradeoff(0.5, 200.0, 2.0, 1e6).unwrap();
    let b = purity_tradeoff(1.0, 1000.0, 2.0, 1e6).unwrap();
    let pass = rel(a, 0.02) <= WORKING_POINT_REL && rel(b, 0.02) <= WORKING_POINT_REL;
    let low_ratio = purity_tradeoff(0.5, 200.0, 2.0, 1e4).unwrap();
    let c1 = cooperativity_for_purity(0.5, 0.02, 2.0, 1e6, (1.0, 1e5), 1e-3).unwrap();
    let c2 = cooperativity_for_purity(1.0, 0.02, 2.0, 1e6, (1.0, 1e5), 1e-3).unwrap();
    Line {
        pass,
        detail: format!(
            "n_eff(r=0.5, C=200) = {a:.5}, n_eff(r=1, C=1000) = {b:.5}; target 0.02 +/- {:.0}%",
            WORKING_POINT_REL * 100.0
        ),
        info: vec![
            format!("r=0.5, C=200 at kappa/gamma=1e4: n_eff = {low_ratio:.5}"),
            format!("bisection for n_eff=0.02: C(r=0.5) = {c1:.1}, C(r=1) = {c2:.1}"),
        ],
    }
}

/// Fig. 4 set at η = 0.2: (r, m, P, I).
fn loss_points(suite: &mut Suite) -> Vec<(f64, usize, f64, f64)> {
    let mut out = vec![];
    for r in [0.5, 1.0] {
        for t in LOSS_THETAS {
            let (_, p, rep) = suite.point(pt(r, 0.02, t.theta, 0.2, t.m));
            out.push((r, t.m, p, rep.macroscopicity));
        }
    }
    out
}

fn criterion_2(loss: &[(f64, usize, f64, f64)]) -> Line {
    let mut pass = true;
    let mut parts = vec![];
    for &(r, m, _, i) in loss.iter().filter(|l| l.1 <= 2) {
        let (want, tol) = if r == 0.5 { LOSS_I_R05 } else { LOSS_I_R1 };
        pass &= (i - want).abs() <= tol;
        parts.push(format!("I(r={r}, m={m}) = {i:.3} [{want} +/- {tol}]"));
    }
    let extra = loss
        .iter()
        .filter(|l| l.1 == 3)
        .map(|&(r, _, _, i)| format!("I(r={r}, m=3, theta=0.2) = {i:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    Line { pass, detail: parts.join(", "), info: vec![extra] }
}

fn criterion_3(loss: &[(f64, usize, f64, f64)]) -> Line {
    let ps: Vec<f64> = loss.iter().map(|l| l.2).collect();
    let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ps.iter().copied().fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    let pass = lo >= PROB_WINDOW.0 && hi <= PROB_WINDOW.1 && decades >= PROB_MIN_DECADES;
    let all = loss
        .iter()
        .map(|&(r, m, p, _)| format!("P(r={r},m={m}) = {p:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    let n = Suite::numerics();
    let alt: Vec<f64> = [0.5, 1.0]
        .iter()
        .map(|&r| herald_squeezed_thermal(r, 0.02, 0.1, 0.2, 3, n.min_dim).unwrap().probability)
        .collect();
    Line {
        pass,
        detail: format!(
            "min P = {lo:.2e}, max P = {hi:.2e}, span {decades:.2} decades; window [{:.0e}, {:.0e}], span >= {PROB_MIN_DECADES}",
            PROB_WINDOW.0, PROB_WINDOW.1
        ),
        info: vec![
            all,
            "m=3 uses the assumed theta=0.2".into(),
            format!("with theta=0.1 for m=3: P(r=0.5) = {:.2e}, P(r=1) = {:.2e}", alt[0], alt[1]),
        ],
    }
}

fn criterion_4() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let (mut worst_state, mut worst_prob, mut fails) = (0.0f64, 0.0f64, 0);
    let mut truncated = 0.0f64;
    for _ in 0..ORACLE_CASES {
        let r = rng.gen_range(0.0..1.2);
        let n_eff = rng.gen_range(0.0..0.2);
        let theta = rng.gen_range(0.0..=0.15);
        let eta = ORACLE_ETAS[rng.gen_range(0..ORACLE_ETAS.len())];
        let m = rng.gen_range(0..=3usize);
        let rho = squeezed_thermal_converged(r, n_eff, ORACLE_DIM_M).unwrap().resized(ORACLE_DIM_M).unwrap();
        let fast = herald(&rho, theta, eta, m);
        let exact = OracleOptions { dim_o: ORACLE_DIM_M, dephasing: Dephasing::None };
        let slow = herald_oracle_with(&rho, theta, eta, m, exact);
        match (fast, slow) {
            (Ok(fast), Ok(slow)) => {
                let ds = (fast.state.matrix() - slow.state.matrix()).camax();
                let dp = rel(fast.probability, slow.probability);
                worst_state = worst_state.max(ds);
                worst_prob = worst_prob.max(dp);
                if ds > ORACLE_STATE_TOL || dp > ORACLE_PROB_REL {
                    fails += 1;
                }
                let short = OracleOptions { dim_o: 10, dephasing: Dephasing::None };
                if let Ok(t) = herald_oracle_with(&rho, theta, eta, m, short) {
                    truncated = truncated.max(rel(fast.probability, t.probability));
                }
            }
            (Err(a), Err(b)) if a == b => {}
            _ => fails += 1,
        }
    }
    Line {
        pass: fails == 0,
        detail: format!(
            "{ORACLE_CASES} random tuples, {fails} disagree; max state diff {worst_state:.2e} (tol {ORACLE_STATE_TOL:.0e}), max relative P diff {worst_prob:.2e} (tol {ORACLE_PROB_REL:.0e})"
        ),
        info: vec![format!(
            "optical cutoff 10 instead of {ORACLE_DIM_M}: max relative P diff {truncated:.2e} (photon numbers >= 10 dropped)"
        )],
    }
}

fn criterion_5(suite: &mut Suite) -> Line {
    let vac = suite.report("vacuum", &DensityMatrix::vacuum(10)).macroscopicity;
    let fock1 = suite.report("fock 1", &DensityMatrix::fock(1, 10).unwrap()).macroscopicity;
    let mut pass = vac.abs() <= I_VACUUM_TOL && (fock1 - 1.0).abs() <= I_FOCK1_TOL;
    let mut parts = vec![format!("I(vacuum) = {vac:.2e}"), format!("I(|1>) = {fock1:.5}")];
    for r in [0.5f64, 1.0] {
        let rho = squeezed_thermal_converged(r, 0.0, 40).unwrap();
        let i = suite.report(&format!("squeezed vacuum r={r}"), &rho).macroscopicity;
        let want = r.sinh().powi(2);
        pass &= rel(i, want) <= I_SQUEEZED_REL;
        parts.push(format!("I(S({r})|0>) = {i:.5} vs sinh^2 = {want:.5}"));
    }
    Line { pass, detail: parts.join(", "), info: vec![] }
}

/// Checked last, over every report produced by the run.
fn criterion_5_bound(suite: &Suite) -> (bool, String) {
    let worst = suite
        .reports
        .iter()
        .map(|(l, r)| (r.macroscopicity - r.mean_n, l))
        .fold((f64::NEG_INFINITY, None), |acc, (d, l)| if d > acc.0 { (d, Some(l)) } else { acc });
    (
        worst.0 <= I_BOUND_SLACK,
        format!(
            "max I - <n> over {} suite states = {:.2e} (slack {I_BOUND_SLACK})",
            suite.reports.len(),
            worst.0
        ),
    )
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

fn criterion_6(suite: &mut Suite, cat_m1: f64) -> Line {
    let gaussians = [(0.0, 0.0), (0.0, 0.02), (0.0, 2.0), (0.5, 0.0), (1.0, 0.0), (0.5, 0.02), (1.0, 0.02), (0.5, 0.1)];
    let mut worst = 0.0f64;
    for (r, n) in gaussians {
        let rho = if r == 0.0 { thermal_state(n, 120).unwrap() } else { squeezed_thermal_converged(r, n, 40).unwrap() };
        let rep = suite.report(&format!("gaussian r={r} n_eff={n}"), &rho);
        worst = worst.max(rep.negativity.abs());
    }
    let grid = suite.report("fock 1", &DensityMatrix::fock(1, 10).unwrap()).negativity;
    // |W| of |1> on its negative disc ρ² < 1/2, integrated over 2πρ dρ.
    let neg = |rho: f64| 2.0 * rho * (1.0 - 2.0 * rho * rho) * (-rho * rho).exp();
    let oracle = adaptive_simpson(&neg, 0.0, 0.5f64.sqrt(), 1e-14);
    let pass = worst <= N_GAUSSIAN_TOL && (grid - oracle).abs() <= N_FOCK1_TOL && cat_m1 > 0.0;
    Line {
        pass,
        detail: format!(
            "max |N| over {} Gaussian states = {worst:.2e} (tol {N_GAUSSIAN_TOL:.0e}); N(|1>) grid {grid:.7} vs radial {oracle:.7} (tol {N_FOCK1_TOL:.0e}); N(r=1, n_eff=0.02, m=1) = {cat_m1:.4}",
            gaussians.len()
        ),
        info: vec![format!("closed form 2 exp(-1/2) - 1 = {:.7}", 2.0 * (-0.5f64).exp() - 1.0)],
    }
}

fn criterion_7() -> Line {
    let mut worst_parity = 0.0f64;
    for r in [0.5, 1.0] {
        let rho = squeezed_thermal_converged(r, 0.0, 40).unwrap();
        for m in 1..=3usize {
            let out = herald(&rho, 0.1, 1.0, m).unwrap();
            let wrong: f64 = out.state.populations().iter().enumerate().filter(|(n, _)| n % 2 != m % 2).map(|(_, p)| p).sum();
            worst_parity = worst_parity.max(wrong);
        }
    }
    let rho = squeezed_thermal_converged(0.5, 0.02, 40).unwrap();
    let thetas = [0.01f64, 0.02, 0.03, 0.04, 0.05];
    let mut slopes = vec![];
    for m in 1..=3usize {
        let pts: Vec<(f64, f64)> =
            thetas.iter().map(|&t| (t.ln(), herald(&rho, t, 0.2, m).unwrap().probability.ln())).collect();
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / k, sy / k);
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        slopes.push((m, num / den));
    }
    let slope_ok = slopes.iter().all(|&(m, s)| (s - 2.0 * m as f64).abs() <= SLOPE_TOL);
    Line {
        pass: worst_parity < PARITY_TOL && slope_ok,
        detail: format!(
            "max opposite-parity population {worst_parity:.2e} (tol {PARITY_TOL:.0e}); log-log slopes of P vs theta on [0.01, 0.05]: {} (2m +/- {SLOPE_TOL})",
            slopes.iter().map(|(m, s)| format!("m={m}: {s:.4}")).collect::<Vec<_>>().join(", ")
        ),
        info: vec![],
    }
}

fn criterion_8(suite: &mut Suite, cat: (f64, f64)) -> Line {
    let i = |suite: &mut Suite, r: f64, n: f64, m: usize| suite.point(pt(r, n, 0.1, 1.0, m)).2.macroscopicity;
    let (a1, a3) = (i(suite, 0.1, 0.1, 1), i(suite, 0.1, 0.1, 3));
    let (b1, b3) = cat;
    let (pa, pb) = (a3 < a1, b3 > b1);
    let context: Vec<String> = [0.0, 0.5]
        .iter()
        .map(|&r| {
            let (c1, c3) = (i(suite, r, 0.1, 1), i(suite, r, 0.1, 3));
            format!("n_eff=0.1, r={r}: I(m=1) = {c1:.4}, I(m=3) = {c3:.4}, m=3 lower: {}", c3 < c1)
        })
        .collect();
    Line {
        pass: pa && pb,
        detail: format!(
            "(a) n_eff=0.1, r=0.1: I(m=1) = {a1:.4}, I(m=3) = {a3:.4} -> {}; (b) n_eff=0.02, r=1: I(m=1) = {b1:.4}, I(m=3) = {b3:.4} -> {}",
            if pa { "pass" } else { "fail" },
            if pb { "pass" } else { "fail" }
        ),
        info: context,
    }
}

fn criterion_9() -> Line {
    let eta = detection_efficiency(800e6 / 1e9, &[0.25]).unwrap();
    let rate = squeezing_rate_hz(200.0, 100e3);
    let period = 1.0 / event_rate(1e-7, 10e-6).unwrap();
    let mut pass = rel(eta, 0.2) <= FEASIBILITY_REL && rel(rate, 20e6) <= FEASIBILITY_REL && rel(period, 100.0) <= FEASIBILITY_REL;

    // Same numbers through the feasibility run with its default device settings.
    let rec = run_feasibility(&SweepConfig::defaults(Mode::Feasibility)).unwrap();
    let t = &rec.table;
    let lookup = |q: &str, p: Option<f64>| {
        (0..t.rows.len())
            .find(|&i| t.rows[i][0] == Cell::from(q) && t.get(i, "r").is_none() && t.get(i, "probability") == p)
            .and_then(|i| t.get(i, "value"))
    };
    let run_eta = lookup("detection_efficiency", None);
    let run_rate = lookup("squeezing_rate", None);
    let run_period = lookup("seconds_per_event", Some(1e-7));
    pass &= run_eta == Some(eta) && run_rate == Some(rate) && run_period == Some(period);
    Line {
        pass,
        detail: format!(
            "eta = {eta} (0.8 x 0.25), C Gamma_m = 2pi x {:.6} MHz, 1 event per {period:.9} s at P=1e-7, 10 us period; relative tol {FEASIBILITY_REL:.0e}",
            rate / 1e6
        ),
        info: vec![],
    }
}

fn criterion_10(suite: &mut Suite) -> Line {
    let bad: Vec<String> =
        suite.states.iter().filter(|(_, s)| !s.invariants().hold()).map(|(l, _)| l.clone()).collect();
    let n_states = suite.states.len();
    let mut worst = 0.0f64;
    let mut parts = vec![];
    let fine = ReportOptions { grid_points: 2 * ReportOptions::default().grid_points - 1, ..Default::default() };
    for p in [pt(0.5, 0.02, 0.05, 0.2, 1), pt(1.0, 0.02, 0.1, 0.2, 2), pt(1.0, 0.02, 0.1, 1.0, 3)] {
        let (state, prob, base) = suite.point(p);
        let big = squeezed_thermal_state(p.r, p.n_eff, 2 * state.dim()).unwrap();
        let h2 = herald(&big, p.theta, p.eta, p.m).unwrap();
        let rep2 = report_with(&h2.state, &ReportOptions::default()).unwrap();
        let rep3 = report_with(&state, &fine).unwrap();
        let cutoff = [
            rel(h2.probability, prob),
            rel(rep2.macroscopicity, base.macroscopicity),
            rel(rep2.negativity, base.negativity),
            rel(rep2.mean_n, base.mean_n),
        ];
        let grid = [rel(rep3.macroscopicity, base.macroscopicity), rel(rep3.negativity, base.negativity)];
        let w = cutoff.iter().chain(&grid).copied().fold(0.0, f64::max);
        worst = worst.max(w);
        parts.push(format!("r={} m={} eta={}: dim {} -> {}, max change {w:.1e}", p.r, p.m, p.eta, state.dim(), big.dim()));
        suite.states.push((format!("{p:?} doubled cutoff"), h2.state));
    }
    let bad_after: usize = suite.states[n_states..].iter().filter(|(_, s)| !s.invariants().hold()).count();
    if !bad.is_empty() {
        parts.push(format!("invariant violations: {bad:?}"));
    }
    Line {
        pass: bad.is_empty() && bad_after == 0 && worst < DOUBLING_REL,
        detail: format!(
            "{} states checked, {} violate invariants; doubling cutoff or grid density: max relative change {worst:.2e} (tol {DOUBLING_REL})",
            suite.states.len(),
            bad.len() + bad_after
        ),
        info: parts,
    }
}

fn main() -> ExitCode {
    // Cargo passes test-harness flags; this target takes none.
    let start = Instant::now();
    let mut suite = Suite::default();
    let mut lines: Vec<(u32, Line, f64)> = vec![];
    let timed = |id: u32, f: &mut dyn FnMut() -> Line, lines: &mut Vec<(u32, Line, f64)>| {
        let t = Instant::now();
        let line = f();
        lines.push((id, line, t.elapsed().as_secs_f64()));
    };

    timed(1, &mut criterion_1, &mut lines);
    let loss = loss_points(&mut suite);
    timed(2, &mut || criterion_2(&loss), &mut lines);
    timed(3, &mut || criterion_3(&loss), &mut lines);
    timed(4, &mut criterion_4, &mut lines);
    timed(5, &mut || criterion_5(&mut suite), &mut lines);
    let cat1 = suite.point(pt(1.0, 0.02, 0.1, 1.0, 1)).2;
    let cat3 = suite.point(pt(1.0, 0.02, 0.1, 1.0, 3)).2;
    timed(6, &mut || criterion_6(&mut suite, cat1.negativity), &mut lines);
    timed(7, &mut criterion_7, &mut lines);
    timed(8, &mut || criterion_8(&mut suite, (cat1.macroscopicity, cat3.macroscopicity)), &mut lines);
    timed(9, &mut criterion_9, &mut lines);
    timed(10, &mut || criterion_10(&mut suite), &mut lines);

    let (bound_ok, bound_detail) = criterion_5_bound(&suite);
    if let Some((_, l, _)) = lines.iter_mut().find(|(id, _, _)| *id == 5) {
        l.pass &= bound_ok;
        l.detail = format!("{}; {bound_detail}", l.detail);
    }

    let mut unexpected = 0;
    for (id, line, secs) in &lines {
        let known = KNOWN_FAILURES.iter().find(|k| k.0 == *id);
        let tag = match (line.pass, known) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id}: {tag}: {} [{secs:.1} s]", line.detail);
        for i in &line.info {
            println!("    info: {i}");
        }
        if let Some((_, why)) = known {
            println!("    known failure: {why}");
        }
    }
    let passed = lines.iter().filter(|l| l.1.pass).count();
    println!(
        "acceptance: {passed}/{} criteria pass, {unexpected} unexpected failure(s), {:.0} s",
        lines.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
