//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so the
//! report is always printed. Criteria listed in `KNOWN_FAILURES` are reported
//! but do not fail the run; any other failure does.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use bwave::evolution::*;
use bwave::functionals::*;
use bwave::groundstate::*;
use bwave::io_cli::{decode, encode, run_text, FieldFile, Mode, RunOptions};
use bwave::spectral::*;
use bwave::stability::*;

/// Criteria that fail for reasons analysed in the README.
const KNOWN_FAILURES: &[&str] = &["stability-experiment"];

struct Verdict {
    pass: bool,
    details: String,
}

fn verdict(pass: bool, details: String) -> Verdict {
    Verdict { pass, details }
}

fn grid(n: usize, sizes: &[usize], l: &[f64]) -> Arc<Grid<f64>> {
    make_grid(n, sizes, l).unwrap()
}

fn tight() -> SolveConfig<f64> {
    SolveConfig { tol: 1e-11, ..Default::default() }
}

fn solve(c: &[f64], p: f64, g: &Arc<Grid<f64>>) -> GroundStateResult<f64> {
    petviashvili_solve(&WaveParams::new(c.to_vec(), p).unwrap(), g, &tight()).unwrap()
}

fn sech_oracle() -> Verdict {
    let g = grid(1, &[1024], &[60.0]);
    let mut worst: (f64, f64) = (0.0, 0.0);
    for c in [0.0, 0.4, 0.9] {
        let t = Instant::now();
        let r = petviashvili_solve(&WaveParams::new(vec![c], 2.0).unwrap(), &g, &SolveConfig::default()).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let centred = r.phi.centered();
        let xs = g.coords(0);
        let x0 = xs[g.origin_index()[0]];
        let a = 1.5 * (1.0 - c * c);
        let k = (1.0 - c * c).sqrt() / 2.0;
        let err = xs
            .iter()
            .zip(centred.values())
            .map(|(&x, &v)| (v - a / ((k * (x - x0)).cosh().powi(2))).abs())
            .fold(0.0, f64::max)
            / a;
        worst = (worst.0.max(err), worst.1.max(secs));
    }
    verdict(worst.0 < 1e-6 && worst.1 < 5.0, format!("max rel L∞ error {:.2e}, slowest solve {:.2} s", worst.0, worst.1))
}

/// Returns the verdict and every converged state for the certificate check.
fn pohozaev_suite() -> (Verdict, Vec<GroundStateResult<f64>>) {
    let mut states = Vec::new();
    let mut worst_r: f64 = 0.0;
    let mut worst_nehari: f64 = 0.0;
    let mut worst_case = String::new();
    let g1 = grid(1, &[1024], &[60.0]);
    for p in [2.0, 3.0] {
        for c in [0.0, 0.2, 0.5, 0.8] {
            let r = solve(&[c], p, &g1);
            let m = r.pohozaev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let neh = (2.0 * r.report.j - (p + 1.0) * r.report.k).abs() / (2.0 * r.report.j);
            if m > worst_r {
                worst_case = format!("n=1 p={p} c={c}");
            }
            worst_r = worst_r.max(m);
            worst_nehari = worst_nehari.max(neh);
            states.push(r);
        }
    }
    for p in [2.0, 3.0] {
        let base = if p == 2.0 { 128 } else { 256 };
        for c in [0.0, 0.2, 0.5, 0.8] {
            let params = WaveParams::new(vec![c, 0.0], p).unwrap();
            let study = box_study(&params, &[base, base], &[20.0, 20.0], 4, &tight()).unwrap();
            let m = study.residuals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let e = study.extrapolated;
            let neh = (2.0 * e.j() - (p + 1.0) * e.k(p)).abs() / (2.0 * e.j());
            if m > worst_r {
                worst_case = format!("n=2 p={p} c={c}");
            }
            worst_r = worst_r.max(m);
            worst_nehari = worst_nehari.max(neh);
            states.push(study.levels[0].clone());
        }
    }
    let v = verdict(
        worst_r < 1e-6 && worst_nehari < 1e-6,
        format!(
            "max residual {:.2e} ({worst_case}), max |2J-(p+1)K|/2J {:.2e}; n=2 uses 4 boxes L=20..160 extrapolated in 1/L",
            worst_r, worst_nehari
        ),
    );
    (v, states)
}

fn dcurve(step: f64) -> DCurve<f64> {
    let g = grid(2, &[128, 128], &[20.0, 20.0]);
    let base = WaveParams::new(vec![0.0, 0.0], 2.0).unwrap();
    let count = (0.8 / step).round() as usize;
    let zetas: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    trace_dcurve(&[1.0, 0.0], &zetas, &base, &g, &SolveConfig::default()).unwrap()
}

fn dcurve_properties() -> Verdict {
    let coarse = dcurve(0.05);
    let fine = dcurve(0.025);
    let monotone = coarse.monotonicity_violations().is_empty();
    let excess = coarse.lower_bound_excess().unwrap();
    let mc = dprime_check(&coarse);
    let mf = dprime_check(&fine);
    let worst = mc.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    // observed order at shared interior points (ζ = 0.05 k, fine index 2k)
    let mut orders: Vec<f64> = (1..coarse.points.len() - 1)
        .filter_map(|k| match (mc[k], mf[2 * k]) {
            (Some(a), Some(b)) if b > 0.0 => Some((a / b).log2()),
            _ => None,
        })
        .collect();
    orders.sort_by(f64::total_cmp);
    let median = orders[orders.len() / 2];
    verdict(
        monotone && excess <= 1e-4 && worst < 1e-2 && (1.5..=2.5).contains(&median),
        format!(
            "strictly decreasing: {monotone}; lower-bound excess {:.1e}·d(0); max d' mismatch {:.2e}; median refinement order {:.2}",
            excess, worst, median
        ),
    )
}

fn certificate(states: &[GroundStateResult<f64>]) -> Verdict {
    let mut worst: f64 = 0.0;
    for r in states {
        let c = instability_certificate(&r.phi, &r.params).unwrap();
        worst = worst.max(rel_diff(c.closed_form, c.quadratic_form));
    }
    let g = grid(2, &[128, 128], &[20.0, 20.0]);
    let negative = [1.5, 2.0, 3.0, 4.0].iter().all(|&p| {
        let r = solve(&[0.0, 0.0], p, &g);
        instability_certificate(&r.phi, &r.params).unwrap().closed_form < 0.0
    });
    verdict(
        worst < 1e-6 && negative,
        format!("max closed/quadratic mismatch {:.2e} over {} states; negative at c=0 for p ∈ {{1.5,2,3,4}}: {negative}", worst, states.len()),
    )
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::EPSILON)
}

fn thresholds() -> Verdict {
    let t = threshold_p(0.5, 2).unwrap();
    let exact = 33f64.sqrt() / 3.0;
    let strong = strong_region(3.0) == 1.0 / 3.0;
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("[regions]\nn = 2 5 8\n[output]\ndir = {}\n", dir.path().display());
    let start = Instant::now();
    let report = run_text(Mode::Regions, &cfg, RunOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (t - exact).abs() < 1e-12 && strong && report.written.len() == 3 && secs < 1.0;
    verdict(ok, format!("|threshold - √33/3| = {:.1e}; strong_region(3) = 1/3: {strong}; 3 region CSVs in {:.3} s", (t - exact).abs(), secs))
}

fn random_pair(g: &Arc<Grid<f64>>) -> EvolutionState<f64> {
    let u = smooth_random_field(g, 11, 1.0).unwrap().scale(3.0);
    let v = smooth_random_field(g, 12, 1.0).unwrap().scale(3.0);
    EvolutionState { u, v, t: 0.0 }
}

fn conservation() -> Verdict {
    let g = grid(2, &[64, 64], &[10.0, 10.0]);
    let params = WaveParams::new(vec![0.0, 0.0], 3.0).unwrap();
    let start = random_pair(&g);
    let cfg = EvolveConfig { monitor_every: 100, band: 4, ..EvolveConfig::new(10.0, 1e-3) };
    let (_, s) = evolve(&start, &params, &cfg, Monitors::default()).unwrap();
    let de = s.energy_drift();
    let df = s.momentum_drift().iter().fold(0.0f64, |a, &b| a.max(b));
    let mut ends = Vec::new();
    for dt in [0.04, 0.02, 0.01, 0.005] {
        let cfg = EvolveConfig { monitor_every: 100_000, band: 4, ..EvolveConfig::new(2.0, dt) };
        ends.push(evolve(&start, &params, &cfg, Monitors::default()).unwrap().0.u);
    }
    let err: Vec<f64> = (0..3).map(|k| l2_norm(&ends[k].sub(&ends[3]).unwrap())).collect();
    // Richardson-style order from three errors against the finest run
    let order = ((err[0] - err[1]) / (err[1] - err[2])).log2();
    verdict(
        de < 1e-6 && df < 1e-6 && (3.5..=4.5).contains(&order),
        format!("p=3, max|u|≈{:.2}, T=10: E drift {:.1e}, F drift {:.1e}; observed order {:.2}", start.u.max_abs(), de, df, order),
    )
}

fn traveling_wave() -> Verdict {
    let g = grid(2, &[128, 128], &[20.0, 20.0]);
    let r = solve(&[0.2, 0.0], 2.0, &g);
    let (phi, minus) = r.traveling_pair().unwrap();
    let t_final = 5.0;
    let cfg = EvolveConfig { monitor_every: 1000, ..EvolveConfig::new(t_final, 1e-3) };
    // (φ, +Aφ) moves against c and should match φ(x + ct)
    let start = EvolutionState { u: phi.clone(), v: minus.scale(-1.0), t: 0.0 };
    let (end, _) = evolve(&start, &r.params, &cfg, Monitors::default()).unwrap();
    let target = translate(&phi.fft(), &[-0.2 * t_final, 0.0]).ifft().unwrap();
    let err = l2_norm(&end.u.sub(&target).unwrap());
    verdict(err < 1e-4, format!("‖u(5) - φ(x+ct)‖ = {:.2e} (‖φ‖ = {:.2})", err, l2_norm(&phi)))
}

fn virial() -> Verdict {
    let g = grid(2, &[64, 64], &[10.0, 10.0]);
    let params = WaveParams::new(vec![0.0, 0.0], 3.0).unwrap();
    let h = 1e-3;
    let cfg = EvolveConfig { monitor_every: 1, band: 4, ..EvolveConfig::new(0.05, h) };
    let (_, s) = evolve(&random_pair(&g), &params, &cfg, Monitors::default()).unwrap();
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for k in 1..s.len() - 1 {
        let d1 = (s.i[k + 1] - s.i[k - 1]) / (2.0 * h);
        let d2 = (s.i[k + 1] - 2.0 * s.i[k] + s.i[k - 1]) / (h * h);
        e1 = e1.max(rel_diff(d1, s.i1[k]));
        e2 = e2.max(rel_diff(d2, s.i2_closed[k]));
    }
    verdict(e1 < 1e-6 && e2 < 1e-4, format!("FD(I)' vs 2⟨D⁻¹u,v⟩: {:.1e}; FD(I)'' vs closed form: {:.1e}", e1, e2))
}

fn strong_instability() -> Verdict {
    let g = grid(2, &[256, 256], &[20.0, 20.0]);
    let r = solve(&[0.2, 0.0], 3.0, &g);
    let cfg = EvolveConfig { monitor_every: 1, adaptive_cfl: Some(0.1), band: 4, ..EvolveConfig::new(5.0, 1e-2) };
    let criteria = BlowupCriteria::default();
    // the experiment refuses to start unless λ(φ, -Aφ) lies in K⁻
    let (out, s) = match strong_instability_experiment(&r, 1.1, &cfg, &criteria) {
        Ok(x) => x,
        Err(e) => return verdict(false, format!("experiment refused: {e}")),
    };
    let m = s.len();
    let growth = s.h1[m - 1] / s.h1[0];
    let tail_ok = (m - criteria.window..m).all(|k| s.i2[k] > 0.0 && s.gap[k] >= 0.0);
    let all_kminus = s.membership.iter().all(|v| *v == Some(SetVerdict::KMinus));
    verdict(
        out.kind == OutcomeKind::BlowupFlag && all_kminus && out.bound_breaks == 0 && growth > 10.0 && tail_ok,
        format!(
            "{} at t = {:.4}; K⁻ at all {} records: {all_kminus}; bound breaks {}; H¹ ×{:.2}; I''>0 and gap ≥ 0 over the window: {tail_ok}; E drift {:.1e}",
            out.kind.as_str(),
            out.t_event.unwrap_or(f64::NAN),
            m,
            out.bound_breaks,
            growth,
            s.energy_drift()
        ),
    )
}

fn stability() -> Verdict {
    let g = grid(2, &[128, 128], &[20.0, 20.0]);
    let r = solve(&[0.2, 0.0], 2.0, &g);
    let cfg = EvolveConfig { monitor_every: 100, ..EvolveConfig::new(20.0, 1e-3) };
    let (out, s) = stability_experiment(&r, 1e-3, &cfg, 7).unwrap();
    let d_end = s.orbital_distance.last().copied().flatten().unwrap_or(f64::NAN);
    verdict(
        out.kind == OutcomeKind::StableRun,
        format!("{}: {}; distance at last record {:.2e} (t = {:.1})", out.kind.as_str(), out.details, d_end, s.times[s.len() - 1]),
    )
}

fn qualitative() -> Verdict {
    let g = grid(2, &[256, 256], &[40.0, 40.0]);
    let r0 = solve(&[0.0, 0.0], 2.0, &g);
    let r2 = solve(&[0.2, 0.0], 2.0, &g);
    let r8 = solve(&[0.8, 0.0], 2.0, &g);
    let d8 = r8.diagnostics.decay.as_ref().unwrap();
    let d0 = r0.diagnostics.decay.as_ref().unwrap();
    let sign = r8.diagnostics.sign.min_val < 0.0;
    let ecc = (r2.diagnostics.symmetry.eccentricity, r8.diagnostics.symmetry.eccentricity);
    let kappa_ok = [d8.kappa_parallel, d8.kappa_perp].iter().all(|&k| k > 0.0 && k <= 2.0);
    let ok = sign && ecc.1 > ecc.0 && d8.verdict == DecayVerdict::Algebraic && kappa_ok && d0.verdict == DecayVerdict::Exponential;
    verdict(
        ok,
        format!(
            "min φ(c=0.8) = {:.3e}; eccentricity {:.3} (c=0.2) < {:.3} (c=0.8); c=0.8 {} κ∥={:.2} κ⊥={:.2}; c=0 {}",
            r8.diagnostics.sign.min_val,
            ecc.0,
            ecc.1,
            d8.verdict.as_str(),
            d8.kappa_parallel,
            d8.kappa_perp,
            d0.verdict.as_str()
        ),
    )
}

fn determinism() -> Verdict {
    let g = grid(2, &[24, 40], &[PI, 5.0]);
    let field = smooth_random_field(&g, 5, 0.7).unwrap().scale(1e3);
    let file = FieldFile { field, c: vec![0.3, -0.2], p: 2.5 };
    let bytes = encode(&file).unwrap();
    let back = decode(&bytes, None).unwrap();
    let bitwise = back.field.values().iter().zip(file.field.values()).all(|(a, b)| a.to_bits() == b.to_bits());
    let runs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path().display();
            let solve = format!("[params]\nn = 2\np = 2\nc = 0.5 0\n[grid]\nN = 32 32\nL = 10 10\n[output]\ndir = {d}\n");
            let curve = format!("[params]\nn = 2\np = 2\ndirection = 1 0\nzeta = 0:0.1:0.4\n[grid]\nN = 32 32\nL = 10 10\n[output]\ndir = {d}\n");
            let evolve = format!("[params]\nn = 2\np = 3\nc = 0.2 0\n[grid]\nN = 32 32\nL = 10 10\n[evolve]\nT = 0.3\ndt = 0.01\nmembership = on\n[output]\ndir = {d}\n");
            let opts = RunOptions { deterministic: true, threads: 1 };
            run_text(Mode::Solve, &solve, opts).unwrap();
            run_text(Mode::DCurve, &curve, opts).unwrap();
            run_text(Mode::Evolve, &evolve, opts).unwrap();
            ["summary.csv", "profile.bwf", "dcurve.csv", "monitor.csv"].iter().map(|f| std::fs::read(dir.path().join(f)).unwrap()).collect()
        })
        .collect();
    let identical = runs[0] == runs[1];
    verdict(bitwise && identical, format!("field round trip bitwise: {bitwise}; repeated solve/dcurve/evolve outputs byte-identical: {identical}"))
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    let mut record = |name: &'static str, v: Verdict| {
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.details);
        results.push((name, v));
    };
    record("sech-oracle", sech_oracle());
    let (v, states) = pohozaev_suite();
    record("pohozaev-suite", v);
    record("dcurve-properties", dcurve_properties());
    record("instability-certificate", certificate(&states));
    record("thresholds-and-regions", thresholds());
    record("conservation-and-order", conservation());
    record("traveling-wave", traveling_wave());
    record("virial-identities", virial());
    record("strong-instability-experiment", strong_instability());
    record("stability-experiment", stability());
    record("qualitative-shapes", qualitative());
    record("determinism-and-io", determinism());
    let passed = results.iter().filter(|(_, v)| v.pass).count();
    println!("{passed}/{} criteria pass ({:.0} s)", results.len(), start.elapsed().as_secs_f64());
    let unexpected: Vec<&str> = results.iter().filter(|(n, v)| !v.pass && !KNOWN_FAILURES.contains(n)).map(|(n, _)| *n).collect();
    for (n, v) in &results {
        if v.pass && KNOWN_FAILURES.contains(n) {
            println!("note: {n} now passes; remove it from KNOWN_FAILURES");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
