//! Acceptance suite. Runs with a custom harness and prints one PASS/FAIL
//! line per criterion; exits non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use trilayer_core::evolution::{StructureState, StructureState::*, Trajectory};
use trilayer_core::interfaces::Model;
use trilayer_core::model::ModelConfig;
use trilayer_core::radial::{integrate_radial, RadialStart, StopCondition, RADIAL_TOL};
use trilayer_core::stationary::{growth_bounds, StationaryKind};

type Check = Result<String, String>;
type Transition = (StructureState, StructureState);
// (part, envelope samples checked, worst deviation)
type JobOutcome = Result<(char, usize, f64), String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

const SIGMA_D: f64 = 0.2;
const SIGMA_Q: f64 = 0.5;
const SIGMA_TILDE: f64 = 1.0;
const MU: f64 = 1.0;
const NU1: f64 = 0.6;
const NU2: f64 = 1.0;

fn model_with(edit: impl FnOnce(&mut ModelConfig)) -> Model {
    let mut cfg = ModelConfig::canonical();
    edit(&mut cfg);
    Model::new(cfg.validate().unwrap()).unwrap()
}

fn canonical() -> Model {
    model_with(|_| {})
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solve<T>(r: trilayer_core::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("{}: {e}", e.name()))
}

fn slope(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * x.abs().max(1e-3);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

// u'' + (2/r)u' = λu with u(ρ) = u0, u'(ρ) = 0
fn linear_oracle(lambda: f64, rho: f64, u0: f64, r: f64) -> f64 {
    let k = lambda.sqrt();
    if rho == 0.0 {
        if r == 0.0 {
            u0
        } else {
            u0 * (k * r).sinh() / (k * r)
        }
    } else {
        let x = k * (r - rho);
        u0 / r * (rho * x.cosh() + x.sinh() / k)
    }
}

fn oracle_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    let mut combos = 0;
    for lambda in [0.5, 1.0, 2.0] {
        for (rho, u0) in [(0.0, 0.2), (0.5, 0.2), (2.0, 0.5)] {
            let start = if rho == 0.0 {
                RadialStart::center(u0)
            } else {
                RadialStart { r0: rho, u0, du0: 0.0 }
            };
            let stop = StopCondition::until_radius(rho + 6.0);
            let sol =
                solve(integrate_radial(move |u| lambda * u, |u| u - 1.0, start, stop, RADIAL_TOL))?;
            for (&r, &u) in sol.r_grid().iter().zip(sol.u()) {
                let exact = linear_oracle(lambda, rho, u0, r);
                worst = worst.max(((u - exact) / exact).abs());
            }
            combos += 1;
        }
    }
    ensure(worst <= 1e-8, || format!("max rel err {worst:e}"))?;
    Ok(format!("{combos} combinations, max rel err {worst:.2e}"))
}

fn monotonicity() -> Check {
    let m = canonical();
    let es = m.eta_star();
    let mut n = 0;
    let mut pos = |what: &str, v: f64| -> Result<(), String> {
        n += 1;
        ensure(v > 0.0, || format!("{what}: slope {v:e}"))
    };
    for rho in [0.1, 1.0, 5.0, 20.0] {
        pos("d eta/d rho", slope(|r| m.eta_of_rho(r).unwrap(), rho))?;
    }
    for eta in [1.2 * es, 3.0 * es, 9.0 * es] {
        pos("three-layer flux", slope(|e| m.three_layer_flux(e).unwrap(), eta))?;
    }
    for eta in [0.1 * es, 0.5 * es, 0.9 * es] {
        pos("two-layer flux", slope(|e| m.two_layer_flux(e).unwrap(), eta))?;
    }
    for sb in [0.7, 2.0, 6.0] {
        for eta in [0.0, 0.5 * es, 2.0 * es] {
            let x = eta.max(1e-3);
            pos("dR/d eta", slope(|e| m.r_of_eta(e, sb).unwrap(), x))?;
        }
        pos("dR*/d sigma_bar", slope(|s| m.r_star(s).unwrap(), sb))?;
    }
    let s = solve(m.supply(2.0))?;
    let (rs, r_star) = (s.radii().r_sub_star.unwrap(), s.radii().r_star.unwrap());
    for r in [1.5 * r_star, 5.0 * r_star, 50.0 * r_star] {
        pos("d(rho/R)/dR", slope(|x| s.profile(x).unwrap().psi().unwrap(), r))?;
        pos("d(eta/R)/dR", slope(|x| s.profile(x).unwrap().phi_frac().unwrap(), r))?;
    }
    pos("d(eta/R)/dR", slope(|x| s.profile(x).unwrap().phi_frac().unwrap(), 0.5 * (rs + r_star)))?;
    for sb in [1.1, 2.0, 5.0] {
        pos("dG/d sigma_bar", slope(|x| m.g_functional(x).unwrap(), sb))?;
        pos("dF/d sigma_bar", slope(|x| m.fcal_functional(x).unwrap(), sb))?;
    }

    // 20 radii spanning the one-, two- and three-layer structures
    let cv = solve(m.critical_values())?;
    let sb = 2.0 * cv.sigma_star;
    let s = solve(m.supply(sb))?;
    let (rs, r_star) = (s.radii().r_sub_star.unwrap(), s.radii().r_star.unwrap());
    let radii = log_space(0.05 * rs, 50.0 * r_star, 20);
    let mut states = Vec::new();
    for &r in &radii {
        let d = slope(|x| s.growth(x).unwrap(), r);
        ensure(d < 0.0, || format!("dF/dR at R={r}: {d:e}"))?;
        states.push(s.classify_structure(r));
    }
    for st in [ProliferatingOne, ProliferatingQuiescentTwo, ProliferatingQuiescentNecroticThree] {
        ensure(states.contains(&st), || format!("radii miss {}", st.as_str()))?;
    }
    Ok(format!("{} sign checks, dF/dR < 0 at 20 radii", n + 20))
}

fn limits() -> Check {
    let m = canonical();
    let mut worst_small: f64 = 0.0;
    let mut worst_large: f64 = 0.0;
    let mut min_frac = f64::INFINITY;
    for sb in [0.8, 2.0, 4.0] {
        let s = solve(m.supply(sb))?;
        let r_star = s.radii().r_star.unwrap();
        let large = solve(s.growth(1e3 * r_star))?;
        worst_large = worst_large.max((large + NU2 / 3.0).abs());
        let small = solve(s.growth(1e-4))?;
        worst_small = worst_small.max((small - MU * (sb - SIGMA_TILDE) / 3.0).abs());
        let far = solve(s.profile(1e3 * r_star))?;
        let farther = solve(s.profile(1e4 * r_star))?;
        let (psi, phi) = (far.psi().unwrap(), far.phi_frac().unwrap());
        min_frac = min_frac.min(psi).min(phi);
        ensure(psi >= 0.95 && phi >= 0.95, || format!("sb={sb}: rho/R={psi} eta/R={phi}"))?;
        ensure(farther.psi().unwrap() > psi && farther.phi_frac().unwrap() > phi, || {
            format!("sb={sb}: fractions do not increase toward 1")
        })?;
    }
    ensure(worst_large <= 1e-3, || format!("F(1e3 R*) off by {worst_large:e}"))?;
    ensure(worst_small <= 1e-3, || format!("F(1e-4) off by {worst_small:e}"))?;
    Ok(format!(
        "|F(1e3R*)+nu2/3| <= {worst_large:.1e}, |F(1e-4)-S/3| <= {worst_small:.1e}, fractions >= {min_frac:.4}"
    ))
}

fn critical_structure() -> Check {
    let m = canonical();
    let cv = solve(m.critical_values())?;
    let (ss, s) = (cv.sigma_sub_star, cv.sigma_star);
    ensure(SIGMA_TILDE < ss && ss < s, || format!("sigma_* = {ss}, sigma* = {s}"))?;
    let g = solve(m.g_functional(s))?;
    let f = solve(m.fcal_functional(ss))?;
    ensure(g.abs() <= 1e-10 && f.abs() <= 1e-10, || {
        format!("G(sigma*) = {g:e}, F(sigma_*) = {f:e}")
    })?;
    let by_nu1: Vec<f64> = [0.5, 0.6, 0.8]
        .iter()
        .map(|&nu1| model_with(|c| c.thresholds.nu1 = nu1).critical_values().map(|c| c.sigma_star))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(by_nu1.windows(2).all(|w| w[1] > w[0]), || format!("sigma* vs nu1: {by_nu1:?}"))?;
    let by_sq: Vec<f64> = [0.4, 0.5, 0.6]
        .iter()
        .map(|&sq| {
            model_with(|c| c.thresholds.sigma_q = sq).critical_values().map(|c| c.sigma_sub_star)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(by_sq.windows(2).all(|w| w[1] < w[0]), || format!("sigma_* vs sigma_Q: {by_sq:?}"))?;
    Ok(format!(
        "sigma_* = {ss:.10}, sigma* = {s:.10}, |G| = {:.1e}, |F| = {:.1e}",
        g.abs(),
        f.abs()
    ))
}

fn classification() -> Check {
    let m = canonical();
    let cv = solve(m.critical_values())?;
    let (ss, s) = (cv.sigma_sub_star, cv.sigma_star);
    let samples = [
        0.3,
        0.7,
        SIGMA_TILDE,
        1.05,
        0.5 * (SIGMA_TILDE + ss),
        ss,
        ss + 0.05 * (s - ss),
        0.5 * (ss + s),
        s,
        1.01 * s,
        2.0 * s,
        4.0 * s,
    ];
    let mut worst: f64 = 0.0;
    for sb in samples {
        let supply = solve(m.supply(sb))?;
        let st = solve(supply.stationary(&cv))?;
        let r = *supply.radii();
        let ok = match st.kind {
            StationaryKind::Trivial => sb <= SIGMA_TILDE,
            StationaryKind::OneLayer { r_s } => {
                sb > SIGMA_TILDE && sb <= ss && r_s > 0.0 && r_s <= r.r_sub_star.unwrap()
            }
            StationaryKind::TwoLayer { r_s, .. } => {
                sb > ss && sb <= s && r_s > r.r_sub_star.unwrap() && r_s <= r.r_star.unwrap()
            }
            StationaryKind::ThreeLayer { rho_s, eta_s, r_s } => {
                sb > s && r_s > r.r_star.unwrap() && 0.0 < rho_s && rho_s < eta_s && eta_s < r_s
            }
        };
        ensure(ok, || format!("sb={sb}: {:?}", st.kind))?;
        if let Some(r_s) = st.kind.radius() {
            let f = solve(m.growth_functional(r_s, sb))?;
            worst = worst.max(f.abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max |F(R_s)| = {worst:e}"))?;
    Ok(format!("{} supplies classified, max |F(R_s)| = {worst:.1e}", samples.len()))
}

fn continuity() -> Check {
    let m = canonical();
    let mut worst_flux: f64 = 0.0;
    let mut worst_center: f64 = 0.0;
    for sb in [0.8, 2.0, 7.0] {
        let r_star = solve(m.r_star(sb))?;
        for mult in [1.5, 5.0, 40.0] {
            let p = solve(m.assemble_profile(mult * r_star, sb))?;
            ensure(p.layers().len() == 3, || format!("sb={sb} R={mult}R*: not three layers"))?;
            for pair in p.layers().windows(2) {
                let x = pair[0].end;
                let jump = solve(pair[0].flux_at(x))? - solve(pair[1].flux_at(x))?;
                worst_flux = worst_flux.max(jump.abs());
            }
        }
        let p = solve(m.assemble_profile(r_star, sb))?;
        worst_center = worst_center.max((p.center_value() - SIGMA_D).abs());
    }
    ensure(worst_flux <= 1e-9, || format!("flux jump {worst_flux:e}"))?;
    ensure(worst_center <= 1e-10, || format!("center value off by {worst_center:e}"))?;
    Ok(format!("max flux jump {worst_flux:.1e}, center error at R* {worst_center:.1e}"))
}

fn envelope(m: &Model, traj: &Trajectory, r0: f64, sb: f64) -> Result<usize, String> {
    let (lo, hi) = growth_bounds(m, sb);
    for s in &traj.samples {
        let floor = r0 * (lo * s.t).exp();
        let ceil = r0 * (hi * s.t).exp();
        ensure(s.r >= floor * (1.0 - 1e-9) && s.r <= ceil * (1.0 + 1e-9), || {
            format!("sb={sb} R0={r0}: envelope broken at t={} R={}", s.t, s.r)
        })?;
    }
    Ok(traj.samples.len())
}

enum Job {
    Stationary { sb: f64 },
    Necrotic { sb: f64 },
    Case { label: &'static str, sb: f64, r0: f64, path: Vec<Transition> },
    Converge { sb: f64, r0: f64, r_s: f64 },
}

fn run_job(m: &Model, job: &Job) -> JobOutcome {
    match *job {
        Job::Stationary { sb } => {
            let r_s = solve(m.stationary_solution(sb))?.kind.radius().unwrap();
            let traj = solve(m.evolve(r_s, sb, 100.0, 5.0))?;
            let dev = traj.samples.iter().map(|s| (s.r - r_s).abs() / r_s).fold(0.0, f64::max);
            ensure(dev <= 1e-9 && traj.events.is_empty(), || {
                format!("(a) sb={sb}: drift {dev:e}")
            })?;
            Ok(('a', envelope(m, &traj, r_s, sb)?, dev))
        }
        Job::Necrotic { sb } => {
            let r0 = 4.0;
            let traj = solve(m.evolve(r0, sb, 60.0, 1.0))?;
            let dev = traj
                .samples
                .iter()
                .map(|s| {
                    let exact = r0 * (-NU2 * s.t / 3.0).exp();
                    (s.r - exact).abs() / exact
                })
                .fold(0.0, f64::max);
            ensure(dev <= 1e-9, || format!("(b) sb={sb}: rel err {dev:e}"))?;
            Ok(('b', envelope(m, &traj, r0, sb)?, dev))
        }
        Job::Case { label, sb, r0, ref path } => {
            let traj = solve(m.evolve(r0, sb, 200.0, 2.0))?;
            let got: Vec<_> = traj.events.iter().map(|e| (e.from, e.to)).collect();
            ensure(&got == path, || format!("(d) case {label}: events {got:?}"))?;
            let ordered = traj.events.windows(2).all(|w| w[0].t < w[1].t);
            ensure(ordered && traj.events.iter().all(|e| e.t > 0.0), || {
                format!("(d) case {label}: transition times out of order")
            })?;
            Ok(('d', envelope(m, &traj, r0, sb)?, 0.0))
        }
        Job::Converge { sb, r0, r_s } => {
            let t_end = 200.0 / NU1.min(MU);
            let traj = solve(m.evolve(r0, sb, t_end, 10.0))?;
            let dev = (traj.last().r - r_s).abs() / r_s;
            ensure(dev <= 1e-6, || format!("(e) sb={sb} R0={r0}: rel err {dev:e}"))?;
            Ok(('e', envelope(m, &traj, r0, sb)?, dev))
        }
    }
}

fn evolution() -> Check {
    let m = canonical();
    let cv = solve(m.critical_values())?;
    let (ss, s) = (cv.sigma_sub_star, cv.sigma_star);
    let radii = |sb: f64| {
        let r = m.critical_radii(sb).unwrap();
        (r.r_sub_star.unwrap(), r.r_star.unwrap())
    };
    let mid_one = 0.5 * (SIGMA_TILDE + ss);
    let mid_two = 0.5 * (ss + s);
    let high = 1.5 * s;
    let low = 0.5 * (SIGMA_Q + ss);

    let mut jobs = Vec::new();
    for sb in [mid_one, mid_two, 2.0 * s] {
        jobs.push(Job::Stationary { sb });
        let r_s = solve(m.stationary_solution(sb))?.kind.radius().unwrap();
        for r0 in [0.1 * r_s, 10.0 * r_s] {
            jobs.push(Job::Converge { sb, r0, r_s });
        }
    }
    for sb in [0.1, SIGMA_D] {
        jobs.push(Job::Necrotic { sb });
    }
    let (rs_h, rstar_h) = radii(high);
    let (rs_m, rstar_m) = radii(mid_two);
    let (rs_l, rstar_l) = radii(low);
    let (one, two, three) =
        (ProliferatingOne, ProliferatingQuiescentTwo, ProliferatingQuiescentNecroticThree);
    let cases = [
        ("i", high, 0.5 * (rs_h + rstar_h), vec![(two, three)]),
        ("ii", mid_two, 1.5 * rstar_m, vec![(three, two)]),
        ("iii", mid_two, 0.5 * rs_m, vec![(one, two)]),
        ("iv", low, 0.5 * (rs_l + rstar_l), vec![(two, one)]),
        ("v", high, 0.5 * rs_h, vec![(one, two), (two, three)]),
        ("vi", low, 1.5 * rstar_l, vec![(three, two), (two, one)]),
    ];
    for (label, sb, r0, path) in cases {
        jobs.push(Job::Case { label, sb, r0, path });
    }

    let results: Vec<JobOutcome> = jobs.par_iter().map(|j| run_job(&m, j)).collect();
    let mut envelope_samples = 0;
    let mut worst = [0.0f64; 3];
    for r in results {
        let (part, n, dev) = r?;
        envelope_samples += n;
        match part {
            'a' => worst[0] = worst[0].max(dev),
            'b' => worst[1] = worst[1].max(dev),
            'e' => worst[2] = worst[2].max(dev),
            _ => {}
        }
    }
    Ok(format!(
        "(a) drift {:.1e}, (b) err {:.1e}, (c) {envelope_samples} samples in envelope, (d) 6 cases, (e) err {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn cli_determinism_and_parity() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let m = canonical();
    let cv = solve(m.critical_values())?;
    let low = 0.5 * (SIGMA_Q + cv.sigma_sub_star);
    let r_star_low = solve(m.r_star(low))?;
    let r_star_2 = solve(m.r_star(2.0))?;

    let cfg_2 = common::write_config(dir.path(), "two.json", &common::canonical_with_supply(2.0));
    let cfg_high = common::write_config(
        dir.path(),
        "high.json",
        &common::canonical_with_supply(2.0 * cv.sigma_star),
    );
    let cfg_low = common::write_config(dir.path(), "low.json", &common::canonical_with_supply(low));
    let p = |x: &Path| x.to_str().unwrap().to_string();
    let (r_prof, r_evo) = (r_star_2.to_string(), (1.5 * r_star_low).to_string());

    // json table key and the CSV side-file suffix holding it (empty: main file)
    type Tables = Vec<(&'static str, &'static str)>;
    let runs: Vec<(&str, Vec<String>, Tables)> = vec![
        ("critical", vec!["critical".into(), "--config".into(), p(&cfg_2)], vec![]),
        ("stationary", vec!["stationary".into(), "--config".into(), p(&cfg_high)], vec![]),
        (
            "profile",
            vec!["profile".into(), "--config".into(), p(&cfg_2), "--R".into(), r_prof],
            vec![("profile", "")],
        ),
        (
            "evolve",
            vec![
                "evolve".into(),
                "--config".into(),
                p(&cfg_low),
                "--R0".into(),
                r_evo,
                "--t-end".into(),
                "60".into(),
                "--sample-dt".into(),
                "2".into(),
            ],
            vec![("samples", ""), ("events", "events")],
        ),
        (
            "sweep",
            vec![
                "sweep".into(),
                "--config".into(),
                p(&cfg_2),
                "--param".into(),
                "sigma_bar".into(),
                "--grid".into(),
                "1.01:6.6:6".into(),
            ],
            vec![("sweep", "")],
        ),
    ];

    let mut compared = 0;
    for (name, args, tables) in &runs {
        let mut outputs = Vec::new();
        for (fmt, ext) in [("csv", "csv"), ("json", "json")] {
            let mut copies = Vec::new();
            for rep in 0..2 {
                let out = dir.path().join(format!("{name}_{rep}.{ext}"));
                let mut a: Vec<String> = args.clone();
                a.extend(["--format".into(), fmt.into(), "--out".into(), p(&out)]);
                let argv: Vec<&str> = a.iter().map(String::as_str).collect();
                let o = common::run(&argv);
                ensure(o.status.code() == Some(0), || {
                    format!("{name} {fmt}: {}", String::from_utf8_lossy(&o.stderr))
                })?;
                let mut files = vec![std::fs::read(&out).map_err(|e| e.to_string())?];
                if fmt == "csv" {
                    for (_, side) in tables.iter().filter(|(_, s)| !s.is_empty()) {
                        let side_path = trilayer::cli::side_path(&out, side);
                        files.push(std::fs::read(side_path).map_err(|e| e.to_string())?);
                    }
                }
                copies.push(files);
            }
            ensure(copies[0] == copies[1], || format!("{name} {fmt}: reruns differ"))?;
            outputs.push(copies.swap_remove(0));
        }
        let json: serde_json::Value =
            serde_json::from_slice(&outputs[1][0]).map_err(|e| e.to_string())?;
        if tables.is_empty() {
            compared += common::table_parity(&outputs[0][0], &json, None)
                .map_err(|e| format!("{name}: {e}"))?;
        } else {
            for (i, (key, _)) in tables.iter().enumerate() {
                compared += common::table_parity(&outputs[0][i], &json, Some(key))
                    .map_err(|e| format!("{name}/{key}: {e}"))?;
            }
        }
    }
    Ok(format!(
        "{} commands byte-identical on rerun, {compared} numeric cells at parity",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", Some(Duration::from_secs(5)), oracle_equivalence),
        ("monotonicity suite", Some(Duration::from_secs(60)), monotonicity),
        ("limit checks", None, limits),
        ("critical-value structure", None, critical_structure),
        ("stationary classification", None, classification),
        ("flux and value continuity", None, continuity),
        ("evolution", Some(Duration::from_secs(600)), evolution),
        ("cli determinism and format parity", None, cli_determinism_and_parity),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => {
                Err(format!("runtime {:.1}s exceeds {}s", elapsed.as_secs_f64(), l.as_secs()))
            }
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(e) => ("FAIL", e.as_str()),
        };
        println!("criterion {} [{tag}] {name} ({:.2}s): {detail}", i + 1, elapsed.as_secs_f64());
        failed += outcome.is_err() as usize;
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
