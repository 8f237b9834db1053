//! Acceptance suite. Prints one PASS/FAIL line per criterion followed by the
//! measured values, then fails if any criterion failed.
//!
//! cargo test --release -p pvtwin --test acceptance -- --nocapture

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{NaiveDate, NaiveDateTime};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use pvtwin::detect::{detect_on_targets, Grouping, Strategy, TestSet};
use pvtwin::faults::SynthRow;
use pvtwin::geometry::GeoLocation;
use pvtwin::io::{read_csv, RunConfig};
use pvtwin::losses::{analyze_soiling, degradation_profile, theil_sen, total_loss, SoilingConfig};
use pvtwin::nn::{self, gradient_check, is_productive, kfold_cv, TargetSignal};
use pvtwin::pipeline::{EventRow, Pipeline, Stage};
use pvtwin::pv::{
    snl_ac_power, solve_single_diode, translate_params, DiodeParams, InverterParams, ModuleParams, OperatingConditions,
};
use pvtwin::reference::{reference_end, reference_start, reference_weather};
use pvtwin::rng::seeded;
use pvtwin::series::SLOTS_PER_DAY;
use pvtwin::simulate::SystemSpec;
use pvtwin::synth::{
    build_envelopes, classify_days, classify_sky, clear_sky_day, daily_clearness, synth_irradiance, SkyCategory,
};

/// Findings of one criterion: each check is a pass flag plus a description.
#[derive(Default)]
struct Checks(Vec<(bool, String)>);

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.0.push((ok, what.into()));
    }

    fn runtime(&mut self, t: Duration, limit_s: f64) {
        let s = t.as_secs_f64();
        self.check(s < limit_s, format!("runtime {s:.2} s (limit {limit_s} s)"));
    }
}

fn run(id: u32, title: &str, f: impl FnOnce(&mut Checks)) -> bool {
    let t0 = Instant::now();
    let mut c = Checks::default();
    let panicked = catch_unwind(AssertUnwindSafe(|| f(&mut c))).err();
    if let Some(p) = panicked {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        c.check(false, format!("aborted: {msg}"));
    }
    let ok = !c.0.is_empty() && c.0.iter().all(|(ok, _)| *ok);
    println!(
        "criterion {id} {} {title} [{:.1} s]",
        if ok { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    for (ok, what) in &c.0 {
        println!("    [{}] {what}", if *ok { "ok" } else { "!!" });
    }
    ok
}

// ---- 1: single diode ----

fn diode_residual(dp: &DiodeParams, v: f64, i: f64) -> f64 {
    let vd = v + i * dp.r_s;
    dp.i_l - dp.i_o * ((vd / dp.a).exp() - 1.0) - vd / dp.r_sh - i
}

/// Current at `v` by bisection on the implicit equation; `v` in `[0, V_oc]`.
fn bisect_current(dp: &DiodeParams, v: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, dp.i_l);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if diode_residual(dp, v, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn oracle_mpp(dp: &DiodeParams) -> f64 {
    let (mut lo, mut hi) = (0.0, dp.a * (dp.i_l / dp.i_o + 1.0).ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if diode_residual(dp, mid, 0.0) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v_oc = lo;
    let n = 400;
    let p = |v: f64| v * bisect_current(dp, v);
    let k = (0..=n)
        .map(|k| v_oc * k as f64 / n as f64)
        .enumerate()
        .max_by(|a, b| p(a.1).total_cmp(&p(b.1)))
        .unwrap()
        .0;
    // dP/dV = I + V·dI/dV, dI/dV from implicit differentiation.
    let dpdv = |v: f64| {
        let i = bisect_current(dp, v);
        let g = dp.i_o / dp.a * ((v + i * dp.r_s) / dp.a).exp() + 1.0 / dp.r_sh;
        i - v * g / (1.0 + dp.r_s * g)
    };
    let mut lo = v_oc * k.saturating_sub(1) as f64 / n as f64;
    let mut hi = v_oc * (k + 1).min(n) as f64 / n as f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if dpdv(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    p(0.5 * (lo + hi))
}

fn criterion_1(c: &mut Checks) {
    let t0 = Instant::now();
    let m = ModuleParams::lg400n2w_a5();
    let mut rng = seeded(1);
    let (mut worst_res, mut worst_rel) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let g = rng.random_range(50.0..=1100.0);
        let t = rng.random_range(0.0..=70.0);
        let dp = translate_params(&m, &OperatingConditions::new(g, t)).unwrap();
        let r = solve_single_diode(&dp).unwrap();
        for (v, i) in [(0.0, r.i_sc), (r.v_oc, 0.0), (r.v_mp, r.i_mp)] {
            worst_res = worst_res.max(diode_residual(&dp, v, i).abs());
        }
        let p = oracle_mpp(&dp);
        worst_rel = worst_rel.max((r.p_mp - p).abs() / p);
    }
    c.check(
        worst_res <= 1e-9,
        format!("max |residual| at I_sc, V_oc, MPP = {worst_res:.2e} A"),
    );
    c.check(
        worst_rel <= 1e-6,
        format!("max relative MPP gap to grid+bisection oracle = {worst_rel:.2e}"),
    );
    let stc = solve_single_diode(&translate_params(&m, &OperatingConditions::stc()).unwrap()).unwrap();
    let rel = (stc.p_mp - m.p_nameplate).abs() / m.p_nameplate;
    c.check(
        rel <= 0.02,
        format!(
            "STC P_mp = {:.2} W vs {} W nameplate ({:.2}%)",
            stc.p_mp,
            m.p_nameplate,
            100.0 * rel
        ),
    );
    c.runtime(t0.elapsed(), 5.0);
}

// ---- 2: inverter ----

fn snl_direct(p_dc: f64, v_dc: f64, inv: &InverterParams) -> f64 {
    let a = inv.p_dc0 * (1.0 + inv.c1 * (v_dc - inv.v_dc0));
    let b = inv.p_s0 * (1.0 + inv.c2 * (v_dc - inv.v_dc0));
    let c = inv.c0 * (1.0 + inv.c3 * (v_dc - inv.v_dc0));
    (inv.p_ac0 / (a - b) - c * (a - b)) * (p_dc - b) + c * (p_dc - b).powi(2)
}

fn criterion_2(c: &mut Checks) {
    let t0 = Instant::now();
    let mut rng = seeded(2);
    for inv in [InverterParams::abb_trio_50(), InverterParams::abb_trio_27_6()] {
        let (v_lo, v_hi) = (
            inv.mppt_low.unwrap_or(0.5 * inv.v_dc0),
            inv.mppt_high.unwrap_or(1.5 * inv.v_dc0),
        );
        let (mut inside, mut worst) = (0usize, 0.0f64);
        let (mut below_ok, mut sat_ok) = (true, true);
        while inside < 10_000 {
            let v = rng.random_range(v_lo..=v_hi);
            let b = inv.p_s0 * (1.0 + inv.c2 * (v - inv.v_dc0));
            let p = rng.random_range(b..=1.3 * inv.p_dc0);
            let want = snl_direct(p, v, &inv);
            let got = snl_ac_power(p, v, &inv).unwrap();
            if p > b && want < inv.p_ac0 {
                inside += 1;
                worst = worst.max((got - want).abs() / want.abs().max(1.0));
            } else if want >= inv.p_ac0 {
                sat_ok &= got == inv.p_ac0;
            }
            let q = rng.random_range(0.0..=b);
            below_ok &= snl_ac_power(q, v, &inv).unwrap() == 0.0;
        }
        sat_ok &= snl_ac_power(2.0 * inv.p_dc0, inv.v_dc0, &inv).unwrap() == inv.p_ac0;
        c.check(
            worst <= 1e-12,
            format!(
                "{}: 10^4 points in (B, saturation), max relative gap {worst:.1e}",
                inv.name
            ),
        );
        c.check(below_ok, format!("{}: P_AC = 0 for every P_DC <= B", inv.name));
        c.check(sat_ok, format!("{}: P_AC = P_AC0 in saturation", inv.name));
    }
    c.runtime(t0.elapsed(), 1.0);
}

// ---- 3: loss composition ----

fn criterion_3(c: &mut Checks) {
    for (f, want) in [
        (vec![0.0], 0.0),
        (vec![50.0, 50.0], 75.0),
        (vec![10.0, 20.0, 30.0], 49.6),
    ] {
        let got = total_loss(&f).unwrap();
        c.check(
            (got - want).abs() <= 1e-12,
            format!("total_loss({f:?}) = {got} (analytic {want})"),
        );
    }
    let mut rng = seeded(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let mut f: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=100.0)).collect();
        let base = total_loss(&f).unwrap();
        for _ in 0..4 {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            f.swap(i, j);
            worst = worst.max((total_loss(&f).unwrap() - base).abs());
        }
    }
    c.check(
        worst <= 1e-12,
        format!("1000 random factor sets, max gap under permutation {worst:.1e}"),
    );
}

// ---- 4: soiling ----

fn criterion_4(c: &mut Checks) {
    let t0 = Instant::now();
    let n = 180;
    let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let dates: Vec<NaiveDate> = d0.iter_days().take(n).collect();
    let starts = [0usize, 45, 89, 136];
    let slopes = [-0.003, -0.002, -0.004, -0.0025];
    let mut truth = Vec::with_capacity(n);
    let mut level = 0.8;
    for (s, (&start, &slope)) in starts.iter().zip(&slopes).enumerate() {
        let end = starts.get(s + 1).copied().unwrap_or(n);
        if s > 0 {
            level = truth[start - 1] + 0.2;
        }
        truth.extend((0..end - start).map(|k| level + slope * k as f64));
    }
    let mut rng = seeded(4);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let pm: Vec<f64> = truth.iter().map(|t| t * (1.0 + noise.sample(&mut rng))).collect();
    let h: Vec<f64> = (0..n).map(|k| 4500.0 + 1500.0 * (k as f64 / 7.0).sin()).collect();
    let cfg = SoilingConfig::default();
    let res = analyze_soiling(&dates, &pm, &h, &cfg, 44).unwrap();

    for &s in &starts[1..] {
        let near = res.events.iter().map(|e| (*e - dates[s]).num_days().abs()).min();
        c.check(
            near.is_some_and(|d| d <= 2),
            format!("cleaning on {} found within {near:?} days", dates[s]),
        );
    }
    c.check(true, format!("{} events reported in total", res.events.len()));
    for (s, (&start, &slope)) in starts.iter().zip(&slopes).enumerate() {
        let end = starts.get(s + 1).copied().unwrap_or(n);
        let mid = (start + end) / 2;
        match res.intervals.iter().find(|iv| iv.range.contains(&mid)) {
            Some(iv) => c.check(
                iv.slope_ci_low <= slope && slope <= iv.slope_ci_high,
                format!(
                    "slope {slope} inside CI [{:.5}, {:.5}] (estimate {:.5})",
                    iv.slope_ci_low, iv.slope_ci_high, iv.slope
                ),
            ),
            None => c.check(false, format!("no interval covers day {mid}")),
        }
    }
    let want = truth.iter().zip(&h).map(|(t, w)| t * w).sum::<f64>() / h.iter().sum::<f64>();
    c.check(
        (res.r_s_h - want).abs() <= 0.02,
        format!("r_s,H = {:.4} vs ground truth {want:.4}", res.r_s_h),
    );
    c.check(
        res.mc_profiles.len() == 1000,
        format!("{} Monte Carlo iterations", res.mc_profiles.len()),
    );

    let mut exact = true;
    for n in 2..=50 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..30) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut s = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if x[i] != x[j] {
                    s.push((y[j] - y[i]) / (x[j] - x[i]));
                }
            }
        }
        s.sort_by(f64::total_cmp);
        let m = s.len();
        let brute = if m % 2 == 1 {
            s[m / 2]
        } else {
            0.5 * (s[m / 2 - 1] + s[m / 2])
        };
        exact &= theil_sen(&x, &y).unwrap().slope == brute;
    }
    c.check(
        exact,
        "Theil-Sen slope equals brute-force pairwise median for n = 2..50 (with ties in x)",
    );
    c.runtime(t0.elapsed(), 30.0);
}

// ---- 5: degradation ----

fn criterion_5(c: &mut Checks) {
    let start = NaiveDate::from_ymd_opt(2019, 8, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2021, 2, 28).unwrap();
    let v = degradation_profile(start, &[end], 0.5).unwrap()[0];
    c.check(
        (v - 0.79).abs() <= 0.01,
        format!("0.5 %/yr from {start} to {end}: {v:.4} %"),
    );
}

// ---- 6: synthetic irradiance ----

fn criterion_6(c: &mut Checks) {
    let t0 = Instant::now();
    let loc = GeoLocation::bogota();
    let sys = SystemSpec::reference_a();
    let meteo = reference_weather(&loc, &sys.orientation, reference_start(), reference_end(), 6)
        .unwrap()
        .records();
    let classes = classify_days(&meteo, &loc, &sys.orientation).unwrap();
    let set = build_envelopes(&meteo, &classes);
    for cat in SkyCategory::ALL {
        let Some(env) = set
            .envelopes
            .iter()
            .filter(|e| e.category == cat)
            .max_by_key(|e| e.days)
        else {
            c.check(false, format!("{cat}: no historical envelope"));
            continue;
        };
        let days = synth_irradiance(env, 2021, 90, 600 + cat.index() as u64);
        let (mut inside, mut night_zero, mut same) = (true, true, 0usize);
        for d in &days {
            for s in 0..SLOTS_PER_DAY {
                inside &= env.min[s] <= d.g_poa[s] && d.g_poa[s] <= env.max[s];
                if env.max[s] == 0.0 {
                    night_zero &= d.g_poa[s] == 0.0;
                }
            }
            let cs = clear_sky_day(d.date, &loc, &sys.orientation).unwrap();
            if daily_clearness(&d.g_poa, &cs).map(classify_sky) == Some(cat) {
                same += 1;
            }
        }
        let again = synth_irradiance(env, 2021, 90, 600 + cat.index() as u64);
        let bits = |v: &[pvtwin::synth::SynthDay]| -> Vec<u64> {
            v.iter().flat_map(|d| d.g_poa.iter().map(|g| g.to_bits())).collect()
        };
        let frac = same as f64 / days.len() as f64;
        c.check(
            inside,
            format!(
                "{cat} (month {}, {} history days): all slots inside envelope",
                env.month, env.days
            ),
        );
        c.check(night_zero, format!("{cat}: night slots exactly 0"));
        c.check(bits(&days) == bits(&again), format!("{cat}: rerun bit-identical"));
        c.check(
            frac >= 0.90,
            format!("{cat}: {:.1}% reclassified into the same category", 100.0 * frac),
        );
    }
    c.runtime(t0.elapsed(), 20.0);
}

// ---- 7: neural estimator ----

fn stage_file(out: &Path, stage: Stage, file: &str) -> PathBuf {
    out.join(stage.name()).join(file)
}

fn criterion_7(c: &mut Checks) {
    let worst = (0..5).map(|s| gradient_check(6, s).unwrap()).fold(0.0, f64::max);
    c.check(
        worst <= 1e-4,
        format!("gradient check, 5 random 10-6-6-1 nets: max relative gap {worst:.2e}"),
    );

    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::reference();
    cfg.systems.truncate(1);
    cfg.synth.n_days = 365;
    let name = cfg.systems[0].name.clone();
    Pipeline::new(cfg.clone(), dir.path())
        .unwrap()
        .run_through(Stage::Inject)
        .unwrap();
    let clean: Vec<SynthRow> = read_csv(stage_file(dir.path(), Stage::Inject, &format!("{name}_clean.csv"))).unwrap();
    let rows: Vec<SynthRow> = clean.into_iter().filter(is_productive).take(50_000).collect();
    c.check(
        rows.len() == 50_000,
        format!("{} productive rows (losses applied)", rows.len()),
    );

    for (t, min_r2) in [(TargetSignal::Voc, 0.90), (TargetSignal::EtaCell, 0.85)] {
        let data = nn::build_dataset(&rows, t);
        let net = cfg.network(t, data.len());
        let cv = kfold_cv(&data, &net, cfg.seeds.train).unwrap();
        let r2 = cv.mean_r2().unwrap_or(f64::NAN);
        let folds: Vec<String> = cv
            .folds
            .iter()
            .map(|f| f.metrics.r2.map_or("n/a".into(), |v| format!("{v:.3}")))
            .collect();
        c.check(
            r2 >= min_r2,
            format!(
                "{t}: mean 5-fold R² {r2:.3} (need {min_r2}), folds [{}], hidden {}, batch {}, dropout {}",
                folds.join(", "),
                net.hidden,
                net.batch_size,
                net.dropout
            ),
        );
        c.check(cv.loss_trend_ok(), format!("{t}: loss trend holds on every fold"));
    }
    c.runtime(t0.elapsed(), 600.0);
}

// ---- 8: detection ----

fn criterion_8(c: &mut Checks) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::reference();
    Pipeline::new(cfg.clone(), dir.path())
        .unwrap()
        .run_through(Stage::Inject)
        .unwrap();
    let t0 = Instant::now();
    for sc in &cfg.systems {
        let n = &sc.name;
        let read = |f: &str| stage_file(dir.path(), Stage::Inject, &format!("{n}_{f}.csv"));
        let clean: Vec<SynthRow> = read_csv(read("clean")).unwrap();
        let faulted: Vec<SynthRow> = read_csv(read("faulted")).unwrap();
        let events: Vec<EventRow> = read_csv(read("events")).unwrap();
        let mut dates: Vec<NaiveDate> = faulted.iter().map(|r| r.timestamp.date()).collect();
        dates.dedup();
        let first_test = dates[dates.len() - 30];
        let history: Vec<SynthRow> = clean
            .into_iter()
            .filter(|r| r.g_poa > 0.0 && r.timestamp.date() < first_test)
            .collect();
        let test: Vec<SynthRow> = faulted
            .into_iter()
            .filter(|r| r.g_poa > 0.0 && r.timestamp.date() >= first_test)
            .collect();
        let mut peak: BTreeMap<NaiveDateTime, f64> = BTreeMap::new();
        for e in &events {
            let p = peak.entry(e.timestamp).or_insert(0.0);
            *p = p.max(e.magnitude);
        }
        let mags: Vec<f64> = test
            .iter()
            .map(|r| peak.get(&r.timestamp).copied().unwrap_or(0.0))
            .collect();
        let set = TestSet {
            rows: &test,
            max_magnitude: &mags,
        };
        let r = detect_on_targets(
            &history,
            set,
            &TargetSignal::ALL,
            Strategy::QuartileIqr,
            Grouping::SlotCategory,
        )
        .unwrap();
        let f = &r.fused;
        let sums = std::iter::once(f)
            .chain(&r.signals)
            .all(|s| s.confusion.tp + s.confusion.tn + s.confusion.fp + s.confusion.fn_ == test.len());
        c.check(
            f.accuracy >= 0.75,
            format!(
                "system {n}: accuracy {:.3} on {} daylight points over 30 days ({} faulty)",
                f.accuracy,
                test.len(),
                test.iter().filter(|r| r.label == 1).count()
            ),
        );
        let mr = r.major_recall.unwrap_or(f64::NAN);
        c.check(
            mr >= 0.90,
            format!(
                "system {n}: recall {mr:.3} on {} points with magnitude >= 50%",
                r.n_major
            ),
        );
        c.check(
            sums,
            format!("system {n}: confusion counts sum to N for every signal and the fused label"),
        );
    }
    c.runtime(t0.elapsed(), 60.0);
}

// ---- 9: determinism ----

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_9(c: &mut Checks) {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        Pipeline::new(RunConfig::reference(), d.path())
            .unwrap()
            .run_all()
            .unwrap();
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    c.check(fa == fb, format!("{} artifact files in each run", fa.len()));
    let mut bytes = 0usize;
    let mut differ = Vec::new();
    for f in &fa {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap_or_default();
        bytes += x.len();
        if x != y {
            differ.push(f.display().to_string());
        }
    }
    c.check(
        differ.is_empty(),
        format!("{:.1} MB compared, differing files: {differ:?}", bytes as f64 / 1e6),
    );
}

#[test]
fn acceptance() {
    let results = [
        run(1, "single-diode correctness", criterion_1),
        run(2, "inverter model", criterion_2),
        run(3, "loss composition", criterion_3),
        run(4, "soiling pipeline", criterion_4),
        run(5, "degradation anchor", criterion_5),
        run(6, "synthetic generation", criterion_6),
        run(7, "neural estimator", criterion_7),
        run(8, "detection accuracy", criterion_8),
        run(9, "end-to-end determinism", criterion_9),
    ];
    let failed: Vec<usize> = (1..=9).filter(|i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
