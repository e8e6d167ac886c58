//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::cell::Cell;
use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use qcoexist::config::ScenarioConfig;
use qcoexist::link::{classical_link_margin, noise_budget, DetectorSpec, FibreSpec, FilterChain, NoiseBudget};
use qcoexist::nonlinear::{enumerate_products, ChannelPlan};
use qcoexist::planner::{best_worst_spacing, characterization_sweep, crossover_power, power_sweep, BandLayout};
use qcoexist::presets;
use qcoexist::qkd::{calibrate_baseline, predict, qber, secret_key_rate, CowParams};
use qcoexist::spectra::RamanSpectrum;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn millis(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}

fn quadrant(fibre: &str, scenario: &str, dbm: f64) -> (f64, f64, f64) {
    let config = ScenarioConfig::from_presets(fibre, scenario);
    let env = config.environment().unwrap();
    let base = predict(&env.cow, &env.detector, &NoiseBudget::default()).unwrap().skr;
    let curve = power_sweep(
        "q",
        &config.plan().unwrap(),
        &[dbm],
        &config.fibre_spec().unwrap(),
        &env,
    )
    .unwrap();
    (base, curve.skr_bps[0], curve.qber[0])
}

fn placement_extrema() -> Outcome {
    let start = Instant::now();
    let config = ScenarioConfig::from_presets("smf", "s1_200GHz");
    let env = config.environment().unwrap();
    let r = best_worst_spacing(
        -24.0,
        &config.layout().unwrap(),
        &config.placement.spacing_ghz,
        &FibreSpec::smf(),
        &env,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let pass = (100.0..=200.0).contains(&r.best_spacing_ghz)
        && (1000.0..=1400.0).contains(&r.worst_spacing_ghz)
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "best {} GHz (want 100-200), worst {} GHz (want 1000-1400), {}",
            r.best_spacing_ghz,
            r.worst_spacing_ghz,
            millis(elapsed)
        ),
    )
}

fn raman_fwm_crossover() -> Outcome {
    let start = Instant::now();
    let config = ScenarioConfig::from_presets("smf", "s1_200GHz");
    let env = config.environment().unwrap();
    let r = crossover_power(200.0, &BandLayout::default(), &FibreSpec::smf(), &env);
    let elapsed = start.elapsed();
    match r {
        Ok(dbm) => outcome(
            (dbm + 7.0).abs() <= 3.0 && elapsed < Duration::from_secs(5),
            format!("{dbm:.3} dBm (want -7 ± 3), {}", millis(elapsed)),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn scaling_laws() -> Outcome {
    let spectrum = RamanSpectrum::bundled(293.0).unwrap();
    let fibre = FibreSpec::smf();
    let det = DetectorSpec::default();
    let strategy = (
        proptest::sample::subsequence((2i64..=60).collect::<Vec<_>>(), 1..=8),
        proptest::collection::vec(-30.0f64..5.0, 8),
        0.01f64..100.0,
    );
    let worst = Cell::new((0.0f64, 0.0f64));
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 500,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let result = runner.run(&strategy, |(slots, dbm, c)| {
        let (plan, _) = common::plan_from_slots(&slots);
        let powers = dbm[..slots.len()].iter().map(|d| 10f64.powf(d / 10.0)).collect();
        let plan = ChannelPlan::new(plan.quantum_thz, plan.classical_thz, powers).unwrap();
        let filters = FilterChain::table1().tuned_to(&plan);
        let a = noise_budget(&plan, &fibre, &spectrum, &filters, &det).unwrap();
        let b = noise_budget(&plan.scaled(c), &fibre, &spectrum, &filters, &det).unwrap();
        let er = rel_err(b.raman_counts, c * a.raman_counts);
        let ef = rel_err(b.fwm_counts, c * c * c * a.fwm_counts);
        let (wr, wf) = worst.get();
        worst.set((wr.max(er), wf.max(ef)));
        prop_assert!(er < 1e-9 && ef < 1e-9);
        Ok(())
    });
    outcome(
        result.is_ok(),
        format!(
            "500 random plans, max rel err raman {:.2e}, fwm {:.2e} (want < 1e-9)",
            worst.get().0,
            worst.get().1
        ),
    )
}

fn fwm_oracle_equivalence() -> Outcome {
    // every subset of size 1..=6 of 12 consecutive 50 GHz slots
    let slots: Vec<i64> = (2..14).collect();
    let mut plans = 0;
    let mut mismatches = 0;
    for mask in 1u32..(1 << slots.len()) {
        if mask.count_ones() > 6 {
            continue;
        }
        let chosen: Vec<i64> = (0..slots.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| slots[b])
            .collect();
        let (plan, hz) = common::plan_from_slots(&chosen);
        let got: Vec<_> = enumerate_products(&plan)
            .unwrap()
            .into_iter()
            .map(|p| (p.i, p.j, p.k, p.freq_hz))
            .collect();
        let set: BTreeSet<_> = got.iter().copied().collect();
        if set.len() != got.len() || set != common::fwm_oracle(&hz) {
            mismatches += 1;
        }
        plans += 1;
    }
    outcome(mismatches == 0, format!("{plans} plans, {mismatches} mismatches"))
}

fn calibration_closure() -> Outcome {
    let det = DetectorSpec::default();
    let mut details = Vec::new();
    let mut pass = true;
    for name in presets::scenario_names() {
        let b = presets::scenario(&name).unwrap().baseline.unwrap();
        let p = calibrate_baseline(b.skr_bps, b.qber, &det, &CowParams::default()).unwrap();
        let r = predict(&p, &det, &NoiseBudget::default()).unwrap();
        let (es, eq) = ((r.skr / b.skr_bps - 1.0).abs(), (r.qber / b.qber - 1.0).abs());
        pass &= es <= 0.01 && eq <= 0.01;
        details.push(format!("{name}: skr {:.3} qber {:.5}", r.skr, r.qber));
    }
    outcome(pass, details.join("; "))
}

fn quadrant_a() -> Outcome {
    let (base, skr, q) = quadrant("smf", "s1_200GHz", -24.0);
    let drop = 100.0 * (1.0 - skr / base);
    outcome(
        (drop - 73.0).abs() <= 15.0 && (q * 100.0 - 4.2).abs() <= 1.0,
        format!("drop {drop:.2}% (want 73 ± 15), qber {:.3}% (want 4.2 ± 1)", q * 100.0),
    )
}

fn quadrant_b() -> Outcome {
    let (_, skr, q) = quadrant("smf", "s2_1THz", -24.0);
    outcome(skr == 0.0 && q >= 0.052, format!("skr {skr}, qber {:.3}%", q * 100.0))
}

fn quadrant_c() -> Outcome {
    let (base, skr, _) = quadrant("hcnanf", "s1_200GHz", 0.0);
    let dev = 100.0 * (skr / base - 1.0).abs();
    outcome(
        dev <= 5.0,
        format!("skr {skr:.1} vs baseline {base:.1}, {dev:.2}% off (want <= 5)"),
    )
}

fn quadrant_d() -> Outcome {
    let (base, skr, _) = quadrant("hcnanf", "s2_1THz", 0.0);
    let drop = 100.0 * (1.0 - skr / base);
    outcome((drop - 10.0).abs() <= 8.0, format!("drop {drop:.2}% (want 10 ± 8)"))
}

fn cutoff_behaviour() -> Outcome {
    let params = CowParams::default();
    // log-uniform rates so both sides of the cutoff are well populated
    let strategy = (3.0f64..7.0, -2.0f64..6.0, -2.0f64..5.0, 0.0f64..0.1);
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let above = Cell::new(0);
    let result = runner.run(&strategy, |(s, n, d, e)| {
        let (s, n, d) = (10f64.powf(s), 10f64.powf(n), 10f64.powf(d));
        let q = qber(s, n, d, e).unwrap();
        let r = secret_key_rate(q, s, n, d, &params);
        if q >= 0.052 {
            above.set(above.get() + 1);
            prop_assert_eq!(r, 0.0);
        }
        Ok(())
    });
    outcome(
        result.is_ok(),
        format!(
            "1000 tuples, {} at or above cutoff, all with zero key rate",
            above.get()
        ),
    )
}

fn characterization() -> Outcome {
    let config = ScenarioConfig::from_presets("smf", "s1_200GHz");
    let env = config.environment().unwrap();
    let plan = config.plan().unwrap();
    let nominal = characterization_sweep("c", &plan, &[-12.0], &env).unwrap().skr_bps[0];
    let mut weak = env.clone();
    weak.filters = weak.filters.with_isolation_reduced(40.0);
    let reduced = characterization_sweep("c", &plan, &[-12.0], &weak).unwrap().skr_bps[0];
    outcome(
        (2100.0..=2300.0).contains(&nominal) && reduced < nominal,
        format!("skr {nominal:.2} (want 2100-2300), with isolation -40 dB {reduced:.2}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"fibre": "smf", "scenario": "s1_200GHz",
            "sweep": {"powers_dbm": {"start": -30, "stop": 5, "step": 1}}}"#,
    )
    .unwrap();
    let mut differing = Vec::new();
    for cmd in ["placement", "sweep", "characterize", "crossover"] {
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let out = dir.path().join(format!("{cmd}_{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_qcoexist"))
                .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .output()
                .unwrap()
                .status;
            if !status.success() {
                return outcome(false, format!("{cmd} exited with {status}"));
            }
            outputs.push(std::fs::read(out.join(format!("{cmd}.csv"))).unwrap());
        }
        if outputs[0] != outputs[1] {
            differing.push(cmd);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            "4 commands, CSV byte-identical across runs".to_owned()
        } else {
            format!("differing: {differing:?}")
        },
    )
}

fn classical_margin() -> Outcome {
    let s1 = presets::scenario("s1_200GHz").unwrap();
    let plan = ChannelPlan::uniform(s1.quantum_thz, s1.classical_thz, 0.0).unwrap();
    let margins = classical_link_margin(&plan, &FibreSpec::hcnanf(), 5.0, -26.0);
    let worst = margins.iter().map(|m| (m - 9.4).abs()).fold(0.0, f64::max);
    outcome(
        worst <= 0.01,
        format!("per-channel margin {:.4} dB (want 9.4 ± 0.01)", margins[0]),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 13] = [
        ("1 placement extrema", placement_extrema),
        ("2 Raman/FWM crossover", raman_fwm_crossover),
        ("3 scaling laws", scaling_laws),
        ("4 FWM oracle equivalence", fwm_oracle_equivalence),
        ("5 calibration closure", calibration_closure),
        ("6a SMF 200 GHz -24 dBm", quadrant_a),
        ("6b SMF 1 THz -24 dBm", quadrant_b),
        ("6c HC-NANF 200 GHz 0 dBm", quadrant_c),
        ("6d HC-NANF 1 THz 0 dBm", quadrant_d),
        ("7 cutoff behaviour", cutoff_behaviour),
        ("8 characterization mode", characterization),
        ("9 determinism", determinism),
        ("10 classical margin", classical_margin),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} [{name}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
