use proptest::prelude::*;
use qcoexist::link::{
    cascade_transmission, noise_budget, photon_rate, DetectorSpec, FibreSpec, FilterChain, FilterStage, NoiseBudget,
};
use qcoexist::nonlinear::ChannelPlan;
use qcoexist::qkd::{qber, secret_key_rate, CowParams};
use qcoexist::spectra::{detailed_balance_factor, Branch, RamanSpectrum};

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Up to 8 distinct slots on a 50 GHz grid below 193.70 THz, with random
/// per-channel powers.
fn random_plan() -> impl Strategy<Value = ChannelPlan> {
    proptest::sample::subsequence((2i64..=60).collect::<Vec<_>>(), 1..=8).prop_flat_map(|slots| {
        let n = slots.len();
        (Just(slots), proptest::collection::vec(-30.0f64..5.0, n)).prop_map(|(slots, dbm)| {
            let freqs = slots
                .iter()
                .map(|s| (193_700_000_000_000 - s * 50_000_000_000) as f64 / 1e12)
                .collect();
            let powers = dbm.iter().map(|d| 10f64.powf(d / 10.0)).collect();
            ChannelPlan::new(193.70, freqs, powers).unwrap()
        })
    })
}

fn budget(plan: &ChannelPlan, fibre: &FibreSpec) -> NoiseBudget {
    let spectrum = RamanSpectrum::bundled(293.0).unwrap();
    let filters = FilterChain::table1().tuned_to(plan);
    noise_budget(plan, fibre, &spectrum, &filters, &DetectorSpec::default()).unwrap()
}

proptest! {
    #[test]
    fn raman_linear_fwm_cubic(plan in random_plan(), c in 0.01f64..100.0) {
        let fibre = FibreSpec::smf();
        let base = budget(&plan, &fibre);
        let scaled = budget(&plan.scaled(c), &fibre);
        prop_assert!(rel_err(scaled.raman_counts, c * base.raman_counts) < 1e-9);
        prop_assert!(rel_err(scaled.fwm_counts, c * c * c * base.fwm_counts) < 1e-9);
        prop_assert!(rel_err(scaled.leakage_counts, c * base.leakage_counts) < 1e-9);
    }

    #[test]
    fn detailed_balance_ratio(d in 0.0f64..40_000.0, t in 200.0f64..400.0) {
        let s = RamanSpectrum::bundled(t).unwrap();
        let stokes = s.coefficient(d, Branch::Stokes).unwrap();
        let anti = s.coefficient(d, Branch::AntiStokes).unwrap();
        let expected = (-6.626_070_15e-34 * d * 1e9 / (1.380_649e-23 * t)).exp();
        prop_assert!((anti - stokes * expected).abs() <= 1e-12 * stokes.max(f64::MIN_POSITIVE));
        prop_assert!(rel_err(detailed_balance_factor(d, t), expected) < 1e-12);
    }

    #[test]
    fn interpolation_is_exact_on_rows(idx in 0usize..39) {
        let s = RamanSpectrum::bundled(293.0).unwrap();
        let i = idx.min(s.detunings_ghz().len() - 1);
        let d = s.detunings_ghz()[i];
        prop_assert_eq!(s.coefficient(d, Branch::Stokes).unwrap(), s.stokes_coefficients()[i]);
    }

    #[test]
    fn interpolation_stays_between_neighbours(x in 0.0f64..40_000.0) {
        let s = RamanSpectrum::bundled(293.0).unwrap();
        let xs = s.detunings_ghz();
        let ys = s.stokes_coefficients();
        let i = xs.partition_point(|&d| d < x).clamp(1, xs.len() - 1);
        let y = s.coefficient(x, Branch::Stokes).unwrap();
        let (lo, hi) = (ys[i - 1].min(ys[i]), ys[i - 1].max(ys[i]));
        prop_assert!(y >= lo - 1e-30 && y <= hi + 1e-30);
    }

    #[test]
    fn adding_a_stage_never_raises_transmission(
        offset_ghz in -2000.0f64..2000.0,
        bw in 10.0f64..1000.0,
        il in 0.0f64..3.0,
        iso in 0.0f64..80.0,
        gaussian in any::<bool>(),
    ) {
        let f = 193.70 + offset_ghz / 1e3;
        let base = FilterChain::table1().rx;
        let extra = if gaussian {
            FilterStage::gaussian(193.70, bw, il, iso)
        } else {
            FilterStage::flat_top(193.70, bw, il, iso)
        };
        let mut longer = base.clone();
        longer.push(extra);
        prop_assert!(cascade_transmission(&longer, f) <= cascade_transmission(&base, f));
    }

    #[test]
    fn gaussian_rolloff_is_monotone_in_offset(a in 0.0f64..1000.0, b in 0.0f64..1000.0) {
        let s = FilterStage::gaussian(193.70, 200.0, 0.5, 60.0);
        let (near, far) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(s.transmission_db(193.70 + far / 1e3) <= s.transmission_db(193.70 + near / 1e3));
    }

    #[test]
    fn qber_non_decreasing_in_noise(
        signal in 1.0f64..1e7,
        n1 in 0.0f64..1e6,
        dn in 0.0f64..1e6,
        dark in 0.0f64..1e5,
        e in 0.0f64..0.2,
    ) {
        let q1 = qber(signal, n1, dark, e).unwrap();
        let q2 = qber(signal, n1 + dn, dark, e).unwrap();
        prop_assert!(q2 >= q1 - 1e-15);
    }

    #[test]
    fn skr_non_increasing_in_qber(q1 in 0.0f64..0.06, dq in 0.0f64..0.06, rate in 1.0f64..1e7) {
        let p = CowParams::default();
        let a = secret_key_rate(q1, rate, 0.0, 0.0, &p);
        let b = secret_key_rate(q1 + dq, rate, 0.0, 0.0, &p);
        prop_assert!(b <= a);
    }

    #[test]
    fn photon_rate_is_linear(p in 0.0f64..1e-3, c in 0.0f64..1e3) {
        let det = DetectorSpec::default();
        let a = photon_rate(p, 193.7, &det).unwrap();
        let b = photon_rate(p * c, 193.7, &det).unwrap();
        prop_assert!(rel_err(b.per_second, c * a.per_second) < 1e-12);
        prop_assert!(rel_err(a.per_second, a.per_gate * det.gate_rate_hz) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cutoff_has_no_exceptions(
        signal in 0.0f64..1e7,
        noise in 0.0f64..1e7,
        dark in 0.0f64..1e6,
        e in 0.0f64..0.5,
    ) {
        prop_assume!(signal + noise + dark > 0.0);
        let p = CowParams::default();
        let q = qber(signal, noise, dark, e).unwrap();
        let r = secret_key_rate(q, signal, noise, dark, &p);
        if q >= 0.052 {
            prop_assert_eq!(r, 0.0);
        }
        prop_assert!(r >= 0.0);
    }
}
