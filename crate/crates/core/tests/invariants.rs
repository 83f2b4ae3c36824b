use proptest::prelude::*;
use risnoma::analytics::{coverage_connected, coverage_typical};
use risnoma::simulator::{oma_threshold, run_trial, Scenario};
use risnoma::{SystemParams, Thresholds};

fn params(p_dbm: f64, l: f64) -> SystemParams {
    SystemParams::paper_defaults().with_p_b_dbm(p_dbm).with_half_length(l)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trial_outcomes_are_consistent(
        p_dbm in -10.0..20.0f64,
        l in 0.5..5.0f64,
        gamma in 1e-3..1.0f64,
        index in 0u64..1_000_000,
        seed in any::<u64>(),
    ) {
        let p = params(p_dbm, l);
        let th = Thresholds::uniform(gamma);
        let cap = (1.0 + p.power.a_c / p.power.a_t).log2();
        for sc in Scenario::ALL {
            let o = run_trial(&p, &th, sc, index, seed).unwrap();
            prop_assert!(o.gamma_t >= 0.0 && o.gamma_c >= 0.0);
            prop_assert!(o.rate_t >= 0.0 && o.rate_c >= 0.0);
            match sc {
                Scenario::RisOma => {
                    prop_assert_eq!(o.covered_t, o.gamma_t > oma_threshold(gamma));
                    prop_assert!((o.rate_t - 0.5 * o.gamma_t.ln_1p() / std::f64::consts::LN_2).abs() < 1e-12);
                }
                _ => {
                    if o.covered_t {
                        prop_assert!(o.gamma_sic > gamma && o.gamma_t > gamma);
                    }
                    if o.gamma_sic <= gamma {
                        prop_assert_eq!(o.rate_t, 0.0);
                    }
                    prop_assert!(o.rate_c <= cap + 1e-12);
                }
            }
            // same trial again
            prop_assert_eq!(o, run_trial(&p, &th, sc, index, seed).unwrap());
        }
    }

    #[test]
    fn coverage_falls_with_threshold_per_trial(
        g1 in 1e-3..0.5f64,
        dg in 1e-3..0.5f64,
        index in 0u64..1_000_000,
    ) {
        let p = params(10.0, 1.5);
        for sc in Scenario::ALL {
            let lo = run_trial(&p, &Thresholds::uniform(g1), sc, index, 11).unwrap();
            let hi = run_trial(&p, &Thresholds::uniform(g1 + dg), sc, index, 11).unwrap();
            prop_assert!(!hi.covered_t || lo.covered_t);
            prop_assert!(!hi.covered_c || lo.covered_c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn analytic_coverage_is_a_monotone_probability(
        p_dbm in 0.0..15.0f64,
        g1 in 1e-3..0.2f64,
        dg in 1e-3..0.2f64,
    ) {
        let p = params(p_dbm, 1.5);
        let lo = coverage_typical(&p, &Thresholds::uniform(g1)).unwrap().value;
        let hi = coverage_typical(&p, &Thresholds::uniform(g1 + dg)).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi <= lo + 1e-9);
        let c_lo = coverage_connected(&p, &Thresholds::uniform(g1)).unwrap().value;
        let c_hi = coverage_connected(&p, &Thresholds::uniform(g1 + dg)).unwrap().value;
        prop_assert!(c_hi <= c_lo + 1e-9);
    }
}
