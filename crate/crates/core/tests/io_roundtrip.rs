use powerperm::io::{
    format_f64, format_results, format_spectrum, parse_results, parse_spectrum, RESULTS_HEADER,
};
use powerperm::{ComplexPermittivity, PowerSpectrum, Provenance, ReconstructionResult};
use proptest::prelude::*;

proptest! {
    #[test]
    fn decimal_form_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn spectrum_text_is_stable_after_one_cycle(
        samples in proptest::collection::vec((1.0..1e6f64, -60.0..20.0f64), 1..60),
    ) {
        let mut f = 1e6;
        let mut freqs = Vec::new();
        let mut powers = Vec::new();
        for (step, dbm) in samples {
            f += step;
            freqs.push(f);
            powers.push(powerperm::dbm_to_watts(dbm));
        }
        let s = PowerSpectrum::new(freqs, powers, Provenance::Measured).unwrap();
        let text = format_spectrum(&s);
        let back = parse_spectrum(&text, Provenance::Measured).unwrap();
        prop_assert_eq!(back.frequencies(), s.frequencies());
        for (a, b) in back.powers().iter().zip(s.powers()) {
            prop_assert!(((a - b) / b).abs() < 1e-14);
        }
        let again = parse_spectrum(&format_spectrum(&back), Provenance::Measured).unwrap();
        prop_assert_eq!(again, back);
    }

    #[test]
    fn results_round_trip_exactly(
        rows in proptest::collection::vec((1e6..1e10f64, 1.0..90.0f64, 0.0..50.0f64, 0.0..1e-3f64, 0usize..5000, any::<bool>(), 0.0..100.0f64), 0..20),
    ) {
        let results: Vec<ReconstructionResult> = rows
            .iter()
            .map(|&(c, re, im, f, it, conv, sp)| ReconstructionResult {
                center_frequency: c,
                eps: ComplexPermittivity::new(re, im).unwrap(),
                final_objective: f,
                iterations: it,
                converged: conv,
                multistart_spread: sp,
                grid_objective: f,
            })
            .collect();
        let text = format_results(&results);
        prop_assert!(text.starts_with(RESULTS_HEADER));
        let parsed = parse_results(&text).unwrap();
        prop_assert_eq!(parsed.len(), results.len());
        for (p, r) in parsed.iter().zip(&results) {
            prop_assert_eq!(p.center_frequency, r.center_frequency);
            prop_assert_eq!(p.eps_real, r.eps.eps_real());
            prop_assert_eq!(p.eps_imag, r.eps.eps_imag());
            prop_assert_eq!(p.final_objective, r.final_objective);
            prop_assert_eq!(p.iterations, r.iterations);
            prop_assert_eq!(p.converged, r.converged);
            prop_assert_eq!(p.multistart_spread, r.multistart_spread);
        }
    }
}
