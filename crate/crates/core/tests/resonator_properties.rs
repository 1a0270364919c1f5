use approx::assert_relative_eq;
use kerr_qnd::resonator::{gamma_factors, loading_check, LoadingVerdict, ResonatorSpec};
use proptest::prelude::*;

fn gx(spec: ResonatorSpec) -> f64 {
    gamma_factors(&spec).unwrap().0
}

#[test]
fn shipped_preset() {
    let spec = ResonatorSpec::caf2();
    assert!((gx(spec) / 0.85e-5 - 1.0).abs() < 0.01);
    assert_eq!(loading_check(&spec, 0.9).unwrap().verdict, LoadingVerdict::Pass);
}

#[test]
fn preset_file_loads_from_disk() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/caf2.toml");
    assert_eq!(ResonatorSpec::load(&path).unwrap(), ResonatorSpec::caf2());
    assert!(ResonatorSpec::load(std::path::Path::new("/nonexistent/caf2.toml")).is_err());
}

proptest! {
    #[test]
    fn scaling_laws(k in 0.1..10.0f64) {
        let base = ResonatorSpec::caf2();
        let g = gx(base);
        let tol = 1e-12;
        let cases = [
            (ResonatorSpec { q_load: k * base.q_load, ..base }, k),
            (ResonatorSpec { n2: k * base.n2, ..base }, k),
            (ResonatorSpec { v_eff: k * base.v_eff, ..base }, 1.0 / k),
            (ResonatorSpec { n0: k * base.n0, ..base }, 1.0 / k),
            (ResonatorSpec { lambda0: k * base.lambda0, ..base }, 1.0 / k),
        ];
        for (spec, want) in cases {
            let ratio = gx(spec) / g;
            prop_assert!((ratio - want).abs() <= tol * want, "{:?}: {} vs {}", spec, ratio, want);
        }
    }
}

#[test]
fn doubling_wavelength_halves_gamma() {
    let base = ResonatorSpec::caf2();
    let long = ResonatorSpec { lambda0: 2.0 * base.lambda0, ..base };
    assert_relative_eq!(gx(long), gx(base) / 2.0, max_relative = 1e-14);
}
