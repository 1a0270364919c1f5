use kerr_qnd::signal_loss::{
    input_loss, is_sub_poissonian, normalized_input_loss_error, prepared_state,
};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn sub_sql_boundary_at_half() {
    // ΔN²_meas → 0 leaves only the loss term (1−μ)/μ
    for (mu, below) in [(0.5 + 1e-6, true), (0.5 - 1e-6, false)] {
        let e = normalized_input_loss_error(1e3, 0.0, mu).unwrap();
        assert_eq!(e < 1.0, below, "mu {mu}: {e}");
    }
}

proptest! {
    #[test]
    fn thinning_composes(n in 0.0..1e6f64, v in 0.0..1e6f64, m1 in 0.01..1.0f64, m2 in 0.01..1.0f64) {
        let (n1, v1) = input_loss(n, v, m1).unwrap();
        let (n12, v12) = input_loss(n1, v1, m2).unwrap();
        let (n_direct, v_direct) = input_loss(n, v, m1 * m2).unwrap();
        prop_assert!(close(n12, n_direct));
        prop_assert!(close(v12, v_direct));
    }

    #[test]
    fn sub_poissonian_survives_loss(n_s in 1e-3..1e6f64, frac in 0.0..0.999f64, mu in 0.001..1.0f64) {
        let (n, v) = prepared_state(n_s, frac * n_s, mu).unwrap();
        prop_assert!(is_sub_poissonian(n, v).unwrap());
    }

    #[test]
    fn poissonian_input_stays_poissonian(n in 1e-3..1e6f64, mu in 0.01..1.0f64) {
        let (m, v) = input_loss(n, n, mu).unwrap();
        prop_assert!((m - v).abs() <= 1e-12 * m);
    }
}
