//! Regression values for the reference sweep (omega0 = omega = 0.01,
//! t = 100, 60 log-spaced sigmas on [1e-3, 1e2]).

use qwork_core::duality::{default_sigma_grid, min_uncertainty_scan};
use qwork_core::*;
use std::f64::consts::PI;

const THETAS: [f64; 3] = [PI / 16.0, PI / 8.0, PI / 4.0];
const MAX_V_W: [f64; 3] = [0.375905400722, 0.694582611769, 0.982288149752];
const MAX_SUM: [f64; 3] = [1.299784933235, 1.401689392959, 1.163281100515];

#[test]
fn reference_sweep_extrema() {
    let cf = TwoLevelClosedForm::new(DrivenTwoLevel::reference(), 100.0, 1e-10).unwrap();
    let table = min_uncertainty_scan(&cf, &THETAS, &default_sigma_grid(), 1e-10).unwrap();
    assert_eq!(table.rows.len(), 180);
    for (k, theta) in THETAS.into_iter().enumerate() {
        let rows: Vec<&ScanRow> = table.rows.iter().filter(|r| r.theta == theta).collect();
        let max_v = rows.iter().map(|r| r.v_w).fold(0.0, f64::max);
        let max_sum = rows.iter().map(|r| r.dw_plus_vw()).fold(0.0, f64::max);
        assert!((max_v - MAX_V_W[k]).abs() < 1e-8, "theta {theta}: {max_v:.12}");
        assert!((max_sum - MAX_SUM[k]).abs() < 1e-8, "theta {theta}: {max_sum:.12}");
        assert!(((2.0 * theta).sin() - max_v) / (2.0 * theta).sin() < 0.02);
    }
    assert_eq!(table.best().theta, PI / 8.0);
    assert!(table.best().dw_plus_vw() >= 2f64.sqrt() - 0.02);
    assert!(table.rows.iter().all(|r| r.bound_residual >= -1e-9));
}
