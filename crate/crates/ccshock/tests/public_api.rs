use ccshock::admissibility::{is_eta_entropic, is_kruzhkov_entropic, is_oleinik};
use ccshock::curves::{companion, phi_flat0, phi_tangent};
use ccshock::reference::godunov::{godunov_run, GridParams, SliceStore};
use ccshock::reference::nonclassical::{nonclassical_demo, NonclassicalConfig};
use ccshock::roots::CurveSolverConfig;
use ccshock::{EntropyModel, Error, FluxModel, KruzhkovEntropy, Models};

fn cubic() -> FluxModel {
    FluxModel::cubic(2.0).unwrap()
}

#[test]
fn cubic_curves_match_closed_forms() {
    let f = cubic();
    let cfg = CurveSolverConfig::default();
    for i in 1..=40 {
        let u = 0.05 * i as f64;
        assert!((phi_tangent(&f, u, &cfg).unwrap() + u / 2.0).abs() < 1e-12);
        let flat = phi_flat0(&EntropyModel::Quadratic, &f, u, &cfg).unwrap();
        assert!((flat + u).abs() < 1e-9, "{u}: {flat}");
        let k = -0.4 * u;
        if let Ok(c) = companion(&f, k, u, &cfg) {
            assert!((c + u + k).abs() < 1e-12);
        }
    }
    let e = phi_flat0(&EntropyModel::Exponential, &f, 1.0, &cfg).unwrap();
    assert!((e + 1.047684).abs() < 5e-7, "{e}");
}

#[test]
fn states_outside_the_interval_are_rejected() {
    let f = cubic();
    assert!(matches!(f.check(2.5), Err(Error::Domain { .. })));
    assert!(matches!(is_oleinik(&f, 3.0, 0.0), Err(Error::Domain { .. })));
}

#[test]
fn kruzhkov_closed_form_agrees_with_the_sign_of_the_dissipation() {
    let f = cubic();
    let cfg = CurveSolverConfig::default();
    for i in 1..20 {
        for j in 0..20 {
            let (um, up, k) = (0.1 * i as f64, -2.0 + 0.1 * j as f64, -0.3);
            if up >= um {
                continue;
            }
            let closed = is_kruzhkov_entropic(&f, um, up, k, &cfg).unwrap();
            let direct = is_eta_entropic(&KruzhkovEntropy { k }, &f, um, up).unwrap();
            assert_eq!(closed, direct, "({um}, {up}, {k})");
        }
    }
}

#[test]
fn godunov_moves_a_shock_at_the_chord_speed() {
    let m = Models::new(cubic(), EntropyModel::Quadratic);
    let grid = GridParams { x_min: -1.0, x_max: 2.0, dx: 2e-3, cfl: 0.9 };
    let u0 = grid.averages_of_fn(|x| if x < 0.0 { 1.0 } else { 0.0 });
    let sol = godunov_run(&m, &grid, u0, 0.5, SliceStore::Ends, &[]).unwrap();
    let (t, cells) = sol.slice_at(0.5);
    // mass to the right of the origin equals sigma t for a unit jump
    let mass: f64 = cells.iter().enumerate().filter(|(i, _)| grid.x_min + (*i as f64 + 0.5) * grid.dx > 0.0).map(|(_, u)| u * grid.dx).sum();
    assert!((mass - t * m.sigma(1.0, 0.0)).abs() < 2e-3, "{mass}");
}

#[test]
fn exponential_entropy_admits_a_nonclassical_family() {
    let m = Models::new(cubic(), EntropyModel::Exponential);
    let cfg = NonclassicalConfig { dx: 4e-3, ..NonclassicalConfig::default() };
    let report = nonclassical_demo(&m, 1.0, 0.02, &cfg).unwrap();
    assert!(report.admissible().count() >= 2);
    assert!(report.best().unwrap().margin > 0.1);
    let q = Models::new(cubic(), EntropyModel::Quadratic);
    assert!(matches!(nonclassical_demo(&q, 1.0, 0.02, &cfg), Err(Error::Construction(_))));
}
