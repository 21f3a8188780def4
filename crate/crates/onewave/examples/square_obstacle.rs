//! Full pipeline on a corner domain: boundary-integral forward solve,
//! solution gates, and Scheme II imaging with and without noise.
//!
//! The obstacle is the sound-soft square with corners (±3, ±3) at k = 6.
//! Its scattered far field for one incident plane wave comes from the
//! Nyström solver, which grades the boundary parametrization into the
//! corners and gates every solve on the measured boundary residual. A
//! reciprocity spot-check (`u∞(x̂; d) = u∞(−d; −x̂)`) confirms the data is
//! physically consistent before any inversion is attempted.
//!
//! Run with: `cargo run --example square_obstacle`

use onewave::forward::{add_noise, Direction, NystromSolver, PolygonObstacle};
use onewave::imaging::{scheme_two, GridSpec, ImagingConfig, IndicatorField};
use std::f64::consts::TAU;

fn contrast(field: &IndicatorField, half: f64) -> f64 {
    let g = &field.grid;
    let (mut int_sum, mut int_n, mut ext_sum, mut ext_n) = (0.0, 0usize, 0.0, 0usize);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for iy in 0..g.n_y {
        for ix in 0..g.n_x {
            let v = field.values[g.index(ix, iy)];
            min = min.min(v);
            max = max.max(v);
            if g.x(ix).abs() <= half && g.y(iy).abs() <= half {
                int_sum += v;
                int_n += 1;
            } else {
                ext_sum += v;
                ext_n += 1;
            }
        }
    }
    (ext_sum / ext_n as f64 - int_sum / int_n as f64) / (max - min)
}

fn main() {
    let k = 6.0;
    let half = 3.0;
    let scene = PolygonObstacle {
        vertices: vec![[-half, -half], [half, -half], [half, half], [-half, half]],
    };

    let solver = NystromSolver::new(&scene, k).expect("solver setup");
    println!("square obstacle, k = {k}, {} boundary nodes", solver.node_count());

    let n_theta = 64;
    let sol = solver.far_field(Direction::new(0.0), n_theta).expect("forward solve");
    println!("boundary residual gate: {:.3e} (gate 1e-3)", sol.boundary_residual);

    // Reciprocity: compare u∞ at angle p for incidence q against u∞ at the
    // reversed pair, both on grid angles so no interpolation enters.
    for (p, q) in [(5_usize, 20_usize), (33, 2)] {
        let fwd = solver.far_field(Direction::new(TAU * q as f64 / n_theta as f64), n_theta).expect("solve");
        let rev = solver
            .far_field(Direction::new(TAU * (p + n_theta / 2) as f64 / n_theta as f64), n_theta)
            .expect("solve");
        let gap = (fwd.pattern.values()[p] - rev.pattern.values()[(q + n_theta / 2) % n_theta]).norm();
        println!("reciprocity gap at angle pair ({p:2}, {q:2}): {gap:.3e}");
    }

    // The inversion itself wants a dense angular sampling.
    let u = solver.far_field(Direction::new(0.0), 512).expect("forward solve").pattern;

    let mut cfg = ImagingConfig::defaults(k, 8.0);
    cfg.alpha = 1e-14;
    cfg.grid = GridSpec::square(8.0, 96);
    cfg.n_centers = 48;
    let clean = scheme_two(&u, &cfg).expect("clean field");
    println!("clean data:   orientation contrast {:.4}", contrast(&clean, half));

    let mut noisy_cfg = cfg.clone();
    noisy_cfg.alpha = 1e-11;
    let noisy_u = add_noise(&u, 0.03, 11).expect("noise model");
    let noisy = scheme_two(&noisy_u, &noisy_cfg).expect("noisy field");
    println!("3% noise:     orientation contrast {:.4}", contrast(&noisy, half));

    println!("\nPositive contrast means the square's interior is the low-valued");
    println!("region of the indicator field, as the one-wave dichotomy predicts.");
}
