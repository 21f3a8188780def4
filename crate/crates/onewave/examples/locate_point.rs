//! Scheme I distance recovery from a single far-field pattern.
//!
//! A point target sits at (−2, 0). From each sampling center on a circle of
//! radius R = 8 we scan test-disk radii h and accept the first one whose
//! regularized indicator W̃ clears the threshold δ — that radius estimates
//! the distance from the center to the (farthest point of the) target. The
//! run repeats with multiplicative measurement noise to show the estimate
//! is stable.
//!
//! Run with: `cargo run --example locate_point`

use onewave::forward::{add_noise, point_far_field};
use onewave::imaging::{radius_threshold, ImagingConfig};

fn main() {
    let k = 6.0;
    let target = [-2.0, 0.0];
    let u = point_far_field(&[target], k, 512).expect("far field");

    let mut cfg = ImagingConfig::defaults(k, 8.0);
    cfg.n_centers = 8;
    cfg.truncation = 60;

    // With noisy data the Tikhonov parameter grows to keep the noise energy
    // out of the small-eigenvalue tail of the sum.
    let mut noisy_cfg = cfg.clone();
    noisy_cfg.alpha = 1e-11;
    let noisy = add_noise(&u, 0.01, 7).expect("noise model");

    println!("point target at ({}, {}), k = {k}", target[0], target[1]);
    println!(
        "sampling circle R = {}, radius grid M = {}, threshold delta = {}\n",
        8.0, cfg.n_radii, cfg.delta
    );

    println!("{:>20} {:>10} {:>12} {:>12}", "center", "true dist", "h (clean)", "h (1% noise)");
    for &z in &cfg.centers() {
        let true_dist = (z[0] - target[0]).hypot(z[1] - target[1]);
        let clean = radius_threshold(&u, z, &cfg).expect("clean scan");
        let polluted = radius_threshold(&noisy, z, &noisy_cfg).expect("noisy scan");
        println!(
            "({:8.3}, {:8.3}) {:>10.3} {:>12.3} {:>12.3}",
            z[0], z[1], true_dist, clean.h, polluted.h
        );
    }
    println!("\nClean crossings run a touch early (the indicator clears delta just");
    println!("before the disk truly covers the target); noise fills the small-h side");
    println!("of the scan with energy and pushes the crossing outward, so at the");
    println!("informative centers the two runs bracket the true distance. Centers");
    println!("much farther than N/k from the target are truncation-limited: the");
    println!("modes that would flag non-coverage at large h sit beyond the series");
    println!("cutoff, and both runs cap out around the same radius there.");
}
