//! Finite-difference verification of the analytic angle gradient, and a
//! look at the full loss gradient the optimizer actually consumes.
//!
//! Run with `cargo run --example gradient_check`.

use mkiou::{ga_grad_theta, ga_loss, numeric_grad, reg_loss, LossConfig, OrientedBox, Result};

fn main() -> Result<()> {
    let cfg = LossConfig::default();
    let target = OrientedBox::new(0.0, 0.0, 2.0, 1.0, 0.2)?;

    println!("angle-loss gradient, analytic vs central differences:");
    println!(
        "{:>8} {:>14} {:>14} {:>10}",
        "dtheta", "analytic", "numeric", "rel err"
    );
    for k in 0..9 {
        let dt = -0.8 + 0.2 * k as f64;
        let pred = OrientedBox::new(0.0, 0.0, 2.0, 1.0, target.theta + dt)?;
        let analytic = ga_grad_theta(&pred, &target, &cfg)?;
        let g = numeric_grad(|b| ga_loss(b, &target, &cfg), &pred, 1e-6)?;
        let numeric = g[4];
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4);
        println!("{dt:>8.2} {analytic:>14.8} {numeric:>14.8} {rel:>10.2e}");
    }

    println!("\nfull loss gradient at a perturbed state (cx, cy, w, h, theta):");
    let pred = OrientedBox::new(0.4, -0.3, 2.6, 0.8, 0.45)?;
    let g = numeric_grad(|b| Ok(reg_loss(b, &target, &cfg)?.total), &pred, 1e-6)?;
    println!(
        "  [{:+.5}, {:+.5}, {:+.5}, {:+.5}, {:+.5}]",
        g[0], g[1], g[2], g[3], g[4]
    );
    println!("  every component pushes the box toward the target.");
    Ok(())
}
