//! Fitting across the angle representation boundary.
//!
//! Canonical angles live in [-90, 90) degrees. A target hugging +90 with an
//! init just past it (equivalently, near -90) is the classic failure case
//! for losses built on raw angle differences: the shortest path crosses the
//! seam. Losses built on overlap geometry don't see the seam at all, and
//! the optimizer leaves angles unwrapped while it works, so the fit walks
//! straight across.
//!
//! Run with `cargo run --example boundary_fit`.

use mkiou::{fit, FitSpec, LossConfig, OrientedBox, Result};

fn main() -> Result<()> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let target = OrientedBox::new(0.0, 0.0, 4.0, 1.0, half_pi - 0.05)?;
    let init = OrientedBox::new(0.2, -0.1, 3.5, 1.2, half_pi + 0.25)?;
    println!(
        "target theta {:+.2} deg, init theta {:+.2} deg (past the +90 seam)",
        target.theta.to_degrees(),
        init.theta.to_degrees()
    );

    let spec = FitSpec::new(target, init, LossConfig::default());
    let trace = fit(&spec)?;
    for s in trace.steps.iter().step_by((trace.steps.len() / 10).max(1)) {
        println!(
            "  step {:>4}  theta {:+8.3} deg  iou {:.4}",
            s.step,
            s.state.theta.to_degrees(),
            s.skew_iou
        );
    }
    let last = trace.steps.last().expect("trace has steps");
    println!(
        "converged={} at step {}, theta {:+.3} deg, residual {:.3} deg",
        trace.converged,
        last.step,
        last.state.theta.to_degrees(),
        trace.final_angle_residual.to_degrees()
    );
    Ok(())
}
