//! Coarse text rendering of the two loss surfaces over aspect ratio and
//! angle deviation.
//!
//! The angle loss is gated by target aspect ratio: strong near square,
//! numerically dead by 4:1 where the overlap term alone carries the angle.
//! The modulated-overlap loss behaves the opposite way, flat for squares
//! and strongly angle-dependent when elongated. Together they cover the
//! whole aspect range, which is the argument for combining them.
//!
//! Run with `cargo run --example loss_surface`.

use mkiou::{surface, LossConfig, Result, SurfaceLoss};

fn render(loss: SurfaceLoss) -> Result<()> {
    let cfg = LossConfig::default();
    let table = surface(loss, (1.0, 8.0), (0.0, std::f64::consts::PI), (8, 13), &cfg)?;

    println!("{loss} loss (rows: aspect ratio, columns: angle deviation in degrees)");
    print!("{:>6}", "ar\\dt");
    for j in 0..13 {
        print!(" {:>6.0}", table.cell(0, j).dtheta_deg);
    }
    println!();
    for i in 0..8 {
        print!("{:>6.2}", table.cell(i, 0).aspect_ratio);
        for j in 0..13 {
            print!(" {:>6.3}", table.cell(i, j).loss);
        }
        println!();
    }
    println!();
    Ok(())
}

fn main() -> Result<()> {
    render(SurfaceLoss::Ga)?;
    render(SurfaceLoss::Mk)?;
    Ok(())
}
