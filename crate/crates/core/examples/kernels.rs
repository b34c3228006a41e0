//! Evaluates the biquadratic spline correlation and its derivatives, and
//! prints the block of correlations between two sites.

use sgek::kernels::{corr_1d, corr_1d_d1, corr_1d_d2, corr_nd, corr_nd_d1, corr_nd_d2};
use sgek::KernelParams;

fn main() -> sgek::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12}", "d", "R", "dR/dx", "d2R/dxdxh");
    for i in 0..=12 {
        let d = i as f64 / 10.0;
        println!(
            "{d:>6.2} {:>12.6} {:>12.6} {:>12.6}",
            corr_1d(d, 1.0)?,
            corr_1d_d1(d, 1.0)?,
            corr_1d_d2(d, 1.0)?
        );
    }

    let params = KernelParams::new(vec![0.8, 1.5])?;
    let (x, xh) = ([0.2, 0.4], [0.5, 0.3]);
    println!("\nR(x, xh) = {:.6}", corr_nd(&x, &xh, &params)?);
    for k in 0..2 {
        let row: Vec<String> = (0..2)
            .map(|l| format!("{:>10.4}", corr_nd_d2(&x, &xh, &params, k, l).unwrap()))
            .collect();
        println!(
            "dR/dx_{} = {:>8.4}   d2R/dx_{} dxh_l = {}",
            k + 1,
            corr_nd_d1(&x, &xh, &params, k)?,
            k + 1,
            row.join("")
        );
    }
    Ok(())
}
