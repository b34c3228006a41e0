//! Latin hypercube designs on the unit cube and on a physical box.

use sgek::sampling::lhs;
use sgek::DomainBox;

fn main() -> sgek::Result<()> {
    let unit = lhs(2, 8, 42)?;
    println!("unit-cube design:");
    for row in &unit {
        println!("  {:.4} {:.4}", row[0], row[1]);
    }

    // every one of the 8 strata per axis holds exactly one point
    let mut strata: Vec<usize> = unit.iter().map(|r| (r[0] * 8.0) as usize).collect();
    strata.sort_unstable();
    println!("x_1 strata: {strata:?}");

    let physical = DomainBox::new(vec![-2.0, -1.0], vec![2.0, 1.0])?;
    println!("\nsame design scaled to [-2, 2] x [-1, 1]:");
    for row in physical.lhs(8, 42)? {
        println!("  {:>7.4} {:>7.4}", row[0], row[1]);
    }
    Ok(())
}
