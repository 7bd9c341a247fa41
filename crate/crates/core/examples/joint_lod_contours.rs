// Joint distribution of observed and complete-data lods, binned for a
// contour plot, plus the empirical ratio summary.

use relinfo::{contour_grid, empirical_ratio_stats, simulate_joint_lod, SimConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig {
        n: 1000,
        n0: 800,
        true_p: 0.55,
        p0: 0.5,
        replicates: 20_000,
        seed: 2024,
    };
    let sample = simulate_joint_lod(&cfg)?;
    let grid = contour_grid(&sample, 30, 30, &[1.5])?;
    let stats = empirical_ratio_stats(&sample, 1e-3)?;

    println!("correlation {:.4}", sample.correlation().unwrap_or(f64::NAN));
    println!(
        "ratio lod_co/lod_ob over {} pairs: mean {:.3}, sd {:.3}, max {:.1}",
        stats.included, stats.mean, stats.sd, stats.max
    );
    for (level, q) in &stats.quantiles {
        println!("  q{level}: {q:.3}");
    }

    let (ix, iy) = grid.max_cell();
    let (xc, yc) = (grid.x_centers()[ix], grid.y_centers()[iy]);
    println!("densest cell at lod_ob {xc:.2}, lod_co {yc:.2}");
    for &r in &grid.reference_ratios {
        println!("  line y = {r} x within one cell: {}", grid.line_within_one_cell(r, ix, iy));
    }
    let mass: f64 = grid.normalized.iter().flatten().sum();
    assert!((mass - 1.0).abs() < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
