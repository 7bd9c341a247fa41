// Standard deviation of the inverse relative information across observed
// counts, for a small and a large study, with the sampling density of x0.

use relinfo::{sd_curve, Settings};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let s = Settings::default();
    for n in [100u64, 1000] {
        let n0 = n * 4 / 5;
        let curve = sd_curve(n, n0, 0.5, &[0.55, 0.6, 0.7], &s)?;
        println!("n = {n}, n0 = {n0}");
        println!("{:>8} {:>12} {:>10} {:>10} {:>10}", "p_hat", "sd", "f(0.55)", "f(0.6)", "f(0.7)");
        for frac in [0.45, 0.51, 0.55, 0.6, 0.7, 0.8] {
            let x0 = (n0 as f64 * frac).round() as usize;
            let row = &curve.rows[x0];
            let sd = row.sd_inverse_ri.map_or("-".to_string(), |v| format!("{v:.4}"));
            let dens: Vec<String> =
                curve.density_curves.iter().map(|d| format!("{:>10.2e}", d.masses[x0])).collect();
            println!("{:>8.3} {:>12} {}", x0 as f64 / n0 as f64, sd, dens.join(" "));
        }
        for d in &curve.density_curves {
            assert!((d.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
