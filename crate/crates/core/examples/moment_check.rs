// Closed-form moments of the inverse relative information against exact
// enumeration and a seeded simulation.

use relinfo::{
    conditional_simulate, exact_conditional_moments, expected_inverse_ri, variance_inverse_ri,
    Settings, StudyConfig,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let s = Settings::default();
    let cfg = StudyConfig::new(400, 320, 180, 0.5)?;
    let reps = 50_000;

    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "p", "closed E", "exact E", "sim E", "closed sd");
    for p in [0.53, 0.5625, 0.59] {
        let e = expected_inverse_ri(&cfg, p, cfg.missing(), &s)?;
        let v = variance_inverse_ri(&cfg, p, cfg.missing(), &s)?;
        let (exact_e, exact_v) = exact_conditional_moments(&cfg, p, &s)?;
        let draws = conditional_simulate(&cfg, p, reps, 42, &s)?;
        let sim_e = draws.iter().sum::<f64>() / reps as f64;
        println!("{p:>6} {e:>12.6} {exact_e:>12.6} {sim_e:>12.6} {:>12.6}", v.sqrt());

        assert!(e >= 1.0);
        assert!((e - exact_e).abs() < 1e-10);
        assert!((v - exact_v).abs() < 1e-10 * v.max(1.0));
        assert!((sim_e - e).abs() < 5.0 * v.sqrt() / (reps as f64).sqrt());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
