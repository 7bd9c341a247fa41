// Plug-in relative information for a single study: 800 of 1000 values
// observed, 440 successes, tested against p0 = 0.5.

use relinfo::{equivalent_additional_individuals, plugin_summary, Settings, StudyConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = StudyConfig::new(1000, 800, 440, 0.5)?;
    let s = plugin_summary(&cfg, cfg.missing(), &Settings::default())?;

    println!("observed lod (ln)      {:.4}", s.lod_ob.value);
    println!("E[RI^-1]               {:.4}", s.expected_inverse_ri);
    println!("sd[RI^-1]              {:.4}", s.sd_inverse_ri);
    println!("plug-in RI1            {:.4}", s.plugin_ri1);

    let extra = equivalent_additional_individuals(s.plugin_ri1, cfg.n)?;
    println!("worth {extra:.0} more fully observed individuals");

    assert!((s.plugin_ri1 - 0.8).abs() < 1e-12);
    assert!((extra - 250.0).abs() < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
