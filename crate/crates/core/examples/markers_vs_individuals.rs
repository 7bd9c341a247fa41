// Resolving missing values in the current sample against enrolling new,
// equally incomplete individuals.

use relinfo::{compare_markers_vs_individuals, Settings, StudyConfig, VariableRecord};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rec = VariableRecord::new("rs42", StudyConfig::new(500, 350, 210, 0.5)?);
    let s = Settings::default();

    for (resolve, fresh) in [(150u64, 100u64), (150, 300), (75, 107)] {
        let c = compare_markers_vs_individuals(&rec, resolve, fresh, &s)?;
        println!(
            "resolve {resolve:>3} -> {:.4}   new {fresh:>3} -> {:.4}   break-even {:.1}   {:?}",
            c.resolve_factor, c.new_individuals_factor, c.break_even_n_new, c.preferred
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
