// Spreading a follow-up budget over several variables with per-unit and
// setup costs, exact versus greedy.

use relinfo::{
    brute_force_allocation, optimize_allocation, DesignProblem, Mode, StudyConfig, VariableRecord,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vars = vec![
        VariableRecord::new("chr1", StudyConfig::new(240, 200, 128, 0.5)?)
            .with_costs(1.0, 6.0)
            .with_max_resolvable(20),
        VariableRecord::new("chr4", StudyConfig::new(150, 120, 75, 0.5)?)
            .with_costs(0.5, 2.0)
            .with_max_resolvable(20),
        VariableRecord::new("chr7", StudyConfig::new(90, 80, 52, 0.5)?)
            .with_costs(2.0, 0.0),
        VariableRecord::new("chr9", StudyConfig::new(100, 80, 40, 0.5)?),
    ];

    for budget in [5.0, 15.0, 30.0] {
        let exact = optimize_allocation(&DesignProblem::new(vars.clone(), budget, Mode::Exact))?;
        let greedy = optimize_allocation(&DesignProblem::new(vars.clone(), budget, Mode::Greedy))?;
        let brute = brute_force_allocation(&DesignProblem::new(vars.clone(), budget, Mode::Exact))?;
        println!(
            "budget {budget:>5}: exact {:.6} {:?}  greedy {:.6} {:?}",
            exact.objective, exact.allocations, greedy.objective, greedy.allocations
        );
        assert!((exact.objective - brute.objective).abs() <= 1e-12);
        assert!(greedy.objective <= exact.objective + 1e-12);
        assert!(exact.budget_used <= budget + 1e-9);
    }

    let sol = optimize_allocation(&DesignProblem::new(vars, 15.0, Mode::Exact))?;
    for x in &sol.excluded {
        println!("excluded {}: {}", x.id, x.reason);
    }
    println!("{:>6} {:>4} {:>10} {:>10} {:>8}", "id", "n1", "E[RI^-1]", "sd", "cost");
    for r in &sol.report {
        println!(
            "{:>6} {:>4} {:>10.5} {:>10.5} {:>8.2}",
            r.id, r.n1, r.expected_inverse_ri, r.sd_inverse_ri, r.cost
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
