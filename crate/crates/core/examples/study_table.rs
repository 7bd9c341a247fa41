// The CSV study table used by the binary: parse, estimate, write back.

use relinfo::cli::{cmd_estimate, Format, StudyTable, N1};
use relinfo::{LogBase, Settings};

const TABLE: &str = "\
id,n,n0,x0,p0,unit_cost,setup_cost,n1
rs1,1000,800,440,0.5,1,0,
rs2,600,450,270,,2,10,100
rs3,300,300,180,0.5,1,0,
flat,100,80,40,0.5,1,0,
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let table = StudyTable::parse(TABLE, Some(0.5))?;
    let settings = Settings::default().with_log_base(LogBase::Ten);
    let report = cmd_estimate(&table, N1::Full, &settings);
    print!("{}", report.render(Format::Csv));
    assert_eq!(report.hard_failures, 0);

    let round_trip = StudyTable::parse(&table.to_csv()?, None)?;
    assert_eq!(round_trip.records, table.records);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
