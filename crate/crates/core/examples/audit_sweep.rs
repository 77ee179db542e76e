// Sweeping a log grid of moduli and angles and writing the report as CSV.

use qineq::cli::write_csv;
use qineq::verify::{audit_envelope, audit_random, AuditSummary, AuditTarget, FunctionTag, SweepPlan};
use qineq::QBase;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let plan = SweepPlan::log_spaced(1e-4, 1e4, 41, 8)?;
    let target = AuditTarget::Theta { q: QBase::new(0.3)?, alpha: 0.5 };
    let records = audit_envelope(&plan, &target)?;
    let s = AuditSummary::of(&records);
    println!("theta: {} records, {} pass, {} violations", s.total, s.passed, s.violations);

    let worst = records.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).unwrap();
    println!("largest ratio {:.4} at z = {}", worst.ratio, worst.z());

    let mut random = SweepPlan::log_spaced(1e-2, 1e2, 5, 4)?;
    random.parameter_draws = 10;
    random.seed = 2024;
    let records = audit_random(&random, FunctionTag::Phi)?;
    println!("random phi parameters: {:?}", AuditSummary::of(&records));

    let mut csv = Vec::new();
    write_csv(&records[..3], &mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
