//! Draw a case-base sample from a small cohort and inspect the offset.

use cbnn::casebase::sample_case_base;
use cbnn::data::{SubjectRecord, SurvivalDataset};

fn main() -> cbnn::Result<()> {
    let records = vec![
        SubjectRecord::new(1.0, true, vec![0.2]),
        SubjectRecord::new(2.0, false, vec![1.1]),
        SubjectRecord::new(3.0, true, vec![-0.4]),
    ];
    let d = SurvivalDataset::new(vec!["x".into()], records)?;
    let sample = sample_case_base(&d, 100, 7)?;
    println!(
        "study base B = {}, cases c = {}, base moments b = {}, offset log(B/b) = {:.6}",
        sample.study_base, sample.case_size, sample.base_size, sample.offset
    );
    for m in sample.case_moments() {
        println!("case: subject {} at t = {}", m.subject, m.time);
    }
    let (lo, hi) = sample.time_range();
    println!("person-moments span [{lo:.3}, {hi:.3}]");
    sample.write_csv(std::io::stdout().lock())?;
    Ok(())
}
