//! Load a CSV with custom column names, split it and summarise each part.

use cbnn::data::{read_dataset, split_dataset, ColumnSchema, SplitSpec};

const CSV: &str = "\
followup,died,age,dose
2.5,1,61,0.3
4.0,0,55,0.1
1.2,1,70,0.8
6.3,0,48,0.0
3.1,1,66,0.5
5.5,0,59,0.2
0.9,1,72,0.9
";

fn main() -> cbnn::Result<()> {
    let schema = ColumnSchema::new("followup", "died", ["age", "dose"]);
    let d = read_dataset(CSV.as_bytes(), &schema)?;
    println!(
        "{} subjects, {} events, total follow-up {}",
        d.len(),
        d.event_count(),
        d.total_follow_up()
    );
    let spec = SplitSpec {
        test_fraction: 0.3,
        validation_fraction: 0.2,
        seed: 3,
    };
    let split = split_dataset(&d, &spec)?;
    for (name, part) in [("train", &split.train), ("validation", &split.validation), ("test", &split.test)] {
        println!("{name}: {} subjects, {} events", part.len(), part.event_count());
    }
    Ok(())
}
