//! Score a dataset with every measure and print each AU-ARC.
//!
//! Expects a CSV with a `class` column, e.g. one produced by
//! `reliaq gen-data`:
//!
//! ```sh
//! cargo run -p reliaq-core --example score_dataset -- data/tic-tac-toe.csv
//! ```

use reliaq_core::data::{load_dataset, PrepDescriptor, SplitSpec};
use reliaq_core::measure::{score_dataset, Measure};
use reliaq_core::model::{tune_smoothing, NbcModel};
use reliaq_core::uncertainty::Ensemble;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/tic-tac-toe.csv".to_string());
    let descriptor = PrepDescriptor::parse("class_column = class")?;
    let data = load_dataset(&path, &descriptor)?;
    let (train, test) = data.split(&SplitSpec::new(42))?;
    let grid = [0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    let alpha = tune_smoothing(&train, &grid, 5, 1)?;
    let model = NbcModel::fit(&train, alpha)?;
    let ensemble = Ensemble::fit(&train, 10, alpha, 2)?;
    let scores = score_dataset(&model, Some(&ensemble), &test, &Measure::ALL)?;
    println!("{path}: {} train, {} test, alpha {alpha}", train.len(), test.len());
    for measure in Measure::ALL {
        let ordering = scores.ordering(measure)?;
        let curve = reliaq_core::evaluation::arc(&ordering, scores.correct())?;
        println!("{measure:>7}: AU-ARC {:.4}", curve.au_arc());
    }
    Ok(())
}
