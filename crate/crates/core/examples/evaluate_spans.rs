//! Scores predicted target spans against gold and builds stratified folds.
//!
//! cargo run --example evaluate_spans

use elixa::eval::{accuracy, make_folds, span_prf, SpanPrediction, Table};

fn main() -> elixa::Result<()> {
    let gold = [
        SpanPrediction::new("s1", [(4, 9), (26, 32)]),
        SpanPrediction::new("s2", [(0, 9)]),
        SpanPrediction::new("s3", []),
    ];
    let pred = [
        SpanPrediction::new("s1", [(4, 9)]),
        SpanPrediction::new("s2", [(0, 4)]),
        SpanPrediction::new("s3", [(10, 15)]),
    ];
    let prf = span_prf(&gold, &pred)?;
    print!("{}", Table::prf(&[("example".to_string(), prf)]));

    let labels = ["pos", "pos", "neg", "pos", "neu", "neg", "pos", "neg", "neu"];
    let predicted = ["pos", "neg", "neg", "pos", "pos", "neg", "pos", "neg", "neu"];
    println!("accuracy {:.4}", accuracy(&labels, &predicted)?);

    let plan = make_folds(labels.len(), 3, 7, Some(&labels[..]))?;
    for f in 0..3 {
        let test: Vec<&str> = plan.test_indices(f).iter().map(|&i| labels[i]).collect();
        println!("fold {}: {:?}", f + 1, test);
    }
    Ok(())
}
