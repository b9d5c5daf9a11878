//! Scores predictions against gold intensities the way the shared task does:
//! Pearson and Spearman over all examples and over the gold >= 0.5 subset.

use intensity_attn::evaluation::score;
use intensity_attn::metrics::{average_ranks, pearson, spearman};

pub fn run_example() -> intensity_attn::Result<()> {
    let gold = [0.12, 0.35, 0.35, 0.52, 0.61, 0.78, 0.90];
    let pred = [0.20, 0.30, 0.41, 0.48, 0.70, 0.66, 1.30];

    println!("pearson  = {:.4}", pearson(&pred, &gold)?);
    println!("spearman = {:.4}", spearman(&pred, &gold)?);
    println!("gold ranks (ties averaged) = {:?}", average_ranks(&gold));
    // `score` clips predictions to [0, 1] first.
    print!("{}", score(&pred, &gold)?.to_kv());

    let few = score(&[0.1, 0.2, 0.9], &[0.2, 0.3, 0.7])?;
    println!("one gold >= 0.5: pearson_ge05 = {:?}", few.pearson_ge05);
    Ok(())
}

fn main() -> intensity_attn::Result<()> {
    run_example()
}
