//! Token-length and embedding-coverage statistics for a dataset.
//!
//! ```text
//! cargo run --example corpus_stats -- anger-train.tsv glove.twitter.27B.50d.txt
//! ```
//!
//! Without arguments a synthetic corpus is summarised instead.

use std::env;

use intensity_attn::data::{corpus_stats, parse_dataset, vocabulary, CorpusStats};
use intensity_attn::synthetic::{Signal, SyntheticTask};
use intensity_attn::EmbeddingStore;

pub fn run_example() -> intensity_attn::Result<CorpusStats> {
    let task = SyntheticTask::new(40, 5, 3);
    let tweets = task.tweets(200, Signal::Elongation, 4, "s");
    let stats = corpus_stats(&tweets, task.store())?;
    print!("{}", stats.to_table("synthetic"));
    Ok(stats)
}

fn main() -> intensity_attn::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let [dataset, embeddings] = args.as_slice() else {
        return run_example().map(|_| ());
    };
    let tweets = parse_dataset(dataset)?;
    // Only vectors for the corpus vocabulary are kept in memory.
    let store = EmbeddingStore::load_filtered(embeddings, None, &vocabulary(&tweets))?;
    let stats = corpus_stats(&tweets, &store)?;
    print!("{}", stats.to_table(dataset));
    print!("{}", stats.to_report());
    Ok(())
}
