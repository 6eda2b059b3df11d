//! Regenerates the bundled 5000 x 30 datasets in `data/`:
//!
//! `cargo run --example make_synthetic -- crates/core/data`
//!
//! 1% of the rows (50) have one missing cell each.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 5000;
const D: usize = 30;
const INCOMPLETE_ROWS: usize = 50;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(20240);
    let w: Vec<f64> = (0..D).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x: Vec<Vec<f64>> = (0..N).map(|_| (0..D).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let score: Vec<f64> = x.iter().map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
    let y_reg: Vec<f64> = score.iter().map(|s| s + 0.1 * rng.gen_range(-1.0..1.0)).collect();
    let y_cls: Vec<f64> = score.iter().map(|s| if s + 0.3 * rng.gen_range(-1.0..1.0) >= 0.0 { 1.0 } else { -1.0 }).collect();

    let rows = sample(&mut rng, N, INCOMPLETE_ROWS).into_vec();
    let mut missing = vec![None; N];
    for i in rows {
        missing[i] = Some(rng.gen_range(0..D));
    }

    for (name, labels) in [("synthetic_regression.csv", &y_reg), ("synthetic_classification.csv", &y_cls)] {
        let mut out = BufWriter::new(File::create(dir.join(name))?);
        let header: Vec<String> = (0..D).map(|j| format!("x{j}")).chain(["y".to_string()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..N {
            let mut fields: Vec<String> =
                (0..D).map(|j| if missing[i] == Some(j) { String::new() } else { format!("{:.6}", x[i][j]) }).collect();
            fields.push(format!("{}", labels[i]));
            writeln!(out, "{}", fields.join(","))?;
        }
    }
    Ok(())
}
