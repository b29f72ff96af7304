//! Eigen dimension, centroid cosine distances and the transfer coefficient
//! between MNIST and Fashion-MNIST.
//!
//! ```text
//! cargo run --release --example transfer_metrics -- data/
//! ```

use std::path::PathBuf;

use nna::dataio::{load_dataset, DatasetKind};
use nna::transfer::{cosine_distance_matrix, eigen_dimension, self_cosine_distance_matrix, transfer_coefficient};

fn main() -> nna::Result<()> {
    let root = std::env::args_os()
        .nth(1)
        .or_else(|| std::env::var_os("NNA_DATA_DIR"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));

    let mnist = load_dataset(DatasetKind::Mnist, &root.join("mnist"))?.train;
    let fashion = load_dataset(DatasetKind::FashionMnist, &root.join("fashion-mnist"))?.train;

    let m = eigen_dimension(&mnist)?.value;
    let f = eigen_dimension(&fashion)?.value;
    println!("eigen dimension: mnist {m:.2}, fashion-mnist {f:.2}");

    let own = self_cosine_distance_matrix(&mnist)?;
    println!("mnist centroid cosine distance: min {:.4} max {:.4}", own.min, own.max);
    let cross = cosine_distance_matrix(&mnist, &fashion)?;
    println!("mnist vs fashion-mnist: min {:.4} max {:.4}", cross.min, cross.max);

    println!("D(mnist -> fashion-mnist) = {:.4}", transfer_coefficient(m, f)?);
    println!("D(fashion-mnist -> mnist) = {:.4}", transfer_coefficient(f, m)?);
    Ok(())
}
