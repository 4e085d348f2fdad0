//! Prints a latency table for the geometric check and an MLP9-shaped
//! network on uniform desk-arm configurations.

use neurocollide::encoding::EncodingLevel;
use neurocollide::eval::{bench_latency, uniform_queries, BenchConfig, LatencyMethod};
use neurocollide::nn::Model;
use neurocollide::robot::desk_arm;

fn main() {
    let arm = desk_arm();
    let model = Model::untrained("MLP9", EncodingLevel::new(9).unwrap(), 6, 0).unwrap();
    let queries = uniform_queries(6, 10_000, 0);
    let methods = [
        LatencyMethod::Oracle(&arm),
        LatencyMethod::Network {
            name: "MLP9".into(),
            model: &model,
        },
    ];
    let report = bench_latency(&methods, queries.view(), &BenchConfig::default()).unwrap();
    print!("{}", report.to_csv());
}
