use neurocollide::robot::desk_arm;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn main() {
    let arm = desk_arm();
    let singles: Vec<_> = arm
        .collision_mask()
        .iter()
        .map(|&p| (p, arm.with_collision_mask(vec![p]).unwrap()))
        .collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let n = 20000;
    let qs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..6).map(|_| rng.random_range(-PI..PI)).collect())
        .collect();
    let t = std::time::Instant::now();
    let hits = qs.iter().filter(|q| arm.self_collision(q).unwrap()).count();
    let el = t.elapsed();
    println!("rate {:.3}  per-query {:?}", hits as f64 / n as f64, el / n as u32);
    for (p, m) in &singles {
        let h = qs.iter().take(5000).filter(|q| m.self_collision(q).unwrap()).count();
        println!("pair {p:?}: {:.3}", h as f64 / 5000.0);
    }
}
