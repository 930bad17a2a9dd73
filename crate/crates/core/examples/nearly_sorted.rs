//! Prints nearly sorted integer lists, one per line, for `praml profile`.
//!
//! Usage: `cargo run -p praml-core --example nearly_sorted -- [count] [displacement] [seed]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use praml_core::profiler::nearly_sorted;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let count = args.first().copied().unwrap_or(200) as usize;
    let k = args.get(1).copied().unwrap_or(10) as usize;
    let seed = args.get(2).copied().unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    println!("# {count} lists with mean displacement about {k}, seed {seed}");
    for i in 0..count {
        let xs = nearly_sorted(20 + i % 81, k, &mut rng);
        let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
        println!("[{}]", items.join("; "));
    }
}
