//! Two observations, two parameters: every possible outcome, its sample
//! proportions and the penalized fitted probabilities. Boundary outcomes
//! get pulled inside; every fit moves towards `(z0, z0)`.
//!
//! ```text
//! cargo run --example enumerate_saturated [link] [m]
//! ```

use jeffreys_glm::enumerate::enumerate_saturated;
use jeffreys_glm::link::LinkFamily;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let link: LinkFamily = args.next().as_deref().unwrap_or("logit").parse()?;
    let m: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);

    let table = enumerate_saturated(link, m, m, 0.5)?;
    println!("{link}, m = {m}, a = 1/2, z0 = {:.4}", table.z0);
    println!("{:>3} {:>3}  {:>13}  {:>15}  {:>9}", "y1", "y2", "sample", "penalized", "logdet");
    for r in &table.rows {
        println!(
            "{:>3} {:>3}  ({:.3}, {:.3})  ({:.4}, {:.4})  {:>9.4}",
            r.y1, r.y2, r.pi_ml[0], r.pi_ml[1], r.pi_mpl[0], r.pi_mpl[1], r.logdet_mpl
        );
    }
    Ok(())
}
