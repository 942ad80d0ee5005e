//! Link functions: distribution function, density, working weight and the
//! point `z0` where the probability-scale weight peaks.
//!
//! ```text
//! cargo run --example links
//! ```

use jeffreys_glm::link::{find_z0, LinkFamily};

fn main() {
    println!("{:>8} {:>6} {:>12} {:>12} {:>12}", "link", "eta", "G", "g", "omega");
    for link in LinkFamily::ALL {
        for eta in [-30.0, -3.0, 0.0, 3.0, 30.0] {
            let e = link.evaluate(eta);
            println!("{:>8} {eta:>6} {:>12.4e} {:>12.4e} {:>12.4e}", link.name(), e.pi, e.g, e.omega);
        }
    }

    // symmetric links peak at one half, the others do not
    println!();
    for link in LinkFamily::ALL {
        let z0 = find_z0(link);
        println!("{:>8}  z0 = {z0:.10}  omega_bar(z0) = {:.6}", link.name(), link.omega_bar(z0).unwrap());
    }
}
