//! Coverage of 95% Wald intervals for a single probability, by simulation.
//!
//! Maximum likelihood intervals collapse to a point whenever every trial
//! fails or every trial succeeds, so for small probabilities they miss far
//! more often than 5%. Penalized estimates always give a proper interval.
//!
//! ```text
//! cargo run --release --example wald_coverage [reps]
//! ```

use jeffreys_glm::design::Dataset;
use jeffreys_glm::infer::wald;
use jeffreys_glm::link::LinkFamily;
use jeffreys_glm::mle::{fit_ml, FitConfig};
use jeffreys_glm::mpl::fit_mpl;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn covers(y: f64, m: f64, a: f64, truth: f64) -> bool {
    let data = Dataset::new(vec![y], vec![m], DMatrix::from_element(1, 1, 1.0), vec!["b".into()])
        .expect("valid counts");
    let config = FitConfig::default();
    let fit = if a == 0.0 {
        fit_ml(&data, LinkFamily::Logit, &config, None)
    } else {
        fit_mpl(&data, LinkFamily::Logit, a, &config, None)
    };
    match fit.ok().and_then(|f| wald(&f, 0.95).ok()) {
        Some(w) => w.lower[0] <= truth && truth <= w.upper[0],
        // no finite estimate, no interval
        None => false,
    }
}

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let mut rng = StdRng::seed_from_u64(17);
    let m = 20.0;
    println!("m = {m}, {reps} replications, coverage of the logit of pi");
    println!("{:>6} {:>8} {:>8} {:>8}", "pi", "ML", "a=1/2", "a=1");
    for pi in [0.02f64, 0.05, 0.1, 0.3, 0.5] {
        let truth = (pi / (1.0 - pi)).ln();
        let mut hits = [0usize; 3];
        for _ in 0..reps {
            let y = (0..m as u32).filter(|_| rng.random::<f64>() < pi).count() as f64;
            for (k, a) in [0.0, 0.5, 1.0].into_iter().enumerate() {
                hits[k] += covers(y, m, a, truth) as usize;
            }
        }
        let c = hits.map(|h| h as f64 / reps as f64);
        println!("{pi:>6} {:>8.3} {:>8.3} {:>8.3}", c[0], c[1], c[2]);
    }
}
