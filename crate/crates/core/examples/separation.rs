//! Separated data: the detector's verdict, maximum likelihood running off
//! to infinity, and the penalized estimates staying finite.
//!
//! ```text
//! cargo run --example separation
//! ```

use jeffreys_glm::design::load_csv_conventional;
use jeffreys_glm::link::LinkFamily;
use jeffreys_glm::mle::{fit_ml, FitConfig};
use jeffreys_glm::mpl::fit_mpl;
use jeffreys_glm::separation::detect_separation;
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let config = FitConfig::default();
    for file in ["separated.csv", "quasi.csv", "overlap.csv"] {
        let data = load_csv_conventional(dir.join(file), true)?;
        let report = detect_separation(&data)?;
        println!("{file}: {} (rows {:?})", report.status, report.separated_observations);
        if let Some(g) = &report.gamma {
            println!("  direction {g:.3?}");
        }
        let ml = fit_ml(&data, LinkFamily::Logit, &config, None)?;
        println!(
            "  ML: diverged {}, |beta| = {:.3e} after {} iterations",
            ml.diverged,
            ml.beta.norm(),
            ml.iterations
        );
        for a in [0.1, 0.5, 1.0] {
            let fit = fit_mpl(&data, LinkFamily::Logit, a, &config, None)?;
            println!("  a = {a}: beta = {:.4?}", fit.beta.as_slice());
        }
    }
    Ok(())
}
