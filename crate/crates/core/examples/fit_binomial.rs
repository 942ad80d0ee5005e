//! Maximum likelihood and penalized fits of the same binomial data, with
//! Wald intervals from each.
//!
//! ```text
//! cargo run --example fit_binomial
//! ```

use jeffreys_glm::design::load_csv_conventional;
use jeffreys_glm::infer::wald;
use jeffreys_glm::link::LinkFamily;
use jeffreys_glm::mle::{fit_ml, FitConfig, FitResult};
use jeffreys_glm::mpl::fit_mpl;
use std::path::Path;

fn show(label: &str, fit: &FitResult) {
    let w = wald(fit, 0.95).expect("converged fit");
    println!("{label}: {} iterations, loglik {:.6}, logdet {:.6}", fit.iterations, fit.loglik, fit.logdet);
    for j in 0..w.estimates.len() {
        println!(
            "  {:<12} {:>10.6}  se {:.6}  95% [{:.4}, {:.4}]",
            w.coef_names[j], w.estimates[j], w.std_errors[j], w.lower[j], w.upper[j]
        );
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/overlap.csv");
    let data = load_csv_conventional(path, true)?;
    let config = FitConfig::default();
    for link in [LinkFamily::Logit, LinkFamily::Cloglog] {
        println!("== {link}");
        show("ML", &fit_ml(&data, link, &config, None)?);
        // a = 1/2 is the Jeffreys prior
        show("a = 1/2", &fit_mpl(&data, link, 0.5, &config, None)?);
    }
    Ok(())
}
