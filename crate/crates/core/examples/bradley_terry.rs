//! Paired comparisons. One team never wins, so its maximum likelihood
//! ability is minus infinity; the penalized fit ranks it last at a finite
//! value.
//!
//! ```text
//! cargo run --example bradley_terry [contests.csv] [reference]
//! ```

use jeffreys_glm::design::{bt_design, load_contests_csv};
use jeffreys_glm::infer::wald;
use jeffreys_glm::link::LinkFamily;
use jeffreys_glm::mle::{fit_ml, FitConfig};
use jeffreys_glm::mpl::fit_mpl;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/league30.csv"));
    let reference = args.next().unwrap_or_else(|| "San Antonio Club".to_string());

    let contests = load_contests_csv(&path)?;
    let data = bt_design(&contests, &reference)?;
    println!("{} contests, {} contrasts against {reference}", data.n(), data.p());

    let ml = fit_ml(&data, LinkFamily::Logit, &FitConfig::default(), None)?;
    println!("ML diverged: {}", ml.diverged);

    let fit = fit_mpl(&data, LinkFamily::Logit, 0.5, &FitConfig::default(), None)?;
    let w = wald(&fit, 0.95)?;
    let mut order: Vec<usize> = (0..data.p()).collect();
    order.sort_by(|&i, &j| w.estimates[j].total_cmp(&w.estimates[i]));
    for i in order {
        let wins = contests.iter().filter(|c| c.winner == w.coef_names[i]).count();
        println!(
            "{:<20} {:>8.3}  se {:.3}  wins {wins}",
            w.coef_names[i], w.estimates[i], w.std_errors[i]
        );
    }
    Ok(())
}
