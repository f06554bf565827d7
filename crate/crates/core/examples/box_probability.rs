//! Multivariate normal box probabilities and the no-transmission
//! probability of a group of correlated nodes.

use wsn_dps::correlation::{
    build_equicorrelation_matrix, mvn_box_probability, prob_no_transmission, CorrelationMatrix, MvnOptions,
};

fn main() -> wsn_dps::Result<()> {
    let sigma = build_equicorrelation_matrix(3, 0.5)?;
    let est = mvn_box_probability(&sigma, &[-1.0; 3], &[1.0; 3], 200_000, 1)?;
    println!("P(|X_i| <= 1, rho = 0.5, n = 3) = {:.5} +/- {:.1e}", est.p, est.stderr);

    // any valid correlation matrix and box works
    let sigma = CorrelationMatrix::from_rows(&[
        vec![1.0, 0.6, 0.1],
        vec![0.6, 1.0, -0.2],
        vec![0.1, -0.2, 1.0],
    ])?;
    let est = mvn_box_probability(&sigma, &[-0.5, f64::NEG_INFINITY, -1.0], &[2.0, 0.0, 1.5], 200_000, 1)?;
    println!("general box: {:.5} +/- {:.1e}", est.p, est.stderr);

    // nine nodes with the correlation measured in the lab deployment
    println!("\naccuracy  share of windows with a transmission");
    for alpha in [0.5, 0.6, 0.7, 0.8, 0.9, 0.95] {
        let p = prob_no_transmission(9, alpha, 0.820068, MvnOptions::new(200_000, 7))?;
        println!("{alpha:>8}  {:>6.2}%", 100.0 * (1.0 - p.p));
    }
    Ok(())
}
