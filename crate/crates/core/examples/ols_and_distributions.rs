//! Least squares, t/F tails and the nested F-test.
//!
//! cargo run --example ols_and_distributions

use leadlag::stats::{f_cdf, f_sf, nested_f_test, ols_fit, ols_fit_dropping, t_cdf, t_two_sided_tail, Design};

fn main() {
    let x: Vec<f64> = (0..50).map(|i| i as f64 / 10.0).collect();
    let noise: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64 - 5.0) / 50.0).collect();
    let y: Vec<f64> = x.iter().zip(&noise).map(|(x, e)| 1.0 + 2.0 * x + e).collect();

    let fit = ols_fit(&Design::with_intercept(50).column("x", x.clone()), &y).expect("full rank");
    println!(
        "y = {:.4} + {:.4} x   (se {:.4}, {:.4}), R² = {:.6}",
        fit.coefficients[0], fit.coefficients[1], fit.std_errors[0], fit.std_errors[1], fit.r_squared
    );
    let p = t_two_sided_tail(fit.t_stat(1), fit.df_resid() as f64).unwrap();
    println!("slope t = {:.2}, two-sided p = {p:e}", fit.t_stat(1));

    // A duplicated regressor is dropped rather than failing the fit.
    let design = Design::with_intercept(50).column("x", x.clone()).column("x_again", x);
    let (_, kept, dropped) = ols_fit_dropping(&design, &y, &["x"]).unwrap();
    println!("kept {:?}, dropped {:?}", kept.names(), dropped);

    println!("t_cdf(1.96, 1e6)    = {:.6}", t_cdf(1.96, 1e6).unwrap());
    println!("f_cdf(3.8415, 1, 1e6) = {:.6}", f_cdf(3.8415, 1.0, 1e6).unwrap());
    println!("f_sf(10, 2, 500)    = {:e}", f_sf(10.0, 2.0, 500.0).unwrap());

    let test = nested_f_test(120.0, 100.0, 3, 400).unwrap();
    println!("nested F = {:.3} on ({}, {}) df, p = {:.3e}", test.f_statistic, test.df_num, test.df_den, test.p_value);
}
