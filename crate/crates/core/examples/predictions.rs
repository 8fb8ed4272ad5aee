//! Closed-form predictions: beta_i, ell, its inverse and f_j.
//!
//! ```text
//! cargo run --release --example predictions -- [n] [d]
//! ```

use dprocess::AnalyticModel;

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(100_000) as usize;
    let d = args.get(1).copied().unwrap_or(3) as usize;
    let model = AnalyticModel::new(n, d)?;
    let big_n = model.max_edges() as f64;

    println!("n = {n}, d = {d}, N = {big_n}");
    println!("{:>8} {:>14} {:>10}  beta_0..beta_(d-1)", "s / N", "x = ell^-1(s)", "x / n");
    for frac in [0.1, 0.25, 0.5, 0.8, 0.95, 0.99, 0.999] {
        let x = model.ell_inverse(frac * big_n)?;
        let betas: Vec<String> = (0..d).map(|i| model.beta(x, i).map(|b| format!("{b:.1}"))).collect::<Result<_, _>>()?;
        println!("{frac:>8} {x:>14.1} {:>10.4}  {}", x / n as f64, betas.join("  "));
    }

    println!("\nnear the end, D_j(N - t) is close to Poisson(f_j):");
    for t in [1.0, 5.0, 10.0, 25.0, 100.0] {
        let fs: Vec<String> = (0..d - 1).map(|j| model.f(t, j).map(|f| format!("f_{j} = {f:.4}"))).collect::<Result<_, _>>()?;
        println!("  t = {t:>5}: {}", fs.join(", "));
    }
    Ok(())
}
