// Degenerate multiplicative noise: coefficients, constants and the barrier bound.

use stochastic_allen_cahn::noise::{check_noise, constants, taylor_bound_check, NoiseFamily};
use stochastic_allen_cahn::potential::{LogPotential, PotentialConstants};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = LogPotential::new(1.0, 2.0)?;
    let c = PotentialConstants::natural(&p);
    let f = NoiseFamily::polynomial(3, 16, 0.1, 1.0)?;

    println!(
        "s0 = {}, K = {}, vanishing order {}",
        f.s0(),
        f.modes(),
        f.vanishing_order()
    );
    println!("sigma_k: {:.4?}", &f.coefficients()[..4]);
    for x in [0.0, 0.5, 0.9, 0.99] {
        println!("  h_0({x}) = {:.6e}", f.h(0, x));
    }

    let nc = constants(&f, &p)?;
    println!("C_1H = {:.6e}, C_2H = {:.6e}", nc.c1, nc.c2);

    let t = taylor_bound_check(&f, 0, 2001)?;
    println!(
        "Taylor bound, mode 0: sup|h^(s0+2)| = {:.4e}, max ratio {:.4} at x = {:.3}",
        t.derivative_sup, t.max_ratio, t.worst_x
    );

    for d in 1..=3 {
        print!("d = {d}: {}", check_noise(&f, &p, c.s_f, d)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
