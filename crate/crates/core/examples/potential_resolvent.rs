// The logarithmic potential, its resolvent and the Yosida derivative.
//
// `cargo run --example potential_resolvent`

use stochastic_allen_cahn::potential::{
    check_h1, resolvent, yosida_derivative, BarrierWeight, LogPotential, PotentialConstants,
    ResolventConfig,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = LogPotential::new(1.0, 2.0)?;
    let c = PotentialConstants::natural(&p);
    println!("theta = {}, theta0 = {}, wells at ±{:.6}", p.theta(), p.theta0(), p.well());
    println!("C_F = {}, s_F = {}", c.c_f, c.s_f);

    for r in [0.0, 0.5, 0.9, 0.999, 1.0 - 1e-9] {
        let v = p.eval(r)?;
        println!("  r = {r:<14} F = {:.6e}  F' = {:.6e}  F'' = {:.6e}", v.f, v.df, v.d2f);
    }

    let g = BarrierWeight::new(c.s_f)?;
    println!("G_sF(0.99) = {:.6e}", g.value(0.99)?);

    let cfg = ResolventConfig::default();
    println!("resolvent J_lambda(x) and F'_lambda(x):");
    for lambda in [1.0, 1e-2, 1e-4] {
        for x in [0.5, 2.0, 50.0] {
            let j = resolvent(&p, &c, lambda, x, &cfg)?;
            let y = yosida_derivative(&p, &c, lambda, x, &cfg)?;
            println!(
                "  lambda = {lambda:<7} x = {x:<5} J = {:.12}  atanh = {:.6}  F'_lambda = {y:.6e}  residual = {:.1e}",
                j.value, j.atanh, j.residual
            );
        }
    }

    print!("{}", check_h1(&p, &c, 4000)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
