// Grid, Dirichlet sine spectrum, implicit heat step and field norms.

use stochastic_allen_cahn::discretization::{
    holder_seminorm, laplacian_apply, norms, Field, Grid, HolderRange, Spectrum,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(1, 63, 1.0)?;
    let spectrum = Spectrum::new(grid);
    let pi2 = std::f64::consts::PI.powi(2);
    println!("discrete vs continuous eigenvalues on (0, 1):");
    for (k, mu) in spectrum.eigenvalues_1d().iter().take(4).enumerate() {
        let exact = pi2 * ((k + 1) * (k + 1)) as f64;
        println!("  k = {}: {mu:.6}  exact {exact:.6}", k + 1);
    }

    let e1 = spectrum.eigenvector(0)?;
    let dt = 0.01;
    let stepped = Field::new(grid, spectrum.implicit_heat(e1.values(), dt))?;
    let mu = spectrum.eigenvalues_1d()[0];
    println!(
        "one implicit heat step on e1 scales it by {:.10} (1/(1+dt mu) = {:.10})",
        stepped.values()[31] / e1.values()[31],
        1.0 / (1.0 + dt * mu)
    );

    let lap = laplacian_apply(&e1);
    println!("finite-difference Laplacian of e1 at the centre: {:.6}", lap.values()[31] / e1.values()[31]);

    let g2 = Grid::new(2, 31, 1.0)?;
    let bump = Field::from_fn(g2, |x| {
        let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
        0.9 * (-20.0 * r2).exp()
    });
    let n = norms(&bump, 0.9, HolderRange::default_for(&g2));
    println!("2D bump: {n:?}");
    println!(
        "Holder seminorm (alpha = 0.9): all pairs {:.6}, within 0.25 {:.6}",
        holder_seminorm(&bump, 0.9, HolderRange::AllPairs),
        holder_seminorm(&bump, 0.9, HolderRange::Within(0.25))
    );

    let projected = Spectrum::new(g2).project(&bump, 4)?;
    println!("projection onto 4 modes per axis: sup {:.6}", projected.sup());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
