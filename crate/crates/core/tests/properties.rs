use std::sync::Arc;

use proptest::prelude::*;

use stochastic_allen_cahn::brownian::BrownianPath;
use stochastic_allen_cahn::diagnostics::{
    energy, exp_moment_estimate, separation_certificate, CertificateInput,
};
use stochastic_allen_cahn::discretization::{l2_norm, Field, Grid, Spectrum};
use stochastic_allen_cahn::noise::NoiseFamily;
use stochastic_allen_cahn::potential::{
    resolvent, yosida_derivative, BarrierWeight, LogPotential, PotentialConstants, ResolventConfig,
};
use stochastic_allen_cahn::solver::{step_split_implicit, Model, SchemeConfig, SolverState};

fn standard() -> (LogPotential, PotentialConstants) {
    let p = LogPotential::new(1.0, 2.0).unwrap();
    (p, PotentialConstants::natural(&p))
}

fn field(dim: usize, n: usize, values: &[f64]) -> Field {
    let g = Grid::new(dim, n, 1.0).unwrap();
    Field::new(g, values[..g.len()].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn resolvent_identity_and_contraction(
        log_lambda in -4.0f64..1.0,
        x1 in -20.0f64..20.0,
        x2 in -20.0f64..20.0,
    ) {
        let (p, c) = standard();
        let lambda = 10f64.powf(log_lambda);
        let cfg = ResolventConfig::default();
        let a = resolvent(&p, &c, lambda, x1, &cfg).unwrap();
        let b = resolvent(&p, &c, lambda, x2, &cfg).unwrap();
        for (j, x) in [(a, x1), (b, x2)] {
            prop_assert!(j.value.abs() <= 1.0);
            let f = p.derivative_from_atanh(j.value, j.atanh);
            prop_assert!((j.value + lambda * (f + c.c_f * j.value) - x).abs() <= 1e-10 * (1.0 + x.abs()));
        }
        prop_assert!((a.value - b.value).abs() <= (x1 - x2).abs() * (1.0 + 1e-12));
        if x1 < x2 {
            prop_assert!(a.value <= b.value);
        }
    }

    #[test]
    fn yosida_is_lipschitz(log_lambda in -3.0f64..0.0, x in -3.0f64..3.0, dx in 1e-6f64..0.5) {
        let (p, c) = standard();
        let lambda = 10f64.powf(log_lambda);
        let cfg = ResolventConfig::default();
        let a = yosida_derivative(&p, &c, lambda, x, &cfg).unwrap();
        let b = yosida_derivative(&p, &c, lambda, x + dx, &cfg).unwrap();
        prop_assert!((b - a).abs() <= (1.0 / lambda + c.c_f) * dx * (1.0 + 1e-6) + 1e-9);
    }

    #[test]
    fn barrier_weight_derivative_identity(s in 1u32..8, x in -0.99f64..0.99) {
        let g = BarrierWeight::new(s as f64).unwrap();
        let g1 = BarrierWeight::new(s as f64 + 1.0).unwrap();
        let (_, dg) = g.eval(x).unwrap();
        let expect = 2.0 * s as f64 * x * g1.value(x).unwrap();
        prop_assert!((dg - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn sine_transform_round_trip(
        dim in 1usize..=3,
        values in prop::collection::vec(-1.0f64..1.0, 343),
    ) {
        let u = field(dim, 7, &values);
        let s = Spectrum::new(*u.grid());
        let back = s.synthesize(s.analyze(u.values()));
        for (a, b) in back.iter().zip(u.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn implicit_heat_contracts(values in prop::collection::vec(-1.0f64..1.0, 225), dt in 1e-5f64..1.0) {
        let u = field(2, 15, &values);
        let s = Spectrum::new(*u.grid());
        let w = Field::new(*u.grid(), s.implicit_heat(u.values(), dt)).unwrap();
        prop_assert!(l2_norm(&w) <= l2_norm(&u) * (1.0 + 1e-12));
        prop_assert!(w.sup() <= u.sup() * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn split_step_stays_inside(
        values in prop::collection::vec(-0.999_999f64..0.999_999, 31),
        sigma0 in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let (p, c) = standard();
        let u = field(1, 31, &values);
        let model = Model::new(
            p,
            c,
            NoiseFamily::polynomial(3, 4, sigma0, 1.0).unwrap(),
            Arc::new(Spectrum::new(*u.grid())),
        );
        let cfg = SchemeConfig::split_implicit(1e-2);
        let mut state = SolverState::new(u, BrownianPath::new(seed, 4, 1e-2, 1).unwrap());
        for _ in 0..5 {
            step_split_implicit(&mut state, &cfg, &model).unwrap();
            prop_assert!(state.u.sup() < 1.0);
        }
    }

    #[test]
    fn energy_reflection_invariant(values in prop::collection::vec(-0.99f64..0.99, 81)) {
        let (p, _) = standard();
        let u = field(2, 9, &values);
        let a = energy(&u, &p).unwrap();
        let b = energy(&u.reflected(), &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn certificate_monotone(
        mass in 1.5f64..100.0,
        holder in 0.01f64..10.0,
        dim in 1usize..=3,
    ) {
        let alpha = 0.9;
        let input = CertificateInput { mass, holder, alpha, s0: 4, dim, side: 1.0 };
        let e = separation_certificate(&input).unwrap();
        let more_mass = separation_certificate(&CertificateInput { mass: 2.0 * mass, ..input }).unwrap();
        let rougher = separation_certificate(&CertificateInput { holder: 2.0 * holder, ..input }).unwrap();
        prop_assert!(e > 0.0 && e <= 2.0 * (1.0 / mass).powf(0.25));
        prop_assert!(more_mass < e);
        prop_assert!(rougher < e);
    }

    #[test]
    fn exp_moment_zero_order(values in prop::collection::vec(-50.0f64..50.0, 1..50)) {
        let m = exp_moment_estimate(&values, 0.0).unwrap();
        prop_assert_eq!(m.mean, 1.0);
        prop_assert_eq!(m.stderr, 0.0);
    }
}

#[test]
fn exp_moment_stderr_scales_like_inverse_sqrt_n() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp};
    let dist = Exp::new(4.0).unwrap();
    let mut ratios = Vec::new();
    let mut prev: Option<f64> = None;
    for n in [25usize, 100, 400] {
        // average over seed-locked replicates to smooth the estimate
        let mut acc = 0.0;
        for rep in 0..50u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 * n as u64 + rep);
            let v: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
            acc += exp_moment_estimate(&v, 1.0).unwrap().stderr;
        }
        let s = acc / 50.0;
        if let Some(p) = prev {
            ratios.push(p / s);
        }
        prev = Some(s);
    }
    for r in ratios {
        assert!(r > 1.6 && r < 2.4, "{r}");
    }
}
