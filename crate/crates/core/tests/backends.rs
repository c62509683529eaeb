use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lindsim::circuit::{run_algorithm1, Alg1Options};
use lindsim::compressed::{run_algorithm2, Alg2Options};
use lindsim::linalg::c;
use lindsim::model::{amplitude_damping, parse_model, random_model, scenario_collective_lowering, serialize_model};
use lindsim::oracle::{exact_channel, state_trace_distance};
use lindsim::trajectory::{basis_state, evolve_channel_level, evolve_monte_carlo, pure_density};
use lindsim::CVec;

#[test]
fn serialized_models_parse_back_to_the_same_dynamics() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 1..=2 {
        let model = random_model(&mut rng, n, 2, 2, 2);
        let back = parse_model(&serialize_model(&model)).unwrap();
        assert_eq!(back.n, model.n);
        let rho = pure_density(&basis_state(model.dim(), 0));
        let a = exact_channel(&model, 0.4).unwrap().apply(&rho);
        let b = exact_channel(&back, 0.4).unwrap().apply(&rho);
        assert!(state_trace_distance(&a, &b).unwrap() < 1e-12);
    }
}

#[test]
fn all_backends_land_near_the_exact_state() {
    let model = amplitude_damping(1.0, 0.5).unwrap();
    let t = 0.4;
    let eps = 0.25;
    let psi = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    let rho0 = pure_density(&psi);
    let exact = exact_channel(&model, t).unwrap().apply(&rho0);

    let ch = evolve_channel_level(&model, t, eps, &rho0).unwrap();
    assert!(state_trace_distance(&ch.rho, &exact).unwrap() <= eps);

    let mc = evolve_monte_carlo(&model, t, eps, &psi, 2000, 5).unwrap();
    let slack = 3.0 * mc.stderr.norm();
    assert!(state_trace_distance(&mc.rho, &exact).unwrap() <= eps + slack);

    let a1 = run_algorithm1(&model, t, eps, &rho0, 100, 5, Alg1Options::default()).unwrap();
    assert!(state_trace_distance(&a1.rho, &exact).unwrap() <= eps + 3.0 * a1.stderr_scale());

    // the compressed backend at full weight needs the smaller pure-decay slot
    let decay = amplitude_damping(1.0, 0.0).unwrap();
    let exact = exact_channel(&decay, t).unwrap().apply(&rho0);
    let a2 = run_algorithm2(&decay, t, eps, &rho0, Alg2Options { r: Some(4), h: Some(4) }).unwrap();
    assert!(state_trace_distance(&a2.rho, &exact).unwrap() <= eps);
}

#[test]
fn collective_decay_empties_the_excited_manifold() {
    let model = scenario_collective_lowering(2, &[(vec![0, 1], 1.0)]).unwrap();
    let rho0 = pure_density(&basis_state(4, 3));
    let late = exact_channel(&model, 40.0).unwrap().apply(&rho0);
    // |11⟩ decays through the symmetric state; the singlet is dark, so
    // nothing is left in |11⟩ at long times
    assert!(late[(3, 3)].re < 1e-8);
    assert!((late.trace().re - 1.0).abs() < 1e-10);
}
