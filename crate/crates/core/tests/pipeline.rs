use spectral_flrw::action::total_action;
use spectral_flrw::eom::constraint_consistency;
use spectral_flrw::integrator::{integrate, solve_constraint_ic, Branch, IntegratorConfig, Termination, Trajectory};
use spectral_flrw::CosmoParams;

#[test]
fn evolve_write_and_read_back() {
    let p = CosmoParams::new(6.0, 1.0);
    let ic = solve_constraint_ic(1.1, 0.9, 0.9, Branch::Plus, &p).unwrap();
    let traj = integrate(&ic, &p, &IntegratorConfig::rk45(1e-10, 0.0, 1.0)).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    assert!(constraint_consistency(&traj, &p) < 1e-8);

    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("t,a1,v1,a2,v2,constraint\n"));
    assert!(!text.contains('\r'));
    let back = Trajectory::read_csv(&buf[..], p).unwrap();
    assert_eq!(back.samples, traj.samples);
}

#[test]
fn de_sitter_action_matches_its_antiderivative() {
    // a = e^t on both sheets: density 2 Lambda e^(3t) + 12 e^(3t) with V = 0
    let p = CosmoParams::new(6.0, 2.0);
    let ic = solve_constraint_ic(1.0, 1.0, 1.0, Branch::Plus, &p).unwrap();
    let traj = integrate(&ic, &p, &IntegratorConfig::rk4(1e-3, 0.0, 1.0)).unwrap();
    let exact = 24.0 * ((3.0f64).exp() - 1.0) / 3.0;
    let got = total_action(&traj, &p).unwrap();
    assert!((got - exact).abs() < 1e-8 * exact, "{got} vs {exact}");
}
