use wqed::analytic::power_symmetric;
use wqed::exact_me;
use wqed::sym_moments::{
    build_hierarchy, evolve_exact, evolve_mf2, initial_moments, mf2_initial, power_from_moments, DickeSolver,
};
use wqed::{Configuration, InitialState, SystemConfig, TimeGrid};

#[test]
fn generator_spectrum_is_stable() {
    for n in 2..=12 {
        let gen = build_hierarchy(n, 0.7).unwrap();
        let ev = gen.to_dense().complex_eigenvalues();
        let worst = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= 1e-9, "N = {n}: max Re λ = {worst:e}");
    }
}

#[test]
fn mf2_converges_to_closed_form_monotonically() {
    let b = 10.0;
    let tg = TimeGrid::uniform(4.0, 80);
    let mut errs = Vec::new();
    for k in 8..=13 {
        let n = 1usize << k;
        let beta = b / n as f64;
        let mom = evolve_mf2(n, beta, mf2_initial(n, InitialState::FullyInverted), &tg).unwrap();
        let err = tg
            .output_times
            .iter()
            .zip(&mom)
            .map(|(&t, m)| (power_from_moments(n, beta, m) - power_symmetric(b, t, b)).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn three_solvers_agree_at_small_n() {
    let n = 5;
    let tg = TimeGrid::uniform(3.0, 12).with_tolerances(1e-11, 1e-14);
    for init in [InitialState::FullyInverted, InitialState::DickeMinusOne] {
        let cfg = SystemConfig::new(n, 0.9, Configuration::SymmetricMirror).unwrap().with_initial_state(init);
        let me = exact_me::observables(&cfg, &tg).unwrap();
        let p_me = me.channel("power_total").unwrap();
        let gen = build_hierarchy(n, cfg.beta).unwrap();
        let hier = evolve_exact(&gen, &initial_moments(n, init).unwrap(), &tg).unwrap();
        let dicke = DickeSolver::new(n, cfg.beta).unwrap().evolve(init, &tg).unwrap();
        for k in 0..tg.output_times.len() {
            let ph = power_from_moments(n, cfg.beta, &hier[k].low());
            let pd = power_from_moments(n, cfg.beta, &dicke[k]);
            assert!((ph - p_me[k]).abs() < 1e-9 && (pd - p_me[k]).abs() < 1e-8, "t index {k}");
        }
    }
}

#[test]
fn initial_moments_from_full_inversion() {
    let m = initial_moments(7, InitialState::FullyInverted).unwrap();
    for idx in m.indices().collect::<Vec<_>>() {
        let expect = if idx.c == 0 { 1.0 } else { 0.0 };
        assert_eq!(m.at(idx.p, idx.c), expect);
    }
}

#[test]
fn moments_stay_bounded() {
    let n = 9;
    let gen = build_hierarchy(n, 1.0).unwrap();
    let traj = evolve_exact(&gen, &initial_moments(n, InitialState::FullyInverted).unwrap(), &TimeGrid::uniform(5.0, 20)).unwrap();
    for mv in &traj {
        assert_eq!(mv.at(0, 0), 1.0);
        for idx in mv.indices().collect::<Vec<_>>() {
            assert!(mv.at(idx.p, idx.c).abs() <= 1.0 + 1e-10);
        }
    }
}
