use num_complex::Complex64 as C;
use wqed::exact_me::{self, build_liouvillian, CollectiveMode, DensityMatrix, Liouvillian};
use wqed::ode::OdeOptions;
use wqed::{Configuration, InitialState, SystemConfig, TimeGrid};

fn opts() -> OdeOptions {
    OdeOptions::tol(1e-11, 1e-13)
}

fn times() -> Vec<f64> {
    (0..=20).map(|k| 0.25 * k as f64).collect()
}

#[test]
fn trace_and_hermiticity_preserved() {
    for conf in [Configuration::Chiral, Configuration::SymmetricMirror] {
        let cfg = SystemConfig::new(4, 0.6, conf).unwrap();
        let l = build_liouvillian(&cfg).unwrap();
        let rho0 = DensityMatrix::fully_inverted(4);
        exact_me::evolve_with(&rho0, &l, &times(), &opts(), |_, _, r| {
            assert!((r.trace().re - 1.0).abs() < 1e-9 && r.trace().im.abs() < 1e-9);
            assert!(r.hermiticity_error() < 1e-9);
            assert!(r.min_eigenvalue() > -1e-8);
        })
        .unwrap();
    }
}

#[test]
fn symmetric_mirror_permutation_symmetry() {
    let n = 4;
    let cfg = SystemConfig::new(n, 0.8, Configuration::SymmetricMirror).unwrap();
    let l = build_liouvillian(&cfg).unwrap();
    // an asymmetric product-like start so the swap is not trivial
    let mut psi = vec![C::new(0.0, 0.0); 1 << n];
    psi[0b1110] = C::new(0.8, 0.0);
    psi[0b0111] = C::new(0.0, 0.6);
    let rho0 = DensityMatrix::from_pure(n, &psi);
    for perm in [[1, 0, 2, 3], [3, 1, 2, 0], [0, 2, 1, 3]] {
        let swapped = rho0.permuted(&perm);
        let mut a = Vec::new();
        let mut b = Vec::new();
        exact_me::evolve_with(&rho0, &l, &times(), &opts(), |_, _, r| a.push((l.power_right(r), l.power_left(r), r.total_excitation()))).unwrap();
        exact_me::evolve_with(&swapped, &l, &times(), &opts(), |_, _, r| b.push((l.power_right(r), l.power_left(r), r.total_excitation()))).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.0 - y.0).abs() < 1e-10 && (x.1 - y.1).abs() < 1e-10 && (x.2 - y.2).abs() < 1e-10);
        }
    }
}

#[test]
fn chiral_downstream_atom_cannot_backact() {
    let reduced = |beta_last: f64| {
        let b = 0.7f64.sqrt();
        let modes = CollectiveMode {
            r: vec![C::new(b, 0.0), C::new(b, 0.0), C::new(beta_last.sqrt(), 0.0)],
            l: vec![C::new(0.0, 0.0); 3],
        };
        let l = Liouvillian::from_modes(modes).unwrap();
        let mut out = Vec::new();
        exact_me::evolve_with(&DensityMatrix::fully_inverted(3), &l, &times(), &opts(), |_, _, r| out.push(r.reduced(&[0, 1]))).unwrap();
        out
    };
    let (a, b) = (reduced(0.7), reduced(0.1));
    for (x, y) in a.iter().zip(&b) {
        let d = x.data.iter().zip(&y.data).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(d < 1e-10, "upstream reduced state moved by {d:e}");
    }
}

#[test]
fn energy_bookkeeping() {
    for conf in [Configuration::Chiral, Configuration::SymmetricMirror] {
        let cfg = SystemConfig::new(4, 0.5, conf).unwrap().with_initial_state(InitialState::DickeMinusOne);
        let l = build_liouvillian(&cfg).unwrap();
        let rho0 = DensityMatrix::initial(&cfg);
        let free = 1.0 - cfg.beta_forward() - cfg.beta_backward();
        exact_me::evolve_with(&rho0, &l, &times(), &opts(), |_, _, r| {
            let mut d = DensityMatrix::zeros(4);
            l.apply(&r.data, &mut d.data);
            let lhs = -d.total_excitation();
            let rhs = l.power_right(r) + l.power_left(r) + free * r.total_excitation();
            assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
        })
        .unwrap();
    }
}

#[test]
fn observables_channels_consistent() {
    let cfg = SystemConfig::from_scaled_od(3, 1.5, Configuration::SymmetricMirror).unwrap();
    let tr = exact_me::observables(&cfg, &TimeGrid::uniform(4.0, 16)).unwrap();
    let (pr, pl) = (tr.channel("power_right").unwrap(), tr.channel("power_left").unwrap());
    for (a, b) in pr.iter().zip(pl) {
        assert!(*a >= 0.0 && (a - b).abs() < 1e-10);
    }
    assert_eq!(tr.channel("excitation_mean").unwrap()[0], 1.0);
}
