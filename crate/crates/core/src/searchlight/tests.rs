use super::*;
use crate::evolve::{self, init_incoming, RunParams, DEFAULT_TAIL_TOL};
use proptest::prelude::*;

fn wavy_field(t: f64) -> WaveField {
    let grid = Grid1D::new(30.0, 3000).unwrap();
    WaveField::from_fn(grid, t, |x| C64::from_polar((-(x - 12.0) * (x - 12.0) / 8.0).exp(), 3.0 * x + 0.1 * x * x))
        .unwrap()
}

#[test]
fn searchlight_round_trip_and_isometry() {
    for t in [0.5, 1.0, 3.0, 6.0] {
        let f = wavy_field(t);
        let g = to_searchlight(&f).unwrap();
        assert_eq!(g.g[0], C64::new(0.0, 0.0));
        assert!((g.norm() - f.norm()).abs() < 1e-10);
        let back = from_searchlight(&g).unwrap();
        for (a, b) in f.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-13, "t = {t}");
        }
        assert!((g.eta0() + t * t / 6.0).abs() < 1e-15);
        assert!((g.tau() - 1.0 / t).abs() < 1e-15);
    }
    assert!(matches!(to_searchlight(&wavy_field(0.4)), Err(Error::Domain(_))));
}

#[test]
fn parabolic_frame_composes_to_searchlight() {
    for t in [0.5, 2.0, 4.0, 6.0] {
        let f = wavy_field(t);
        let p = to_parabolic_frame(&f);
        assert!((p.norm() - f.norm()).abs() < 1e-12);
        let composed = parabolic_to_searchlight(&p).unwrap();
        let direct = to_searchlight(&f).unwrap();
        let worst = composed.g.iter().zip(&direct.g).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "t = {t}: {worst}");
    }
    assert!(parabolic_to_searchlight(&to_parabolic_frame(&wavy_field(-1.0))).is_err());
}

#[test]
fn modal_frame_recovers_airy_profile() {
    let mode = airy::mode(1).unwrap();
    let grid = Grid1D::new(12.0, 2400).unwrap();
    let f = init_incoming(&mode, 0, grid, -3.0).unwrap();
    let m = to_modal_frame(&f).unwrap();
    assert_eq!(m.psi_tilde[0], C64::new(0.0, 0.0));
    for i in (0..grid.points()).step_by(37) {
        let expected = mode.d * airy::ai(m.xi(i) - mode.nu).abs();
        assert!((m.psi_tilde[i].norm() - expected).abs() < 1e-10);
    }
    assert!((m.norm() - f.norm()).abs() < 1e-8);
    assert!((m.tau_modal + 0.15 * 6f64.powf(5.0 / 3.0)).abs() < 1e-12);
    assert!((m.projection(&mode).norm() - 1.0).abs() < 1e-6);
    let other = airy::mode(2).unwrap();
    assert!(m.projection(&other).norm() < 1e-6);
    assert!(matches!(to_modal_frame(&wavy_field(-0.5)), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transforms_preserve_norms(t in 0.5f64..8.0, k in -5.0f64..5.0, c in 3.0f64..20.0) {
        let grid = Grid1D::new(30.0, 1500).unwrap();
        let f = WaveField::from_fn(grid, t, |x| C64::from_polar((-(x - c) * (x - c)).exp() * x, k * x)).unwrap();
        let n = f.norm();
        prop_assert!((to_searchlight(&f).unwrap().norm() - n).abs() < 1e-12 * (1.0 + n));
        prop_assert!((to_parabolic_frame(&f).norm() - n).abs() < 1e-12 * (1.0 + n));
    }
}

const CENTRE: f64 = 4.0;

fn free_gaussian(eta: f64, t: f64) -> C64 {
    // exp(-(i/2t) ∂²) exp(-(η - 4)²/2)
    let w = C64::new(1.0, -1.0 / t);
    let d = eta - CENTRE;
    (-(d * d) / (w * 2.0)).exp() / w.sqrt()
}

fn manufactured(times: &[f64], f: impl Fn(f64, f64) -> C64) -> Vec<SearchlightFrame> {
    times
        .iter()
        .map(|&t| {
            let x_max = t * (12.0 + t * t / 6.0);
            // dη = 1/600 for every frame, and every wall -t²/6 lands on that lattice
            let grid = Grid1D::with_spacing(x_max, t / 600.0).unwrap();
            let g = (0..grid.points())
                .map(|i| if i == 0 { C64::new(0.0, 0.0) } else { f(grid.x(i) / t - t * t / 6.0, t) })
                .collect();
            SearchlightFrame::new(t, grid, g).unwrap()
        })
        .collect()
}

#[test]
fn two_term_fit_recovers_exact_model() {
    let g0 = |eta: f64| C64::new((-eta * eta).exp(), 0.3 * eta * (-eta * eta).exp());
    let g1 = |eta: f64| C64::new(0.0, 0.7) * (-(eta - 0.5) * (eta - 0.5)).exp();
    let frames = manufactured(&[4.0, 5.0, 6.0, 8.0], |eta, t| g0(eta) + g1(eta) / t);
    let s = extract_g0(&frames).unwrap();
    for i in (0..s.len()).step_by(11) {
        let eta = s.eta(i);
        if eta < -16.0 / 6.0 {
            // below the wall of the t = 4 frame fewer frames constrain the fit
            continue;
        }
        assert!((s.two_term.g0[i] - g0(eta)).norm() < 1e-10, "eta = {eta}");
        assert!((s.two_term.g1[i] - g1(eta)).norm() < 1e-10);
    }
    assert!(s.fit_residual < 1e-10);
    assert_eq!(s.pairwise_differences.len(), 3);
}

#[test]
fn limit_amplitude_inverts_free_evolution() {
    let times = [3.0, 4.0, 5.0, 6.0];
    let frames = manufactured(&times, free_gaussian);
    let s = extract_g0(&frames).unwrap();
    let mut worst = 0.0f64;
    for i in 0..s.len() {
        let d = s.eta(i) - CENTRE;
        worst = worst.max((s.g0[i] - C64::new((-0.5 * d * d).exp(), 0.0)).norm());
    }
    assert!(worst < 1e-6, "max error {worst}");
    assert!((s.norm() - std::f64::consts::PI.powf(0.25)).abs() < 1e-6);
    assert!(s.limit_spread < 1e-6);
    assert!(s.pairwise_differences.windows(2).all(|w| w[1] < w[0]));
    // G₁ = -(i/2) G₀'' = -(i/2)(η² - 1) e^{-η²/2}
    let g1 = s.g1.as_ref().unwrap();
    let err: f64 = (0..s.len())
        .map(|i| {
            let d = s.eta(i) - CENTRE;
            (g1[i] - C64::new(0.0, -0.5 * (d * d - 1.0) * (-0.5 * d * d).exp())).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    let scale: f64 = g1.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    assert!(err / scale < 0.05, "relative g1 error {}", err / scale);
}

#[test]
fn extraction_rejects_bad_inputs() {
    let frames = manufactured(&[4.0, 5.0, 6.0], free_gaussian);
    assert!(matches!(extract_g0(&frames[..2]), Err(Error::InsufficientFrames { needed: 3, got: 2 })));
    let swapped = vec![frames[1].clone(), frames[0].clone(), frames[2].clone()];
    assert!(matches!(extract_g0(&swapped), Err(Error::Domain(_))));
}

#[test]
fn amplitude_csv_layout() {
    let frames = manufactured(&[4.0, 5.0, 6.0], free_gaussian);
    let mut s = extract_g0(&frames).unwrap();
    let csv = s.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eta,re_g0,im_g0,re_g1,im_g1"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 5);
    assert_eq!(row[0], s.eta0);
    assert_eq!(row[1], s.g0[0].re);
    assert_eq!(csv.lines().count(), s.len() + 1);
    s.g1 = None;
    assert!(s.to_csv().lines().skip(1).all(|l| l.ends_with(",0.0000000000000000e0,0.0000000000000000e0")));
}

fn gaussian_grid(h: f64) -> (f64, Vec<C64>) {
    let eta0 = -6.0;
    let n = (12.0 / h).round() as usize + 1;
    (eta0, (0..n).map(|i| C64::new((-(eta0 + i as f64 * h).powi(2)).exp(), 0.0)).collect())
}

#[test]
fn recurrence_on_gaussian() {
    let h = 0.005;
    let (eta0, g0) = gaussian_grid(h);
    let g1 = recur_amplitude(&g0, h, 0).unwrap();
    let g2 = recur_amplitude(&g1, h, 1).unwrap();
    for i in (1..g0.len() - 1).step_by(13) {
        let eta: f64 = eta0 + i as f64 * h;
        let e = (-eta * eta).exp();
        let exact1 = C64::new(0.0, -0.5 * (4.0 * eta * eta - 2.0) * e);
        assert!((g1[i] - exact1).norm() < 1e-4, "eta = {eta}");
        // g2 = -(i/4) g1'' = -(1/8)(16η⁴ - 48η² + 12) e^{-η²}
        let exact2 = C64::new(-(16.0 * eta.powi(4) - 48.0 * eta * eta + 12.0) * e / 8.0, 0.0);
        assert!((g2[i] - exact2).norm() < 1e-3, "eta = {eta}");
    }
    let constant = vec![C64::new(2.0, -1.0); 40];
    assert!(recur_amplitude(&constant, 0.1, 0).unwrap().iter().all(|v| v.norm() < 1e-10));
    let (_, coarse) = gaussian_grid(0.5);
    assert!(matches!(recur_amplitude(&coarse, 0.5, 0), Err(Error::GridTooCoarse(_))));
}

/// `exp(-1/(1 - η²/4)) e^{iη/2}` on `[-2, 2]`.
fn bump_amplitude(h: f64) -> (f64, Vec<C64>) {
    let eta0 = -2.5;
    let n = (5.0 / h).round() as usize + 1;
    let g = (0..n)
        .map(|i| {
            let eta: f64 = eta0 + i as f64 * h;
            let r = 1.0 - 0.25 * eta * eta;
            let v = if r > 0.0 { (-1.0 / r).exp() } else { 0.0 };
            C64::from_polar(v, 0.5 * eta)
        })
        .collect();
    (eta0, g)
}

#[test]
fn outgoing_solution_support_and_isometry() {
    let h = 0.005;
    let (eta0, g0) = bump_amplitude(h);
    let out = outgoing_asymptotic(&g0, eta0, h, 0).unwrap();
    let lambda = out.support_radius();
    assert!(lambda > 1.6 && lambda < 2.0, "Λ = {lambda}");
    assert!((out.t_star() - ((6.0 * lambda).sqrt() + 1.0)).abs() < 1e-15);
    let t = 10.0;
    let below = t * (t * t - 6.0 * lambda) / 6.0;
    assert_eq!(out.eval(below - 1e-6, t).unwrap(), C64::new(0.0, 0.0));
    assert_eq!(out.eval(0.0, t).unwrap(), C64::new(0.0, 0.0));
    assert!(out.eval(below + 0.5, t).unwrap().norm() > 0.0);
    let field = out.sample(Grid1D::new(200.0, 40000).unwrap(), t).unwrap();
    let g_norm = quadrature::l2_norm(&g0, h);
    assert!((field.norm() - g_norm).abs() < 1e-6, "{} vs {g_norm}", field.norm());
    assert!(matches!(out.eval(100.0, out.min_time() - 0.01), Err(Error::Domain(_))));
    assert!(matches!(outgoing_asymptotic(&g0, eta0, h, 5), Err(Error::OrderTooHigh { .. })));
}

#[test]
fn outgoing_residual_steepens_with_order() {
    let h = 0.005;
    let (eta0, g0) = bump_amplitude(h);
    let times = [8.0, 12.0, 16.0, 24.0, 32.0];
    let ln_t: Vec<f64> = times.iter().map(|t: &f64| t.ln()).collect();
    let slopes: Vec<f64> = (0..=2)
        .map(|order| {
            let out = outgoing_asymptotic(&g0, eta0, h, order).unwrap();
            let r: Vec<f64> = times.iter().map(|&t| out.residual_norm(t).unwrap().ln()).collect();
            quadrature::linear_slope(&ln_t, &r)
        })
        .collect();
    for w in slopes.windows(2) {
        assert!((w[0] - w[1] - 1.0).abs() < 0.2, "slopes {slopes:?}");
    }
}

#[test]
fn parabolic_frame_is_free_on_a_run() {
    let mode = airy::mode(1).unwrap();
    let t_end = 1.0;
    let params = RunParams {
        order: 2,
        t_start: -3.0,
        t_end,
        dt: 0.005,
        grid: Grid1D::with_spacing(RunParams::auto_x_max(t_end), RunParams::max_dx(-3.0, t_end)).unwrap(),
        snapshot_times: vec![0.995, 1.0],
        tail_tol: DEFAULT_TAIL_TOL,
    };
    let mut out = evolve::run(&mode, &params).unwrap();
    let mut last = evolve::Propagator::new(out.snapshots.last().unwrap(), params.dt, evolve::Potential::Inflection).unwrap();
    last.advance().unwrap();
    out.snapshots.push(last.field());
    let p: Vec<ParabolicFrame> = out.snapshots.iter().map(to_parabolic_frame).collect();
    let dx = params.grid.dx();
    let (mut sum, mut scale) = (0.0, 0.0);
    let zeta_lo = p[2].zeta0() + 0.5;
    for i in 0..((params.grid.x_max() - 1.0) / dx) as usize {
        let z = zeta_lo + i as f64 * dx;
        let phi_t = (p[2].sample(z) - p[0].sample(z)) / (2.0 * params.dt);
        let lap = (p[1].sample(z + dx) - p[1].sample(z) * 2.0 + p[1].sample(z - dx)) / (dx * dx);
        sum += (C64::i() * phi_t + lap * 0.5).norm_sqr();
        scale += phi_t.norm_sqr();
    }
    let rel = (sum / scale).sqrt();
    assert!(rel < 1e-2, "relative free residual {rel}");
}
