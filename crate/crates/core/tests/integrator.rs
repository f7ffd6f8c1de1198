use amfw_core::amfw::{
    amfw_step, integrate, rosenbrock_step, step_count, BoundaryCorrection, PdeOde, SplitOde, StepContext,
    Tableau,
};
use amfw_core::catalog::Problem1;
use amfw_core::grid::Grid;
use amfw_core::norms::global_error;
use amfw_core::problem::PdeProblem;
use amfw_core::space::{DirectionalOperator, SplitMode, SplitSystem};
use amfw_core::stability::eval_r;
use amfw_core::Result;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `y' = (z_1 + .. + z_d) y` with `y` complex, stored as `[re, im]`, `Δt = 1`.
struct SplitDahlquist {
    z: Vec<Complex64>,
}

struct DahlquistStep {
    shifts: Vec<Complex64>,
}

impl StepContext for DahlquistStep {
    fn fdot(&self, _term: usize) -> Option<&[f64]> {
        None
    }

    fn solve(&self, term: usize, rhs: &mut [f64]) -> Result<()> {
        if term > 0 {
            let y = Complex64::new(rhs[0], rhs[1]) / self.shifts[term - 1];
            rhs[0] = y.re;
            rhs[1] = y.im;
        }
        Ok(())
    }
}

impl SplitOde for SplitDahlquist {
    type Step = DahlquistStep;

    fn len(&self) -> usize {
        2
    }

    fn terms(&self) -> usize {
        self.z.len() + 1
    }

    fn rhs(&self, _t: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        let y = self.z.iter().sum::<Complex64>() * Complex64::new(v[0], v[1]);
        out[0] = y.re;
        out[1] = y.im;
        Ok(())
    }

    fn freeze(&self, _t: f64, _v: &[f64], theta_dt: f64) -> Result<DahlquistStep> {
        Ok(DahlquistStep {
            shifts: self.z.iter().map(|&z| 1.0 - theta_dt * z).collect(),
        })
    }
}

#[test]
fn one_step_on_split_dahlquist_is_the_stability_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for tab in [Tableau::amfw_hv(), Tableau::amfw_three_eighths(), Tableau::amfw_three_eighths_printed()] {
        for d in 1..=3 {
            for _ in 0..1000 {
                let z: Vec<Complex64> = (0..d)
                    .map(|_| Complex64::from_polar(rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU)))
                    .collect();
                let step = amfw_step(&SplitDahlquist { z: z.clone() }, &tab, 0.0, &[1.0, 0.0], 1.0).unwrap();
                let r = eval_r(&tab, &z).unwrap();
                let got = Complex64::new(step[0], step[1]);
                assert!((got - r).norm() <= 1e-13 * r.norm().max(1.0), "{} d={d}: {got} vs {r}", tab.name());
            }
        }
    }
}

/// `u_t = a(x, t) u_xx + b(x, t) u_x` on `(0, 1)` with time-dependent Dirichlet data.
struct RandomLinear {
    a: [f64; 3],
    b: [f64; 3],
    beta: [f64; 4],
}

impl RandomLinear {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            a: [rng.gen_range(0.5..2.0), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)],
            b: [rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            beta: [(); 4].map(|_| rng.gen_range(-1.0..1.0)),
        }
    }
}

impl PdeProblem for RandomLinear {
    fn name(&self) -> String {
        "random-linear".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn diffusion(&self, _dir: usize, x: &[f64], t: f64) -> f64 {
        self.a[0] + self.a[1] * x[0] + self.a[2] * t
    }

    fn advection(&self, _dir: usize, x: &[f64], t: f64) -> f64 {
        self.b[0] + self.b[1] * x[0] * x[0] + self.b[2] * t
    }

    fn has_reaction(&self) -> bool {
        false
    }

    fn reaction(&self, _x: &[f64], _t: f64, _u: f64) -> f64 {
        0.0
    }

    fn boundary(&self, x: &[f64], t: f64) -> f64 {
        let c = &self.beta;
        (c[0] + c[1] * x[0]) * (1.0 + c[2] * t + c[3] * t * t)
    }

    fn initial(&self, x: &[f64]) -> f64 {
        (std::f64::consts::PI * x[0]).sin() + self.boundary(x, 0.0)
    }
}

fn dense_operator(op: &DirectionalOperator, n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        for (i, v) in op.apply(&e).into_iter().enumerate() {
            w[(i, k)] = v;
        }
    }
    w
}

#[test]
fn one_dimensional_step_reduces_to_rosenbrock() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..20 {
        let pb = RandomLinear::random(&mut rng);
        let n = rng.gen_range(3..=31);
        let grid = Grid::interior(&[n]).unwrap();
        let ode = PdeOde::new(SplitSystem::new(&pb, grid, SplitMode::Plain).unwrap());
        let sys = ode.system();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (t, dt) = (rng.gen_range(0.0..1.0), rng.gen_range(1e-3..0.2));
        for tab in [Tableau::amfw_hv(), Tableau::amfw_three_eighths()] {
            let split = amfw_step(&ode, &tab, t, &v, dt).unwrap();
            let w = dense_operator(&sys.operator(0, t).unwrap(), n);
            let fdot = sys.time_derivative(1, t, &v).unwrap().unwrap_or(vec![0.0; n]);
            let dense = rosenbrock_step(&tab, t, &v, dt, &w, &fdot, |s, y, out| sys.rhs(s, y, out)).unwrap();
            let scale = dense.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (p, q) in split.iter().zip(&dense) {
                assert!((p - q).abs() <= 1e-12 * scale, "case {case}, {}: {p} vs {q}", tab.name());
            }
        }
    }
}

#[test]
fn zero_right_hand_side_leaves_the_state_unchanged() {
    let ode = SplitDahlquist { z: vec![Complex64::new(0.0, 0.0); 2] };
    let v = [0.3, -1.2];
    for tab in [Tableau::amfw_hv(), Tableau::amfw_three_eighths()] {
        assert_eq!(amfw_step(&ode, &tab, 0.0, &v, 0.5).unwrap(), v.to_vec());
        let w = DMatrix::zeros(2, 2);
        let out = rosenbrock_step(&tab, 0.0, &v, 0.5, &w, &[0.0; 2], |_, _, o| {
            o.iter_mut().for_each(|x| *x = 0.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(out, v.to_vec());
    }
}

#[test]
fn scalar_rosenbrock_step_is_the_stability_function() {
    for tab in [Tableau::amfw_hv(), Tableau::amfw_three_eighths()] {
        for z in [-50.0, -3.0, -0.5, 0.25, 1.0] {
            let lambda = z / 0.1;
            let w = DMatrix::from_element(1, 1, lambda);
            let y = rosenbrock_step(&tab, 0.0, &[1.0], 0.1, &w, &[0.0], |_, y, o| {
                o[0] = lambda * y[0];
                Ok(())
            })
            .unwrap()[0];
            let r = eval_r(&tab, &[Complex64::new(z, 0.0)]).unwrap().re;
            assert!((y - r).abs() < 1e-13 * r.abs().max(1.0));
        }
    }
}

fn exp_growth(tab: &Tableau, dt: f64, steps: usize) -> f64 {
    let w = DMatrix::from_element(1, 1, 1.0);
    let mut y = vec![1.0];
    for k in 0..steps {
        y = rosenbrock_step(tab, k as f64 * dt, &y, dt, &w, &[0.0], |_, y, o| {
            o[0] = y[0];
            Ok(())
        })
        .unwrap();
    }
    y[0]
}

#[test]
fn exponential_growth_to_third_order() {
    let err = (exp_growth(&Tableau::amfw_hv(), 1e-3, 1000) - std::f64::consts::E).abs();
    assert!(err <= 5e-10, "error {err}");
}

/// Forced pendulum `y1' = y2`, `y2' = -sin y1 + cos(2t) / 2`.
fn pendulum(t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
    out[0] = y[1];
    out[1] = -y[0].sin() + 0.5 * (2.0 * t).cos();
    Ok(())
}

fn pendulum_run(tab: &Tableau, steps: usize) -> Vec<f64> {
    let dt = 1.0 / steps as f64;
    let mut y = vec![1.0, 0.0];
    for k in 0..steps {
        let t = k as f64 * dt;
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -f64::cos(y[0]), 0.0]);
        let fdot = [0.0, -(2.0 * t).sin()];
        y = rosenbrock_step(tab, t, &y, dt, &w, &fdot, pendulum).unwrap();
    }
    y
}

fn rk4_reference() -> Vec<f64> {
    let steps = 20000;
    let h = 1.0 / steps as f64;
    let mut y = vec![1.0, 0.0];
    let f = |t: f64, y: &[f64]| {
        let mut o = vec![0.0; 2];
        pendulum(t, y, &mut o).unwrap();
        o
    };
    let axpy = |y: &[f64], a: f64, k: &[f64]| y.iter().zip(k).map(|(p, q)| p + a * q).collect::<Vec<_>>();
    for n in 0..steps {
        let t = n as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k1));
        let k3 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k2));
        let k4 = f(t + h, &axpy(&y, h, &k3));
        y = (0..2).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    }
    y
}

#[test]
fn ode_orders_with_exact_jacobian() {
    let reference = rk4_reference();
    for (tab, order) in [(Tableau::amfw_hv(), 3.0), (Tableau::amfw_three_eighths(), 4.0)] {
        let errs: Vec<f64> = [10usize, 20, 40, 80]
            .iter()
            .map(|&s| {
                let y = pendulum_run(&tab, s);
                (0..2).map(|i| (y[i] - reference[i]).abs()).fold(0.0, f64::max)
            })
            .collect();
        for k in 2..errs.len() {
            let p = (errs[k - 1] / errs[k]).log2();
            assert!((p - order).abs() < 0.1, "{}: observed order {p}", tab.name());
        }
    }
}

#[test]
fn printed_three_eighths_set_is_first_order() {
    let reference = rk4_reference();
    let tab = Tableau::amfw_three_eighths_printed();
    let err = |s| {
        let y = pendulum_run(&tab, s);
        (0..2).map(|i| (y[i] - reference[i]).abs()).fold(0.0, f64::max)
    };
    let p = (err(40) / err(80)).log2();
    assert!((p - 1.0).abs() < 0.2, "observed order {p}");
}

#[test]
fn consistency_of_registered_methods() {
    for tab in [Tableau::amfw_hv(), Tableau::amfw_three_eighths(), Tableau::amfw_three_eighths_printed()] {
        let s: f64 = tab.b().iter().zip(tab.rho()).map(|(b, r)| b * r).sum();
        assert!((s - 1.0).abs() < 1e-15, "{}", tab.name());
    }
    let hv = Tableau::amfw_hv();
    assert!((hv.rho()[0] - 1.0).abs() < 1e-15 && (hv.rho()[1] + 1.0 / 3.0).abs() < 1e-15);
    assert!((hv.c()[1] - 2.0 / 3.0).abs() < 1e-15);
    let printed = Tableau::amfw_three_eighths_printed();
    let (rho, c) = ([1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0], [0.0, 4.0 / 9.0, -2.0 / 3.0, 2.0]);
    for i in 0..4 {
        assert!((printed.rho()[i] - rho[i]).abs() < 1e-15);
        assert!((printed.c()[i] - c[i]).abs() < 1e-15);
    }
}

/// Problem 1 with the time derivatives of the boundary data hidden.
struct NoDerivatives(Problem1);

impl PdeProblem for NoDerivatives {
    fn name(&self) -> String {
        "problem1-fd".into()
    }

    fn dim(&self) -> usize {
        3
    }

    fn coefficients_time_independent(&self) -> bool {
        true
    }

    fn coefficients_space_independent(&self) -> bool {
        true
    }

    fn reaction(&self, x: &[f64], t: f64, u: f64) -> f64 {
        self.0.reaction(x, t, u)
    }

    fn reaction_du(&self, x: &[f64], t: f64, u: f64) -> Option<f64> {
        self.0.reaction_du(x, t, u)
    }

    fn boundary(&self, x: &[f64], t: f64) -> f64 {
        self.0.boundary(x, t)
    }

    fn initial(&self, x: &[f64]) -> f64 {
        self.0.initial(x)
    }
}

#[test]
fn extended_reaction_time_derivative_matches_finite_differences() {
    let grid = Grid::closed(&[5, 5, 5]).unwrap();
    let pb = Problem1::new(1.0);
    let fd = NoDerivatives(pb);
    let a = SplitSystem::new(&pb, grid, SplitMode::Extended).unwrap();
    let b = SplitSystem::new(&fd, grid, SplitMode::Extended).unwrap();
    let v = a.initial_state();
    let t = 0.4;
    let exact = a.time_derivative(0, t, &v).unwrap().unwrap();
    let approx = b.time_derivative(0, t, &v).unwrap().unwrap();
    let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for &off in a.boundary_offsets() {
        assert!((exact[off] - approx[off]).abs() <= 1e-9 * scale);
    }
    // β ∝ e^t, so the boundary rows of Ḟ_0 equal those of F_0
    let mut f0 = vec![0.0; grid.len()];
    a.term(0, t, &v, &mut f0).unwrap();
    for &off in a.boundary_offsets() {
        assert!((exact[off] - f0[off]).abs() <= 1e-12 * scale);
    }
}

/// `u_t = (1 + t) u_xx` with zero boundary data.
struct GrowingDiffusion {
    analytic: bool,
}

impl PdeProblem for GrowingDiffusion {
    fn name(&self) -> String {
        "growing".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn diffusion(&self, _dir: usize, _x: &[f64], t: f64) -> f64 {
        1.0 + t
    }

    fn diffusion_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
        self.analytic.then_some(1.0)
    }

    fn advection_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
        self.analytic.then_some(0.0)
    }

    fn coefficients_space_independent(&self) -> bool {
        true
    }

    fn has_reaction(&self) -> bool {
        false
    }

    fn reaction(&self, _x: &[f64], _t: f64, _u: f64) -> f64 {
        0.0
    }

    fn boundary(&self, _x: &[f64], _t: f64) -> f64 {
        0.0
    }

    fn homogeneous_boundary(&self) -> bool {
        true
    }

    fn initial(&self, x: &[f64]) -> f64 {
        x[0] * (1.0 - x[0])
    }
}

#[test]
fn linear_in_time_coefficient_derivative() {
    let grid = Grid::interior(&[15]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<f64> = (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let expect = DirectionalOperator::second_derivative(&grid, 0).unwrap().apply(&v);
    let scale = expect.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for analytic in [true, false] {
        let pb = GrowingDiffusion { analytic };
        let sys = SplitSystem::new(&pb, grid, SplitMode::Plain).unwrap();
        let got = sys.time_derivative(1, 0.3, &v).unwrap().unwrap();
        let tol = if analytic { 1e-12 } else { 1e-9 };
        for (p, q) in got.iter().zip(&expect) {
            assert!((p - q).abs() <= tol * scale, "analytic={analytic}: {p} vs {q}");
        }
    }
}

#[test]
fn autonomous_problems_have_vanishing_time_derivatives() {
    let pb = Problem1::new(0.0);
    struct Steady;
    impl PdeProblem for Steady {
        fn name(&self) -> String {
            "steady".into()
        }
        fn dim(&self) -> usize {
            2
        }
        fn coefficients_time_independent(&self) -> bool {
            true
        }
        fn diffusion_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
            Some(0.0)
        }
        fn advection_dt(&self, _dir: usize, _x: &[f64], _t: f64) -> Option<f64> {
            Some(0.0)
        }
        fn reaction(&self, _x: &[f64], _t: f64, u: f64) -> f64 {
            u * (1.0 - u)
        }
        fn reaction_dt(&self, _x: &[f64], _t: f64, _u: f64) -> Option<f64> {
            Some(0.0)
        }
        fn boundary(&self, x: &[f64], _t: f64) -> f64 {
            x[0] + x[1]
        }
        fn boundary_dt(&self, _x: &[f64], _t: f64) -> Option<f64> {
            Some(0.0)
        }
        fn initial(&self, x: &[f64]) -> f64 {
            x[0] + x[1]
        }
    }
    let grid = Grid::uniform(2, 6, false).unwrap();
    let sys = SplitSystem::new(&Steady, grid, SplitMode::Plain).unwrap();
    let v = sys.initial_state();
    for term in 0..3 {
        if let Some(fd) = sys.time_derivative(term, 0.5, &v).unwrap() {
            assert!(fd.iter().all(|x| *x == 0.0));
        }
    }
    // Problem 1 with C = 0 only has a time-dependent source
    let g = Grid::uniform(3, 4, false).unwrap();
    let sys = SplitSystem::new(&pb, g, SplitMode::Plain).unwrap();
    let v = sys.initial_state();
    for term in 1..4 {
        assert!(sys.time_derivative(term, 0.5, &v).unwrap().is_none());
    }
}

#[test]
fn extension_projects_every_step() {
    let pb = Problem1::new(1.0);
    let grid = Grid::closed(&[7, 7, 7]).unwrap();
    let ode = PdeOde::new(SplitSystem::new(&pb, grid, SplitMode::Extended).unwrap());
    let tab = Tableau::amfw_hv();
    let dt = 0.125;
    let mut v = ode.system().initial_state();
    for n in 0..8 {
        let t = n as f64 * dt;
        for &b in ode.system().boundary_offsets() {
            let x = grid.point(b);
            assert_eq!(v[b], pb.boundary(&x[..3], t));
        }
        v = amfw_step(&ode, &tab, t, &v, dt).unwrap();
    }
}

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want
}

#[test]
fn problem1_reference_errors() {
    let hv = Tableau::amfw_hv();
    let run = |c: f64, m: usize, correction| {
        let pb = Problem1::new(c);
        let sol = integrate(&pb, &[m - 1; 3], &hv, correction, 1.0 / m as f64, 1.0).unwrap();
        global_error(&pb, &sol.field, 1.0).unwrap()
    };
    // the tables report root-mean-square values over interior points
    let rms = |ge2: f64, m: usize| ge2 * (m as f64 / (m - 1) as f64).powf(1.5);

    let (l2, max) = run(0.0, 16, BoundaryCorrection::None);
    assert!(close(rms(l2, 16), 9.7e-3, 0.15), "{l2}");
    assert!(close(max, 2.0e-2, 0.15), "{max}");

    let (_, max) = run(1.0, 32, BoundaryCorrection::None);
    assert!(close(max, 5.9e-2, 0.15), "{max}");

    let (l2, max) = run(1.0, 32, BoundaryCorrection::OperatorExtension);
    assert!(close(rms(l2, 32), 1.4e-3, 0.15), "{l2}");
    assert!(close(max, 2.9e-3, 0.15), "{max}");
}

#[test]
fn step_count_needs_whole_steps() {
    assert_eq!(step_count(1.0, 0.125).unwrap(), 8);
    assert!(step_count(1.0, 0.3).is_err());
    assert!(step_count(1.0, 0.0).is_err());
    let pb = Problem1::new(0.0);
    assert!(integrate(&pb, &[3, 3, 3], &Tableau::amfw_hv(), BoundaryCorrection::None, 0.3, 1.0).is_err());
}
