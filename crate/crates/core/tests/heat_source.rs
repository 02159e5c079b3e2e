use opforge_core::heat_source::{
    hybrid_source, line_source, point_source, uses_line_source, ParamBounds, ProcessParams, ScanPath,
};
use proptest::prelude::*;

fn nominal_path() -> ScanPath {
    ScanPath::along_y([0.0, 0.0, 0.0], ProcessParams::NOMINAL.speed).unwrap()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn vanishing_step_recovers_point_source() {
    let pp = ProcessParams::NOMINAL;
    let path = nominal_path();
    for (x, t0) in [([0.0, 0.5, 0.0], 40.0), ([0.05, 0.3, -0.05], 20.0), ([0.0, 1.0, -0.1], 100.0)] {
        let line = line_source(&x, t0, 1e-9, &pp, &path).unwrap();
        let point = point_source(&x, t0, &pp, &path);
        assert!(rel(line, point) <= 1e-6, "{line} vs {point}");
    }
}

#[test]
fn gauss_legendre_matches_adaptive_simpson() {
    let pp = ProcessParams::NOMINAL;
    let path = nominal_path();
    let dt = 2.0 * pp.radius / pp.speed;
    let t0 = 30.0;
    let points = [
        path.position(t0),
        path.position(t0 + 0.5 * dt),
        path.position(t0 + dt),
        [0.1, path.position(t0 + 0.3 * dt)[1], -0.05],
    ];
    for x in points {
        let gl = line_source(&x, t0, dt, &pp, &path).unwrap();
        let f = |t: f64| point_source(&x, t, &pp, &path);
        let oracle = adaptive_simpson(&f, t0, t0 + dt, 1e-12 * f(t0 + 0.5 * dt)) / dt;
        assert!(rel(gl, oracle) <= 1e-8, "x={x:?}: {gl} vs {oracle}");
    }
}

#[test]
fn hybrid_branches_follow_dwell_rule() {
    let pp = ProcessParams::NOMINAL;
    let path = nominal_path();
    let dwell = pp.radius / pp.speed;
    let x = [0.0, 0.4, 0.0];
    let t0 = 25.0;

    let short = 0.5 * dwell;
    assert!(!uses_line_source(short, pp.radius, pp.speed));
    let h = hybrid_source(&x, t0, short, &pp, &path).unwrap();
    assert_eq!(h, point_source(&x, t0 + 0.5 * short, &pp, &path));

    let long = 2.0 * dwell;
    assert!(uses_line_source(long, pp.radius, pp.speed));
    let h = hybrid_source(&x, t0, long, &pp, &path).unwrap();
    assert_eq!(h, line_source(&x, t0, long, &pp, &path).unwrap());
}

#[test]
fn hybrid_is_nearly_continuous_across_switch() {
    // Fixed point where the beam sits at the start of the step.
    let pp = ProcessParams::NOMINAL;
    let path = nominal_path();
    let dwell = pp.radius / pp.speed;
    let t0 = 40.0;
    let x = path.position(t0);
    let below = hybrid_source(&x, t0, dwell * (1.0 - 1e-9), &pp, &path).unwrap();
    let above = hybrid_source(&x, t0, dwell * (1.0 + 1e-9), &pp, &path).unwrap();
    assert!(rel(above, below) <= 0.05, "jump {}", rel(above, below));

    // The sweep itself is smooth on either side.
    let mut prev = hybrid_source(&x, t0, 0.8 * dwell, &pp, &path).unwrap();
    for i in 1..=40 {
        let dt = dwell * (0.8 + 0.01 * i as f64);
        let cur = hybrid_source(&x, t0, dt, &pp, &path).unwrap();
        assert!(rel(cur, prev) <= 0.05, "dt={dt}");
        prev = cur;
    }
}

#[test]
fn spatial_integral_matches_closed_form() {
    let pp = ProcessParams::NOMINAL;
    let path = nominal_path();
    let half = 3.0 * pp.radius;
    let n = 80;
    let h = 2.0 * half / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = |m: usize| -half + (m as f64 + 0.5) * h;
                total += point_source(&[c(i), c(j), c(k)], 0.0, &pp, &path);
            }
        }
    }
    total *= h * h * h;
    let exact = pp.scaling * pp.efficiency * pp.power * (std::f64::consts::PI / 2.0).sqrt();
    assert!(rel(total, exact) <= 0.01, "{total} vs {exact}");
}

#[test]
fn stationary_beam_line_average_equals_point() {
    let pp = ProcessParams::NOMINAL;
    let still = ScanPath::along_y([0.0, 0.0, 0.0], 0.0).unwrap();
    let x = [0.1, 0.05, -0.02];
    let line = line_source(&x, 3.0, 50.0, &pp, &still).unwrap();
    assert!(rel(line, point_source(&x, 3.0, &pp, &still)) <= 1e-14);
}

fn params() -> impl Strategy<Value = ProcessParams> {
    proptest::array::uniform5(0.0..=1.0f64).prop_map(|u| ParamBounds::TABLE.from_unit(&u))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn doubling_any_gain_doubles_output(
        pp in params(),
        x in proptest::array::uniform3(-0.5..0.5f64),
        t in 0.0..100.0f64,
        which in 0usize..3,
    ) {
        let path = ScanPath::along_y([0.0, 0.0, 0.0], pp.speed).unwrap();
        let mut scaled = pp;
        match which {
            0 => scaled.scaling *= 2.0,
            1 => scaled.efficiency *= 2.0,
            _ => scaled.power *= 2.0,
        }
        prop_assert_eq!(point_source(&x, t, &scaled, &path), 2.0 * point_source(&x, t, &pp, &path));
        let a = line_source(&x, t, 7.0, &scaled, &path).unwrap();
        let b = line_source(&x, t, 7.0, &pp, &path).unwrap();
        prop_assert_eq!(a, 2.0 * b);
    }

    #[test]
    fn point_source_decreases_with_distance(
        pp in params(),
        dir in proptest::array::uniform3(-1.0..1.0f64),
        d1 in 0.0..0.6f64,
        gap in 1e-3..0.3f64,
    ) {
        let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let path = ScanPath::along_y([0.0, 0.0, 0.0], pp.speed).unwrap();
        let at = |d: f64| point_source(&std::array::from_fn(|i| dir[i] / norm * d), 0.0, &pp, &path);
        let (near, far) = (at(d1), at(d1 + gap));
        prop_assert!(near >= 0.0 && far >= 0.0);
        prop_assert!(far < near || far == 0.0);
    }

    #[test]
    fn line_source_bounded_by_point_extremes(
        pp in params(),
        x in proptest::array::uniform3(-0.3..1.5f64),
        t0 in 0.0..50.0f64,
        dt in 1.0..200.0f64,
    ) {
        let path = ScanPath::along_y([0.0, 0.0, 0.0], pp.speed).unwrap();
        let line = line_source(&x, t0, dt, &pp, &path).unwrap();
        let samples: Vec<f64> = (0..=2000)
            .map(|i| point_source(&x, t0 + dt * i as f64 / 2000.0, &pp, &path))
            .collect();
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(0.0, f64::max);
        let slack = 1e-9 * hi;
        prop_assert!(line >= lo - slack && line <= hi + slack, "{} not in [{}, {}]", line, lo, hi);
    }
}
