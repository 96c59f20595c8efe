use mindisp_core::hyperbola::{in_hyperbola_epigraph, project_hyperbola_epigraph};
use mindisp_core::sampling::{seeded, uniform_vector};
use mindisp_core::Vector;

/// Dense-grid minimiser of the distance from `p` to the curve `y = 1/x`.
/// The branch `x ≥ 1` is gridded in `x`, the branch `x ≤ 1` in `y`, so the
/// grid spacing along the curve stays below the step on both.
fn grid_oracle(a: f64, b: f64) -> (f64, f64) {
    if in_hyperbola_epigraph(a, b) {
        return (a, b);
    }
    let dist = |s: f64, flip: bool| {
        let (x, y) = if flip { (1.0 / s, s) } else { (s, 1.0 / s) };
        (x - a).powi(2) + (y - b).powi(2)
    };
    let mut best = (f64::INFINITY, 1.0, false);
    for flip in [false, true] {
        let coarse = 0.01;
        let mut s_best = 1.0;
        let mut d_best = f64::INFINITY;
        for k in 0..=3000 {
            let s = 1.0 + k as f64 * coarse;
            let d = dist(s, flip);
            if d < d_best {
                (s_best, d_best) = (s, d);
            }
        }
        let fine = 1e-5;
        let lo = (s_best - 2.0 * coarse).max(1.0);
        let steps = (4.0 * coarse / fine) as usize;
        for k in 0..=steps {
            let s = lo + k as f64 * fine;
            let d = dist(s, flip);
            if d < best.0 {
                best = (d, s, flip);
            }
        }
    }
    let (_, s, flip) = best;
    if flip {
        (1.0 / s, s)
    } else {
        (s, 1.0 / s)
    }
}

#[test]
fn agrees_with_grid_oracle_on_seeded_points() {
    let mut rng = seeded(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p: Vector<f64> = uniform_vector(&mut rng, 2, 5.0);
        let q = project_hyperbola_epigraph(&p).unwrap();
        let (ox, oy) = grid_oracle(p[0], p[1]);
        let err = ((q[0] - ox).powi(2) + (q[1] - oy).powi(2)).sqrt();
        worst = worst.max(err);
        assert!(err <= 1e-4, "p = {p:?}: projection {q:?}, oracle ({ox}, {oy})");
    }
    assert!(worst <= 1e-4);
}

fn bisect(a: f64, b: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f = |x: f64| x.powi(4) - a * x.powi(3) + b * x - 1.0;
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn worked_examples() {
    let p = Vector::new(vec![1.0, 1.0]).unwrap();
    assert_eq!(project_hyperbola_epigraph(&p).unwrap(), p);

    let q = project_hyperbola_epigraph(&Vector::<f64>::new(vec![0.0, 0.0]).unwrap()).unwrap();
    let (gx, gy) = grid_oracle(0.0, 0.0);
    assert!((q[0] - 1.0).abs() <= 1e-12 && (q[1] - 1.0).abs() <= 1e-12);
    assert!((gx - 1.0).abs() <= 1e-4 && (gy - 1.0).abs() <= 1e-4);

    let root = bisect(2.0, 0.1, 2.0, 2.2);
    let q = project_hyperbola_epigraph(&Vector::new(vec![2.0, 0.1]).unwrap()).unwrap();
    assert!((q[0] - root).abs() <= 1e-12);
    assert!((q[1] - 1.0 / root).abs() <= 1e-12);
    let (gx, gy) = grid_oracle(2.0, 0.1);
    assert!((gx - root).abs() <= 1e-4 && (gy - 1.0 / root).abs() <= 1e-4);
}
