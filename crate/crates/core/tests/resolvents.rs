use mindisp_core::resolvent::MAX_LINEAR_DIM;
use mindisp_core::sampling::{seeded, uniform_vector};
use mindisp_core::{
    block_resolvent, check_firm_nonexpansive, resolvent, shift_operator, verify_resolvent_shift, BlockOperatorSpec,
    MonotoneSpec, OperatorExpr, ProductPoint, Vector,
};

fn v(c: &[f64]) -> Vector<f64> {
    Vector::new(c.to_vec()).unwrap()
}

fn specs(dim: usize) -> Vec<MonotoneSpec<f64>> {
    let mut rng = seeded(dim as u64);
    // Bᵀ B + K with K skew-symmetric is monotone but not symmetric
    let b: Vec<Vec<f64>> = (0..dim)
        .map(|_| uniform_vector::<f64>(&mut rng, dim, 1.0).into_coords())
        .collect();
    let k: Vec<Vec<f64>> = (0..dim)
        .map(|_| uniform_vector::<f64>(&mut rng, dim, 1.0).into_coords())
        .collect();
    let matrix = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).map(|r| b[r][i] * b[r][j]).sum::<f64>() + k[i][j] - k[j][i])
                .collect()
        })
        .collect();
    let base = vec![
        MonotoneSpec::constant_map(uniform_vector(&mut rng, dim, 2.0)),
        MonotoneSpec::psd_linear(matrix).unwrap(),
        MonotoneSpec::subdiff_abs(0.8, dim).unwrap(),
        MonotoneSpec::normal_cone_box(Vector::constant(dim, -1.0), Vector::constant(dim, 1.5)).unwrap(),
    ];
    let nested = base[2]
        .shifted(Vector::constant(dim, 0.5))
        .unwrap()
        .shifted(Vector::constant(dim, -1.25))
        .unwrap();
    let mut all = base;
    all.push(nested);
    all
}

#[test]
fn shift_identity_holds_for_every_kind() {
    for dim in [1, 2, 4] {
        for (i, spec) in specs(dim).iter().enumerate() {
            let mut rng = seeded(100 + i as u64);
            for s in 0..10 {
                let shift: Vector<f64> = uniform_vector(&mut rng, dim, 3.0);
                let r = verify_resolvent_shift(spec, &shift, 100, s).unwrap();
                assert_eq!(r.samples, 100);
                assert!(r.max_abs_error <= 1e-10, "{spec:?} shift {shift:?}: {r:?}");
                assert!(r.max_abs_error_production <= 1e-10);
            }
        }
    }
}

#[test]
fn resolvents_are_firmly_nonexpansive() {
    for dim in [1, 3] {
        for (i, spec) in specs(dim).iter().enumerate() {
            let j = resolvent(spec).unwrap();
            let r = check_firm_nonexpansive(&j, 10_000, i as u64, 10.0).unwrap();
            assert!(r.passed(), "{spec:?}: {r:?}");
        }
    }
}

#[test]
fn psd_resolvent_reproduces_the_generator() {
    for dim in [1, 3, 8] {
        let spec = &specs(dim)[1];
        let mindisp_core::MonotoneKind::PsdLinear { matrix } = spec.kind() else {
            unreachable!()
        };
        let j = resolvent(spec).unwrap();
        let mut rng = seeded(7);
        for _ in 0..200 {
            let x: Vector<f64> = uniform_vector(&mut rng, dim, 10.0);
            let y = j.apply(&x).unwrap();
            let my: Vec<f64> = matrix
                .iter()
                .map(|row| row.iter().zip(y.coords()).map(|(a, b)| a * b).sum())
                .collect();
            let diff = (&x - &y).distance(&Vector::new(my).unwrap());
            assert!(diff <= 1e-10, "d={dim}: {diff}");
        }
    }
}

#[test]
fn block_resolvent_matches_components_on_the_diagonal() {
    let dim = 3;
    let blocks = specs(dim);
    let m = blocks.len();
    let block = BlockOperatorSpec::new(blocks.clone()).unwrap();
    assert_eq!(block.total_dim(), m * dim);
    let big = block_resolvent(&block).unwrap();
    let mut rng = seeded(9);
    for _ in 0..200 {
        let x: Vector<f64> = uniform_vector(&mut rng, dim, 5.0);
        let diag = ProductPoint::diagonal(&x, m).concatenated();
        let out = ProductPoint::from_concatenated(&big.apply(&diag).unwrap(), m).unwrap();
        for (part, spec) in out.parts().iter().zip(&blocks) {
            let expected = resolvent(spec).unwrap().apply(&x).unwrap();
            assert!(part.distance(&expected) <= 1e-12);
        }
    }
    assert!(check_firm_nonexpansive(&big, 1000, 1, 5.0).unwrap().passed());
}

#[test]
fn worked_examples() {
    let a = v(&[0.4, -2.0]);
    assert_eq!(
        resolvent(&MonotoneSpec::constant_map(a.clone()))
            .unwrap()
            .translation_offset(),
        Some(a.clone())
    );
    let j = resolvent(&MonotoneSpec::constant_map(a.clone())).unwrap();
    assert_eq!(
        j.apply(&v(&[1.0, 1.0])).unwrap(),
        OperatorExpr::translation(a.clone()).apply(&v(&[1.0, 1.0])).unwrap()
    );

    let id = MonotoneSpec::psd_linear(vec![vec![1.0]]).unwrap();
    assert_eq!(resolvent(&id).unwrap().apply(&v(&[4.0])).unwrap(), v(&[2.0]));

    let cone = MonotoneSpec::normal_cone_box(v(&[0.0]), v(&[1.0])).unwrap();
    assert_eq!(resolvent(&cone).unwrap().apply(&v(&[2.5])).unwrap(), v(&[1.0]));

    // J_Ã = v + J_A: 2 + soft(2, 1) = 3
    let abs = MonotoneSpec::subdiff_abs(1.0, 1).unwrap();
    let shifted = shift_operator(&abs, v(&[2.0])).unwrap();
    assert_eq!(resolvent(&shifted).unwrap().apply(&v(&[2.0])).unwrap(), v(&[3.0]));

    let pair = BlockOperatorSpec::new(vec![MonotoneSpec::constant_map(v(&[1.0])), id]).unwrap();
    assert_eq!(
        block_resolvent(&pair).unwrap().apply(&v(&[0.0, 4.0])).unwrap(),
        v(&[-1.0, 2.0])
    );

    let twin = BlockOperatorSpec::new(vec![MonotoneSpec::constant_map(a.clone()); 2]).unwrap();
    let tb = block_resolvent(&twin).unwrap();
    let x = v(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(
        tb.apply(&x).unwrap(),
        OperatorExpr::translation(Vector::concat([&a, &a])).apply(&x).unwrap()
    );
}

#[test]
fn rejects_non_monotone_and_oversized_matrices() {
    assert!(MonotoneSpec::psd_linear(vec![vec![-1.0]]).is_err());
    assert!(MonotoneSpec::psd_linear(vec![vec![1.0, 3.0], vec![-0.0, 1.0]]).is_err());
    let n = MAX_LINEAR_DIM + 1;
    let eye: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    assert!(MonotoneSpec::psd_linear(eye).is_err());
}
