//! Composite trapezoid quadrature and the inner products of the state and
//! source spaces.

use ndarray::{ArrayView1, Zip};

use crate::error::{Error, Result};
use crate::field::{BoundaryField, SourcePair};

/// Composite trapezoid rule for samples spaced `h` apart.
pub fn trapezoid(values: ArrayView1<'_, f64>, h: f64) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "trapezoid rule needs at least 2 samples, got {n}"
        )));
    }
    let inner: f64 = values.slice(ndarray::s![1..n - 1]).sum();
    Ok(h * (0.5 * (values[0] + values[n - 1]) + inner))
}

/// Trapezoid rule over a time history sampled with step `dt`.
pub fn trapezoid_time(g: ArrayView1<'_, f64>, dt: f64) -> Result<f64> {
    trapezoid(g, dt)
}

/// `(u, v)` in `L^2(0,l)` (trapezoid, no boundary terms).
pub fn inner_l2(u: &BoundaryField, v: &BoundaryField) -> Result<f64> {
    check_grids(u, v)?;
    let dx = u.grid().dx();
    let n = u.grid().cells();
    let (a, b) = (u.values(), v.values());
    let mut acc = 0.5 * (a[0] * b[0] + a[n] * b[n]);
    for i in 1..n {
        acc += a[i] * b[i];
    }
    Ok(dx * acc)
}

pub fn norm_l2(u: &BoundaryField) -> f64 {
    inner_l2(u, u).expect("same grid").sqrt()
}

/// `<(y,a,b),(z,c,d)> = (y,z)_{L^2(0,l)} + ac + bd`, with the traces taken as
/// the endpoint samples.
pub fn inner_l2b(u: &BoundaryField, v: &BoundaryField) -> Result<f64> {
    Ok(inner_l2(u, v)? + u.left() * v.left() + u.right() * v.right())
}

pub fn norm_l2b(u: &BoundaryField) -> f64 {
    inner_l2b(u, u).expect("same grid").sqrt()
}

/// `(F1,F2)_{L^2((0,T)x(0,l))} + (G1,G2)_{L^2(0,T)}` with tensor-product
/// trapezoid weights.
pub fn inner_l2t(w1: &SourcePair, w2: &SourcePair) -> Result<f64> {
    if w1.mesh() != w2.mesh() {
        return Err(Error::shape(
            "source inner product",
            format!("{:?}", w1.mesh()),
            format!("{:?}", w2.mesh()),
        ));
    }
    let mesh = w1.mesh();
    let (dt, dx) = (mesh.time.dt(), mesh.space.dx());
    let (nt, nx) = (mesh.time.steps(), mesh.space.cells());
    let weight = |k: usize, last: usize| if k == 0 || k == last { 0.5 } else { 1.0 };

    let mut interior = 0.0;
    for (n, (r1, r2)) in w1.interior().outer_iter().zip(w2.interior().outer_iter()).enumerate() {
        let mut row = 0.0;
        Zip::indexed(&r1)
            .and(&r2)
            .for_each(|i, &a, &b| row += weight(i, nx) * a * b);
        interior += weight(n, nt) * row;
    }
    let mut boundary = 0.0;
    Zip::indexed(&w1.boundary())
        .and(&w2.boundary())
        .for_each(|n, &a, &b| boundary += weight(n, nt) * a * b);
    Ok(dt * dx * interior + dt * boundary)
}

pub fn norm_l2t(w: &SourcePair) -> f64 {
    inner_l2t(w, w).expect("same mesh").sqrt()
}

fn check_grids(u: &BoundaryField, v: &BoundaryField) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::shape(
            "state inner product",
            format!("{:?}", u.grid()),
            format!("{:?}", v.grid()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Mesh, SpaceGrid};
    use ndarray::{array, Array1};
    use proptest::prelude::*;

    fn grid(n: usize) -> SpaceGrid {
        SpaceGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn trapezoid_exact_for_affine_data() {
        let dt = 2.0 / 50.0;
        assert_eq!(trapezoid_time(Array1::zeros(51).view(), dt).unwrap(), 0.0);
        let ones = Array1::from_elem(51, 1.0);
        assert!((trapezoid_time(ones.view(), dt).unwrap() - 2.0).abs() < 1e-14);
        let t = Array1::from_shape_fn(51, |n| n as f64 * dt);
        assert!((trapezoid_time(t.view(), dt).unwrap() - 2.0).abs() < 1e-14);
        assert!(trapezoid(array![1.0].view(), 1.0).is_err());
    }

    #[test]
    fn two_node_hand_evaluation() {
        // one cell on (0,1) with u = v = 1: trapezoid 1 plus traces 1 + 1
        let ones = array![1.0, 1.0];
        let interior = trapezoid((&ones * &ones).view(), 1.0).unwrap();
        assert_eq!(interior + ones[0] * ones[0] + ones[1] * ones[1], 3.0);
    }

    #[test]
    fn constant_one_has_squared_norm_three() {
        for n in [4, 5, 17, 100, 1000] {
            let one = BoundaryField::constant(grid(n), 1.0);
            assert!((inner_l2b(&one, &one).unwrap() - 3.0).abs() < 1e-12);
        }
        let zero = BoundaryField::zeros(grid(4));
        assert_eq!(inner_l2b(&zero, &zero).unwrap(), 0.0);
    }

    #[test]
    fn constant_source_integrates_to_area() {
        let mesh = Mesh::uniform(1.0, 20, 2.0, 0.9).unwrap();
        let w = SourcePair::from_fn(mesh, |_, _| 1.0, |_| 0.0);
        assert!((inner_l2t(&w, &w).unwrap() - 2.0).abs() < 1e-12);
        let z = SourcePair::zeros(mesh);
        assert_eq!(inner_l2t(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn second_order_convergence_for_smooth_integrands() {
        // integral of sin(x) e^x on (0,1) plus traces sin0 e^0, sin1 e^1
        let exact = 0.5 * (1.0_f64.exp() * (1.0_f64.sin() - 1.0_f64.cos()) + 1.0) + 1.0_f64.sin() * 1.0_f64.exp();
        let err = |n| {
            let u = BoundaryField::from_fn(grid(n), f64::sin);
            let v = BoundaryField::from_fn(grid(n), f64::exp);
            (inner_l2b(&u, &v).unwrap() - exact).abs()
        };
        let (e1, e2, e3) = (err(20), err(40), err(80));
        assert!((e1 / e2).log2() > 1.95 && (e2 / e3).log2() > 1.95);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let u = BoundaryField::zeros(grid(4));
        let v = BoundaryField::zeros(grid(5));
        assert!(matches!(inner_l2b(&u, &v), Err(Error::Shape { .. })));
    }

    fn field_strategy(n: usize) -> impl Strategy<Value = BoundaryField> {
        prop::collection::vec(-10.0..10.0f64, n + 1)
            .prop_map(move |v| BoundaryField::new(grid(n), Array1::from(v)).unwrap())
    }

    fn source_strategy() -> impl Strategy<Value = SourcePair> {
        let mesh = Mesh::uniform(1.0, 6, 1.0, 0.9).unwrap();
        let (nt1, nx1) = mesh.shape();
        (
            prop::collection::vec(-5.0..5.0f64, nt1 * nx1),
            prop::collection::vec(-5.0..5.0f64, nt1),
        )
            .prop_map(move |(f, g)| {
                SourcePair::new(
                    mesh,
                    ndarray::Array2::from_shape_vec((nt1, nx1), f).unwrap(),
                    Array1::from(g),
                )
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn state_inner_product_is_symmetric_bilinear(u in field_strategy(9), v in field_strategy(9), w in field_strategy(9), a in -3.0..3.0f64) {
            let uv = inner_l2b(&u, &v).unwrap();
            prop_assert_eq!(uv, inner_l2b(&v, &u).unwrap());
            let lhs = inner_l2b(&(&u.scaled(a) + &w), &v).unwrap();
            let rhs = a * uv + inner_l2b(&w, &v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            prop_assert!(inner_l2b(&u, &u).unwrap() >= 0.0);
            prop_assert!(norm_l2b(&(&u + &v)) <= norm_l2b(&u) + norm_l2b(&v) + 1e-12);
        }

        #[test]
        fn source_inner_product_satisfies_cauchy_schwarz(w1 in source_strategy(), w2 in source_strategy()) {
            let ip = inner_l2t(&w1, &w2).unwrap();
            prop_assert_eq!(ip, inner_l2t(&w2, &w1).unwrap());
            prop_assert!(ip.abs() <= norm_l2t(&w1) * norm_l2t(&w2) * (1.0 + 1e-12));
            prop_assert!(norm_l2t(&(&w1 + &w2)) <= norm_l2t(&w1) + norm_l2t(&w2) + 1e-12);
        }
    }
}
