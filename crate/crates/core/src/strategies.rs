//! Proptest generators shared by the module tests.

use proptest::prelude::*;

use crate::conversion::StochasticMatrix;
use crate::QuasiClassicalObject;

pub fn dist(l: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, l).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    })
}

pub fn object(l: usize) -> impl Strategy<Value = QuasiClassicalObject> {
    (dist(l), dist(l)).prop_map(|(p, g)| QuasiClassicalObject::new(p, g, 1.0).unwrap())
}

/// Column-stochastic `rows × cols` matrix.
pub fn stochastic(rows: usize, cols: usize) -> impl Strategy<Value = StochasticMatrix> {
    prop::collection::vec(dist(rows), cols).prop_map(move |columns| {
        let entries = (0..rows * cols)
            .map(|k| columns[k % cols][k / cols])
            .collect();
        StochasticMatrix::new(rows, cols, entries).unwrap()
    })
}

pub fn object_and_map() -> impl Strategy<Value = (QuasiClassicalObject, StochasticMatrix)> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(l, lt)| (object(l), stochastic(lt, l)))
}
