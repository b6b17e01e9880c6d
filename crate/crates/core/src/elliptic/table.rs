//! JSON record for a single triple-product evaluation.

use serde::{Deserialize, Serialize};

use super::TripleProductQuery;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub k: i64,
    pub l: i64,
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub tau: [f64; 2],
}

impl From<&TripleProductQuery> for QueryRecord {
    fn from(q: &TripleProductQuery) -> Self {
        Self {
            k: q.k,
            l: q.l,
            a: q.a,
            b: q.b,
            c: q.c,
            d: q.d,
            u: [q.u.value.re, q.u.value.im],
            v: [q.v.value.re, q.v.value.im],
            tau: [q.tau.tau().re, q.tau.tau().im],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub residual: f64,
    pub coeffs: Vec<(usize, f64, f64)>,
}

/// `{query, G, F, oracle, fit}`; absent values serialize as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTable {
    pub query: QueryRecord,
    #[serde(rename = "G")]
    pub g: Option<[f64; 2]>,
    #[serde(rename = "F")]
    pub f: Option<[f64; 2]>,
    #[serde(default)]
    pub oracle: Option<[f64; 2]>,
    #[serde(default)]
    pub fit: Option<FitRecord>,
}
