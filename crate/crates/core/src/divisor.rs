//! Integer-weighted divisors on mesh vertices or planar points.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Site {
    Vertex { vertex: usize },
    Point { re: f64, im: f64 },
}

impl Site {
    pub fn vertex(v: usize) -> Self {
        Site::Vertex { vertex: v }
    }

    pub fn point(z: Complex64) -> Self {
        Site::Point { re: z.re, im: z.im }
    }

    pub fn as_vertex(&self) -> Option<usize> {
        match *self {
            Site::Vertex { vertex } => Some(vertex),
            Site::Point { .. } => None,
        }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Site::Vertex { vertex: a }, Site::Vertex { vertex: b }) => a.cmp(b),
            (Site::Vertex { .. }, Site::Point { .. }) => Ordering::Less,
            (Site::Point { .. }, Site::Vertex { .. }) => Ordering::Greater,
            (Site::Point { re: a, im: b }, Site::Point { re: c, im: d }) => {
                a.total_cmp(c).then(b.total_cmp(d))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorEntry {
    #[serde(flatten)]
    pub site: Site,
    pub order: i64,
}

/// Finite formal sum of sites. Entries are kept sorted by site with nonzero,
/// merged orders.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawDivisor", into = "RawDivisor")]
pub struct Divisor {
    entries: Vec<DivisorEntry>,
}

#[derive(Serialize, Deserialize)]
struct RawDivisor {
    entries: Vec<DivisorEntry>,
}

impl From<RawDivisor> for Divisor {
    fn from(raw: RawDivisor) -> Self {
        Divisor::from_entries(raw.entries)
    }
}

impl From<Divisor> for RawDivisor {
    fn from(d: Divisor) -> Self {
        RawDivisor { entries: d.entries }
    }
}

impl Divisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = DivisorEntry>) -> Self {
        let mut e: Vec<DivisorEntry> = entries.into_iter().collect();
        e.sort_by(|a, b| a.site.cmp_key(&b.site));
        let mut out: Vec<DivisorEntry> = Vec::with_capacity(e.len());
        for x in e {
            match out.last_mut() {
                Some(last) if last.site.cmp_key(&x.site) == Ordering::Equal => {
                    last.order += x.order
                }
                _ => out.push(x),
            }
        }
        out.retain(|x| x.order != 0);
        Divisor { entries: out }
    }

    pub fn from_vertices(pairs: impl IntoIterator<Item = (usize, i64)>) -> Self {
        Self::from_entries(pairs.into_iter().map(|(v, order)| DivisorEntry {
            site: Site::vertex(v),
            order,
        }))
    }

    pub fn entries(&self) -> &[DivisorEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn degree(&self) -> i64 {
        self.entries.iter().map(|e| e.order).sum()
    }

    pub fn order_at(&self, site: &Site) -> i64 {
        self.entries
            .iter()
            .find(|e| e.site.cmp_key(site) == Ordering::Equal)
            .map_or(0, |e| e.order)
    }

    /// `(vertex, order)` pairs; fails on planar-point sites.
    pub fn vertex_entries(&self, mesh: &Mesh) -> Result<Vec<(usize, i64)>> {
        self.entries
            .iter()
            .map(|e| match e.site.as_vertex() {
                Some(v) if v < mesh.num_vertices() => Ok((v, e.order)),
                _ => Err(Error::SiteNotVertex(format!("{:?}", e.site))),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("divisor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        Divisor::from_entries(self.entries.iter().chain(&rhs.entries).copied())
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        self * -1
    }
}

impl Sub for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        self + &(-rhs)
    }
}

impl Mul<i64> for &Divisor {
    type Output = Divisor;
    fn mul(self, k: i64) -> Divisor {
        Divisor::from_entries(self.entries.iter().map(|e| DivisorEntry {
            site: e.site,
            order: e.order * k,
        }))
    }
}

/// Quad-mesh divisor: every vertex of valence `k != 4` with order `k - 4`.
pub fn divisor_of_quad_mesh(mesh: &Mesh) -> Result<Divisor> {
    mesh.require_quads()?;
    mesh.require_closed()?;
    Ok(Divisor::from_vertices(
        (0..mesh.num_vertices()).map(|v| (v, mesh.valence(v) as i64 - 4)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_format() {
        let d = Divisor::from_vertices([(17, -1), (3, 2), (5, 0)]);
        assert_eq!(
            d.to_json(),
            r#"{"entries":[{"vertex":3,"order":2},{"vertex":17,"order":-1}]}"#
        );
        let back = Divisor::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        let p = Divisor::from_json(r#"{"entries":[{"re":0.5,"im":-1.0,"order":3}]}"#).unwrap();
        assert_eq!(p.degree(), 3);
        assert_eq!(p.entries()[0].site, Site::point(Complex64::new(0.5, -1.0)));
    }

    #[test]
    fn merges_and_drops_zero() {
        let d = Divisor::from_vertices([(1, 2), (1, -2), (2, 1), (2, 1)]);
        assert_eq!(d.len(), 1);
        assert_eq!(d.order_at(&Site::vertex(2)), 2);
    }

    proptest! {
        #[test]
        fn arithmetic_laws(a in prop::collection::vec((0usize..6, -3i64..4), 0..8),
                           b in prop::collection::vec((0usize..6, -3i64..4), 0..8),
                           k in -3i64..4) {
            let da = Divisor::from_vertices(a);
            let db = Divisor::from_vertices(b);
            prop_assert_eq!((&da + &db).degree(), da.degree() + db.degree());
            prop_assert_eq!((&da - &db).degree(), da.degree() - db.degree());
            prop_assert_eq!((&da * k).degree(), k * da.degree());
            prop_assert!((&da - &da).is_empty());
            prop_assert!((&da + &db).entries().iter().all(|e| e.order != 0));
            prop_assert_eq!(&(&da + &db) - &db, da);
        }
    }
}
