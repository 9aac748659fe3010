//! The lattice `Z^N` truncated to an l1 ball `B_R`, real functions on it with
//! zero Dirichlet extension, and the discrete calculus built on top.
//!
//! Edges are the pairs at l1 distance one. Every edge with at least one
//! endpoint inside the box is part of the truncated problem; the outer
//! endpoint of a boundary edge carries the value zero.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

/// A vertex of `Z^N`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Site(vec![0; dim])
    }

    /// The site `e_axis` scaled by `steps`.
    pub fn axis(dim: usize, axis: usize, steps: i64) -> Self {
        let mut coords = vec![0; dim];
        coords[axis] = steps;
        Site(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn checked_add(&self, other: &Site) -> Result<Site> {
        same_dim(self, other)?;
        Ok(Site(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn checked_sub(&self, other: &Site) -> Result<Site> {
        same_dim(self, other)?;
        Ok(Site(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn negated(&self) -> Site {
        Site(self.0.iter().map(|c| -c).collect())
    }
}

impl<const N: usize> From<[i64; N]> for Site {
    fn from(coords: [i64; N]) -> Self {
        Site(coords.to_vec())
    }
}

impl From<Vec<i64>> for Site {
    fn from(coords: Vec<i64>) -> Self {
        Site(coords)
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

fn same_dim(x: &Site, y: &Site) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

/// Graph distance on `Z^N`, i.e. the l1 distance.
pub fn graph_distance(x: &Site, y: &Site) -> Result<u64> {
    same_dim(x, y)?;
    Ok(x.0.iter().zip(&y.0).map(|(a, b)| (a - b).unsigned_abs()).sum())
}

/// The `2N` lattice neighbors of `x`, ordered `+e_1, -e_1, +e_2, ...`.
///
/// Neighbors outside the box are included; functions evaluate to zero there.
pub fn neighbors(domain: &LatticeBox, x: &Site) -> Result<Vec<Site>> {
    if x.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: x.dim(),
        });
    }
    let mut out = Vec::with_capacity(2 * x.dim());
    for k in 0..x.dim() {
        for step in [1, -1] {
            let mut y = x.clone();
            y.0[k] += step;
            out.push(y);
        }
    }
    Ok(out)
}

const OUTSIDE: usize = usize::MAX;

struct BoxInner {
    dim: usize,
    radius: u32,
    sites: Vec<Site>,
    // neighbors[i * 2N + 2k] is the index of site_i + e_k, +1 for -e_k.
    neighbors: Vec<usize>,
}

/// The ball `B_R = {x : |x|_1 <= R}` in `Z^N`, with its sites enumerated in
/// lexicographic order. Cloning is cheap.
#[derive(Clone)]
pub struct LatticeBox(Arc<BoxInner>);

impl LatticeBox {
    pub fn new(dim: usize, radius: u32) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidBox(format!("dimension {dim} < 2")));
        }
        if radius < 1 {
            return Err(Error::InvalidBox(format!("radius {radius} < 1")));
        }
        let mut sites = Vec::new();
        let mut coords = vec![0i64; dim];
        enumerate_ball(&mut coords, 0, radius as i64, &mut sites);

        let mut neighbors = vec![OUTSIDE; sites.len() * 2 * dim];
        let mut probe = vec![0i64; dim];
        for (i, site) in sites.iter().enumerate() {
            for k in 0..dim {
                for (slot, step) in [(0, 1), (1, -1)] {
                    probe.copy_from_slice(&site.0);
                    probe[k] += step;
                    if let Ok(j) = sites.binary_search_by(|s| s.0.as_slice().cmp(probe.as_slice())) {
                        neighbors[i * 2 * dim + 2 * k + slot] = j;
                    }
                }
            }
        }
        Ok(LatticeBox(Arc::new(BoxInner {
            dim,
            radius,
            sites,
            neighbors,
        })))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn radius(&self) -> u32 {
        self.0.radius
    }

    pub fn len(&self) -> usize {
        self.0.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.0.sites
    }

    pub fn site(&self, index: usize) -> &Site {
        &self.0.sites[index]
    }

    pub fn index_of(&self, x: &Site) -> Option<usize> {
        if x.dim() != self.dim() || x.l1_norm() > self.radius() as u64 {
            return None;
        }
        self.0.sites.binary_search(x).ok()
    }

    pub fn contains(&self, x: &Site) -> bool {
        self.index_of(x).is_some()
    }

    pub fn origin_index(&self) -> usize {
        self.index_of(&Site::origin(self.dim()))
            .expect("origin is in every box")
    }

    /// Index of the neighbor of site `i` in direction `dir` (`2k` for `+e_k`,
    /// `2k + 1` for `-e_k`), or `None` outside the box.
    #[inline]
    pub(crate) fn neighbor(&self, i: usize, dir: usize) -> Option<usize> {
        let j = self.0.neighbors[i * 2 * self.0.dim + dir];
        (j != OUTSIDE).then_some(j)
    }

    fn same_as(&self, other: &LatticeBox) -> Result<()> {
        if self != other {
            if self.dim() != other.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: other.dim(),
                });
            }
            return Err(Error::BoxMismatch {
                left: self.radius(),
                right: other.radius(),
            });
        }
        Ok(())
    }
}

fn enumerate_ball(coords: &mut [i64], axis: usize, budget: i64, out: &mut Vec<Site>) {
    if axis == coords.len() {
        out.push(Site(coords.to_vec()));
        return;
    }
    for c in -budget..=budget {
        coords[axis] = c;
        enumerate_ball(coords, axis + 1, budget - c.abs(), out);
    }
    coords[axis] = 0;
}

impl PartialEq for LatticeBox {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.dim() == other.dim() && self.radius() == other.radius())
    }
}

impl fmt::Debug for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeBox")
            .field("dim", &self.dim())
            .field("radius", &self.radius())
            .finish()
    }
}

/// Real values on the sites of a box, zero everywhere else.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFunction {
    domain: LatticeBox,
    values: Vec<f64>,
}

impl LatticeFunction {
    pub fn zeros(domain: &LatticeBox) -> Self {
        LatticeFunction {
            domain: domain.clone(),
            values: vec![0.0; domain.len()],
        }
    }

    pub fn from_values(domain: &LatticeBox, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidBox(format!(
                "{} values for a box of {} sites",
                values.len(),
                domain.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(LatticeFunction {
            domain: domain.clone(),
            values,
        })
    }

    pub fn from_fn<F: FnMut(&Site) -> f64>(domain: &LatticeBox, mut f: F) -> Result<Self> {
        let values = domain.sites().iter().map(&mut f).collect();
        Self::from_values(domain, values)
    }

    /// `height` at `site`, zero elsewhere. A site outside the box gives the
    /// zero function.
    pub fn spike(domain: &LatticeBox, site: &Site, height: f64) -> Result<Self> {
        if site.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: site.dim(),
            });
        }
        let mut u = Self::zeros(domain);
        if let Some(i) = domain.index_of(site) {
            u.values[i] = height;
        }
        if !height.is_finite() {
            return Err(Error::NonFinite(0));
        }
        Ok(u)
    }

    pub fn domain(&self) -> &LatticeBox {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a site, with the zero extension outside the box.
    pub fn value_at(&self, x: &Site) -> Result<f64> {
        if x.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: x.dim(),
            });
        }
        Ok(self.domain.index_of(x).map_or(0.0, |i| self.values[i]))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn try_add(&self, other: &LatticeFunction) -> Result<Self> {
        self.domain.same_as(&other.domain)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &LatticeFunction) -> Result<Self> {
        self.domain.same_as(&other.domain)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &LatticeFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        LatticeFunction {
            domain: self.domain.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        self.map(|v| t * v)
    }

    pub fn abs(&self) -> Self {
        self.map(libm::fabs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        LatticeFunction {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// The same function on another box of the same dimension: restricted
    /// when the target is smaller, extended by zero when it is larger.
    pub fn resized(&self, target: &LatticeBox) -> Result<Self> {
        self.shifted_into(&Site::origin(self.domain.dim()), target)
    }

    /// The function `x -> self(x + shift)` sampled on `target`.
    pub fn shifted_into(&self, shift: &Site, target: &LatticeBox) -> Result<Self> {
        if shift.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: shift.dim(),
            });
        }
        if target.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: target.dim(),
            });
        }
        if target == &self.domain && shift.is_origin() {
            return Ok(self.clone());
        }
        let mut values = vec![0.0; target.len()];
        let mut probe = Site::origin(shift.dim());
        for (i, x) in target.sites().iter().enumerate() {
            for k in 0..shift.dim() {
                probe.0[k] = x.0[k] + shift.0[k];
            }
            if let Some(j) = self.domain.index_of(&probe) {
                values[i] = self.values[j];
            }
        }
        Ok(LatticeFunction {
            domain: target.clone(),
            values,
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| {
            let a = libm::fabs(v);
            if a > m {
                a
            } else {
                m
            }
        })
    }

    /// Index of the largest `|u|`; ties go to the lexicographically smallest
    /// site. `None` for the zero function.
    pub fn argmax_abs(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            let a = libm::fabs(v);
            if a > 0.0 && best.is_none_or(|(_, m)| a > m) {
                best = Some((i, a));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Sites where the function is nonzero, in enumeration order.
    pub fn support(&self) -> impl Iterator<Item = &Site> + '_ {
        self.domain
            .sites()
            .iter()
            .zip(&self.values)
            .filter(|(_, &v)| v != 0.0)
            .map(|(s, _)| s)
    }

    /// Smallest `|x|_1` over the support.
    pub fn support_inner_radius(&self) -> Option<u64> {
        self.support().map(Site::l1_norm).min()
    }
}

/// `x -> u(x + shift)` on the box of `u`. Mass shifted out of the box is lost;
/// sites shifted in from outside get zero.
pub fn translate(u: &LatticeFunction, shift: &Site) -> Result<LatticeFunction> {
    u.shifted_into(shift, u.domain())
}

#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    let a = libm::fabs(x);
    if p == 2.0 {
        a * a
    } else if p == 1.0 {
        a
    } else {
        libm::pow(a, p)
    }
}

/// `|x|^(p-2) x`, which is zero at the origin for every `p >= 2`.
#[inline]
pub(crate) fn signed_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x
    } else if x == 0.0 {
        0.0
    } else {
        let m = libm::pow(libm::fabs(x), p - 1.0);
        if x < 0.0 {
            -m
        } else {
            m
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(format!("p = {p} must be at least 1")));
    }
    Ok(())
}

/// The counting-measure `l^p` norm; `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm(u: &LatticeFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(scaled_lp_norm(u.values(), p))
}

pub(crate) fn scaled_lp_norm(values: &[f64], p: f64) -> f64 {
    let m = values.iter().fold(0.0, |m: f64, &v| m.max(libm::fabs(v)));
    if p == f64::INFINITY || m == 0.0 {
        return m;
    }
    let terms: Vec<f64> = values.iter().map(|&v| abs_pow(v / m, p)).collect();
    m * libm::pow(pairwise_sum(&terms), 1.0 / p)
}

/// `sum |u(x)|^p`, i.e. `|u|_p^p` without the root.
pub fn lp_power_sum(u: &LatticeFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p == f64::INFINITY {
        return Err(Error::InvalidExponent("p = inf has no power sum".into()));
    }
    Ok(power_sum(u.values(), p))
}

pub(crate) fn power_sum(values: &[f64], p: f64) -> f64 {
    let terms: Vec<f64> = values.iter().map(|&v| abs_pow(v, p)).collect();
    pairwise_sum(&terms)
}

/// The carré du champ `Γ(u, v)(x) = ½ Σ_{y~x} (u(y) - u(x))(v(y) - v(x))`,
/// at any site of the lattice.
pub fn gradient_form(u: &LatticeFunction, v: &LatticeFunction, x: &Site) -> Result<f64> {
    u.domain.same_as(&v.domain)?;
    let ux = u.value_at(x)?;
    let vx = v.value_at(x)?;
    let mut acc = 0.0;
    for y in neighbors(&u.domain, x)? {
        acc += (u.value_at(&y)? - ux) * (v.value_at(&y)? - vx);
    }
    Ok(0.5 * acc)
}

// Walks every edge with at least one endpoint in the box exactly once,
// attributing it to its inner endpoint (the lower one for interior edges),
// and passes the oriented differences of `u` and `v` across it.
fn for_each_edge(u: &LatticeFunction, v: &LatticeFunction, mut visit: impl FnMut(usize, f64, f64)) {
    let domain = &u.domain;
    let dim = domain.dim();
    for i in 0..domain.len() {
        let (ui, vi) = (u.values[i], v.values[i]);
        for k in 0..dim {
            match domain.neighbor(i, 2 * k) {
                Some(j) => visit(i, u.values[j] - ui, v.values[j] - vi),
                None => visit(i, -ui, -vi),
            }
            if domain.neighbor(i, 2 * k + 1).is_none() {
                visit(i, ui, vi);
            }
        }
    }
}

/// Per-site share of `|∇u|_2^2`, each edge attributed to exactly one site.
pub(crate) fn edge_energy_by_site(u: &LatticeFunction) -> Vec<f64> {
    let mut out = vec![0.0; u.domain.len()];
    for_each_edge(u, u, |i, du, _| out[i] += du * du);
    out
}

/// Oriented differences of `u` across every edge touching the box, one entry
/// per undirected edge.
pub fn edge_differences(u: &LatticeFunction) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.domain.len() * u.domain.dim());
    for_each_edge(u, u, |_, du, _| out.push(du));
    out
}

/// `|∇u|_2^2 = Σ_x Γ(u)(x)`, the sum of squared differences over undirected
/// edges.
pub fn gradient_norm_sq(u: &LatticeFunction) -> f64 {
    pairwise_sum(&edge_energy_by_site(u))
}

/// `Σ_x Γ(u, v)(x)` over the whole lattice.
pub fn gradient_inner(u: &LatticeFunction, v: &LatticeFunction) -> Result<f64> {
    u.domain.same_as(&v.domain)?;
    let mut out = vec![0.0; u.domain.len()];
    for_each_edge(u, v, |i, du, dv| out[i] += du * dv);
    Ok(pairwise_sum(&out))
}

/// `Δu(x) = Σ_{y~x} (u(y) - u(x))` on the sites of the box.
pub fn laplacian(u: &LatticeFunction) -> LatticeFunction {
    let domain = &u.domain;
    let two_n = 2 * domain.dim();
    let values = (0..domain.len())
        .map(|i| {
            let mut acc = 0.0;
            for dir in 0..two_n {
                if let Some(j) = domain.neighbor(i, dir) {
                    acc += u.values[j];
                }
            }
            acc - two_n as f64 * u.values[i]
        })
        .collect();
    LatticeFunction {
        domain: domain.clone(),
        values,
    }
}

/// `|∇u|_2 + |a^{1/p} u|_p + |b^{1/q} u|_q`; a missing weight counts as one.
pub fn epq_norm(
    u: &LatticeFunction,
    p: f64,
    q: f64,
    a: Option<&CoefficientField>,
    b: Option<&CoefficientField>,
) -> Result<f64> {
    check_exponent(p)?;
    if !(q >= p) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!(
            "need 1 <= p <= q < inf, got p = {p}, q = {q}"
        )));
    }
    let weighted = |field: Option<&CoefficientField>, r: f64| -> f64 {
        match field {
            None => scaled_lp_norm(u.values(), r),
            Some(f) => {
                let w: Vec<f64> = u
                    .domain
                    .sites()
                    .iter()
                    .zip(u.values())
                    .map(|(x, &v)| libm::pow(f.eval(x), 1.0 / r) * v)
                    .collect();
                scaled_lp_norm(&w, r)
            }
        }
    };
    Ok(libm::sqrt(gradient_norm_sq(u)) + weighted(a, p) + weighted(b, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(dim: usize, r: u32) -> LatticeBox {
        LatticeBox::new(dim, r).unwrap()
    }

    fn delta0(dim: usize, r: u32) -> LatticeFunction {
        let bx = b(dim, r);
        LatticeFunction::spike(&bx, &Site::origin(dim), 1.0).unwrap()
    }

    #[test]
    fn neighbors_of_origin() {
        let n = neighbors(&b(2, 3), &Site::from([0, 0])).unwrap();
        assert_eq!(
            n,
            vec![
                Site::from([1, 0]),
                Site::from([-1, 0]),
                Site::from([0, 1]),
                Site::from([0, -1])
            ]
        );
        let n3 = neighbors(&b(3, 2), &Site::from([1, 0, 0])).unwrap();
        assert_eq!(n3.len(), 6);
        for y in &n3 {
            assert_eq!(graph_distance(y, &Site::from([1, 0, 0])).unwrap(), 1);
        }
    }

    #[test]
    fn neighbors_reach_outside_the_box() {
        let bx = b(2, 1);
        let n = neighbors(&bx, &Site::from([1, 0])).unwrap();
        assert!(n.contains(&Site::from([2, 0])));
        let u = LatticeFunction::from_fn(&bx, |_| 1.0).unwrap();
        assert_eq!(u.value_at(&Site::from([2, 0])).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(neighbors(&b(2, 1), &Site::from([0, 0, 0])).is_err());
        assert!(graph_distance(&Site::from([0, 0]), &Site::from([0, 0, 0])).is_err());
        let u = delta0(2, 2);
        let v = delta0(2, 3);
        assert!(gradient_form(&u, &v, &Site::from([0, 0])).is_err());
        assert!(u.try_add(&v).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(graph_distance(&Site::from([0, 0]), &Site::from([0, 0])).unwrap(), 0);
        assert_eq!(graph_distance(&Site::from([0, 0]), &Site::from([2, -1])).unwrap(), 3);
        assert_eq!(
            graph_distance(&Site::from([1, 1, 1]), &Site::from([0, 0, 0])).unwrap(),
            3
        );
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let bx = b(2, 1);
        let sites: Vec<Site> = bx.sites().to_vec();
        assert_eq!(
            sites,
            vec![
                Site::from([-1, 0]),
                Site::from([0, -1]),
                Site::from([0, 0]),
                Site::from([0, 1]),
                Site::from([1, 0])
            ]
        );
        assert!(LatticeBox::new(1, 3).is_err());
        assert!(LatticeBox::new(2, 0).is_err());
    }

    #[test]
    fn translate_examples() {
        let bx = b(2, 4);
        let spike = LatticeFunction::spike(&bx, &Site::from([3, 0]), 1.0).unwrap();
        let moved = translate(&spike, &Site::from([3, 0])).unwrap();
        assert_eq!(moved, delta0(2, 4));

        let u = LatticeFunction::from_fn(&bx, |x| x.coords()[0] as f64 + 0.5).unwrap();
        assert_eq!(translate(&u, &Site::origin(2)).unwrap(), u);

        let gone = translate(&delta0(2, 4), &Site::from([-5, 0])).unwrap();
        assert!(gone.is_zero());
    }

    #[test]
    fn lp_norm_examples() {
        let d = delta0(2, 4);
        for p in [1.0, 1.5, 2.0, 3.0, 7.0, f64::INFINITY] {
            assert_eq!(lp_norm(&d, p).unwrap(), 1.0);
        }
        let bx = b(2, 4);
        let two = LatticeFunction::from_fn(&bx, |x| {
            if *x == Site::from([0, 0]) || *x == Site::from([3, 0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((lp_norm(&two, 2.0).unwrap() - libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(lp_norm(&two, f64::INFINITY).unwrap(), 1.0);
        assert!(lp_norm(&two, 0.5).is_err());
        assert!(lp_norm(&two, f64::NAN).is_err());
    }

    #[test]
    fn gradient_form_examples() {
        let d = delta0(2, 3);
        assert_eq!(gradient_form(&d, &d, &Site::from([0, 0])).unwrap(), 2.0);
        assert_eq!(gradient_form(&d, &d, &Site::from([1, 0])).unwrap(), 0.5);
        let zero = LatticeFunction::zeros(d.domain());
        let u = LatticeFunction::from_fn(d.domain(), |x| x.l1_norm() as f64).unwrap();
        for x in d.domain().sites() {
            assert_eq!(gradient_form(&u, &zero, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn gradient_norm_examples() {
        assert_eq!(gradient_norm_sq(&delta0(2, 3)), 4.0);
        assert_eq!(gradient_norm_sq(&delta0(3, 2)), 6.0);
        assert_eq!(gradient_norm_sq(&LatticeFunction::zeros(&b(2, 3))), 0.0);
        // A spike on the boundary of a radius-one box: four edges, two of
        // them leaving the box.
        assert_eq!(gradient_norm_sq(&delta0(2, 1)), 4.0);
    }

    #[test]
    fn laplacian_examples() {
        let d = delta0(2, 3);
        let l = laplacian(&d);
        assert_eq!(l.value_at(&Site::from([0, 0])).unwrap(), -4.0);
        assert_eq!(l.value_at(&Site::from([1, 0])).unwrap(), 1.0);

        let bx = b(2, 4);
        let c = LatticeFunction::from_fn(&bx, |_| 2.5).unwrap();
        let lc = laplacian(&c);
        for (i, x) in bx.sites().iter().enumerate() {
            if x.l1_norm() < 4 {
                assert_eq!(lc.values()[i], 0.0);
            }
        }
    }

    #[test]
    fn epq_examples() {
        let d = delta0(2, 3);
        assert_eq!(epq_norm(&d, 2.0, 4.0, None, None).unwrap(), 4.0);
        assert_eq!(
            epq_norm(&LatticeFunction::zeros(d.domain()), 2.0, 4.0, None, None).unwrap(),
            0.0
        );
        let a = CoefficientField::constant(4.0).unwrap();
        let bf = CoefficientField::constant(16.0).unwrap();
        assert_eq!(epq_norm(&d, 2.0, 4.0, Some(&a), Some(&bf)).unwrap(), 6.0);
        assert!(epq_norm(&d, 4.0, 2.0, None, None).is_err());
        assert!(epq_norm(&d, 0.5, 2.0, None, None).is_err());
        assert!(epq_norm(&d, 2.0, f64::INFINITY, None, None).is_err());
    }

    #[test]
    fn argmax_tie_goes_to_smallest_site() {
        let bx = b(2, 2);
        let u = LatticeFunction::from_fn(&bx, |x| {
            if *x == Site::from([1, 0]) || *x == Site::from([0, 1]) {
                3.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(bx.site(u.argmax_abs().unwrap()), &Site::from([0, 1]));
        assert_eq!(LatticeFunction::zeros(&bx).argmax_abs(), None);
    }
}
