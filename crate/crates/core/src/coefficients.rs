//! Coefficient functions `a(x)`, `b(x)`: nonnegative on `Z^N` with a positive
//! limit at infinity.
//!
//! A variable field is a positive limit plus a finite perturbation table, so
//! the limit assumption holds by construction and the tail can be measured.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Site};

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Constant,
    // Sorted by site, no duplicates.
    RadialLimit(Vec<(Site, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    limit: f64,
    kind: Kind,
}

impl CoefficientField {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidField(format!(
                "constant value must be positive and finite, got {value}"
            )));
        }
        Ok(CoefficientField {
            limit: value,
            kind: Kind::Constant,
        })
    }

    /// `limit + profile(x)`, where the profile is zero off its table.
    pub fn radial_limit(limit: f64, profile: Vec<(Site, f64)>) -> Result<Self> {
        if !(limit > 0.0) || !limit.is_finite() {
            return Err(Error::InvalidField(format!(
                "limit must be positive and finite, got {limit}"
            )));
        }
        let mut profile = profile;
        profile.sort_by(|a, b| a.0.cmp(&b.0));
        for w in profile.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidField(format!("duplicate profile site {}", w[0].0)));
            }
            if w[0].0.dim() != w[1].0.dim() {
                return Err(Error::InvalidField("profile sites differ in dimension".into()));
            }
        }
        for (site, delta) in &profile {
            if !delta.is_finite() || limit + delta < 0.0 {
                return Err(Error::InvalidField(format!(
                    "value {} at {site} is negative or not finite",
                    limit + delta
                )));
            }
        }
        Ok(CoefficientField {
            limit,
            kind: Kind::RadialLimit(profile),
        })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, Kind::Constant)
    }

    /// The value at infinity (the value itself for a constant field).
    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn profile(&self) -> &[(Site, f64)] {
        match &self.kind {
            Kind::Constant => &[],
            Kind::RadialLimit(p) => p,
        }
    }

    /// Dimension of the profile sites, if there are any.
    pub fn profile_dim(&self) -> Option<usize> {
        self.profile().first().map(|(s, _)| s.dim())
    }

    pub fn eval(&self, x: &Site) -> f64 {
        match &self.kind {
            Kind::Constant => self.limit,
            Kind::RadialLimit(profile) => match profile.binary_search_by(|(s, _)| s.cmp(x)) {
                Ok(i) => self.limit + profile[i].1,
                Err(_) => self.limit,
            },
        }
    }

    /// `sup |f(x) - limit|` over tabulated sites with `|x|_1 > radius`.
    pub fn tail_deviation(&self, radius: u64) -> f64 {
        self.profile()
            .iter()
            .filter(|(s, _)| s.l1_norm() > radius)
            .fold(0.0, |m, (_, d)| m.max(libm::fabs(*d)))
    }

    /// The constant field at the limit value.
    pub fn limit_field(&self) -> CoefficientField {
        CoefficientField {
            limit: self.limit,
            kind: Kind::Constant,
        }
    }

    /// Smallest and largest value over the sites of `domain`.
    pub fn bounds_on(&self, domain: &LatticeBox) -> (f64, f64) {
        match &self.kind {
            Kind::Constant => (self.limit, self.limit),
            Kind::RadialLimit(_) => domain
                .sites()
                .iter()
                .map(|x| self.eval(x))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn eval_examples() {
        let c = CoefficientField::constant(1.0).unwrap();
        assert_eq!(c.eval(&Site::from([3, -2])), 1.0);
        let r = CoefficientField::radial_limit(1.0, vec![(Site::from([0, 0]), 0.5)]).unwrap();
        assert_eq!(r.eval(&Site::from([0, 0])), 1.5);
        assert_eq!(r.eval(&Site::from([7, 7])), 1.0);
    }

    #[test]
    fn tail_examples() {
        let c = CoefficientField::constant(2.0).unwrap();
        assert_eq!(c.tail_deviation(1), 0.0);
        let inside =
            CoefficientField::radial_limit(1.0, vec![(Site::from([3, 0]), 0.7), (Site::from([1, -1]), -0.4)]).unwrap();
        assert_eq!(inside.tail_deviation(3), 0.0);
        let outside = CoefficientField::radial_limit(1.0, vec![(Site::from([4, 0]), 0.2)]).unwrap();
        assert_eq!(outside.tail_deviation(3), 0.2);
    }

    #[test]
    fn rejects_invalid_fields() {
        assert!(CoefficientField::constant(0.0).is_err());
        assert!(CoefficientField::constant(-1.0).is_err());
        assert!(CoefficientField::constant(f64::NAN).is_err());
        assert!(CoefficientField::radial_limit(0.0, vec![]).is_err());
        assert!(CoefficientField::radial_limit(1.0, vec![(Site::from([0, 0]), -1.5)]).is_err());
        assert!(
            CoefficientField::radial_limit(1.0, vec![(Site::from([0, 0]), 0.1), (Site::from([0, 0]), 0.2)]).is_err()
        );
        // Zero is allowed at individual sites.
        assert!(CoefficientField::radial_limit(1.0, vec![(Site::from([0, 0]), -1.0)]).is_ok());
    }

    #[test]
    fn bounds_cover_profile() {
        let bx = LatticeBox::new(2, 2).unwrap();
        let f = CoefficientField::radial_limit(
            2.0,
            vec![
                (Site::from([0, 0]), 1.0),
                (Site::from([1, 0]), -0.5),
                (Site::from([9, 0]), 5.0),
            ],
        )
        .unwrap();
        assert_eq!(f.bounds_on(&bx), (1.5, 3.0));
        assert!(f.limit_field().is_constant());
        assert_eq!(f.limit_field().limit(), 2.0);
    }
}
