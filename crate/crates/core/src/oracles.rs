//! Numerical checks of the inequalities and limits the analysis rests on.
//!
//! Every check returns a [`CheckReport`] whose `passed` flag is exactly
//! `defect <= tolerance`. Random inputs come from a ChaCha8 stream seeded by
//! the caller, so any failing report can be replayed from its seed and
//! witness.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficients::CoefficientField;
use crate::decompose::FunctionSequence;
use crate::error::{Error, Result};
use crate::functionals::{energy_density, gateaux_gradient, phi, phi_bar, ProblemParams};
use crate::lattice::{
    abs_pow, edge_differences, epq_norm, power_sum, scaled_lp_norm, LatticeBox, LatticeFunction, Site,
};
use crate::sum::exact_sum;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub defect: f64,
    pub tolerance: f64,
    pub seed: Option<u64>,
    /// Description of the input that produced the worst defect.
    pub witness: Option<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        CheckReport {
            name: name.into(),
            passed: defect <= tolerance,
            defect,
            tolerance,
            seed: None,
            witness: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }
}

// Running maximum of a defect together with the input that produced it.
struct Worst {
    defect: f64,
    witness: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            defect: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, defect: f64, witness: impl FnOnce() -> String) {
        // A NaN sticks, so that it fails the comparison downstream.
        if self.defect.is_nan() {
            return;
        }
        if defect.is_nan() || defect > self.defect || self.witness.is_none() {
            self.defect = defect;
            self.witness = Some(witness());
        }
    }

    fn report(self, name: impl Into<String>, tolerance: f64, seed: u64) -> CheckReport {
        let mut r = CheckReport::new(name, self.defect, tolerance).with_seed(seed);
        r.witness = self.witness;
        r
    }
}

/// Which quantity the Brézis–Lieb splitting is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BrezisLiebVariant {
    /// Site values, `|u|_p^p`.
    Values,
    /// Edge differences, `|∇u|_p^p` over undirected edges.
    Edges,
}

/// `|(|u_n|_p^p - |u_n - u|_p^p) - |u|_p^p|` for the last term `u_n`.
///
/// The three power sums are accumulated as one exactly rounded sum, so the
/// defect is exactly zero whenever the supports of `u` and `u_n - u` are
/// disjoint (edge-disjoint for [`BrezisLiebVariant::Edges`]).
pub fn brezis_lieb_defect(
    seq: &FunctionSequence,
    u: &LatticeFunction,
    p: f64,
    variant: BrezisLiebVariant,
) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(format!("p = {p} must be at least 1")));
    }
    let last = seq.last();
    let domain = last.domain();
    let limit = u.resized(domain)?;
    if limit.support().count() != u.support().count() {
        return Err(Error::InvalidSequence(
            "the limit is not supported inside the last term's box".into(),
        ));
    }
    let rest = last.try_sub(&limit)?;
    let parts = |f: &LatticeFunction| -> Vec<f64> {
        match variant {
            BrezisLiebVariant::Values => f.values().to_vec(),
            BrezisLiebVariant::Edges => edge_differences(f),
        }
    };
    let (whole, rest, limit) = (parts(last), parts(&rest), parts(&limit));
    let terms = whole
        .iter()
        .map(|&v| abs_pow(v, p))
        .chain(rest.iter().map(|&v| -abs_pow(v, p)))
        .chain(limit.iter().map(|&v| -abs_pow(v, p)));
    Ok(libm::fabs(exact_sum(terms)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEquivalence {
    /// `|u|_{E_{p(a),q(b)}} / |u|_{E_{p,q}}`.
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

impl NormEquivalence {
    pub fn contains_ratio(&self) -> bool {
        self.lower <= self.ratio && self.ratio <= self.upper
    }

    /// Distance of the ratio outside `[lower, upper]`, zero inside.
    pub fn excess(&self) -> f64 {
        (self.lower - self.ratio).max(self.ratio - self.upper).max(0.0)
    }
}

/// Ratio of the weighted to the unweighted energy norm, with the interval it
/// must lie in: the weights scale the `p` and `q` parts by factors in
/// `[min a^{1/p}, max a^{1/p}]` and `[min b^{1/q}, max b^{1/q}]` over the box,
/// and the gradient part by one.
pub fn norm_equivalence_ratio(
    u: &LatticeFunction,
    p: f64,
    q: f64,
    a: &CoefficientField,
    b: &CoefficientField,
) -> Result<NormEquivalence> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let weighted = epq_norm(u, p, q, Some(a), Some(b))?;
    let plain = epq_norm(u, p, q, None, None)?;
    let (amin, amax) = a.bounds_on(u.domain());
    let (bmin, bmax) = b.bounds_on(u.domain());
    let lo = 1.0f64.min(libm::pow(amin, 1.0 / p)).min(libm::pow(bmin, 1.0 / q));
    let hi = 1.0f64.max(libm::pow(amax, 1.0 / p)).max(libm::pow(bmax, 1.0 / q));
    // Room for the rounding of the two norms and the roots above.
    let slack = 16.0 * f64::EPSILON;
    Ok(NormEquivalence {
        ratio: weighted / plain,
        lower: lo * (1.0 - slack),
        upper: hi * (1.0 + slack),
    })
}

// `(Σ t^p, Σ t^q)` with `t = |u| / |u|_∞`. Termwise `t^q <= t^p` and the two
// sums share a reduction tree, so the comparison is free of rounding.
fn scaled_power_sums(values: &[f64], p: f64, q: f64) -> (f64, f64, f64) {
    let m = values.iter().fold(0.0, |m: f64, &v| m.max(libm::fabs(v)));
    if m == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let tp: Vec<f64> = values.iter().map(|&v| abs_pow(v / m, p)).collect();
    let tq: Vec<f64> = values.iter().map(|&v| abs_pow(v / m, q)).collect();
    (m, crate::sum::pairwise_sum(&tp), crate::sum::pairwise_sum(&tq))
}

/// `|u|_p^p |u|_∞^{q-p} - |u|_q^q`, which is never negative.
pub fn interpolation_slack(u: &LatticeFunction, p: f64, q: f64) -> f64 {
    let (m, sp, sq) = scaled_power_sums(u.values(), p, q);
    libm::pow(m, q) * (sp - sq)
}

/// Checks `|u_n|_q^q <= |u_n|_p^p |u_n|_∞^{q-p}` for every term, and the decay
/// it forces: `|u_n|_q^q <= (sup_m |u_m|_p^p) |u_n|_∞^{q-p}`.
///
/// The defect is the largest violation relative to the right-hand side; the
/// tolerance is zero.
pub fn lions_decay_check(seq: &FunctionSequence, p: f64, q: f64) -> CheckReport {
    let mut worst = Worst::new();
    let sums: Vec<(f64, f64, f64)> = seq
        .terms()
        .iter()
        .map(|t| scaled_power_sums(t.values(), p, q))
        .collect();
    let bound = sums.iter().map(|&(m, sp, _)| sp * libm::pow(m, p)).fold(0.0, f64::max);
    for (n, &(m, sp, sq)) in sums.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let pointwise = ((sq - sp) / sp).max(0.0);
        let mp = libm::pow(m, p);
        let decay = ((sq * mp - bound) / bound).max(0.0);
        let defect = if p < q { pointwise.max(decay) } else { f64::NAN };
        worst.record(defect, || format!("term {n}"));
    }
    let mut r = CheckReport::new("lions_decay", worst.defect, 0.0);
    r.witness = worst.witness;
    r
}

// Double-double numbers, used to evaluate Φ far below f64 roundoff so that
// central differences at h = 1e-5 show their truncation error.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn quick(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let r = Dd::quick(s.hi, s.lo + t.hi);
        Dd::quick(r.hi, r.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = libm::fma(self.hi, o.hi, -p);
        Dd::quick(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn abs(self) -> Dd {
        if self.hi < 0.0 {
            self.neg()
        } else {
            self
        }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    // |x|^e. Integer exponents are exact to double-double precision; other
    // exponents fall back to one f64 power with a first-order correction.
    fn abs_pow(self, e: f64) -> Dd {
        let x = self.abs();
        if x.hi == 0.0 {
            return Dd::ZERO;
        }
        if e == libm::trunc(e) && e <= 64.0 {
            let mut n = e as u32;
            let (mut base, mut acc) = (x, Dd::from(1.0));
            while n > 0 {
                if n & 1 == 1 {
                    acc = acc.mul(base);
                }
                base = base.mul(base);
                n >>= 1;
            }
            acc
        } else {
            let head = libm::pow(x.hi, e);
            Dd::quick(head, head * e * x.lo / x.hi)
        }
    }
}

// Φ(u + tφ), evaluated from scratch in double-double arithmetic.
#[allow(clippy::too_many_arguments)]
fn phi_along(u: &[f64], dir: &[f64], t: f64, domain: &LatticeBox, a: &[f64], b: &[f64], p: f64, q: f64) -> Dd {
    let x: Vec<Dd> = u
        .iter()
        .zip(dir)
        .map(|(&ui, &di)| {
            let prod = t * di;
            let e = libm::fma(t, di, -prod);
            let s = Dd::two_sum(ui, prod);
            Dd::quick(s.hi, s.lo + e)
        })
        .collect();
    let mut grad = Dd::ZERO;
    let mut pot = Dd::ZERO;
    for i in 0..domain.len() {
        for k in 0..domain.dim() {
            let d = match domain.neighbor(i, 2 * k) {
                Some(j) => x[j].sub(x[i]),
                None => x[i].neg(),
            };
            grad = grad.add(d.mul(d));
            if domain.neighbor(i, 2 * k + 1).is_none() {
                grad = grad.add(x[i].mul(x[i]));
            }
        }
        let ap = Dd::from(a[i] / p).mul(x[i].abs_pow(p));
        let bq = Dd::from(b[i] / q).mul(x[i].abs_pow(q));
        pot = pot.add(ap).sub(bq);
    }
    grad.mul(Dd::from(0.5)).add(pot)
}

/// Step sizes of the central differences.
pub const FD_STEPS: [f64; 2] = [1e-4, 1e-5];
pub const FD_RELATIVE_TOL: f64 = 1e-6;
/// Accepted window for `log10(err(1e-4) / err(1e-5))`; second order gives 2.
pub const FD_ORDER_WINDOW: (f64, f64) = (1.5, 2.5);
/// Below this relative error at the larger step the difference quotient
/// already reproduces the derivative to rounding and the order is not
/// observable.
pub const FD_ORDER_FLOOR: f64 = 1e-12;

/// Outcome of one directional comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdTrial {
    pub analytic: f64,
    /// Relative errors at the two steps of [`FD_STEPS`].
    pub errors: [f64; 2],
}

impl FdTrial {
    pub fn max_error(&self) -> f64 {
        self.errors[0].max(self.errors[1])
    }

    /// `|log10(err ratio) - 2|` measured from the center of the window, or
    /// zero when the order is not observable.
    pub fn order_defect(&self) -> f64 {
        let [e1, e2] = self.errors;
        if e1 <= FD_ORDER_FLOOR {
            return 0.0;
        }
        let center = 0.5 * (FD_ORDER_WINDOW.0 + FD_ORDER_WINDOW.1);
        let slope = libm::log10(e1 / e2);
        if slope.is_nan() {
            return f64::INFINITY;
        }
        libm::fabs(slope - center)
    }
}

/// Compares `(Φ(u + hφ) - Φ(u - hφ)) / 2h` with `Σ g φ`, `g` the Gateaux
/// gradient, for both steps. Errors are relative to `Σ |g φ|`.
pub fn fd_trial(u: &LatticeFunction, dir: &LatticeFunction, params: &ProblemParams) -> Result<FdTrial> {
    let domain = u.domain();
    if dir.domain() != domain {
        return Err(Error::BoxMismatch {
            left: domain.radius(),
            right: dir.domain().radius(),
        });
    }
    let g = gateaux_gradient(u, params);
    let products: Vec<f64> = g.values().iter().zip(dir.values()).map(|(a, b)| a * b).collect();
    let analytic = exact_sum(products.iter().copied());
    let scale = exact_sum(products.iter().map(|v| libm::fabs(*v)));
    let a: Vec<f64> = domain.sites().iter().map(|x| params.a().eval(x)).collect();
    let b: Vec<f64> = domain.sites().iter().map(|x| params.b().eval(x)).collect();
    let mut errors = [0.0; 2];
    for (slot, &h) in errors.iter_mut().zip(FD_STEPS.iter()) {
        let up = phi_along(u.values(), dir.values(), h, domain, &a, &b, params.p(), params.q());
        let down = phi_along(u.values(), dir.values(), -h, domain, &a, &b, params.p(), params.q());
        let fd = up.sub(down).to_f64() / (2.0 * h);
        let diff = libm::fabs(fd - analytic);
        *slot = if diff == 0.0 { 0.0 } else { diff / scale };
    }
    Ok(FdTrial { analytic, errors })
}

/// Accuracy and observed order of the finite-difference comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    pub accuracy: CheckReport,
    pub order: CheckReport,
}

impl FdReport {
    pub fn passed(&self) -> bool {
        self.accuracy.passed && self.order.passed
    }
}

/// `trials` random directions `φ`, uniform on `[-1, 1]` over the box of `u`.
pub fn fd_gradient_check(u: &LatticeFunction, params: &ProblemParams, trials: usize, seed: u64) -> Result<FdReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Worst::new();
    let mut ord = Worst::new();
    for t in 0..trials {
        let dir = random_function(u.domain(), &mut rng);
        let r = fd_trial(u, &dir, params)?;
        acc.record(r.max_error(), || format!("direction {t}"));
        ord.record(r.order_defect(), || format!("direction {t}"));
    }
    Ok(fd_reports("fd_gradient", acc, ord, seed))
}

fn fd_reports(name: &str, acc: Worst, ord: Worst, seed: u64) -> FdReport {
    let half_window = 0.5 * (FD_ORDER_WINDOW.1 - FD_ORDER_WINDOW.0);
    FdReport {
        accuracy: acc.report(format!("{name}_accuracy"), FD_RELATIVE_TOL, seed),
        order: ord.report(format!("{name}_order"), half_window, seed),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiGap {
    /// `|Φ(u) - Φ̄(u)|`.
    pub gap: f64,
    /// `dev_a |u|_p^p / p + dev_b |u|_q^q / q`, the deviations taken over the
    /// profile sites at or beyond the inner radius of `supp u`.
    pub bound: f64,
    /// Rounding allowance for the two energies.
    pub allowance: f64,
}

impl PhiGap {
    pub fn within_bound(&self) -> bool {
        self.gap <= self.bound + self.allowance
    }
}

fn deviation_from(field: &CoefficientField, inner: u64) -> f64 {
    match inner.checked_sub(1) {
        Some(r) => field.tail_deviation(r),
        None => field.profile().iter().fold(0.0, |m, (_, d)| m.max(libm::fabs(*d))),
    }
}

/// Gap between the energy and its limit-coefficient version, with the bound
/// from the coefficient deviations on the support of `u`.
pub fn phi_phibar_gap(u: &LatticeFunction, params: &ProblemParams) -> PhiGap {
    let gap = libm::fabs(phi(u, params) - phi_bar(u, params));
    let Some(inner) = u.support_inner_radius() else {
        return PhiGap {
            gap,
            bound: 0.0,
            allowance: 0.0,
        };
    };
    let (p, q) = (params.p(), params.q());
    let bound = deviation_from(params.a(), inner) * power_sum(u.values(), p) / p
        + deviation_from(params.b(), inner) * power_sum(u.values(), q) / q;
    let magnitude = |pr: &ProblemParams| -> f64 { energy_density(u, pr).iter().map(|d| libm::fabs(*d)).sum() };
    let allowance = 16.0 * f64::EPSILON * (magnitude(params) + magnitude(&params.limit_problem()));
    PhiGap { gap, bound, allowance }
}

/// Values i.i.d. uniform on `[-1, 1]` at every site of `domain`.
pub fn random_function<R: Rng>(domain: &LatticeBox, rng: &mut R) -> LatticeFunction {
    let values = (0..domain.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    LatticeFunction::from_values(domain, values).expect("uniform samples are finite")
}

// A radial-limit field with limit in [0.5, 2] and values in (limit/2,
// 3 limit/2) on a random subset of B_2.
fn random_field<R: Rng>(dim: usize, rng: &mut R) -> CoefficientField {
    let limit = rng.gen_range(0.5..=2.0);
    let table = LatticeBox::new(dim, 2).expect("valid box");
    let mut profile = Vec::new();
    for s in table.sites() {
        if rng.gen_bool(0.6) {
            profile.push((s.clone(), limit * rng.gen_range(-0.49..=0.49)));
        }
    }
    CoefficientField::radial_limit(limit, profile).expect("valid profile")
}

fn random_exponents<R: Rng>(rng: &mut R) -> (f64, f64) {
    let p = rng.gen_range(1.0..=4.0);
    (p, p + rng.gen_range(0.25..=4.0))
}

/// Exponent pairs and dimensions used for the finite-difference sweep.
pub const FD_EXPONENTS: [(f64, f64); 3] = [(2.0, 3.0), (2.0, 4.0), (3.0, 5.0)];
pub const FD_DIMS: [usize; 2] = [2, 3];

/// Sizes of the randomized checks in [`run_verification_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSizes {
    pub functions: usize,
    pub fd_trials: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            functions: 1000,
            fd_trials: 100,
        }
    }
}

/// The full battery of checks, each drawing from its own ChaCha8 stream of
/// `seed`.
pub fn run_verification_suite(seed: u64, sizes: SuiteSizes) -> Result<Vec<CheckReport>> {
    let stream = |id: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        rng
    };
    let boxes = [LatticeBox::new(2, 4)?, LatticeBox::new(3, 4)?];
    let mut reports = Vec::new();

    // Embedding and interpolation over the same random functions.
    let mut rng = stream(1);
    let mut embed = Worst::new();
    let mut interp = Worst::new();
    for n in 0..sizes.functions {
        let domain = &boxes[n % 2];
        let (p, q) = random_exponents(&mut rng);
        let u = random_function(domain, &mut rng);
        let (np, nq) = (scaled_lp_norm(u.values(), p), scaled_lp_norm(u.values(), q));
        embed.record(((nq - np) / np).max(0.0), || format!("function {n}, p = {p}, q = {q}"));
        let (_, sp, sq) = scaled_power_sums(u.values(), p, q);
        interp.record(((sq - sp) / sp).max(0.0), || format!("function {n}, p = {p}, q = {q}"));
    }
    reports.push(embed.report("embedding", 0.0, seed));
    reports.push(interp.report("interpolation", 0.0, seed));

    // Lions: scaled-down copies of random functions, and random sequences.
    let mut rng = stream(2);
    let mut lions = Worst::new();
    for n in 0..sizes.functions / 10 {
        let domain = &boxes[n % 2];
        let (p, q) = random_exponents(&mut rng);
        let u = random_function(domain, &mut rng);
        let terms: Vec<LatticeFunction> = if n % 2 == 0 {
            (1..=10).map(|k| u.scaled(1.0 / k as f64)).collect()
        } else {
            (0..10).map(|_| random_function(domain, &mut rng)).collect()
        };
        let r = lions_decay_check(&FunctionSequence::new(terms, None)?, p, q);
        lions.record(r.defect, || format!("sequence {n}, p = {p}, q = {q}"));
    }
    reports.push(lions.report("lions_decay", 0.0, seed));

    // Brézis–Lieb with a spike escaping from a random B_4 function.
    let mut rng = stream(3);
    let mut disjoint_values = Worst::new();
    let mut disjoint_edges = Worst::new();
    for n in 0..sizes.functions / 10 {
        let dim = 2 + n % 2;
        let small = &boxes[n % 2];
        let big = LatticeBox::new(dim, 24)?;
        let u = random_function(small, &mut rng).resized(&big)?;
        let p = rng.gen_range(1.0..=5.0);
        let terms = (1..=8)
            .map(|k| {
                let spike = LatticeFunction::spike(&big, &Site::axis(dim, 0, 8 + 2 * k), 1.0)?;
                u.try_add(&spike)
            })
            .collect::<Result<Vec<_>>>()?;
        let seq = FunctionSequence::new(terms, None)?;
        let dv = brezis_lieb_defect(&seq, &u, p, BrezisLiebVariant::Values)?;
        let de = brezis_lieb_defect(&seq, &u, p, BrezisLiebVariant::Edges)?;
        disjoint_values.record(dv, || format!("function {n}, p = {p}"));
        disjoint_edges.record(de, || format!("function {n}, p = {p}"));
    }
    reports.push(disjoint_values.report("brezis_lieb_disjoint_values", 0.0, seed));
    reports.push(disjoint_edges.report("brezis_lieb_disjoint_edges", 0.0, seed));

    // Brézis–Lieb along u + δ_s / n with p = 2, predicted defect 2|u(s)| / n.
    let mut rng = stream(4);
    let mut perturb = Worst::new();
    for n in 0..sizes.functions / 10 {
        let domain = &boxes[n % 2];
        let u = random_function(domain, &mut rng);
        let s = rng.gen_range(0..domain.len());
        let terms = (1..=10)
            .map(|k| {
                let bump = LatticeFunction::spike(domain, domain.site(s), 1.0 / k as f64)?;
                u.try_add(&bump)
            })
            .collect::<Result<Vec<_>>>()?;
        let h = seq_last_bump(&terms, &u, s);
        let seq = FunctionSequence::new(terms, None)?;
        let measured = brezis_lieb_defect(&seq, &u, 2.0, BrezisLiebVariant::Values)?;
        let predicted = libm::fabs(2.0 * u.values()[s] * h);
        perturb.record(libm::fabs(measured - predicted), || {
            format!("function {n}, site {}", domain.site(s))
        });
    }
    reports.push(perturb.report("brezis_lieb_perturbation", 1e-10, seed));

    // Norm equivalence with random variable fields.
    let mut rng = stream(5);
    let mut equiv = Worst::new();
    for n in 0..sizes.functions {
        let domain = &boxes[n % 2];
        let (p, q) = random_exponents(&mut rng);
        let a = random_field(domain.dim(), &mut rng);
        let b = random_field(domain.dim(), &mut rng);
        let u = random_function(domain, &mut rng);
        let r = norm_equivalence_ratio(&u, p, q, &a, &b)?;
        equiv.record(r.excess(), || format!("function {n}, p = {p}, q = {q}"));
    }
    reports.push(equiv.report("norm_equivalence", 0.0, seed));

    // Φ/Φ̄ gap against its bound; every other function avoids the profile.
    let mut rng = stream(6);
    let mut gaps = Worst::new();
    for n in 0..sizes.functions {
        let dim = 2 + n % 2;
        let domain = LatticeBox::new(dim, 6)?;
        let (p0, q0) = random_exponents(&mut rng);
        let (p, q) = (p0 + 1.0, q0 + 1.0);
        let params = ProblemParams::new(dim, p, q, random_field(dim, &mut rng), random_field(dim, &mut rng), 1.0)?;
        let full = random_function(&domain, &mut rng);
        // Profiles live on B_2, so an inner radius of 3 avoids them.
        let inner = if n % 4 < 2 { 0 } else { 3 + (n % 2) as u64 };
        let vals: Vec<f64> = domain
            .sites()
            .iter()
            .zip(full.values())
            .map(|(x, &v)| if x.l1_norm() >= inner { v } else { 0.0 })
            .collect();
        let u = LatticeFunction::from_values(&domain, vals)?;
        let g = phi_phibar_gap(&u, &params);
        let excess = (g.gap - g.bound - g.allowance).max(0.0);
        gaps.record(excess, || format!("function {n}, p = {p}, q = {q}"));
    }
    reports.push(gaps.report("phi_phibar_gap", 0.0, seed));

    // Finite differences of Φ against the Gateaux gradient.
    let mut id = 7;
    for &dim in &FD_DIMS {
        for &(p, q) in &FD_EXPONENTS {
            let mut rng = stream(id);
            id += 1;
            let domain = &boxes[dim - 2];
            let mut acc = Worst::new();
            let mut ord = Worst::new();
            for t in 0..sizes.fd_trials {
                let (a, b) = if t % 2 == 0 {
                    (
                        CoefficientField::constant(rng.gen_range(0.5..=2.0))?,
                        CoefficientField::constant(rng.gen_range(0.5..=2.0))?,
                    )
                } else {
                    (random_field(dim, &mut rng), random_field(dim, &mut rng))
                };
                let params = ProblemParams::new(dim, p, q, a, b, 1.0)?;
                let u = random_function(domain, &mut rng);
                let dir = random_function(domain, &mut rng);
                let r = fd_trial(&u, &dir, &params)?;
                acc.record(r.max_error(), || format!("trial {t}"));
                ord.record(r.order_defect(), || format!("trial {t}"));
            }
            let fd = fd_reports(&format!("fd_gradient_n{dim}_p{p}_q{q}"), acc, ord, seed);
            reports.push(fd.accuracy);
            reports.push(fd.order);
        }
    }
    Ok(reports)
}

// The perturbation size of the last term, read back from the data so that
// the prediction uses the same rounded value.
fn seq_last_bump(terms: &[LatticeFunction], u: &LatticeFunction, s: usize) -> f64 {
    let last = terms.last().expect("nonempty");
    last.values()[s] - u.values()[s]
}
