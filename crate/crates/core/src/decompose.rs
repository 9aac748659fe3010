//! Bubble decomposition of function sequences.
//!
//! A finite sequence `u_1, ..., u_n` stands in for a Palais-Smale sequence.
//! Its weak limit is replaced by the last term seen through a fixed window,
//! and the splitting `u_n = u_(0) + Σ u_(i)(· - y_n^i) + o(1)` is carried out by
//! repeatedly locating the maximum of the remainder, recentering there and
//! reading off a profile, until the remainder vanishes in sup norm.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::functionals::{j2, phi, phi_bar, residual_norm, ProblemParams};
use crate::lattice::{graph_distance, LatticeBox, LatticeFunction, Site};

/// Largest change between the last two terms for a window site to count as
/// settled.
pub const DEFAULT_STABILIZATION_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_BUBBLES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSequence {
    terms: Vec<LatticeFunction>,
    level: Option<f64>,
}

impl FunctionSequence {
    pub fn new(terms: Vec<LatticeFunction>, level: Option<f64>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidSequence("no terms".into()));
        };
        let dim = first.domain().dim();
        if let Some(t) = terms.iter().find(|t| t.domain().dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: t.domain().dim(),
            });
        }
        Ok(FunctionSequence { terms, level })
    }

    pub fn terms(&self) -> &[LatticeFunction] {
        &self.terms
    }

    pub fn last(&self) -> &LatticeFunction {
        self.terms.last().expect("sequences are nonempty")
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.terms[0].domain().dim()
    }

    pub fn level(&self) -> Option<f64> {
        self.level
    }

    pub fn with_level(mut self, level: f64) -> Self {
        self.level = Some(level);
        self
    }

    fn min_radius(&self) -> u32 {
        self.terms.iter().map(|t| t.domain().radius()).min().unwrap_or(0)
    }
}

/// True when every track moves strictly outward and every pair of tracks
/// separates strictly, term by term.
pub fn tracks_diverge(tracks: &[Vec<Site>]) -> bool {
    fn increasing(mut d: impl Iterator<Item = u64>) -> bool {
        let mut prev = None;
        d.all(|x| {
            let ok = prev.is_none_or(|p| x > p);
            prev = Some(x);
            ok
        })
    }
    for (i, ti) in tracks.iter().enumerate() {
        if !increasing(ti.iter().map(Site::l1_norm)) {
            return false;
        }
        for tj in &tracks[i + 1..] {
            if ti.len() != tj.len() {
                return false;
            }
            let gaps = ti.iter().zip(tj).map(|(a, b)| graph_distance(a, b).unwrap_or(0));
            if !increasing(gaps) {
                return false;
            }
        }
    }
    true
}

/// `u_n = u0 + Σ_i u_(i)(· - y_n^i)` sampled on the `n`-th box.
pub fn synthesize_sequence(
    u0: &LatticeFunction,
    bubbles: &[LatticeFunction],
    tracks: &[Vec<Site>],
    boxes: &[LatticeBox],
) -> Result<FunctionSequence> {
    if boxes.is_empty() {
        return Err(Error::InvalidSequence("no boxes".into()));
    }
    if tracks.len() != bubbles.len() {
        return Err(Error::InvalidSequence(format!(
            "{} bubbles but {} center tracks",
            bubbles.len(),
            tracks.len()
        )));
    }
    if let Some(t) = tracks.iter().find(|t| t.len() != boxes.len()) {
        return Err(Error::InvalidSequence(format!(
            "track of length {} for {} terms",
            t.len(),
            boxes.len()
        )));
    }
    if !tracks_diverge(tracks) {
        return Err(Error::TracksNotDiverging);
    }
    let terms = boxes
        .iter()
        .enumerate()
        .map(|(n, domain)| {
            let mut term = u0.resized(domain)?;
            for (bubble, track) in bubbles.iter().zip(tracks) {
                term = term.try_add(&bubble.shifted_into(&track[n].negated(), domain)?)?;
            }
            Ok(term)
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionSequence::new(terms, None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowLimit {
    /// The last term restricted to `B_window`.
    pub limit: LatticeFunction,
    /// Window sites where the last two terms differ by more than the
    /// stabilization tolerance.
    pub unstable: Vec<Site>,
}

impl WindowLimit {
    pub fn is_settled(&self) -> bool {
        self.unstable.is_empty()
    }
}

pub fn pointwise_limit(seq: &FunctionSequence, window: u32) -> Result<WindowLimit> {
    pointwise_limit_with_tol(seq, window, DEFAULT_STABILIZATION_TOL)
}

pub fn pointwise_limit_with_tol(seq: &FunctionSequence, window: u32, tol: f64) -> Result<WindowLimit> {
    if window > seq.min_radius() {
        return Err(Error::InvalidSequence(format!(
            "window {window} exceeds the smallest box radius {}",
            seq.min_radius()
        )));
    }
    let window_box = LatticeBox::new(seq.dim(), window)?;
    let limit = seq.last().resized(&window_box)?;
    let unstable = match seq.terms.len() {
        0 | 1 => Vec::new(),
        n => {
            let before = seq.terms[n - 2].resized(&window_box)?;
            window_box
                .sites()
                .iter()
                .zip(limit.values().iter().zip(before.values()))
                .filter(|(_, (a, b))| !(libm::fabs(*a - *b) <= tol))
                .map(|(s, _)| s.clone())
                .collect()
        }
    };
    Ok(WindowLimit { limit, unstable })
}

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    /// Vanishing threshold; `None` means `|u_last|_∞ / 1000`.
    pub sigma: Option<f64>,
    pub window: u32,
    pub max_bubbles: usize,
    /// Bubbles with `Φ̄` below this floor are not extracted.
    pub energy_floor: Option<f64>,
    pub stabilization_tol: f64,
    /// `λ0` of the constrained problem, enabling the height-bound
    /// diagnostics for minimizing sequences.
    pub lambda0: Option<f64>,
}

impl ExtractOptions {
    pub fn new(window: u32) -> Self {
        ExtractOptions {
            sigma: None,
            window,
            max_bubbles: DEFAULT_MAX_BUBBLES,
            energy_floor: None,
            stabilization_tol: DEFAULT_STABILIZATION_TOL,
            lambda0: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Bubble {
    /// The profile `u_(i)`, centered at the origin.
    pub profile: LatticeFunction,
    /// `y_n^i` for every term `n`.
    pub track: Vec<Site>,
    pub phi_bar: f64,
    /// `J2(u_(i))`.
    pub mass: f64,
    /// `σ_i = |u_(i)|_∞`.
    pub height: f64,
    /// Residual of the limit equation at the profile.
    pub residual: f64,
    pub unstable_sites: usize,
    /// Lower bound on the height valid for minimizing sequences, when `λ0`
    /// was supplied.
    pub height_bound: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtractionStop {
    /// The remainder fell below `σ` in sup norm.
    Vanishing,
    /// The next profile had `Φ̄` below the configured floor.
    EnergyFloor,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub u0: LatticeFunction,
    pub phi_u0: f64,
    pub u0_unstable_sites: usize,
    pub bubbles: Vec<Bubble>,
    pub sigma: f64,
    /// Sup norm of what is left of the last term.
    pub remainder_sup: f64,
    pub stop: ExtractionStop,
}

impl Decomposition {
    pub fn k(&self) -> usize {
        self.bubbles.len()
    }

    pub fn center_tracks(&self) -> Vec<Vec<Site>> {
        self.bubbles.iter().map(|b| b.track.clone()).collect()
    }
}

/// `[(deficit) / (c β (1 + λ0))]^{1/(q-p)}` with `c = 1` for the first
/// profile and `c = 2` afterwards.
pub fn nonvanishing_height_bound(deficit: f64, first: bool, params: &ProblemParams, lambda0: f64) -> f64 {
    let c = if first { 1.0 } else { 2.0 };
    let base = deficit.max(0.0) / (c * params.beta() * (1.0 + lambda0));
    libm::pow(base, 1.0 / (params.q() - params.p()))
}

pub fn extract_bubbles(seq: &FunctionSequence, params: &ProblemParams, opts: &ExtractOptions) -> Result<Decomposition> {
    if seq.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            found: seq.dim(),
        });
    }
    let sigma = opts.sigma.unwrap_or_else(|| seq.last().sup_norm() / 1000.0);
    if !(sigma > 0.0) {
        return Err(Error::InvalidParams(format!(
            "vanishing threshold {sigma} must be positive"
        )));
    }
    let window_box = LatticeBox::new(seq.dim(), opts.window)?;
    let base = pointwise_limit_with_tol(seq, opts.window, opts.stabilization_tol)?;
    let u0 = base.limit;
    let limit_params = params.limit_problem();

    let mut remainders = seq
        .terms()
        .iter()
        .map(|t| t.try_sub(&u0.resized(t.domain())?))
        .collect::<Result<Vec<_>>>()?;
    let mut mass_used = j2(&u0, params);
    let mut bubbles: Vec<Bubble> = Vec::new();

    let stop = loop {
        let remainder_sup = remainders.last().expect("nonempty").sup_norm();
        if remainder_sup < sigma {
            break ExtractionStop::Vanishing;
        }
        if bubbles.len() >= opts.max_bubbles {
            let partial = finish(
                u0,
                params,
                base.unstable.len(),
                bubbles,
                sigma,
                &remainders,
                ExtractionStop::Vanishing,
            );
            return Err(Error::TooManyBubbles {
                max: opts.max_bubbles,
                remainder_sup,
                partial: Box::new(partial),
            });
        }

        let track: Vec<Site> = remainders
            .iter()
            .map(|r| match r.argmax_abs() {
                Some(i) => r.domain().site(i).clone(),
                None => Site::origin(r.domain().dim()),
            })
            .collect();
        let recentered = remainders
            .iter()
            .zip(&track)
            .map(|(r, y)| r.shifted_into(y, &window_box))
            .collect::<Result<Vec<_>>>()?;
        let profile = pointwise_limit_with_tol(
            &FunctionSequence::new(recentered, None)?,
            opts.window,
            opts.stabilization_tol,
        )?;

        let energy = phi_bar(&profile.limit, params);
        if opts.energy_floor.is_some_and(|floor| energy < floor) {
            break ExtractionStop::EnergyFloor;
        }
        for (r, y) in remainders.iter_mut().zip(&track) {
            *r = r.try_sub(&profile.limit.shifted_into(&y.negated(), r.domain())?)?;
        }

        let mass = j2(&profile.limit, params);
        let height_bound = opts
            .lambda0
            .map(|l0| nonvanishing_height_bound(1.0 - mass_used, false, params, l0));
        mass_used += mass;
        bubbles.push(Bubble {
            phi_bar: energy,
            mass,
            height: profile.limit.sup_norm(),
            residual: residual_norm(&profile.limit, &limit_params),
            unstable_sites: profile.unstable.len(),
            height_bound,
            track,
            profile: profile.limit,
        });
    };
    Ok(finish(
        u0,
        params,
        base.unstable.len(),
        bubbles,
        sigma,
        &remainders,
        stop,
    ))
}

fn finish(
    u0: LatticeFunction,
    params: &ProblemParams,
    u0_unstable_sites: usize,
    bubbles: Vec<Bubble>,
    sigma: f64,
    remainders: &[LatticeFunction],
    stop: ExtractionStop,
) -> Decomposition {
    Decomposition {
        phi_u0: phi(&u0, params),
        u0,
        u0_unstable_sites,
        bubbles,
        sigma,
        remainder_sup: remainders.last().map_or(0.0, LatticeFunction::sup_norm),
        stop,
    }
}

/// `|c - Φ(u_(0)) - Σ Φ̄(u_(i))|`.
pub fn energy_identity_check(dec: &Decomposition, params: &ProblemParams, level: f64) -> f64 {
    let mut total = phi(&dec.u0, params);
    for b in &dec.bubbles {
        total += phi_bar(&b.profile, params);
    }
    libm::fabs(level - total)
}

/// Every center track escapes and every pair of tracks separates.
pub fn separation_check(dec: &Decomposition) -> bool {
    tracks_diverge(&dec.center_tracks())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn boxes(radii: &[u32]) -> Vec<LatticeBox> {
        radii.iter().map(|&r| LatticeBox::new(2, r).unwrap()).collect()
    }

    fn bump(domain: &LatticeBox, height: f64) -> LatticeFunction {
        LatticeFunction::from_fn(domain, |x| height * libm::pow(0.3, x.l1_norm() as f64)).unwrap()
    }

    #[test]
    fn separation_examples() {
        let t = |f: fn(i64) -> [i64; 2]| (1..=5).map(|n| Site::from(f(n))).collect::<Vec<_>>();
        assert!(tracks_diverge(&[t(|n| [4 * n, 0]), t(|n| [-4 * n, 0])]));
        assert!(!tracks_diverge(&[t(|_| [3, 0])]));
        assert!(!tracks_diverge(&[t(|n| [4 * n, 0]), t(|n| [4 * n, 1])]));
    }

    #[test]
    fn synthesized_terms_are_translates() {
        let small = LatticeBox::new(2, 3).unwrap();
        let u = bump(&small, 1.0);
        let bxs = boxes(&[30, 30, 30, 30, 30]);
        let track: Vec<Site> = (1..=5).map(|n| Site::from([4 * n, 0])).collect();
        let seq = synthesize_sequence(
            &LatticeFunction::zeros(&small),
            core::slice::from_ref(&u),
            core::slice::from_ref(&track),
            &bxs,
        )
        .unwrap();
        assert_eq!(seq.len(), 5);
        for (term, y) in seq.terms().iter().zip(&track) {
            assert_eq!(term.shifted_into(y, &small).unwrap(), u);
        }

        let constant = synthesize_sequence(&u, &[], &[], &boxes(&[5, 5, 5])).unwrap();
        assert!(constant.terms().iter().all(|t| t.resized(&small).unwrap() == u));

        let stuck = vec![vec![Site::from([3, 0]); 5]];
        assert!(matches!(
            synthesize_sequence(&u, core::slice::from_ref(&u), &stuck, &bxs),
            Err(Error::TracksNotDiverging)
        ));
    }

    #[test]
    fn pointwise_limit_examples() {
        let small = LatticeBox::new(2, 3).unwrap();
        let u = bump(&small, 1.0);
        let constant = synthesize_sequence(&u, &[], &[], &boxes(&[6, 6])).unwrap();
        let lim = pointwise_limit(&constant, 3).unwrap();
        assert_eq!(lim.limit, u);
        assert!(lim.is_settled());

        let track: Vec<Site> = (1..=5).map(|n| Site::from([5 * n, 0])).collect();
        let escaping = synthesize_sequence(
            &LatticeFunction::zeros(&small),
            core::slice::from_ref(&u),
            core::slice::from_ref(&track),
            &boxes(&[30; 5]),
        )
        .unwrap();
        assert!(pointwise_limit(&escaping, 4).unwrap().limit.is_zero());

        let both = synthesize_sequence(&u, core::slice::from_ref(&u), &[track], &boxes(&[30; 5])).unwrap();
        assert_eq!(pointwise_limit(&both, 3).unwrap().limit, u);
        assert!(pointwise_limit(&both, 31).is_err());
    }

    #[test]
    fn constant_sequence_has_no_bubbles() {
        let small = LatticeBox::new(2, 3).unwrap();
        let u = bump(&small, 1.0);
        let params = ProblemParams::constant(2, 2.0, 4.0, 1.0, 1.0, 1.0).unwrap();
        let seq = synthesize_sequence(&u, &[], &[], &boxes(&[5, 5, 5])).unwrap();
        let mut opts = ExtractOptions::new(3);
        opts.sigma = Some(1e-6);
        let dec = extract_bubbles(&seq, &params, &opts).unwrap();
        assert_eq!(dec.k(), 0);
        assert_eq!(dec.u0, u);
        assert_eq!(dec.remainder_sup, 0.0);
        assert_eq!(energy_identity_check(&dec, &params, phi(&u, &params)), 0.0);
    }

    #[test]
    fn bubble_budget_is_enforced() {
        let small = LatticeBox::new(2, 2).unwrap();
        let u = bump(&small, 1.0);
        let w = bump(&small, 0.5);
        let bxs = boxes(&[60; 4]);
        let t1: Vec<Site> = (1..=4).map(|n| Site::from([10 * n, 0])).collect();
        let t2: Vec<Site> = (1..=4).map(|n| Site::from([-10 * n, 0])).collect();
        let seq = synthesize_sequence(&LatticeFunction::zeros(&small), &[u, w], &[t1, t2], &bxs).unwrap();
        let params = ProblemParams::constant(2, 2.0, 4.0, 1.0, 1.0, 1.0).unwrap();
        let mut opts = ExtractOptions::new(2);
        opts.max_bubbles = 1;
        match extract_bubbles(&seq, &params, &opts) {
            Err(Error::TooManyBubbles { partial, max, .. }) => {
                assert_eq!(max, 1);
                assert_eq!(partial.k(), 1);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        opts.max_bubbles = 8;
        opts.energy_floor = Some(1e6);
        let dec = extract_bubbles(&seq, &params, &opts).unwrap();
        assert_eq!((dec.k(), dec.stop), (0, ExtractionStop::EnergyFloor));
    }
}
