#![allow(dead_code)]

//! Reference computations that do not go through the library's solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Constrained problem on the radius-one box of `Z^2`: a center joined to
/// four leaves, each leaf with three further edges to the (zero) exterior.
///
/// `F(w) = J1(w / (β^{1/q} |w|_q))` is minimized by coordinate descent, each
/// coordinate solved exactly by bisection on the hand-derived partial
/// derivative, from many random nonnegative starts.
pub struct StarOracle {
    pub a: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
}

pub struct StarMinimum {
    /// Center value first, then the four leaves.
    pub u: [f64; 5],
    pub lambda0: f64,
    pub lambda: f64,
    pub stationarity: f64,
}

impl StarOracle {
    fn gradient_energy(w: &[f64; 5]) -> f64 {
        let c = w[0];
        w[1..].iter().map(|&l| (c - l) * (c - l) + 3.0 * l * l).sum()
    }

    fn scale(&self, w: &[f64; 5]) -> f64 {
        let c: f64 = w.iter().map(|v| v.powf(self.q)).sum();
        (self.beta * c).powf(-1.0 / self.q)
    }

    pub fn objective(&self, w: &[f64; 5]) -> f64 {
        let s = self.scale(w);
        let g = Self::gradient_energy(w);
        let pp: f64 = w.iter().map(|v| v.powf(self.p)).sum();
        0.5 * g * s * s + self.a / self.p * pp * s.powf(self.p)
    }

    pub fn partial(&self, w: &[f64; 5], i: usize) -> f64 {
        let s = self.scale(w);
        let g = Self::gradient_energy(w);
        let pp: f64 = w.iter().map(|v| v.powf(self.p)).sum();
        let cq: f64 = w.iter().map(|v| v.powf(self.q)).sum();
        let dg = if i == 0 {
            2.0 * w[1..].iter().map(|&l| w[0] - l).sum::<f64>()
        } else {
            -2.0 * (w[0] - w[i]) + 6.0 * w[i]
        };
        let ds = -s * w[i].powf(self.q - 1.0) / cq;
        0.5 * dg * s * s
            + self.a * w[i].powf(self.p - 1.0) * s.powf(self.p)
            + ds * (g * s + self.a * pp * s.powf(self.p - 1.0))
    }

    fn stationarity(&self, w: &[f64; 5]) -> f64 {
        (0..5)
            .map(|i| {
                let d = self.partial(w, i);
                // At a zero coordinate only a negative slope is a violation.
                if w[i] == 0.0 {
                    (-d).max(0.0)
                } else {
                    d.abs()
                }
            })
            .fold(0.0, f64::max)
    }

    fn normalized(&self, w: &[f64; 5]) -> [f64; 5] {
        let s = self.scale(w);
        w.map(|v| v * s)
    }

    fn solve_coordinate(&self, w: &mut [f64; 5], i: usize) {
        let at = |w: &[f64; 5], t: f64| {
            let mut v = *w;
            v[i] = t;
            self.partial(&v, i)
        };
        let others_zero = w.iter().enumerate().all(|(j, &v)| j == i || v == 0.0);
        let mut lo = 0.0;
        if !others_zero && at(w, lo) >= 0.0 {
            w[i] = 0.0;
            return;
        }
        if others_zero {
            lo = 1e-300;
        }
        let mut hi = w[i].max(1e-3);
        let mut grown = 0;
        while at(w, hi) < 0.0 && grown < 200 {
            lo = hi;
            hi *= 2.0;
            grown += 1;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if at(w, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        w[i] = 0.5 * (lo + hi);
    }

    fn descend(&self, mut w: [f64; 5], target: f64) -> ([f64; 5], f64) {
        for _ in 0..200_000 {
            for i in 0..5 {
                self.solve_coordinate(&mut w, i);
            }
            w = self.normalized(&w);
            let st = self.stationarity(&w);
            if st <= target {
                return (w, st);
            }
        }
        let st = self.stationarity(&w);
        (w, st)
    }

    pub fn minimize(&self, starts: usize, seed: u64, target: f64) -> StarMinimum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<([f64; 5], f64, f64)> = None;
        for _ in 0..starts {
            let w0: [f64; 5] = core::array::from_fn(|_| rng.gen_range(0.0..1.0));
            let (w, st) = self.descend(w0, target);
            let f = self.objective(&w);
            if best.as_ref().is_none_or(|b| f < b.1) {
                best = Some((w, f, st));
            }
        }
        let (u, lambda0, stationarity) = best.expect("at least one start");
        let g = Self::gradient_energy(&u);
        let pp: f64 = u.iter().map(|v| v.powf(self.p)).sum();
        StarMinimum {
            u,
            lambda0,
            lambda: (g + self.a * pp) / self.q,
            stationarity,
        }
    }
}

/// Number of points of `Z^N` with `|x|_1 <= R`, by the closed form
/// `Σ_k 2^k C(N,k) C(R,k)`.
pub fn l1_ball_count(dim: u64, radius: u64) -> u64 {
    fn binom(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    (0..=dim.min(radius))
        .map(|k| (1 << k) * binom(dim, k) * binom(radius, k))
        .sum()
}
