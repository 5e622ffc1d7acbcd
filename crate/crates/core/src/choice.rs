//! Discrete random choices behind a small trait.
//!
//! Every randomized routine in this crate draws through [`Source`] instead of
//! calling an RNG directly. A real RNG implements it through the blanket impl;
//! [`Replay`] implements it by walking every branch of the decision tree, which
//! turns "the expectation over the sampler's randomness" into an exact finite
//! sum that tests can compare against dense linear algebra.

use rand::{Rng, RngCore};

/// One discrete decision.
#[derive(Clone, Copy, Debug)]
pub enum Draw<'a> {
    /// Returns 1 with probability `p`, else 0.
    Coin(f64),
    /// Uniform on `0..n`, `n ≥ 1`.
    Uniform(usize),
    /// Index `i` with probability `w[i]` (weights sum to 1).
    Weighted(&'a [f64]),
    /// `t ≥ 1` with probability `2^{-t}`.
    Geometric,
    /// `t ∈ {0, …, t_max}` with `P(0) = 2^{-t_max}` and `P(t) = 2^{-t}` for `t ≥ 1`.
    Truncated(usize),
}

impl Draw<'_> {
    /// Number of outcomes and their probabilities; `None` for unbounded draws.
    pub fn outcomes(&self) -> Option<Vec<f64>> {
        match *self {
            Draw::Coin(p) => Some(vec![1.0 - p, p]),
            Draw::Uniform(n) => Some(vec![1.0 / n as f64; n]),
            Draw::Weighted(w) => Some(w.to_vec()),
            Draw::Geometric => None,
            Draw::Truncated(t_max) => {
                let mut v = Vec::with_capacity(t_max + 1);
                v.push(0.5f64.powi(t_max as i32));
                for t in 1..=t_max {
                    v.push(0.5f64.powi(t as i32));
                }
                Some(v)
            }
        }
    }
}

/// Something that resolves [`Draw`]s to outcomes.
pub trait Source {
    fn draw(&mut self, d: Draw<'_>) -> usize;
}

impl<R: RngCore + ?Sized> Source for R {
    fn draw(&mut self, d: Draw<'_>) -> usize {
        match d {
            Draw::Coin(p) => usize::from(self.random::<f64>() < p),
            Draw::Uniform(n) => self.random_range(0..n),
            Draw::Weighted(w) => {
                let u: f64 = self.random();
                let mut acc = 0.0;
                for (i, &p) in w.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return i;
                    }
                }
                // Floating-point shortfall: return the last nonzero outcome.
                w.iter().rposition(|&p| p > 0.0).unwrap_or(0)
            }
            Draw::Geometric => geometric(self),
            Draw::Truncated(t_max) => {
                let g = geometric(self);
                if g < t_max {
                    g
                } else if self.random::<bool>() {
                    t_max
                } else {
                    0
                }
            }
        }
    }
}

/// `1 + (number of leading fair-coin tails)`, i.e. `P(t) = 2^{-t}`.
fn geometric<R: RngCore + ?Sized>(rng: &mut R) -> usize {
    let mut t = 1;
    loop {
        let w = rng.next_u64();
        if w != 0 {
            return t + w.trailing_zeros() as usize;
        }
        t += 64;
    }
}

/// Wraps a source and logs every outcome it returns.
pub struct Recording<'s, S: Source + ?Sized> {
    inner: &'s mut S,
    log: Vec<u32>,
}

impl<'s, S: Source + ?Sized> Recording<'s, S> {
    pub fn new(inner: &'s mut S) -> Self {
        Recording {
            inner,
            log: Vec::new(),
        }
    }

    pub fn into_transcript(self) -> Vec<u32> {
        self.log
    }
}

impl<S: Source + ?Sized> Source for Recording<'_, S> {
    fn draw(&mut self, d: Draw<'_>) -> usize {
        let out = self.inner.draw(d);
        self.log.push(out as u32);
        out
    }
}

/// Replays a fixed transcript of outcomes. Panics when it runs out.
pub struct Scripted<'a> {
    script: &'a [u32],
    pos: usize,
}

impl<'a> Scripted<'a> {
    pub fn new(script: &'a [u32]) -> Self {
        Scripted { script, pos: 0 }
    }
}

impl Source for Scripted<'_> {
    fn draw(&mut self, _d: Draw<'_>) -> usize {
        let v = self.script[self.pos];
        self.pos += 1;
        v as usize
    }
}

struct Step {
    choice: usize,
    probs: Vec<f64>,
}

/// Depth-first enumeration of every branch of a randomized computation.
///
/// The computation is re-run once per branch; each run follows a fixed prefix
/// of decisions and takes the first positive-probability outcome afterwards.
pub struct Replay {
    steps: Vec<Step>,
    pos: usize,
}

impl Source for Replay {
    fn draw(&mut self, d: Draw<'_>) -> usize {
        if self.pos < self.steps.len() {
            let c = self.steps[self.pos].choice;
            self.pos += 1;
            return c;
        }
        let probs = d
            .outcomes()
            .expect("unbounded draws cannot be enumerated");
        let choice = probs
            .iter()
            .position(|&p| p > 0.0)
            .expect("draw with no positive-probability outcome");
        self.steps.push(Step { choice, probs });
        self.pos += 1;
        choice
    }
}

impl Replay {
    /// Runs `f` on every branch, returning `(probability, result)` pairs.
    ///
    /// Returns `None` if more than `max_branches` branches exist.
    pub fn enumerate<T>(
        max_branches: usize,
        mut f: impl FnMut(&mut Replay) -> T,
    ) -> Option<Vec<(f64, T)>> {
        let mut out = Vec::new();
        let mut r = Replay {
            steps: Vec::new(),
            pos: 0,
        };
        loop {
            r.pos = 0;
            let value = f(&mut r);
            // Anything recorded past the consumed prefix belongs to a stale branch.
            r.steps.truncate(r.pos);
            let p: f64 = r.steps.iter().map(|s| s.probs[s.choice]).product();
            out.push((p, value));
            if out.len() > max_branches {
                return None;
            }
            // Advance to the next branch in depth-first order.
            loop {
                let Some(last) = r.steps.last_mut() else {
                    return Some(out);
                };
                let next = (last.choice + 1..last.probs.len()).find(|&i| last.probs[i] > 0.0);
                match next {
                    Some(i) => {
                        last.choice = i;
                        break;
                    }
                    None => {
                        r.steps.pop();
                    }
                }
            }
        }
    }
}
