//! Exact spectrum statistics by exhaustive enumeration.
//!
//! The `2^n` states are split into blocks on their high bits. Each block is
//! swept in reflected Gray-code order over its low bits: the first state's
//! energy is evaluated directly, every later state differs in one bit and is
//! reached through a single-flip energy delta. Running energies use
//! Neumaier-compensated summation. The block layout depends only on `n`, so
//! results do not depend on how many workers process the blocks.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::{unpack, QuboInstance, SpectrumSummary};

/// Energies within this absolute distance of the minimum count as ground states.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Largest `n` enumerated without an explicit override.
pub const DEFAULT_MAX_VARS: usize = 28;
/// Largest `n` enumerated at all.
pub const HARD_MAX_VARS: usize = 32;
/// Gray-code sweep length per block is `2^BLOCK_BITS` (or `2^n` if smaller).
const BLOCK_BITS: usize = 16;

#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerateOptions {
    /// Permit `DEFAULT_MAX_VARS < n <= HARD_MAX_VARS`.
    pub allow_large: bool,
}

pub fn enumerate_spectrum(q: &QuboInstance) -> Result<SpectrumSummary> {
    enumerate_spectrum_with(q, EnumerateOptions::default())
}

pub fn enumerate_spectrum_with(q: &QuboInstance, opts: EnumerateOptions) -> Result<SpectrumSummary> {
    let n = q.n();
    if n > HARD_MAX_VARS {
        return Err(Error::contract(format!("enumeration supports at most {HARD_MAX_VARS} variables, got {n}")));
    }
    if n > DEFAULT_MAX_VARS && !opts.allow_large {
        return Err(Error::contract(format!(
            "n = {n} exceeds the default enumeration limit of {DEFAULT_MAX_VARS}; pass an explicit override"
        )));
    }

    let sweep = Sweep::new(q);
    let low_bits = n.min(BLOCK_BITS);
    let blocks = 1u64 << (n - low_bits);
    let partials: Vec<Partial> = if blocks == 1 {
        vec![sweep.block(0, low_bits)]
    } else {
        (0..blocks).into_par_iter().map(|b| sweep.block(b, low_bits)).collect()
    };
    let total = partials.into_iter().reduce(Partial::merge).expect("at least one block");

    let second = total.second.is_finite().then_some(total.second);
    Ok(SpectrumSummary {
        min_energy: total.min,
        second_energy: second,
        gap: second.map(|s| s - total.min),
        ground_degeneracy: total.count,
        ground_state: unpack(total.min_index, n),
    })
}

/// Distinct-value spectral gap; `None` when every state has the same energy.
pub fn spectral_gap(q: &QuboInstance) -> Result<Option<f64>> {
    Ok(enumerate_spectrum(q)?.gap)
}

struct Sweep<'a> {
    q: &'a QuboInstance,
    n: usize,
    diag: Vec<f64>,
    /// Symmetric off-diagonal couplings, row-major, zero diagonal.
    coupling: Vec<f64>,
}

impl<'a> Sweep<'a> {
    fn new(q: &'a QuboInstance) -> Self {
        let n = q.n();
        let mut coupling = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                coupling[i * n + j] = q.get(i, j);
                coupling[j * n + i] = q.get(i, j);
            }
        }
        Self { q, n, diag: (0..n).map(|i| q.get(i, i)).collect(), coupling }
    }

    #[inline]
    fn delta(&self, state: u64, bit: usize) -> f64 {
        let row = &self.coupling[bit * self.n..(bit + 1) * self.n];
        let mut field = self.diag[bit];
        let mut rest = state & !(1u64 << bit);
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            field += row[j];
            rest &= rest - 1;
        }
        if state >> bit & 1 == 0 {
            field
        } else {
            -field
        }
    }

    fn block(&self, block: u64, low_bits: usize) -> Partial {
        let mut state = block << low_bits;
        let mut energy = Compensated::new(self.q.energy_packed(state));
        let mut acc = Partial::start(energy.value(), state);
        for t in 1..1u64 << low_bits {
            let bit = t.trailing_zeros() as usize;
            energy.add(self.delta(state, bit));
            state ^= 1 << bit;
            acc.observe(energy.value(), state);
        }
        acc
    }
}

/// Neumaier summation.
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn new(v: f64) -> Self {
        Self { sum: v, comp: 0.0 }
    }

    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    min: f64,
    min_index: u64,
    count: u64,
    /// Lowest energy above `min + DEGENERACY_TOL`, or +inf.
    second: f64,
}

impl Partial {
    fn start(e: f64, index: u64) -> Self {
        Self { min: e, min_index: index, count: 1, second: f64::INFINITY }
    }

    #[inline]
    fn observe(&mut self, e: f64, index: u64) {
        if e < self.min - DEGENERACY_TOL {
            self.second = self.min;
            self.min = e;
            self.min_index = index;
            self.count = 1;
        } else if e <= self.min + DEGENERACY_TOL {
            self.count += 1;
            self.min_index = self.min_index.min(index);
            self.min = self.min.min(e);
        } else if e < self.second {
            self.second = e;
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        let min = a.min.min(b.min);
        let mut out = Self { min, min_index: u64::MAX, count: 0, second: f64::INFINITY };
        for p in [a, b] {
            if p.min <= min + DEGENERACY_TOL {
                out.count += p.count;
                out.min_index = out.min_index.min(p.min_index);
                out.second = out.second.min(p.second);
            } else {
                out.second = out.second.min(p.min);
            }
        }
        out
    }
}
