//! Oblivious sorting circuits: bubble, selection and pancake sort of `k`
//! unsigned `l`-bit numbers.
//!
//! All three compute the same function — the input numbers in non-decreasing
//! order — through structurally different networks, which makes pairs of
//! them natural equivalence-checking benchmarks. Numbers are little-endian
//! within each `l`-bit block; block `i` of the input word is number `i`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::circuit::{Circuit, CircuitBuilder, GateOp, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SortAlgorithm {
    Bubble,
    Selection,
    Pancake,
}

impl SortAlgorithm {
    pub const ALL: [SortAlgorithm; 3] = [
        SortAlgorithm::Bubble,
        SortAlgorithm::Selection,
        SortAlgorithm::Pancake,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SortAlgorithm::Bubble => "bubble",
            SortAlgorithm::Selection => "selection",
            SortAlgorithm::Pancake => "pancake",
        }
    }
}

impl FromStr for SortAlgorithm {
    type Err = SortGenError;

    fn from_str(s: &str) -> Result<SortAlgorithm, SortGenError> {
        SortAlgorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or(SortGenError::UnknownAlgorithm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortSpec {
    pub algorithm: SortAlgorithm,
    pub k: usize,
    pub l: usize,
}

impl SortSpec {
    pub fn new(algorithm: SortAlgorithm, k: usize, l: usize) -> Result<SortSpec, SortGenError> {
        if k < 2 || l < 1 {
            return Err(SortGenError::BadDimensions { k, l });
        }
        Ok(SortSpec { algorithm, k, l })
    }

    /// Total input (and output) bit count `n = k·l`.
    pub fn n(&self) -> usize {
        self.k * self.l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortGenError {
    BadDimensions { k: usize, l: usize },
    UnknownAlgorithm,
}

impl fmt::Display for SortGenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortGenError::BadDimensions { k, l } => {
                write!(f, "sort spec needs k >= 2 and l >= 1, got k={k} l={l}")
            }
            SortGenError::UnknownAlgorithm => {
                write!(f, "unknown algorithm (expected bubble, selection or pancake)")
            }
        }
    }
}

impl core::error::Error for SortGenError {}

/// One `l`-bit number as a vector of wire ids, LSB first.
#[derive(Clone)]
struct Word(Vec<NodeId>);

fn and(b: &mut CircuitBuilder, x: NodeId, y: NodeId) -> NodeId {
    b.add_gate(GateOp::And, &[x, y]).unwrap()
}

fn or(b: &mut CircuitBuilder, x: NodeId, y: NodeId) -> NodeId {
    b.add_gate(GateOp::Or, &[x, y]).unwrap()
}

fn not(b: &mut CircuitBuilder, x: NodeId) -> NodeId {
    b.add_gate(GateOp::Not, &[x]).unwrap()
}

fn mux(b: &mut CircuitBuilder, s: NodeId, then_w: NodeId, else_w: NodeId) -> NodeId {
    b.add_gate(GateOp::Mux, &[s, then_w, else_w]).unwrap()
}

/// Unsigned comparison `a <= b`, scanning from the most significant bit.
fn leq_word(b: &mut CircuitBuilder, a: &Word, c: &Word) -> NodeId {
    let l = a.0.len();
    let mut lt: Option<NodeId> = None;
    let mut eq: Option<NodeId> = None;
    for i in (0..l).rev() {
        let na = not(b, a.0[i]);
        let bit_lt = and(b, na, c.0[i]);
        let term = match eq {
            Some(e) => and(b, e, bit_lt),
            None => bit_lt,
        };
        lt = Some(match lt {
            Some(acc) => or(b, acc, term),
            None => term,
        });
        let bit_eq = b.add_gate(GateOp::Xnor, &[a.0[i], c.0[i]]).unwrap();
        eq = Some(match eq {
            Some(e) => and(b, e, bit_eq),
            None => bit_eq,
        });
    }
    or(b, lt.unwrap(), eq.unwrap())
}

/// Strict comparison `a < b` as `¬(b <= a)`.
fn lt_word(b: &mut CircuitBuilder, a: &Word, c: &Word) -> NodeId {
    let le = leq_word(b, c, a);
    not(b, le)
}

fn mux_word(b: &mut CircuitBuilder, s: NodeId, then_w: &Word, else_w: &Word) -> Word {
    Word(
        then_w
            .0
            .iter()
            .zip(&else_w.0)
            .map(|(&t, &e)| mux(b, s, t, e))
            .collect(),
    )
}

fn input_words(b: &mut CircuitBuilder, k: usize, l: usize) -> Vec<Word> {
    (0..k)
        .map(|_| Word((0..l).map(|_| b.add_input()).collect()))
        .collect()
}

fn output_bits(words: &[Word]) -> Vec<NodeId> {
    words.iter().flat_map(|w| w.0.iter().copied()).collect()
}

/// A single compare-exchange block: `2l` inputs (a, b), `2l` outputs
/// (min, max).
pub fn comparator(l: usize) -> Circuit {
    let mut b = CircuitBuilder::new();
    let words = input_words(&mut b, 2, l);
    let le = leq_word(&mut b, &words[0], &words[1]);
    let min = mux_word(&mut b, le, &words[0], &words[1]);
    let max = mux_word(&mut b, le, &words[1], &words[0]);
    b.build(output_bits(&[min, max])).unwrap()
}

fn generate_bubble(k: usize, l: usize) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut words = input_words(&mut b, k, l);
    for pass in 0..k - 1 {
        for i in 0..k - 1 - pass {
            let le = leq_word(&mut b, &words[i], &words[i + 1]);
            let min = mux_word(&mut b, le, &words[i], &words[i + 1]);
            let max = mux_word(&mut b, le, &words[i + 1], &words[i]);
            words[i] = min;
            words[i + 1] = max;
        }
    }
    b.build(output_bits(&words)).unwrap()
}

fn generate_selection(k: usize, l: usize) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut words = input_words(&mut b, k, l);
    for i in 0..k - 1 {
        let front = words[i].clone();
        let mut min = front.clone();
        // strict improvements, so ties keep the earliest occurrence
        let mut improved: Vec<NodeId> = Vec::with_capacity(k - i - 1);
        for j in i + 1..k {
            let c = lt_word(&mut b, &words[j], &min);
            min = mux_word(&mut b, c, &words[j], &min);
            improved.push(c);
        }
        // one-hot of the last improvement = position of the running minimum
        let mut none_later: Option<NodeId> = None;
        let mut swapped_here: Vec<Option<NodeId>> = alloc::vec![None; k];
        for j in (i + 1..k).rev() {
            let c = improved[j - i - 1];
            swapped_here[j] = Some(match none_later {
                Some(acc) => and(&mut b, c, acc),
                None => c,
            });
            let nc = not(&mut b, c);
            none_later = Some(match none_later {
                Some(acc) => and(&mut b, acc, nc),
                None => nc,
            });
        }
        for j in i + 1..k {
            let h = swapped_here[j].unwrap();
            words[j] = mux_word(&mut b, h, &front, &words[j]);
        }
        words[i] = min;
    }
    b.build(output_bits(&words)).unwrap()
}

fn generate_pancake(k: usize, l: usize) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut words = input_words(&mut b, k, l);
    for r in (2..=k).rev() {
        // which prefix position holds the maximum (lowest index on ties)
        let mut is_max = Vec::with_capacity(r);
        for j in 0..r {
            let mut acc: Option<NodeId> = None;
            for t in 0..r {
                if t == j {
                    continue;
                }
                let ge = leq_word(&mut b, &words[t], &words[j]);
                acc = Some(match acc {
                    Some(a) => and(&mut b, a, ge),
                    None => ge,
                });
            }
            is_max.push(acc.unwrap());
        }
        let mut argmax = Vec::with_capacity(r);
        let mut none_before: Option<NodeId> = None;
        for (j, &m) in is_max.iter().enumerate() {
            argmax.push(match none_before {
                Some(acc) => and(&mut b, m, acc),
                None => m,
            });
            if j + 1 < r {
                let nm = not(&mut b, m);
                none_before = Some(match none_before {
                    Some(acc) => and(&mut b, acc, nm),
                    None => nm,
                });
            }
        }
        // first flip: reverse the prefix ending at the argmax, bringing the
        // maximum to the front
        let mut lower_hit: Option<NodeId> = None; // OR of argmax[0..i]
        let mut flipped: Vec<Word> = Vec::with_capacity(r);
        for i in 0..r {
            let mut bits = Vec::with_capacity(l);
            for bit in 0..l {
                let mut acc: Option<NodeId> = None;
                for j in i..r {
                    let term = and(&mut b, argmax[j], words[j - i].0[bit]);
                    acc = Some(match acc {
                        Some(a) => or(&mut b, a, term),
                        None => term,
                    });
                }
                if let Some(lo) = lower_hit {
                    let keep = and(&mut b, lo, words[i].0[bit]);
                    acc = Some(or(&mut b, acc.unwrap(), keep));
                }
                bits.push(acc.unwrap());
            }
            flipped.push(Word(bits));
            lower_hit = Some(match lower_hit {
                Some(acc) => or(&mut b, acc, argmax[i]),
                None => argmax[i],
            });
        }
        // second flip: reverse the whole prefix, which is pure rewiring
        for i in 0..r {
            words[i] = flipped[r - 1 - i].clone();
        }
    }
    b.build(output_bits(&words)).unwrap()
}

/// Builds the sorting circuit for a validated spec: `n = k·l` inputs and
/// outputs, outputs sorted in non-decreasing unsigned order.
pub fn generate(spec: &SortSpec) -> Circuit {
    match spec.algorithm {
        SortAlgorithm::Bubble => generate_bubble(spec.k, spec.l),
        SortAlgorithm::Selection => generate_selection(spec.k, spec.l),
        SortAlgorithm::Pancake => generate_pancake(spec.k, spec.l),
    }
}

/// Packs `k` numbers into an input word (block `i` = number `i`, LSB first).
pub fn pack_numbers(numbers: &[u64], l: usize) -> Vec<bool> {
    let mut bits = Vec::with_capacity(numbers.len() * l);
    for &x in numbers {
        for i in 0..l {
            bits.push(x >> i & 1 == 1);
        }
    }
    bits
}

/// Decodes an output bit vector back into the `k` numbers.
pub fn unpack_numbers(bits: &[bool], l: usize) -> Vec<u64> {
    bits.chunks(l)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
        })
        .collect()
}
