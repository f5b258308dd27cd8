//! Deterministic synthetic-system generator for property tests and demos.
//!
//! Generation is fully reproducible: the random source is xoshiro256**
//! with splitmix64 seeding (fixed constants, no platform dependence), so
//! one seed always yields one byte-identical system.
//!
//! Shapes on offer: tags-per-record drawn from a truncated exponential over
//! [1, 9] with a small power-law tail above 9, tag popularity drawn from a
//! Zipf law over the vocabulary, and an optional hierarchy that is either a
//! complete tree or an acyclic DAG whose broader-term counts follow an
//! exponential.

use thiserror::Error;

use crate::model::{BuiltSystem, SystemBuilder};

/// splitmix64 step; used to expand the user seed into generator state.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// xoshiro256** (Blackman & Vigna), fixed constants.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn from_seed(seed: u64) -> Rng {
        let mut sm = seed;
        Rng {
            s: [
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
                splitmix64(&mut sm),
            ],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1]
            .wrapping_mul(5)
            .rotate_left(7)
            .wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound) via widening multiply.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// Hierarchy shape of a generated system.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Hierarchy {
    /// No BT edges at all: flat tagging.
    #[default]
    None,
    /// Complete tree with the given branching factor and depth (root at
    /// depth 0). The tree size replaces `vocab_size`.
    Tree { branching: u32, depth: u32 },
    /// Acyclic DAG: each descriptor draws its broader-term count from a
    /// truncated exponential with this parameter and wires parents
    /// uniformly among lower-index descriptors.
    Dag { bt_lambda: f64 },
}

/// Generation parameters.
#[derive(Clone, Debug)]
pub struct GenSpec {
    pub seed: u64,
    pub record_count: u64,
    pub vocab_size: u64,
    /// Exponential parameter for the tags-per-record draw.
    pub tags_lambda: f64,
    /// Zipf exponent for tag popularity.
    pub popularity_exponent: f64,
    pub hierarchy: Hierarchy,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("invalid generator spec: {0}")]
    SpecInvalid(&'static str),
}

/// Fraction of records whose tag count is drawn from the power-law tail
/// above 9 instead of the exponential body.
const TAIL_MASS: f64 = 0.015;
const TAIL_MAX: u32 = 30;
const TAIL_EXPONENT: f64 = 4.0;

/// Cumulative weights for a discrete distribution; sampling is a binary
/// search over the running sums.
struct DiscreteCdf {
    cumulative: Vec<f64>,
}

impl DiscreteCdf {
    fn new(weights: impl Iterator<Item = f64>) -> DiscreteCdf {
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for w in weights {
            acc += w;
            cumulative.push(acc);
        }
        DiscreteCdf { cumulative }
    }

    fn sample(&self, rng: &mut Rng) -> usize {
        let target = rng.next_f64() * self.cumulative.last().copied().unwrap_or(1.0);
        self.cumulative.partition_point(|&c| c <= target)
    }
}

fn validate(spec: &GenSpec) -> Result<(), SpecError> {
    if spec.record_count < 1 {
        return Err(SpecError::SpecInvalid("record_count must be at least 1"));
    }
    if spec.vocab_size < 1 {
        return Err(SpecError::SpecInvalid("vocab_size must be at least 1"));
    }
    if !spec.tags_lambda.is_finite() || spec.tags_lambda <= 0.0 {
        return Err(SpecError::SpecInvalid("tags_lambda must be positive"));
    }
    if !spec.popularity_exponent.is_finite() || spec.popularity_exponent <= 0.0 {
        return Err(SpecError::SpecInvalid(
            "popularity_exponent must be positive",
        ));
    }
    match spec.hierarchy {
        Hierarchy::Tree { branching, depth } => {
            if branching < 1 || depth < 1 {
                return Err(SpecError::SpecInvalid(
                    "tree branching and depth must be at least 1",
                ));
            }
        }
        Hierarchy::Dag { bt_lambda } => {
            if !bt_lambda.is_finite() || bt_lambda <= 0.0 {
                return Err(SpecError::SpecInvalid("bt_lambda must be positive"));
            }
        }
        Hierarchy::None => {}
    }
    Ok(())
}

fn tree_size(branching: u32, depth: u32) -> u64 {
    let mut total = 0u64;
    let mut layer = 1u64;
    for _ in 0..=depth {
        total += layer;
        layer *= branching as u64;
    }
    total
}

fn descriptor_key(i: u64, width: usize) -> String {
    format!("t{i:0width$}")
}

/// Generate a system with the prescribed distributional shape.
/// Deterministic for a given seed.
pub fn generate(spec: &GenSpec) -> Result<BuiltSystem, SpecError> {
    validate(spec)?;
    let mut rng = Rng::from_seed(spec.seed);

    let vocab = match spec.hierarchy {
        Hierarchy::Tree { branching, depth } => tree_size(branching, depth),
        _ => spec.vocab_size,
    };
    let width = vocab.to_string().len().max(4);

    let mut b = SystemBuilder::new(&format!("synthetic-{}", spec.seed));
    for i in 0..vocab {
        b.declare_descriptor(&descriptor_key(i, width), None)
            .expect("generated keys are non-empty");
    }

    match spec.hierarchy {
        Hierarchy::None => {}
        Hierarchy::Tree { branching, .. } => {
            for i in 1..vocab {
                let parent = (i - 1) / branching as u64;
                b.add_bt(&descriptor_key(i, width), &descriptor_key(parent, width))
                    .expect("tree keys are valid");
            }
            b.add_top_term(&descriptor_key(0, width))
                .expect("root key is valid");
        }
        Hierarchy::Dag { bt_lambda } => {
            // broader-term counts ~ truncated exponential on [1, 9]
            let body = DiscreteCdf::new((1..=9).map(|b| (-bt_lambda * b as f64).exp()));
            for i in 1..vocab {
                let want = (body.sample(&mut rng) as u64 + 1).min(i);
                let mut parents: Vec<u64> = Vec::with_capacity(want as usize);
                while (parents.len() as u64) < want {
                    let p = rng.next_below(i);
                    if !parents.contains(&p) {
                        parents.push(p);
                    }
                }
                parents.sort_unstable();
                for p in parents {
                    b.add_bt(&descriptor_key(i, width), &descriptor_key(p, width))
                        .expect("dag keys are valid");
                }
            }
            b.add_top_term(&descriptor_key(0, width))
                .expect("root key is valid");
        }
    }

    // tags per record: exponential body on [1, 9] plus a small tail
    let body = DiscreteCdf::new((1..=9).map(|n| (-spec.tags_lambda * n as f64).exp()));
    let tail = DiscreteCdf::new((10..=TAIL_MAX).map(|n| (n as f64).powf(-TAIL_EXPONENT)));
    let zipf = DiscreteCdf::new((1..=vocab).map(|r| (r as f64).powf(-spec.popularity_exponent)));

    let rec_width = spec.record_count.to_string().len().max(4);
    for r in 0..spec.record_count {
        let n = if rng.next_f64() < TAIL_MASS {
            10 + tail.sample(&mut rng) as u64
        } else {
            body.sample(&mut rng) as u64 + 1
        };
        let n = n.min(vocab);
        let record = format!("r{r:0rec_width$}");
        let mut chosen: Vec<u64> = Vec::with_capacity(n as usize);
        let mut attempts = 0u32;
        while (chosen.len() as u64) < n && attempts < 10_000 {
            attempts += 1;
            let tag = zipf.sample(&mut rng) as u64;
            if !chosen.contains(&tag) {
                chosen.push(tag);
            }
        }
        for tag in chosen {
            b.add_assignment(&record, &descriptor_key(tag, width))
                .expect("generated labels are non-empty");
        }
    }

    Ok(b.build())
}

/// Exponential growth series: count(t) = round(start * (1 + rate)^t) for
/// t in [0, months).
pub fn generate_growth_series(
    rate: f64,
    months: u32,
    start: u64,
) -> Result<Vec<(u32, u64)>, SpecError> {
    if !rate.is_finite() || rate <= -1.0 {
        return Err(SpecError::SpecInvalid("rate must exceed -1"));
    }
    if months < 2 {
        return Err(SpecError::SpecInvalid("need at least 2 months"));
    }
    if start < 1 {
        return Err(SpecError::SpecInvalid("start must be at least 1"));
    }
    Ok((0..months)
        .map(|t| (t, (start as f64 * (1.0 + rate).powi(t as i32)).round() as u64))
        .collect())
}
