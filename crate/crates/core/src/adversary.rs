//! Budget-constrained corruption strategies.
//!
//! Every adversary plays the two-phase protocol of [`Env::post_price`]:
//! [`Adversary::intent`] sees only the history, [`Adversary::corrupt`] additionally
//! sees the posted price and the truthful bit. Budget accounting is the
//! environment's job; an adversary may return the truthful bit for free.
//!
//! [`Env::post_price`]: crate::env::Env::post_price

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::AdversaryIntent;
use crate::error::ConfigError;
use crate::model::{DyadicPrice, Feedback, RoundRecord, Valuation};
use crate::tree::{leaf_of, NodeRef, TreeParams};

/// RNG stream reserved for adversaries; sellers draw from their own stream.
pub const ADVERSARY_STREAM: u64 = 2;

pub trait Adversary: Send {
    fn intent(&mut self, history: &[RoundRecord]) -> AdversaryIntent;

    fn corrupt(&mut self, history: &[RoundRecord], price: DyadicPrice, truth: Feedback)
        -> Feedback;
}

/// What an adversary may know when it is constructed: nature's side of the
/// episode (valuation, tree depth, budget, seed), never the seller's state.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryContext {
    pub valuation: Valuation,
    pub tree: TreeParams,
    pub budget: u64,
    pub seed: u64,
}

/// Never willing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCorruption;

impl Adversary for NoCorruption {
    fn intent(&mut self, _history: &[RoundRecord]) -> AdversaryIntent {
        AdversaryIntent::UNWILLING
    }

    fn corrupt(&mut self, _: &[RoundRecord], _: DyadicPrice, truth: Feedback) -> Feedback {
        truth
    }
}

/// Answers the first `burn` rounds as if the valuation were `v_low`.
#[derive(Debug, Clone, Copy)]
pub struct MimicLowInstance {
    v_low: Valuation,
    burn: u64,
}

impl MimicLowInstance {
    pub fn new(v_low: Valuation, burn: u64) -> Self {
        MimicLowInstance { v_low, burn }
    }
}

impl Adversary for MimicLowInstance {
    fn intent(&mut self, history: &[RoundRecord]) -> AdversaryIntent {
        AdversaryIntent {
            willing: (history.len() as u64) < self.burn,
        }
    }

    fn corrupt(&mut self, _: &[RoundRecord], price: DyadicPrice, _truth: Feedback) -> Feedback {
        Feedback::from(price.value() <= self.v_low.value())
    }
}

fn passes_left(price: DyadicPrice, fb: Feedback) -> bool {
    price.is_zero() || fb.sale
}

fn passes_right(price: DyadicPrice, fb: Feedback) -> bool {
    price.is_one() || !fb.sale
}

/// Makes a wrong leaf look consistent: whenever the seller is operating
/// around `target` (its last price fell inside the target's parent interval),
/// answers "sale" at the target's left endpoint and "no sale" at its right.
#[derive(Debug, Clone, Copy)]
pub struct LeafTrap {
    target: NodeRef,
    watch: (DyadicPrice, DyadicPrice),
}

impl LeafTrap {
    pub fn new(target: NodeRef) -> Self {
        let watch = if target.depth > 0 {
            target.parent().endpoints()
        } else {
            target.endpoints()
        };
        LeafTrap { target, watch }
    }

    pub fn target(&self) -> NodeRef {
        self.target
    }
}

impl Adversary for LeafTrap {
    fn intent(&mut self, history: &[RoundRecord]) -> AdversaryIntent {
        let willing = history
            .last()
            .is_some_and(|r| self.watch.0 <= r.price && r.price <= self.watch.1);
        AdversaryIntent { willing }
    }

    fn corrupt(&mut self, _: &[RoundRecord], price: DyadicPrice, truth: Feedback) -> Feedback {
        let (l, r) = self.target.endpoints();
        if price == l {
            Feedback::SALE
        } else if price == r {
            Feedback::NO_SALE
        } else {
            truth
        }
    }
}

/// Knocks the seller off the correct leaf: whenever the price history shows
/// the seller has just entered, or is passing checks on, the correct leaf,
/// it answers the next endpoint query inconsistently.
#[derive(Debug, Clone, Copy)]
pub struct CommitStall {
    star: NodeRef,
}

impl CommitStall {
    pub fn new(star: NodeRef) -> Self {
        assert!(star.depth > 0, "the correct leaf must have a parent");
        CommitStall { star }
    }

    fn just_entered(&self, history: &[RoundRecord]) -> bool {
        let [.., a, b, m] = history else {
            return false;
        };
        let parent = self.star.parent();
        a.price == parent.left()
            && b.price == parent.right()
            && m.price == parent.midpoint()
            && m.observed_feedback.sale == self.star.is_right_child()
    }

    fn passing_block(&self, history: &[RoundRecord]) -> bool {
        let [.., a, b] = history else {
            return false;
        };
        let (l, r) = self.star.endpoints();
        let consistent = |rec: &RoundRecord| {
            if rec.price == l {
                passes_left(l, rec.observed_feedback)
            } else {
                passes_right(r, rec.observed_feedback)
            }
        };
        a.price == l && (b.price == l || b.price == r) && consistent(a) && consistent(b)
    }
}

impl Adversary for CommitStall {
    fn intent(&mut self, history: &[RoundRecord]) -> AdversaryIntent {
        AdversaryIntent {
            willing: self.just_entered(history) || self.passing_block(history),
        }
    }

    fn corrupt(&mut self, _: &[RoundRecord], price: DyadicPrice, truth: Feedback) -> Feedback {
        let (l, r) = self.star.endpoints();
        if price == l && !l.is_zero() {
            Feedback::NO_SALE
        } else if price == r && !r.is_one() {
            Feedback::SALE
        } else {
            truth
        }
    }
}

/// Each round independently willing with probability `flip_probability`;
/// when willing, flips the truthful bit.
#[derive(Debug, Clone)]
pub struct RandomBudget {
    flip_probability: f64,
    rng: ChaCha8Rng,
}

impl RandomBudget {
    pub fn new(flip_probability: f64, seed: u64) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&flip_probability) {
            return Err(ConfigError::Adversary(format!(
                "flip probability {flip_probability} outside [0, 1]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ADVERSARY_STREAM);
        Ok(RandomBudget {
            flip_probability,
            rng,
        })
    }
}

impl Adversary for RandomBudget {
    fn intent(&mut self, _history: &[RoundRecord]) -> AdversaryIntent {
        // One draw per round keeps the stream aligned with the round index.
        let u: f64 = self.rng.random();
        AdversaryIntent {
            willing: u < self.flip_probability,
        }
    }

    fn corrupt(&mut self, _: &[RoundRecord], _: DyadicPrice, truth: Feedback) -> Feedback {
        truth.flipped()
    }
}

/// Declarative adversary description, as written in sweep configs.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversarySpec {
    NoCorruption,
    /// `burn = None` means "the whole corruption budget".
    MimicLowInstance {
        v_low: Valuation,
        burn: Option<u64>,
    },
    /// Target leaf given relative to the correct leaf; must be non-zero.
    LeafTrap {
        offset: i64,
    },
    CommitStall,
    RandomBudget {
        flip_probability: f64,
    },
}

impl AdversarySpec {
    /// The adversaries of the default sweep.
    pub fn catalogue() -> Vec<AdversarySpec> {
        vec![
            AdversarySpec::NoCorruption,
            AdversarySpec::MimicLowInstance {
                v_low: Valuation::new(1.0 / 3.0).expect("valid"),
                burn: None,
            },
            AdversarySpec::LeafTrap { offset: -1 },
            AdversarySpec::CommitStall,
            AdversarySpec::RandomBudget {
                flip_probability: 0.05,
            },
        ]
    }

    pub fn build(&self, ctx: &AdversaryContext) -> Result<Box<dyn Adversary>, ConfigError> {
        Ok(match *self {
            AdversarySpec::NoCorruption => Box::new(NoCorruption),
            AdversarySpec::MimicLowInstance { v_low, burn } => {
                let burn = burn.unwrap_or(ctx.budget);
                if burn > ctx.budget {
                    return Err(ConfigError::Adversary(format!(
                        "mimic burn {burn} exceeds budget {}",
                        ctx.budget
                    )));
                }
                Box::new(MimicLowInstance::new(v_low, burn))
            }
            AdversarySpec::LeafTrap { offset } => {
                let star = leaf_of(ctx.valuation, ctx.tree);
                Box::new(LeafTrap::new(trap_target(star, offset, ctx.tree)?))
            }
            AdversarySpec::CommitStall => {
                Box::new(CommitStall::new(leaf_of(ctx.valuation, ctx.tree)))
            }
            AdversarySpec::RandomBudget { flip_probability } => {
                Box::new(RandomBudget::new(flip_probability, ctx.seed)?)
            }
        })
    }
}

/// Resolves a relative trap offset to a wrong leaf. Offsets running off the
/// grid are mirrored to the other side of the correct leaf, then clamped.
fn trap_target(star: NodeRef, offset: i64, tree: TreeParams) -> Result<NodeRef, ConfigError> {
    if offset == 0 {
        return Err(ConfigError::Adversary(
            "leaf-trap offset 0 targets the correct leaf".into(),
        ));
    }
    let last = tree.leaf_count() as i128 - 1;
    let here = star.index as i128;
    let mut idx = here + offset as i128;
    if !(0..=last).contains(&idx) {
        idx = (here - offset as i128).clamp(0, last);
    }
    if idx == here {
        return Err(ConfigError::Adversary(format!(
            "leaf-trap offset {offset} has no wrong leaf at depth {}",
            tree.depth
        )));
    }
    Ok(tree.leaf(idx as u64))
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::NoCorruption => f.write_str("none"),
            AdversarySpec::MimicLowInstance { v_low, burn: None } => {
                write!(f, "mimic:{}", v_low.value())
            }
            AdversarySpec::MimicLowInstance {
                v_low,
                burn: Some(b),
            } => write!(f, "mimic:{}:{}", v_low.value(), b),
            AdversarySpec::LeafTrap { offset } => write!(f, "leaf-trap:{offset}"),
            AdversarySpec::CommitStall => f.write_str("commit-stall"),
            AdversarySpec::RandomBudget { flip_probability } => {
                write!(f, "random:{flip_probability}")
            }
        }
    }
}

/// Parses a decimal or a `num/den` fraction.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in `{s}`"))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{s}`"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(n / d)
        }
        None => s.parse().map_err(|_| format!("not a number: `{s}`")),
    }
}

impl FromStr for AdversarySpec {
    type Err = ConfigError;

    /// `none`, `mimic[:v_low[:burn]]`, `leaf-trap[:offset]`, `commit-stall`,
    /// `random[:p]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| ConfigError::Adversary(msg);
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let arity = |max: usize| {
            if args.len() > max {
                Err(bad(format!("too many parameters in `{s}`")))
            } else {
                Ok(())
            }
        };
        match kind {
            "none" => {
                arity(0)?;
                Ok(AdversarySpec::NoCorruption)
            }
            "mimic" => {
                arity(2)?;
                let v_low = match args.first() {
                    Some(a) => Valuation::new(parse_real(a).map_err(bad)?)?,
                    None => Valuation::new(1.0 / 3.0)?,
                };
                let burn = match args.get(1) {
                    Some(b) => Some(
                        b.trim()
                            .parse()
                            .map_err(|_| bad(format!("bad burn `{b}`")))?,
                    ),
                    None => None,
                };
                Ok(AdversarySpec::MimicLowInstance { v_low, burn })
            }
            "leaf-trap" => {
                arity(1)?;
                let offset = match args.first() {
                    Some(o) => o
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad offset `{o}`")))?,
                    None => -1,
                };
                if offset == 0 {
                    return Err(bad("leaf-trap offset must be non-zero".into()));
                }
                Ok(AdversarySpec::LeafTrap { offset })
            }
            "commit-stall" => {
                arity(0)?;
                Ok(AdversarySpec::CommitStall)
            }
            "random" => {
                arity(1)?;
                let p = match args.first() {
                    Some(a) => parse_real(a).map_err(bad)?,
                    None => 0.05,
                };
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad(format!("flip probability {p} outside [0, 1]")));
                }
                Ok(AdversarySpec::RandomBudget {
                    flip_probability: p,
                })
            }
            other => Err(bad(format!("unknown adversary `{other}`"))),
        }
    }
}
