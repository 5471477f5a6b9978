//! Seeded random finite spaces for sweeps and fuzzing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::extreal::ExtReal;
use crate::space::{default_labels, FiniteSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    General,
    Hemimetric,
    Metric,
    Order,
    /// `e ∘ ≤` for a random metric `e` and preorder `≤`, then closed.
    Composition,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 5] = [
        InstanceKind::General,
        InstanceKind::Hemimetric,
        InstanceKind::Metric,
        InstanceKind::Order,
        InstanceKind::Composition,
    ];
}

/// Matrix entries are drawn from this grid before closing.
pub fn value_grid() -> [ExtReal; 6] {
    [
        ExtReal::ZERO,
        ExtReal::ratio(1, 4),
        ExtReal::ratio(1, 2),
        ExtReal::ONE,
        ExtReal::int(2),
        ExtReal::INFINITY,
    ]
}

fn draw<R: Rng>(rng: &mut R, n: usize, entry: impl Fn(&mut R, usize, usize) -> ExtReal) -> Vec<Vec<ExtReal>> {
    (0..n).map(|i| (0..n).map(|j| entry(rng, i, j)).collect()).collect()
}

#[allow(clippy::needless_range_loop)]
fn symmetric<R: Rng>(rng: &mut R, n: usize, pool: &[ExtReal]) -> Vec<Vec<ExtReal>> {
    let mut m = vec![vec![ExtReal::ZERO; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = *pool.choose(rng).unwrap();
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

fn close(m: Vec<Vec<ExtReal>>) -> FiniteSpace {
    let n = m.len();
    FiniteSpace::new(default_labels(n), m).expect("square matrix").closure()
}

/// A validated distance on `n` points.
pub fn random_space<R: Rng>(rng: &mut R, n: usize, kind: InstanceKind) -> FiniteSpace {
    let grid = value_grid();
    match kind {
        InstanceKind::General => close(draw(rng, n, |r, _, _| *grid.choose(r).unwrap())),
        InstanceKind::Hemimetric => {
            close(draw(rng, n, |r, i, j| if i == j { ExtReal::ZERO } else { *grid.choose(r).unwrap() }))
        }
        InstanceKind::Metric => close(symmetric(rng, n, &grid[1..])),
        InstanceKind::Order => close(draw(rng, n, |r, i, j| {
            if i == j || r.gen_bool(0.35) {
                ExtReal::ZERO
            } else {
                ExtReal::INFINITY
            }
        })),
        InstanceKind::Composition => composition(rng, n).0,
    }
}

/// `(d, e)`: `d` the closure of `e ∘ ≤` for a random pseudometric `e`.
pub fn composition<R: Rng>(rng: &mut R, n: usize) -> (FiniteSpace, FiniteSpace) {
    let e = close(symmetric(rng, n, &value_grid()));
    let order = random_space(rng, n, InstanceKind::Order);
    let d = e.compose(&order).expect("same points").closure();
    (d, e)
}

/// One generated instance; `second` is the symmetric distance used by the
/// audits that need one (`d^∨` unless the instance comes with its own).
#[derive(Clone, Debug)]
pub struct Instance {
    pub index: u64,
    pub kind: InstanceKind,
    pub space: FiniteSpace,
    pub second: FiniteSpace,
}

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

/// Deterministic in `(seed, index)`; sizes range over `1..=max_n` and kinds
/// cycle through [`InstanceKind::ALL`] unless `kind` is given.
pub fn instance(seed: u64, index: u64, max_n: usize, kind: Option<InstanceKind>) -> Instance {
    let mut rng = rng_for(seed, index);
    let n = rng.gen_range(1..=max_n.max(1));
    let kind = kind.unwrap_or(InstanceKind::ALL[(index % InstanceKind::ALL.len() as u64) as usize]);
    let (space, second) = match kind {
        InstanceKind::Composition => composition(&mut rng, n),
        _ => {
            let s = random_space(&mut rng, n, kind);
            let j = s.join();
            (s, j)
        }
    };
    Instance { index, kind, space, second }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_produce_expected_flags() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            for kind in InstanceKind::ALL {
                let s = random_space(&mut rng, 5, kind);
                let v = s.validate();
                assert!(v.is_distance, "{kind:?}");
                match kind {
                    InstanceKind::Hemimetric | InstanceKind::Order | InstanceKind::Composition => assert!(v.is_hemimetric),
                    InstanceKind::Metric => assert!(v.is_metric),
                    InstanceKind::General => {}
                }
            }
        }
    }

    #[test]
    fn instances_are_reproducible() {
        let a = instance(7, 3, 6, None);
        let b = instance(7, 3, 6, None);
        assert_eq!(a.space, b.space);
        assert_eq!(a.kind, b.kind);
    }
}
