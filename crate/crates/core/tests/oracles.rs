//! Library results against brute-force evaluations of the definitions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use yoneda_core::derived::derived_functions;
use yoneda_core::gallery::{self, FixtureName};
use yoneda_core::order::{self, Sense};
use yoneda_core::random::{instance, value_grid};
use yoneda_core::space::default_labels;
use yoneda_core::topology::{convergence, is_complete, Topology};
use yoneda_core::{EpSeq, Exec, ExtReal, FiniteSpace};

fn subsets_of(items: &[usize]) -> Vec<Vec<usize>> {
    (0u32..1 << items.len())
        .map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &v)| v).collect())
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<ExtReal>> {
    let grid = value_grid();
    (0..n).map(|_| (0..n).map(|_| *grid.choose(rng).unwrap()).collect()).collect()
}

/// Radii worth probing: zero, every value, points between values, past the
/// largest finite value, and infinity.
fn probe_radii(s: &FiniteSpace) -> Vec<ExtReal> {
    let mut vals: Vec<ExtReal> = s.points().flat_map(|i| s.points().map(move |j| s.d(i, j))).collect();
    vals.push(ExtReal::ZERO);
    vals.push(ExtReal::INFINITY);
    vals.sort();
    vals.dedup();
    let mut out = vals.clone();
    out.extend(vals.windows(2).map(|w| ExtReal::midpoint(w[0], w[1])));
    out.sort();
    out.dedup();
    out
}

#[test]
fn directedness_over_every_finite_subset() {
    for i in 0..300 {
        let s = instance(21, i, 5, None).space;
        for ys in subsets_of(&s.points().collect::<Vec<_>>()) {
            // d-directed: every finite F ⊆ Y has members of Y at max-distance
            // below every ε; on finite data that means distance 0
            let full_d = !ys.is_empty()
                && subsets_of(&ys).iter().all(|f| ys.iter().any(|&y| f.iter().all(|&z| s.d(z, y).is_zero())));
            let full_leq = !ys.is_empty()
                && subsets_of(&ys).iter().all(|f| ys.iter().any(|&y| f.iter().all(|&z| s.leq(z, y))));
            assert_eq!(order::is_directed(&s, &ys, Sense::D), full_d, "instance {i}, {ys:?}");
            assert_eq!(order::is_directed(&s, &ys, Sense::Leq), full_leq, "instance {i}, {ys:?}");
        }
    }
}

fn inf_or_inf(it: impl Iterator<Item = ExtReal>) -> ExtReal {
    it.min().unwrap_or(ExtReal::INFINITY)
}

#[test]
fn derived_functions_match_definitions() {
    for i in 0..200 {
        let s = instance(22, i, 5, None).space;
        let f = derived_functions(&s, Exec::Sequential);
        for r in probe_radii(&s) {
            let up = s
                .points()
                .map(|x| {
                    let ball: Vec<usize> = s.points().filter(|&z| s.d(x, z) < r).collect();
                    inf_or_inf(s.points().filter(|&y| ball.iter().all(|&z| s.leq(y, z))).map(|y| s.d(x, y)))
                })
                .max()
                .unwrap();
            let gap = |x: usize, fs: &[usize]| {
                inf_or_inf(s.points().filter(|&y| fs.iter().all(|&z| s.leq(z, y))).map(|y| s.d(y, x)))
            };
            let low = s
                .points()
                .map(|x| gap(x, &s.points().filter(|&z| s.d(z, x) < r).collect::<Vec<_>>()))
                .max()
                .unwrap();
            let over_all_f = s
                .points()
                .map(|x| {
                    let ball: Vec<usize> = s.points().filter(|&z| s.d(z, x) < r).collect();
                    subsets_of(&ball).iter().map(|fs| gap(x, fs)).max().unwrap()
                })
                .max()
                .unwrap();
            assert_eq!(f.d_up.eval(r), up, "instance {i}, d^• at {r}");
            assert_eq!(f.d_low.eval(r), low, "instance {i}, d_• at {r}");
            assert_eq!(f.d_f.eval(r), over_all_f, "instance {i}, d_F at {r}");
            assert!(f.d_phi.eval(r) <= over_all_f);
        }
    }
}

/// Convergence in a subbasic topology straight from its open sets: every
/// open set of the family that contains `x` eventually contains the
/// sequence, which for an eventually periodic sequence means the whole cycle.
fn converges(s: &FiniteSpace, seq: &EpSeq, x: usize, t: Topology, radii: &[ExtReal]) -> bool {
    let open = |c: usize, eps: ExtReal, z: usize| match t {
        Topology::UpperBall => s.d(c, z) < eps,
        Topology::LowerBall => s.d(z, c) < eps,
        Topology::UpperHole => s.d(z, c) > eps,
        Topology::LowerHole => s.d(c, z) > eps,
        _ => unreachable!(),
    };
    s.points().all(|c| radii.iter().all(|&eps| !open(c, eps, x) || seq.cycle().iter().all(|&a| open(c, eps, a))))
}

#[test]
fn convergence_matches_open_sets() {
    let single = [Topology::UpperBall, Topology::LowerBall, Topology::UpperHole, Topology::LowerHole];
    for i in 0..120 {
        let s = instance(23, i, 4, None).space;
        let radii = probe_radii(&s);
        for seq in EpSeq::enumerate(s.len(), 1, 2) {
            for x in s.points() {
                let r = convergence(&s, &seq, x);
                for t in single {
                    assert_eq!(r.holds(t), converges(&s, &seq, x, t, &radii), "instance {i}, {seq:?}, {x}, {t:?}");
                }
                let both = converges(&s, &seq, x, Topology::UpperHole, &radii)
                    && converges(&s, &seq, x, Topology::LowerHole, &radii);
                assert_eq!(r.holds(Topology::DoubleHole), both);
            }
        }
    }
}

#[test]
fn completeness_matches_sequence_search() {
    for i in 0..150 {
        let s = instance(24, i, 5, None).space;
        let radii = probe_radii(&s);
        let oracle = EpSeq::enumerate(s.len(), 1, 3).iter().all(|seq| {
            let cyc = seq.cycle();
            let cauchy = cyc.iter().all(|&a| cyc.iter().all(|&b| s.d(a, b).is_zero()));
            !cauchy
                || s.points().any(|x| {
                    converges(&s, seq, x, Topology::UpperHole, &radii) && converges(&s, seq, x, Topology::LowerHole, &radii)
                })
        });
        assert_eq!(is_complete(&s, Exec::default()).complete, oracle, "instance {i}");
    }
}

/// Cheapest walk of length `1..=n` by repeated min-plus products.
fn walks(m: &[Vec<ExtReal>]) -> Vec<Vec<ExtReal>> {
    let n = m.len();
    let mut power = m.to_vec();
    let mut best = m.to_vec();
    for _ in 1..n {
        power = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| power[i][k].add(m[k][j])).min().unwrap()).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                best[i][j] = best[i][j].min(power[i][j]);
            }
        }
    }
    best
}

#[test]
fn closure_is_cheapest_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let m = random_matrix(&mut rng, n);
        let c = FiniteSpace::new(default_labels(n), m.clone()).unwrap().closure();
        assert_eq!(c.rows(), walks(&m));
        assert_eq!(c.closure(), c);
    }
}

#[test]
fn validation_agrees_with_triangle_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..500 {
        let n = rng.gen_range(1..=5);
        let s = FiniteSpace::new(default_labels(n), random_matrix(&mut rng, n)).unwrap();
        let triangle = (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| s.d(x, z) <= s.d(x, y).add(s.d(y, z)))));
        let v = s.validate();
        assert_eq!(v.is_distance, triangle);
        assert_eq!(v.is_hemimetric, triangle && (0..n).all(|x| s.d(x, x).is_zero()));
        assert!(s.closure().validate().is_distance);
    }
}

#[test]
fn fixtures_are_stable_when_the_cutoff_doubles() {
    for name in FixtureName::ALL {
        for cutoff in [4, 5, 6, 9, 13, 20, 40] {
            let small = gallery::verify(&gallery::build(name, cutoff).unwrap()).unwrap();
            let large = gallery::verify(&gallery::build(name, 2 * cutoff).unwrap()).unwrap();
            assert!(small.all_hold && large.all_hold, "{name} at {cutoff}");
            assert_eq!(small.summary.get("leq_sup"), large.summary.get("leq_sup"));
            assert_eq!(small.summary.get("d_sup"), large.summary.get("d_sup"));
            assert_eq!(small.summary.get("q1"), large.summary.get("q1"));
        }
    }
}
