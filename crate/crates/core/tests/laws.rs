use proptest::prelude::*;

use yoneda_core::derived::{derived_functions, subequiv};
use yoneda_core::formal_balls::{default_radius_grid, grid_space};
use yoneda_core::random::{random_space, InstanceKind};
use yoneda_core::{Exec, ExtReal, Rational};

fn ext() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        1 => Just(ExtReal::INFINITY),
        6 => (0i64..40, 1i64..9).prop_map(|(n, d)| ExtReal::ratio(n, d)),
    ]
}

fn kind() -> impl Strategy<Value = InstanceKind> {
    prop::sample::select(InstanceKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn addition_is_a_commutative_monoid(a in ext(), b in ext(), c in ext()) {
        prop_assert_eq!(a.add(b), b.add(a));
        prop_assert_eq!(a.add(b).add(c), a.add(b.add(c)));
        prop_assert_eq!(a.add(ExtReal::ZERO), a);
        prop_assert!(a <= a.add(b));
    }

    #[test]
    fn truncated_subtraction_is_residual(a in ext(), b in ext(), c in ext()) {
        // a ⊖ b ≤ c ⇔ a ≤ b + c, away from the ∞ − ∞ corner
        if !(a.is_infinite() && b.is_infinite()) {
            prop_assert_eq!(a.tsub(b) <= c, a <= b.add(c));
        }
        prop_assert_eq!(a.tsub(b).is_zero(), a <= b || (a.is_infinite() && b.is_infinite()));
    }

    #[test]
    fn shift_truncates(a in ext(), n in -20i64..20, d in 1i64..6) {
        let q = Rational::new(n, d);
        let s = a.shift(q);
        match a.as_finite() {
            None => prop_assert!(s.is_infinite()),
            Some(v) => prop_assert_eq!(s, ExtReal::truncate(v + q)),
        }
    }

    #[test]
    fn formal_ball_extension_is_a_distance(seed in any::<u64>(), n in 1usize..5, k in kind()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = random_space(&mut rng, n, k);
        let fb = grid_space(&s, &default_radius_grid());
        prop_assert!(fb.validate().is_distance);
        prop_assert_eq!(fb.validate().is_hemimetric, s.validate().is_hemimetric);
    }

    #[test]
    fn derived_functions_are_monotone_and_self_subequivalent(seed in any::<u64>(), n in 1usize..6, k in kind()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = random_space(&mut rng, n, k);
        let f = derived_functions(&s, Exec::Sequential);
        for g in [&f.d_up, &f.d_low, &f.d_f, &f.d_phi] {
            prop_assert!(g.is_monotone());
            prop_assert!(g.le(g));
            prop_assert!(subequiv(g, g));
        }
    }
}
