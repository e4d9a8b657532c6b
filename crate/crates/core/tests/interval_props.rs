//! Property tests for interval arithmetic invariants.

use conecert::interval::Interval;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        -10.0..10.0f64,
        -1e-6..1e-6f64,
        Just(0.0),
        Just(1.0),
        Just(-1.0),
    ]
}

prop_compose! {
    fn interval()(a in finite(), b in finite()) -> Interval {
        Interval::new(a.min(b), a.max(b)).unwrap()
    }
}

prop_compose! {
    /// An interval together with a wider one containing it.
    fn nested()(inner in interval())(
        dl in 0.0..1.0f64,
        dh in 0.0..1.0f64,
        inner in Just(inner),
    ) -> (Interval, Interval) {
        let outer = Interval::new(
            inner.lo() - dl * (1.0 + inner.lo().abs()) * 1e-3,
            inner.hi() + dh * (1.0 + inner.hi().abs()) * 1e-3,
        ).unwrap();
        (inner, outer)
    }
}

proptest! {
    #[test]
    fn width_monotone_add((a, aa) in nested(), (b, bb) in nested()) {
        prop_assert!((a + b).is_subset_of(&(aa + bb)));
    }

    #[test]
    fn width_monotone_sub((a, aa) in nested(), (b, bb) in nested()) {
        prop_assert!((a - b).is_subset_of(&(aa - bb)));
    }

    #[test]
    fn width_monotone_mul((a, aa) in nested(), (b, bb) in nested()) {
        prop_assert!((a * b).is_subset_of(&(aa * bb)));
    }

    #[test]
    fn width_monotone_sqr_cos_sin((a, aa) in nested()) {
        prop_assert!(a.sqr().is_subset_of(&aa.sqr()));
        prop_assert!(a.cos().is_subset_of(&aa.cos()));
        prop_assert!(a.sin().is_subset_of(&aa.sin()));
    }

    #[test]
    fn width_monotone_div((a, aa) in nested(), (b, bb) in nested()) {
        // push both denominators away from zero on the same side
        let shift = bb.mag() + 1.0;
        let b = Interval::new(b.lo() + shift, b.hi() + shift).unwrap();
        let bb = Interval::new(bb.lo() + shift, bb.hi() + shift).unwrap();
        if bb.lo() > 0.0 {
            let q = a.div(b).unwrap();
            let qq = aa.div(bb).unwrap();
            prop_assert!(q.is_subset_of(&qq));
        }
    }

    #[test]
    fn hull_contains_both(a in interval(), b in interval()) {
        let h = a.hull(&b);
        prop_assert!(a.is_subset_of(&h) && b.is_subset_of(&h));
    }

    #[test]
    fn intersect_is_tightest(a in interval(), b in interval()) {
        if let Some(i) = a.intersect(&b) {
            prop_assert!(i.is_subset_of(&a) && i.is_subset_of(&b));
            prop_assert!(a.contains(i.lo()) || b.contains(i.lo()));
        } else {
            prop_assert!(a.hi() < b.lo() || b.hi() < a.lo());
        }
    }

    #[test]
    fn point_results_contained(x in finite(), y in finite()) {
        // degenerate intervals behave like outward-rounded scalar arithmetic
        let (a, b) = (Interval::point(x), Interval::point(y));
        prop_assert!((a + b).contains(x + y));
        prop_assert!((a - b).contains(x - y));
        prop_assert!((a * b).contains(x * y));
        prop_assert!(a.sqr().contains(x * x));
    }
}
