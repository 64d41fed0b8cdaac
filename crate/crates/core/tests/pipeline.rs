use divlab::constants::{main_term_coefficient, partial_c2, partial_c7, SeriesConstants};
use divlab::divisor::{delta_at, hyperbola_d, DivisorTable};
use divlab::moment::{integrate_powers, moment, Power};
use divlab::relations::{exact_relation_solutions, near_solution_count, RelationQuery, RelationSignature, SearchBudget};
use divlab::voronoi::{residual_mean_squares, VoronoiSeries};

fn weighted_sum(plus: usize, minus: usize, y: u64) -> f64 {
    let table = DivisorTable::build(1, y).unwrap();
    let w = |n: u64| table.d(n) as f64 * (n as f64).powf(-0.75);
    let sig = RelationSignature::new(plus, minus).unwrap();
    exact_relation_solutions(sig, y, &SearchBudget::default())
        .unwrap()
        .map(|t| t.iter().map(|&n| w(n)).product::<f64>())
        .sum()
}

#[test]
fn series_constants_equal_weighted_exact_solutions() {
    for y in [6u64, 10, 15] {
        let c2 = partial_c2(y).unwrap().partial_sum;
        let direct = weighted_sum(2, 2, y);
        assert!(((c2 - direct) / direct).abs() < 1e-12, "Y = {y}: {c2} vs {direct}");
    }
    let c7 = partial_c7(6).unwrap().partial_sum;
    let direct = weighted_sum(4, 4, 6);
    assert!(((c7 - direct) / direct).abs() < 1e-12);
}

#[test]
fn delta_agrees_with_exact_divisor_sums() {
    for x in [2u64, 17, 1000, 123_457] {
        let s = delta_at(x as f64 + 0.5).unwrap();
        assert_eq!(s.summatory, hyperbola_d(x));
    }
}

#[test]
fn voronoi_residual_shrinks_with_cutoff() {
    let series = VoronoiSeries::new(4000).unwrap();
    let ms = residual_mean_squares(&series, 20_000.0, 2000.0, &[10, 250, 4000], 2000).unwrap();
    assert!(ms[0] > ms[1] && ms[1] > ms[2], "{ms:?}");
}

#[test]
fn second_moment_tracks_its_main_term() {
    let c = SeriesConstants::compute(16, 16).unwrap();
    let r = moment(2, 2e5, &c).unwrap();
    assert!(r.relative_deviation.unwrap().abs() < 0.1);
    let coeff = main_term_coefficient(2, &c).unwrap();
    assert!((r.main_term - coeff * 2e5f64.powf(1.5)).abs() < 1e-6 * r.main_term);
}

#[test]
fn split_integrals_add_up() {
    let powers = [Power::Signed(3), Power::Absolute(2.5)];
    let whole = integrate_powers(2.0, 5e4, &powers).unwrap();
    let a = integrate_powers(2.0, 12_345.25, &powers).unwrap();
    let b = integrate_powers(12_345.25, 5e4, &powers).unwrap();
    for i in 0..2 {
        assert!(((a[i] + b[i]) - whole[i]).abs() <= 1e-10 * whole[i].abs());
    }
}

#[test]
fn near_counts_grow_with_threshold() {
    let sig = RelationSignature::new(3, 3).unwrap();
    let base = RelationQuery::uniform(sig, 5, 20, 0.0).unwrap();
    let budget = SearchBudget::default();
    let mut prev = 0;
    for d in [1e-6, 1e-4, 1e-2, 1.0] {
        let c = near_solution_count(&base.with_delta(d).unwrap(), &budget).unwrap().count;
        assert!(c >= prev);
        prev = c;
    }
    let all = near_solution_count(&base.with_delta(f64::INFINITY).unwrap(), &budget).unwrap();
    assert_eq!(all.count + all.exact_solutions, base.space_size());
}
