use tasep::binom::binom;
use tasep::boundary::{boundary_measure, boundary_normalization, NBoundary, Staircase, Step};
use tasep::green::{green_det, ParticleConfig, SpaceTimeConfig};
use tasep::{ModelParams, Rational, Scalar};

fn exact(num: i64, den: i64) -> ModelParams<Rational> {
    ModelParams::exact(num, den).unwrap()
}

#[test]
fn fixed_space_normalization_single_particle() {
    let m = exact(1, 2);
    let nb = NBoundary::new(Staircase::fixed_space(3), 1).unwrap();
    let init = SpaceTimeConfig::new(vec![(0, 0)]);
    let (s, _) = boundary_normalization(&nb, &init, &m, 1e-12).unwrap();
    let s = s.to_f64();
    assert!(s <= 1.0 && 1.0 - s < 1e-12, "{s}");
}

#[test]
fn fixed_space_normalization_several_particles() {
    for (num, den) in [(1, 2), (2, 3)] {
        let m = exact(num, den);
        for (n, x) in [(2usize, 0i64), (2, 2), (3, 1)] {
            let nb = NBoundary::new(Staircase::fixed_space(x), n).unwrap();
            let init = SpaceTimeConfig::equal_time(&ParticleConfig::step(n), 0);
            let (s, _) = boundary_normalization(&nb, &init, &m, 1e-10).unwrap();
            let s = s.to_f64();
            assert!((s - 1.0).abs() < 1e-10, "N={n} x={x}: {s}");
        }
    }
}

#[test]
fn staircase_normalization() {
    let m = exact(1, 3);
    let base = Staircase::new((1, 4), vec![Step::Down, Step::Right, Step::Down, Step::Right], Step::Down, Step::Down);
    let nb = NBoundary::new(base, 2).unwrap();
    let init = SpaceTimeConfig::equal_time(&ParticleConfig::step(2), 0);
    let (s, _) = boundary_normalization(&nb, &init, &m, 1e-10).unwrap();
    assert!((s.to_f64() - 1.0).abs() < 1e-10, "{}", s.to_f64());
}

#[test]
fn vandermonde_convolution() {
    for dx in 0..=6i64 {
        for span in dx..=12 {
            for xp in 0..dx {
                let mut lhs = num_bigint::BigInt::from(0);
                for tp in 0..span {
                    lhs += binom(tp, xp) * binom(span - tp - 1, dx - xp - 1);
                }
                assert_eq!(lhs, binom(span, dx), "dx={dx} span={span} x'={xp}");
            }
        }
    }
}

#[test]
fn single_particle_convolution_through_boundary() {
    // G_t(x|0) = sum_t' measure(x', t') G_{t-t'-1}(x | x'+1)
    let m = exact(2, 5);
    let init = SpaceTimeConfig::new(vec![(0, 0)]);
    for x in 1..5 {
        for xp in 0..x {
            let nb = NBoundary::new(Staircase::fixed_space(xp), 1).unwrap();
            for t in x..x + 5 {
                let mut acc = <Rational as Scalar>::zero();
                for tp in xp..t {
                    let meas = boundary_measure(&SpaceTimeConfig::new(vec![(xp, tp)]), &nb, &init, &m).unwrap();
                    let rest = green_det(
                        &ParticleConfig::new(vec![x]).unwrap(),
                        &ParticleConfig::new(vec![xp + 1]).unwrap(),
                        t - tp - 1,
                        &m,
                    )
                    .unwrap();
                    acc = acc + meas * rest;
                }
                let want = green_det(&ParticleConfig::new(vec![x]).unwrap(), &ParticleConfig::new(vec![0]).unwrap(), t, &m).unwrap();
                assert_eq!(acc, want);
            }
        }
    }
}
