use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fieldrank::{
    CombiMatcher, DenseMatrix, DynRank, FieldElement, FieldRng, GeneralMatching, PrimeField,
    SubmatrixState, UnboundedRank,
};

/// Rank-8 matrix: product of random `n x 8` and `8 x n` factors.
fn low_rank(f: &PrimeField, n: usize, rng: &mut FieldRng) -> DenseMatrix {
    let u = DenseMatrix::from_fn(n, 8, |_, _| f.sample(rng));
    let w = DenseMatrix::from_fn(8, n, |_, _| f.sample(rng));
    u.mul(f, &w).unwrap()
}

fn rank_updates(c: &mut Criterion) {
    let f = PrimeField::default();
    let mut group = c.benchmark_group("rank_entry_update");
    for n in [64usize, 256] {
        let mut rng = FieldRng::new(1);
        let a = low_rank(&f, n, &mut rng);
        let mut exact = DynRank::new(f, &a);
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |b, &n| {
            b.iter(|| {
                exact
                    .entry_update(rng.index(8), rng.index(n), f.sample(&mut rng))
                    .unwrap()
            })
        });
        let mut sketched = UnboundedRank::new(f, &a, &mut rng.fork()).unwrap();
        group.bench_with_input(BenchmarkId::new("sketched", n), &n, |b, &n| {
            b.iter(|| {
                sketched
                    .entry_update(rng.index(8), rng.index(n), f.sample(&mut rng))
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn submatrix_updates(c: &mut Criterion) {
    let f = PrimeField::default();
    let mut group = c.benchmark_group("submatrix_entry_update");
    group.sample_size(20);
    for n in [16usize, 32] {
        let mut rng = FieldRng::new(2);
        let a = DenseMatrix::from_fn(n, n, |_, _| {
            if rng.chance(1, 4) {
                f.sample(&mut rng)
            } else {
                FieldElement::ZERO
            }
        });
        let mut s = SubmatrixState::new(f, a, rng.fork()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let v = if rng.chance(1, 2) {
                    FieldElement::ZERO
                } else {
                    f.sample(&mut rng)
                };
                s.entry_update(rng.index(n), rng.index(n), v).unwrap()
            })
        });
    }
    group.finish();
}

fn matching_updates(c: &mut Criterion) {
    let f = PrimeField::default();
    let mut group = c.benchmark_group("matching_toggle");
    let n = 64;
    let mut rng = FieldRng::new(3);
    let mut g = GeneralMatching::new(f, n, rng.fork()).unwrap();
    group.bench_function("tutte_64", |b| {
        b.iter(|| {
            let (u, v) = (rng.index(n / 2), n / 2 + rng.index(n / 2));
            let present = g.edges().binary_search(&(u, v)).is_ok();
            g.set_edge(u, v, !present).unwrap()
        })
    });
    for side in [100usize, 400] {
        let mut m = CombiMatcher::new(side, side);
        let mut rng = FieldRng::new(4);
        group.bench_with_input(
            BenchmarkId::new("combinatorial", side),
            &side,
            |b, &side| {
                b.iter(|| {
                    let (u, v) = (rng.index(side), side + rng.index(side));
                    if m.graph().neighbors(u).contains(&v) {
                        m.delete(u, v).unwrap()
                    } else {
                        m.insert(u, v).unwrap()
                    }
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, rank_updates, submatrix_updates, matching_updates);
criterion_main!(benches);
