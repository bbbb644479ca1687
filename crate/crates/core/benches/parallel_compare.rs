//! Compares the work-stealing sweep against the sequential baseline on
//! the two batch workloads that dominate real use: solving many seeds
//! to a fixed truncation order, and deciding membership for many
//! operator candidates against one potential.
//!
//! Run with `cargo bench` (parallel sweep enabled by default) and with
//! `cargo bench --no-default-features` (sweep degrades to the
//! sequential map) to compare the two builds; within one build the
//! `sweep` and `sweep_seq` groups compare the two paths directly.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bispectral_core::autonomous::SeedData;
use bispectral_core::bispectral::{membership, Potential};
use bispectral_core::exact::{GaussianRational, MatC, MatLaurent, MatPolyX};
use bispectral_core::exec::{sweep, sweep_seq};

/// A deterministic family of consistent seeds at N = 3, m = 1:
/// residue diag(-2, 0, 0), bottom 2x3 block of V0 and bottom-right
/// 2x2 block of V1 filled from a small integer pool, one free V2 entry.
fn seed_batch(count: usize) -> Vec<SeedData> {
    (0..count)
        .map(|t| {
            let s = t as i64;
            let residue = MatC::from_fn(3, 3, |r, c| {
                if r == 0 && c == 0 {
                    GaussianRational::from_integer(-2)
                } else {
                    GaussianRational::zero()
                }
            });
            let v0 = MatC::from_fn(3, 3, |r, c| {
                if r >= 1 {
                    GaussianRational::from_ratio((s + 2 * r as i64 + 3 * c as i64) % 7 - 3, 2)
                } else {
                    GaussianRational::zero()
                }
            });
            let v1 = MatC::from_fn(3, 3, |r, c| {
                if r >= 1 && c >= 1 {
                    GaussianRational::from_ratio((s + 5 * r as i64 + c as i64) % 5 - 2, 3)
                } else {
                    GaussianRational::zero()
                }
            });
            let v212 = MatC::from_fn(1, 2, |_, c| {
                GaussianRational::from_ratio((s + c as i64) % 3 - 1, 4)
            });
            SeedData::new(residue, v0, v1, Some(v212), None).expect("consistent by construction")
        })
        .collect()
}

/// A deterministic family of candidate operators over the n = 2 fixture
/// potential: scalar polynomials in V (members) interleaved with
/// slightly off-diagonal perturbations (non-members).
fn candidate_batch(poly: &MatPolyX, count: usize) -> Vec<MatPolyX> {
    let v2 = poly.mul(poly);
    (0..count)
        .map(|t| {
            let a = GaussianRational::from_ratio(t as i64 % 5 + 1, 3);
            let b = GaussianRational::from_ratio(t as i64 % 7 - 3, 2);
            let member = MatPolyX::constant(MatC::identity(poly.dim()).scale(&a))
                .add(&poly.scale(&b))
                .add(&v2.scale(&GaussianRational::from_integer((t % 3) as i64)));
            if t % 4 == 3 {
                member.add(&MatPolyX::monomial(MatC::unit(4, 4, 3, 0), 1))
            } else {
                member
            }
        })
        .collect()
}

fn n2_potential() -> MatPolyX {
    let v0 =
        MatC::from_i64_rows(&[&[1, 2, 3, 4], &[0, 0, 5, 6], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
    let v1 =
        MatC::from_i64_rows(&[&[0, 7, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]]);
    MatPolyX::from_coeffs(
        4,
        vec![
            v0.clone(),
            v1.clone(),
            v1.mul(&v0).scale(&GaussianRational::from_ratio(1, 2)),
            v1.mul(&v1).scale(&GaussianRational::from_ratio(1, 6)),
        ],
    )
}

fn bench_seed_recursion(c: &mut Criterion) {
    let mut group = c.benchmark_group("seed_recursion_k24");
    group.sample_size(10);
    for &count in &[8usize, 24] {
        let batch = seed_batch(count);
        group.bench_with_input(BenchmarkId::new("sweep", count), &batch, |bench, batch| {
            bench.iter(|| -> Vec<MatLaurent> {
                sweep(batch.clone(), |seed| seed.solve(24))
            });
        });
        group.bench_with_input(
            BenchmarkId::new("sweep_seq", count),
            &batch,
            |bench, batch| {
                bench.iter(|| -> Vec<MatLaurent> {
                    sweep_seq(batch.clone(), |seed| seed.solve(24))
                });
            },
        );
    }
    group.finish();
}

fn bench_membership_batch(c: &mut Criterion) {
    let poly = n2_potential();
    let potential = Potential::from_poly(poly.clone());
    let mut group = c.benchmark_group("membership_n2");
    group.sample_size(10);
    for &count in &[8usize, 24] {
        let batch = candidate_batch(&poly, count);
        let pot = &potential;
        group.bench_with_input(BenchmarkId::new("sweep", count), &batch, |bench, batch| {
            bench.iter(|| -> Vec<bool> {
                sweep(batch.clone(), |theta| {
                    membership(&theta, pot).expect("decidable").verdict()
                })
            });
        });
        group.bench_with_input(
            BenchmarkId::new("sweep_seq", count),
            &batch,
            |bench, batch| {
                bench.iter(|| -> Vec<bool> {
                    sweep_seq(batch.clone(), |theta| {
                        membership(&theta, pot).expect("decidable").verdict()
                    })
                });
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_seed_recursion, bench_membership_batch);
criterion_main!(benches);
