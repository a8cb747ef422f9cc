use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rap_bench::laplacian;
use rap_core::linalg::rayleigh_ritz;
use rap_core::Preconditioner;

fn kernels(c: &mut Criterion) {
    for k in [4, 5] {
        let h = 0.5f64.powi(k);
        let f = laplacian(h);
        let n = f.pencil.n();
        let x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).sin()).collect();
        let mut y = vec![0.0; n];

        c.bench_with_input(BenchmarkId::new("matvec", n), &x, |b, x| {
            b.iter(|| f.pencil.a().mul_into(black_box(x), &mut y))
        });
        c.bench_with_input(BenchmarkId::new("schwarz_apply", n), &x, |b, x| {
            b.iter(|| f.pc.apply_into(black_box(x), &mut y))
        });
        let g = f.pc.apply(&f.pencil.a().mul(&x));
        let basis: Vec<&[f64]> = vec![&x, &f.x0hat, &g];
        c.bench_with_input(BenchmarkId::new("ritz3", n), &basis, |b, basis| {
            b.iter(|| rayleigh_ritz(black_box(basis), &f.pencil).unwrap())
        });
    }
}

criterion_group!(benches, kernels);
criterion_main!(benches);
