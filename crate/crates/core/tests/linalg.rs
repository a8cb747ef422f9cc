mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rap_core::linalg::mmio::{format_matrix_market, parse_matrix_market, parse_vector, write_vector, read_vector};
use rap_core::linalg::{extremal_pencil_eigs, CsrMatrix, EnvelopeCholesky};
use rap_core::precond::{build_two_level_overlapping, Preconditioner};
use rap_core::{
    dense_generalized_eig, euclidean_gradient, rayleigh_quotient, rayleigh_ritz, weighted_inner, Error, MatrixPencil,
    SpdMatrix,
};

fn diag(d: &[f64]) -> SpdMatrix {
    SpdMatrix::from_diagonal(d).unwrap()
}

fn diag_pencil(a: &[f64], m: &[f64]) -> MatrixPencil {
    MatrixPencil::new(diag(a), diag(m)).unwrap()
}

#[test]
fn rayleigh_quotient_examples() {
    let p = diag_pencil(&[1.0, 2.0], &[1.0, 1.0]);
    assert_eq!(rayleigh_quotient(&p, &[1.0, 0.0]).unwrap(), 1.0);
    assert!((rayleigh_quotient(&p, &[1.0, 1.0]).unwrap() - 1.5).abs() < 1e-15);
    let q = diag_pencil(&[1.0, 3.0], &[1.0, 0.5]);
    assert!((rayleigh_quotient(&q, &[0.0, 1.0]).unwrap() - 6.0).abs() < 1e-15);
}

#[test]
fn rayleigh_quotient_rejects_zero() {
    let p = diag_pencil(&[1.0, 2.0], &[1.0, 1.0]);
    assert!(matches!(rayleigh_quotient(&p, &[0.0, 0.0]), Err(Error::Domain(_))));
    assert!(matches!(euclidean_gradient(&p, &[0.0, 0.0]), Err(Error::Domain(_))));
}

#[test]
fn gradient_examples() {
    let p = diag_pencil(&[1.0, 2.0], &[1.0, 1.0]);
    assert_eq!(euclidean_gradient(&p, &[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = euclidean_gradient(&p, &[s, s]).unwrap();
    // 2(Ax − 1.5x) at x = (1,1)/√2
    assert!((g[0] + s).abs() < 1e-14 && (g[1] - s).abs() < 1e-14, "{g:?}");
    let f = |x: &[f64]| rayleigh_quotient(&p, x).unwrap();
    for d in [[1.0, 0.0], [0.0, 1.0], [0.3, -0.7]] {
        let fd = directional_fd(f, &[s, s], &d, 1e-5);
        assert!((fd - dot(&g, &d)).abs() < 1e-8);
    }
}

#[test]
fn gradient_halves_when_point_doubles() {
    let mut r = rng(3);
    let (_, _, p) = random_pencil(&mut r, 5);
    let x = gaussian_vec(&mut r, 5);
    let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let g = euclidean_gradient(&p, &x).unwrap();
    let g2 = euclidean_gradient(&p, &x2).unwrap();
    for (a, b) in g.iter().zip(&g2) {
        assert!((a - 2.0 * b).abs() <= 1e-14 * a.abs().max(1.0));
    }
}

#[test]
fn weighted_inner_examples() {
    assert_eq!(weighted_inner(&[1.0, 0.0], &[0.0, 1.0], None).unwrap(), 0.0);
    let w = diag(&[2.0, 3.0]);
    assert_eq!(weighted_inner(&[1.0, 1.0], &[1.0, 1.0], Some(&w)).unwrap(), 5.0);
    assert!(matches!(weighted_inner(&[1.0], &[1.0, 2.0], None), Err(Error::Dimension { .. })));
    assert!(matches!(weighted_inner(&[1.0, 2.0], &[1.0, 2.0], Some(&diag(&[1.0]))), Err(Error::Dimension { .. })));
}

#[test]
fn ritz_single_eigenvector() {
    let mut r = rng(11);
    let (a, m, p) = random_pencil(&mut r, 6);
    let u = oracle_u1(&a, &m);
    let l1 = oracle_eigenvalues(&a, &m)[0];
    let res = rayleigh_ritz(&[&u], &p).unwrap();
    assert!(rel_err(res.value, l1) < 1e-12);
    assert_eq!(res.coeffs.len(), 1);
    assert!((res.coeffs[0].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn ritz_coordinate_basis() {
    let p = diag_pencil(&[3.0, 1.0], &[1.0, 1.0]);
    let res = rayleigh_ritz(&[&[1.0, 0.0], &[0.0, 1.0]], &p).unwrap();
    assert!((res.value - 1.0).abs() < 1e-15);
    assert!(res.vector[0].abs() < 1e-15 && res.vector[1].abs() > 0.0);
}

#[test]
fn ritz_degenerate_basis() {
    let p = diag_pencil(&[3.0, 1.0], &[1.0, 1.0]);
    assert!(matches!(rayleigh_ritz(&[&[0.0, 0.0]], &p), Err(Error::DegenerateBasis)));
    assert!(rayleigh_ritz(&[], &p).is_err());
}

#[test]
fn ritz_drops_dependent_columns() {
    let p = diag_pencil(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]);
    let x = [1.0, 1.0, 0.0];
    let y = [2.0, 2.0, 0.0];
    let res = rayleigh_ritz(&[&x, &y, &[0.0, 1.0, 0.0]], &p).unwrap();
    assert!((res.value - 1.0).abs() < 1e-14);
    let rebuilt: Vec<f64> = (0..3).map(|i| res.coeffs[0] * x[i] + res.coeffs[1] * y[i] + res.coeffs[2] * [0.0, 1.0, 0.0][i]).collect();
    for (a, b) in rebuilt.iter().zip(&res.vector) {
        assert!((a - b).abs() < 1e-14);
    }
}

/// Minimum of `f(c₀b₀ + c₁b₁ + c₂b₂)` over the coefficient sphere by a grid
/// followed by a shrinking pattern search.
fn grid_min(a: &DMatrix<f64>, m: &DMatrix<f64>, b: [&[f64]; 3]) -> f64 {
    let n = b[0].len();
    let f = |t: f64, s: f64| -> f64 {
        let c = [t.sin() * s.cos(), t.sin() * s.sin(), t.cos()];
        let x: Vec<f64> = (0..n).map(|i| c[0] * b[0][i] + c[1] * b[1][i] + c[2] * b[2][i]).collect();
        rq(a, m, &x)
    };
    let steps = 200;
    let (mut bt, mut bs, mut bv) = (0.0, 0.0, f64::INFINITY);
    for i in 0..=steps {
        for j in 0..2 * steps {
            let t = std::f64::consts::PI * i as f64 / steps as f64;
            let s = std::f64::consts::PI * j as f64 / steps as f64;
            let v = f(t, s);
            if v < bv {
                (bt, bs, bv) = (t, s, v);
            }
        }
    }
    let mut h = std::f64::consts::PI / steps as f64;
    while h > 1e-12 {
        let mut moved = false;
        for (dt, ds) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let v = f(bt + dt, bs + ds);
            if v < bv {
                (bt, bs, bv) = (bt + dt, bs + ds, v);
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    bv
}

#[test]
fn ritz_matches_grid_search() {
    let mut r = rng(7);
    for _ in 0..5 {
        let (a, m, p) = random_pencil(&mut r, 6);
        let (x, y, g) = (gaussian_vec(&mut r, 6), gaussian_vec(&mut r, 6), gaussian_vec(&mut r, 6));
        let res = rayleigh_ritz(&[&x, &y, &g], &p).unwrap();
        let oracle = grid_min(&a, &m, [&x, &y, &g]);
        assert!((res.value - oracle).abs() < 1e-8, "{} vs {}", res.value, oracle);
        assert!(rel_err(res.value, rq(&a, &m, &res.vector)) < 1e-10);
    }
}

#[test]
fn dense_eig_examples() {
    let p = diag_pencil(&[2.0, 5.0], &[1.0, 1.0]);
    let e = dense_generalized_eig(&p).unwrap();
    assert!((e.values[0] - 2.0).abs() < 1e-14 && (e.values[1] - 5.0).abs() < 1e-14);

    let mut r = rng(5);
    let a = random_spd(&mut r, 5, 1.0, 4.0);
    let e = dense_generalized_eig(&pencil(&a, &a)).unwrap();
    assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));

    // 1D Laplacian on 3 interior points, h = 1/4
    let t = SpdMatrix::from_triplets(
        3,
        [(0, 0, 32.0), (1, 1, 32.0), (2, 2, 32.0), (0, 1, -16.0), (1, 0, -16.0), (1, 2, -16.0), (2, 1, -16.0)],
    )
    .unwrap();
    let e = dense_generalized_eig(&MatrixPencil::standard(t)).unwrap();
    for (k, v) in e.values.iter().enumerate() {
        let exact = 32.0 * (1.0 - ((k + 1) as f64 * std::f64::consts::PI / 4.0).cos());
        assert!(rel_err(*v, exact) < 1e-13, "{v} vs {exact}");
    }
}

#[test]
fn dense_eig_vectors_are_m_orthonormal_and_match_oracle() {
    let mut r = rng(17);
    let (a, m, p) = random_pencil(&mut r, 7);
    let e = dense_generalized_eig(&p).unwrap();
    let oracle = oracle_eigenvalues(&a, &m);
    for (v, o) in e.values.iter().zip(&oracle) {
        assert!(rel_err(*v, *o) < 1e-12);
    }
    assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    for i in 0..7 {
        for j in 0..7 {
            let mij = dv(&e.vectors[i]).dot(&(&m * dv(&e.vectors[j])));
            assert!((mij - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        let res = &a * dv(&e.vectors[i]) - &m * dv(&e.vectors[i]) * e.values[i];
        assert!(res.norm() < 1e-11 * e.values[i]);
    }
}

#[test]
fn dense_eig_rejects_indefinite_mass() {
    let a = diag(&[1.0, 2.0]);
    let m = SpdMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, 1.0), (0, 1, 2.0), (1, 0, 2.0)]).unwrap();
    let p = MatrixPencil::new(a, m).unwrap();
    assert!(matches!(dense_generalized_eig(&p), Err(Error::Matrix(_))));
}

#[test]
fn lanczos_identical_pencil() {
    let mut r = rng(23);
    let a = to_spd(&random_spd(&mut r, 10, 1.0, 50.0));
    let f = EnvelopeCholesky::factor(&a).unwrap();
    let apply_a = |x: &[f64], y: &mut [f64]| a.mul_into(x, y);
    let apply_binv = |x: &[f64], y: &mut [f64]| {
        y.copy_from_slice(x);
        f.solve_in_place(y);
    };
    let est = extremal_pencil_eigs(&apply_a, &apply_binv, 10, 5).unwrap();
    assert!((est.nu_min - 1.0).abs() < 1e-10 && (est.nu_max - 1.0).abs() < 1e-10);
    assert!(est.breakdown);
}

#[test]
fn lanczos_diagonal_two_steps() {
    let a = diag(&[1.0, 4.0]);
    let apply_a = |x: &[f64], y: &mut [f64]| a.mul_into(x, y);
    let id = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
    let est = extremal_pencil_eigs(&apply_a, &id, 2, 2).unwrap();
    assert!((est.nu_min - 1.0).abs() < 1e-12 && (est.nu_max - 4.0).abs() < 1e-12);
}

#[test]
fn lanczos_brackets_and_improves() {
    let mut r = rng(29);
    let a = random_spd(&mut r, 40, 1.0, 100.0);
    let sa = to_spd(&a);
    let truth = oracle_eigenvalues(&a, &DMatrix::identity(40, 40));
    let apply_a = |x: &[f64], y: &mut [f64]| sa.mul_into(x, y);
    let id = |x: &[f64], y: &mut [f64]| y.copy_from_slice(x);
    let mut prev = (f64::INFINITY, 0.0);
    for iters in [2, 4, 8, 16, 40] {
        let e = extremal_pencil_eigs(&apply_a, &id, 40, iters).unwrap();
        assert!(e.nu_min >= truth[0] * (1.0 - 1e-12) && e.nu_max <= truth[39] * (1.0 + 1e-12));
        assert!(e.nu_min <= prev.0 * (1.0 + 1e-12) && e.nu_max >= prev.1 * (1.0 - 1e-12));
        prev = (e.nu_min, e.nu_max);
    }
    assert!(rel_err(prev.0, truth[0]) < 1e-10 && rel_err(prev.1, truth[39]) < 1e-10);
}

#[test]
fn lanczos_schwarz_matches_assembled_operator() {
    let hier = rap_core::fem::build_mesh_hierarchy(0.25, 0.125).unwrap();
    let p = rap_core::fem::assemble_laplacian_p1(&hier.fine, &rap_core::fem::Coefficient::identity()).unwrap();
    let pc = build_two_level_overlapping(&hier, 0.5, p.a()).unwrap();
    let n = p.n();
    let mut binv = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        binv.column_mut(j).copy_from_slice(&pc.apply(&e));
    }
    let binv = (&binv + binv.transpose()) * 0.5;
    // Eigenvalues of (A, B) are those of B⁻¹A, i.e. of (B⁻¹)^{1/2} A (B⁻¹)^{1/2}.
    let s = sym_sqrt(&binv);
    let truth = oracle_eigenvalues(&(&s * p.a().to_dense() * &s), &DMatrix::identity(n, n));
    let apply_a = |x: &[f64], y: &mut [f64]| p.a().mul_into(x, y);
    let apply_b = |x: &[f64], y: &mut [f64]| pc.apply_into(x, y);
    let e = extremal_pencil_eigs(&apply_a, &apply_b, n, 50).unwrap();
    assert!(rel_err(e.nu_min, truth[0]) < 0.01, "{} vs {}", e.nu_min, truth[0]);
    assert!(rel_err(e.nu_max, truth[n - 1]) < 0.01, "{} vs {}", e.nu_max, truth[n - 1]);
}

#[test]
fn spd_matrix_validation() {
    assert!(matches!(
        SpdMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, 1.0), (0, 1, 0.5)]),
        Err(Error::Matrix(_))
    ));
    assert!(SpdMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, -1.0)]).is_err());
    assert!(SpdMatrix::from_triplets(2, [(0, 0, f64::NAN), (1, 1, 1.0)]).is_err());
    assert!(SpdMatrix::from_triplets(2, [(0, 2, 1.0)]).is_err());
    assert!(MatrixPencil::new(diag(&[1.0]), diag(&[1.0, 1.0])).is_err());
    // Duplicates are summed.
    let s = SpdMatrix::from_triplets(2, [(0, 0, 1.0), (0, 0, 1.0), (1, 1, 3.0)]).unwrap();
    assert_eq!(s.get(0, 0), 2.0);
    assert_eq!(s.nnz(), 2);
}

#[test]
fn csr_galerkin_matches_dense() {
    let mut r = rng(31);
    let a = random_spd(&mut r, 6, 1.0, 5.0);
    let sa = to_spd(&a);
    let pt: Vec<(usize, usize, f64)> =
        (0..6).flat_map(|i| (0..2).map(move |j| (i, j, ((i * 3 + j * 5) % 7) as f64 - 3.0))).collect();
    let p = CsrMatrix::from_triplets(6, 2, pt).unwrap();
    let g = sa.galerkin(&p).unwrap().to_dense();
    let pd = p.to_dense();
    let oracle = pd.transpose() * &a * &pd;
    assert!((g - oracle).abs().max() < 1e-12);
}

#[test]
fn matrix_market_round_trip() {
    let mut r = rng(37);
    let a = to_spd(&random_spd(&mut r, 5, 1.0, 3.0));
    let text = format_matrix_market(&a);
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
    let b = parse_matrix_market(&text).unwrap();
    assert_eq!(a.to_dense(), b.to_dense());

    let general = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 4\n1 1 2\n1 2 -1\n2 1 -1\n2 2 2\n";
    let g = parse_matrix_market(general).unwrap();
    assert_eq!(g.get(0, 1), -1.0);
    let int = "%%MatrixMarket matrix coordinate integer symmetric\n2 2 2\n1 1 3\n2 2 4\n";
    assert_eq!(parse_matrix_market(int).unwrap().get(1, 1), 4.0);
}

#[test]
fn matrix_market_errors() {
    assert!(parse_matrix_market("").is_err());
    assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").is_err());
    assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n2 2 1\n").is_err());
    assert!(matches!(
        parse_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 x 1\n"),
        Err(Error::Parse { .. })
    ));
    assert!(parse_matrix_market("%%MatrixMarket matrix coordinate complex symmetric\n1 1 1\n1 1 1 0\n").is_err());
}

#[test]
fn vector_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("rap-core-vec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("x.txt");
    let x = vec![1.0, -2.5e-300, std::f64::consts::PI];
    write_vector(&path, &x).unwrap();
    assert_eq!(read_vector(&path).unwrap(), x);
    assert_eq!(parse_vector("% c\n1\n\n2\n").unwrap(), vec![1.0, 2.0]);
    assert!(parse_vector("1\nabc\n").is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

fn small_pencil_strategy() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2usize..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_quotient_brackets_and_scales((seed, n) in small_pencil_strategy(), alpha in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64]) {
        let mut r = rng(seed);
        let (a, m, p) = random_pencil(&mut r, n);
        let ev = oracle_eigenvalues(&a, &m);
        let x = gaussian_vec(&mut r, n);
        let f = rayleigh_quotient(&p, &x).unwrap();
        prop_assert!(f >= ev[0] * (1.0 - 1e-12) && f <= ev[n - 1] * (1.0 + 1e-12));
        let xs: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        prop_assert!(rel_err(rayleigh_quotient(&p, &xs).unwrap(), f) < 1e-14);
    }

    #[test]
    fn gradient_orthogonal_and_matches_fd((seed, n) in small_pencil_strategy()) {
        let mut r = rng(seed);
        let (_, _, p) = random_pencil(&mut r, n);
        let x = gaussian_vec(&mut r, n);
        let g = euclidean_gradient(&p, &x).unwrap();
        prop_assert!(dot(&g, &x).abs() <= 1e-12 * norm(&g) * norm(&x) + 1e-300);
        let d0 = gaussian_vec(&mut r, n);
        let nx2 = dot(&x, &x);
        let d: Vec<f64> = d0.iter().zip(&x).map(|(a, b)| a - dot(&d0, &x) / nx2 * b).collect();
        let f = |y: &[f64]| rayleigh_quotient(&p, y).unwrap();
        let fd = directional_fd(f, &x, &d, 1e-5);
        let exact = dot(&g, &d);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(norm(&g) * norm(&d)));
    }

    #[test]
    fn weighted_inner_symmetric((seed, n) in small_pencil_strategy()) {
        let mut r = rng(seed);
        let w = to_spd(&random_spd(&mut r, n, 0.5, 3.0));
        let (x, y) = (gaussian_vec(&mut r, n), gaussian_vec(&mut r, n));
        let a = weighted_inner(&x, &y, Some(&w)).unwrap();
        let b = weighted_inner(&y, &x, Some(&w)).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
    }

    #[test]
    fn ritz_never_exceeds_basis((seed, n) in small_pencil_strategy(), k in 1usize..4) {
        let mut r = rng(seed);
        let (a, m, p) = random_pencil(&mut r, n);
        let basis: Vec<Vec<f64>> = (0..k).map(|_| gaussian_vec(&mut r, n)).collect();
        let refs: Vec<&[f64]> = basis.iter().map(Vec::as_slice).collect();
        let res = rayleigh_ritz(&refs, &p).unwrap();
        let best = basis.iter().map(|b| rq(&a, &m, b)).fold(f64::INFINITY, f64::min);
        prop_assert!(res.value <= best * (1.0 + 1e-12));
        prop_assert!(rel_err(res.value, rq(&a, &m, &res.vector)) < 1e-10);
    }

    #[test]
    fn spd_products_match_dense((seed, n) in small_pencil_strategy()) {
        let mut r = rng(seed);
        let a = random_spd(&mut r, n, 0.1, 10.0);
        let s = to_spd(&a);
        let x = gaussian_vec(&mut r, n);
        let y = s.mul(&x);
        let yd = &a * dv(&x);
        for i in 0..n {
            prop_assert!((y[i] - yd[i]).abs() <= 1e-12 * yd.norm().max(1.0));
        }
        prop_assert!(s.quad(&x) > 0.0);
        let f = EnvelopeCholesky::factor(&s).unwrap();
        let z = f.solve(&y).unwrap();
        for i in 0..n {
            prop_assert!((z[i] - x[i]).abs() <= 1e-9 * norm(&x));
        }
    }
}
