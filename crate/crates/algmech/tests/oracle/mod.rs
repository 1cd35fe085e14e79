//! Brute-force oracle for the symplectic Lie algebra reducer. Every numeric
//! routine here (Gauss elimination, RREF nullspace, projectors, expansions)
//! is written independently of the library's linear algebra so the two
//! implementations cross-check each other.
#![allow(clippy::needless_range_loop)] // index loops mirror the formulas


use algmech::chart::StructureArray;
use algmech::linalg::Mat;
use algmech::sample::{sample_scalars, splitmix64};
use algmech::symplectic::{ReducedLieAlgebra, SymplecticLieAlgebra};

/// One randomized reducer instance.
pub struct Instance {
    pub constants: StructureArray,
    pub omega: Mat,
    pub h_basis: Vec<Vec<f64>>,
}

// ── independent dense routines ──────────────────────────────────────

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = a.len();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[p][k].abs() {
                p = i;
            }
        }
        a.swap(k, p);
        b.swap(k, p);
        assert!(a[k][k].abs() > 1e-13, "oracle solve hit a singular matrix");
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            b[i] -= a[i][j] * b[j];
        }
        b[i] /= a[i][i];
    }
    b
}

/// Nullspace basis by reduced row echelon form with partial pivoting.
fn rref_nullspace(mat: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let mut p = r;
        for i in r..rows {
            if a[i][c].abs() > a[p][c].abs() {
                p = i;
            }
        }
        if r >= rows || a[p][c].abs() <= 1e-9 * scale {
            continue;
        }
        a.swap(r, p);
        let piv = a[r][c];
        for j in 0..cols {
            a[r][j] /= piv;
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0.0 {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for c in 0..cols {
        if pivot_cols.contains(&c) {
            continue;
        }
        let mut v = vec![0.0; cols];
        v[c] = 1.0;
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[ri][c];
        }
        basis.push(v);
    }
    basis
}

/// Orthogonal projector onto the span of the given ambient vectors, built
/// through normal equations.
fn projector(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let p = basis.len();
    let mut out = vec![vec![0.0; n]; n];
    if p == 0 {
        return out;
    }
    // G = BᵀB, solve G x_j = Bᵀ e_j, P = B x
    let gram: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| dot(&basis[i], &basis[j])).collect())
        .collect();
    for col in 0..n {
        let rhs: Vec<f64> = (0..p).map(|i| basis[i][col]).collect();
        let x = gauss_solve(gram.clone(), rhs);
        for row in 0..n {
            let mut v = 0.0;
            for i in 0..p {
                v += basis[i][row] * x[i];
            }
            out[row][col] = v;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Independent contraction c^γ_αβ u^α v^β (plain triple loop over `get`).
pub fn contract_constants(c: &StructureArray, u: &[f64], v: &[f64]) -> Vec<f64> {
    let n = c.rank();
    let mut out = vec![0.0; n];
    for g in 0..n {
        for a in 0..n {
            for b in 0..n {
                out[g] += c.get(g, a, b) * u[a] * v[b];
            }
        }
    }
    out
}

fn omega_apply(om: &Mat, u: &[f64], v: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..u.len() {
        for j in 0..v.len() {
            total += u[i] * om[(i, j)] * v[j];
        }
    }
    total
}

/// Least-squares expansion coefficients of `w` over the columns `basis`,
/// through normal equations (independent of the library's SVD route).
fn expand(basis: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let p = basis.len();
    let gram: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| dot(&basis[i], &basis[j])).collect())
        .collect();
    let rhs: Vec<f64> = (0..p).map(|i| dot(&basis[i], w)).collect();
    gauss_solve(gram, rhs)
}

fn jacobi_residual_of(c: &StructureArray) -> f64 {
    let n = c.rank();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for g in 0..n {
                for d in 0..n {
                    let mut s = 0.0;
                    for &(x, y, z) in &[(a, b, g), (b, g, a), (g, a, b)] {
                        for mu in 0..n {
                            s += c.get(d, mu, z) * c.get(mu, x, y);
                        }
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Recompute everything the reducer produced by brute force and return the
/// largest disagreement.
pub fn compare_with_oracle(
    g: &SymplecticLieAlgebra,
    h_basis: &[Vec<f64>],
    red: &ReducedLieAlgebra,
) -> f64 {
    let n = g.dim();
    let k = h_basis.len();
    let mut worst = 0.0f64;

    // kernel subspace: RREF nullspace of Ω_𝔥 in 𝔥-coordinates
    let omega_h: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| omega_apply(&g.omega, &h_basis[i], &h_basis[j]))
                .collect()
        })
        .collect();
    let ker_coords = rref_nullspace(&omega_h);
    assert_eq!(ker_coords.len(), red.kernel.cols(), "kernel dimension");
    let ker_ambient: Vec<Vec<f64>> = ker_coords
        .iter()
        .map(|kc| {
            (0..n)
                .map(|row| (0..k).map(|i| h_basis[i][row] * kc[i]).sum())
                .collect()
        })
        .collect();
    let p_oracle = projector(&ker_ambient, n);
    let impl_cols: Vec<Vec<f64>> = (0..red.kernel.cols()).map(|j| red.kernel.col(j)).collect();
    let p_impl = projector(&impl_cols, n);
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((p_oracle[i][j] - p_impl[i][j]).abs());
        }
    }

    // quotient data over the implementation's complement representatives
    let q = red.complement.cols();
    let mut stacked: Vec<Vec<f64>> = (0..q).map(|j| red.complement.col(j)).collect();
    stacked.extend(impl_cols.iter().cloned());
    for a in 0..q {
        for b in 0..q {
            let w = contract_constants(
                &g.constants,
                &red.complement.col(a),
                &red.complement.col(b),
            );
            let coef = expand(&stacked, &w);
            for c in 0..q {
                worst = worst.max((red.algebra.constants.get(c, a, b) - coef[c]).abs());
            }
            // the expansion must not leak outside the subalgebra span
            let mut recon = vec![0.0; n];
            for (i, base) in stacked.iter().enumerate() {
                for row in 0..n {
                    recon[row] += coef[i] * base[row];
                }
            }
            for row in 0..n {
                worst = worst.max((recon[row] - w[row]).abs());
            }
        }
    }
    for a in 0..q {
        for b in 0..q {
            let direct = omega_apply(&g.omega, &red.complement.col(a), &red.complement.col(b));
            worst = worst.max((red.algebra.omega[(a, b)] - direct).abs());
        }
    }

    // reduced constants satisfy Jacobi
    worst = worst.max(jacobi_residual_of(&red.algebra.constants));

    // pullback identity: Ω̃(πu, πv) = Ω_𝔥(u, v) for random u, v ∈ 𝔥
    let draws = sample_scalars(987, 10 * k, -1.0, 1.0);
    for t in 0..5 {
        let cu = &draws[2 * t * k..(2 * t + 1) * k];
        let cv = &draws[(2 * t + 1) * k..(2 * t + 2) * k];
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        for i in 0..k {
            for row in 0..n {
                u[row] += cu[i] * h_basis[i][row];
                v[row] += cv[i] * h_basis[i][row];
            }
        }
        let pu: Vec<f64> = (0..q).map(|j| dot(&red.complement.col(j), &u)).collect();
        let pv: Vec<f64> = (0..q).map(|j| dot(&red.complement.col(j), &v)).collect();
        let lhs = omega_apply(&red.algebra.omega, &pu, &pv);
        let rhs = omega_apply(&g.omega, &u, &v);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

// ── instance catalog ────────────────────────────────────────────────

/// Deterministic random orthogonal matrix (QR-free: SVD factor of a random
/// square matrix is orthogonal; instance generation may use library code).
fn random_orthogonal(n: usize, seed: u64) -> Mat {
    let entries = sample_scalars(seed, n * n, -1.0, 1.0);
    let m = Mat::from_fn(n, n, |i, j| entries[i * n + j] + if i == j { 2.0 } else { 0.0 });
    algmech::linalg::svd(&m).u
}

/// Conjugate (constants, omega, basis) by an orthogonal T: the bracket
/// becomes Tᵀ[T·, T·], the form TᵀΩT, and subalgebra vectors Tᵀh.
fn conjugate(c: &StructureArray, omega: &Mat, h: &[Vec<f64>], t: &Mat) -> Instance {
    let n = c.rank();
    let mut c_new = StructureArray::zeros(n);
    for a in 0..n {
        for b in (a + 1)..n {
            let br = contract_constants(c, &t.col(a), &t.col(b));
            // coefficients of Tᵀ·br
            for g in 0..n {
                let mut v = 0.0;
                for row in 0..n {
                    v += t[(row, g)] * br[row];
                }
                c_new.set(g, a, b, v);
            }
        }
    }
    let om_new = t.transpose().matmul(omega).matmul(t);
    let h_new: Vec<Vec<f64>> = h
        .iter()
        .map(|v| {
            (0..n)
                .map(|g| (0..n).map(|row| t[(row, g)] * v[row]).sum())
                .collect()
        })
        .collect();
    Instance {
        constants: c_new,
        omega: om_new,
        h_basis: h_new,
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn canonical_omega(n: usize, pairs: &[(usize, usize)]) -> Mat {
    let mut om = Mat::zeros(n, n);
    for &(i, j) in pairs {
        om[(i, j)] = 1.0;
        om[(j, i)] = -1.0;
    }
    om
}

/// 20 randomized instances of dimension ≤ 6 whose kernels are ideals.
pub fn instance_catalog() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 0xE5u64;
    let mut next_seed = || {
        seed = seed.wrapping_add(1);
        let mut s = seed;
        splitmix64(&mut s)
    };

    // abelian ℝ⁴/ℝ⁶ with canonical forms and coordinate subalgebras
    let ab4 = StructureArray::zeros(4);
    let om4 = canonical_omega(4, &[(0, 1), (2, 3)]);
    let subsets4: Vec<Vec<usize>> = vec![
        vec![0, 1, 2, 3],
        vec![0, 1, 2],
        vec![0, 1],
        vec![1, 2],
        vec![0, 2],
    ];
    for (k, subset) in subsets4.iter().enumerate() {
        let h: Vec<Vec<f64>> = subset.iter().map(|&i| unit(4, i)).collect();
        let t = random_orthogonal(4, next_seed() ^ k as u64);
        out.push(conjugate(&ab4, &om4, &h, &t));
    }
    let ab6 = StructureArray::zeros(6);
    let om6 = canonical_omega(6, &[(0, 1), (2, 3), (4, 5)]);
    let subsets6: Vec<Vec<usize>> = vec![
        vec![0, 1, 2, 3, 4, 5],
        vec![0, 1, 2, 3, 4],
        vec![0, 2, 4],
        vec![1, 2, 3],
        vec![0, 1, 4, 5],
        vec![2, 3, 4],
        vec![0, 3, 5],
    ];
    for (k, subset) in subsets6.iter().enumerate() {
        let h: Vec<Vec<f64>> = subset.iter().map(|&i| unit(6, i)).collect();
        let t = random_orthogonal(6, next_seed() ^ (100 + k as u64));
        out.push(conjugate(&ab6, &om6, &h, &t));
    }

    // heisenberg h₃ ⊕ ℝ with the center in the kernel
    let mut h3 = StructureArray::zeros(4);
    h3.set(2, 0, 1, 1.0); // [e1, e2] = e3
    let om_h3 = canonical_omega(4, &[(0, 1), (2, 3)]);
    let h_sub: Vec<Vec<f64>> = vec![unit(4, 0), unit(4, 1), unit(4, 2)];
    for k in 0..4 {
        let t = random_orthogonal(4, next_seed() ^ (200 + k as u64));
        out.push(conjugate(&h3, &om_h3, &h_sub, &t));
    }

    // aff(1) ⊕ aff(1) with a central kernel direction inside 𝔥
    let mut aff2 = StructureArray::zeros(4);
    aff2.set(1, 0, 1, 1.0); // [a1, b1] = b1
    aff2.set(3, 2, 3, 1.0); // [a2, b2] = b2
    let om_aff = canonical_omega(4, &[(0, 1), (2, 3)]);
    let h_aff: Vec<Vec<f64>> = vec![unit(4, 0), unit(4, 1), unit(4, 2)];
    for k in 0..4 {
        let t = random_orthogonal(4, next_seed() ^ (300 + k as u64));
        out.push(conjugate(&aff2, &om_aff, &h_aff, &t));
    }

    assert_eq!(out.len(), 20);
    out
}

/// Instances whose kernel is not an ideal; the reducer must refuse them.
pub fn counterexamples() -> Vec<(StructureArray, Mat, Vec<Vec<f64>>)> {
    // heisenberg-type: Ω = e²∧e³ + e¹∧e⁴ puts ker Ω_𝔥 = span(e₁) and
    // [e₂, e₁] = −e₃ escapes it
    let mut h3 = StructureArray::zeros(4);
    h3.set(2, 0, 1, 1.0);
    let om1 = canonical_omega(4, &[(1, 2), (0, 3)]);
    let h1: Vec<Vec<f64>> = vec![unit(4, 0), unit(4, 1), unit(4, 2)];

    // so(3) ⊕ ℝ³: 𝔥 = so(3) ⊕ ℝe₄ with kernel span(e₂, e₃) and
    // [e₂, e₃] = e₁ outside it
    let mut so3r3 = StructureArray::zeros(6);
    so3r3.set(2, 0, 1, 1.0);
    so3r3.set(1, 0, 2, -1.0);
    so3r3.set(0, 1, 2, 1.0);
    let om2 = canonical_omega(6, &[(0, 3), (1, 4), (2, 5)]);
    let h2: Vec<Vec<f64>> = vec![unit(6, 0), unit(6, 1), unit(6, 2), unit(6, 3)];

    vec![(h3, om1, h1), (so3r3, om2, h2)]
}
