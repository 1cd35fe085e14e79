//! Symplectic reduction of a finite-dimensional Lie algebra by a subalgebra:
//! quotient 𝔥/ker Ω_𝔥. Shows a degenerate abelian case and the
//! heisenberg-type counterexample where the kernel fails to be an ideal.
//!
//! ```bash
//! cargo run --example lie_algebra_reduction
//! ```

use algmech::chart::StructureArray;
use algmech::linalg::Mat;
use algmech::symplectic::{reduce_symplectic_lie_algebra, SymplecticLieAlgebra};

fn main() {
    // abelian ℝ⁴ with Ω = e¹∧e²: restricting to 𝔥 = 𝔤 leaves ker = span(e₃, e₄)
    let mut omega = Mat::zeros(4, 4);
    omega[(0, 1)] = 1.0;
    omega[(1, 0)] = -1.0;
    let g = SymplecticLieAlgebra::new(StructureArray::zeros(4), omega).unwrap();
    let basis: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let red = reduce_symplectic_lie_algebra(&g, &basis).expect("reduction");
    println!(
        "abelian ℝ⁴, Ω = e¹∧e²: kernel dim {}, reduced dim {}, Ω̃(e₁,e₂) = {}",
        red.kernel.cols(),
        red.algebra.dim(),
        red.algebra.omega[(0, 1)]
    );

    // heisenberg h₃ ⊕ ℝ with Ω = e²∧e³ + e¹∧e⁴: on 𝔥 = h₃ the kernel is
    // span(e₁) and [e₂, e₁] = −e₃ escapes it — reduction must refuse
    let mut c = StructureArray::zeros(4);
    c.set(2, 0, 1, 1.0);
    let mut omega = Mat::zeros(4, 4);
    omega[(1, 2)] = 1.0;
    omega[(2, 1)] = -1.0;
    omega[(0, 3)] = 1.0;
    omega[(3, 0)] = -1.0;
    let g = SymplecticLieAlgebra::new(c, omega).unwrap();
    let h: Vec<Vec<f64>> = vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ];
    match reduce_symplectic_lie_algebra(&g, &h) {
        Err(e) => println!("heisenberg-type instance refused: {e}"),
        Ok(_) => println!("unexpected success"),
    }
}
