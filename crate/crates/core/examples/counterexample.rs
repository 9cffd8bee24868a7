//! A Hardy-space isometry that is not contractive at a matrix point.
use mhk::schur::counterexample;

fn main() -> mhk::Result<()> {
    let rep = counterexample::counterexample_suite_with(0, 20, 10)?;
    println!("isometry defect on random F: {:.3e}", rep.isometry_defect);
    println!("lambda_min(I - S(A)S(A)^*) at the Hadamard point: {:.4}", rep.lambda_min_at_hadamard);
    println!("scalar-point kernel: {:?} (min eig {:.3e})", rep.scalar_kernel, rep.scalar_kernel_min_eig);
    println!("sup ||S(zI)|| over the disk: {:.6}", rep.scalar_slice_max_norm);
    Ok(())
}
