//! Continuous 6D rotation parameterization.
//!
//! Six numbers `(a1, a2)` are orthonormalized by Gram–Schmidt into the first
//! two rows of a rotation matrix; the third row is their cross product.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::error::{Error, Result};

/// Partial derivatives of one rotation row with respect to the six parameters.
pub type RowJacobian = SMatrix<f64, 3, 6>;

const MIN_NORM: f64 = 1e-9;

/// The 6D parameters of the identity rotation.
pub const IDENTITY_6D: [f64; 6] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];

/// Decodes six parameters into a special orthogonal matrix.
pub fn rot6d_to_matrix(r: &[f64; 6]) -> Result<Matrix3<f64>> {
    Ok(decode(r)?.matrix())
}

/// Decodes and returns the Jacobians of each row `b_k` with respect to `r`.
pub fn rot6d_with_jacobian(r: &[f64; 6]) -> Result<(Matrix3<f64>, [RowJacobian; 3])> {
    let g = decode(r)?;
    Ok((g.matrix(), g.row_jacobians()))
}

/// The first two rows of `m`, i.e. the 6D encoding of a rotation.
pub fn matrix_to_rot6d(m: &Matrix3<f64>) -> [f64; 6] {
    [
        m[(0, 0)],
        m[(0, 1)],
        m[(0, 2)],
        m[(1, 0)],
        m[(1, 1)],
        m[(1, 2)],
    ]
}

struct GramSchmidt {
    a2: Vector3<f64>,
    n1: f64,
    n2: f64,
    b1: Vector3<f64>,
    b2: Vector3<f64>,
    b3: Vector3<f64>,
}

fn decode(r: &[f64; 6]) -> Result<GramSchmidt> {
    let a1 = Vector3::new(r[0], r[1], r[2]);
    let a2 = Vector3::new(r[3], r[4], r[5]);
    let n1 = a1.norm();
    if !(n1 > MIN_NORM) {
        return Err(Error::Singular(format!("first vector norm {n1:e}")));
    }
    let b1 = a1 / n1;
    let u2 = a2 - b1 * b1.dot(&a2);
    let n2 = u2.norm();
    if !(n2 > MIN_NORM) {
        return Err(Error::Singular(format!(
            "second vector nearly parallel to first (residual norm {n2:e})"
        )));
    }
    let b2 = u2 / n2;
    let b3 = b1.cross(&b2);
    Ok(GramSchmidt {
        a2,
        n1,
        n2,
        b1,
        b2,
        b3,
    })
}

impl GramSchmidt {
    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[
            self.b1.transpose(),
            self.b2.transpose(),
            self.b3.transpose(),
        ])
    }

    fn row_jacobians(&self) -> [RowJacobian; 3] {
        let eye = Matrix3::identity();
        let (b1, b2) = (self.b1, self.b2);
        let db1_da1 = (eye - b1 * b1.transpose()) / self.n1;
        // u2 = a2 - (b1·a2) b1
        let du2_db1 = -(b1 * self.a2.transpose() + eye * b1.dot(&self.a2));
        let du2_da1 = du2_db1 * db1_da1;
        let du2_da2 = eye - b1 * b1.transpose();
        let p2 = (eye - b2 * b2.transpose()) / self.n2;
        let db2_da1 = p2 * du2_da1;
        let db2_da2 = p2 * du2_da2;
        // b3 = b1 × b2, d(b1×b2) = -[b2]× db1 + [b1]× db2
        let skew_b1 = b1.cross_matrix();
        let skew_b2 = b2.cross_matrix();
        let db3_da1 = -skew_b2 * db1_da1 + skew_b1 * db2_da1;
        let db3_da2 = skew_b1 * db2_da2;

        let mut j1 = RowJacobian::zeros();
        j1.fixed_view_mut::<3, 3>(0, 0).copy_from(&db1_da1);
        let mut j2 = RowJacobian::zeros();
        j2.fixed_view_mut::<3, 3>(0, 0).copy_from(&db2_da1);
        j2.fixed_view_mut::<3, 3>(0, 3).copy_from(&db2_da2);
        let mut j3 = RowJacobian::zeros();
        j3.fixed_view_mut::<3, 3>(0, 0).copy_from(&db3_da1);
        j3.fixed_view_mut::<3, 3>(0, 3).copy_from(&db3_da2);
        [j1, j2, j3]
    }
}

/// `∂(R u)/∂r` as a 3×6 matrix: row k is `uᵀ ∂b_k/∂r`.
pub fn rotate_jacobian(rows: &[RowJacobian; 3], u: &Vector3<f64>) -> SMatrix<f64, 3, 6> {
    let mut out = SMatrix::<f64, 3, 6>::zeros();
    for (k, jk) in rows.iter().enumerate() {
        out.set_row(k, &(u.transpose() * jk));
    }
    out
}
