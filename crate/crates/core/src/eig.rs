//! Hermitian eigendecomposition (complex cyclic Jacobi) and derived norms.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::mp::{MpComplex, MpReal};

const MAX_SWEEPS: usize = 80;

/// Eigenpairs of a Hermitian matrix; `values` ascending, `vectors` column-wise.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<MpReal>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// `‖H V − V Λ‖_max`.
    pub fn residual(&self, h: &CMatrix) -> Result<MpReal> {
        let hv = h.matmul(&self.vectors)?;
        let mut vl = self.vectors.clone();
        let d: Vec<MpComplex> = self.values.iter().map(|l| MpComplex::from_real(l.clone())).collect();
        vl.scale_cols(&d);
        hv.max_abs_diff(&vl)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rotations sweep until every off-diagonal modulus is below
/// `10^(-digits+4)·‖H‖_max`.
pub fn hermitian_eig(h: &CMatrix) -> Result<Eigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            op: "hermitian_eig",
            detail: alloc::format!("{}x{} is not square", h.rows(), h.cols()),
        });
    }
    if !h.is_hermitian(8) {
        return Err(Error::NotHermitian { deviation: h.hermiticity_defect().to_f64() });
    }
    let n = h.rows();
    let prec = h.precision();
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)].im = MpReal::zero(prec);
    }
    let mut v = CMatrix::identity(n, prec);
    let scale = h.max_abs();
    let thresh = &prec.tolerance(4) * &scale;
    let one = MpReal::one(prec);

    let mut converged = scale.is_zero() || n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)].clone();
                let mag = apq.abs();
                if mag < thresh {
                    continue;
                }
                rotated = true;
                // Phase w makes the (p,q) element real positive after Q → w·Q.
                let w = apq.conj().div_real(&mag);
                let wc = w.conj();
                let zeta = &(&a[(q, q)].re - &a[(p, p)].re) / &mag.mul_i64(2);
                let root = (&one + &(&zeta * &zeta)).sqrt();
                let t = if zeta.is_negative() {
                    -(&one / &(&zeta.abs() + &root))
                } else {
                    &one / &(&zeta + &root)
                };
                let c = (&one + &(&t * &t)).sqrt().recip();
                let s = &t * &c;
                let sw = w.scale(&s);
                let cw = w.scale(&c);
                let swc = wc.scale(&s);
                let cwc = wc.scale(&c);

                // Columns: A ← A G, V ← V G.
                for m in [&mut a, &mut v] {
                    for k in 0..n {
                        let xp = m[(k, p)].clone();
                        let xq = m[(k, q)].clone();
                        m[(k, p)] = &xp.scale(&c) - &(&sw * &xq);
                        m[(k, q)] = &xp.scale(&s) + &(&cw * &xq);
                    }
                }
                // Rows: A ← G† A.
                for k in 0..n {
                    let xp = a[(p, k)].clone();
                    let xq = a[(q, k)].clone();
                    a[(p, k)] = &xp.scale(&c) - &(&swc * &xq);
                    a[(q, k)] = &xp.scale(&s) + &(&cwc * &xq);
                }
                a[(p, q)] = MpComplex::zero(prec);
                a[(q, p)] = MpComplex::zero(prec);
                a[(p, p)].im = MpReal::zero(prec);
                a[(q, q)].im = MpReal::zero(prec);
            }
        }
        converged = !rotated;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)].re.clone()).collect();
    let vectors = CMatrix::from_fn(n, n, prec, |r, c| v[(r, order[c])].clone());
    Ok(Eigen { values, vectors })
}

/// Singular values in descending order, from the spectrum of `A†A`.
pub fn singular_values(a: &CMatrix) -> Result<Vec<MpReal>> {
    let prec = a.precision();
    let ata = a.adjoint().matmul(a)?;
    // Mirror the upper triangle so the Hermiticity check sees exact symmetry.
    let n = ata.rows();
    let sym = CMatrix::from_fn(n, n, prec, |i, j| {
        if i <= j {
            ata[(i, j)].clone()
        } else {
            ata[(j, i)].conj()
        }
    });
    let eig = hermitian_eig(&sym)?;
    let mut sv: Vec<MpReal> = eig
        .values
        .into_iter()
        .map(|l| if l.is_negative() { MpReal::zero(prec) } else { l.sqrt() })
        .collect();
    sv.reverse();
    Ok(sv)
}

/// Unitarily invariant norms of a matrix.
#[derive(Clone, Debug)]
pub struct Norms {
    pub frobenius: MpReal,
    pub nuclear: MpReal,
    pub spectral: MpReal,
}

pub fn norms(a: &CMatrix) -> Result<Norms> {
    let sv = singular_values(a)?;
    let mut nuclear = MpReal::zero(a.precision());
    for s in &sv {
        nuclear += s;
    }
    let spectral = sv.first().cloned().unwrap_or_else(|| MpReal::zero(a.precision()));
    Ok(Norms { frobenius: a.frobenius(), nuclear, spectral })
}

/// Trace norm `Σ σ_i`.
pub fn nuclear_norm(a: &CMatrix) -> Result<MpReal> {
    Ok(norms(a)?.nuclear)
}

/// Largest |eigenvalue| of a Hermitian matrix (its spectral norm).
pub fn hermitian_spectral_norm(h: &CMatrix) -> Result<MpReal> {
    let eig = hermitian_eig(h)?;
    let lo = eig.values.first().map(MpReal::abs);
    let hi = eig.values.last().map(MpReal::abs);
    Ok(match (lo, hi) {
        (Some(a), Some(b)) => a.max(&b),
        _ => MpReal::zero(h.precision()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::Precision;

    fn p() -> Precision {
        Precision::new(40).unwrap()
    }

    fn sample(n: usize) -> CMatrix {
        let m = CMatrix::from_fn(n, n, p(), |i, j| {
            let x = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4;
            let y = ((i * 5 + j * 2) % 13) as f64 / 13.0 - 0.5;
            MpComplex::from_f64(x, y, p())
        });
        m.add(&m.adjoint()).unwrap()
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = CMatrix::from_f64(2, 2, &[(0., 0.), (0., -1.), (0., 1.), (0., 0.)], p()).unwrap();
        let e = hermitian_eig(&y).unwrap();
        assert!((e.values[0].to_f64() + 1.0).abs() < 1e-30);
        assert!((e.values[1].to_f64() - 1.0).abs() < 1e-30);
        assert!(e.residual(&y).unwrap() < p().tolerance(12));
    }

    #[test]
    fn residual_and_orthonormality() {
        let h = sample(7);
        let e = hermitian_eig(&h).unwrap();
        let scale = h.max_abs();
        assert!(e.residual(&h).unwrap() <= &p().tolerance(12) * &scale);
        let vv = e.vectors.adjoint().matmul(&e.vectors).unwrap();
        assert!(vv.max_abs_diff(&CMatrix::identity(7, p())).unwrap() < p().tolerance(10));
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_f64(2, 2, &[(0., 0.), (1., 0.), (0., 0.), (0., 0.)], p()).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn degenerate_spectrum() {
        let h = CMatrix::identity(4, p()).scale_real(&MpReal::from_f64(2.5, p()));
        let e = hermitian_eig(&h).unwrap();
        assert!(e.values.iter().all(|l| l.to_f64() == 2.5));
    }

    #[test]
    fn nuclear_of_diagonal() {
        let d = [
            MpComplex::from_f64(3.0, 0.0, p()),
            MpComplex::from_f64(0.0, -4.0, p()),
            MpComplex::from_f64(0.5, 0.0, p()),
        ];
        let n = norms(&CMatrix::diagonal(&d, p())).unwrap();
        assert!((n.nuclear.to_f64() - 7.5).abs() < 1e-30);
        assert!((n.spectral.to_f64() - 4.0).abs() < 1e-30);
        assert!((n.frobenius.to_f64() - 25.25f64.sqrt()).abs() < 1e-14);
    }
}
