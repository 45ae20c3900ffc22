//! Whole-unitary resynthesis for registers of up to three qubits.
//!
//! Three qubits: a cosine-sine split on the top qubit, then each block
//! diagonal factor is demultiplexed into two-qubit unitaries around a
//! multiplexed `RZ`. Two qubits: the canonical (KAK) form, whose nonlocal
//! part is a fixed three-CX circuit. One qubit: the ZSX form.

use crate::circuit::{Gate, GateKind};
use crate::error::TranspileError;
use crate::linalg::{cis, determinant, mat2_mul, qr, svd, unitary_eigen, ComplexMatrix, Mat2, C64, I, ONE, ZERO};

use super::native::{cx, ry, zsx, ANGLE_TOL};

/// Columns are the magic basis; local unitaries become real orthogonal in it
/// and `XX`, `YY`, `ZZ` become diagonal.
fn magic() -> ComplexMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (o, i, z) = (C64::new(r, 0.0), C64::new(0.0, r), ZERO);
    ComplexMatrix::from_rows(&[
        vec![o, z, z, i],
        vec![z, i, o, z],
        vec![z, i, -o, z],
        vec![o, z, z, -i],
    ])
}

/// Real orthogonal `P` (det 1) with `Pᵀ·m·P` diagonal, for symmetric unitary `m`.
fn real_diagonalizer(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    for c in [0.0, 0.618_033_9, -1.371_9, 2.541_3, -0.291_7] {
        let h = nalgebra::DMatrix::from_fn(4, 4, |r, k| {
            let x = m[(r, k)] + m[(k, r)];
            0.5 * (x.re + c * x.im)
        });
        let eig = nalgebra::SymmetricEigen::new(h);
        let mut p = ComplexMatrix::from_fn(4, 4, |r, k| C64::new(eig.eigenvectors[(r, k)], 0.0));
        if determinant(&p).re < 0.0 {
            for r in 0..4 {
                p[(r, 0)] = -p[(r, 0)];
            }
        }
        let d = p.transpose().matmul(m).matmul(&p);
        let off: f64 = (0..4)
            .flat_map(|r| (0..4).map(move |k| (r, k)))
            .filter(|(r, k)| r != k)
            .map(|(r, k)| d[(r, k)].norm())
            .sum();
        if off < 1e-11 {
            return Some(p);
        }
    }
    None
}

/// Splits `m ≈ a ⊗ b` into its factors.
fn kron_factors(m: &ComplexMatrix) -> (Mat2, Mat2) {
    let block = |i: usize, j: usize| -> Mat2 {
        [[m[(2 * i, 2 * j)], m[(2 * i, 2 * j + 1)]], [m[(2 * i + 1, 2 * j)], m[(2 * i + 1, 2 * j + 1)]]]
    };
    let norm = |b: &Mat2| b.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>();
    let (bi, bj) = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .max_by(|x, y| norm(&block(x.0, x.1)).total_cmp(&norm(&block(y.0, y.1))))
        .unwrap();
    let mut b = block(bi, bj);
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let sd = det.sqrt();
    for x in b.iter_mut().flatten() {
        *x /= sd;
    }
    let mut a = [[ZERO; 2]; 2];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let blk = block(i, j);
            let mut t = ZERO;
            for r in 0..2 {
                for c in 0..2 {
                    t += b[r][c].conj() * blk[r][c];
                }
            }
            *v = t / 2.0;
        }
    }
    (a, b)
}

/// Canonical decomposition `u ∝ (a1⊗b1)·exp(i(x·XX + y·YY + z·ZZ))·(a2⊗b2)`.
pub struct Kak {
    pub before: (Mat2, Mat2),
    pub coeffs: [f64; 3],
    pub after: (Mat2, Mat2),
}

pub fn kak(u: &ComplexMatrix) -> Result<Kak, TranspileError> {
    let b = magic();
    let su = u.scale(determinant(u).powf(-0.25));
    let up = b.dagger().matmul(&su).matmul(&b);
    let m = up.transpose().matmul(&up);
    let p = real_diagonalizer(&m).ok_or(TranspileError::Resynthesis(f64::NAN))?;
    let d = p.transpose().matmul(&m).matmul(&p).diagonal();
    let mut half: Vec<C64> = d.iter().map(|x| cis(x.arg() / 2.0)).collect();
    let inv = |h: &[C64]| ComplexMatrix::from_diagonal(&h.iter().map(|x| x.conj()).collect::<Vec<_>>());
    let mut k1 = up.matmul(&p).matmul(&inv(&half));
    if determinant(&k1).re < 0.0 {
        half[0] = -half[0];
        k1 = up.matmul(&p).matmul(&inv(&half));
    }
    let left = b.matmul(&k1).matmul(&b.dagger());
    let right = b.matmul(&p.transpose()).matmul(&b.dagger());

    // arg(half_k) = g + x·sx_k + y·sy_k + z·sz_k with (sx, sy, sz) the
    // eigenvalue signs of XX, YY, ZZ on magic vector k.
    let paulis = [
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
        ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]),
        ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]]),
    ];
    let signs: Vec<Vec<f64>> = paulis
        .iter()
        .map(|q| b.dagger().matmul(&q.kron(q)).matmul(&b).diagonal().iter().map(|x| x.re.signum()).collect())
        .collect();
    let phi: Vec<f64> = half.iter().map(|h| h.arg()).collect();
    let coeffs = [0, 1, 2].map(|a| (0..4).map(|k| signs[a][k] * phi[k]).sum::<f64>() / 4.0);
    Ok(Kak { before: kron_factors(&right), coeffs, after: kron_factors(&left) })
}

/// Native gates for a 4×4 unitary on `(hi, lo)`, `hi` the more significant,
/// always with three ECRs.
pub fn two_qubit(u: &ComplexMatrix, hi: usize, lo: usize) -> Result<Vec<Gate>, TranspileError> {
    use std::f64::consts::FRAC_PI_2;
    let k = kak(u)?;
    let [x, y, z] = k.coeffs;
    let rzm = |t: f64| GateKind::RZ(t).matrix().unwrap().to_mat2();
    let mut out = Vec::new();
    out.extend(zsx(&k.before.0, hi));
    out.extend(zsx(&mat2_mul(&rzm(FRAC_PI_2), &k.before.1), lo));
    out.extend(cx(lo, hi));
    out.extend(zsx(&rzm(FRAC_PI_2 - 2.0 * z), hi));
    out.extend(zsx(&ry(FRAC_PI_2 - 2.0 * x), lo));
    out.extend(cx(hi, lo));
    out.extend(zsx(&ry(2.0 * y - FRAC_PI_2), lo));
    out.extend(cx(lo, hi));
    out.extend(zsx(&mat2_mul(&k.after.0, &rzm(-FRAC_PI_2)), hi));
    out.extend(zsx(&k.after.1, lo));
    Ok(out)
}

/// Cosine-sine split of a `2h × 2h` unitary:
/// `u = (l0 ⊕ l1)·[[C, −S], [S, C]]·(r0 ⊕ r1)` with `C = diag(cos θ)`,
/// `S = diag(sin θ)`.
pub struct CosineSine {
    pub l0: ComplexMatrix,
    pub l1: ComplexMatrix,
    pub theta: Vec<f64>,
    pub r0: ComplexMatrix,
    pub r1: ComplexMatrix,
}

pub fn cosine_sine(u: &ComplexMatrix) -> Result<CosineSine, TranspileError> {
    let h = u.rows() / 2;
    let u00 = u.block(0, 0, h, h);
    let u10 = u.block(h, 0, h, h);
    let u01 = u.block(0, h, h, h);
    let u11 = u.block(h, h, h, h);
    let (l0, c, r0) = svd(&u00).ok_or(TranspileError::Resynthesis(f64::NAN))?;
    // Largest sines first so that QR of u10·r0† stays diagonal.
    let mut order: Vec<usize> = (0..h).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]));
    let l0 = ComplexMatrix::from_fn(h, h, |r, j| l0[(r, order[j])]);
    let r0 = ComplexMatrix::from_fn(h, h, |j, col| r0[(order[j], col)]);
    let c: Vec<f64> = order.iter().map(|&j| c[j].min(1.0)).collect();

    let m = u10.matmul(&r0.dagger());
    let (q, rt) = qr(&m);
    let phases: Vec<C64> = (0..h)
        .map(|j| {
            let d = rt[(j, j)];
            if d.norm() > 1e-300 { d / d.norm() } else { ONE }
        })
        .collect();
    let l1 = ComplexMatrix::from_fn(h, h, |r, j| q[(r, j)] * phases[j]);
    let s: Vec<f64> = (0..h).map(|j| rt[(j, j)].norm()).collect();
    let theta: Vec<f64> = (0..h).map(|j| s[j].atan2(c[j])).collect();
    let (cs, sn): (Vec<f64>, Vec<f64>) = theta.iter().map(|t| (t.cos(), t.sin())).unzip();

    let a = l0.dagger().matmul(&u01);
    let b = l1.dagger().matmul(&u11);
    let r1 = ComplexMatrix::from_fn(h, h, |j, col| a[(j, col)] * (-sn[j]) + b[(j, col)] * cs[j]);
    Ok(CosineSine { l0, l1, theta, r0, r1 })
}

/// `a0 ⊕ a1 = (I⊗v)·(D ⊕ D†)·(I⊗w)` with `D = diag(d)` unimodular.
pub fn demultiplex(
    a0: &ComplexMatrix,
    a1: &ComplexMatrix,
) -> Result<(ComplexMatrix, Vec<C64>, ComplexMatrix), TranspileError> {
    let (v, lam) = unitary_eigen(&a0.matmul(&a1.dagger())).ok_or(TranspileError::Resynthesis(f64::NAN))?;
    let d: Vec<C64> = lam.iter().map(|l| cis(l.arg() / 2.0)).collect();
    let w = ComplexMatrix::from_diagonal(&d).matmul(&v.dagger()).matmul(a1);
    Ok((v, d, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Y,
    Z,
}

/// Rotation on `target` by `angles[x]`, `x` the value of `controls` read with
/// `controls[j]` as bit `j`. Gray-code CX ladder with `2^k` CX.
pub fn multiplexed_rotation(axis: Axis, angles: &[f64], target: usize, controls: &[usize]) -> Vec<Gate> {
    let k = controls.len();
    let n = 1usize << k;
    assert_eq!(angles.len(), n);
    let rot = |t: f64, out: &mut Vec<Gate>| match axis {
        Axis::Z => {
            if crate::linalg::wrap_angle(t).abs() >= ANGLE_TOL {
                out.push(Gate::one(GateKind::RZ(crate::linalg::wrap_angle(t)), target));
            }
        }
        Axis::Y => out.extend(zsx(&ry(t), target)),
    };
    let mut out = Vec::new();
    let gray = |i: usize| i ^ (i >> 1);
    for i in 0..n {
        let g = gray(i);
        let t: f64 = (0..n)
            .map(|x| if (x & g).count_ones() % 2 == 0 { angles[x] } else { -angles[x] })
            .sum::<f64>()
            / n as f64;
        rot(t, &mut out);
        let bit = (g ^ gray((i + 1) % n)).trailing_zeros() as usize;
        out.extend(cx(controls[bit], target));
    }
    out
}

/// Native gates for an 8×8 unitary on qubits `(2, 1, 0)`. Execution order:
/// `w_b`, mux-RZ, `v_b`, mux-RY, `w_a`, mux-RZ, `v_a`.
fn three_qubit(u: &ComplexMatrix) -> Result<Vec<Gate>, TranspileError> {
    let cs = cosine_sine(u)?;
    let (va, da, wa) = demultiplex(&cs.l0, &cs.l1)?;
    let (vb, db, wb) = demultiplex(&cs.r0, &cs.r1)?;
    let rz_angles = |d: &[C64]| d.iter().map(|x| -2.0 * x.arg()).collect::<Vec<f64>>();
    let ry_angles: Vec<f64> = cs.theta.iter().map(|t| 2.0 * t).collect();
    let mut out = two_qubit(&wb, 1, 0)?;
    out.extend(multiplexed_rotation(Axis::Z, &rz_angles(&db), 2, &[0, 1]));
    out.extend(two_qubit(&vb, 1, 0)?);
    out.extend(multiplexed_rotation(Axis::Y, &ry_angles, 2, &[0, 1]));
    out.extend(two_qubit(&wa, 1, 0)?);
    out.extend(multiplexed_rotation(Axis::Z, &rz_angles(&da), 2, &[0, 1]));
    out.extend(two_qubit(&va, 1, 0)?);
    Ok(out)
}

/// Native gate list equal to `u` up to global phase, `u` of size `2^n`,
/// `n ≤ 3`.
pub fn resynthesize(u: &ComplexMatrix) -> Result<Vec<Gate>, TranspileError> {
    match u.rows() {
        1 => Ok(Vec::new()),
        2 => Ok(zsx(&u.to_mat2(), 0)),
        4 => two_qubit(u, 1, 0),
        8 => three_qubit(u),
        n => Err(TranspileError::NotNative(format!("resynthesis of dimension {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{lower_to_unitary, Circuit};
    use crate::linalg::phase_aligned_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        qr(&g).0
    }

    fn lowered(width: usize, gates: Vec<Gate>) -> ComplexMatrix {
        lower_to_unitary(&Circuit::new(width, "r").with_gates(gates)).unwrap()
    }

    fn gate(kind: GateKind, qs: &[usize]) -> Gate {
        Gate::new(kind, qs.to_vec()).unwrap()
    }

    #[test]
    fn cosine_sine_reassembles() {
        let perm = ComplexMatrix::from_fn(8, 8, |r, c| if (r + 3) % 8 == c { ONE } else { ZERO });
        for u in [random_unitary(8, 1), ComplexMatrix::identity(8), perm, random_unitary(4, 2)] {
            let h = u.rows() / 2;
            let cs = cosine_sine(&u).unwrap();
            let c = ComplexMatrix::from_diagonal(&cs.theta.iter().map(|t| C64::new(t.cos(), 0.0)).collect::<Vec<_>>());
            let s = ComplexMatrix::from_diagonal(&cs.theta.iter().map(|t| C64::new(t.sin(), 0.0)).collect::<Vec<_>>());
            let mid = ComplexMatrix::from_fn(2 * h, 2 * h, |r, col| match (r < h, col < h) {
                (true, true) => c[(r, col)],
                (true, false) => -s[(r, col - h)],
                (false, true) => s[(r - h, col)],
                (false, false) => c[(r - h, col - h)],
            });
            let rebuilt = cs.l0.direct_sum(&cs.l1).matmul(&mid).matmul(&cs.r0.direct_sum(&cs.r1));
            assert!(rebuilt.frobenius_distance(&u) < 1e-12);
            assert!(cs.l1.is_unitary(1e-12) && cs.r1.is_unitary(1e-12));
        }
    }

    #[test]
    fn demultiplex_reassembles() {
        let (a0, a1) = (random_unitary(4, 3), random_unitary(4, 4));
        let (v, d, w) = demultiplex(&a0, &a1).unwrap();
        let dd = ComplexMatrix::from_diagonal(&d);
        assert!(v.matmul(&dd).matmul(&w).frobenius_distance(&a0) < 1e-12);
        assert!(v.matmul(&dd.dagger()).matmul(&w).frobenius_distance(&a1) < 1e-12);
    }

    #[test]
    fn multiplexed_rotations_match_block_diagonal() {
        let angles = [0.3, -1.2, 2.5, 0.9];
        for axis in [Axis::Y, Axis::Z] {
            let u = lowered(3, multiplexed_rotation(axis, &angles, 2, &[0, 1]));
            let mut want = ComplexMatrix::zeros(8, 8);
            for (x, a) in angles.iter().enumerate() {
                let m = match axis {
                    Axis::Y => ry(*a),
                    Axis::Z => GateKind::RZ(*a).matrix().unwrap().to_mat2(),
                };
                for r in 0..2 {
                    for c in 0..2 {
                        want[(4 * r + x, 4 * c + x)] = m[r][c];
                    }
                }
            }
            assert!(phase_aligned_distance(&u, &want) < 1e-12, "{axis:?}");
        }
    }

    #[test]
    fn kak_reassembles() {
        let swap = ComplexMatrix::from_fn(4, 4, |r, c| if [0, 2, 1, 3][r] == c { ONE } else { ZERO });
        let cp = GateKind::ControlledPhase(1.0).matrix().unwrap();
        let local = lowered(2, vec![gate(GateKind::H, &[0]), gate(GateKind::U3 { theta: 0.3, phi: 1.0, lambda: 2.0 }, &[1])]);
        let xx = |t: f64| {
            let x = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]);
            let xx = x.kron(&x);
            ComplexMatrix::identity(4).scale(C64::new(t.cos(), 0.0)).add(&xx.scale(C64::new(0.0, t.sin())))
        };
        let cases = [
            random_unitary(4, 6),
            random_unitary(4, 9),
            ComplexMatrix::identity(4),
            swap,
            cp,
            local,
            crate::circuit::ecr_matrix(),
            xx(1e-9),
        ];
        for u in cases {
            let k = kak(&u).unwrap();
            let l = ComplexMatrix::from_mat2(&k.after.0).kron(&ComplexMatrix::from_mat2(&k.after.1));
            let r = ComplexMatrix::from_mat2(&k.before.0).kron(&ComplexMatrix::from_mat2(&k.before.1));
            let [x, y, z] = k.coeffs;
            let paulis = |m: [[C64; 2]; 2]| ComplexMatrix::from_mat2(&m);
            let px = paulis([[ZERO, ONE], [ONE, ZERO]]);
            let py = paulis([[ZERO, -I], [I, ZERO]]);
            let pz = paulis([[ONE, ZERO], [ZERO, -ONE]]);
            // The three terms commute, so the exponential factors.
            let e = |p: &ComplexMatrix, t: f64| {
                ComplexMatrix::identity(4).scale(C64::new(t.cos(), 0.0)).add(&p.kron(p).scale(C64::new(0.0, t.sin())))
            };
            let n = e(&px, x).matmul(&e(&py, y)).matmul(&e(&pz, z));
            assert!(phase_aligned_distance(&l.matmul(&n).matmul(&r), &u) < 1e-10);
            let gates = two_qubit(&u, 1, 0).unwrap();
            assert_eq!(gates.iter().filter(|g| g.kind() == &GateKind::ECR).count(), 3);
            assert!(gates.iter().all(|g| g.kind().is_native()));
            assert!(phase_aligned_distance(&lowered(2, gates), &u) < 1e-10);
        }
    }

    #[test]
    fn three_qubit_random() {
        for seed in [7, 8] {
            let u = random_unitary(8, seed);
            let gates = resynthesize(&u).unwrap();
            assert!(phase_aligned_distance(&lowered(3, gates), &u) < 1e-9);
        }
    }
}
