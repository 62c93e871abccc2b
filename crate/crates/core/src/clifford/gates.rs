use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::ComplexMatrix;

/// The 24 single-qubit Cliffords (mod phase) as H/S words in circuit order:
/// the leftmost letter acts first. Shortest words first, `H` before `S`.
/// Index into this table is the portable encoding used by encoder specs.
pub const SINGLE_QUBIT_CLIFFORD_WORDS: [&str; 24] = [
    "", "H", "S", "HS", "SH", "SS", "HSH", "HSS", "SHS", "SSH", "SSS", "HSHS", "HSSH", "HSSS", "SHSS", "SSHS",
    "HSHSS", "HSSHS", "SHSSH", "SHSSS", "SSHSS", "HSHSSH", "HSHSSS", "HSSHSS",
];

pub const NUM_SINGLE_QUBIT_CLIFFORDS: usize = 24;

pub(crate) type Gate2 = [[C64; 2]; 2];

fn hadamard() -> Gate2 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn phase_s() -> Gate2 {
    [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, 1.0)]]
}

fn mul2(a: &Gate2, b: &Gate2) -> Gate2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn word_gate(word: &str) -> Gate2 {
    let mut m = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    for ch in word.chars() {
        let g = if ch == 'H' { hadamard() } else { phase_s() };
        m = mul2(&g, &m);
    }
    m
}

pub(crate) fn clifford_gates() -> &'static [Gate2; 24] {
    static TABLE: OnceLock<[Gate2; 24]> = OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(|i| word_gate(SINGLE_QUBIT_CLIFFORD_WORDS[i])))
}

pub fn single_qubit_clifford(index: usize) -> Result<ComplexMatrix> {
    let g = clifford_gates()
        .get(index)
        .ok_or_else(|| Error::IndexOutOfRange(format!("single-qubit Clifford index {index} >= 24")))?;
    Ok(ComplexMatrix::from_fn(2, 2, |i, j| g[i][j]))
}

/// `exp(-i (pi/4) X (x) X) = (I - i X (x) X) / sqrt(2)`.
pub fn xx_rotation() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(4, 4, |i, j| {
        if i == j {
            C64::new(s, 0.0)
        } else if i ^ j == 3 {
            C64::new(0.0, -s)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Applies `exp(-i (pi/4) X_a X_b)` to a state vector in place.
pub(crate) fn apply_xx_vec(v: &mut [C64], a: usize, b: usize, n: usize) {
    let mask = (1usize << (n - 1 - a)) | (1usize << (n - 1 - b));
    let s = FRAC_1_SQRT_2;
    let mi = C64::new(0.0, -1.0);
    for x in 0..v.len() {
        let y = x ^ mask;
        if x < y {
            let (vx, vy) = (v[x], v[y]);
            v[x] = (vx + mi * vy) * s;
            v[y] = (vy + mi * vx) * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Pauli, PauliString};

    fn equal_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
        let ov = a.adjoint().matmul(b).trace();
        (ov.norm() - a.rows() as f64).abs() < 1e-9
    }

    #[test]
    fn identity_and_hadamard() {
        assert!(single_qubit_clifford(0).unwrap().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        let h = single_qubit_clifford(1).unwrap();
        let conj = h.matmul(&Pauli::X.matrix()).matmul(&h.adjoint());
        assert!(conj.max_abs_diff(&Pauli::Z.matrix()) < 1e-15);
        assert!(single_qubit_clifford(24).is_err());
    }

    #[test]
    fn twenty_four_distinct_and_closed() {
        let all: Vec<_> = (0..24).map(|i| single_qubit_clifford(i).unwrap()).collect();
        for i in 0..24 {
            for j in 0..i {
                assert!(!equal_up_to_phase(&all[i], &all[j]), "{i} == {j}");
            }
        }
        for a in &all {
            for b in &all {
                let prod = a.matmul(b);
                assert!(all.iter().any(|c| equal_up_to_phase(&prod, c)));
            }
        }
    }

    #[test]
    fn words_are_shortlex_first_occurrences() {
        // Re-derive the ordering by breadth-first enumeration of H/S words.
        let mut found: Vec<ComplexMatrix> = Vec::new();
        let mut words: Vec<String> = Vec::new();
        let mut len = 0u32;
        while words.len() < 24 {
            for code in 0..(1usize << len) {
                let w: String = (0..len).map(|b| if (code >> (len - 1 - b)) & 1 == 0 { 'H' } else { 'S' }).collect();
                let g = word_gate(&w);
                let m = ComplexMatrix::from_fn(2, 2, |i, j| g[i][j]);
                if !found.iter().any(|f| equal_up_to_phase(f, &m)) {
                    found.push(m);
                    words.push(w);
                }
            }
            len += 1;
        }
        assert_eq!(words, SINGLE_QUBIT_CLIFFORD_WORDS.map(String::from).to_vec());
    }

    #[test]
    fn xx_rotation_is_clifford_with_stated_images() {
        let u = xx_rotation();
        assert!(u.unitarity_defect() < 1e-14);
        let image = |p: &str| {
            let m = p.parse::<PauliString>().unwrap().matrix();
            u.matmul(&m).matmul(&u.adjoint())
        };
        let yx = "YX".parse::<PauliString>().unwrap().matrix();
        let xy = "XY".parse::<PauliString>().unwrap().matrix();
        let xi = "XI".parse::<PauliString>().unwrap().matrix();
        // Z anticommutes with XX, so U Z U^dag = i Z XX = -Y X.
        assert!(image("ZI").max_abs_diff(&yx.scale_real(-1.0)) < 1e-14);
        assert!(image("IZ").max_abs_diff(&xy.scale_real(-1.0)) < 1e-14);
        assert!(image("XI").max_abs_diff(&xi) < 1e-14);
        for j in 1..16 {
            let p = PauliString::from_index(j, 2).unwrap().matrix();
            let c = u.matmul(&p).matmul(&u.adjoint());
            let hits = (0..16)
                .filter(|&k| {
                    let q = PauliString::from_index(k, 2).unwrap().matrix();
                    (q.matmul(&c).trace().re.abs() - 4.0).abs() < 1e-12
                })
                .count();
            assert_eq!(hits, 1, "XX(pi/4) P XX(pi/4)^dag not a signed Pauli for index {j}");
        }
        // U^2 = exp(-i pi/2 XX) = -i XX
        let xx = "XX".parse::<PauliString>().unwrap().matrix().scale(C64::new(0.0, -1.0));
        assert!(u.matmul(&u).max_abs_diff(&xx) < 1e-14);
    }

    #[test]
    fn vector_xx_matches_matrix() {
        let v: Vec<C64> = (0..8).map(|i| C64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.2)).collect();
        let mut w = v.clone();
        apply_xx_vec(&mut w, 0, 2, 3);
        let u = xx_rotation();
        // qubits 0 and 2 of 3: permute to (0, 2, 1) layout via explicit embedding
        let full = ComplexMatrix::from_fn(8, 8, |r, c| {
            let (r0, r1, r2) = ((r >> 2) & 1, (r >> 1) & 1, r & 1);
            let (c0, c1, c2) = ((c >> 2) & 1, (c >> 1) & 1, c & 1);
            if r1 != c1 {
                return C64::new(0.0, 0.0);
            }
            u[(r0 * 2 + r2, c0 * 2 + c2)]
        });
        let expect = full.mul_vec(&v);
        for (a, b) in w.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
