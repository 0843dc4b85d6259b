//! Exhaustive Witt decomposition of small forms over `F_p`, independent of
//! the engine: split off hyperbolic planes found by search until the rest is
//! anisotropic.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnisotropicKernel {
    Zero,
    /// `⟨a⟩`, recorded by whether `a` is a square.
    Line { square: bool },
    /// The anisotropic plane, unique up to isometry over a finite field.
    Plane,
}

fn vectors(p: i64, n: usize) -> impl Iterator<Item = Vec<i64>> {
    let total = (p as u64).pow(n as u32);
    (0..total).map(move |mut k| {
        (0..n)
            .map(|_| {
                let x = (k % p as u64) as i64;
                k /= p as u64;
                x
            })
            .collect()
    })
}

fn pair(p: i64, g: &[Vec<i64>], x: &[i64], y: &[i64]) -> i64 {
    let mut s = 0;
    for (i, row) in g.iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            s = (s + x[i] * gij % p * y[j]) % p;
        }
    }
    s.rem_euclid(p)
}

fn in_span(p: i64, basis: &[Vec<i64>], x: &[i64]) -> bool {
    vectors(p, basis.len()).any(|c| {
        (0..x.len()).all(|t| {
            let v: i64 = basis.iter().zip(&c).map(|(b, ci)| b[t] * ci).sum();
            (v - x[t]).rem_euclid(p) == 0
        })
    })
}

/// The anisotropic kernel of a nondegenerate symmetric Gram matrix.
pub fn anisotropic_kernel(p: i64, gram: &[Vec<i64>]) -> AnisotropicKernel {
    let n = gram.len();
    let isotropic = vectors(p, n).find(|v| v.iter().any(|x| *x != 0) && pair(p, gram, v, v) == 0);
    let Some(v) = isotropic else {
        return match n {
            0 => AnisotropicKernel::Zero,
            1 => {
                let a = gram[0][0].rem_euclid(p);
                AnisotropicKernel::Line { square: (1..p).any(|s| s * s % p == a) }
            }
            2 => AnisotropicKernel::Plane,
            _ => unreachable!("forms of dimension at least 3 over F_p are isotropic"),
        };
    };
    let w = vectors(p, n).find(|w| pair(p, gram, &v, w) == 1).expect("nondegenerate forms pair v with something");
    let mut basis: Vec<Vec<i64>> = vec![];
    for x in vectors(p, n) {
        if pair(p, gram, &v, &x) == 0 && pair(p, gram, &w, &x) == 0 && !in_span(p, &basis, &x) {
            basis.push(x);
        }
    }
    let sub: Vec<Vec<i64>> = basis.iter().map(|a| basis.iter().map(|b| pair(p, gram, a, b)).collect()).collect();
    anisotropic_kernel(p, &sub)
}

pub fn diagonal_kernel(p: i64, entries: &[i64]) -> AnisotropicKernel {
    let n = entries.len();
    let gram: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| if i == j { entries[i].rem_euclid(p) } else { 0 }).collect()).collect();
    anisotropic_kernel(p, &gram)
}
