//! Dense polynomials over the prime field F_p, coefficients lowest degree first.

fn mulmod_u(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_u(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod_u(r, b, p);
        }
        b = mulmod_u(b, b, p);
        e >>= 1;
    }
    r
}

pub(crate) fn inv_u(a: u64, p: u64) -> u64 {
    pow_u(a, p - 2, p)
}

pub(crate) fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod_u(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Remainder of `a` modulo the nonzero polynomial `m`.
pub(crate) fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let m = trim(m.to_vec());
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_u(m[dm], p);
    while r.len() > dm && !r.is_empty() {
        let shift = r.len() - 1 - dm;
        let c = mulmod_u(*r.last().unwrap(), lead_inv, p);
        for (i, &mi) in m.iter().enumerate() {
            let t = mulmod_u(c, mi, p);
            r[shift + i] = (r[shift + i] + p - t) % p;
        }
        r = trim(r);
    }
    r
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn powmod_x(e_pow_p: u32, m: &[u64], p: u64) -> Vec<u64> {
    // X^(p^e) mod m by repeated p-th powering.
    let mut r = rem(&[0, 1], m, p);
    for _ in 0..e_pow_p {
        let mut acc = vec![1u64];
        let mut base = r.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &base, p), m, p);
            }
            base = rem(&mul(&base, &base, p), m, p);
            e >>= 1;
        }
        r = acc;
    }
    r
}

/// Ben-Or irreducibility test for a polynomial of degree ≥ 1 over F_p.
pub(crate) fn is_irreducible(m: &[u64], p: u64) -> bool {
    let m = trim(m.to_vec());
    if m.len() < 2 {
        return false;
    }
    let d = m.len() - 1;
    for i in 1..=(d / 2) {
        let xp = powmod_x(i as u32, &m, p);
        let h = sub(&xp, &[0, 1], p);
        let g = gcd(&m, &h, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility_small_cases() {
        assert!(is_irreducible(&[1, 0, 1], 3)); // x^2 + 1 over F_3
        assert!(!is_irreducible(&[1, 0, 1], 5)); // 2^2 = -1 in F_5
        assert!(is_irreducible(&[2, 0, 1], 5)); // x^2 + 2 over F_5
        assert!(is_irreducible(&[1, 1, 0, 1], 2)); // x^3 + x + 1
        assert!(!is_irreducible(&[0, 0, 1], 7));
    }

    #[test]
    fn brute_force_agreement_degree_two() {
        for p in [3u64, 5, 7] {
            for a in 0..p {
                for b in 0..p {
                    let has_root = (0..p).any(|x| (x * x + b * x + a) % p == 0);
                    assert_eq!(is_irreducible(&[a, b, 1], p), !has_root, "p={p} a={a} b={b}");
                }
            }
        }
    }
}
