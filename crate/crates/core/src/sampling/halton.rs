/// First `n` primes.
pub fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Radical inverse of `n` in base `b`: the digits of `n` mirrored about
/// the radix point. Correctly rounded while `b^digits` fits in 53 bits.
pub fn radical_inverse(mut n: u64, b: u64) -> f64 {
    let (mut num, mut den) = (0u64, 1u64);
    let mut exact = true;
    let mut r = 0.0;
    let mut f = 1.0 / b as f64;
    while n > 0 {
        let d = n % b;
        n /= b;
        if exact {
            match den.checked_mul(b).filter(|&x| x <= 1 << 53) {
                Some(next) => {
                    num = num * b + d;
                    den = next;
                }
                None => {
                    exact = false;
                    r = num as f64 / den as f64;
                    f = 1.0 / (den as f64 * b as f64);
                }
            }
        }
        if !exact {
            r += d as f64 * f;
            f /= b as f64;
        }
    }
    if exact {
        num as f64 / den as f64
    } else {
        r
    }
}

/// Halton sequence: coordinate `k` of point `j` is the radical inverse of
/// `j + 1` in the `k`-th prime base.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize) -> Self {
        Halton {
            bases: primes(dim),
            index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.bases.len()
    }

    pub fn next_into(&mut self, out: &mut [f64]) {
        self.index += 1;
        for (o, &b) in out.iter_mut().zip(&self.bases) {
            *o = radical_inverse(self.index, b);
        }
    }
}
