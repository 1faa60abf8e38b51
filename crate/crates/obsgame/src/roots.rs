//! Integer root extraction for monic integer polynomials.
//!
//! Rational eigenvalue search reduces to this: scale the matrix by the
//! lcm of its entry denominators, take the (monic, integer) characteristic
//! polynomial, and find its integer roots. Roots are located modulo a
//! prime on the square-free part, Hensel-lifted past the Cauchy bound,
//! and verified exactly, so arbitrarily large roots are found without
//! factoring the constant term.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// All integer roots of a monic integer polynomial (constant term first),
/// with multiplicities. The returned multiplicities sum to the number of
/// linear factors over ℤ; callers compare against the degree to detect a
/// non-rational remainder.
pub(crate) fn integer_roots(poly: &[BigInt]) -> Vec<(BigInt, usize)> {
    let mut p = trim(poly.to_vec());
    assert!(
        p.last().map(|c| c.is_one()).unwrap_or(false),
        "polynomial must be monic"
    );
    let mut found: Vec<(BigInt, usize)> = Vec::new();

    // zero roots come off as a power of x
    let zeros = p.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 && zeros < p.len() {
        p.drain(..zeros);
        found.push((BigInt::zero(), zeros));
    }
    if p.len() <= 1 {
        return found;
    }

    let sf = squarefree_part(&p);
    let bound = cauchy_bound(&p);
    for r in squarefree_integer_roots(&sf, &bound) {
        let mut mult = 0usize;
        while let Some(q) = divide_linear(&p, &r) {
            mult += 1;
            p = q;
        }
        if mult > 0 {
            found.push((r, mult));
        }
    }
    found
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

/// Exact division by (x - r); `None` when r is not a root.
fn divide_linear(p: &[BigInt], r: &BigInt) -> Option<Vec<BigInt>> {
    let n = p.len() - 1;
    if n == 0 {
        return None;
    }
    let mut out = vec![BigInt::zero(); n];
    let mut acc = BigInt::zero();
    for i in (1..=n).rev() {
        acc = &p[i] + &acc * r;
        out[i - 1] = acc.clone();
    }
    let rem = &p[0] + &acc * r;
    rem.is_zero().then_some(out)
}

fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    (1..p.len()).map(|i| &p[i] * BigInt::from(i)).collect()
}

/// Primitive integer square-free part p / gcd(p, p'), monic up to sign.
fn squarefree_part(p: &[BigInt]) -> Vec<BigInt> {
    let g = poly_gcd(p.to_vec(), derivative(p));
    let q = poly_div_exact(p, &g);
    primitive(q)
}

fn primitive(mut p: Vec<BigInt>) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for c in &p {
        g = g.gcd(c);
    }
    if g > BigInt::one() {
        for c in &mut p {
            *c = &*c / &g;
        }
    }
    if p.last().map(|c| c.is_negative()).unwrap_or(false) {
        for c in &mut p {
            *c = -&*c;
        }
    }
    p
}

/// Polynomial gcd by the monic Euclidean algorithm over ℚ, returned as a
/// primitive integer polynomial.
fn poly_gcd(a: Vec<BigInt>, b: Vec<BigInt>) -> Vec<BigInt> {
    type Q = num_rational::BigRational;
    fn to_q(p: &[BigInt]) -> Vec<Q> {
        p.iter().map(|c| Q::from_integer(c.clone())).collect()
    }
    fn trim_q(mut p: Vec<Q>) -> Vec<Q> {
        while p.len() > 1 && p.last().unwrap().is_zero() {
            p.pop();
        }
        p
    }
    fn rem_q(a: &[Q], b: &[Q]) -> Vec<Q> {
        let db = b.len() - 1;
        if db == 0 {
            return vec![Q::zero()];
        }
        let mut r = a.to_vec();
        let lb = b.last().unwrap().clone();
        while r.len() > db {
            let dr = r.len() - 1;
            let coef = r.last().unwrap() / &lb;
            for i in 0..=db {
                let v = &r[dr - db + i] - &(&coef * &b[i]);
                r[dr - db + i] = v;
            }
            r = trim_q(r);
            if r.len() == 1 && r[0].is_zero() {
                break;
            }
        }
        r
    }
    let mut x = trim_q(to_q(&trim(a)));
    let mut y = trim_q(to_q(&trim(b)));
    while !(y.len() == 1 && y[0].is_zero()) {
        let r = rem_q(&x, &y);
        x = y;
        y = r;
    }
    // scale the rational gcd to a primitive integer polynomial
    let mut den = BigInt::one();
    for c in &x {
        den = den.lcm(c.denom());
    }
    primitive(
        x.iter()
            .map(|c| (c * Q::from_integer(den.clone())).to_integer())
            .collect(),
    )
}

/// Exact polynomial division (remainder known to be zero).
fn poly_div_exact(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r: Vec<num_rational::BigRational> = a
        .iter()
        .map(|c| num_rational::BigRational::from_integer(c.clone()))
        .collect();
    let bq: Vec<num_rational::BigRational> = b
        .iter()
        .map(|c| num_rational::BigRational::from_integer(c.clone()))
        .collect();
    let db = b.len() - 1;
    let n = a.len() - 1;
    let mut q = vec![num_rational::BigRational::zero(); n - db + 1];
    for i in (0..=n - db).rev() {
        let coef = &r[i + db] / &bq[db];
        q[i] = coef.clone();
        for j in 0..=db {
            let v = &r[i + j] - &(&coef * &bq[j]);
            r[i + j] = v;
        }
    }
    q.into_iter()
        .map(|c| {
            debug_assert!(c.is_integer());
            c.to_integer()
        })
        .collect()
}

/// 1 + max |c_i| bounds the absolute value of every root of a monic p.
fn cauchy_bound(p: &[BigInt]) -> BigInt {
    let mut b = BigInt::zero();
    for c in &p[..p.len() - 1] {
        let a = c.abs();
        if a > b {
            b = a;
        }
    }
    b + BigInt::one()
}

// Small enough that the residue scan is cheap, retried on the rare prime
// that merges roots or divides the leading structure.
const PRIMES: &[u64] = &[65537, 65539, 65543, 65551, 65557, 65563, 65579, 65581, 65587];

/// Integer roots of a square-free integer polynomial: root scan mod p,
/// Hensel lifting past the root bound, exact verification.
fn squarefree_integer_roots(sf: &[BigInt], bound: &BigInt) -> Vec<BigInt> {
    let deg = sf.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        // c0 + c1 x: rational root -c0/c1, integer when divisible
        let (c0, c1) = (&sf[0], &sf[1]);
        if (c0 % c1).is_zero() {
            return vec![-(c0 / c1)];
        }
        return Vec::new();
    }
    'prime: for &p in PRIMES {
        let pp = BigInt::from(p);
        let lead = sf.last().unwrap().mod_floor(&pp);
        if lead.is_zero() {
            continue;
        }
        let sp: Vec<u64> = sf
            .iter()
            .map(|c| c.mod_floor(&pp).to_u64().unwrap())
            .collect();
        let dp: Vec<u64> = {
            let d = derivative(sf);
            d.iter()
                .map(|c| c.mod_floor(&pp).to_u64().unwrap())
                .collect()
        };
        let mut residues = Vec::new();
        for r in 0..p {
            if eval_mod(&sp, r, p) == 0 {
                if eval_mod(&dp, r, p) == 0 {
                    continue 'prime; // p merges roots; pick another prime
                }
                residues.push(r);
                if residues.len() > deg {
                    continue 'prime;
                }
            }
        }
        let mut out = Vec::new();
        for r0 in residues {
            if let Some(r) = hensel_lift(sf, r0, p, bound) {
                out.push(r);
            }
        }
        out.sort();
        out.dedup();
        return out;
    }
    // every probe prime was unlucky; extremely unlikely for square-free input
    Vec::new()
}

fn eval_mod(p: &[u64], x: u64, m: u64) -> u64 {
    let mut acc: u128 = 0;
    for c in p.iter().rev() {
        acc = (acc * x as u128 + *c as u128) % m as u128;
    }
    acc as u64
}

fn eval_big_mod(p: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in p.iter().rev() {
        acc = (acc * x + c).mod_floor(m);
    }
    acc
}

/// Newton lifting of a simple root mod p to mod p^(2^k) > 2*bound,
/// then centered lift and exact check.
fn hensel_lift(sf: &[BigInt], r0: u64, p: u64, bound: &BigInt) -> Option<BigInt> {
    let target = BigInt::from(2) * bound + BigInt::one();
    let d = derivative(sf);
    let mut modulus = BigInt::from(p);
    let mut r = BigInt::from(r0);
    while modulus < target {
        modulus = &modulus * &modulus;
        let fr = eval_big_mod(sf, &r, &modulus);
        let dfr = eval_big_mod(&d, &r, &modulus);
        let inv = mod_inverse(&dfr, &modulus)?;
        r = (&r - fr * inv).mod_floor(&modulus);
    }
    let half = &modulus / BigInt::from(2);
    if r > half {
        r -= &modulus;
    }
    let mut acc = BigInt::zero();
    for c in sf.iter().rev() {
        acc = acc * &r + c;
    }
    acc.is_zero().then_some(r)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}
