//! Lenstra's elliptic curve method on Montgomery curves, used once rho has
//! spent its share of the budget. Every modular multiplication is one unit of
//! work. Curves come from Suyama's parametrization with σ = 6, 7, 8, ..., so a
//! given input and allowance always take the same path.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::factor::WorkMeter;

/// (B1, curve count) per level, smallest factors first.
const LEVELS: &[(u64, u32)] = &[(2_000, 25), (11_000, 90), (50_000, 300), (250_000, 700)];
const B2_RATIO: u64 = 50;
const WHEEL: u64 = 210;
/// Work is settled with the meter in chunks of this many multiplications.
const SETTLE: u64 = 4096;

enum Halt {
    Found(BigUint),
    OutOfWork,
}

struct Ring<'a> {
    n: &'a BigUint,
    meter: &'a mut WorkMeter,
    pending: u64,
}

impl Ring<'_> {
    fn mul(&mut self, a: &BigUint, b: &BigUint) -> Result<BigUint, Halt> {
        self.pending += 1;
        if self.pending >= SETTLE {
            self.settle()?;
        }
        Ok((a * b) % self.n)
    }

    fn settle(&mut self) -> Result<(), Halt> {
        let ok = self.meter.charge(self.pending);
        self.pending = 0;
        if ok {
            Ok(())
        } else {
            Err(Halt::OutOfWork)
        }
    }

    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if &s >= self.n {
            s - self.n
        } else {
            s
        }
    }

    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            self.n - (b - a)
        }
    }

    /// A proper factor of n sharing a factor with `v`, if any.
    fn proper_gcd(&self, v: &BigUint) -> Option<BigUint> {
        let g = v.gcd(self.n);
        (!g.is_one() && &g != self.n).then_some(g)
    }
}

#[derive(Clone)]
struct Point {
    x: BigUint,
    z: BigUint,
}

struct Curve {
    a24: BigUint,
}

impl Curve {
    fn double(&self, r: &mut Ring, p: &Point) -> Result<Point, Halt> {
        let s = r.add(&p.x, &p.z);
        let d = r.sub(&p.x, &p.z);
        let t1 = r.mul(&s, &s)?;
        let t2 = r.mul(&d, &d)?;
        let t3 = r.sub(&t1, &t2);
        let x = r.mul(&t1, &t2)?;
        let inner = r.mul(&self.a24, &t3)?;
        let t4 = r.add(&t2, &inner);
        let z = r.mul(&t3, &t4)?;
        Ok(Point { x, z })
    }

    /// p + q given p − q.
    fn add(r: &mut Ring, p: &Point, q: &Point, diff: &Point) -> Result<Point, Halt> {
        let (pd, ps) = (r.sub(&p.x, &p.z), r.add(&p.x, &p.z));
        let (qs, qd) = (r.add(&q.x, &q.z), r.sub(&q.x, &q.z));
        let u = r.mul(&pd, &qs)?;
        let v = r.mul(&ps, &qd)?;
        let sum = r.add(&u, &v);
        let dif = r.sub(&u, &v);
        let sum2 = r.mul(&sum, &sum)?;
        let dif2 = r.mul(&dif, &dif)?;
        let x = r.mul(&diff.z, &sum2)?;
        let z = r.mul(&diff.x, &dif2)?;
        Ok(Point { x, z })
    }

    fn ladder(&self, r: &mut Ring, p: &Point, k: u64) -> Result<Point, Halt> {
        if k == 1 {
            return Ok(p.clone());
        }
        let mut lo = p.clone();
        let mut hi = self.double(r, p)?;
        for bit in (0..63 - k.leading_zeros()).rev() {
            if (k >> bit) & 1 == 1 {
                lo = Curve::add(r, &hi, &lo, p)?;
                hi = self.double(r, &hi)?;
            } else {
                hi = Curve::add(r, &hi, &lo, p)?;
                lo = self.double(r, &lo)?;
            }
        }
        Ok(lo)
    }
}

/// None for a degenerate curve that reveals no factor.
fn suyama(r: &mut Ring, sigma: u64) -> Result<Option<(Curve, Point)>, Halt> {
    let n = r.n;
    let s = BigUint::from(sigma) % n;
    let cube = |r: &mut Ring, a: &BigUint| -> Result<BigUint, Halt> {
        let sq = r.mul(a, a)?;
        r.mul(&sq, a)
    };
    let s2 = r.mul(&s, &s)?;
    let u = r.sub(&s2, &(BigUint::from(5u32) % n));
    let v = r.mul(&s, &BigUint::from(4u32))?;
    let u3 = cube(r, &u)?;
    let v3 = cube(r, &v)?;
    let vmu3 = cube(r, &r.sub(&v, &u))?;
    let u_times_3 = r.mul(&u, &BigUint::from(3u32))?;
    let num = r.mul(&vmu3, &r.add(&u_times_3, &v))?;
    let u3v = r.mul(&u3, &v)?;
    let den = r.mul(&u3v, &BigUint::from(16u32))?;
    let Some(inv) = mod_inverse(&den, n) else {
        return r.proper_gcd(&den).map_or(Ok(None), |g| Err(Halt::Found(g)));
    };
    Ok(Some((Curve { a24: r.mul(&num, &inv)? }, Point { x: u3, z: v3 })))
}

fn mod_inverse(a: &BigUint, n: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let e = BigInt::from(a.clone()).extended_gcd(&BigInt::from(n.clone()));
    if !e.gcd.is_one() {
        return None;
    }
    let m = BigInt::from(n.clone());
    Some(((e.x % &m + &m) % &m).to_biguint().expect("nonnegative"))
}

fn primes_up_to(limit: u64) -> Vec<bool> {
    let mut sieve = vec![true; limit as usize + 1];
    sieve[0] = false;
    if limit >= 1 {
        sieve[1] = false;
    }
    let mut i = 2usize;
    while i * i <= limit as usize {
        if sieve[i] {
            sieve[i * i..].iter_mut().step_by(i).for_each(|c| *c = false);
        }
        i += 1;
    }
    sieve
}

fn run_curve(r: &mut Ring, sigma: u64, b1: u64, prime: &[bool]) -> Result<Option<BigUint>, Halt> {
    let Some((curve, mut q)) = suyama(r, sigma)? else {
        return Ok(None);
    };
    for p in (2..=b1).filter(|&p| prime[p as usize]) {
        let mut pk = p;
        while pk <= b1 / p {
            pk *= p;
        }
        q = curve.ladder(r, &q, pk)?;
    }
    if let Some(g) = r.proper_gcd(&q.z) {
        return Ok(Some(g));
    }
    if q.z.is_zero() {
        return Ok(None);
    }

    // stage 2: primes ℓ in (b1, b2] as ℓ = mD ± j with gcd(j, D) = 1
    let b2 = b1 * B2_RATIO;
    let half = WHEEL / 2;
    let q2 = curve.double(r, &q)?;
    let mut odd = vec![q.clone()];
    let mut prev = q.clone();
    let mut cur = Curve::add(r, &q2, &q, &q)?;
    for _ in (3..half).step_by(2) {
        odd.push(cur.clone());
        let next = Curve::add(r, &cur, &q2, &prev)?;
        prev = std::mem::replace(&mut cur, next);
    }
    let baby: Vec<(u64, Point)> = (1..half).step_by(2).zip(odd).filter(|(j, _)| j.gcd(&WHEEL) == 1).collect();
    let giant = curve.ladder(r, &q, WHEEL)?;
    // b1 ≥ 2·WHEEL for every level, so m − 1 ≥ 1
    let mut m = b1 / WHEEL;
    let mut last = curve.ladder(r, &q, (m - 1) * WHEEL)?;
    let mut here = curve.ladder(r, &q, m * WHEEL)?;
    let mut acc = BigUint::one();
    while m * WHEEL <= b2 + half {
        for (j, s) in &baby {
            let hit = |l: u64| l > b1 && l <= b2 && prime[l as usize];
            if hit(m * WHEEL + j) || hit(m * WHEEL - j) {
                let a = r.mul(&here.x, &s.z)?;
                let b = r.mul(&s.x, &here.z)?;
                let t = r.sub(&a, &b);
                acc = r.mul(&acc, &t)?;
            }
        }
        let next = Curve::add(r, &here, &giant, &last)?;
        last = std::mem::replace(&mut here, next);
        m += 1;
    }
    Ok(r.proper_gcd(&acc))
}

/// A proper factor of the composite `n`, or None once the meter runs out
/// (or, improbably, every configured curve fails).
pub(crate) fn ecm_split(n: &BigUint, meter: &mut WorkMeter) -> Option<BigUint> {
    let b2_max = LEVELS.last().map_or(0, |l| l.0) * B2_RATIO + WHEEL;
    static PRIME: std::sync::OnceLock<Vec<bool>> = std::sync::OnceLock::new();
    let prime = PRIME.get_or_init(|| primes_up_to(b2_max));
    let mut ring = Ring { n, meter, pending: 0 };
    let mut sigma = 6u64;
    for &(b1, curves) in LEVELS {
        for _ in 0..curves {
            let outcome = run_curve(&mut ring, sigma, b1, prime);
            sigma += 1;
            match outcome {
                Ok(Some(g)) => {
                    let _ = ring.settle();
                    return Some(g);
                }
                Ok(None) => {}
                Err(Halt::Found(g)) => {
                    let _ = ring.settle();
                    return Some(g);
                }
                Err(Halt::OutOfWork) => return None,
            }
        }
    }
    let _ = ring.settle();
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor::Budget;

    #[test]
    fn splits_a_cofactor_beyond_rho_reach() {
        // (2^89 + 1) / (3 · 179 · 62020897) has a 17-digit prime factor
        let n: BigUint = "11503417956320339164987767897141568728042487".parse().unwrap();
        let budget = Budget::default().scaled(10);
        let mut meter = WorkMeter::new(&budget);
        let d = ecm_split(&n, &mut meter).expect("factor found");
        assert_eq!(d, BigUint::from(18_584_774_046_020_617u64));
        assert!((&n % &d).is_zero() && !d.is_one() && d != n);
        let mut again = WorkMeter::new(&budget);
        assert_eq!(ecm_split(&n, &mut again), Some(d));
        assert_eq!(meter.used(), again.used());
    }

    #[test]
    fn gives_up_when_out_of_work() {
        let n: BigUint = "11503417956320339164987767897141568728042487".parse().unwrap();
        let mut meter = WorkMeter::new(&Budget { max_work: 1000, max_digits: 2000 });
        assert_eq!(ecm_split(&n, &mut meter), None);
    }
}
