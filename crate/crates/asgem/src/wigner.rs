//! Wigner 3j and 6j symbols from exact Racah sums.
//!
//! Every symbol is assembled in arbitrary-precision rational arithmetic
//! (factorials as `BigUint`, the alternating Racah series as a `BigRational`)
//! and converted to `f64` only once, at the very end. The hyperfine Stark
//! sums difference nearly-equal terms, so the symbols have to be good to
//! machine precision. Results are memoized behind a lock, keyed by the
//! canonical form of the arguments, because contour sweeps re-evaluate a
//! small set of symbols many thousands of times.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::halfint::HalfInt;

/// Errors for arguments outside the symbol domain. Selection-rule failures
/// (triangle violations, non-zero projection sums) are not errors; those
/// return 0 exactly.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AngularError {
    #[error("invalid (j, m) pair: j = {j}, m = {m} (need |m| <= j and integral j - m)")]
    InvalidPair { j: HalfInt, m: HalfInt },
    #[error("negative angular momentum magnitude: {0}")]
    NegativeMagnitude(HalfInt),
}

static CACHE_3J: Mutex<Option<HashMap<[i32; 6], f64>>> = Mutex::new(None);
static CACHE_6J: Mutex<Option<HashMap<[i32; 6], f64>>> = Mutex::new(None);

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Returns exactly 0 when the triangle condition on `(j1, j2, j3)` fails or
/// `m1 + m2 + m3 != 0`; rejects individually invalid `(j, m)` pairs.
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64, AngularError> {
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if !j.is_magnitude() {
            return Err(AngularError::NegativeMagnitude(j));
        }
        if !HalfInt::is_valid_pair(j, m) {
            return Err(AngularError::InvalidPair { j, m });
        }
    }
    if (m1 + m2 + m3) != HalfInt::ZERO || !triangle(j1, j2, j3) {
        return Ok(0.0);
    }

    let (key, sign) = canonical_3j(
        j1.twice(),
        j2.twice(),
        j3.twice(),
        m1.twice(),
        m2.twice(),
        m3.twice(),
    );

    {
        let mut guard = CACHE_3J.lock().expect("3j cache poisoned");
        if let Some(v) = guard.get_or_insert_with(HashMap::new).get(&key) {
            return Ok(sign * v);
        }
    }

    let value = compute_3j(key[0], key[1], key[2], key[3], key[4], key[5]);

    let mut guard = CACHE_3J.lock().expect("3j cache poisoned");
    guard.get_or_insert_with(HashMap::new).insert(key, value);
    Ok(sign * value)
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`.
///
/// Returns exactly 0 when any of the four triads `(j1 j2 j3)`, `(j1 j5 j6)`,
/// `(j4 j2 j6)`, `(j4 j5 j3)` violates the triangle condition.
pub fn wigner_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> Result<f64, AngularError> {
    for j in [j1, j2, j3, j4, j5, j6] {
        if !j.is_magnitude() {
            return Err(AngularError::NegativeMagnitude(j));
        }
    }
    let triads = [
        (j1, j2, j3),
        (j1, j5, j6),
        (j4, j2, j6),
        (j4, j5, j3),
    ];
    if triads.iter().any(|&(a, b, c)| !triangle(a, b, c)) {
        return Ok(0.0);
    }

    let key = canonical_6j([
        j1.twice(),
        j2.twice(),
        j3.twice(),
        j4.twice(),
        j5.twice(),
        j6.twice(),
    ]);

    {
        let mut guard = CACHE_6J.lock().expect("6j cache poisoned");
        if let Some(v) = guard.get_or_insert_with(HashMap::new).get(&key) {
            return Ok(*v);
        }
    }

    let value = compute_6j(key);

    let mut guard = CACHE_6J.lock().expect("6j cache poisoned");
    guard.get_or_insert_with(HashMap::new).insert(key, value);
    Ok(value)
}

/// Triangle condition `|j1 - j2| <= j3 <= j1 + j2` with integral perimeter.
pub fn triangle(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.twice(), j2.twice(), j3.twice());
    c <= a + b && a <= b + c && b <= c + a && (a + b + c) % 2 == 0
}

/// Drop all memoized symbols (mainly useful in tests).
pub fn clear_caches() {
    CACHE_3J.lock().expect("3j cache poisoned").take();
    CACHE_6J.lock().expect("6j cache poisoned").take();
}

// Canonical 3j form: columns sorted so j1 >= j2 >= j3 (each swap contributes
// (-1)^(j1+j2+j3)), then all m's flipped if needed so the first non-zero m is
// positive. The returned sign converts the canonical value back.
fn canonical_3j(
    dj1: i32,
    dj2: i32,
    dj3: i32,
    dm1: i32,
    dm2: i32,
    dm3: i32,
) -> ([i32; 6], f64) {
    let mut cols = [(dj1, dm1), (dj2, dm2), (dj3, dm3)];
    let mut odd_swaps = 0u32;
    // three-element sort, counting transpositions
    for i in 0..2 {
        for k in 0..2 - i {
            if cols[k] < cols[k + 1] {
                cols.swap(k, k + 1);
                odd_swaps += 1;
            }
        }
    }
    let mut flipped = false;
    let first_nonzero = cols.iter().map(|c| c.1).find(|&m| m != 0);
    if let Some(m) = first_nonzero {
        if m < 0 {
            for c in &mut cols {
                c.1 = -c.1;
            }
            flipped = true;
        }
    }
    // each odd permutation and the global m flip contribute (-1)^(j1+j2+j3);
    // two of them together cancel
    let phase_odd = ((dj1 + dj2 + dj3) / 2) % 2 != 0;
    let negate = phase_odd && ((odd_swaps % 2 == 1) != flipped);
    (
        [
            cols[0].0, cols[1].0, cols[2].0, cols[0].1, cols[1].1, cols[2].1,
        ],
        if negate { -1.0 } else { 1.0 },
    )
}

// Canonical 6j form: minimum over the 24 classical symmetries (column
// permutations and upper/lower swaps of any two columns), all of which leave
// the value unchanged.
fn canonical_6j(a: [i32; 6]) -> [i32; 6] {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    // pairs of columns whose upper/lower entries are exchanged together
    const SWAPS: [[bool; 3]; 4] = [
        [false, false, false],
        [true, true, false],
        [true, false, true],
        [false, true, true],
    ];
    let cols = [(a[0], a[3]), (a[1], a[4]), (a[2], a[5])];
    let mut best: Option<[i32; 6]> = None;
    for perm in PERMS {
        for swap in SWAPS {
            let mut v = [0i32; 6];
            for (slot, (&src, &sw)) in perm.iter().zip(swap.iter()).enumerate() {
                let (u, l) = cols[src];
                let (u, l) = if sw { (l, u) } else { (u, l) };
                v[slot] = u;
                v[slot + 3] = l;
            }
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    }
    best.expect("non-empty symmetry orbit")
}

// Racah single-sum formula in doubled-integer arguments; assumes the
// selection rules already passed.
fn compute_3j(dj1: i32, dj2: i32, dj3: i32, dm1: i32, dm2: i32, dm3: i32) -> f64 {
    let t1 = (dj1 + dj2 - dj3) / 2;
    let t2 = (dj1 - dj2 + dj3) / 2;
    let t3 = (-dj1 + dj2 + dj3) / 2;
    let x1 = (dj1 - dm1) / 2;
    let x2 = (dj1 + dm1) / 2;
    let x3 = (dj2 - dm2) / 2;
    let x4 = (dj2 + dm2) / 2;
    let x5 = (dj3 - dm3) / 2;
    let x6 = (dj3 + dm3) / 2;

    let k_min = 0.max((dj2 - dj3 - dm1) / 2).max((dj1 - dj3 + dm2) / 2);
    let k_max = t1.min(x1).min(x4);
    if k_min > k_max {
        return 0.0;
    }

    let mut series = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(t1 - k)
            * factorial(x1 - k)
            * factorial(x4 - k)
            * factorial((dj3 - dj2 + dm1) / 2 + k)
            * factorial((dj3 - dj1 - dm2) / 2 + k);
        let numer = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        series += BigRational::new(numer, BigInt::from(denom));
    }
    if series.is_zero() {
        return 0.0;
    }

    // under-the-root factor: triangle coefficient times the (j +- m)! product
    let root = BigRational::new(
        BigInt::from(
            factorial(t1)
                * factorial(t2)
                * factorial(t3)
                * factorial(x1)
                * factorial(x2)
                * factorial(x3)
                * factorial(x4)
                * factorial(x5)
                * factorial(x6),
        ),
        BigInt::from(factorial((dj1 + dj2 + dj3) / 2 + 1)),
    );

    let mag = sqrt_rational(&(&series * &series * root));
    let mut sign = if series.is_negative() { -1.0 } else { 1.0 };
    if ((dj1 - dj2 - dm3) / 2) % 2 != 0 {
        sign = -sign;
    }
    sign * mag
}

fn compute_6j(a: [i32; 6]) -> f64 {
    let [d1, d2, d3, d4, d5, d6] = a;
    let t = [
        (d1 + d2 + d3) / 2,
        (d1 + d5 + d6) / 2,
        (d4 + d2 + d6) / 2,
        (d4 + d5 + d3) / 2,
    ];
    let q = [
        (d1 + d2 + d4 + d5) / 2,
        (d2 + d3 + d5 + d6) / 2,
        (d1 + d3 + d4 + d6) / 2,
    ];
    let k_min = *t.iter().max().expect("triads");
    let k_max = *q.iter().min().expect("quads");
    if k_min > k_max {
        return 0.0;
    }

    let mut series = BigRational::zero();
    for k in k_min..=k_max {
        let denom: BigUint = t.iter().map(|ti| factorial(k - ti)).product::<BigUint>()
            * q.iter().map(|qi| factorial(qi - k)).product::<BigUint>();
        let mut numer = BigInt::from(factorial(k + 1));
        if k % 2 != 0 {
            numer = -numer;
        }
        series += BigRational::new(numer, BigInt::from(denom));
    }
    if series.is_zero() {
        return 0.0;
    }

    let mut root = BigRational::one();
    for &(x, y, z) in &[(d1, d2, d3), (d1, d5, d6), (d4, d2, d6), (d4, d5, d3)] {
        root *= triangle_coefficient(x, y, z);
    }

    let mag = sqrt_rational(&(&series * &series * root));
    if series.is_negative() {
        -mag
    } else {
        mag
    }
}

fn triangle_coefficient(da: i32, db: i32, dc: i32) -> BigRational {
    BigRational::new(
        BigInt::from(
            factorial((da + db - dc) / 2)
                * factorial((da - db + dc) / 2)
                * factorial((-da + db + dc) / 2),
        ),
        BigInt::from(factorial((da + db + dc) / 2 + 1)),
    )
}

fn factorial(n: i32) -> BigUint {
    debug_assert!(n >= 0, "factorial of negative argument");
    let mut acc = BigUint::one();
    for k in 2..=n.max(1) as u64 {
        acc *= k;
    }
    acc
}

// sqrt of a non-negative rational, converted to f64 without overflowing on
// the way: the quotient is scaled to ~96 significant bits before conversion.
fn sqrt_rational(r: &BigRational) -> f64 {
    debug_assert!(!r.is_negative());
    if r.is_zero() {
        return 0.0;
    }
    let p = r.numer().magnitude();
    let q = r.denom().magnitude();
    let shift: i64 = 96 + q.bits() as i64 - p.bits() as i64;
    let scaled = if shift >= 0 {
        (p << shift as u64) / q
    } else {
        p / (q << (-shift) as u64)
    };
    let val = scaled.to_f64().expect("finite scaled quotient") * 2f64.powi(-shift as i32);
    val.sqrt()
}
