//! Exact rational helpers: parsing of decimal/fraction strings and
//! deterministic decimal rendering.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"3"`, `"-0.25"`, `"1e-3"`, `"2.5E2"` or `"1/3"` into an exact rational.
///
/// Decimal input is converted digit by digit; it never passes through `f64`.
pub fn parse_rational(input: &str) -> Result<BigRational> {
    let s = input.trim();
    let bad = || Error::InvalidNumber(input.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let factor = BigRational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `num/den` rendering, always with an explicit denominator.
pub fn format_exact(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Fixed-notation decimal with `sig` significant digits (round half up),
/// trailing zeros trimmed.
pub fn format_decimal(r: &BigRational, sig: usize) -> String {
    assert!(sig > 0);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let num = r.numer().abs().to_biguint().expect("abs is non-negative");
    let den = r.denom().abs().to_biguint().expect("abs is non-negative");

    // exponent e with 10^e <= |r| < 10^(e+1)
    let mut e = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ten = BigUint::from(10u32);
    let pow10 = |k: u64| num_traits::pow(ten.clone(), k as usize);
    let ge_pow = |e: i64| -> bool {
        // |r| >= 10^e ?
        if e >= 0 {
            num >= &den * pow10(e as u64)
        } else {
            &num * pow10((-e) as u64) >= den
        }
    };
    while !ge_pow(e) {
        e -= 1;
    }
    while ge_pow(e + 1) {
        e += 1;
    }

    // scaled = round(|r| * 10^(sig-1-e))
    let shift = sig as i64 - 1 - e;
    let (sn, sd) = if shift >= 0 {
        (&num * pow10(shift as u64), den.clone())
    } else {
        (num.clone(), &den * pow10((-shift) as u64))
    };
    let (q, rem) = sn.div_rem(&sd);
    let mut scaled = if rem * 2u32 >= sd { q + 1u32 } else { q };
    let mut shift = shift;
    if scaled == pow10(sig as u64) {
        scaled /= 10u32;
        shift -= 1;
    }

    let digits = scaled.to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if shift <= 0 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', (-shift) as usize));
        return out;
    }
    let shift = shift as usize;
    if digits.len() > shift {
        let (int, frac) = digits.split_at(digits.len() - shift);
        out.push_str(int);
        let frac = frac.trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', shift - digits.len()));
        out.push_str(digits.trim_end_matches('0'));
    }
    out
}

/// Nearest `f64`; used only at presentation and for float-side comparisons.
pub fn to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    format_decimal(r, 17).parse().unwrap_or(f64::NAN)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_uint(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

/// Binomial coefficient C(n, k) as an unbounded integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}
