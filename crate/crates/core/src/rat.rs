//! Exact rational helpers: literal parsing and human-readable rendering.

use num::{BigInt, One, Signed, Zero};

pub use praml_lp::Rat;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn zero() -> Rat {
    Rat::zero()
}

/// Parses `3`, `-3`, `0.25`, `3/4` exactly.
pub fn parse(text: &str) -> Option<Rat> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n: BigInt = parse_decimal(n)?.to_integer();
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Rat::new(n, d)
    } else {
        parse_decimal(body)?
    };
    Some(if neg { -value } else { value })
}

fn parse_decimal(text: &str) -> Option<Rat> {
    if text.is_empty() || text.starts_with('+') || text.starts_with('-') {
        return None;
    }
    match text.split_once('.') {
        None => Some(Rat::from_integer(text.parse().ok()?)),
        Some((whole, fracpart)) => {
            if fracpart.is_empty() || !fracpart.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let whole: BigInt = if whole.is_empty() {
                BigInt::zero()
            } else {
                whole.parse().ok()?
            };
            let scale = num::pow(BigInt::from(10), fracpart.len());
            let f: BigInt = fracpart.parse().ok()?;
            Some(Rat::new(whole * &scale + f, scale))
        }
    }
}

/// `a/b` or `a`, never a decimal.
pub fn render(r: &Rat) -> String {
    praml_lp::format::render_rat(r)
}

/// Decimal rendering rounded half away from zero to `digits` places.
pub fn to_decimal(r: &Rat, digits: usize) -> String {
    let scale = num::pow(BigInt::from(10), digits);
    let scaled = r.abs() * Rat::from_integer(scale.clone());
    let rounded = (scaled + Rat::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
    let whole = &rounded / &scale;
    let part = &rounded % &scale;
    let sign = if r.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{:0>width$}", part.to_string(), width = digits)
    }
}

/// `a/b (x.xx)` for non-integers, `a` otherwise.
pub fn render_with_decimal(r: &Rat) -> String {
    if r.is_integer() {
        render(r)
    } else {
        format!("{} ({})", render(r), to_decimal(r, 2))
    }
}

/// Rounds to `digits` decimal places, as an exact rational.
pub fn round_to_digits(r: &Rat, digits: u32) -> Rat {
    let scale = num::pow(BigInt::from(10), digits as usize);
    let scaled = r * Rat::from_integer(scale.clone());
    let rounded = (scaled + Rat::new(BigInt::one(), BigInt::from(2))).floor();
    rounded / Rat::from_integer(scale)
}

pub fn to_f64(r: &Rat) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_probability(r: &Rat) -> bool {
    !r.is_negative() && *r <= Rat::one()
}
