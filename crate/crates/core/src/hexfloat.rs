//! Lossless C99-style hexadecimal float formatting and parsing.
//!
//! Artifact files that must round-trip bit-exactly (frame dumps, periodic
//! point reports) store f64 values as `0x1.<mantissa>p<exp>` strings.

/// Format a finite f64 as a canonical hex-float string.
pub fn format_hex_f64(x: f64) -> String {
    assert!(x.is_finite(), "hex float formatting of non-finite {x}");
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7FF) as i64;
    let mant = bits & 0x000F_FFFF_FFFF_FFFF;
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 {
        ('0', -1022i64)
    } else {
        ('1', exp - 1023)
    };
    let mut mhex = format!("{mant:013x}");
    while mhex.ends_with('0') {
        mhex.pop();
    }
    if mhex.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{mhex}p{e:+}")
    }
}

/// Parse a hex-float string produced by [`format_hex_f64`].
pub fn parse_hex_f64(s: &str) -> Option<f64> {
    let s = s.trim();
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    let p = s.find(['p', 'P'])?;
    let (mant_str, exp_str) = (&s[..p], &s[p + 1..]);
    let exp: i64 = exp_str.parse().ok()?;
    let (lead_str, frac_str) = match mant_str.find('.') {
        Some(dot) => (&mant_str[..dot], &mant_str[dot + 1..]),
        None => (mant_str, ""),
    };
    if frac_str.len() > 13 {
        return None;
    }
    let lead: u64 = match lead_str {
        "0" => 0,
        "1" => 1,
        _ => return None,
    };
    let mut mant: u64 = 0;
    for (i, c) in frac_str.chars().enumerate() {
        let d = c.to_digit(16)? as u64;
        mant |= d << (48 - 4 * i as i64);
    }
    let sign_bit = (neg as u64) << 63;
    if lead == 0 {
        // zero or subnormal (exponent must be the canonical one)
        if mant == 0 {
            return Some(f64::from_bits(sign_bit));
        }
        if exp != -1022 {
            return None;
        }
        return Some(f64::from_bits(sign_bit | mant));
    }
    let biased = exp + 1023;
    if !(1..=2046).contains(&biased) {
        return None;
    }
    Some(f64::from_bits(sign_bit | ((biased as u64) << 52) | mant))
}

pub fn format_hex_slice(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|&x| format_hex_f64(x)).collect()
}

pub fn parse_hex_slice(ss: &[String]) -> Option<Vec<f64>> {
    ss.iter().map(|s| parse_hex_f64(s)).collect()
}
