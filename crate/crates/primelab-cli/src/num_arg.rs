//! Flag-value parsers accepting plain, scientific (1e7) and power (2^24)
//! notation.

/// Nonnegative integer count; scientific notation must still be integral.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let b: u64 = base
            .trim()
            .parse()
            .map_err(|_| format!("invalid base in `{s}`"))?;
        let e: u32 = exp
            .trim()
            .parse()
            .map_err(|_| format!("invalid exponent in `{s}`"))?;
        return b.checked_pow(e).ok_or_else(|| format!("`{s}` overflows"));
    }
    if s.contains(['e', 'E', '.']) {
        let v: f64 = s.parse().map_err(|_| format!("invalid number `{s}`"))?;
        if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v > 9.0e15 {
            return Err(format!("`{s}` is not an integer count"));
        }
        return Ok(v as u64);
    }
    s.parse().map_err(|_| format!("invalid number `{s}`"))
}

/// Real number, also accepting b^e power notation.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let b: f64 = base
            .trim()
            .parse()
            .map_err(|_| format!("invalid base in `{s}`"))?;
        let e: i32 = exp
            .trim()
            .parse()
            .map_err(|_| format!("invalid exponent in `{s}`"))?;
        return Ok(b.powi(e));
    }
    s.parse().map_err(|_| format!("invalid number `{s}`"))
}

/// Comma-separated nonnegative offsets, e.g. `0,2,6`.
#[derive(Debug, Clone)]
pub struct OffsetList(pub Vec<u64>);

pub fn parse_offsets(s: &str) -> Result<OffsetList, String> {
    let offsets = s
        .split(',')
        .map(|t| parse_count(t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if offsets.is_empty() {
        return Err("offset list is empty".into());
    }
    Ok(OffsetList(offsets))
}

/// Semicolon-separated rows of integers; within a row the last entry is the
/// constant term, e.g. `1 0 0; 1 1 0; 1 2 0`.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub coefficients: Vec<Vec<i64>>,
    pub offsets: Vec<i64>,
}

pub fn parse_system(s: &str) -> Result<SystemSpec, String> {
    let mut coefficients = Vec::new();
    let mut offsets = Vec::new();
    for row in s.split(';') {
        let nums = row
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| format!("invalid integer `{t}`")))
            .collect::<Result<Vec<_>, _>>()?;
        if nums.len() < 2 {
            return Err(format!("row `{}` needs coefficients and a constant", row.trim()));
        }
        let (coeffs, tail) = nums.split_at(nums.len() - 1);
        coefficients.push(coeffs.to_vec());
        offsets.push(tail[0]);
    }
    Ok(SystemSpec {
        coefficients,
        offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_notations() {
        assert_eq!(parse_count("123").unwrap(), 123);
        assert_eq!(parse_count("1e7").unwrap(), 10_000_000);
        assert_eq!(parse_count("2^24").unwrap(), 16_777_216);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("2^80").is_err());
    }

    #[test]
    fn real_notations() {
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert_eq!(parse_real("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_real("2^-2").unwrap(), 0.25);
    }

    #[test]
    fn list_and_system() {
        assert_eq!(parse_offsets("0, 2,6").unwrap().0, vec![0, 2, 6]);
        let sys = parse_system("1 0 0; 1 1 0; 1 2 0").unwrap();
        assert_eq!(sys.coefficients, vec![vec![1, 0], vec![1, 1], vec![1, 2]]);
        assert_eq!(sys.offsets, vec![0, 0, 0]);
        assert!(parse_system("1; x 2").is_err());
    }
}
